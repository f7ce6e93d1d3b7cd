//! The parameter chain `δ → Δ → p → β_p → L_p → a → N` for a few sizes.

use relspec::regression::select_parameters;

fn main() -> relspec::Result<()> {
    println!("{:>6} {:>6} {:>10} {:>10} {:>12}", "n", "p", "beta_p", "a", "N");
    for n in [100, 200, 500, 1000, 4000] {
        let r = select_parameters(0.01, n)?;
        println!("{n:>6} {:>6} {:>10.6} {:>10.3e} {:>12}", r.p, r.beta_p, r.a, r.n_iter);
    }
    println!("{}", serde_json::to_string_pretty(&select_parameters(0.5, 2)?).expect("serializes"));
    Ok(())
}
