//! Independent-set count bound and the container step ledger at a few scales.

use hdlab::containers::{independent_set_count_log_bound, step_ledger, Mode};

fn main() -> hdlab::Result<()> {
    let (k, r, s0, f) = (4, 3, 0.5, 0.025);
    for ln_n in [10f64.ln() * 6.0, 1e3, 1e6] {
        let ledger = step_ledger(ln_n, k, r, s0, f)?;
        let count = independent_set_count_log_bound(ln_n, k, r, s0, f, 100, Mode::FormulaOnly)?;
        println!(
            "ln n = {ln_n:>10.2}: steps {:.2} (cap {:.2}), ln bound {:?}, hypotheses hold {}",
            ledger.steps_exact, ledger.steps_max, count.ln_bound, count.hypotheses.holds
        );
    }
    match independent_set_count_log_bound(10f64.ln() * 6.0, k, r, s0, f, 100, Mode::Strict) {
        Ok(_) => println!("strict mode accepted n = 1e6"),
        Err(e) => println!("strict mode: {e}"),
    }
    Ok(())
}
