//! Seeded sample, deletion of overfull lines, and the independent-set search.

use hdlab::arith::ratio;
use hdlab::grid::Limits;
use hdlab::plan::choose_parameters;
use hdlab::randcon::{run_construction, IndependentSearch};

fn main() -> hdlab::Result<()> {
    let plan = choose_parameters(3, &ratio(2, 5))?;
    for seed in 1..=3 {
        let rep = run_construction(&plan, 6, seed, 1_000_000, &Limits::default())?;
        let verdict = match &rep.independent {
            IndependentSearch::Witness { points } => format!("independent {}-set found", points.len()),
            IndependentSearch::NoneExists { max_size_upper } => format!("none; max <= {max_size_upper}"),
            IndependentSearch::Unknown { best_size, upper_bound } => format!("unknown; {best_size}..={upper_bound}"),
        };
        println!(
            "seed {seed}: sampled {}, deleted {}, kept {}, p = {}: {verdict}",
            rep.run.sample.len(),
            rep.run.deleted.len(),
            rep.run.survivors.len(),
            rep.p_target
        );
    }
    Ok(())
}
