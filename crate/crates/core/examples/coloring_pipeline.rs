//! Chromatic lower bound for the q-section hypergraph and greedy upper trials.

use hdlab::arith::ratio;
use hdlab::coloring::{build_hq, chromatic_number, gq_lower_pipeline, greedy_upper_experiment};
use hdlab::grid::{GridSpec, Limits};

fn main() -> hdlab::Result<()> {
    let grid: Vec<_> = GridSpec::new(3, 2)?.points().collect();
    let chi = chromatic_number(&build_hq(&grid, 3)?, 1_000_000);
    println!("chi(H_3([3]^2)) = {:?}, coloring {:?}", chi.exact, chi.exact_coloring);

    let rep = gq_lower_pipeline(3, &ratio(2, 5), 24, 1, 1_000_000, &Limits::default())?;
    println!(
        "|P| = {}, max independent <= {}, pigeonhole {} <= chi {:?}",
        rep.m, rep.max_independent_upper, rep.pigeonhole_lower, rep.chromatic.exact
    );
    let greedy = greedy_upper_experiment(3, 40, 5, 1)?;
    println!("greedy on 40 random points: max {} colors, mean ratio {:.3}", greedy.max_greedy, greedy.mean_ratio);
    Ok(())
}
