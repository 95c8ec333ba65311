//! Parameter choices for a few (q, eta) pairs and the exponent sweep over k.

use hdlab::arith::{parse_rational, ratio_string};
use hdlab::plan::{choose_parameters, coloring_plan, sweep_k};

fn main() -> hdlab::Result<()> {
    for (q, eta) in [(3, "2/5"), (5, "1/4"), (12, "1/10")] {
        let eta = parse_rational(eta)?;
        let plan = choose_parameters(q, &eta)?;
        let color = coloring_plan(q, &eta)?;
        println!(
            "q={q} eta={}: k={} u={} target {} (ideal {}, floor {}); coloring target {}",
            ratio_string(&eta),
            plan.k,
            plan.u,
            ratio_string(&plan.target),
            ratio_string(&plan.target_ideal),
            ratio_string(&plan.floor),
            ratio_string(&color.target),
        );
    }
    let sweep = sweep_k(4, 2..=16)?;
    println!("q=4 sweep: argmax k {:?}, max {}, unimodal {}", sweep.argmax, ratio_string(&sweep.max), sweep.unimodal);
    Ok(())
}
