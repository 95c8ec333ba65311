//! Project survivors to the plane, dualize, and certify the line family.

use hdlab::arith::ratio;
use hdlab::grid::{GridSpec, Limits};
use hdlab::plan::choose_parameters;
use hdlab::planar::emit_certificate;
use hdlab::randcon::run_random_subset;

fn main() -> hdlab::Result<()> {
    let plan = choose_parameters(3, &ratio(2, 5))?;
    let grid = GridSpec::new(4, plan.k)?;
    let run = run_random_subset(grid, 0.25, 7, plan.u, &Limits::default())?;
    let cert = emit_certificate(&run, &plan, 1_000_000)?;
    cert.validate()?;
    println!("|F| = {}, (p, {})-property proved for p = {}", cert.family.lines.len(), cert.q, cert.p);
    println!(
        "piercing: lower {} (ceil {}), exact {:?}, greedy {}",
        cert.piercing_lower, cert.piercing_lower_ceil, cert.piercing_exact, cert.piercing_greedy
    );
    if let Some(t) = cert.realized_t {
        println!("realized exponent {t:.4}");
    }
    print!("{}", cert.histogram_csv());
    Ok(())
}
