//! Build the prime-direction line family and inspect its counting claims.

use hdlab::grid::GridSpec;
use hdlab::supersat::{build_line_family, summarize, SupersatConfig};

fn main() -> hdlab::Result<()> {
    let config = SupersatConfig::with_t(GridSpec::new(24, 2)?, 3, hdlab::arith::ratio(3, 1))?;
    let family = build_line_family(&config, 1_000_000)?;
    let s = summarize(&family);
    println!("primes {:?}", s.primes);
    println!("|U| = {}, |V| = {}, |L| = {}", s.size_u, s.size_v, s.size_l);
    println!("coinciding lines from distinct directions: {}", s.collisions);
    println!("lines through each point: {}..={} (claim holds: {})", s.coverage_min, s.coverage_max, s.coverage_holds);
    println!("prime-count sandwich applicable {} holds {}", s.sandwich.applicable, s.sandwich.holds);
    Ok(())
}
