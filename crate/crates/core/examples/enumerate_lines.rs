//! Lines of a small grid and the statistics of its collinear-triple hypergraph.

use hdlab::grid::{collinear_stats, count_collinear_tuples, enumerate_lines, hyperedge_count_bound, GridSpec, Limits};

fn main() -> hdlab::Result<()> {
    let limits = Limits::default();
    let grid = GridSpec::new(5, 3)?;
    let lines = enumerate_lines(grid, 3, &limits)?;
    println!("[5]^3 has {} lines with at least 3 points", lines.len());
    for line in lines.iter().filter(|l| l.count == 5).take(4) {
        println!("  anchor {:?} direction {:?}", line.anchor.coords(), line.direction);
    }
    let stats = collinear_stats(grid, 3, &limits)?;
    println!("collinear triples: {}", count_collinear_tuples(grid, 3, &limits)?);
    println!("average degree {}, co-degree maxima {:?}", stats.avg_degree, stats.codegree_max);
    println!("closed-form upper bound: {:.1}", hyperedge_count_bound(5, 3, 3)?);
    Ok(())
}
