//! The grid `[n]^k`, its maximal lines, and the collinearity hypergraph
//! `H(n, k, r)` whose hyperedges are the collinear `r`-subsets of the grid.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{binomial, factorial_f64, serde_biguint, serde_biguint_map, serde_ratio};
use crate::error::{domain, Error, Result};
use crate::geometry::{primitive_direction, Point};

/// The grid `[n]^k = {1..n}^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: u32,
    pub k: u32,
}

impl GridSpec {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 || k == 0 {
            return domain(format!("grid needs n >= 1 and k >= 1, got n={n}, k={k}"));
        }
        Ok(GridSpec { n, k })
    }

    pub fn point_count(&self) -> u64 {
        (self.n as u64).pow(self.k)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.k as usize && x.iter().all(|&c| c >= 1 && c <= self.n as i64)
    }

    /// Position of a grid point in lexicographic order.
    pub fn index_of(&self, x: &[i64]) -> usize {
        x.iter().fold(0usize, |acc, &c| acc * self.n as usize + (c - 1) as usize)
    }

    pub fn point_at(&self, mut index: usize) -> Point {
        let n = self.n as usize;
        let mut coords = vec![0i64; self.k as usize];
        for c in coords.iter_mut().rev() {
            *c = (index % n) as i64 + 1;
            index /= n;
        }
        Point(coords)
    }

    /// All grid points in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.point_count() as usize).map(move |i| self.point_at(i))
    }
}

/// Work caps for enumeration. Defaults admit `n^k <= 10^6` point scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub max_points: u64,
    /// Cap on point-direction probes during line enumeration.
    pub max_work: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_points: 1_000_000, max_work: 2e9 }
    }
}

/// A maximal collinear subset of the grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridLine {
    /// Lexicographically smallest grid point on the line.
    pub anchor: Point,
    /// Primitive direction, first nonzero coordinate positive.
    pub direction: Vec<i64>,
    /// Number of grid points on the line.
    pub count: u32,
}

impl GridLine {
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.count as i64).map(move |t| self.anchor.offset(&self.direction, t))
    }
}

/// Canonical directions that can carry at least `min_count` grid points.
fn candidate_directions(grid: GridSpec, min_count: u32) -> Vec<Vec<i64>> {
    let n = grid.n as i64;
    let k = grid.k as usize;
    let reach = if min_count <= 1 { n - 1 } else { (n - 1) / (min_count as i64 - 1) };
    let side = (2 * reach + 1) as usize;
    let total = side.pow(k as u32);
    (0..total)
        .filter_map(|mut idx| {
            let mut v = vec![0i64; k];
            for c in v.iter_mut().rev() {
                *c = (idx % side) as i64 - reach;
                idx /= side;
            }
            match primitive_direction(&v) {
                Some(p) if p == v => Some(v),
                _ => None,
            }
        })
        .collect()
}

/// Point-direction probes needed to enumerate lines with `min_count`
/// points: about half of the `(2 reach + 1)^k` offset vectors, times `n^k`.
fn estimate_work(grid: GridSpec, min_count: u32) -> f64 {
    let n = grid.n as f64;
    let reach = if min_count <= 1 { n - 1.0 } else { ((n - 1.0) / (min_count as f64 - 1.0)).floor() };
    let dirs = ((2.0 * reach + 1.0).powi(grid.k as i32) - 1.0) / 2.0;
    dirs * grid.point_count() as f64
}

fn check_limits(grid: GridSpec, min_count: u32, limits: &Limits) -> Result<()> {
    if grid.point_count() > limits.max_points {
        return Err(Error::ResourceLimit {
            what: format!("grid [{}]^{} points", grid.n, grid.k),
            estimate: grid.point_count() as f64,
            cap: limits.max_points as f64,
        });
    }
    let est = estimate_work(grid, min_count);
    if est > limits.max_work {
        return Err(Error::ResourceLimit {
            what: format!("line scan of [{}]^{} for >= {} points", grid.n, grid.k, min_count),
            estimate: est,
            cap: limits.max_work,
        });
    }
    Ok(())
}

/// Every maximal collinear subset of the grid with at least `min_count`
/// points, sorted by (anchor, direction).
pub fn enumerate_lines(grid: GridSpec, min_count: u32, limits: &Limits) -> Result<Vec<GridLine>> {
    if min_count < 2 {
        return Err(Error::Precondition(format!("min_count must be >= 2, got {min_count}")));
    }
    check_limits(grid, min_count, limits)?;
    if grid.n == 1 {
        return Ok(Vec::new());
    }
    let dirs = candidate_directions(grid, min_count);
    let mut lines: Vec<GridLine> = dirs
        .par_iter()
        .flat_map_iter(|dir| {
            let mut found = Vec::new();
            for idx in 0..grid.point_count() as usize {
                let start = grid.point_at(idx);
                if grid.contains(&start.offset(dir, -1).0) {
                    continue;
                }
                let mut count = 1u32;
                let mut cur = start.offset(dir, 1);
                while grid.contains(&cur.0) {
                    count += 1;
                    cur = cur.offset(dir, 1);
                }
                if count >= min_count {
                    found.push(GridLine { anchor: start, direction: dir.clone(), count });
                }
            }
            found
        })
        .collect();
    lines.sort();
    Ok(lines)
}

/// `|E(H(n, k, r))|`: the exact number of collinear `r`-subsets of `[n]^k`.
pub fn count_collinear_tuples(grid: GridSpec, r: u32, limits: &Limits) -> Result<BigUint> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be >= 2, got {r}")));
    }
    let lines = enumerate_lines(grid, r, limits)?;
    Ok(lines.iter().map(|l| binomial(l.count as u64, r as u64)).sum())
}

/// Piecewise upper bound on `|E(H(n, k, r))|`, natural logarithm, valid for
/// `n >= max(k, r)`. The `r > k + 1` branch is applied for every such `r`.
pub fn hyperedge_count_bound(n: u32, k: u32, r: u32) -> Result<f64> {
    if n < k.max(r) {
        return domain(format!("bound needs n >= max(k, r); got n={n}, k={k}, r={r}"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let rf = factorial_f64(r);
    Ok(if r <= k {
        kf * 2f64.powi((r + k) as i32) / rf * nf.powi(2 * k as i32)
    } else if r == k + 1 {
        kf * 2f64.powi((r + k) as i32) / rf * nf.powi(2 * k as i32) * nf.ln()
    } else {
        kf * 2f64.powi((r + k + 1) as i32) / rf * nf.powi((r + k - 1) as i32)
    })
}

/// Exact degree and co-degree statistics of `H(n, k, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearStats {
    pub r: u32,
    #[serde(with = "serde_biguint")]
    pub edge_count: BigUint,
    /// `r * |E| / n^k`.
    #[serde(with = "serde_ratio")]
    pub avg_degree: BigRational,
    /// `j -> Delta_j` for `2 <= j <= r`.
    #[serde(with = "serde_biguint_map")]
    pub codegree_max: BTreeMap<u32, BigUint>,
    pub max_line_count: u32,
}

/// Degrees and co-degrees from the line structure: `j >= 2` collinear points
/// determine their line, so a `j`-set on a line with `c` points extends to
/// `C(c - j, r - j)` hyperedges and a non-collinear `j`-set to none.
pub fn collinear_stats(grid: GridSpec, r: u32, limits: &Limits) -> Result<CollinearStats> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be >= 2, got {r}")));
    }
    let lines = enumerate_lines(grid, 2, limits)?;
    let edge_count: BigUint = lines.iter().map(|l| binomial(l.count as u64, r as u64)).sum();
    let max_line_count = lines.iter().map(|l| l.count).max().unwrap_or(0);
    let mut codegree_max = BTreeMap::new();
    for j in 2..=r {
        let best = lines
            .iter()
            .filter(|l| l.count >= j.max(r))
            .map(|l| binomial((l.count - j) as u64, (r - j) as u64))
            .max()
            .unwrap_or_else(BigUint::zero);
        codegree_max.insert(j, best);
    }
    let avg_degree = BigRational::new(
        BigInt::from(edge_count.clone()) * BigInt::from(r),
        BigInt::from(grid.point_count()),
    );
    Ok(CollinearStats { r, edge_count, avg_degree, codegree_max, max_line_count })
}

/// Degree of every grid point in `H(n, k, r)`, in lexicographic point order.
pub fn vertex_degrees(grid: GridSpec, r: u32, limits: &Limits) -> Result<Vec<BigUint>> {
    let lines = enumerate_lines(grid, r.max(2), limits)?;
    let mut deg = vec![BigUint::zero(); grid.point_count() as usize];
    for line in &lines {
        let per_point = binomial(line.count as u64 - 1, r as u64 - 1);
        for p in line.points() {
            deg[grid.index_of(&p.0)] += &per_point;
        }
    }
    Ok(deg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: u32, k: u32) -> GridSpec {
        GridSpec::new(n, k).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let lim = Limits::default();
        assert!(enumerate_lines(g(1, 2), 2, &lim).unwrap().is_empty());
        assert_eq!(enumerate_lines(g(3, 2), 3, &lim).unwrap().len(), 8);
        assert_eq!(enumerate_lines(g(2, 2), 2, &lim).unwrap().len(), 6);
        assert!(enumerate_lines(g(3, 2), 1, &lim).is_err());
    }

    #[test]
    fn anchors_are_lexicographically_smallest() {
        for line in enumerate_lines(g(4, 3), 2, &Limits::default()).unwrap() {
            let pts: Vec<Point> = line.points().collect();
            assert_eq!(pts.iter().min().unwrap(), &line.anchor);
            assert!(pts.iter().all(|p| g(4, 3).contains(&p.0)));
        }
    }

    #[test]
    fn count_examples() {
        let lim = Limits::default();
        assert_eq!(count_collinear_tuples(g(2, 2), 3, &lim).unwrap(), BigUint::zero());
        assert_eq!(count_collinear_tuples(g(3, 2), 3, &lim).unwrap(), BigUint::from(8u32));
        assert_eq!(count_collinear_tuples(g(4, 2), 3, &lim).unwrap(), BigUint::from(44u32));
    }

    #[test]
    fn bound_examples() {
        let b = hyperedge_count_bound(3, 2, 3).unwrap();
        assert!((b - 2.0 * 32.0 / 6.0 * 81.0 * 3f64.ln()).abs() < 1e-9);
        assert!((b - 949.2).abs() < 0.05);
        assert!((hyperedge_count_bound(3, 3, 3).unwrap() - 23328.0).abs() < 1e-9);
        assert!((hyperedge_count_bound(4, 2, 4).unwrap() - 10922.666_666_666_666).abs() < 1e-6);
        assert!(hyperedge_count_bound(2, 3, 3).is_err());
    }

    #[test]
    fn stats_of_three_by_three() {
        let s = collinear_stats(g(3, 2), 3, &Limits::default()).unwrap();
        assert_eq!(s.edge_count, BigUint::from(8u32));
        assert_eq!(s.codegree_max[&2], BigUint::from(1u32));
        assert_eq!(s.codegree_max[&3], BigUint::from(1u32));
        assert_eq!(s.avg_degree, crate::arith::ratio(8, 3));
        assert_eq!(s.max_line_count, 3);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["avg_degree"], "8/3");
        assert_eq!(json["edge_count"], "8");
        assert_eq!(json["codegree_max"]["2"], "1");
    }

    #[test]
    fn resource_cap_trips() {
        let tight = Limits { max_points: 1_000_000, max_work: 10.0 };
        assert!(matches!(
            enumerate_lines(g(5, 2), 2, &tight),
            Err(Error::ResourceLimit { .. })
        ));
        let few_points = Limits { max_points: 10, ..Limits::default() };
        assert!(enumerate_lines(g(4, 2), 2, &few_points).is_err());
    }

    #[test]
    fn degree_identity() {
        let lim = Limits::default();
        for (n, k, r) in [(4, 2, 3), (3, 3, 3), (5, 2, 4)] {
            let deg: BigUint = vertex_degrees(g(n, k), r, &lim).unwrap().into_iter().sum();
            let e = count_collinear_tuples(g(n, k), r, &lim).unwrap();
            assert_eq!(deg, e * r);
        }
    }
}
