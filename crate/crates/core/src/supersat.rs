//! The explicit supersaturation witness for `H(n, k, r)`: an anchor box `U`,
//! a direction set `V` with prime leading coordinate, and the family of lines
//! `L(u, v) = {u + x v}`. The scale-free counting claims (distinct directions
//! give distinct lines, per-point coverage, incidence counts, size bounds on
//! `V`) are checked exactly; the final inequality is exposed only as a
//! log-space formula with a hypothesis flag.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{binomial, ratio_to_f64, ratio_string};
use crate::error::{domain, Error, Result};
use crate::geometry::{LineKey, Point};
use crate::grid::GridSpec;

/// Relative guard band used when `t` is only known in floating point.
pub const GUARD: f64 = 1e-12;

/// The scale parameter `t`, exact when it is rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    Exact(#[serde(with = "crate::arith::serde_ratio")] BigRational),
    Approx(f64),
}

impl Threshold {
    pub fn value(&self) -> f64 {
        match self {
            Threshold::Exact(r) => ratio_to_f64(r),
            Threshold::Approx(v) => *v,
        }
    }

    /// `floor(c * n / t)`.
    fn floor_of(&self, c: u64, n: u64) -> i64 {
        match self {
            Threshold::Exact(t) => {
                let x = BigRational::from_integer((c * n).into()) / t;
                x.floor().to_integer().to_i64().unwrap_or(i64::MAX)
            }
            Threshold::Approx(t) => snap((c * n) as f64 / t).floor() as i64,
        }
    }

    /// `ceil(c * n / t)`.
    fn ceil_of(&self, c: u64, n: u64) -> i64 {
        match self {
            Threshold::Exact(t) => {
                let x = BigRational::from_integer((c * n).into()) / t;
                x.ceil().to_integer().to_i64().unwrap_or(i64::MAX)
            }
            Threshold::Approx(t) => snap((c * n) as f64 / t).ceil() as i64,
        }
    }
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= GUARD * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersatConfig {
    pub grid: GridSpec,
    pub r: u32,
    /// Density exponent; `None` when `t` was overridden.
    pub s: Option<f64>,
    /// `r * 1000 * 9^k`.
    pub c0: f64,
    pub t: Threshold,
    /// Whether `t <= n^0.99`.
    pub feasible: bool,
}

impl SupersatConfig {
    /// `t = c0 * n^s` with `c0 = r * 1000 * 9^k`.
    pub fn new(grid: GridSpec, r: u32, s: f64) -> Result<Self> {
        Self::check_grid(grid)?;
        if !(0.0..=0.9).contains(&s) {
            return domain(format!("s must lie in [0, 0.9], got {s}"));
        }
        let c0_exact = BigUint::from(r) * 1000u32 * BigUint::from(9u32).pow(grid.k);
        let c0 = c0_exact.to_f64().unwrap_or(f64::INFINITY);
        let t = if s == 0.0 {
            Threshold::Exact(BigRational::from_integer(c0_exact.into()))
        } else {
            Threshold::Approx(c0 * (grid.n as f64).powf(s))
        };
        let feasible = t.value() <= (grid.n as f64).powf(0.99);
        Ok(SupersatConfig { grid, r, s: Some(s), c0, t, feasible })
    }

    /// Explicit `t` for experiments below the scale where `c0 * n^s` is useful.
    pub fn with_t(grid: GridSpec, r: u32, t: BigRational) -> Result<Self> {
        Self::check_grid(grid)?;
        if t <= BigRational::zero() {
            return domain(format!("t must be positive, got {}", ratio_string(&t)));
        }
        let c0 = r as f64 * 1000.0 * 9f64.powi(grid.k as i32);
        let t = Threshold::Exact(t);
        let feasible = t.value() <= (grid.n as f64).powf(0.99);
        Ok(SupersatConfig { grid, r, s: None, c0, t, feasible })
    }

    fn check_grid(grid: GridSpec) -> Result<()> {
        if grid.k < 2 {
            return Err(Error::Precondition(format!(
                "supersaturation family needs k >= 2, got k={}",
                grid.k
            )));
        }
        Ok(())
    }

    /// `floor(2n / t)`: the largest admissible leading coordinate.
    pub fn lead_max(&self) -> i64 {
        self.t.floor_of(2, self.grid.n as u64)
    }

    /// `ceil(n / t)`: the smallest admissible prime.
    pub fn prime_min(&self) -> i64 {
        self.t.ceil_of(1, self.grid.n as u64)
    }

    /// `2n / t` as a float, for the size formulas.
    pub fn two_n_over_t(&self) -> f64 {
        2.0 * self.grid.n as f64 / self.t.value()
    }
}

/// Primes up to `limit` by the sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for i in 2..=limit as usize {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit as usize {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub primes: Vec<u64>,
    pub vectors: Vec<Vec<i64>>,
    pub warnings: Vec<String>,
}

/// `V`: vectors with prime first coordinate in `[n/t, 2n/t]` and remaining
/// coordinates in `[0, a_1)`.
pub fn build_direction_set(config: &SupersatConfig) -> Result<DirectionSet> {
    let hi = config.lead_max();
    if hi < 2 {
        return Err(Error::Precondition(format!(
            "direction set needs 2n/t >= 2, got 2n/t = {:.6}",
            config.two_n_over_t()
        )));
    }
    let lo = config.prime_min();
    let primes: Vec<u64> = primes_up_to(hi as u64).into_iter().filter(|&p| p as i64 >= lo).collect();
    let tail = config.grid.k as usize - 1;
    let mut vectors = Vec::new();
    for &p in &primes {
        let count = (p as usize).pow(tail as u32);
        for mut idx in 0..count {
            let mut v = vec![p as i64; tail + 1];
            for c in v[1..].iter_mut().rev() {
                *c = (idx % p as usize) as i64;
                idx /= p as usize;
            }
            vectors.push(v);
        }
    }
    let mut warnings = Vec::new();
    if config.two_n_over_t() < 17.0 {
        warnings.push(format!(
            "2n/t = {:.4} < 17: prime-counting lower bound not applicable",
            config.two_n_over_t()
        ));
    }
    if primes.is_empty() {
        warnings.push(format!("no prime in [{lo}, {hi}]"));
    }
    Ok(DirectionSet { primes, vectors, warnings })
}

/// `|U| = floor(2n/t) * (2n + 1)^{k-1}` (zero when `t > 2n`).
pub fn anchor_count(config: &SupersatConfig) -> BigUint {
    let lead = config.lead_max().max(0) as u64;
    BigUint::from(lead) * BigUint::from(2 * config.grid.n as u64 + 1).pow(config.grid.k - 1)
}

/// `U`: the box `1 <= a_1 <= 2n/t`, `-n <= a_j <= n`.
pub fn build_anchor_set(config: &SupersatConfig) -> Vec<Point> {
    let lead = config.lead_max().max(0);
    let n = config.grid.n as i64;
    let tail = config.grid.k as usize - 1;
    let side = (2 * n + 1) as usize;
    let per_lead = side.pow(tail as u32);
    let mut out = Vec::with_capacity(lead as usize * per_lead);
    for a1 in 1..=lead {
        for mut idx in 0..per_lead {
            let mut x = vec![a1; tail + 1];
            for c in x[1..].iter_mut().rev() {
                *c = (idx % side) as i64 - n;
                idx /= side;
            }
            out.push(Point(x));
        }
    }
    out
}

/// A line of the family with the indices (into `directions`) of every
/// direction vector that generates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyLine {
    pub key: LineKey,
    pub generators: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct SupersatFamily {
    pub config: SupersatConfig,
    pub anchors: Vec<Point>,
    pub directions: DirectionSet,
    /// Deduplicated geometric lines, sorted by key.
    pub lines: Vec<FamilyLine>,
    pub size_u: usize,
    pub size_v: usize,
    pub size_l: usize,
    index: HashMap<LineKey, usize>,
}

/// `L = {L(u, v) : u in U, v in V}`, deduplicated as point sets of `Z^k`.
pub fn build_line_family(config: &SupersatConfig, max_pairs: u64) -> Result<SupersatFamily> {
    let directions = build_direction_set(config)?;
    if directions.vectors.is_empty() {
        return Err(Error::Precondition("direction set V is empty".into()));
    }
    let pairs = anchor_count(config).to_f64().unwrap_or(f64::INFINITY) * directions.vectors.len() as f64;
    if pairs > max_pairs as f64 {
        return Err(Error::ResourceLimit {
            what: "supersaturation pairs |U| * |V|".into(),
            estimate: pairs,
            cap: max_pairs as f64,
        });
    }
    let anchors = build_anchor_set(config);
    let mut gens: HashMap<LineKey, Vec<u32>> = HashMap::new();
    for (vi, v) in directions.vectors.iter().enumerate() {
        for u in &anchors {
            let key = LineKey::through(&u.0, v).expect("direction has prime lead");
            let entry = gens.entry(key).or_default();
            if entry.last() != Some(&(vi as u32)) {
                entry.push(vi as u32);
            }
        }
    }
    let mut lines: Vec<FamilyLine> =
        gens.into_iter().map(|(key, generators)| FamilyLine { key, generators }).collect();
    lines.sort_by(|a, b| a.key.cmp(&b.key));
    let index = lines.iter().enumerate().map(|(i, l)| (l.key.clone(), i)).collect();
    Ok(SupersatFamily {
        config: config.clone(),
        size_u: anchors.len(),
        size_v: directions.vectors.len(),
        size_l: lines.len(),
        anchors,
        directions,
        lines,
        index,
    })
}

impl SupersatFamily {
    /// Ids of the distinct family lines through `x` (one probe per direction).
    pub fn lines_through(&self, x: &[i64]) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .directions
            .vectors
            .iter()
            .filter_map(|v| self.index.get(&LineKey::through(x, v)?).copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn line_id(&self, key: &LineKey) -> Option<usize> {
        self.index.get(key).copied()
    }
}

/// A geometric line produced by more than one direction of `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionCollision {
    pub line: LineKey,
    pub directions: Vec<Vec<i64>>,
}

/// Every family line generated by two or more distinct vectors of `V`.
pub fn direction_collisions(family: &SupersatFamily) -> Vec<DirectionCollision> {
    family
        .lines
        .iter()
        .filter(|l| l.generators.len() > 1)
        .map(|l| DirectionCollision {
            line: l.key.clone(),
            directions: l
                .generators
                .iter()
                .map(|&g| family.directions.vectors[g as usize].clone())
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Distinct family lines through each grid point, lexicographic order.
    pub counts: Vec<u32>,
    pub min: u32,
    pub max: u32,
    pub required: u32,
    pub holds: bool,
}

/// Check that every grid point lies on at least `|V|` distinct family lines.
pub fn verify_point_coverage(family: &SupersatFamily, grid: GridSpec) -> Coverage {
    let counts: Vec<u32> = grid.points().map(|x| family.lines_through(&x.0).len() as u32).collect();
    let min = counts.iter().copied().min().unwrap_or(0);
    let max = counts.iter().copied().max().unwrap_or(0);
    let required = family.size_v as u32;
    Coverage { holds: min >= required, counts, min, max, required }
}

fn check_subset(points: &[Point], grid: GridSpec) -> Result<()> {
    match points.iter().find(|p| !grid.contains(&p.0)) {
        Some(p) => domain(format!("point {:?} outside [{}]^{}", p.0, grid.n, grid.k)),
        None => Ok(()),
    }
}

/// Number of incidences between `S` and the family lines.
pub fn incidence_count(points: &[Point], family: &SupersatFamily) -> Result<u64> {
    check_subset(points, family.config.grid)?;
    Ok(points.iter().map(|x| family.lines_through(&x.0).len() as u64).sum())
}

/// Collinear `r`-subsets of `S` carried by family lines: `sum C(|S cap l|, r)`.
pub fn count_r_tuples_on_family(points: &[Point], family: &SupersatFamily, r: u32) -> Result<BigUint> {
    if r < 2 {
        return Err(Error::Precondition(format!("r must be >= 2, got {r}")));
    }
    check_subset(points, family.config.grid)?;
    let mut per_line: HashMap<usize, u64> = HashMap::new();
    for x in points {
        for id in family.lines_through(&x.0) {
            *per_line.entry(id).or_default() += 1;
        }
    }
    Ok(per_line.values().map(|&c| binomial(c, r as u64)).sum())
}

/// The prime-counting sandwich on `|V|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSandwich {
    /// Whether `2n/t >= 17` and `t <= n^0.99`.
    pub applicable: bool,
    pub size_v: usize,
    /// `1.26 (2n/t) / ln(2n/t) * (2n/t)^{k-1}`.
    pub upper: f64,
    /// `((2n/t)/ln(2n/t) - 1.26 (n/t)/ln(n/t)) * (n/t)^{k-1}`.
    pub lower: f64,
    /// `0.1 n^k / (t^k ln n)`.
    pub lower_final: f64,
    pub holds: bool,
}

pub fn size_sandwich(family: &SupersatFamily) -> SizeSandwich {
    let cfg = &family.config;
    let k = cfg.grid.k as i32;
    let n = cfg.grid.n as f64;
    let t = cfg.t.value();
    let m2 = 2.0 * n / t;
    let m1 = n / t;
    let upper = 1.26 * m2 / m2.ln() * m2.powi(k - 1);
    let lower = (m2 / m2.ln() - 1.26 * m1 / m1.ln()) * m1.powi(k - 1);
    let lower_final = 0.1 * n.powi(k) / (t.powi(k) * n.ln());
    let applicable = m2 >= 17.0 && cfg.feasible;
    let v = family.size_v as f64;
    let holds = !applicable || (v <= upper && v >= lower);
    SizeSandwich { applicable, size_v: family.size_v, upper, lower, lower_final, holds }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersatBound {
    /// Natural log of `n^{2k-(k+1)s} / (r^{k+1} (1000 * 9^k)^{k+1} ln n)`.
    pub ln_bound: f64,
    /// Whether `n >= max(e^{100k}, r^100)`.
    pub hypotheses_met: bool,
}

/// The supersaturation lower bound on `|E(H[S])|` for `|S| = n^{k-s}`,
/// evaluated from `ln n` in log space.
pub fn supersat_lower_bound(ln_n: f64, k: u32, r: u32, s: f64) -> Result<SupersatBound> {
    if !(0.0..=0.9).contains(&s) {
        return domain(format!("s must lie in [0, 0.9], got {s}"));
    }
    if k < 3 || r < 3 {
        return domain(format!("needs k, r >= 3, got k={k}, r={r}"));
    }
    if ln_n <= 0.0 {
        return domain("needs n > 1");
    }
    let kf = k as f64;
    let const_ln = (r as f64).ln() + 1000f64.ln() + kf * 9f64.ln();
    let ln_bound = (2.0 * kf - (kf + 1.0) * s) * ln_n - (kf + 1.0) * const_ln - ln_n.ln();
    let hypotheses_met = ln_n >= (100.0 * kf).max(100.0 * (r as f64).ln());
    Ok(SupersatBound { ln_bound, hypotheses_met })
}

/// JSON summary of a family run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub config: SupersatConfig,
    pub primes: Vec<u64>,
    pub size_u: usize,
    pub size_v: usize,
    pub size_l: usize,
    pub size_l_cap: String,
    pub collisions: usize,
    pub coverage_min: u32,
    pub coverage_max: u32,
    pub coverage_holds: bool,
    pub full_incidences: u64,
    pub sandwich: SizeSandwich,
    pub warnings: Vec<String>,
}

pub fn summarize(family: &SupersatFamily) -> FamilySummary {
    let grid = family.config.grid;
    let coverage = verify_point_coverage(family, grid);
    let full_incidences = coverage.counts.iter().map(|&c| c as u64).sum();
    FamilySummary {
        config: family.config.clone(),
        primes: family.directions.primes.clone(),
        size_u: family.size_u,
        size_v: family.size_v,
        size_l: family.size_l,
        size_l_cap: (BigUint::from(family.size_u) * family.size_v).to_string(),
        collisions: direction_collisions(family).len(),
        coverage_min: coverage.min,
        coverage_max: coverage.max,
        coverage_holds: coverage.holds,
        full_incidences,
        sandwich: size_sandwich(family),
        warnings: family.directions.warnings.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ratio, ratio_int};

    fn cfg(n: u32, k: u32, t: i64) -> SupersatConfig {
        SupersatConfig::with_t(GridSpec::new(n, k).unwrap(), 3, ratio_int(t)).unwrap()
    }

    #[test]
    fn direction_set_examples() {
        let v = build_direction_set(&cfg(20, 2, 4)).unwrap();
        assert_eq!(v.primes, vec![5, 7]);
        assert_eq!(v.vectors.len(), 12);
        let v = build_direction_set(&cfg(8, 2, 4)).unwrap();
        assert_eq!(v.primes, vec![2, 3]);
        assert_eq!(v.vectors.len(), 5);
        assert!(!v.warnings.is_empty());
        assert!(matches!(
            SupersatConfig::with_t(GridSpec::new(20, 1).unwrap(), 3, ratio_int(4)),
            Err(Error::Precondition(_))
        ));
        assert!(build_direction_set(&cfg(20, 2, 30)).is_err());
    }

    #[test]
    fn anchor_set_examples() {
        assert_eq!(build_anchor_set(&cfg(20, 2, 4)).len(), 410);
        assert_eq!(build_anchor_set(&cfg(20, 2, 40)).len(), 41);
        assert!(build_anchor_set(&cfg(20, 2, 41)).is_empty());
        assert_eq!(anchor_count(&cfg(20, 2, 4)), BigUint::from(410u32));
    }

    #[test]
    fn fractional_t_is_exact_at_the_boundary() {
        // 2n/t = 10 exactly, n/t = 5 exactly.
        let c = SupersatConfig::with_t(GridSpec::new(20, 2).unwrap(), 3, ratio(4, 1)).unwrap();
        assert_eq!((c.prime_min(), c.lead_max()), (5, 10));
        let c = SupersatConfig::with_t(GridSpec::new(20, 2).unwrap(), 3, ratio(40, 11)).unwrap();
        assert_eq!((c.prime_min(), c.lead_max()), (6, 11));
    }

    #[test]
    fn single_direction_single_anchor() {
        // t = 2n: U = {1} x [-n, n]^{k-1}; V needs a prime in [n/t, 2n/t] = [1/2, 1]: none.
        let c = cfg(4, 2, 4);
        let fam = build_line_family(&c, 1 << 20).unwrap();
        assert_eq!(fam.directions.primes, vec![2]);
        assert!(fam.size_l <= fam.size_u * fam.size_v);
    }

    #[test]
    fn family_size_is_capped_by_product() {
        let fam = build_line_family(&cfg(20, 2, 4), 1 << 20).unwrap();
        assert_eq!((fam.size_u, fam.size_v), (410, 12));
        assert!(fam.size_l <= 4920);
    }

    #[test]
    fn coverage_on_eight_grid() {
        let fam = build_line_family(&cfg(8, 2, 4), 1 << 20).unwrap();
        let cov = verify_point_coverage(&fam, fam.config.grid);
        // V = {(2,0),(2,1),(3,0),(3,1),(3,2)}; (2,0) and (3,0) span the same
        // horizontal line through every point, so each point sees 4 lines.
        assert_eq!((cov.min, cov.max), (4, 4));
        assert_eq!(cov.required, 5);
        assert!(!cov.holds);
        let coll = direction_collisions(&fam);
        assert!(!coll.is_empty());
        assert!(coll.iter().all(|c| c.directions.iter().all(|v| v[1] == 0)));
    }

    #[test]
    fn incidence_and_tuple_examples() {
        let fam = build_line_family(&cfg(8, 2, 4), 1 << 20).unwrap();
        assert_eq!(incidence_count(&[], &fam).unwrap(), 0);
        let diag: Vec<Point> = (1..=3).map(|i| Point(vec![i, i])).collect();
        assert_eq!(count_r_tuples_on_family(&diag, &fam, 3).unwrap(), BigUint::from(0u32));
        let row: Vec<Point> = (1..=3).map(|i| Point(vec![i, 5])).collect();
        assert_eq!(count_r_tuples_on_family(&row, &fam, 3).unwrap(), BigUint::from(1u32));
        assert!(incidence_count(&[Point(vec![9, 1])], &fam).is_err());
    }

    #[test]
    fn lower_bound_formula() {
        let a = supersat_lower_bound(300.0, 3, 3, 0.0).unwrap();
        let b = supersat_lower_bound(300.0, 3, 3, 0.9).unwrap();
        assert!(a.ln_bound > b.ln_bound);
        assert!(a.hypotheses_met);
        let r6 = supersat_lower_bound(300.0, 3, 6, 0.5).unwrap();
        let r3 = supersat_lower_bound(300.0, 3, 3, 0.5).unwrap();
        assert!(r6.ln_bound < r3.ln_bound);
        assert!(!supersat_lower_bound(10.0, 3, 3, 0.5).unwrap().hypotheses_met);
    }

    #[test]
    fn stated_constants_leave_desk_grids_empty() {
        let c = SupersatConfig::new(GridSpec::new(20, 3).unwrap(), 3, 0.5).unwrap();
        assert_eq!(c.c0, 3.0 * 1000.0 * 729.0);
        assert!(!c.feasible);
        assert!(build_anchor_set(&c).is_empty());
    }
}
