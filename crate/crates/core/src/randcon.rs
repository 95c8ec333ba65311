//! The random construction: an `alpha`-random subset of `[n]^k`, deletion of
//! collinear `u`-tuples, the two expectation conditions in log form, and exact
//! independent-set search on the survivors.
//!
//! PRNG contract: `ChaCha20Rng::seed_from_u64(seed)`, one `f64` draw per grid
//! point in lexicographic index order; a point is kept when its draw is
//! `< alpha`. Frozen for the 0.x series.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::arith::{binomial, Quantity, SignedLog};
use crate::plan::{ParameterPlan, ASYMPTOTIC_BANNER};
use crate::error::{domain, Error, Result};
use crate::geometry::{maximal_sections, Point};
use crate::grid::{count_collinear_tuples, GridSpec, Limits};
use crate::search::{decide_subset, min_deletion, Constraint, Decision};

/// `alpha`-random subset of the grid under the PRNG contract.
pub fn sample_subset(grid: GridSpec, alpha: f64, seed: u64, limits: &Limits) -> Result<Vec<Point>> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    let total = grid.point_count();
    if total > limits.max_points {
        return Err(Error::ResourceLimit {
            what: "grid points".into(),
            estimate: total as f64,
            cap: limits.max_points as f64,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Ok(grid
        .points()
        .filter(|_| rng.random::<f64>() < alpha)
        .collect())
}

/// Remove the per-line excess over `u - 1` from every line of `sample`.
///
/// Lines are taken by (excess descending, canonical line order) and the
/// lexicographically largest surviving points of a line are deleted first.
/// Lines only lose points, so one ordered pass reaches the fixpoint.
pub fn delete_collinear_u_tuples(sample: &[Point], u: u32) -> Result<(Vec<Point>, Vec<Point>)> {
    if u < 3 {
        return Err(Error::Precondition(format!("u must be >= 3, got {u}")));
    }
    let mut sorted: Vec<Point> = sample.to_vec();
    sorted.sort();
    sorted.dedup();
    let keep = u as usize - 1;
    let mut sections = maximal_sections(&sorted, u as usize);
    sections.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then_with(|| a.line.cmp(&b.line)));
    let mut alive = vec![true; sorted.len()];
    for sec in &sections {
        let live: Vec<usize> = sec.members.iter().copied().filter(|&i| alive[i]).collect();
        if live.len() > keep {
            for &i in live.iter().rev().take(live.len() - keep) {
                alive[i] = false;
            }
        }
    }
    let (mut survivors, mut deleted) = (Vec::new(), Vec::new());
    for (p, a) in sorted.into_iter().zip(alive) {
        if a {
            survivors.push(p);
        } else {
            deleted.push(p);
        }
    }
    Ok((survivors, deleted))
}

/// Whether no line carries `u` or more points of `points`.
pub fn verify_no_u_collinear(points: &[Point], u: u32) -> bool {
    maximal_sections(points, u.max(2) as usize).is_empty()
}

/// Number of collinear `u`-subsets of `points`: `sum C(|S cap l|, u)`.
pub fn collinear_u_subsets(points: &[Point], u: u32) -> num_bigint::BigUint {
    maximal_sections(points, u.max(2) as usize)
        .iter()
        .map(|s| binomial(s.members.len() as u64, u as u64))
        .sum()
}

/// Natural log of
/// `exp(n^{k-s0-(k-ks0)/(q-1)+0.3f}) * (e n^{k-s0+0.1f} / p)^p * alpha^p`,
/// from `ln n`, `ln p`, `ln alpha`. The value may itself be huge, so it is
/// returned as a [`SignedLog`].
pub fn expected_independent_sets_log(
    ln_n: f64,
    k: u32,
    q: u32,
    ln_p: f64,
    ln_alpha: f64,
    s0: f64,
    f: f64,
) -> Result<SignedLog> {
    if q < 2 {
        return domain(format!("q must be >= 2, got {q}"));
    }
    if ln_alpha > 0.0 {
        return domain("alpha must be <= 1");
    }
    let kf = k as f64;
    let container = SignedLog::positive((kf - s0 - (kf - kf * s0) / (q as f64 - 1.0) + 0.3 * f) * ln_n);
    if ln_alpha == f64::NEG_INFINITY {
        return Ok(SignedLog::neg_infinity());
    }
    let bracket = 1.0 + (kf - s0 + 0.1 * f) * ln_n - ln_p + ln_alpha;
    let tail = match bracket.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => SignedLog::positive(ln_p + bracket.ln()),
        Some(std::cmp::Ordering::Less) => SignedLog::negative(ln_p + (-bracket).ln()),
        _ => SignedLog::ZERO,
    };
    Ok(container.add(tail))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTupleCondition {
    /// `ln((k 2^{u+k}/u!) n^{u+k-1} ln n alpha^u)`.
    #[serde(with = "crate::arith::serde_ext_f64")]
    pub ln_tuples: f64,
    /// `ln(alpha n^k)`.
    #[serde(with = "crate::arith::serde_ext_f64")]
    pub ln_expected_size: f64,
    /// `ln_tuples - ln_expected_size`; negative supports the condition.
    #[serde(with = "crate::arith::serde_ext_f64")]
    pub difference: f64,
}

/// The collinear `u`-tuple condition in log form. Needs `u >= k + 1`.
pub fn expected_u_tuples_log(ln_n: f64, k: u32, u: u32, ln_alpha: f64) -> Result<UTupleCondition> {
    if u < k + 1 {
        return Err(Error::Precondition(format!("needs u >= k + 1, got u={u}, k={k}")));
    }
    if ln_n <= 0.0 {
        return domain("needs n > 1");
    }
    let kf = k as f64;
    let uf = u as f64;
    let ln_const = kf.ln() + (uf + kf) * std::f64::consts::LN_2 - statrs::function::gamma::ln_gamma(uf + 1.0);
    let ln_tuples = ln_const + (uf + kf - 1.0) * ln_n + ln_n.ln() + uf * ln_alpha;
    let ln_expected_size = ln_alpha + kf * ln_n;
    Ok(UTupleCondition { ln_tuples, ln_expected_size, difference: ln_tuples - ln_expected_size })
}

/// Exact expected number of collinear `u`-subsets of an `alpha`-random subset:
/// `sum_l C(|l|, u) alpha^u`, as a natural log.
pub fn exact_expected_u_tuples_ln(grid: GridSpec, u: u32, alpha: f64, limits: &Limits) -> Result<f64> {
    let count = count_collinear_tuples(grid, u, limits)?;
    let c = count.to_f64().unwrap_or(f64::INFINITY);
    Ok(c.ln() + u as f64 * alpha.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeTail {
    /// `alpha n^k / 2`.
    pub threshold: f64,
    pub observed: usize,
    pub observed_ok: bool,
    /// `Pr[|S| < alpha n^k / 2]`.
    #[serde(with = "crate::arith::serde_ext_f64")]
    pub prob_below: f64,
    /// Set when a normal approximation was used (more than 10^6 points).
    pub approximate: bool,
}

/// Binomial lower-tail check for the sample size.
pub fn size_tail_check(grid: GridSpec, alpha: f64, observed: usize) -> Result<SizeTail> {
    let trials = grid.point_count();
    let threshold = alpha * trials as f64 / 2.0;
    let below = threshold.ceil() as u64;
    let (prob_below, approximate) = if below == 0 {
        (0.0, false)
    } else if trials <= 1_000_000 {
        let b = Binomial::new(alpha, trials).map_err(|e| Error::Domain(e.to_string()))?;
        (b.cdf(below - 1), false)
    } else {
        let mean = alpha * trials as f64;
        let sd = (mean * (1.0 - alpha)).sqrt();
        let z = (below as f64 - 0.5 - mean) / sd;
        (0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2), true)
    };
    Ok(SizeTail { threshold, observed, observed_ok: observed as f64 >= threshold, prob_below, approximate })
}

/// Constraints for the independent-set search: each line with `>= q`
/// points keeps at most `q - 1`.
pub fn line_constraints(points: &[Point], q: u32) -> Vec<Constraint> {
    maximal_sections(points, q as usize)
        .into_iter()
        .map(|s| Constraint { members: s.members, cap: q as usize - 1 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum IndependentSearch {
    /// `p` points with at most `q - 1` on any line.
    Witness { points: Vec<Point> },
    /// Full search proved every independent set has fewer than `p` points.
    NoneExists { max_size_upper: usize },
    /// The budget ran out first.
    Unknown { best_size: usize, upper_bound: usize },
}

/// Decide whether `points` has `p` points with at most `q - 1` on any line.
pub fn find_independent_set(points: &[Point], q: u32, p: usize, budget: u64) -> Result<IndependentSearch> {
    if q < 3 {
        return Err(Error::Precondition(format!("q must be >= 3, got {q}")));
    }
    Ok(match decide_subset(points.len(), &line_constraints(points, q), p, budget) {
        Decision::Found(idx) => IndependentSearch::Witness { points: idx.into_iter().map(|i| points[i].clone()).collect() },
        Decision::Impossible { upper } => IndependentSearch::NoneExists { max_size_upper: upper },
        Decision::Unknown { best, upper } => IndependentSearch::Unknown { best_size: best.len(), upper_bound: upper },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxIndependent {
    pub best: Vec<Point>,
    pub upper_bound: usize,
    pub optimal: bool,
    pub nodes: u64,
}

/// Largest subset with at most `q - 1` points on any line.
pub fn max_independent_set(points: &[Point], q: u32, budget: u64) -> Result<MaxIndependent> {
    if q < 2 {
        return Err(Error::Precondition(format!("q must be >= 2, got {q}")));
    }
    let m = points.len();
    let res = min_deletion(m, &line_constraints(points, q), None, budget);
    let best: Vec<Point> = res.kept(m).into_iter().map(|i| points[i].clone()).collect();
    let optimal = res.exhausted;
    let upper_bound = if optimal { best.len() } else { m - res.lower_bound.min(m) };
    Ok(MaxIndependent { best, upper_bound, optimal, nodes: res.nodes })
}

/// A seeded sample, the points deleted from it, and the survivors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSubsetRun {
    pub grid: GridSpec,
    pub alpha: f64,
    pub seed: u64,
    pub u: u32,
    pub sample: Vec<Point>,
    pub deleted: Vec<Point>,
    pub survivors: Vec<Point>,
}

pub fn run_random_subset(grid: GridSpec, alpha: f64, seed: u64, u: u32, limits: &Limits) -> Result<RandomSubsetRun> {
    let sample = sample_subset(grid, alpha, seed, limits)?;
    let (survivors, deleted) = delete_collinear_u_tuples(&sample, u)?;
    Ok(RandomSubsetRun { grid, alpha, seed, u, sample, deleted, survivors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub plan: ParameterPlan,
    pub run: RandomSubsetRun,
    pub no_u_collinear: bool,
    /// Collinear `u`-subsets of the sample, exact.
    pub sample_u_tuples: String,
    pub deletions_within_tuples: bool,
    pub size_tail: SizeTail,
    /// `ceil(n^{p_exp})`.
    pub p_target: usize,
    pub independent: IndependentSearch,
    /// Log of the expected number of independent `p`-sets bound.
    pub independent_sets_log: Quantity,
    pub u_tuple_condition: UTupleCondition,
    /// `ln` of the exact expected number of collinear `u`-subsets.
    #[serde(with = "crate::arith::serde_ext_f64")]
    pub exact_u_tuples_ln: f64,
    pub hypotheses_met: bool,
    pub banner: Option<String>,
}

/// Sample with `alpha = n^{alpha_exp}`, delete, verify, and search for an
/// independent `p`-set with `p = ceil(n^{p_exp})`.
pub fn run_construction(plan: &ParameterPlan, n: u32, seed: u64, budget: u64, limits: &Limits) -> Result<ConstructionReport> {
    if n < 2 {
        return domain(format!("n must be >= 2, got {n}"));
    }
    let grid = GridSpec::new(n, plan.k)?;
    let ln_n = (n as f64).ln();
    let alpha = (plan.alpha_exp_f64() * ln_n).exp();
    let run = run_random_subset(grid, alpha, seed, plan.u, limits)?;
    let no_u_collinear = verify_no_u_collinear(&run.survivors, plan.u);
    let tuples = collinear_u_subsets(&run.sample, plan.u);
    let deletions_within_tuples = num_bigint::BigUint::from(run.deleted.len()) <= tuples;
    let size_tail = size_tail_check(grid, alpha, run.sample.len())?;
    let p_target = (plan.p_exp_f64() * ln_n).exp().ceil() as usize;
    let independent = find_independent_set(&run.survivors, plan.q, p_target.max(1), budget)?;
    let s0 = crate::arith::ratio_to_f64(&plan.s0);
    let f = plan.f_f64();
    let ind = expected_independent_sets_log(ln_n, plan.k, plan.q, (p_target as f64).ln(), alpha.ln(), s0, f)?;
    let u_tuple_condition = expected_u_tuples_log(ln_n, plan.k, plan.u, alpha.ln())?;
    let exact_u_tuples_ln = exact_expected_u_tuples_ln(grid, plan.u, alpha, limits)?;
    let hypotheses_met = plan.feasible_at(n as f64);
    Ok(ConstructionReport {
        plan: plan.clone(),
        no_u_collinear,
        sample_u_tuples: tuples.to_string(),
        deletions_within_tuples,
        size_tail,
        p_target,
        independent,
        independent_sets_log: Quantity::from_signed_log(ind),
        u_tuple_condition,
        exact_u_tuples_ln,
        hypotheses_met,
        banner: (!hypotheses_met).then(|| ASYMPTOTIC_BANNER.to_string()),
        run,
    })
}
