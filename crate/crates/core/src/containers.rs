//! Numeric bookkeeping for the hypergraph container bound chain. The
//! container theorem is used only through its stated inequalities; nothing
//! here constructs containers.
//!
//! Quantities that are doubly exponential in `ln n` are taken as `ln n` and
//! returned one or two logs down.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorial_f64, ln_binomial_from_ln, Quantity, SignedLog};
use crate::error::{domain, Error, Result};
use crate::grid::CollinearStats;

/// Whether a bound may be evaluated when its hypotheses fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Strict,
    FormulaOnly,
}

/// `2000 r (r!)^3`.
pub fn container_constant(r: u32) -> f64 {
    2000.0 * r as f64 * factorial_f64(r).powi(3)
}

fn c2(x: u32) -> i32 {
    (x as i32) * (x as i32 - 1) / 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerParams {
    pub r: u32,
    pub vertices: f64,
    pub avg_degree: f64,
    /// `j -> Delta_j` for `2 <= j <= r`.
    pub codegree: BTreeMap<u32, f64>,
    pub tau: f64,
    pub epsilon: f64,
}

impl ContainerParams {
    pub fn c_r(&self) -> f64 {
        container_constant(self.r)
    }

    /// Parameters read off the exact statistics of a concrete hypergraph.
    pub fn from_stats(stats: &CollinearStats, vertices: u64, tau: f64, epsilon: f64) -> Result<Self> {
        let avg = crate::arith::ratio_to_f64(&stats.avg_degree);
        let codegree = stats.codegree_max.iter().map(|(&j, v)| (j, v.to_f64().unwrap_or(f64::INFINITY))).collect();
        Ok(ContainerParams { r: stats.r, vertices: vertices as f64, avg_degree: avg, codegree, tau, epsilon })
    }
}

/// `Delta(H, tau) = 2^{C(r,2)-1} sum_{j=2}^r Delta_j / (d tau^{j-1} 2^{C(j-1,2)})`.
pub fn delta_h_tau(params: &ContainerParams) -> Result<f64> {
    if params.avg_degree <= 0.0 || !params.avg_degree.is_finite() {
        return domain(format!("average degree must be positive, got {}", params.avg_degree));
    }
    if !(params.tau > 0.0 && params.tau < 1.0) {
        return domain(format!("tau must lie in (0, 1), got {}", params.tau));
    }
    let r = params.r;
    let mut sum = 0.0;
    for j in 2..=r {
        let dj = params.codegree.get(&j).copied().unwrap_or(0.0);
        if dj != 0.0 {
            sum += dj / (params.avg_degree * params.tau.powi(j as i32 - 1) * 2f64.powi(c2(j - 1)));
        }
    }
    Ok(2f64.powi(c2(r) - 1) * sum)
}

/// The same sum in exact rational arithmetic.
pub fn delta_h_tau_exact(
    r: u32,
    avg_degree: &BigRational,
    codegree: &BTreeMap<u32, BigUint>,
    tau: &BigRational,
) -> Result<BigRational> {
    if *avg_degree <= BigRational::zero() {
        return domain("average degree must be positive");
    }
    if *tau <= BigRational::zero() || *tau >= BigRational::one() {
        return domain("tau must lie in (0, 1)");
    }
    let two = BigRational::from_integer(2.into());
    let mut sum = BigRational::zero();
    for j in 2..=r {
        let dj = codegree.get(&j).cloned().unwrap_or_default();
        let denom = avg_degree * num_traits::pow(tau.clone(), j as usize - 1) * num_traits::pow(two.clone(), c2(j - 1) as usize);
        sum += BigRational::from_integer(dj.into()) / denom;
    }
    let scale = if c2(r) >= 1 {
        num_traits::pow(two, (c2(r) - 1) as usize)
    } else {
        BigRational::one() / two
    };
    Ok(scale * sum)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub tau: f64,
    /// `1 / (200 r (r!)^2)`.
    pub tau_threshold: f64,
    pub tau_ok: bool,
    pub delta: f64,
    /// `epsilon / (12 r!)`.
    pub delta_threshold: f64,
    pub delta_ok: bool,
    pub holds: bool,
}

pub fn check_container_hypotheses(params: &ContainerParams) -> Result<HypothesisCheck> {
    let rf = factorial_f64(params.r);
    let tau_threshold = 1.0 / (200.0 * params.r as f64 * rf * rf);
    let delta_threshold = params.epsilon / (12.0 * rf);
    let delta = delta_h_tau(params)?;
    let tau_ok = params.tau < tau_threshold;
    let delta_ok = delta <= delta_threshold;
    Ok(HypothesisCheck {
        tau: params.tau,
        tau_threshold,
        tau_ok,
        delta,
        delta_threshold,
        delta_ok,
        holds: tau_ok && delta_ok,
    })
}

/// `ln |C| <= c_r N tau ln(1/eps) ln(1/tau)`; returns the right side.
pub fn container_count_log_bound(params: &ContainerParams, mode: Mode) -> Result<f64> {
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return domain(format!("epsilon must lie in (0, 1), got {}", params.epsilon));
    }
    let check = check_container_hypotheses(params)?;
    if mode == Mode::Strict && !check.holds {
        return Err(Error::HypothesesUnmet(format!(
            "tau {:.4e} vs {:.4e}, Delta {:.4e} vs {:.4e}",
            check.tau, check.tau_threshold, check.delta, check.delta_threshold
        )));
    }
    Ok(params.c_r() * params.vertices * params.tau * (1.0 / params.epsilon).ln() * (1.0 / params.tau).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub ln_n: f64,
    pub conditions: Vec<Condition>,
    pub holds: bool,
}

/// Conditions for the independent-set count bound:
/// `s0 <= (k-r+1)/k`, `f >= 1e4 lnln n / ln n`, `k <= 0.001 f ln n / lnln n`.
pub fn validate_count_hypotheses(ln_n: f64, k: u32, r: u32, s0: f64, f: f64) -> Result<HypothesisReport> {
    if ln_n <= 1.0 {
        return domain(format!("needs n > e, got ln n = {ln_n}"));
    }
    let kf = k as f64;
    let lnln = ln_n.ln();
    let conditions = vec![
        Condition {
            name: "s0 <= (k-r+1)/k".into(),
            lhs: s0,
            rhs: (kf - r as f64 + 1.0) / kf,
            holds: s0 <= (kf - r as f64 + 1.0) / kf + 1e-15,
        },
        Condition {
            name: "f >= 1e4 lnln n / ln n".into(),
            lhs: f,
            rhs: 1e4 * lnln / ln_n,
            holds: f >= 1e4 * lnln / ln_n,
        },
        Condition {
            name: "k <= 0.001 f ln n / lnln n".into(),
            lhs: kf,
            rhs: 0.001 * f * ln_n / lnln,
            holds: kf <= 0.001 * f * ln_n / lnln,
        },
    ];
    let holds = conditions.iter().all(|c| c.holds);
    Ok(HypothesisReport { ln_n, conditions, holds })
}

/// Exponent `k - s0 - (k - k s0)/(r-1) + 0.3 f`.
pub fn count_exponent(k: u32, r: u32, s0: f64, f: f64) -> f64 {
    let kf = k as f64;
    kf - s0 - (kf - kf * s0) / (r as f64 - 1.0) + 0.3 * f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountBound {
    /// `E ln n`: the log of the log of the `exp(n^E)` factor.
    pub ln_container_term: f64,
    /// `ln C(n^{k-s0+0.1f}, m)`.
    pub ln_binomial: f64,
    /// The log of the whole bound, which may itself overflow.
    pub ln_bound: SignedLog,
    pub value: Quantity,
    pub hypotheses: HypothesisReport,
}

/// Natural log of `exp(n^E) * C(n^{k-s0+0.1f}, m)`, from `ln n`.
pub fn independent_set_count_log_bound(
    ln_n: f64,
    k: u32,
    r: u32,
    s0: f64,
    f: f64,
    m: u64,
    mode: Mode,
) -> Result<CountBound> {
    if r < 3 {
        return domain(format!("r must be >= 3, got {r}"));
    }
    let hypotheses = validate_count_hypotheses(ln_n, k, r, s0, f)?;
    if mode == Mode::Strict && !hypotheses.holds {
        return Err(Error::HypothesesUnmet(failed_names(&hypotheses)));
    }
    let ln_container_term = count_exponent(k, r, s0, f) * ln_n;
    let ln_binomial = ln_binomial_from_ln((k as f64 - s0 + 0.1 * f) * ln_n, m)?;
    let ln_bound = SignedLog::positive(ln_container_term).add(SignedLog::from_f64(ln_binomial));
    let value = Quantity::from_signed_log(ln_bound);
    Ok(CountBound { ln_container_term, ln_binomial, ln_bound, value, hypotheses })
}

fn failed_names(report: &HypothesisReport) -> String {
    report
        .conditions
        .iter()
        .filter(|c| !c.holds)
        .map(|c| format!("{} ({:.6} vs {:.6})", c.name, c.lhs, c.rhs))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Number of container steps: `((k+1)(s0-0.1f) + 0.02fk) / (0.05fk)`.
pub fn step_count(k: u32, s0: f64, f: f64) -> Result<f64> {
    if f <= 0.0 {
        return domain(format!("f must be positive, got {f}"));
    }
    let kf = k as f64;
    Ok(((kf + 1.0) * (s0 - 0.1 * f) + 0.02 * f * kf) / (0.05 * f * kf))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLedger {
    pub ln_n: f64,
    pub k: u32,
    pub r: u32,
    pub s0: f64,
    pub f: f64,
    pub steps_exact: f64,
    pub steps_max: f64,
    pub steps_within_cap: bool,
    /// `ln(1/eps)` with `eps = n^{-0.05fk}`.
    pub ln_inv_epsilon: f64,
    /// Exponent of `tau = n^{(k s0 - k)/(r-1)}`.
    pub tau_exponent: f64,
    /// `ln` of the per-step container log-count.
    pub ln_step_log_count: f64,
    /// `ln` of the total container log-count over all steps.
    pub ln_total_log_count: f64,
    /// `ln` of `n^{k-s0-(k-ks0)/(r-1)+0.3f}`, the claimed total.
    pub ln_claimed_total: f64,
    pub hypotheses: HypothesisReport,
}

/// The container step ledger with `eps = n^{-0.05fk}` and
/// `tau = n^{(k s0 - k)/(r-1)}`, the extremal-case choice.
pub fn step_ledger(ln_n: f64, k: u32, r: u32, s0: f64, f: f64) -> Result<BoundLedger> {
    if r < 2 {
        return domain(format!("r must be >= 2, got {r}"));
    }
    let steps_exact = step_count(k, s0, f)?;
    let steps_max = 40.0 / f;
    let kf = k as f64;
    let rm1 = r as f64 - 1.0;
    let tau_exponent = (kf * s0 - kf) / rm1;
    let ln_inv_epsilon = 0.05 * f * kf * ln_n;
    let ln_inv_tau = -tau_exponent * ln_n;
    let ln_step_log_count = container_constant(r).ln()
        + (kf - s0 + 0.1 * f + tau_exponent) * ln_n
        + ln_inv_epsilon.ln()
        + ln_inv_tau.ln();
    let ln_total_log_count = ln_step_log_count + steps_exact.max(1.0).ln();
    Ok(BoundLedger {
        ln_n,
        k,
        r,
        s0,
        f,
        steps_exact,
        steps_max,
        steps_within_cap: steps_exact <= steps_max,
        ln_inv_epsilon,
        tau_exponent,
        ln_step_log_count,
        ln_total_log_count,
        ln_claimed_total: count_exponent(k, r, s0, f) * ln_n,
        hypotheses: validate_count_hypotheses(ln_n, k, r, s0, f)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauChoice {
    pub exponent: f64,
    /// Set when `n tau > 1`, where the surrounding argument needs `tau <= 1/n`.
    pub n_tau_exceeds_one: bool,
}

/// General-case `tau = n^{(k s0 - k)/(r-1) - (s0 - 0.1f + s)}`, taken as
/// written, for a container of size `n^{k-s}` with `s <= s0 - 0.1f`.
pub fn general_tau_exponent(k: u32, r: u32, s0: f64, f: f64, s: f64) -> Result<TauChoice> {
    if s > s0 - 0.1 * f + 1e-15 {
        return domain(format!("needs s <= s0 - 0.1f, got s = {s}"));
    }
    let kf = k as f64;
    let exponent = (kf * s0 - kf) / (r as f64 - 1.0) - (s0 - 0.1 * f + s);
    Ok(TauChoice { exponent, n_tau_exceeds_one: exponent > -1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    fn params(tau: f64) -> ContainerParams {
        ContainerParams {
            r: 3,
            vertices: 1.0,
            avg_degree: 8.0 / 3.0,
            codegree: BTreeMap::from([(2, 1.0), (3, 1.0)]),
            tau,
            epsilon: 0.1,
        }
    }

    #[test]
    fn delta_examples() {
        assert!((delta_h_tau(&params(0.5)).unwrap() - 6.0).abs() < 1e-12);
        let mut p = params(0.5);
        p.codegree.values_mut().for_each(|v| *v = 0.0);
        assert_eq!(delta_h_tau(&p).unwrap(), 0.0);
        assert!(delta_h_tau(&params(0.25)).unwrap() > 6.0);
        let mut p = params(0.5);
        p.avg_degree = 0.0;
        assert!(delta_h_tau(&p).is_err());
        let exact = delta_h_tau_exact(
            3,
            &ratio(8, 3),
            &BTreeMap::from([(2, BigUint::from(1u32)), (3, BigUint::from(1u32))]),
            &ratio(1, 2),
        )
        .unwrap();
        assert_eq!(exact, ratio(6, 1));
    }

    #[test]
    fn hypothesis_thresholds() {
        let c = check_container_hypotheses(&params(1e-5)).unwrap();
        assert!((c.tau_threshold - 1.0 / 21600.0).abs() < 1e-18);
        assert!(c.tau_ok);
        assert!((c.delta_threshold - 0.1 / 72.0).abs() < 1e-15);
        for r in 3..7 {
            let mut p = params(0.5);
            p.r = r;
            assert!(!check_container_hypotheses(&p).unwrap().tau_ok);
        }
    }

    #[test]
    fn container_count_examples() {
        assert_eq!(container_constant(3), 1_296_000.0);
        let mut p = params(1.0 / std::f64::consts::E);
        p.epsilon = 1.0 / std::f64::consts::E;
        assert!(container_count_log_bound(&p, Mode::Strict).is_err());
        let v = container_count_log_bound(&p, Mode::FormulaOnly).unwrap();
        assert!((v - 476_771.755_758).abs() < 1e-3, "{v}");
        let mut p = params(1e-300);
        p.codegree.clear();
        assert!(container_count_log_bound(&p, Mode::Strict).unwrap() < 1e-290);
    }

    #[test]
    fn count_bound_examples() {
        let b = independent_set_count_log_bound(1e6, 4, 3, 0.5, 0.025, 0, Mode::FormulaOnly).unwrap();
        // (k - ks0)/(r-1) = 1 here, so the exponent is 2.5075.
        assert!((b.ln_container_term / 2.5075e6 - 1.0).abs() < 1e-10);
        assert_eq!(b.ln_binomial, 0.0);
        assert!((b.ln_bound.ln_abs / 2.5075e6 - 1.0).abs() < 1e-10);
        assert!(matches!(b.value, Quantity::NestedLog { sign: 1, .. }));
        assert!(independent_set_count_log_bound(1e6, 4, 3, 0.5, 0.025, 0, Mode::Strict).is_err());
        // d/ds0 of the exponent is k/(r-1) - 1.
        assert!(count_exponent(4, 3, 0.4, 0.1) > count_exponent(4, 3, 0.3, 0.1));
        assert!(count_exponent(3, 5, 0.4, 0.1) < count_exponent(3, 5, 0.3, 0.1));
        assert!((count_exponent(4, 5, 0.4, 0.1) - count_exponent(4, 5, 0.3, 0.1)).abs() < 1e-12);
    }

    #[test]
    fn condition_examples() {
        let h = validate_count_hypotheses(1e6f64.ln(), 4, 3, 0.5, 0.025).unwrap();
        assert!(h.conditions[0].holds);
        assert_eq!(h.conditions[0].rhs, 0.5);
        assert!((h.conditions[1].rhs - 1900.6).abs() < 0.1, "{}", h.conditions[1].rhs);
        assert!(!h.conditions[1].holds);
        // Condition 3 needs ln n / lnln n >= k / (0.001 f) = 160000.
        let x = 160_000.0f64;
        assert!((4.0 / (0.001 * 0.025) - x).abs() < 1e-6);
        assert!(validate_count_hypotheses(1.0, 4, 3, 0.5, 0.025).is_err());
    }

    #[test]
    fn step_ledger_examples() {
        let l = step_ledger(1e6, 4, 3, 0.5, 0.025).unwrap();
        assert_eq!(l.steps_max, 1600.0);
        assert!(l.steps_within_cap);
        let exact = step_count(4, 0.5, 0.1).unwrap();
        assert!((exact - 122.9).abs() < 1e-9 && exact <= 400.0);
        for k in 3..12 {
            for f in [1e-4, 1e-3, 0.01, 0.1, 0.5] {
                assert!(step_count(k, 0.9, f).unwrap() <= 40.0 / f);
            }
        }
        assert!(step_count(3, 0.5, 0.0).is_err());
    }

    #[test]
    fn general_tau_flag() {
        let t = general_tau_exponent(4, 3, 0.5, 0.1, 0.49).unwrap();
        assert!((t.exponent - (-1.0 - 0.98)).abs() < 1e-12);
        assert!(!t.n_tau_exceeds_one);
        assert!(general_tau_exponent(4, 3, 0.5, 0.1, 0.5).is_err());
        let t = general_tau_exponent(4, 3, 0.5, 0.1, -1.5).unwrap();
        assert!(t.n_tau_exceeds_one);
    }
}
