//! Closed-form parameter choices for the random construction, with the
//! optimality claims checked by exact rational evaluation and integer scans.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::{ratio, ratio_int, ratio_to_f64, serde_ratio};
use crate::error::{domain, Result};

/// Attached to every artifact produced below the size condition.
pub const ASYMPTOTIC_BANNER: &str =
    "asymptotic hypotheses unmet: n is below the size condition, so realized values do not instantiate the asymptotic bound";

fn r(v: i64) -> BigRational {
    ratio_int(v)
}

/// `T(k, q) = 1 + ((k-q+1)/k) / (k - (k-q+1)/k - 1)`.
pub fn target_t(k: u32, q: u32) -> Result<BigRational> {
    if k == 0 {
        return domain("k must be positive");
    }
    let kk = r(k as i64);
    let s0 = (kk.clone() - r(q as i64) + r(1)) / kk.clone();
    let denom = kk - s0.clone() - r(1);
    if !denom.is_positive() {
        return domain(format!("T({k}, {q}) has non-positive denominator"));
    }
    Ok(r(1) + s0 / denom)
}

/// Target under the restriction `u = q + 1`:
/// `(k - k/q) / (k - (k-q+1)/k - 1)`.
pub fn coloring_target(k: u32, q: u32) -> Result<BigRational> {
    if k == 0 || q == 0 {
        return domain("k and q must be positive");
    }
    let kk = r(k as i64);
    let qq = r(q as i64);
    let denom = kk.clone() - (kk.clone() - qq.clone() + r(1)) / kk.clone() - r(1);
    if !denom.is_positive() {
        return domain(format!("coloring target at k={k}, q={q} has non-positive denominator"));
    }
    Ok((kk.clone() - kk / qq) / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweep {
    pub q: u32,
    pub ks: Vec<u32>,
    #[serde(with = "crate::arith::serde_ratio_vec")]
    pub values: Vec<BigRational>,
    pub argmax: Vec<u32>,
    #[serde(with = "serde_ratio")]
    pub max: BigRational,
    /// Increasing then decreasing over the scanned range.
    pub unimodal: bool,
}

fn sweep_with(q: u32, ks: std::ops::RangeInclusive<u32>, f: impl Fn(u32, u32) -> Result<BigRational>) -> Result<KSweep> {
    let ks: Vec<u32> = ks.collect();
    if ks.is_empty() {
        return domain("empty k range");
    }
    let values = ks.iter().map(|&k| f(k, q)).collect::<Result<Vec<_>>>()?;
    let max = values.iter().max().cloned().expect("nonempty");
    let argmax = ks.iter().zip(&values).filter(|(_, v)| **v == max).map(|(&k, _)| k).collect();
    let peak = values.iter().position(|v| *v == max).expect("nonempty");
    let unimodal = values[..=peak].windows(2).all(|w| w[0] <= w[1])
        && values[peak..].windows(2).all(|w| w[0] >= w[1]);
    Ok(KSweep { q, ks, values, argmax, max, unimodal })
}

/// Scan `T(k, q)` over `k_range`.
pub fn sweep_k(q: u32, k_range: std::ops::RangeInclusive<u32>) -> Result<KSweep> {
    if q < 3 {
        return domain(format!("q must be >= 3, got {q}"));
    }
    sweep_with(q, k_range, target_t)
}

/// Scan the `u = q + 1` target over `k_range`.
pub fn sweep_coloring_k(q: u32, k_range: std::ops::RangeInclusive<u32>) -> Result<KSweep> {
    if q < 3 {
        return domain(format!("q must be >= 3, got {q}"));
    }
    sweep_with(q, k_range, coloring_target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanKind {
    Piercing,
    Coloring,
}

/// Exponents are in units of `log n`: `alpha = n^{alpha_exp}`, `p = n^{p_exp}`.
/// `*_ideal` fields drop the error term `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterPlan {
    pub kind: PlanKind,
    pub q: u32,
    #[serde(with = "serde_ratio")]
    pub eta: BigRational,
    pub k: u32,
    pub u: u32,
    #[serde(with = "serde_ratio")]
    pub s0: BigRational,
    /// `(k - k s0)/(q - 1)`, the boundary choice of `beta`.
    #[serde(with = "serde_ratio")]
    pub beta: BigRational,
    /// `beta` implied by `p = n^{k - s0 - beta}` after the error term.
    #[serde(with = "serde_ratio")]
    pub beta_effective: BigRational,
    #[serde(with = "serde_ratio")]
    pub f: BigRational,
    /// The requirement `f < f_bound` that keeps the target above the floor.
    #[serde(with = "serde_ratio")]
    pub f_bound: BigRational,
    #[serde(with = "serde_ratio")]
    pub alpha_exp: BigRational,
    #[serde(with = "serde_ratio")]
    pub alpha_exp_ideal: BigRational,
    #[serde(with = "serde_ratio")]
    pub p_exp: BigRational,
    #[serde(with = "serde_ratio")]
    pub p_exp_ideal: BigRational,
    /// `T_ideal - f`.
    #[serde(with = "serde_ratio")]
    pub target: BigRational,
    #[serde(with = "serde_ratio")]
    pub target_ideal: BigRational,
    /// The guaranteed exponent, `1 + (1 - eta)/(den)`.
    #[serde(with = "serde_ratio")]
    pub floor: BigRational,
    /// `ln` of the smallest `n` (or `m`) meeting the size condition on `q`.
    pub ln_size_min: f64,
    pub size_condition: String,
}

impl ParameterPlan {
    pub fn alpha_exp_f64(&self) -> f64 {
        ratio_to_f64(&self.alpha_exp)
    }

    pub fn p_exp_f64(&self) -> f64 {
        ratio_to_f64(&self.p_exp)
    }

    pub fn f_f64(&self) -> f64 {
        ratio_to_f64(&self.f)
    }

    /// Whether `n` meets the size condition.
    pub fn feasible_at(&self, n: f64) -> bool {
        n.ln() >= self.ln_size_min
    }
}

fn check_q_eta(q: u32, eta: &BigRational) -> Result<()> {
    if q < 3 {
        return domain(format!("q must be >= 3, got {q}"));
    }
    if !eta.is_positive() || *eta >= ratio(1, 2) {
        return domain(format!("eta must lie in (0, 1/2), got {eta}"));
    }
    Ok(())
}

/// Smallest `L = ln x` with `L / ln L >= c`, by bisection on the increasing
/// branch `L > e`.
pub fn ln_threshold(c: f64) -> f64 {
    let e = std::f64::consts::E;
    if c <= e {
        return e;
    }
    let g = |l: f64| l / l.ln();
    let mut lo = e;
    let mut hi = c.max(e * 2.0);
    while g(hi) < c {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The main plan: `k = 2q-2`, `s0 = 1/2`, `f = eta/(4q)`, `u = 2q-1`,
/// `alpha = n^{-1-f}`, `p = n^{2q-3.5+f}`.
pub fn choose_parameters(q: u32, eta: &BigRational) -> Result<ParameterPlan> {
    check_q_eta(q, eta)?;
    let qi = q as i64;
    let k = 2 * q - 2;
    let kk = r(k as i64);
    let s0 = (kk.clone() - r(qi) + r(1)) / kk.clone();
    let beta = (kk.clone() - kk.clone() * s0.clone()) / r(qi - 1);
    let f = eta / r(4 * qi);
    let den = r(4 * qi - 7);
    let alpha_exp_ideal = -beta.clone();
    let alpha_exp = alpha_exp_ideal.clone() - f.clone();
    let p_exp_ideal = kk.clone() - s0.clone() - beta.clone();
    let p_exp = p_exp_ideal.clone() + f.clone();
    let target_ideal = target_t(k, q)?;
    let c = (100.0 * q as f64 / ratio_to_f64(eta)).powi(2);
    Ok(ParameterPlan {
        kind: PlanKind::Piercing,
        q,
        eta: eta.clone(),
        k,
        u: 2 * q - 1,
        beta_effective: kk - s0.clone() - p_exp.clone(),
        s0,
        beta,
        f_bound: eta / den.clone(),
        f: f.clone(),
        alpha_exp,
        alpha_exp_ideal,
        p_exp,
        p_exp_ideal,
        target: target_ideal.clone() - f,
        target_ideal,
        floor: r(1) + (r(1) - eta) / den,
        ln_size_min: ln_threshold(c),
        size_condition: "q <= 0.01 eta sqrt(ln n / lnln n)".into(),
    })
}

/// The `u = q + 1` plan: `k = q`, `s0 = 1/q`, `f = eta/q^2`.
pub fn coloring_plan(q: u32, eta: &BigRational) -> Result<ParameterPlan> {
    check_q_eta(q, eta)?;
    let qi = q as i64;
    let k = q;
    let kk = r(k as i64);
    let s0 = (kk.clone() - r(qi) + r(1)) / kk.clone();
    let beta = (kk.clone() - kk.clone() * s0.clone()) / r(qi - 1);
    let f = eta / r(qi * qi);
    let den = r(qi * qi - qi - 1);
    let alpha_exp_ideal = -beta.clone();
    let alpha_exp = alpha_exp_ideal.clone() - f.clone();
    let p_exp_ideal = kk.clone() - s0.clone() - beta.clone();
    let p_exp = p_exp_ideal.clone() + f.clone();
    let target_ideal = coloring_target(k, q)?;
    let c = (200.0 * q as f64 / ratio_to_f64(eta)).powi(4);
    Ok(ParameterPlan {
        kind: PlanKind::Coloring,
        q,
        eta: eta.clone(),
        k,
        u: q + 1,
        beta_effective: kk - s0.clone() - p_exp.clone(),
        s0,
        beta,
        f_bound: eta / den.clone(),
        f: f.clone(),
        alpha_exp,
        alpha_exp_ideal,
        p_exp,
        p_exp_ideal,
        target: target_ideal.clone() - f,
        target_ideal,
        floor: r(1) + (r(1) - eta) / den,
        ln_size_min: ln_threshold(c),
        size_condition: "q <= 0.005 eta (ln m / lnln m)^(1/4)".into(),
    })
}

/// Exponents of the chromatic argument, in units of `log m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringExponents {
    /// `p = m^{(q^2-q-1)/(q^2-q-eta)}`.
    #[serde(with = "serde_ratio")]
    pub independent_exp: BigRational,
    /// `|P| = p^{(q^2-q-eta)/(q^2-q-1)}`.
    #[serde(with = "serde_ratio")]
    pub size_exp: BigRational,
    /// `chi > m^{(1-eta)/(q^2-q-eta)}`.
    #[serde(with = "serde_ratio")]
    pub chromatic_exp: BigRational,
}

pub fn coloring_exponents(q: u32, eta: &BigRational) -> Result<ColoringExponents> {
    check_q_eta(q, eta)?;
    let qi = q as i64;
    let a = r(qi * qi - qi);
    let independent_exp = r(1) - (r(1) - eta) / (a.clone() - eta);
    let size_exp = r(1) + (r(1) - eta) / (a.clone() - r(1));
    Ok(ColoringExponents {
        independent_exp,
        size_exp,
        chromatic_exp: (r(1) - eta) / (a - eta),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCheck {
    pub boundary: f64,
    pub feasible: bool,
}

/// `beta < (k - k s0)/(q - 1)`.
pub fn beta_feasible(k: u32, q: u32, s0: f64, beta: f64) -> Result<BetaCheck> {
    if q < 2 {
        return domain(format!("q must be >= 2, got {q}"));
    }
    let kf = k as f64;
    let boundary = (kf - kf * s0) / (q as f64 - 1.0);
    Ok(BetaCheck { boundary, feasible: beta < boundary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeS0Point {
    pub s0: f64,
    pub p_exp: f64,
    pub capped_target: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UCheck {
    pub u: u32,
    /// `u / (4(u-1))`, the factor by which `alpha/(4(u-1))` may exceed `1/n`.
    pub factor: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeS0Report {
    pub q: u32,
    pub k: u32,
    pub s0_boundary: f64,
    pub boundary_target: f64,
    pub points: Vec<LargeS0Point>,
    pub u_checks: Vec<UCheck>,
    pub holds: bool,
}

/// Past the boundary `s0 > (k-q+1)/k` the target is capped by
/// `log_p n^{k-1}` with `p` at least the boundary-case `p`; check the cap never
/// beats `T(2q-2, q)`.
pub fn large_s0_sweep(q: u32, s0_grid: &[f64], u_grid: &[u32]) -> Result<LargeS0Report> {
    if q < 3 {
        return domain(format!("q must be >= 3, got {q}"));
    }
    let k = 2 * q - 2;
    let kf = k as f64;
    let qf = q as f64;
    let s0_boundary = (kf - qf + 1.0) / kf;
    if let Some(bad) = s0_grid.iter().find(|&&s| s <= s0_boundary || s > 0.9) {
        return domain(format!("s0 = {bad} outside ({s0_boundary}, 0.9]"));
    }
    if let Some(bad) = u_grid.iter().find(|&&u| u < 2) {
        return domain(format!("u = {bad} must be >= 2"));
    }
    let boundary_target = ratio_to_f64(&target_t(k, q)?);
    let p_boundary = kf - s0_boundary - 1.0;
    let points: Vec<LargeS0Point> = s0_grid
        .iter()
        .map(|&s0| {
            let p_exp = p_boundary.max(kf - s0 - (kf - kf * s0) / (qf - 1.0));
            let capped_target = (kf - 1.0) / p_exp;
            LargeS0Point { s0, p_exp, capped_target, margin: boundary_target - capped_target }
        })
        .collect();
    let u_checks: Vec<UCheck> = u_grid
        .iter()
        .map(|&u| {
            let factor = u as f64 / (4.0 * (u as f64 - 1.0));
            UCheck { u, factor, holds: factor <= 1.0 }
        })
        .collect();
    let holds = points.iter().all(|p| p.margin >= -1e-12) && u_checks.iter().all(|u| u.holds);
    Ok(LargeS0Report { q, k, s0_boundary, boundary_target, points, u_checks, holds })
}

/// `1 + 1/(4q - 7)`.
pub fn best_target(q: u32) -> BigRational {
    r(1) + BigRational::new(BigInt::one(), BigInt::from(4 * q as i64 - 7))
}

/// Default `s0` grid for the large-`s0` sweep: 64 evenly spaced points in
/// `(boundary, 0.9]`.
pub fn default_s0_grid(q: u32) -> Vec<f64> {
    let k = (2 * q - 2) as f64;
    let lo = (k - q as f64 + 1.0) / k;
    (1..=64).map(|i| lo + (0.9 - lo) * i as f64 / 64.0).filter(|s| *s > lo).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    #[test]
    fn target_examples() {
        assert_eq!(target_t(4, 3).unwrap(), ratio(6, 5));
        assert_eq!(target_t(3, 3).unwrap(), ratio(6, 5));
        assert_eq!(target_t(6, 4).unwrap(), ratio(10, 9));
        assert!(target_t(0, 3).is_err());
    }

    #[test]
    fn sweep_examples() {
        let s = sweep_k(3, 3..=12).unwrap();
        assert_eq!(s.argmax, vec![3, 4]);
        assert_eq!(s.max, ratio(6, 5));
        assert!(s.unimodal);
        let s = sweep_k(5, 5..=20).unwrap();
        assert_eq!(s.max, ratio(14, 13));
        assert_eq!(s.argmax, vec![7, 8]);
    }

    #[test]
    fn plan_for_q3() {
        let eta = parse_rational("0.4").unwrap();
        let p = choose_parameters(3, &eta).unwrap();
        assert_eq!((p.k, p.u), (4, 5));
        assert_eq!(p.s0, ratio(1, 2));
        assert_eq!(p.f, ratio(1, 30));
        assert_eq!(p.p_exp, ratio(5, 2) + ratio(1, 30));
        assert_eq!(p.alpha_exp, ratio(-31, 30));
        assert_eq!(p.beta, ratio(1, 1));
        assert_eq!(p.floor, ratio(28, 25));
        assert_eq!(p.target, ratio(6, 5) - ratio(1, 30));
        assert!(p.f < p.f_bound);
        assert!(p.target >= p.floor);
        // sqrt(ln n / lnln n) >= 750.
        let l = p.ln_size_min;
        assert!(((l / l.ln()).sqrt() - 750.0).abs() < 1e-6);
        assert!(!p.feasible_at(1e300));
        assert!(choose_parameters(2, &eta).is_err());
        assert!(choose_parameters(3, &ratio(1, 2)).is_err());
    }

    #[test]
    fn beta_examples() {
        let b = beta_feasible(4, 3, 0.5, 0.99).unwrap();
        assert_eq!(b.boundary, 1.0);
        assert!(b.feasible);
        assert!(!beta_feasible(4, 3, 0.5, 1.0).unwrap().feasible);
        assert!(beta_feasible(4, 3, 1.0 - 1e-9, 0.0).unwrap().boundary < 1e-8);
    }

    #[test]
    fn large_s0_examples() {
        let rep = large_s0_sweep(3, &[0.5 + 1e-9, 0.6, 0.75, 0.9], &[2, 3, 5, 40]).unwrap();
        assert!((rep.boundary_target - 1.2).abs() < 1e-15);
        assert!(rep.holds);
        assert!(rep.points[0].margin < 1e-8);
        assert!(rep.points.windows(2).all(|w| w[0].capped_target >= w[1].capped_target));
        assert!(large_s0_sweep(3, &[0.5], &[2]).is_err());
    }

    #[test]
    fn coloring_examples() {
        let eta = parse_rational("0.3").unwrap();
        let p = coloring_plan(3, &eta).unwrap();
        assert_eq!(p.target_ideal, ratio(6, 5));
        assert_eq!((p.k, p.u), (3, 4));
        assert_eq!(p.f, ratio(1, 30));
        assert_eq!(coloring_plan(4, &eta).unwrap().target_ideal, ratio(12, 11));
        let s = sweep_coloring_k(3, 3..=12).unwrap();
        assert_eq!(s.argmax, vec![3]);
        assert!(s.values.windows(2).all(|w| w[0] > w[1]));
        let e = coloring_exponents(3, &ratio(1, 1_000_000_000)).unwrap();
        assert!((ratio_to_f64(&e.independent_exp) - 5.0 / 6.0).abs() < 1e-8);
        for q in 3..20 {
            let e = coloring_exponents(q, &eta).unwrap();
            assert_eq!(e.independent_exp.clone() * e.size_exp.clone(), r(1));
        }
    }
}
