//! Exact and log-space arithmetic shared by every module.
//!
//! Counting results are exact ([`BigUint`], [`BigRational`]). Bound formulas
//! whose values are doubly exponential are carried in log space and tagged
//! with their depth through [`Quantity`], so a report never mixes an exact
//! count with a formula value.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Exact binomial coefficient `C(n, r)`.
pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Generalized binomial `x (x-1) ... (x-k+1) / k!` for real `x`.
pub fn generalized_binomial(x: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (x - i as f64) / (i as f64 + 1.0);
    }
    acc
}

/// Natural log of `C(N, m)` where only `ln N` is known.
///
/// Requires `N >= m`. For astronomically large `N` the falling factorial is
/// replaced by `N^m`, whose relative error `~ m^2 / N` is below f64 resolution
/// once `ln N > 700`.
pub fn ln_binomial_from_ln(ln_big: f64, m: u64) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    if ln_big > 700.0 {
        return Ok(mf * ln_big - ln_gamma(mf + 1.0));
    }
    let big = ln_big.exp();
    if big < mf {
        return Err(Error::Domain(format!(
            "binomial C(N, m) with N = {big:.6e} < m = {m}"
        )));
    }
    if m <= 100_000 {
        let mut s = 0.0;
        for i in 0..m {
            s += (big - i as f64).ln();
        }
        Ok(s - ln_gamma(mf + 1.0))
    } else {
        Ok(ln_gamma(big + 1.0) - ln_gamma(big - mf + 1.0) - ln_gamma(mf + 1.0))
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a > b`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Render a rational as `"p/q"` (always with a denominator).
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `"p/q"`, `"p"`, or a finite decimal such as `"0.4"` or `"-1.25e-3"`
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Domain(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    for _ in 0..shift.unsigned_abs() {
        if shift > 0 {
            value *= ten.clone();
        } else {
            value /= ten.clone();
        }
    }
    Ok(if negative { -value } else { value })
}

pub fn ceil_ratio(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

pub fn is_positive(r: &BigRational) -> bool {
    r.is_positive()
}

/// A report value tagged with the arithmetic that produced it.
///
/// `LogSpace { ln }` denotes the positive quantity `e^ln`;
/// `NestedLog { sign, ln_abs_ln }` denotes a quantity `X` with
/// `ln X = sign * e^{ln_abs_ln}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Quantity {
    Exact { value: String },
    Float {
        #[serde(with = "serde_ext_f64")]
        value: f64,
    },
    LogSpace {
        #[serde(with = "serde_ext_f64")]
        ln: f64,
    },
    NestedLog {
        sign: i8,
        #[serde(with = "serde_ext_f64")]
        ln_abs_ln: f64,
    },
}

impl Quantity {
    pub fn exact_int(v: &BigUint) -> Self {
        Quantity::Exact { value: v.to_string() }
    }

    pub fn exact_ratio(r: &BigRational) -> Self {
        Quantity::Exact { value: ratio_string(r) }
    }

    pub fn float(v: f64) -> Self {
        Quantity::Float { value: v }
    }

    pub fn log_space(ln: f64) -> Self {
        Quantity::LogSpace { ln }
    }

    /// Tag a quantity whose natural log is `ln_value`, demoting to a nested
    /// log when `|ln_value|` itself would not be a comfortable f64.
    pub fn from_signed_log(log_value: SignedLog) -> Self {
        match log_value.as_f64() {
            Some(v) if v.abs() < 1e300 => Quantity::LogSpace { ln: v },
            _ => Quantity::NestedLog {
                sign: log_value.sign,
                ln_abs_ln: log_value.ln_abs,
            },
        }
    }
}

/// A real number `sign * e^{ln_abs}`; used for values (typically logarithms
/// of bounds) that may themselves overflow f64.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub sign: i8,
    #[serde(with = "serde_ext_f64")]
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, ln_abs: f64::NEG_INFINITY };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLog { sign: if v > 0.0 { 1 } else { -1 }, ln_abs: v.abs().ln() }
        }
    }

    pub fn positive(ln_abs: f64) -> Self {
        SignedLog { sign: 1, ln_abs }
    }

    pub fn negative(ln_abs: f64) -> Self {
        SignedLog { sign: -1, ln_abs }
    }

    pub fn neg_infinity() -> Self {
        SignedLog { sign: -1, ln_abs: f64::INFINITY }
    }

    /// The plain value, when it fits in an f64.
    pub fn as_f64(&self) -> Option<f64> {
        if self.sign == 0 {
            return Some(0.0);
        }
        if self.ln_abs > 709.0 {
            return if self.ln_abs.is_infinite() {
                Some(self.sign as f64 * f64::INFINITY)
            } else {
                None
            };
        }
        Some(self.sign as f64 * self.ln_abs.exp())
    }

    pub fn add(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        if self.sign == other.sign {
            return SignedLog { sign: self.sign, ln_abs: log_add_exp(self.ln_abs, other.ln_abs) };
        }
        if self.ln_abs == other.ln_abs {
            return Self::ZERO;
        }
        let (big, small) = if self.ln_abs > other.ln_abs { (self, other) } else { (other, self) };
        SignedLog { sign: big.sign, ln_abs: log_sub_exp(big.ln_abs, small.ln_abs) }
    }

    pub fn is_negative(&self) -> bool {
        self.sign < 0
    }
}

/// Serde adapter: `BigUint` as a decimal string.
pub mod serde_biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

/// Serde adapter: `BigRational` as `"p/q"`.
pub mod serde_ratio {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::ratio_string(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_rational(&text).map_err(D::Error::custom)
    }
}

/// Serde adapter: an `f64` that may be infinite or NaN, written as a JSON
/// number when finite and as `"inf"`, `"-inf"` or `"nan"` otherwise.
pub mod serde_ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other}"))),
            },
        }
    }
}

/// Serde adapter: a list of `BigRational` as `"p/q"` strings.
pub mod serde_ratio_vec {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(super::ratio_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| super::parse_rational(t).map_err(D::Error::custom))
            .collect()
    }
}

/// Serde adapter: map of `BigUint` values as decimal strings.
pub mod serde_biguint_map {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(v: &BTreeMap<u32, BigUint>, s: S) -> Result<S::Ok, S::Error> {
        let m: BTreeMap<String, String> =
            v.iter().map(|(k, x)| (k.to_string(), x.to_string())).collect();
        m.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, BigUint>, D::Error> {
        let m = BTreeMap::<String, String>::deserialize(d)?;
        m.into_iter()
            .map(|(k, v)| {
                Ok((k.parse().map_err(D::Error::custom)?, v.parse().map_err(D::Error::custom)?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(9, 3), BigUint::from(84u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
        assert!((generalized_binomial(2.5, 2) - 1.875).abs() < 1e-15);
        assert_eq!(generalized_binomial(7.0, 0), 1.0);
    }

    #[test]
    fn ln_binomial_matches_exact() {
        let exact = binomial(50, 7).to_f64().unwrap().ln();
        let got = ln_binomial_from_ln(50f64.ln(), 7).unwrap();
        assert!((exact - got).abs() < 1e-10);
        assert!(ln_binomial_from_ln(3f64.ln(), 5).is_err());
    }

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("0.4").unwrap(), ratio(2, 5));
        assert_eq!(parse_rational("1e-6").unwrap(), ratio(1, 1_000_000));
        assert_eq!(parse_rational("-3/6").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("12").unwrap(), ratio_int(12));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn signed_log_arithmetic() {
        let a = SignedLog::from_f64(5.0);
        let b = SignedLog::from_f64(-3.0);
        assert!((a.add(b).as_f64().unwrap() - 2.0).abs() < 1e-12);
        assert!((b.add(SignedLog::from_f64(1.0)).as_f64().unwrap() + 2.0).abs() < 1e-12);
        let huge = SignedLog::positive(1e6);
        assert!(huge.as_f64().is_none());
        assert!(matches!(Quantity::from_signed_log(huge), Quantity::NestedLog { .. }));
    }
}
