//! Closed-form success probabilities and resource costs.
//!
//! `lambda0` and `lambda1` are the per-bit success probabilities of one run of
//! the nested interferometer, `lambda_avg` their mix under the source prior
//! `q = Pr[b = 0]`. Repeating the protocol until the first success is a
//! geometric experiment; [`min_trials`] gives the number of repetitions needed
//! to reach a target success probability and [`zeta`] the resulting cost
//! `M * N * x` in channel round trips.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{quarter_turn_cos_sin, Scalar};

/// Trial counts beyond this are reported as unreachable.
pub const MAX_TRIALS: u64 = 1 << 50;

/// A trial count or cost that may not exist.
///
/// Serialized as a bare integer, or the string `"unreachable"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reach {
    Finite(u64),
    Unreachable,
}

impl Reach {
    pub fn finite(self) -> Option<u64> {
        match self {
            Reach::Finite(v) => Some(v),
            Reach::Unreachable => None,
        }
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, Reach::Finite(_))
    }
}

impl fmt::Display for Reach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reach::Finite(v) => write!(f, "{v}"),
            Reach::Unreachable => f.write_str("unreachable"),
        }
    }
}

impl Serialize for Reach {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Reach::Finite(v) => serializer.serialize_u64(*v),
            Reach::Unreachable => serializer.serialize_str("unreachable"),
        }
    }
}

impl<'de> Deserialize<'de> for Reach {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ReachVisitor;

        impl Visitor<'_> for ReachVisitor {
            type Value = Reach;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer or \"unreachable\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Reach, E> {
                Ok(Reach::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Reach, E> {
                u64::try_from(v)
                    .map(Reach::Finite)
                    .map_err(|_| E::custom("negative trial count"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Reach, E> {
                match v {
                    "unreachable" => Ok(Reach::Unreachable),
                    other => other
                        .parse()
                        .map(Reach::Finite)
                        .map_err(|_| E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ReachVisitor)
    }
}

pub(crate) fn check_cycles(name: &'static str, value: u64) -> Result<()> {
    if value == 0 {
        Err(Error::invalid(name, "must be at least 1"))
    } else {
        Ok(())
    }
}

pub(crate) fn check_prior<T: Scalar>(q: T) -> Result<()> {
    if q >= T::zero() && q <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid("q", format!("{q} is outside [0, 1]")))
    }
}

pub(crate) fn check_target<T: Scalar>(p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::invalid("P", format!("{p} is outside (0, 1)")))
    }
}

/// Largest exponent raised by repeated squaring; longer chains go through
/// the log domain.
const DIRECT_POWER_LIMIT: u64 = 1024;

/// `sin^2(k pi / 2d)` from the doubled angle, exact on quarter turns.
fn half_angle_sin2<T: Scalar>(k: u64, d: u64) -> T {
    let (cos2, _) = quarter_turn_cos_sin::<T>(2 * k, d);
    (T::one() - cos2) / T::of(2.0)
}

/// `base^exp` for `base` in `[0, 1]` by repeated squaring.
fn unit_power<T: Scalar>(base: T, exp: u64) -> T {
    if base <= T::zero() {
        return T::zero();
    }
    let (mut acc, mut sq, mut e) = (T::one(), base, exp);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * sq;
        }
        sq = sq * sq;
        e >>= 1;
    }
    acc
}

/// Success probability for bit 0: `cos^(2M)(pi / 2M)`.
pub fn lambda0<T: Scalar>(m: u64) -> Result<T> {
    check_cycles("M", m)?;
    let loss = half_angle_sin2::<T>(1, m);
    if m > DIRECT_POWER_LIMIT {
        return Ok((T::of_u64(m) * (-loss).ln_1p()).exp());
    }
    Ok(unit_power(T::one() - loss, m))
}

/// Success probability for bit 1:
/// `prod_{m=1..M} [1 - sin^2(m pi / 2M) sin^2(pi / 2N)]^N`.
///
/// Exactly zero when any factor vanishes.
pub fn lambda1<T: Scalar>(m: u64, n: u64) -> Result<T> {
    check_cycles("M", m)?;
    check_cycles("N", n)?;
    let sin2_n = half_angle_sin2::<T>(1, n);
    let mut log_sum = T::zero();
    let mut product = T::one();
    for k in 1..=m {
        let loss = half_angle_sin2::<T>(k, m) * sin2_n;
        if loss >= T::one() {
            return Ok(T::zero());
        }
        log_sum = log_sum + (-loss).ln_1p();
        product = product * (T::one() - loss);
    }
    if n > DIRECT_POWER_LIMIT || product < T::of(1e-200) {
        return Ok((T::of_u64(n) * log_sum).exp());
    }
    Ok(unit_power(product, n))
}

/// Source-averaged success probability `q lambda0 + (1 - q) lambda1`.
pub fn lambda_avg<T: Scalar>(m: u64, n: u64, q: T) -> Result<T> {
    check_prior(q)?;
    Ok(q * lambda0(m)? + (T::one() - q) * lambda1(m, n)?)
}

/// Whether every bit value that can occur under prior `q` has a nonzero
/// success probability.
///
/// With `M = 1` a bit-0 run never succeeds and with `N = 1, M > 1` a bit-1
/// run never does; such a cell cannot serve a source that emits that bit,
/// however favourable its averaged `lambda` looks.
pub fn is_feasible<T: Scalar>(lambda0: T, lambda1: T, q: T) -> bool {
    (q <= T::zero() || lambda0 > T::zero()) && (q >= T::one() || lambda1 > T::zero())
}

/// Smallest `x` with `1 - (1 - lambda)^x >= p`.
///
/// The ceiling of the log ratio is only a starting point: the inequality is
/// then checked at `x` and `x - 1` and the count adjusted, since the ratio of
/// two nearly equal logarithms is easily off by one.
pub fn min_trials<T: Scalar>(lambda: T, p: T) -> Result<Reach> {
    check_target(p)?;
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::invalid(
            "lambda",
            format!("{lambda} is outside [0, 1]"),
        ));
    }
    if lambda <= T::zero() {
        return Ok(Reach::Unreachable);
    }
    if lambda >= p {
        return Ok(Reach::Finite(1));
    }
    let ratio = (-p).ln_1p() / (-lambda).ln_1p();
    if !ratio.is_finite() || ratio > T::of_u64(MAX_TRIALS) {
        return Ok(Reach::Unreachable);
    }
    let fail = T::one() - lambda;
    let meets = |x: u64| T::one() - pow_count(fail, x) >= p;
    let mut x = ratio.ceil().to_u64().unwrap_or(1).max(1);
    while !meets(x) {
        x += 1;
    }
    while x > 1 && meets(x - 1) {
        x -= 1;
    }
    Ok(Reach::Finite(x))
}

fn pow_count<T: Scalar>(base: T, exponent: u64) -> T {
    match i32::try_from(exponent) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(T::of_u64(exponent)),
    }
}

/// Channel cost `M * N * x(lambda_avg, p)` of delivering one bit with
/// probability at least `p`.
pub fn zeta<T: Scalar>(m: u64, n: u64, q: T, p: T) -> Result<Reach> {
    check_target(p)?;
    let l0 = lambda0::<T>(m)?;
    let l1 = lambda1::<T>(m, n)?;
    check_prior(q)?;
    if !is_feasible(l0, l1, q) {
        return Ok(Reach::Unreachable);
    }
    let lambda = q * l0 + (T::one() - q) * l1;
    Ok(match min_trials(lambda, p)? {
        Reach::Finite(x) => m
            .checked_mul(n)
            .and_then(|mn| mn.checked_mul(x))
            .map_or(Reach::Unreachable, Reach::Finite),
        Reach::Unreachable => Reach::Unreachable,
    })
}

/// Optimized resources derived from a minimal cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resources<T> {
    /// Channel uses, `2 zeta`.
    pub eta_min: u64,
    /// Time in units of one round trip, equal to `zeta`.
    pub t_min_over_tc: T,
    /// Time in seconds for the supplied round-trip time.
    pub t_min: T,
    /// Bits per channel use, `P / eta_min`.
    pub delta_max: T,
}

pub fn derived_resources<T: Scalar>(zeta_min: u64, p: T, t_c: T) -> Result<Resources<T>> {
    if zeta_min == 0 {
        return Err(Error::invalid("zeta_min", "must be at least 1"));
    }
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::invalid("P", format!("{p} is outside (0, 1]")));
    }
    if !(t_c >= T::zero() && t_c.is_finite()) {
        return Err(Error::invalid("T_c", "must be finite and non-negative"));
    }
    let eta_min = 2 * zeta_min;
    let zeta = T::of_u64(zeta_min);
    Ok(Resources {
        eta_min,
        t_min_over_tc: zeta,
        t_min: zeta * t_c,
        delta_max: p / T::of_u64(eta_min),
    })
}

/// Every analytic quantity for one `(M, N)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct AnalyticPoint<T> {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub q: T,
    pub lambda0: T,
    pub lambda1: T,
    pub lambda: T,
    /// Channel uses per run, `2 M N`.
    pub eta: u64,
    #[serde(rename = "T_over_Tc")]
    pub t_over_tc: T,
    /// Successful transmission rate in bits per channel use.
    pub delta: T,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Reach>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Reach>,
    #[serde(rename = "T_c", default, skip_serializing_if = "Option::is_none")]
    pub t_c: Option<T>,
    /// Wall time of one run in seconds, when `T_c` is known.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<T>,
}

impl<T: Scalar> AnalyticPoint<T> {
    /// Evaluates a cell; `x` and `zeta` are filled in only when a target `p`
    /// is given.
    pub fn evaluate(m: u64, n: u64, q: T, p: Option<T>, t_c: Option<T>) -> Result<Self> {
        check_prior(q)?;
        if let Some(p) = p {
            check_target(p)?;
        }
        if let Some(t_c) = t_c {
            if !(t_c >= T::zero() && t_c.is_finite()) {
                return Err(Error::invalid("T_c", "must be finite and non-negative"));
            }
        }
        let lambda0 = lambda0::<T>(m)?;
        let lambda1 = lambda1::<T>(m, n)?;
        let lambda = q * lambda0 + (T::one() - q) * lambda1;
        let mn = m
            .checked_mul(n)
            .ok_or_else(|| Error::invalid("M*N", "overflows"))?;
        let eta = 2 * mn;
        let t_over_tc = T::of_u64(mn);
        let (x, zeta) = match p {
            None => (None, None),
            Some(_) if !is_feasible(lambda0, lambda1, q) => {
                (Some(Reach::Unreachable), Some(Reach::Unreachable))
            }
            Some(p) => {
                let x = min_trials(lambda, p)?;
                let zeta = match x {
                    Reach::Finite(x) => mn.checked_mul(x).map_or(Reach::Unreachable, Reach::Finite),
                    Reach::Unreachable => Reach::Unreachable,
                };
                (Some(x), Some(zeta))
            }
        };
        Ok(Self {
            m,
            n,
            q,
            lambda0,
            lambda1,
            lambda,
            eta,
            t_over_tc,
            delta: lambda / T::of_u64(eta),
            p,
            x,
            zeta,
            t_c,
            t: t_c.map(|tc| t_over_tc * tc),
        })
    }

    /// `true` when a target was given and the cell cannot meet it.
    pub fn is_unreachable(&self) -> bool {
        self.zeta == Some(Reach::Unreachable)
    }
}
