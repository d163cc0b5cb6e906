//! Exhaustive `(M, N)` search and the parameter sweeps built on it.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, derived_resources, is_feasible, AnalyticPoint, Reach};
use crate::error::{Error, Result};
use crate::protocol::Bit;
use crate::scalar::Scalar;

/// Default upper bound for both `M` and `N`.
pub const DEFAULT_GRID_MAX: u64 = 25;

/// Search domain `M in 1..=m_max`, `N in 1..=n_max` at fixed `(q, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    #[serde(rename = "M_max")]
    pub m_max: u64,
    #[serde(rename = "N_max")]
    pub n_max: u64,
    pub q: T,
    #[serde(rename = "P")]
    pub p: T,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(m_max: u64, n_max: u64, q: T, p: T) -> Result<Self> {
        analytic::check_cycles("M_max", m_max)?;
        analytic::check_cycles("N_max", n_max)?;
        analytic::check_prior(q)?;
        analytic::check_target(p)?;
        Ok(Self { m_max, n_max, q, p })
    }

    pub fn with_defaults(q: T, p: T) -> Result<Self> {
        Self::new(DEFAULT_GRID_MAX, DEFAULT_GRID_MAX, q, p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult<T> {
    pub spec: GridSpec<T>,
    pub zeta_min: u64,
    #[serde(rename = "M_star")]
    pub m_star: u64,
    #[serde(rename = "N_star")]
    pub n_star: u64,
    pub x_star: u64,
    pub eta_min: u64,
    #[serde(rename = "T_min_over_Tc")]
    pub t_min_over_tc: T,
    pub delta_max: T,
    /// Other cells reaching `zeta_min`, in tie-break order.
    pub ties: Vec<(u64, u64)>,
    /// Every cell, row-major in `M` then `N`.
    pub grid: Vec<AnalyticPoint<T>>,
}

/// Tie-break key: smallest cost, then smallest `M N`, then smallest `M`.
fn rank(zeta: u64, m: u64, n: u64) -> (u64, u64, u64) {
    (zeta, m * n, m)
}

fn better(a: Option<(u64, u64, u64)>, b: Option<(u64, u64, u64)>) -> Option<(u64, u64, u64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Evaluates every cell of the grid and returns the cost minimizer.
pub fn optimize<T: Scalar>(spec: &GridSpec<T>) -> Result<OptimizationResult<T>> {
    let spec = GridSpec::new(spec.m_max, spec.n_max, spec.q, spec.p)?;
    let cells: Vec<(u64, u64)> = (1..=spec.m_max)
        .flat_map(|m| (1..=spec.n_max).map(move |n| (m, n)))
        .collect();
    let grid = cells
        .par_iter()
        .map(|&(m, n)| AnalyticPoint::evaluate(m, n, spec.q, Some(spec.p), None))
        .collect::<Result<Vec<_>>>()?;

    let key = |pt: &AnalyticPoint<T>| match pt.zeta {
        Some(Reach::Finite(z)) => Some(rank(z, pt.m, pt.n)),
        _ => None,
    };
    let (zeta_min, mn, m_star) = grid
        .par_iter()
        .map(key)
        .reduce(|| None, better)
        .ok_or(Error::EmptyFeasibleSet)?;
    let n_star = mn / m_star;
    let star = &grid[((m_star - 1) * spec.n_max + (n_star - 1)) as usize];
    let x_star = star
        .x
        .and_then(Reach::finite)
        .ok_or(Error::EmptyFeasibleSet)?;

    let mut ties: Vec<_> = grid
        .iter()
        .filter(|pt| pt.zeta == Some(Reach::Finite(zeta_min)) && (pt.m, pt.n) != (m_star, n_star))
        .map(|pt| (rank(zeta_min, pt.m, pt.n), (pt.m, pt.n)))
        .collect();
    ties.sort();

    let resources = derived_resources(zeta_min, spec.p, T::one())?;
    Ok(OptimizationResult {
        spec,
        zeta_min,
        m_star,
        n_star,
        x_star,
        eta_min: resources.eta_min,
        t_min_over_tc: resources.t_min_over_tc,
        delta_max: resources.delta_max,
        ties: ties.into_iter().map(|(_, cell)| cell).collect(),
        grid,
    })
}

/// The `M` in `1..=m_max` with the highest transmission rate at fixed `N`,
/// among cells that can carry every bit the source emits. Ties go to the
/// smaller `M`.
pub fn argmax_rate<T: Scalar>(q: T, n: u64, m_max: u64) -> Result<u64> {
    analytic::check_cycles("M_max", m_max)?;
    let mut best: Option<(u64, T)> = None;
    for m in 1..=m_max {
        let pt = AnalyticPoint::evaluate(m, n, q, None, None)?;
        if !is_feasible(pt.lambda0, pt.lambda1, q) {
            continue;
        }
        match best {
            Some((_, rate)) if pt.delta.partial_cmp(&rate) != Some(Ordering::Greater) => {}
            _ => best = Some((m, pt.delta)),
        }
    }
    best.map(|(m, _)| m).ok_or(Error::EmptyFeasibleSet)
}

/// One row of a sweep over `N`; column names are the CSV header.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepNRow<T> {
    #[serde(rename = "N")]
    pub n: u64,
    pub lambda: T,
    pub delta: T,
    #[serde(rename = "T_over_Tc")]
    pub t_over_tc: T,
}

pub fn sweep_n<T: Scalar>(
    q: T,
    m: u64,
    n_range: std::ops::RangeInclusive<u64>,
) -> Result<Vec<SweepNRow<T>>> {
    if n_range.is_empty() {
        return Err(Error::invalid("N range", "is empty"));
    }
    n_range
        .map(|n| {
            let pt = AnalyticPoint::evaluate(m, n, q, None, None)?;
            Ok(SweepNRow {
                n,
                lambda: pt.lambda,
                delta: pt.delta,
                t_over_tc: pt.t_over_tc,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepQRow<T> {
    pub q: T,
    #[serde(rename = "M_star")]
    pub m_star: u64,
    #[serde(rename = "N_star")]
    pub n_star: u64,
    pub x: u64,
    pub zeta_min: u64,
}

/// Optimal cell and trial count across source priors at fixed target `p`.
pub fn sweep_q<T: Scalar>(p: T, q_grid: &[T], m_max: u64, n_max: u64) -> Result<Vec<SweepQRow<T>>> {
    if q_grid.is_empty() {
        return Err(Error::invalid("q grid", "is empty"));
    }
    q_grid
        .iter()
        .map(|&q| {
            let r = optimize(&GridSpec::new(m_max, n_max, q, p)?)?;
            Ok(SweepQRow {
                q,
                m_star: r.m_star,
                n_star: r.n_star,
                x: r.x_star,
                zeta_min: r.zeta_min,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BitPlan<T> {
    pub index: usize,
    pub bit: Bit,
    /// Success probability of one run for this bit.
    pub lambda: T,
    /// Runs needed to reach the per-bit target.
    pub worst_case_trials: u64,
    /// Mean runs until first success, `1 / lambda`.
    pub expected_trials: T,
}

/// Channel and time budget for sending a bit string.
///
/// Each bit is repeated until it succeeds, at its own `lambda_b`. Moving on
/// to the next bit requires Alice to learn of every erasure herself, which
/// the modified nested variant provides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitSchedule<T> {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "P_per_bit")]
    pub p_per_bit: T,
    #[serde(rename = "T_c")]
    pub t_c: T,
    pub bits: Vec<BitPlan<T>>,
    /// Channel uses per run, `2 M N`.
    pub channel_uses_per_run: u64,
    pub worst_case_runs: u64,
    pub worst_case_channel_uses: u64,
    pub worst_case_time: T,
    pub expected_runs: T,
    pub expected_channel_uses: T,
    pub expected_time: T,
    pub requires_modified_variant: bool,
}

pub fn plan_bitstring<T: Scalar>(
    bits: &[Bit],
    p_per_bit: T,
    m: u64,
    n: u64,
    t_c: T,
) -> Result<BitSchedule<T>> {
    analytic::check_target(p_per_bit)?;
    if !(t_c >= T::zero() && t_c.is_finite()) {
        return Err(Error::invalid("T_c", "must be finite and non-negative"));
    }
    let lambda0 = analytic::lambda0::<T>(m)?;
    let lambda1 = analytic::lambda1::<T>(m, n)?;
    for (bit, lambda) in [(Bit::Zero, lambda0), (Bit::One, lambda1)] {
        if lambda <= T::zero() {
            return Err(Error::Infeasible {
                m,
                n,
                what: format!("bit {bit}"),
            });
        }
    }
    let trials = |lambda: T, bit: Bit| match analytic::min_trials(lambda, p_per_bit)? {
        Reach::Finite(x) => Ok(x),
        Reach::Unreachable => Err(Error::Infeasible {
            m,
            n,
            what: format!("bit {bit} with probability {p_per_bit}"),
        }),
    };
    let x0 = trials(lambda0, Bit::Zero)?;
    let x1 = trials(lambda1, Bit::One)?;

    let plans: Vec<BitPlan<T>> = bits
        .iter()
        .enumerate()
        .map(|(index, &bit)| {
            let (lambda, worst) = match bit {
                Bit::Zero => (lambda0, x0),
                Bit::One => (lambda1, x1),
            };
            BitPlan {
                index,
                bit,
                lambda,
                worst_case_trials: worst,
                expected_trials: T::one() / lambda,
            }
        })
        .collect();

    let mn = m * n;
    let per_run = 2 * mn;
    let worst_case_runs: u64 = plans.iter().map(|b| b.worst_case_trials).sum();
    let expected_runs = plans
        .iter()
        .fold(T::zero(), |acc, b| acc + b.expected_trials);
    let run_time = T::of_u64(mn) * t_c;
    Ok(BitSchedule {
        m,
        n,
        p_per_bit,
        t_c,
        bits: plans,
        channel_uses_per_run: per_run,
        worst_case_runs,
        worst_case_channel_uses: worst_case_runs * per_run,
        worst_case_time: T::of_u64(worst_case_runs) * run_time,
        expected_runs,
        expected_channel_uses: expected_runs * T::of_u64(per_run),
        expected_time: expected_runs * run_time,
        requires_modified_variant: true,
    })
}
