//! Localization checks, reflection barriers, recurrence series and spread
//! exponents.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::trig::QuarterFraction;
use crate::walk::{evolve_with, CoinSchedule, Order, Spinor, WalkerState};

/// Default `θ` in `E|X_t| / t^θ`.
pub const DEFAULT_THETA: f64 = 0.5;

/// Default diagonal magnitude below which a coin counts as nearly reflecting.
pub const DEFAULT_NEAR_BARRIER_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub alpha_description: String,
    pub predicted_interval: Option<(i64, i64)>,
    pub observed_support: (i64, i64),
    /// Probability strictly outside `predicted_interval`.
    pub leaked_probability: f64,
    pub steps: u64,
}

/// Interval a walk from the origin cannot leave: `[−Q, Q]` for quarter
/// fractions, otherwise the nearest exact barriers on either side of the
/// origin within `reach` sites.
pub fn confinement_interval(schedule: &CoinSchedule, reach: i64) -> Option<(i64, i64)> {
    if let CoinSchedule::Rotational(alpha) = schedule {
        if let Some(f) = alpha.as_quarter() {
            let q = f.q() as i64;
            return Some((-q, q));
        }
    }
    let left = (1..=reach).map(|k| -k).find(|&n| schedule.coin_at(n).is_reflecting())?;
    let right = (1..=reach).find(|&n| schedule.coin_at(n).is_reflecting())?;
    Some((left, right))
}

fn first_leak(state: &WalkerState, lo: i64, hi: i64) -> Option<(i64, f64)> {
    let zero = Complex64::new(0.0, 0.0);
    state
        .amplitudes()
        .find(|(n, a)| (*n < lo || *n > hi) && (a[0] != zero || a[1] != zero))
        .map(|(n, a)| (n, a[0].norm_sqr() + a[1].norm_sqr()))
}

/// Evolves `t` steps (order `WC`) and reports the support, failing with
/// [`Error::Leakage`] if any amplitude outside `[−Q, Q]` is nonzero.
pub fn finite_support_verify(f: QuarterFraction, t: u64, initial: Spinor) -> Result<LocalizationReport> {
    let schedule = CoinSchedule::quarter(f.p(), f.q())?;
    let q = f.q() as i64;
    let mut state = WalkerState::localized(initial);
    let mut leak = None;
    evolve_with(&mut state, &schedule, t, Order::WC, |s| {
        if leak.is_none() {
            leak = first_leak(s, -q, q);
        }
    })?;
    if let Some((site, probability)) = leak {
        return Err(Error::Leakage {
            site,
            q: f.q(),
            probability,
        });
    }
    Ok(LocalizationReport {
        alpha_description: schedule.description(),
        predicted_interval: Some((-q, q)),
        observed_support: state.support(0.0)?,
        leaked_probability: state.probability_outside(-q, q),
        steps: t,
    })
}

/// Localization report for any schedule; the prediction comes from
/// [`confinement_interval`] with barriers searched within `t + 1` sites.
pub fn localization_report(schedule: &CoinSchedule, t: u64, initial: Spinor, order: Order) -> Result<LocalizationReport> {
    let predicted = confinement_interval(schedule, t as i64 + 1);
    let mut state = WalkerState::localized(initial);
    evolve_with(&mut state, schedule, t, order, |_| {})?;
    let leaked = match predicted {
        Some((lo, hi)) => state.probability_outside(lo, hi),
        None => 0.0,
    };
    Ok(LocalizationReport {
        alpha_description: schedule.description(),
        predicted_interval: predicted,
        observed_support: state.support(0.0)?,
        leaked_probability: leaked,
        steps: t,
    })
}

/// Sites in `[min, max]` whose coin has both diagonal entries exactly zero.
pub fn barrier_positions(schedule: &CoinSchedule, window: (i64, i64)) -> Vec<i64> {
    let (lo, hi) = window;
    if let CoinSchedule::Rotational(alpha) = schedule {
        if let Some(f) = alpha.as_quarter() {
            return (lo..=hi).filter(|&n| f.is_barrier(n)).collect();
        }
    }
    (lo..=hi).filter(|&n| schedule.coin_at(n).is_reflecting()).collect()
}

/// Sites whose coin diagonal is small but not necessarily zero.
///
/// This is a heuristic for schedules without exact barriers (Haar-random
/// coins have a zero diagonal with probability zero); it certifies nothing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NearBarrierReport {
    pub eps: f64,
    pub window: (i64, i64),
    /// `(site, max |diagonal entry|)`.
    pub sites: Vec<(i64, f64)>,
    pub rigorous: bool,
}

pub fn near_barrier_report(schedule: &CoinSchedule, window: (i64, i64), eps: f64) -> NearBarrierReport {
    let sites = (window.0..=window.1)
        .filter_map(|n| {
            let d = schedule.coin_at(n).max_diagonal_magnitude();
            (d < eps).then_some((n, d))
        })
        .collect();
    NearBarrierReport {
        eps,
        window,
        sites,
        rigorous: false,
    }
}

/// Origin probability after each of `0..=t_max` steps (order `WC`).
pub fn recurrence_series(schedule: &CoinSchedule, t_max: u64, initial: Spinor) -> Result<Vec<(u64, f64)>> {
    let mut state = WalkerState::localized(initial);
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push((0, state.origin_probability()));
    evolve_with(&mut state, schedule, t_max, Order::WC, |s| {
        out.push((s.step_count(), s.origin_probability()));
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadEstimate {
    pub times: Vec<u64>,
    pub sigmas: Vec<f64>,
    /// Least-squares slope of `log σ` against `log t` over the upper half of
    /// the checkpoints; `None` with fewer than two usable points.
    pub fitted_exponent: Option<f64>,
    pub theta: f64,
    /// `E|X_t| / t^θ` at each checkpoint (0 at `t = 0`).
    pub scaled_tail: Vec<f64>,
}

fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, s)| *t > 0.0 && *s > 0.0)
        .map(|(t, s)| (t.ln(), s.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Evolves once (order `WC`) to the last checkpoint, recording `σ(t)` and
/// `E|X_t| / t^θ` at each.
pub fn spread_exponent(schedule: &CoinSchedule, checkpoints: &[u64], initial: Spinor, theta: f64) -> Result<SpreadEstimate> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidInput("at least one checkpoint is required".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("checkpoints must be strictly increasing".into()));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidInput(format!("theta must be positive, got {theta}")));
    }
    let mut state = WalkerState::localized(initial);
    let mut sigmas = Vec::with_capacity(checkpoints.len());
    let mut tails = Vec::with_capacity(checkpoints.len());
    let mut record = |s: &WalkerState| {
        let m = s.moment_stats();
        let t = s.step_count();
        sigmas.push(m.std_dev);
        tails.push(if t == 0 { 0.0 } else { m.abs_moments[0] / (t as f64).powf(theta) });
    };
    let mut next = 0;
    if checkpoints[0] == 0 {
        record(&state);
        next = 1;
    }
    let last = *checkpoints.last().unwrap();
    evolve_with(&mut state, schedule, last, Order::WC, |s| {
        if next < checkpoints.len() && s.step_count() == checkpoints[next] {
            record(s);
            next += 1;
        }
    })?;
    let start = checkpoints.len() / 2;
    let pts: Vec<(f64, f64)> = checkpoints[start..]
        .iter()
        .zip(&sigmas[start..])
        .map(|(&t, &s)| (t as f64, s))
        .collect();
    Ok(SpreadEstimate {
        times: checkpoints.to_vec(),
        fitted_exponent: log_log_slope(&pts),
        sigmas,
        theta,
        scaled_tail: tails,
    })
}
