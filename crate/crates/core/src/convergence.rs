//! Continuous-time interpolation of discrete trajectories, sup-norm
//! comparison against the Newtonian reference, and convergence-rate
//! estimation across a sweep in the signal speed `c`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::math::fit_line;
use crate::newtonian::{solve, NewtonianError, NewtonianSolution};
use crate::recurrence::{run, DiscreteTrajectory, ModelParams, RecurrenceError};

/// Integration tolerance used for reference solutions in sweeps. Chosen so
/// the oracle error stays negligible against the measured deviations down to
/// c = 1e6.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Interior sample points per step interval in sup-error grids, on top of the
/// knots themselves.
pub const INTERIOR_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvergenceError {
    #[error("time {t} outside the trajectory span [{t_first}, {t_last}]")]
    OutOfRange { t: f64, t_first: f64, t_last: f64 },
    #[error("trajectory too short: need {needed} steps, have {actual}")]
    InsufficientTrajectory { needed: usize, actual: usize },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error(transparent)]
    Recurrence(#[from] RecurrenceError),
    #[error(transparent)]
    Newtonian(#[from] NewtonianError),
}

/// How the discrete trajectory is read as a curve between knots.
///
/// Both modes satisfy the bracketing hypothesis `y_n <= y(t) <= y_{n+1}`,
/// `w_n <= w(t) <= w_{n+1}` on each interval (enforced by clamping).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InterpolationMode {
    /// Piecewise-linear `y` with the jump `alpha` at the knots,
    /// piecewise-constant `w`; both right-continuous.
    #[serde(rename = "jump")]
    Jump,
    /// Continuous `y` and `w` with piecewise-constant acceleration `a_n`.
    #[serde(rename = "smooth")]
    Smooth,
}

impl fmt::Display for InterpolationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterpolationMode::Jump => "jump",
            InterpolationMode::Smooth => "smooth",
        })
    }
}

impl FromStr for InterpolationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jump" => Ok(InterpolationMode::Jump),
            "smooth" => Ok(InterpolationMode::Smooth),
            other => Err(format!("unknown interpolation mode: {other}")),
        }
    }
}

/// Evaluate the interpolated `(y(t), w(t))` of a trajectory.
pub fn interpolate(
    traj: &DiscreteTrajectory,
    t: f64,
    mode: InterpolationMode,
) -> Result<(f64, f64), ConvergenceError> {
    let states = traj.states();
    let t_first = states[0].t;
    let t_last = traj.last().t;
    if !t.is_finite() || t < t_first || t > t_last {
        return Err(ConvergenceError::OutOfRange { t, t_first, t_last });
    }
    if t == t_last {
        return Ok((traj.last().y, traj.last().w));
    }
    let idx = states.partition_point(|s| s.t <= t) - 1;
    let s = &states[idx];
    let next = &states[idx + 1];
    let inc = &traj.increments()[idx];
    let tau = t - s.t;

    let (y, w) = match mode {
        InterpolationMode::Jump => (s.y + s.w * tau, s.w),
        InterpolationMode::Smooth => (
            s.y + s.w * tau + 0.5 * inc.a * tau * tau,
            s.w + inc.a * tau,
        ),
    };
    // clamp to the bracketing hypothesis
    let y = y.clamp(s.y.min(next.y), s.y.max(next.y));
    let w = w.clamp(s.w.min(next.w), s.w.max(next.w));
    Ok((y, w))
}

/// Sup-norm deviation from the Newtonian reference at equal times over the
/// first `ceil(A c)` steps: the grid holds every knot plus
/// [`INTERIOR_SAMPLES`] points inside each interval.
///
/// Returns `(sup |y(t) - x(t)|, sup |w(t) - v(t)|)`.
pub fn sup_error(
    traj: &DiscreteTrajectory,
    reference: &NewtonianSolution,
    mode: InterpolationMode,
    horizon_a: f64,
) -> Result<(f64, f64), ConvergenceError> {
    let window = crate::horizon_steps(horizon_a, traj.params().c());
    if traj.n_steps() < window {
        return Err(ConvergenceError::InsufficientTrajectory {
            needed: window,
            actual: traj.n_steps(),
        });
    }

    let mut sup_y: f64 = 0.0;
    let mut sup_w: f64 = 0.0;
    let mut probe = |t: f64| -> Result<(), ConvergenceError> {
        let (y, w) = interpolate(traj, t, mode)?;
        let p = reference.eval(t)?;
        sup_y = sup_y.max((y - p.x).abs());
        sup_w = sup_w.max((w - p.v).abs());
        Ok(())
    };

    for n in 0..window {
        let state = &traj.states()[n];
        let dt = traj.increments()[n].dt;
        probe(state.t)?;
        for j in 1..=INTERIOR_SAMPLES {
            probe(state.t + dt * j as f64 / (INTERIOR_SAMPLES + 1) as f64)?;
        }
    }
    probe(traj.states()[window].t)?;

    Ok((sup_y, sup_w))
}

/// Sup errors and fitted log-log rates for a sweep over `c`.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub gamma: f64,
    pub y0: f64,
    pub w0: f64,
    pub horizon_a: f64,
    pub mode: InterpolationMode,
    pub c_values: Vec<f64>,
    pub sup_errors_y: Vec<f64>,
    pub sup_errors_w: Vec<f64>,
    /// Slope of `log sup_y` against `log c` (the headline fitted rate).
    pub fitted_rate_y: f64,
    /// Slope of `log sup_w` against `log c`.
    pub fitted_rate_w: f64,
    /// `exp(intercept)` of the position fit: the constant in `error = B * c^rate`.
    pub fitted_b_y: f64,
    pub fitted_b_w: f64,
}

/// Run the model at every `c` in `c_list`, measure sup errors against the
/// Newtonian reference with identical initial data, and fit the decay rate.
///
/// Per-c runs execute in parallel; results are deterministic regardless of
/// thread count.
pub fn rate_sweep(
    gamma: f64,
    y0: f64,
    w0: f64,
    horizon_a: f64,
    c_list: &[f64],
    mode: InterpolationMode,
) -> Result<ConvergenceReport, ConvergenceError> {
    if c_list.len() < 3 {
        return Err(ConvergenceError::InvalidSweep(
            "need >=3 c values".to_string(),
        ));
    }
    if c_list.windows(2).any(|pair| pair[1] <= pair[0]) {
        return Err(ConvergenceError::InvalidSweep(
            "c values must be strictly increasing".to_string(),
        ));
    }

    let cells: Vec<(f64, f64)> = c_list
        .par_iter()
        .map(|&c| -> Result<(f64, f64), ConvergenceError> {
            let params = ModelParams::new(c, gamma)?;
            let n_steps = crate::horizon_steps(horizon_a, c);
            let traj = run(&params, y0, w0, n_steps)?;
            let span = traj.last().t;
            let reference = solve(gamma, y0, w0, span * (1.0 + 1e-9), REFERENCE_TOL)?;
            sup_error(&traj, &reference, mode, horizon_a)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let sup_errors_y: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let sup_errors_w: Vec<f64> = cells.iter().map(|c| c.1).collect();

    let log_c: Vec<f64> = c_list.iter().map(|c| c.ln()).collect();
    let log_y: Vec<f64> = sup_errors_y.iter().map(|e| e.ln()).collect();
    let log_w: Vec<f64> = sup_errors_w.iter().map(|e| e.ln()).collect();
    let (fitted_rate_y, intercept_y) = fit_line(&log_c, &log_y);
    let (fitted_rate_w, intercept_w) = fit_line(&log_c, &log_w);

    Ok(ConvergenceReport {
        gamma,
        y0,
        w0,
        horizon_a,
        mode,
        c_values: c_list.to_vec(),
        sup_errors_y,
        sup_errors_w,
        fitted_rate_y,
        fitted_rate_w,
        fitted_b_y: intercept_y.exp(),
        fitted_b_w: intercept_w.exp(),
    })
}
