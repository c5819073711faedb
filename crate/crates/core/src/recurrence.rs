//! The discrete virtual-particle model M0(c, gamma).
//!
//! A signal bounces at speed `c` between a particle fixed at the origin and a
//! moving particle at `y > 0`; every round trip advances time by `dt`, kicks
//! the position by `alpha = gamma / c^2` plus the free drift, and kicks the
//! velocity by `2 * alpha / dt`. The same step can be written in three
//! algebraically equivalent ways (position jump, constant in-interval
//! acceleration, meeting-time equation); all three are exposed here, together
//! with trajectory generation and the velocity-free simplified model.

use serde::Serialize;
use thiserror::Error;

use crate::math::KahanSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecurrenceError {
    #[error("parameter {name} must be a positive finite number, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("speed |{w}| reaches the signal speed c = {c}; the signal can no longer catch up")]
    VelocityAtSignalSpeed { w: f64, c: f64 },
    #[error("degenerate geometry: y + alpha/2 = {value} is not positive")]
    DegenerateGeometry { value: f64 },
    #[error("evolution failed unexpectedly at step {n}: {source}")]
    EvolutionFailed {
        n: usize,
        source: Box<RecurrenceError>,
    },
}

/// Model parameters: signal speed `c > 0`, coupling `gamma > 0`, and the
/// derived jump length `alpha = gamma / c^2` (never set independently).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    c: f64,
    gamma: f64,
    alpha: f64,
}

impl ModelParams {
    pub fn new(c: f64, gamma: f64) -> Result<Self, RecurrenceError> {
        if !c.is_finite() || c <= 0.0 {
            return Err(RecurrenceError::NonPositiveParameter { name: "c", value: c });
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(RecurrenceError::NonPositiveParameter {
                name: "gamma",
                value: gamma,
            });
        }
        Ok(Self {
            c,
            gamma,
            alpha: gamma / (c * c),
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// One point of the discrete trajectory: step index `n`, time `t`, position
/// `y`, velocity `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelState {
    pub n: usize,
    pub t: f64,
    pub y: f64,
    pub w: f64,
}

impl ModelState {
    pub fn initial(y0: f64, w0: f64) -> Self {
        Self {
            n: 0,
            t: 0.0,
            y: y0,
            w: w0,
        }
    }
}

/// Per-step increments together with the interval acceleration
/// `a = 2 * alpha / dt^2` of the constant-acceleration reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepIncrements {
    pub dt: f64,
    pub dy: f64,
    pub dw: f64,
    pub a: f64,
}

fn check_speed(w: f64, c: f64) -> Result<(), RecurrenceError> {
    if w.abs() >= c {
        return Err(RecurrenceError::VelocityAtSignalSpeed { w, c });
    }
    Ok(())
}

// Shared core of the jump-form step. `dt` is evaluated as
// (2y + alpha) / (c - w), the exact algebraic rearrangement of
// (2y + alpha)/c * (1 - w/c)^{-1}: the subtracted form stays accurate for w
// near c, where the factored form loses up to ~100 ulp to cancellation in
// (1 - w/c).
fn jump_increments(y: f64, w: f64, params: &ModelParams) -> Result<StepIncrements, RecurrenceError> {
    check_speed(w, params.c)?;
    let two_y_alpha = 2.0 * y + params.alpha;
    if two_y_alpha <= 0.0 {
        return Err(RecurrenceError::DegenerateGeometry {
            value: 0.5 * two_y_alpha,
        });
    }
    let dt = two_y_alpha / (params.c - w);
    let dy = params.alpha + w * dt;
    let dw = 2.0 * params.alpha / dt;
    let a = dw / dt;
    Ok(StepIncrements { dt, dy, dw, a })
}

fn advance(state: &ModelState, inc: &StepIncrements) -> ModelState {
    ModelState {
        n: state.n + 1,
        t: state.t + inc.dt,
        y: state.y + inc.dy,
        w: state.w + inc.dw,
    }
}

/// One step of the recurrence in jump form:
/// `dt = (2y + alpha)/c * (1 - w/c)^{-1}`, `dy = alpha + w dt`,
/// `dw = 2 alpha / dt`.
pub fn step(
    state: &ModelState,
    params: &ModelParams,
) -> Result<(ModelState, StepIncrements), RecurrenceError> {
    let inc = jump_increments(state.y, state.w, params)?;
    Ok((advance(state, &inc), inc))
}

/// One step in acceleration form: the particle moves with constant
/// acceleration `a` on the interval and must cover the extra distance `alpha`,
/// so `a dt^2 / 2 = alpha` and the meeting condition
/// `c dt = 2y + w dt + a dt^2 / 2` closes the system.
///
/// Excluding the acceleration reduces the system exactly to the jump form,
/// which is why the result matches [`step`] bit for bit.
pub fn step_acceleration_form(
    state: &ModelState,
    params: &ModelParams,
) -> Result<(ModelState, StepIncrements), RecurrenceError> {
    check_speed(state.w, params.c)?;
    let two_y_alpha = 2.0 * state.y + params.alpha;
    if two_y_alpha <= 0.0 {
        return Err(RecurrenceError::DegenerateGeometry {
            value: 0.5 * two_y_alpha,
        });
    }
    // a dt^2 / 2 = alpha turns the meeting condition into c dt = 2y + alpha + w dt.
    let dt = two_y_alpha / (params.c - state.w);
    // dw = a dt = (2 alpha / dt^2) dt = 2 alpha / dt, exactly.
    let dw = 2.0 * params.alpha / dt;
    let a = dw / dt;
    // dy = w dt + a dt^2 / 2 = w dt + alpha, exactly.
    let dy = state.w * dt + params.alpha;
    let inc = StepIncrements { dt, dy, dw, a };
    Ok((advance(state, &inc), inc))
}

/// Solve the implicit meeting equation `dt = (2y + alpha + w dt) / c` for the
/// unique round-trip time `dt = (2y + alpha) / (c - w)`.
pub fn implicit_meeting_time(state: &ModelState, params: &ModelParams) -> Result<f64, RecurrenceError> {
    check_speed(state.w, params.c)?;
    let two_y_alpha = 2.0 * state.y + params.alpha;
    if two_y_alpha <= 0.0 {
        return Err(RecurrenceError::DegenerateGeometry {
            value: 0.5 * two_y_alpha,
        });
    }
    Ok(two_y_alpha / (params.c - state.w))
}

/// A generated trajectory: `n_steps + 1` states and one increment record per
/// step. Regenerating with the same inputs reproduces it bit for bit.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteTrajectory {
    params: ModelParams,
    states: Vec<ModelState>,
    increments: Vec<StepIncrements>,
}

impl DiscreteTrajectory {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn states(&self) -> &[ModelState] {
        &self.states
    }

    pub fn increments(&self) -> &[StepIncrements] {
        &self.increments
    }

    pub fn n_steps(&self) -> usize {
        self.increments.len()
    }

    pub fn initial(&self) -> &ModelState {
        &self.states[0]
    }

    pub fn last(&self) -> &ModelState {
        self.states.last().expect("trajectory has at least one state")
    }

    // Assemble a trajectory from raw parts, bypassing evolution; lets tests
    // hand the checkers deliberately inconsistent data.
    #[cfg(test)]
    pub(crate) fn from_parts(
        params: ModelParams,
        states: Vec<ModelState>,
        increments: Vec<StepIncrements>,
    ) -> Self {
        Self {
            params,
            states,
            increments,
        }
    }
}

/// Run the recurrence for `n_steps` steps from `t = 0`, `y = y0`, `w = w0`.
///
/// Accumulators for `t`, `y`, `w` use compensated summation so that sup-error
/// measurements stay meaningful at large `c`; consequently a stored state can
/// differ from a single uncompensated replay of its predecessor by up to one
/// ulp per component. Step errors cannot occur for valid initial data and are
/// reported as [`RecurrenceError::EvolutionFailed`].
pub fn run(
    params: &ModelParams,
    y0: f64,
    w0: f64,
    n_steps: usize,
) -> Result<DiscreteTrajectory, RecurrenceError> {
    if !y0.is_finite() || y0 <= 0.0 {
        return Err(RecurrenceError::NonPositiveParameter {
            name: "y0",
            value: y0,
        });
    }
    if !w0.is_finite() {
        return Err(RecurrenceError::NonPositiveParameter {
            name: "w0",
            value: w0,
        });
    }
    check_speed(w0, params.c)?;

    let mut states = Vec::with_capacity(n_steps + 1);
    let mut increments = Vec::with_capacity(n_steps);
    states.push(ModelState::initial(y0, w0));

    let mut t = KahanSum::new(0.0);
    let mut y = KahanSum::new(y0);
    let mut w = KahanSum::new(w0);

    for n in 0..n_steps {
        let inc = jump_increments(y.value(), w.value(), params).map_err(|e| {
            RecurrenceError::EvolutionFailed {
                n,
                source: Box::new(e),
            }
        })?;
        t.add(inc.dt);
        y.add(inc.dy);
        w.add(inc.dw);
        states.push(ModelState {
            n: n + 1,
            t: t.value(),
            y: y.value(),
            w: w.value(),
        });
        increments.push(inc);
    }

    Ok(DiscreteTrajectory {
        params: *params,
        states,
        increments,
    })
}

/// Closed form of the velocity-free simplified model (`dy = alpha` per step):
/// `y_n = y0 + n alpha` and `t_n = sum of (2 y_k + alpha)/c = (2 n y0 + n^2 alpha)/c`.
///
/// Returns `(t_n, y_n)`.
pub fn simplified_closed_form(
    params: &ModelParams,
    y0: f64,
    n: usize,
) -> Result<(f64, f64), RecurrenceError> {
    if !y0.is_finite() || y0 <= 0.0 {
        return Err(RecurrenceError::NonPositiveParameter {
            name: "y0",
            value: y0,
        });
    }
    let nf = n as f64;
    let y_n = y0 + nf * params.alpha;
    let t_n = (2.0 * nf * y0 + nf * nf * params.alpha) / params.c;
    Ok((t_n, y_n))
}

/// Index of the first state with nonnegative velocity.
///
/// `Some(0)` whenever the trajectory starts with `w0 >= 0`; `None` if a
/// negative-velocity trajectory never turns around within its length.
pub fn turnaround_index(traj: &DiscreteTrajectory) -> Option<usize> {
    traj.states().iter().position(|s| s.w >= 0.0)
}
