//! Discrete virtual-particle dynamics with a Newtonian reference oracle.
//!
//! A signal bouncing at speed `c` between a fixed and a moving particle
//! generates a nonlinear recurrence for times, positions, and velocities;
//! under the scaling `alpha = gamma / c^2` its trajectories approach the
//! solutions of `d^2x/ds^2 = gamma / (2 x^2)`. This crate implements the
//! recurrence ([`recurrence`]), a high-accuracy integrator for the limit
//! equation ([`newtonian`]), per-trajectory diagnostics and lemma checks
//! ([`analysis`]), and sup-error sweeps that measure the convergence rate in
//! `c` ([`convergence`]).

pub mod analysis;
pub mod convergence;
pub mod math;
pub mod newtonian;
pub mod recurrence;

pub use analysis::{
    check_lemma, energy_time_products, equal_position_gaps, force_profile, potential_profile,
    AnalysisError, LemmaId, LemmaReport, PositionGap, Witness,
};
pub use convergence::{
    interpolate, rate_sweep, sup_error, ConvergenceError, ConvergenceReport, InterpolationMode,
};
pub use newtonian::{
    energies, solve, terminal_velocity, time_of_flight, NewtonianError, NewtonianSolution,
    PhasePoint,
};
pub use recurrence::{
    implicit_meeting_time, run, simplified_closed_form, step, step_acceleration_form,
    turnaround_index, DiscreteTrajectory, ModelParams, ModelState, RecurrenceError,
    StepIncrements,
};

/// Number of recurrence steps covering horizon `A` at signal speed `c`:
/// `ceil(A * c)`, with products within 1e-9 relative of an integer snapped to
/// it so that decimal inputs like `A = 0.1, c = 100` give 10 steps, not 11.
pub fn horizon_steps(horizon_a: f64, c: f64) -> usize {
    let raw = horizon_a * c;
    assert!(
        raw.is_finite() && raw >= 0.0,
        "horizon * c must be finite and nonnegative, got {raw}"
    );
    let nearest = raw.round();
    let snapped = if (raw - nearest).abs() <= 1e-9 * raw.abs().max(1.0) {
        nearest
    } else {
        raw.ceil()
    };
    snapped as usize
}
