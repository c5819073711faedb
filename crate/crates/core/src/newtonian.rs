//! High-accuracy reference oracle for the limiting Newtonian dynamics
//! `d^2x/ds^2 = gamma / (2 x^2)` with repulsive coupling `gamma > 0`.
//!
//! The integrator is an adaptive Dormand-Prince 5(4) scheme with cubic
//! Hermite dense output; step sizes are additionally capped so that the
//! interpolation error between knots stays below the requested tolerance.
//! A flight-time quadrature provides an independent cross-check of the
//! integrator on the monotone branch.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonianError {
    #[error("parameter {name} is invalid: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("step size underflowed at s = {s} (h = {h}); tolerance unachievable")]
    ToleranceUnachievable { s: f64, h: f64 },
    #[error("adaptive quadrature failed to converge near the singular endpoint")]
    SingularIntegrand,
    #[error("evaluation point s = {s} outside the solved span [0, {s_max}]")]
    OutOfDomain { s: f64, s_max: f64 },
}

/// Position and velocity of the Newtonian particle at some time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub v: f64,
}

// One accepted integrator step with endpoint derivatives for Hermite
// interpolation.
#[derive(Debug, Clone, Copy)]
struct DenseStep {
    s: f64,
    h: f64,
    x0: f64,
    v0: f64,
    a0: f64,
    x1: f64,
    v1: f64,
    a1: f64,
}

/// Dense-output solution of the reference equation on `[0, s_max]`.
///
/// Immutable after construction; evaluation is read-only.
#[derive(Debug, Clone)]
pub struct NewtonianSolution {
    gamma: f64,
    x0: f64,
    v0: f64,
    tol: f64,
    s_max: f64,
    steps: Vec<DenseStep>,
}

const MIN_TOL: f64 = 1e-14;
const MAX_TOL: f64 = 1e-6;

fn validate_common(gamma: f64, x0: f64, tol: f64) -> Result<(), NewtonianError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(NewtonianError::InvalidParameter {
            name: "gamma",
            value: gamma,
        });
    }
    if !x0.is_finite() || x0 <= 0.0 {
        return Err(NewtonianError::InvalidParameter {
            name: "x0",
            value: x0,
        });
    }
    if !tol.is_finite() || !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(NewtonianError::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    Ok(())
}

#[inline]
fn accel(gamma: f64, x: f64) -> f64 {
    gamma / (2.0 * x * x)
}

// Dormand-Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights (error estimator).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State2 = [f64; 2];

#[inline]
fn rhs(gamma: f64, u: State2) -> State2 {
    [u[1], accel(gamma, u[0])]
}

#[inline]
fn axpy(u: State2, h: f64, terms: &[(f64, State2)]) -> State2 {
    let mut out = u;
    for &(coeff, k) in terms {
        out[0] += h * coeff * k[0];
        out[1] += h * coeff * k[1];
    }
    out
}

// Largest step for which the cubic Hermite interpolant stays within `tol`,
// from derivative bounds of the right-hand side:
//   x'''' = -gamma^2/(2 x^5) + 3 gamma v^2 / x^4,
// and a crude bound for the fifth derivative controlling the velocity
// interpolant. Interpolation error of cubic Hermite is h^4/384 * |f''''|.
fn dense_step_cap(gamma: f64, x: f64, v: f64, tol: f64) -> f64 {
    let d4 = gamma * gamma / (2.0 * x.powi(5)) + 3.0 * gamma * v * v / x.powi(4);
    let d5 = 2.5 * gamma * gamma * v.abs() / x.powi(6)
        + 3.0 * gamma * v.abs() * accel(gamma, x) / x.powi(4)
        + 12.0 * gamma * v.abs().powi(3) / x.powi(5);
    let bound = d4.max(d5).max(1e-300);
    (384.0 * tol / bound).powf(0.25)
}

/// Integrate the reference equation from `(x0, v0)` over `[0, s_max]`.
pub fn solve(
    gamma: f64,
    x0: f64,
    v0: f64,
    s_max: f64,
    tol: f64,
) -> Result<NewtonianSolution, NewtonianError> {
    validate_common(gamma, x0, tol)?;
    if !v0.is_finite() {
        return Err(NewtonianError::InvalidParameter {
            name: "v0",
            value: v0,
        });
    }
    if !s_max.is_finite() || s_max < 0.0 {
        return Err(NewtonianError::InvalidParameter {
            name: "s_max",
            value: s_max,
        });
    }

    let mut steps = Vec::new();
    let mut s = 0.0;
    let mut u: State2 = [x0, v0];
    let mut k1 = rhs(gamma, u);
    let mut h = (dense_step_cap(gamma, x0, v0, tol) * 1e-3).min(1e-4 * (1.0 + s_max));

    while s < s_max {
        if h > s_max - s {
            h = s_max - s;
        }
        if h < 1e-14 * (1.0 + s.abs()) {
            return Err(NewtonianError::ToleranceUnachievable { s, h });
        }

        let k2 = rhs(gamma, axpy(u, h, &[(A21, k1)]));
        let k3 = rhs(gamma, axpy(u, h, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(gamma, axpy(u, h, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs(gamma, axpy(u, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let k6 = rhs(
            gamma,
            axpy(u, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]),
        );
        let u1 = axpy(
            u,
            h,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        let k7 = rhs(gamma, u1);

        let mut err_sq = 0.0;
        for i in 0..2 {
            let est = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol + tol * u[i].abs().max(u1[i].abs());
            err_sq += (est / scale) * (est / scale);
        }
        let err = (err_sq / 2.0).sqrt();

        if err <= 1.0 {
            steps.push(DenseStep {
                s,
                h,
                x0: u[0],
                v0: u[1],
                a0: k1[1],
                x1: u1[0],
                v1: u1[1],
                a1: k7[1],
            });
            s += h;
            u = u1;
            k1 = k7; // first-same-as-last
            if u[0] <= 0.0 || !u[0].is_finite() {
                return Err(NewtonianError::ToleranceUnachievable { s, h });
            }
        }

        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).min(dense_step_cap(gamma, u[0], u[1], tol));
    }

    Ok(NewtonianSolution {
        gamma,
        x0,
        v0,
        tol,
        s_max,
        steps,
    })
}

impl NewtonianSolution {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Number of accepted integrator steps.
    pub fn knot_count(&self) -> usize {
        self.steps.len()
    }

    /// Evaluate `(x(s), v(s))` by cubic Hermite interpolation on the step
    /// containing `s`.
    pub fn eval(&self, s: f64) -> Result<PhasePoint, NewtonianError> {
        if !(0.0..=self.s_max).contains(&s) {
            return Err(NewtonianError::OutOfDomain {
                s,
                s_max: self.s_max,
            });
        }
        if self.steps.is_empty() {
            // zero-length span
            return Ok(PhasePoint {
                x: self.x0,
                v: self.v0,
            });
        }
        let idx = self
            .steps
            .partition_point(|st| st.s <= s)
            .saturating_sub(1)
            .min(self.steps.len() - 1);
        let st = &self.steps[idx];
        let theta = ((s - st.s) / st.h).clamp(0.0, 1.0);
        let om = 1.0 - theta;
        let h00 = (1.0 + 2.0 * theta) * om * om;
        let h10 = theta * om * om;
        let h01 = theta * theta * (3.0 - 2.0 * theta);
        let h11 = theta * theta * (theta - 1.0);
        Ok(PhasePoint {
            x: h00 * st.x0 + h10 * st.h * st.v0 + h01 * st.x1 + h11 * st.h * st.v1,
            v: h00 * st.v0 + h10 * st.h * st.a0 + h01 * st.v1 + h11 * st.h * st.a1,
        })
    }

    /// Invert `x(s) = x_target` by bisection on the monotone branch
    /// (`v0 >= 0` only). Resolves `s` to 1e-12 absolute.
    pub fn time_at_position(&self, x_target: f64) -> Result<f64, NewtonianError> {
        if self.v0 < 0.0 {
            return Err(NewtonianError::InvalidParameter {
                name: "v0",
                value: self.v0,
            });
        }
        if x_target < self.x0 {
            return Err(NewtonianError::InvalidParameter {
                name: "x_target",
                value: x_target,
            });
        }
        let end = self.eval(self.s_max)?;
        if x_target > end.x {
            return Err(NewtonianError::OutOfDomain {
                s: f64::INFINITY,
                s_max: self.s_max,
            });
        }
        let (mut lo, mut hi) = (0.0_f64, self.s_max);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid)?.x < x_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Turning point `(s, x)` where `v` crosses zero, for `v0 < 0` starts.
    pub fn turning_point(&self) -> Option<(f64, f64)> {
        if self.v0 >= 0.0 {
            return None;
        }
        // v is strictly increasing (a > 0), so there is at most one crossing
        let cross = self.steps.iter().find(|st| st.v0 <= 0.0 && st.v1 >= 0.0)?;
        let (mut lo, mut hi) = (cross.s, cross.s + cross.h);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid).ok()?.v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        Some((s, self.eval(s).ok()?.x))
    }
}

/// Limit velocity `sqrt(v0^2 + gamma / x0)` of the repulsive motion.
pub fn terminal_velocity(gamma: f64, x0: f64, v0: f64) -> f64 {
    (v0 * v0 + gamma / x0).sqrt()
}

/// Kinetic and potential energy `(T, U)` with the reference point chosen so
/// that `U(x0) = 0`: `T = v^2/2`, `U = gamma/(2x) - gamma/(2 x0)`.
pub fn energies(x: f64, v: f64, gamma: f64, x0: f64) -> (f64, f64) {
    (0.5 * v * v, gamma / (2.0 * x) - gamma / (2.0 * x0))
}

// Adaptive Simpson refinement with the classic 1/15 error estimate.
#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64, NewtonianError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps || b - a < 1e-15 * (1.0 + a.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(NewtonianError::SingularIntegrand);
    }
    let l = adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
    let r = adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
    Ok(l + r)
}

/// Flight time `s` from `x0` to `x_target` on the monotone branch
/// (`v0 >= 0`), via the energy integral
/// `s = integral of dx / sqrt(v0^2 + gamma/x0 - gamma/x)`.
///
/// The substitution `x = x0 + u^2` removes the inverse-square-root endpoint
/// singularity of the `v0 = 0` case.
pub fn time_of_flight(
    gamma: f64,
    x0: f64,
    v0: f64,
    x_target: f64,
    tol: f64,
) -> Result<f64, NewtonianError> {
    validate_common(gamma, x0, tol)?;
    if !v0.is_finite() || v0 < 0.0 {
        return Err(NewtonianError::InvalidParameter {
            name: "v0",
            value: v0,
        });
    }
    if !x_target.is_finite() || x_target < x0 {
        return Err(NewtonianError::InvalidParameter {
            name: "x_target",
            value: x_target,
        });
    }
    if x_target == x0 {
        return Ok(0.0);
    }

    let u_max = (x_target - x0).sqrt();
    // gamma/x0 - gamma/x rewritten as gamma u^2 / (x x0): no cancellation
    let integrand = move |u: f64| -> f64 {
        let x = x0 + u * u;
        if v0 == 0.0 {
            // 2u / sqrt(gamma u^2 / (x x0)) simplifies exactly:
            2.0 * (x * x0 / gamma).sqrt()
        } else {
            2.0 * u / (v0 * v0 + gamma * u * u / (x * x0)).sqrt()
        }
    };

    let eps = (0.5 * tol).max(1e-13);
    let fa = integrand(0.0);
    let fb = integrand(u_max);
    let fm = integrand(0.5 * u_max);
    let whole = u_max / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&integrand, 0.0, u_max, fa, fm, fb, whole, eps, 60)
}
