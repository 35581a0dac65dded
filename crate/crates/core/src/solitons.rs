//! Closed-form soliton profiles and solitary waves.
//!
//! Two families live here: the exponentially decaying profiles `phi_{omega,c}`
//! for `c^2 < 4 omega`, and the zero-mass ground state
//! `W(x) = 2^{3/2} (4x^2 + 1)^{-1/2}` with its `L^2`-critical rescalings.
//!
//! Phase primitives `int_{-inf}^s |profile|^2` are evaluated in closed form, so
//! translated and rescaled waves are synthesized analytically at every node.
//! The decay profile is `cosh(sqrt(4 omega - c^2) x)`: the square root acts on
//! the rate only, which is the reading that actually solves the profile ODE.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, Grid, C64};

/// `W(0) = 2^{3/2}`.
pub const W_PEAK: f64 = 2.828_427_124_746_190_3;

/// `W(x) = 2^{3/2} (4x^2 + 1)^{-1/2}`.
pub fn w_value(x: f64) -> f64 {
    W_PEAK / (4.0 * x * x + 1.0).sqrt()
}

/// `W'(x) = -2^{7/2} x (4x^2 + 1)^{-3/2}`.
pub fn w_derivative(x: f64) -> f64 {
    -4.0 * W_PEAK * x * (4.0 * x * x + 1.0).powf(-1.5)
}

/// `W_c(x) = c^{1/2} W(cx)`.
pub fn w_scaled(c: f64, x: f64) -> f64 {
    c.sqrt() * w_value(c * x)
}

/// `int_{-inf}^s W(y)^2 dy = 4 atan(2s) + 2 pi`.
pub fn w_phase_primitive(s: f64) -> f64 {
    4.0 * (2.0 * s).atan() + 2.0 * PI
}

/// Samples of `W_c` on the grid.
pub fn ground_state_w(grid: &Grid, c: f64) -> Result<ComplexField> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "ground-state scale must be positive, got {c}"
        )));
    }
    Ok(ComplexField::from_real_fn(grid, |x| w_scaled(c, x)))
}

/// `(omega, c)` of the exponential soliton family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonParams {
    pub omega: f64,
    pub speed: f64,
}

impl SolitonParams {
    pub fn new(omega: f64, speed: f64) -> Self {
        Self { omega, speed }
    }

    /// Rejects parameters on or beyond the zero-mass boundary `c^2 = 4 omega`.
    pub fn validate(&self) -> Result<()> {
        let Self { omega, speed } = *self;
        if !(omega.is_finite() && speed.is_finite()) || omega <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "need finite omega > 0, got (omega, c) = ({omega}, {speed})"
            )));
        }
        if speed * speed >= 4.0 * omega {
            return Err(Error::InvalidParameters(format!(
                "(omega, c) = ({omega}, {speed}) is outside c^2 < 4 omega"
            )));
        }
        Ok(())
    }

    /// Decay rate `sqrt(4 omega - c^2)`.
    fn rate(&self) -> f64 {
        (4.0 * self.omega - self.speed * self.speed).sqrt()
    }

    /// `sqrt((2 sqrt(omega) + c) / (2 sqrt(omega) - c))`.
    fn asymmetry(&self) -> f64 {
        let s = 2.0 * self.omega.sqrt();
        ((s + self.speed) / (s - self.speed)).sqrt()
    }
}

/// Spatial scale, phase and shift of a point on a soliton orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingParams {
    pub lambda: f64,
    pub theta: f64,
    pub y: f64,
}

impl ScalingParams {
    pub fn new(lambda: f64, theta: f64, y: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "scale must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            theta: theta.rem_euclid(2.0 * PI),
            y,
        })
    }
}

/// `phi_{omega,c}(x)`; assumes validated parameters.
pub fn phi_value(params: &SolitonParams, x: f64) -> f64 {
    let SolitonParams { omega, speed } = *params;
    let kappa = params.rate();
    let a = speed / (2.0 * omega.sqrt());
    let arg = kappa * x;
    // cosh overflows past ~710; the profile is zero to double precision long before.
    if arg.abs() > 700.0 {
        return 0.0;
    }
    let denom = omega.sqrt() / (kappa * kappa) * (arg.cosh() - a);
    1.0 / denom.sqrt()
}

/// `int_{-inf}^s phi_{omega,c}(y)^2 dy`.
pub fn phi_phase_primitive(params: &SolitonParams, s: f64) -> f64 {
    let r = params.asymmetry();
    let t = (0.5 * params.rate() * s).tanh();
    4.0 * ((r * t).atan() + r.atan())
}

pub fn phi_exponential(params: &SolitonParams, grid: &Grid) -> Result<ComplexField> {
    params.validate()?;
    Ok(ComplexField::from_real_fn(grid, |x| phi_value(params, x)))
}

/// `8 atan sqrt((sqrt(4 omega) + c) / (sqrt(4 omega) - c))`, always in `(0, 4 pi)`.
pub fn soliton_mass(params: &SolitonParams) -> Result<f64> {
    params.validate()?;
    Ok(8.0 * params.asymmetry().atan())
}

fn check_center(center: f64, grid: &Grid) -> Result<()> {
    if center.abs() > 0.25 * grid.length() {
        return Err(Error::OutOfBox(format!(
            "center {center:.4} is farther than L/4 = {:.4} from the box center",
            0.25 * grid.length()
        )));
    }
    Ok(())
}

/// `R_lambda(t, x) = lambda^{1/2} R(lambda^2 t, lambda x)` at a single point.
pub fn r_lambda_value(lambda: f64, t: f64, x: f64) -> C64 {
    let s = lambda * x + 2.0 * lambda * lambda * t;
    let phase = 0.75 * w_phase_primitive(s) - lambda * lambda * t - lambda * x;
    C64::from_polar(lambda.sqrt() * w_value(s), phase)
}

/// Samples of `R_lambda(t, .)`; the modulus peak sits at `x = -2 lambda t`.
pub fn solitary_wave_r(t: f64, grid: &Grid, lambda: f64) -> Result<ComplexField> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "scale must be positive, got {lambda}"
        )));
    }
    check_center(-2.0 * lambda * t, grid)?;
    Ok(ComplexField::from_fn(grid, |x| r_lambda_value(lambda, t, x)))
}

/// `e^{i theta} R_lambda(t, . - y)` without the box-center check.
pub fn r_orbit_member(grid: &Grid, t: f64, scaling: &ScalingParams) -> ComplexField {
    let rot = C64::from_polar(1.0, scaling.theta);
    ComplexField::from_fn(grid, |x| rot * r_lambda_value(scaling.lambda, t, x - scaling.y))
}

/// Exact travelling solution `u_{omega,c}(t, .)`; the peak sits at `x = -c t`.
pub fn solitary_wave_u(params: &SolitonParams, t: f64, grid: &Grid) -> Result<ComplexField> {
    params.validate()?;
    let SolitonParams { omega, speed } = *params;
    check_center(-speed * t, grid)?;
    Ok(ComplexField::from_fn(grid, |x| {
        let s = x + speed * t;
        let phase = omega * t - 0.5 * speed * s + 0.75 * phi_phase_primitive(params, s);
        C64::from_polar(phi_value(params, s), phase)
    }))
}

/// Scale closest to `near` for which `R_lambda(0, .)` is continuous across the
/// periodic box edge.
///
/// On `[-L/2, L/2)` the carrier `e^{-i lambda x}` and the gauge phase, which
/// winds by `6 atan(lambda L)` across the box, must agree modulo `2 pi`;
/// otherwise the sampled wave has a jump of size about `2 W(L/2)` at the edge.
pub fn box_compatible_scale(length: f64, near: f64) -> Result<f64> {
    if !(length > 0.0 && near > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "need positive box length and scale, got ({length}, {near})"
        )));
    }
    let mismatch = |lambda: f64| 6.0 * (lambda * length).atan() - lambda * length;
    let slope = |lambda: f64| 6.0 * length / (1.0 + (lambda * length).powi(2)) - length;
    if slope(near) >= 0.0 {
        return Err(Error::InvalidParameters(format!(
            "box of length {length} is too small to host R at scale {near}"
        )));
    }
    let m0 = (-mismatch(near) / (2.0 * PI)).round();
    let mut best: Option<f64> = None;
    for m in [m0 - 1.0, m0, m0 + 1.0] {
        let target = -2.0 * PI * m;
        let mut lambda = near;
        for _ in 0..100 {
            let step = (mismatch(lambda) - target) / slope(lambda);
            lambda -= step;
            if step.abs() < 1e-15 * lambda {
                break;
            }
        }
        if lambda > 0.0 && slope(lambda) < 0.0 {
            best = match best {
                Some(b) if (b - near).abs() <= (lambda - near).abs() => Some(b),
                _ => Some(lambda),
            };
        }
    }
    best.ok_or_else(|| Error::InvalidParameters("no box-compatible scale found".into()))
}
