//! Conserved and variational functionals in the three gauges, plus the sharp
//! Gagliardo-Nirenberg apparatus.
//!
//! Every `Im int conj(f) f_x` pairing and every Dirichlet energy is evaluated
//! on the spectrum, so algebraic identities between functionals (for example
//! `S = E~ + 2 P~ + M~` in the `w` gauge) hold to rounding.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    dirichlet_energy, lp_norm, lp_power, momentum_density_integral, ComplexField, Norm, C64,
};

/// Sharp constant `3^{1/6} (2 pi)^{-1/9}`.
pub fn c_gn() -> f64 {
    3f64.powf(1.0 / 6.0) * (2.0 * PI).powf(-1.0 / 9.0)
}

/// Constrained infimum `d = S(W) = 4 pi`.
pub const GROUND_STATE_ACTION: f64 = 4.0 * PI;
/// `M(W) = ||W||_{L^2}^2`.
pub const GROUND_STATE_MASS: f64 = 4.0 * PI;
/// `||W||_{L^4}^4`.
pub const W_QUARTIC: f64 = 16.0 * PI;
/// `||W||_{L^6}^6`.
pub const W_SEXTIC: f64 = 96.0 * PI;
/// `||W_x||_{L^2}^2`.
pub const W_DIRICHLET: f64 = 2.0 * PI;

/// `f^2 = 8 pi / 3` on the ground state.
pub const RATIO_SQUARED_TARGET: f64 = 8.0 * PI / 3.0;

/// Lower bound `2 C_GN^{-9/2}` for the ratio `f`.
pub fn ratio_lower_bound() -> f64 {
    2.0 * c_gn().powf(-4.5)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    U,
    V,
    W,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gauge::U => "u",
            Gauge::V => "v",
            Gauge::W => "w",
        })
    }
}

impl FromStr for Gauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "u" => Ok(Gauge::U),
            "v" => Ok(Gauge::V),
            "w" => Ok(Gauge::W),
            other => Err(Error::InvalidParameters(format!("unknown gauge `{other}`"))),
        }
    }
}

/// Functionals of one field at one time.
///
/// `mass`, `energy` and `momentum` use the conservation-law forms of the
/// tagged gauge; `action`, `constraint`, `ratio` and `gn_deficit` are applied
/// to the field as given.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalReport {
    pub gauge: Gauge,
    pub mass: f64,
    pub energy: f64,
    pub momentum: f64,
    pub action: f64,
    pub constraint: f64,
    pub ratio: Option<f64>,
    pub gn_deficit: Option<f64>,
}

pub const REPORT_CSV_HEADER: &str = "t,gauge,M,E,P,S,K,f,gn_deficit";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl FunctionalReport {
    /// One CSV row in `REPORT_CSV_HEADER` order, full round-trip precision.
    pub fn csv_row(&self, t: f64) -> String {
        format!(
            "{t},{},{},{},{},{},{},{},{}",
            self.gauge,
            self.mass,
            self.energy,
            self.momentum,
            self.action,
            self.constraint,
            opt(self.ratio),
            opt(self.gn_deficit)
        )
    }

    pub fn is_finite(&self) -> bool {
        [self.mass, self.energy, self.momentum, self.action, self.constraint]
            .iter()
            .chain(self.ratio.iter())
            .chain(self.gn_deficit.iter())
            .all(|x| x.is_finite())
    }
}

/// The scalar ingredients all functionals are built from.
#[derive(Clone, Copy, Debug)]
struct Pieces {
    mass: f64,
    quartic: f64,
    sextic: f64,
    dirichlet: f64,
    twist: f64,
}

impl Pieces {
    fn of(f: &ComplexField) -> Self {
        Self {
            mass: lp_power(f, 2),
            quartic: lp_power(f, 4),
            sextic: lp_power(f, 6),
            dirichlet: dirichlet_energy(f),
            twist: momentum_density_integral(f),
        }
    }

    fn action(&self) -> f64 {
        self.dirichlet + 0.5 * self.quartic - self.sextic / 16.0
    }

    fn constraint(&self) -> f64 {
        6.0 * self.quartic - self.sextic
    }

    fn ratio(&self) -> Option<f64> {
        (self.sextic > 0.0).then(|| self.quartic / self.sextic.sqrt())
    }

    fn gn_deficit(&self) -> Option<f64> {
        (self.sextic > 0.0 || self.quartic > 0.0).then(|| {
            c_gn() * self.quartic.powf(2.0 / 9.0) * self.dirichlet.powf(1.0 / 18.0)
                - self.sextic.powf(1.0 / 6.0)
        })
    }

    fn report(&self, gauge: Gauge, energy: f64, momentum: f64) -> FunctionalReport {
        FunctionalReport {
            gauge,
            mass: self.mass,
            energy,
            momentum,
            action: self.action(),
            constraint: self.constraint(),
            ratio: self.ratio(),
            gn_deficit: self.gn_deficit(),
        }
    }
}

/// `M`, `E`, `P` of the original equation.
///
/// `E = int |u_x|^2 + (3/2) Im |u|^2 u conj(u_x) + (1/2)|u|^6`,
/// `P = Im int conj(u) u_x - (1/2) int |u|^4`.
pub fn functionals_u(u: &ComplexField) -> FunctionalReport {
    let p = Pieces::of(u);
    let ux = u.derivative();
    let cross: f64 = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&z, &zx)| (z.norm_sqr() * z * zx.conj()).im)
        .sum::<f64>()
        * u.grid().dx();
    let energy = p.dirichlet + 1.5 * cross + 0.5 * p.sextic;
    let momentum = p.twist - 0.5 * p.quartic;
    p.report(Gauge::U, energy, momentum)
}

/// `M`, `E`, `P` of the gauged equation.
///
/// `E = (1/2)||v_x||^2 - (1/32)||v||_6^6`, `P = (1/2) Im int conj(v) v_x + (1/8) int |v|^4`.
pub fn functionals_v(v: &ComplexField) -> FunctionalReport {
    let p = Pieces::of(v);
    let energy = 0.5 * p.dirichlet - p.sextic / 32.0;
    let momentum = 0.5 * p.twist + p.quartic / 8.0;
    p.report(Gauge::V, energy, momentum)
}

/// `M~`, `E~`, `P~` of the moving-frame field `w`.
///
/// `E~ = ||w_x||^2 - 2 Im int conj(w) w_x + ||w||^2 - (1/16)||w||_6^6`,
/// `P~ = Im int conj(w) w_x - ||w||^2 + (1/4) int |w|^4`.
pub fn functionals_w(w: &ComplexField) -> FunctionalReport {
    let p = Pieces::of(w);
    let energy = p.dirichlet - 2.0 * p.twist + p.mass - p.sextic / 16.0;
    let momentum = p.twist - p.mass + 0.25 * p.quartic;
    p.report(Gauge::W, energy, momentum)
}

pub fn functionals(field: &ComplexField, gauge: Gauge) -> FunctionalReport {
    match gauge {
        Gauge::U => functionals_u(field),
        Gauge::V => functionals_v(field),
        Gauge::W => functionals_w(field),
    }
}

/// `S(g) = ||g_x||^2 + (1/2)||g||_4^4 - (1/16)||g||_6^6`.
pub fn action_s(g: &ComplexField) -> f64 {
    dirichlet_energy(g) + 0.5 * lp_power(g, 4) - lp_power(g, 6) / 16.0
}

/// `K(g) = 6 ||g||_4^4 - ||g||_6^6`.
pub fn constraint_k(g: &ComplexField) -> f64 {
    6.0 * lp_power(g, 4) - lp_power(g, 6)
}

/// `f = ||g||_4^4 / ||g||_6^3`, absent for the zero field.
pub fn ratio_f(g: &ComplexField) -> Option<f64> {
    Pieces::of(g).ratio()
}

/// `C_GN ||g||_4^{8/9} ||g_x||^{1/9} - ||g||_6`.
pub fn gn_deficit(g: &ComplexField) -> Result<f64> {
    if g.is_zero() {
        return Err(Error::ZeroField("Gagliardo-Nirenberg deficit"));
    }
    Ok(c_gn() * lp_norm(g, Norm::L4).powf(8.0 / 9.0) * lp_norm(g, Norm::H1Seminorm).powf(1.0 / 9.0)
        - lp_norm(g, Norm::L6))
}

/// Deficit divided by `||g||_6`; scale, amplitude, phase and translation invariant.
pub fn relative_gn_deficit(g: &ComplexField) -> Result<f64> {
    Ok(gn_deficit(g)? / lp_norm(g, Norm::L6))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Functional {
    Action,
    Constraint,
}

impl Functional {
    pub fn evaluate(self, g: &ComplexField) -> f64 {
        match self {
            Functional::Action => action_s(g),
            Functional::Constraint => constraint_k(g),
        }
    }

    /// `L^2` gradient `G` with `F'(phi) psi = Re int G conj(psi)`.
    ///
    /// `S'(phi) = 2(-phi_xx + |phi|^2 phi - (3/16)|phi|^4 phi)`,
    /// `K'(phi) = 24 |phi|^2 phi - 6 |phi|^4 phi`.
    pub fn gradient(self, phi: &ComplexField) -> ComplexField {
        match self {
            Functional::Action => {
                let lap = phi.second_derivative();
                let values = phi
                    .values()
                    .iter()
                    .zip(lap.values())
                    .map(|(&z, &zxx)| {
                        let m = z.norm_sqr();
                        2.0 * (-zxx + m * z - 0.1875 * m * m * z)
                    })
                    .collect();
                ComplexField::from_vec_unchecked(phi.grid(), values)
            }
            Functional::Constraint => phi.map(|z| {
                let m = z.norm_sqr();
                24.0 * m * z - 6.0 * m * m * z
            }),
        }
    }
}

/// Step `1e-5 ||phi||_{H^1 seminorm}` (falls back to `1e-5` for flat fields).
pub fn default_fd_step(phi: &ComplexField) -> f64 {
    let s = lp_norm(phi, Norm::H1Seminorm);
    if s > 0.0 {
        1e-5 * s
    } else {
        1e-5
    }
}

/// Central difference `[F(phi + h psi) - F(phi - h psi)] / (2h)`.
pub fn directional_derivative(
    functional: Functional,
    phi: &ComplexField,
    psi: &ComplexField,
    h: f64,
) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameters(format!("step must be positive, got {h}")));
    }
    let plus = phi.add_scaled(C64::new(h, 0.0), psi)?;
    let minus = phi.add_scaled(C64::new(-h, 0.0), psi)?;
    Ok((functional.evaluate(&plus) - functional.evaluate(&minus)) / (2.0 * h))
}

/// Central differences at `h` and `h/2` with their Richardson extrapolation.
#[derive(Clone, Copy, Debug)]
pub struct RichardsonEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

impl RichardsonEstimate {
    /// Discrepancy between the two step sizes, a proxy for the truncation error.
    pub fn spread(&self) -> f64 {
        (self.fine - self.coarse).abs()
    }
}

pub fn directional_derivative_richardson(
    functional: Functional,
    phi: &ComplexField,
    psi: &ComplexField,
    h: f64,
) -> Result<RichardsonEstimate> {
    let coarse = directional_derivative(functional, phi, psi, h)?;
    let fine = directional_derivative(functional, phi, psi, 0.5 * h)?;
    Ok(RichardsonEstimate {
        coarse,
        fine,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

/// `Re int F'(phi) conj(psi)`.
pub fn analytic_pairing(functional: Functional, phi: &ComplexField, psi: &ComplexField) -> Result<f64> {
    Ok(functional.gradient(phi).inner(psi)?.re)
}

/// Dilation generator `psi = phi/2 - x phi_x`.
pub fn dilation_direction(phi: &ComplexField) -> ComplexField {
    let dphi = phi.derivative();
    let values = phi
        .grid()
        .nodes()
        .iter()
        .zip(phi.values().iter().zip(dphi.values()))
        .map(|(&x, (&z, &zx))| 0.5 * z - x * zx)
        .collect();
    ComplexField::from_vec_unchecked(phi.grid(), values)
}

/// `C_GN^{-18} = 4 pi^2 / 27`.
pub fn c_gn_pow_minus_18() -> f64 {
    4.0 * PI * PI / 27.0
}

/// `X^3 - M0 X^2 + 16 M0 C_GN^{-18}`.
pub fn critical_cubic(m0: f64, x: f64) -> f64 {
    x * x * x - m0 * x * x + 16.0 * m0 * c_gn_pow_minus_18()
}

/// `d/dX` of [`critical_cubic`].
pub fn critical_cubic_slope(m0: f64, x: f64) -> f64 {
    3.0 * x * x - 2.0 * m0 * x
}

/// Amplitude rescaling onto `{K = 0}`: returns `(lambda, lambda f)` with
/// `lambda = sqrt(6) ||f||_4^2 / ||f||_6^3`.
pub fn project_to_constraint(f: &ComplexField) -> Result<(f64, ComplexField)> {
    let quartic = lp_power(f, 4);
    let sextic = lp_power(f, 6);
    if f.is_zero() || sextic <= 0.0 {
        return Err(Error::ZeroField("constraint projection"));
    }
    let lambda = (6.0 * quartic / sextic).sqrt();
    Ok((lambda, f.scale_real(lambda)))
}
