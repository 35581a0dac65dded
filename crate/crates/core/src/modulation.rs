//! Orbit distances: minimization over phase, translation and scaling.
//!
//! The phase is eliminated in closed form, `theta* = arg <g, T_y>`, so only
//! the shift (and, for the full problem, the scale) is searched. Shifts are
//! located by a cross-correlation over all grid translates and then refined
//! with Brent's method on the directly evaluated residual.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::functionals::W_SEXTIC;
use crate::grid::{lp_power, ComplexField, Grid, C64};
use crate::optimize::{brent, golden_section};
use crate::solitons::{r_lambda_value, r_orbit_member, w_scaled, ScalingParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Seminorm {
    /// `||f_x||_{L^2}`.
    HDot1,
    /// `(||f||_{L^2}^2 + ||f_x||_{L^2}^2)^{1/2}`.
    H1,
}

impl Seminorm {
    fn weight(self, grid: &Grid, j: usize) -> f64 {
        let k2 = grid.first_derivative_symbol(j).norm_sqr();
        match self {
            Seminorm::HDot1 => k2,
            Seminorm::H1 => 1.0 + k2,
        }
    }

    fn weights(self, grid: &Grid) -> Vec<f64> {
        (0..grid.len()).map(|j| self.weight(grid, j)).collect()
    }

    /// The norm of `f` in this seminorm.
    pub fn norm(self, f: &ComplexField) -> f64 {
        let grid = f.grid();
        spectral_norm_sq(grid, &f.spectrum(), &self.weights(grid)).sqrt()
    }
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Seminorm::HDot1 => "hdot1",
            Seminorm::H1 => "h1",
        })
    }
}

impl FromStr for Seminorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hdot1" | "h1-seminorm" => Ok(Seminorm::HDot1),
            "h1" => Ok(Seminorm::H1),
            other => Err(Error::UnsupportedNorm(other.to_string())),
        }
    }
}

fn spectral_norm_sq(grid: &Grid, spec: &[C64], weights: &[f64]) -> f64 {
    let n = grid.len() as f64;
    spec.iter().zip(weights).map(|(z, w)| w * z.norm_sqr()).sum::<f64>() * grid.length() / (n * n)
}

fn spectral_inner(grid: &Grid, a: &[C64], b: &[C64], weights: &[f64]) -> C64 {
    let n = grid.len() as f64;
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| *x * y.conj() * *w)
        .sum::<C64>()
        * (grid.length() / (n * n))
}

/// A family of translates `T(. - y)` sampled on a fixed grid.
pub trait Template {
    fn grid(&self) -> &Grid;
    fn at_shift(&self, y: f64) -> ComplexField;
}

/// Sampled fields translate by the Fourier shift theorem.
impl Template for ComplexField {
    fn grid(&self) -> &Grid {
        ComplexField::grid(self)
    }

    fn at_shift(&self, y: f64) -> ComplexField {
        if y == 0.0 {
            self.clone()
        } else {
            self.shifted(y)
        }
    }
}

/// Where the sampled orbit member cuts its algebraic tail.
///
/// Both are samples of the same line function; they differ in the
/// `O(|x|^{-1})` tail beyond the cut. A snapshot of `R_lambda(t)` is cut at
/// the box edge, while a field evolved on the periodic box carries its tail
/// along and is cut opposite its center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailCut {
    BoxEdge,
    Antipodal,
}

/// `R_lambda(t, . - y)`, re-evaluated analytically for every shift.
#[derive(Clone, Debug)]
pub struct SolitonTemplate {
    grid: Grid,
    lambda: f64,
    t: f64,
    cut: TailCut,
}

impl SolitonTemplate {
    pub fn new(grid: &Grid, lambda: f64, t: f64) -> Result<Self> {
        Self::with_cut(grid, lambda, t, TailCut::BoxEdge)
    }

    pub fn with_cut(grid: &Grid, lambda: f64, t: f64, cut: TailCut) -> Result<Self> {
        ScalingParams::new(lambda, 0.0, 0.0)?;
        Ok(Self { grid: grid.clone(), lambda, t, cut })
    }
}

impl Template for SolitonTemplate {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn at_shift(&self, y: f64) -> ComplexField {
        match self.cut {
            TailCut::BoxEdge => r_orbit_member(
                &self.grid,
                self.t,
                &ScalingParams { lambda: self.lambda, theta: 0.0, y },
            ),
            TailCut::Antipodal => {
                let length = self.grid.length();
                let center = y - 2.0 * self.lambda * self.t;
                ComplexField::from_fn(&self.grid, |x| {
                    let s = center + wrap_shift(x - center, length);
                    r_lambda_value(self.lambda, self.t, s - y)
                })
            }
        }
    }
}

/// `inf_{theta, y} ||u - e^{i theta} R_lambda(t, . - y)||` over both tail cuts.
pub fn fit_soliton_orbit(u: &ComplexField, lambda: f64, t: f64, seminorm: Seminorm) -> Result<ModulationFit> {
    let mut best: Option<ModulationFit> = None;
    for cut in [TailCut::BoxEdge, TailCut::Antipodal] {
        let template = SolitonTemplate::with_cut(u.grid(), lambda, t, cut)?;
        let fit = fit_phase_shift(u, &template, seminorm)?;
        if best.as_ref().is_none_or(|b| fit.distance < b.distance) {
            best = Some(fit);
        }
    }
    let mut fit = best.expect("two cuts evaluated");
    fit.lambda = Some(lambda);
    Ok(fit)
}

/// `W_c(. - y)`, re-evaluated analytically for every shift.
#[derive(Clone, Debug)]
pub struct GroundStateTemplate {
    grid: Grid,
    scale: f64,
    cut: TailCut,
}

impl GroundStateTemplate {
    pub fn new(grid: &Grid, scale: f64) -> Result<Self> {
        Self::with_cut(grid, scale, TailCut::BoxEdge)
    }

    pub fn with_cut(grid: &Grid, scale: f64, cut: TailCut) -> Result<Self> {
        ScalingParams::new(scale, 0.0, 0.0)?;
        Ok(Self { grid: grid.clone(), scale, cut })
    }
}

impl Template for GroundStateTemplate {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn at_shift(&self, y: f64) -> ComplexField {
        let length = self.grid.length();
        match self.cut {
            TailCut::BoxEdge => ComplexField::from_real_fn(&self.grid, |x| w_scaled(self.scale, x - y)),
            TailCut::Antipodal => {
                ComplexField::from_real_fn(&self.grid, |x| w_scaled(self.scale, wrap_shift(x - y, length)))
            }
        }
    }
}

/// `inf_{theta, y} ||g - e^{i theta} W_c(. - y)||` over both tail cuts.
pub fn fit_ground_state_orbit(g: &ComplexField, scale: f64, seminorm: Seminorm) -> Result<ModulationFit> {
    let mut best: Option<ModulationFit> = None;
    for cut in [TailCut::BoxEdge, TailCut::Antipodal] {
        let template = GroundStateTemplate::with_cut(g.grid(), scale, cut)?;
        let fit = fit_phase_shift(g, &template, seminorm)?;
        if best.as_ref().is_none_or(|b| fit.distance < b.distance) {
            best = Some(fit);
        }
    }
    Ok(best.expect("two cuts evaluated"))
}

/// Optimal orbit parameters and the residual distance they attain.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulationFit {
    pub theta: f64,
    pub y: f64,
    pub lambda: Option<f64>,
    pub distance: f64,
    pub seminorm: Seminorm,
    pub converged: bool,
    /// Set when the fitted field is zero and every `(theta, y)` is optimal.
    pub degenerate: bool,
}

pub const FIT_CSV_HEADER: &str = "t,theta,y,lambda,distance,seminorm,converged";

impl ModulationFit {
    pub fn csv_row(&self, t: f64) -> String {
        format!(
            "{t},{},{},{},{},{},{}",
            self.theta,
            self.y,
            self.lambda.map(|l| l.to_string()).unwrap_or_default(),
            self.distance,
            self.seminorm,
            self.converged
        )
    }
}

struct Evaluation {
    theta: f64,
    distance_sq: f64,
}

fn evaluate(g_spec: &[C64], t_spec: &[C64], grid: &Grid, weights: &[f64]) -> Evaluation {
    let c = spectral_inner(grid, g_spec, t_spec, weights);
    let theta = if c.norm() > 0.0 { c.arg() } else { 0.0 };
    let rot = C64::from_polar(1.0, theta);
    let n = grid.len() as f64;
    let distance_sq = g_spec
        .iter()
        .zip(t_spec)
        .zip(weights)
        .map(|((a, b), w)| w * (*a - rot * *b).norm_sqr())
        .sum::<f64>()
        * grid.length()
        / (n * n);
    Evaluation { theta, distance_sq }
}

fn wrap_shift(y: f64, length: f64) -> f64 {
    let r = (y + 0.5 * length).rem_euclid(length) - 0.5 * length;
    if r <= -0.5 * length {
        r + length
    } else {
        r
    }
}

/// `inf_{theta, y} ||g - e^{i theta} T(. - y)||` in the chosen seminorm.
pub fn fit_phase_shift<T: Template + ?Sized>(
    g: &ComplexField,
    template: &T,
    seminorm: Seminorm,
) -> Result<ModulationFit> {
    let grid = g.grid();
    if !grid.same_as(template.grid()) {
        return Err(Error::GridMismatch);
    }
    let base = template.at_shift(0.0);
    if base.is_zero() {
        return Err(Error::ZeroField("modulation template"));
    }
    let weights = seminorm.weights(grid);
    let base_spec = base.spectrum();
    if g.is_zero() {
        return Ok(ModulationFit {
            theta: 0.0,
            y: 0.0,
            lambda: None,
            distance: spectral_norm_sq(grid, &base_spec, &weights).sqrt(),
            seminorm,
            converged: true,
            degenerate: true,
        });
    }
    let g_spec = g.spectrum();
    let n = grid.len();
    let dx = grid.dx();
    let length = grid.length();

    let mut corr: Vec<C64> = g_spec
        .iter()
        .zip(&base_spec)
        .zip(&weights)
        .map(|((a, b), w)| *a * b.conj() * *w)
        .collect();
    grid.ifft(&mut corr);
    let peak = corr.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let shift_of = |m: usize| if m <= n / 2 { m as f64 * dx } else { (m as f64 - n as f64) * dx };
    let mut best: Option<(usize, f64, f64)> = None;
    for (m, c) in corr.iter().enumerate() {
        if c.norm() < peak * (1.0 - 1e-12) {
            continue;
        }
        let y = shift_of(m);
        let theta = c.arg().rem_euclid(2.0 * PI);
        let better = match best {
            None => true,
            Some((_, by, bt)) => (y.abs(), theta) < (by.abs(), bt),
        };
        if better {
            best = Some((m, y, theta));
        }
    }
    let (_, y0, _) = best.expect("correlation has at least one entry");

    let distance_sq_at = |y: f64| {
        let spec = template.at_shift(y).spectrum();
        evaluate(&g_spec, &spec, grid, &weights)
    };
    let coarse = distance_sq_at(y0);
    let refined = brent(|y| distance_sq_at(y).distance_sq, y0 - dx, y0 + dx, 1e-10, 200);
    let at_edge = (refined.x - (y0 - dx)).abs() < 1e-6 * dx || (refined.x - (y0 + dx)).abs() < 1e-6 * dx;

    let (y, eval, converged) = if refined.value <= coarse.distance_sq {
        let eval = distance_sq_at(refined.x);
        (refined.x, eval, refined.converged && !at_edge)
    } else {
        (y0, coarse, false)
    };
    Ok(ModulationFit {
        theta: eval.theta.rem_euclid(2.0 * PI),
        y: wrap_shift(y, length),
        lambda: None,
        distance: eval.distance_sq.max(0.0).sqrt(),
        seminorm,
        converged,
        degenerate: false,
    })
}

/// Scale `lambda` of the ground-state orbit member with the same `L^6` norm,
/// `(||v||_{L^6} / ||W||_{L^6})^3`; `||W_lambda||_6^6 = lambda^2 ||W||_6^6`.
pub fn scale_seed(v: &ComplexField) -> Result<f64> {
    let sextic = lp_power(v, 6);
    if sextic <= 0.0 {
        return Err(Error::ZeroField("scale seed"));
    }
    Ok((sextic / W_SEXTIC).sqrt())
}

/// Ground-state orbit fit after matching the `L^4` and `L^6` norms to `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedOrbitFit {
    pub amplitude: f64,
    pub scale: f64,
    /// `distance` is measured for the normalized field; `lambda` holds the
    /// template scale `1 / scale` and `y` is in the original coordinates.
    pub fit: ModulationFit,
}

/// `inf_{theta, y} ||h - e^{i theta} W(. - y)||_{Hdot1}` for
/// `h = a mu^{1/2} g(mu .)`, where `a` and `mu` give `h` the `L^4` and `L^6`
/// norms of `W`. The deficit is invariant under this normalization.
///
/// Evaluated without resampling as
/// `mu inf ||a g - e^{i theta} W_{1/mu}(. - y)||_{Hdot1}`.
pub fn normalized_orbit_fit(g: &ComplexField) -> Result<NormalizedOrbitFit> {
    let quartic = lp_power(g, 4);
    let sextic = lp_power(g, 6);
    if !(quartic > 0.0 && sextic > 0.0) {
        return Err(Error::ZeroField("normalized orbit fit"));
    }
    let amplitude = (8.0 * PI / 3.0 * sextic / (quartic * quartic)).sqrt();
    let scale = 16.0 * PI / (amplitude.powi(4) * quartic);
    let mut fit = fit_ground_state_orbit(&g.scale_real(amplitude), 1.0 / scale, Seminorm::HDot1)?;
    fit.distance *= scale;
    fit.lambda = Some(1.0 / scale);
    Ok(NormalizedOrbitFit { amplitude, scale, fit })
}

pub const DEFAULT_SCALE_BRACKET: (f64, f64) = (0.2, 5.0);

const SCALE_CANDIDATES: usize = 17;

/// `inf_{theta, y, lambda} ||u - e^{i theta} R_lambda(t, . - y)||_{H^1}` with
/// `lambda` restricted to `bracket`.
///
/// Each scale is fitted with both tail cuts. A geometric sweep of the
/// bracket (plus the scale seed when it lies inside) picks the basin;
/// golden-section search then refines `lambda`.
/// A minimum on the bracket boundary is reported with `converged = false`.
pub fn fit_full_orbit(u: &ComplexField, t: f64, bracket: (f64, f64)) -> Result<ModulationFit> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameters(format!(
            "scale bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if u.is_zero() {
        return Err(Error::ZeroField("full orbit fit"));
    }
    let fit_at = |lambda: f64| -> Result<ModulationFit> {
        fit_soliton_orbit(u, lambda, t, Seminorm::H1)
    };

    let ratio = (hi / lo).powf(1.0 / (SCALE_CANDIDATES - 1) as f64);
    let mut candidates: Vec<f64> = (0..SCALE_CANDIDATES).map(|i| lo * ratio.powi(i as i32)).collect();
    candidates[SCALE_CANDIDATES - 1] = hi;
    let seed = scale_seed(u)?;
    if seed > lo && seed < hi {
        candidates.push(seed);
    }
    candidates.sort_by(f64::total_cmp);

    let mut sweep = Vec::with_capacity(candidates.len());
    for &lambda in &candidates {
        sweep.push(fit_at(lambda)?.distance);
    }
    let best = sweep
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("nonempty sweep");
    let a = candidates[best.saturating_sub(1)];
    let b = candidates[(best + 1).min(candidates.len() - 1)];

    let mut failure = None;
    let search = golden_section(
        |lambda| match fit_at(lambda) {
            Ok(fit) => fit.distance * fit.distance,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        1e-9,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut fit = fit_at(search.x)?;
    let best_sweep = fit_at(candidates[best])?;
    if best_sweep.distance < fit.distance {
        fit = best_sweep;
    }
    let lambda = fit.lambda.expect("scale set by fit_at");
    let on_boundary = (lambda - lo).abs() <= 1e-6 * (hi - lo) || (hi - lambda).abs() <= 1e-6 * (hi - lo);
    fit.converged = fit.converged && search.converged && !on_boundary;
    Ok(fit)
}
