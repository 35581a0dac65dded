//! Integrating-factor RK4 time stepping in wavenumber space.
//!
//! The linear part `i u_xx` is integrated exactly by `e^{-i k^2 tau}`; the
//! nonlinear terms are advanced by classical RK4 with every product
//! dealiased by the 2/3 rule.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::functionals::{functionals, FunctionalReport, Gauge};
use crate::gauge::gauge_u_to_v;
use crate::grid::{dirichlet_energy, lp_power, momentum_density_integral, ComplexField, Grid, C64};

/// Nonlinear part of `u_t = i u_xx + (|u|^2 u)_x`, as a spectrum.
fn nonlinear_u(grid: &Grid, spec: &[C64], dealias: bool) -> Vec<C64> {
    let mut u = spec.to_vec();
    if dealias {
        grid.apply_dealias(&mut u);
    }
    grid.ifft(&mut u);
    let mut cubic: Vec<C64> = u.iter().map(|&z| z.norm_sqr() * z).collect();
    grid.fft(&mut cubic);
    if dealias {
        grid.apply_dealias(&mut cubic);
    }
    for (j, z) in cubic.iter_mut().enumerate() {
        *z *= grid.first_derivative_symbol(j);
    }
    cubic
}

fn maybe_filter(grid: &Grid, values: &mut [C64], dealias: bool) {
    if dealias {
        crate::grid::filter_in_place(grid, values);
    }
}

/// Nonlinear part of `v_t = i v_xx + (1/2)|v|^2 v_x - (1/2) v^2 conj(v_x) + (3i/16)|v|^4 v`.
fn nonlinear_v(grid: &Grid, spec: &[C64], dealias: bool) -> Vec<C64> {
    let mut base = spec.to_vec();
    if dealias {
        grid.apply_dealias(&mut base);
    }
    let mut vx: Vec<C64> = base
        .iter()
        .enumerate()
        .map(|(j, &z)| z * grid.first_derivative_symbol(j))
        .collect();
    let mut v = base;
    grid.ifft(&mut v);
    grid.ifft(&mut vx);

    let mut modsq: Vec<C64> = v.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect();
    maybe_filter(grid, &mut modsq, dealias);
    let mut square: Vec<C64> = v.iter().map(|&z| z * z).collect();
    maybe_filter(grid, &mut square, dealias);
    let mut cubic: Vec<C64> = modsq.iter().zip(&v).map(|(&m, &z)| m * z).collect();
    maybe_filter(grid, &mut cubic, dealias);

    let quintic_coeff = C64::new(0.0, 3.0 / 16.0);
    let mut out: Vec<C64> = (0..v.len())
        .map(|i| {
            0.5 * modsq[i] * vx[i] - 0.5 * square[i] * vx[i].conj() + quintic_coeff * modsq[i] * cubic[i]
        })
        .collect();
    grid.fft(&mut out);
    if dealias {
        grid.apply_dealias(&mut out);
    }
    out
}

fn nonlinear(gauge: Gauge, grid: &Grid, spec: &[C64], dealias: bool) -> Vec<C64> {
    match gauge {
        Gauge::V => nonlinear_v(grid, spec, dealias),
        _ => nonlinear_u(grid, spec, dealias),
    }
}

fn full_rhs(gauge: Gauge, u: &ComplexField, dealias: bool) -> ComplexField {
    let grid = u.grid();
    let spec = u.spectrum();
    let mut out = nonlinear(gauge, grid, &spec, dealias);
    for ((z, s), &k) in out.iter_mut().zip(&spec).zip(grid.wavenumbers()) {
        *z += C64::new(0.0, -k * k) * s;
    }
    ComplexField::from_spectrum(grid, out)
}

/// `u_t` for the original equation, dealiased.
pub fn rhs_u(u: &ComplexField) -> ComplexField {
    full_rhs(Gauge::U, u, true)
}

/// `v_t` for the gauged equation, dealiased.
pub fn rhs_v(v: &ComplexField) -> ComplexField {
    full_rhs(Gauge::V, v, true)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// `0.2 dx / (1 + max |u|^2)`, re-evaluated every 50 steps.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionOptions {
    pub dt: TimeStep,
    /// Final time; negative values integrate backwards.
    pub t_final: f64,
    pub dealias: bool,
    /// Relative mass drift that aborts the run.
    pub conserve_abort_tol: f64,
    /// Steps between stored samples; the initial and final states are always stored.
    pub sample_every: usize,
    /// Growth of `||v_x||` over its initial value that flags suspected blow-up.
    pub blowup_factor: f64,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            dt: TimeStep::Auto,
            t_final: 1.0,
            dealias: true,
            conserve_abort_tol: 1e-4,
            sample_every: 100,
            blowup_factor: 1e3,
        }
    }
}

impl EvolutionOptions {
    fn validate(&self) -> Result<()> {
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidParameters(format!("time step must be positive, got {dt}")));
            }
        }
        if !self.t_final.is_finite() {
            return Err(Error::InvalidParameters("final time must be finite".into()));
        }
        if !(self.conserve_abort_tol > 0.0) {
            return Err(Error::InvalidParameters("conservation tolerance must be positive".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameters("sample_every must be at least 1".into()));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::InvalidParameters("blow-up factor must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Completed,
    BlowupSuspected,
    ConservationAbort,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Completed => "completed",
            Termination::BlowupSuspected => "blowup_suspected",
            Termination::ConservationAbort => "conservation_abort",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub gauge: Gauge,
    pub times: Vec<f64>,
    pub states: Vec<ComplexField>,
    pub reports: Vec<FunctionalReport>,
    pub terminated: Termination,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &ComplexField {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    /// `max_t |M(t) - M(0)| / M(0)` over the stored samples (0 for zero mass).
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.reports[0].mass;
        if m0 == 0.0 {
            return 0.0;
        }
        self.reports.iter().map(|r| ((r.mass - m0) / m0).abs()).fold(0.0, f64::max)
    }
}

fn gradient_norm(state: &ComplexField, gauge: Gauge) -> f64 {
    match gauge {
        Gauge::U => dirichlet_energy(&gauge_u_to_v(state)).sqrt(),
        _ => dirichlet_energy(state).sqrt(),
    }
}

fn auto_dt(grid: &Grid, values: &[C64]) -> f64 {
    let peak = values.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    0.2 * grid.dx() / (1.0 + peak)
}

struct Stepper {
    gauge: Gauge,
    grid: Grid,
    dealias: bool,
    h: f64,
    half: Vec<C64>,
    full: Vec<C64>,
}

impl Stepper {
    fn new(gauge: Gauge, grid: &Grid, dealias: bool) -> Self {
        Self {
            gauge,
            grid: grid.clone(),
            dealias,
            h: f64::NAN,
            half: Vec::new(),
            full: Vec::new(),
        }
    }

    fn set_step(&mut self, h: f64) {
        if h == self.h {
            return;
        }
        self.h = h;
        self.half = self.grid.wavenumbers().iter().map(|&k| C64::from_polar(1.0, -k * k * 0.5 * h)).collect();
        self.full = self.half.iter().map(|&e| e * e).collect();
    }

    fn nl(&self, spec: &[C64]) -> Vec<C64> {
        nonlinear(self.gauge, &self.grid, spec, self.dealias)
    }

    fn step(&self, s: &[C64]) -> Vec<C64> {
        let h = self.h;
        let (e, e2) = (&self.half, &self.full);
        let k1 = self.nl(s);
        let a: Vec<C64> = (0..s.len()).map(|j| e[j] * (s[j] + 0.5 * h * k1[j])).collect();
        let k2 = self.nl(&a);
        let b: Vec<C64> = (0..s.len()).map(|j| e[j] * s[j] + 0.5 * h * k2[j]).collect();
        let k3 = self.nl(&b);
        let c: Vec<C64> = (0..s.len()).map(|j| e2[j] * s[j] + h * e[j] * k3[j]).collect();
        let k4 = self.nl(&c);
        (0..s.len())
            .map(|j| e2[j] * s[j] + h / 6.0 * (e2[j] * k1[j] + 2.0 * e[j] * (k2[j] + k3[j]) + k4[j]))
            .collect()
    }
}

const AUTO_REFRESH: usize = 50;

/// Advances `state0` in the `u` or `v` gauge up to `opts.t_final`.
pub fn evolve(state0: &ComplexField, gauge: Gauge, opts: &EvolutionOptions) -> Result<Trajectory> {
    opts.validate()?;
    if gauge == Gauge::W {
        return Err(Error::Precondition("evolution is defined in the u and v gauges only".into()));
    }
    if let Some(i) = state0.values().iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite(i));
    }
    let grid = state0.grid().clone();
    let direction = if opts.t_final < 0.0 { -1.0 } else { 1.0 };
    let horizon = opts.t_final.abs();
    let mass0 = lp_power(state0, 2);
    let grad0 = gradient_norm(state0, gauge);

    let mut traj = Trajectory {
        gauge,
        times: vec![0.0],
        states: vec![state0.clone()],
        reports: vec![functionals(state0, gauge)],
        terminated: Termination::Completed,
        steps: 0,
    };
    let mut stepper = Stepper::new(gauge, &grid, opts.dealias);
    let mut spec = state0.spectrum();
    let mut current = state0.clone();
    let mut elapsed = 0.0;
    let mut base_dt = match opts.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => auto_dt(&grid, state0.values()),
    };
    let mut step = 0usize;

    while horizon - elapsed > 1e-12 * horizon.max(1.0) {
        if opts.dt == TimeStep::Auto && step > 0 && step % AUTO_REFRESH == 0 {
            base_dt = auto_dt(&grid, current.values());
        }
        let remaining = horizon - elapsed;
        let h = if remaining < base_dt * (1.0 + 1e-9) { remaining } else { base_dt };
        stepper.set_step(direction * h);
        let next = stepper.step(&spec);
        let state = ComplexField::from_spectrum(&grid, next.clone());
        step += 1;
        if !state.is_finite() {
            traj.terminated = Termination::BlowupSuspected;
            break;
        }
        elapsed = if h == remaining { horizon } else { elapsed + h };
        spec = next;
        current = state;

        let last = horizon - elapsed <= 1e-12 * horizon.max(1.0);
        let mut stop = None;
        if mass0 > 0.0 && ((lp_power(&current, 2) - mass0) / mass0).abs() > opts.conserve_abort_tol {
            stop = Some(Termination::ConservationAbort);
        } else if grad0 > 0.0
            && (step % AUTO_REFRESH == 0 || step % opts.sample_every == 0 || last)
            && gradient_norm(&current, gauge) > opts.blowup_factor * grad0
        {
            stop = Some(Termination::BlowupSuspected);
        }
        if stop.is_some() || step % opts.sample_every == 0 || last {
            traj.times.push(direction * elapsed);
            traj.reports.push(functionals(&current, gauge));
            traj.states.push(current.clone());
        }
        if let Some(reason) = stop {
            traj.terminated = reason;
            break;
        }
    }
    traj.steps = step;
    Ok(traj)
}

/// `||W_x||_{L^2} / ||v_x||_{L^2}` with `||W_x||_{L^2} = sqrt(2 pi)`.
pub fn blowup_scale(v: &ComplexField) -> Result<f64> {
    let d = dirichlet_energy(v);
    if !(d > 0.0) {
        return Err(Error::ZeroField("blow-up scale of a constant field"));
    }
    Ok((2.0 * PI / d).sqrt())
}

/// Blow-up scale with the mean carrier removed from the gradient:
/// `sqrt(2 pi) / (||v_x||^2 - (Im int conj(v) v_x)^2 / M)^{1/2}`.
///
/// Along the orbit `e^{i theta} R_mu(t, . - y)` (in the `v` gauge) this is
/// exactly `1 / mu`; the plain ratio picks up the carrier `e^{-i mu x}` and
/// returns `1 / (sqrt(3) mu)`.
pub fn carrier_reduced_blowup_scale(v: &ComplexField) -> Result<f64> {
    let mass = lp_power(v, 2);
    if !(mass > 0.0) {
        return Err(Error::ZeroField("blow-up scale"));
    }
    let twist = momentum_density_integral(v);
    let reduced = dirichlet_energy(v) - twist * twist / mass;
    if !(reduced > 0.0) {
        return Err(Error::ZeroField("blow-up scale of a plane wave"));
    }
    Ok((2.0 * PI / reduced).sqrt())
}

const BAND_TOLERANCE: f64 = 1e-12;

/// How `rescale_profile` treats arguments `lambda x` outside the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// Zero outside the box; right for localized fields.
    Zero,
    /// The periodic continuation; right for fields whose tails reach the edge.
    Periodic,
}

/// Spatial rescale `lambda^{1/2} v(lambda x)` by trigonometric interpolation.
///
/// Rejected when more than a `1e-12` fraction of the spectral energy sits
/// above `k_max / lambda`. Samples whose argument `lambda x` falls outside the box are set to zero.
pub fn rescale_profile(v: &ComplexField, lambda: f64) -> Result<ComplexField> {
    rescale_profile_within(v, lambda, BAND_TOLERANCE, Extension::Zero)
}

/// `rescale_profile` with an explicit bound on the spectral energy fraction
/// allowed above the rescaled cutoff and a choice of extension.
pub fn rescale_profile_within(
    v: &ComplexField,
    lambda: f64,
    band_tolerance: f64,
    extension: Extension,
) -> Result<ComplexField> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameters(format!("scale must be positive, got {lambda}")));
    }
    let grid = v.grid();
    if lambda == 1.0 {
        return Ok(v.clone());
    }
    let spec = v.spectrum();
    let cutoff = grid.k_max() / lambda;
    let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
    let lost: f64 = spec
        .iter()
        .zip(grid.wavenumbers())
        .filter(|(_, k)| k.abs() > cutoff)
        .map(|(z, _)| z.norm_sqr())
        .sum();
    if lost > band_tolerance * total {
        return Err(Error::Precondition(format!(
            "rescaling by {lambda} pushes a fraction {:.2e} of the spectrum past the grid cutoff",
            lost / total
        )));
    }
    let half = 0.5 * grid.length();
    let inside: Vec<(usize, f64)> = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| (i, lambda * x))
        .filter(|&(_, s)| extension == Extension::Periodic || (s >= -half && s < half))
        .collect();
    let points: Vec<f64> = inside.iter().map(|&(_, s)| s).collect();
    let sampled = v.interpolate(&points);
    let amp = lambda.sqrt();
    let mut values = vec![C64::new(0.0, 0.0); grid.len()];
    for (&(i, _), z) in inside.iter().zip(sampled) {
        values[i] = amp * z;
    }
    ComplexField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::gauge_v_to_u;
    use crate::grid::{lp_norm, make_grid, Norm};
    use crate::solitons::{ground_state_w, solitary_wave_u, w_value, SolitonParams};

    fn l2_distance(a: &ComplexField, b: &ComplexField) -> f64 {
        lp_norm(&a.sub(b).unwrap(), Norm::L2)
    }

    #[test]
    fn rhs_of_zero_is_zero() {
        let g = make_grid(20.0, 64).unwrap();
        let z = ComplexField::zeros(&g);
        assert!(rhs_u(&z).is_zero());
        assert!(rhs_v(&z).is_zero());
    }

    #[test]
    fn rhs_of_plane_wave() {
        let g = make_grid(2.0 * PI, 64).unwrap();
        let (amp, k) = (C64::new(0.6, 0.3), 3.0);
        let u = ComplexField::from_fn(&g, |x| amp * C64::from_polar(1.0, k * x));
        let r = rhs_u(&u);
        let factor = C64::new(0.0, -k * k) + C64::new(0.0, k * amp.norm_sqr());
        for (a, b) in r.values().iter().zip(u.values()) {
            assert!((a - factor * b).norm() < 1e-12);
        }
    }

    #[test]
    fn rhs_v_for_real_even_field() {
        let g = make_grid(30.0, 512).unwrap();
        let v = ComplexField::from_real_fn(&g, |x| 0.7 * (-(x * x) / 2.0).exp());
        let full = full_rhs(Gauge::V, &v, false);
        let vxx = v.second_derivative();
        for ((r, lap), z) in full.values().iter().zip(vxx.values()).zip(v.values()) {
            let m = z.norm_sqr();
            let expected = C64::new(0.0, 1.0) * lap + C64::new(0.0, 3.0 / 16.0) * m * m * z;
            assert!((r - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn single_small_step_matches_exact_soliton() {
        let g = make_grid(60.0, 2048).unwrap();
        let p = SolitonParams::new(1.0, 0.0);
        let u0 = solitary_wave_u(&p, 0.0, &g).unwrap();
        let opts = EvolutionOptions { dt: TimeStep::Fixed(1e-4), t_final: 1e-4, ..Default::default() };
        let traj = evolve(&u0, Gauge::U, &opts).unwrap();
        let exact = solitary_wave_u(&p, 1e-4, &g).unwrap();
        assert!(l2_distance(traj.final_state(), &exact) < 1e-9);
    }

    #[test]
    fn v_step_matches_gauged_u_step() {
        let g = make_grid(60.0, 2048).unwrap();
        let p = SolitonParams::new(1.0, 0.5);
        let u0 = solitary_wave_u(&p, 0.0, &g).unwrap();
        let opts = EvolutionOptions { dt: TimeStep::Fixed(1e-4), t_final: 1e-4, ..Default::default() };
        let tu = evolve(&u0, Gauge::U, &opts).unwrap();
        let tv = evolve(&gauge_u_to_v(&u0), Gauge::V, &opts).unwrap();
        let d = l2_distance(&gauge_u_to_v(tu.final_state()), tv.final_state());
        assert!(d < 1e-8, "{d:e}");
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = make_grid(20.0, 64).unwrap();
        let traj = evolve(&ComplexField::zeros(&g), Gauge::U, &EvolutionOptions::default()).unwrap();
        assert_eq!(traj.terminated, Termination::Completed);
        assert!(traj.states.iter().all(|s| s.is_zero()));
        assert!((traj.final_time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn final_time_is_hit_exactly() {
        let g = make_grid(60.0, 512).unwrap();
        let p = SolitonParams::new(1.0, 0.0);
        let u0 = solitary_wave_u(&p, 0.0, &g).unwrap();
        let opts = EvolutionOptions { dt: TimeStep::Fixed(0.003), t_final: 0.01, sample_every: 1, ..Default::default() };
        let traj = evolve(&u0, Gauge::U, &opts).unwrap();
        assert_eq!(traj.steps, 4);
        assert_eq!(traj.final_time(), 0.01);
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.times.len(), traj.reports.len());
        let back = evolve(&u0, Gauge::U, &EvolutionOptions { t_final: -0.01, ..opts }).unwrap();
        assert_eq!(back.final_time(), -0.01);
    }

    #[test]
    fn travelling_soliton_moves_left() {
        let g = make_grid(60.0, 2048).unwrap();
        let p = SolitonParams::new(1.0, 1.0);
        let u0 = solitary_wave_u(&p, 0.0, &g).unwrap();
        let opts = EvolutionOptions { dt: TimeStep::Fixed(1e-3), ..Default::default() };
        let traj = evolve(&u0, Gauge::U, &opts).unwrap();
        let (imax, _) = traj
            .final_state()
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((g.nodes()[imax] + 1.0).abs() <= g.dx());
    }

    #[test]
    fn options_are_validated() {
        let g = make_grid(20.0, 64).unwrap();
        let z = ComplexField::zeros(&g);
        for bad in [
            EvolutionOptions { dt: TimeStep::Fixed(0.0), ..Default::default() },
            EvolutionOptions { conserve_abort_tol: 0.0, ..Default::default() },
            EvolutionOptions { sample_every: 0, ..Default::default() },
            EvolutionOptions { t_final: f64::NAN, ..Default::default() },
        ] {
            assert!(evolve(&z, Gauge::U, &bad).is_err());
        }
        assert!(evolve(&z, Gauge::W, &EvolutionOptions::default()).is_err());
    }

    #[test]
    fn mass_abort_triggers() {
        let g = make_grid(60.0, 256).unwrap();
        let p = SolitonParams::new(1.0, 0.0);
        let u0 = solitary_wave_u(&p, 0.0, &g).unwrap();
        let opts = EvolutionOptions {
            dt: TimeStep::Fixed(0.05),
            conserve_abort_tol: 1e-15,
            ..Default::default()
        };
        let traj = evolve(&u0, Gauge::U, &opts).unwrap();
        assert_eq!(traj.terminated, Termination::ConservationAbort);
        assert!(traj.final_time() < 1.0);
    }

    #[test]
    fn blowup_scale_values() {
        let g = make_grid(400.0, 16384).unwrap();
        let w = ground_state_w(&g, 1.0).unwrap();
        let d = dirichlet_energy(&w);
        let v = w.scale_real((2.0 * PI / d).sqrt());
        assert!((blowup_scale(&v).unwrap() - 1.0).abs() < 1e-12);
        let w2 = ground_state_w(&g, 2.0).unwrap();
        let ratio = blowup_scale(&w).unwrap() / blowup_scale(&w2).unwrap();
        assert!((ratio - 2.0).abs() < 1e-6);
        let c = ComplexField::from_fn(&g, |_| C64::new(1.0, 0.5));
        assert!(blowup_scale(&c).is_err());
    }

    #[test]
    fn reduced_scale_on_carrier_orbit() {
        let g = make_grid(2.0 * PI * 64.0, 16384).unwrap();
        for mu in [1.0, 2.0] {
            let v = ground_state_w(&g, mu).unwrap().map_with_x(|x, z| z * C64::from_polar(1.0, -mu * x));
            let s = carrier_reduced_blowup_scale(&v).unwrap();
            assert!((s * mu - 1.0).abs() < 1e-3, "mu {mu}: {s}");
        }
    }

    #[test]
    fn rescale_identity_and_w_scaling() {
        let g = make_grid(400.0, 16384).unwrap();
        let w = ground_state_w(&g, 1.0).unwrap();
        assert_eq!(rescale_profile(&w, 1.0).unwrap().values(), w.values());
        let w2 = rescale_profile(&w, 2.0).unwrap();
        let exact = ground_state_w(&g, 2.0).unwrap();
        let err = w2
            .values()
            .iter()
            .zip(exact.values())
            .zip(g.nodes())
            .filter(|(_, &x)| x.abs() < 0.2 * g.length())
            .map(|((a, b), _)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err:e}");
        assert!(rescale_profile(&w, 0.0).is_err());
    }

    #[test]
    fn rescale_band_limit() {
        let g = make_grid(20.0, 64).unwrap();
        let k = 12.0 * 2.0 * PI / 20.0;
        let v = ComplexField::from_fn(&g, |x| C64::from_polar((-(x * x) / 8.0).exp(), k * x));
        assert!(rescale_profile(&v, 4.0).is_err());
    }

    #[test]
    fn rescale_preserves_mass_of_localized_field() {
        let g = make_grid(60.0, 2048).unwrap();
        let v = ComplexField::from_fn(&g, |x| C64::new((-(x - 0.5).powi(2)).exp(), 0.4 * (-(x + 1.0).powi(2)).exp()));
        let m = lp_power(&v, 2);
        for lambda in [0.5, 0.8, 1.7, 3.0] {
            let r = rescale_profile(&v, lambda).unwrap();
            assert!((lp_power(&r, 2) / m - 1.0).abs() < 1e-8, "lambda {lambda}");
        }
        let u = gauge_v_to_u(&v);
        assert!(u.is_finite());
    }

    #[test]
    fn periodic_extension_keeps_tails_continuous() {
        let g = make_grid(200.0, 4096).unwrap();
        let w = ground_state_w(&g, 1.0).unwrap();
        let lambda = 1.01;
        let zero = rescale_profile(&w, lambda).unwrap();
        let wrapped = rescale_profile_within(&w, lambda, 1e-12, Extension::Periodic).unwrap();
        let edge = g.len() - 1;
        assert_eq!(zero.values()[edge], C64::new(0.0, 0.0));
        let expected = lambda.sqrt() * w_value(lambda * g.nodes()[edge] - g.length());
        assert!((wrapped.values()[edge].re - expected).abs() < 1e-6);
        assert_eq!(zero.values()[g.len() / 2], wrapped.values()[g.len() / 2]);
    }
}
