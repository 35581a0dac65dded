//! Numerical recovery of the ground state: ODE shooting for the profile
//! equation and constrained minimization of the action on `{K = 0}`.

use crate::error::{Error, Result};
use crate::functionals::{action_s, constraint_k, project_to_constraint, Functional};
use crate::grid::{lp_power, ComplexField, Grid, C64};
use crate::modulation::{fit_phase_shift, GroundStateTemplate, Seminorm};

/// `-phi'' + alpha phi + (c/2) phi^3 - (3/16) phi^5` with `alpha = omega - c^2/4`.
#[derive(Clone, Copy, Debug)]
struct ProfileEquation {
    alpha: f64,
    cubic: f64,
}

impl ProfileEquation {
    fn new(omega: f64, speed: f64) -> Result<Self> {
        let alpha = omega - 0.25 * speed * speed;
        if !(omega > 0.0 && speed.is_finite() && alpha >= -1e-14 * omega) {
            return Err(Error::InvalidParameters(format!(
                "profile equation needs omega > 0 and c^2 <= 4 omega, got ({omega}, {speed})"
            )));
        }
        if alpha.abs() <= 1e-14 * omega && speed <= 0.0 {
            return Err(Error::InvalidParameters("the zero-mass case requires c > 0".into()));
        }
        Ok(Self { alpha: alpha.max(0.0), cubic: 0.5 * speed })
    }

    fn accel(&self, p: f64) -> f64 {
        let p2 = p * p;
        p * (self.alpha + self.cubic * p2 - 0.1875 * p2 * p2)
    }

    fn residual(&self, phi: &ComplexField) -> ComplexField {
        let lap = phi.second_derivative();
        let values = phi
            .values()
            .iter()
            .zip(lap.values())
            .map(|(&z, &zxx)| C64::new(self.accel(z.re) - zxx.re, 0.0))
            .collect();
        ComplexField::from_vec_unchecked(phi.grid(), values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    /// `phi` crossed zero: the initial value was too large.
    Overshoot,
    /// `phi'` turned positive before decaying: the initial value was too small.
    Undershoot,
}

struct Shot {
    outcome: Outcome,
    /// Samples at the nodes `x = 0, dx, 2 dx, ...` up to `L/2`.
    values: Vec<f64>,
    /// Index of the first node at or past the classifying event.
    event: Option<usize>,
}

const SUBSTEPS: usize = 10;
/// Classification continues past the box edge up to this abscissa.
const CLASSIFY_HORIZON: f64 = 1e7;

fn rk4(eq: &ProfileEquation, p: &mut f64, q: &mut f64, h: f64) {
    let f = |p: f64, q: f64| (q, eq.accel(p));
    let (k1p, k1q) = f(*p, *q);
    let (k2p, k2q) = f(*p + 0.5 * h * k1p, *q + 0.5 * h * k1q);
    let (k3p, k3q) = f(*p + 0.5 * h * k2p, *q + 0.5 * h * k2q);
    let (k4p, k4q) = f(*p + h * k3p, *q + h * k3q);
    *p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    *q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
}

fn classify(p: f64, q: f64) -> Option<Outcome> {
    if p < 0.0 {
        Some(Outcome::Overshoot)
    } else if q > 0.0 {
        Some(Outcome::Undershoot)
    } else {
        None
    }
}

fn shoot(eq: &ProfileEquation, amplitude: f64, dx: f64, nodes: usize) -> Shot {
    let h = dx / SUBSTEPS as f64;
    let (mut p, mut q) = (amplitude, 0.0);
    let mut values = Vec::with_capacity(nodes);
    values.push(p);
    let mut outcome = None;
    let mut event = None;
    for i in 1..nodes {
        for _ in 0..SUBSTEPS {
            rk4(eq, &mut p, &mut q, h);
            outcome = outcome.or_else(|| classify(p, q));
        }
        values.push(p);
        if outcome.is_some() {
            event = Some(i);
            break;
        }
    }
    // Slowly decaying (zero-mass) tails separate from the separatrix far
    // outside the box; keep integrating with a step proportional to x.
    let mut x = (nodes - 1) as f64 * dx;
    while outcome.is_none() && x < CLASSIFY_HORIZON {
        let step = h.max(1e-3 * x);
        rk4(eq, &mut p, &mut q, step);
        x += step;
        outcome = classify(p, q);
    }
    let outcome = outcome.unwrap_or(if p < 0.0 { Outcome::Overshoot } else { Outcome::Undershoot });
    Shot { outcome, values, event }
}

/// Shooting solution of the even profile equation and its quality measures.
#[derive(Clone, Debug)]
pub struct ShootingResult {
    pub profile: ComplexField,
    /// Converged `phi(0)`.
    pub peak: f64,
    /// `L^2` norm of the spectral equation residual on `|x| <= L/4`.
    pub residual: f64,
    pub bisections: usize,
}

/// Solves `-phi'' + (omega - c^2/4) phi + (c/2) phi^3 - (3/16) phi^5 = 0` with
/// `phi'(0) = 0` by bisection on `phi(0)` inside `bracket`.
///
/// Past the point where the two bracketing trajectories separate, the
/// profile continues with its linearized tail (`e^{-sqrt(alpha) x}`, or
/// `1/x` in the zero-mass case) and is mirrored to negative `x`.
pub fn shoot_elliptic(grid: &Grid, omega: f64, speed: f64, bracket: (f64, f64)) -> Result<ShootingResult> {
    let eq = ProfileEquation::new(omega, speed)?;
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(Error::InvalidParameters(format!("bad amplitude bracket [{lo}, {hi}]")));
    }
    let n = grid.len();
    let center = n / 2;
    let half_nodes = n - center;
    let dx = grid.dx();
    let run = |a: f64| shoot(&eq, a, dx, half_nodes + 1);
    if run(lo).outcome != Outcome::Undershoot || run(hi).outcome != Outcome::Overshoot {
        return Err(Error::NoSignChange { lo: bracket.0, hi: bracket.1 });
    }
    let mut bisections = 0;
    while bisections < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match run(mid).outcome {
            Outcome::Undershoot => lo = mid,
            Outcome::Overshoot => hi = mid,
        }
        bisections += 1;
    }
    let below = run(lo);
    let above = run(hi);
    let limit = half_nodes + 1;
    let mut half = vec![0.0; limit];
    let mut cut = limit;
    for i in 0..limit {
        let (a, b) = match (below.values.get(i), above.values.get(i)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => {
                cut = i;
                break;
            }
        };
        let in_event = below.event.is_some_and(|e| i >= e) || above.event.is_some_and(|e| i >= e);
        if in_event || (a - b).abs() > 1e-6 * a.abs().max(1e-300) {
            cut = i;
            break;
        }
        half[i] = 0.5 * (a + b);
    }
    if cut < limit {
        let anchor = cut.saturating_sub(1).max(1);
        let x0 = anchor as f64 * dx;
        let p0 = half[anchor];
        for (i, slot) in half.iter_mut().enumerate().skip(anchor + 1) {
            let x = i as f64 * dx;
            *slot = if eq.alpha > 0.0 {
                p0 * (-(eq.alpha.sqrt()) * (x - x0)).exp()
            } else {
                p0 * x0 / x
            };
        }
    }
    let values: Vec<C64> = (0..n)
        .map(|m| {
            let offset = (m as isize - center as isize).unsigned_abs();
            C64::new(half[offset], 0.0)
        })
        .collect();
    let profile = ComplexField::new(grid, values)?;
    let residual = window_l2(&eq.residual(&profile), 0.25 * grid.length());
    Ok(ShootingResult { profile, peak: 0.5 * (lo + hi), residual, bisections })
}

fn window_l2(f: &ComplexField, half_width: f64) -> f64 {
    let grid = f.grid();
    let s: f64 = grid
        .nodes()
        .iter()
        .zip(f.values())
        .filter(|(x, _)| x.abs() <= half_width)
        .map(|(_, z)| z.norm_sqr())
        .sum();
    (s * grid.dx()).sqrt()
}

/// `L^2` norm on `|x| <= L/4` of `-phi_xx + phi^3 - (3/16) phi^5`.
pub fn ground_state_residual(phi: &ComplexField) -> f64 {
    let eq = ProfileEquation { alpha: 0.0, cubic: 1.0 };
    window_l2(&eq.residual(phi), 0.25 * phi.grid().length())
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop once the `L^2` norm of the reduced gradient drops below this.
    pub grad_tol: f64,
    /// Shift `mu` of the `(mu - d_xx)^{-1}` preconditioner.
    pub preconditioner_shift: f64,
    pub initial_step: f64,
    /// Consecutive non-decreasing steps tolerated before declaring divergence.
    pub stall_limit: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            grad_tol: 5e-6,
            preconditioner_shift: 0.05,
            initial_step: 1e-2,
            stall_limit: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizerResult {
    pub profile: ComplexField,
    pub action: f64,
    pub constraint: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `H^1`-seminorm distance to the orbit `e^{i theta} W(. - y)`.
    pub distance_to_w_orbit: f64,
    pub gradient_norm: f64,
    /// Action after every accepted step, starting with the projected start.
    pub history: Vec<f64>,
}

/// `S'(phi) + sigma (2 phi^3 / b - 3 phi^5 / c)` with `sigma = <S'(phi), phi>`,
/// the gradient of `phi -> S(P(phi))` at a point already on `{K = 0}`.
fn reduced_gradient(phi: &ComplexField) -> Vec<f64> {
    let grad = Functional::Action.gradient(phi);
    let b = lp_power(phi, 4);
    let c = lp_power(phi, 6);
    let sigma = grad.inner(phi).expect("same grid").re;
    grad.values()
        .iter()
        .zip(phi.values())
        .map(|(g, z)| {
            let p = z.re;
            let p3 = p * p * p;
            g.re + sigma * (2.0 * p3 / b - 3.0 * p3 * p * p / c)
        })
        .collect()
}

fn precondition(grid: &Grid, g: &[f64], mu: f64) -> Vec<f64> {
    let mut spec: Vec<C64> = g.iter().map(|&x| C64::new(x, 0.0)).collect();
    grid.fft(&mut spec);
    for (z, &k) in spec.iter_mut().zip(grid.wavenumbers()) {
        *z /= mu + k * k;
    }
    grid.ifft(&mut spec);
    spec.iter().map(|z| z.re).collect()
}

fn recenter(phi: &ComplexField) -> ComplexField {
    let n = phi.len();
    let imax = phi
        .values()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
        .map(|(i, _)| i)
        .unwrap_or(n / 2);
    phi.rotated(n as isize / 2 - imax as isize)
}

fn norm_l2(grid: &Grid, g: &[f64]) -> f64 {
    (g.iter().map(|x| x * x).sum::<f64>() * grid.dx()).sqrt()
}

/// Relative increase of the action still accepted as a descent step; this is
/// the rounding floor of the action evaluation near a minimizer.
const ACTION_SLACK: f64 = 1e-13;

/// Preconditioned gradient flow for `S` restricted to `{K = 0}`.
///
/// Iterates are real, projected back onto the constraint by amplitude
/// rescaling after every step, and recentered so their maximum sits at
/// `x = 0`. The step grows by 1.5 after an accepted step and halves on an
/// increase of the action.
pub fn minimize_action(start: &ComplexField, opts: &MinimizeOptions) -> Result<MinimizerResult> {
    if start.is_zero() {
        return Err(Error::ZeroField("action minimization start"));
    }
    let grid = start.grid().clone();
    let real = start.map(|z| C64::new(z.norm(), 0.0));
    let (_, projected) = project_to_constraint(&real)?;
    let mut phi = recenter(&projected);
    let mut action = action_s(&phi);
    let mut history = vec![action];
    let mut step = opts.initial_step;
    let mut stalls = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;

    while iterations < opts.max_iter {
        let g = reduced_gradient(&phi);
        gradient_norm = norm_l2(&grid, &g);
        if gradient_norm < opts.grad_tol {
            converged = true;
            break;
        }
        let d = precondition(&grid, &g, opts.preconditioner_shift);
        iterations += 1;
        let mut accepted = None;
        while step > 1e-14 {
            let values: Vec<C64> = phi
                .values()
                .iter()
                .zip(&d)
                .map(|(z, &di)| C64::new(z.re - step * di, 0.0))
                .collect();
            let trial = ComplexField::from_vec_unchecked(&grid, values);
            if !trial.is_finite() {
                return Err(Error::Divergence(format!("non-finite iterate at step {iterations}")));
            }
            if lp_power(&trial, 6) <= 1e-300 {
                return Err(Error::Collapse(iterations));
            }
            let (_, candidate) = project_to_constraint(&trial)?;
            let s = action_s(&candidate);
            if s <= action + ACTION_SLACK * action.abs() {
                accepted = Some((candidate, s));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((candidate, s)) => {
                phi = recenter(&candidate);
                action = s;
                history.push(s);
                step *= 1.5;
                stalls = 0;
            }
            None => {
                stalls += 1;
                step = opts.initial_step;
                if stalls >= opts.stall_limit {
                    return Err(Error::Divergence(format!(
                        "action did not decrease for {stalls} consecutive steps (gradient norm {gradient_norm:.3e})"
                    )));
                }
            }
        }
        if phi.values().iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12 {
            return Err(Error::Collapse(iterations));
        }
    }
    let template = GroundStateTemplate::new(&grid, 1.0)?;
    let distance_to_w_orbit = fit_phase_shift(&phi, &template, Seminorm::HDot1)?.distance;
    Ok(MinimizerResult {
        constraint: constraint_k(&phi),
        action,
        profile: phi,
        iterations,
        converged,
        distance_to_w_orbit,
        gradient_norm,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::solitons::w_value;

    #[test]
    fn shooting_recovers_sech_profile() {
        let g = make_grid(40.0, 2048).unwrap();
        let r = shoot_elliptic(&g, 1.0, 0.0, (1.0, 5.0)).unwrap();
        assert!((r.peak - 2.0).abs() < 1e-10, "peak {}", r.peak);
        let err = g
            .nodes()
            .iter()
            .zip(r.profile.values())
            .map(|(&x, z)| (z.re - 2.0 / (2.0 * x).cosh().sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "max error {err:e}");
        assert!(r.residual < 1e-6, "residual {:e}", r.residual);
    }

    #[test]
    fn shooting_recovers_w_in_zero_mass_case() {
        let g = make_grid(200.0, 8192).unwrap();
        let r = shoot_elliptic(&g, 1.0, 2.0, (1.0, 5.0)).unwrap();
        assert!((r.peak - 2f64.powf(1.5)).abs() < 1e-10, "peak {}", r.peak);
        let err = g
            .nodes()
            .iter()
            .zip(r.profile.values())
            .map(|(&x, z)| (z.re - w_value(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "max error {err:e}");
    }

    #[test]
    fn shooting_rejects_empty_bracket() {
        let g = make_grid(40.0, 1024).unwrap();
        assert!(matches!(
            shoot_elliptic(&g, 1.0, 2.0, (10.0, 11.0)),
            Err(Error::NoSignChange { .. })
        ));
        assert!(shoot_elliptic(&g, 1.0, 3.0, (1.0, 5.0)).is_err());
    }

    #[test]
    fn minimizer_rejects_zero_start() {
        let g = make_grid(40.0, 256).unwrap();
        assert!(matches!(
            minimize_action(&ComplexField::zeros(&g), &MinimizeOptions::default()),
            Err(Error::ZeroField(_))
        ));
    }

    #[test]
    fn minimizer_converges_to_w_orbit() {
        let g = make_grid(200.0, 4096).unwrap();
        let start = ComplexField::from_real_fn(&g, |x| w_value(x) + 0.1 * (-(x - 0.5).powi(2)).exp());
        let r = minimize_action(&start, &MinimizeOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.action - 4.0 * std::f64::consts::PI).abs() < 1e-3);
        assert!(r.constraint.abs() < 1e-8);
        assert!(r.distance_to_w_orbit < 1e-3, "distance {:e}", r.distance_to_w_orbit);
        assert!(r.history.windows(2).all(|p| p[1] <= p[0] + 1e-12 * p[0].abs()));
        assert!(ground_state_residual(&r.profile) < 1e-5);
    }

    #[test]
    fn reduced_gradient_vanishes_in_amplitude_direction() {
        let g = make_grid(40.0, 1024).unwrap();
        let f = ComplexField::from_real_fn(&g, |x| 1.3 * (-(x * x) / 2.0).exp());
        let (_, phi) = project_to_constraint(&f).unwrap();
        let grad = reduced_gradient(&phi);
        let pairing: f64 = grad.iter().zip(phi.values()).map(|(a, z)| a * z.re).sum::<f64>() * g.dx();
        assert!(pairing.abs() < 1e-10, "{pairing:e}");
    }
}
