//! Integrator and minimizer invariants against exact solutions.

use dnls_core::experiments::minimizer_starts;
use dnls_core::functionals::{Gauge, GROUND_STATE_ACTION};
use dnls_core::gauge::gauge_u_to_v;
use dnls_core::grid::{dirichlet_energy, lp_norm, lp_power};
use dnls_core::ground_state::{ground_state_residual, minimize_action, MinimizeOptions};
use dnls_core::integrator::{evolve, EvolutionOptions, Termination, TimeStep, Trajectory};
use dnls_core::random_fields::{amplitude_for_level, random_smooth_field, seeded_rng};
use dnls_core::solitons::{solitary_wave_u, SolitonParams};
use dnls_core::{make_grid, ComplexField, Norm};

fn l2_distance(a: &ComplexField, b: &ComplexField) -> f64 {
    lp_norm(&a.sub(b).unwrap(), Norm::L2)
}

fn oracle_options(t_final: f64) -> EvolutionOptions {
    EvolutionOptions { dt: TimeStep::Fixed(1e-3), t_final, sample_every: 250, ..Default::default() }
}

fn soliton(t: f64) -> ComplexField {
    let grid = make_grid(60.0, 2048).unwrap();
    solitary_wave_u(&SolitonParams::new(1.0, 0.0), t, &grid).unwrap()
}

#[test]
fn evolving_commutes_with_the_gauge() {
    let u0 = soliton(0.0);
    let u1 = evolve(&u0, Gauge::U, &oracle_options(1.0)).unwrap();
    let v1 = evolve(&gauge_u_to_v(&u0), Gauge::V, &oracle_options(1.0)).unwrap();
    assert_eq!(v1.terminated, Termination::Completed);
    let gap = l2_distance(&gauge_u_to_v(u1.final_state()), v1.final_state());
    assert!(gap < 1e-5, "evolve-then-gauge vs gauge-then-evolve: {gap:e}");
}

#[test]
fn backward_evolution_returns_to_the_start() {
    let u0 = soliton(0.0);
    let forward = evolve(&u0, Gauge::U, &oracle_options(1.0)).unwrap();
    let one_way = l2_distance(forward.final_state(), &soliton(1.0));
    let back = evolve(forward.final_state(), Gauge::U, &oracle_options(-1.0)).unwrap();
    assert!((back.final_time() + 1.0).abs() < 1e-12);
    let round_trip = l2_distance(back.final_state(), &u0);
    assert!(round_trip < 10.0 * one_way, "round trip {round_trip:e}, one way {one_way:e}");
}

fn max_relative_drifts(traj: &Trajectory) -> (f64, f64, f64) {
    let r0 = &traj.reports[0];
    let scale = dirichlet_energy(&traj.states[0]);
    let rel = |a: f64, b: f64, s: f64| ((a - b) / s).abs();
    traj.reports.iter().fold((0.0, 0.0, 0.0), |(m, e, p), r| {
        (
            f64::max(m, rel(r.mass, r0.mass, r0.mass)),
            f64::max(e, rel(r.energy, r0.energy, r0.energy.abs().max(scale))),
            f64::max(p, rel(r.momentum, r0.momentum, r0.momentum.abs().max(scale))),
        )
    })
}

#[test]
fn v_gauge_conservation_for_subthreshold_data() {
    let grid = make_grid(200.0, 4096).unwrap();
    for seed in [3, 11, 42] {
        let f = random_smooth_field(&mut seeded_rng(seed), &grid);
        let s = amplitude_for_level(&f, 0.5 * GROUND_STATE_ACTION).unwrap();
        let v0 = f.scale_real(s);
        assert!(lp_power(&v0, 2) < GROUND_STATE_ACTION);
        let opts = EvolutionOptions { t_final: 1.0, ..Default::default() };
        let traj = evolve(&v0, Gauge::V, &opts).unwrap();
        assert_eq!(traj.terminated, Termination::Completed);
        let (dm, de, dp) = max_relative_drifts(&traj);
        assert!(dm < 1e-6 && de < 1e-6 && dp < 1e-6, "seed {seed}: drifts {dm:e} {de:e} {dp:e}");
    }
}

#[test]
fn minimizer_descends_and_satisfies_the_profile_equation() {
    let grid = make_grid(400.0, 8192).unwrap();
    for (name, start) in minimizer_starts(&grid) {
        let r = minimize_action(&start, &MinimizeOptions::default()).unwrap();
        assert!(r.converged, "{name}");
        assert!(r.constraint.abs() < 1e-8, "{name}: K = {:e}", r.constraint);
        assert!(r.action > 1.0, "{name}");
        assert!((r.action - GROUND_STATE_ACTION).abs() < 1e-3, "{name}");
        let residual = ground_state_residual(&r.profile);
        assert!(residual < 1e-5, "{name}: residual {residual:e}");
        let increases = r.history.windows(2).filter(|w| w[1] > w[0] + 1e-12 * w[0].abs()).count();
        assert_eq!(increases, 0, "{name}: action increased along the flow");
    }
}
