//! Acceptance suite: one test per headline criterion, each printing a
//! `PASS`/`FAIL` line with the measured numbers.
//!
//! Run with `cargo test -p dnls-core --test acceptance -- --nocapture` to see
//! the verdicts.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use dnls_core::constants::verify_w_constants;
use dnls_core::experiments::{
    blowup_initial_datum, probe_blowup, recover_ground_states, simulate_near_soliton, BlowupProfile,
    ExperimentConfig, ExperimentKind, GroundStateMethod, NearSolitonRun,
};
use dnls_core::functionals::{
    action_s, constraint_k, critical_cubic, critical_cubic_slope, default_fd_step, dilation_direction,
    directional_derivative, ratio_f, relative_gn_deficit, Functional, Gauge, GROUND_STATE_MASS,
    RATIO_SQUARED_TARGET, W_QUARTIC,
};
use dnls_core::grid::{dirichlet_energy, lp_norm};
use dnls_core::integrator::{evolve, EvolutionOptions, Termination, TimeStep};
use dnls_core::random_fields::sample_subthreshold_constraint;
use dnls_core::solitons::{ground_state_w, solitary_wave_u, SolitonParams};
use dnls_core::{make_grid, ComplexField, Error, Norm};

fn verdict(criterion: &str, ok: bool, detail: impl AsRef<str>) -> bool {
    println!("{} [{criterion}] {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
    ok
}

#[test]
fn constant_verification() {
    let start = Instant::now();
    let grid = make_grid(400.0, 16384).unwrap();
    let mut all = true;
    for c in verify_w_constants(&grid).unwrap() {
        all &= verdict(
            "constants",
            c.passes(1e-8),
            format!(
                "{}: grid {:.12}, tail-corrected rel err {:.2e} (tol {:.0e}), gap to truncated integral {:.2e} (tol 1e-8)",
                c.constant.name(),
                c.grid_value,
                c.relative_error(),
                c.constant.tolerance(),
                c.truncation_gap()
            ),
        );
    }
    all &= verdict("constants", start.elapsed() < Duration::from_secs(30), format!("runtime {:?}", start.elapsed()));
    assert!(all);
}

#[test]
fn variational_constants() {
    let grid = make_grid(400.0, 16384).unwrap();
    let w = ground_state_w(&grid, 1.0).unwrap();
    let s = action_s(&w);
    let k = constraint_k(&w);
    let gn = relative_gn_deficit(&w).unwrap();
    let f = ratio_f(&w).unwrap();
    let m0 = GROUND_STATE_MASS;
    let x = RATIO_SQUARED_TARGET;
    let cubic = critical_cubic(m0, x);
    let slope = critical_cubic_slope(m0, x);
    let h = 1e-3 * x;
    let touches = critical_cubic(m0, x - h) > 0.0 && critical_cubic(m0, x + h) > 0.0;
    let checks = [
        verdict("variational", (s - 4.0 * PI).abs() <= 1e-3, format!("S(W) = {s:.10}, 4 pi = {:.10}", 4.0 * PI)),
        verdict("variational", k.abs() <= 1e-3, format!("K(W) = {k:.3e}")),
        verdict("variational", gn <= 1e-6, format!("relative GN deficit of W = {gn:.3e}")),
        verdict("variational", (f * f - x).abs() <= 1e-3, format!("f(W)^2 = {:.10}, 8 pi / 3 = {x:.10}", f * f)),
        verdict(
            "variational",
            cubic.abs() <= 1e-9 * m0.powi(3),
            format!("cubic(4 pi, 8 pi / 3) = {cubic:.3e} (tol {:.3e})", 1e-9 * m0.powi(3)),
        ),
        verdict(
            "variational",
            slope.abs() <= 1e-9 * m0 * m0 && touches,
            format!("double root: slope {slope:.3e}, positive on both sides: {touches}"),
        ),
    ];
    assert!(checks.iter().all(|&c| c));
}

#[test]
fn directional_derivative_identities() {
    let grid = make_grid(800.0, 32768).unwrap();
    let w = ground_state_w(&grid, 1.0).unwrap();
    let psi = dilation_direction(&w);
    let h = default_fd_step(&w);
    let ds = directional_derivative(Functional::Action, &w, &psi, h).unwrap();
    let dk = directional_derivative(Functional::Constraint, &w, &psi, h).unwrap();
    let target = -6.0 * W_QUARTIC;
    let rel = ((dk - target) / target).abs();
    let a = verdict("directional", ds.abs() <= 1e-6, format!("S'(W) psi = {ds:.3e} (tol 1e-6)"));
    let b = verdict(
        "directional",
        rel <= 1e-3,
        format!("K'(W) psi = {dk:.8}, -96 pi = {target:.8}, rel err {rel:.2e} (tol 1e-3)"),
    );
    assert!(a && b);
}

fn ground_state_recovery(method: GroundStateMethod) {
    let grid = make_grid(400.0, 8192).unwrap();
    let start = Instant::now();
    let checks = recover_ground_states(&grid, method).unwrap();
    let per_start = start.elapsed() / checks.len().max(1) as u32;
    let mut all = verdict("ground-state", checks.len() >= 3, format!("{method}: {} starts", checks.len()));
    for c in &checks {
        let action_err = (c.action - 4.0 * PI).abs();
        all &= verdict(
            "ground-state",
            c.converged && c.distance < 1e-3 && action_err <= 1e-3,
            format!(
                "{method} {}: converged {}, orbit distance {:.3e}, |S - 4 pi| {:.3e}, residual {:.3e}",
                c.start, c.converged, c.distance, action_err, c.residual
            ),
        );
    }
    all &= verdict(
        "ground-state",
        per_start <= Duration::from_secs(60),
        format!("{method}: mean runtime per start {per_start:?}"),
    );
    assert!(all);
}

#[test]
fn ground_state_recovery_by_shooting() {
    ground_state_recovery(GroundStateMethod::Shoot);
}

#[test]
fn ground_state_recovery_by_minimization() {
    ground_state_recovery(GroundStateMethod::Minimize);
}

fn soliton_error_at_one(dt: f64) -> (f64, dnls_core::integrator::Trajectory) {
    let grid = make_grid(60.0, 2048).unwrap();
    let params = SolitonParams::new(1.0, 0.0);
    let u0 = solitary_wave_u(&params, 0.0, &grid).unwrap();
    let exact = solitary_wave_u(&params, 1.0, &grid).unwrap();
    let opts = EvolutionOptions { dt: TimeStep::Fixed(dt), t_final: 1.0, sample_every: 100, ..Default::default() };
    let traj = evolve(&u0, Gauge::U, &opts).unwrap();
    (lp_norm(&traj.final_state().sub(&exact).unwrap(), Norm::L2), traj)
}

#[test]
fn integrator_oracle() {
    let (err, traj) = soliton_error_at_one(1e-3);
    let (err_half, _) = soliton_error_at_one(5e-4);
    let r0 = &traj.reports[0];
    let scale = dirichlet_energy(&traj.states[0]);
    let mut dm: f64 = 0.0;
    let mut de: f64 = 0.0;
    let mut dp: f64 = 0.0;
    for r in &traj.reports {
        dm = dm.max(((r.mass - r0.mass) / r0.mass).abs());
        de = de.max(((r.energy - r0.energy) / r0.energy.abs().max(scale)).abs());
        dp = dp.max(((r.momentum - r0.momentum) / r0.momentum.abs().max(scale)).abs());
    }
    let ratio = err / err_half;
    let checks = [
        verdict("integrator", traj.terminated == Termination::Completed, format!("terminated {}", traj.terminated)),
        verdict("integrator", err < 1e-4, format!("L2 error at t=1, dt=1e-3: {err:.3e} (tol 1e-4)")),
        verdict("integrator", dm < 1e-6, format!("relative mass drift {dm:.3e}")),
        verdict("integrator", de < 1e-6, format!("energy drift {de:.3e} (relative to max(|E0|, ||u_x||^2))")),
        verdict("integrator", dp < 1e-6, format!("momentum drift {dp:.3e} (relative to max(|P0|, ||u_x||^2))")),
        verdict(
            "integrator",
            (12.0..=20.0).contains(&ratio),
            format!("dt halving: {err:.3e} -> {err_half:.3e}, factor {ratio:.2}"),
        ),
    ];
    assert!(checks.iter().all(|&c| c));
}

fn perturbed_run() -> &'static (NearSolitonRun, Duration) {
    static RUN: OnceLock<(NearSolitonRun, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let mut config = ExperimentConfig::new(ExperimentKind::Stability);
        config.delta = 1e-3;
        config.t_final = 5.0;
        let start = Instant::now();
        let run = simulate_near_soliton(&config).unwrap();
        (run, start.elapsed())
    })
}

#[test]
fn stability_experiment() {
    let (run, elapsed) = perturbed_run();
    let s = run.stability_summary();
    let checks = [
        verdict(
            "stability",
            run.trajectory.terminated == Termination::Completed,
            format!("terminated {} at t = {}", run.trajectory.terminated, run.trajectory.final_time()),
        ),
        verdict(
            "stability",
            s.sup_distance <= 0.05,
            format!("sup modulated H1 distance {:.3e} (tol 0.05)", s.sup_distance),
        ),
        verdict(
            "stability",
            s.min_lambda >= 0.5 && s.max_lambda <= 2.0,
            format!("fitted lambda in [{:.6}, {:.6}]", s.min_lambda, s.max_lambda),
        ),
        verdict("stability", *elapsed <= Duration::from_secs(600), format!("runtime {elapsed:?}")),
    ];
    assert!(checks.iter().all(|&c| c));
}

#[test]
fn f_tracking() {
    let (run, _) = perturbed_run();
    let f = run.f_tracking_summary();
    let violations = f.bound_violations(run, 0.05);
    let checks = [
        verdict(
            "f-tracking",
            f.max_deviation <= 0.05,
            format!("max |f^2 - 8 pi / 3| = {:.3e} (tol 0.05)", f.max_deviation),
        ),
        verdict(
            "f-tracking",
            violations == 0 && f.undefined_samples == 0,
            format!(
                "f in [{:.6}, {:.6}], bounds [{:.6}, {:.6}] with slack 0.05: {violations} violations, {} undefined",
                f.min_f, f.max_f, f.lower_bound, f.upper_bound, f.undefined_samples
            ),
        ),
    ];
    assert!(checks.iter().all(|&c| c));
}

#[test]
fn subthreshold_constraint_sampling() {
    let grid = make_grid(200.0, 2048).unwrap();
    let start = Instant::now();
    let s = sample_subthreshold_constraint(&grid, 2024, 1000, 0.99, -1e-8);
    let elapsed = start.elapsed();
    let a = verdict(
        "constraint-sampling",
        s.samples == 1000 && s.violations == 0 && s.min_constraint >= -1e-8,
        format!("{} samples, min K {:.3e}, {} below -1e-8", s.samples, s.min_constraint, s.violations),
    );
    let b = verdict("constraint-sampling", elapsed <= Duration::from_secs(30), format!("runtime {elapsed:?}"));
    assert!(a && b);
}

fn probe_config(profile: BlowupProfile) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(ExperimentKind::BlowupProbe);
    config.profile = profile;
    config.t_final = 5.0;
    config
}

#[test]
fn blowup_probe_refuses_wrong_mass() {
    let mut config = probe_config(BlowupProfile::Soliton);
    config.mass = Some(2.0 * PI);
    let u0 = blowup_initial_datum(&config).unwrap();
    let outcome = probe_blowup(&u0, &config.evolution_options());
    let refused = matches!(outcome, Err(Error::Precondition(_)));
    assert!(verdict("blow-up probe", refused, "mass 2 pi datum refused with a precondition error"));
}

#[test]
fn blowup_probe_on_soliton() {
    let config = probe_config(BlowupProfile::Soliton);
    let u0 = blowup_initial_datum(&config).unwrap();
    let probe = probe_blowup(&u0, &config.evolution_options()).unwrap();
    let dev = probe.max_lambda_deviation();
    let a = verdict(
        "blow-up probe",
        !probe.tripped() && probe.trajectory.final_time() >= 5.0 - 1e-12,
        format!("soliton: terminated {} at t = {}", probe.trajectory.terminated, probe.trajectory.final_time()),
    );
    let b = verdict("blow-up probe", dev <= 0.05, format!("soliton: max |lambda - 1| = {dev:.3e} (tol 0.05)"));
    assert!(a && b);
}

#[test]
fn blowup_probe_squeezed_profile() {
    let config = probe_config(BlowupProfile::SqueezedW);
    let u0: ComplexField = blowup_initial_datum(&config).unwrap();
    let probe = probe_blowup(&u0, &config.evolution_options()).unwrap();
    let ok = match probe.monotone_tail(3) {
        None => verdict(
            "blow-up probe",
            true,
            format!(
                "squeezed W: threshold not tripped ({} at t = {}), monotonicity not required",
                probe.trajectory.terminated,
                probe.trajectory.final_time()
            ),
        ),
        Some(monotone) => {
            let tail: Vec<String> = probe
                .samples
                .iter()
                .rev()
                .take(3)
                .rev()
                .map(|s| s.rescaled_distance.map_or("n/a".into(), |d| format!("{d:.4e}")))
                .collect();
            verdict("blow-up probe", monotone, format!("squeezed W tripped: last rescaled distances {}", tail.join(", ")))
        }
    };
    assert!(ok);
}
