//! End-to-end runs of the experiment harness: CSV schemas, checkpoint
//! fidelity, determinism and the headline sampling examples.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use dnls_core::experiments::{
    gn_scan, run_experiment, simulate_near_soliton, ExperimentConfig, ExperimentKind, ScanSource,
    BLOWUP_CSV_HEADER, F_TRACKING_CSV_HEADER, GN_SCAN_CSV_HEADER, GROUNDSTATE_CSV_HEADER,
};
use dnls_core::functionals::{functionals_u, functionals_v, FunctionalReport, REPORT_CSV_HEADER};
use dnls_core::gauge::gauge_u_to_v;
use dnls_core::io::{checkpoint_path, read_field};
use dnls_core::make_grid;
use dnls_core::modulation::FIT_CSV_HEADER;
use tempfile::tempdir;

fn small_stability(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.length = 100.0;
    c.points = 1024;
    c.delta = 1e-3;
    c.t_final = 0.2;
    c.sample_every = 40;
    c.seed = 5;
    c
}

fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn summary(dir: &Path) -> BTreeMap<String, String> {
    let (header, rows) = read_csv(&dir.join("summary.csv"));
    assert_eq!(header, "key,value");
    rows.into_iter().map(|r| (r[0].clone(), r[1].clone())).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn check_row(row: &[String], report: &FunctionalReport) {
    let num = |i: usize| row[i].parse::<f64>().unwrap();
    assert_eq!(row[1], report.gauge.to_string());
    for (i, value) in [(2, report.mass), (3, report.energy), (4, report.momentum), (5, report.action), (6, report.constraint)] {
        assert!(close(num(i), value), "column {i}: {} vs {value}", row[i]);
    }
    assert!(close(num(7), report.ratio.unwrap()));
    assert!(close(num(8), report.gn_deficit.unwrap()));
}

#[test]
fn stability_csvs_recompute_from_checkpoints() {
    let dir = tempdir().unwrap();
    let config = small_stability(ExperimentKind::Stability);
    let s = run_experiment(&config, dir.path()).unwrap();
    assert!(!s.integrator_aborted());

    let (header, rows) = read_csv(&dir.path().join("functionals.csv"));
    assert_eq!(header, REPORT_CSV_HEADER);
    assert_eq!(rows.len() % 2, 0);
    for (i, pair) in rows.chunks(2).enumerate() {
        let snap = read_field(&checkpoint_path(&dir.path().join("fields"), "u", i)).unwrap();
        assert_eq!(pair[0][0].parse::<f64>().unwrap(), snap.t);
        check_row(&pair[0], &functionals_u(&snap.field));
        check_row(&pair[1], &functionals_v(&gauge_u_to_v(&snap.field)));
    }

    let (header, rows) = read_csv(&dir.path().join("modulation.csv"));
    assert_eq!(header, FIT_CSV_HEADER);
    assert!(rows.iter().any(|r| r[5] == "h1") && rows.iter().any(|r| r[5] == "hdot1"));
    let keys = summary(dir.path());
    for key in ["kind", "terminated", "sup_distance", "min_lambda", "max_lambda", "initial_functional_offset"] {
        assert!(keys.contains_key(key), "summary lacks {key}");
    }
    assert!(dir.path().join("config.json").exists());
}

fn all_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn identical_configs_give_identical_outputs() {
    let mut scan = ExperimentConfig::new(ExperimentKind::GnScan);
    scan.length = 100.0;
    scan.points = 1024;
    scan.samples = 40;
    scan.seed = 17;
    for config in [small_stability(ExperimentKind::FTracking), scan] {
        let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
        run_experiment(&config, a.path()).unwrap();
        run_experiment(&config, b.path()).unwrap();
        let (fa, fb) = (all_files(a.path()), all_files(b.path()));
        assert!(fa.keys().any(|k| k.ends_with(".csv")));
        assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
        for (name, bytes) in &fa {
            assert!(bytes == &fb[name], "{} differs between runs of {}", name, config.kind);
        }
    }
}

#[test]
fn csv_columns_feed_the_plotting_scripts() {
    let f_trace = ["t", "f_squared"];
    let distance_trace = ["t", "distance"];
    let drift = ["t", "gauge", "M"];
    let gn_scatter = ["gn_deficit", "orbit_distance"];
    let has = |header: &str, cols: &[&str]| cols.iter().all(|c| header.split(',').any(|h| h == *c));
    assert!(has(F_TRACKING_CSV_HEADER, &f_trace));
    assert!(has(FIT_CSV_HEADER, &distance_trace));
    assert!(has(REPORT_CSV_HEADER, &drift));
    assert!(has(GN_SCAN_CSV_HEADER, &gn_scatter));
    assert_eq!(FIT_CSV_HEADER, "t,theta,y,lambda,distance,seminorm,converged");
    assert_eq!(REPORT_CSV_HEADER, "t,gauge,M,E,P,S,K,f,gn_deficit");
}

#[test]
fn f_tracking_and_blowup_outputs() {
    let dir = tempdir().unwrap();
    run_experiment(&small_stability(ExperimentKind::FTracking), dir.path()).unwrap();
    let (header, rows) = read_csv(&dir.path().join("f_tracking.csv"));
    assert_eq!(header, F_TRACKING_CSV_HEADER);
    for r in &rows {
        let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        assert!((v[2] - v[1] * v[1]).abs() < 1e-12 * v[2]);
        assert!((v[3] - (v[2] - 8.0 * PI / 3.0)).abs() < 1e-12);
        assert!(v[1] <= v[5] + 1e-6 && v[1] >= v[4] - 0.05);
    }

    let dir = tempdir().unwrap();
    let mut probe = ExperimentConfig::new(ExperimentKind::BlowupProbe);
    probe.length = 100.0;
    probe.points = 1024;
    probe.t_final = 0.2;
    probe.sample_every = 40;
    let s = run_experiment(&probe, dir.path()).unwrap();
    assert!((s.number("initial_mass").unwrap() - 4.0 * PI).abs() < 1e-6);
    let (header, rows) = read_csv(&dir.path().join("blowup.csv"));
    assert_eq!(header, BLOWUP_CSV_HEADER);
    assert_eq!(rows.len().to_string(), summary(dir.path())["samples"]);
}

#[test]
fn groundstate_verify_writes_profiles() {
    let dir = tempdir().unwrap();
    let mut config = ExperimentConfig::new(ExperimentKind::GroundstateVerify);
    config.length = 400.0;
    config.points = 8192;
    let s = run_experiment(&config, dir.path()).unwrap();
    assert_eq!(s.get("all_converged"), Some("true"));
    assert!(s.number("max_distance").unwrap() < 1e-3);
    let (header, rows) = read_csv(&dir.path().join("groundstate.csv"));
    assert_eq!(header, GROUNDSTATE_CSV_HEADER);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let snap = read_field(&dir.path().join("fields").join(format!("{}_{}.field", r[0], r[1]))).unwrap();
        assert_eq!(snap.field.len(), 8192);
    }
}

#[test]
fn gn_scan_sampling_examples() {
    let grid = make_grid(200.0, 4096).unwrap();
    let scan = gn_scan(&grid, 2024, 1000).unwrap();
    assert_eq!(scan.skipped, 1, "the zero field is skipped");
    assert_eq!(scan.rows.len(), 1001);
    let random = scan.min_deficit_of(ScanSource::Random).unwrap();
    assert!(random >= -1e-10, "min deficit over random fields {random:e}");
    for r in scan.rows.iter().filter(|r| r.source != ScanSource::Random) {
        assert!(r.relative_deficit >= -1e-6, "orbit row {}: relative deficit {:e}", r.index, r.relative_deficit);
    }
    let w = scan.ground_state().unwrap();
    assert!(w.relative_deficit.abs() < 1e-6);
    assert!(scan.rows.iter().filter(|r| r.source == ScanSource::NearOrbit).count() >= 100);
    let worst = scan.max_distance_below(1e-3).expect("near-orbit fields reach small deficits");
    assert!(worst < 0.1, "largest orbit distance among small deficits: {worst}");
}

#[test]
fn perturbed_initial_functionals_are_order_delta() {
    let mut config = ExperimentConfig::new(ExperimentKind::Stability);
    config.delta = 1e-3;
    config.t_final = 0.0;
    let run = simulate_near_soliton(&config).unwrap();
    let s = run.stability_summary();
    assert!(s.initial_functional_offset() <= 0.1, "{}", s.initial_functional_offset());
}

fn full_stability(delta: f64) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(ExperimentKind::Stability);
    config.delta = delta;
    config.t_final = 5.0;
    config
}

/// Known to fail: the sampled wave on a box of length 200 sits about 4e-4
/// from the analytic orbit by t = 1 because of the truncated algebraic tail.
#[test]
fn exact_soliton_stays_on_its_orbit() {
    let run = simulate_near_soliton(&full_stability(0.0)).unwrap();
    let s = run.stability_summary();
    let f = run.f_tracking_summary();
    assert!(f.max_deviation < 1e-3, "max |f^2 - 8 pi / 3| = {:e}", f.max_deviation);
    assert_eq!(f.bound_violations(&run, 1e-6), 0);
    assert!(s.sup_distance < 1e-4, "sup distance {:e} over t in [0, 5]", s.sup_distance);
}

/// Known to fail: the two distances use different gauges, norms and scales,
/// so neither bounds the other.
#[test]
fn full_fit_dominates_w_representation_fit() {
    let run = simulate_near_soliton(&full_stability(1e-3)).unwrap();
    let s = run.stability_summary();
    assert_eq!(
        s.w_exceeds_full,
        0,
        "{} of {} samples have a w-representation distance above the full fit distance",
        s.w_exceeds_full,
        run.fits.len()
    );
}
