use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use conformal_aoa::io::{
    load_pattern, load_result, load_spectrum, save_pattern, save_vector, PatternFile,
};
use conformal_aoa::sensing::simulate_sensing_matrix;
use conformal_aoa::{AngleGrid, ExperimentConfig, FrequencyGrid, MeasurementVector, SensingMatrix};
use ndarray::Array2;
use num_complex::Complex64;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conformal-aoa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_two_full_patterns_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["simulate", "--out", s(&a)]);
    ok(&["simulate", "--out", s(&b), "--seed", "1"]);
    for port in ["pattern_port1.csv", "pattern_port2.csv"] {
        let p = load_pattern(&a.join(port)).unwrap();
        assert_eq!(p.values.dim(), (301, 72));
        assert_eq!(fs::read(a.join(port)).unwrap(), fs::read(b.join(port)).unwrap());
    }
    assert!(a.join("simulate_manifest.json").exists());
    let manifest = fs::read_to_string(a.join("simulate_manifest.json")).unwrap();
    assert!(manifest.contains("pattern_port1.csv") && manifest.contains("apertures"));

    let c = dir.path().join("c");
    ok(&["simulate", "--out", s(&c), "--seed", "2"]);
    assert_ne!(
        fs::read(a.join("pattern_port1.csv")).unwrap(),
        fs::read(c.join("pattern_port1.csv")).unwrap()
    );
}

#[test]
fn single_frequency_config_gives_one_row_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    fs::write(&cfg, "[frequency]\nf_min_hz = 1e10\nf_max_hz = 1e10\ncount = 1\n").unwrap();
    ok(&["simulate", "--config", s(&cfg), "--out", s(dir.path()), "--binary"]);
    let p = load_pattern(&dir.path().join("pattern_port2.csv")).unwrap();
    assert_eq!(p.values.dim(), (1, 72));
    assert!(dir.path().join("pattern_port2.bin").exists());
}

#[test]
fn build_matrix_estimate_and_svd_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--out", s(d)]);
    ok(&[
        "build-matrix",
        "--port1",
        s(&d.join("pattern_port1.csv")),
        "--port2",
        s(&d.join("pattern_port2.csv")),
        "--out",
        s(d),
    ]);
    let file = load_pattern(&d.join("sensing_matrix.csv")).unwrap();
    let h = file.into_matrix().unwrap();
    let cfg = ExperimentConfig::default();
    let (a1, a2) = cfg.build_apertures().unwrap();
    let direct = simulate_sensing_matrix(
        (&a1, &a2),
        &cfg.frequency_grid().unwrap(),
        &cfg.angle_grid().unwrap(),
        0.16,
    )
    .unwrap();
    assert_eq!(h, direct);

    let matrix = d.join("sensing_matrix.csv");
    let out = ok(&["estimate", "--matrix", s(&matrix), "--simulate-source", "135,0.16", "--out", s(d)]);
    assert!(out.contains("angle_deg=135 "), "{out}");
    let r = load_result(&d.join("result.json")).unwrap();
    assert_eq!(r.result.angle_deg, 135.0);
    assert_eq!(r.truth.unwrap().distance, 0.16);

    ok(&["estimate", "--matrix", s(&matrix), "--simulate-source", "135,0.21", "--out", s(d)]);
    let r = load_result(&d.join("result.json")).unwrap();
    assert!((r.result.angle_deg - 135.0).abs() <= 5.0, "{}", r.result.angle_deg);

    ok(&["estimate", "--simulate-source", "200,0.26,20,7", "--out", s(d)]);
    let r = load_result(&d.join("result.json")).unwrap();
    assert_eq!(r.noise.unwrap().seed, 7);
    assert!(d.join("measurement.csv").exists());

    ok(&["estimate", "--matrix", s(&matrix), "--measurement", s(&d.join("measurement.csv")),
         "--method", "matched-filter", "--out", s(d)]);

    ok(&["svd", "--matrix", s(&matrix), "--out", s(d), "--plot"]);
    let spectrum = load_spectrum(&d.join("svd_spectrum.csv")).unwrap();
    assert_eq!(spectrum.values.len(), 72);
    assert_eq!(spectrum.values[0], 1.0);
    assert!(fs::read_to_string(d.join("svd_spectrum.svg")).unwrap().starts_with("<svg"));
}

fn write_matrix(path: &Path, entries: Array2<Complex64>) {
    let (m, n) = entries.dim();
    let h = SensingMatrix::new(
        entries,
        FrequencyGrid::new(9e9, 10e9, m).unwrap(),
        AngleGrid::new(n).unwrap(),
        0.16,
    )
    .unwrap();
    save_pattern(path, &PatternFile::from_matrix(&h)).unwrap();
}

#[test]
fn svd_examples_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let one = Complex64::new(1.0, 0.0);
    write_matrix(&d.join("eye.csv"), Array2::from_diag_elem(3, one));
    ok(&["svd", "--matrix", s(&d.join("eye.csv")), "--out", s(d)]);
    assert_eq!(load_spectrum(&d.join("svd_spectrum.csv")).unwrap().values, vec![1.0; 3]);

    let mut diag = Array2::zeros((3, 3));
    diag[[0, 0]] = one * 4.0;
    diag[[1, 1]] = one * 2.0;
    write_matrix(&d.join("diag.csv"), diag);
    ok(&["svd", "--matrix", s(&d.join("diag.csv")), "--out", s(d)]);
    assert_eq!(load_spectrum(&d.join("svd_spectrum.csv")).unwrap().values, vec![1.0, 0.5, 0.0]);

    write_matrix(&d.join("zero.csv"), Array2::zeros((3, 2)));
    let out = run(&["svd", "--matrix", s(&d.join("zero.csv")), "--out", s(d)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn exit_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--out", s(d)]);
    ok(&["build-matrix", "--port1", s(&d.join("pattern_port1.csv")),
         "--port2", s(&d.join("pattern_port2.csv")), "--out", s(d)]);

    // Degenerate: all-zero measurement.
    let freqs = FrequencyGrid::new(8.5e9, 11.5e9, 301).unwrap();
    let zero = MeasurementVector::new(vec![Complex64::new(0.0, 0.0); 301], freqs).unwrap();
    save_vector(&d.join("zero.csv"), &zero).unwrap();
    let out = run(&["estimate", "--matrix", s(&d.join("sensing_matrix.csv")),
                    "--measurement", s(&d.join("zero.csv")), "--out", s(d)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));

    // Config: out-of-range value, unknown key.
    let cfg = d.join("bad.toml");
    fs::write(&cfg, "[layout]\nradius_m = -1\n").unwrap();
    let out = run(&["simulate", "--config", s(&cfg), "--out", s(d)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("layout.radius_m"));

    // Parse: corrupted pattern file.
    let broken = d.join("broken.csv");
    let text = fs::read_to_string(d.join("pattern_port1.csv")).unwrap().replacen("e-", "x-", 1);
    fs::write(&broken, text).unwrap();
    let out = run(&["build-matrix", "--port1", s(&broken),
                    "--port2", s(&d.join("pattern_port2.csv")), "--out", s(d)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    // Swapped ports are refused.
    let out = run(&["build-matrix", "--port1", s(&d.join("pattern_port2.csv")),
                    "--port2", s(&d.join("pattern_port1.csv")), "--out", s(d)]);
    assert_eq!(out.status.code(), Some(3));

    // Resource cap.
    let out = run(&["sweep", "--trials", "5000", "--out", s(d)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource limit"));

    // Bad --simulate-source.
    let out = run(&["estimate", "--simulate-source", "north,0.2", "--out", s(d)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_reports_are_reproducible_and_plotted() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        "[sweep]\nbands = [{ f_min_hz = 8.5e9, f_max_hz = 11.5e9, count = 61 }]\n\
         distances_m = [0.26]\nsnr_db = [10.0]\ntrials = 2\nmaster_seed = 5\n",
    )
    .unwrap();
    ok(&["sweep", "--config", s(&cfg), "--out", s(&a), "--workers", "2", "--plot"]);
    ok(&["sweep", "--config", s(&cfg), "--out", s(&b), "--workers", "3"]);
    for f in ["sweep_rows.csv", "sweep_aggregates.csv", "sweep_spectra.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let rows = fs::read_to_string(a.join("sweep_rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 2 * 72);
    assert!(a.join("scatter_cell000.svg").exists());
    assert!(a.join("sweep_svd.svg").exists());
    assert!(!b.join("sweep_svd.svg").exists());

    // --seed overrides the master seed.
    let c = dir.path().join("c");
    ok(&["sweep", "--config", s(&cfg), "--out", s(&c), "--seed", "6"]);
    assert_ne!(fs::read(a.join("sweep_rows.csv")).unwrap(), fs::read(c.join("sweep_rows.csv")).unwrap());
}
