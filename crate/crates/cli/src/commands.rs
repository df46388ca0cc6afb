use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use conformal_aoa::estimator::{Method, NormalEquations};
use conformal_aoa::forward::pattern_sweep;
use conformal_aoa::io::{
    self, dump_config, load_config, load_pattern, load_table_binary, load_vector, save_manifest,
    save_pattern, save_result, save_spectrum, save_table_binary, save_vector, ApertureSpec,
    PatternFile, ResultFile, RunManifest, TableKind, BINARY_MAGIC,
};
use conformal_aoa::plot::{aoa_scatter_svg, svd_curves_svg};
use conformal_aoa::sensing::{add_noise, build_sensing_matrix, measure, measure_with_port_noise};
use conformal_aoa::sweep::{run_sweep, SweepSetup};
use conformal_aoa::{
    matched_filter, svd_spectrum, Error, ExperimentConfig, MeasurementVector, PortId, Result,
    SensingMatrix,
};

use crate::{
    BuildMatrixArgs, Cli, Command, EstimateArgs, MethodArg, SimulateArgs, SvdArgs, SweepArgs,
};

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config {
                key: "--workers".into(),
                message: "must be at least 1".into(),
            });
        }
        // Only fails if a pool already exists, in which case that pool is used.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
        cfg.sweep.master_seed = seed;
    }
    let mut session = Session::new(cli, cfg);
    match &cli.command {
        Command::Simulate(a) => simulate(&mut session, a),
        Command::BuildMatrix(a) => build_matrix(&mut session, a),
        Command::Estimate(a) => estimate(&mut session, a),
        Command::Svd(a) => svd(&mut session, a),
        Command::Sweep(a) => sweep(&mut session, a),
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Output bookkeeping shared by every command.
struct Session<'a> {
    cli: &'a Cli,
    cfg: ExperimentConfig,
    started: u64,
    artifacts: Vec<String>,
    notes: BTreeMap<String, String>,
}

impl<'a> Session<'a> {
    fn new(cli: &'a Cli, cfg: ExperimentConfig) -> Self {
        Self {
            cli,
            cfg,
            started: now(),
            artifacts: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.cli.out.join(name)
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::create_dir_all(&self.cli.out)
            .and_then(|_| fs::write(&path, text))
            .map_err(|source| Error::Io { path, source })
    }

    fn finish(&mut self, command: &str) -> Result<()> {
        let seeds = BTreeMap::from([
            ("rng_seed".to_string(), self.cfg.rng_seed),
            ("sweep.master_seed".to_string(), self.cfg.sweep.master_seed),
        ]);
        let manifest = RunManifest {
            format_version: io::FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            started_unix_s: self.started,
            finished_unix_s: now(),
            config_toml: dump_config(&self.cfg)?,
            seeds,
            artifacts: std::mem::take(&mut self.artifacts),
            notes: std::mem::take(&mut self.notes),
        };
        save_manifest(&self.cli.out.join(format!("{command}_manifest.json")), &manifest)
    }
}

fn load_table(path: &Path) -> Result<PatternFile> {
    let head = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if head.starts_with(BINARY_MAGIC) {
        load_table_binary(path)
    } else {
        load_pattern(path)
    }
}

fn load_matrix(path: &Path) -> Result<SensingMatrix> {
    load_table(path)?
        .into_matrix()
        .map_err(|e| e.with_path(path))
}

fn simulate(s: &mut Session<'_>, args: &SimulateArgs) -> Result<()> {
    let cfg = &s.cfg;
    let (freqs, angles) = (cfg.frequency_grid()?, cfg.angle_grid()?);
    let (a1, a2) = cfg.build_apertures()?;
    let d = cfg.ref_distance_m;
    let tables = [
        PatternFile::pattern(
            PortId::One,
            d,
            freqs.clone(),
            angles.clone(),
            pattern_sweep(&a1, &angles, &freqs, d)?,
        ),
        PatternFile::pattern(
            PortId::Two,
            d,
            freqs.clone(),
            angles.clone(),
            pattern_sweep(&a2, &angles, &freqs, d)?,
        ),
    ];
    for (t, stem) in tables.iter().zip(["pattern_port1", "pattern_port2"]) {
        let path = s.path(&format!("{stem}.csv"));
        save_pattern(&path, t)?;
        if args.binary {
            save_table_binary(&s.path(&format!("{stem}.bin")), t)?;
        }
    }
    // Record the realised layout so the manifest alone reproduces the patterns.
    s.cfg.apertures = vec![
        ApertureSpec::from_aperture(&a1),
        ApertureSpec::from_aperture(&a2),
    ];
    println!(
        "wrote 2 patterns of {} x {} to {}",
        freqs.len(),
        angles.len(),
        s.cli.out.display()
    );
    s.finish("simulate")
}

fn build_matrix(s: &mut Session<'_>, args: &BuildMatrixArgs) -> Result<()> {
    let p1 = load_table(&args.port1)?;
    let p2 = load_table(&args.port2)?;
    for (p, path, want) in [(&p1, &args.port1, PortId::One), (&p2, &args.port2, PortId::Two)] {
        if p.kind != TableKind::Pattern || p.port_id != Some(want) {
            return Err(Error::Parse {
                path: Some(path.clone()),
                line: None,
                message: format!("expected the pattern of port {}", want.number()),
            });
        }
    }
    if p1.freqs != p2.freqs || p1.angles != p2.angles || p1.ref_distance_m != p2.ref_distance_m {
        return Err(Error::Shape(
            "the two patterns were measured on different grids or distances".into(),
        ));
    }
    let h = build_sensing_matrix(&p1.values, &p2.values, &p1.freqs, &p1.angles, p1.ref_distance_m)?;
    let table = PatternFile::from_matrix(&h);
    let path = s.path("sensing_matrix.csv");
    save_pattern(&path, &table)?;
    if args.binary {
        save_table_binary(&s.path("sensing_matrix.bin"), &table)?;
    }
    s.notes.insert("port1".into(), args.port1.display().to_string());
    s.notes.insert("port2".into(), args.port2.display().to_string());
    println!("wrote {} x {} sensing matrix to {}", h.rows(), h.cols(), path.display());
    s.finish("build-matrix")
}

/// `ANGLE,DIST[,SNR[,SEED]]`
fn parse_source_spec(text: &str) -> Result<(f64, f64, f64, u64)> {
    let bad = |m: String| Error::Config {
        key: "--simulate-source".into(),
        message: m,
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if !(2..=4).contains(&parts.len()) {
        return Err(bad(format!("expected ANGLE,DISTANCE[,SNR[,SEED]], got `{text}`")));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(format!("`{s}` is not a number")))
    };
    let angle = num(parts[0])?;
    let dist = num(parts[1])?;
    let snr = parts.get(2).map_or(Ok(f64::INFINITY), |s| num(s))?;
    let seed = parts.get(3).map_or(Ok(0), |s| {
        s.parse::<u64>()
            .map_err(|_| bad(format!("`{s}` is not a non-negative integer seed")))
    })?;
    if snr.is_nan() {
        return Err(bad("SNR must not be NaN".into()));
    }
    Ok((angle, dist, snr, seed))
}

fn estimate(s: &mut Session<'_>, args: &EstimateArgs) -> Result<()> {
    let cfg = s.cfg.clone();
    let h = match &args.matrix {
        Some(p) => load_matrix(p)?,
        None => {
            let (a1, a2) = cfg.build_apertures()?;
            conformal_aoa::sensing::simulate_sensing_matrix(
                (&a1, &a2),
                &cfg.frequency_grid()?,
                &cfg.angle_grid()?,
                cfg.ref_distance_m,
            )?
        }
    };
    let g = match (&args.measurement, &args.simulate_source) {
        (Some(p), _) => load_vector(p)?,
        (None, Some(spec)) => {
            let (angle, dist, snr, seed) = parse_source_spec(spec)?;
            let source = cfg.source(angle, dist)?;
            let (a1, a2) = cfg.build_apertures()?;
            let g = if !snr.is_finite() {
                measure(&source, h.freqs(), (&a1, &a2))?
            } else if cfg.noise_on_ports {
                measure_with_port_noise(&source, h.freqs(), (&a1, &a2), snr, seed)?
            } else {
                add_noise(&measure(&source, h.freqs(), (&a1, &a2))?, snr, seed)?
            };
            save_vector(&s.path("measurement.csv"), &g)?;
            g
        }
        (None, None) => unreachable!("clap requires one measurement source"),
    };
    if g.freqs != *h.freqs() {
        return Err(Error::Shape(
            "measurement and sensing matrix use different frequency grids".into(),
        ));
    }
    let result = match args.method {
        MethodArg::Cgs => NormalEquations::new(&h, cfg.solver)?.estimate(&g)?,
        MethodArg::MatchedFilter => matched_filter(&h, &g)?,
    };
    print_result(&result, &g);
    save_result(
        &s.path("result.json"),
        &ResultFile::new(result, g.truth, g.noise),
    )?;
    s.finish("estimate")
}

fn print_result(r: &conformal_aoa::EstimationResult, g: &MeasurementVector) {
    let method = match r.method {
        Method::CgsNormalEq => "cgs_normal_eq",
        Method::MatchedFilter => "matched_filter",
    };
    print!(
        "angle_deg={} bin_index={} method={method} iterations={} residual_norm={:.3e}",
        r.angle_deg, r.bin_index, r.iterations, r.residual_norm
    );
    if let Some(stop) = r.stop {
        print!(" stop={stop:?}");
    }
    if let Some(t) = &g.truth {
        print!(" true_angle_deg={} distance_m={}", t.angle_deg, t.distance);
    }
    println!();
}

fn svd(s: &mut Session<'_>, args: &SvdArgs) -> Result<()> {
    let h = load_matrix(&args.matrix)?;
    let spectrum = svd_spectrum(&h)?;
    save_spectrum(&s.path("svd_spectrum.csv"), &spectrum)?;
    if s.cli.plot {
        let label = format!(
            "{:.2}-{:.2} GHz, M={}",
            h.freqs().f_min() / 1e9,
            h.freqs().f_max() / 1e9,
            h.rows()
        );
        let svg = svd_curves_svg("Normalized SVD of H", &[(label, spectrum.values.clone())]);
        s.write_text("svd_spectrum.svg", &svg)?;
    }
    println!(
        "{} singular values, effective rank (>= 0.01) {}",
        spectrum.values.len(),
        spectrum.effective_rank(0.01)
    );
    s.notes.insert("matrix".into(), args.matrix.display().to_string());
    s.finish("svd")
}

fn sweep(s: &mut Session<'_>, args: &SweepArgs) -> Result<()> {
    let spec = &mut s.cfg.sweep;
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(v) = &args.snr_db {
        spec.snr_db = v.clone();
    }
    if let Some(v) = &args.distances {
        spec.distances_m = v.clone();
    }
    if let Some(m) = args.max_estimations {
        spec.max_estimations = m;
    }
    if let Some(m) = args.method {
        spec.method = match m {
            MethodArg::Cgs => Method::CgsNormalEq,
            MethodArg::MatchedFilter => Method::MatchedFilter,
        };
    }
    s.cfg.validate()?;
    let cfg = s.cfg.clone();
    let (a1, a2) = cfg.build_apertures()?;
    let angles = cfg.angle_grid()?;
    let setup = SweepSetup {
        apertures: (&a1, &a2),
        angles: &angles,
        ref_distance: cfg.ref_distance_m,
        solver: cfg.solver,
        noise_on_ports: cfg.noise_on_ports,
    };
    let report = run_sweep(&setup, &cfg.sweep)?;
    s.write_text("sweep_rows.csv", &report.rows_csv())?;
    s.write_text("sweep_aggregates.csv", &report.aggregates_csv())?;
    s.write_text("sweep_spectra.csv", &report.spectra_csv())?;
    if s.cli.plot {
        for a in &report.aggregates {
            let points: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|r| r.cell == a.cell)
                .map(|r| (r.true_angle_deg, r.est_angle_deg))
                .collect();
            let title = format!(
                "{:.2}-{:.2} GHz, M={}, d={} m, SNR={} dB",
                a.band.f_min_hz / 1e9,
                a.band.f_max_hz / 1e9,
                a.band.count,
                a.distance_m,
                a.snr_db
            );
            s.write_text(&format!("scatter_cell{:03}.svg", a.cell), &aoa_scatter_svg(&title, &points))?;
        }
        let series: Vec<(String, Vec<f64>)> = report
            .spectra
            .iter()
            .map(|b| {
                (
                    format!("{:.2}-{:.2} GHz, M={}", b.band.f_min_hz / 1e9, b.band.f_max_hz / 1e9, b.band.count),
                    b.spectrum.values.clone(),
                )
            })
            .collect();
        s.write_text("sweep_svd.svg", &svd_curves_svg("Normalized SVD of H", &series))?;
    }
    println!("cell  band_GHz        M    d_m    snr_dB  exact  within1  median  max");
    for a in &report.aggregates {
        println!(
            "{:>4}  {:>5.2}-{:<6.2}  {:>4}  {:<5}  {:>6}  {:>5.3}  {:>7.3}  {:>6}  {}",
            a.cell,
            a.band.f_min_hz / 1e9,
            a.band.f_max_hz / 1e9,
            a.band.count,
            a.distance_m,
            a.snr_db,
            a.exact_hit_rate,
            a.within_one_bin_rate,
            a.median_bin_error,
            a.max_bin_error
        );
    }
    s.finish("sweep")
}
