use std::path::{Path, PathBuf};

use conformal_aoa::estimator::NormalEquations;
use conformal_aoa::forward::{pattern_sweep, LayoutParams, PortId, SourceSpec};
use conformal_aoa::io::{
    decode_table, dump_config, encode_table, load_config, load_pattern, load_result,
    load_spectrum, load_table_binary, load_vector, parse_config, parse_result, parse_spectrum,
    parse_table, parse_vector, save_config, save_pattern, save_result, save_spectrum,
    save_table_binary, save_vector, spectrum_csv, table_csv, vector_csv, ApertureSpec,
    PatternFile, ResultFile,
};
use conformal_aoa::sensing::{add_noise, measure, simulate_sensing_matrix};
use conformal_aoa::{svd_spectrum, AngleGrid, Error, ExperimentConfig, FrequencyGrid, SolverSettings};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn default_pattern() -> PatternFile {
    let (a1, _) = LayoutParams::default().generate_pair(1).unwrap();
    let freqs = FrequencyGrid::new(8.5e9, 11.5e9, 301).unwrap();
    let angles = AngleGrid::new(72).unwrap();
    let values = pattern_sweep(&a1, &angles, &freqs, 0.16).unwrap();
    PatternFile::pattern(PortId::One, 0.16, freqs, angles, values)
}

#[test]
fn full_size_pattern_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = default_pattern();
    let path = dir.path().join("nested/pattern_port1.csv");
    save_pattern(&path, &p).unwrap();
    let back = load_pattern(&path).unwrap();
    assert_eq!(back.values.dim(), (301, 72));
    assert!(back
        .values
        .iter()
        .zip(p.values.iter())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    assert_eq!(back, p);

    let bin = dir.path().join("pattern_port1.bin");
    save_table_binary(&bin, &p).unwrap();
    assert_eq!(load_table_binary(&bin).unwrap(), p);
}

#[test]
fn shuffled_external_rows_give_the_same_pattern() {
    let p = default_pattern();
    let text = table_csv(&p);
    let mut lines: Vec<&str> = text.lines().collect();
    let split = lines.iter().position(|l| l.starts_with("freq_hz")).unwrap() + 1;
    let (head, rows) = lines.split_at_mut(split);
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
    // External tools may also write shortest round-trip decimals and CRLF line endings.
    let rows: Vec<String> = rows
        .iter()
        .map(|r| {
            r.split(',')
                .map(|v| v.parse::<f64>().unwrap().to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    let mut external = head.join("\r\n");
    external.push_str("\r\n");
    external.push_str(&rows.join("\r\n"));
    assert_eq!(parse_table(&external).unwrap(), p);
}

#[test]
fn sensing_matrix_vector_and_result_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (a1, a2) = LayoutParams::default().generate_pair(1).unwrap();
    let freqs = FrequencyGrid::new(8.5e9, 11.5e9, 61).unwrap();
    let angles = AngleGrid::new(72).unwrap();
    let h = simulate_sensing_matrix((&a1, &a2), &freqs, &angles, 0.16).unwrap();

    let hp = dir.path().join("h.csv");
    save_pattern(&hp, &PatternFile::from_matrix(&h)).unwrap();
    assert_eq!(load_pattern(&hp).unwrap().into_matrix().unwrap(), h);
    assert_eq!(decode_table(&encode_table(&PatternFile::from_matrix(&h))).unwrap().into_matrix().unwrap(), h);

    let src = SourceSpec::new(135.0, 0.21).with_amplitude(num_complex::Complex64::new(0.3, -2.0));
    let g = add_noise(&measure(&src, &freqs, (&a1, &a2)).unwrap(), 12.5, 77).unwrap();
    let gp = dir.path().join("g.csv");
    save_vector(&gp, &g).unwrap();
    assert_eq!(load_vector(&gp).unwrap(), g);
    assert_eq!(parse_vector(&vector_csv(&g)).unwrap(), g);
    let clean = measure(&src, &freqs, (&a1, &a2)).unwrap();
    assert_eq!(parse_vector(&vector_csv(&clean)).unwrap(), clean);

    let r = NormalEquations::new(&h, SolverSettings::default()).unwrap().estimate(&g).unwrap();
    let file = ResultFile::new(r, g.truth, g.noise);
    let rp = dir.path().join("result.json");
    save_result(&rp, &file).unwrap();
    assert_eq!(load_result(&rp).unwrap(), file);

    let s = svd_spectrum(&h).unwrap();
    let sp = dir.path().join("svd.csv");
    save_spectrum(&sp, &s).unwrap();
    assert_eq!(load_spectrum(&sp).unwrap(), s);
    assert_eq!(parse_spectrum(&spectrum_csv(&s)).unwrap(), s);
}

#[test]
fn config_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config("rng_seed = 9\n[sweep]\nsnr_db = [inf, 20.0]\ntrials = 3\n").unwrap();
    let (a1, a2) = cfg.build_apertures().unwrap();
    cfg.apertures = vec![ApertureSpec::from_aperture(&a1), ApertureSpec::from_aperture(&a2)];
    let path = dir.path().join("cfg.toml");
    save_config(&path, &cfg).unwrap();
    let back = load_config(&path).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(parse_config(&dump_config(&back).unwrap()).unwrap(), cfg);
    assert_eq!(parse_config("").unwrap(), ExperimentConfig::default());
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/malformed").join(name)
}

#[derive(Debug, PartialEq)]
enum Class {
    Parse,
    Config,
}

fn classify(e: &Error) -> Option<Class> {
    match e {
        Error::Parse { .. } => Some(Class::Parse),
        Error::Config { .. } => Some(Class::Config),
        _ => None,
    }
}

#[test]
fn malformed_corpus_yields_structured_errors() {
    let cases: &[(&str, Class, Option<&str>)] = &[
        ("pattern_missing_freq_count.csv", Class::Parse, Some("freq_count")),
        ("pattern_bad_number.csv", Class::Parse, Some("line 14")),
        ("pattern_short_row.csv", Class::Parse, Some("line 14")),
        ("pattern_off_grid_frequency.csv", Class::Parse, Some("line 14")),
        ("pattern_duplicate_cell.csv", Class::Parse, Some("line 12")),
        ("pattern_missing_cell.csv", Class::Parse, Some("angle 180")),
        ("pattern_nan_value.csv", Class::Parse, Some("line 14")),
        ("pattern_wrong_columns.csv", Class::Parse, None),
        ("pattern_future_version.csv", Class::Parse, Some("format_version")),
        ("pattern_repeated_key.csv", Class::Parse, Some("angle_count")),
        ("pattern_unknown_kind.csv", Class::Parse, Some("hologram")),
        ("empty.csv", Class::Parse, None),
        ("vector_half_truth.csv", Class::Parse, Some("truth")),
        ("vector_missing_frequency.csv", Class::Parse, Some("10000000000")),
        ("config_syntax_error.toml", Class::Parse, Some("line 2")),
        ("config_unknown_key.toml", Class::Config, Some("layout.radius_mm")),
        ("config_negative_radius.toml", Class::Config, Some("layout.radius_m")),
        ("config_wrong_type.toml", Class::Config, Some("angle_count")),
        ("result_truncated.json", Class::Parse, None),
        ("spectrum_not_descending.csv", Class::Parse, Some("line 6")),
        ("table_bad_magic.bin", Class::Parse, Some("magic")),
        ("table_truncated.bin", Class::Parse, Some("payload")),
    ];
    assert!(cases.len() >= 10);
    for (name, class, needle) in cases {
        let path = fixture(name);
        let err = if name.starts_with("config") {
            load_config(&path).map(|_| ())
        } else if name.starts_with("vector") {
            load_vector(&path).map(|_| ())
        } else if name.starts_with("result") {
            load_result(&path).map(|_| ())
        } else if name.starts_with("spectrum") {
            load_spectrum(&path).map(|_| ())
        } else if name.ends_with(".bin") {
            load_table_binary(&path).map(|_| ())
        } else {
            load_pattern(&path).map(|_| ())
        }
        .expect_err(name);
        assert_eq!(classify(&err).as_ref(), Some(class), "{name}: {err}");
        let text = err.to_string();
        if let Some(n) = needle {
            assert!(text.contains(n), "{name}: `{text}` lacks `{n}`");
        }
        if *class == Class::Parse {
            assert!(text.contains(name), "{name}: `{text}` does not name the file");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parsers_never_panic_on_arbitrary_text(text in "(?s).{0,400}") {
        let _ = parse_table(&text);
        let _ = parse_vector(&text);
        let _ = parse_config(&text);
        let _ = parse_result(&text);
        let _ = parse_spectrum(&text);
        let _ = decode_table(text.as_bytes());
    }

    #[test]
    fn parsers_never_panic_on_corrupted_files(cut in 0usize..2000, byte in any::<u8>(), at in 0usize..2000) {
        let freqs = FrequencyGrid::new(9e9, 10e9, 3).unwrap();
        let angles = AngleGrid::new(4).unwrap();
        let values = ndarray::Array2::from_shape_fn((3, 4), |(i, j)| {
            num_complex::Complex64::new(i as f64, j as f64)
        });
        let p = PatternFile::pattern(PortId::Two, 0.2, freqs, angles, values);
        let mut text = table_csv(&p).into_bytes();
        if at < text.len() {
            text[at] = byte;
        }
        text.truncate(cut.min(text.len()));
        let s = String::from_utf8_lossy(&text);
        let _ = parse_table(&s);
        let mut bin = encode_table(&p);
        if at < bin.len() {
            bin[at] = byte;
        }
        bin.truncate(cut.min(bin.len()));
        let _ = decode_table(&bin);
    }
}
