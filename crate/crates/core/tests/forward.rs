use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use conformal_aoa::forward::{
    element_gain, guided_amplitude, guided_wavenumber, lorentzian_response, pattern_sweep,
    radiated_fraction, received_signal, transmission, ApertureConfig, FeedSide, GainModel,
    LayoutParams, MetaElement, PortId, SourceSpec,
};
use conformal_aoa::{AngleGrid, Error, FrequencyGrid, SPEED_OF_LIGHT};
use num_complex::Complex64;
use proptest::prelude::*;

fn port1_with(elements: Vec<MetaElement>, gain: GainModel) -> ApertureConfig {
    let mut geometry = LayoutParams::default().geometry(PortId::One);
    geometry.gain = gain;
    ApertureConfig::new(geometry, elements).unwrap()
}

#[test]
fn default_cutoff_is_six_point_seven_four_ghz() {
    let (a1, a2) = LayoutParams::default().generate_pair(1).unwrap();
    for ap in [&a1, &a2] {
        // c / (2 * 0.015 * sqrt(2.2))
        assert!((ap.cutoff_freq() - 6.737_334_465e9).abs() < 1.0);
        assert!((ap.cutoff_freq() / 6.74e9 - 1.0).abs() < 0.01);
    }
}

#[test]
fn guided_wavenumber_oracles() {
    let ap = port1_with(Vec::new(), GainModel::default());
    let fc = ap.cutoff_freq();
    let near = guided_wavenumber(&ap, fc * (1.0 + 1e-9)).unwrap();
    assert!(near > 0.0 && near < 0.5, "{near}");

    // 10 GHz: k0 = 209.5845021 rad/m, pi / w = 209.4395102 rad/m
    let k0 = 2.0 * PI * 10e9 / SPEED_OF_LIGHT;
    assert!((k0 - 209.584_502_1).abs() < 1e-6);
    let expected = (2.2 * 209.584_502_1f64.powi(2) - 209.439_510_2f64.powi(2)).sqrt();
    let beta = guided_wavenumber(&ap, 10e9).unwrap();
    assert!((beta - expected).abs() < 1e-5, "{beta} vs {expected}");
    assert!((beta - 229.720_594).abs() < 1e-5);

    assert!(matches!(
        guided_wavenumber(&ap, 6.74e9 - 1e7),
        Err(Error::BelowCutoff { .. })
    ));
    assert!(matches!(guided_wavenumber(&ap, f64::NAN), Err(Error::Domain(_))));
}

#[test]
fn guided_amplitude_first_element_and_depletion_chain() {
    let f0 = 10e9;
    let feed = FRAC_PI_2;
    let e1 = MetaElement::calibrated(f0, 40.0, 0.35, feed + 0.2, FeedSide::After).unwrap();
    let e2 = MetaElement::calibrated(f0, 40.0, 0.35, feed + 0.5, FeedSide::After).unwrap();
    let ap = port1_with(vec![e2, e1], GainModel::default());

    let beta = guided_wavenumber(&ap, f0).unwrap();
    let g1 = guided_amplitude(&ap, 0, f0).unwrap();
    assert!((g1.norm() - 1.0).abs() < 1e-15);
    let expected_phase = Complex64::from_polar(1.0, -beta * 0.045 * 0.2);
    assert!((g1 - expected_phase).norm() < 1e-12);

    let g2 = guided_amplitude(&ap, 1, f0).unwrap();
    assert!((g2.norm_sqr() - 0.65).abs() < 1e-12, "{}", g2.norm_sqr());

    assert!(matches!(guided_amplitude(&ap, 2, f0), Err(Error::Index { index: 2, len: 2 })));
}

#[test]
fn depletion_is_monotone_on_each_side() {
    let (a1, _) = LayoutParams::default().generate_pair(3).unwrap();
    for f in FrequencyGrid::new(8.5e9, 11.5e9, 31).unwrap().values() {
        for side in [FeedSide::Before, FeedSide::After] {
            let mags: Vec<f64> = (0..a1.elements().len())
                .filter(|&i| a1.elements()[i].side == side)
                .map(|i| guided_amplitude(&a1, i, *f).unwrap().norm())
                .collect();
            assert!(mags[0] == 1.0);
            assert!(mags.windows(2).all(|w| w[1] <= w[0]));
            assert!(mags.iter().all(|&m| m > 0.0 && m <= 1.0));
        }
    }
}

#[test]
fn element_gain_examples() {
    let model = GainModel::hard_shadow(1.0);
    let e = MetaElement::calibrated(10e9, 30.0, 0.35, FRAC_PI_2, FeedSide::Before).unwrap();
    let ap = port1_with(vec![e], model);
    let boresight = SourceSpec::new(90.0, 0.16);
    assert!((element_gain(&e, &ap, &boresight) - 1.0).abs() < 1e-15);
    let behind = SourceSpec::new(270.0, 0.16);
    assert_eq!(element_gain(&e, &ap, &behind), 0.0);

    // A source placed so that psi = pi/3 exactly: from the element at (0, R), go a distance
    // L along the direction at pi/3 from the +y normal.
    let (r, l) = (0.045, 0.2);
    let (sx, sy) = (l * FRAC_PI_3.sin(), r + l * FRAC_PI_3.cos());
    let src = SourceSpec::new(sy.atan2(sx).to_degrees(), sx.hypot(sy));
    assert!((element_gain(&e, &ap, &src) - 0.5).abs() < 1e-12);
}

#[test]
fn creeping_wave_floor_is_continuous_at_the_shadow_boundary() {
    let g = GainModel::default();
    assert!((g.gain(FRAC_PI_2 - 1e-9) - g.shadow_floor).abs() < 1e-8);
    assert!((g.gain(FRAC_PI_2 + 1e-9) - g.shadow_floor).abs() < 1e-8);
    assert!((g.gain(PI) - 0.3 * (-0.5 * FRAC_PI_2).exp()).abs() < 1e-15);
    assert_eq!(GainModel::hard_shadow(2.0).gain(PI), 0.0);
}

#[test]
fn single_element_spherical_wave_oracle() {
    // Element at azimuth 90 deg, source on the same radial line 0.16 m beyond it: psi = 0 and
    // r = 0.16 m. With exact c, k r = 2 pi 1e10 / 299792458 * 0.16 = 33.533520.
    let f = 10e9;
    let e = MetaElement::calibrated(9.9e9, 30.0, 0.35, FRAC_PI_2 + 0.1, FeedSide::After).unwrap();
    let mut ap = port1_with(vec![e], GainModel::hard_shadow(1.0));
    let src = SourceSpec::new((FRAC_PI_2 + 0.1).to_degrees(), 0.045 + 0.16);
    let k = 2.0 * PI * f / SPEED_OF_LIGHT;
    assert!((k * 0.16 - 33.533_520).abs() < 1e-5);

    let alpha = lorentzian_response(&e, f).unwrap();
    let g = guided_amplitude(&ap, 0, f).unwrap();
    let expected = g * alpha * Complex64::from_polar(1.0 / 0.16, -k * 0.16);
    let v = received_signal(&ap, &src, f).unwrap();
    assert!((v - expected).norm() <= 1e-9 * expected.norm(), "{v} vs {expected}");

    // Linearity in the amplitude is exact.
    let c = Complex64::new(-0.7, 2.5);
    assert_eq!(received_signal(&ap, &src.with_amplitude(c), f).unwrap(), c * v);

    ap = ap.with_elements(Vec::new()).unwrap();
    assert_eq!(received_signal(&ap, &src, f).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn hard_shadow_elements_contribute_nothing() {
    let params = LayoutParams {
        gain: GainModel::hard_shadow(1.0),
        ..LayoutParams::default()
    };
    let a1 = params.generate(PortId::One, 9).unwrap();
    // Source straight below: every port-1 element faces away.
    let src = SourceSpec::new(270.0, 0.2);
    for e in a1.elements() {
        assert_eq!(element_gain(e, &a1, &src), 0.0);
    }
    assert_eq!(received_signal(&a1, &src, 10e9).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn source_inside_cylinder_is_rejected() {
    let (a1, _) = LayoutParams::default().generate_pair(1).unwrap();
    assert!(received_signal(&a1, &SourceSpec::new(10.0, 0.04), 10e9).is_err());
}

#[test]
fn pattern_sweep_matches_received_signal_and_permutes_with_angles() {
    let (a1, _) = LayoutParams::default().generate_pair(2).unwrap();
    let freqs = FrequencyGrid::new(9e9, 11e9, 7).unwrap();
    let angles = AngleGrid::new(12).unwrap();
    let p = pattern_sweep(&a1, &angles, &freqs, 0.2).unwrap();
    for (i, &f) in freqs.values().iter().enumerate() {
        for (j, &a) in angles.values_deg().iter().enumerate() {
            assert_eq!(p[[i, j]], received_signal(&a1, &SourceSpec::new(a, 0.2), f).unwrap());
        }
    }
    let one_f = FrequencyGrid::new(10e9, 10e9, 1).unwrap();
    let one_a = AngleGrid::from_values(vec![40.0]).unwrap();
    let single = pattern_sweep(&a1, &one_a, &one_f, 0.2).unwrap();
    assert_eq!(single.dim(), (1, 1));
    assert_eq!(single[[0, 0]], received_signal(&a1, &SourceSpec::new(40.0, 0.2), 10e9).unwrap());

    let perm = [5, 0, 11, 3, 2, 1, 4, 10, 9, 8, 6, 7];
    let shuffled = AngleGrid::from_values(perm.iter().map(|&j| angles.values_deg()[j]).collect())
        .unwrap();
    let q = pattern_sweep(&a1, &shuffled, &freqs, 0.2).unwrap();
    for (k, &j) in perm.iter().enumerate() {
        assert_eq!(q.column(k), p.column(j));
    }
}

#[test]
fn frequency_diversity_of_port_one() {
    let (a1, _) = LayoutParams::default().generate_pair(1).unwrap();
    let freqs = FrequencyGrid::new(8.5e9, 11.5e9, 301).unwrap();
    let angles = AngleGrid::new(72).unwrap();
    let p = pattern_sweep(&a1, &angles, &freqs, 0.16).unwrap();
    let mut peaks: Vec<usize> = p
        .rows()
        .into_iter()
        .map(|row| {
            (0..row.len())
                .max_by(|&a, &b| row[a].norm().total_cmp(&row[b].norm()))
                .unwrap()
        })
        .collect();
    peaks.sort_unstable();
    peaks.dedup();
    assert!(peaks.len() >= 10, "only {} distinct peak angles", peaks.len());
}

#[test]
fn layout_respects_band_arc_and_calibration() {
    let params = LayoutParams::default();
    for seed in 0..5 {
        for port in [PortId::One, PortId::Two] {
            let ap = params.generate(port, seed).unwrap();
            let (lo, hi) = ap.geometry().arc_span;
            assert_eq!(ap.elements().len(), 17);
            let before = ap.elements().iter().filter(|e| e.side == FeedSide::Before).count();
            assert_eq!(before, 8);
            for e in ap.elements() {
                assert!((8.5e9..=11.5e9).contains(&e.resonance_freq));
                assert!((25.0..=60.0).contains(&e.quality_factor));
                assert!((lo..=hi).contains(&e.azimuth));
                let frac = radiated_fraction(e, e.resonance_freq).unwrap();
                assert!(frac > 0.30 - 1e-12 && frac < 0.40 + 1e-12);
            }
            // Feed order: arc length grows within each side.
            for side in [FeedSide::Before, FeedSide::After] {
                let s: Vec<f64> = (0..17)
                    .filter(|&i| ap.elements()[i].side == side)
                    .map(|i| ap.arc_length(i).unwrap())
                    .collect();
                assert!(s.windows(2).all(|w| w[0] <= w[1]));
            }
        }
        assert_eq!(params.generate_pair(seed).unwrap(), params.generate_pair(seed).unwrap());
    }
}

#[test]
fn bending_detuning_stays_within_one_percent() {
    let base = LayoutParams::default();
    let bent = LayoutParams {
        bending_detuning: true,
        ..base.clone()
    };
    let a = base.generate(PortId::Two, 4).unwrap();
    let b = bent.generate(PortId::Two, 4).unwrap();
    assert_ne!(a, b);
    for e in b.elements() {
        assert!((8.5e9..=11.5e9).contains(&e.resonance_freq));
    }
}

proptest! {
    #[test]
    fn energy_is_conserved_everywhere(
        f0 in 8.5e9f64..11.5e9,
        q in 25.0f64..60.0,
        p in 0.30f64..0.40,
        f in 1e8f64..3e10,
    ) {
        let e = MetaElement::calibrated(f0, q, p, 0.1, FeedSide::Before).unwrap();
        let r = radiated_fraction(&e, f).unwrap();
        let t = transmission(&e, f).unwrap();
        prop_assert!((0.0..1.0).contains(&r));
        prop_assert!((t * t + r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn received_signal_is_linear_in_coupling(scale in 0.1f64..1.5, angle in 0.0f64..360.0) {
        let e = MetaElement::calibrated(10e9, 30.0, 0.35, 1.0, FeedSide::Before).unwrap();
        let scaled = MetaElement { coupling_amp: e.coupling_amp * scale, ..e };
        let src = SourceSpec::new(angle, 0.2);
        let a = received_signal(&port1_with(vec![e], GainModel::default()), &src, 9.8e9).unwrap();
        let b = received_signal(&port1_with(vec![scaled], GainModel::default()), &src, 9.8e9)
            .unwrap();
        prop_assert!((b - a * scale).norm() <= 1e-12 * (1.0 + b.norm()));
    }
}
