use std::f64::consts::{FRAC_PI_2, PI};

use ionmirror::analysis::{entanglement_analytic, entanglement_numeric, witness};
use ionmirror::fock::{
    coherent_overlap, coherent_state, expm_apply, required_dim, CoherentAmplitude, ModeLabel, ModeLayout, Operator,
    StateVector,
};
use ionmirror::interferometer::{
    beam_splitter, outcome_probabilities, run_protocol, DetectorWhich, HybridTwoTermState, DEFAULT_CONVENTION,
};
use ionmirror::ion::{
    build_sideband_hamiltonian, closed_form_ion_state, evolve_ion_conditional, initial_ion_state, p_no_detection_red,
    prepare_ion, prepare_ion_red, IonParams, SidebandKind,
};
use ionmirror::optomech::{
    closed_form_om_state, decay_to_detection, displaced_amplitude, evolve_om_conditional, initial_om_state, OmParams,
};
use ionmirror::scenario::{
    emit, run_scenario, run_sweep, OutputFormat, ResultRow, ScenarioConfig, SweepSpec, SweepValues,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_state(layout: ModeLayout, parts: &[(f64, f64)]) -> StateVector {
    let amps = DVector::from_fn(layout.total_dim(), |i, _| C64::new(parts[i].0, parts[i].1));
    StateVector::new(layout, amps).unwrap()
}

fn field_pair() -> ModeLayout {
    ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::Field2, 3)]).unwrap()
}

fn amplitude_parts(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
}

fn hermitian(dim: usize, parts: &[(f64, f64)]) -> DMatrix<C64> {
    let m = DMatrix::from_fn(dim, dim, |i, j| C64::new(parts[i * dim + j].0, parts[i * dim + j].1));
    (&m + m.adjoint()) * c(0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stored_norm_tracks_amplitudes(parts in amplitude_parts(9), scale in 0.1..3.0f64) {
        let s = random_state(field_pair(), &parts).scaled(c(scale)).unwrap();
        let actual: f64 = s.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((s.stored_norm() - actual).abs() <= 1e-12 * actual);
        let n = s.normalized().unwrap();
        prop_assert!((n.stored_norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn hermitian_generators_preserve_norm(h in amplitude_parts(36), psi in amplitude_parts(6), t in 0.0..10.0f64) {
        let layout = ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::IonElectronic, 2)]).unwrap();
        let gen = Operator::new(layout.clone(), hermitian(6, &h)).unwrap();
        let psi = random_state(layout, &psi).normalized().unwrap();
        // ten periods of the fastest mode
        let out = expm_apply(&gen, 2.0 * PI * t, &psi).unwrap();
        prop_assert!((out.stored_norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn evolution_is_a_semigroup(h in amplitude_parts(36), psi in amplitude_parts(6), t1 in 0.0..3.0f64, t2 in 0.0..3.0f64, decay in 0.0..1.0f64) {
        let layout = ModeLayout::new(&[(ModeLabel::Field1, 3), (ModeLabel::IonElectronic, 2)]).unwrap();
        let mut m = hermitian(6, &h);
        m[(1, 1)] -= C64::new(0.0, decay);
        let gen = Operator::new(layout.clone(), m).unwrap();
        let psi = random_state(layout, &psi).normalized().unwrap();
        let once = expm_apply(&gen, t1 + t2, &psi).unwrap();
        let twice = expm_apply(&gen, t2, &expm_apply(&gen, t1, &psi).unwrap()).unwrap();
        prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-9);
    }

    #[test]
    fn reduced_states_keep_the_trace(parts in amplitude_parts(9)) {
        let s = random_state(field_pair(), &parts);
        for keep in [ModeLabel::Field1, ModeLabel::Field2] {
            let rho = s.partial_trace(&[keep]).unwrap();
            prop_assert!((rho.trace().re - s.stored_norm()).abs() <= 1e-10 * s.stored_norm().max(1.0));
        }
    }

    #[test]
    fn coherent_overlap_matches_gaussian(ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64, bi in -2.0..2.0f64) {
        let (a, b) = (CoherentAmplitude::new(ar, ai), CoherentAmplitude::new(br, bi));
        prop_assume!(a.magnitude() <= 3.0 && b.magnitude() <= 3.0);
        let dim = required_dim(3.0);
        let va = coherent_state(a, dim, ModeLabel::Mirror).unwrap();
        let vb = coherent_state(b, dim, ModeLabel::Mirror).unwrap();
        let expected = (-(a.value() - b.value()).norm_sqr() / 2.0).exp();
        prop_assert!((va.inner(&vb).unwrap().norm() - expected).abs() <= 1e-8);
        prop_assert!((coherent_overlap(a, b).norm() - expected).abs() <= 1e-12);
    }

    #[test]
    fn beam_splitter_preserves_norm(parts in amplitude_parts(9)) {
        let s = random_state(field_pair(), &parts);
        let out = beam_splitter(&s, ModeLabel::Field1, ModeLabel::Field2).unwrap();
        prop_assert!((out.stored_norm() - s.stored_norm()).abs() <= 1e-12 * s.stored_norm());
    }

    #[test]
    fn outcomes_are_exhaustive(parts in amplitude_parts(9)) {
        let s = random_state(field_pair(), &parts).normalized().unwrap();
        let out = beam_splitter(&s, ModeLabel::Field1, ModeLabel::Field2).unwrap();
        prop_assert!((outcome_probabilities(&out).unwrap().total() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn ion_norm_never_grows(theta in 0.0..FRAC_PI_2, gamma in 0.0..2.0f64, t1 in 0.0..3.0f64, dt in 0.0..3.0f64, blue in any::<bool>()) {
        let kind = if blue { SidebandKind::Blue } else { SidebandKind::Red };
        let p = IonParams::dimensionless(gamma, theta);
        let a = evolve_ion_conditional(&p, kind, t1).unwrap().stored_norm();
        let b = evolve_ion_conditional(&p, kind, t1 + dt).unwrap().stored_norm();
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn ion_dynamics_stays_in_its_block(theta in 0.0..FRAC_PI_2, gamma in 0.0..1.0f64, t in 0.0..5.0f64, blue in any::<bool>()) {
        let kind = if blue { SidebandKind::Blue } else { SidebandKind::Red };
        let p = IonParams::dimensionless(gamma, theta);
        let psi = evolve_ion_conditional(&p, kind, t).unwrap();
        let (v0, v1) = (kind.initial_vibration(), kind.exchanged_vibration());
        let allowed = [[0, v0, 1], [1, v1, 0], [0, v0, 0]];
        let mut outside = 0.0;
        for (i, z) in psi.amplitudes().iter().enumerate() {
            let occ = psi.layout().occupations(i);
            if !allowed.iter().any(|a| a[..] == occ[..]) {
                outside += z.norm_sqr();
            }
        }
        prop_assert!(outside.sqrt() <= 1e-12);
        let g = psi.extract(ModeLabel::IonElectronic, 0).unwrap().stored_norm();
        let e = psi.extract(ModeLabel::IonElectronic, 1).unwrap().stored_norm();
        prop_assert!((g + e - psi.stored_norm()).abs() <= 1e-10);
    }

    #[test]
    fn red_success_is_the_no_detection_probability(theta in 0.0..FRAC_PI_2, gamma in 0.0..1.0f64) {
        let p = IonParams::dimensionless(gamma, theta);
        let prep = prepare_ion_red(&p, p.transfer_time()).unwrap();
        prop_assert!((prep.success_probability - p_no_detection_red(&p).unwrap().propagator).abs() <= 1e-10);
        let norm = prep.state.stored_norm();
        prop_assert!((norm - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn photon_sectors_are_conserved(a0 in -2.0..2.0f64, kappa in 0.0..1.5f64, t in 0.0..(2.0 * PI)) {
        let p = OmParams::dimensionless(kappa, 0.0, CoherentAmplitude::real(a0));
        let dim = p.mirror_dim();
        let start = initial_om_state(&p, dim).unwrap();
        let out = evolve_om_conditional(&p, &start, t).unwrap();
        for n in 0..2 {
            let before = start.extract(ModeLabel::Field2, n).unwrap().stored_norm();
            let after = out.extract(ModeLabel::Field2, n).unwrap().stored_norm();
            prop_assert!((before - after).abs() <= 1e-10);
        }
    }

    #[test]
    fn free_mirror_moves_on_a_circle(ar in -2.0..2.0f64, ai in -2.0..2.0f64, t in 0.0..(4.0 * PI)) {
        let p = OmParams::dimensionless(0.0, 0.0, CoherentAmplitude::new(ar, ai));
        prop_assert!((displaced_amplitude(&p, t).norm() - p.alpha0.magnitude()).abs() <= 1e-10);
    }

    #[test]
    fn decay_commutes_with_mirror_displacement(ar in -1.0..1.0f64, ai in -1.0..1.0f64, rate in 0.0..1.0f64, t in 0.0..2.0f64) {
        let p = OmParams::dimensionless(0.7, 0.1, CoherentAmplitude::real(1.0));
        let s = closed_form_om_state(&p, p.half_period()).unwrap().state;
        let dim = s.layout().dim_of(ModeLabel::Mirror).unwrap();
        let d = ionmirror::analysis::displacement_operator(CoherentAmplitude::new(ar, ai), dim).unwrap();
        let one = decay_to_detection(&s.apply_local(ModeLabel::Mirror, d.matrix()).unwrap(), ModeLabel::Field2, rate, t).unwrap();
        let two = decay_to_detection(&s, ModeLabel::Field2, rate, t).unwrap().apply_local(ModeLabel::Mirror, d.matrix()).unwrap();
        prop_assert!(one.max_abs_diff(&two).unwrap() <= 1e-12);
    }

    #[test]
    fn detectors_are_symmetric(theta in 0.0..FRAC_PI_2, gamma in 0.0..0.1f64, rate in 0.0..0.2f64, kappa in 0.0..2.0f64, t in 0.0..1.0f64, blue in any::<bool>()) {
        let kind = if blue { SidebandKind::Blue } else { SidebandKind::Red };
        let ip = IonParams::dimensionless(gamma, theta);
        let op = OmParams::dimensionless(kappa, rate, CoherentAmplitude::real(1.0));
        let ion = prepare_ion(&ip, kind, ip.transfer_time()).unwrap();
        let om = closed_form_om_state(&op, op.half_period()).unwrap();
        let a = run_protocol(&ion, &om, t, (ip.gamma, op.gamma), DetectorWhich::DA, DEFAULT_CONVENTION).unwrap();
        let b = run_protocol(&ion, &om, t, (ip.gamma, op.gamma), DetectorWhich::DB, DEFAULT_CONVENTION).unwrap();
        prop_assert!((a.probabilities.d_a - a.probabilities.d_b).abs() <= 1e-10);
        if let (Some(sa), Some(sb)) = (a.state, b.state) {
            let ea = entanglement_numeric(&sa).unwrap().entropy_bits;
            let eb = entanglement_numeric(&sb).unwrap().entropy_bits;
            prop_assert!((ea - eb).abs() <= 1e-10);
        }
    }

    #[test]
    fn witness_accepts_generated_states(theta in 0.01..(FRAC_PI_2 - 0.01), gamma in 0.0..0.1f64, kappa in 0.0..2.0f64) {
        let ip = IonParams::dimensionless(gamma, theta);
        let op = OmParams::dimensionless(kappa, 0.0, CoherentAmplitude::real(1.0));
        let ion = prepare_ion(&ip, SidebandKind::Red, ip.transfer_time()).unwrap();
        let om = closed_form_om_state(&op, op.half_period()).unwrap();
        let r = run_protocol(&ion, &om, 0.0, (ip.gamma, op.gamma), DetectorWhich::DB, DEFAULT_CONVENTION).unwrap();
        let w = witness(&r.state.unwrap(), CoherentAmplitude::real(1.0)).unwrap();
        prop_assert!(w.post_displacement_vacuum_probability.unwrap() >= 1.0 - 1e-6);
    }
}

#[test]
fn closed_form_equals_propagator_on_a_grid_without_decay() {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let theta = FRAC_PI_2 * i as f64 / 19.0;
        let p = IonParams::dimensionless(0.0, theta);
        for k in 1..=10 {
            let t = 2.0 * p.transfer_time() * k as f64 / 10.0;
            for kind in [SidebandKind::Red, SidebandKind::Blue] {
                let cf = closed_form_ion_state(&p, kind, t).unwrap();
                let num = prepare_ion(&p, kind, t).unwrap();
                worst = worst.max(1.0 - cf.state.fidelity(&num.state).unwrap());
            }
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn sideband_generator_is_hermitian_without_decay() {
    let p = IonParams::dimensionless(0.0, 0.4);
    for kind in [SidebandKind::Red, SidebandKind::Blue] {
        let h = build_sideband_hamiltonian(&p, kind, true).unwrap();
        assert!(h.is_hermitian());
        let psi = initial_ion_state(&p, kind).unwrap();
        assert!((psi.stored_norm() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn entropy_falls_as_branches_overlap() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut last = f64::INFINITY;
    for k in 0..20 {
        // |β1 − β2| chosen so the overlap s runs from 0 to 1
        let s = k as f64 / 19.0;
        let sep = if s == 0.0 { 12.0 } else { (-2.0 * s.ln()).sqrt() };
        let state = HybridTwoTermState {
            c1: c(h),
            beta1: CoherentAmplitude::real(0.5 * sep),
            c2: C64::new(0.0, h),
            beta2: CoherentAmplitude::real(-0.5 * sep),
            vib_labels: (0, 1),
            normalized: true,
        };
        let e = entanglement_analytic(&state).unwrap();
        assert!((e.overlap_s.unwrap().norm() - s).abs() < 1e-9);
        assert!(
            e.entropy_bits <= last + 1e-12,
            "s = {s}: {} after {last}",
            e.entropy_bits
        );
        last = e.entropy_bits;
    }
    assert!(last.abs() < 1e-12);
}

#[test]
fn single_point_sweep_equals_single_run() {
    let cfg = ScenarioConfig {
        kappa: 0.6,
        theta: 0.5,
        gamma_over_eta_g: 0.05,
        ..ScenarioConfig::default()
    };
    let sweep = SweepSpec {
        parameter: "kappa".into(),
        values: SweepValues::List { values: vec![0.6] },
    };
    let rows = run_sweep(&cfg, &sweep).unwrap();
    assert_eq!(rows, vec![run_scenario(&cfg).unwrap()]);
}

#[test]
fn entropy_grows_with_coupling() {
    let cfg = ScenarioConfig::default();
    let sweep = SweepSpec {
        parameter: "kappa".into(),
        values: SweepValues::Log {
            start: 0.05,
            stop: 2.5,
            count: 8,
        },
    };
    let rows = run_sweep(&cfg, &sweep).unwrap();
    let entropies: Vec<f64> = rows.iter().map(|r| r.entropy_bits.unwrap()).collect();
    assert!(entropies.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{entropies:?}");
    assert!((entropies[7] - 1.0).abs() < 1e-3);
}

#[test]
fn preparation_success_follows_the_formula() {
    let cfg = ScenarioConfig {
        gamma_over_eta_g: 0.2,
        ..ScenarioConfig::default()
    };
    let sweep = SweepSpec {
        parameter: "theta".into(),
        values: SweepValues::Linear {
            start: 0.0,
            stop: FRAC_PI_2,
            count: 7,
        },
    };
    for row in run_sweep(&cfg, &sweep).unwrap() {
        let p = IonParams::dimensionless(0.2, row.theta);
        let expected = p_no_detection_red(&p).unwrap().propagator;
        assert!((row.success_probability_preparation - expected).abs() < 1e-12);
    }
}

#[test]
fn json_output_round_trips() {
    let cfg = ScenarioConfig {
        sideband: SidebandKind::Blue,
        alpha0: C64::new(0.8, -0.3),
        truncation_overrides: ionmirror::scenario::TruncationOverrides { mirror: Some(40) },
        ..ScenarioConfig::default()
    };
    let rows = vec![run_scenario(&cfg).unwrap()];
    let mut buf = Vec::new();
    emit(&rows, OutputFormat::Json, &mut buf).unwrap();
    let back: Vec<ResultRow> = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, rows);
}
