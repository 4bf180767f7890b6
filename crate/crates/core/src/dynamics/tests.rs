use super::*;
use crate::device::{effective_coupling, MODE_Q1, MODE_Q2};
use crate::fock::level_projector;
use crate::spectroscopy::find_dressed_switch_off;

fn measured() -> DeviceParams {
    DeviceParams::default()
}

fn qubits_only(g12: f64) -> DeviceParams {
    DeviceParams {
        g_a1: 0.0,
        g_a2: 0.0,
        g_b1: 0.0,
        g_b2: 0.0,
        g_ab: 0.0,
        g_12: g12,
        ..measured()
    }
}

fn space2() -> HilbertSpace {
    HilbertSpace::new(&[2; 4]).unwrap()
}

fn projector(space: &HilbertSpace, mode: usize) -> CMatrix {
    level_projector(space, mode, 1).unwrap().into_matrix()
}

fn excited_q2(space: &HilbertSpace) -> DensityState {
    DensityState::vacuum(space.clone())
        .flipped(Qubit::Two)
        .unwrap()
}

fn hold(point: OperatingPoint, duration: f64) -> PulseSchedule {
    PulseSchedule {
        stages: vec![Stage {
            duration_ns: duration,
            point,
            prep: None,
        }],
        readout_stage: 0,
        fixed_interval_ns: None,
    }
}

#[test]
fn lifetime_limited_qubits_only_relax() {
    let p = DeviceParams {
        t1_qubit1: 10.0,
        t2_qubit1: 20.0,
        t1_qubit2: 5.0,
        t2_qubit2: 10.0,
        ..measured()
    };
    let ops = collapse_operators(&p, &space2()).unwrap();
    let labels: Vec<&str> = ops.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, vec!["relax_q1", "relax_q2"]);
    assert!((ops[0].rate - 1e-4).abs() < 1e-18);
}

#[test]
fn dephasing_rate_from_t1_t2() {
    let ops = collapse_operators(&measured(), &space2()).unwrap();
    let dephase = ops.iter().find(|c| c.label == "dephase_q1").unwrap();
    // 1/T_phi = 1/1.5 - 1/20 per µs; the operator carries twice that.
    let gamma_phi = (1.0 / 1.5 - 1.0 / 20.0) * 1e-3;
    assert!((dephase.rate - 2.0 * gamma_phi).abs() < 1e-15);
    let n = number_operator(&space2(), MODE_Q1).unwrap().into_matrix();
    let expected = n * C64::new((2.0 * gamma_phi).sqrt(), 0.0);
    assert!((&dephase.operator - expected).norm() < 1e-15);
}

#[test]
fn lossless_device_has_no_collapse_operators() {
    assert!(collapse_operators(&measured().lossless(), &space2())
        .unwrap()
        .is_empty());
    let p = DeviceParams {
        resonator_t1_a: Some(2.0),
        ..measured().lossless()
    };
    let ops = collapse_operators(&p, &space2()).unwrap();
    assert_eq!(ops.len(), 1);
    assert_eq!(ops[0].label, "loss_a");
}

#[test]
fn t2_above_twice_t1_is_rejected() {
    let p = DeviceParams {
        t2_qubit2: 25.0,
        ..measured()
    };
    assert!(matches!(
        collapse_operators(&p, &space2()),
        Err(Error::Config(_))
    ));
}

#[test]
fn decoupled_excited_qubit_stays_put() {
    let s = space2();
    let p = qubits_only(0.0).lossless();
    let obs: Vec<Observable> = (0..4)
        .map(|m| {
            Observable::new(
                format!("n{m}"),
                number_operator(&s, m).unwrap().into_matrix(),
            )
        })
        .collect();
    let point = OperatingPoint::new(4.6, 4.6).unwrap();
    let series = evolve(
        &p,
        &hold(point, 200.0),
        &excited_q2(&s),
        &s,
        &obs,
        &IntegratorSettings::default(),
    )
    .unwrap();
    for (k, values) in series.values.iter().enumerate() {
        let expected = if k == MODE_Q2 { 1.0 } else { 0.0 };
        assert!(
            values.iter().all(|v| (v - expected).abs() < 1e-10),
            "mode {k}"
        );
    }
}

#[test]
fn resonant_two_level_exchange_matches_closed_form() {
    let s = space2();
    let g = 0.003;
    let p = qubits_only(g).lossless();
    let point = OperatingPoint::co_tuned(4.6).unwrap();
    let obs = [Observable::new("p1", projector(&s, MODE_Q1))];
    let settings = IntegratorSettings {
        sample_interval_ns: Some(5.0),
        ..Default::default()
    };
    let series = evolve(
        &p,
        &hold(point, 200.0),
        &excited_q2(&s),
        &s,
        &obs,
        &settings,
    )
    .unwrap();
    for (t, p1) in series.times.iter().zip(&series.values[0]) {
        let oracle = (std::f64::consts::TAU * g * t).sin().powi(2);
        // Counter-rotating terms shift this at order (g/Σ)².
        assert!((p1 - oracle).abs() < 1e-5, "t = {t}: {p1} vs {oracle}");
        assert!((p1 - two_level_transfer(g * 1e3, 0.0, *t)).abs() < 1e-5);
    }
}

#[test]
fn relaxation_is_exponential() {
    let s = space2();
    let t1_us = 0.2;
    let p = DeviceParams {
        t1_qubit2: t1_us,
        t2_qubit2: 2.0 * t1_us,
        ..qubits_only(0.0).lossless()
    };
    let point = OperatingPoint::new(4.5, 4.7).unwrap();
    let obs = [Observable::new("p2", projector(&s, MODE_Q2))];
    let t1 = t1_us * 1e3;
    let settings = IntegratorSettings {
        sample_interval_ns: Some(t1 / 4.0),
        ..Default::default()
    };
    let series = evolve(&p, &hold(point, t1), &excited_q2(&s), &s, &obs, &settings).unwrap();
    let last = *series.values[0].last().unwrap();
    assert!((series.times.last().unwrap() - t1).abs() < 1e-9);
    assert!((last - (-1.0_f64).exp()).abs() < 1e-6, "{last}");
}

#[test]
fn open_system_invariants_hold_along_the_schedule() {
    let s = space2();
    let schedule = PulseSchedule::vacuum_rabi(
        DEFAULT_BIAS,
        OperatingPoint::co_tuned(4.58).unwrap(),
        300.0,
        Some(500.0),
    );
    let series = evolve(
        &measured(),
        &schedule,
        &DensityState::vacuum(s.clone()),
        &s,
        &[],
        &IntegratorSettings::default(),
    )
    .unwrap();
    let d = &series.diagnostics;
    assert!(d.max_trace_drift < 1e-8, "{d:?}");
    assert!(d.min_eigenvalue >= -1e-8, "{d:?}");
    assert!(d.max_hermitian_defect < 1e-10, "{d:?}");
    assert!(series.final_state.validate().is_ok());
    assert!((series.times.last().unwrap() - 500.0).abs() < 1e-9);
}

#[test]
fn purity_is_constant_without_dissipation() {
    let s = space2();
    let obs = [Observable::new("p1", projector(&s, MODE_Q1))];
    let point = OperatingPoint::co_tuned(4.60).unwrap();
    let p = measured().lossless();
    let settings = IntegratorSettings {
        sample_interval_ns: Some(50.0),
        ..Default::default()
    };
    let initial = excited_q2(&s);
    let series = evolve(&p, &hold(point, 400.0), &initial, &s, &obs, &settings).unwrap();
    assert!((series.final_state.purity() - 1.0).abs() < 1e-8);
    // Mixed start: purity keeps its initial value.
    let mixed = DensityState::new(
        s.clone(),
        (initial.matrix() + DensityState::vacuum(s.clone()).matrix()) * C64::new(0.5, 0.0),
    )
    .unwrap();
    let series = evolve(&p, &hold(point, 400.0), &mixed, &s, &obs, &settings).unwrap();
    assert!((series.final_state.purity() - 0.5).abs() < 1e-8);
}

fn total_excitation(space: &HilbertSpace) -> CMatrix {
    (0..4)
        .map(|m| number_operator(space, m).unwrap().into_matrix())
        .fold(
            CMatrix::zeros(space.total_dim(), space.total_dim()),
            |a, b| a + b,
        )
}

#[test]
fn excitation_number_conservation() {
    let s = space2();
    let p = measured().lossless();
    let point = OperatingPoint::co_tuned(4.60).unwrap();
    let h = HamiltonianTerms::new(&s)
        .unwrap()
        .assemble(&p, &point)
        .unwrap()
        .into_matrix();
    let n_total = total_excitation(&s);
    let count = |i: usize| s.occupations(i).iter().sum::<usize>();
    // Rotating-wave reduced model: drop every element that changes the
    // excitation number.
    let h_rwa = CMatrix::from_fn(h.nrows(), h.ncols(), |i, j| {
        if count(i) == count(j) {
            h[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let rho0 = excited_q2(&s).matrix().clone();
    for (ham, bound) in [(&h_rwa, 1e-8), (&h, 1e-3)] {
        let mut ev = Evolver::new(Lindbladian::new(ham, &[]).unwrap(), 0.002);
        let mut rho = rho0.clone();
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            rho = ev.advance(&rho, 10.0);
            worst = worst.max(((&n_total * &rho).trace().re - 1.0).abs());
        }
        assert!(worst < bound, "drift {worst} vs bound {bound}");
    }
}

#[test]
fn halving_the_step_changes_populations_below_1e_6() {
    let s = space2();
    let schedule = PulseSchedule::vacuum_rabi(
        DEFAULT_BIAS,
        OperatingPoint::new(4.583, 4.58).unwrap(),
        250.0,
        None,
    );
    let obs = [Observable::new("p1", projector(&s, MODE_Q1))];
    let run = |h: Option<f64>| {
        let settings = IntegratorSettings {
            max_step_ns: h,
            sample_interval_ns: Some(10.0),
        };
        evolve(
            &measured(),
            &schedule,
            &DensityState::vacuum(s.clone()),
            &s,
            &obs,
            &settings,
        )
        .unwrap()
    };
    let coarse = run(None);
    let fine = run(Some(coarse.diagnostics.step_ns / 2.0));
    for (a, b) in coarse.values[0].iter().zip(&fine.values[0]) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn default_step_rule() {
    assert_eq!(default_step(0.0), 0.01);
    assert_eq!(default_step(0.1), 0.01);
    assert!((default_step(10.0) - 5e-4).abs() < 1e-18);
}

#[test]
fn transfer_formula_examples() {
    for g in [0.5, 3.0, 7.0] {
        let t_swap = 1.0 / (4.0 * g * 1e-3);
        assert!((two_level_transfer(g, 0.0, t_swap) - 1.0).abs() < 1e-12);
        // Δ = 2g: the peak is one half.
        let w = (8.0_f64).sqrt() * g * 1e-3;
        assert!((two_level_transfer(g, 2.0 * g, 1.0 / (2.0 * w)) - 0.5).abs() < 1e-12);
    }
    assert_eq!(two_level_transfer(0.0, 0.0, 100.0), 0.0);
    assert_eq!(two_level_transfer(0.0, 5.0, 100.0), 0.0);
    assert!((two_level_transfer(3.0, 0.0, 1.0 / 0.012) - 1.0).abs() < 1e-12);
}

#[test]
fn contrast_examples() {
    let p = [0.0, 0.25, 1.0];
    assert_eq!(contrast_map(&p, 1.0, 0.0).unwrap(), p.to_vec());
    assert_eq!(contrast_map(&p, 0.0, 0.3).unwrap(), vec![0.3; 3]);
    assert_eq!(contrast_map(&p, -2.0, 0.0).unwrap(), vec![-0.0, -0.5, -2.0]);
    assert!(contrast_map(&p, f64::NAN, 0.0).is_err());
}

#[test]
fn schedule_validation() {
    let bias = DEFAULT_BIAS;
    let point = OperatingPoint::co_tuned(4.58).unwrap();
    assert!(PulseSchedule::vacuum_rabi(bias, point, 100.0, Some(50.0))
        .validate()
        .is_err());
    assert!(PulseSchedule::vacuum_rabi(bias, point, -1.0, None)
        .validate()
        .is_err());
    let empty = PulseSchedule {
        stages: vec![],
        readout_stage: 0,
        fixed_interval_ns: None,
    };
    assert!(empty.validate().is_err());
    let padded = PulseSchedule::vacuum_rabi(bias, point, 100.0, Some(1200.0));
    let stages = padded.resolved_stages();
    assert_eq!(stages.len(), 3);
    assert_eq!(stages[2].point, bias);
    assert!((padded.total_duration() - 1200.0).abs() < 1e-12);
}

#[test]
fn density_state_validation() {
    let s = space2();
    let bad = DensityState::vacuum(s.clone()).matrix() * C64::new(2.0, 0.0);
    assert!(DensityState::new(s.clone(), bad).is_err());
    let mut skew = DensityState::vacuum(s.clone()).matrix().clone();
    skew[(0, 1)] = C64::new(0.1, 0.0);
    assert!(matches!(
        DensityState::new(s.clone(), skew),
        Err(Error::NotHermitian { .. })
    ));
    let mut neg = CMatrix::zeros(16, 16);
    neg[(0, 0)] = C64::new(1.5, 0.0);
    neg[(1, 1)] = C64::new(-0.5, 0.0);
    assert!(DensityState::new(s, neg).is_err());
}

fn small_chevron(params: &DeviceParams, q2: f64, frame: Frame) -> ChevronConfig {
    let cfg = ChevronConfig {
        q1_offsets_mhz: vec![-6.0, -3.0, 0.0, 3.0, 6.0],
        taus_ns: (0..81).map(|i| 5.0 * i as f64).collect(),
        frame,
        ..ChevronConfig::new(q2)
    };
    cfg.validate(params).unwrap();
    cfg
}

#[test]
fn chevron_is_symmetric_in_detuning() {
    let p = qubits_only(0.003);
    let cfg = small_chevron(&p, 4.6, Frame::Bare);
    let map = vacuum_rabi_chevron(&p, &cfg, &space2()).unwrap();
    let n = map.detunings_mhz.len();
    for i in 0..n / 2 {
        for (a, b) in map.p1[i].iter().zip(&map.p1[n - 1 - i]) {
            assert!((a - b).abs() < 1e-4);
        }
    }
    assert!(map
        .p1
        .iter()
        .flatten()
        .all(|&x| (-1e-9..=1.0 + 1e-6).contains(&x)));
}

#[test]
fn chevron_matches_closed_form_without_resonators() {
    let g = 0.003;
    let p = qubits_only(g).lossless();
    let cfg = small_chevron(&p, 4.6, Frame::Bare);
    let map = vacuum_rabi_chevron(&p, &cfg, &space2()).unwrap();
    for (i, d) in map.detunings_mhz.iter().enumerate() {
        for (k, t) in map.taus_ns.iter().enumerate() {
            let oracle = two_level_transfer(g * 1e3, *d, *t);
            assert!((map.p1[i][k] - oracle).abs() < 1e-4, "Δ={d} τ={t}");
        }
    }
}

#[test]
fn padding_by_pull_back_matches_forward_evolution() {
    let s = space2();
    let p = measured();
    let cfg = ChevronConfig {
        q1_offsets_mhz: vec![2.0],
        taus_ns: vec![0.0, 40.0, 80.0, 120.0],
        fixed_interval_ns: Some(200.0),
        max_step_ns: Some(0.005),
        ..ChevronConfig::new(4.58)
    };
    let map = vacuum_rabi_chevron(&p, &cfg, &s).unwrap();
    let obs = [Observable::new("p1", projector(&s, MODE_Q1))];
    let settings = IntegratorSettings {
        max_step_ns: Some(0.005),
        sample_interval_ns: Some(1000.0),
    };
    for (k, &tau) in cfg.taus_ns.iter().enumerate() {
        let schedule = PulseSchedule::vacuum_rabi(
            cfg.bias,
            cfg.interaction_point(2.0).unwrap(),
            tau,
            Some(200.0),
        );
        let series = evolve(
            &p,
            &schedule,
            &DensityState::vacuum(s.clone()),
            &s,
            &obs,
            &settings,
        )
        .unwrap();
        let forward = *series.values[0].last().unwrap();
        assert!(
            (map.p1[0][k] - forward).abs() < 1e-9,
            "τ={tau}: {} vs {forward}",
            map.p1[0][k]
        );
    }
}

#[test]
fn chevron_config_errors() {
    let p = measured();
    let mut cfg = ChevronConfig::new(4.52);
    assert!(matches!(cfg.validate(&p), Err(Error::Domain(_))));
    cfg = ChevronConfig::new(4.58);
    cfg.taus_ns = vec![10.0, 5.0];
    assert!(matches!(cfg.validate(&p), Err(Error::Config(_))));
    cfg = ChevronConfig::new(4.58);
    cfg.fixed_interval_ns = Some(1200.0);
    assert!(cfg.validate(&p).is_err());
    cfg.fixed_interval_ns = Some(2000.0);
    assert!(cfg.validate(&p).is_ok());
    cfg.frame = Frame::Dressed;
    assert!(cfg.validate(&p).is_err());
}

#[test]
fn dressed_frame_period_tracks_perturbative_coupling_at_measured_parameters() {
    // Close to the switch-off point the perturbative coupling is accurate.
    let p = measured().lossless();
    let point = 4.62;
    let g = effective_coupling(&p, &OperatingPoint::co_tuned(point).unwrap())
        .unwrap()
        .abs();
    let cfg = ChevronConfig {
        q1_offsets_mhz: vec![0.0],
        taus_ns: (0..=700).map(|i| i as f64).collect(),
        frame: Frame::Dressed,
        ..ChevronConfig::new(point)
    };
    let map = vacuum_rabi_chevron(&p, &cfg, &space2()).unwrap();
    let col = map.column(0);
    let k = (1..col.len() - 1)
        .find(|&k| col[k] >= col[k - 1] && col[k] > col[k + 1])
        .unwrap();
    let t_peak = map.taus_ns[k];
    let expected = 1.0 / (4.0 * g);
    assert!(
        (t_peak - expected).abs() < 0.05 * expected,
        "{t_peak} vs {expected}"
    );
}

#[test]
fn no_exchange_at_the_switch_off_point() {
    let p = measured();
    let root = find_dressed_switch_off(&p, (4.55, 4.70), &space2()).unwrap();
    let cfg = ChevronConfig {
        q1_offsets_mhz: vec![0.0],
        frame: Frame::Dressed,
        ..ChevronConfig::new(root)
    };
    let map = vacuum_rabi_chevron(&p, &cfg, &space2()).unwrap();
    let worst = map.column(0).iter().fold(0.0_f64, |m, &x| m.max(x));
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn chevron_csv_layout() {
    let map = ChevronMap {
        detunings_mhz: vec![-1.0, 1.0],
        taus_ns: vec![0.0, 10.0],
        p1: vec![vec![0.0, 0.25], vec![0.0, 0.5]],
        step_ns: 0.01,
    };
    let mut buf = Vec::new();
    map.write_csv(&mut buf, Some((2.0, 0.1))).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text,
        "detuning_mhz,tau_ns,p1,contrast\n-1,0,0,0.1\n-1,10,0.25,0.6\n1,0,0,0.1\n1,10,0.5,1.1\n"
    );
}
