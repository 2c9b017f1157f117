mod common;

use std::ops::ControlFlow;

use mbe_core::analysis::{check_dissipation, EnergyRecord};
use mbe_core::models::{modified_energy_bdf2, total_energy};
use mbe_core::schemes::{
    bdf2_step, bootstrap_first_step, imex_step, initial_condition_random, initial_condition_trig, run_simulation,
    DiagnosticsSink, NullSink,
};
use mbe_core::spectral::{mean, norm_l2};
use mbe_core::{Exec, GridSpec, ModelKind, ModelParams, RealField, SchemeConfig, SchemeKind, Spectral};

use common::{band_limited, random_field};

fn sp(n: usize) -> Spectral {
    Spectral::new(GridSpec::square(n).unwrap())
}

fn all_models(eta_sq: f64) -> Vec<ModelParams> {
    [
        ModelKind::SincIsotropic,
        ModelKind::ClassicalSlopeSelection,
        ModelKind::SquareSymmetry,
        ModelKind::LinearOnly,
    ]
    .into_iter()
    .map(|k| ModelParams::new(k, eta_sq).unwrap())
    .collect()
}

#[test]
fn flat_states_are_fixed_points() {
    let s = sp(16);
    for p in all_models(0.01) {
        for c in [0.0, 1.75] {
            let h = RealField::constant(s.grid(), c);
            let a = imex_step(&s, &p, 0.1, &h).unwrap();
            let b = bdf2_step(&s, &p, 0.1, &h, &h).unwrap();
            assert!(a.max_abs_diff(&h) <= 1e-12 * c.abs().max(1.0));
            assert!(b.max_abs_diff(&h) <= 1e-12 * c.abs().max(1.0));
            assert_eq!(s.forward_transform(&a).unwrap().coeff(0, 0).re, s.forward_transform(&h).unwrap().coeff(0, 0).re);
        }
    }
}

#[test]
fn linear_imex_damping_factor() {
    let s = sp(16);
    let p = ModelParams::new(ModelKind::LinearOnly, 0.01).unwrap();
    let h = RealField::from_fn(s.grid(), |x, _| (2.0 * x).cos());
    let next = imex_step(&s, &p, 0.1, &h).unwrap();
    assert!(next.max_abs_diff(&h.map(|v| v / 1.016)) < 1e-14);
}

#[test]
fn linear_bdf2_coefficient() {
    let s = sp(16);
    let p = ModelParams::new(ModelKind::LinearOnly, 1.0).unwrap();
    let h = RealField::from_fn(s.grid(), |x, _| x.cos());
    let next = bdf2_step(&s, &p, 1.0, &h, &h).unwrap();
    let c = s.forward_transform(&next).unwrap();
    for k in [1, -1] {
        assert!((c.coeff(k, 0).re - 0.3).abs() < 1e-14);
        assert!(c.coeff(k, 0).im.abs() < 1e-14);
    }
}

#[test]
fn bootstrap_is_imex() {
    let s = sp(32);
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.01).unwrap();
    let h = random_field(s.grid(), 12).map(|v| 0.01 * v);
    let a = bootstrap_first_step(&s, &p, 0.05, &h).unwrap();
    assert_eq!(a, imex_step(&s, &p, 0.05, &h).unwrap());
    assert!((mean(&a) - mean(&h)).abs() <= 1e-12 * mean(&h).abs().max(1e-3));
    assert_eq!(bootstrap_first_step(&s, &p, 0.05, &RealField::zeros(s.grid())).unwrap().max_abs(), 0.0);
}

#[test]
fn steppers_reject_bad_tau() {
    let s = sp(8);
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.01).unwrap();
    let h = RealField::zeros(s.grid());
    for tau in [0.0, -0.1, f64::NAN, f64::INFINITY] {
        assert!(imex_step(&s, &p, tau, &h).is_err());
        assert!(bdf2_step(&s, &p, tau, &h, &h).is_err());
    }
}

#[test]
fn trig_datum() {
    let g = GridSpec::square(64).unwrap();
    let h = initial_condition_trig(g);
    let (i0, j0) = (32, 32); // x = y = 0
    assert_eq!(h.get(i0, j0).abs(), 0.0);
    assert!(mean(&h).abs() < 1e-14);
    assert!(h.max_abs() <= 0.2);
}

#[test]
fn random_datum() {
    let g = GridSpec::square(128).unwrap();
    let a = initial_condition_random(g, 0.01, 7).unwrap();
    let b = initial_condition_random(g, 0.01, 7).unwrap();
    let c = initial_condition_random(g, 0.01, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.values().iter().all(|v| v.abs() <= 0.01));
    let bound = 3.0 * 0.01 / (3.0 * g.len() as f64).sqrt();
    for seed in 0..5 {
        let m = mean(&initial_condition_random(g, 0.01, seed).unwrap());
        assert!(m.abs() <= bound, "seed {seed}: {m} > {bound}");
    }
    assert!(initial_condition_random(g, 0.0, 1).is_err());
}

#[test]
fn zero_datum_stays_at_vacuum_energy() {
    let s = sp(16);
    for p in all_models(0.01) {
        for scheme in [SchemeKind::Imex1, SchemeKind::Bdf2] {
            let cfg = SchemeConfig::new(scheme, 0.1, 2.0).unwrap();
            let r = run_simulation(&s, &p, &cfg, &RealField::zeros(s.grid()), &mut NullSink).unwrap();
            assert!(!r.blew_up());
            let e0 = p.vacuum_density() * mbe_core::spectral::TORUS_AREA;
            assert!(r.records.iter().all(|rec| (rec.energy - e0).abs() < 1e-12 * e0.abs().max(1.0)));
        }
    }
}

#[test]
fn small_step_imex_is_monotone() {
    let s = sp(64);
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.01).unwrap();
    let cfg = SchemeConfig::new(SchemeKind::Imex1, 0.001, 1.0).unwrap();
    let r = run_simulation(&s, &p, &cfg, &initial_condition_trig(s.grid()), &mut NullSink).unwrap();
    assert_eq!(r.n_steps, 1000);
    assert_eq!(r.records.len(), 1001);
    assert!(check_dissipation(&r.records, false, 1e-12).unwrap().holds);
}

#[test]
fn recorded_energy_matches_direct_evaluation() {
    let s = sp(32);
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.02).unwrap();
    let h0 = initial_condition_trig(s.grid());
    let mut cfg = SchemeConfig::new(SchemeKind::Bdf2, 0.01, 0.1).unwrap();
    cfg.record_every = 5;
    let r = run_simulation(&s, &p, &cfg, &h0, &mut NullSink).unwrap();
    let steps: Vec<u64> = r.records.iter().map(|x| x.step).collect();
    assert_eq!(steps, vec![0, 5, 10]);
    let last = r.records.last().unwrap();
    let e = total_energy(&p, &s, &r.state.h_curr).unwrap();
    assert!((last.energy - e).abs() < 1e-11 * e.abs());
    let em = modified_energy_bdf2(&p, &s, &r.state.h_curr, r.state.h_prev.as_ref().unwrap(), 0.01).unwrap();
    assert!((last.modified_energy.unwrap() - em).abs() < 1e-11 * em.abs());
    assert!((last.l2_norm - norm_l2(&r.state.h_curr)).abs() < 1e-12);
    assert!((last.h2_seminorm - s.seminorm_h2(&r.state.h_curr).unwrap()).abs() < 1e-10);
    assert!(r.records[0].modified_energy.is_none());
}

#[test]
fn manual_bdf2_loop_matches_runner() {
    let s = sp(32);
    let p = ModelParams::new(ModelKind::SquareSymmetry, 0.01).unwrap();
    let h0 = band_limited(&s, 4, 6).map(|v| 0.2 * v);
    let tau = 0.02;
    let mut prev = h0.clone();
    let mut cur = bootstrap_first_step(&s, &p, tau, &h0).unwrap();
    for _ in 1..20 {
        let next = bdf2_step(&s, &p, tau, &cur, &prev).unwrap();
        prev = std::mem::replace(&mut cur, next);
    }
    let cfg = SchemeConfig::new(SchemeKind::Bdf2, tau, 0.4).unwrap();
    let r = run_simulation(&s, &p, &cfg, &h0, &mut NullSink).unwrap();
    assert_eq!(r.state.step, 20);
    assert!(r.state.h_curr.max_abs_diff(&cur) < 1e-13);
}

#[test]
fn mean_is_conserved() {
    let s = sp(32);
    let h0 = band_limited(&s, 40, 6).map(|v| 0.05 * v + 0.3);
    let m0 = mean(&h0);
    for p in all_models(0.01) {
        for scheme in [SchemeKind::Imex1, SchemeKind::Bdf2] {
            let cfg = SchemeConfig::new(scheme, 0.01, 1.0).unwrap();
            let r = run_simulation(&s, &p, &cfg, &h0, &mut NullSink).unwrap();
            assert!(!r.blew_up());
            for rec in &r.records {
                assert!((rec.mean() - m0).abs() <= 1e-12 * m0.abs(), "{:?} {scheme:?}", p.kind);
            }
            assert!((mean(&r.state.h_curr) - m0).abs() <= 1e-12 * m0.abs());
        }
    }
}

#[test]
fn bdf2_is_second_order() {
    let s = sp(32);
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.05).unwrap();
    let h0 = initial_condition_trig(s.grid());
    let run = |tau: f64| {
        let cfg = SchemeConfig::new(SchemeKind::Bdf2, tau, 0.5).unwrap();
        run_simulation(&s, &p, &cfg, &h0, &mut NullSink).unwrap().state.h_curr
    };
    let taus = [0.01, 0.005, 0.0025, 0.00125];
    let hs: Vec<RealField> = taus.iter().map(|&t| run(t)).collect();
    let d1 = norm_l2(&(&hs[1] - &hs[2]));
    let d0 = norm_l2(&(&hs[0] - &hs[1]));
    let d2 = norm_l2(&(&hs[2] - &hs[3]));
    let r1 = (d0 / d1).log2();
    let r2 = (d1 / d2).log2();
    assert!((1.7..=2.3).contains(&r2), "rates {r1} {r2}");
}

struct CountingSink {
    records: usize,
    snaps: Vec<u64>,
    stop_after: Option<u64>,
}

impl DiagnosticsSink for CountingSink {
    fn on_record(&mut self, r: &EnergyRecord) -> ControlFlow<()> {
        self.records += 1;
        match self.stop_after {
            Some(s) if r.step >= s => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    }

    fn on_snapshot(&mut self, step: u64, _time: f64, _field: &RealField) -> mbe_core::Result<()> {
        self.snaps.push(step);
        Ok(())
    }
}

#[test]
fn sink_cadence_and_early_stop() {
    let s = sp(16);
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.01).unwrap();
    let mut cfg = SchemeConfig::new(SchemeKind::Imex1, 0.1, 1.05).unwrap();
    assert_eq!(cfg.n_steps(), 11);
    cfg.snapshot_every = 4;
    cfg.record_every = 3;
    let mut sink = CountingSink { records: 0, snaps: vec![], stop_after: None };
    let r = run_simulation(&s, &p, &cfg, &initial_condition_trig(s.grid()), &mut sink).unwrap();
    assert_eq!(sink.snaps, vec![0, 4, 8]);
    let steps: Vec<u64> = r.records.iter().map(|x| x.step).collect();
    assert_eq!(steps, vec![0, 3, 6, 9, 11]);
    assert_eq!(sink.records, 5);
    assert!((r.final_time - 1.1).abs() < 1e-12);

    let mut sink = CountingSink { records: 0, snaps: vec![], stop_after: Some(6) };
    let r = run_simulation(&s, &p, &cfg, &initial_condition_trig(s.grid()), &mut sink).unwrap();
    assert_eq!(r.stopped_at, Some(6));
    assert_eq!(r.state.step, 6);
}

#[test]
fn classical_large_step_blows_up_as_an_outcome() {
    let s = sp(32);
    let p = ModelParams::new(ModelKind::ClassicalSlopeSelection, 0.01).unwrap();
    let cfg = SchemeConfig::new(SchemeKind::Imex1, 1.0, 200.0).unwrap();
    let h0 = initial_condition_trig(s.grid()).map(|v| 10.0 * v);
    let r = run_simulation(&s, &p, &cfg, &h0, &mut NullSink).unwrap();
    let b = r.blowup_step.expect("expected blowup");
    assert!(r.records.iter().all(|x| x.step < b && x.energy.is_finite()));
}

#[test]
fn runs_are_policy_independent() {
    let g = GridSpec::square(32).unwrap();
    let p = ModelParams::new(ModelKind::SincIsotropic, 0.01).unwrap();
    let cfg = SchemeConfig::new(SchemeKind::Bdf2, 0.01, 0.3).unwrap();
    let h0 = initial_condition_random(g, 0.01, 3).unwrap();
    let a = run_simulation(&Spectral::new(g).with_exec(Exec::Sequential), &p, &cfg, &h0, &mut NullSink).unwrap();
    let b = run_simulation(&Spectral::new(g).with_exec(Exec::Parallel), &p, &cfg, &h0, &mut NullSink).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.state.h_curr, b.state.h_curr);
}
