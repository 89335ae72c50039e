use proptest::prelude::*;
use rabi_sense::demkov::{self, DemkovParams};
use rabi_sense::dynamics::IntegratorSettings;
use rabi_sense::metrology::{self, Engine, SweepAxis, SweepSpec};
use rabi_sense::model::{ProtocolConfig, ProtocolParams};

fn config(gamma_khz: f64) -> ProtocolConfig {
    ProtocolParams { gamma_khz, fock_dim: 20, ..Default::default() }.build().unwrap()
}

fn force_for_kappa(cfg: &ProtocolConfig, kappa: f64) -> f64 {
    kappa * demkov::min_force_sigma_x(cfg).unwrap() / 1f64.asinh()
}

#[test]
fn sweeps_are_reproducible() {
    let base = config(1.0);
    let spec = SweepSpec {
        axis: SweepAxis::Force,
        values: vec![-150.0, 0.0, 150.0, 300.0],
        base,
        engine: Engine::Pure,
        overhead_ms: 0.5,
    };
    let settings = IntegratorSettings::default();
    let a = metrology::sweep(&spec, &settings).unwrap();
    let b = metrology::sweep(&spec, &settings).unwrap();
    assert_eq!(a, b);
    let order: Vec<f64> = a.points.iter().map(|p| p.axis_value).collect();
    assert_eq!(order, spec.values);
    assert_eq!(a.failures(), 0);

    let runs: Vec<_> = a.points.iter().map(|p| p.outcome.as_ref().unwrap()).collect();
    assert!(runs[1].snr_sx.abs() < 1e-5);
    assert!((runs[0].sx_mean + runs[2].sx_mean).abs() < 1e-6);
    assert!(runs[3].snr_sx > runs[2].snr_sx);
    assert!(runs[1].min_force_estimate().is_nan());
}

#[test]
fn spin_readout_beats_the_quadrature() {
    for (gamma_khz, kappa) in [(0.8, 0.4), (1.0, 1.0), (1.4, 1.8)] {
        let base = config(gamma_khz);
        let r = metrology::run_protocol(&base.with_force(force_for_kappa(&base, kappa)), &Default::default()).unwrap();
        assert!(base.omega > 2.0 * base.g);
        assert!(r.snr_sx.abs() > r.snr_z.abs());
        assert!(r.snr_z.abs() < 1.0);
    }
}

/// The residual disagreement with the two-level closed forms is a small,
/// finite-gap effect at every ramp rate; it is not monotone in γ.
#[test]
fn two_level_reduction_error_is_small() {
    for gamma_khz in [0.8, 1.0, 1.4] {
        let base = config(gamma_khz);
        let cfg = base.with_force(force_for_kappa(&base, 1.2));
        let r = metrology::run_protocol(&cfg, &Default::default()).unwrap();
        assert!((r.analytic.kappa - 1.2).abs() < 1e-12);
        assert!(r.sx_discrepancy.abs() < 2e-3, "{}", r.sx_discrepancy);
        assert!((r.snr_discrepancy / r.analytic.snr_sx).abs() < 1e-2);
        assert!(r.p_plus_discrepancy.abs() < 1e-3);
    }
}

#[test]
fn simulated_minimum_force() {
    let cfg = config(1.0);
    let s = metrology::find_min_force(&cfg, &Default::default(), Engine::Pure, 1e-3, 6).unwrap();
    assert!((s.snr - 1.0).abs() <= 1e-3);
    let closed = demkov::min_force_sigma_x(&cfg).unwrap();
    assert!((s.force_yn - closed).abs() < 0.01 * closed);
    assert!((s.sensitivity - demkov::sensitivity(&cfg).unwrap()).abs() < 0.01 * s.sensitivity);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kappa_follows_the_force(force in -1000.0f64..1000.0, gamma_khz in 0.3f64..3.0) {
        let cfg = config(gamma_khz).with_force(force);
        prop_assert_eq!(cfg.kappa().signum(), force.signum());
        let p = DemkovParams::with_gap(&cfg, 800.0).unwrap();
        let q = DemkovParams::with_gap(&cfg.with_force(-force), 800.0).unwrap();
        let (m, v) = demkov::signal_sigma_x(&p);
        let (mn, vn) = demkov::signal_sigma_x(&q);
        prop_assert!((m + mn).abs() <= 1e-15);
        prop_assert!((v - vn).abs() <= 1e-15);
        let (zm, zv) = demkov::signal_quadrature(&p, cfg.g, cfg.omega);
        let (zmn, zvn) = demkov::signal_quadrature(&q, cfg.g, cfg.omega);
        prop_assert!((zm + zmn).abs() <= 1e-15);
        prop_assert!((zv - zvn).abs() <= 1e-15);
    }

    #[test]
    fn snr_is_mean_over_deviation(mean in -1.0f64..1.0, var in 1e-6f64..2.0) {
        let s = metrology::snr(mean, var).unwrap();
        prop_assert!((s * var.sqrt() - mean).abs() <= 1e-14);
    }
}
