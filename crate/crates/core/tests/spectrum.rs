use proptest::prelude::*;
use rabi_sense::dynamics::sample_times;
use rabi_sense::linalg;
use rabi_sense::model::{HamiltonianTerms, ProtocolConfig, ProtocolParams};
use rabi_sense::spectrum::{self, SpectrumSlice};

fn config(omega_khz: f64, force_yn: f64) -> ProtocolConfig {
    ProtocolParams { omega_khz, force_yn, fock_dim: 24, ..Default::default() }.build().unwrap()
}

fn ramp(cfg: &ProtocolConfig, n: usize) -> Vec<SpectrumSlice> {
    spectrum::spectrum_along_ramp(cfg, 4, &sample_times(cfg.t_final(), n)).unwrap()
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (sxy / sxx, sxy * sxy / (sxx * syy))
}

#[test]
fn slices_are_well_formed() {
    for s in ramp(&config(150.0, 193.0), 80) {
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.delta_gap >= 0.0 && s.delta_ge > s.delta_gap);
        assert!(s.epsilon >= 0.0 && s.epsilon.is_finite());
    }
}

#[test]
fn gap_closes_exponentially_without_force() {
    let cfg = config(150.0, 0.0);
    let s = ramp(&cfg, 120);
    let t: Vec<f64> = s.iter().map(|q| q.t).collect();
    let log_gap: Vec<f64> = s.iter().map(|q| q.delta_gap.ln()).collect();
    let (slope, r2) = linear_fit(&t, &log_gap);
    assert!(r2 > 0.95, "{r2}");
    assert!((slope + cfg.schedule.gamma()).abs() < 0.05 * cfg.schedule.gamma(), "{slope}");
}

#[test]
fn force_keeps_the_final_gap_open() {
    let closed = ramp(&config(150.0, 0.0), 20);
    let open = ramp(&config(150.0, 193.0), 20);
    let cfg = config(150.0, 193.0);
    let (a, b) = (closed.last().unwrap(), open.last().unwrap());
    assert!(b.delta_gap > 100.0 * a.delta_gap);
    assert!((b.delta_gap - 2.0 * cfg.bias().abs()).abs() < 0.05 * b.delta_gap);
}

#[test]
fn adiabatic_parameter_is_continuous() {
    let s = ramp(&config(150.0, 193.0), 200);
    let peak = s.iter().map(|q| q.epsilon).fold(0.0, f64::max);
    for w in s.windows(2) {
        assert!((w[1].epsilon - w[0].epsilon).abs() < 0.1 * peak);
        assert!((w[1].coupling * w[0].coupling.conj()).re > 0.0);
    }
}

fn ground_energy_without_field(force_yn: f64) -> f64 {
    let cfg = config(150.0, force_yn);
    let h = HamiltonianTerms::new(&cfg).with_field(0.0);
    linalg::eigvalsh(&h).unwrap()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn force_lowers_the_ground_energy(force in -600.0f64..600.0) {
        let e0 = ground_energy_without_field(0.0);
        let ef = ground_energy_without_field(force);
        prop_assert!(ef <= e0 + 1e-9);
        let cfg = config(150.0, force);
        let first_order = -cfg.bias().abs();
        let f = cfg.force_coefficient();
        let second_order = f * f / cfg.omega;
        prop_assert!((ef - e0 - first_order).abs() <= 1.01 * second_order + 1e-9);
    }
}
