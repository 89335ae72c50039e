use rabi_sense::demkov::{self, DemkovParams};
use rabi_sense::dynamics::{self, FinalState, IntegratorSettings, Trajectory};
use rabi_sense::hilbert::{DensityMatrix, HilbertSpec, spinor, Spin, StateVector};
use rabi_sense::model::{self, HeatingParams, ProtocolConfig, ProtocolParams};
use rabi_sense::C64;

fn config(fock_dim: usize, gamma_khz: f64) -> ProtocolConfig {
    ProtocolParams { fock_dim, gamma_khz, ..Default::default() }.build().unwrap()
}

fn at_min_force(cfg: &ProtocolConfig) -> ProtocolConfig {
    cfg.with_force(demkov::min_force_sigma_x(cfg).unwrap())
}

fn lindblad_settings() -> IntegratorSettings {
    IntegratorSettings { rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() }
}

fn mixed(t: &Trajectory) -> &DensityMatrix {
    match &t.final_state {
        FinalState::Mixed(rho) => rho,
        FinalState::Pure(_) => panic!("expected a density matrix"),
    }
}

#[test]
fn sample_grid_and_norm() {
    let cfg = at_min_force(&config(16, 1.0));
    let t = dynamics::evolve_pure(&cfg, &IntegratorSettings::default(), 120).unwrap();
    assert_eq!(t.times.len(), 120);
    assert_eq!(t.times[0], 0.0);
    assert_eq!(*t.times.last().unwrap(), cfg.t_final());
    assert!(t.times.windows(2).all(|w| w[0] < w[1]));
    assert!(t.records.iter().all(|r| (r.norm - 1.0).abs() <= dynamics::NORM_DRIFT_LIMIT));
    assert!(t.meta.max_norm_drift <= dynamics::NORM_DRIFT_LIMIT);
    assert!(t.meta.initial_overlap.unwrap() > 0.99);
}

#[test]
fn master_equation_without_heating_matches_schroedinger() {
    let cfg = at_min_force(&config(16, 1.0));
    let pure = dynamics::evolve_pure(&cfg, &IntegratorSettings::default(), 60).unwrap();
    let quiet = cfg.with_heating(Some(HeatingParams::new(0.0, HeatingParams::DEFAULT_NBAR).unwrap()));
    let mixed = dynamics::evolve_lindblad(&quiet, &lindblad_settings(), 60).unwrap();
    for (a, b) in pure.records.iter().zip(&mixed.records) {
        for (x, y) in [(a.sx, b.sx), (a.sy, b.sy), (a.sz, b.sz), (a.z, b.z), (a.nbar, b.nbar), (a.p_plus, b.p_plus)] {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }
}

#[test]
fn free_oscillator_heats_towards_the_bath() {
    let heating = HeatingParams::new(0.5, 40.0).unwrap();
    let cfg = ProtocolParams { g_khz: 0.0, fock_dim: 30, heating: Some(heating), ..Default::default() }
        .build()
        .unwrap();
    let t = dynamics::evolve_lindblad(&cfg, &lindblad_settings(), 40).unwrap();
    let rate = heating.decay_rate();
    for (&time, r) in t.times.iter().zip(&t.records) {
        let expected = heating.nbar * (1.0 - (-rate * time).exp());
        assert!((r.nbar - expected).abs() < 1e-7, "t = {time}: {} vs {expected}", r.nbar);
        assert!((r.nbar - heating.rate_per_ms * time).abs() <= 0.5 * rate * heating.rate_per_ms * time * time + 1e-7);
    }
    assert!(t.meta.min_eigenvalue.unwrap() >= dynamics::POSITIVITY_LIMIT);
}

#[test]
fn master_equation_is_linear() {
    let cfg = at_min_force(&config(20, 1.0)).with_heating(Some(HeatingParams::new(0.2, 50.0).unwrap()));
    let settings = lindblad_settings();
    let spec = HilbertSpec::new(20).unwrap();
    let rho1 = DensityMatrix::from_pure(&model::initial_ground_state(&cfg).unwrap().state);
    let mut psi = vec![C64::new(0.0, 0.0); 40];
    let plus_y = spinor::plus_y();
    psi[spec.index(Spin::Up, 0)] = plus_y[0];
    psi[spec.index(Spin::Down, 0)] = plus_y[1];
    let rho2 = DensityMatrix::from_pure(&StateVector::new(psi));
    let avg: Vec<C64> = rho1.entries().iter().zip(rho2.entries()).map(|(a, b)| 0.5 * (a + b)).collect();
    let rho_avg = DensityMatrix::from_entries(40, avg).unwrap();

    let run = |rho: DensityMatrix| dynamics::evolve_lindblad_from(&cfg, &settings, 5, rho).unwrap();
    let (t1, t2, ta) = (run(rho1), run(rho2), run(rho_avg));
    let worst = mixed(&ta)
        .entries()
        .iter()
        .zip(mixed(&t1).entries().iter().zip(mixed(&t2).entries()))
        .map(|(m, (a, b))| (m - 0.5 * (a + b)).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn cat_populations_follow_the_asymptotic_law() {
    for (gamma_khz, kappa) in [(0.8, 1.2), (1.4, -0.6)] {
        let base = config(20, gamma_khz);
        let per_kappa = demkov::min_force_sigma_x(&base).unwrap() / 1f64.asinh();
        let cfg = base.with_force(kappa * per_kappa);
        let t = dynamics::evolve_pure(&cfg, &IntegratorSettings::default(), 10).unwrap();
        let p = DemkovParams::from_config(&cfg).unwrap();
        let last = t.last();
        assert!((last.p_plus - demkov::asymptotic_population(&p)).abs() < 0.02);
        assert!((last.p_plus + last.p_minus - 1.0).abs() < 1e-3);
    }
}

#[test]
fn heating_needs_a_density_matrix_and_vice_versa() {
    let cfg = config(12, 1.0);
    assert!(dynamics::evolve_lindblad(&cfg, &lindblad_settings(), 10).is_err());
    let hot = cfg.with_heating(Some(HeatingParams::with_rate(0.1).unwrap()));
    assert!(dynamics::evolve_pure(&hot, &IntegratorSettings::default(), 10).is_err());
}
