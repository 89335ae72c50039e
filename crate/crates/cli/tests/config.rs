use proptest::prelude::*;
use rabi_sense::units::AngularConvention;
use rabi_sense_cli::config::ConfigFile;

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-3f64..1e3, (1u32..500).prop_map(f64::from)]
}

prop_compose! {
    fn any_config()(
        g in positive(), omega in positive(), omega_y0 in positive(), gamma in positive(),
        force in -1e3f64..1e3, mass in 1.0f64..300.0, trap in 0.1f64..50.0,
        two_pi in any::<bool>(), fock in 2usize..80, rel in 1e-14f64..1e-3, abs in 1e-16f64..1e-6,
        step in 1e-4f64..1.0, order in 4u32..=5, samples in 2usize..1000, factor in 10.0f64..30.0,
        overhead in 0.0f64..10.0, rate in 0.0f64..1.0, nbar in 1.0f64..1e4, enabled in any::<bool>(),
    ) -> ConfigFile {
        let mut c = ConfigFile::default();
        c.physics.g_khz = g;
        c.physics.omega_khz = omega;
        c.physics.omega_y0_khz = omega_y0;
        c.physics.gamma_khz = gamma;
        c.physics.force_yn = force;
        c.physics.ion_mass_amu = mass;
        c.physics.trap_freq_mhz = trap;
        c.physics.convention = if two_pi { AngularConvention::TwoPi } else { AngularConvention::Plain };
        c.physics.fock_dim = fock;
        c.physics.t_final_factor = factor;
        c.integrator.rel_tol = rel;
        c.integrator.abs_tol = abs;
        c.integrator.max_step = step;
        c.integrator.method_order = order;
        c.sample_count = samples;
        c.overhead_ms = overhead;
        c.heating.rate_per_ms = rate;
        c.heating.nbar = nbar;
        c.heating.enabled = enabled;
        c
    }
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(c in any_config()) {
        let text = c.to_ini();
        prop_assert_eq!(ConfigFile::parse(&text).unwrap(), c.clone());
        prop_assert_eq!(ConfigFile::parse(&text).unwrap().to_ini(), text);
    }
}
