//! The driven Rabi Hamiltonian, its ramp and the physical parameters behind it.
//!
//! In units of ħ and rad/ms the Hamiltonian is
//!
//! ```text
//! H(t) = ω a†a + (Ω_y(t)/2) σ_y + g σ_x (a† + a) + f (a† + a),   f = z₀F_d/(2ħ)
//! ```
//!
//! with Ω_y(t) = Ω_y(0)·exp(−γt). The force term is the only piece that breaks
//! the parity symmetry a → −a, σ_x → −σ_x.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::hilbert::{self, Axis, HilbertSpec, OperatorMatrix, StateVector};
use crate::linalg;
use crate::units::{self, AngularConvention, AMU, HBAR, MU_B, YOCTONEWTON};
use crate::{Error, Result};

/// Default ramp length in units of 1/γ.
pub const DEFAULT_T_FINAL_FACTOR: f64 = 14.0;

/// Ω_y(0)/g below which the initial state is no longer close to |−⟩_y|0⟩.
pub const MIN_FIELD_TO_COUPLING: f64 = 5.0;

/// Ω_y(t) = Ω_y(0)·exp(−γt) on [0, t_final].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSchedule {
    omega_y0: f64,
    gamma: f64,
    t_final: f64,
}

impl RampSchedule {
    pub fn new(omega_y0: f64, gamma: f64, t_final: f64) -> Result<Self> {
        for (name, v) in [("omega_y0", omega_y0), ("gamma", gamma), ("t_final", t_final)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { omega_y0, gamma, t_final })
    }

    /// t_final = factor/γ.
    pub fn with_factor(omega_y0: f64, gamma: f64, factor: f64) -> Result<Self> {
        Self::new(omega_y0, gamma, factor / gamma)
    }

    pub fn omega_y0(&self) -> f64 {
        self.omega_y0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// γ·t_final.
    pub fn factor(&self) -> f64 {
        self.gamma * self.t_final
    }

    pub fn value(&self, t: f64) -> f64 {
        self.omega_y0 * (-self.gamma * t).exp()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        -self.gamma * self.value(t)
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        // small slack so sampling grids ending at t_final never trip this
        if !(t >= 0.0 && t <= self.t_final * (1.0 + 1e-12)) {
            return Err(Error::TimeOutOfRange { t, t_final: self.t_final });
        }
        Ok(())
    }
}

/// Ion mass, axial trap frequency and the derived ground-state spread z₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapPhysics {
    ion_mass: f64,
    trap_freq: f64,
    z0: f64,
}

impl TrapPhysics {
    /// `ion_mass` in kg, `trap_freq` = ω_z in rad/s.
    pub fn new(ion_mass: f64, trap_freq: f64) -> Result<Self> {
        if !(ion_mass > 0.0 && ion_mass.is_finite()) {
            return Err(Error::invalid("ion_mass", format!("must be positive, got {ion_mass}")));
        }
        if !(trap_freq > 0.0 && trap_freq.is_finite()) {
            return Err(Error::invalid("trap_freq", format!("must be positive, got {trap_freq}")));
        }
        Ok(Self { ion_mass, trap_freq, z0: ground_state_spread(ion_mass, trap_freq) })
    }

    pub fn from_amu(mass_amu: f64, trap_freq: f64) -> Result<Self> {
        Self::new(mass_amu * AMU, trap_freq)
    }

    pub fn ion_mass(&self) -> f64 {
        self.ion_mass
    }

    pub fn trap_freq(&self) -> f64 {
        self.trap_freq
    }

    /// √(ħ/(2mω_z)) in metres.
    pub fn z0(&self) -> f64 {
        self.z0
    }
}

fn ground_state_spread(mass: f64, freq: f64) -> f64 {
    (HBAR / (2.0 * mass * freq)).sqrt()
}

/// Motional heating at rate ⟨ṅ⟩ from a reservoir with n̄ quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingParams {
    pub rate_per_ms: f64,
    pub nbar: f64,
}

impl HeatingParams {
    pub const DEFAULT_NBAR: f64 = 1000.0;

    pub fn new(rate_per_ms: f64, nbar: f64) -> Result<Self> {
        if !(rate_per_ms >= 0.0 && rate_per_ms.is_finite()) {
            return Err(Error::invalid("heating.rate_per_ms", format!("must be non-negative, got {rate_per_ms}")));
        }
        if !(nbar > 0.0 && nbar.is_finite()) {
            return Err(Error::invalid("heating.nbar", format!("must be positive, got {nbar}")));
        }
        Ok(Self { rate_per_ms, nbar })
    }

    pub fn with_rate(rate_per_ms: f64) -> Result<Self> {
        Self::new(rate_per_ms, Self::DEFAULT_NBAR)
    }

    /// γ_dec = ⟨ṅ⟩/n̄ [1/ms].
    pub fn decay_rate(&self) -> f64 {
        self.rate_per_ms / self.nbar
    }
}

/// Everything that defines one sensing run, in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Spin-phonon coupling [rad/ms].
    pub g: f64,
    /// Detuning of the force from the trap frequency [rad/ms].
    pub omega: f64,
    pub schedule: RampSchedule,
    /// Force amplitude F_d [yN]. Sign matters.
    pub force_yn: f64,
    pub trap: TrapPhysics,
    pub hilbert: HilbertSpec,
    pub heating: Option<HeatingParams>,
    /// How the kHz figures this config was built from were interpreted.
    pub convention: AngularConvention,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::invalid("g", format!("must be non-negative, got {}", self.g)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be positive, got {}", self.omega)));
        }
        if !self.force_yn.is_finite() {
            return Err(Error::invalid("force_yN", "must be finite"));
        }
        if self.g >= self.schedule.omega_y0() {
            return Err(Error::invalid(
                "omega_y0",
                format!("initial transverse field {} must exceed g = {}", self.schedule.omega_y0(), self.g),
            ));
        }
        Ok(())
    }

    /// Non-fatal concerns about the parameter set.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.g > 0.0 && self.schedule.omega_y0() / self.g < MIN_FIELD_TO_COUPLING {
            out.push(format!(
                "omega_y0/g = {:.3} < {MIN_FIELD_TO_COUPLING}: initial state is far from |-y>|0>",
                self.schedule.omega_y0() / self.g
            ));
        }
        out
    }

    /// f = z₀F_d/(2ħ) [rad/ms].
    pub fn force_coefficient(&self) -> f64 {
        force_term_coefficient(&self.trap, self.force_yn)
    }

    /// Diagonal bias of the effective two-level model, z₀F_d g/(ħω) [rad/ms].
    pub fn bias(&self) -> f64 {
        2.0 * self.force_coefficient() * self.g / self.omega
    }

    /// Dimensionless signal argument κ = π g z₀ F_d/(ħ γ ω).
    pub fn kappa(&self) -> f64 {
        core::f64::consts::PI * self.bias() / self.schedule.gamma()
    }

    pub fn t_final(&self) -> f64 {
        self.schedule.t_final()
    }

    pub fn with_force(&self, force_yn: f64) -> Self {
        Self { force_yn, ..self.clone() }
    }

    /// New slope γ [rad/ms], keeping γ·t_final fixed.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let schedule = RampSchedule::with_factor(self.schedule.omega_y0(), gamma, self.schedule.factor())?;
        Ok(Self { schedule, ..self.clone() })
    }

    pub fn with_heating(&self, heating: Option<HeatingParams>) -> Self {
        Self { heating, ..self.clone() }
    }
}

/// Configuration in the units experiments quote: kHz (interpreted through
/// `convention`), MHz for the trap, amu, yN, and t_final as a multiple of 1/γ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub g_khz: f64,
    pub omega_khz: f64,
    pub omega_y0_khz: f64,
    pub gamma_khz: f64,
    pub force_yn: f64,
    pub ion_mass_amu: f64,
    pub trap_freq_mhz: f64,
    pub convention: AngularConvention,
    pub fock_dim: usize,
    pub t_final_factor: f64,
    pub heating: Option<HeatingParams>,
}

impl Default for ProtocolParams {
    /// g = 25, ω = 150, Ω_y(0) = 225, γ = 1 kHz; ²⁴Mg⁺ at 6.3 MHz; no force.
    fn default() -> Self {
        Self {
            g_khz: 25.0,
            omega_khz: 150.0,
            omega_y0_khz: 225.0,
            gamma_khz: 1.0,
            force_yn: 0.0,
            ion_mass_amu: 24.0,
            trap_freq_mhz: 6.3,
            convention: AngularConvention::TwoPi,
            fock_dim: HilbertSpec::DEFAULT_FOCK_DIM,
            t_final_factor: DEFAULT_T_FINAL_FACTOR,
            heating: None,
        }
    }
}

impl ProtocolParams {
    pub fn build(&self) -> Result<ProtocolConfig> {
        let c = self.convention;
        if !(self.t_final_factor > 0.0) {
            return Err(Error::invalid("t_final_factor", "must be positive"));
        }
        let gamma = c.khz_to_rad_per_ms(self.gamma_khz);
        let cfg = ProtocolConfig {
            g: c.khz_to_rad_per_ms(self.g_khz),
            omega: c.khz_to_rad_per_ms(self.omega_khz),
            schedule: RampSchedule::with_factor(c.khz_to_rad_per_ms(self.omega_y0_khz), gamma, self.t_final_factor)?,
            force_yn: self.force_yn,
            trap: TrapPhysics::from_amu(self.ion_mass_amu, c.mhz_to_rad_per_s(self.trap_freq_mhz))?,
            hilbert: HilbertSpec::new(self.fock_dim)?,
            heating: self.heating,
            convention: c,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// z₀F_d/(2ħ) in rad/ms. Linear in `force_yn`.
pub fn force_term_coefficient(trap: &TrapPhysics, force_yn: f64) -> f64 {
    units::per_s_to_per_ms(trap.z0() * force_yn * YOCTONEWTON / (2.0 * HBAR))
}

/// The fixed operators H is assembled from, so that repeated evaluation along
/// a ramp only rescales and adds.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    /// ω a†a
    pub oscillator: OperatorMatrix,
    /// σ_y / 2
    pub half_sigma_y: OperatorMatrix,
    /// g σ_x (a† + a) + f (a† + a)
    pub coupling: OperatorMatrix,
    schedule: RampSchedule,
}

impl HamiltonianTerms {
    pub fn new(cfg: &ProtocolConfig) -> Self {
        let spec = cfg.hilbert;
        let z = hilbert::quadrature(spec);
        let sx_z = hilbert::pauli(Axis::X, spec).matmul(&z).into_hermitian().expect("σ_x and Z commute");
        let coupling = &sx_z.scale_real(cfg.g) + &z.scale_real(cfg.force_coefficient());
        Self {
            oscillator: hilbert::number(spec).scale_real(cfg.omega),
            half_sigma_y: hilbert::pauli(Axis::Y, spec).scale_real(0.5),
            coupling,
            schedule: cfg.schedule,
        }
    }

    /// H for an arbitrary transverse field value.
    pub fn with_field(&self, omega_y: f64) -> OperatorMatrix {
        let h = &self.oscillator + &self.half_sigma_y.scale_real(omega_y);
        &h + &self.coupling
    }

    pub fn at(&self, t: f64) -> OperatorMatrix {
        self.with_field(self.schedule.value(t))
    }

    /// ∂H/∂t = (dΩ_y/dt / 2) σ_y.
    pub fn time_derivative(&self, t: f64) -> OperatorMatrix {
        self.half_sigma_y.scale_real(self.schedule.derivative(t))
    }
}

/// H(t)/ħ in rad/ms, flagged Hermitian.
pub fn hamiltonian_at(cfg: &ProtocolConfig, t: f64) -> Result<OperatorMatrix> {
    cfg.validate()?;
    cfg.schedule.check_time(t)?;
    Ok(HamiltonianTerms::new(cfg).at(t))
}

/// ∂H/∂F_d per yN: the force enters H only through (z₀/2ħ)(a† + a).
pub fn force_derivative(cfg: &ProtocolConfig) -> OperatorMatrix {
    hilbert::quadrature(cfg.hilbert).scale_real(force_term_coefficient(&cfg.trap, 1.0))
}

/// Numerically exact ground state of H(0).
#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: StateVector,
    /// E₀ [rad/ms].
    pub energy: f64,
    /// E₁ − E₀ at t = 0 [rad/ms].
    pub gap: f64,
    /// |⟨ψ_g(0)| (|−⟩_y|0⟩)|².
    pub overlap_with_minus_y_vacuum: f64,
}

/// Ground state of H(0), phase fixed so the |↑⟩|0⟩ amplitude is real and
/// non-negative.
pub fn initial_ground_state(cfg: &ProtocolConfig) -> Result<GroundState> {
    cfg.validate()?;
    if cfg.g > 0.0 && cfg.schedule.omega_y0() / cfg.g < MIN_FIELD_TO_COUPLING {
        return Err(Error::invalid(
            "omega_y0",
            format!("omega_y0/g = {} is below {MIN_FIELD_TO_COUPLING}", cfg.schedule.omega_y0() / cfg.g),
        ));
    }
    let h = HamiltonianTerms::new(cfg).at(0.0);
    let eig = linalg::eigh(&h)?;
    let gap = eig.values()[1] - eig.values()[0];
    if gap < 1e-9 * cfg.omega {
        return Err(Error::DegenerateGroundState { gap });
    }
    let mut amps = eig.vector(0).to_vec();
    let anchor = amps[cfg.hilbert.index(hilbert::Spin::Up, 0)];
    if anchor.norm() > 0.0 {
        let phase = anchor.conj() / anchor.norm();
        for a in &mut amps {
            *a *= phase;
        }
    }
    let state = StateVector::new(amps);
    let reference = hilbert::product_state(
        hilbert::spinor::minus_y(),
        &StateVector::basis(cfg.hilbert.fock_dim(), 0),
        cfg.hilbert,
    )?;
    let overlap_with_minus_y_vacuum = reference.inner(&state).norm_sqr();
    Ok(GroundState { state, energy: eig.values()[0], gap, overlap_with_minus_y_vacuum })
}

/// Magnetic-gradient force on an auxiliary ion's moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinForceInput {
    /// B₀ [T/m].
    pub gradient_t_per_m: f64,
    /// Landé g_J.
    pub lande_g: f64,
    /// Centre-of-mass mode ω_c.m. [rad/s].
    pub com_freq: f64,
    /// Mass of the ions in the chain [kg].
    pub ion_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinForce {
    /// F_z = g_J μ_B B₀/2 [yN].
    pub force_yn: f64,
    /// z_c.m. = √(ħ/(2mω_c.m.)) [m].
    pub z_cm: f64,
    /// Perturbation coefficient z_c.m.F_z/(√2 ħ) multiplying (a† + a) [rad/ms].
    pub coefficient: f64,
    /// Force that produces the same coefficient in the single-ion model on a
    /// trap with z₀ = z_c.m.: √2·F_z [yN].
    pub equivalent_force_yn: f64,
    trap: TrapPhysics,
}

impl SpinForce {
    pub fn trap(&self) -> TrapPhysics {
        self.trap
    }

    /// Copy of `cfg` driven by this force on the centre-of-mass mode.
    pub fn apply_to(&self, cfg: &ProtocolConfig) -> ProtocolConfig {
        ProtocolConfig { trap: self.trap, force_yn: self.equivalent_force_yn, ..cfg.clone() }
    }
}

pub fn map_spin_force(input: &SpinForceInput) -> Result<SpinForce> {
    if !(input.gradient_t_per_m >= 0.0 && input.gradient_t_per_m.is_finite()) {
        return Err(Error::invalid("gradient", "must be non-negative"));
    }
    if !(input.lande_g > 0.0 && input.lande_g.is_finite()) {
        return Err(Error::invalid("lande_g", "must be positive"));
    }
    let trap = TrapPhysics::new(input.ion_mass, input.com_freq)?;
    let force = input.lande_g * MU_B * input.gradient_t_per_m / 2.0;
    let coefficient = units::per_s_to_per_ms(trap.z0() * force / (core::f64::consts::SQRT_2 * HBAR));
    Ok(SpinForce {
        force_yn: force / YOCTONEWTON,
        z_cm: trap.z0(),
        coefficient,
        equivalent_force_yn: core::f64::consts::SQRT_2 * force / YOCTONEWTON,
        trap,
    })
}
