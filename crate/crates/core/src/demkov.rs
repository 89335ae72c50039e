//! Effective two-level description of the ramp and the closed-form signals
//! built on it.
//!
//! In the basis (|ψ₊⟩, |ψ₋⟩) = (|+⟩_x|−α⟩, |−⟩_x|α⟩), α = g/ω,
//!
//! ```text
//! H_eff(t) = [ −b        Δ(t)/2 ]      Δ(t) = Δ_i e^{−γt},  b = 2fg/ω
//!            [ Δ(t)/2    +b     ]
//! ```
//!
//! and for t ≫ 1/γ the population of |ψ₊⟩ tends to (1 + tanh κ)/2 with
//! κ = πb/γ.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::hilbert::OperatorMatrix;
use crate::model::{self, ProtocolConfig};
use crate::units::{self, HBAR};
use crate::{Error, Result, C64};

/// Integration must run at least this many ramp constants 1/γ.
pub const MIN_RAMP_CONSTANTS: f64 = 10.0;
pub const NORM_LIMIT: f64 = 1e-10;
pub const DEFAULT_TOL: f64 = 1e-12;
const MAX_STEPS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemkovParams {
    pub kappa: f64,
    /// Δ_gap(0) [rad/ms].
    pub delta_i: f64,
    /// [1/ms]
    pub gamma: f64,
    /// [rad/ms]
    pub bias: f64,
}

impl DemkovParams {
    /// Bias follows from κ and γ.
    pub fn new(kappa: f64, delta_i: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", alloc::format!("must be positive, got {gamma}")));
        }
        if !(delta_i >= 0.0 && delta_i.is_finite()) {
            return Err(Error::invalid("delta_i", alloc::format!("must be non-negative, got {delta_i}")));
        }
        if !kappa.is_finite() {
            return Err(Error::invalid("kappa", "must be finite"));
        }
        Ok(Self { kappa, delta_i, gamma, bias: kappa * gamma / PI })
    }

    /// κ and b from the protocol, Δ_i from the exact gap of H(0).
    pub fn from_config(cfg: &ProtocolConfig) -> Result<Self> {
        let gs = model::initial_ground_state(cfg)?;
        Self::with_gap(cfg, gs.gap)
    }

    pub fn with_gap(cfg: &ProtocolConfig, delta_i: f64) -> Result<Self> {
        let p = Self::new(cfg.kappa(), delta_i, cfg.schedule.gamma())?;
        Ok(Self { bias: cfg.bias(), ..p })
    }

    pub fn gap(&self, t: f64) -> f64 {
        self.delta_i * (-self.gamma * t).exp()
    }
}

/// H_eff(t) for t ≥ 0.
pub fn effective_hamiltonian(p: &DemkovParams, t: f64) -> OperatorMatrix {
    let half = C64::new(0.5 * p.gap(t), 0.0);
    let b = C64::new(p.bias, 0.0);
    OperatorMatrix::from_entries(2, alloc::vec![-b, half, half, b])
        .and_then(OperatorMatrix::into_hermitian)
        .expect("real symmetric 2×2")
}

/// Pauli components (h₀, hx, hy, hz) of H_eff(t).
fn pauli_components(p: &DemkovParams, t: f64) -> [f64; 4] {
    [0.0, 0.5 * p.gap(t), 0.0, -p.bias]
}

/// exp(−iK) applied to `c`, K = k₀ + k·σ.
fn apply_exp(k: [f64; 4], c: [C64; 2]) -> [C64; 2] {
    let norm = (k[1] * k[1] + k[2] * k[2] + k[3] * k[3]).sqrt();
    let (sin, cos) = norm.sin_cos();
    let (nx, ny, nz) = if norm > 0.0 { (k[1] / norm, k[2] / norm, k[3] / norm) } else { (0.0, 0.0, 0.0) };
    let i = C64::new(0.0, 1.0);
    // cos − i sin (n·σ)
    let u00 = C64::new(cos, -sin * nz);
    let u11 = C64::new(cos, sin * nz);
    let u01 = -i * sin * C64::new(nx, -ny);
    let u10 = -i * sin * C64::new(nx, ny);
    let phase = C64::new(0.0, -k[0]).exp();
    [phase * (u00 * c[0] + u01 * c[1]), phase * (u10 * c[0] + u11 * c[1])]
}

/// One fourth-order Magnus step with Gauss nodes.
fn magnus_step(p: &DemkovParams, t: f64, h: f64, c: [C64; 2]) -> [C64; 2] {
    let d = 3.0f64.sqrt() / 6.0;
    let a = pauli_components(p, t + (0.5 - d) * h);
    let b = pauli_components(p, t + (0.5 + d) * h);
    // [A₂, A₁] = −[H₂, H₁] = −2i (h₂ × h₁)·σ
    let cross = [b[2] * a[3] - b[3] * a[2], b[3] * a[1] - b[1] * a[3], b[1] * a[2] - b[2] * a[1]];
    let w = 3.0f64.sqrt() * h * h / 6.0;
    let k = [
        0.5 * h * (a[0] + b[0]),
        0.5 * h * (a[1] + b[1]) + w * cross[0],
        0.5 * h * (a[2] + b[2]) + w * cross[1],
        0.5 * h * (a[3] + b[3]) + w * cross[2],
    ];
    apply_exp(k, c)
}

/// Amplitudes (c₊, c₋) at `t_final`, starting from (1, −1)/√2.
///
/// The propagator is exactly unitary per step; `tol` bounds the local error
/// estimated by step doubling.
pub fn integrate_demkov(p: &DemkovParams, t_final: f64, tol: f64) -> Result<(C64, C64)> {
    if !(t_final >= MIN_RAMP_CONSTANTS / p.gamma) {
        return Err(Error::invalid(
            "t_final",
            alloc::format!("need at least {MIN_RAMP_CONSTANTS}/γ = {}, got {t_final}", MIN_RAMP_CONSTANTS / p.gamma),
        ));
    }
    if !(tol > 0.0 && tol <= 1e-2) {
        return Err(Error::invalid("tol", alloc::format!("must lie in (0, 1e-2], got {tol}")));
    }
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut c = [C64::new(s, 0.0), C64::new(-s, 0.0)];
    let mut t = 0.0;
    let mut h = (0.01 / p.gamma).min(t_final);
    let mut steps = 0u64;
    while t < t_final {
        let step = h.min(t_final - t);
        if step <= 16.0 * f64::EPSILON * t_final || steps > MAX_STEPS {
            return Err(Error::ToleranceNotMet { t, step });
        }
        steps += 1;
        let coarse = magnus_step(p, t, step, c);
        let fine = magnus_step(p, t + 0.5 * step, 0.5 * step, magnus_step(p, t, 0.5 * step, c));
        let err = ((fine[0] - coarse[0]).norm().max((fine[1] - coarse[1]).norm())) / 15.0;
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        if err <= tol {
            c = fine;
            t = if step == t_final - t { t_final } else { t + step };
        }
        h = step * factor;
    }
    let drift = (c[0].norm_sqr() + c[1].norm_sqr() - 1.0).abs();
    if drift > NORM_LIMIT {
        return Err(Error::InvariantViolated { quantity: "norm", drift, limit: NORM_LIMIT });
    }
    Ok((c[0], c[1]))
}

/// |c₊|² for t ≫ 1/γ.
pub fn asymptotic_population(p: &DemkovParams) -> f64 {
    0.5 * (1.0 + p.kappa.tanh())
}

/// (⟨σ_x⟩, ⟨Δ²σ_x⟩) = (tanh κ, 1 − tanh²κ).
pub fn signal_sigma_x(p: &DemkovParams) -> (f64, f64) {
    let m = p.kappa.tanh();
    (m, 1.0 - m * m)
}

/// 4|c₊|²|c₋|².
pub fn sigma_x_variance_from_populations(p_plus: f64, p_minus: f64) -> f64 {
    4.0 * p_plus * p_minus
}

/// (⟨Ẑ⟩, ⟨Δ²Ẑ⟩) = (−2α tanh κ, 1 + 4α² − ⟨Ẑ⟩²), α = g/ω.
pub fn signal_quadrature(p: &DemkovParams, g: f64, omega: f64) -> (f64, f64) {
    let alpha = g / omega;
    let m = -2.0 * alpha * p.kappa.tanh();
    (m, 1.0 + 4.0 * alpha * alpha - m * m)
}

/// 1 + 16α²|c₊|²|c₋|².
pub fn quadrature_variance_from_populations(alpha: f64, p_plus: f64, p_minus: f64) -> f64 {
    1.0 + 16.0 * alpha * alpha * p_plus * p_minus
}

/// dκ/dF_d [1/yN].
fn kappa_per_yn(cfg: &ProtocolConfig) -> Result<f64> {
    if !(cfg.g > 0.0) {
        return Err(Error::invalid("g", "the force is invisible without spin-phonon coupling"));
    }
    Ok(cfg.with_force(1.0).kappa())
}

/// Force at which the σ_x signal-to-noise ratio sinh κ reaches one [yN].
pub fn min_force_sigma_x(cfg: &ProtocolConfig) -> Result<f64> {
    Ok(1.0f64.asinh() / kappa_per_yn(cfg)?)
}

/// ħγω sinh⁻¹(1)/(πgz₀) evaluated directly in SI units [yN].
pub fn min_force_sigma_x_si(cfg: &ProtocolConfig) -> f64 {
    let gamma = units::per_ms_to_per_s(cfg.schedule.gamma());
    HBAR * gamma * cfg.omega * 1.0f64.asinh() / (PI * cfg.g * cfg.trap.z0()) / units::YOCTONEWTON
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureBound {
    Force(f64),
    /// ω ≥ 2g: the quadrature signal never exceeds its noise.
    Unmeasurable,
}

impl QuadratureBound {
    pub fn force(self) -> Option<f64> {
        match self {
            QuadratureBound::Force(f) => Some(f),
            QuadratureBound::Unmeasurable => None,
        }
    }
}

/// (ħγω/πgz₀)·tanh⁻¹√(1/2 + ω²/8g²) for ω < 2g.
pub fn min_force_quadrature(cfg: &ProtocolConfig) -> Result<QuadratureBound> {
    let per_yn = kappa_per_yn(cfg)?;
    if cfg.omega >= 2.0 * cfg.g {
        return Ok(QuadratureBound::Unmeasurable);
    }
    let r = cfg.omega / cfg.g;
    Ok(QuadratureBound::Force((0.5 + r * r / 8.0).sqrt().atanh() / per_yn))
}

/// η√T = √(t_f) · F_min [yN/√Hz], t_f in seconds.
pub fn sensitivity(cfg: &ProtocolConfig) -> Result<f64> {
    sensitivity_with_overhead(cfg, 0.0)
}

/// As [`sensitivity`] with a per-shot overhead added to t_f [ms].
pub fn sensitivity_with_overhead(cfg: &ProtocolConfig, overhead_ms: f64) -> Result<f64> {
    if !(overhead_ms >= 0.0 && overhead_ms.is_finite()) {
        return Err(Error::invalid("overhead", alloc::format!("must be non-negative, got {overhead_ms}")));
    }
    let cycle_s = (cfg.t_final() + overhead_ms) * 1e-3;
    Ok(cycle_s.sqrt() * min_force_sigma_x(cfg)?)
}
