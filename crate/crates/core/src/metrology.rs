//! Full sensing runs, their signal-to-noise ratios next to the two-level
//! predictions, and parameter sweeps.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::demkov::{self, DemkovParams};
use crate::dynamics::{self, FinalState, IntegratorSettings, Trajectory};
use crate::hilbert::{self, Axis, DensityMatrix, OperatorMatrix};
use crate::model::{self, HeatingParams, ProtocolConfig};
use crate::{Error, Result};

/// Samples recorded per run; only the final state enters the result.
pub const RUN_SAMPLE_COUNT: usize = 50;

/// mean/√variance, keeping the sign of the mean.
pub fn snr(mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok(mean / variance.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Pure,
    Lindblad,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Pure => "pure",
            Engine::Lindblad => "lindblad",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pure" => Some(Engine::Pure),
            "lindblad" => Some(Engine::Lindblad),
            _ => None,
        }
    }

    /// Master equation whenever the config carries heating.
    pub fn for_config(cfg: &ProtocolConfig) -> Self {
        if cfg.heating.is_some() {
            Engine::Lindblad
        } else {
            Engine::Pure
        }
    }
}

/// Closed-form two-level predictions for one config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analytic {
    pub kappa: f64,
    pub p_plus: f64,
    pub sx_mean: f64,
    pub sx_var: f64,
    pub z_mean: f64,
    pub z_var: f64,
    pub snr_sx: f64,
    pub snr_z: f64,
}

impl Analytic {
    pub fn new(params: &DemkovParams, g: f64, omega: f64) -> Self {
        let (sx_mean, sx_var) = demkov::signal_sigma_x(params);
        let (z_mean, z_var) = demkov::signal_quadrature(params, g, omega);
        Self {
            kappa: params.kappa,
            p_plus: demkov::asymptotic_population(params),
            sx_mean,
            sx_var,
            z_mean,
            z_var,
            snr_sx: params.kappa.sinh(),
            snr_z: z_mean / z_var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub force_yn: f64,
    pub t_final: f64,
    pub engine: Engine,
    pub sx_mean: f64,
    pub sx_var: f64,
    pub z_mean: f64,
    pub z_var: f64,
    pub snr_sx: f64,
    pub snr_z: f64,
    /// Final cat-state populations |c₊|², |c₋|².
    pub p_plus: f64,
    pub p_minus: f64,
    pub analytic: Analytic,
    /// Numeric minus analytic.
    pub sx_discrepancy: f64,
    pub snr_discrepancy: f64,
    pub p_plus_discrepancy: f64,
    pub trajectory: Trajectory,
}

impl RunResult {
    /// Force at which this run's σ_x SNR would reach one, from κ ∝ F_d:
    /// F·sinh⁻¹(1)/sinh⁻¹(SNR). NaN when the run carries no usable signal.
    pub fn min_force_estimate(&self) -> f64 {
        if self.force_yn == 0.0 || !(self.snr_sx * self.force_yn.signum() > 0.0) {
            return f64::NAN;
        }
        self.force_yn.abs() * 1.0f64.asinh() / self.snr_sx.abs().asinh()
    }

    /// √(t_f + overhead) · F_min [yN/√Hz].
    pub fn sensitivity_estimate(&self, overhead_ms: f64) -> f64 {
        ((self.t_final + overhead_ms) * 1e-3).sqrt() * self.min_force_estimate()
    }
}

fn variance(state: &FinalState, op: &OperatorMatrix, mean: f64) -> Result<f64> {
    let sq = op.matmul(op).into_hermitian()?;
    Ok(state.expectation(&sq)?.re - mean * mean)
}

/// Runs the engine the config implies (pure without heating, master
/// equation with it).
pub fn run_protocol(cfg: &ProtocolConfig, settings: &IntegratorSettings) -> Result<RunResult> {
    run_with_engine(cfg, settings, Engine::for_config(cfg))
}

/// Ground state → ramp → final observables, plus the two-level prediction.
/// The master-equation engine accepts configs without heating and then
/// evolves ρ unitarily.
/// Trajectory from the ground state with `sample_count` records. The
/// Lindblad engine runs without heating when the config has none.
pub fn evolve_with_engine(
    cfg: &ProtocolConfig,
    settings: &IntegratorSettings,
    sample_count: usize,
    engine: Engine,
) -> Result<Trajectory> {
    Ok(match engine {
        Engine::Pure => dynamics::evolve_pure(cfg, settings, sample_count)?,
        Engine::Lindblad if cfg.heating.is_some() => dynamics::evolve_lindblad(cfg, settings, sample_count)?,
        Engine::Lindblad => {
            let gs = model::initial_ground_state(cfg)?;
            let rho = DensityMatrix::from_pure(&gs.state);
            let mut t = dynamics::evolve_lindblad_from(cfg, settings, sample_count, rho)?;
            t.meta.initial_gap = Some(gs.gap);
            t.meta.initial_overlap = Some(gs.overlap_with_minus_y_vacuum);
            t
        }
    })
}

pub fn run_with_engine(cfg: &ProtocolConfig, settings: &IntegratorSettings, engine: Engine) -> Result<RunResult> {
    let trajectory = evolve_with_engine(cfg, settings, RUN_SAMPLE_COUNT, engine)?;
    let spec = cfg.hilbert;
    let sx_op = hilbert::pauli(Axis::X, spec);
    let z_op = hilbert::quadrature(spec);
    let last = *trajectory.last();
    let sx_var = variance(&trajectory.final_state, &sx_op, last.sx)?;
    let z_var = variance(&trajectory.final_state, &z_op, last.z)?;
    let snr_sx = snr(last.sx, sx_var)?;
    let snr_z = snr(last.z, z_var)?;

    let gap = trajectory.meta.initial_gap.unwrap_or(cfg.schedule.omega_y0());
    let analytic = Analytic::new(&DemkovParams::with_gap(cfg, gap)?, cfg.g, cfg.omega);
    Ok(RunResult {
        force_yn: cfg.force_yn,
        t_final: cfg.t_final(),
        engine,
        sx_mean: last.sx,
        sx_var,
        z_mean: last.z,
        z_var,
        snr_sx,
        snr_z,
        p_plus: last.p_plus,
        p_minus: last.p_minus,
        analytic,
        sx_discrepancy: last.sx - analytic.sx_mean,
        snr_discrepancy: snr_sx - analytic.snr_sx,
        p_plus_discrepancy: last.p_plus - analytic.p_plus,
        trajectory,
    })
}

/// Numerically located force at which the simulated σ_x SNR equals one.
#[derive(Debug, Clone, PartialEq)]
pub struct MinForceSearch {
    pub force_yn: f64,
    pub snr: f64,
    pub runs: usize,
    pub sensitivity: f64,
}

/// Secant iteration on sinh⁻¹(SNR), which is close to linear in F_d, started
/// from the closed-form F_min. Stops when |SNR − 1| ≤ `snr_tol`.
pub fn find_min_force(
    cfg: &ProtocolConfig,
    settings: &IntegratorSettings,
    engine: Engine,
    snr_tol: f64,
    max_runs: usize,
) -> Result<MinForceSearch> {
    if !(snr_tol > 0.0) {
        return Err(Error::invalid("snr_tol", "must be positive"));
    }
    let target = 1.0f64.asinh();
    let mut f = demkov::min_force_sigma_x(cfg)?;
    let mut prev: Option<(f64, f64)> = None;
    for run in 1..=max_runs {
        let r = run_with_engine(&cfg.with_force(f), settings, engine)?;
        if (r.snr_sx - 1.0).abs() <= snr_tol {
            let sensitivity = ((cfg.t_final()) * 1e-3).sqrt() * f;
            return Ok(MinForceSearch { force_yn: f, snr: r.snr_sx, runs: run, sensitivity });
        }
        let k = r.snr_sx.asinh();
        let next = match prev {
            Some((f0, k0)) if k != k0 => f + (target - k) * (f - f0) / (k - k0),
            _ if k > 0.0 => f * target / k,
            _ => 2.0 * f,
        };
        prev = Some((f, k));
        f = next;
    }
    Err(Error::ToleranceNotMet { t: cfg.t_final(), step: f })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// γ in kHz, read through the config's convention; t_final follows.
    Gamma,
    /// F_d in yN.
    Force,
    /// ⟨ṅ⟩ in 1/ms.
    HeatingRate,
    /// ω in kHz, read through the config's convention.
    Omega,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::Force => "force",
            SweepAxis::HeatingRate => "heating_rate",
            SweepAxis::Omega => "omega",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gamma" => Some(SweepAxis::Gamma),
            "force" => Some(SweepAxis::Force),
            "heating_rate" => Some(SweepAxis::HeatingRate),
            "omega" => Some(SweepAxis::Omega),
            _ => None,
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ProtocolConfig, value: f64) -> Result<ProtocolConfig> {
        let cfg = match self {
            SweepAxis::Gamma => base.with_gamma(base.convention.khz_to_rad_per_ms(value))?,
            SweepAxis::Force => base.with_force(value),
            SweepAxis::HeatingRate => {
                let nbar = base.heating.map_or(HeatingParams::DEFAULT_NBAR, |h| h.nbar);
                base.with_heating(Some(HeatingParams::new(value, nbar)?))
            }
            SweepAxis::Omega => ProtocolConfig { omega: base.convention.khz_to_rad_per_ms(value), ..base.clone() },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub base: ProtocolConfig,
    pub engine: Engine,
    /// Preparation and readout time added to t_final per shot [ms].
    pub overhead_ms: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "sweep needs at least one value"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", alloc::format!("non-finite sweep value {v}")));
        }
        if !(self.overhead_ms >= 0.0 && self.overhead_ms.is_finite()) {
            return Err(Error::invalid("overhead", "must be non-negative"));
        }
        if self.axis == SweepAxis::HeatingRate && self.engine == Engine::Pure {
            return Err(Error::invalid("engine", "a heating sweep needs the master-equation engine"));
        }
        self.base.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub outcome: core::result::Result<RunResult, Error>,
}

impl SweepPoint {
    pub fn error_message(&self) -> Option<String> {
        self.outcome.as_ref().err().map(|e| alloc::format!("{e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub engine: Engine,
    pub overhead_ms: f64,
    /// Same order as the requested values.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }
}

fn sweep_point(spec: &SweepSpec, settings: &IntegratorSettings, value: f64) -> SweepPoint {
    let outcome = spec.axis.apply(&spec.base, value).and_then(|cfg| run_with_engine(&cfg, settings, spec.engine));
    SweepPoint { axis_value: value, outcome }
}

/// One run per axis value; a failing point is recorded, not propagated.
pub fn sweep(spec: &SweepSpec, settings: &IntegratorSettings) -> Result<SweepResult> {
    spec.validate()?;
    settings.validate()?;

    #[cfg(feature = "std")]
    let points = {
        use rayon::prelude::*;
        spec.values.par_iter().map(|&v| sweep_point(spec, settings, v)).collect()
    };
    #[cfg(not(feature = "std"))]
    let points = spec.values.iter().map(|&v| sweep_point(spec, settings, v)).collect();

    Ok(SweepResult { axis: spec.axis, engine: spec.engine, overhead_ms: spec.overhead_ms, points })
}
