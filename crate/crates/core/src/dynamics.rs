//! Time evolution along the ramp: Schrödinger equation for pure states and the
//! motional-heating master equation for density matrices.
//!
//! Both integrate in the interaction picture of H₀ = ω a†a, where
//!
//! ```text
//! H̃(t) = (Ω_y(t)/2) σ_y + e^{−iωt} B + e^{iωt} B†,   B = (g σ_x + f) a
//! ```
//!
//! This removes the ω·N spread of the bare spectrum from the step-size limit.
//! The heating dissipators are invariant under the frame change. States are
//! rotated back to the lab frame before any observable is sampled.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = −i[H, ρ] + γ_dec(n̄+1)(aρa† − ½{a†a, ρ}) + γ_dec n̄(a†ρa − ½{aa†, ρ})
//! ```
//!
//! with γ_dec = ⟨ṅ⟩/n̄.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::hilbert::{self, Axis, DensityMatrix, HilbertSpec, OperatorMatrix, QuantumState, StateVector};
use crate::linalg::SparseMatrix;
use crate::model::{self, ProtocolConfig};
use crate::ode::{self, Dopri5, Tolerances};
use crate::{Error, Result, C64};

pub const DEFAULT_SAMPLE_COUNT: usize = 400;
/// Population allowed in the top two Fock levels at any sample.
pub const TRUNCATION_LIMIT: f64 = 1e-6;
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
pub const POSITIVITY_LIMIT: f64 = -1e-6;
pub const DENSITY_HERMITICITY_LIMIT: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// [ms]
    pub max_step: f64,
    pub method_order: u32,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-11, abs_tol: 1e-13, max_step: 0.01, method_order: ode::ORDER }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::invalid(name, format!("must lie in (0, 1e-2], got {v}")));
            }
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::invalid("max_step", format!("must be positive, got {}", self.max_step)));
        }
        if self.method_order < 4 || self.method_order > ode::ORDER {
            return Err(Error::invalid(
                "method_order",
                format!("supported orders are 4..={}, got {}", ode::ORDER, self.method_order),
            ));
        }
        Ok(())
    }

    /// Halved step cap and tolerances tightened tenfold.
    pub fn refined(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1,
            max_step: self.max_step * 0.5,
            ..*self
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_step: self.max_step }
    }
}

/// Observables at one sample time (lab frame).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Observables {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    /// ⟨a + a†⟩
    pub z: f64,
    /// ⟨a†a⟩
    pub nbar: f64,
    /// ‖ψ‖² or Tr ρ.
    pub norm: f64,
    /// |⟨ψ₊|ψ⟩|² or ⟨ψ₊|ρ|ψ₊⟩.
    pub p_plus: f64,
    pub p_minus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl FinalState {
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        match self {
            FinalState::Pure(s) => hilbert::expectation(s, op),
            FinalState::Mixed(r) => hilbert::expectation(r, op),
        }
    }
}

/// Run diagnostics and the two candidate initial gaps for the two-level
/// comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryMeta {
    /// E₁ − E₀ of H(0) when the run started from the computed ground state.
    pub initial_gap: Option<f64>,
    pub omega_y0: f64,
    /// |⟨ψ_g(0)| (|−⟩_y|0⟩)|² when started from the ground state.
    pub initial_overlap: Option<f64>,
    pub max_norm_drift: f64,
    /// Smallest eigenvalue of ρ over all samples (mixed runs).
    pub min_eigenvalue: Option<f64>,
    pub max_fock_tail: f64,
    pub stats: ode::Stats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub records: Vec<Observables>,
    pub final_state: FinalState,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn last(&self) -> &Observables {
        self.records.last().expect("trajectories hold at least two samples")
    }
}

/// Uniform grid on [0, t_final], both ends included.
pub fn sample_times(t_final: f64, count: usize) -> Vec<f64> {
    let last = count - 1;
    (0..count).map(|k| if k == last { t_final } else { t_final * k as f64 / last as f64 }).collect()
}

/// Interaction-picture generator pieces.
struct Frame {
    omega: f64,
    schedule: model::RampSchedule,
    half_sy: SparseMatrix,
    b: SparseMatrix,
    b_dag: SparseMatrix,
    h: SparseMatrix,
}

impl Frame {
    fn new(cfg: &ProtocolConfig) -> Self {
        let spec = cfg.hilbert;
        let a = hilbert::annihilation(spec);
        let sx = hilbert::pauli(Axis::X, spec);
        let coupling = &sx.scale_real(cfg.g) + &OperatorMatrix::identity(spec.total_dim()).scale_real(cfg.force_coefficient());
        let b_dense = coupling.matmul(&a);
        let half_sy = SparseMatrix::from_dense(&hilbert::pauli(Axis::Y, spec).scale_real(0.5));
        let b = SparseMatrix::from_dense(&b_dense);
        let b_dag = SparseMatrix::from_dense(&b_dense.adjoint());
        let one = C64::new(1.0, 0.0);
        let h = SparseMatrix::linear_combination(&[(one, &half_sy), (one, &b), (one, &b_dag)]);
        Self { omega: cfg.omega, schedule: cfg.schedule, half_sy, b, b_dag, h }
    }

    fn refresh(&mut self, t: f64) {
        let phase = C64::new(0.0, -self.omega * t).exp();
        let field = C64::new(self.schedule.value(t), 0.0);
        self.h.refill(&[(field, &self.half_sy), (phase, &self.b), (phase.conj(), &self.b_dag)]);
    }
}

/// Operators evaluated at every sample.
struct Probes {
    sx: OperatorMatrix,
    sy: OperatorMatrix,
    sz: OperatorMatrix,
    z: OperatorMatrix,
    n: OperatorMatrix,
    plus: StateVector,
    minus: StateVector,
    spec: HilbertSpec,
}

impl Probes {
    fn new(cfg: &ProtocolConfig) -> Result<Self> {
        let spec = cfg.hilbert;
        let (plus, minus) = hilbert::cat_basis(cfg.g, cfg.omega, spec)?;
        Ok(Self {
            sx: hilbert::pauli(Axis::X, spec),
            sy: hilbert::pauli(Axis::Y, spec),
            sz: hilbert::pauli(Axis::Z, spec),
            z: hilbert::quadrature(spec),
            n: hilbert::number(spec),
            plus,
            minus,
            spec,
        })
    }

    fn measure<S: QuantumState>(&self, state: &S) -> Result<[f64; 5]> {
        Ok([
            hilbert::expectation(state, &self.sx)?.re,
            hilbert::expectation(state, &self.sy)?.re,
            hilbert::expectation(state, &self.sz)?.re,
            hilbert::expectation(state, &self.z)?.re,
            hilbert::expectation(state, &self.n)?.re,
        ])
    }

    fn pure(&self, psi: &StateVector) -> Result<Observables> {
        let [sx, sy, sz, z, nbar] = self.measure(psi)?;
        Ok(Observables {
            sx,
            sy,
            sz,
            z,
            nbar,
            norm: psi.norm_sqr(),
            p_plus: self.plus.inner(psi).norm_sqr(),
            p_minus: self.minus.inner(psi).norm_sqr(),
        })
    }

    fn mixed(&self, rho: &DensityMatrix) -> Result<Observables> {
        let [sx, sy, sz, z, nbar] = self.measure(rho)?;
        Ok(Observables {
            sx,
            sy,
            sz,
            z,
            nbar,
            norm: rho.trace().re,
            p_plus: rho.overlap(&self.plus),
            p_minus: rho.overlap(&self.minus),
        })
    }
}

fn check_inputs(cfg: &ProtocolConfig, settings: &IntegratorSettings, sample_count: usize) -> Result<()> {
    cfg.validate()?;
    settings.validate()?;
    if sample_count < 2 {
        return Err(Error::invalid("sample_count", "need at least two samples"));
    }
    Ok(())
}

fn check_tail(tail: f64) -> Result<()> {
    if tail > TRUNCATION_LIMIT {
        return Err(Error::Truncation { population: tail, limit: TRUNCATION_LIMIT });
    }
    Ok(())
}

/// Schrödinger evolution from the ground state of H(0).
pub fn evolve_pure(cfg: &ProtocolConfig, settings: &IntegratorSettings, sample_count: usize) -> Result<Trajectory> {
    if cfg.heating.is_some() {
        return Err(Error::invalid("heating", "pure-state evolution needs a config without heating"));
    }
    check_inputs(cfg, settings, sample_count)?;
    let gs = model::initial_ground_state(cfg)?;
    let mut traj = evolve_pure_from(cfg, settings, sample_count, gs.state)?;
    traj.meta.initial_gap = Some(gs.gap);
    traj.meta.initial_overlap = Some(gs.overlap_with_minus_y_vacuum);
    Ok(traj)
}

/// Schrödinger evolution from an arbitrary normalized state (heating ignored).
pub fn evolve_pure_from(
    cfg: &ProtocolConfig,
    settings: &IntegratorSettings,
    sample_count: usize,
    initial: StateVector,
) -> Result<Trajectory> {
    check_inputs(cfg, settings, sample_count)?;
    let dim = cfg.hilbert.total_dim();
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: initial.dim() });
    }
    let probes = Probes::new(cfg)?;
    let mut frame = Frame::new(cfg);
    let times = sample_times(cfg.t_final(), sample_count);
    let norm0 = initial.norm_sqr();
    let mut psi = initial.into_amplitudes();
    let mut stepper = Dopri5::new(dim, settings.tolerances());
    let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        frame.refresh(t);
        frame.h.mul_vec_into(MINUS_I, y, dy);
    };

    let mut records = Vec::with_capacity(sample_count);
    let mut meta = TrajectoryMeta { omega_y0: cfg.schedule.omega_y0(), ..Default::default() };
    let mut lab = StateVector::new(psi.clone());
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            stepper.advance(&mut rhs, times[k - 1], t, &mut psi)?;
        }
        lab = StateVector::new(lab_vector(cfg, t, &psi));
        let obs = probes.pure(&lab)?;
        let drift = (obs.norm - norm0).abs();
        meta.max_norm_drift = meta.max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::InvariantViolated { quantity: "norm", drift, limit: NORM_DRIFT_LIMIT });
        }
        let tail = lab.fock_tail(probes.spec, 2);
        meta.max_fock_tail = meta.max_fock_tail.max(tail);
        check_tail(tail)?;
        records.push(obs);
    }
    meta.stats = stepper.stats();
    Ok(Trajectory { times, records, final_state: FinalState::Pure(lab), meta })
}

/// Master-equation evolution from the ground state of H(0).
pub fn evolve_lindblad(cfg: &ProtocolConfig, settings: &IntegratorSettings, sample_count: usize) -> Result<Trajectory> {
    if cfg.heating.is_none() {
        return Err(Error::invalid("heating", "master-equation evolution needs heating parameters"));
    }
    check_inputs(cfg, settings, sample_count)?;
    let gs = model::initial_ground_state(cfg)?;
    let mut traj = evolve_lindblad_from(cfg, settings, sample_count, DensityMatrix::from_pure(&gs.state))?;
    traj.meta.initial_gap = Some(gs.gap);
    traj.meta.initial_overlap = Some(gs.overlap_with_minus_y_vacuum);
    Ok(traj)
}

/// Master-equation evolution from an arbitrary density matrix. A config
/// without heating evolves unitarily.
pub fn evolve_lindblad_from(
    cfg: &ProtocolConfig,
    settings: &IntegratorSettings,
    sample_count: usize,
    initial: DensityMatrix,
) -> Result<Trajectory> {
    check_inputs(cfg, settings, sample_count)?;
    let spec = cfg.hilbert;
    let d = spec.total_dim();
    if initial.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: initial.dim() });
    }
    let probes = Probes::new(cfg)?;
    let mut frame = Frame::new(cfg);
    let times = sample_times(cfg.t_final(), sample_count);
    let trace0 = initial.trace().re;

    let (down_rate, up_rate) = match cfg.heating {
        Some(h) => (h.decay_rate() * (h.nbar + 1.0), h.decay_rate() * h.nbar),
        None => (0.0, 0.0),
    };
    let a = SparseMatrix::from_dense(&hilbert::annihilation(spec));
    let a_dag = SparseMatrix::from_dense(&hilbert::creation(spec));
    let n = spec.fock_dim();
    // diagonals of a†a and aa† in the truncated space
    let number: Vec<f64> = (0..d).map(|i| (i % n) as f64).collect();
    let anti_number: Vec<f64> = (0..d).map(|i| if i % n + 1 < n { (i % n + 1) as f64 } else { 0.0 }).collect();
    let damping: Vec<f64> = number.iter().zip(&anti_number).map(|(&p, &q)| 0.5 * (down_rate * p + up_rate * q)).collect();
    let dissipative = down_rate > 0.0 || up_rate > 0.0;

    let mut work = vec![ZERO; d * d];
    let mut work2 = vec![ZERO; d * d];
    let mut rhs = |t: f64, rho: &[C64], out: &mut [C64]| {
        frame.refresh(t);
        // −i(Hρ − ρH) with ρH = (Hρ)† for Hermitian ρ, H
        frame.h.mul_dense_into(rho, &mut work);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = MINUS_I * (work[i * d + j] - work[j * d + i].conj());
            }
        }
        if !dissipative {
            return;
        }
        for (jump, rate) in [(&a, down_rate), (&a_dag, up_rate)] {
            if rate == 0.0 {
                continue;
            }
            // L ρ L† = L (L ρ)†
            jump.mul_dense_into(rho, &mut work);
            adjoint_in_place(&mut work, d);
            jump.mul_dense_into(&work, &mut work2);
            for (o, w) in out.iter_mut().zip(&work2) {
                *o += w * rate;
            }
        }
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] -= rho[i * d + j] * (damping[i] + damping[j]);
            }
        }
    };

    let mut rho = initial.into_entries();
    let mut stepper = Dopri5::new(d * d, settings.tolerances());
    let mut records = Vec::with_capacity(sample_count);
    let mut meta = TrajectoryMeta { omega_y0: cfg.schedule.omega_y0(), ..Default::default() };
    let mut min_eig = f64::INFINITY;
    let mut lab = DensityMatrix::from_entries(d, lab_matrix(cfg, 0.0, &rho))?;
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            stepper.advance(&mut rhs, times[k - 1], t, &mut rho)?;
        }
        lab = DensityMatrix::from_entries(d, lab_matrix(cfg, t, &rho))?;
        let obs = probes.mixed(&lab)?;
        let drift = (obs.norm - trace0).abs();
        meta.max_norm_drift = meta.max_norm_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::InvariantViolated { quantity: "trace", drift, limit: TRACE_DRIFT_LIMIT });
        }
        let herm = lab.hermitian_error();
        if herm > DENSITY_HERMITICITY_LIMIT {
            return Err(Error::InvariantViolated { quantity: "hermiticity", drift: herm, limit: DENSITY_HERMITICITY_LIMIT });
        }
        let lowest = lab.min_eigenvalue()?;
        min_eig = min_eig.min(lowest);
        if lowest < POSITIVITY_LIMIT {
            return Err(Error::PositivityViolation { t, min_eigenvalue: lowest });
        }
        let tail = lab.fock_tail(spec, 2);
        meta.max_fock_tail = meta.max_fock_tail.max(tail);
        check_tail(tail)?;
        records.push(obs);
    }
    meta.min_eigenvalue = Some(min_eig);
    meta.stats = stepper.stats();
    Ok(Trajectory { times, records, final_state: FinalState::Mixed(lab), meta })
}

fn frame_phases(cfg: &ProtocolConfig, t: f64) -> Vec<C64> {
    let n = cfg.hilbert.fock_dim();
    (0..cfg.hilbert.total_dim()).map(|i| C64::new(0.0, -cfg.omega * (i % n) as f64 * t).exp()).collect()
}

/// Interaction-picture amplitudes → lab frame at time `t`.
pub(crate) fn lab_vector(cfg: &ProtocolConfig, t: f64, psi: &[C64]) -> Vec<C64> {
    frame_phases(cfg, t).iter().zip(psi).map(|(p, c)| p * c).collect()
}

/// Interaction-picture density matrix → lab frame at time `t`.
pub(crate) fn lab_matrix(cfg: &ProtocolConfig, t: f64, rho: &[C64]) -> Vec<C64> {
    let phases = frame_phases(cfg, t);
    let d = phases.len();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(phases[i] * rho[i * d + j] * phases[j].conj());
        }
    }
    out
}

fn adjoint_in_place(m: &mut [C64], d: usize) {
    for i in 0..d {
        m[i * d + i] = m[i * d + i].conj();
        for j in i + 1..d {
            let (a, b) = (m[i * d + j], m[j * d + i]);
            m[i * d + j] = b.conj();
            m[j * d + i] = a.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{HeatingParams, ProtocolParams};

    fn small(params: ProtocolParams) -> ProtocolConfig {
        ProtocolParams { fock_dim: 16, ..params }.build().unwrap()
    }

    #[test]
    fn settings_validation() {
        assert!(IntegratorSettings::default().validate().is_ok());
        assert!(IntegratorSettings { rel_tol: 0.1, ..Default::default() }.validate().is_err());
        assert!(IntegratorSettings { max_step: 0.0, ..Default::default() }.validate().is_err());
        assert!(IntegratorSettings { method_order: 3, ..Default::default() }.validate().is_err());
        let r = IntegratorSettings::default().refined();
        assert_eq!(r.max_step, 0.005);
    }

    #[test]
    fn sample_grid_endpoints() {
        let t = sample_times(2.5, 5);
        assert_eq!(t, vec![0.0, 0.625, 1.25, 1.875, 2.5]);
    }

    #[test]
    fn frame_round_trip() {
        let cfg = small(ProtocolParams::default());
        let d = cfg.hilbert.total_dim();
        let rho: Vec<C64> = (0..d * d).map(|k| C64::new(k as f64, 1.0)).collect();
        let back = lab_matrix(&cfg, -0.3, &lab_matrix(&cfg, 0.3, &rho));
        for (x, y) in back.iter().zip(&rho) {
            assert!((x - y).norm() < 1e-9 * y.norm().max(1.0));
        }
        let v: Vec<C64> = (0..d).map(|k| C64::new(1.0, k as f64)).collect();
        let w = lab_vector(&cfg, 0.7, &v);
        let n = cfg.hilbert.fock_dim();
        assert!((w[n + 3] - v[n + 3] * C64::new(0.0, -cfg.omega * 3.0 * 0.7).exp()).norm() < 1e-12);
    }

    #[test]
    fn decoupled_spin_stays_in_minus_y() {
        let cfg = small(ProtocolParams { g_khz: 0.0, ..Default::default() });
        let traj = evolve_pure(&cfg, &IntegratorSettings::default(), 50).unwrap();
        for r in &traj.records {
            assert!((r.sy + 1.0).abs() < 1e-8, "{}", r.sy);
        }
    }

    #[test]
    fn heating_requires_the_master_equation() {
        let cfg = small(ProtocolParams::default()).with_heating(Some(HeatingParams::with_rate(0.1).unwrap()));
        assert!(evolve_pure(&cfg, &IntegratorSettings::default(), 10).is_err());
        let plain = small(ProtocolParams::default());
        assert!(evolve_lindblad(&plain, &IntegratorSettings::default(), 10).is_err());
    }

    #[test]
    fn adjoint_helper() {
        let mut m = vec![C64::new(1.0, 2.0), C64::new(3.0, 4.0), C64::new(5.0, 6.0), C64::new(7.0, 8.0)];
        adjoint_in_place(&mut m, 2);
        assert_eq!(m, vec![C64::new(1.0, -2.0), C64::new(5.0, -6.0), C64::new(3.0, -4.0), C64::new(7.0, -8.0)]);
    }
}
