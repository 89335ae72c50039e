//! Low-lying spectrum of H(t) along the ramp, the gaps Δ_gap = E₁ − E₀ and
//! Δ_ge = E_j − E₀, and the adiabatic parameter
//!
//! ```text
//! ε = |⟨ψ_j|∂_tH|ψ_0⟩| / Δ_ge²,   ∂_tH = −γ (Ω_y(t)/2) σ_y
//! ```

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::hilbert::{OperatorMatrix, HERMITIAN_TOL};
use crate::linalg::{self, HermitianEigen};
use crate::model::{HamiltonianTerms, ProtocolConfig};
use crate::{Error, Result, C64};

/// Excited level Δ_ge and ε refer to unless told otherwise.
pub const DEFAULT_REFERENCE_LEVEL: usize = 3;
pub const DEFAULT_LEVEL_COUNT: usize = 4;
/// Gaps below this multiple of ω count as degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-9;
pub const RESIDUAL_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pub t: f64,
    /// Lowest k eigenvalues, ascending [rad/ms].
    pub eigenvalues: Vec<f64>,
    pub delta_gap: f64,
    pub delta_ge: f64,
    pub reference_level: usize,
    pub epsilon: f64,
    /// ε measured against the first excited level instead; `None` where
    /// E₁ − E₀ is degenerate.
    pub epsilon_first: Option<f64>,
    /// ε against every level j = 1..k, in order (`None` where degenerate).
    /// At F_d = 0 parity makes all levels outside the ground state's sector
    /// vanish identically.
    pub epsilon_levels: Vec<Option<f64>>,
    /// ⟨ψ_j|∂_tH|ψ_0⟩ with eigenvector phases carried continuously along the
    /// requested times.
    pub coupling: C64,
}

impl SpectrumSlice {
    /// Largest ε over the levels above the ground doublet (j ≥ 2).
    pub fn max_excited_epsilon(&self) -> f64 {
        self.epsilon_levels.iter().skip(1).flatten().fold(0.0, |m, &v| m.max(v))
    }
}

struct Slice {
    t: f64,
    eig: HermitianEigen,
    derivative: OperatorMatrix,
}

fn check_levels(cfg: &ProtocolConfig, k: usize, reference: usize) -> Result<()> {
    cfg.validate()?;
    let dim = cfg.hilbert.total_dim();
    if k < 4 || k > dim {
        return Err(Error::invalid("k", alloc::format!("need 4 <= k <= {dim}, got {k}")));
    }
    if reference == 0 || reference >= k {
        return Err(Error::invalid("reference_level", alloc::format!("must lie in 1..{k}, got {reference}")));
    }
    Ok(())
}

fn diagonalize(cfg: &ProtocolConfig, terms: &HamiltonianTerms, k: usize, t: f64) -> Result<Slice> {
    cfg.schedule.check_time(t)?;
    let h = terms.at(t);
    let eig = linalg::eigh(&h)?;
    let scale = h.max_abs().max(HERMITIAN_TOL) * h.dim() as f64;
    for j in 0..k {
        let v = eig.vector(j);
        let hv = h.apply(v);
        let r = hv.iter().zip(v).map(|(a, b)| (a - b * eig.values()[j]).norm_sqr()).sum::<f64>().sqrt();
        if r > RESIDUAL_LIMIT * scale {
            return Err(Error::EigensolverFailure);
        }
    }
    Ok(Slice { t, eig, derivative: terms.time_derivative(t) })
}

fn matrix_element(op: &OperatorMatrix, bra: &[C64], ket: &[C64]) -> C64 {
    op.apply(ket).iter().zip(bra).map(|(a, b)| b.conj() * a).sum()
}

fn summarize(cfg: &ProtocolConfig, s: &Slice, k: usize, reference: usize) -> Result<SpectrumSlice> {
    let e = s.eig.values();
    let delta_gap = (e[1] - e[0]).max(0.0);
    let delta_ge = e[reference] - e[0];
    let floor = DEGENERACY_RATIO * cfg.omega;
    if delta_ge < floor {
        return Err(Error::DegenerateLevels { gap: delta_ge });
    }
    let ground = s.eig.vector(0);
    let coupling = matrix_element(&s.derivative, s.eig.vector(reference), ground);
    let epsilon = coupling.norm() / (delta_ge * delta_ge);
    let epsilon_levels: Vec<Option<f64>> = (1..k)
        .map(|j| {
            let gap = e[j] - e[0];
            (gap >= floor).then(|| matrix_element(&s.derivative, s.eig.vector(j), ground).norm() / (gap * gap))
        })
        .collect();
    Ok(SpectrumSlice {
        t: s.t,
        eigenvalues: e[..k].to_vec(),
        delta_gap,
        delta_ge,
        reference_level: reference,
        epsilon,
        epsilon_first: epsilon_levels[0],
        epsilon_levels,
        coupling,
    })
}

/// Rotates each eigenvector of `next` so its overlap with the same level of
/// `prev` is real and non-negative.
fn align(prev: &HermitianEigen, next: &mut HermitianEigen, levels: usize) {
    for j in 0..levels {
        let overlap: C64 = prev.vector(j).iter().zip(next.vector(j)).map(|(a, b)| a.conj() * b).sum();
        if overlap.norm() > 0.0 {
            let phase = overlap.conj() / overlap.norm();
            for c in next.vector_mut(j) {
                *c *= phase;
            }
        }
    }
}

/// The lowest `k` levels at each of `times` (in [0, t_final]).
pub fn spectrum_along_ramp(cfg: &ProtocolConfig, k: usize, times: &[f64]) -> Result<Vec<SpectrumSlice>> {
    spectrum_with_reference(cfg, k, times, DEFAULT_REFERENCE_LEVEL)
}

/// As [`spectrum_along_ramp`] with an explicit reference level j for Δ_ge and ε.
pub fn spectrum_with_reference(
    cfg: &ProtocolConfig,
    k: usize,
    times: &[f64],
    reference: usize,
) -> Result<Vec<SpectrumSlice>> {
    check_levels(cfg, k, reference)?;
    let terms = HamiltonianTerms::new(cfg);

    #[cfg(feature = "std")]
    let mut slices: Vec<Slice> = {
        use rayon::prelude::*;
        times.par_iter().map(|&t| diagonalize(cfg, &terms, k, t)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "std"))]
    let mut slices: Vec<Slice> = times.iter().map(|&t| diagonalize(cfg, &terms, k, t)).collect::<Result<_>>()?;

    for i in 1..slices.len() {
        let (done, rest) = slices.split_at_mut(i);
        align(&done[i - 1].eig, &mut rest[0].eig, k);
    }
    slices.iter().map(|s| summarize(cfg, s, k, reference)).collect()
}

/// ε(t) against the default reference level.
pub fn adiabatic_parameter(cfg: &ProtocolConfig, t: f64) -> Result<f64> {
    adiabatic_parameter_for(cfg, t, DEFAULT_REFERENCE_LEVEL)
}

pub fn adiabatic_parameter_for(cfg: &ProtocolConfig, t: f64, reference: usize) -> Result<f64> {
    let k = (reference + 1).max(DEFAULT_LEVEL_COUNT);
    check_levels(cfg, k, reference)?;
    let slice = diagonalize(cfg, &HamiltonianTerms::new(cfg), k, t)?;
    Ok(summarize(cfg, &slice, k, reference)?.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::sample_times;
    use crate::model::ProtocolParams;

    fn cfg(g: f64, force: f64) -> ProtocolConfig {
        ProtocolParams { g_khz: g, force_yn: force, fock_dim: 20, ..Default::default() }.build().unwrap()
    }

    #[test]
    fn decoupled_gap_is_the_field() {
        let c = cfg(0.0, 0.0);
        let times = sample_times(c.t_final(), 9);
        for s in spectrum_along_ramp(&c, 4, &times).unwrap() {
            // the first phonon level undercuts the spin flip while Ω_y > ω
            let field = c.schedule.value(s.t).min(c.omega);
            assert!((s.delta_gap - field).abs() < 1e-9 * c.omega, "{} vs {field}", s.delta_gap);
            assert!(s.epsilon.abs() < 1e-12);
        }
    }

    #[test]
    fn level_arguments_are_checked() {
        let c = cfg(25.0, 0.0);
        assert!(spectrum_along_ramp(&c, 3, &[0.0]).is_err());
        assert!(spectrum_with_reference(&c, 4, &[0.0], 4).is_err());
        assert!(spectrum_with_reference(&c, 4, &[0.0], 0).is_err());
        assert!(spectrum_along_ramp(&c, 4, &[2.0 * c.t_final()]).is_err());
    }

    #[test]
    fn parity_hides_the_gap_partner() {
        let c = ProtocolParams { omega_khz: 45.0, fock_dim: 20, ..Default::default() }.build().unwrap();
        let s = &spectrum_along_ramp(&c, 4, &[0.0]).unwrap()[0];
        assert!(s.epsilon_first.unwrap() < 1e-12);
        // level 3 sits in the other parity sector; level 2 shares the ground's
        assert!(s.epsilon < 1e-12);
        assert!(s.epsilon_levels[1].unwrap() > 1e-6);
        assert_eq!(s.max_excited_epsilon(), s.epsilon_levels[1].unwrap());
    }

    #[test]
    fn single_point_matches_the_sweep() {
        let c = cfg(25.0, 1.0);
        let t = 0.3 * c.t_final();
        let s = &spectrum_along_ramp(&c, 5, &[t]).unwrap()[0];
        assert_eq!(s.eigenvalues.len(), 5);
        assert!((adiabatic_parameter(&c, t).unwrap() - s.epsilon).abs() < 1e-14);
    }
}
