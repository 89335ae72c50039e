//! Truncated spin ⊗ Fock space.
//!
//! Basis ordering is spin-major: index = s·N + n with s = 0 for |↑⟩ and
//! s = 1 for |↓⟩, n = 0..N−1 the phonon number. Every operator here is dense.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::linalg;
use crate::{Error, Result, C64};

/// Entrywise tolerance for the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest population tolerated in the top two Fock levels of a coherent
/// state before truncation is considered unsafe.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Size of the truncated Hilbert space: two spin levels times `fock_dim`
/// phonon levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    fock_dim: usize,
}

impl HilbertSpec {
    pub const DEFAULT_FOCK_DIM: usize = 40;

    pub fn new(fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::invalid("fock_dim", "need at least two Fock levels"));
        }
        Ok(Self { fock_dim })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn total_dim(&self) -> usize {
        2 * self.fock_dim
    }

    pub fn index(&self, spin: Spin, n: usize) -> usize {
        debug_assert!(n < self.fock_dim);
        spin.index() * self.fock_dim + n
    }
}

impl Default for HilbertSpec {
    fn default() -> Self {
        Self { fock_dim: Self::DEFAULT_FOCK_DIM }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Spin spinors in the {|↑⟩, |↓⟩} basis.
pub mod spinor {
    use super::*;

    pub fn plus_x() -> [C64; 2] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        [C64::new(h, 0.0), C64::new(h, 0.0)]
    }

    pub fn minus_x() -> [C64; 2] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        [C64::new(h, 0.0), C64::new(-h, 0.0)]
    }

    /// (|↑⟩ − i|↓⟩)/√2, the σ_y eigenstate with eigenvalue −1.
    pub fn minus_y() -> [C64; 2] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        [C64::new(h, 0.0), C64::new(0.0, -h)]
    }

    pub fn plus_y() -> [C64; 2] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        [C64::new(h, 0.0), C64::new(0.0, h)]
    }
}

/// Dense complex square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: usize,
    entries: Vec<C64>,
    hermitian: bool,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("dim", &self.dim)
            .field("hermitian", &self.hermitian)
            .finish_non_exhaustive()
    }
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim], hermitian: true }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * values.len() + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Builds a general (not flagged Hermitian) matrix from its entries.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries, hermitian: false }
    }

    /// Row-major entries. Length must be `dim * dim`.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries, hermitian: false })
    }

    /// Sets the Hermitian flag after checking `max |A − A†| ≤ HERMITIAN_TOL`.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let err = self.hermitian_error();
        if err > HERMITIAN_TOL {
            return Err(Error::invalid("operator", alloc::format!("not Hermitian (max |A - A^H| = {err:e})")));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.dim + j]
    }

    pub fn hermitian_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.entries[i * n + j] - self.entries[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.entries[j * n + i].conj()).with_flag(self.hermitian)
    }

    fn with_flag(mut self, hermitian: bool) -> Self {
        self.hermitian = hermitian;
        self
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                for (o, &b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, entries: out, hermitian: false }
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn scale(&self, c: C64) -> Self {
        let hermitian = self.hermitian && c.im == 0.0;
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * c).collect(), hermitian }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&z| z * c).collect(), hermitian: self.hermitian }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    /// A·v.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector dimension differs");
        let n = self.dim;
        (0..n)
            .map(|i| self.entries[i * n..(i + 1) * n].iter().zip(v).map(|(&a, &x)| a * x).sum())
            .collect()
    }

    /// Kronecker product A ⊗ B.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let (na, nb) = (a.dim, b.dim);
        let n = na * nb;
        let m = Self::from_fn(n, |i, j| a.entries[(i / nb) * na + j / nb] * b.entries[(i % nb) * nb + j % nb]);
        m.with_flag(a.hermitian && b.hermitian)
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        OperatorMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// Bosonic annihilation operator on the Fock factor alone (N×N).
pub fn fock_annihilation(fock_dim: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(fock_dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

fn spin_matrix(axis: Axis) -> OperatorMatrix {
    let entries = match axis {
        Axis::X => vec![ZERO, ONE, ONE, ZERO],
        Axis::Y => vec![ZERO, -I, I, ZERO],
        Axis::Z => vec![ONE, ZERO, ZERO, -ONE],
    };
    OperatorMatrix { dim: 2, entries, hermitian: true }
}

/// I₂ ⊗ â.
pub fn annihilation(spec: HilbertSpec) -> OperatorMatrix {
    OperatorMatrix::kron(&OperatorMatrix::identity(2), &fock_annihilation(spec.fock_dim))
}

/// I₂ ⊗ â†.
pub fn creation(spec: HilbertSpec) -> OperatorMatrix {
    annihilation(spec).adjoint()
}

/// I₂ ⊗ â†â.
pub fn number(spec: HilbertSpec) -> OperatorMatrix {
    let n = spec.fock_dim;
    let values: Vec<f64> = (0..2 * n).map(|i| (i % n) as f64).collect();
    OperatorMatrix::diagonal(&values)
}

/// Position quadrature Ẑ = â + â†.
pub fn quadrature(spec: HilbertSpec) -> OperatorMatrix {
    let a = annihilation(spec);
    let mut z = &a + &a.adjoint();
    z.hermitian = true;
    z
}

/// σ_axis ⊗ I_Fock.
pub fn pauli(axis: Axis, spec: HilbertSpec) -> OperatorMatrix {
    OperatorMatrix::kron(&spin_matrix(axis), &OperatorMatrix::identity(spec.fock_dim))
}

/// Parity Π = σ_y ⊗ (−1)^{â†â}: maps â → −â, σ_x → −σ_x, σ_y → σ_y.
pub fn parity(spec: HilbertSpec) -> OperatorMatrix {
    let signs: Vec<f64> = (0..spec.fock_dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    OperatorMatrix::kron(&spin_matrix(Axis::Y), &OperatorMatrix::diagonal(&signs))
}

/// Pure state in the truncated space (or in the Fock factor alone).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for z in &mut self.amplitudes {
                *z /= norm;
            }
        }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "state dimensions differ");
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Population summed over the top `levels` Fock levels of each spin block.
    pub fn fock_tail(&self, spec: HilbertSpec, levels: usize) -> f64 {
        let n = spec.fock_dim();
        (0..self.dim())
            .filter(|i| i % n >= n.saturating_sub(levels))
            .map(|i| self.amplitudes[i].norm_sqr())
            .sum()
    }
}

/// Mixed state, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    /// |ψ⟩⟨ψ|.
    pub fn from_pure(state: &StateVector) -> Self {
        let psi = state.amplitudes();
        let dim = psi.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                entries.push(a * b.conj());
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub fn hermitian_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let n = self.dim;
        let herm = OperatorMatrix::from_fn(n, |i, j| (self.entries[i * n + j] + self.entries[j * n + i].conj()) * 0.5);
        let values = linalg::eigvalsh(&herm)?;
        Ok(values.first().copied().unwrap_or(0.0))
    }

    pub fn population(&self, index: usize) -> f64 {
        self.entries[index * self.dim + index].re
    }

    /// Population summed over the top `levels` Fock levels of each spin block.
    pub fn fock_tail(&self, spec: HilbertSpec, levels: usize) -> f64 {
        let n = spec.fock_dim();
        (0..self.dim).filter(|i| i % n >= n.saturating_sub(levels)).map(|i| self.population(i)).sum()
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn overlap(&self, state: &StateVector) -> f64 {
        let rho_psi = self.apply(state.amplitudes());
        state.amplitudes().iter().zip(&rho_psi).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|i| self.entries[i * n..(i + 1) * n].iter().zip(v).map(|(&a, &x)| a * x).sum()).collect()
    }
}

/// Anything an expectation value can be taken over.
pub trait QuantumState {
    fn dim(&self) -> usize;

    /// ⟨A⟩ without dimension or reality checks.
    fn raw_expectation(&self, op: &OperatorMatrix) -> C64;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn raw_expectation(&self, op: &OperatorMatrix) -> C64 {
        let a_psi = op.apply(&self.amplitudes);
        self.amplitudes.iter().zip(&a_psi).map(|(a, b)| a.conj() * b).sum()
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn raw_expectation(&self, op: &OperatorMatrix) -> C64 {
        // Tr(ρA) = Σ_ij ρ_ij A_ji
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[i * n + j] * op.get(j, i);
            }
        }
        acc
    }
}

/// ⟨ψ|A|ψ⟩ or Tr(ρA). For operators flagged Hermitian the imaginary part is
/// checked against 1e−8 and dropped.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, op: &OperatorMatrix) -> Result<C64> {
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: state.dim() });
    }
    let value = state.raw_expectation(op);
    if op.is_hermitian() {
        if value.im.abs() > 1e-8 * value.re.abs().max(1.0) {
            return Err(Error::NonRealExpectation { imag: value.im });
        }
        return Ok(C64::new(value.re, 0.0));
    }
    Ok(value)
}

/// Coherent state |α⟩ on the Fock factor, renormalized after truncation.
///
/// Fails with [`Error::Truncation`] when the untruncated population of the two
/// highest kept levels exceeds [`COHERENT_TAIL_LIMIT`].
pub fn coherent_state(alpha: C64, spec: HilbertSpec) -> Result<StateVector> {
    let n = spec.fock_dim();
    let mut amps = Vec::with_capacity(n);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for k in 1..n {
        c = c * alpha / (k as f64).sqrt();
        amps.push(c);
    }
    let tail: f64 = amps[n - 2..].iter().map(|z| z.norm_sqr()).sum();
    if tail > COHERENT_TAIL_LIMIT {
        return Err(Error::Truncation { population: tail, limit: COHERENT_TAIL_LIMIT });
    }
    let mut state = StateVector::new(amps);
    state.normalize();
    Ok(state)
}

/// spin ⊗ fock in the spin-major basis.
pub fn product_state(spin: [C64; 2], fock: &StateVector, spec: HilbertSpec) -> Result<StateVector> {
    if fock.dim() != spec.fock_dim() {
        return Err(Error::DimensionMismatch { expected: spec.fock_dim(), found: fock.dim() });
    }
    let mut amps = Vec::with_capacity(spec.total_dim());
    for s in spin {
        amps.extend(fock.amplitudes().iter().map(|&c| s * c));
    }
    Ok(StateVector::new(amps))
}

/// The cat-manifold states |ψ₊⟩ = |+⟩_x|α⟩ and |ψ₋⟩ = |−⟩_x|−α⟩ with α = −g/ω.
pub fn cat_basis(g: f64, omega: f64, spec: HilbertSpec) -> Result<(StateVector, StateVector)> {
    let alpha = C64::new(-g / omega, 0.0);
    let plus = product_state(spinor::plus_x(), &coherent_state(alpha, spec)?, spec)?;
    let minus = product_state(spinor::minus_x(), &coherent_state(-alpha, spec)?, spec)?;
    Ok((plus, minus))
}
