//! Dense Hermitian eigensolver and a minimal CSR matrix.
//!
//! The eigensolver reduces the matrix to real symmetric tridiagonal form with
//! complex Householder reflections and then runs the implicit QL iteration,
//! accumulating the (real) rotations onto the complex reflector basis.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::hilbert::OperatorMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    dim: usize,
    values: Vec<f64>,
    /// Column-major: vector j occupies `vectors[j*dim .. (j+1)*dim]`.
    vectors: Vec<C64>,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, j: usize) -> &[C64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    pub fn vector_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.vectors[j * self.dim..(j + 1) * self.dim]
    }
}

/// Column-major working copy of a Hermitian matrix reduced to tridiagonal
/// form, with the reflectors needed to rebuild Q.
struct Tridiagonal {
    n: usize,
    diag: Vec<f64>,
    /// `off[i]` couples i and i+1; `off[n-1] = 0`.
    off: Vec<f64>,
    reflectors: Vec<(C64, Vec<C64>)>,
}

fn reduce(a: &OperatorMatrix) -> Tridiagonal {
    let n = a.dim();
    // column-major copy: w[i + j*n] = A[i][j]
    let mut w = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i + j * n] = a.get(i, j);
        }
    }
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    let mut p = vec![ZERO; n];

    for i in 0..n.saturating_sub(1) {
        // reflector annihilating A[i+2.., i]
        let m = n - i - 1;
        let alpha = w[(i + 1) + i * n];
        let xnorm = (i + 2..n).map(|r| w[r + i * n].norm_sqr()).sum::<f64>().sqrt();
        let mut v = vec![ZERO; m];
        v[0] = ONE;
        let (beta, tau);
        if xnorm == 0.0 && alpha.im == 0.0 {
            tau = ZERO;
            beta = alpha.re;
        } else {
            let norm = (alpha.norm_sqr() + xnorm * xnorm).sqrt();
            beta = if alpha.re >= 0.0 { -norm } else { norm };
            tau = C64::new((beta - alpha.re) / beta, -alpha.im / beta);
            let scale = ONE / (alpha - beta);
            for r in 1..m {
                v[r] = w[(i + 1 + r) + i * n] * scale;
            }
        }
        off[i] = beta;
        if tau != ZERO {
            // p = tau * A22 v
            for r in 0..m {
                let mut acc = ZERO;
                for c in 0..m {
                    acc += w[(i + 1 + r) + (i + 1 + c) * n] * v[c];
                }
                p[r] = tau * acc;
            }
            // w = p - (tau/2)(p^H v) v
            let pv: C64 = (0..m).map(|r| p[r].conj() * v[r]).sum();
            let alpha2 = tau * pv * -0.5;
            for r in 0..m {
                p[r] += alpha2 * v[r];
            }
            // A22 -= v w^H + w v^H
            for c in 0..m {
                let (vc, pc) = (v[c].conj(), p[c].conj());
                for r in 0..m {
                    w[(i + 1 + r) + (i + 1 + c) * n] -= v[r] * pc + p[r] * vc;
                }
            }
        }
        diag[i] = w[i + i * n].re;
        reflectors.push((tau, v));
    }
    if n > 0 {
        diag[n - 1] = w[(n - 1) + (n - 1) * n].re;
        off[n - 1] = 0.0;
    }
    Tridiagonal { n, diag, off, reflectors }
}

impl Tridiagonal {
    /// Q = H₀ H₁ … H_{n−2}, column-major.
    fn q(&self) -> Vec<C64> {
        let n = self.n;
        let mut q = vec![ZERO; n * n];
        for i in 0..n {
            q[i + i * n] = ONE;
        }
        for (i, (tau, v)) in self.reflectors.iter().enumerate().rev() {
            if *tau == ZERO {
                continue;
            }
            let off = i + 1;
            // Q[off.., :] -= tau v (v^H Q[off.., :])
            for col in 0..n {
                let dot: C64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * q[(off + r) + col * n]).sum();
                if dot == ZERO {
                    continue;
                }
                let f = *tau * dot;
                for (r, vr) in v.iter().enumerate() {
                    q[(off + r) + col * n] -= f * vr;
                }
            }
        }
        q
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. When `vectors` is given the
/// rotations are applied to its columns (column-major, n×n).
fn tql(diag: &mut [f64], off: &mut [f64], mut vectors: Option<&mut [C64]>) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut shift = 0.0;
    let mut tst1 = 0.0_f64;
    let max_iter = 60 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(diag[l].abs() + off[l].abs());
        let mut m = l;
        while m < n {
            if off[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::EigensolverFailure);
                }
                let g = diag[l];
                let mut p = (diag[l + 1] - g) / (2.0 * off[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                diag[l] = off[l] / (p + r);
                diag[l + 1] = off[l] * (p + r);
                let dl1 = diag[l + 1];
                let mut h = g - diag[l];
                for d in &mut diag[l + 2..n] {
                    *d -= h;
                }
                shift += h;

                p = diag[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = off[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * off[i];
                    h = c * p;
                    r = p.hypot(off[i]);
                    off[i + 1] = s * r;
                    s = off[i] / r;
                    c = p / r;
                    p = c * diag[i] - s * g;
                    diag[i + 1] = h + s * (c * g + s * diag[i]);
                    if let Some(v) = vectors.as_deref_mut() {
                        let (left, right) = v.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..];
                        let col_next = &mut right[..n];
                        for k in 0..n {
                            let hk = col_next[k];
                            col_next[k] = col_i[k] * s + hk * c;
                            col_i[k] = col_i[k] * c - hk * s;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * off[l] / dl1;
                off[l] = s * p;
                diag[l] = c * p;
                if off[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        diag[l] += shift;
        off[l] = 0.0;
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix. Only the lower triangle of
/// the reduction is trusted, so the input should be Hermitian to rounding.
pub fn eigh(a: &OperatorMatrix) -> Result<HermitianEigen> {
    let mut t = reduce(a);
    let n = t.n;
    let mut vectors = t.q();
    tql(&mut t.diag, &mut t.off, Some(&mut vectors))?;
    if t.diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolverFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| t.diag[i].total_cmp(&t.diag[j]));
    let values = order.iter().map(|&i| t.diag[i]).collect();
    let mut sorted = Vec::with_capacity(n * n);
    for &j in &order {
        sorted.extend_from_slice(&vectors[j * n..(j + 1) * n]);
    }
    Ok(HermitianEigen { dim: n, values, vectors: sorted })
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(a: &OperatorMatrix) -> Result<Vec<f64>> {
    let mut t = reduce(a);
    tql(&mut t.diag, &mut t.off, None)?;
    if t.diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolverFailure);
    }
    t.diag.sort_by(f64::total_cmp);
    Ok(t.diag)
}

/// Compressed sparse row matrix for the hot loops of the integrators.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn from_dense(a: &OperatorMatrix) -> Self {
        let n = a.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let z = a.get(i, j);
                if z != ZERO {
                    cols.push(j);
                    values.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim: n, row_ptr, cols, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Same sparsity pattern, values combined as Σ cₖ·Mₖ over a union of
    /// patterns. All inputs must share the dimension.
    pub fn linear_combination(terms: &[(C64, &SparseMatrix)]) -> Self {
        let n = terms.first().map_or(0, |(_, m)| m.dim);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut dense_row = vec![ZERO; n];
        let mut touched = vec![false; n];
        let mut idx = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            idx.clear();
            for (c, m) in terms {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    let j = m.cols[k];
                    if !touched[j] {
                        touched[j] = true;
                        idx.push(j);
                    }
                    dense_row[j] += *c * m.values[k];
                }
            }
            idx.sort_unstable();
            for &j in &idx {
                cols.push(j);
                values.push(dense_row[j]);
                dense_row[j] = ZERO;
                touched[j] = false;
            }
            row_ptr.push(cols.len());
        }
        Self { dim: n, row_ptr, cols, values }
    }

    /// Overwrites the stored values with Σ cₖ·Mₖ. Each Mₖ's pattern must be a
    /// subset of `self`'s pattern, as produced by [`Self::linear_combination`].
    pub fn refill(&mut self, terms: &[(C64, &SparseMatrix)]) {
        for v in &mut self.values {
            *v = ZERO;
        }
        for i in 0..self.dim {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for (c, m) in terms {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    let j = m.cols[k];
                    let pos = lo + self.cols[lo..hi].binary_search(&j).expect("pattern mismatch");
                    self.values[pos] += *c * m.values[k];
                }
            }
        }
    }

    /// y = coef · A x.
    pub fn mul_vec_into(&self, coef: C64, x: &[C64], y: &mut [C64]) {
        for (i, out) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *out = coef * acc;
        }
    }

    /// Y = A X for a row-major square X of the same dimension.
    pub fn mul_dense_into(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim;
        for v in y.iter_mut() {
            *v = ZERO;
        }
        for i in 0..n {
            let out = &mut y[i * n..(i + 1) * n];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k];
                let row = &x[self.cols[k] * n..(self.cols[k] + 1) * n];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
    }

    pub fn to_dense(&self) -> OperatorMatrix {
        let n = self.dim;
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                entries[i * n + self.cols[k]] = self.values[k];
            }
        }
        OperatorMatrix::from_entries(n, entries).expect("square by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &OperatorMatrix, eig: &HermitianEigen) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..a.dim() {
            let v = eig.vector(j);
            let av = a.apply(v);
            let r: f64 = av.iter().zip(v).map(|(x, y)| (x - y * eig.values()[j]).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r);
        }
        worst
    }

    fn orthonormality_error(eig: &HermitianEigen) -> f64 {
        let n = eig.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let dot: C64 = eig.vector(i).iter().zip(eig.vector(j)).map(|(a, b)| a.conj() * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expected).norm());
            }
        }
        worst
    }

    fn hermitian_from(n: usize, raw: &[(f64, f64)]) -> OperatorMatrix {
        OperatorMatrix::from_fn(n, |i, j| {
            let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
            let (re, im) = raw[lo * n + hi];
            if i == j {
                C64::new(re, 0.0)
            } else if i < j {
                C64::new(re, im)
            } else {
                C64::new(re, -im)
            }
        })
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = OperatorMatrix::from_entries(2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap();
        let eig = eigh(&y).unwrap();
        assert!((eig.values()[0] + 1.0).abs() < 1e-15);
        assert!((eig.values()[1] - 1.0).abs() < 1e-15);
        assert!(residual(&y, &eig) < 1e-14);
    }

    #[test]
    fn diagonal_and_one_by_one() {
        let d = OperatorMatrix::diagonal(&[3.0, -1.0, 2.0]);
        let eig = eigh(&d).unwrap();
        assert_eq!(eig.values(), &[-1.0, 2.0, 3.0]);
        let one = OperatorMatrix::diagonal(&[5.0]);
        assert_eq!(eigvalsh(&one).unwrap(), vec![5.0]);
    }

    #[test]
    fn harmonic_oscillator_levels() {
        let n = 30;
        let a = crate::hilbert::fock_annihilation(n);
        let h = a.adjoint().matmul(&a);
        let vals = eigvalsh(&h).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert!((v - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn sparse_matches_dense() {
        let n = 6;
        let a = crate::hilbert::fock_annihilation(n);
        let s = SparseMatrix::from_dense(&a);
        assert_eq!(s.nnz(), n - 1);
        assert_eq!(s.to_dense(), a);
        let x: Vec<C64> = (0..n).map(|k| C64::new(k as f64, 1.0)).collect();
        let mut y = vec![ZERO; n];
        s.mul_vec_into(C64::new(0.0, 2.0), &x, &mut y);
        let dense: Vec<C64> = a.apply(&x).into_iter().map(|z| z * C64::new(0.0, 2.0)).collect();
        assert_eq!(y, dense);

        let ad = SparseMatrix::from_dense(&a.adjoint());
        let comb = SparseMatrix::linear_combination(&[(ONE, &s), (C64::new(2.0, 0.0), &ad)]);
        let expected = &a + &a.adjoint().scale_real(2.0);
        assert_eq!(comb.to_dense().entries(), expected.entries());
        let mut re = comb.clone();
        re.refill(&[(C64::new(-1.0, 0.0), &s), (ONE, &ad)]);
        let expected = &a.adjoint() - &a;
        assert_eq!(re.to_dense().entries(), expected.entries());

        let xm: Vec<C64> = (0..n * n).map(|k| C64::new((k % 7) as f64, (k % 3) as f64)).collect();
        let mut ym = vec![ZERO; n * n];
        s.mul_dense_into(&xm, &mut ym);
        let xo = OperatorMatrix::from_entries(n, xm).unwrap();
        assert_eq!(a.matmul(&xo).entries(), &ym[..]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_hermitian_decomposes(
            n in 1usize..14,
            raw in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 196),
        ) {
            let a = hermitian_from(n, &raw);
            let eig = eigh(&a).unwrap();
            let scale = a.max_abs().max(1.0) * n as f64;
            prop_assert!(residual(&a, &eig) <= 1e-12 * scale);
            prop_assert!(orthonormality_error(&eig) <= 1e-12 * n as f64);
            prop_assert!(eig.values().windows(2).all(|w| w[0] <= w[1]));
            let vals = eigvalsh(&a).unwrap();
            for (x, y) in vals.iter().zip(eig.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * scale);
            }
            // trace is preserved
            let tr: f64 = eig.values().iter().sum();
            prop_assert!((tr - a.trace().re).abs() <= 1e-11 * scale);
        }
    }
}
