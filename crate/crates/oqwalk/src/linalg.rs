//! Dense complex linear algebra for small Hilbert spaces.
//!
//! The simulator works with density matrices on an `N`-node graph (`N` of
//! order 4, never more than ~16), so everything here is dense and
//! heap-allocated via [`nalgebra`]. The one non-obvious convention, fixed
//! once here and relied on everywhere else, is *column stacking*:
//!
//! ```text
//! vec(rho)[i + N*j] = rho[(i, j)]          (row i, column j)
//! ```
//!
//! Under column stacking the map `rho -> A rho B` becomes the matrix
//! `S[(i + N*j), (k + N*l)] = A[(i, k)] * B[(l, j)]` acting on `vec(rho)`,
//! which is how [`Superoperator`] represents every channel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex64;
/// Dense dynamically-sized complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense dynamically-sized complex vector.
pub type CVector = DVector<C64>;

/// Relative singular-value floor below which an operator counts as singular.
pub const SINGULAR_FLOOR: f64 = 1e-12;

/// Maximum tolerated `max |A - A^dagger|` for inputs that must be Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// `|i><j|` in an `dim`-dimensional space.
pub fn basis_matrix(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// `|k><k|`, the projector onto basis state `k`.
pub fn projector(dim: usize, k: usize) -> CMatrix {
    basis_matrix(dim, k, k)
}

/// `1 - |k><k|`, the projector onto the complement of basis state `k`.
pub fn complement_projector(dim: usize, k: usize) -> CMatrix {
    CMatrix::identity(dim, dim) - projector(dim, k)
}

/// Largest entry magnitude of `m`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise difference `max |a - b|`. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |A - A^dagger|`, zero exactly when `m` is Hermitian.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Matrix trace.
pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// Column-stack a `dim x dim` matrix into a `dim^2` vector.
pub fn vectorize(rho: &CMatrix) -> CVector {
    let (n, m) = rho.shape();
    assert_eq!(n, m, "vectorize: matrix must be square");
    // nalgebra stores matrices column-major, so the raw data already *is*
    // the column stacking.
    CVector::from_column_slice(rho.as_slice())
}

/// Inverse of [`vectorize`]; errors unless the length is a perfect square.
pub fn devectorize(v: &CVector) -> Result<CMatrix> {
    let len = v.len();
    let dim = (len as f64).sqrt().round() as usize;
    if dim * dim != len {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: len,
        });
    }
    Ok(CMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Trace of the matrix a `dim^2` vector stacks, without materialising it.
pub fn vec_trace(v: &[C64], dim: usize) -> C64 {
    debug_assert_eq!(v.len(), dim * dim);
    (0..dim).map(|k| v[k + dim * k]).sum()
}

/// `exp(-i h t)` for Hermitian `h`, via eigendecomposition.
///
/// The result is unitary up to rounding for any real `t`. Inputs whose
/// hermiticity defect exceeds [`HERMITICITY_TOL`] are rejected rather than
/// silently symmetrised.
pub fn mat_exp(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (n, m) = h.shape();
    if n != m {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m,
        });
    }
    let defect = hermiticity_defect(h);
    // Scale-aware check: a matrix of rates ~1e8 is "Hermitian" already when
    // the defect is tiny relative to its magnitude.
    let scale = max_abs(h).max(1.0);
    if defect > HERMITICITY_TOL * scale {
        return Err(Error::NotHermitian { max_dev: defect });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite {
            context: "mat_exp time",
        });
    }
    let eig = h.clone().symmetric_eigen();
    let phases = CVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&lambda| {
            let phi = -lambda * t;
            C64::new(phi.cos(), phi.sin())
        }),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (col, phase) in phases.iter().enumerate() {
        for row in 0..n {
            scaled[(row, col)] = v[(row, col)] * phase;
        }
    }
    Ok(&scaled * v.adjoint())
}

/// A density matrix: square, Hermitian, unit-trace (all validated on entry).
///
/// Positivity is *not* checked — every state this crate produces comes from
/// CPTP evolution of a valid state, and checking eigenvalues on every
/// construction would dwarf the actual propagation cost.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// The pure state `|node><node|`.
    pub fn basis_state(dim: usize, node: usize) -> Self {
        assert!(node < dim, "basis_state: node out of range");
        DensityMatrix {
            mat: projector(dim, node),
        }
    }

    /// Validate and wrap an arbitrary matrix.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        let (n, m) = mat.shape();
        if n != m {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m,
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "density matrix entries",
            });
        }
        let defect = hermiticity_defect(&mat);
        if defect > HERMITICITY_TOL * max_abs(&mat).max(1.0) {
            return Err(Error::NotHermitian { max_dev: defect });
        }
        let tr = trace(&mat);
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::InvalidGraph(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        Ok(DensityMatrix { mat })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Occupation of one node (the real diagonal entry).
    pub fn population(&self, node: usize) -> f64 {
        self.mat[(node, node)].re
    }

    /// The complex coherence `rho[j, k]`.
    pub fn coherence(&self, j: usize, k: usize) -> C64 {
        self.mat[(j, k)]
    }

    /// Column-stacked form, ready for superoperator propagation.
    pub fn to_vec(&self) -> CVector {
        vectorize(&self.mat)
    }
}

/// A linear map on density matrices, stored as its `N^2 x N^2` matrix in the
/// column-stacking convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    mat: CMatrix,
}

impl Superoperator {
    /// The identity map on `dim x dim` density matrices.
    pub fn identity(dim: usize) -> Self {
        Superoperator {
            dim,
            mat: CMatrix::identity(dim * dim, dim * dim),
        }
    }

    /// Wrap an explicit `dim^2 x dim^2` matrix.
    pub fn from_matrix(dim: usize, mat: CMatrix) -> Result<Self> {
        if mat.shape() != (dim * dim, dim * dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: mat.nrows(),
            });
        }
        Ok(Superoperator { dim, mat })
    }

    /// The map `rho -> a rho b` for square `a`, `b` of equal dimension.
    pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let dim = a.nrows();
        if a.shape() != (dim, dim) || b.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.nrows(),
            });
        }
        let mut mat = CMatrix::zeros(dim * dim, dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                let row = i + dim * j;
                for l in 0..dim {
                    for k in 0..dim {
                        mat[(row, k + dim * l)] = a[(i, k)] * b[(l, j)];
                    }
                }
            }
        }
        Ok(Superoperator { dim, mat })
    }

    /// The CPTP map `rho -> sum_m K_m rho K_m^dagger` from its Kraus operators.
    pub fn from_kraus(dim: usize, ops: &[CMatrix]) -> Result<Self> {
        let mut mat = CMatrix::zeros(dim * dim, dim * dim);
        for k_op in ops {
            if k_op.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k_op.nrows(),
                });
            }
            // rho -> K rho K^dagger contributes K[i,k] conj(K[j,l]).
            for j in 0..dim {
                for i in 0..dim {
                    let row = i + dim * j;
                    for l in 0..dim {
                        let kj_l = k_op[(j, l)].conj();
                        for k in 0..dim {
                            mat[(row, k + dim * l)] += k_op[(i, k)] * kj_l;
                        }
                    }
                }
            }
        }
        Ok(Superoperator { dim, mat })
    }

    /// Hilbert-space dimension `N` the map acts on.
    pub fn state_dim(&self) -> usize {
        self.dim
    }

    /// The underlying `N^2 x N^2` matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Apply the map to a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
            });
        }
        devectorize(&(&self.mat * vectorize(rho)))
    }

    /// Apply the map to an already-vectorised state.
    pub fn apply_vec(&self, v: &CVector) -> CVector {
        assert_eq!(v.len(), self.dim * self.dim, "apply_vec: length mismatch");
        &self.mat * v
    }

    /// Hot-loop kernel: `out = S * v` on raw slices, no allocation.
    ///
    /// Iterates the column-major storage directly (gaxpy order), which is
    /// what propagation loops spend essentially all their time in.
    pub fn apply_vec_into(&self, v: &[C64], out: &mut [C64]) {
        let n = self.dim * self.dim;
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        out.fill(C64::new(0.0, 0.0));
        let data = self.mat.as_slice();
        for (j, &x) in v.iter().enumerate() {
            if x.re == 0.0 && x.im == 0.0 {
                continue;
            }
            let col = &data[j * n..(j + 1) * n];
            for (o, &c) in out.iter_mut().zip(col.iter()) {
                *o += c * x;
            }
        }
    }

    /// Composition `self . first`: the map applying `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: first.dim,
            });
        }
        Ok(Superoperator {
            dim: self.dim,
            mat: &self.mat * &first.mat,
        })
    }

    /// Ratio of smallest to largest singular value (0 for the zero map).
    pub fn singular_value_ratio(&self) -> f64 {
        let sv = self.mat.clone().singular_values();
        let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if smax == 0.0 {
            0.0
        } else {
            smin / smax
        }
    }

    /// Matrix inverse of the map.
    ///
    /// Errors with [`Error::SingularOperator`] when the relative smallest
    /// singular value sits below `floor` (use [`SINGULAR_FLOOR`] by default).
    pub fn invert(&self, floor: f64) -> Result<Self> {
        let ratio = self.singular_value_ratio();
        if ratio < floor {
            return Err(Error::SingularOperator { ratio, floor });
        }
        let inv = self
            .mat
            .clone()
            .try_inverse()
            .ok_or(Error::SingularOperator { ratio, floor })?;
        Ok(Superoperator {
            dim: self.dim,
            mat: inv,
        })
    }

    /// Rough power-iteration estimate of the spectral radius.
    ///
    /// Good to a few per mill after the default iteration count, which is all
    /// the convergence gate in the generating function needs. Magnitudes are
    /// averaged geometrically over the trailing iterations to damp the
    /// oscillation a complex-conjugate dominant pair produces.
    pub fn spectral_radius_estimate(&self) -> f64 {
        let n = self.dim * self.dim;
        let mut v = CVector::from_element(n, C64::new(1.0, 0.0));
        // Deterministic but generic-ish start: perturb entries by index.
        for (idx, z) in v.iter_mut().enumerate() {
            *z += C64::new(0.0, 1e-3 * (idx as f64 + 1.0));
        }
        let mut norm = v.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v /= C64::new(norm, 0.0);
        let mut log_sum = 0.0;
        let mut samples = 0usize;
        const WARMUP: usize = 40;
        const TAIL: usize = 24;
        for it in 0..(WARMUP + TAIL) {
            v = &self.mat * v;
            norm = v.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v /= C64::new(norm, 0.0);
            if it >= WARMUP {
                log_sum += norm.ln();
                samples += 1;
            }
        }
        (log_sum / samples as f64).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Deterministic pseudo-random complex matrix for plain unit tests.
    fn test_matrix(dim: usize, seed: u64) -> CMatrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMatrix::from_fn(dim, dim, |_, _| c(next(), next()))
    }

    #[test]
    fn vectorize_uses_column_stacking() {
        let rho =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let v = vectorize(&rho);
        // Columns are (1,3) then (2,4).
        assert_eq!(v[0], c(1.0, 0.0));
        assert_eq!(v[1], c(3.0, 0.0));
        assert_eq!(v[2], c(2.0, 0.0));
        assert_eq!(v[3], c(4.0, 0.0));
        assert_eq!(devectorize(&v).unwrap(), rho);
    }

    #[test]
    fn devectorize_rejects_non_square_lengths() {
        let v = CVector::from_element(5, c(0.0, 0.0));
        assert!(matches!(
            devectorize(&v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sandwich_matches_direct_product() {
        for seed in 0..20 {
            let dim = 2 + (seed as usize % 3);
            let a = test_matrix(dim, 3 * seed + 1);
            let b = test_matrix(dim, 3 * seed + 2);
            let rho = test_matrix(dim, 3 * seed + 3);
            let s = Superoperator::sandwich(&a, &b).unwrap();
            let direct = &a * &rho * &b;
            let via_superop = s.apply(&rho).unwrap();
            assert!(max_abs_diff(&direct, &via_superop) < 1e-12);
        }
    }

    #[test]
    fn from_kraus_matches_direct_application() {
        for seed in 0..20 {
            let dim = 2 + (seed as usize % 3);
            let ops: Vec<CMatrix> = (0..3).map(|i| test_matrix(dim, 7 * seed + i + 1)).collect();
            let rho = test_matrix(dim, 7 * seed + 5);
            let s = Superoperator::from_kraus(dim, &ops).unwrap();
            let mut direct = CMatrix::zeros(dim, dim);
            for k in &ops {
                direct += k * &rho * k.adjoint();
            }
            assert!(max_abs_diff(&direct, &s.apply(&rho).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn compose_applies_first_argument_first() {
        let dim = 3;
        let a = test_matrix(dim, 11);
        let b = test_matrix(dim, 12);
        let sa = Superoperator::sandwich(&a, &a.adjoint()).unwrap();
        let sb = Superoperator::sandwich(&b, &b.adjoint()).unwrap();
        let rho = test_matrix(dim, 13);
        let chained = sb.compose(&sa).unwrap().apply(&rho).unwrap();
        let stepwise = sb.apply(&sa.apply(&rho).unwrap()).unwrap();
        assert!(max_abs_diff(&chained, &stepwise) < 1e-12);
    }

    #[test]
    fn apply_vec_into_matches_matrix_product() {
        let dim = 4;
        let s = Superoperator::sandwich(&test_matrix(dim, 21), &test_matrix(dim, 22)).unwrap();
        let v = CVector::from_fn(dim * dim, |i, _| c(i as f64 * 0.1 - 0.3, 0.05 * i as f64));
        let expected = s.apply_vec(&v);
        let mut out = vec![c(0.0, 0.0); dim * dim];
        s.apply_vec_into(v.as_slice(), &mut out);
        for (got, want) in out.iter().zip(expected.iter()) {
            assert!((got - want).norm() < 1e-13);
        }
    }

    #[test]
    fn invert_round_trips_well_conditioned_maps() {
        let dim = 3;
        let a = test_matrix(dim, 31) + CMatrix::identity(dim, dim) * c(2.0, 0.0);
        let s = Superoperator::sandwich(&a, &a.adjoint()).unwrap();
        let inv = s.invert(SINGULAR_FLOOR).unwrap();
        let prod = s.compose(&inv).unwrap();
        let eye = Superoperator::identity(dim);
        assert!(max_abs_diff(prod.matrix(), eye.matrix()) < 1e-10);
    }

    #[test]
    fn invert_rejects_singular_maps() {
        // a has an exactly-zero row, so the sandwich map is singular.
        let mut a = test_matrix(3, 41);
        for j in 0..3 {
            a[(0, j)] = c(0.0, 0.0);
        }
        let s = Superoperator::sandwich(&a, &a.adjoint()).unwrap();
        assert!(matches!(
            s.invert(SINGULAR_FLOOR),
            Err(Error::SingularOperator { .. })
        ));
    }

    #[test]
    fn mat_exp_of_diagonal_gives_pure_phases() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(2.0, 0.0), c(-1.5, 0.0)]));
        let t = 0.7;
        let u = mat_exp(&h, t).unwrap();
        assert!((u[(0, 0)] - c((2.0 * t).cos(), -(2.0 * t).sin())).norm() < 1e-14);
        assert!((u[(1, 1)] - c((1.5 * t).cos(), (1.5 * t).sin())).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn mat_exp_rejects_non_hermitian_input() {
        let h =
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(mat_exp(&h, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn mat_exp_is_unitary_and_a_semigroup() {
        let a = test_matrix(4, 51);
        let h = (&a + a.adjoint()) * c(0.5, 0.0);
        let u1 = mat_exp(&h, 0.3).unwrap();
        let u2 = mat_exp(&h, 1.1).unwrap();
        let u12 = mat_exp(&h, 1.4).unwrap();
        let eye = CMatrix::identity(4, 4);
        assert!(max_abs_diff(&(&u1 * u1.adjoint()), &eye) < 1e-13);
        assert!(max_abs_diff(&(&u1 * &u2), &u12) < 1e-12);
    }

    #[test]
    fn spectral_radius_estimate_matches_known_spectrum() {
        // Diagonal map: eigenvalues are the diagonal entries.
        let dim = 2;
        let mat = CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.9, 0.0),
            c(0.3, 0.1),
            c(-0.2, 0.0),
            c(0.5, 0.0),
        ]));
        let s = Superoperator::from_matrix(dim, mat).unwrap();
        let rho = s.spectral_radius_estimate();
        assert!((rho - 0.9).abs() < 5e-3, "estimate {rho} too far from 0.9");
    }

    proptest! {
        #[test]
        fn vectorize_round_trip_is_exact(dim in 2usize..6, seed in 0u64..1000) {
            let rho = test_matrix(dim, seed);
            let back = devectorize(&vectorize(&rho)).unwrap();
            prop_assert_eq!(rho, back);
        }

        #[test]
        fn superop_preserves_hermiticity_for_kraus_maps(dim in 2usize..5, seed in 0u64..500) {
            let k1 = test_matrix(dim, 2 * seed + 1);
            let k2 = test_matrix(dim, 2 * seed + 2);
            let s = Superoperator::from_kraus(dim, &[k1, k2]).unwrap();
            let a = test_matrix(dim, 2 * seed + 3);
            let herm = (&a + a.adjoint()) * C64::new(0.5, 0.0);
            let out = s.apply(&herm).unwrap();
            prop_assert!(hermiticity_defect(&out) < 1e-12 * max_abs(&out).max(1.0));
        }
    }
}
