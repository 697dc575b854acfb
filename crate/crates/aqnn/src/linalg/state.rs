//! Quantum states, bipartite bookkeeping, and the operations built on them.

use serde::{Deserialize, Serialize};

use super::eig::{eig_hermitian, singular_values};
use super::matrix::{Complex64, ComplexMatrix};
use crate::error::Error;

/// Numerical tolerances used by validating constructors and checks.
///
/// Defaults are 10⁻⁹ across the board: double-precision eigensolvers deliver
/// residuals near 10⁻¹², so this leaves two to three orders of margin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity deviation bound.
    pub herm: f64,
    /// Allowed negativity of eigenvalues for PSD checks.
    pub psd: f64,
    /// Trace deviation bound for density matrices.
    pub trace: f64,
    /// Norm deviation bound for pure states.
    pub norm: f64,
    /// Orthonormality deviation bound (`‖U†U − 1‖_F`) for unitarity checks.
    pub orth: f64,
    /// Trace-preservation deviation bound (`‖Tr_B E − 1‖_F`).
    pub tp: f64,
    /// Reconstruction/agreement bound for cross-representation checks.
    pub recon: f64,
    /// Absolute lower bound on the smallest singular value of an
    /// invertible transform.
    pub inv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            psd: 1e-9,
            trace: 1e-9,
            norm: 1e-9,
            orth: 1e-9,
            tp: 1e-9,
            recon: 1e-9,
            inv: 1e-12,
        }
    }
}

/// Dimensions of a bipartite space `A ⊗ B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl BipartiteDims {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        assert!(dim_a >= 1 && dim_b >= 1, "dimensions must be at least 1");
        Self { dim_a, dim_b }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Flat index of `|a⟩|b⟩` under the A-major convention.
    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.dim_b + b
    }
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates unit norm within `tol.norm`.
    pub fn new(amplitudes: Vec<Complex64>, tol: &Tolerances) -> Result<Self, Error> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite { context: "PureState::new" });
        }
        let dev = (norm_sq.sqrt() - 1.0).abs();
        if dev > tol.norm {
            return Err(Error::NormNotOne { deviation: dev });
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>) -> Result<Self, Error> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFinite { context: "PureState::from_unnormalized" });
        }
        if norm_sq < 1e-300 {
            return Err(Error::NormNotOne { deviation: 1.0 });
        }
        let norm = norm_sq.sqrt();
        Ok(Self {
            amplitudes: amplitudes.iter().map(|z| z.scale(1.0 / norm)).collect(),
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, self.amplitudes[r] * self.amplitudes[c].conj());
            }
        }
        m
    }

    /// `|self⟩ ⊗ |other⟩` with the A-major index convention.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        PureState { amplitudes }
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Positive-semidefinite unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace, and positivity within `tol`.
    pub fn new(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::dim("DensityMatrix::new", mat.rows, mat.cols));
        }
        mat.check_finite("DensityMatrix::new")?;
        let herm_dev = mat.hermiticity_deviation();
        if herm_dev > tol.herm {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
                tolerance: tol.herm,
            });
        }
        let trace_dev = (mat.trace() - Complex64::new(1.0, 0.0)).norm();
        if trace_dev > tol.trace {
            return Err(Error::TraceNotOne { deviation: trace_dev });
        }
        let eig = eig_hermitian(&mat, tol.herm)?;
        if eig.min_eigenvalue() < -tol.psd {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.min_eigenvalue(),
            });
        }
        Ok(Self { mat })
    }

    /// Lenient constructor: eigenvalues with magnitude below `tol.psd` are
    /// clipped to zero and the trace renormalized. Rejects genuinely
    /// negative spectra.
    pub fn from_matrix_clipping(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::dim("DensityMatrix::from_matrix_clipping", mat.rows, mat.cols));
        }
        mat.check_finite("DensityMatrix::from_matrix_clipping")?;
        let herm_dev = mat.hermiticity_deviation();
        if herm_dev > tol.herm {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
                tolerance: tol.herm,
            });
        }
        let eig = eig_hermitian(&mat, tol.herm)?;
        if eig.min_eigenvalue() < -tol.psd {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.min_eigenvalue(),
            });
        }
        let clipped: Vec<f64> = eig
            .values
            .iter()
            .map(|&x| if x.abs() < tol.psd { 0.0 } else { x })
            .collect();
        let total: f64 = clipped.iter().sum();
        if (total - 1.0).abs() > 0.5 {
            return Err(Error::TraceNotOne {
                deviation: (total - 1.0).abs(),
            });
        }
        let rebuilt = eig.map_eigenvalues(|x| {
            let v = if x.abs() < tol.psd { 0.0 } else { x };
            v / total
        });
        Ok(Self { mat: rebuilt })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            mat: state.projector(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.mat.get(r, c)
    }

    /// Purity `Tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }
}

/// Kronecker product `A ⊗ B` (A-major index convention).
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Partial trace of an operator on `A ⊗ B` over the named subsystem.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: BipartiteDims,
    over: Subsystem,
) -> Result<ComplexMatrix, Error> {
    let total = dims.total();
    if m.rows != total || m.cols != total {
        return Err(Error::dim("partial_trace", total, m.rows));
    }
    match over {
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(dims.dim_a, dims.dim_a);
            for i in 0..dims.dim_a {
                for j in 0..dims.dim_a {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..dims.dim_b {
                        sum += m.get(dims.index(i, k), dims.index(j, k));
                    }
                    out.set(i, j, sum);
                }
            }
            Ok(out)
        }
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(dims.dim_b, dims.dim_b);
            for i in 0..dims.dim_b {
                for j in 0..dims.dim_b {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..dims.dim_a {
                        sum += m.get(dims.index(k, i), dims.index(k, j));
                    }
                    out.set(i, j, sum);
                }
            }
            Ok(out)
        }
    }
}

/// PSD test on a Hermitian matrix: `(flag, min_eigenvalue)` with
/// `flag ⇔ min eigenvalue ≥ −tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<(bool, f64), Error> {
    let herm_gate = if tol > 0.0 { tol } else { 1e-12 };
    let eig = eig_hermitian(m, herm_gate)?;
    let min = eig.min_eigenvalue();
    Ok((min >= -tol, min))
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, Error> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim("trace_distance", rho.dim(), sigma.dim()));
    }
    let diff = rho.matrix().sub(sigma.matrix());
    // The difference of two valid density matrices is Hermitian to within
    // the sum of their tolerances; hermitize for the eigensolver.
    let eig = eig_hermitian(&diff.hermitize(), f64::INFINITY)?;
    Ok(0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Rank of the span of a set of equal-sized operators, from the singular
/// values of the matrix whose rows are their vectorizations: values at or
/// above `tol · σ_max` count.
pub fn operator_rank(ops: &[ComplexMatrix], tol: f64) -> Result<usize, Error> {
    if ops.is_empty() {
        return Err(Error::EmptyList);
    }
    let (rows, cols) = (ops[0].rows, ops[0].cols);
    for op in ops {
        if op.rows != rows || op.cols != cols {
            return Err(Error::dim("operator_rank", rows * cols, op.rows * op.cols));
        }
    }
    let mut stacked = ComplexMatrix::zeros(ops.len(), rows * cols);
    for (r, op) in ops.iter().enumerate() {
        for (c, &v) in op.data.iter().enumerate() {
            stacked.set(r, c, v);
        }
    }
    let sv = singular_values(&stacked)?;
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s >= tol * sigma_max).count())
}

/// Purification of `ρ` on `A ⊗ A'` with the ancilla basis rotated by the
/// unitary `u`: `|Ψ⟩ = Σ_k √λ_k |v_k⟩ ⊗ u|k⟩` over the spectral
/// decomposition of `ρ`, eigenvalues taken in descending order.
pub fn purify(rho: &DensityMatrix, u: &ComplexMatrix, tol: &Tolerances) -> Result<PureState, Error> {
    let n = rho.dim();
    if u.rows != n || u.cols != n {
        return Err(Error::dim("purify", n, u.rows));
    }
    let unitarity = u
        .adjoint()
        .matmul(u)
        .sub(&ComplexMatrix::identity(n))
        .frobenius_norm();
    if unitarity > tol.orth {
        return Err(Error::NotUnitary { deviation: unitarity });
    }
    let eig = eig_hermitian(rho.matrix(), tol.herm)?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); n * n];
    // Pair the largest eigenvalue with ancilla |0⟩; a stable descending sort
    // keeps degenerate blocks in eigensolver order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.values[j]
            .partial_cmp(&eig.values[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (slot, &k) in order.iter().enumerate() {
        let lambda = eig.values[k].max(0.0);
        if lambda == 0.0 {
            continue;
        }
        let weight = lambda.sqrt();
        for a in 0..n {
            let va = eig.vectors.get(a, k);
            for b in 0..n {
                amplitudes[a * n + b] += va * u.get(b, slot) * Complex64::new(weight, 0.0);
            }
        }
    }
    PureState::from_unnormalized(amplitudes)
}
