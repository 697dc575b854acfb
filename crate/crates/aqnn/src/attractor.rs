//! Channels with prescribed stationary states.
//!
//! The canonical family fixes every computational basis projector: its Choi
//! operator is `E = Σ_{μν} β_{μν} |μμ⟩⟨νν|` where `B = (β_{μν})` is a
//! positive-semidefinite coefficient matrix with unit diagonal. The channel
//! acts as the entrywise (Schur) multiplier `Λ(ρ)_{μν} = β_{μν} ρ_{μν}`, so
//! off-diagonal coherences decay geometrically at rate `|β_{μν}|` while the
//! basis projectors stay exactly fixed. Arbitrary linearly independent
//! pattern states are handled by conjugating the canonical map with an
//! invertible basis transform, and ensembles of commuting mixed states by
//! the classical-ensemble machinery at the bottom of the module.

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiCandidate, ChoiMatrix, CptpReport};
use crate::error::Error;
use crate::io::MatrixJson;
use crate::linalg::{
    eig_hermitian, invert, random_ginibre, singular_values, BipartiteDims, Complex64,
    ComplexMatrix, DensityMatrix, SeedStream, Tolerances,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// PSD coefficient matrix with unit diagonal; entry `(μ, ν)` is the factor
/// applied to the coherence `ρ_{μν}` by the canonical channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    mat: ComplexMatrix,
}

impl CorrelationMatrix {
    /// Validates hermiticity, unit diagonal, positivity, and the implied
    /// off-diagonal bound `|β_{μν}| ≤ 1 + tol.psd`.
    pub fn new(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::dim("CorrelationMatrix::new", mat.rows, mat.cols));
        }
        mat.check_finite("CorrelationMatrix::new")?;
        let herm_dev = mat.hermiticity_deviation();
        if herm_dev > tol.herm {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
                tolerance: tol.herm,
            });
        }
        let mut snapped = mat;
        for i in 0..snapped.rows {
            let dev = (snapped.get(i, i) - ONE).norm();
            if dev > tol.herm {
                return Err(Error::DiagonalNotOne { index: i, deviation: dev });
            }
            snapped.set(i, i, ONE);
        }
        let eig = eig_hermitian(&snapped.hermitize(), f64::INFINITY)?;
        if eig.min_eigenvalue() < -tol.psd {
            return Err(Error::NotPositive {
                min_eigenvalue: eig.min_eigenvalue(),
            });
        }
        for r in 0..snapped.rows {
            for c in 0..snapped.cols {
                if r != c && snapped.get(r, c).norm() > 1.0 + tol.psd {
                    return Err(Error::InvalidParameter(format!(
                        "off-diagonal coefficient ({r},{c}) has modulus {} > 1",
                        snapped.get(r, c).norm()
                    )));
                }
            }
        }
        Ok(Self { mat: snapped })
    }

    /// All-ones matrix: the coefficients of the identity (trivial) channel.
    pub fn all_ones(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::new(n, n, vec![ONE; n * n]),
        }
    }

    /// Identity coefficient matrix: the completely dephasing channel.
    pub fn dephasing(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(n),
        }
    }

    /// Random valid coefficient matrix as the normalized Gram matrix of `n`
    /// complex Gaussian vectors of dimension `rank`; PSD with unit diagonal
    /// by construction, rank at most `rank`.
    pub fn random(n: usize, rank: usize, stream: &mut SeedStream) -> Result<Self, Error> {
        if rank == 0 || rank > n {
            return Err(Error::InvalidParameter(format!(
                "rank must be in 1..={n}, got {rank}"
            )));
        }
        let g = random_ginibre(n, rank, stream);
        let norms: Vec<f64> = (0..n)
            .map(|r| {
                (0..rank)
                    .map(|k| g.get(r, k).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let mut mat = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut dot = ZERO;
                for k in 0..rank {
                    dot += g.get(r, k) * g.get(c, k).conj();
                }
                mat.set(r, c, dot.scale(1.0 / (norms[r] * norms[c])));
            }
        }
        for i in 0..n {
            mat.set(i, i, ONE);
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn coefficient(&self, mu: usize, nu: usize) -> Complex64 {
        self.mat.get(mu, nu)
    }
}

/// Invertible transform mapping the computational basis onto pattern states,
/// `|r_μ⟩ ∝ T|μ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTransform {
    mat: ComplexMatrix,
    unitary: bool,
}

impl BasisTransform {
    pub fn new(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if !mat.is_square() {
            return Err(Error::dim("BasisTransform::new", mat.rows, mat.cols));
        }
        mat.check_finite("BasisTransform::new")?;
        let sv = singular_values(&mat)?;
        let min_sv = sv.last().copied().unwrap_or(0.0);
        if min_sv < tol.inv {
            return Err(Error::Singular { min_singular: min_sv });
        }
        let n = mat.rows;
        let dev = mat
            .adjoint()
            .matmul(&mat)
            .sub(&ComplexMatrix::identity(n))
            .frobenius_norm();
        Ok(Self {
            mat,
            unitary: dev <= tol.orth,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(n),
            unitary: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Inverse transform, revalidated.
    pub fn inverse(&self, tol: &Tolerances) -> Result<BasisTransform, Error> {
        BasisTransform::new(invert(&self.mat)?, tol)
    }

    /// The normalized pattern state `T|μ⟩ / ‖T|μ⟩‖`.
    pub fn pattern(&self, mu: usize) -> Result<crate::linalg::PureState, Error> {
        let n = self.dim();
        let col: Vec<Complex64> = (0..n).map(|r| self.mat.get(r, mu)).collect();
        crate::linalg::PureState::from_unnormalized(col)
    }
}

/// Choi operator `E = Σ_{μν} β_{μν} |μμ⟩⟨νν|` of the canonical attractor
/// channel. Trace preservation is exact by construction; complete
/// positivity is inherited from the positivity of `B`.
pub fn build_canonical(b: &CorrelationMatrix) -> ChoiMatrix {
    let n = b.dim();
    let dims = BipartiteDims::square(n);
    let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
    for mu in 0..n {
        for nu in 0..n {
            mat.set(dims.index(mu, mu), dims.index(nu, nu), b.coefficient(mu, nu));
        }
    }
    let cand = ChoiCandidate::new(dims, mat).expect("square by construction");
    ChoiMatrix::trusted(cand)
}

/// Conjugated attractor `Λ(ρ) = T Λ̃(T⁻¹ ρ T⁻†) T†` with `Λ̃` canonical:
/// every normalized pattern `T|μ⟩/‖T|μ⟩‖` is exactly fixed. Trace
/// preservation is not guaranteed for non-unitary `T`, so the candidate is
/// returned together with its verification report rather than rejected.
pub fn build_general(
    b: &CorrelationMatrix,
    t: &BasisTransform,
    tol: &Tolerances,
) -> Result<(ChoiCandidate, CptpReport), Error> {
    let n = b.dim();
    if t.dim() != n {
        return Err(Error::dim("build_general", n, t.dim()));
    }
    let canonical = build_canonical(b);
    let t_mat = t.matrix();
    let t_dag = t_mat.adjoint();
    let t_inv = invert(t_mat)?;
    let t_inv_dag = t_inv.adjoint();

    let dims = BipartiteDims::square(n);
    let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
    for i in 0..n {
        for j in 0..n {
            let unit = ComplexMatrix::matrix_unit(n, i, j);
            let pulled = t_inv.matmul(&unit).matmul(&t_inv_dag);
            let mid = canonical.as_candidate().apply_raw(&pulled)?;
            let image = t_mat.matmul(&mid).matmul(&t_dag);
            for k in 0..n {
                for l in 0..n {
                    mat.set(dims.index(i, k), dims.index(j, l), image.get(k, l));
                }
            }
        }
    }
    let cand = ChoiCandidate::new(dims, mat)?;
    let report = cand.verify(tol);
    Ok((cand, report))
}

/// Per-step table of coherence moduli `|⟨μ|ρ_k|ν⟩|` under repeated
/// application of the canonical channel; entry `[k]` is the row-major
/// `N × N` table after `k` applications (`[0]` is the initial state).
pub fn coherence_decay_profile(
    b: &CorrelationMatrix,
    rho: &DensityMatrix,
    steps: usize,
) -> Result<Vec<Vec<f64>>, Error> {
    let n = b.dim();
    if rho.dim() != n {
        return Err(Error::dim("coherence_decay_profile", n, rho.dim()));
    }
    let choi = build_canonical(b);
    let mut tables = Vec::with_capacity(steps + 1);
    let mut current = rho.matrix().clone();
    tables.push(current.data.iter().map(|z| z.norm()).collect());
    for _ in 0..steps {
        current = choi.as_candidate().apply_raw(&current)?;
        tables.push(current.data.iter().map(|z| z.norm()).collect());
    }
    Ok(tables)
}

/// Residual `‖Λ̃(|e⟩⟨e|) − |e⟩⟨e|‖_F` for the full-support superposition
/// `|e⟩ = Σ c_μ |μ⟩`, from the closed form
/// `residual² = Σ_{μ≠ν} |β_{μν} − 1|² |c_μ|² |c_ν|²`.
///
/// A vanishing residual with all `c_μ ≠ 0` forces every coefficient to 1,
/// i.e. the channel is the identity; `trivial` reports that case.
pub fn triviality_residual(
    b: &CorrelationMatrix,
    c: &[Complex64],
    tol: f64,
) -> Result<(f64, bool), Error> {
    let n = b.dim();
    if c.len() != n {
        return Err(Error::dim("triviality_residual", n, c.len()));
    }
    let norm_sq: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sq.sqrt() - 1.0).abs() > 1e-9 {
        return Err(Error::NormNotOne {
            deviation: (norm_sq.sqrt() - 1.0).abs(),
        });
    }
    for (i, z) in c.iter().enumerate() {
        if z.norm() == 0.0 {
            return Err(Error::ZeroCoefficient { index: i });
        }
    }
    let mut residual_sq = 0.0;
    for mu in 0..n {
        for nu in 0..n {
            if mu == nu {
                continue;
            }
            residual_sq += (b.coefficient(mu, nu) - ONE).norm_sqr()
                * c[mu].norm_sqr()
                * c[nu].norm_sqr();
        }
    }
    let residual = residual_sq.sqrt();
    let trivial = if residual <= tol {
        // Consistency: the coefficient matrix must be all ones.
        let ones = CorrelationMatrix::all_ones(n);
        b.matrix().sub(ones.matrix()).max_abs() <= tol
    } else {
        false
    };
    Ok((residual, trivial))
}

/// Outcome of the classical-ensemble detection.
#[derive(Debug, Clone)]
pub struct ClassicalEnsembleReport {
    pub is_classical: bool,
    /// Transform with `T ρ_μ T† = diag(D_μ)` for every member; present only
    /// when the ensemble is classical.
    pub transform: Option<BasisTransform>,
    /// Diagonals `D_μ` in the common basis, one vector per member.
    pub diagonals: Vec<Vec<f64>>,
    /// Largest pairwise commutator Frobenius norm among whitened members.
    pub max_commutator_norm: f64,
}

/// Serializable view of the report (transform embedded in the matrix
/// wire format).
#[derive(Debug, Serialize, Deserialize)]
pub struct ClassicalEnsembleReportJson {
    pub is_classical: bool,
    pub transform: Option<MatrixJson>,
    pub transform_unitary: Option<bool>,
    pub diagonals: Vec<Vec<f64>>,
    pub max_commutator_norm: f64,
}

impl ClassicalEnsembleReport {
    pub fn to_json(&self) -> serde_json::Value {
        let view = ClassicalEnsembleReportJson {
            is_classical: self.is_classical,
            transform: self
                .transform
                .as_ref()
                .map(|t| MatrixJson::from_matrix(t.matrix())),
            transform_unitary: self.transform.as_ref().map(|t| t.is_unitary()),
            diagonals: self.diagonals.clone(),
            max_commutator_norm: self.max_commutator_norm,
        };
        serde_json::to_value(view).expect("report serialization")
    }
}

/// Detects whether the states can be simultaneously diagonalized by one
/// invertible congruence `ρ ↦ T ρ T†`.
///
/// Whitening by the inverse square root of the ensemble average turns a
/// simultaneously congruence-diagonalizable family into a commuting family
/// of Hermitian matrices, which is then checked directly and given a common
/// eigenbasis.
pub fn detect_classical_ensemble(
    states: &[DensityMatrix],
    commute_tol: f64,
    tol: &Tolerances,
) -> Result<ClassicalEnsembleReport, Error> {
    if states.is_empty() {
        return Err(Error::EmptyList);
    }
    let n = states[0].dim();
    for s in states {
        if s.dim() != n {
            return Err(Error::dim("detect_classical_ensemble", n, s.dim()));
        }
    }

    // Positive-definite reference: ensemble average, regularized if singular.
    let mut sigma = ComplexMatrix::zeros(n, n);
    for s in states {
        sigma = sigma.add(s.matrix());
    }
    sigma = sigma.scale_re(1.0 / states.len() as f64);
    let sigma_norm = sigma.frobenius_norm();
    let eig = eig_hermitian(&sigma.hermitize(), f64::INFINITY)?;
    if eig.min_eigenvalue() < 1e-12 * sigma_norm {
        let lambda = 1e-12 * sigma_norm;
        sigma = sigma.add(&ComplexMatrix::identity(n).scale_re(lambda));
    }

    // W = σ^{1/2}; whitened members W⁻¹ ρ W⁻¹ stay Hermitian.
    let eig = eig_hermitian(&sigma.hermitize(), f64::INFINITY)?;
    let w_inv = eig.map_eigenvalues(|x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt());
    let whitened: Vec<ComplexMatrix> = states
        .iter()
        .map(|s| w_inv.matmul(s.matrix()).matmul(&w_inv).hermitize())
        .collect();

    let mut max_comm = 0.0f64;
    for i in 0..whitened.len() {
        for j in (i + 1)..whitened.len() {
            let comm = whitened[i]
                .matmul(&whitened[j])
                .sub(&whitened[j].matmul(&whitened[i]));
            max_comm = max_comm.max(comm.frobenius_norm());
        }
    }

    if max_comm > commute_tol {
        return Ok(ClassicalEnsembleReport {
            is_classical: false,
            transform: None,
            diagonals: Vec::new(),
            max_commutator_norm: max_comm,
        });
    }

    // Common eigenbasis: blocks split by the first member's spectrum, with
    // degenerate blocks resolved by later members recursively.
    let basis = common_eigenbasis(&whitened, commute_tol.max(1e-10))?;
    let t_mat = basis.adjoint().matmul(&w_inv);
    let transform = BasisTransform::new(t_mat, tol)?;

    let diagonals: Vec<Vec<f64>> = states
        .iter()
        .map(|s| {
            let d = transform
                .matrix()
                .matmul(s.matrix())
                .matmul(&transform.matrix().adjoint());
            (0..n).map(|i| d.get(i, i).re).collect()
        })
        .collect();

    Ok(ClassicalEnsembleReport {
        is_classical: true,
        transform: Some(transform),
        diagonals,
        max_commutator_norm: max_comm,
    })
}

/// Orthonormal basis (columns) simultaneously diagonalizing a commuting
/// family of Hermitian matrices. Eigenvectors are ordered by descending
/// eigenvalue of the first member; ties are broken by the next members.
fn common_eigenbasis(members: &[ComplexMatrix], cluster_tol: f64) -> Result<ComplexMatrix, Error> {
    let n = members[0].rows;
    let identity = ComplexMatrix::identity(n);
    refine_block(&identity, members, cluster_tol)
}

/// Recursively refines the orthonormal block `basis` (n × k columns) using
/// the remaining members.
fn refine_block(
    basis: &ComplexMatrix,
    members: &[ComplexMatrix],
    cluster_tol: f64,
) -> Result<ComplexMatrix, Error> {
    let k = basis.cols;
    if k <= 1 || members.is_empty() {
        return Ok(basis.clone());
    }
    let m = &members[0];
    // Project the member into the block: k×k Hermitian.
    let projected = basis.adjoint().matmul(m).matmul(basis).hermitize();
    let eig = eig_hermitian(&projected, f64::INFINITY)?;
    // Descending eigenvalue order.
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&i, &j| {
            eig.values[j]
                .partial_cmp(&eig.values[i])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        idx
    };
    // Rotate the block basis into the member's eigenbasis.
    let mut rotated = ComplexMatrix::zeros(basis.rows, k);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..basis.rows {
            let mut acc = ZERO;
            for c in 0..k {
                acc += basis.get(r, c) * eig.vectors.get(c, old_col);
            }
            rotated.set(r, new_col, acc);
        }
    }
    let values: Vec<f64> = order.iter().map(|&i| eig.values[i]).collect();

    // Split into clusters of (near-)equal eigenvalues and recurse with the
    // remaining members on blocks that are still degenerate.
    let scale = values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let gap = cluster_tol * scale.max(1.0) * 10.0;
    let mut out = ComplexMatrix::zeros(basis.rows, k);
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && (values[end - 1] - values[end]).abs() <= gap {
            end += 1;
        }
        let mut block = ComplexMatrix::zeros(basis.rows, end - start);
        for (bc, c) in (start..end).enumerate() {
            for r in 0..basis.rows {
                block.set(r, bc, rotated.get(r, c));
            }
        }
        let refined = if end - start > 1 {
            refine_block(&block, &members[1..], cluster_tol)?
        } else {
            block
        };
        for (bc, c) in (start..end).enumerate() {
            for r in 0..basis.rows {
                out.set(r, c, refined.get(r, bc));
            }
        }
        start = end;
    }
    Ok(out)
}

/// Attractor channel fixing every member of a classical ensemble: the
/// canonical channel conjugated by the inverse of the report's
/// diagonalizing transform. Exactly CPTP when that conjugation reduces to a
/// unitary rotation of a canonical channel; the report carries the
/// deviations otherwise.
pub fn build_mixed_attractor(
    report: &ClassicalEnsembleReport,
    b: &CorrelationMatrix,
    tol: &Tolerances,
) -> Result<(ChoiCandidate, CptpReport), Error> {
    if !report.is_classical {
        return Err(Error::NotClassical {
            max_commutator_norm: report.max_commutator_norm,
        });
    }
    let transform = report
        .transform
        .as_ref()
        .expect("classical report carries a transform");
    if transform.dim() != b.dim() {
        return Err(Error::dim("build_mixed_attractor", b.dim(), transform.dim()));
    }
    let conjugation = transform.inverse(tol)?;
    build_general(b, &conjugation, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CptpVerdict;
    use crate::linalg::{haar_unitary, PureState};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> DensityMatrix {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(
            &PureState::new(vec![c(amp, 0.0), c(amp, 0.0)], &tol()).unwrap(),
        )
    }

    fn b_from_offdiag(beta: Complex64) -> CorrelationMatrix {
        let mat = ComplexMatrix::new(2, 2, vec![ONE, beta, beta.conj(), ONE]);
        CorrelationMatrix::new(mat, &tol()).unwrap()
    }

    #[test]
    fn all_ones_coefficients_give_identity_channel() {
        let b = CorrelationMatrix::all_ones(3);
        let e = build_canonical(&b);
        let dev = e
            .matrix()
            .sub(ChoiMatrix::identity(3).matrix())
            .frobenius_norm();
        assert!(dev < 1e-15);
    }

    #[test]
    fn identity_coefficients_give_dephasing() {
        let b = CorrelationMatrix::dephasing(2);
        let e = build_canonical(&b);
        let rho = plus_state();
        let out = e.apply(&rho, &tol()).unwrap();
        // Entrywise-product oracle: diagonal kept, off-diagonal zeroed.
        assert!((out.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!(out.entry(0, 1).norm() < 1e-14);
    }

    #[test]
    fn canonical_action_matches_entrywise_product() {
        let b = b_from_offdiag(c(0.5, 0.0));
        let e = build_canonical(&b);
        let out = e.apply(&plus_state(), &tol()).unwrap();
        assert!((out.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!((out.entry(0, 1).re - 0.25).abs() < 1e-12);
        assert!((out.entry(1, 0).re - 0.25).abs() < 1e-12);
        assert!((out.entry(1, 1).re - 0.5).abs() < 1e-12);

        // Basis projectors stay exactly fixed.
        let zero = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let fixed = e.apply(&zero, &tol()).unwrap();
        assert!(fixed.matrix().sub(zero.matrix()).frobenius_norm() < 1e-14);
    }

    #[test]
    fn constructor_rejects_invalid_coefficients() {
        // Non-PSD: off-diagonal modulus above 1.
        let mat = ComplexMatrix::new(2, 2, vec![ONE, c(1.5, 0.0), c(1.5, 0.0), ONE]);
        assert!(CorrelationMatrix::new(mat, &tol()).is_err());
        // Diagonal not one.
        let mat = ComplexMatrix::new(2, 2, vec![c(0.9, 0.0), ZERO, ZERO, ONE]);
        assert!(matches!(
            CorrelationMatrix::new(mat, &tol()),
            Err(Error::DiagonalNotOne { .. })
        ));
    }

    #[test]
    fn random_correlation_rank_one_has_unimodular_entries() {
        let mut stream = SeedStream::new(6, 0);
        let b = CorrelationMatrix::random(4, 1, &mut stream).unwrap();
        for r in 0..4 {
            for cidx in 0..4 {
                assert!((b.coefficient(r, cidx).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_correlation_full_rank_strictly_contracts() {
        let mut stream = SeedStream::new(7, 0);
        let b = CorrelationMatrix::random(4, 4, &mut stream).unwrap();
        for r in 0..4 {
            for cidx in 0..4 {
                if r != cidx {
                    assert!(b.coefficient(r, cidx).norm() < 1.0);
                }
            }
        }
        // Determinism under a fixed stream.
        let b2 = CorrelationMatrix::random(4, 4, &mut SeedStream::new(7, 0)).unwrap();
        assert_eq!(b.matrix(), b2.matrix());
        // Valid coefficient matrices are PSD.
        let (psd, _) = crate::linalg::is_psd(b.matrix(), 1e-9).unwrap();
        assert!(psd);
    }

    #[test]
    fn build_general_with_identity_reduces_to_canonical() {
        let b = b_from_offdiag(c(0.3, 0.1));
        let (cand, report) = build_general(&b, &BasisTransform::identity(2), &tol()).unwrap();
        assert_eq!(report.verdict, CptpVerdict::Cptp);
        let dev = cand
            .matrix()
            .sub(build_canonical(&b).matrix())
            .frobenius_norm();
        assert!(dev < 1e-12);
    }

    #[test]
    fn build_general_unitary_fixes_rotated_basis() {
        let mut stream = SeedStream::new(8, 0);
        let u = haar_unitary(3, &mut stream);
        let t = BasisTransform::new(u, &tol()).unwrap();
        assert!(t.is_unitary());
        let b = CorrelationMatrix::random(3, 3, &mut stream).unwrap();
        let (cand, report) = build_general(&b, &t, &tol()).unwrap();
        assert_eq!(report.verdict, CptpVerdict::Cptp);
        for mu in 0..3 {
            let pattern = t.pattern(mu).unwrap();
            let proj = pattern.projector();
            let image = cand.apply_raw(&proj).unwrap();
            assert!(image.sub(&proj).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn build_general_shear_fixes_patterns_but_breaks_tp() {
        // T = [[1, 1], [0, 1]] with dephasing coefficients: the two fixed
        // patterns are |0⟩ and (|0⟩+|1⟩)/√2, trace preservation fails.
        let t = BasisTransform::new(
            ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            &tol(),
        )
        .unwrap();
        assert!(!t.is_unitary());
        let b = CorrelationMatrix::dephasing(2);
        let (cand, report) = build_general(&b, &t, &tol()).unwrap();
        assert!(report.tp_deviation > 0.1);
        for mu in 0..2 {
            let proj = t.pattern(mu).unwrap().projector();
            let image = cand.apply_raw(&proj).unwrap();
            assert!(image.sub(&proj).frobenius_norm() < 1e-10);
        }
        let p1 = t.pattern(1).unwrap();
        let expect = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p1.amplitudes()[0].norm() - expect).abs() < 1e-12);
    }

    #[test]
    fn coherence_profile_constant_for_all_ones() {
        let b = CorrelationMatrix::all_ones(2);
        let profile = coherence_decay_profile(&b, &plus_state(), 5).unwrap();
        for table in &profile {
            assert!((table[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn coherence_profile_geometric_decay() {
        let b = b_from_offdiag(c(0.5, 0.0));
        let profile = coherence_decay_profile(&b, &plus_state(), 10).unwrap();
        // |ρ_k[0][1]| = 0.5^k · 0.5; at k = 10 that is ≈ 4.8828125e-4.
        let expect = 0.5f64.powi(10) * 0.5;
        assert!((profile[10][1] - expect).abs() < 1e-10);
        for (k, table) in profile.iter().enumerate() {
            assert!((table[1] - 0.5f64.powi(k as i32) * 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn iteration_converges_to_dephased_state() {
        // |β01| = 0.5 on |+⟩⟨+|: successive iterates come within 1e-12 of
        // each other after roughly 40-50 applications, at the diagonal of ρ0.
        let b = b_from_offdiag(c(0.5, 0.0));
        let choi = build_canonical(&b);
        let result =
            crate::channel::iterate(&choi, &plus_state(), 100, 1e-12, &tol()).unwrap();
        assert!(result.converged);
        assert!(result.steps <= 50, "steps = {}", result.steps);
        let last = result.trajectory.last().unwrap();
        assert!((last.entry(0, 0).re - 0.5).abs() < 1e-9);
        assert!(last.entry(0, 1).norm() < 1e-9);
    }

    #[test]
    fn strict_attractor_basis_spans_the_diagonal() {
        let mut stream = SeedStream::new(12, 0);
        let n = 4;
        let raw = CorrelationMatrix::random(n, n, &mut stream).unwrap();
        let damped = raw
            .matrix()
            .scale_re(0.9)
            .add(&ComplexMatrix::identity(n).scale_re(0.1));
        let b = CorrelationMatrix::new(damped, &tol()).unwrap();
        let choi = build_canonical(&b);
        let fps = crate::channel::fixed_point_space(choi.as_candidate(), 1e-8).unwrap();
        assert_eq!(fps.dimension, n);
        assert!(fps.hermitian_closed);
        for op in &fps.basis {
            for r in 0..n {
                for cidx in 0..n {
                    if r != cidx {
                        assert!(op.get(r, cidx).norm() < 1e-8, "off-diagonal leak");
                    }
                }
            }
        }
    }

    #[test]
    fn coherence_preserved_for_unimodular_coefficient() {
        // |β| = 1 with a phase: the modulus of the coherence never decays.
        let phase = Complex64::from_polar(1.0, 0.7);
        let b = b_from_offdiag(phase);
        let profile = coherence_decay_profile(&b, &plus_state(), 20).unwrap();
        for table in &profile {
            assert!((table[1] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn triviality_residual_matches_brute_force() {
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let coeffs = vec![c(amp, 0.0), c(amp, 0.0)];

        let ones = CorrelationMatrix::all_ones(2);
        let (residual, trivial) = triviality_residual(&ones, &coeffs, 1e-9).unwrap();
        assert!(residual < 1e-15);
        assert!(trivial);

        let b = b_from_offdiag(c(0.5, 0.0));
        let (residual, trivial) = triviality_residual(&b, &coeffs, 1e-9).unwrap();
        assert!(!trivial);
        // Brute force: apply the channel to |e⟩⟨e| and take the difference.
        let e = build_canonical(&b);
        let proj = PureState::new(coeffs.clone(), &tol()).unwrap().projector();
        let brute = e.as_candidate().apply_raw(&proj).unwrap().sub(&proj).frobenius_norm();
        assert!((residual - brute).abs() < 1e-12, "{residual} vs {brute}");
    }

    #[test]
    fn triviality_residual_lower_bound() {
        // Any coefficient with |β − 1| ≥ η and all |c_μ| ≥ γ forces
        // residual ≥ η·γ²·√2 (the pair (μ,ν) and (ν,μ) both contribute).
        let b = b_from_offdiag(c(0.4, 0.2));
        let eta = (b.coefficient(0, 1) - ONE).norm();
        let coeffs = vec![c(0.8, 0.0), c(0.6, 0.0)];
        let gamma: f64 = coeffs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let (residual, _) = triviality_residual(&b, &coeffs, 1e-9).unwrap();
        assert!(residual >= eta * gamma * gamma * std::f64::consts::SQRT_2 - 1e-12);
    }

    #[test]
    fn triviality_residual_rejects_zero_coefficient() {
        let b = CorrelationMatrix::all_ones(2);
        let coeffs = vec![ONE, ZERO];
        assert!(matches!(
            triviality_residual(&b, &coeffs, 1e-9),
            Err(Error::ZeroCoefficient { index: 1 })
        ));
    }

    #[test]
    fn detect_classical_for_diagonal_pair() {
        let t = tol();
        let states = vec![
            DensityMatrix::new(ComplexMatrix::from_real(2, 2, &[0.7, 0.0, 0.0, 0.3]), &t).unwrap(),
            DensityMatrix::new(ComplexMatrix::from_real(2, 2, &[0.2, 0.0, 0.0, 0.8]), &t).unwrap(),
        ];
        let report = detect_classical_ensemble(&states, 1e-8, &t).unwrap();
        assert!(report.is_classical);
        assert!(report.max_commutator_norm < 1e-10);
        // Already-diagonal input: the transform does not rotate the basis.
        let tm = report.transform.as_ref().unwrap().matrix();
        assert!(tm.get(0, 1).norm() < 1e-10);
        assert!(tm.get(1, 0).norm() < 1e-10);
        // First member's diagonal comes out in descending order.
        assert!(report.diagonals[0][0] > report.diagonals[0][1]);
    }

    #[test]
    fn detect_classical_round_trip_with_known_transform() {
        // Members T₀⁻¹ D T₀⁻† with a non-unitary T₀, normalized to unit trace.
        let t = tol();
        let t0 = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.4, 0.2), c(0.0, 0.0), c(1.3, 0.0)],
        );
        let t0_inv = invert(&t0).unwrap();
        let diags = [[0.6, 0.4], [0.15, 0.85], [0.5, 0.5]];
        let states: Vec<DensityMatrix> = diags
            .iter()
            .map(|d| {
                let dm = ComplexMatrix::diagonal(&[c(d[0], 0.0), c(d[1], 0.0)]);
                let raw = t0_inv.matmul(&dm).matmul(&t0_inv.adjoint());
                let tr = raw.trace().re;
                DensityMatrix::new(raw.scale_re(1.0 / tr), &t).unwrap()
            })
            .collect();
        let report = detect_classical_ensemble(&states, 1e-8, &t).unwrap();
        assert!(report.is_classical, "commutator {}", report.max_commutator_norm);
        let tm = report.transform.as_ref().unwrap().matrix();
        for (s, want_diag) in states.iter().zip(report.diagonals.iter()) {
            let d = tm.matmul(s.matrix()).matmul(&tm.adjoint());
            let off = d.get(0, 1).norm() + d.get(1, 0).norm();
            assert!(off < 1e-8, "off-diagonal residual {off:.3e}");
            for (i, w) in want_diag.iter().enumerate() {
                assert!((d.get(i, i).re - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn any_full_rank_pair_is_classical() {
        // Two Hermitian forms with a positive-definite combination are
        // always simultaneously diagonalizable by congruence, so every
        // full-rank two-member ensemble is classical even when the raw
        // members do not commute.
        let t = tol();
        let diag = DensityMatrix::new(
            ComplexMatrix::from_real(2, 2, &[0.7, 0.0, 0.0, 0.3]),
            &t,
        )
        .unwrap();
        let mixed = DensityMatrix::new(
            ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.1, 0.5]),
            &t,
        )
        .unwrap();
        let states = [diag, mixed];
        let report = detect_classical_ensemble(&states, 1e-8, &t).unwrap();
        assert!(report.is_classical);
        let tm = report.transform.as_ref().unwrap().matrix();
        for s in &states {
            let d = tm.matmul(s.matrix()).matmul(&tm.adjoint());
            assert!(d.get(0, 1).norm() + d.get(1, 0).norm() < 1e-8);
        }
    }

    #[test]
    fn detect_non_classical_triple() {
        // Three generic states on C² generically admit no common congruence
        // diagonalization; the whitened commutators stay visibly nonzero.
        let t = tol();
        let diag = DensityMatrix::new(
            ComplexMatrix::from_real(2, 2, &[0.7, 0.0, 0.0, 0.3]),
            &t,
        )
        .unwrap();
        let mixed = DensityMatrix::new(
            ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.1, 0.5]),
            &t,
        )
        .unwrap();
        let skew = DensityMatrix::new(
            ComplexMatrix::new(
                2,
                2,
                vec![c(0.4, 0.0), c(0.0, 0.15), c(0.0, -0.15), c(0.6, 0.0)],
            ),
            &t,
        )
        .unwrap();
        let report = detect_classical_ensemble(&[diag, mixed, skew], 1e-8, &t).unwrap();
        assert!(!report.is_classical);
        assert!(report.max_commutator_norm > 0.01);
        assert!(report.transform.is_none());
    }

    #[test]
    fn mixed_attractor_fixes_every_member() {
        // Commuting ensemble in a rotated orthonormal basis, more members
        // than the dimension.
        let t = tol();
        let mut stream = SeedStream::new(10, 0);
        let u = haar_unitary(3, &mut stream);
        let diag_list: Vec<[f64; 3]> = vec![
            [0.5, 0.3, 0.2],
            [0.1, 0.6, 0.3],
            [0.25, 0.25, 0.5],
            [0.4, 0.4, 0.2],
            [0.7, 0.2, 0.1],
        ];
        let states: Vec<DensityMatrix> = diag_list
            .iter()
            .map(|d| {
                let dm = ComplexMatrix::diagonal(&[c(d[0], 0.0), c(d[1], 0.0), c(d[2], 0.0)]);
                DensityMatrix::new(u.matmul(&dm).matmul(&u.adjoint()).hermitize(), &t).unwrap()
            })
            .collect();
        let report = detect_classical_ensemble(&states, 1e-8, &t).unwrap();
        assert!(report.is_classical);
        let b = CorrelationMatrix::random(3, 3, &mut stream).unwrap();
        let (cand, cptp) = build_mixed_attractor(&report, &b, &t).unwrap();
        assert_eq!(cptp.verdict, CptpVerdict::Cptp, "tp_dev={}", cptp.tp_deviation);
        for s in &states {
            let image = cand.apply_raw(s.matrix()).unwrap();
            let dev = image.sub(s.matrix()).frobenius_norm();
            assert!(dev < 1e-10, "member not fixed, dev={dev:.3e}");
        }
    }

    #[test]
    fn mixed_attractor_rejects_non_classical_report() {
        let report = ClassicalEnsembleReport {
            is_classical: false,
            transform: None,
            diagonals: Vec::new(),
            max_commutator_norm: 0.5,
        };
        let b = CorrelationMatrix::all_ones(2);
        assert!(matches!(
            build_mixed_attractor(&report, &b, &tol()),
            Err(Error::NotClassical { .. })
        ));
    }
}
