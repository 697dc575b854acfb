//! Quantum channels in the Choi representation.
//!
//! A linear map `Λ: B(H_A) → B(H_B)` is carried by its Choi operator
//! `E = Σ_{ij} |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)` on `A ⊗ B`; the map is recovered as
//! `Λ(ρ) = Tr_A[E (ρᵀ ⊗ 1_B)]`. The channel is completely positive iff
//! `E ⪰ 0` and trace preserving iff `Tr_B E = 1_A`.
//!
//! [`ChoiCandidate`] carries an arbitrary operator on `A ⊗ B` together with
//! its dimensions and supports the full linear-algebra machinery;
//! [`ChoiMatrix`] wraps a candidate that has passed (or is guaranteed by
//! construction to pass) the CPTP checks.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{
    eig_general, eig_hermitian, partial_trace, trace_distance, BipartiteDims, Complex64,
    ComplexMatrix, DensityMatrix, Subsystem, Tolerances,
};

/// Outcome of the CPTP verification checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CptpVerdict {
    Cptp,
    CpOnly,
    TpOnly,
    Neither,
}

/// Diagnostic report of the complete-positivity and trace-preservation checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CptpReport {
    /// Smallest eigenvalue of the Hermitian part of the Choi operator.
    pub min_eigenvalue: f64,
    /// `‖Tr_B E − 1_A‖_F`.
    pub tp_deviation: f64,
    /// `max |E[r][c] − conj(E[c][r])|`.
    pub hermiticity_deviation: f64,
    pub verdict: CptpVerdict,
}

impl CptpReport {
    pub fn is_cptp(&self) -> bool {
        self.verdict == CptpVerdict::Cptp
    }
}

/// Operator on `A ⊗ B` that may or may not be a valid Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiCandidate {
    dims: BipartiteDims,
    mat: ComplexMatrix,
}

impl ChoiCandidate {
    pub fn new(dims: BipartiteDims, mat: ComplexMatrix) -> Result<Self, Error> {
        let total = dims.total();
        if mat.rows != total || mat.cols != total {
            return Err(Error::dim("ChoiCandidate::new", total, mat.rows));
        }
        mat.check_finite("ChoiCandidate::new")?;
        Ok(Self { dims, mat })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// `⟨a b| E |a' b'⟩`.
    pub fn element(&self, a: usize, b: usize, a2: usize, b2: usize) -> Complex64 {
        self.mat.get(self.dims.index(a, b), self.dims.index(a2, b2))
    }

    /// Applies the carried map to an arbitrary (not necessarily valid state)
    /// matrix on `A`: `Λ(ρ)[k][l] = Σ_{ij} ρ[i][j] E[(i,k),(j,l)]`.
    pub fn apply_raw(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        let (na, nb) = (self.dims.dim_a, self.dims.dim_b);
        if rho.rows != na || rho.cols != na {
            return Err(Error::dim("ChoiCandidate::apply_raw", na, rho.rows));
        }
        let mut out = ComplexMatrix::zeros(nb, nb);
        for i in 0..na {
            for j in 0..na {
                let w = rho.get(i, j);
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        let cur = out.get(k, l);
                        out.set(k, l, cur + w * self.element(i, k, j, l));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Runs the three CPTP checks and classifies the result.
    pub fn verify(&self, tol: &Tolerances) -> CptpReport {
        let herm_dev = self.mat.hermiticity_deviation();
        // Eigenvalues are taken on the Hermitian part so the report stays
        // meaningful for slightly (or badly) non-Hermitian input.
        let min_eig = eig_hermitian(&self.mat.hermitize(), f64::INFINITY)
            .map(|e| e.min_eigenvalue())
            .unwrap_or(f64::NEG_INFINITY);
        let tp_dev = match partial_trace(&self.mat, self.dims, Subsystem::B) {
            Ok(tb) => tb
                .sub(&ComplexMatrix::identity(self.dims.dim_a))
                .frobenius_norm(),
            Err(_) => f64::INFINITY,
        };
        let cp_ok = herm_dev <= tol.herm && min_eig >= -tol.psd;
        let tp_ok = tp_dev <= tol.tp;
        let verdict = match (cp_ok, tp_ok) {
            (true, true) => CptpVerdict::Cptp,
            (true, false) => CptpVerdict::CpOnly,
            (false, true) => CptpVerdict::TpOnly,
            (false, false) => CptpVerdict::Neither,
        };
        CptpReport {
            min_eigenvalue: min_eig,
            tp_deviation: tp_dev,
            hermiticity_deviation: herm_dev,
            verdict,
        }
    }

    /// Promotes the candidate to a verified [`ChoiMatrix`].
    pub fn into_verified(self, tol: &Tolerances) -> Result<ChoiMatrix, (CptpReport, Error)> {
        let report = self.verify(tol);
        match report.verdict {
            CptpVerdict::Cptp => Ok(ChoiMatrix { inner: self }),
            CptpVerdict::CpOnly => {
                let err = Error::NotTracePreserving {
                    deviation: report.tp_deviation,
                };
                Err((report, err))
            }
            _ => {
                let err = Error::NotCompletelyPositive {
                    min_eigenvalue: report.min_eigenvalue,
                };
                Err((report, err))
            }
        }
    }
}

/// Verified CPTP map in the Choi representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    inner: ChoiCandidate,
}

impl ChoiMatrix {
    /// Choi operator of the identity channel: the unnormalized maximally
    /// entangled projector `|Ω⟩⟨Ω|`, `|Ω⟩ = Σ_i |i⟩|i⟩`. Rank 1, trace `N`.
    pub fn identity(n: usize) -> Self {
        let dims = BipartiteDims::square(n);
        let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
        for i in 0..n {
            for j in 0..n {
                mat.set(dims.index(i, i), dims.index(j, j), Complex64::new(1.0, 0.0));
            }
        }
        Self {
            inner: ChoiCandidate { dims, mat },
        }
    }

    /// Completely depolarizing channel, `Λ(ρ) = Tr[ρ]·1/N_B`.
    pub fn depolarizing(dims: BipartiteDims) -> Self {
        let mat = ComplexMatrix::identity(dims.total()).scale_re(1.0 / dims.dim_b as f64);
        Self {
            inner: ChoiCandidate { dims, mat },
        }
    }

    /// Wraps a candidate that is CPTP by construction. Debug builds verify.
    pub(crate) fn trusted(inner: ChoiCandidate) -> Self {
        debug_assert!(
            inner.verify(&Tolerances::default()).is_cptp(),
            "trusted ChoiMatrix failed verification"
        );
        Self { inner }
    }

    pub fn from_candidate(cand: ChoiCandidate, tol: &Tolerances) -> Result<Self, (CptpReport, Error)> {
        cand.into_verified(tol)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.inner.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.inner.mat
    }

    pub fn as_candidate(&self) -> &ChoiCandidate {
        &self.inner
    }

    pub fn verify(&self, tol: &Tolerances) -> CptpReport {
        self.inner.verify(tol)
    }

    /// Applies the channel to a state. The output is validated as a density
    /// matrix at the same tolerances.
    pub fn apply(&self, rho: &DensityMatrix, tol: &Tolerances) -> Result<DensityMatrix, Error> {
        let out = self.inner.apply_raw(rho.matrix())?;
        DensityMatrix::new(out, tol)
    }
}

/// Kraus representation of a completely positive map: `Λ(ρ) = Σ K ρ K†`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub dims: BipartiteDims,
    /// `N_B × N_A` operators.
    pub operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
        if rho.rows != self.dims.dim_a || rho.cols != self.dims.dim_a {
            return Err(Error::dim("KrausSet::apply", self.dims.dim_a, rho.rows));
        }
        let mut out = ComplexMatrix::zeros(self.dims.dim_b, self.dims.dim_b);
        for k in &self.operators {
            out = out.add(&k.matmul(rho).matmul(&k.adjoint()));
        }
        Ok(out)
    }

    /// `‖Σ K†K − 1_A‖_F`, zero for a trace-preserving set.
    pub fn completeness_deviation(&self) -> f64 {
        let na = self.dims.dim_a;
        let mut sum = ComplexMatrix::zeros(na, na);
        for k in &self.operators {
            sum = sum.add(&k.adjoint().matmul(k));
        }
        sum.sub(&ComplexMatrix::identity(na)).frobenius_norm()
    }
}

/// Kraus operators from the eigendecomposition of the Choi operator:
/// `K_k[b][a] = √λ_k ⟨a b|v_k⟩` for each eigenvalue `λ_k > tol·λ_max`.
pub fn kraus_from_choi(choi: &ChoiMatrix, tol: f64) -> Result<KrausSet, Error> {
    let dims = choi.dims();
    let eig = eig_hermitian(choi.matrix(), Tolerances::default().herm)?;
    let lambda_max = eig.max_eigenvalue().max(0.0);
    if eig.min_eigenvalue() < -tol.max(Tolerances::default().psd) {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    let cut = tol * lambda_max;
    let mut operators = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= cut {
            continue;
        }
        let weight = lambda.sqrt();
        let mut op = ComplexMatrix::zeros(dims.dim_b, dims.dim_a);
        for a in 0..dims.dim_a {
            for b in 0..dims.dim_b {
                op.set(b, a, eig.vectors.get(dims.index(a, b), k).scale(weight));
            }
        }
        operators.push(op);
    }
    Ok(KrausSet { dims, operators })
}

/// Linearization of the channel on vectorized operators:
/// `vec(Λ(ρ)) = L · vec(ρ)` with row-major vectorization.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub dims: BipartiteDims,
    /// `N_B² × N_A²`.
    pub mat: ComplexMatrix,
}

impl TransferMatrix {
    /// Built by applying the channel to every matrix unit `|i⟩⟨j|`.
    pub fn from_candidate(cand: &ChoiCandidate) -> Self {
        let (na, nb) = (cand.dims().dim_a, cand.dims().dim_b);
        let mut mat = ComplexMatrix::zeros(nb * nb, na * na);
        for i in 0..na {
            for j in 0..na {
                let unit = ComplexMatrix::matrix_unit(na, i, j);
                let image = cand.apply_raw(&unit).expect("dims checked");
                for (flat, &v) in image.data.iter().enumerate() {
                    mat.set(flat, i * na + j, v);
                }
            }
        }
        Self { dims: cand.dims(), mat }
    }

    pub fn from_choi(choi: &ChoiMatrix) -> Self {
        Self::from_candidate(choi.as_candidate())
    }

    pub fn apply_vec(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let image = self.mat.matvec(&rho.vectorize());
        ComplexMatrix::from_vectorized(self.dims.dim_b, &image)
    }

    /// Full spectrum of the transfer matrix.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>, Error> {
        eig_general(&self.mat)
    }

    pub fn spectral_radius(&self) -> Result<f64, Error> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }
}

/// Stationary structure of a square channel.
#[derive(Debug, Clone)]
pub struct FixedPointSpace {
    /// Number of transfer-matrix eigenvalues with `|λ − 1| ≤ tol`.
    pub dimension: usize,
    /// Orthonormal (as vectorized operators) basis of the eigenvalue-1
    /// space, each devectorized to an `N × N` operator.
    pub basis: Vec<ComplexMatrix>,
    /// Eigenvalues with `|λ| ≥ 1 − tol` but `|λ − 1| > tol`: rotating
    /// coherences that never decay yet are not strict fixed points.
    pub peripheral_dimension: usize,
    /// Whether the computed eigenbasis span is closed under `b ↦ b†`.
    pub hermitian_closed: bool,
}

/// Eigenvalue-1 eigenspace of the transfer matrix.
///
/// The dimension is counted from the transfer spectrum via `|λ − 1| ≤ tol`;
/// the basis is extracted as the corresponding near-null space of `L − 1`,
/// which is accurate whenever the remaining spectrum is separated from 1.
pub fn fixed_point_space(cand: &ChoiCandidate, tol: f64) -> Result<FixedPointSpace, Error> {
    let dims = cand.dims();
    if dims.dim_a != dims.dim_b {
        return Err(Error::dim("fixed_point_space", dims.dim_a, dims.dim_b));
    }
    let n = dims.dim_a;
    let transfer = TransferMatrix::from_candidate(cand);
    let eigs = transfer.eigenvalues()?;

    let one = Complex64::new(1.0, 0.0);
    let dimension = eigs.iter().filter(|z| (*z - one).norm() <= tol).count();
    let peripheral_dimension = eigs
        .iter()
        .filter(|z| z.norm() >= 1.0 - tol && (*z - one).norm() > tol)
        .count();

    let mut basis = Vec::with_capacity(dimension);
    if dimension > 0 {
        // Smallest eigenvectors of (L−1)†(L−1) span the eigenvalue-1 space.
        let shifted = transfer.mat.sub(&ComplexMatrix::identity(n * n));
        let gram = shifted.adjoint().matmul(&shifted);
        let eig = eig_hermitian(&gram, 1e-8 * gram.frobenius_norm().max(1.0))?;
        for k in 0..dimension {
            let vec = eig.vector(k);
            basis.push(ComplexMatrix::from_vectorized(n, &vec));
        }
    }

    // Closure under conjugate transpose: project each b† onto the span.
    let mut hermitian_closed = true;
    for b in &basis {
        let target = b.adjoint().vectorize();
        let mut residual = target.clone();
        for other in &basis {
            let ov = other.vectorize();
            let coeff: Complex64 = ov.iter().zip(&target).map(|(o, t)| o.conj() * t).sum();
            for (r, o) in residual.iter_mut().zip(&ov) {
                *r -= coeff * o;
            }
        }
        let res_norm: f64 = residual.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if res_norm > tol.max(1e-8) {
            hermitian_closed = false;
            break;
        }
    }

    Ok(FixedPointSpace {
        dimension,
        basis,
        peripheral_dimension,
        hermitian_closed,
    })
}

/// Result of repeated channel application.
#[derive(Debug, Clone)]
pub struct IterationResult {
    /// Visited states starting from the initial one; the final application
    /// that triggers convergence is not appended (it is within `conv_tol`
    /// of the last entry).
    pub trajectory: Vec<DensityMatrix>,
    pub converged: bool,
    /// Number of channel applications performed.
    pub steps: usize,
}

/// Applies the channel repeatedly until successive iterates are closer than
/// `conv_tol` in trace distance or `max_steps` is reached.
///
/// Convergence is declared on successive-iterate distance rather than
/// distance to any particular fixed point, since the stationary set may be
/// multi-dimensional.
pub fn iterate(
    choi: &ChoiMatrix,
    rho0: &DensityMatrix,
    max_steps: usize,
    conv_tol: f64,
    tol: &Tolerances,
) -> Result<IterationResult, Error> {
    let dims = choi.dims();
    if dims.dim_a != dims.dim_b {
        return Err(Error::dim("iterate", dims.dim_a, dims.dim_b));
    }
    if rho0.dim() != dims.dim_a {
        return Err(Error::dim("iterate", dims.dim_a, rho0.dim()));
    }
    let mut trajectory = vec![rho0.clone()];
    let mut converged = false;
    let mut steps = 0;
    for k in 1..=max_steps {
        let prev = trajectory.last().expect("nonempty");
        let next = choi.apply(prev, tol)?;
        steps = k;
        if trace_distance(&next, prev)? < conv_tol {
            converged = true;
            break;
        }
        trajectory.push(next);
    }
    Ok(IterationResult {
        trajectory,
        converged,
        steps,
    })
}

/// Choi operator of the composition `Λ₂ ∘ Λ₁`, assembled by routing every
/// matrix unit of the input space through both channels.
pub fn compose_candidates(
    second: &ChoiCandidate,
    first: &ChoiCandidate,
) -> Result<ChoiCandidate, Error> {
    if first.dims().dim_b != second.dims().dim_a {
        return Err(Error::dim(
            "compose",
            first.dims().dim_b,
            second.dims().dim_a,
        ));
    }
    let na = first.dims().dim_a;
    let nc = second.dims().dim_b;
    let dims = BipartiteDims::new(na, nc);
    let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
    for i in 0..na {
        for j in 0..na {
            let unit = ComplexMatrix::matrix_unit(na, i, j);
            let mid = first.apply_raw(&unit)?;
            let image = second.apply_raw(&mid)?;
            for k in 0..nc {
                for l in 0..nc {
                    mat.set(dims.index(i, k), dims.index(j, l), image.get(k, l));
                }
            }
        }
    }
    ChoiCandidate::new(dims, mat)
}

/// Composition of verified channels; CPTP composed with CPTP is CPTP.
pub fn compose(second: &ChoiMatrix, first: &ChoiMatrix) -> Result<ChoiMatrix, Error> {
    let cand = compose_candidates(second.as_candidate(), first.as_candidate())?;
    Ok(ChoiMatrix::trusted(cand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_ginibre, PureState, SeedStream};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_density(n: usize, stream: &mut SeedStream) -> DensityMatrix {
        let g = random_ginibre(n, n, stream);
        let w = g.matmul(&g.adjoint());
        let tr = w.trace().re;
        DensityMatrix::new(w.scale_re(1.0 / tr), &tol()).unwrap()
    }

    #[test]
    fn identity_choi_structure() {
        let e = ChoiMatrix::identity(2);
        let m = e.matrix();
        // 1s exactly at the |ii⟩⟨jj| positions.
        for r in 0..4 {
            for col in 0..4 {
                let expect = if (r == 0 || r == 3) && (col == 0 || col == 3) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(m.get(r, col), c(expect, 0.0));
            }
        }
        assert!((m.trace().re - 2.0).abs() < 1e-15);
        let report = e.verify(&tol());
        assert!(report.is_cptp());
        assert!(report.tp_deviation < 1e-12);
        // Tr_B E = 1.
        let tb = partial_trace(m, e.dims(), Subsystem::B).unwrap();
        assert!(tb.sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn identity_channel_acts_as_identity() {
        let e = ChoiMatrix::identity(3);
        let mut stream = SeedStream::new(1, 0);
        let rho = random_density(3, &mut stream);
        let out = e.apply(&rho, &tol()).unwrap();
        assert!(out.matrix().sub(rho.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn depolarizing_channel_maps_to_maximally_mixed() {
        let e = ChoiMatrix::depolarizing(BipartiteDims::square(2));
        let mut stream = SeedStream::new(2, 0);
        let rho = random_density(2, &mut stream);
        let out = e.apply(&rho, &tol()).unwrap();
        // Direct contraction oracle: Tr_A[(1⊗1/2)(ρᵀ⊗1)] = Tr[ρ]·1/2.
        let expect = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(out.matrix().sub(&expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn verify_classifies_neither() {
        let cand = ChoiCandidate::new(
            BipartiteDims::square(2),
            ComplexMatrix::identity(4).scale_re(-1.0),
        )
        .unwrap();
        let report = cand.verify(&tol());
        assert_eq!(report.verdict, CptpVerdict::Neither);
        assert!((report.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn verify_classifies_cp_only_and_tp_only() {
        // Scaled identity Choi: still PSD, no longer trace preserving.
        let id = ChoiMatrix::identity(2);
        let cand = ChoiCandidate::new(id.dims(), id.matrix().scale_re(2.0)).unwrap();
        assert_eq!(cand.verify(&tol()).verdict, CptpVerdict::CpOnly);

        // TP but not PSD: dephasing-like Choi with one diagonal pushed
        // negative while Tr_B stays the identity.
        let dims = BipartiteDims::square(2);
        let mut m = ComplexMatrix::zeros(4, 4);
        m.set(0, 0, c(1.0, 0.0));
        m.set(3, 3, c(2.0, 0.0));
        m.set(2, 2, c(-1.0, 0.0));
        let cand = ChoiCandidate::new(dims, m).unwrap();
        let report = cand.verify(&tol());
        assert_eq!(report.verdict, CptpVerdict::TpOnly);
    }

    #[test]
    fn kraus_of_identity_channel() {
        let e = ChoiMatrix::identity(3);
        let kraus = kraus_from_choi(&e, 1e-9).unwrap();
        assert_eq!(kraus.operators.len(), 1);
        let dev = kraus.operators[0]
            .sub(&ComplexMatrix::identity(3))
            .max_abs();
        assert!(dev < 1e-12);
        assert!(kraus.completeness_deviation() < 1e-12);
    }

    #[test]
    fn kraus_of_dephasing_channel() {
        // Choi of the completely dephasing channel: Σ |μμ⟩⟨μμ|.
        let dims = BipartiteDims::square(2);
        let mut m = ComplexMatrix::zeros(4, 4);
        m.set(0, 0, c(1.0, 0.0));
        m.set(3, 3, c(1.0, 0.0));
        let choi = ChoiCandidate::new(dims, m)
            .unwrap()
            .into_verified(&tol())
            .unwrap();
        let kraus = kraus_from_choi(&choi, 1e-9).unwrap();
        assert_eq!(kraus.operators.len(), 2);
        // The set is {|0⟩⟨0|, |1⟩⟨1|} in some order, each up to a phase.
        let mut seen = [false, false];
        for op in &kraus.operators {
            let phase = op
                .data
                .iter()
                .find(|z| z.norm() > 0.5)
                .map(|z| z / z.norm())
                .unwrap();
            let aligned = op.scale(phase.conj());
            for slot in 0..2 {
                let unit = ComplexMatrix::matrix_unit(2, slot, slot);
                if aligned.sub(&unit).frobenius_norm() < 1e-12 {
                    seen[slot] = true;
                }
            }
        }
        assert!(seen[0] && seen[1], "expected the two basis projectors");
    }

    #[test]
    fn transfer_matrix_of_identity_channel() {
        let e = ChoiMatrix::identity(3);
        let t = TransferMatrix::from_choi(&e);
        assert!(t.mat.sub(&ComplexMatrix::identity(9)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn transfer_matrix_of_depolarizing() {
        let e = ChoiMatrix::depolarizing(BipartiteDims::square(2));
        let t = TransferMatrix::from_choi(&e);
        // vec(Λ(ρ)) = vec(1/2)·Tr(ρ) for any input state.
        let mut stream = SeedStream::new(4, 0);
        let rho = random_density(2, &mut stream);
        let image = t.apply_vec(rho.matrix());
        let expect = ComplexMatrix::identity(2).scale_re(0.5);
        assert!(image.sub(&expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn fixed_points_of_identity_channel() {
        let e = ChoiMatrix::identity(3);
        let fps = fixed_point_space(e.as_candidate(), 1e-8).unwrap();
        assert_eq!(fps.dimension, 9);
        assert_eq!(fps.peripheral_dimension, 0);
        assert!(fps.hermitian_closed);
    }

    #[test]
    fn fixed_points_of_depolarizing_channel() {
        let e = ChoiMatrix::depolarizing(BipartiteDims::square(2));
        let fps = fixed_point_space(e.as_candidate(), 1e-8).unwrap();
        assert_eq!(fps.dimension, 1);
        // The unique fixed operator is proportional to the identity.
        let b = &fps.basis[0];
        let offdiag = (b.get(0, 1).norm() + b.get(1, 0).norm()).abs();
        assert!(offdiag < 1e-10);
        assert!((b.get(0, 0) - b.get(1, 1)).norm() < 1e-10);
    }

    #[test]
    fn iterate_identity_converges_immediately() {
        let e = ChoiMatrix::identity(2);
        let rho = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let result = iterate(&e, &rho, 100, 1e-12, &tol()).unwrap();
        assert!(result.converged);
        assert_eq!(result.steps, 1);
        assert_eq!(result.trajectory.len(), 1);
    }

    #[test]
    fn iterate_depolarizing_reaches_maximally_mixed() {
        let e = ChoiMatrix::depolarizing(BipartiteDims::square(2));
        let rho = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let result = iterate(&e, &rho, 100, 1e-12, &tol()).unwrap();
        assert!(result.converged);
        // One application reaches 1/N; the next confirms convergence.
        assert_eq!(result.trajectory.len(), 2);
        let last = result.trajectory.last().unwrap();
        let dev = last
            .matrix()
            .sub(&ComplexMatrix::identity(2).scale_re(0.5))
            .frobenius_norm();
        assert!(dev < 1e-12);
    }

    #[test]
    fn compose_with_identity_matches_sequential_action() {
        let id = ChoiMatrix::identity(2);
        let dep = ChoiMatrix::depolarizing(BipartiteDims::square(2));
        let composed = compose(&id, &dep).unwrap();
        let mut stream = SeedStream::new(5, 0);
        let rho = random_density(2, &mut stream);
        let via_composed = composed.apply(&rho, &tol()).unwrap();
        let via_sequential = id.apply(&dep.apply(&rho, &tol()).unwrap(), &tol()).unwrap();
        let dev = via_composed
            .matrix()
            .sub(via_sequential.matrix())
            .frobenius_norm();
        assert!(dev < 1e-12);
    }

    #[test]
    fn compose_depolarizing_absorbs() {
        let id = ChoiMatrix::identity(2);
        let dep = ChoiMatrix::depolarizing(BipartiteDims::square(2));
        let composed = compose(&dep, &id).unwrap();
        let dev = composed.matrix().sub(dep.matrix()).frobenius_norm();
        assert!(dev < 1e-12);
    }

    #[test]
    fn compose_rejects_dimension_mismatch() {
        let a = ChoiMatrix::identity(2);
        let b = ChoiMatrix::identity(3);
        assert!(matches!(
            compose(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
