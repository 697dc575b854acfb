//! Feed-forward channels: two-outcome perceptrons and composite classifiers.
//!
//! The canonical perceptron maps the first `M₀` computational basis states
//! of an `N_A`-dimensional input space to `|0⟩⟨0|` and the remaining `M₁`
//! to `|1⟩⟨1|`. Its Choi operator is
//! `E = Σ_μ |μ_k k⟩⟨μ_k k| + X ⊗ |0⟩⟨1| + X† ⊗ |1⟩⟨0|`, where the
//! `M₀ × M₁` block `X` couples the two sectors; `E ⪰ 0` iff `XX† ≤ 1`,
//! and `Tr_B E = 1` holds for any `X`.
//!
//! The composite classifier at the end of the module fixes `N²` bipartite
//! states with an attractor on `A ⊗ A'` and traces out the ancilla, so the
//! `N²` reduced states become the prescribed outputs.

use serde::{Deserialize, Serialize};

use crate::attractor::{build_general, BasisTransform, CorrelationMatrix};
use crate::channel::{ChoiCandidate, ChoiMatrix, CptpReport};
use crate::error::Error;
use crate::io::MatrixJson;
use crate::linalg::{
    invert, operator_rank, partial_trace, random_pure_state, singular_values, trace_distance,
    BipartiteDims, Complex64, ComplexMatrix, DensityMatrix, PureState, SeedStream, Subsystem,
    Tolerances,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Specification of a canonical two-outcome perceptron.
#[derive(Debug, Clone)]
pub struct PerceptronSpec {
    n_a: usize,
    m0: usize,
    x: ComplexMatrix,
}

impl PerceptronSpec {
    /// Validates the sector split and the coupling bound `σ_max(X) ≤ 1`.
    pub fn new(n_a: usize, m0: usize, x: ComplexMatrix, tol: &Tolerances) -> Result<Self, Error> {
        if m0 < 1 || n_a < 2 || m0 >= n_a {
            return Err(Error::InvalidParameter(format!(
                "need 1 ≤ m0 < n_a with n_a ≥ 2, got n_a={n_a}, m0={m0}"
            )));
        }
        let m1 = n_a - m0;
        if x.rows != m0 || x.cols != m1 {
            return Err(Error::dim("PerceptronSpec::new", m0 * m1, x.rows * x.cols));
        }
        x.check_finite("PerceptronSpec::new")?;
        let sigma_max = singular_values(&x)?.first().copied().unwrap_or(0.0);
        if sigma_max > 1.0 + tol.psd {
            return Err(Error::CouplingTooLarge { sigma_max });
        }
        Ok(Self { n_a, m0, x })
    }

    pub fn input_dim(&self) -> usize {
        self.n_a
    }

    pub fn m0(&self) -> usize {
        self.m0
    }

    pub fn m1(&self) -> usize {
        self.n_a - self.m0
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.x
    }

    /// Label assigned to the computational basis input `μ`.
    pub fn label_of(&self, mu: usize) -> u8 {
        u8::from(mu >= self.m0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_a": self.n_a,
            "m0": self.m0,
            "m1": self.m1(),
            "x": MatrixJson::from_matrix(&self.x),
        })
    }
}

/// Raw perceptron Choi operator for an arbitrary coupling block, without
/// the `σ_max(X) ≤ 1` guard. Trace preservation holds for any `X`; complete
/// positivity does not, which makes this the right entry point for probing
/// the CP boundary.
pub fn perceptron_choi_candidate(n_a: usize, m0: usize, x: &ComplexMatrix) -> Result<ChoiCandidate, Error> {
    if m0 < 1 || n_a < 2 || m0 >= n_a {
        return Err(Error::InvalidParameter(format!(
            "need 1 ≤ m0 < n_a with n_a ≥ 2, got n_a={n_a}, m0={m0}"
        )));
    }
    let m1 = n_a - m0;
    if x.rows != m0 || x.cols != m1 {
        return Err(Error::dim("perceptron_choi_candidate", m0 * m1, x.rows * x.cols));
    }
    let dims = BipartiteDims::new(n_a, 2);
    let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
    // Diagonal sector terms |μ_k k⟩⟨μ_k k|.
    for mu in 0..n_a {
        let k = usize::from(mu >= m0);
        mat.set(dims.index(mu, k), dims.index(mu, k), ONE);
    }
    // Coupling block X ⊗ |0⟩⟨1| and its adjoint.
    for a in 0..m0 {
        for b in 0..m1 {
            let v = x.get(a, b);
            mat.set(dims.index(a, 0), dims.index(m0 + b, 1), v);
            mat.set(dims.index(m0 + b, 1), dims.index(a, 0), v.conj());
        }
    }
    ChoiCandidate::new(dims, mat)
}

/// Canonical perceptron channel: exactly trace preserving, completely
/// positive thanks to the validated coupling bound.
pub fn build_perceptron_canonical(spec: &PerceptronSpec) -> ChoiMatrix {
    let cand = perceptron_choi_candidate(spec.n_a, spec.m0, &spec.x)
        .expect("spec validated on construction");
    ChoiMatrix::trusted(cand)
}

/// Perceptron for arbitrary linearly independent patterns and output states:
/// the canonical channel conjugated by `T_A` on the input and `T_B` on the
/// output, `Λ(ρ) = T_B Λ̃(T_A⁻¹ ρ T_A⁻†) T_B†`. Exactly CPTP for unitary
/// transforms; the report carries the deviations otherwise.
pub fn build_perceptron_general(
    spec: &PerceptronSpec,
    t_a: &BasisTransform,
    t_b: &BasisTransform,
    tol: &Tolerances,
) -> Result<(ChoiCandidate, CptpReport), Error> {
    if t_a.dim() != spec.n_a {
        return Err(Error::dim("build_perceptron_general", spec.n_a, t_a.dim()));
    }
    if t_b.dim() != 2 {
        return Err(Error::dim("build_perceptron_general", 2, t_b.dim()));
    }
    let canonical = build_perceptron_canonical(spec);
    let ta_inv = invert(t_a.matrix())?;
    let ta_inv_dag = ta_inv.adjoint();
    let tb = t_b.matrix();
    let tb_dag = tb.adjoint();

    let dims = BipartiteDims::new(spec.n_a, 2);
    let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
    for i in 0..spec.n_a {
        for j in 0..spec.n_a {
            let unit = ComplexMatrix::matrix_unit(spec.n_a, i, j);
            let pulled = ta_inv.matmul(&unit).matmul(&ta_inv_dag);
            let mid = canonical.as_candidate().apply_raw(&pulled)?;
            let image = tb.matmul(&mid).matmul(&tb_dag);
            for k in 0..2 {
                for l in 0..2 {
                    mat.set(dims.index(i, k), dims.index(j, l), image.get(k, l));
                }
            }
        }
    }
    let cand = ChoiCandidate::new(dims, mat)?;
    let report = cand.verify(tol);
    Ok((cand, report))
}

/// Classifies an input by the overlap of the channel output with each of
/// the two target output states; ties break toward label 0.
pub fn classify(
    cand: &ChoiCandidate,
    rho: &DensityMatrix,
    outputs: (&DensityMatrix, &DensityMatrix),
) -> Result<(u8, f64), Error> {
    if cand.dims().dim_b != outputs.0.dim() || cand.dims().dim_b != outputs.1.dim() {
        return Err(Error::dim("classify", cand.dims().dim_b, outputs.0.dim()));
    }
    let image = cand.apply_raw(rho.matrix())?;
    let overlap0 = image.matmul(outputs.0.matrix()).trace().re;
    let overlap1 = image.matmul(outputs.1.matrix()).trace().re;
    if overlap1 > overlap0 {
        Ok((1, overlap1))
    } else {
        Ok((0, overlap0))
    }
}

/// Convenience wrapper classifying against the computational basis outputs.
pub fn classify_canonical(cand: &ChoiCandidate, rho: &DensityMatrix) -> Result<(u8, f64), Error> {
    let zero = DensityMatrix::from_pure(&PureState::basis(2, 0));
    let one = DensityMatrix::from_pure(&PureState::basis(2, 1));
    classify(cand, rho, (&zero, &one))
}

/// `N²` random bipartite pure states on `A ⊗ A'` whose reduced states span
/// the full operator space `B(H_A)`. Rank deficiency has probability zero;
/// draws are retried up to `max_retries` times before reporting a broken
/// generator.
pub fn random_bipartite_operator_basis(
    n: usize,
    stream: &mut SeedStream,
    max_retries: usize,
    rank_tol: f64,
) -> Result<Vec<PureState>, Error> {
    let mut last_rank = 0;
    for _ in 0..=max_retries {
        let states: Vec<PureState> = (0..n * n).map(|_| random_pure_state(n * n, stream)).collect();
        let rank = reduced_operator_rank(&states, n, rank_tol)?;
        if rank == n * n {
            return Ok(states);
        }
        last_rank = rank;
    }
    Err(Error::RankDeficient {
        rank: last_rank,
        expected: n * n,
        retries: max_retries,
    })
}

/// Rank of the span of the reduced states `Tr_{A'} |Ψ⟩⟨Ψ|`.
pub fn reduced_operator_rank(states: &[PureState], n: usize, rank_tol: f64) -> Result<usize, Error> {
    let dims = BipartiteDims::square(n);
    let reduced: Vec<ComplexMatrix> = states
        .iter()
        .map(|s| partial_trace(&s.projector(), dims, Subsystem::B))
        .collect::<Result<_, _>>()?;
    operator_rank(&reduced, rank_tol)
}

/// `N²` product states `|r_μ⟩ ⊗ |r'_μ⟩` with pairwise distinct factors on
/// both sides; their reductions are `N²` distinct pure projectors spanning
/// `B(H_A)`. Overlapping factors are resampled.
pub fn product_vector_basis(n: usize, stream: &mut SeedStream) -> Vec<PureState> {
    let distinct_tol = 1e-6;
    loop {
        let left: Vec<PureState> = (0..n * n).map(|_| random_pure_state(n, stream)).collect();
        let right: Vec<PureState> = (0..n * n).map(|_| random_pure_state(n, stream)).collect();
        let mut ok = true;
        'outer: for i in 0..n * n {
            for j in (i + 1)..n * n {
                if left[i].overlap(&left[j]).norm() > 1.0 - distinct_tol
                    || right[i].overlap(&right[j]).norm() > 1.0 - distinct_tol
                {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return left
                .iter()
                .zip(&right)
                .map(|(l, r)| l.tensor(r))
                .collect();
        }
    }
}

/// Orthonormal basis of `N²` (generically entangled) bipartite states: the
/// columns of a Haar unitary, returned together with the unitary transform
/// that maps the computational basis onto them.
pub fn orthonormal_bipartite_basis(
    n: usize,
    stream: &mut SeedStream,
    tol: &Tolerances,
) -> Result<(Vec<PureState>, BasisTransform), Error> {
    let u = crate::linalg::haar_unitary(n * n, stream);
    let states: Vec<PureState> = (0..n * n)
        .map(|col| {
            PureState::from_unnormalized((0..n * n).map(|r| u.get(r, col)).collect())
        })
        .collect::<Result<_, _>>()?;
    let transform = BasisTransform::new(u, tol)?;
    Ok((states, transform))
}

/// Transform whose columns are the given states (raw, generally non-unitary).
pub fn basis_transform_from_states(
    states: &[PureState],
    tol: &Tolerances,
) -> Result<BasisTransform, Error> {
    if states.is_empty() {
        return Err(Error::EmptyList);
    }
    let dim = states[0].dim();
    if states.len() != dim {
        return Err(Error::dim("basis_transform_from_states", dim, states.len()));
    }
    let mut mat = ComplexMatrix::zeros(dim, dim);
    for (col, s) in states.iter().enumerate() {
        if s.dim() != dim {
            return Err(Error::dim("basis_transform_from_states", dim, s.dim()));
        }
        for r in 0..dim {
            mat.set(r, col, s.amplitudes()[r]);
        }
    }
    BasisTransform::new(mat, tol)
}

/// One verified input-output relation of a classifier.
#[derive(Debug, Clone)]
pub struct IoRelation {
    pub index: usize,
    pub input: DensityMatrix,
    pub target: DensityMatrix,
    pub achieved: DensityMatrix,
    /// Trace distance between target and achieved outputs.
    pub residual: f64,
}

impl IoRelation {
    pub fn output_purity(&self) -> f64 {
        self.achieved.purity()
    }

    /// Full JSON view with the input, target, and achieved operators
    /// embedded in the matrix wire format.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "index": self.index,
            "input": MatrixJson::from_matrix(self.input.matrix()),
            "target": MatrixJson::from_matrix(self.target.matrix()),
            "achieved": MatrixJson::from_matrix(self.achieved.matrix()),
            "residual": self.residual,
            "output_purity": self.output_purity(),
        })
    }
}

/// Serializable summary row for relation tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IoRelationRow {
    pub index: usize,
    pub residual: f64,
    pub output_purity: f64,
}

/// Classifier mapping `N²` bipartite input states to the operator basis of
/// their reduced states: an attractor on `A ⊗ A'` fixing every basis state,
/// concatenated with tracing out `A'`. The composite Choi has dimensions
/// `(N², N)`.
///
/// With a unitary `t_basis` (orthonormal patterns) the composite is exactly
/// CPTP; a raw invertible transform is accepted and its trace-preservation
/// deviation reported, consistent with the attractor construction.
pub fn build_traced_attractor(
    basis: &[PureState],
    b: &CorrelationMatrix,
    t_basis: &BasisTransform,
    tol: &Tolerances,
) -> Result<(ChoiCandidate, CptpReport, Vec<IoRelation>), Error> {
    if basis.is_empty() {
        return Err(Error::EmptyList);
    }
    let total = basis[0].dim();
    // Input side lives on A ⊗ A' with equal factors.
    let n = (total as f64).sqrt().round() as usize;
    if n * n != total {
        return Err(Error::InvalidParameter(format!(
            "bipartite states must live on a square-dimension space, got {total}"
        )));
    }
    if basis.len() != total || b.dim() != total || t_basis.dim() != total {
        return Err(Error::dim("build_traced_attractor", total, basis.len()));
    }
    // The patterns must be linearly independent as vectors.
    let stacked: Vec<ComplexMatrix> = basis
        .iter()
        .map(|s| ComplexMatrix::new(1, total, s.amplitudes().to_vec()))
        .collect();
    let rank = operator_rank(&stacked, 1e-10)?;
    if rank != total {
        return Err(Error::RankDeficient {
            rank,
            expected: total,
            retries: 0,
        });
    }

    let (attractor, _attractor_report) = build_general(b, t_basis, tol)?;

    // Composite Choi: route each matrix unit on A ⊗ A' through the attractor
    // and trace out the ancilla.
    let in_dims = BipartiteDims::square(n);
    let dims = BipartiteDims::new(total, n);
    let mut mat = ComplexMatrix::zeros(dims.total(), dims.total());
    for i in 0..total {
        for j in 0..total {
            let unit = ComplexMatrix::matrix_unit(total, i, j);
            let fixed = attractor.apply_raw(&unit)?;
            let image = partial_trace(&fixed, in_dims, Subsystem::B)?;
            for k in 0..n {
                for l in 0..n {
                    mat.set(dims.index(i, k), dims.index(j, l), image.get(k, l));
                }
            }
        }
    }
    let cand = ChoiCandidate::new(dims, mat)?;
    let report = cand.verify(tol);

    // Verify every prescribed relation.
    let mut relations = Vec::with_capacity(total);
    for (index, psi) in basis.iter().enumerate() {
        let input = DensityMatrix::from_pure(psi);
        let target_mat = partial_trace(&psi.projector(), in_dims, Subsystem::B)?;
        let target = DensityMatrix::from_matrix_clipping(target_mat, tol)?;
        let achieved_mat = cand.apply_raw(input.matrix())?;
        let achieved = DensityMatrix::from_matrix_clipping(achieved_mat, tol)?;
        let residual = trace_distance(&target, &achieved)?;
        relations.push(IoRelation {
            index,
            input,
            target,
            achieved,
            residual,
        });
    }
    Ok((cand, report, relations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CptpVerdict;
    use crate::linalg::haar_unitary;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_x(v: f64) -> ComplexMatrix {
        ComplexMatrix::from_real(1, 1, &[v])
    }

    #[test]
    fn zero_coupling_gives_classical_readout() {
        let spec = PerceptronSpec::new(3, 2, ComplexMatrix::zeros(2, 1), &tol()).unwrap();
        let e = build_perceptron_canonical(&spec);
        assert!(e.verify(&tol()).is_cptp());
        for mu in 0..3 {
            let rho = DensityMatrix::from_pure(&PureState::basis(3, mu));
            let (label, confidence) = classify_canonical(e.as_candidate(), &rho).unwrap();
            assert_eq!(label, spec.label_of(mu));
            assert!((confidence - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_scales_input_coherence() {
        let spec = PerceptronSpec::new(2, 1, scalar_x(0.8), &tol()).unwrap();
        let e = build_perceptron_canonical(&spec);
        let report = e.verify(&tol());
        assert!(report.is_cptp());
        assert!(report.min_eigenvalue >= -1e-10);

        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(
            &PureState::new(vec![c(amp, 0.0), c(amp, 0.0)], &tol()).unwrap(),
        );
        // Direct 4×4 contraction oracle: output ⟨0|·|1⟩ entry is 0.8 · ρ01.
        let out = e.apply(&plus, &tol()).unwrap();
        assert!((out.entry(0, 1).re - 0.8 * 0.5).abs() < 1e-12);
        assert!((out.entry(0, 0).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oversized_coupling_rejected() {
        let err = PerceptronSpec::new(2, 1, scalar_x(1.2), &tol());
        assert!(matches!(err, Err(Error::CouplingTooLarge { .. })));
    }

    #[test]
    fn cp_boundary_at_unit_singular_value() {
        // min eigenvalue flips sign as σ_max(X) crosses 1.
        let below = perceptron_choi_candidate(2, 1, &scalar_x(0.999)).unwrap();
        let above = perceptron_choi_candidate(2, 1, &scalar_x(1.001)).unwrap();
        let r_below = below.verify(&tol());
        let r_above = above.verify(&tol());
        // The decoupled sectors contribute exact zero eigenvalues, so "CP
        // holds" means min eig ≥ 0 up to rounding; crossing σ_max = 1 makes
        // it strictly negative.
        assert!(r_below.min_eigenvalue >= -1e-12);
        assert!(r_above.min_eigenvalue < -1e-4);
        // TP holds on both sides of the boundary.
        assert!(r_below.tp_deviation < 1e-12);
        assert!(r_above.tp_deviation < 1e-12);
    }

    #[test]
    fn tie_breaks_toward_label_zero() {
        let spec = PerceptronSpec::new(2, 1, scalar_x(0.0), &tol()).unwrap();
        let e = build_perceptron_canonical(&spec);
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::from_pure(
            &PureState::new(vec![c(amp, 0.0), c(amp, 0.0)], &tol()).unwrap(),
        );
        let (label, confidence) = classify_canonical(e.as_candidate(), &plus).unwrap();
        assert_eq!(label, 0);
        assert!((confidence - 0.5).abs() < 1e-12);
    }

    #[test]
    fn classification_is_linear_in_mixtures() {
        let spec = PerceptronSpec::new(2, 1, scalar_x(0.5), &tol()).unwrap();
        let e = build_perceptron_canonical(&spec);
        let mix = DensityMatrix::new(
            ComplexMatrix::from_real(2, 2, &[0.1, 0.0, 0.0, 0.9]),
            &tol(),
        )
        .unwrap();
        let (label, confidence) = classify_canonical(e.as_candidate(), &mix).unwrap();
        assert_eq!(label, 1);
        assert!((confidence - 0.9).abs() < 1e-12);
    }

    #[test]
    fn general_perceptron_with_unitary_transforms() {
        let mut stream = SeedStream::new(31, 0);
        let spec = PerceptronSpec::new(3, 1, ComplexMatrix::zeros(1, 2), &tol()).unwrap();
        let t_a = BasisTransform::new(haar_unitary(3, &mut stream), &tol()).unwrap();
        let t_b = BasisTransform::new(haar_unitary(2, &mut stream), &tol()).unwrap();
        let (cand, report) = build_perceptron_general(&spec, &t_a, &t_b, &tol()).unwrap();
        assert_eq!(report.verdict, CptpVerdict::Cptp);
        // Rotated patterns classify onto rotated outputs exactly.
        for mu in 0..3 {
            let pattern = t_a.pattern(mu).unwrap();
            let rho = DensityMatrix::from_pure(&pattern);
            let k = spec.label_of(mu) as usize;
            let target = DensityMatrix::from_pure(&t_b.pattern(k).unwrap());
            let image = cand.apply_raw(rho.matrix()).unwrap();
            let dev = image.sub(target.matrix()).frobenius_norm();
            assert!(dev < 1e-10, "pattern {mu} image deviation {dev:.3e}");
        }
    }

    #[test]
    fn general_perceptron_identity_reduces_to_canonical() {
        let spec = PerceptronSpec::new(2, 1, scalar_x(0.3), &tol()).unwrap();
        let (cand, report) = build_perceptron_general(
            &spec,
            &BasisTransform::identity(2),
            &BasisTransform::identity(2),
            &tol(),
        )
        .unwrap();
        assert!(report.is_cptp());
        let canonical = build_perceptron_canonical(&spec);
        assert!(cand.matrix().sub(canonical.matrix()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn general_perceptron_non_unitary_input_breaks_tp() {
        let spec = PerceptronSpec::new(2, 1, scalar_x(0.0), &tol()).unwrap();
        let shear = BasisTransform::new(
            ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]),
            &tol(),
        )
        .unwrap();
        let (_cand, report) =
            build_perceptron_general(&spec, &shear, &BasisTransform::identity(2), &tol()).unwrap();
        assert!(report.tp_deviation > 1e-3);
    }

    #[test]
    fn random_bipartite_basis_has_full_rank() {
        let mut stream = SeedStream::new(41, 0);
        for trial in 0..20 {
            let basis = random_bipartite_operator_basis(2, &mut stream, 3, 1e-8).unwrap();
            assert_eq!(basis.len(), 4);
            let rank = reduced_operator_rank(&basis, 2, 1e-8).unwrap();
            assert_eq!(rank, 4, "trial {trial}");
        }
    }

    #[test]
    fn duplicated_state_drops_rank() {
        let mut stream = SeedStream::new(43, 0);
        let mut basis = random_bipartite_operator_basis(2, &mut stream, 3, 1e-8).unwrap();
        basis[3] = basis[2].clone();
        let rank = reduced_operator_rank(&basis, 2, 1e-8).unwrap();
        assert_eq!(rank, 3);
    }

    #[test]
    fn product_basis_reductions_are_pure_and_full_rank() {
        let mut stream = SeedStream::new(47, 0);
        let basis = product_vector_basis(2, &mut stream);
        assert_eq!(basis.len(), 4);
        assert_eq!(reduced_operator_rank(&basis, 2, 1e-8).unwrap(), 4);
        let dims = BipartiteDims::square(2);
        for s in &basis {
            let reduced = partial_trace(&s.projector(), dims, Subsystem::B).unwrap();
            let purity = reduced.matmul(&reduced).trace().re;
            assert!((purity - 1.0).abs() < 1e-10, "purity {purity}");
        }
        // Determinism under a fixed stream.
        let again = product_vector_basis(2, &mut SeedStream::new(47, 0));
        assert_eq!(basis[0].amplitudes(), again[0].amplitudes());
    }

    #[test]
    fn traced_attractor_reproduces_relations() {
        let mut stream = SeedStream::new(53, 0);
        let t = tol();
        let (basis, transform) = orthonormal_bipartite_basis(2, &mut stream, &t).unwrap();
        let b = CorrelationMatrix::random(4, 4, &mut stream).unwrap();
        let (cand, report, relations) =
            build_traced_attractor(&basis, &b, &transform, &t).unwrap();
        assert_eq!(report.verdict, CptpVerdict::Cptp, "tp={}", report.tp_deviation);
        assert_eq!(cand.dims(), BipartiteDims::new(4, 2));
        assert_eq!(relations.len(), 4);
        for rel in &relations {
            assert!(rel.residual < 1e-10, "relation {} residual {:.3e}", rel.index, rel.residual);
        }
        // The achieved outputs span the full operator space.
        let outputs: Vec<ComplexMatrix> =
            relations.iter().map(|r| r.achieved.matrix().clone()).collect();
        assert_eq!(operator_rank(&outputs, 1e-8).unwrap(), 4);
    }

    #[test]
    fn traced_attractor_matches_sequential_oracle() {
        let mut stream = SeedStream::new(59, 0);
        let t = tol();
        let (basis, transform) = orthonormal_bipartite_basis(2, &mut stream, &t).unwrap();
        let b = CorrelationMatrix::random(4, 4, &mut stream).unwrap();
        let (cand, _, _) = build_traced_attractor(&basis, &b, &transform, &t).unwrap();
        let (attractor, _) = build_general(&b, &transform, &t).unwrap();
        // Composite action equals attractor-then-partial-trace on random input.
        let probe = random_pure_state(4, &mut stream);
        let input = probe.projector();
        let via_composite = cand.apply_raw(&input).unwrap();
        let via_sequence = partial_trace(
            &attractor.apply_raw(&input).unwrap(),
            BipartiteDims::square(2),
            Subsystem::B,
        )
        .unwrap();
        assert!(via_composite.sub(&via_sequence).frobenius_norm() < 1e-10);
    }

    #[test]
    fn traced_attractor_on_product_basis_outputs_pure_projectors() {
        // Raw (non-unitary) transform from product states: the prescribed
        // relations still hold exactly, and every output is the pure
        // projector onto the left factor.
        let t = tol();
        let mut stream = SeedStream::new(67, 0);
        let basis = product_vector_basis(2, &mut stream);
        let transform = basis_transform_from_states(&basis, &t).unwrap();
        let b = CorrelationMatrix::random(4, 4, &mut stream).unwrap();
        let (_cand, _report, relations) =
            build_traced_attractor(&basis, &b, &transform, &t).unwrap();
        for rel in &relations {
            assert!(rel.residual < 1e-10, "relation {}: {:.3e}", rel.index, rel.residual);
            assert!((rel.output_purity() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn traced_attractor_on_maximally_entangled_gives_maximally_mixed() {
        let t = tol();
        let mut stream = SeedStream::new(61, 0);
        // Build an orthonormal basis containing |Ω⟩/√2 as its first column.
        let n = 2;
        let mut amps = vec![ZERO; 4];
        amps[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let omega = PureState::new(amps, &t).unwrap();
        // Complete to an orthonormal basis by Gram–Schmidt against random states.
        let mut columns = vec![omega.amplitudes().to_vec()];
        while columns.len() < 4 {
            let candidate = random_pure_state(4, &mut stream);
            let mut v = candidate.amplitudes().to_vec();
            for col in &columns {
                let overlap: Complex64 =
                    col.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi -= overlap * ci;
                }
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                columns.push(v.iter().map(|z| z.scale(1.0 / norm)).collect());
            }
        }
        let basis: Vec<PureState> = columns
            .iter()
            .map(|col| PureState::from_unnormalized(col.clone()).unwrap())
            .collect();
        let transform = basis_transform_from_states(&basis, &t).unwrap();
        assert!(transform.is_unitary());
        let b = CorrelationMatrix::random(4, 4, &mut stream).unwrap();
        let (_, _, relations) = build_traced_attractor(&basis, &b, &transform, &t).unwrap();
        let expect = DensityMatrix::maximally_mixed(n);
        let dev = relations[0]
            .achieved
            .matrix()
            .sub(expect.matrix())
            .frobenius_norm();
        assert!(dev < 1e-10);
    }
}
