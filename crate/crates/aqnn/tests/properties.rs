//! Property tests over randomly generated matrices and states.

use aqnn::linalg::{
    eig_hermitian, partial_trace, purify, tensor_product, trace_distance, BipartiteDims,
    Complex64, ComplexMatrix, DensityMatrix, Subsystem, Tolerances,
};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Strategy: complex matrix with entries in [-1, 1]².
fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(
        move |pairs| {
            ComplexMatrix::new(
                rows,
                cols,
                pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
            )
        },
    )
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, n).prop_map(|m| m.hermitize())
}

fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    matrix(n, n).prop_map(|g| {
        // GG† + εI is positive definite; normalize the trace.
        let w = g
            .matmul(&g.adjoint())
            .add(&ComplexMatrix::identity(g.rows).scale_re(1e-3));
        let tr = w.trace().re;
        DensityMatrix::new(w.scale_re(1.0 / tr), &tol()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_undoes_tensor_product(
        rho in hermitian(3),
        sigma in hermitian(2),
    ) {
        let prod = tensor_product(&rho, &sigma);
        let back = partial_trace(&prod, BipartiteDims::new(3, 2), Subsystem::B).unwrap();
        let expect = rho.scale(sigma.trace());
        prop_assert!(back.sub(&expect).frobenius_norm() <= 1e-10);
        // Trace is preserved by the partial trace.
        let full = partial_trace(&prod, BipartiteDims::new(3, 2), Subsystem::A).unwrap();
        prop_assert!((full.trace() - prod.trace()).norm() <= 1e-10);
    }

    #[test]
    fn eigendecomposition_reconstructs(m in hermitian(5)) {
        let eig = eig_hermitian(&m, 1e-9).unwrap();
        let residual = eig.reconstruct().sub(&m).frobenius_norm();
        prop_assert!(residual <= 1e-10 * m.frobenius_norm().max(1.0));
        // Eigenvalues come out ascending.
        for w in eig.values.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn trace_distance_is_a_metric(
        a in density(3),
        b in density(3),
        c in density(3),
    ) {
        let ab = trace_distance(&a, &b).unwrap();
        let ba = trace_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(trace_distance(&a, &a).unwrap() <= 1e-13);
    }

    #[test]
    fn purification_reduces_back(rho in density(3)) {
        let psi = purify(&rho, &ComplexMatrix::identity(3), &tol()).unwrap();
        let reduced = partial_trace(
            &psi.projector(),
            BipartiteDims::square(3),
            Subsystem::B,
        )
        .unwrap();
        prop_assert!(reduced.sub(rho.matrix()).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn canonical_channel_from_any_density_shape(b_seed in matrix(4, 4)) {
        // Normalized Gram of the rows is always a valid coefficient matrix;
        // the resulting channel is always CPTP.
        let w = b_seed
            .matmul(&b_seed.adjoint())
            .add(&ComplexMatrix::identity(4).scale_re(1e-6));
        let mut mat = ComplexMatrix::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                let denom = (w.get(r, r).re * w.get(c, c).re).sqrt();
                mat.set(r, c, w.get(r, c).scale(1.0 / denom));
            }
        }
        for i in 0..4 {
            mat.set(i, i, Complex64::new(1.0, 0.0));
        }
        let b = aqnn::attractor::CorrelationMatrix::new(mat, &tol()).unwrap();
        let choi = aqnn::attractor::build_canonical(&b);
        prop_assert!(choi.verify(&tol()).is_cptp());
    }
}
