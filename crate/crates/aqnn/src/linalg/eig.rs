//! Eigensolvers and related dense factorizations.
//!
//! Everything here is self-contained double-precision code, sized for the
//! matrices this crate actually handles (a few hundred rows at most):
//!
//! * complex Hermitian eigendecomposition by cyclic Jacobi rotations,
//! * general complex eigenvalues by Householder Hessenberg reduction plus
//!   shifted QR iteration with Givens rotations,
//! * singular values through the Hermitian embedding `[[0, A], [A†, 0]]`,
//!   which avoids the precision loss of forming `A†A`,
//! * matrix inversion by Gauss–Jordan elimination with partial pivoting.

use super::matrix::{Complex64, ComplexMatrix};
use crate::error::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Result of a Hermitian eigendecomposition, `M = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn min_eigenvalue(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V diag(values) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_eigenvalues(|x| x)
    }

    /// `V diag(f(values)) V†` — used for matrix square roots and similar.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let fk = f(self.values[k]);
            if fk == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = v.get(r, k);
                for c in 0..n {
                    let inc = vr * v.get(c, k).conj() * fk;
                    let cur = out.get(r, c);
                    out.set(r, c, cur + inc);
                }
            }
        }
        out
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.values.len()).map(|r| self.vectors.get(r, k)).collect()
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi.
///
/// The input may deviate from exact hermiticity by up to `herm_tol`; the
/// decomposition is computed on the Hermitian part.
pub fn eig_hermitian(m: &ComplexMatrix, herm_tol: f64) -> Result<HermitianEig, Error> {
    if !m.is_square() {
        return Err(Error::dim("eig_hermitian", m.rows, m.cols));
    }
    m.check_finite("eig_hermitian")?;
    let dev = m.hermiticity_deviation();
    if dev > herm_tol {
        return Err(Error::NotHermitian {
            deviation: dev,
            tolerance: herm_tol,
        });
    }

    let n = m.rows;
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(n);

    let fro = a.frobenius_norm();
    if fro == 0.0 || n == 1 {
        let values = (0..n).map(|i| a.get(i, i).re).collect();
        return Ok(HermitianEig { values, vectors: v });
    }
    let target = 1e-14 * fro;

    let max_sweeps = 60;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut off_sq = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a.get(p, q).norm_sqr();
            }
        }
        if (2.0 * off_sq).sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        // One final check; quadratic convergence normally gets here long before.
        let mut off_sq = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a.get(p, q).norm_sqr();
            }
        }
        if (2.0 * off_sq).sqrt() > 1e-10 * fro {
            return Err(Error::NoConvergence { sweeps: max_sweeps });
        }
    }

    // Stable ascending sort keeps already-diagonal inputs in input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, new_col, v.get(r, old_col));
        }
    }
    Ok(HermitianEig { values, vectors })
}

/// One Jacobi rotation zeroing `a[p][q]`, accumulated into `v`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a.get(p, q);
    let g_abs = g.norm();
    if g_abs < 1e-300 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let u = g / g_abs; // phase of the off-diagonal entry

    // tan of the rotation angle; smaller-magnitude root of t² − 2τt − 1 = 0
    // with τ = (aqq − app) / (2|g|), keeping |θ| ≤ π/4.
    let tau = (aqq - app) / (2.0 * g_abs);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = a.rows;
    let su = Complex64::new(s, 0.0) * u;
    let su_conj = Complex64::new(s, 0.0) * u.conj();

    // Column update A ← A·U with U = [[c, −s·u], [s·ū, c]] on columns (p, q).
    for r in 0..n {
        let arp = a.get(r, p);
        let arq = a.get(r, q);
        a.set(r, p, arp.scale(c) + arq * su_conj);
        a.set(r, q, arq.scale(c) - arp * su);
    }
    // Row update A ← U†·A on rows (p, q).
    for col in 0..n {
        let apc = a.get(p, col);
        let aqc = a.get(q, col);
        a.set(p, col, apc.scale(c) + aqc * su);
        a.set(q, col, aqc.scale(c) - apc * su_conj);
    }
    // Clean the rotated pair: the (p,q) entry is now zero by construction
    // and the diagonal stays real.
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    let dpp = a.get(p, p).re;
    let dqq = a.get(q, q).re;
    a.set(p, p, Complex64::new(dpp, 0.0));
    a.set(q, q, Complex64::new(dqq, 0.0));

    // Accumulate V ← V·U.
    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp.scale(c) + vrq * su_conj);
        v.set(r, q, vrq.scale(c) - vrp * su);
    }
}

/// Eigenvalues of a general complex square matrix, sorted by real part then
/// imaginary part. Hessenberg reduction followed by shifted QR iteration;
/// eigenvectors are not computed.
pub fn eig_general(m: &ComplexMatrix) -> Result<Vec<Complex64>, Error> {
    if !m.is_square() {
        return Err(Error::dim("eig_general", m.rows, m.cols));
    }
    m.check_finite("eig_general")?;
    let n = m.rows;
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![m.get(0, 0)]);
    }

    let mut h = hessenberg(m);
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    let mut eigs = vec![ZERO; n];
    let mut hi = n - 1;
    let mut stall = 0usize;
    let mut total_steps = 0usize;
    let max_total = 60 * n;

    loop {
        // Deflate converged trailing eigenvalues.
        loop {
            if hi == 0 {
                eigs[0] = h.get(0, 0);
                return Ok(sorted(eigs));
            }
            let sub = h.get(hi, hi - 1).norm();
            let local = h.get(hi - 1, hi - 1).norm() + h.get(hi, hi).norm();
            if sub <= eps * (local + scale) {
                h.set(hi, hi - 1, ZERO);
                eigs[hi] = h.get(hi, hi);
                hi -= 1;
                stall = 0;
            } else {
                break;
            }
        }

        // Active block [lo, hi]: walk up to the first negligible subdiagonal.
        let mut lo = hi;
        while lo > 0 {
            let sub = h.get(lo, lo - 1).norm();
            let local = h.get(lo - 1, lo - 1).norm() + h.get(lo, lo).norm();
            if sub <= eps * (local + scale) {
                h.set(lo, lo - 1, ZERO);
                break;
            }
            lo -= 1;
        }

        if hi - lo == 1 {
            // Solve the 2×2 block exactly and deflate both eigenvalues.
            let (l1, l2) = eig_2x2(
                h.get(lo, lo),
                h.get(lo, hi),
                h.get(hi, lo),
                h.get(hi, hi),
            );
            eigs[hi] = l1;
            eigs[lo] = l2;
            if lo == 0 {
                return Ok(sorted(eigs));
            }
            h.set(hi, lo, ZERO);
            hi = lo - 1;
            stall = 0;
            continue;
        }

        total_steps += 1;
        stall += 1;
        if total_steps > max_total {
            return Err(Error::NoConvergence { sweeps: total_steps });
        }

        // Wilkinson shift from the trailing 2×2, with an exceptional shift
        // when the iteration stalls.
        let mu = if stall.is_multiple_of(25) {
            let base = h.get(hi, hi - 1).norm() + if hi >= 2 { h.get(hi - 1, hi - 2).norm() } else { 0.0 };
            h.get(hi, hi) + Complex64::new(0.75 * base, 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };

        qr_step(&mut h, lo, hi, mu);
    }
}

fn sorted(mut eigs: Vec<Complex64>) -> Vec<Complex64> {
    eigs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    eigs
}

/// Eigenvalues of `[[a, b], [c, d]]` with the one closer to `d` first.
fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d).scale(0.5);
    let diff = (a - d).scale(0.5);
    let disc = (diff * diff + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        (l1, l2)
    } else {
        (l2, l1)
    }
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let (l1, _) = eig_2x2(
        h.get(hi - 1, hi - 1),
        h.get(hi - 1, hi),
        h.get(hi, hi - 1),
        h.get(hi, hi),
    );
    l1
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows;
    let mut h = m.clone();
    if n < 3 {
        return h;
    }
    let mut v = vec![ZERO; n];
    for k in 0..n - 2 {
        let mut norm_sq = 0.0f64;
        for i in k + 1..n {
            norm_sq += h.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm < 1e-300 {
            continue;
        }
        let x0 = h.get(k + 1, k);
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase.scale(norm);
        // Reflector v = x − α e₁ over rows k+1..n.
        let mut vnorm_sq = 0.0f64;
        for i in k + 1..n {
            let vi = if i == k + 1 { x0 - alpha } else { h.get(i, k) };
            v[i] = vi;
            vnorm_sq += vi.norm_sqr();
        }
        if vnorm_sq < 1e-300 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // Left: H ← (I − β v v†) H on rows k+1..n.
        for j in k..n {
            let mut w = ZERO;
            for i in k + 1..n {
                w += v[i].conj() * h.get(i, j);
            }
            w = w.scale(beta);
            for i in k + 1..n {
                let cur = h.get(i, j);
                h.set(i, j, cur - v[i] * w);
            }
        }
        // Right: H ← H (I − β v v†) on columns k+1..n.
        for r in 0..n {
            let mut w = ZERO;
            for i in k + 1..n {
                w += h.get(r, i) * v[i];
            }
            w = w.scale(beta);
            for i in k + 1..n {
                let cur = h.get(r, i);
                h.set(r, i, cur - w * v[i].conj());
            }
        }
        // Enforce the exact zero pattern below the subdiagonal.
        h.set(k + 1, k, alpha);
        for i in k + 2..n {
            h.set(i, k, ZERO);
        }
    }
    h
}

/// One explicit shifted QR step on the Hessenberg block `[lo, hi]`.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        let cur = h.get(i, i);
        h.set(i, i, cur - mu);
    }

    // Left Givens sweep producing R.
    let mut rotations = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let f = h.get(i, i);
        let g = h.get(i + 1, i);
        let (c, s, r) = givens(f, g);
        rotations.push((c, s));
        h.set(i, i, r);
        h.set(i + 1, i, ZERO);
        for j in i + 1..=hi {
            let a = h.get(i, j);
            let b = h.get(i + 1, j);
            h.set(i, j, a.scale(c) + s * b);
            h.set(i + 1, j, b.scale(c) - s.conj() * a);
        }
    }

    // Right multiplication by the adjoint rotations: H ← R·Q.
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let i = lo + idx;
        for r in lo..=(i + 1).min(hi) {
            let a = h.get(r, i);
            let b = h.get(r, i + 1);
            h.set(r, i, a.scale(c) + s.conj() * b);
            h.set(r, i + 1, b.scale(c) - s * a);
        }
    }

    for i in lo..=hi {
        let cur = h.get(i, i);
        h.set(i, i, cur + mu);
    }
}

/// Complex Givens rotation: `[[c, s], [−s̄, c]] · [f, g]ᵀ = [r, 0]ᵀ` with real `c`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, ZERO, f);
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga, Complex64::new(ga, 0.0));
    }
    let d = (fa * fa + ga * ga).sqrt();
    let c = fa / d;
    let fs = f / fa;
    let s = fs * g.conj().scale(1.0 / d);
    let r = fs.scale(d);
    (c, s, r)
}

/// Singular values of an arbitrary complex matrix, descending.
///
/// Computed from the Hermitian embedding `[[0, A], [A†, 0]]`, whose spectrum
/// is `{±σᵢ} ∪ {0}`; this keeps small singular values at full precision.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>, Error> {
    m.check_finite("singular_values")?;
    let (rows, cols) = (m.rows, m.cols);
    let n = rows + cols;
    let mut emb = ComplexMatrix::zeros(n, n);
    for r in 0..rows {
        for c in 0..cols {
            emb.set(r, rows + c, m.get(r, c));
            emb.set(rows + c, r, m.get(r, c).conj());
        }
    }
    let eig = eig_hermitian(&emb, 0.0)?;
    let k = rows.min(cols);
    let mut sv: Vec<f64> = eig.values[n - k..].iter().map(|&x| x.max(0.0)).collect();
    sv.reverse();
    Ok(sv)
}

/// Matrix inverse by Gauss–Jordan elimination with partial pivoting.
pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix, Error> {
    if !m.is_square() {
        return Err(Error::dim("invert", m.rows, m.cols));
    }
    m.check_finite("invert")?;
    let n = m.rows;
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for col in 0..n {
        // Partial pivot.
        let mut pivot_row = col;
        let mut pivot_abs = a.get(col, col).norm();
        for r in col + 1..n {
            let v = a.get(r, col).norm();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs < 1e-14 * scale {
            return Err(Error::Singular {
                min_singular: pivot_abs,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = a.get(col, j);
                a.set(col, j, a.get(pivot_row, j));
                a.set(pivot_row, j, tmp);
                let tmp = inv.get(col, j);
                inv.set(col, j, inv.get(pivot_row, j));
                inv.set(pivot_row, j, tmp);
            }
        }
        let pivot = a.get(col, col);
        for j in 0..n {
            let av = a.get(col, j) / pivot;
            a.set(col, j, av);
            let iv = inv.get(col, j) / pivot;
            inv.set(col, j, iv);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a.get(r, col);
            if factor == ZERO {
                continue;
            }
            for j in 0..n {
                let av = a.get(r, j) - factor * a.get(col, j);
                a.set(r, j, av);
                let iv = inv.get(r, j) - factor * inv.get(col, j);
                inv.set(r, j, iv);
            }
        }
    }
    Ok(inv)
}
