//! Lanczos propagation e^{−iHτ}ψ for static Hermitian H.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::sparse::SparseOp;

/// Krylov dimension per substep.
const M: usize = 30;
/// Substep bound τ‖H‖ ≤ 10 keeps the Lanczos error near 1e-11 for M = 30.
const TAU_NORM: f64 = 10.0;

/// ψ ← e^{−iHt} ψ.
pub fn expmv(h: &SparseOp, psi: &mut DVector<Complex64>, t: f64) {
    if t == 0.0 || h.nnz() == 0 {
        return;
    }
    let norm = h.norm_inf().max(1e-300);
    let substeps = ((t.abs() * norm / TAU_NORM).ceil() as usize).max(1);
    let dt = t / substeps as f64;
    for _ in 0..substeps {
        lanczos_step(h, psi, dt);
    }
}

fn lanczos_step(h: &SparseOp, psi: &mut DVector<Complex64>, dt: f64) {
    let beta0 = psi.norm();
    if beta0 == 0.0 {
        return;
    }
    let m = M.min(h.dim);
    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    basis.push(psi.unscale(beta0));
    let mut w = DVector::zeros(h.dim);
    for j in 0..m {
        h.apply(basis[j].as_slice(), w.as_mut_slice());
        let a = basis[j].dotc(&w).re;
        alpha.push(a);
        w.axpy(Complex64::new(-a, 0.0), &basis[j], Complex64::new(1.0, 0.0));
        if j > 0 {
            w.axpy(Complex64::new(-beta[j - 1], 0.0), &basis[j - 1], Complex64::new(1.0, 0.0));
        }
        // full reorthogonalization keeps the small basis clean
        for v in &basis {
            let c = v.dotc(&w);
            w.axpy(-c, v, Complex64::new(1.0, 0.0));
        }
        let b = w.norm();
        if j + 1 == m || b < 1e-13 * (a.abs() + beta.last().copied().unwrap_or(0.0)).max(1e-300) {
            break;
        }
        beta.push(b);
        basis.push(w.unscale(b));
    }
    let k = alpha.len();
    let tri = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r.abs_diff(c) == 1 {
            beta[r.min(c)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(tri);
    // coefficients e^{−iTdt} e_1
    let mut coef = vec![Complex64::new(0.0, 0.0); k];
    for (q, &lam) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::new(0.0, -lam * dt).exp() * eig.eigenvectors[(0, q)];
        for (r, c) in coef.iter_mut().enumerate() {
            *c += eig.eigenvectors[(r, q)] * phase;
        }
    }
    psi.fill(Complex64::new(0.0, 0.0));
    for (v, c) in basis.iter().zip(coef) {
        psi.axpy(c * beta0, v, Complex64::new(1.0, 0.0));
    }
}
