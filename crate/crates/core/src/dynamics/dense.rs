//! Dense helpers for small logical spaces: Kronecker embedding and exact
//! exponentials of Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dense dimension handled by the exact-diagonalization helpers.
pub const DENSE_DIM_CAP: usize = 4096;

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// `op` (d×d) acting on `site` of `n_sites` d-level sites; site 0 is the least significant digit.
pub fn embed(op: &DMatrix<Complex64>, site: usize, n_sites: usize) -> DMatrix<Complex64> {
    let d = op.nrows();
    let dim = d.pow(n_sites as u32);
    let stride = d.pow(site as u32);
    let mut out = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let dc = (c / stride) % d;
        let base = c - dc * stride;
        for dr in 0..d {
            let v = op[(dr, dc)];
            if v != Complex64::new(0.0, 0.0) {
                out[(base + dr * stride, c)] = v;
            }
        }
    }
    out
}

pub fn check_dim(dim: usize) -> Result<()> {
    if dim > DENSE_DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DENSE_DIM_CAP });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and eigenvectors as columns.
pub fn eigh(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let e = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(h.nrows(), order.len(), |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Propagator for e^{−iHt} from a precomputed decomposition.
pub fn propagator_from(vals: &[f64], vecs: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let mut scaled = vecs.clone();
    for (k, &e) in vals.iter().enumerate() {
        let ph = Complex64::new(0.0, -e * t).exp();
        scaled.column_mut(k).apply(|x| *x *= ph);
    }
    scaled * vecs.adjoint()
}

/// e^{−iHt} for Hermitian H.
pub fn expm_hermitian(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let (vals, vecs) = eigh(h);
    propagator_from(&vals, &vecs, t)
}

/// max |U†U − 1|.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    (u.adjoint() * u - DMatrix::identity(u.nrows(), u.ncols())).camax()
}
