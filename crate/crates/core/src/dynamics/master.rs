//! Lindblad master equation with correlated channels.
//!
//! D[ρ] = Σ_ij γ^(ij) (c_j ρ c_i† − ½{c_i† c_j, ρ}).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ode::{dopri5, OdeOptions, OdeStats};
use super::sparse::SparseOp;
use crate::error::{invalid, Error, Result};

/// Default relative clipping tolerance for rate-matrix eigenvalues.
pub const TOL_PSD: f64 = 1e-10;

/// A rate matrix over an operator family.
#[derive(Clone, Debug)]
pub struct Channel {
    pub name: String,
    pub rates: DMatrix<Complex64>,
    pub ops: Vec<SparseOp>,
}

impl Channel {
    /// Independent channels: one operator per rate.
    pub fn local(name: &str, rates: &[f64], ops: Vec<SparseOp>) -> Self {
        let d = DVector::from_iterator(rates.len(), rates.iter().map(|&r| Complex64::new(r, 0.0)));
        Self { name: name.into(), rates: DMatrix::from_diagonal(&d), ops }
    }
}

#[derive(Clone, Debug)]
pub struct OpenSystemModel {
    pub h: SparseOp,
    pub channels: Vec<Channel>,
}

/// Jump operators L_k = Σ_j U*_jk c_j with rates λ_k ≥ 0.
#[derive(Clone, Debug)]
pub struct JumpSet {
    pub rates: Vec<f64>,
    pub ops: Vec<SparseOp>,
}

/// Eigen-decomposes a Hermitian rate matrix: γ = U diag(λ) U†.
///
/// Eigenvalues above −tol·max λ are clipped to zero; anything more negative
/// is an invalid (non-positive) channel.
pub fn diagonalize_rate_matrix(gamma: &DMatrix<Complex64>, tol: f64) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    if !gamma.is_square() {
        return Err(invalid("rate matrix", "must be square"));
    }
    let defect = (gamma - gamma.adjoint()).norm();
    if defect > 1e-12 * gamma.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(defect));
    }
    let eig = gamma.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lam = Vec::with_capacity(eig.eigenvalues.len());
    for &v in eig.eigenvalues.iter() {
        if v < -tol * max {
            return Err(Error::InvalidChannel { eigenvalue: v, tolerance: tol * max });
        }
        lam.push(v.max(0.0));
    }
    Ok((lam, eig.eigenvectors))
}

impl OpenSystemModel {
    pub fn dim(&self) -> usize {
        self.h.dim
    }

    /// All channels in a diagonal jump basis (zero-rate jumps dropped).
    pub fn jumps(&self) -> Result<JumpSet> {
        let mut rates = Vec::new();
        let mut ops = Vec::new();
        for ch in &self.channels {
            if ch.rates.nrows() != ch.ops.len() {
                return Err(Error::DimensionMismatch { expected: ch.ops.len(), got: ch.rates.nrows() });
            }
            let (lam, u) = diagonalize_rate_matrix(&ch.rates, TOL_PSD)?;
            for (k, &l) in lam.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let mut op = SparseOp::zeros(self.dim());
                for (j, c) in ch.ops.iter().enumerate() {
                    let w = u[(j, k)].conj();
                    if w.norm() > 1e-15 {
                        op = op.add(c, w);
                    }
                }
                rates.push(l);
                ops.push(op);
            }
        }
        Ok(JumpSet { rates, ops })
    }
}

impl JumpSet {
    /// H − (i/2) Σ λ_k L_k† L_k.
    pub fn effective_hamiltonian(&self, h: &SparseOp) -> SparseOp {
        let mut out = h.clone();
        for (l, op) in self.rates.iter().zip(&self.ops) {
            out = out.add(&op.adjoint().matmul(op), Complex64::new(0.0, -0.5 * l));
        }
        out
    }
}

/// out = op · m, column by column.
fn sp_mul_into(op: &SparseOp, m: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
    for j in 0..m.ncols() {
        op.apply(m.column(j).as_slice(), out.column_mut(j).as_mut_slice());
    }
}

/// out = m†.
fn adjoint_into(m: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out[(j, i)] = m[(i, j)].conj();
        }
    }
}

/// Per-grid-point diagnostics of a master-equation run.
#[derive(Clone, Debug, Default)]
pub struct MasterDiagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub stats: OdeStats,
}

/// Integrates the master equation; `observe(k, t, ρ)` at every grid point.
pub fn evolve_master_with<O>(
    model: &OpenSystemModel,
    rho0: &DMatrix<Complex64>,
    grid: &[f64],
    ode: &OdeOptions,
    mut observe: O,
) -> Result<MasterDiagnostics>
where
    O: FnMut(usize, f64, &DMatrix<Complex64>),
{
    let dim = model.dim();
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho0.nrows() });
    }
    if (rho0.trace().re - 1.0).abs() > 1e-10 || (rho0 - rho0.adjoint()).norm() > 1e-10 {
        return Err(invalid("rho0", "must be Hermitian with unit trace"));
    }
    let jumps = model.jumps()?;
    let hnh = jumps.effective_hamiltonian(&model.h);
    let mi = Complex64::new(0.0, -1.0);
    // ρ stays Hermitian, so ρ H† = (H ρ)† and L ρ L† = L (L ρ)†
    let mut rho = DMatrix::zeros(dim, dim);
    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DMatrix::zeros(dim, dim);
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        rho.as_mut_slice().copy_from_slice(y);
        sp_mul_into(&hnh, &rho, &mut a);
        for j in 0..dim {
            for i in 0..dim {
                dy[i + j * dim] = mi * a[(i, j)] - mi * a[(j, i)].conj();
            }
        }
        for (l, op) in jumps.rates.iter().zip(&jumps.ops) {
            sp_mul_into(op, &rho, &mut a);
            adjoint_into(&a, &mut b);
            sp_mul_into(op, &b, &mut a);
            for (d, v) in dy.iter_mut().zip(a.as_slice()) {
                *d += v * *l;
            }
        }
    };
    let mut diag = MasterDiagnostics { min_eigenvalue: f64::INFINITY, ..Default::default() };
    let mut buf = rho0.clone();
    diag.stats = dopri5(rhs, rho0.as_slice(), grid, ode, |k, t, y| {
        buf.as_mut_slice().copy_from_slice(y);
        diag.max_trace_drift = diag.max_trace_drift.max((buf.trace().re - 1.0).abs() + buf.trace().im.abs());
        let herm = (&buf - buf.adjoint()).norm();
        diag.max_hermiticity_defect = diag.max_hermiticity_defect.max(herm);
        let sym = (&buf + buf.adjoint()) * Complex64::new(0.5, 0.0);
        let min = sym.symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        diag.min_eigenvalue = diag.min_eigenvalue.min(min);
        observe(k, t, &buf);
    })?;
    Ok(diag)
}

/// Density matrices at every grid point.
pub fn evolve_master(
    model: &OpenSystemModel,
    rho0: &DMatrix<Complex64>,
    grid: &[f64],
    ode: &OdeOptions,
) -> Result<(Vec<DMatrix<Complex64>>, MasterDiagnostics)> {
    let mut out = Vec::with_capacity(grid.len());
    let d = evolve_master_with(model, rho0, grid, ode, |_, _, r| out.push(r.clone()))?;
    Ok((out, d))
}

/// |ψ⟩⟨ψ|.
pub fn pure_density(psi: &DVector<Complex64>) -> DMatrix<Complex64> {
    psi * psi.adjoint()
}
