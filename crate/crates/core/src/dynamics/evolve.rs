//! Pure-state evolution under static or time-dependent Hamiltonians.

use nalgebra::DVector;
use num_complex::Complex64;

use super::hamiltonian::TdHamiltonian;
use super::krylov::expmv;
use super::ode::{dopri5, OdeOptions, OdeStats};
use super::sparse::SparseOp;
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug)]
pub enum Schedule<'a> {
    Static(&'a SparseOp),
    TimeDependent(&'a TdHamiltonian),
}

impl Schedule<'_> {
    pub fn dim(&self) -> usize {
        match self {
            Schedule::Static(h) => h.dim,
            Schedule::TimeDependent(h) => h.dim,
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] >= w[0])) || grid.iter().any(|t| !t.is_finite()) {
        return Err(invalid("time grid", "must be finite and non-decreasing"));
    }
    Ok(())
}

/// Calls `observe(k, t_k, ψ(t_k))` along the grid; ψ0 must be normalized.
pub fn evolve_unitary_with<O>(
    h: Schedule,
    psi0: &DVector<Complex64>,
    grid: &[f64],
    ode: &OdeOptions,
    mut observe: O,
) -> Result<OdeStats>
where
    O: FnMut(usize, f64, &DVector<Complex64>),
{
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(invalid("psi0", format!("state must be normalized (norm {})", psi0.norm())));
    }
    check_grid(grid)?;
    match h {
        Schedule::Static(op) => {
            let mut psi = psi0.clone();
            for (k, &t) in grid.iter().enumerate() {
                if k > 0 {
                    expmv(op, &mut psi, t - grid[k - 1]);
                }
                observe(k, t, &psi);
            }
            Ok(OdeStats::default())
        }
        Schedule::TimeDependent(td) => {
            let mi = Complex64::new(0.0, -1.0);
            let mut coef_t = f64::NAN;
            let mut coef = Vec::new();
            let mut buf = DVector::zeros(td.dim);
            dopri5(
                |t, y, dy| {
                    if t != coef_t {
                        coef = td.coefficients_at(t);
                        coef_t = t;
                    }
                    td.apply(&coef, y, dy);
                    dy.iter_mut().for_each(|v| *v *= mi);
                },
                psi0.as_slice(),
                grid,
                ode,
                |k, t, y| {
                    buf.as_mut_slice().copy_from_slice(y);
                    observe(k, t, &buf);
                },
            )
        }
    }
}

/// States at every grid point.
pub fn evolve_unitary(
    h: Schedule,
    psi0: &DVector<Complex64>,
    grid: &[f64],
    ode: &OdeOptions,
) -> Result<Vec<DVector<Complex64>>> {
    let mut out = Vec::with_capacity(grid.len());
    evolve_unitary_with(h, psi0, grid, ode, |_, _, psi| out.push(psi.clone()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::space::HilbertSpace;
    use crate::dynamics::sparse::OpSum;

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = SparseOp::zeros(4);
        let psi = DVector::from_element(4, Complex64::new(0.5, 0.0));
        let out = evolve_unitary(Schedule::Static(&h), &psi, &[0.0, 1.0, 2.0], &OdeOptions::default()).unwrap();
        assert!(out.iter().all(|s| (s - &psi).norm() == 0.0));
    }

    #[test]
    fn rabi_formula() {
        let space = HilbertSpace::spins(1).unwrap();
        let om = 1.7;
        let h = SparseOp::build(&space, &OpSum::pauli(0, 0).scale(Complex64::new(om / 2.0, 0.0)));
        let psi0 = DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let grid: Vec<f64> = (0..20).map(|k| 0.37 * k as f64).collect();
        let out = evolve_unitary(Schedule::Static(&h), &psi0, &grid, &OdeOptions::default()).unwrap();
        for (s, t) in out.iter().zip(&grid) {
            assert!((s[1].norm_sqr() - (om * t / 2.0).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unnormalized_state() {
        let h = SparseOp::zeros(2);
        let psi = DVector::from_element(2, Complex64::new(1.0, 0.0));
        assert!(evolve_unitary(Schedule::Static(&h), &psi, &[0.0], &OdeOptions::default()).is_err());
    }
}
