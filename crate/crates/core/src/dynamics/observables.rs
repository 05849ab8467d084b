//! Expectation values, fidelities, phonon numbers and CSV time series.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::space::HilbertSpace;
use super::sparse::SparseOp;
use crate::error::{Error, Result};

/// Product basis state: spin bits `spins` (site i ↔ bit i) and phonon occupations.
pub fn basis_state(space: &HilbertSpace, spins: usize, occ: &[u8]) -> Result<DVector<Complex64>> {
    let k = space
        .join(spins, occ)
        .ok_or_else(|| crate::error::invalid("occupations", "state lies outside the truncated space"))?;
    let mut v = DVector::zeros(space.dim());
    v[k] = Complex64::new(1.0, 0.0);
    Ok(v)
}

pub fn expectation(op: &SparseOp, psi: &DVector<Complex64>) -> Result<Complex64> {
    if op.dim != psi.len() {
        return Err(Error::DimensionMismatch { expected: op.dim, got: psi.len() });
    }
    Ok(op.expectation(psi))
}

/// tr(Aρ) for dense ρ.
pub fn expectation_dm(op: &SparseOp, rho: &DMatrix<Complex64>) -> Result<Complex64> {
    if op.dim != rho.nrows() {
        return Err(Error::DimensionMismatch { expected: op.dim, got: rho.nrows() });
    }
    Ok(op.iter().map(|(r, c, v)| v * rho[(c as usize, r as usize)]).sum())
}

/// F = ⟨ψ|ρ|ψ⟩.
pub fn state_fidelity(rho: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> Result<f64> {
    if rho.nrows() != psi.len() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: psi.len() });
    }
    Ok(psi.dotc(&(rho * psi)).re)
}

/// ⟨b_l† b_l⟩ of a pure state.
pub fn mean_phonon_number(space: &HilbertSpace, psi: &DVector<Complex64>, mode: usize) -> Result<f64> {
    if psi.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: psi.len() });
    }
    if mode >= space.modes {
        return Err(crate::error::invalid("mode", format!("{mode} out of range")));
    }
    let sd = space.spin_dim();
    Ok(psi
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * space.occupations(k / sd)[mode] as f64)
        .sum())
}

/// Reduced 2×2 density matrix of one spin (basis order |g⟩, |s⟩).
pub fn site_density(space: &HilbertSpace, psi: &DVector<Complex64>, site: usize) -> DMatrix<Complex64> {
    let bit = 1usize << site;
    let mut rho = DMatrix::zeros(2, 2);
    for k in 0..psi.len() {
        if k & bit != 0 {
            continue;
        }
        let (g, s) = (psi[k], psi[k | bit]);
        rho[(0, 0)] += g * g.conj();
        rho[(1, 1)] += s * s.conj();
        rho[(1, 0)] += s * g.conj();
        rho[(0, 1)] += g * s.conj();
    }
    let _ = space;
    rho
}

/// Same as [`site_density`] for a density matrix over spins only.
pub fn site_density_dm(rho: &DMatrix<Complex64>, site: usize) -> DMatrix<Complex64> {
    let bit = 1usize << site;
    let mut out = DMatrix::zeros(2, 2);
    for r in 0..rho.nrows() {
        for c in 0..rho.ncols() {
            if (r & !bit) != (c & !bit) {
                continue;
            }
            out[((r & bit != 0) as usize, (c & bit != 0) as usize)] += rho[(r, c)];
        }
    }
    out
}

/// Partial trace over the phonons: the 2^N × 2^N spin density matrix.
pub fn spin_density(space: &HilbertSpace, psi: &DVector<Complex64>) -> DMatrix<Complex64> {
    let sd = space.spin_dim();
    let pd = space.phonon_dim();
    let m = DMatrix::from_fn(sd, pd, |s, p| psi[s + p * sd]);
    &m * m.adjoint()
}

/// Observable time series with a leading time column.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub names: Vec<String>,
    pub time: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: &[&str]) -> Self {
        Self { names: names.iter().map(|s| s.to_string()).collect(), time: Vec::new(), columns: vec![Vec::new(); names.len()] }
    }

    pub fn push(&mut self, t: f64, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len());
        self.time.push(t);
        for (c, v) in self.columns.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|k| self.columns[k].as_slice())
    }

    /// Header row then one line per time, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (k, t) in self.time.iter().enumerate() {
            let _ = write!(s, "{t:.16e}");
            for c in &self.columns {
                let _ = write!(s, ",{:.16e}", c[k]);
            }
            s.push('\n');
        }
        s
    }
}
