//! Effective spin Hamiltonians and the time-dependent spin–phonon model.

use num_complex::Complex64;

use super::space::HilbertSpace;
use super::sparse::{triplets, Factor, OpSum, SparseOp};
use crate::compiler::{pm_from_xy, SidebandProgram, SpinNetworkSpec};
use crate::error::{Error, Result};
use crate::phonons::PhononSpectrum;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Σ J σσ + Σ h σ as an operator sum.
pub fn spin_network_opsum(spec: &SpinNetworkSpec) -> OpSum {
    let mut op = OpSum::zero();
    for (i, j) in spec.pairs() {
        for a in 0..3 {
            for b in 0..3 {
                let v = spec.get_j(i, j, a, b);
                if v != 0.0 {
                    op = op.add(&OpSum::pauli(i, a).mul(&OpSum::pauli(j, b)).scale(Complex64::new(v, 0.0)));
                }
            }
        }
    }
    for i in 0..spec.n {
        for g in 0..3 {
            let v = spec.h[i][g];
            if v != 0.0 {
                op = op.add(&OpSum::pauli(i, g).scale(Complex64::new(v, 0.0)));
            }
        }
    }
    op
}

/// Sparse effective Hamiltonian on the spin register (phonon modes, if any, act as identity).
pub fn build_effective_spin_hamiltonian(spec: &SpinNetworkSpec, space: &HilbertSpace) -> Result<SparseOp> {
    spec.validate()?;
    if space.n_spins != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, got: space.n_spins });
    }
    let h = SparseOp::build(space, &spin_network_opsum(spec));
    h.ensure_hermitian()?;
    Ok(h)
}

/// One coefficient Σ_m a_m e^{−iφ_m t}.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Coefficient {
    pub amps: Vec<Complex64>,
    pub freqs: Vec<f64>,
}

impl Coefficient {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.amps
            .iter()
            .zip(&self.freqs)
            .map(|(a, f)| a * Complex64::new(0.0, -f * t).exp())
            .sum()
    }
}

/// H(t) = H_static + Σ_k (c_k(t) A_k + h.c.), stored as one tagged CSR.
#[derive(Clone, Debug)]
pub struct TdHamiltonian {
    pub dim: usize,
    pub coefficients: Vec<Coefficient>,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<Complex64>,
    /// 2k → c_k, 2k + 1 → c_k*, u32::MAX → static.
    tags: Vec<u32>,
}

const STATIC: u32 = u32::MAX;

impl TdHamiltonian {
    pub fn new(space: &HilbertSpace, stat: Option<&OpSum>, terms: Vec<(Coefficient, OpSum)>) -> Self {
        let dim = space.dim();
        let mut t: Vec<(u32, u32, Complex64, u32)> = Vec::new();
        if let Some(s) = stat {
            t.extend(triplets(space, s).into_iter().map(|(r, c, v, _)| (r, c, v, STATIC)));
        }
        let mut coefficients = Vec::with_capacity(terms.len());
        for (k, (coef, op)) in terms.into_iter().enumerate() {
            let k = k as u32;
            t.extend(triplets(space, &op).into_iter().map(|(r, c, v, _)| (r, c, v, 2 * k)));
            t.extend(triplets(space, &op.dagger()).into_iter().map(|(r, c, v, _)| (r, c, v, 2 * k + 1)));
            coefficients.push(coef);
        }
        t.sort_unstable_by_key(|&(r, c, _, g)| (r, c, g));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut tags = Vec::with_capacity(t.len());
        let mut last = None;
        for (r, c, v, g) in t {
            if last == Some((r, c, g)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                tags.push(g);
                indptr[r as usize + 1] += 1;
                last = Some((r, c, g));
            }
        }
        for k in 0..dim {
            indptr[k + 1] += indptr[k];
        }
        Self { dim, coefficients, indptr, indices, values, tags }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Coefficient table for time t, indexed by tag.
    pub fn coefficients_at(&self, t: f64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.coefficients.len());
        for c in &self.coefficients {
            let v = c.eval(t);
            out.push(v);
            out.push(v.conj());
        }
        out
    }

    /// y = H(t) x with a precomputed coefficient table.
    pub fn apply(&self, coef: &[Complex64], x: &[Complex64], y: &mut [Complex64]) {
        use rayon::prelude::*;
        let body = |(r, yr): (usize, &mut Complex64)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                let g = self.tags[k];
                let c = if g == STATIC { ONE } else { coef[g as usize] };
                acc += self.values[k] * c * x[self.indices[k] as usize];
            }
            *yr = acc;
        };
        if self.nnz() > 1 << 16 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    /// Snapshot H(t) as a sparse matrix.
    pub fn at(&self, t: f64) -> SparseOp {
        let coef = self.coefficients_at(t);
        let trip = (0..self.dim).flat_map(|r| {
            let coef = &coef;
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| {
                let g = self.tags[k];
                let c = if g == STATIC { ONE } else { coef[g as usize] };
                (r as u32, self.indices[k], self.values[k] * c)
            })
        });
        SparseOp::from_triplets(self.dim, trip)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FullModelOptions {
    /// Keep sideband l acting on modes l' ≠ l.
    pub keep_offresonant: bool,
}

impl Default for FullModelOptions {
    fn default() -> Self {
        Self { keep_offresonant: true }
    }
}

/// Interaction-picture spin–phonon Hamiltonian driven by a sideband program.
///
/// Sideband (site i, component s, mode l) couples σ_s^(i) to every mode l' with
/// amplitude η_o Ω_{s,i,l} B_il' and phase e^{−i(Δ_l + ε_l' − ε_l)t}; components
/// are σ₊, σ₋ (from the x/y amplitudes) and σ_z. Counter-rotating pairings with
/// b† at ≈2ε are dropped.
pub fn build_full_hamiltonian(
    prog: &SidebandProgram,
    spectrum: &PhononSpectrum,
    space: &HilbertSpace,
    opts: FullModelOptions,
) -> Result<TdHamiltonian> {
    prog.validate()?;
    let n = prog.n;
    if spectrum.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spectrum.n() });
    }
    if space.n_spins != n || space.modes != n {
        return Err(Error::DimensionMismatch { expected: n, got: space.n_spins.min(space.modes) });
    }
    let mut terms = Vec::new();
    let cut = 1e-12 * prog.max_omega_tilde();
    for i in 0..n {
        // amplitudes per component (σ₊, σ₋, σ_z) and sideband mode l
        let amps: Vec<[Complex64; 3]> = (0..n)
            .map(|l| {
                let (p, m) = pm_from_xy(prog.omega(0, i, l), prog.omega(1, i, l));
                [p, m, prog.omega(2, i, l)]
            })
            .collect();
        for (s, spin) in [Factor::Sp(i), Factor::Sm(i), Factor::Sz(i)].into_iter().enumerate() {
            for lp in 0..n {
                let mut coef = Coefficient::default();
                for (l, a) in amps.iter().enumerate() {
                    if l != lp && !opts.keep_offresonant {
                        continue;
                    }
                    let amp = a[s] * (prog.eta_o * prog.b[(i, lp)]);
                    if amp.norm() < cut || amp.norm() == 0.0 {
                        continue;
                    }
                    coef.amps.push(amp);
                    coef.freqs.push(prog.delta_l[l] + spectrum.eps[lp] - spectrum.eps[l]);
                }
                if !coef.amps.is_empty() {
                    let op = OpSum { terms: vec![(ONE, vec![spin, Factor::A(lp)])] };
                    terms.push((coef, op));
                }
            }
        }
    }
    Ok(TdHamiltonian::new(space, None, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::SpinNetworkSpec;
    use crate::phonons::PhononSpectrum;
    use nalgebra::DMatrix;

    #[test]
    fn single_field_term() {
        let mut spec = SpinNetworkSpec::zeros(2);
        spec.h[0][2] = 1.0;
        let space = HilbertSpace::spins(2).unwrap();
        let h = build_effective_spin_hamiltonian(&spec, &space).unwrap();
        let want = SparseOp::build(&space, &OpSum::pauli(0, 2));
        assert!((h.to_dense() - want.to_dense()).camax() < 1e-15);
    }

    #[test]
    fn xx_pair_spectrum() {
        let mut spec = SpinNetworkSpec::zeros(2);
        spec.set_j(0, 1, 0, 0, 0.5);
        spec.set_j(0, 1, 1, 1, 0.5);
        let space = HilbertSpace::spins(2).unwrap();
        let h = build_effective_spin_hamiltonian(&spec, &space).unwrap().to_dense();
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [-1.0, 0.0, 0.0, 1.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn jaynes_cummings_block() {
        let spec = PhononSpectrum::from_frequencies(vec![3.0]).unwrap();
        let mut prog = SidebandProgram::zeros(1, vec![0.4], 0.5, DMatrix::from_element(1, 1, 1.0));
        prog.omega[0] = Complex64::new(0.2, 0.0);
        let space = HilbertSpace::new(1, 1, 2, None, 64).unwrap();
        let h = build_full_hamiltonian(&prog, &spec, &space, FullModelOptions::default()).unwrap();
        let t = 1.3;
        let m = h.at(t).to_dense();
        // Ω̃ = 0.1: H = 0.1 σ_x (b e^{−iΔt} + b† e^{iΔt})
        let ph = Complex64::new(0.0, -0.4 * t).exp() * 0.1;
        let sp = HilbertSpace::new(1, 1, 2, None, 64).unwrap();
        let sx = SparseOp::build(&sp, &OpSum::pauli(0, 0)).to_dense();
        let a = SparseOp::build(&sp, &OpSum::single(ONE, Factor::A(0))).to_dense();
        let want = &sx * (a.clone() * ph + a.adjoint() * ph.conj());
        assert!((m - want).camax() < 1e-15);
    }
}
