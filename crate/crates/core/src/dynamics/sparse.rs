//! Operator algebra over a [`HilbertSpace`] and compressed-row storage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::space::HilbertSpace;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Monomial factor: maps one basis state to at most one basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    /// σ₊ = |s⟩⟨g|.
    Sp(usize),
    /// σ₋ = |g⟩⟨s|.
    Sm(usize),
    Sz(usize),
    /// |s⟩⟨s|.
    Sss(usize),
    /// |g⟩⟨g|.
    Sgg(usize),
    /// Annihilation b_l.
    A(usize),
    /// Creation b_l†.
    Ad(usize),
    /// b_l† b_l.
    Num(usize),
}

impl Factor {
    fn dagger(self) -> Self {
        match self {
            Factor::Sp(i) => Factor::Sm(i),
            Factor::Sm(i) => Factor::Sp(i),
            Factor::A(l) => Factor::Ad(l),
            Factor::Ad(l) => Factor::A(l),
            f => f,
        }
    }

    /// Acts on (spin bits, occupations) in place; returns the amplitude or None for zero.
    fn apply(self, spins: &mut usize, occ: &mut [u8], n_max: usize) -> Option<f64> {
        match self {
            Factor::Sp(i) => {
                let b = 1 << i;
                if *spins & b != 0 {
                    return None;
                }
                *spins |= b;
                Some(1.0)
            }
            Factor::Sm(i) => {
                let b = 1 << i;
                if *spins & b == 0 {
                    return None;
                }
                *spins &= !b;
                Some(1.0)
            }
            Factor::Sz(i) => Some(if *spins & (1 << i) != 0 { 1.0 } else { -1.0 }),
            Factor::Sss(i) => (*spins & (1 << i) != 0).then_some(1.0),
            Factor::Sgg(i) => (*spins & (1 << i) == 0).then_some(1.0),
            Factor::A(l) => {
                let n = occ[l];
                if n == 0 {
                    return None;
                }
                occ[l] = n - 1;
                Some((n as f64).sqrt())
            }
            Factor::Ad(l) => {
                let n = occ[l] as usize;
                if n >= n_max {
                    return None;
                }
                occ[l] += 1;
                Some((n as f64 + 1.0).sqrt())
            }
            Factor::Num(l) => {
                let n = occ[l];
                (n != 0).then_some(n as f64)
            }
        }
    }
}

/// Σ_k c_k Π factors (rightmost factor acts first).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpSum {
    pub terms: Vec<(Complex64, Vec<Factor>)>,
}

impl OpSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self { terms: vec![(ONE, Vec::new())] }
    }

    pub fn single(c: Complex64, f: Factor) -> Self {
        Self { terms: vec![(c, vec![f])] }
    }

    /// σ_α on `site`, α = 0, 1, 2 for x, y, z.
    pub fn pauli(site: usize, alpha: usize) -> Self {
        match alpha {
            0 => Self { terms: vec![(ONE, vec![Factor::Sp(site)]), (ONE, vec![Factor::Sm(site)])] },
            1 => Self { terms: vec![(-I, vec![Factor::Sp(site)]), (I, vec![Factor::Sm(site)])] },
            2 => Self::single(ONE, Factor::Sz(site)),
            _ => panic!("Pauli index must be 0, 1 or 2"),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(mut self, other: &OpSum) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        self.terms.iter_mut().for_each(|t| t.0 *= c);
        self
    }

    /// Operator product self · other.
    pub fn mul(&self, other: &OpSum) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, fa) in &self.terms {
            for (b, fb) in &other.terms {
                let mut f = fa.clone();
                f.extend_from_slice(fb);
                terms.push((a * b, f));
            }
        }
        Self { terms }
    }

    pub fn dagger(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(c, f)| (c.conj(), f.iter().rev().map(|x| x.dagger()).collect()))
                .collect(),
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub values: Vec<Complex64>,
}

/// Applies every term to every basis column; returns (row, col, value, term index) triplets.
pub(crate) fn triplets(space: &HilbertSpace, op: &OpSum) -> Vec<(u32, u32, Complex64, u32)> {
    let dim = space.dim();
    let mut out = Vec::new();
    let mut occ = vec![0u8; space.modes];
    for col in 0..dim {
        for (t, (c, factors)) in op.terms.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            let (s0, o0) = space.split(col);
            let mut spins = s0;
            occ.copy_from_slice(o0);
            let mut amp = 1.0;
            let mut alive = true;
            for f in factors.iter().rev() {
                match f.apply(&mut spins, &mut occ, space.n_max) {
                    Some(a) => amp *= a,
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if !alive {
                continue;
            }
            // states pushed outside a total-phonon cap are dropped
            if let Some(row) = space.join(spins, &occ) {
                out.push((row as u32, col as u32, c * amp, t as u32));
            }
        }
    }
    out
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indptr: vec![0; dim + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn build(space: &HilbertSpace, op: &OpSum) -> Self {
        let t = triplets(space, op);
        Self::from_triplets(space.dim(), t.into_iter().map(|(r, c, v, _)| (r, c, v)))
    }

    /// Sums duplicates and drops exact zeros.
    pub fn from_triplets(dim: usize, t: impl IntoIterator<Item = (u32, u32, Complex64)>) -> Self {
        let mut t: Vec<_> = t.into_iter().collect();
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for k in 0..dim {
            indptr[k + 1] += indptr[k];
        }
        let mut op = Self { dim, indptr, indices, values };
        op.prune();
        op
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| *v != ZERO) {
            return;
        }
        let t: Vec<_> = self.iter().filter(|t| t.2 != ZERO).collect();
        *self = Self::from_triplets(self.dim, t);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r as u32, self.indices[k], self.values[k]))
        })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let body = |(r, yr): (usize, &mut Complex64)| {
            let mut acc = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k] as usize];
            }
            *yr = acc;
        };
        if self.nnz() > 1 << 16 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    pub fn mul_vec(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = DVector::zeros(self.dim);
        self.apply(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn add(&self, other: &Self, s: Complex64) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.iter().chain(other.iter().map(|(r, c, v)| (r, c, v * s))))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune();
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r as usize, c as usize)] += v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let dim = m.nrows();
        Self::from_triplets(
            dim,
            (0..dim).flat_map(|r| (0..dim).map(move |c| (r as u32, c as u32, m[(r, c)]))),
        )
    }

    /// Max absolute row sum, an upper bound on the spectral norm for Hermitian A.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| (self.indptr[r]..self.indptr[r + 1]).map(|k| self.values[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖A − A†‖_F.
    pub fn hermiticity_defect(&self) -> f64 {
        self.add(&self.adjoint(), -ONE).frobenius()
    }

    /// Checks ‖A − A†‖ < 1e-12 ‖A‖.
    pub fn ensure_hermitian(&self) -> Result<()> {
        let d = self.hermiticity_defect();
        if d > 1e-12 * self.frobenius().max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian(d));
        }
        Ok(())
    }

    pub fn expectation(&self, psi: &DVector<Complex64>) -> Complex64 {
        psi.dotc(&self.mul_vec(psi))
    }

    /// [A, B] as a sparse matrix.
    pub fn commutator(&self, other: &Self) -> Self {
        let ab = self.matmul(other);
        let ba = other.matmul(self);
        ab.add(&ba, -ONE)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut t = Vec::new();
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let mid = self.indices[k] as usize;
                for q in other.indptr[mid]..other.indptr[mid + 1] {
                    t.push((r as u32, other.indices[q], self.values[k] * other.values[q]));
                }
            }
        }
        Self::from_triplets(self.dim, t)
    }
}
