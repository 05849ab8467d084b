//! Generalized Gell-Mann matrices, the n²−1 generators of SU(n).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GgmKind {
    /// |α⟩⟨β| + |β⟩⟨α|
    Symmetric { alpha: usize, beta: usize },
    /// −i|α⟩⟨β| + i|β⟩⟨α|
    Antisymmetric { alpha: usize, beta: usize },
    /// √(2/(k(k+1))) (Σ_{j<k} |j⟩⟨j| − k|k⟩⟨k|), k = 1..n−1
    Diagonal { k: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GgmBasis {
    pub n: usize,
    pub kinds: Vec<GgmKind>,
    pub matrices: Vec<DMatrix<Complex64>>,
}

pub fn ggm_basis(n: usize) -> Result<GgmBasis> {
    if n < 2 {
        return Err(invalid("n", format!("SU(n) needs n >= 2, got {n}")));
    }
    let mut kinds = Vec::with_capacity(n * n - 1);
    for a in 0..n {
        for b in a + 1..n {
            kinds.push(GgmKind::Symmetric { alpha: a, beta: b });
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            kinds.push(GgmKind::Antisymmetric { alpha: a, beta: b });
        }
    }
    for k in 1..n {
        kinds.push(GgmKind::Diagonal { k });
    }
    let matrices = kinds.iter().map(|&k| ggm_matrix(n, k)).collect();
    Ok(GgmBasis { n, kinds, matrices })
}

pub fn ggm_matrix(n: usize, kind: GgmKind) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    match kind {
        GgmKind::Symmetric { alpha, beta } => {
            m[(alpha, beta)] = Complex64::new(1.0, 0.0);
            m[(beta, alpha)] = Complex64::new(1.0, 0.0);
        }
        GgmKind::Antisymmetric { alpha, beta } => {
            m[(alpha, beta)] = Complex64::new(0.0, -1.0);
            m[(beta, alpha)] = Complex64::new(0.0, 1.0);
        }
        GgmKind::Diagonal { k } => {
            let norm = (2.0 / (k * (k + 1)) as f64).sqrt();
            for j in 0..k {
                m[(j, j)] = Complex64::new(norm, 0.0);
            }
            m[(k, k)] = Complex64::new(-(k as f64) * norm, 0.0);
        }
    }
    m
}

impl GgmBasis {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Coefficients c_a = tr(AΛ_a)/2 of a traceless Hermitian A.
    pub fn expand(&self, a: &DMatrix<Complex64>) -> Vec<f64> {
        self.matrices.iter().map(|l| (a * l).trace().re / 2.0).collect()
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (c, l) in coeffs.iter().zip(&self.matrices) {
            m += l * Complex64::new(*c, 0.0);
        }
        m
    }

    /// Largest deviation from tracelessness, Hermiticity and tr(Λ_aΛ_b) = 2δ_ab.
    pub fn algebra_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, la) in self.matrices.iter().enumerate() {
            worst = worst.max(la.trace().norm());
            worst = worst.max((la - la.adjoint()).camax());
            for (b, lb) in self.matrices.iter().enumerate() {
                let want = if a == b { 2.0 } else { 0.0 };
                worst = worst.max(((la * lb).trace() - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }
}
