//! Gauge-encoded SU(n) spins: blocks of n two-level atoms confined to their
//! single-excitation sector by an energetic constraint λ_G Σ G².
//!
//! G counts block excitations minus one, G = ½Σσ_z + Q with Q = (n−2)/2,
//! so it vanishes exactly on the sector {|α⟩ = |s_α⟩Π_{β≠α}|g_β⟩}.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ggm::ggm_basis;
use crate::dynamics::dense::{check_dim, embed};
use crate::dynamics::{Factor, HilbertSpace, OpSum, SparseOp};
use crate::error::{invalid, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeEncoding {
    /// Logical dimension, equal to the block size.
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
    /// Constraint strength (rad/s).
    pub lambda_g: f64,
}

impl GaugeEncoding {
    /// Blocks of consecutive sites: block k holds sites kn..(k+1)n.
    pub fn contiguous(n: usize, n_blocks: usize, lambda_g: f64) -> Result<Self> {
        let blocks = (0..n_blocks).map(|k| (k * n..(k + 1) * n).collect()).collect();
        let enc = Self { n, blocks, lambda_g };
        enc.validate()?;
        Ok(enc)
    }

    pub fn charge(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    pub fn n_sites(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", "logical dimension must be at least 2"));
        }
        if !(self.lambda_g.is_finite() && self.lambda_g != 0.0) {
            return Err(invalid("lambda_g", "must be finite and nonzero"));
        }
        let total = self.n_sites();
        let mut seen = vec![false; total];
        for b in &self.blocks {
            if b.len() != self.n {
                return Err(invalid("blocks", format!("block size {} differs from n = {}", b.len(), self.n)));
            }
            for &s in b {
                if s >= total || seen[s] {
                    return Err(invalid("blocks", format!("site {s} missing from or repeated in the partition")));
                }
                seen[s] = true;
            }
        }
        Ok(())
    }

    /// Physical basis index of a logical configuration (α_k per block).
    pub fn physical_index(&self, logical: &[usize]) -> usize {
        logical.iter().zip(&self.blocks).map(|(&a, b)| 1usize << b[a]).sum()
    }

    pub fn logical_dim(&self) -> usize {
        self.n.pow(self.blocks.len() as u32)
    }

    /// Digits of a logical index, block 0 least significant.
    pub fn logical_digits(&self, mut index: usize) -> Vec<usize> {
        (0..self.blocks.len())
            .map(|_| {
                let d = index % self.n;
                index /= self.n;
                d
            })
            .collect()
    }
}

pub struct GaugeBlocks {
    pub space: HilbertSpace,
    /// G per block.
    pub generators: Vec<SparseOp>,
    pub h_g: SparseOp,
    /// Diagonal projector onto the joint single-excitation sector.
    pub projector: SparseOp,
    /// Physical indices of the logical basis states, in logical order.
    pub sector: Vec<usize>,
}

fn generator_opsum(block: &[usize]) -> OpSum {
    let mut g = OpSum::identity().scale(-ONE);
    for &s in block {
        g = g.add(&OpSum::single(ONE, Factor::Sss(s)));
    }
    g
}

pub fn gauge_blocks(enc: &GaugeEncoding, dim_cap: usize) -> Result<GaugeBlocks> {
    enc.validate()?;
    let space = HilbertSpace::new(enc.n_sites(), 0, 0, None, dim_cap)?;
    let mut generators = Vec::new();
    let mut hg = OpSum::zero();
    for b in &enc.blocks {
        let g = generator_opsum(b);
        hg = hg.add(&g.mul(&g).scale(Complex64::new(enc.lambda_g, 0.0)));
        generators.push(SparseOp::build(&space, &g));
    }
    let h_g = SparseOp::build(&space, &hg);
    let sector: Vec<usize> = (0..enc.logical_dim()).map(|k| enc.physical_index(&enc.logical_digits(k))).collect();
    let projector = SparseOp::from_triplets(space.dim(), sector.iter().map(|&k| (k as u32, k as u32, ONE)));
    Ok(GaugeBlocks { space, generators, h_g, projector, sector })
}

/// Primitive interblock model and its gauge-projected effective theory.
pub struct SunModel {
    /// D̂ + Ô on the physical register (pairs ī < j̄, Ô with its Hermitian conjugate).
    pub h_i: SparseOp,
    /// Effective Hamiltonian on the logical register (dimension n^blocks), up to a constant.
    pub h_eff: DMatrix<Complex64>,
    /// 𝒥 = −O²/λ_G.
    pub exchange: DMatrix<f64>,
    /// Diagonal coupling D + O²/λ_G including the second-order shift.
    pub diagonal: DMatrix<f64>,
    pub warnings: Vec<String>,
}

/// Builds H_I and H_eff for symmetric D, O (upper triangles used).
pub fn effective_sun_heisenberg(enc: &GaugeEncoding, d: &DMatrix<f64>, o: &DMatrix<f64>, max_ratio: f64) -> Result<SunModel> {
    enc.validate()?;
    let m = enc.blocks.len();
    for (name, mat) in [("D", d), ("O", o)] {
        if mat.nrows() != m || mat.ncols() != m {
            return Err(invalid(name, format!("must be {m}×{m}")));
        }
        if (mat - mat.transpose()).amax() > 1e-12 * mat.amax().max(1.0) {
            return Err(invalid(name, "must be symmetric"));
        }
    }
    let lam = enc.lambda_g;
    let mut warnings = Vec::new();
    let worst = d.amax().max(o.amax()) / lam.abs();
    if worst > max_ratio {
        warnings.push(format!("gauge hierarchy violated: max(|D|, |O|)/|λ_G| = {worst:.3e} > {max_ratio}"));
    }
    let exchange = o.map(|x| -x * x / lam);
    let diagonal = DMatrix::from_fn(m, m, |i, j| d[(i, j)] + o[(i, j)] * o[(i, j)] / lam);

    let mut hi = OpSum::zero();
    for a in 0..m {
        for b in a + 1..m {
            for k in 0..enc.n {
                let (sa, sb) = (enc.blocks[a][k], enc.blocks[b][k]);
                if d[(a, b)] != 0.0 {
                    hi = hi.add(&OpSum { terms: vec![(Complex64::new(d[(a, b)], 0.0), vec![Factor::Sss(sa), Factor::Sss(sb)])] });
                }
                if o[(a, b)] != 0.0 {
                    let c = Complex64::new(o[(a, b)], 0.0);
                    let hop = OpSum { terms: vec![(c, vec![Factor::Sp(sa), Factor::Sm(sb)])] };
                    hi = hi.add(&hop).add(&hop.dagger());
                }
            }
        }
    }
    let space = HilbertSpace::new(enc.n_sites(), 0, 0, None, crate::dynamics::space::DEFAULT_DIM_CAP)?;
    let h_i = SparseOp::build(&space, &hi);
    let h_eff = logical_model(enc.n, m, &diagonal, &exchange)?;
    Ok(SunModel { h_i, h_eff, exchange, diagonal, warnings })
}

/// |α⟩⟨β| on one n-level site.
fn t_op(n: usize, a: usize, b: usize) -> DMatrix<Complex64> {
    let mut t = DMatrix::zeros(n, n);
    t[(a, b)] = ONE;
    t
}

/// Σ_{ī<j̄} D Σ_α T_αα T_αα + 𝒥 Σ_{α≠β} T_αβ T_βα on n^m logical states.
pub fn logical_model(n: usize, m: usize, diagonal: &DMatrix<f64>, exchange: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let dim = n.pow(m as u32);
    check_dim(dim)?;
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..m {
        for j in i + 1..m {
            for a in 0..n {
                for b in 0..n {
                    let c = if a == b { diagonal[(i, j)] } else { exchange[(i, j)] };
                    if c != 0.0 {
                        h += embed(&t_op(n, a, b), i, m) * embed(&t_op(n, b, a), j, m) * Complex64::new(c, 0.0);
                    }
                }
            }
        }
    }
    Ok(h)
}

/// SU(n) Heisenberg magnet Σ_{i<j} 𝒥_ij Σ_a Λ_a^i Λ_a^j on the logical register.
pub fn sun_heisenberg(n: usize, couplings: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let m = couplings.nrows();
    let dim = n.pow(m as u32);
    check_dim(dim)?;
    let basis = ggm_basis(n)?;
    let embedded: Vec<Vec<DMatrix<Complex64>>> = (0..m).map(|i| basis.matrices.iter().map(|l| embed(l, i, m)).collect()).collect();
    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..m {
        for j in i + 1..m {
            let c = couplings[(i, j)];
            if c == 0.0 {
                continue;
            }
            for a in 0..basis.len() {
                h += &embedded[i][a] * &embedded[j][a] * Complex64::new(c, 0.0);
            }
        }
    }
    Ok(h)
}

/// Global generators Σ_ī Λ_a^(ī), one per GGM.
pub fn global_generators(n: usize, m: usize) -> Result<Vec<DMatrix<Complex64>>> {
    check_dim(n.pow(m as u32))?;
    let basis = ggm_basis(n)?;
    Ok(basis
        .matrices
        .iter()
        .map(|l| (0..m).map(|i| embed(l, i, m)).fold(DMatrix::zeros(n.pow(m as u32), n.pow(m as u32)), |acc, x| acc + x))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::dense::eigh;

    #[test]
    fn sectors_and_charges() {
        let e2 = GaugeEncoding::contiguous(2, 1, 1.0).unwrap();
        assert_eq!(e2.charge(), 0.0);
        let g2 = gauge_blocks(&e2, 1 << 10).unwrap();
        assert_eq!(g2.sector, vec![0b01, 0b10]);
        let e3 = GaugeEncoding::contiguous(3, 2, 1.0).unwrap();
        assert_eq!(e3.charge(), 0.5);
        let g3 = gauge_blocks(&e3, 1 << 10).unwrap();
        // rank by counting states with exactly one excitation per block
        let count = (0..64usize).filter(|k| (k & 0b111).count_ones() == 1 && (k >> 3).count_ones() == 1).count();
        assert_eq!(count, 9);
        assert_eq!(g3.projector.nnz(), 9);
        for &k in &g3.sector {
            assert_eq!(g3.h_g.to_dense()[(k, k)].norm(), 0.0);
            for g in &g3.generators {
                assert_eq!(g.to_dense()[(k, k)].norm(), 0.0);
            }
        }
        assert!(GaugeEncoding { n: 3, blocks: vec![vec![0, 1, 1]], lambda_g: 1.0 }.validate().is_err());
    }

    #[test]
    fn exchange_value() {
        let enc = GaugeEncoding::contiguous(2, 2, 10.0).unwrap();
        let o = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.1, 0.0]);
        let m = effective_sun_heisenberg(&enc, &DMatrix::zeros(2, 2), &o, 0.1).unwrap();
        assert!((m.exchange[(0, 1)] + 0.001).abs() < 1e-15);
        assert!(m.warnings.is_empty());
        let zero = effective_sun_heisenberg(&enc, &o, &DMatrix::zeros(2, 2), 0.1).unwrap();
        let h = &zero.h_eff;
        assert!((h - DMatrix::from_diagonal(&h.diagonal())).camax() == 0.0);
    }

    #[test]
    fn low_band_matches_effective_theory() {
        let (o, d) = (1.0, 0.7);
        let enc = GaugeEncoding::contiguous(3, 2, 1e3).unwrap();
        let gb = gauge_blocks(&enc, 1 << 10).unwrap();
        let mm = |v: f64| DMatrix::from_row_slice(2, 2, &[0.0, v, v, 0.0]);
        let model = effective_sun_heisenberg(&enc, &mm(d), &mm(o), 0.1).unwrap();
        let full = gb.h_g.add(&model.h_i, ONE).to_dense();
        let (ev, _) = eigh(&full);
        let (eff, _) = eigh(&model.h_eff);
        let shift: f64 = ev[..9].iter().zip(&eff).map(|(a, b)| a - b).sum::<f64>() / 9.0;
        let resid = ev[..9].iter().zip(&eff).map(|(a, b)| (a - b - shift).abs()).fold(0.0, f64::max);
        // two blocks: no third-order path, leading error (4/3) O^4/λ_G^3 for any D
        assert!((resid / (4.0 / 3.0 * o.powi(4) / 1e9) - 1.0).abs() < 1e-2, "{resid}");
    }

    #[test]
    fn su3_symmetry() {
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 0.4, -0.3, 0.4, 0.0, 1.1, -0.3, 1.1, 0.0]);
        let h = logical_model(3, 3, &j, &j).unwrap();
        for g in global_generators(3, 3).unwrap() {
            assert!((&h * &g - &g * &h).camax() < 1e-10);
        }
        // Σ_a Λ⊗Λ = 2 SWAP − 2/n
        let hh = sun_heisenberg(3, &j).unwrap();
        let shift = -(2.0 / 3.0) * (0.4 - 0.3 + 1.1);
        let want = &h * Complex64::new(2.0, 0.0) + DMatrix::identity(27, 27) * Complex64::new(shift, 0.0);
        assert!((hh - want).camax() < 1e-12);
    }
}
