//! Collective phonon modes of the trapped atom chain.
//!
//! The nearest-neighbour mechanical Hamiltonian is a tridiagonal Toeplitz
//! stiffness matrix and is diagonalized by the orthonormal type-I sine
//! transform. Frequencies are stored ascending; with this ordering the closed
//! form reads ε_l² = w_t² + (2ħg_m/mL_c²)(1 − cos(πl/(N+1))).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::device::{DerivedRates, DeviceParams};
use crate::error::{invalid, Error, Result};
use crate::units::HBAR;

#[derive(Clone, Debug, PartialEq)]
pub struct MechanicalChain {
    pub n: usize,
    pub mass: f64,
    pub w_t: f64,
    /// g_m = f²·Δ_vdW.
    pub g_m: f64,
    pub l_c: f64,
    /// ħ in the chain's unit system: 1 for natural units, SI when built from a device.
    pub hbar: f64,
}

impl MechanicalChain {
    /// Chain in natural units (ħ = 1).
    pub fn new(n: usize, mass: f64, w_t: f64, g_m: f64, l_c: f64) -> Result<Self> {
        let chain = Self {
            n,
            mass,
            w_t,
            g_m,
            l_c,
            hbar: 1.0,
        };
        chain.validate()?;
        Ok(chain)
    }

    /// Chain of `n` atoms for a device operating point (SI mass and length).
    pub fn from_device(n: usize, p: &DeviceParams, r: &DerivedRates) -> Result<Self> {
        let chain = Self {
            n,
            mass: p.mass,
            w_t: p.w_t,
            g_m: p.f * p.f * r.delta_vdw,
            l_c: r.l_c,
            hbar: HBAR,
        };
        chain.validate()?;
        Ok(chain)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "chain needs at least one atom"));
        }
        for (name, v) in [("mass", self.mass), ("w_t", self.w_t), ("l_c", self.l_c), ("hbar", self.hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and positive, got {v}")));
            }
        }
        // negative g_m is admissible input; stability is checked per mode
        if !self.g_m.is_finite() {
            return Err(invalid("g_m", format!("must be finite, got {}", self.g_m)));
        }
        Ok(())
    }

    /// Nearest-neighbour spring constant ħg_m/L_c².
    fn bond(&self) -> f64 {
        self.hbar * self.g_m / (self.l_c * self.l_c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhononSpectrum {
    /// Mode frequencies ε_l, ascending.
    pub eps: Vec<f64>,
    /// Orthogonal mode matrix, `b[(site, mode)]`, columns ordered like `eps`.
    #[serde(skip)]
    pub b: DMatrix<f64>,
}

impl PhononSpectrum {
    pub fn n(&self) -> usize {
        self.eps.len()
    }

    pub fn bandwidth(&self) -> f64 {
        self.eps[self.n() - 1] - self.eps[0]
    }

    /// Smallest gap between neighbouring modes (infinite for a single mode).
    pub fn min_spacing(&self) -> f64 {
        self.eps
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Spectrum from explicit frequencies, paired with the chain's sine transform.
    pub fn from_frequencies(eps: Vec<f64>) -> Result<Self> {
        let b = sine_transform(eps.len())?;
        Ok(Self { eps, b })
    }
}

/// Orthonormal type-I discrete sine transform, B_jl = √(2/(N+1))·sin(πjl/(N+1)).
pub fn sine_transform(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(invalid("n", "sine transform needs N >= 1"));
    }
    let norm = (2.0 / (n as f64 + 1.0)).sqrt();
    Ok(DMatrix::from_fn(n, n, |j, l| {
        norm * (PI * ((j + 1) * (l + 1)) as f64 / (n as f64 + 1.0)).sin()
    }))
}

/// Stiffness matrix M with ω_l² = eig(M)/m.
pub fn stiffness_matrix(chain: &MechanicalChain) -> DMatrix<f64> {
    let n = chain.n;
    let k = chain.bond();
    let diag = chain.mass * chain.w_t * chain.w_t + 2.0 * k;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else if i.abs_diff(j) == 1 {
            -k
        } else {
            0.0
        }
    })
}

/// Closed-form ε_l² for l = 1..N, ascending.
pub fn closed_form_squared(chain: &MechanicalChain) -> Vec<f64> {
    let n = chain.n as f64;
    let c = 2.0 * chain.bond() / chain.mass;
    (1..=chain.n)
        .map(|l| chain.w_t * chain.w_t + c * (1.0 - (PI * l as f64 / (n + 1.0)).cos()))
        .collect()
}

pub fn phonon_spectrum(chain: &MechanicalChain) -> Result<PhononSpectrum> {
    chain.validate()?;
    let sq = closed_form_squared(chain);
    let mut eps = Vec::with_capacity(sq.len());
    for (mode, &w2) in sq.iter().enumerate() {
        if !(w2 > 0.0) {
            return Err(Error::UnstableMode { mode: mode + 1, omega_sq: w2 });
        }
        eps.push(w2.sqrt());
    }
    let b = sine_transform(chain.n)?;
    Ok(PhononSpectrum { eps, b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_squared(chain: &MechanicalChain) -> Vec<f64> {
        let m = stiffness_matrix(chain) / chain.mass;
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    #[test]
    fn sine_transform_small() {
        assert_eq!(sine_transform(1).unwrap()[(0, 0)], 1.0);
        let b2 = sine_transform(2).unwrap();
        let mag = (2.0f64 / 3.0).sqrt() * (PI / 3.0).sin();
        for v in b2.iter() {
            assert!((v.abs() - mag).abs() < 1e-15);
        }
        let id = b2.transpose() * &b2;
        assert!((id - DMatrix::identity(2, 2)).abs().max() < 1e-15);
        let b5 = sine_transform(5).unwrap();
        assert!((&b5 - b5.transpose()).abs().max() < 1e-15);
        assert!((&b5 * &b5 - DMatrix::identity(5, 5)).abs().max() < 1e-14);
        assert!(sine_transform(0).is_err());
    }

    #[test]
    fn uncoupled_traps() {
        let chain = MechanicalChain::new(4, 2.0, 1.3, 0.0, 1.0).unwrap();
        let m = stiffness_matrix(&chain);
        assert!((m - DMatrix::identity(4, 4) * (2.0 * 1.3 * 1.3)).abs().max() < 1e-15);
        let s = phonon_spectrum(&chain).unwrap();
        assert!(s.eps.iter().all(|&e| (e - 1.3).abs() < 1e-15));
    }

    #[test]
    fn two_site_hand_diagonalization() {
        // w_t = 1, 2 g_m/(m L_c²) = 1: ω² ∈ {1 + 1/2, 1 + 3/2}
        let chain = MechanicalChain::new(2, 1.0, 1.0, 0.5, 1.0).unwrap();
        let s = phonon_spectrum(&chain).unwrap();
        assert!((s.eps[0] - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((s.eps[1] - 2.5f64.sqrt()).abs() < 1e-14);
        assert!((s.eps[0] - 1.224_744_871_391_589).abs() < 1e-12);
        assert!((s.eps[1] - 1.581_138_830_084_19).abs() < 1e-12);
    }

    #[test]
    fn three_site_toeplitz_formula() {
        let chain = MechanicalChain::new(3, 1.7, 0.9, 0.4, 1.2).unwrap();
        let m = stiffness_matrix(&chain);
        let (d, o) = (m[(0, 0)], m[(0, 1)]);
        let mut toeplitz: Vec<f64> = (1..=3).map(|l| d + 2.0 * o * (PI * l as f64 / 4.0).cos()).collect();
        toeplitz.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in toeplitz.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-12 * d);
        }
    }

    #[test]
    fn fifty_sites_match_dense() {
        let chain = MechanicalChain::new(50, 1.0, 2.0, 3.0, 0.7).unwrap();
        let closed = closed_form_squared(&chain);
        let dense = dense_squared(&chain);
        for (a, b) in closed.iter().zip(&dense) {
            assert!(((a - b) / b).abs() < 1e-10);
        }
    }

    #[test]
    fn mode_matrix_diagonalizes_stiffness() {
        let chain = MechanicalChain::new(7, 1.3, 0.8, 0.9, 1.1).unwrap();
        let s = phonon_spectrum(&chain).unwrap();
        let m = stiffness_matrix(&chain);
        let d = s.b.transpose() * &m * &s.b;
        let norm = m.norm();
        for i in 0..7 {
            for j in 0..7 {
                if i != j {
                    assert!(d[(i, j)].abs() < 1e-10 * norm);
                }
            }
            assert!((d[(i, i)] / chain.mass - s.eps[i] * s.eps[i]).abs() < 1e-10 * norm);
        }
    }

    #[test]
    fn instability_is_reported() {
        let chain = MechanicalChain::new(3, 1.0, 1.0, -2.0, 1.0).unwrap();
        let sq = closed_form_squared(&chain);
        assert!(sq.iter().any(|&v| v <= 0.0));
        assert!(matches!(phonon_spectrum(&chain), Err(Error::UnstableMode { .. })));
    }
}
