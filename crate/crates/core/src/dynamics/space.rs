//! Spin ⊗ phonon product space with optional total-phonon truncation.

use std::collections::HashMap;

use crate::error::{invalid, Error, Result};

/// Default dimension cap (2²⁰).
pub const DEFAULT_DIM_CAP: usize = 1 << 20;

/// Basis ordering: index = spins + 2^N · phonon_index, spin site i ↔ bit i,
/// phonon configurations enumerated little-endian in the mode occupations.
#[derive(Clone, Debug)]
pub struct HilbertSpace {
    pub n_spins: usize,
    pub modes: usize,
    pub n_max: usize,
    /// Optional bound on Σ_l n_l.
    pub total_cap: Option<usize>,
    phonon_states: Vec<Vec<u8>>,
    phonon_lookup: HashMap<Vec<u8>, usize>,
}

impl HilbertSpace {
    pub fn spins(n_spins: usize) -> Result<Self> {
        Self::new(n_spins, 0, 0, None, DEFAULT_DIM_CAP)
    }

    pub fn new(n_spins: usize, modes: usize, n_max: usize, total_cap: Option<usize>, dim_cap: usize) -> Result<Self> {
        if n_spins > 30 {
            return Err(Error::DimensionCap { dim: usize::MAX, cap: dim_cap });
        }
        if n_max > u8::MAX as usize - 1 {
            return Err(invalid("n_max", "Fock truncation too large"));
        }
        let spin_dim = 1usize << n_spins;
        // count before enumerating so oversize requests fail fast
        let per_mode = (n_max + 1) as u128;
        let full = (spin_dim as u128).saturating_mul(per_mode.saturating_pow(modes as u32));
        if total_cap.is_none() && full > dim_cap as u128 {
            return Err(Error::DimensionCap { dim: full.min(usize::MAX as u128) as usize, cap: dim_cap });
        }
        let mut phonon_states = Vec::new();
        let mut occ = vec![0u8; modes];
        loop {
            let total: usize = occ.iter().map(|&v| v as usize).sum();
            if total_cap.is_none_or(|c| total <= c) {
                phonon_states.push(occ.clone());
                if spin_dim * phonon_states.len() > dim_cap {
                    return Err(Error::DimensionCap { dim: spin_dim * phonon_states.len(), cap: dim_cap });
                }
            }
            // little-endian odometer
            let mut k = 0;
            loop {
                if k == modes {
                    let phonon_lookup = phonon_states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
                    return Ok(Self { n_spins, modes, n_max, total_cap, phonon_states, phonon_lookup });
                }
                if (occ[k] as usize) < n_max {
                    occ[k] += 1;
                    break;
                }
                occ[k] = 0;
                k += 1;
            }
        }
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn phonon_dim(&self) -> usize {
        self.phonon_states.len()
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.phonon_dim()
    }

    pub fn split(&self, index: usize) -> (usize, &[u8]) {
        (index & (self.spin_dim() - 1), &self.phonon_states[index >> self.n_spins])
    }

    pub fn join(&self, spins: usize, occ: &[u8]) -> Option<usize> {
        self.phonon_lookup.get(occ).map(|p| spins + (p << self.n_spins))
    }

    pub fn occupations(&self, phonon_index: usize) -> &[u8] {
        &self.phonon_states[phonon_index]
    }
}
