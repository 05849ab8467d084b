//! Dissipative channels of the effective spin model.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::master::{diagonalize_rate_matrix, Channel, TOL_PSD};
use super::space::HilbertSpace;
use super::sparse::{Factor, OpSum, SparseOp};
use crate::compiler::{pm_from_xy, SidebandProgram};
use crate::error::{invalid, Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn site_ops(space: &HilbertSpace, f: fn(usize) -> Factor) -> Vec<SparseOp> {
    (0..space.n_spins).map(|i| SparseOp::build(space, &OpSum::single(ONE, f(i)))).collect()
}

/// Local FORT depolarization: `L_ss` relaxes |s⟩ → |g⟩ (jump σ_gs) and `L_gg`
/// pumps |g⟩ → |s⟩ (jump σ_sg), both at rate γ_i on site i.
pub fn fort_channels(space: &HilbertSpace, gamma: &[f64]) -> Result<Vec<Channel>> {
    if gamma.len() != space.n_spins {
        return Err(Error::DimensionMismatch { expected: space.n_spins, got: gamma.len() });
    }
    if gamma.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
        return Err(invalid("gamma_fort", "rates must be finite and non-negative"));
    }
    Ok(vec![
        Channel::local("L_ss", gamma, site_ops(space, Factor::Sm)),
        Channel::local("L_gg", gamma, site_ops(space, Factor::Sp)),
    ])
}

/// Correlated rate matrices γ^(ij) = 2 γ_m Re Σ_l Ω̃^(i)_l Ω̃^(j)*_l / Δ_l² for the
/// red (σ₊b, jump σ₋), blue (σ₋b, jump σ₊) and Z (σ_z b, jump σ_z) families.
///
/// With a common Δ_l this is (γ_m/Δ_l) times the induced coupling of the same
/// component; as the real part of a Gram matrix it is positive semidefinite.
pub fn phonon_loss_rates(prog: &SidebandProgram, gamma_m: f64) -> Result<[DMatrix<Complex64>; 3]> {
    prog.validate()?;
    if !(gamma_m >= 0.0 && gamma_m.is_finite()) {
        return Err(invalid("gamma_m", "must be finite and non-negative"));
    }
    let n = prog.n;
    // amplitude of component c at (site, mode)
    let amp = |c: usize, i: usize, l: usize| -> Complex64 {
        let (p, m) = pm_from_xy(prog.omega_tilde(0, i, l), prog.omega_tilde(1, i, l));
        match c {
            0 => p,
            1 => m,
            _ => prog.omega_tilde(2, i, l),
        }
    };
    let mut out: [DMatrix<Complex64>; 3] = std::array::from_fn(|_| DMatrix::zeros(n, n));
    for (c, g) in out.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n).map(|l| amp(c, i, l) * amp(c, j, l).conj() / (prog.delta_l[l] * prog.delta_l[l])).sum();
                g[(i, j)] = Complex64::new(2.0 * gamma_m * s.re, 0.0);
            }
        }
        diagonalize_rate_matrix(g, TOL_PSD)?;
    }
    Ok(out)
}

/// `phonon_loss_rates` attached to their spin operators.
pub fn phonon_loss_channels(prog: &SidebandProgram, gamma_m: f64, space: &HilbertSpace) -> Result<Vec<Channel>> {
    if space.n_spins != prog.n {
        return Err(Error::DimensionMismatch { expected: prog.n, got: space.n_spins });
    }
    let [r, b, z] = phonon_loss_rates(prog, gamma_m)?;
    Ok(vec![
        Channel { name: "L_r".into(), rates: r, ops: site_ops(space, Factor::Sm) },
        Channel { name: "L_b".into(), rates: b, ops: site_ops(space, Factor::Sp) },
        Channel { name: "L_Z".into(), rates: z, ops: site_ops(space, Factor::Sz) },
    ])
}
