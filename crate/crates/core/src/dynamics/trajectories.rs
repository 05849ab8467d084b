//! Quantum-jump unravelling of the master equation.
//!
//! Each trajectory evolves under H_eff = H − (i/2)Σλ_k L_k†L_k until the
//! squared norm drops below a uniform draw, then jumps. Jump times are located
//! to 2⁻²⁰ of the output spacing with exact dyadic propagators, so there is
//! no first-order time-step bias.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::master::OpenSystemModel;
use super::sparse::SparseOp;
use crate::error::{invalid, Error, Result};

const LEVELS: usize = 20;
/// Trajectories per parallel batch; batches are reduced in index order.
const BATCH: usize = 256;
/// Dense propagators beyond this dimension are refused.
pub const MAX_TRAJECTORY_DIM: usize = 4096;

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    /// `mean[obs][t]`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub n_traj: usize,
    pub jumps: usize,
    /// Jump attempts with vanishing total jump weight that forced a redraw.
    pub resampled: usize,
}

struct Prepared {
    props: Vec<DMatrix<Complex64>>,
    rates: Vec<f64>,
    jumps: Vec<SparseOp>,
    obs: Vec<SparseOp>,
}

struct Single {
    values: Vec<Vec<f64>>,
    jumps: usize,
    resampled: usize,
}

fn expect(op: &SparseOp, psi: &DVector<Complex64>, norm_sq: f64) -> f64 {
    op.expectation(psi).re / norm_sq
}

fn run_one(p: &Prepared, psi0: &DVector<Complex64>, n_steps: usize, seed: u64, idx: usize) -> Single {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    let mut values = vec![Vec::with_capacity(n_steps + 1); p.obs.len()];
    let mut psi = psi0.clone();
    let mut r: f64 = rng.random();
    let mut jumps = 0;
    let mut resampled = 0;
    let record = |values: &mut Vec<Vec<f64>>, psi: &DVector<Complex64>| {
        let n2 = psi.norm_squared();
        for (v, o) in values.iter_mut().zip(&p.obs) {
            v.push(expect(o, psi, n2));
        }
    };
    record(&mut values, &psi);
    let total = 1usize << LEVELS;
    for _ in 0..n_steps {
        let mut ticks = total;
        let mut m = 0;
        while ticks > 0 {
            let chunk = 1usize << (LEVELS - m);
            if chunk > ticks {
                m += 1;
                continue;
            }
            let cand = &p.props[m] * &psi;
            if cand.norm_squared() > r {
                psi = cand;
                ticks -= chunk;
                m = 0;
            } else if m == LEVELS {
                psi = cand;
                ticks -= 1;
                m = 0;
                let weights: Vec<f64> = p
                    .rates
                    .iter()
                    .zip(&p.jumps)
                    .map(|(l, op)| l * op.mul_vec(&psi).norm_squared())
                    .collect();
                let sum: f64 = weights.iter().sum();
                if !(sum > 0.0) {
                    resampled += 1;
                    psi.unscale_mut(psi.norm());
                    r = rng.random();
                    continue;
                }
                let mut u = rng.random::<f64>() * sum;
                let mut k = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        k = i;
                        break;
                    }
                    u -= w;
                }
                psi = p.jumps[k].mul_vec(&psi);
                psi.unscale_mut(psi.norm());
                jumps += 1;
                r = rng.random();
            } else {
                m += 1;
            }
        }
        record(&mut values, &psi);
    }
    Single { values, jumps, resampled }
}

/// Ensemble averages of Hermitian `observables` on a uniform grid.
///
/// Deterministic for fixed (seed, n_traj): trajectory k uses stream k of the
/// seeded generator and results are reduced in trajectory order.
pub fn sample_trajectories(
    model: &OpenSystemModel,
    psi0: &DVector<Complex64>,
    grid: &[f64],
    observables: &[SparseOp],
    n_traj: usize,
    seed: u64,
) -> Result<TrajectoryResult> {
    let dim = model.dim();
    if dim > MAX_TRAJECTORY_DIM {
        return Err(Error::DimensionCap { dim, cap: MAX_TRAJECTORY_DIM });
    }
    if psi0.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(invalid("psi0", "state must be normalized"));
    }
    if grid.len() < 2 {
        return Err(invalid("time grid", "need at least two points"));
    }
    let dt = grid[1] - grid[0];
    if !(dt > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(invalid("time grid", "trajectories need a uniform increasing grid"));
    }
    let js = model.jumps()?;
    let hnh = js.effective_hamiltonian(&model.h).to_dense();
    let mi = Complex64::new(0.0, -1.0);
    let props = (0..=LEVELS)
        .map(|m| (&hnh * (mi * dt / (1u64 << m) as f64)).exp())
        .collect();
    let prep = Prepared { props, rates: js.rates, jumps: js.ops, obs: observables.to_vec() };
    let n_steps = grid.len() - 1;
    let n_obs = observables.len();
    let mut sum = vec![vec![0.0; grid.len()]; n_obs];
    let mut sum2 = vec![vec![0.0; grid.len()]; n_obs];
    let mut jumps = 0;
    let mut resampled = 0;
    let mut start = 0;
    while start < n_traj {
        let end = (start + BATCH).min(n_traj);
        let batch: Vec<Single> = (start..end)
            .into_par_iter()
            .map(|k| run_one(&prep, psi0, n_steps, seed, k))
            .collect();
        for s in batch {
            for o in 0..n_obs {
                for (t, v) in s.values[o].iter().enumerate() {
                    sum[o][t] += v;
                    sum2[o][t] += v * v;
                }
            }
            jumps += s.jumps;
            resampled += s.resampled;
        }
        start = end;
    }
    let n = n_traj as f64;
    let mean: Vec<Vec<f64>> = sum.iter().map(|row| row.iter().map(|v| v / n).collect()).collect();
    let stderr = sum2
        .iter()
        .zip(&mean)
        .map(|(s2, m)| {
            s2.iter()
                .zip(m)
                .map(|(q, mu)| {
                    if n_traj < 2 {
                        0.0
                    } else {
                        ((q - n * mu * mu) / (n - 1.0)).max(0.0).sqrt() / n.sqrt()
                    }
                })
                .collect()
        })
        .collect();
    Ok(TrajectoryResult { mean, stderr, n_traj, jumps, resampled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::master::Channel;
    use crate::dynamics::space::HilbertSpace;
    use crate::dynamics::sparse::{Factor, OpSum};

    const ONE: Complex64 = Complex64::new(1.0, 0.0);

    #[test]
    fn no_jumps_reproduces_unitary() {
        let space = HilbertSpace::spins(1).unwrap();
        let h = SparseOp::build(&space, &OpSum::pauli(0, 0).scale(ONE * 0.5));
        let model = OpenSystemModel { h, channels: vec![] };
        let psi0 = DVector::from_vec(vec![ONE, Complex64::new(0.0, 0.0)]);
        let sz = SparseOp::build(&space, &OpSum::pauli(0, 2));
        let grid: Vec<f64> = (0..10).map(|k| 0.3 * k as f64).collect();
        let r = sample_trajectories(&model, &psi0, &grid, &[sz], 5, 1).unwrap();
        for (t, v) in grid.iter().zip(&r.mean[0]) {
            // ⟨σ_z⟩ = −cos(t) starting from |g⟩
            assert!((v + t.cos()).abs() < 1e-12);
        }
        assert_eq!(r.jumps, 0);
    }

    #[test]
    fn decay_statistics() {
        let space = HilbertSpace::spins(1).unwrap();
        let sm = SparseOp::build(&space, &OpSum::single(ONE, Factor::Sm(0)));
        let sss = SparseOp::build(&space, &OpSum::single(ONE, Factor::Sss(0)));
        let gamma = 1.3;
        let model = OpenSystemModel { h: SparseOp::zeros(2), channels: vec![Channel::local("decay", &[gamma], vec![sm])] };
        let psi0 = DVector::from_vec(vec![Complex64::new(0.0, 0.0), ONE]);
        let grid: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
        let r = sample_trajectories(&model, &psi0, &grid, &[sss.clone()], 2000, 7).unwrap();
        for (k, t) in grid.iter().enumerate() {
            let exact = (-gamma * t).exp();
            assert!((r.mean[0][k] - exact).abs() <= 3.0 * r.stderr[0][k] + 1e-12, "t = {t}");
        }
        let again = sample_trajectories(&model, &psi0, &grid, &[sss], 2000, 7).unwrap();
        assert_eq!(r.mean, again.mean);
    }
}
