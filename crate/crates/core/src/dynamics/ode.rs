//! Adaptive Dormand–Prince 5(4) for complex linear systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; 0 picks one from the grid spacing.
    pub h0: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h0: 0.0, h_min: 1e-14, max_steps: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// b − b̂ (fifth minus embedded fourth order).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) and calls `observe(k, t_k, y)` at every grid point.
///
/// The first grid point is the initial time; steps are clipped to land on the grid.
pub fn dopri5<F, O>(mut f: F, y0: &[Complex64], grid: &[f64], opts: &OdeOptions, mut observe: O) -> Result<OdeStats>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(usize, f64, &[Complex64]),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    if grid.is_empty() {
        return Ok(stats);
    }
    let mut y = y0.to_vec();
    let mut t = grid[0];
    observe(0, t, &y);
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let span = grid.last().unwrap() - grid[0];
    let mut h = if opts.h0 > 0.0 {
        opts.h0
    } else {
        let dt = if grid.len() > 1 { grid[1] - grid[0] } else { span };
        let ynorm = y.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let fnorm = k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
        let guess = if fnorm > 0.0 { 0.01 * ynorm / fnorm } else { dt };
        guess.min(dt).max(opts.h_min)
    };
    let mut fac_old: f64 = 1e-4;
    for (gi, &t_target) in grid.iter().enumerate().skip(1) {
        while t < t_target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepUnderflow { t, h });
            }
            let last = t + h >= t_target;
            let hs = if last { t_target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += kj[i] * (hs * a);
                        }
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * hs, &tmp, &mut k[s]);
                stats.evaluations += 1;
            }
            // stage 7 was evaluated at the fifth-order solution (FSAL)
            y_new.copy_from_slice(&tmp);
            let mut err = 0.0;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if E[j] != 0.0 {
                        e += kj[i] * E[j];
                    }
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                let r = (e * hs).norm() / sc;
                err += r * r;
            }
            let err = (err / n as f64).sqrt();
            if err <= 1.0 || hs <= opts.h_min {
                t = if last { t_target } else { t + hs };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                stats.accepted += 1;
                // PI step control (Hairer's dopri5 defaults)
                let e = err.max(1e-10);
                let fac = (0.9 * e.powf(-0.17) * fac_old.powf(0.04)).clamp(0.2, 10.0);
                fac_old = e.max(1e-4);
                if !last || hs >= h {
                    h = hs * fac;
                }
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).max(0.2);
                if h < opts.h_min {
                    return Err(Error::StepUnderflow { t, h });
                }
            }
        }
        observe(gi, t, &y);
    }
    Ok(stats)
}
