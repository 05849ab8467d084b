//! Sideband programs and the spin couplings they induce.
//!
//! A program assigns a complex Rabi frequency Ω^(i)_{α,l} to every spin
//! component α ∈ {x, y, z}, site i and phonon mode l. Eliminating the phonons
//! to second order gives, with Ω̃ = η_o Ω B_il,
//!
//! J^(i,j)_{αβ} = 2 Re Σ_l Ω̃^(i)_{α,l} Ω̃^(j)*_{β,l} / Δ_l
//! h^(i)_γ      = −2 Im Σ_l Ω̃^(i)_{α,l} Ω̃^(i)*_{β,l} / Δ_l   ((α, β, γ) cyclic)
//!
//! `compile_sidebands` inverts this map by damped least squares.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::phonons::PhononSpectrum;

/// Cyclic triples (α, β, γ) used by the local-field formula.
const CYCLIC: [(usize, usize, usize); 3] = [(1, 2, 0), (2, 0, 1), (0, 1, 2)];

/// Mode-matrix entries below this are treated as exact nodes.
const NODE_TOL: f64 = 1e-12;

/// Target 2-local Hamiltonian Σ J σσ + Σ h σ (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinNetworkSpec {
    pub n: usize,
    /// `j[pair_index(i, j)][α][β]` for i < j.
    pub j: Vec<[[f64; 3]; 3]>,
    /// `h[i][γ]`.
    pub h: Vec<[f64; 3]>,
}

/// Position of the pair (i, j), i < j, in the canonical pair list.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl SpinNetworkSpec {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            j: vec![[[0.0; 3]; 3]; n * n.saturating_sub(1) / 2],
            h: vec![[0.0; 3]; n],
        }
    }

    /// Sets the coupling of σ_α^(i) σ_β^(j); i > j is stored transposed.
    pub fn set_j(&mut self, i: usize, j: usize, a: usize, b: usize, v: f64) {
        assert!(i != j, "on-site terms belong in h");
        if i < j {
            self.j[pair_index(self.n, i, j)][a][b] = v;
        } else {
            self.j[pair_index(self.n, j, i)][b][a] = v;
        }
    }

    pub fn get_j(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        if i < j {
            self.j[pair_index(self.n, i, j)][a][b]
        } else {
            self.j[pair_index(self.n, j, i)][b][a]
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    /// Flattened entries: all J blocks in pair order, then all h.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.constraint_count());
        for m in &self.j {
            for row in m {
                v.extend_from_slice(row);
            }
        }
        for h in &self.h {
            v.extend_from_slice(h);
        }
        v
    }

    pub fn constraint_count(&self) -> usize {
        9 * self.j.len() + 3 * self.n
    }

    pub fn norm(&self) -> f64 {
        self.to_vec().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Frobenius distance between two specs of equal size.
    pub fn distance(&self, other: &Self) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.j.iter_mut().flatten().flatten().for_each(|x| *x *= s);
        out.h.iter_mut().flatten().for_each(|x| *x *= s);
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.j.len() != self.n * self.n.saturating_sub(1) / 2 || self.h.len() != self.n {
            return Err(invalid("spin network", "J/h arrays do not match N"));
        }
        if self.to_vec().iter().any(|x| !x.is_finite()) {
            return Err(invalid("spin network", "non-finite coupling"));
        }
        Ok(())
    }
}

/// Unknown and constraint counts of the inverse problem for N sites.
pub fn degrees_of_freedom(n: usize) -> (usize, usize) {
    (6 * n * n, 3 * (3 * n * n - n) / 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SidebandProgram {
    pub n: usize,
    /// Ω^(i)_{α,l}, see [`SidebandProgram::idx`].
    pub omega: Vec<Complex64>,
    pub delta_l: Vec<f64>,
    pub delta_gs: Vec<f64>,
    pub eta_o: f64,
    /// Mode matrix `b[(site, mode)]`.
    pub b: DMatrix<f64>,
}

impl SidebandProgram {
    pub fn zeros(n: usize, delta_l: Vec<f64>, eta_o: f64, b: DMatrix<f64>) -> Self {
        Self {
            n,
            omega: vec![Complex64::new(0.0, 0.0); 3 * n * n],
            delta_l,
            delta_gs: Vec::new(),
            eta_o,
            b,
        }
    }

    pub fn idx(&self, alpha: usize, site: usize, mode: usize) -> usize {
        (alpha * self.n + site) * self.n + mode
    }

    pub fn omega(&self, alpha: usize, site: usize, mode: usize) -> Complex64 {
        self.omega[self.idx(alpha, site, mode)]
    }

    /// Ω̃^(i)_{α,l} = η_o Ω B_il.
    pub fn omega_tilde(&self, alpha: usize, site: usize, mode: usize) -> Complex64 {
        self.omega(alpha, site, mode) * (self.eta_o * self.b[(site, mode)])
    }

    /// Σ |Ω|² over every component, site and mode.
    pub fn intensity(&self) -> f64 {
        self.omega.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_omega_tilde(&self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..3 {
            for i in 0..self.n {
                for l in 0..self.n {
                    m = m.max(self.omega_tilde(a, i, l).norm());
                }
            }
        }
        m
    }

    /// Entries with |Ω̃| ≥ Δ_l: (α, site, mode, |Ω̃|/|Δ_l|).
    pub fn adiabaticity_violations(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for a in 0..3 {
            for i in 0..self.n {
                for l in 0..self.n {
                    let r = self.omega_tilde(a, i, l).norm() / self.delta_l[l].abs();
                    if r >= 1.0 {
                        out.push((a, i, l, r));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if self.omega.len() != 3 * n * n {
            return Err(Error::DimensionMismatch { expected: 3 * n * n, got: self.omega.len() });
        }
        if self.delta_l.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.delta_l.len() });
        }
        if self.b.nrows() != n || self.b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.b.nrows() });
        }
        if self.delta_l.iter().any(|d| !(d.is_finite() && *d != 0.0)) {
            return Err(invalid("delta_l", "detunings must be finite and non-zero"));
        }
        if !(self.eta_o.is_finite() && self.eta_o > 0.0) {
            return Err(invalid("eta_o", "must be finite and positive"));
        }
        Ok(())
    }

    /// Structured-text form; complex numbers as `[re, im]`, Ω nested as [α][site][mode].
    pub fn to_json(&self) -> Value {
        let n = self.n;
        let omega: Vec<Vec<Vec<[f64; 2]>>> = (0..3)
            .map(|a| {
                (0..n)
                    .map(|i| (0..n).map(|l| {
                        let z = self.omega(a, i, l);
                        [z.re, z.im]
                    }).collect())
                    .collect()
            })
            .collect();
        let b: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|l| self.b[(i, l)]).collect()).collect();
        json!({
            "n": n,
            "eta_o": self.eta_o,
            "delta_l": self.delta_l,
            "delta_gs": self.delta_gs,
            "omega": omega,
            "b": b,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            eta_o: f64,
            delta_l: Vec<f64>,
            #[serde(default)]
            delta_gs: Vec<f64>,
            omega: Vec<Vec<Vec<[f64; 2]>>>,
            b: Vec<Vec<f64>>,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let n = raw.n;
        let shape_ok = raw.omega.len() == 3
            && raw.omega.iter().all(|s| s.len() == n && s.iter().all(|m| m.len() == n))
            && raw.b.len() == n
            && raw.b.iter().all(|r| r.len() == n);
        if !shape_ok {
            return Err(invalid("program", "omega must be 3 x N x N and b must be N x N"));
        }
        let mut p = Self::zeros(n, raw.delta_l, raw.eta_o, DMatrix::from_fn(n, n, |i, l| raw.b[i][l]));
        p.delta_gs = raw.delta_gs;
        for a in 0..3 {
            for i in 0..n {
                for l in 0..n {
                    let [re, im] = raw.omega[a][i][l];
                    let k = p.idx(a, i, l);
                    p.omega[k] = Complex64::new(re, im);
                }
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// Effective couplings induced by a program (exact evaluation).
pub fn forward_couplings(prog: &SidebandProgram) -> SpinNetworkSpec {
    let n = prog.n;
    let mut spec = SpinNetworkSpec::zeros(n);
    let mut wt = vec![Complex64::new(0.0, 0.0); 3 * n * n];
    for a in 0..3 {
        for i in 0..n {
            for l in 0..n {
                wt[prog.idx(a, i, l)] = prog.omega_tilde(a, i, l);
            }
        }
    }
    let at = |a: usize, i: usize, l: usize| wt[(a * n + i) * n + l];
    for i in 0..n {
        for j in i + 1..n {
            let p = pair_index(n, i, j);
            for a in 0..3 {
                for b in 0..3 {
                    let s: f64 = (0..n)
                        .map(|l| (at(a, i, l) * at(b, j, l).conj()).re / prog.delta_l[l])
                        .sum();
                    spec.j[p][a][b] = 2.0 * s;
                }
            }
        }
        for &(a, b, g) in &CYCLIC {
            let s: f64 = (0..n)
                .map(|l| (at(a, i, l) * at(b, i, l).conj()).im / prog.delta_l[l])
                .sum();
            spec.h[i][g] = -2.0 * s;
        }
    }
    spec
}

/// (Ω_x, Ω_y) from the circular components: Ω_x σ_x + Ω_y σ_y = Ω₊σ₊ + Ω₋σ₋.
pub fn xy_from_pm(plus: Complex64, minus: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    ((plus + minus) / 2.0, i * (plus - minus) / 2.0)
}

/// Inverse of [`xy_from_pm`].
pub fn pm_from_xy(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    (x - i * y, x + i * y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompileOptions {
    pub tol_rel: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Intensity regularizer weight in the first stage (normalized units).
    pub lambda_reg: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            tol_rel: 1e-6,
            restarts: 8,
            seed: 0,
            max_iter: 300,
            lambda_reg: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompileReport {
    pub program: SidebandProgram,
    pub residual_rel: f64,
    pub intensity: f64,
    /// Restart that produced the program.
    pub restart: usize,
    pub converged_restarts: usize,
}

/// Active real parameters of the normalized problem.
struct Layout {
    n: usize,
    /// For each (α, i, l): offset of (re, im) in the parameter vector.
    slot: Vec<Option<usize>>,
    /// Normalized intensity weights 1/ĉ_il² per parameter.
    weight: Vec<f64>,
    /// Δ_ref/Δ_l.
    kappa: Vec<f64>,
}

impl Layout {
    fn new(n: usize, b: &DMatrix<f64>, delta_l: &[f64]) -> Self {
        let cmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dref = delta_l.iter().map(|d| d.abs()).sum::<f64>() / n as f64;
        let mut slot = vec![None; 3 * n * n];
        let mut weight = Vec::new();
        for a in 0..3 {
            for i in 0..n {
                for l in 0..n {
                    let c = b[(i, l)].abs() / cmax;
                    if c > NODE_TOL {
                        slot[(a * n + i) * n + l] = Some(weight.len());
                        let w = 1.0 / (c * c);
                        weight.push(w);
                        weight.push(w);
                    }
                }
            }
        }
        let kappa = delta_l.iter().map(|d| dref / d).collect();
        Self { n, slot, weight, kappa }
    }

    fn len(&self) -> usize {
        self.weight.len()
    }

    fn get(&self, x: &[f64], a: usize, i: usize, l: usize) -> Option<(usize, f64, f64)> {
        self.slot[(a * self.n + i) * self.n + l].map(|k| (k, x[k], x[k + 1]))
    }

    /// Residual forward(x) − t and, row by row, the sparse Jacobian.
    fn eval(&self, x: &[f64], t: &[f64], mut jac: Option<&mut Vec<Vec<(usize, f64)>>>) -> DVector<f64> {
        let n = self.n;
        let mut r = DVector::from_iterator(t.len(), t.iter().map(|v| -v));
        if let Some(rows) = jac.as_deref_mut() {
            rows.resize_with(t.len(), Vec::new);
            rows.iter_mut().for_each(Vec::clear);
        }
        let mut row = 0;
        for i in 0..n {
            for j in i + 1..n {
                for a in 0..3 {
                    for b in 0..3 {
                        for l in 0..n {
                            let (Some((kz, zr, zi)), Some((kw, wr, wi))) =
                                (self.get(x, a, i, l), self.get(x, b, j, l))
                            else {
                                continue;
                            };
                            let k = 2.0 * self.kappa[l];
                            r[row] += k * (zr * wr + zi * wi);
                            if let Some(rows) = jac.as_deref_mut() {
                                rows[row].extend([(kz, k * wr), (kz + 1, k * wi), (kw, k * zr), (kw + 1, k * zi)]);
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
        for i in 0..n {
            for &(a, b, _) in &CYCLIC {
                for l in 0..n {
                    let (Some((kz, zr, zi)), Some((kw, wr, wi))) = (self.get(x, a, i, l), self.get(x, b, i, l))
                    else {
                        continue;
                    };
                    let k = -2.0 * self.kappa[l];
                    r[row] += k * (zi * wr - zr * wi);
                    if let Some(rows) = jac.as_deref_mut() {
                        rows[row].extend([(kz, -k * wi), (kz + 1, k * wr), (kw, k * zi), (kw + 1, -k * zr)]);
                    }
                }
                row += 1;
            }
        }
        r
    }
}

/// Levenberg–Marquardt on ½‖r(x)‖² + ½λ Σ w x².
fn levenberg_marquardt(lay: &Layout, t: &[f64], x: &mut DVector<f64>, lambda: f64, max_iter: usize, stop: f64) {
    let p = lay.len();
    let w = DVector::from_column_slice(&lay.weight);
    let cost = |r: &DVector<f64>, x: &DVector<f64>| {
        0.5 * r.norm_squared() + 0.5 * lambda * x.iter().zip(w.iter()).map(|(v, w)| w * v * v).sum::<f64>()
    };
    let mut rows = Vec::new();
    let mut rows_new = Vec::new();
    let mut r = lay.eval(x.as_slice(), t, Some(&mut rows));
    let mut f = cost(&r, x);
    let mut mu = -1.0;
    let mut nu = 2.0;
    let mut stalled = 0;
    for _ in 0..max_iter {
        if r.norm() < stop {
            break;
        }
        let mut a = DMatrix::<f64>::zeros(p, p);
        let mut g = DVector::<f64>::zeros(p);
        for (row, res) in rows.iter().zip(r.iter()) {
            for &(c1, v1) in row {
                g[c1] += v1 * res;
                for &(c2, v2) in row {
                    a[(c1, c2)] += v1 * v2;
                }
            }
        }
        for k in 0..p {
            a[(k, k)] += lambda * w[k];
            g[k] += lambda * w[k] * x[k];
        }
        if g.amax() < 1e-30 {
            break;
        }
        if mu < 0.0 {
            mu = 1e-3 * (0..p).map(|k| a[(k, k)]).fold(0.0, f64::max).max(1e-12);
        }
        for k in 0..p {
            a[(k, k)] += mu;
        }
        let Some(chol) = a.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let step = -chol.solve(&g);
        if step.norm() < 1e-15 * (x.norm() + 1e-15) {
            break;
        }
        let x_new = &*x + &step;
        let r_new = lay.eval(x_new.as_slice(), t, Some(&mut rows_new));
        let f_new = cost(&r_new, &x_new);
        let predicted = 0.5 * step.dot(&(mu * &step - &g));
        let rho = (f - f_new) / predicted;
        if rho > 0.0 && f_new.is_finite() {
            stalled = if f - f_new < 1e-12 * f { stalled + 1 } else { 0 };
            *x = x_new;
            r = r_new;
            std::mem::swap(&mut rows, &mut rows_new);
            f = f_new;
            mu *= f64::max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if stalled >= 3 {
                break;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if mu > 1e30 {
                break;
            }
        }
    }
}

/// Zeroes amplitudes below 1e-12 of the largest |Ω̃|. The regularizer pushes unused
/// sidebands toward zero without reaching it, leaving subnormal values that are
/// physically meaningless and very slow to multiply.
fn flush_negligible(prog: &mut SidebandProgram) {
    let cut = 1e-12 * prog.max_omega_tilde();
    for a in 0..3 {
        for i in 0..prog.n {
            for l in 0..prog.n {
                if prog.omega_tilde(a, i, l).norm() < cut {
                    let k = prog.idx(a, i, l);
                    prog.omega[k] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}

/// Finds a minimal-intensity program reproducing `target`.
pub fn compile_sidebands(
    target: &SpinNetworkSpec,
    spectrum: &PhononSpectrum,
    delta_l: &[f64],
    eta_o: f64,
    opts: &CompileOptions,
) -> Result<CompileReport> {
    target.validate()?;
    let n = target.n;
    if spectrum.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spectrum.n() });
    }
    let zero = SidebandProgram::zeros(n, delta_l.to_vec(), eta_o, spectrum.b.clone());
    zero.validate()?;
    let t_norm = target.norm();
    if t_norm == 0.0 {
        return Ok(CompileReport {
            program: zero,
            residual_rel: 0.0,
            intensity: 0.0,
            restart: 0,
            converged_restarts: opts.restarts.max(1),
        });
    }
    let lay = Layout::new(n, &spectrum.b, delta_l);
    let t: Vec<f64> = target.to_vec().iter().map(|v| v / t_norm).collect();
    let dref = delta_l.iter().map(|d| d.abs()).sum::<f64>() / n as f64;
    // Ω̃ = √(‖T‖ Δ_ref) · x, so Ω = Ω̃ / (η_o B_il)
    let unscale = (t_norm * dref).sqrt();

    let build = |x: &DVector<f64>| {
        let mut prog = zero.clone();
        for a in 0..3 {
            for i in 0..n {
                for l in 0..n {
                    if let Some((_, re, im)) = lay.get(x.as_slice(), a, i, l) {
                        let c = eta_o * spectrum.b[(i, l)];
                        let k = prog.idx(a, i, l);
                        prog.omega[k] = Complex64::new(re, im) * (unscale / c);
                    }
                }
            }
        }
        prog
    };

    let runs: Vec<(usize, f64, f64, SidebandProgram)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            let p = lay.len();
            let s = 1.0 / (n as f64).sqrt();
            let mut x = DVector::from_fn(p, |_, _| {
                let g: f64 = StandardNormal.sample(&mut rng);
                s * g
            });
            levenberg_marquardt(&lay, &t, &mut x, opts.lambda_reg, opts.max_iter, 0.0);
            levenberg_marquardt(&lay, &t, &mut x, 0.0, opts.max_iter, 1e-14);
            let mut prog = build(&x);
            flush_negligible(&mut prog);
            let res = forward_couplings(&prog).distance(target) / t_norm;
            let inten = prog.intensity();
            (k, res, inten, prog)
        })
        .collect();

    let converged = runs.iter().filter(|r| r.1 <= opts.tol_rel).count();
    let best = runs
        .iter()
        .min_by(|a, b| {
            let ca = a.1 <= opts.tol_rel;
            let cb = b.1 <= opts.tol_rel;
            cb.cmp(&ca)
                .then_with(|| {
                    if ca {
                        a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal)
                    } else {
                        a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal)
                    }
                })
                .then(a.0.cmp(&b.0))
        })
        .expect("at least one restart");
    if converged == 0 {
        return Err(Error::NoConvergence { restarts: runs.len(), best_residual: best.1 });
    }
    Ok(CompileReport {
        program: best.3.clone(),
        residual_rel: best.1,
        intensity: best.2,
        restart: best.0,
        converged_restarts: converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SidebandKind {
    Plus,
    Minus,
    Z,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SidebandLine {
    pub site: usize,
    pub kind: SidebandKind,
    pub mode: usize,
    /// Drive frequency ν (rad/s).
    pub nu: f64,
}

/// Frequency table ν^(i)_{s,l} for every site, sideband kind and mode.
///
/// The σ_z lines do not depend on the site, so they are checked once per mode;
/// the σ± lines must be pairwise separated by at least `min_gap`, and each
/// site's band must clear its neighbours (spacing above the phonon bandwidth).
pub fn assign_sideband_frequencies(
    prog: &SidebandProgram,
    spectrum: &PhononSpectrum,
    min_gap: f64,
) -> Result<Vec<SidebandLine>> {
    let n = prog.n;
    if prog.delta_gs.len() != n {
        return Err(invalid("delta_gs", format!("need {n} Zeeman splittings, got {}", prog.delta_gs.len())));
    }
    if spectrum.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: spectrum.n() });
    }
    let bw = spectrum.bandwidth();
    for w in prog.delta_gs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(invalid("delta_gs", "Zeeman profile must be strictly increasing"));
        }
        if w[1] - w[0] <= bw {
            return Err(Error::FrequencyCollision(format!(
                "Zeeman step {:e} does not exceed the phonon bandwidth {:e}; sidebands of neighbouring sites overlap",
                w[1] - w[0],
                bw
            )));
        }
    }
    let mut lines = Vec::with_capacity(3 * n * n);
    for i in 0..n {
        for l in 0..n {
            let base = -spectrum.eps[l] + prog.delta_l[l];
            lines.push(SidebandLine { site: i, kind: SidebandKind::Plus, mode: l, nu: prog.delta_gs[i] + base });
            lines.push(SidebandLine { site: i, kind: SidebandKind::Minus, mode: l, nu: -prog.delta_gs[i] + base });
            lines.push(SidebandLine { site: i, kind: SidebandKind::Z, mode: l, nu: base });
        }
    }
    let mut pm: Vec<&SidebandLine> = lines.iter().filter(|s| s.kind != SidebandKind::Z).collect();
    let mut zl: Vec<&SidebandLine> = lines.iter().filter(|s| s.kind == SidebandKind::Z && s.site == 0).collect();
    for set in [&mut pm, &mut zl] {
        set.sort_by(|a, b| a.nu.partial_cmp(&b.nu).unwrap_or(Ordering::Equal));
        for w in set.windows(2) {
            if w[1].nu - w[0].nu < min_gap {
                return Err(Error::FrequencyCollision(format!(
                    "(site {}, {:?}, mode {}) and (site {}, {:?}, mode {}) are {:e} apart, below {:e}",
                    w[0].site + 1,
                    w[0].kind,
                    w[0].mode + 1,
                    w[1].site + 1,
                    w[1].kind,
                    w[1].mode + 1,
                    w[1].nu - w[0].nu,
                    min_gap
                )));
            }
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonons::{phonon_spectrum, MechanicalChain};
    use rand::Rng;

    fn spectrum(n: usize) -> PhononSpectrum {
        phonon_spectrum(&MechanicalChain::new(n, 1.0, 10.0, 5.0, 1.0).unwrap()).unwrap()
    }

    fn random_program(n: usize, seed: u64) -> SidebandProgram {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = spectrum(n);
        let mut p = SidebandProgram::zeros(n, (0..n).map(|l| 0.7 + 0.1 * l as f64).collect(), 0.3, s.b);
        for z in p.omega.iter_mut() {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        p
    }

    /// Dense Σ_l S_l S_l†/Δ_l with S_l = Σ Ω̃ σ, projected on Paulis.
    fn second_order_oracle(p: &SidebandProgram) -> SpinNetworkSpec {
        let n = p.n;
        let dim = 1usize << n;
        let paulis = crate::test_util::pauli_ops(n);
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for l in 0..n {
            let mut s = DMatrix::<Complex64>::zeros(dim, dim);
            for i in 0..n {
                for a in 0..3 {
                    s += &paulis[i][a] * p.omega_tilde(a, i, l);
                }
            }
            h += &s * s.adjoint() / Complex64::new(p.delta_l[l], 0.0);
        }
        let mut spec = SpinNetworkSpec::zeros(n);
        let d = dim as f64;
        for i in 0..n {
            for g in 0..3 {
                spec.h[i][g] = (&paulis[i][g] * &h).trace().re / d;
            }
            for j in i + 1..n {
                for a in 0..3 {
                    for b in 0..3 {
                        spec.set_j(i, j, a, b, (&paulis[i][a] * &paulis[j][b] * &h).trace().re / d);
                    }
                }
            }
        }
        spec
    }

    #[test]
    fn pair_indexing() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(pair_index(n, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn zero_program_gives_zero_couplings() {
        let s = spectrum(3);
        let p = SidebandProgram::zeros(3, vec![1.0; 3], 0.1, s.b);
        assert_eq!(forward_couplings(&p).norm(), 0.0);
    }

    #[test]
    fn single_mode_hand_evaluation() {
        let n = 2;
        let s = spectrum(n);
        let (om, d, eta) = (0.8, 1.7, 0.2);
        let mut p = SidebandProgram::zeros(n, vec![d, d], eta, s.b.clone());
        let (k1, k2) = (p.idx(0, 0, 0), p.idx(0, 1, 0));
        p.omega[k1] = Complex64::new(om, 0.0);
        p.omega[k2] = Complex64::new(om, 0.0);
        let spec = forward_couplings(&p);
        let expect = 2.0 * eta * eta * om * om * s.b[(0, 0)] * s.b[(1, 0)] / d;
        let mut want = SpinNetworkSpec::zeros(n);
        want.set_j(0, 1, 0, 0, expect);
        assert!(spec.distance(&want) < 1e-15);
    }

    #[test]
    fn real_amplitudes_give_no_field() {
        let mut p = random_program(3, 4);
        p.omega.iter_mut().for_each(|z| z.im = 0.0);
        let spec = forward_couplings(&p);
        assert!(spec.h.iter().flatten().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn forward_map_matches_second_order_hamiltonian() {
        for n in 1..=3 {
            let p = random_program(n, 10 + n as u64);
            let f = forward_couplings(&p);
            let o = second_order_oracle(&p);
            assert!(f.distance(&o) < 1e-12 * (1.0 + o.norm()), "n = {n}");
        }
    }

    #[test]
    fn scaling_is_quadratic() {
        let p = random_program(3, 1);
        let mut q = p.clone();
        q.omega.iter_mut().for_each(|z| *z *= 1.7);
        let a = forward_couplings(&p).scaled(1.7 * 1.7);
        let b = forward_couplings(&q);
        assert!(a.distance(&b) < 1e-13 * b.norm());
    }

    #[test]
    fn circular_components() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(xy_from_pm(one, one), (one, Complex64::new(0.0, 0.0)));
        assert_eq!(xy_from_pm(one, -one), (Complex64::new(0.0, 0.0), Complex64::i()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = Complex64::new(rng.random(), rng.random());
            let m = Complex64::new(rng.random(), rng.random());
            let (x, y) = xy_from_pm(p, m);
            let (p2, m2) = pm_from_xy(x, y);
            assert!((p - p2).norm() < 1e-15 && (m - m2).norm() < 1e-15);
        }
    }

    #[test]
    fn dof_counts() {
        assert_eq!(degrees_of_freedom(1), (6, 3));
        assert_eq!(degrees_of_freedom(2), (24, 15));
        for n in 1..=64 {
            let (u, c) = degrees_of_freedom(n);
            assert!(u >= c);
            assert_eq!(c, SpinNetworkSpec::zeros(n).constraint_count());
        }
    }

    #[test]
    fn zero_target_compiles_to_zero() {
        let s = spectrum(3);
        let r = compile_sidebands(&SpinNetworkSpec::zeros(3), &s, &[1.0; 3], 0.1, &CompileOptions::default()).unwrap();
        assert_eq!(r.residual_rel, 0.0);
        assert_eq!(r.program.intensity(), 0.0);
    }

    #[test]
    fn compiles_random_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for n in [1, 3, 4] {
            let s = spectrum(n);
            let mut t = SpinNetworkSpec::zeros(n);
            t.j.iter_mut().flatten().flatten().for_each(|v| *v = rng.random_range(-1.0..1.0));
            t.h.iter_mut().flatten().for_each(|v| *v = rng.random_range(-1.0..1.0));
            let r = compile_sidebands(&t, &s, &vec![50.0; n], 0.1, &CompileOptions::default()).unwrap();
            assert!(r.residual_rel < 1e-6, "n = {n}: {}", r.residual_rel);
            assert!(forward_couplings(&r.program).distance(&t) <= 1e-6 * t.norm());
        }
    }

    #[test]
    fn json_round_trip() {
        let mut p = random_program(3, 8);
        p.delta_gs = vec![1.0, 2.0, 3.0];
        let q = SidebandProgram::from_json(&p.to_json()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn frequency_table() {
        let s = spectrum(4);
        let mut p = SidebandProgram::zeros(4, vec![0.01; 4], 0.1, s.b.clone());
        let step = 3.0 * s.bandwidth();
        p.delta_gs = (0..4).map(|i| 100.0 + step * i as f64).collect();
        let lines = assign_sideband_frequencies(&p, &s, 1e-6).unwrap();
        assert_eq!(lines.len(), 48);
        let mut pm: Vec<f64> = lines.iter().filter(|l| l.kind != SidebandKind::Z).map(|l| l.nu).collect();
        pm.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(pm.windows(2).all(|w| w[1] > w[0]));
        p.delta_gs = (0..4).map(|i| 100.0 + 0.5 * s.bandwidth() * i as f64).collect();
        assert!(matches!(assign_sideband_frequencies(&p, &s, 1e-6), Err(Error::FrequencyCollision(_))));
        let s1 = spectrum(1);
        let mut p1 = SidebandProgram::zeros(1, vec![0.01], 0.1, s1.b.clone());
        p1.delta_gs = vec![5.0];
        assert_eq!(assign_sideband_frequencies(&p1, &s1, 1e-6).unwrap().len(), 3);
    }

    #[test]
    fn two_site_heisenberg_is_unreachable() {
        // With h = 0 each site's components span an isotropic subspace of a
        // 4-dimensional symplectic space, so rank(J) <= 2 for two sites.
        let s = spectrum(2);
        let mut t = SpinNetworkSpec::zeros(2);
        for a in 0..3 {
            t.set_j(0, 1, a, a, 1.0);
        }
        let r = compile_sidebands(&t, &s, &[1.0; 2], 0.1, &CompileOptions::default());
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
        t.set_j(0, 1, 2, 2, 0.0);
        let r = compile_sidebands(&t, &s, &[1.0; 2], 0.1, &CompileOptions::default()).unwrap();
        assert!(r.residual_rel < 1e-6);
    }
}
