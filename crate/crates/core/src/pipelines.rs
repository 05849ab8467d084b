//! End-to-end runs shared by the command-line tool and the acceptance tests:
//! state transfer through the full spin–phonon model, FORT depolarization of a
//! transfer chain, and helpers to assemble the phonon-chain spectra they use.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::compiler::{compile_sidebands, forward_couplings, CompileOptions, SidebandProgram};
use crate::dynamics::dense::{eigh, propagator_from};
use crate::dynamics::observables::{mean_phonon_number, site_density, site_density_dm, TimeSeries};
use crate::dynamics::ode::OdeStats;
use crate::dynamics::{
    build_effective_spin_hamiltonian, build_full_hamiltonian, evolve_master_with, evolve_unitary_with, sample_trajectories, Factor, FullModelOptions, HilbertSpace, OdeOptions,
    OpSum, OpenSystemModel, Schedule, SparseOp,
};
use crate::error::{invalid, Result};
use crate::models::qst::qst_chain;
use crate::phonons::{phonon_spectrum, MechanicalChain, PhononSpectrum};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Natural-unit chain of `n` atoms whose smallest mode gap equals `min_gap`;
/// `w_t` fixes the trap frequency (only frequency differences enter the dynamics).
pub fn chain_with_min_gap(n: usize, w_t: f64, min_gap: f64) -> Result<PhononSpectrum> {
    if n < 2 {
        return phonon_spectrum(&MechanicalChain::new(n, 1.0, w_t, 0.0, 1.0)?);
    }
    if !(min_gap > 0.0 && w_t > 0.0) {
        return Err(invalid("min_gap", "gap and trap frequency must be positive"));
    }
    let gap = |g: f64| -> Result<f64> { Ok(phonon_spectrum(&MechanicalChain::new(n, 1.0, w_t, g, 1.0)?)?.min_spacing()) };
    let (mut lo, mut hi) = (0.0, 1.0);
    while gap(hi)? < min_gap {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(invalid("min_gap", "unreachable mode gap"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < min_gap {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    phonon_spectrum(&MechanicalChain::new(n, 1.0, w_t, hi, 1.0)?)
}

/// Input state of the first spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QstInput {
    /// |s⟩
    Excited,
    /// (|g⟩ − |s⟩)/√2
    Superposition,
}

impl QstInput {
    fn amplitudes(self) -> (Complex64, Complex64) {
        match self {
            QstInput::Excited => (Complex64::new(0.0, 0.0), ONE),
            QstInput::Superposition => {
                let a = std::f64::consts::FRAC_1_SQRT_2;
                (Complex64::new(a, 0.0), Complex64::new(-a, 0.0))
            }
        }
    }
}

/// Full-model transfer parameters, all frequencies in units of Δ_l.
#[derive(Clone, Debug, PartialEq)]
pub struct FullQstConfig {
    pub n: usize,
    /// Sideband detuning Δ_l (rad/s), equal for every mode.
    pub delta_l: f64,
    /// Δ_l divided by the smallest phonon-mode gap.
    pub spacing_ratio: f64,
    /// max |Ω̃| divided by Δ_l.
    pub drive_ratio: f64,
    /// Trap frequency in units of Δ_l.
    pub trap_ratio: f64,
    pub eta_o: f64,
    pub n_max: usize,
    pub total_cap: Option<usize>,
    pub samples: usize,
    /// Final time in units of the effective transfer time π/(2α).
    pub t_final: f64,
    pub input: QstInput,
    pub keep_offresonant: bool,
    pub ode: OdeOptions,
    pub compile: CompileOptions,
}

impl Default for FullQstConfig {
    fn default() -> Self {
        Self {
            n: 6,
            delta_l: 1.0,
            spacing_ratio: 0.05,
            drive_ratio: 0.03,
            trap_ratio: 1000.0,
            eta_o: 0.1,
            n_max: 3,
            total_cap: Some(3),
            samples: 221,
            t_final: 1.1,
            input: QstInput::Excited,
            keep_offresonant: true,
            ode: OdeOptions { rtol: 1e-8, atol: 1e-10, ..OdeOptions::default() },
            compile: CompileOptions::default(),
        }
    }
}

impl FullQstConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.n) {
            return Err(invalid("n", format!("chain length must lie in 2..=8, got {}", self.n)));
        }
        for (name, v) in [("spacing_ratio", self.spacing_ratio), ("drive_ratio", self.drive_ratio)] {
            if !(v > 0.0 && v <= 0.1) {
                return Err(invalid(name, format!("must lie in (0, 0.1] for the hierarchy, got {v}")));
            }
        }
        if !(self.delta_l > 0.0 && self.trap_ratio > 0.0 && self.eta_o > 0.0) {
            return Err(invalid("delta_l", "delta_l, trap_ratio and eta_o must be positive"));
        }
        if self.samples < 2 || !(self.t_final > 0.0) {
            return Err(invalid("samples", "need at least two samples and a positive final time"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FullQstResult {
    /// time, fidelity, fidelity_effective, phonons_total, n_1..n_N, sz_1..sz_N, sz_eff_1..sz_eff_N
    pub series: TimeSeries,
    pub alpha: f64,
    pub t_transfer: f64,
    pub final_fidelity: f64,
    pub final_fidelity_effective: f64,
    /// Largest sampled fidelity and its time: the full model's own transfer time.
    pub peak_fidelity: f64,
    pub peak_time: f64,
    pub max_phonon: f64,
    pub compile_residual: f64,
    pub program: SidebandProgram,
    pub spectrum: PhononSpectrum,
    pub dim: usize,
    pub stats: OdeStats,
    pub wall_seconds: f64,
}

/// Compiles the transfer chain onto the phonon modes and integrates the
/// interaction-picture spin–phonon dynamics from |ψ_in⟩|g…g⟩|vac⟩.
pub fn run_full_qst(cfg: &FullQstConfig) -> Result<FullQstResult> {
    let start = Instant::now();
    cfg.validate()?;
    let n = cfg.n;
    let d = cfg.delta_l;
    let spectrum = chain_with_min_gap(n, cfg.trap_ratio * d, d / cfg.spacing_ratio)?;
    let unit = qst_chain(n, 1.0)?;
    let deltas = vec![d; n];
    let report = compile_sidebands(&unit, &spectrum, &deltas, cfg.eta_o, &cfg.compile)?;
    // J ∝ Ω²: scale the unit-α program until max |Ω̃| = drive_ratio·Δ_l
    let s = cfg.drive_ratio * d / report.program.max_omega_tilde();
    let alpha = s * s;
    let mut program = report.program.clone();
    program.omega.iter_mut().for_each(|z| *z *= s);
    let effective = forward_couplings(&program);

    let space = HilbertSpace::new(n, n, cfg.n_max, cfg.total_cap, crate::dynamics::space::DEFAULT_DIM_CAP)?;
    let h = build_full_hamiltonian(&program, &spectrum, &space, FullModelOptions { keep_offresonant: cfg.keep_offresonant })?;
    let (ag, as_) = cfg.input.amplitudes();
    let mut psi0 = DVector::zeros(space.dim());
    let vac = vec![0u8; n];
    psi0[space.join(0, &vac).expect("vacuum is in the space")] = ag;
    psi0[space.join(1, &vac).expect("vacuum is in the space")] = as_;

    let t_transfer = std::f64::consts::PI / (2.0 * alpha);
    let t_end = cfg.t_final * t_transfer;
    let grid: Vec<f64> = (0..cfg.samples).map(|k| t_end * k as f64 / (cfg.samples - 1) as f64).collect();

    // effective spin model on the same grid, dense
    let spin_space = HilbertSpace::spins(n)?;
    let h_eff = build_effective_spin_hamiltonian(&effective, &spin_space)?.to_dense();
    let (vals, vecs) = eigh(&h_eff);
    let mut psi_eff0 = DVector::zeros(spin_space.dim());
    psi_eff0[0] = ag;
    psi_eff0[1] = as_;
    let target_site = n - 1;
    // the ideal transfer maps |s_1⟩ to e^{iφ}|s_N⟩; compare against the phase-corrected input
    let amp = propagator_from(&vals, &vecs, t_transfer)[(1 << target_site, 1)];
    let phase = if amp.norm() > 0.0 { amp / amp.norm() } else { ONE };
    let target = DVector::from_vec(vec![ag, as_ * phase]);
    let fid = |rho: &DMatrix<Complex64>| target.dotc(&(rho * &target)).re;

    let mut names: Vec<String> = vec!["fidelity".into(), "fidelity_effective".into(), "phonons_total".into()];
    names.extend((1..=n).map(|l| format!("n_{l}")));
    names.extend((1..=n).map(|i| format!("sz_{i}")));
    names.extend((1..=n).map(|i| format!("sz_eff_{i}")));
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut series = TimeSeries::new(&name_refs);
    let mut max_phonon: f64 = 0.0;

    let stats = evolve_unitary_with(Schedule::TimeDependent(&h), &psi0, &grid, &cfg.ode, |_, t, psi| {
        let mut row = Vec::with_capacity(3 + 3 * n);
        let psi_eff = propagator_from(&vals, &vecs, t) * &psi_eff0;
        let rho_n = site_density(&space, psi, target_site);
        let rho_eff = site_density(&spin_space, &psi_eff, target_site);
        let phonons: Vec<f64> = (0..n).map(|l| mean_phonon_number(&space, psi, l).unwrap_or(f64::NAN)).collect();
        let total: f64 = phonons.iter().sum();
        max_phonon = max_phonon.max(total);
        row.push(fid(&rho_n));
        row.push(fid(&rho_eff));
        row.push(total);
        row.extend(phonons);
        for i in 0..n {
            let r = site_density(&space, psi, i);
            row.push(r[(1, 1)].re - r[(0, 0)].re);
        }
        for i in 0..n {
            let r = site_density(&spin_space, &psi_eff, i);
            row.push(r[(1, 1)].re - r[(0, 0)].re);
        }
        series.push(t, &row);
    })?;
    let final_fidelity = *series.column("fidelity").and_then(|c| c.last()).unwrap_or(&f64::NAN);
    let final_fidelity_effective = *series.column("fidelity_effective").and_then(|c| c.last()).unwrap_or(&f64::NAN);
    let (peak_time, peak_fidelity) = series
        .column("fidelity")
        .map(|c| c.iter().zip(&series.time).fold((f64::NAN, f64::NEG_INFINITY), |a, (&f, &t)| if f > a.1 { (t, f) } else { a }))
        .unwrap_or((f64::NAN, f64::NAN));
    Ok(FullQstResult {
        series,
        alpha,
        t_transfer,
        final_fidelity,
        final_fidelity_effective,
        peak_fidelity,
        peak_time,
        max_phonon,
        compile_residual: report.residual_rel,
        program,
        spectrum,
        dim: space.dim(),
        stats,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Dissipative transfer chain with local FORT depolarization.
#[derive(Clone, Debug, PartialEq)]
pub struct FortConfig {
    pub n: usize,
    /// Chain scale α (rad/s); the transfer time is π/(2α).
    pub alpha: f64,
    /// γ_FORT / α, equal on every site.
    pub gamma_ratio: f64,
    /// Final time in units of 1/γ_FORT.
    pub t_final: f64,
    pub samples: usize,
    pub ode: OdeOptions,
}

impl Default for FortConfig {
    fn default() -> Self {
        Self { n: 6, alpha: 1.0, gamma_ratio: 0.02, t_final: 8.0, samples: 401, ode: OdeOptions { rtol: 1e-8, atol: 1e-11, ..OdeOptions::default() } }
    }
}

#[derive(Clone, Debug)]
pub struct FortResult {
    /// time, fidelity_single, fidelity_first, fidelity_last, trace_drift
    pub series: TimeSeries,
    pub gamma: f64,
    pub t_transfer: f64,
    pub final_fidelity: f64,
    /// Fidelity of the last site at the transfer time.
    pub transfer_fidelity: f64,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub stats: OdeStats,
    pub wall_seconds: f64,
}

impl FortConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=10).contains(&self.n) {
            return Err(invalid("n", "chain length must lie in 2..=10 for the dense master equation"));
        }
        if !(self.alpha > 0.0 && self.gamma_ratio > 0.0 && self.t_final > 0.0) || self.samples < 2 {
            return Err(invalid("fort", "alpha, gamma_ratio and t_final must be positive, samples >= 2"));
        }
        Ok(())
    }
}

fn fort_model(cfg: &FortConfig) -> Result<(OpenSystemModel, Vec<f64>, f64)> {
    cfg.validate()?;
    let n = cfg.n;
    let gamma = cfg.gamma_ratio * cfg.alpha;
    let space = HilbertSpace::spins(n)?;
    let h = build_effective_spin_hamiltonian(&qst_chain(n, cfg.alpha)?, &space)?;
    let channels = crate::dynamics::fort_channels(&space, &vec![gamma; n])?;
    let t_end = cfg.t_final / gamma;
    let grid = (0..cfg.samples).map(|k| t_end * k as f64 / (cfg.samples - 1) as f64).collect();
    Ok((OpenSystemModel { h, channels }, grid, gamma))
}

/// Transfer chain plus depolarization, ρ0 = |s⟩⟨s| ⊗ |g…g⟩⟨g…g|, solved with the
/// master equation; fidelities are ⟨s|ρ_i|s⟩ on the first and last site and for
/// a lone atom under the same channels.
pub fn run_fort_qst(cfg: &FortConfig) -> Result<FortResult> {
    let start = Instant::now();
    let (model, grid, gamma) = fort_model(cfg)?;
    let n = cfg.n;
    let mut rho0 = DMatrix::zeros(model.dim(), model.dim());
    rho0[(1, 1)] = ONE;
    let mut series = TimeSeries::new(&["fidelity_single", "fidelity_first", "fidelity_last", "trace_drift"]);
    let diag = evolve_master_with(&model, &rho0, &grid, &cfg.ode, |_, t, rho| {
        let first = site_density_dm(rho, 0)[(1, 1)].re;
        let last = site_density_dm(rho, n - 1)[(1, 1)].re;
        // a lone atom relaxes as ½(1 + e^{−2γt})
        let single = 0.5 * (1.0 + (-2.0 * gamma * t).exp());
        series.push(t, &[single, first, last, (rho.trace().re - 1.0).abs()]);
    })?;

    // transfer-time fidelity on the same model, one short run
    let t_transfer = std::f64::consts::PI / (2.0 * cfg.alpha);
    let mut transfer_fidelity = f64::NAN;
    evolve_master_with(&model, &rho0, &[0.0, t_transfer], &cfg.ode, |k, _, rho| {
        if k == 1 {
            transfer_fidelity = site_density_dm(rho, n - 1)[(1, 1)].re;
        }
    })?;
    let final_fidelity = *series.column("fidelity_last").and_then(|c| c.last()).unwrap_or(&f64::NAN);
    Ok(FortResult {
        series,
        gamma,
        t_transfer,
        final_fidelity,
        transfer_fidelity,
        max_trace_drift: diag.max_trace_drift,
        min_eigenvalue: diag.min_eigenvalue,
        stats: diag.stats,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Quantum-jump estimate of the FORT run: columns time, fidelity_first,
/// fidelity_first_err, fidelity_last, fidelity_last_err (standard errors).
pub fn run_fort_trajectories(cfg: &FortConfig, n_traj: usize, seed: u64) -> Result<TimeSeries> {
    let (model, grid, _) = fort_model(cfg)?;
    let n = cfg.n;
    let space = HilbertSpace::spins(n)?;
    let proj = |i: usize| SparseOp::build(&space, &OpSum::single(ONE, Factor::Sss(i)));
    let mut psi0 = DVector::zeros(space.dim());
    psi0[1] = ONE;
    let res = sample_trajectories(&model, &psi0, &grid, &[proj(0), proj(n - 1)], n_traj, seed)?;
    let mut series = TimeSeries::new(&["fidelity_first", "fidelity_first_err", "fidelity_last", "fidelity_last_err"]);
    for (k, &t) in grid.iter().enumerate() {
        series.push(t, &[res.mean[0][k], res.stderr[0][k], res.mean[1][k], res.stderr[1][k]]);
    }
    Ok(series)
}
