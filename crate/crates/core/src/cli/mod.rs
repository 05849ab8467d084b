//! Scenario runner behind the `wgqed` binary.
//!
//! Every run writes its payload files plus `manifest.json` (tool version,
//! SHA-256 of the config bytes, seed, thread count, wall time, payload hashes)
//! into the output directory. Exit codes: 0 success, 1 runtime failure,
//! 2 schema error, 3 hierarchy violation under `--strict-hierarchy`.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::compiler::compile_sidebands;
use crate::device::{check_hierarchy, derive_rates, magnitude_cascade, vdw_discrepancy, DeviceParams, HierarchyRow, SpinScale};
use crate::dynamics::observables::TimeSeries;
use crate::error::Error;
use crate::models::qst::TransferProbe;
use crate::models::{locate_transfer_time, qst_chain, sy_sample, Strobe};
use crate::otoc::{otoc_circuit, otoc_direct, otoc_run, otoc_run_sampled};
use crate::phonons::{phonon_spectrum, MechanicalChain, PhononSpectrum};
use crate::pipelines::{chain_with_min_gap, run_fort_qst, run_fort_trajectories, run_full_qst};
use config::{ChainSource, EvolveSection, FortMethod, Node};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "WGQED_THREADS";

/// Scenarios shipped with the tool, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("qst_n6", include_str!("../../scenarios/qst_n6.json")),
    ("fort_decay", include_str!("../../scenarios/fort_decay.json")),
    ("fort_trajectories", include_str!("../../scenarios/fort_trajectories.json")),
    ("qst_spin", include_str!("../../scenarios/qst_spin.json")),
    ("device_reference", include_str!("../../scenarios/device_reference.json")),
    ("phonons_chain", include_str!("../../scenarios/phonons_chain.json")),
    ("compile_kagome", include_str!("../../scenarios/compile_kagome.json")),
    ("otoc_su2", include_str!("../../scenarios/otoc_su2.json")),
    ("sy_su2", include_str!("../../scenarios/sy_su2.json")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Device,
    Phonons,
    Compile,
    Evolve,
    Otoc,
    Sy,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Device => "device",
            Command::Phonons => "phonons",
            Command::Compile => "compile",
            Command::Evolve => "evolve",
            Command::Otoc => "otoc",
            Command::Sy => "sy",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    /// File path, or the name of a bundled scenario.
    pub config: String,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub strict_hierarchy: bool,
}

#[derive(Debug)]
pub enum CliError {
    Schema(Error),
    Hierarchy(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Hierarchy(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(e) => write!(f, "schema error: {e}"),
            CliError::Hierarchy(m) => write!(f, "hierarchy violated: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

fn schema(e: Error) -> CliError {
    CliError::Schema(e)
}

fn runtime(e: Error) -> CliError {
    match e {
        Error::Config { .. } => CliError::Schema(e),
        other => CliError::Runtime(other),
    }
}

/// A named payload file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: &str, s: String) -> Self {
        Self { name: name.into(), bytes: s.into_bytes() }
    }

    fn json(name: &str, v: &Value) -> Self {
        let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
        s.push('\n');
        Self::text(name, s)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Human-readable summary for stdout.
    pub report: String,
    pub warnings: Vec<String>,
}

/// Config text from a path or a bundled scenario name.
pub fn load_config(name: &str) -> Result<String, CliError> {
    let path = Path::new(name);
    if path.exists() {
        return std::fs::read_to_string(path).map_err(|e| CliError::Runtime(e.into()));
    }
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| text.to_string())
        .ok_or_else(|| CliError::Schema(Error::Config { path: "--config".into(), reason: format!("no such file or bundled scenario: {name}") }))
}

pub fn parse_config(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Schema(Error::Config { path: format!("<line {} column {}>", e.line(), e.column()), reason: e.to_string() })
    })
}

fn seed_of(root: Node<'_>, overridden: Option<u64>) -> Result<u64, CliError> {
    let file = root.field("seed").u64_opt().map_err(schema)?;
    Ok(overridden.or(file).unwrap_or(0))
}

fn hierarchy_gate(rows: &[HierarchyRow], strict: bool, warnings: &mut Vec<String>) -> Result<(), CliError> {
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| format!("{} (ratio {:.3e} > {:.3e})", r.relation, r.ratio, r.threshold)).collect();
    if failed.is_empty() {
        return Ok(());
    }
    let msg = failed.join("; ");
    if strict {
        return Err(CliError::Hierarchy(msg));
    }
    warnings.push(format!("hierarchy: {msg}"));
    Ok(())
}

fn hierarchy_json(rows: &[HierarchyRow]) -> Value {
    Value::Array(rows.iter().map(|r| json!({"relation": r.relation, "ratio": r.ratio, "threshold": r.threshold, "pass": r.pass})).collect())
}

fn device_of(root: Node<'_>) -> Result<DeviceParams, CliError> {
    Ok(config::optional_section(root, "device", config::device_section).map_err(schema)?.map_or_else(DeviceParams::reference, |d| d.params))
}

fn build_chain(n: usize, source: &ChainSource, root: Node<'_>) -> Result<PhononSpectrum, CliError> {
    match *source {
        ChainSource::Explicit { mass, w_t, g_m, l_c } => phonon_spectrum(&MechanicalChain::new(n, mass, w_t, g_m, l_c).map_err(runtime)?).map_err(runtime),
        ChainSource::MinGap { w_t, min_gap } => chain_with_min_gap(n, w_t, min_gap).map_err(runtime),
        ChainSource::Device => {
            let p = device_of(root)?;
            let r = derive_rates(&p).map_err(runtime)?;
            phonon_spectrum(&MechanicalChain::from_device(n, &p, &r).map_err(runtime)?).map_err(runtime)
        }
    }
}

/// Parses every section present, without running anything.
pub fn validate(root: &Value) -> Result<Vec<&'static str>, CliError> {
    let node = Node::root(root).map_err(schema)?;
    node.only(&["seed", "description", "device", "phonons", "compile", "evolve", "otoc", "sy"]).map_err(schema)?;
    let seed = seed_of(node, None)?;
    let mut seen = Vec::new();
    if config::optional_section(node, "device", config::device_section).map_err(schema)?.is_some() {
        seen.push("device");
    }
    if config::optional_section(node, "phonons", config::phonon_section).map_err(schema)?.is_some() {
        seen.push("phonons");
    }
    if config::optional_section(node, "compile", |n| config::compile_section(n, seed)).map_err(schema)?.is_some() {
        seen.push("compile");
    }
    if config::optional_section(node, "evolve", |n| config::evolve_section(n, seed)).map_err(schema)?.is_some() {
        seen.push("evolve");
    }
    if config::optional_section(node, "otoc", config::otoc_section).map_err(schema)?.is_some() {
        seen.push("otoc");
    }
    if config::optional_section(node, "sy", config::sy_section).map_err(schema)?.is_some() {
        seen.push("sy");
    }
    if seen.is_empty() {
        return Err(schema(Error::Config { path: "".into(), reason: "scenario has no runnable section".into() }));
    }
    Ok(seen)
}

/// Runs one subcommand on a parsed scenario; nothing touches the filesystem.
pub fn execute(command: Command, root: &Value, seed: Option<u64>, strict: bool) -> Result<Outcome, CliError> {
    let node = Node::root(root).map_err(schema)?;
    let sections = validate(root)?;
    let seed = seed_of(node, seed)?;
    let mut out = Outcome::default();
    match command {
        Command::Validate => {
            let _ = writeln!(out.report, "ok: sections {}", sections.join(", "));
        }
        Command::Device => run_device(node, strict, &mut out)?,
        Command::Phonons => run_phonons(node, &mut out)?,
        Command::Compile => run_compile(node, seed, strict, &mut out)?,
        Command::Evolve => run_evolve(node, seed, &mut out)?,
        Command::Otoc => run_otoc(node, seed, &mut out)?,
        Command::Sy => run_sy(node, seed, &mut out)?,
    }
    Ok(out)
}

fn run_device(root: Node<'_>, strict: bool, out: &mut Outcome) -> Result<(), CliError> {
    let d = config::section(root, "device", config::device_section).map_err(schema)?;
    let r = derive_rates(&d.params).map_err(runtime)?;
    let report = check_hierarchy(&d.params, &r, &SpinScale::default(), d.hierarchy_eps);
    let cascade = magnitude_cascade(&d.params, &r, d.exchange);
    let (vdw_ratio, note) = vdw_discrepancy(&r);
    let hz = |w: f64| w / (2.0 * std::f64::consts::PI);
    let _ = writeln!(out.report, "L_c          {:.4e} m", r.l_c);
    for (name, v) in [("Delta_vdW", r.delta_vdw), ("t", r.t_tunnel), ("gamma_m", r.gamma_m), ("Gamma_1D", r.gamma_1d)] {
        let _ = writeln!(out.report, "{name:<12} {:.4e} Hz", hz(v));
    }
    let _ = writeln!(out.report, "C_m          {:.4e}", r.c_m);
    let _ = writeln!(out.report, "gamma_m/Delta_l {:.4e}", r.gamma_m / r.delta_l);
    for t in &cascade {
        let _ = writeln!(out.report, "tier {:<6} {:.4e} Hz (typical {:.0e} Hz, {:.2} decades off)", t.name, t.value_hz, t.typical_hz, t.decades_off);
    }
    let _ = writeln!(out.report, "note: {note}");
    out.artifacts.push(Artifact::json(
        "device.json",
        &json!({
            "rates": serde_json::to_value(&r).map_err(|e| runtime(e.into()))?,
            "gamma_m_over_delta_l": r.gamma_m / r.delta_l,
            "spin_decoherence": r.gamma_spin(d.exchange),
            "c_s": r.c_s(),
            "hierarchy": hierarchy_json(&report.rows),
            "cascade": serde_json::to_value(&cascade).map_err(|e| runtime(e.into()))?,
            "vdw_ratio": vdw_ratio,
            "vdw_note": note,
        }),
    ));
    hierarchy_gate(&report.rows, strict, &mut out.warnings)
}

fn spectrum_csv(s: &PhononSpectrum) -> String {
    let mut csv = String::from("mode,eps,eps_hz\n");
    for (l, e) in s.eps.iter().enumerate() {
        let _ = writeln!(csv, "{},{:.16e},{:.16e}", l + 1, e, e / (2.0 * std::f64::consts::PI));
    }
    csv
}

fn modes_csv(s: &PhononSpectrum) -> String {
    let n = s.n();
    let mut csv = String::from("site");
    for l in 1..=n {
        let _ = write!(csv, ",mode_{l}");
    }
    csv.push('\n');
    for i in 0..n {
        let _ = write!(csv, "{}", i + 1);
        for l in 0..n {
            let _ = write!(csv, ",{:.16e}", s.b[(i, l)]);
        }
        csv.push('\n');
    }
    csv
}

fn run_phonons(root: Node<'_>, out: &mut Outcome) -> Result<(), CliError> {
    let p = config::section(root, "phonons", config::phonon_section).map_err(schema)?;
    let s = build_chain(p.n, &p.source, root)?;
    let _ = writeln!(out.report, "{} modes, bandwidth {:.4e} rad/s, min spacing {:.4e} rad/s", s.n(), s.bandwidth(), s.min_spacing());
    out.artifacts.push(Artifact::text("spectrum.csv", spectrum_csv(&s)));
    out.artifacts.push(Artifact::text("modes.csv", modes_csv(&s)));
    Ok(())
}

fn run_compile(root: Node<'_>, seed: u64, strict: bool, out: &mut Outcome) -> Result<(), CliError> {
    let c = config::section(root, "compile", |n| config::compile_section(n, seed)).map_err(schema)?;
    let n = c.target.n;
    let spectrum = build_chain(n, &c.chain, root)?;
    let report = compile_sidebands(&c.target, &spectrum, &vec![c.delta_l; n], c.eta_o, &c.options).map_err(runtime)?;
    let rows = vec![
        row("|Omega~| << Delta_l", report.program.max_omega_tilde() / c.delta_l),
        row("Delta_l << mode spacing", c.delta_l / spectrum.min_spacing()),
    ];
    let _ = writeln!(
        out.report,
        "compiled N={n}: relative residual {:.3e}, restart {}, {} of {} restarts converged",
        report.residual_rel, report.restart, report.converged_restarts, c.options.restarts
    );
    out.artifacts.push(Artifact::json(
        "program.json",
        &json!({
            "program": report.program.to_json(),
            "residual_rel": report.residual_rel,
            "intensity": report.intensity,
            "restart": report.restart,
            "converged_restarts": report.converged_restarts,
            "hierarchy": hierarchy_json(&rows),
        }),
    ));
    hierarchy_gate(&rows, strict, &mut out.warnings)
}

fn row(relation: &str, ratio: f64) -> HierarchyRow {
    let threshold = crate::device::DEFAULT_HIERARCHY_EPS;
    HierarchyRow { relation: relation.into(), ratio, threshold, pass: ratio.is_finite() && ratio <= threshold }
}

fn run_evolve(root: Node<'_>, seed: u64, out: &mut Outcome) -> Result<(), CliError> {
    match config::section(root, "evolve", |n| config::evolve_section(n, seed)).map_err(schema)? {
        EvolveSection::QstSpin { n, alpha, samples, t_final } => {
            let spec = qst_chain(n, alpha).map_err(runtime)?;
            let probe = TransferProbe::new(&spec).map_err(runtime)?;
            let opt = locate_transfer_time(&spec, alpha).map_err(runtime)?;
            let t_end = t_final * opt.bracket[0];
            let mut series = TimeSeries::new(&["fidelity"]);
            for k in 0..samples {
                let t = t_end * k as f64 / (samples - 1) as f64;
                series.push(t, &[probe.fidelity(t)]);
            }
            let _ = writeln!(out.report, "t* = {:.10e} s (pi/(2 alpha) = {:.10e}), F(t*) = {:.12}", opt.t_star, opt.bracket[0], opt.fidelity);
            out.artifacts.push(Artifact::text("series.csv", series.to_csv()));
            out.artifacts.push(Artifact::json("summary.json", &json!({"t_star": opt.t_star, "fidelity": opt.fidelity, "bracket": opt.bracket})));
        }
        EvolveSection::QstFull(cfg) => {
            let r = run_full_qst(&cfg).map_err(runtime)?;
            let _ = writeln!(
                out.report,
                "N={} dim {}: peak fidelity {:.5} at t/t* = {:.4}, max phonons {:.4}, compile residual {:.2e}",
                cfg.n,
                r.dim,
                r.peak_fidelity,
                r.peak_time / r.t_transfer,
                r.max_phonon,
                r.compile_residual
            );
            out.artifacts.push(Artifact::text("series.csv", r.series.to_csv()));
            out.artifacts.push(Artifact::json(
                "summary.json",
                &json!({
                    "alpha": r.alpha,
                    "t_transfer": r.t_transfer,
                    "peak_fidelity": r.peak_fidelity,
                    "peak_time": r.peak_time,
                    "final_fidelity": r.final_fidelity,
                    "final_fidelity_effective": r.final_fidelity_effective,
                    "max_phonon": r.max_phonon,
                    "compile_residual": r.compile_residual,
                    "dim": r.dim,
                    "ode_steps": r.stats.accepted,
                    "program": r.program.to_json(),
                }),
            ));
        }
        EvolveSection::Fort(cfg, FortMethod::Master) => {
            let r = run_fort_qst(&cfg).map_err(runtime)?;
            let _ = writeln!(out.report, "gamma_FORT {:.4e}: F(transfer) {:.5}, F(end) {:.5}, trace drift {:.1e}", r.gamma, r.transfer_fidelity, r.final_fidelity, r.max_trace_drift);
            out.artifacts.push(Artifact::text("series.csv", r.series.to_csv()));
            out.artifacts.push(Artifact::json(
                "summary.json",
                &json!({
                    "gamma": r.gamma,
                    "t_transfer": r.t_transfer,
                    "transfer_fidelity": r.transfer_fidelity,
                    "final_fidelity": r.final_fidelity,
                    "max_trace_drift": r.max_trace_drift,
                    "min_eigenvalue": r.min_eigenvalue,
                }),
            ));
        }
        EvolveSection::Fort(cfg, FortMethod::Trajectories { n_traj }) => {
            let series = run_fort_trajectories(&cfg, n_traj, seed).map_err(runtime)?;
            let last = series.column("fidelity_last").and_then(|c| c.last().copied()).unwrap_or(f64::NAN);
            let _ = writeln!(out.report, "{n_traj} trajectories, seed {seed}: F(end) {last:.5}");
            out.artifacts.push(Artifact::text("series.csv", series.to_csv()));
        }
    }
    Ok(())
}

/// Seeded random Hermitian matrix with unit-variance Gaussian entries.
fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let a = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(g(), g()));
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn run_otoc(root: Node<'_>, seed: u64, out: &mut Outcome) -> Result<(), CliError> {
    let o = config::section(root, "otoc", config::otoc_section).map_err(schema)?;
    let dim = o.n * o.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_hermitian(dim, &mut rng);
    let mut psi = DVector::from_fn(dim, |_, _| {
        let (re, im): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        Complex64::new(re, im)
    });
    psi /= Complex64::new(psi.norm(), 0.0);
    let mut series = TimeSeries::new(&["re_circuit", "im_circuit", "re_direct", "im_direct"]);
    let mut worst: f64 = 0.0;
    for k in 0..o.samples {
        let tau = o.tau_max * k as f64 / (o.samples - 1) as f64;
        let c = otoc_circuit(o.n, 2, 0, o.v.0, o.v.1, 1, o.w.0, o.w.1, &h, tau).map_err(runtime)?;
        let run = if o.shots > 0 { otoc_run_sampled(&c, &psi, o.shots, seed.wrapping_add(k as u64)) } else { otoc_run(&c, &psi) }.map_err(runtime)?;
        let direct = otoc_direct(o.n, 2, 0, o.v.0, o.v.1, 1, o.w.0, o.w.1, &h, tau, &psi).map_err(runtime)?;
        worst = worst.max((run - direct).norm());
        series.push(tau, &[run.re, run.im, direct.re, direct.im]);
        if k == 0 {
            out.artifacts.push(Artifact::text("circuit.txt", c.to_text()));
        }
    }
    let _ = writeln!(out.report, "SU({}) two sites, {} tau values: max |circuit - direct| = {worst:.3e}", o.n, o.samples);
    out.artifacts.push(Artifact::text("otoc.csv", series.to_csv()));
    Ok(())
}

fn run_sy(root: Node<'_>, seed: u64, out: &mut Outcome) -> Result<(), CliError> {
    let s = config::section(root, "sy", config::sy_section).map_err(schema)?;
    let model = sy_sample(s.n_spins, s.n, s.j_scale, seed).map_err(runtime)?;
    let strobe = Strobe::new(&model).map_err(runtime)?;
    let mut csv = String::from("dt,step_error,ratio\n");
    let mut prev = f64::NAN;
    for k in 0..=s.halvings {
        let dt = s.dt / f64::powi(2.0, k as i32);
        let e = strobe.step_error(dt);
        let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e}", dt, e, prev / e);
        prev = e;
    }
    // coupling statistics from one large draw of m(m−1)/2 ≥ draws couplings
    let mut m = 2;
    while m * (m - 1) / 2 < s.draws {
        m += 1;
    }
    let big = sy_sample(m, s.n, s.j_scale, seed ^ 0x5eed).map_err(runtime)?;
    let c = big.pair_couplings();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
    let _ = writeln!(out.report, "SU({}) x {} spins: coupling variance / J^2 = {:.4} over {} draws", s.n, s.n_spins, var / (s.j_scale * s.j_scale), c.len());
    out.artifacts.push(Artifact::text("strobe.csv", csv));
    out.artifacts.push(Artifact::json(
        "couplings.json",
        &json!({"couplings": model.pair_couplings(), "draws": c.len(), "mean": mean, "variance": var, "variance_ratio": var / (s.j_scale * s.j_scale)}),
    ));
    Ok(())
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Full invocation: load, run, write artifacts and manifest. Returns the exit code.
pub fn run(inv: &Invocation) -> i32 {
    let start = Instant::now();
    let threads = inv.threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok())).filter(|&t| t > 0);
    if let Some(t) = threads {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let result = load_config(&inv.config).and_then(|text| {
        let root = parse_config(&text)?;
        let seed = seed_of(Node::root(&root).map_err(schema)?, inv.seed)?;
        let outcome = execute(inv.command, &root, inv.seed, inv.strict_hierarchy)?;
        Ok((text, seed, outcome))
    });
    let (text, seed, outcome) = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", outcome.report);
    if inv.command == Command::Validate {
        return 0;
    }
    if let Err(e) = write_outputs(inv, &text, seed, threads, &outcome, start) {
        eprintln!("error: cannot write outputs: {e}");
        return 1;
    }
    0
}

fn write_outputs(inv: &Invocation, text: &str, seed: u64, threads: Option<usize>, outcome: &Outcome, start: Instant) -> std::io::Result<()> {
    std::fs::create_dir_all(&inv.out)?;
    let mut files = Vec::new();
    for a in &outcome.artifacts {
        std::fs::write(inv.out.join(&a.name), &a.bytes)?;
        files.push(json!({"file": a.name, "sha256": sha_hex(&a.bytes)}));
    }
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": inv.command.name(),
        "config": inv.config,
        "config_sha256": sha_hex(text.as_bytes()),
        "seed": seed,
        "threads": threads.unwrap_or_else(rayon::current_num_threads),
        "strict_hierarchy": inv.strict_hierarchy,
        "wall_seconds": start.elapsed().as_secs_f64(),
        "warnings": outcome.warnings,
        "outputs": files,
    });
    std::fs::write(inv.out.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("JSON values serialize") + "\n")?;
    println!("wrote {} file(s) and manifest.json to {}", outcome.artifacts.len(), inv.out.display());
    Ok(())
}
