//! Scenario files.
//!
//! A scenario is one JSON object. `seed` sits at the top level; every
//! subcommand reads its own section (`device`, `phonons`, `compile`, `evolve`,
//! `otoc`, `sy`). Frequencies are unit strings (`"60 kHz"`, `"2 rad/s"`) or bare
//! numbers in rad/s. Unknown keys are rejected so typos surface as errors.
//! The full field list with defaults lives in `docs/config.md`.

use serde_json::Value;

use crate::compiler::{CompileOptions, SpinNetworkSpec};
use crate::device::{DeviceParams, DEFAULT_HIERARCHY_EPS};
use crate::dynamics::OdeOptions;
use crate::error::{Error, Result};
use crate::models::{kagome_csl, qst_chain, KagomeLattice};
use crate::pipelines::{FortConfig, FullQstConfig, QstInput};
use crate::units::{quantity_from_json, Dim};

/// A JSON value together with its path from the document root.
#[derive(Clone, Copy)]
pub struct Node<'a> {
    pub v: &'a Value,
    path: &'a str,
}

fn err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), reason: reason.into() }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Owns the child path so `Node`s can borrow it.
pub struct Field<'a> {
    v: Option<&'a Value>,
    path: String,
}

impl<'a> Field<'a> {
    pub fn node(&self) -> Option<Node<'_>> {
        self.v.map(|v| Node { v, path: &self.path })
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    fn missing(&self) -> Error {
        err(&self.path, "missing required field")
    }

    pub fn is_present(&self) -> bool {
        self.v.is_some()
    }

    pub fn f64(&self, dim: Dim) -> Result<f64> {
        self.v.map_or_else(|| Err(self.missing()), |v| quantity_from_json(v, dim, &self.path))
    }

    pub fn f64_or(&self, dim: Dim, default: f64) -> Result<f64> {
        self.v.map_or(Ok(default), |v| quantity_from_json(v, dim, &self.path))
    }

    pub fn usize(&self) -> Result<usize> {
        let v = self.v.ok_or_else(|| self.missing())?;
        v.as_u64().map(|x| x as usize).ok_or_else(|| err(&self.path, "expected a non-negative integer"))
    }

    pub fn usize_or(&self, default: usize) -> Result<usize> {
        if self.v.is_some() {
            self.usize()
        } else {
            Ok(default)
        }
    }

    pub fn u64_opt(&self) -> Result<Option<u64>> {
        match self.v {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| err(&self.path, "expected a non-negative integer")),
        }
    }

    pub fn bool_or(&self, default: bool) -> Result<bool> {
        match self.v {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| err(&self.path, "expected true or false")),
        }
    }

    pub fn str(&self) -> Result<&'a str> {
        let v = self.v.ok_or_else(|| self.missing())?;
        v.as_str().ok_or_else(|| err(&self.path, "expected a string"))
    }

    pub fn str_or(&self, default: &'a str) -> Result<&'a str> {
        if self.v.is_some() {
            self.str()
        } else {
            Ok(default)
        }
    }
}

impl<'a> Node<'a> {
    pub fn root(v: &'a Value) -> Result<Self> {
        if !v.is_object() {
            return Err(err("", "scenario must be a JSON object"));
        }
        Ok(Node { v, path: "" })
    }

    pub fn field(&self, key: &str) -> Field<'a> {
        Field { v: self.v.get(key), path: join(self.path, key) }
    }

    /// Rejects keys outside `allowed`; the node itself must be an object.
    pub fn only(&self, allowed: &[&str]) -> Result<()> {
        let map = self.v.as_object().ok_or_else(|| err(self.path, "expected an object"))?;
        for k in map.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(err(&join(self.path, k), format!("unknown field (expected one of: {})", allowed.join(", "))));
            }
        }
        Ok(())
    }

    pub fn path(&self) -> &str {
        self.path
    }
}

/// Runs `f` on a required object-valued section.
pub fn section<'a, T>(root: Node<'a>, key: &str, f: impl FnOnce(Node<'_>) -> Result<T>) -> Result<T> {
    let field = root.field(key);
    let node = field.node().ok_or_else(|| field.missing())?;
    if !node.v.is_object() {
        return Err(err(field.path(), "expected an object"));
    }
    f(node)
}

/// Runs `f` on an optional object-valued section.
pub fn optional_section<'a, T>(root: Node<'a>, key: &str, f: impl FnOnce(Node<'_>) -> Result<T>) -> Result<Option<T>> {
    let field = root.field(key);
    match field.node() {
        None => Ok(None),
        Some(node) if node.v.is_object() => f(node).map(Some),
        Some(_) => Err(err(field.path(), "expected an object")),
    }
}

// ---------------------------------------------------------------- device

pub struct DeviceSection {
    pub params: DeviceParams,
    /// Spin-exchange scale used for the cascade and the spin decoherence rate.
    pub exchange: f64,
    pub hierarchy_eps: f64,
}

pub fn device_section(node: Node<'_>) -> Result<DeviceSection> {
    node.only(&["params", "exchange", "hierarchy_eps"])?;
    let pf = node.field("params");
    let params = match pf.node() {
        None => DeviceParams::reference(),
        Some(p) if p.v.as_str() == Some("reference") => DeviceParams::reference(),
        Some(p) if p.v.is_object() => {
            let d = DeviceParams::from_json(p.v, pf.path())?;
            d.validate().map_err(|e| err(pf.path(), e.to_string()))?;
            d
        }
        Some(_) => return Err(err(pf.path(), "expected \"reference\" or an object of device fields")),
    };
    Ok(DeviceSection {
        params,
        exchange: node.field("exchange").f64_or(Dim::Frequency, 2.0 * std::f64::consts::PI * 3e3)?,
        hierarchy_eps: node.field("hierarchy_eps").f64_or(Dim::Dimensionless, DEFAULT_HIERARCHY_EPS)?,
    })
}

// ---------------------------------------------------------------- phonons

/// Natural-unit chain (ħ = 1) or the chain of a device operating point.
#[derive(Clone, Debug)]
pub enum ChainSource {
    Explicit { mass: f64, w_t: f64, g_m: f64, l_c: f64 },
    MinGap { w_t: f64, min_gap: f64 },
    Device,
}

pub struct PhononSection {
    pub n: usize,
    pub source: ChainSource,
}

fn chain_source(node: Node<'_>) -> Result<ChainSource> {
    let kind = node.field("kind").str_or("explicit")?;
    match kind {
        "explicit" => {
            node.only(&["kind", "mass", "w_t", "g_m", "l_c"])?;
            Ok(ChainSource::Explicit {
                mass: node.field("mass").f64_or(Dim::Dimensionless, 1.0)?,
                w_t: node.field("w_t").f64(Dim::Frequency)?,
                g_m: node.field("g_m").f64(Dim::Frequency)?,
                l_c: node.field("l_c").f64_or(Dim::Dimensionless, 1.0)?,
            })
        }
        "min_gap" => {
            node.only(&["kind", "w_t", "min_gap"])?;
            Ok(ChainSource::MinGap { w_t: node.field("w_t").f64(Dim::Frequency)?, min_gap: node.field("min_gap").f64(Dim::Frequency)? })
        }
        "device" => {
            node.only(&["kind"])?;
            Ok(ChainSource::Device)
        }
        other => Err(err(&join(node.path(), "kind"), format!("unknown chain kind {other:?} (explicit, min_gap, device)"))),
    }
}

pub fn phonon_section(node: Node<'_>) -> Result<PhononSection> {
    node.only(&["n", "chain"])?;
    let n = node.field("n").usize()?;
    if n == 0 {
        return Err(err(node.field("n").path(), "need at least one atom"));
    }
    let cf = node.field("chain");
    let source = match cf.node() {
        None => ChainSource::Device,
        Some(c) => chain_source(c)?,
    };
    Ok(PhononSection { n, source })
}

// ---------------------------------------------------------------- compile

pub struct CompileSection {
    pub target: SpinNetworkSpec,
    pub chain: ChainSource,
    pub delta_l: f64,
    pub eta_o: f64,
    pub options: CompileOptions,
}

fn target_spec(node: Node<'_>) -> Result<SpinNetworkSpec> {
    let model = node.field("model").str()?;
    let spec = match model {
        "qst" => {
            node.only(&["model", "n", "alpha"])?;
            let n = node.field("n").usize()?;
            qst_chain(n, node.field("alpha").f64(Dim::Frequency)?).map_err(|e| err(node.path(), e.to_string()))?
        }
        "kagome" => {
            node.only(&["model", "lattice", "j_perp", "j_zz", "lambda"])?;
            let lf = node.field("lattice");
            let lat = match lf.node() {
                None => KagomeLattice::star_of_david(),
                Some(l) => {
                    let text = l.v.as_str().ok_or_else(|| err(lf.path(), "expected lattice text"))?;
                    KagomeLattice::parse(text).map_err(|e| err(lf.path(), e.to_string()))?
                }
            };
            kagome_csl(
                &lat,
                node.field("j_perp").f64(Dim::Frequency)?,
                node.field("j_zz").f64(Dim::Frequency)?,
                node.field("lambda").f64(Dim::Frequency)?,
            )
            .map_err(|e| err(node.path(), e.to_string()))?
        }
        "custom" => {
            node.only(&["model", "spec"])?;
            let sf = node.field("spec");
            let v = sf.node().ok_or_else(|| sf.missing())?.v;
            let spec: SpinNetworkSpec = serde_json::from_value(v.clone()).map_err(|e| err(sf.path(), e.to_string()))?;
            spec.validate().map_err(|e| err(sf.path(), e.to_string()))?;
            spec
        }
        other => return Err(err(&join(node.path(), "model"), format!("unknown target model {other:?} (qst, kagome, custom)"))),
    };
    Ok(spec)
}

pub fn compile_section(node: Node<'_>, seed: u64) -> Result<CompileSection> {
    node.only(&["target", "chain", "delta_l", "eta_o", "tol_rel", "restarts", "max_iter"])?;
    let target = section(node, "target", target_spec)?;
    let chain = section(node, "chain", chain_source)?;
    let d = CompileOptions::default();
    let options = CompileOptions {
        tol_rel: node.field("tol_rel").f64_or(Dim::Dimensionless, d.tol_rel)?,
        restarts: node.field("restarts").usize_or(d.restarts)?,
        max_iter: node.field("max_iter").usize_or(d.max_iter)?,
        seed,
        ..d
    };
    Ok(CompileSection {
        target,
        chain,
        delta_l: node.field("delta_l").f64(Dim::Frequency)?,
        eta_o: node.field("eta_o").f64_or(Dim::Dimensionless, 0.1)?,
        options,
    })
}

// ---------------------------------------------------------------- evolve

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FortMethod {
    Master,
    Trajectories { n_traj: usize },
}

pub enum EvolveSection {
    QstSpin { n: usize, alpha: f64, samples: usize, t_final: f64 },
    QstFull(FullQstConfig),
    Fort(FortConfig, FortMethod),
}

fn ode(node: Node<'_>, base: OdeOptions) -> Result<OdeOptions> {
    Ok(OdeOptions {
        rtol: node.field("rtol").f64_or(Dim::Dimensionless, base.rtol)?,
        atol: node.field("atol").f64_or(Dim::Dimensionless, base.atol)?,
        ..base
    })
}

pub fn evolve_section(node: Node<'_>, seed: u64) -> Result<EvolveSection> {
    let model = node.field("model").str()?;
    let positive = |f: &Field<'_>, v: f64| if v > 0.0 { Ok(v) } else { Err(err(f.path(), "must be positive")) };
    match model {
        "qst_spin" => {
            node.only(&["model", "n", "alpha", "samples", "t_final"])?;
            let n = node.field("n").usize()?;
            if !(2..=12).contains(&n) {
                return Err(err(node.field("n").path(), "chain length must lie in 2..=12"));
            }
            let af = node.field("alpha");
            let tf = node.field("t_final");
            Ok(EvolveSection::QstSpin {
                n,
                alpha: positive(&af, af.f64_or(Dim::Frequency, 1.0)?)?,
                samples: node.field("samples").usize_or(201)?.max(2),
                t_final: positive(&tf, tf.f64_or(Dim::Dimensionless, 2.0)?)?,
            })
        }
        "qst_full" => {
            node.only(&[
                "model", "n", "delta_l", "spacing_ratio", "drive_ratio", "trap_ratio", "eta_o", "n_max", "total_cap", "samples", "t_final", "input",
                "keep_offresonant", "rtol", "atol",
            ])?;
            let d = FullQstConfig::default();
            let input = match node.field("input").str_or("excited")? {
                "excited" => QstInput::Excited,
                "superposition" => QstInput::Superposition,
                other => return Err(err(node.field("input").path(), format!("unknown input {other:?} (excited, superposition)"))),
            };
            let total_cap = match node.field("total_cap").node() {
                None => d.total_cap,
                Some(v) if v.v.is_null() => None,
                Some(_) => Some(node.field("total_cap").usize()?),
            };
            let cfg = FullQstConfig {
                n: node.field("n").usize()?,
                delta_l: node.field("delta_l").f64_or(Dim::Frequency, d.delta_l)?,
                spacing_ratio: node.field("spacing_ratio").f64_or(Dim::Dimensionless, d.spacing_ratio)?,
                drive_ratio: node.field("drive_ratio").f64_or(Dim::Dimensionless, d.drive_ratio)?,
                trap_ratio: node.field("trap_ratio").f64_or(Dim::Dimensionless, d.trap_ratio)?,
                eta_o: node.field("eta_o").f64_or(Dim::Dimensionless, d.eta_o)?,
                n_max: node.field("n_max").usize_or(d.n_max)?,
                total_cap,
                samples: node.field("samples").usize_or(d.samples)?,
                t_final: node.field("t_final").f64_or(Dim::Dimensionless, d.t_final)?,
                input,
                keep_offresonant: node.field("keep_offresonant").bool_or(d.keep_offresonant)?,
                ode: ode(node, d.ode)?,
                compile: CompileOptions { seed, ..d.compile },
            };
            cfg.validate().map_err(|e| err(node.path(), e.to_string()))?;
            Ok(EvolveSection::QstFull(cfg))
        }
        "fort" => {
            node.only(&["model", "n", "alpha", "gamma_ratio", "t_final", "samples", "method", "n_traj", "rtol", "atol"])?;
            let d = FortConfig::default();
            let cfg = FortConfig {
                n: node.field("n").usize()?,
                alpha: node.field("alpha").f64_or(Dim::Frequency, d.alpha)?,
                gamma_ratio: node.field("gamma_ratio").f64_or(Dim::Dimensionless, d.gamma_ratio)?,
                t_final: node.field("t_final").f64_or(Dim::Dimensionless, d.t_final)?,
                samples: node.field("samples").usize_or(d.samples)?,
                ode: ode(node, d.ode)?,
            };
            cfg.validate().map_err(|e| err(node.path(), e.to_string()))?;
            let method = match node.field("method").str_or("master")? {
                "master" => FortMethod::Master,
                "trajectories" => FortMethod::Trajectories { n_traj: node.field("n_traj").usize_or(1000)?.max(1) },
                other => return Err(err(node.field("method").path(), format!("unknown method {other:?} (master, trajectories)"))),
            };
            Ok(EvolveSection::Fort(cfg, method))
        }
        other => Err(err(&join(node.path(), "model"), format!("unknown model {other:?} (qst_spin, qst_full, fort)"))),
    }
}

// ---------------------------------------------------------------- otoc

pub struct OtocSection {
    pub n: usize,
    pub tau_max: f64,
    pub samples: usize,
    /// GGM indices (α, α′) on site 0 and (β, β′) on site 1.
    pub v: (usize, usize),
    pub w: (usize, usize),
    /// 0 means exact readout.
    pub shots: u64,
}

pub fn otoc_section(node: Node<'_>) -> Result<OtocSection> {
    node.only(&["n", "tau_max", "samples", "v", "w", "shots"])?;
    let n = node.field("n").usize_or(2)?;
    if !(2..=4).contains(&n) {
        return Err(err(node.field("n").path(), "SU(n) dimension must lie in 2..=4"));
    }
    let pair = |key: &str| -> Result<(usize, usize)> {
        let f = node.field(key);
        match f.node() {
            None => Ok((0, 0)),
            Some(p) => {
                let a = p.v.as_array().filter(|a| a.len() == 2).ok_or_else(|| err(f.path(), "expected [index, index]"))?;
                let get = |x: &Value| x.as_u64().map(|v| v as usize).filter(|&v| v < n * n - 1);
                match (get(&a[0]), get(&a[1])) {
                    (Some(x), Some(y)) => Ok((x, y)),
                    _ => Err(err(f.path(), format!("GGM indices must lie in 0..{}", n * n - 1))),
                }
            }
        }
    };
    Ok(OtocSection {
        n,
        tau_max: node.field("tau_max").f64_or(Dim::Dimensionless, 2.0)?,
        samples: node.field("samples").usize_or(41)?.max(2),
        v: pair("v")?,
        w: pair("w")?,
        shots: node.field("shots").u64_opt()?.unwrap_or(0),
    })
}

// ---------------------------------------------------------------- sy

pub struct SySection {
    pub n_spins: usize,
    pub n: usize,
    pub j_scale: f64,
    pub dt: f64,
    pub halvings: usize,
    pub draws: usize,
}

pub fn sy_section(node: Node<'_>) -> Result<SySection> {
    node.only(&["n_spins", "n", "j_scale", "dt", "halvings", "draws"])?;
    let s = SySection {
        n_spins: node.field("n_spins").usize_or(3)?,
        n: node.field("n").usize_or(2)?,
        j_scale: node.field("j_scale").f64_or(Dim::Frequency, 1.0)?,
        dt: node.field("dt").f64_or(Dim::Dimensionless, 0.2)?,
        halvings: node.field("halvings").usize_or(5)?,
        draws: node.field("draws").usize_or(10_000)?,
    };
    if s.n_spins < 2 || s.n < 2 || s.n.pow(s.n_spins as u32) > 4096 {
        return Err(err(node.path(), "need n_spins >= 2, n >= 2 and n^n_spins <= 4096"));
    }
    if !(s.j_scale > 0.0 && s.dt > 0.0) {
        return Err(err(node.path(), "j_scale and dt must be positive"));
    }
    Ok(s)
}
