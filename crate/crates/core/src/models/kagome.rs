//! Kagome XXZ magnet with vector spin chirality on oriented triangles.
//!
//! The built-in cluster is the 12-site star of David: an inner hexagon
//! (sites 0..6, counterclockwise) and one outer tip per hexagon edge
//! (site 6 + k between hexagon sites k and k+1). Each of the six triangles
//! is listed clockwise.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;

use crate::compiler::SpinNetworkSpec;
use crate::dynamics::{Factor, OpSum};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KagomeLattice {
    pub n_sites: usize,
    /// Nearest-neighbour pairs, unordered.
    pub edges: Vec<(usize, usize)>,
    /// Triangles with clockwise site order.
    pub triangles: Vec<[usize; 3]>,
}

impl KagomeLattice {
    pub fn star_of_david() -> Self {
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        for k in 0..6 {
            let (a, b, tip) = (k, (k + 1) % 6, 6 + k);
            edges.push((a, b));
            edges.push((b, tip));
            edges.push((a, tip));
            // hexagon sites run counterclockwise about the centre, so a → b → tip is clockwise
            triangles.push([a, b, tip]);
        }
        Self { n_sites: 12, edges, triangles }
    }

    /// Oriented edges (i → j) of every triangle, each counted once per triangle.
    pub fn oriented_edges(&self) -> Vec<(usize, usize)> {
        self.triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut edge_set = HashMap::new();
        for &(a, b) in &self.edges {
            if a >= self.n_sites || b >= self.n_sites || a == b {
                return Err(Error::Lattice(format!("malformed edge ({a}, {b})")));
            }
            if edge_set.insert(key(a, b), ()).is_some() {
                return Err(Error::Lattice(format!("duplicate edge ({a}, {b})")));
            }
        }
        let mut seen: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for t in &self.triangles {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Lattice(format!("degenerate triangle {t:?}")));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                if !edge_set.contains_key(&key(a, b)) {
                    return Err(Error::Lattice(format!("triangle {t:?} uses non-edge ({a}, {b})")));
                }
                // a shared edge must carry one orientation only
                if let Some(&prev) = seen.get(&key(a, b)) {
                    if prev != (a, b) {
                        return Err(Error::Lattice(format!("edge ({a}, {b}) oriented both ways")));
                    }
                }
                seen.insert(key(a, b), (a, b));
            }
        }
        Ok(())
    }

    /// Text format: one record per line, `edge i j` or `triangle i j k` (clockwise),
    /// optional `sites n`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        let mut n_sites = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap_or("");
            let nums: std::result::Result<Vec<usize>, _> = it.map(str::parse).collect();
            let nums = nums.map_err(|_| Error::Lattice(format!("line {}: bad index", lineno + 1)))?;
            match (tag, nums.as_slice()) {
                ("sites", [n]) => n_sites = Some(*n),
                ("edge", [a, b]) => edges.push((*a, *b)),
                ("triangle", [a, b, c]) => triangles.push([*a, *b, *c]),
                _ => return Err(Error::Lattice(format!("line {}: unrecognized record {line:?}", lineno + 1))),
            }
        }
        let max_site = edges.iter().flat_map(|&(a, b)| [a, b]).max().map_or(0, |m| m + 1);
        let lat = Self { n_sites: n_sites.unwrap_or(max_site), edges, triangles };
        lat.validate()?;
        Ok(lat)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("sites {}\n", self.n_sites);
        for (a, b) in &self.edges {
            s += &format!("edge {a} {b}\n");
        }
        for t in &self.triangles {
            s += &format!("triangle {} {} {}\n", t[0], t[1], t[2]);
        }
        s
    }
}

/// H = Σ_edges J⊥(σxσx + σyσy) + J_zz σzσz + λ Σ_oriented (σx^i σy^j − σy^i σx^j).
pub fn kagome_csl(lat: &KagomeLattice, j_perp: f64, j_zz: f64, lambda: f64) -> Result<SpinNetworkSpec> {
    lat.validate()?;
    for (name, v) in [("j_perp", j_perp), ("j_zz", j_zz), ("lambda", lambda)] {
        if !v.is_finite() {
            return Err(invalid(name, "must be finite"));
        }
    }
    let mut spec = SpinNetworkSpec::zeros(lat.n_sites);
    let mut add = |i: usize, j: usize, a: usize, b: usize, v: f64| {
        let cur = spec.get_j(i, j, a, b);
        spec.set_j(i, j, a, b, cur + v);
    };
    for &(i, j) in &lat.edges {
        add(i, j, 0, 0, j_perp);
        add(i, j, 1, 1, j_perp);
        add(i, j, 2, 2, j_zz);
    }
    for (i, j) in lat.oriented_edges() {
        add(i, j, 0, 1, lambda);
        add(i, j, 1, 0, -lambda);
    }
    Ok(spec)
}

/// Vector chirality Σ_oriented ẑ·(σ^i × σ^j).
pub fn vector_chirality(lat: &KagomeLattice) -> OpSum {
    let mut op = OpSum::zero();
    for (i, j) in lat.oriented_edges() {
        op = op
            .add(&OpSum::pauli(i, 0).mul(&OpSum::pauli(j, 1)))
            .add(&OpSum::pauli(i, 1).mul(&OpSum::pauli(j, 0)).scale(Complex64::new(-1.0, 0.0)));
    }
    op
}

/// Scalar chirality Σ_Δ σ^i·(σ^j × σ^k); three-body, measurement only.
pub fn scalar_chirality(lat: &KagomeLattice) -> OpSum {
    let mut op = OpSum::zero();
    for t in &lat.triangles {
        for (a, b, c, s) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)] {
            let term = OpSum::pauli(t[0], a).mul(&OpSum::pauli(t[1], b)).mul(&OpSum::pauli(t[2], c));
            op = op.add(&term.scale(Complex64::new(s, 0.0)));
        }
    }
    op
}

/// Total magnetization Σσ_z.
pub fn total_sz(n: usize) -> OpSum {
    let mut op = OpSum::zero();
    for i in 0..n {
        op = op.add(&OpSum::single(Complex64::new(1.0, 0.0), Factor::Sz(i)));
    }
    op
}
