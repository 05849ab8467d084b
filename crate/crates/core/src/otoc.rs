//! Out-of-time-order correlators of SU(n) operators, measured through a single
//! ancilla qubit, with a direct exact-evolution oracle.
//!
//! Register layout: logical sites (n levels each, site 0 least significant),
//! then the ancilla as the most significant qubit (index 0 = |g⟩, 1 = |s⟩).
//! The circuit prepares (|g⟩ + |s⟩)/√2 on the ancilla and leaves
//! W_β(τ)V_α|ψ⟩ on the |g⟩ branch and V_α′W_β′(τ)|ψ⟩ on the |s⟩ branch, so
//! C = ⟨σ_x⟩ + i⟨σ_y⟩ = 2⟨σ₊⟩ with σ₊ = |s⟩⟨g|.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::dense::{check_dim, eigh, embed, expm_hermitian, unitarity_defect};
use crate::dynamics::{Factor, HilbertSpace, OpSum, SparseOp};
use crate::error::{invalid, Error, Result};
use crate::models::ggm::ggm_basis;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// |g⟩⟨g| ⊗ I + |s⟩⟨s| ⊗ Λ on ancilla ⊗ site (ancilla most significant).
pub fn controlled_ggm(lambda: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let d = lambda.nrows();
    if unitarity_defect(lambda) > 1e-12 {
        return Err(Error::NotUnitary("controlled gate needs a unitary GGM; decompose it with unitary_decomposition".into()));
    }
    let mut u = DMatrix::zeros(2 * d, 2 * d);
    u.view_mut((0, 0), (d, d)).copy_from(&DMatrix::identity(d, d));
    u.view_mut((d, d), (d, d)).copy_from(lambda);
    Ok(u)
}

/// Writes a Hermitian matrix as Σ_k w_k U_k with unitary U_k: the operator itself when it is
/// unitary, otherwise H = Σ_k e_k (I − R_k)/2 with reflections R_k = I − 2|v_k⟩⟨v_k|.
pub fn unitary_decomposition(h: &DMatrix<Complex64>) -> Vec<(f64, DMatrix<Complex64>)> {
    if unitarity_defect(h) < 1e-12 {
        return vec![(1.0, h.clone())];
    }
    let d = h.nrows();
    let (vals, vecs) = eigh(h);
    let mut out = Vec::new();
    let trace: f64 = vals.iter().sum();
    if trace.abs() > 1e-14 {
        out.push((trace / 2.0, DMatrix::identity(d, d)));
    }
    for (k, &e) in vals.iter().enumerate() {
        if e.abs() < 1e-14 {
            continue;
        }
        let v = vecs.column(k);
        let r = DMatrix::identity(d, d) - (v * v.adjoint()) * Complex64::new(2.0, 0.0);
        out.push((-e / 2.0, r));
    }
    out
}

/// Effective two-level gate obtained from the gauge constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeGate {
    /// Effective coupling ⟨α|H_eff|β⟩ of the controlled branch, −2χ_α χ_β*/λ_G.
    pub chi_eff: Complex64,
    /// Interaction time π/(2|χ̃|); infinite when χ̃ = 0.
    pub time: f64,
    /// H_G + H_αβ on ancilla ⊗ block (block atoms first, ancilla most significant).
    pub hamiltonian: DMatrix<Complex64>,
}

/// H_αβ = χ_α σ_ss^A σ₊^(α) + χ_β σ_ss^A σ₊^(β) + h.c. on one n-atom gauge block.
///
/// Second-order elimination of the one- and zero-excitation detours gives the
/// transition amplitude ⟨α|H_eff|β⟩ = −2χ_α χ_β*/λ_G (both detours contribute
/// equally) and a uniform shift −(|χ_α|² + |χ_β|²)/λ_G on the sector.
pub fn controlled_ggm_via_gauge(n: usize, alpha: usize, beta: usize, chi_a: Complex64, chi_b: Complex64, lambda_g: f64, max_ratio: f64) -> Result<GaugeGate> {
    if n < 2 || alpha >= n || beta >= n || alpha == beta {
        return Err(invalid("alpha/beta", "need two distinct levels of an n >= 2 block"));
    }
    let ratio = chi_a.norm().max(chi_b.norm()) / lambda_g.abs();
    if !(ratio <= max_ratio) {
        return Err(Error::Hierarchy(format!("gauge gate needs |χ|/λ_G <= {max_ratio}, got {ratio:.3e}")));
    }
    let space = HilbertSpace::spins(n + 1)?;
    let anc = n;
    let mut g = OpSum::identity().scale(-ONE);
    for s in 0..n {
        g = g.add(&OpSum::single(ONE, Factor::Sss(s)));
    }
    let mut h = g.mul(&g).scale(Complex64::new(lambda_g, 0.0));
    for (site, chi) in [(alpha, chi_a), (beta, chi_b)] {
        let t = OpSum { terms: vec![(chi, vec![Factor::Sss(anc), Factor::Sp(site)])] };
        h = h.add(&t).add(&t.dagger());
    }
    let hamiltonian = SparseOp::build(&space, &h).to_dense();
    let chi_eff = -2.0 * chi_a * chi_b.conj() / lambda_g;
    let time = if chi_eff.norm() > 0.0 { std::f64::consts::PI / (2.0 * chi_eff.norm()) } else { f64::INFINITY };
    Ok(GaugeGate { chi_eff, time, hamiltonian })
}

impl GaugeGate {
    /// Compares e^{−iHt} restricted to the gauge sector with the ideal controlled gate on
    /// levels (α, β): identity on the |g⟩ branch, `target` (up to one phase) on the |s⟩ branch
    /// support. Returns the worst of the two branch fidelities |tr(A†B)|/d.
    pub fn fidelity(&self, n: usize, alpha: usize, beta: usize, target: &DMatrix<Complex64>, t: f64) -> f64 {
        let u = expm_hermitian(&self.hamiltonian, t);
        let sector = |lvl: usize, anc: usize| (1usize << lvl) | (anc << n);
        let g_branch: Complex64 = (0..n).map(|l| u[(sector(l, 0), sector(l, 0))]).sum();
        let f_g = g_branch.norm() / n as f64;
        let idx = [alpha, beta];
        let mut overlap = ZERO;
        for (r, &a) in idx.iter().enumerate() {
            for (c, &b) in idx.iter().enumerate() {
                overlap += target[(r, c)].conj() * u[(sector(a, 1), sector(b, 1))];
            }
        }
        f_g.min(overlap.norm() / 2.0)
    }
}

/// One step of the measurement circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Hadamard,
    /// σ_x on the ancilla, used to turn controlled gates into anti-controlled ones.
    AncillaX,
    /// Controlled operator from slot 0..4 = (V_α, W_β, W_β′, V_α′).
    Controlled(usize),
    /// U(τ) when forward, else evolution under −H for τ.
    Evolve { forward: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OtocCircuit {
    pub n: usize,
    pub n_sites: usize,
    pub site_v: usize,
    pub site_w: usize,
    pub tau: f64,
    pub h: DMatrix<Complex64>,
    /// V_α, W_β, W_β′, V_α′ as n×n matrices.
    pub ops: [DMatrix<Complex64>; 4],
    pub labels: [usize; 4],
    pub gates: Vec<Gate>,
}

pub const OTOC_SEQUENCE: [Gate; 11] = [
    Gate::Hadamard,
    Gate::AncillaX,
    Gate::Controlled(0),
    Gate::AncillaX,
    Gate::Evolve { forward: true },
    Gate::AncillaX,
    Gate::Controlled(1),
    Gate::AncillaX,
    Gate::Controlled(2),
    Gate::Evolve { forward: false },
    Gate::Controlled(3),
];

fn check_setup(n: usize, n_sites: usize, h: &DMatrix<Complex64>, sites: &[usize]) -> Result<usize> {
    if n < 2 {
        return Err(invalid("n", "SU(n) needs n >= 2"));
    }
    let dim = n.pow(n_sites as u32);
    check_dim(2 * dim)?;
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
    }
    if (h - h.adjoint()).camax() > 1e-12 * h.camax().max(1.0) {
        return Err(Error::NotHermitian((h - h.adjoint()).camax()));
    }
    if let Some(&s) = sites.iter().find(|&&s| s >= n_sites) {
        return Err(invalid("site", format!("{s} out of range")));
    }
    Ok(dim)
}

/// C_{α,β,α′,β′} circuit for GGM indices on sites i (V) and j (W).
#[allow(clippy::too_many_arguments)]
pub fn otoc_circuit(n: usize, n_sites: usize, i: usize, alpha: usize, alpha_p: usize, j: usize, beta: usize, beta_p: usize, h: &DMatrix<Complex64>, tau: f64) -> Result<OtocCircuit> {
    check_setup(n, n_sites, h, &[i, j])?;
    let basis = ggm_basis(n)?;
    for a in [alpha, alpha_p, beta, beta_p] {
        if a >= basis.len() {
            return Err(invalid("ggm index", format!("{a} >= {}", basis.len())));
        }
    }
    let m = &basis.matrices;
    Ok(OtocCircuit {
        n,
        n_sites,
        site_v: i,
        site_w: j,
        tau,
        h: h.clone(),
        ops: [m[alpha].clone(), m[beta].clone(), m[beta_p].clone(), m[alpha_p].clone()],
        labels: [alpha, beta, beta_p, alpha_p],
        gates: OTOC_SEQUENCE.to_vec(),
    })
}

impl OtocCircuit {
    fn dim(&self) -> usize {
        self.n.pow(self.n_sites as u32)
    }

    fn slot_site(&self, slot: usize) -> usize {
        if slot == 0 || slot == 3 { self.site_v } else { self.site_w }
    }

    /// Runs the gate list with unitary slot operators; returns (⟨σ_x⟩, ⟨σ_y⟩) of the ancilla.
    fn execute(&self, unitaries: &[DMatrix<Complex64>; 4], fwd: &DMatrix<Complex64>, psi0: &DVector<Complex64>) -> (f64, f64) {
        let dim = self.dim();
        let mut state = DVector::zeros(2 * dim);
        state.rows_mut(0, dim).copy_from(psi0);
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let embedded: Vec<DMatrix<Complex64>> = (0..4).map(|k| embed(&unitaries[k], self.slot_site(k), self.n_sites)).collect();
        for gate in &self.gates {
            match *gate {
                Gate::Hadamard => {
                    let (g, s) = (state.rows(0, dim).into_owned(), state.rows(dim, dim).into_owned());
                    state.rows_mut(0, dim).copy_from(&((&g + &s) * Complex64::new(s2, 0.0)));
                    state.rows_mut(dim, dim).copy_from(&((&g - &s) * Complex64::new(s2, 0.0)));
                }
                Gate::AncillaX => {
                    let g = state.rows(0, dim).into_owned();
                    let s = state.rows(dim, dim).into_owned();
                    state.rows_mut(0, dim).copy_from(&s);
                    state.rows_mut(dim, dim).copy_from(&g);
                }
                Gate::Controlled(k) => {
                    let s = &embedded[k] * state.rows(dim, dim);
                    state.rows_mut(dim, dim).copy_from(&s);
                }
                Gate::Evolve { forward } => {
                    // e^{−i(−H)τ} = U(τ)†
                    let u = if forward { fwd.clone() } else { fwd.adjoint() };
                    for half in [0, dim] {
                        let v = &u * state.rows(half, dim);
                        state.rows_mut(half, dim).copy_from(&v);
                    }
                }
            }
        }
        // readout rotations are replaced by exact values: 2⟨σ₊⟩ = 2 s_branch† g_branch
        let sp = state.rows(dim, dim).dotc(&state.rows(0, dim));
        (2.0 * sp.re, 2.0 * sp.im)
    }

    /// Ancilla expectation values per unitary combination, with their weights.
    pub fn readouts(&self, psi0: &DVector<Complex64>) -> Result<Vec<(f64, f64, f64)>> {
        let dim = self.dim();
        if psi0.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: psi0.len() });
        }
        if (psi0.norm() - 1.0).abs() > 1e-10 {
            return Err(invalid("psi0", "initial state must be normalized"));
        }
        let fwd = expm_hermitian(&self.h, self.tau);
        let parts: Vec<Vec<(f64, DMatrix<Complex64>)>> = self.ops.iter().map(unitary_decomposition).collect();
        let mut out = Vec::new();
        for a in &parts[0] {
            for b in &parts[1] {
                for c in &parts[2] {
                    for d in &parts[3] {
                        let w = a.0 * b.0 * c.0 * d.0;
                        let u = [a.1.clone(), b.1.clone(), c.1.clone(), d.1.clone()];
                        let (sx, sy) = self.execute(&u, &fwd, psi0);
                        out.push((w, sx, sy));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Line-based description: header then one gate per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "otoc n={} sites={} v_site={} w_site={} tau={:.16e}", self.n, self.n_sites, self.site_v, self.site_w, self.tau);
        let _ = writeln!(s, "ops alpha={} beta={} beta_p={} alpha_p={}", self.labels[0], self.labels[1], self.labels[2], self.labels[3]);
        for g in &self.gates {
            let line = match g {
                Gate::Hadamard => "hadamard ancilla".to_string(),
                Gate::AncillaX => "x ancilla".to_string(),
                Gate::Controlled(k) => format!("controlled slot={k} site={}", self.slot_site(*k)),
                Gate::Evolve { forward: true } => "evolve +H tau".to_string(),
                Gate::Evolve { forward: false } => "evolve -H tau".to_string(),
            };
            s.push_str(&line);
            s.push('\n');
        }
        s
    }
}

/// Executes the circuit and returns C = Σ_w w (⟨σ_x⟩ + i⟨σ_y⟩).
pub fn otoc_run(circuit: &OtocCircuit, psi0: &DVector<Complex64>) -> Result<Complex64> {
    Ok(circuit.readouts(psi0)?.iter().map(|(w, x, y)| Complex64::new(w * x, w * y)).sum())
}

/// Same as [`otoc_run`] but each ⟨σ_x⟩, ⟨σ_y⟩ is estimated from `shots` projective measurements.
pub fn otoc_run_sampled(circuit: &OtocCircuit, psi0: &DVector<Complex64>, shots: u64, seed: u64) -> Result<Complex64> {
    if shots == 0 {
        return Err(invalid("shots", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = |m: f64| -> Result<f64> {
        let p = ((1.0 + m) / 2.0).clamp(0.0, 1.0);
        let k = Binomial::new(shots, p).map_err(|e| invalid("shots", e.to_string()))?.sample(&mut rng);
        Ok(2.0 * k as f64 / shots as f64 - 1.0)
    };
    let mut c = ZERO;
    for (w, x, y) in circuit.readouts(psi0)? {
        c += Complex64::new(w * est(x)?, w * est(y)?);
    }
    Ok(c)
}

/// ⟨ψ| W′(τ) V′ W(τ) V |ψ⟩ for arbitrary n×n operators, O(τ) = e^{iHτ} O e^{−iHτ}.
#[allow(clippy::too_many_arguments)]
pub fn otoc_direct_ops(
    n_sites: usize,
    site_v: usize,
    site_w: usize,
    ops: [&DMatrix<Complex64>; 4],
    h: &DMatrix<Complex64>,
    tau: f64,
    psi0: &DVector<Complex64>,
) -> Result<Complex64> {
    let n = ops[0].nrows();
    let dim = check_setup(n, n_sites, h, &[site_v, site_w])?;
    if psi0.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: psi0.len() });
    }
    let u = expm_hermitian(h, tau);
    let heis = |o: &DMatrix<Complex64>| u.adjoint() * embed(o, site_w, n_sites) * &u;
    let v = embed(ops[0], site_v, n_sites);
    let w = heis(ops[1]);
    let w_p = heis(ops[2]);
    let v_p = embed(ops[3], site_v, n_sites);
    Ok(psi0.dotc(&(w_p * v_p * w * v * psi0)))
}

/// Direct oracle for C_{α,β,α′,β′} = ⟨Λ_β′^(j)(τ) Λ_α′^(i) Λ_β^(j)(τ) Λ_α^(i)⟩.
#[allow(clippy::too_many_arguments)]
pub fn otoc_direct(n: usize, n_sites: usize, i: usize, alpha: usize, alpha_p: usize, j: usize, beta: usize, beta_p: usize, h: &DMatrix<Complex64>, tau: f64, psi0: &DVector<Complex64>) -> Result<Complex64> {
    let basis = ggm_basis(n)?;
    let m = &basis.matrices;
    for a in [alpha, alpha_p, beta, beta_p] {
        if a >= m.len() {
            return Err(invalid("ggm index", format!("{a} >= {}", m.len())));
        }
    }
    otoc_direct_ops(n_sites, i, j, [&m[alpha], &m[beta], &m[beta_p], &m[alpha_p]], h, tau, psi0)
}

/// Σ w*_β′ v*_α′ w_β v_α C_{α,β,α′,β′} over all GGM indices.
pub fn weighted_otoc(v: &[Complex64], w: &[Complex64], c: impl Fn(usize, usize, usize, usize) -> Result<Complex64>) -> Result<Complex64> {
    let mut total = ZERO;
    for (a, va) in v.iter().enumerate() {
        for (b, wb) in w.iter().enumerate() {
            for (ap, vap) in v.iter().enumerate() {
                for (bp, wbp) in w.iter().enumerate() {
                    let weight = wbp.conj() * vap.conj() * wb * va;
                    if weight != ZERO {
                        total += weight * c(a, b, ap, bp)?;
                    }
                }
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
    }

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
        let v = DVector::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &v / Complex64::new(v.norm(), 0.0)
    }

    #[test]
    fn controlled_not_and_rejection() {
        let b = ggm_basis(2).unwrap();
        let cx = controlled_ggm(&b.matrices[0]).unwrap();
        // control off: identity block
        assert_eq!(cx.view((0, 0), (2, 2)).into_owned(), DMatrix::identity(2, 2));
        assert_eq!(cx[(2, 3)], ONE);
        let b3 = ggm_basis(3).unwrap();
        assert!(matches!(controlled_ggm(&b3.matrices[0]), Err(Error::NotUnitary(_))));
        assert!(matches!(controlled_ggm(&b3.matrices[7]), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn decomposition_reconstructs() {
        for n in 2..=4 {
            for l in ggm_basis(n).unwrap().matrices {
                let sum = unitary_decomposition(&l).iter().fold(DMatrix::zeros(n, n), |acc, (w, u)| {
                    assert!(unitarity_defect(u) < 1e-12);
                    acc + u * Complex64::new(*w, 0.0)
                });
                assert!((sum - l).camax() < 1e-12);
            }
        }
    }

    #[test]
    fn static_pauli_z() {
        let h = DMatrix::zeros(4, 4);
        let mut psi = DVector::zeros(4);
        psi[0] = ONE;
        let c = otoc_circuit(2, 2, 0, 2, 2, 1, 2, 2, &h, 0.7).unwrap();
        assert!((otoc_run(&c, &psi).unwrap() - ONE).norm() < 1e-14);
    }

    #[test]
    fn circuit_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 3] {
            let dim = n * n;
            let basis = ggm_basis(n).unwrap();
            for _ in 0..4 {
                let h = random_hermitian(dim, &mut rng);
                let psi = random_state(dim, &mut rng);
                let tau = rng.random_range(0.0..2.0);
                let idx: Vec<usize> = (0..4).map(|_| rng.random_range(0..basis.len())).collect();
                let c = otoc_circuit(n, 2, 0, idx[0], idx[1], 1, idx[2], idx[3], &h, tau).unwrap();
                let run = otoc_run(&c, &psi).unwrap();
                let direct = otoc_direct(n, 2, 0, idx[0], idx[1], 1, idx[2], idx[3], &h, tau, &psi).unwrap();
                assert!((run - direct).norm() < 1e-10, "{run} vs {direct}");
            }
        }
    }

    #[test]
    fn sampled_readout_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(4, &mut rng);
        let psi = random_state(4, &mut rng);
        let c = otoc_circuit(2, 2, 0, 0, 1, 1, 2, 0, &h, 0.4).unwrap();
        let exact = otoc_run(&c, &psi).unwrap();
        let s = otoc_run_sampled(&c, &psi, 200_000, 1).unwrap();
        assert!((s - exact).norm() < 0.02);
        assert_eq!(s, otoc_run_sampled(&c, &psi, 200_000, 1).unwrap());
    }

    #[test]
    fn gauge_gate_realizes_symmetric_and_antisymmetric() {
        let n = 3;
        let b = ggm_basis(2).unwrap();
        for (chi_b, target) in [(Complex64::new(1.0, 0.0), &b.matrices[0]), (Complex64::new(0.0, 1.0), &b.matrices[1])] {
            let mut worst = Vec::new();
            for lam in [100.0, 1000.0] {
                let g = controlled_ggm_via_gauge(n, 0, 1, ONE, chi_b, lam, 0.1).unwrap();
                worst.push(1.0 - g.fidelity(n, 0, 1, target, g.time));
            }
            assert!(worst[0] < 10.0 / 100f64.powi(2), "{worst:?}");
            assert!(worst[1] < worst[0]);
        }
        let off = controlled_ggm_via_gauge(n, 0, 1, ONE, ZERO, 100.0, 0.1).unwrap();
        assert!(off.time.is_infinite());
    }
}
