//! Randomized invariants across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use wgqed::cli::{parse_config, validate, BUNDLED};
use wgqed::compiler::{compile_sidebands, forward_couplings, CompileOptions, SidebandProgram};
use wgqed::device::{vdw_profile, DeviceParams};
use wgqed::dynamics::dense::{eigh, expm_hermitian};
use wgqed::dynamics::master::pure_density;
use wgqed::dynamics::{evolve_master, evolve_unitary, Channel, Factor, HilbertSpace, OdeOptions, OpSum, OpenSystemModel, Schedule, SparseOp};
use wgqed::models::{ggm_basis, sy_sample};
use wgqed::otoc::otoc_direct;
use wgqed::phonons::{closed_form_squared, phonon_spectrum, stiffness_matrix, MechanicalChain};
use wgqed::pipelines::chain_with_min_gap;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cvec(parts: &[(f64, f64)]) -> Vec<Complex64> {
    parts.iter().map(|&(a, b)| c(a, b)).collect()
}

fn hermitian(dim: usize, parts: &[(f64, f64)]) -> DMatrix<Complex64> {
    let a = DMatrix::from_iterator(dim, dim, cvec(parts));
    (&a + a.adjoint()) * c(0.5, 0.0)
}

fn normalized(parts: &[(f64, f64)]) -> DVector<Complex64> {
    let v = DVector::from_vec(cvec(parts));
    let n = v.norm();
    v / c(n, 0.0)
}

fn pairs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn chain() -> impl Strategy<Value = MechanicalChain> {
    (1..=50usize, 0.1..10.0f64, 0.1..10.0f64, 0.0..20.0f64, 0.2..5.0f64).prop_map(|(n, m, w, g, l)| MechanicalChain::new(n, m, w, g, l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn closed_form_matches_dense_spectrum(ch in chain()) {
        let closed = closed_form_squared(&ch);
        let mut dense: Vec<f64> = (stiffness_matrix(&ch) / ch.mass).symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in closed.iter().zip(&dense) {
            prop_assert!((x - y).abs() <= 1e-10 * y.abs());
        }
    }

    #[test]
    fn mode_matrix_diagonalizes_stiffness(ch in chain()) {
        let s = phonon_spectrum(&ch).unwrap();
        let m = stiffness_matrix(&ch);
        let d = s.b.transpose() * &m * &s.b;
        let scale = m.norm();
        let off = (0..ch.n).flat_map(|i| (0..ch.n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| d[(i, j)].abs()).fold(0.0, f64::max);
        prop_assert!(off <= 1e-10 * scale);
        prop_assert!((s.b.transpose() * &s.b - DMatrix::identity(ch.n, ch.n)).amax() < 1e-12);
        prop_assert!(s.eps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn bandwidth_grows_with_coupling(n in 2..30usize, g in 0.0..10.0f64, dg in 0.01..5.0f64) {
        let bw = |g| {
            let e = phonon_spectrum(&MechanicalChain::new(n, 1.0, 3.0, g, 1.0).unwrap()).unwrap().eps;
            e[n - 1] - e[0]
        };
        prop_assert!(bw(g + dg) > bw(g));
    }

    #[test]
    fn couplings_scale_quadratically(n in 1..=5usize, amp in pairs(30), s in 0.1..3.0f64) {
        let spec = chain_with_min_gap(n, 1000.0, 10.0).unwrap();
        let mut p = SidebandProgram::zeros(n, vec![1.0; n], 0.1, spec.b.clone());
        for (z, &(a, b)) in p.omega.iter_mut().zip(amp.iter().cycle()) {
            *z = c(a, b) * 0.1;
        }
        let base = forward_couplings(&p);
        p.omega.iter_mut().for_each(|z| *z *= s);
        let scaled = forward_couplings(&p);
        prop_assert!(scaled.distance(&base.scaled(s * s)) <= 1e-12 * (1.0 + scaled.norm()));
        prop_assert!(scaled.to_vec().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ggm_expansion_round_trips(n in 2..=6usize, parts in pairs(36)) {
        let basis = ggm_basis(n).unwrap();
        let mut a = hermitian(n, &parts[..n * n]);
        let tr = a.trace() / c(n as f64, 0.0);
        for k in 0..n {
            a[(k, k)] -= tr;
        }
        let coef = basis.expand(&a);
        let back = basis.matrices.iter().zip(&coef).fold(DMatrix::zeros(n, n), |acc, (l, &x)| acc + l * c(x, 0.0));
        prop_assert!((back - a).camax() < 1e-12);
    }

    #[test]
    fn otoc_bounded_by_operator_norms(h in pairs(16), psi in pairs(4), a in 0..3usize, b in 0..3usize, ap in 0..3usize, bp in 0..3usize, tau in 0.0..3.0f64) {
        // Pauli GGMs have unit operator norm
        let h = hermitian(4, &h);
        let v = otoc_direct(2, 2, 0, a, ap, 1, b, bp, &h, tau, &normalized(&psi)).unwrap();
        prop_assert!(v.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn backward_evolution_undoes_forward(h in pairs(9), tau in 0.0..5.0f64) {
        let h = hermitian(3, &h);
        let u = expm_hermitian(&h, tau);
        let back = expm_hermitian(&(-h), tau);
        prop_assert!((back * u - DMatrix::identity(3, 3)).camax() < 1e-10);
    }

    #[test]
    fn sy_couplings_are_symmetric(m in 2..12usize, seed in any::<u64>()) {
        let s = sy_sample(m, 2, 1.0, seed).unwrap();
        prop_assert_eq!(s.couplings.clone(), s.couplings.transpose());
        prop_assert!((0..m).all(|i| s.couplings[(i, i)] == 0.0));
        prop_assert_eq!(sy_sample(m, 2, 1.0, seed).unwrap().couplings, s.couplings);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn unitary_runs_preserve_norm(n in 1..=4usize, fields in pairs(12), psi in pairs(16)) {
        let space = HilbertSpace::spins(n).unwrap();
        let mut op = OpSum::zero();
        for i in 0..n {
            let (x, z) = fields[i];
            op = op.add(&OpSum::pauli(i, 0).scale(c(x, 0.0))).add(&OpSum::pauli(i, 2).scale(c(z, 0.0)));
            if i + 1 < n {
                op = op.add(&OpSum::pauli(i, 0).mul(&OpSum::pauli(i + 1, 0)).scale(c(fields[i + 4].0, 0.0)));
            }
        }
        let h = SparseOp::build(&space, &op);
        let psi0 = normalized(&psi[..1 << n]);
        let grid: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
        for s in evolve_unitary(Schedule::Static(&h), &psi0, &grid, &OdeOptions::default()).unwrap() {
            prop_assert!((s.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn master_equation_stays_physical(rates in prop::collection::vec(0.0..2.0f64, 2), h in pairs(4), psi in pairs(4)) {
        let space = HilbertSpace::spins(2).unwrap();
        let mut op = OpSum::zero();
        for (i, &(x, z)) in h.iter().take(2).enumerate() {
            op = op.add(&OpSum::pauli(i, 0).scale(c(x, 0.0))).add(&OpSum::pauli(i, 2).scale(c(z, 0.0)));
        }
        op = op.add(&OpSum::pauli(0, 1).mul(&OpSum::pauli(1, 1)).scale(c(h[2].0, 0.0)));
        let ops = vec![SparseOp::build(&space, &OpSum::single(c(1.0, 0.0), Factor::Sm(0))), SparseOp::build(&space, &OpSum::single(c(1.0, 0.0), Factor::Sm(1)))];
        let model = OpenSystemModel { h: SparseOp::build(&space, &op), channels: vec![Channel::local("decay", &rates, ops)] };
        let grid: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
        let (rhos, diag) = evolve_master(&model, &pure_density(&normalized(&psi)), &grid, &OdeOptions::default()).unwrap();
        prop_assert!(diag.max_trace_drift < 1e-8 && diag.max_hermiticity_defect < 1e-10 && diag.min_eigenvalue > -1e-8);
        for r in &rhos {
            let (ev, _) = eigh(r);
            prop_assert!(ev[0] > -1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn compiled_programs_reproduce_their_targets(n in prop::sample::select(vec![1usize, 3, 4]), amp in pairs(48), seed in 0..1000u64) {
        let spec = chain_with_min_gap(n, 1000.0, 10.0).unwrap();
        let mut p = SidebandProgram::zeros(n, vec![1.0; n], 0.1, spec.b.clone());
        for (z, &(a, b)) in p.omega.iter_mut().zip(&amp) {
            *z = c(a, b) * 0.1;
        }
        let target = forward_couplings(&p);
        let opts = CompileOptions { seed, ..CompileOptions::default() };
        let r = compile_sidebands(&target, &spec, &vec![1.0; n], 0.1, &opts).unwrap();
        prop_assert!(forward_couplings(&r.program).distance(&target) <= 1e-6 * target.norm());
    }
}

#[test]
fn vdw_profile_is_symmetric_and_decaying() {
    let p = DeviceParams::reference();
    for i in 0..12 {
        for j in 0..12 {
            assert_eq!(vdw_profile(i, j, &p), vdw_profile(j, i, &p));
        }
    }
    let row: Vec<f64> = (0..12).map(|d| vdw_profile(0, d, &p)).collect();
    assert!(row.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn bundled_scenarios_validate() {
    for (name, text) in BUNDLED {
        let root = parse_config(text).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        assert!(validate(&root).is_ok(), "{name}");
    }
}
