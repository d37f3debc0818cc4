//! Backends against a dense-matrix reference built from matrix exponentials,
//! and the tensor-network backend against the state vector.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use floquet_core::backend::sv::StateVector;
use floquet_core::backend::tns::GaugedTns;
use floquet_core::backend::{BackendOptions, RegaugePolicy, Registry};
use floquet_core::circuit::{floquet_cycle, FloquetParams};
use floquet_core::lattice::{build_chain, build_heavy_hex, make_pattern, InitialPattern, LatticeGraph, LatticeKind, PatternKind};

/// `exp(-i θ/2 H)` for a diagonal `H` is trivial; the transverse term is
/// exponentiated densely so that none of the gate code is reused.
fn dense_floquet(params: &FloquetParams, g: &LatticeGraph) -> DMatrix<C64> {
    let l = g.num_qubits();
    let dim = 1usize << l;
    let bit = |s: usize, q: usize| ((s >> q) & 1) as f64;
    let z = |s: usize, q: usize| 1.0 - 2.0 * bit(s, q);
    let mut hx = DMatrix::<C64>::zeros(dim, dim);
    for s in 0..dim {
        for q in 0..l {
            hx[(s ^ (1 << q), s)] += C64::new(1.0, 0.0);
        }
    }
    let kick = (hx * C64::new(0.0, -params.theta_x / 2.0)).exp();
    let diag = DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return C64::new(0.0, 0.0);
        }
        let zz: f64 = g.edges().iter().map(|&(a, b)| z(r, a) * z(r, b)).sum();
        let zs: f64 = (0..l).map(|q| z(r, q)).sum();
        C64::from_polar(1.0, -(params.theta_j * zz + params.theta_z * zs) / 2.0)
    });
    diag * kick
}

fn dense_z(psi: &nalgebra::DVector<C64>, l: usize) -> Vec<f64> {
    (0..l)
        .map(|q| psi.iter().enumerate().map(|(s, a)| a.norm_sqr() * if s >> q & 1 == 0 { 1.0 } else { -1.0 }).sum())
        .collect()
}

fn product_vector(p: &InitialPattern) -> nalgebra::DVector<C64> {
    let index = p.bits().iter().enumerate().map(|(q, &b)| (b as usize) << q).sum::<usize>();
    let mut v = nalgebra::DVector::zeros(1 << p.bits().len());
    v[index] = C64::new(1.0, 0.0);
    v
}

fn run_backend(name: &str, chi: usize, g: &LatticeGraph, p: &InitialPattern, params: &FloquetParams, steps: usize) -> Vec<Vec<f64>> {
    let opts = BackendOptions { chi, ..Default::default() };
    let mut ev = Registry::default().create(name, &opts).unwrap().prepare(g, p).unwrap();
    let prog = floquet_cycle(params, g);
    let mut out = vec![ev.expect_z_all().unwrap()];
    for _ in 0..steps {
        ev.apply_cycle(&prog).unwrap();
        out.push(ev.expect_z_all().unwrap());
    }
    out
}

fn dense_run(g: &LatticeGraph, p: &InitialPattern, params: &FloquetParams, steps: usize) -> Vec<Vec<f64>> {
    let u = dense_floquet(params, g);
    let mut psi = product_vector(p);
    let mut out = vec![dense_z(&psi, g.num_qubits())];
    for _ in 0..steps {
        psi = &u * psi;
        out.push(dense_z(&psi, g.num_qubits()));
    }
    out
}

fn max_dev(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// A 7-vertex tree with a degree-3 vertex, like a heavy-hex bridge junction.
fn tree7() -> LatticeGraph {
    LatticeGraph::new(7, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (5, 6)], None, LatticeKind::Custom).unwrap()
}

fn ring6() -> LatticeGraph {
    LatticeGraph::new(6, (0..6).map(|i| (i, (i + 1) % 6)), None, LatticeKind::Custom).unwrap()
}

const POINTS: [(f64, f64); 4] = [(0.9, 0.5), (0.8, 0.0), (0.73, 0.31), (1.0, 1.0)];

#[test]
fn statevector_matches_dense_reference() {
    for g in [build_chain(5).unwrap(), ring6(), tree7()] {
        let p = InitialPattern::explicit((0..g.num_qubits()).map(|q| (q % 3 == 0) as u8).collect()).unwrap();
        for (tx, tz) in POINTS {
            let params = FloquetParams::standard(tx * PI, tz * PI);
            let d = max_dev(&run_backend("sv", 1, &g, &p, &params, 12), &dense_run(&g, &p, &params, 12));
            assert!(d < 1e-12, "({tx}, {tz}) on {} qubits: {d:e}", g.num_qubits());
        }
    }
}

#[test]
fn generic_coupling_angle_matches_dense_reference() {
    let g = ring6();
    let p = make_pattern(&g, PatternKind::DomainWall, None).unwrap();
    let params = FloquetParams::new(-0.37, 2.1, 0.4);
    let d = max_dev(&run_backend("sv", 1, &g, &p, &params, 8), &dense_run(&g, &p, &params, 8));
    assert!(d < 1e-12, "{d:e}");
}

#[test]
fn full_bond_mps_matches_dense_reference() {
    let g = build_chain(6).unwrap();
    let p = make_pattern(&g, PatternKind::DomainWall, None).unwrap();
    for (tx, tz) in POINTS {
        let params = FloquetParams::standard(tx * PI, tz * PI);
        let d = max_dev(&run_backend("mps", 8, &g, &p, &params, 15), &dense_run(&g, &p, &params, 15));
        assert!(d < 1e-10, "({tx}, {tz}): {d:e}");
    }
}

#[test]
fn tree_tns_is_exact_without_truncation() {
    for g in [tree7(), build_chain(6).unwrap()] {
        let p = InitialPattern::explicit((0..g.num_qubits()).map(|q| (q % 2) as u8).collect()).unwrap();
        for (tx, tz) in POINTS {
            let params = FloquetParams::standard(tx * PI, tz * PI);
            let d = max_dev(&run_backend("tns", 16, &g, &p, &params, 15), &dense_run(&g, &p, &params, 15));
            assert!(d < 1e-8, "({tx}, {tz}) on {} qubits: {d:e}", g.num_qubits());
        }
    }
}

#[test]
fn contracted_loop_tns_matches_dense_reference() {
    // On a loop the gauge-local expectation is approximate, but the state
    // itself is exact while every bond stays below the cap.
    let g = ring6();
    let p = InitialPattern::explicit(vec![0, 1, 1, 0, 0, 1]).unwrap();
    let params = FloquetParams::standard(0.8 * PI, 0.5 * PI);
    let mut s = GaugedTns::init_product(&p, &g, 64).unwrap();
    let dense = dense_run(&g, &p, &params, 5);
    for (n, row) in dense.iter().enumerate().skip(1) {
        s.cycle(&params, RegaugePolicy::EveryStep, 1e-10, 500).unwrap();
        assert!(s.bond_dims().iter().all(|&d| d < 64));
        let d = max_dev(&[s.to_expectations().unwrap()], std::slice::from_ref(row));
        assert!(d < 1e-8, "cycle {n}: {d:e}");
    }
}

fn ring12_sv(params: &FloquetParams, steps: usize) -> (LatticeGraph, InitialPattern, Vec<Vec<f64>>) {
    let g = build_heavy_hex(1, 1).unwrap();
    let p = make_pattern(&g, PatternKind::Stripe, None).unwrap();
    let mut sv = StateVector::init_product(&p, 26).unwrap();
    let prog = floquet_cycle(params, &g);
    let mut out = vec![sv.expect_z_all()];
    for _ in 0..steps {
        sv.apply_program(&prog);
        out.push(sv.expect_z_all());
    }
    (g, p, out)
}

fn tns_series(g: &LatticeGraph, p: &InitialPattern, params: &FloquetParams, chi: usize, policy: RegaugePolicy, steps: usize) -> Vec<Vec<f64>> {
    let mut s = GaugedTns::init_product(p, g, chi).unwrap();
    let mut out = vec![s.expect_z_all(1e-6).unwrap()];
    for _ in 0..steps {
        s.cycle(params, policy, 1e-8, 300).unwrap();
        if policy == RegaugePolicy::BeforeMeasurement {
            s.tsu_regauge(1e-8, 300).unwrap();
        }
        out.push(s.expect_z_all(1e-6).unwrap());
    }
    out
}

#[test]
fn ring12_five_cycles_match_statevector() {
    let params = FloquetParams::standard(0.9 * PI, 0.5 * PI);
    let (g, p, sv) = ring12_sv(&params, 5);
    let tns = tns_series(&g, &p, &params, 16, RegaugePolicy::EveryStep, 5);
    let d = max_dev(&tns, &sv);
    assert!(d <= 1e-6, "{d:e}");
}

#[test]
fn regauge_policies_agree() {
    let params = FloquetParams::standard(0.9 * PI, 0.5 * PI);
    let (g, p, _) = ring12_sv(&params, 0);
    let a = tns_series(&g, &p, &params, 16, RegaugePolicy::EveryStep, 10);
    let b = tns_series(&g, &p, &params, 16, RegaugePolicy::BeforeMeasurement, 10);
    let zbar = |s: &[Vec<f64>]| -> Vec<Vec<f64>> { s.iter().map(|r| vec![r.iter().sum::<f64>() / r.len() as f64]).collect() };
    let d = max_dev(&zbar(&a), &zbar(&b));
    assert!(d <= 1e-4, "{d:e}");
}

#[test]
fn larger_bond_is_closer_to_statevector() {
    let params = FloquetParams::standard(0.8 * PI, 0.5 * PI);
    let (g, p, sv) = ring12_sv(&params, 20);
    let small = tns_series(&g, &p, &params, 4, RegaugePolicy::EveryStep, 20);
    let large = tns_series(&g, &p, &params, 32, RegaugePolicy::EveryStep, 20);
    for n in 1..=20 {
        let e = |s: &[Vec<f64>]| max_dev(&s[n..=n], &sv[n..=n]);
        assert!(e(&large) <= e(&small) + 1e-12, "step {n}: chi 32 {:e} vs chi 4 {:e}", e(&large), e(&small));
    }
}

#[test]
fn local_norm_stays_at_one() {
    let params = FloquetParams::standard(0.85 * PI, 0.25 * PI);
    let (g, p, _) = ring12_sv(&params, 0);
    let mut s = GaugedTns::init_product(&p, &g, 8).unwrap();
    for _ in 0..100 {
        s.cycle(&params, RegaugePolicy::EveryStep, 1e-8, 300).unwrap();
    }
    for q in 0..g.num_qubits() {
        assert!((s.local_norm(q) - 1.0).abs() <= 1e-6, "qubit {q}: {}", s.local_norm(q));
    }
}
