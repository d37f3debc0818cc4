use std::f64::consts::PI;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use floquet_core::analysis::{dft, find_dtqc_peaks, PeakOptions};
use floquet_core::backend::sv::StateVector;
use floquet_core::backend::tns::GaugedTns;
use floquet_core::backend::RegaugePolicy;
use floquet_core::circuit::{floquet_cycle, FloquetParams};
use floquet_core::lattice::{
    build_chain, build_heavy_hex, load_coupling_map, serialize_coupling_map, InitialPattern, LatticeGraph, LatticeKind,
};
use floquet_core::noise::{contaminate, mitigate, Channel, EstimatedSeries};

fn series(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Random tree: vertex `i > 0` hangs off a uniformly chosen earlier vertex.
fn tree(max_vertices: usize) -> impl Strategy<Value = LatticeGraph> {
    (3..=max_vertices)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(any::<prop::sample::Index>(), n - 1)))
        .prop_filter_map("degree above 3", |(n, parents)| {
            let edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, p)| (p.index(i + 1), i + 1)).collect();
            let g = LatticeGraph::new(n, edges, None, LatticeKind::Custom).ok()?;
            (g.max_degree() <= 3).then_some(g)
        })
}

fn bits(n: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_scales_with_amplitude(x in series(40), c in -3.0f64..3.0) {
        let a = dft(&x, 40).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let b = dft(&scaled, 40).unwrap();
        for k in 0..40 {
            prop_assert!((b.amps[k] - c.abs() * a.amps[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn real_series_has_mirrored_spectrum(x in series(37)) {
        let s = dft(&x, 37).unwrap();
        for k in 1..37 {
            prop_assert!((s.amps[k] - s.amps[37 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval(x in series(50)) {
        let s = dft(&x, 50).unwrap();
        let time: f64 = x.iter().map(|v| v * v).sum::<f64>() / 50.0;
        let freq: f64 = s.amps.iter().map(|a| a * a).sum();
        prop_assert!((time - freq).abs() < 1e-10);
    }

    #[test]
    fn offset_only_moves_the_zero_bin(x in series(30), c in -2.0f64..2.0) {
        let a = dft(&x, 30).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let b = dft(&shifted, 30).unwrap();
        for k in 1..30 {
            prop_assert!((a.amps[k] - b.amps[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn period_doubling_shifts_by_half(x in series(60)) {
        let a = dft(&x, 60).unwrap();
        let flipped: Vec<f64> = x.iter().enumerate().map(|(n, v)| if n % 2 == 0 { *v } else { -v }).collect();
        let b = dft(&flipped, 60).unwrap();
        for k in 0..60 {
            prop_assert!((b.amps[k] - a.amps[(k + 30) % 60]).abs() < 1e-12);
        }
    }

    #[test]
    fn beat_is_resolved_at_its_bin(j in 3usize..24, phase in 0.0f64..1.0) {
        let x: Vec<f64> = (0..=100)
            .map(|n| (PI * n as f64).cos() * (2.0 * PI * (j as f64 * n as f64 / 100.0) + phase).cos())
            .collect();
        let mut s = dft(&x, 100).unwrap();
        let p = find_dtqc_peaks(&mut s, &PeakOptions::default()).unwrap();
        let env = p.omega_env.unwrap();
        prop_assert!((env - j as f64 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn mitigation_inverts_global_depolarizing(
        ideal in series(30),
        f in prop::collection::vec(0.05f64..=1.0, 30),
        z0 in prop::sample::select(vec![1.0, -1.0]),
    ) {
        let exact = |v: Vec<f64>| EstimatedSeries::new(v, vec![0.0; 30], 0, Channel::Raw);
        let calib_ideal: Vec<f64> = (0..30).map(|n| if n % 2 == 0 { z0 } else { -z0 }).collect();
        let raw = contaminate(&exact(ideal.clone()), &f, Channel::Raw);
        let calib = contaminate(&exact(calib_ideal), &f, Channel::Calibration);
        let m = mitigate(&raw, &calib, 1e-3).unwrap();
        for n in 0..30 {
            prop_assert!((m.values[n] - ideal[n]).abs() < 1e-12, "step {n}");
        }
    }

    #[test]
    fn heavy_hex_layers_partition_edges(rows in 1usize..4, cols in 1usize..4) {
        let g = build_heavy_hex(rows, cols).unwrap();
        let mut seen = vec![0; g.num_edges()];
        for layer in g.layers() {
            let mut touched = vec![false; g.num_qubits()];
            for &e in layer {
                seen[e] += 1;
                let (a, b) = g.edges()[e];
                prop_assert!(!touched[a] && !touched[b]);
                touched[a] = true;
                touched[b] = true;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert!(g.bipartition().is_some());
        prop_assert!(g.layers().len() <= 3);
        let back = load_coupling_map(&serialize_coupling_map(&g)).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn untruncated_trees_match_statevector(
        g in tree(10),
        b in bits(10),
        tx in 0.5f64..1.0,
        tz in 0.0f64..1.0,
    ) {
        let p = InitialPattern::explicit(b[..g.num_qubits()].to_vec()).unwrap();
        let params = FloquetParams::standard(tx * PI, tz * PI);
        let mut sv = StateVector::init_product(&p, 26).unwrap();
        let mut s = GaugedTns::init_product(&p, &g, 64).unwrap();
        let prog = floquet_cycle(&params, &g);
        for _ in 0..8 {
            sv.apply_program(&prog);
            s.cycle(&params, RegaugePolicy::EveryStep, 1e-10, 10).unwrap();
        }
        prop_assert_eq!(s.cum_truncation(), 0.0);
        let (a, z) = (s.expect_z_all(1e-8).unwrap(), sv.expect_z_all());
        for q in 0..g.num_qubits() {
            prop_assert!((a[q] - z[q]).abs() < 1e-8, "qubit {q}: {} vs {}", a[q], z[q]);
        }
    }

    #[test]
    fn regauging_and_relabeling_preserve_the_state(
        n in 5usize..9,
        b in bits(9),
        chi in 2usize..5,
        cycles in 1usize..4,
        tx in 0.5f64..1.0,
        tz in 0.0f64..1.0,
        shuffle in any::<u64>(),
    ) {
        // a ring with one chord, so there are two loops
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).chain([(0, n / 2)]).collect();
        let g = LatticeGraph::new(n, edges, None, LatticeKind::Custom).unwrap();
        let p = InitialPattern::explicit(b[..n].to_vec()).unwrap();
        let params = FloquetParams::standard(tx * PI, tz * PI);
        let mut s = GaugedTns::init_product(&p, &g, chi).unwrap();
        for _ in 0..cycles {
            s.cycle(&params, RegaugePolicy::BeforeMeasurement, 1e-8, 1).unwrap();
        }
        let before = s.to_expectations().unwrap();
        s.tsu_regauge(1e-10, 1000).unwrap();
        let after = s.to_expectations().unwrap();
        for q in 0..n {
            prop_assert!((before[q] - after[q]).abs() <= 1e-10);
        }

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let r = s.relabeled(&perm).unwrap();
        prop_assert!((r.vidal_gauge_error() - s.vidal_gauge_error()).abs() <= 1e-12);
        let moved = r.to_expectations().unwrap();
        for q in 0..n {
            prop_assert!((moved[perm[q]] - after[q]).abs() <= 1e-10);
        }
    }
}

#[test]
fn chain_is_two_colored() {
    let g = build_chain(9).unwrap();
    assert_eq!(g.layers().len(), 2);
    assert_eq!(g.cycle_rank(), 0);
}
