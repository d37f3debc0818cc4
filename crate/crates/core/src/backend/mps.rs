//! Vidal-form matrix product states evolved by TEBD on nearest-neighbour
//! chains.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{check_pattern, Backend, BackendError, Diagnostics, Evolver, Result};
use crate::circuit::{floquet_cycle, gates, FloquetParams, Gate, GateKind, GateProgram, Targets};
use crate::lattice::{InitialPattern, LatticeGraph};
use crate::linalg::{pinv_weights, two_site_update, BondUpdate, Tensor, Truncation};

/// Site tensors `Γ_j` with legs `[left, phys, right]` and bond weights
/// `λ_j` between sites `j` and `j + 1`.
#[derive(Debug, Clone)]
pub struct MpsState {
    sites: Vec<Tensor>,
    bonds: Vec<Vec<f64>>,
    chi_max: usize,
    cum_truncation: f64,
}

impl MpsState {
    pub fn init_product(pattern: &InitialPattern, chi_max: usize) -> Self {
        let sites = pattern
            .bits()
            .iter()
            .map(|&b| {
                let mut data = vec![C64::new(0.0, 0.0); 2];
                data[b as usize] = C64::new(1.0, 0.0);
                Tensor::new(vec![1, 2, 1], data)
            })
            .collect();
        let bonds = vec![vec![1.0]; pattern.len().saturating_sub(1)];
        Self { sites, bonds, chi_max: chi_max.max(1), cum_truncation: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn cum_truncation(&self) -> f64 {
        self.cum_truncation
    }

    pub fn bond_weights(&self) -> &[Vec<f64>] {
        &self.bonds
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.bonds.iter().map(Vec::len).collect()
    }

    pub fn site_tensor(&self, j: usize) -> &Tensor {
        &self.sites[j]
    }

    fn left_weights(&self, j: usize) -> Option<&[f64]> {
        j.checked_sub(1).map(|b| self.bonds[b].as_slice())
    }

    fn right_weights(&self, j: usize) -> Option<&[f64]> {
        self.bonds.get(j).map(Vec::as_slice)
    }

    pub fn apply_single(&mut self, q: usize, m: &Matrix2<C64>) {
        let t = &mut self.sites[q];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let data = t.data_mut();
        for a in 0..l {
            for c in 0..r {
                let (i0, i1) = (a * 2 * r + c, a * 2 * r + r + c);
                let (x, y) = (data[i0], data[i1]);
                data[i0] = m[(0, 0)] * x + m[(0, 1)] * y;
                data[i1] = m[(1, 0)] * x + m[(1, 1)] * y;
            }
        }
    }

    /// Gate across the bond between sites `j` and `j + 1`, indexed
    /// `2 * s_j + s_{j+1}`.
    fn bond_update(&self, j: usize, gate: &Matrix4<C64>) -> Result<BondUpdate> {
        let mut a = self.sites[j].clone();
        if let Some(w) = self.left_weights(j) {
            a.scale_leg(0, w);
        }
        let mut b = self.sites[j + 1].clone();
        if let Some(w) = self.right_weights(j + 1) {
            b.scale_leg(2, w);
        }
        let left = a.to_matrix(1);
        let right = b.permute(&[2, 1, 0]).to_matrix(1);
        Ok(two_site_update(&left, &right, &self.bonds[j], gate, Truncation { chi_max: self.chi_max })?)
    }

    fn store(&mut self, j: usize, up: BondUpdate) {
        let k = up.weights.len();
        let l = up.left.nrows();
        let mut a = Tensor::from_matrix(&up.left, vec![l, 2, k]);
        if let Some(w) = self.left_weights(j) {
            a.scale_leg(0, &pinv_weights(w));
        }
        let r = up.right.nrows();
        let mut b = Tensor::from_matrix(&up.right, vec![r, 2, k]).permute(&[2, 1, 0]);
        if let Some(w) = self.right_weights(j + 1) {
            b.scale_leg(2, &pinv_weights(w));
        }
        self.sites[j] = a;
        self.sites[j + 1] = b;
        self.bonds[j] = up.weights;
        self.cum_truncation += up.discarded;
    }

    /// Applies a two-qubit gate on adjacent sites and returns the discarded
    /// weight.
    pub fn apply_two(&mut self, a: usize, b: usize, gate: &Matrix4<C64>) -> Result<f64> {
        let (j, gate) = match (a, b) {
            _ if b == a + 1 => (a, *gate),
            _ if a == b + 1 => (b, gates::swap_targets(gate)),
            _ => return Err(BackendError::DimensionMismatch(format!("sites {a} and {b} are not adjacent"))),
        };
        let up = self.bond_update(j, &gate)?;
        let d = up.discarded;
        self.store(j, up);
        Ok(d)
    }

    /// Two-qubit gates on disjoint bonds, computed concurrently.
    fn apply_layer(&mut self, layer: &[Gate]) -> Result<()> {
        let jobs: Vec<(usize, Matrix4<C64>)> = layer
            .iter()
            .map(|g| match g.targets {
                Targets::Two(a, b) if b == a + 1 => Ok((a, g.two_matrix())),
                Targets::Two(a, b) if a == b + 1 => Ok((b, gates::swap_targets(&g.two_matrix()))),
                _ => Err(BackendError::DimensionMismatch(format!("{:?} is not a chain bond", g.targets))),
            })
            .collect::<Result<_>>()?;
        let updates: Vec<BondUpdate> =
            jobs.par_iter().map(|(j, m)| self.bond_update(*j, m)).collect::<Result<_>>()?;
        for ((j, _), up) in jobs.into_iter().zip(updates) {
            self.store(j, up);
        }
        Ok(())
    }

    pub fn apply_program(&mut self, program: &GateProgram) -> Result<()> {
        let gates = program.gates();
        let mut i = 0;
        while i < gates.len() {
            let g = &gates[i];
            match (g.kind, g.targets) {
                (GateKind::Rzz, _) => {
                    let start = i;
                    while i < gates.len() && gates[i].kind == GateKind::Rzz && gates[i].layer_tag == g.layer_tag {
                        i += 1;
                    }
                    self.apply_layer(&gates[start..i])?;
                    continue;
                }
                (_, Targets::One(q)) => self.apply_single(q, &g.single_matrix()),
                (_, Targets::Two(..)) => unreachable!("only RZZ acts on two qubits"),
            }
            i += 1;
        }
        Ok(())
    }

    /// One Floquet cycle on a chain graph.
    pub fn cycle(&mut self, params: &FloquetParams, graph: &LatticeGraph) -> Result<()> {
        check_chain(graph)?;
        self.apply_program(&floquet_cycle(params, graph))
    }

    /// Local contraction with the adjacent bond weights.
    pub fn expect_z(&self, q: usize) -> f64 {
        let t = &self.sites[q];
        let (l, r) = (t.shape()[0], t.shape()[2]);
        let wl = self.left_weights(q);
        let wr = self.right_weights(q);
        let (mut num, mut den) = (0.0, 0.0);
        for a in 0..l {
            let la = wl.map_or(1.0, |w| w[a] * w[a]);
            for s in 0..2 {
                for c in 0..r {
                    let rc = wr.map_or(1.0, |w| w[c] * w[c]);
                    let p = t.data()[(a * 2 + s) * r + c].norm_sqr() * la * rc;
                    den += p;
                    num += if s == 0 { p } else { -p };
                }
            }
        }
        num / den
    }

    pub fn expect_z_all(&self) -> Vec<f64> {
        (0..self.len()).map(|q| self.expect_z(q)).collect()
    }

    /// Norm computed locally at site `q`; 1 in an exact Vidal form.
    pub fn local_norm(&self, q: usize) -> f64 {
        let t = &self.sites[q];
        let r = t.shape()[2];
        let wl = self.left_weights(q);
        let wr = self.right_weights(q);
        let mut den = 0.0;
        for (i, z) in t.data().iter().enumerate() {
            let (a, c) = (i / (2 * r), i % r);
            den += z.norm_sqr() * wl.map_or(1.0, |w| w[a] * w[a]) * wr.map_or(1.0, |w| w[c] * w[c]);
        }
        den.sqrt()
    }
}

fn check_chain(graph: &LatticeGraph) -> Result<()> {
    if let Some(&(a, b)) = graph.edges().iter().find(|&&(a, b)| b != a + 1) {
        return Err(BackendError::GraphMismatch {
            backend: "mps".into(),
            reason: format!("edge ({a}, {b}) is not a nearest-neighbour chain bond"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct MpsBackend {
    chi: usize,
}

impl MpsBackend {
    pub fn new(chi: usize) -> Self {
        Self { chi }
    }
}

impl Backend for MpsBackend {
    fn name(&self) -> &'static str {
        "mps"
    }

    fn check_graph(&self, graph: &LatticeGraph) -> Result<()> {
        check_chain(graph)
    }

    fn prepare(&self, graph: &LatticeGraph, pattern: &InitialPattern) -> Result<Box<dyn Evolver>> {
        check_chain(graph)?;
        check_pattern(graph, pattern)?;
        Ok(Box::new(MpsState::init_product(pattern, self.chi)))
    }
}

impl Evolver for MpsState {
    fn apply_cycle(&mut self, program: &GateProgram) -> Result<()> {
        self.apply_program(program)
    }

    fn expect_z_all(&mut self) -> Result<Vec<f64>> {
        Ok(MpsState::expect_z_all(self))
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            cum_truncation: self.cum_truncation,
            max_bond: self.bond_dims().into_iter().max().unwrap_or(1),
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::sv::{StateVector, DEFAULT_CAP};
    use crate::lattice::{build_chain, make_pattern, PatternKind};
    use std::f64::consts::PI;

    fn chain_state(l: usize, kind: PatternKind, chi: usize) -> (LatticeGraph, InitialPattern, MpsState) {
        let g = build_chain(l).unwrap();
        let p = make_pattern(&g, kind, None).unwrap();
        let s = MpsState::init_product(&p, chi);
        (g, p, s)
    }

    #[test]
    fn product_states() {
        let (_, _, s) = chain_state(5, PatternKind::Polarized, 4);
        assert_eq!(s.bond_dims(), vec![1; 4]);
        assert_eq!(s.expect_z_all(), vec![1.0; 5]);
        let (_, _, s) = chain_state(4, PatternKind::DomainWall, 4);
        assert_eq!(s.expect_z_all(), vec![1.0, 1.0, -1.0, -1.0]);
        assert!((s.local_norm(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_point_alternates_without_truncation() {
        let (g, p, mut s) = chain_state(8, PatternKind::DomainWall, 1);
        let z0 = p.z_values();
        for n in 1..=10 {
            s.cycle(&FloquetParams::standard(PI, 0.7), &g).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for (z, z0) in s.expect_z_all().iter().zip(&z0) {
                assert!((z - sign * z0).abs() < 1e-12);
            }
        }
        assert_eq!(s.cum_truncation(), 0.0);
    }

    #[test]
    fn full_chi_matches_statevector() {
        let (g, p, mut s) = chain_state(10, PatternKind::DomainWall, 32);
        let mut sv = StateVector::init_product(&p, DEFAULT_CAP).unwrap();
        let params = FloquetParams::standard(0.9 * PI, 0.5 * PI);
        let prog = floquet_cycle(&params, &g);
        for _ in 0..30 {
            s.apply_program(&prog).unwrap();
            sv.apply_program(&prog);
            let worst = s
                .expect_z_all()
                .iter()
                .zip(sv.expect_z_all())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-8, "{worst}");
        }
        assert_eq!(s.cum_truncation(), 0.0);
        for w in s.bond_weights() {
            assert!(w.windows(2).all(|p| p[0] >= p[1]));
            assert!((w.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_chi_truncates() {
        let (g, _, mut s) = chain_state(10, PatternKind::DomainWall, 2);
        for _ in 0..5 {
            s.cycle(&FloquetParams::standard(0.8 * PI, 0.5 * PI), &g).unwrap();
        }
        assert!(s.cum_truncation() > 0.0);
        assert!(s.bond_dims().iter().all(|&d| d <= 2));
    }

    #[test]
    fn reversed_targets() {
        let (_, p, mut s) = chain_state(3, PatternKind::DomainWall, 8);
        let mut sv = StateVector::init_product(&p, DEFAULT_CAP).unwrap();
        for q in 0..3 {
            s.apply_single(q, &gates::rx(0.3 + q as f64));
            sv.apply_single(q, &gates::rx(0.3 + q as f64));
        }
        let g = gates::kron2(&gates::rx(0.5), &gates::rz(0.9)) * gates::rzz(0.4);
        s.apply_two(2, 1, &g).unwrap();
        // oracle: the same operator with qubit 2 as the first target
        let mut amps = sv.amplitudes().to_vec();
        let src = amps.clone();
        for (b, z) in amps.iter_mut().enumerate() {
            let (s2, s1) = (b >> 2 & 1, b >> 1 & 1);
            let row = 2 * s2 + s1;
            *z = (0..4)
                .map(|col| {
                    let src_b = (b & 1) | ((col & 1) << 1) | ((col >> 1) << 2);
                    g[(row, col)] * src[src_b]
                })
                .sum();
        }
        let want = StateVector::from_amplitudes(amps).expect_z_all();
        for (a, b) in s.expect_z_all().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.apply_two(0, 2, &g).is_err());
    }
}
