//! Gauged tensor-network states on arbitrary graphs: one vertex tensor per
//! qubit, one diagonal gauge (weight vector) per edge.
//!
//! A vertex tensor has legs `[phys, e_1, e_2, ...]` where `e_i` are the
//! incident edges in increasing edge index.

mod gauge;
mod oracle;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{check_pattern, Backend, BackendError, BackendOptions, Diagnostics, Evolver, RegaugeEntry, RegaugePolicy, Result};
use crate::circuit::{floquet_cycle, gates, FloquetParams, Gate, GateKind, GateProgram, Targets};
use crate::lattice::{InitialPattern, LatticeGraph};
use crate::linalg::{pinv_weights, two_site_update, BondUpdate, Tensor, Truncation};

pub use gauge::GaugeReport;

#[derive(Debug, Clone)]
pub struct GaugedTns {
    graph: LatticeGraph,
    incident: Vec<Vec<usize>>,
    vertices: Vec<Tensor>,
    gauges: Vec<Vec<f64>>,
    chi_max: usize,
    cum_truncation: f64,
    sweep_order: Vec<usize>,
}

impl GaugedTns {
    /// Product state: every virtual leg has dimension 1 and every gauge is
    /// `[1]`.
    pub fn init_product(pattern: &InitialPattern, graph: &LatticeGraph, chi_max: usize) -> Result<Self> {
        check_pattern(graph, pattern)?;
        let incident = graph.incident_edges();
        let vertices = pattern
            .bits()
            .iter()
            .zip(&incident)
            .map(|(&b, inc)| {
                let mut shape = vec![2];
                shape.extend(std::iter::repeat_n(1, inc.len()));
                let mut data = vec![C64::new(0.0, 0.0); 2];
                data[b as usize] = C64::new(1.0, 0.0);
                Tensor::new(shape, data)
            })
            .collect();
        Ok(Self {
            sweep_order: gauge::sweep_order(graph),
            graph: graph.clone(),
            incident,
            vertices,
            gauges: vec![vec![1.0]; graph.num_edges()],
            chi_max: chi_max.max(1),
            cum_truncation: 0.0,
        })
    }

    pub fn graph(&self) -> &LatticeGraph {
        &self.graph
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn cum_truncation(&self) -> f64 {
        self.cum_truncation
    }

    pub fn gauge(&self, edge: usize) -> &[f64] {
        &self.gauges[edge]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.gauges.iter().map(Vec::len).collect()
    }

    pub fn vertex_tensor(&self, v: usize) -> &Tensor {
        &self.vertices[v]
    }

    fn leg_of(&self, v: usize, edge: usize) -> usize {
        1 + self.incident[v].iter().position(|&e| e == edge).expect("edge is incident")
    }

    /// Vertex tensor with the gauges of every incident edge except `skip`
    /// absorbed (with the given power).
    fn absorbed(&self, v: usize, skip: Option<usize>, squared: bool) -> Tensor {
        let mut t = self.vertices[v].clone();
        for (i, &e) in self.incident[v].iter().enumerate() {
            if Some(e) == skip {
                continue;
            }
            if squared {
                let w: Vec<f64> = self.gauges[e].iter().map(|x| x * x).collect();
                t.scale_leg(i + 1, &w);
            } else {
                t.scale_leg(i + 1, &self.gauges[e]);
            }
        }
        t
    }

    pub fn apply_single(&mut self, q: usize, m: &Matrix2<C64>) {
        let t = &mut self.vertices[q];
        let half = t.len() / 2;
        let (lo, hi) = t.data_mut().split_at_mut(half);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = m[(0, 0)] * a + m[(0, 1)] * b;
            *y = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }

    /// Permutation bringing `edge` to the last leg and `phys` just before
    /// it, environment legs first.
    fn split_perm(&self, v: usize, edge: usize) -> Vec<usize> {
        let leg = self.leg_of(v, edge);
        let rank = self.vertices[v].rank();
        let mut perm: Vec<usize> = (1..rank).filter(|&l| l != leg).collect();
        perm.push(0);
        perm.push(leg);
        perm
    }

    fn site_matrix(&self, v: usize, edge: usize) -> DMatrix<C64> {
        let perm = self.split_perm(v, edge);
        let rank = perm.len();
        self.absorbed(v, Some(edge), false).permute(&perm).to_matrix(rank - 2)
    }

    /// Reduced two-site update of `edge` with `gate` indexed
    /// `2 * s_a + s_b` for the edge's endpoints `a < b`.
    fn edge_update(&self, edge: usize, gate: &Matrix4<C64>) -> Result<BondUpdate> {
        let (a, b) = self.graph.edges()[edge];
        let left = self.site_matrix(a, edge);
        let right = self.site_matrix(b, edge);
        if self.gauges[edge].is_empty() {
            return Err(BackendError::SingularGauge { edge });
        }
        Ok(two_site_update(&left, &right, &self.gauges[edge], gate, Truncation { chi_max: self.chi_max })?)
    }

    fn restore(&self, v: usize, edge: usize, m: &DMatrix<C64>, k: usize) -> Tensor {
        let perm = self.split_perm(v, edge);
        let old = self.vertices[v].shape();
        let mut shape: Vec<usize> = perm[..perm.len() - 1].iter().map(|&l| old[l]).collect();
        shape.push(k);
        let mut inverse = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        let mut t = Tensor::from_matrix(m, shape).permute(&inverse);
        for (i, &e) in self.incident[v].iter().enumerate() {
            if e != edge {
                t.scale_leg(i + 1, &pinv_weights(&self.gauges[e]));
            }
        }
        t
    }

    fn store(&mut self, edge: usize, up: BondUpdate) {
        let (a, b) = self.graph.edges()[edge];
        let k = up.weights.len();
        let ta = self.restore(a, edge, &up.left, k);
        let tb = self.restore(b, edge, &up.right, k);
        self.vertices[a] = ta;
        self.vertices[b] = tb;
        self.gauges[edge] = up.weights;
        self.cum_truncation += up.discarded;
    }

    /// Applies a two-qubit gate on `edge`; `gate` is indexed by the edge's
    /// endpoints in increasing order.
    pub fn apply_two(&mut self, edge: usize, gate: &Matrix4<C64>) -> Result<()> {
        if edge >= self.graph.num_edges() {
            return Err(BackendError::DimensionMismatch(format!("no edge {edge}")));
        }
        let up = self.edge_update(edge, gate)?;
        self.store(edge, up);
        Ok(())
    }

    /// Gate targets to `(edge, gate in edge order)`.
    fn resolve(&self, g: &Gate) -> Result<(usize, Matrix4<C64>)> {
        let Targets::Two(a, b) = g.targets else {
            return Err(BackendError::DimensionMismatch("single-qubit gate on an edge".into()));
        };
        let edge = self
            .graph
            .edge_index(a, b)
            .ok_or_else(|| BackendError::DimensionMismatch(format!("({a}, {b}) is not an edge")))?;
        let m = g.two_matrix();
        Ok((edge, if a < b { m } else { gates::swap_targets(&m) }))
    }

    /// Vertex-disjoint two-qubit gates, updated concurrently.
    fn apply_layer(&mut self, layer: &[Gate]) -> Result<()> {
        let jobs: Vec<(usize, Matrix4<C64>)> = layer.iter().map(|g| self.resolve(g)).collect::<Result<_>>()?;
        let updates: Vec<BondUpdate> =
            jobs.par_iter().map(|(e, m)| self.edge_update(*e, m)).collect::<Result<_>>()?;
        for ((e, _), up) in jobs.into_iter().zip(updates) {
            self.store(e, up);
        }
        Ok(())
    }

    /// Applies the program; `after_layer` runs after each two-qubit layer.
    pub fn apply_program_with(
        &mut self,
        program: &GateProgram,
        mut after_layer: impl FnMut(&mut Self) -> Result<()>,
    ) -> Result<()> {
        let gates = program.gates();
        let mut i = 0;
        while i < gates.len() {
            let g = &gates[i];
            if g.kind == GateKind::Rzz {
                let start = i;
                while i < gates.len() && gates[i].kind == GateKind::Rzz && gates[i].layer_tag == g.layer_tag {
                    i += 1;
                }
                self.apply_layer(&gates[start..i])?;
                after_layer(self)?;
                continue;
            }
            if let Targets::One(q) = g.targets {
                self.apply_single(q, &g.single_matrix());
            }
            i += 1;
        }
        Ok(())
    }

    pub fn apply_program(&mut self, program: &GateProgram) -> Result<()> {
        self.apply_program_with(program, |_| Ok(()))
    }

    /// One Floquet cycle with regauging per `policy`. Returns the reports
    /// of the regauge calls made.
    pub fn cycle(
        &mut self,
        params: &FloquetParams,
        policy: RegaugePolicy,
        tol: f64,
        max_sweeps: usize,
    ) -> Result<Vec<GaugeReport>> {
        let program = floquet_cycle(params, &self.graph);
        let mut reports = Vec::new();
        self.apply_program_with(&program, |s| {
            if policy == RegaugePolicy::EveryStep {
                reports.push(s.tsu_regauge(tol, max_sweeps)?);
            }
            Ok(())
        })?;
        Ok(reports)
    }

    /// `<Z_q>` by local contraction with squared gauges; requires the state
    /// to be within `tol` of the Vidal gauge.
    pub fn expect_z(&self, q: usize, tol: f64) -> Result<f64> {
        let c = self.vidal_gauge_error();
        if c > tol {
            return Err(BackendError::GaugeTooLoose { c, tol });
        }
        Ok(self.local_z(q))
    }

    pub fn expect_z_all(&self, tol: f64) -> Result<Vec<f64>> {
        let c = self.vidal_gauge_error();
        if c > tol {
            return Err(BackendError::GaugeTooLoose { c, tol });
        }
        Ok((0..self.vertices.len()).map(|q| self.local_z(q)).collect())
    }

    fn local_z(&self, q: usize) -> f64 {
        let t = self.absorbed(q, None, true);
        let v = &self.vertices[q];
        let half = t.len() / 2;
        let (mut up, mut down) = (0.0, 0.0);
        for i in 0..half {
            up += (t.data()[i] * v.data()[i].conj()).re;
            down += (t.data()[half + i] * v.data()[half + i].conj()).re;
        }
        (up - down) / (up + down)
    }

    /// Norm computed locally at vertex `q` in the Vidal gauge.
    pub fn local_norm(&self, q: usize) -> f64 {
        let t = self.absorbed(q, None, true);
        let v = &self.vertices[q];
        t.data().iter().zip(v.data()).map(|(a, b)| (a * b.conj()).re).sum::<f64>().sqrt()
    }

    /// The same state on the graph relabeled by `perm` (`perm[old] = new`).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let graph = self
            .graph
            .relabeled(perm)
            .map_err(|e| BackendError::DimensionMismatch(e.to_string()))?;
        let incident = graph.incident_edges();
        let new_edge = |old: usize| {
            let (a, b) = self.graph.edges()[old];
            graph.edge_index(perm[a], perm[b]).expect("relabeling keeps edges")
        };
        let mut gauges = vec![Vec::new(); graph.num_edges()];
        for (e, w) in self.gauges.iter().enumerate() {
            gauges[new_edge(e)] = w.clone();
        }
        let mut vertices = vec![Tensor::zeros(vec![2]); self.vertices.len()];
        for (v, t) in self.vertices.iter().enumerate() {
            let w = perm[v];
            let mapped: Vec<usize> = self.incident[v].iter().map(|&e| new_edge(e)).collect();
            // new leg i+1 carries edge incident[w][i]
            let mut legs = vec![0];
            legs.extend(incident[w].iter().map(|e| 1 + mapped.iter().position(|m| m == e).unwrap()));
            vertices[w] = t.permute(&legs);
        }
        Ok(Self {
            sweep_order: gauge::sweep_order(&graph),
            graph,
            incident,
            vertices,
            gauges,
            chi_max: self.chi_max,
            cum_truncation: self.cum_truncation,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TnsBackend {
    options: BackendOptions,
}

impl TnsBackend {
    pub fn new(options: BackendOptions) -> Self {
        Self { options }
    }
}

impl Backend for TnsBackend {
    fn name(&self) -> &'static str {
        "tns"
    }

    fn check_graph(&self, _graph: &LatticeGraph) -> Result<()> {
        Ok(())
    }

    fn prepare(&self, graph: &LatticeGraph, pattern: &InitialPattern) -> Result<Box<dyn Evolver>> {
        Ok(Box::new(TnsEvolver {
            state: GaugedTns::init_product(pattern, graph, self.options.chi)?,
            options: self.options,
            step: 0,
            log: Vec::new(),
            sweeps: Vec::new(),
        }))
    }
}

/// Tensor-network state plus its regauge bookkeeping.
#[derive(Debug, Clone)]
pub struct TnsEvolver {
    state: GaugedTns,
    options: BackendOptions,
    step: usize,
    log: Vec<RegaugeEntry>,
    sweeps: Vec<usize>,
}

impl TnsEvolver {
    pub fn state(&self) -> &GaugedTns {
        &self.state
    }

    fn record(&mut self, report: &GaugeReport) {
        let step = self.step;
        self.log.extend(
            report.c_history.iter().enumerate().map(|(m, &c)| RegaugeEntry { step, sweep: m + 1, c }),
        );
        self.sweeps.push(report.sweeps);
    }

    fn regauge(&mut self) -> Result<()> {
        let report = self.state.tsu_regauge(self.options.regauge_tol, self.options.max_sweeps)?;
        self.record(&report);
        Ok(())
    }
}

impl Evolver for TnsEvolver {
    fn apply_cycle(&mut self, program: &GateProgram) -> Result<()> {
        self.step += 1;
        let every = self.options.regauge == RegaugePolicy::EveryStep;
        let (tol, max) = (self.options.regauge_tol, self.options.max_sweeps);
        let mut reports = Vec::new();
        self.state.apply_program_with(program, |s| {
            if every {
                reports.push(s.tsu_regauge(tol, max)?);
            }
            Ok(())
        })?;
        for r in &reports {
            self.record(r);
        }
        Ok(())
    }

    fn expect_z_all(&mut self) -> Result<Vec<f64>> {
        if self.options.regauge == RegaugePolicy::BeforeMeasurement {
            self.regauge()?;
        }
        self.state.expect_z_all(self.options.expectation_gauge_tol)
    }

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            cum_truncation: self.state.cum_truncation,
            max_bond: self.state.bond_dims().into_iter().max().unwrap_or(1),
            regauge_log: self.log.clone(),
            regauge_sweeps: self.sweeps.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::sv::{StateVector, DEFAULT_CAP};
    use crate::lattice::{build_heavy_hex, make_pattern, LatticeKind, PatternKind};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ring() -> LatticeGraph {
        build_heavy_hex(1, 1).unwrap()
    }

    #[test]
    fn product_state_expectations() {
        let g = ring();
        let p = make_pattern(&g, PatternKind::Polarized, None).unwrap();
        let s = GaugedTns::init_product(&p, &g, 4).unwrap();
        assert_eq!(s.expect_z_all(1e-6).unwrap(), vec![1.0; 12]);
        assert_eq!(s.vidal_gauge_error(), 0.0);
        let p = make_pattern(&g, PatternKind::Stripe, None).unwrap();
        let s = GaugedTns::init_product(&p, &g, 4).unwrap();
        assert_eq!(s.expect_z_all(1e-6).unwrap(), p.z_values());
    }

    #[test]
    fn single_qubit_gates_are_exact() {
        let g = ring();
        let p = make_pattern(&g, PatternKind::Polarized, None).unwrap();
        let mut s = GaugedTns::init_product(&p, &g, 4).unwrap();
        s.apply_single(0, &gates::rz(0.4));
        assert!((s.expect_z(0, 1e-6).unwrap() - 1.0).abs() < 1e-15);
        s.apply_single(3, &gates::rx(PI));
        assert!((s.expect_z(3, 1e-6).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rzz_on_two_vertices_matches_statevector() {
        let g = LatticeGraph::new(2, [(0, 1)], None, LatticeKind::Custom).unwrap();
        let p = InitialPattern::explicit(vec![0, 1]).unwrap();
        let mut s = GaugedTns::init_product(&p, &g, 4).unwrap();
        let mut sv = StateVector::init_product(&p, DEFAULT_CAP).unwrap();
        for (q, t) in [(0, 0.7), (1, 1.9)] {
            s.apply_single(q, &gates::rx(t));
            sv.apply_single(q, &gates::rx(t));
        }
        s.apply_two(0, &gates::rzz(-FRAC_PI_2)).unwrap();
        let prog = GateProgram::from_text("RZZ 0 1 -1.5707963267948966\n", 2).unwrap();
        sv.apply_program(&prog);
        let amps = s.to_statevector().unwrap();
        let overlap: C64 = amps.iter().zip(sv.amplitudes()).map(|(a, b)| a.conj() * b).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        for q in 0..2 {
            assert!((s.expect_z(q, 1e-6).unwrap() - sv.expect_z(q)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_update_keeps_expectations() {
        let g = ring();
        let p = make_pattern(&g, PatternKind::Stripe, None).unwrap();
        let mut s = GaugedTns::init_product(&p, &g, 64).unwrap();
        let params = FloquetParams::standard(0.85 * PI, 0.3 * PI);
        for _ in 0..2 {
            s.cycle(&params, RegaugePolicy::EveryStep, 1e-10, 200).unwrap();
        }
        let before = s.expect_z_all(1e-6).unwrap();
        s.apply_two(3, &Matrix4::identity()).unwrap();
        let after = s.to_expectations().unwrap();
        for (a, b) in before.iter().zip(after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_preserves_gauge_error() {
        let g = ring();
        let p = make_pattern(&g, PatternKind::Stripe, None).unwrap();
        let mut s = GaugedTns::init_product(&p, &g, 2).unwrap();
        for _ in 0..2 {
            s.cycle(&FloquetParams::standard(0.8 * PI, 0.5 * PI), RegaugePolicy::BeforeMeasurement, 1e-8, 1)
                .unwrap();
        }
        let c = s.vidal_gauge_error();
        assert!(c > 1e-6);
        let n = g.num_qubits();
        let perm: Vec<usize> = (0..n).map(|v| (v * 7 + 3) % n).collect();
        let r = s.relabeled(&perm).unwrap();
        assert!((r.vidal_gauge_error() - c).abs() < 1e-12);
        let za = s.to_expectations().unwrap();
        let zb = r.to_expectations().unwrap();
        for v in 0..n {
            assert!((za[v] - zb[perm[v]]).abs() < 1e-12);
        }
    }
}
