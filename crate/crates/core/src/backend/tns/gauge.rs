//! Vidal-gauge diagnostic and regauging by trivial simple updates.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::GaugedTns;
use crate::backend::{BackendError, Result};
use crate::lattice::LatticeGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    /// `C` after each sweep.
    pub c_history: Vec<f64>,
    pub converged: bool,
    pub sweeps: usize,
    pub tol: f64,
}

impl GaugeReport {
    pub fn final_c(&self) -> f64 {
        *self.c_history.last().expect("at least one sweep")
    }

    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(BackendError::NotConverged { sweeps: self.sweeps, c: self.final_c() })
        }
    }
}

/// Edge order of one tSU half-sweep: edges of dangling trees from the leaves
/// inward, then the remaining (cyclic) edges in depth-first traversal order.
/// A full sweep runs this order and then its reverse.
pub(super) fn sweep_order(graph: &LatticeGraph) -> Vec<usize> {
    let n = graph.num_qubits();
    let incident = graph.incident_edges();
    let mut degree: Vec<usize> = incident.iter().map(Vec::len).collect();
    let mut removed = vec![false; graph.num_edges()];
    let mut order = Vec::with_capacity(graph.num_edges());
    let mut leaves: std::collections::VecDeque<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = leaves.pop_front() {
        let Some(&e) = incident[v].iter().find(|&&e| !removed[e]) else {
            continue;
        };
        removed[e] = true;
        order.push(e);
        let (a, b) = graph.edges()[e];
        for u in [a, b] {
            degree[u] -= 1;
            if u != v && degree[u] == 1 {
                leaves.push_back(u);
            }
        }
    }
    // walk the cyclic core depth-first so that a half-sweep follows each loop
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] || incident[root].iter().all(|&e| removed[e]) {
            continue;
        }
        let mut stack = vec![root];
        while let Some(&v) = stack.last() {
            seen[v] = true;
            let next = incident[v].iter().copied().find(|&e| !removed[e]);
            let Some(e) = next else {
                stack.pop();
                continue;
            };
            removed[e] = true;
            order.push(e);
            let (a, b) = graph.edges()[e];
            let u = if a == v { b } else { a };
            if !seen[u] {
                stack.push(u);
            }
        }
    }
    order
}

impl GaugedTns {
    /// `C`: for every vertex and incident edge `b`, the Frobenius distance
    /// between the normalized `M M†` (all legs but `b` contracted, other
    /// gauges absorbed) and the normalized identity; the maximum over pairs.
    pub fn vidal_gauge_error(&self) -> f64 {
        let pairs: Vec<(usize, usize)> = self
            .incident
            .iter()
            .enumerate()
            .flat_map(|(v, inc)| inc.iter().map(move |&e| (v, e)))
            .collect();
        pairs
            .par_iter()
            .map(|&(v, e)| {
                let t = self.absorbed(v, Some(e), false);
                let leg = self.leg_of(v, e);
                let mut perm = vec![leg];
                perm.extend((0..t.rank()).filter(|&l| l != leg));
                let m = t.permute(&perm).to_matrix(1);
                let rho: DMatrix<C64> = &m * m.adjoint();
                let d = rho.nrows();
                let norm = rho.norm();
                if norm == 0.0 {
                    return f64::INFINITY;
                }
                let target = 1.0 / (d as f64).sqrt();
                let mut dist = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        let mut z = rho[(i, j)] / norm;
                        if i == j {
                            z -= target;
                        }
                        dist += z.norm_sqr();
                    }
                }
                dist.sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Repeats identity-gate updates over all edges until `C <= tol` or
    /// `max_sweeps` sweeps have run. At least one sweep is always made.
    pub fn tsu_regauge(&mut self, tol: f64, max_sweeps: usize) -> Result<GaugeReport> {
        let identity = Matrix4::<C64>::identity();
        let order = self.sweep_order.clone();
        let mut c_history = Vec::new();
        for _ in 0..max_sweeps.max(1) {
            for &e in order.iter().chain(order.iter().rev()) {
                let up = self.edge_update(e, &identity)?;
                self.store(e, up);
            }
            let c = self.vidal_gauge_error();
            c_history.push(c);
            if c <= tol {
                break;
            }
        }
        let sweeps = c_history.len();
        let converged = *c_history.last().unwrap() <= tol;
        Ok(GaugeReport { c_history, converged, sweeps, tol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::RegaugePolicy;
    use crate::circuit::FloquetParams;
    use crate::lattice::{build_chain, build_heavy_hex, make_pattern, LatticeKind, PatternKind};
    use std::f64::consts::PI;

    #[test]
    fn order_covers_every_edge_once() {
        for g in [build_heavy_hex(1, 2).unwrap(), build_chain(7).unwrap()] {
            let mut o = sweep_order(&g);
            o.sort_unstable();
            assert_eq!(o, (0..g.num_edges()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn tree_edges_come_leaves_first() {
        // a ring 0-1-2-3 with a tail 3-4-5
        let g = LatticeGraph::new(6, [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4), (4, 5)], None, LatticeKind::Custom)
            .unwrap();
        let o = sweep_order(&g);
        let tail: Vec<(usize, usize)> = o[..2].iter().map(|&e| g.edges()[e]).collect();
        assert_eq!(tail, vec![(4, 5), (3, 4)]);
    }

    #[test]
    fn tree_converges_in_one_sweep() {
        let g = build_chain(8).unwrap();
        let p = make_pattern(&g, PatternKind::DomainWall, None).unwrap();
        // truncation at chi = 2 pulls the state away from the Vidal gauge
        let mut s = GaugedTns::init_product(&p, &g, 2).unwrap();
        for _ in 0..3 {
            s.cycle(&FloquetParams::standard(0.8 * PI, 0.5 * PI), RegaugePolicy::BeforeMeasurement, 1e-8, 1)
                .unwrap();
        }
        assert!(s.vidal_gauge_error() > 1e-6);
        let r = s.tsu_regauge(1e-10, 5).unwrap();
        assert_eq!(r.sweeps, 1, "{:?}", r.c_history);
        assert!(r.converged);
    }

    #[test]
    fn gauged_state_stays_gauged() {
        let g = build_heavy_hex(1, 1).unwrap();
        let p = make_pattern(&g, PatternKind::Stripe, None).unwrap();
        let mut s = GaugedTns::init_product(&p, &g, 8).unwrap();
        s.cycle(&FloquetParams::standard(0.9 * PI, 0.5 * PI), RegaugePolicy::EveryStep, 1e-9, 100).unwrap();
        let r = s.tsu_regauge(1e-9, 10).unwrap();
        assert_eq!(r.sweeps, 1);
        assert!(r.final_c() <= 1e-9);
        assert!(GaugeReport { c_history: vec![1.0], converged: false, sweeps: 1, tol: 0.1 }
            .ensure_converged()
            .is_err());
    }
}
