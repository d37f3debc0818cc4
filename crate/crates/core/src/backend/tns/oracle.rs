//! Exact contraction of a whole network into a state vector. Exponential
//! in the qubit count; meant for checking the local routines on small graphs.

use num_complex::Complex64 as C64;

use super::GaugedTns;
use crate::backend::sv::StateVector;
use crate::backend::{BackendError, Result};
use crate::linalg::Tensor;

/// Largest graph accepted by the full contraction.
pub const ORACLE_MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    Phys(usize),
    Edge(usize),
}

impl GaugedTns {
    /// Amplitudes in the state-vector convention (qubit 0 least
    /// significant), normalized. Vertices are eliminated in index order,
    /// each gauge being absorbed once into the edge's lower endpoint.
    pub fn to_statevector(&self) -> Result<Vec<C64>> {
        let n = self.vertices.len();
        if n > ORACLE_MAX_QUBITS {
            return Err(BackendError::CapExceeded { num_qubits: n, cap: ORACLE_MAX_QUBITS });
        }
        let mut acc = Tensor::new(vec![], vec![C64::new(1.0, 0.0)]);
        let mut labels: Vec<Leg> = Vec::new();
        for v in 0..n {
            let mut t = self.vertices[v].clone();
            for (i, &e) in self.incident[v].iter().enumerate() {
                if self.graph.edges()[e].0 == v {
                    t.scale_leg(i + 1, &self.gauges[e]);
                }
            }
            let mut t_labels = vec![Leg::Phys(v)];
            t_labels.extend(self.incident[v].iter().map(|&e| Leg::Edge(e)));
            let mut la = Vec::new();
            let mut lb = Vec::new();
            for (j, l) in t_labels.iter().enumerate() {
                if let Some(i) = labels.iter().position(|x| x == l) {
                    la.push(i);
                    lb.push(j);
                }
            }
            acc = acc.contract(&la, &t, &lb);
            let mut next: Vec<Leg> = (0..labels.len()).filter(|i| !la.contains(i)).map(|i| labels[i]).collect();
            next.extend((0..t_labels.len()).filter(|j| !lb.contains(j)).map(|j| t_labels[j]));
            labels = next;
        }
        let perm: Vec<usize> = (0..n)
            .rev()
            .map(|q| labels.iter().position(|&l| l == Leg::Phys(q)).expect("open physical leg"))
            .collect();
        let mut amps = acc.permute(&perm).data().to_vec();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|z| *z /= norm);
        Ok(amps)
    }

    /// `<Z_j>` of the fully contracted state.
    pub fn to_expectations(&self) -> Result<Vec<f64>> {
        Ok(StateVector::from_amplitudes(self.to_statevector()?).expect_z_all())
    }
}
