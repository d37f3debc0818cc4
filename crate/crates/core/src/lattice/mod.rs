//! Simulation graphs: heavy-hexagonal patches, open chains and arbitrary
//! coupling maps, together with the conflict-free gate layers used to
//! schedule the two-qubit part of a Floquet cycle.
//!
//! Every graph is validated on construction and its edge set is partitioned
//! into layers such that no two edges in a layer share a vertex. Graphs are
//! immutable once built.

mod coloring;
pub mod devices;
mod heavy_hex;
mod io;
mod pattern;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use heavy_hex::build_heavy_hex;
pub use io::{
    load_coupling_map, load_coupling_map_with, parse_pattern, serialize_coupling_map,
    serialize_pattern, CouplingMapOptions,
};
pub use pattern::{make_pattern, InitialPattern, MeasureSet, PatternKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph of {num_qubits} qubits")]
    VertexOutOfRange { vertex: usize, num_qubits: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("coupling map is empty")]
    EmptyMap,
    #[error("vertex {0} is not used by any edge and index gaps are disallowed")]
    IndexGap(usize),
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid layering: {0}")]
    InvalidLayers(String),
    #[error("stripe pattern requires vertex coordinates")]
    MissingCoords,
    #[error("pattern length {found} does not match the {expected} qubits of the graph")]
    LengthMismatch { expected: usize, found: usize },
    #[error("explicit bits must be given exactly when the pattern kind is explicit")]
    ExplicitBits,
    #[error("measure set is empty")]
    EmptyMeasureSet,
}

pub type Result<T> = std::result::Result<T, LatticeError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    HeavyHex,
    Chain,
    Custom,
}

/// An undirected simple graph with a proper edge coloring.
///
/// Edges are stored normalized (`i < j`) and sorted. `layers[c]` holds the
/// indices into `edges` carrying color `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGraph {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    layers: Vec<Vec<usize>>,
    coords: Option<Vec<(f64, f64)>>,
    kind: LatticeKind,
}

impl LatticeGraph {
    /// Validates the edge list and computes the gate layers.
    pub fn new(
        num_qubits: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        coords: Option<Vec<(f64, f64)>>,
        kind: LatticeKind,
    ) -> Result<Self> {
        let edges = normalize_edges(num_qubits, edges)?;
        check_coords(num_qubits, coords.as_deref())?;
        let layers = coloring::color_edges(num_qubits, &edges);
        Ok(Self { num_qubits, edges, layers, coords, kind })
    }

    /// Builds a graph with caller-supplied layers (given as edge pairs),
    /// checking that they form a proper edge coloring of `edges`.
    pub fn with_layers(
        num_qubits: usize,
        layers: Vec<Vec<(usize, usize)>>,
        coords: Option<Vec<(f64, f64)>>,
        kind: LatticeKind,
    ) -> Result<Self> {
        let edges = normalize_edges(num_qubits, layers.iter().flatten().copied())?;
        check_coords(num_qubits, coords.as_deref())?;
        let mut index_layers = Vec::with_capacity(layers.len());
        for layer in &layers {
            let mut idx: Vec<usize> = layer
                .iter()
                .map(|&(a, b)| {
                    let key = (a.min(b), a.max(b));
                    edges.binary_search(&key).expect("edge present by construction")
                })
                .collect();
            idx.sort_unstable();
            index_layers.push(idx);
        }
        let graph = Self { num_qubits, edges, layers: index_layers, coords, kind };
        graph.check_layers()?;
        Ok(graph)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices per color class, in scheduling order.
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn layer_edges(&self, layer: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layers[layer].iter().map(move |&e| self.edges[e])
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_qubits];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Sorted indices of the edges touching each vertex.
    pub fn incident_edges(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.num_qubits];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            inc[a].push(e);
            inc[b].push(e);
        }
        inc
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_qubits];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Vertices that carry at least one edge. These are the default
    /// measurement targets.
    pub fn active_vertices(&self) -> Vec<usize> {
        let deg = self.degrees();
        (0..self.num_qubits).filter(|&v| deg[v] > 0).collect()
    }

    /// Two-coloring of the vertices, if one exists.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let adj = self.neighbors();
        let mut side = vec![u8::MAX; self.num_qubits];
        for start in 0..self.num_qubits {
            if side[start] != u8::MAX {
                continue;
            }
            side[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if side[w] == u8::MAX {
                        side[w] = 1 - side[v];
                        queue.push_back(w);
                    } else if side[w] == side[v] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }

    pub fn is_connected(&self) -> bool {
        if self.num_qubits == 0 {
            return true;
        }
        let adj = self.neighbors();
        let mut seen = vec![false; self.num_qubits];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Number of independent cycles, `|E| - |V| + components`.
    pub fn cycle_rank(&self) -> usize {
        let adj = self.neighbors();
        let mut seen = vec![false; self.num_qubits];
        let mut components = 0;
        for s in 0..self.num_qubits {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        self.edges.len() + components - self.num_qubits
    }

    /// Renumbers vertices with `perm[old] = new`, keeping the layer structure.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_qubits
            || perm.iter().collect::<BTreeSet<_>>().len() != self.num_qubits
            || perm.iter().any(|&p| p >= self.num_qubits)
        {
            return Err(LatticeError::InvalidSize("relabeling is not a permutation".into()));
        }
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                layer.iter().map(|&e| (perm[self.edges[e].0], perm[self.edges[e].1])).collect()
            })
            .collect();
        let coords = self.coords.as_ref().map(|c| {
            let mut out = vec![(0.0, 0.0); c.len()];
            for (old, &xy) in c.iter().enumerate() {
                out[perm[old]] = xy;
            }
            out
        });
        Self::with_layers(self.num_qubits, layers, coords, self.kind)
    }

    /// The subgraph on `vertices`, which become `0..vertices.len()` in the
    /// given order. Edges keep their parent layer; emptied layers are dropped.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let mut local = vec![None; self.num_qubits];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.num_qubits || local[v].is_some() {
                return Err(LatticeError::InvalidSize(format!("vertex {v} out of range or repeated")));
            }
            local[v] = Some(i);
        }
        let layers: Vec<Vec<(usize, usize)>> = self
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .filter_map(|&e| {
                        let (a, b) = self.edges[e];
                        Some((local[a]?, local[b]?))
                    })
                    .collect::<Vec<_>>()
            })
            .filter(|l| !l.is_empty())
            .collect();
        let coords = self.coords.as_ref().map(|c| vertices.iter().map(|&v| c[v]).collect());
        Self::with_layers(vertices.len(), layers, coords, LatticeKind::Custom)
    }

    /// Checks that the layers partition the edge set into matchings.
    pub fn check_layers(&self) -> Result<()> {
        let mut seen = vec![false; self.edges.len()];
        for (c, layer) in self.layers.iter().enumerate() {
            let mut used = vec![false; self.num_qubits];
            for &e in layer {
                if e >= self.edges.len() || seen[e] {
                    return Err(LatticeError::InvalidLayers(format!(
                        "edge index {e} repeated or out of range"
                    )));
                }
                seen[e] = true;
                let (a, b) = self.edges[e];
                if used[a] || used[b] {
                    return Err(LatticeError::InvalidLayers(format!(
                        "layer {c} touches a vertex of edge ({a}, {b}) twice"
                    )));
                }
                used[a] = true;
                used[b] = true;
            }
        }
        if let Some(e) = seen.iter().position(|s| !s) {
            return Err(LatticeError::InvalidLayers(format!("edge {e} is in no layer")));
        }
        Ok(())
    }
}

fn normalize_edges(
    num_qubits: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Vec<(usize, usize)>> {
    let mut set = BTreeSet::new();
    for (a, b) in edges {
        if a == b {
            return Err(LatticeError::SelfLoop(a));
        }
        for v in [a, b] {
            if v >= num_qubits {
                return Err(LatticeError::VertexOutOfRange { vertex: v, num_qubits });
            }
        }
        if !set.insert((a.min(b), a.max(b))) {
            return Err(LatticeError::DuplicateEdge(a.min(b), a.max(b)));
        }
    }
    Ok(set.into_iter().collect())
}

fn check_coords(num_qubits: usize, coords: Option<&[(f64, f64)]>) -> Result<()> {
    match coords {
        Some(c) if c.len() != num_qubits => Err(LatticeError::LengthMismatch {
            expected: num_qubits,
            found: c.len(),
        }),
        _ => Ok(()),
    }
}

/// Open chain `0 - 1 - ... - (length-1)` with even/odd bond layers.
pub fn build_chain(length: usize) -> Result<LatticeGraph> {
    if length < 2 {
        return Err(LatticeError::InvalidSize(format!("chain needs at least 2 sites, got {length}")));
    }
    let coords = (0..length).map(|i| (i as f64, 0.0)).collect();
    LatticeGraph::new(length, (0..length - 1).map(|i| (i, i + 1)), Some(coords), LatticeKind::Chain)
}
