//! Device topologies shipped with the crate.
//!
//! The coupling maps live as text files under `data/` and are embedded at
//! compile time. [`ibm_torino`] additionally rebuilds the 133-qubit map from
//! its row/bridge structure so that coordinates (and hence stripe patterns)
//! are available.

use super::{load_coupling_map, LatticeGraph, LatticeKind, MeasureSet, Result};

pub const IBM_TORINO_MAP: &str = include_str!("../../data/ibm_torino.txt");
pub const IBM_TORINO_STRIPE: &str = include_str!("../../data/ibm_torino_stripe.txt");
pub const TORINO_L28_MAP: &str = include_str!("../../data/torino_l28.txt");
pub const TORINO_L28_STRIPE: &str = include_str!("../../data/torino_l28_stripe.txt");

/// Device labels averaged over in the 133-qubit runs.
pub const TORINO_A_L133: [usize; 15] = [57, 58, 59, 60, 61, 62, 63, 64, 65, 66, 67, 68, 69, 70, 71];
/// Device labels averaged over in the 28-qubit runs.
pub const TORINO_A_L28: [usize; 9] = [63, 64, 65, 66, 67, 68, 69, 70, 71];

/// Device labels of the 28-qubit region, in local index order.
pub const TORINO_L28_REGION: [usize; 28] = [
    54, 55, 56, 61, 62, 63, 64, 65, 66, 67, 68, 69, 70, 71, 73, 74, 75, 80, 81, 82, 83, 84, 85, 86,
    87, 88, 89, 90,
];

/// The part of the 28-qubit region from column 6 on: two row segments and
/// the three bridges between them. Small enough for a state vector on a
/// desktop and still containing [`TORINO_A_L28`].
pub const TORINO_L21_REGION: [usize; 21] =
    [63, 64, 65, 66, 67, 68, 69, 70, 71, 73, 74, 75, 82, 83, 84, 85, 86, 87, 88, 89, 90];

const ROWS: usize = 7;
const ROW_LEN: usize = 15;
const BRIDGES: usize = 4;

/// The 133-qubit heavy-hex device graph with planar coordinates: row `r`
/// occupies labels `19r .. 19r+14` at height `r`; its four bridge qubits
/// follow at height `r + 0.5`, attached at columns `0,4,8,12` on even rows
/// and `2,6,10,14` on odd rows.
pub fn ibm_torino() -> Result<LatticeGraph> {
    let stride = ROW_LEN + BRIDGES;
    let n = ROWS * stride;
    let mut coords = vec![(0.0, 0.0); n];
    let mut edges = Vec::new();
    for r in 0..ROWS {
        let start = r * stride;
        for c in 0..ROW_LEN {
            coords[start + c] = (c as f64, r as f64);
            if c + 1 < ROW_LEN {
                edges.push((start + c, start + c + 1));
            }
        }
        let offset = if r % 2 == 0 { 0 } else { 2 };
        for m in 0..BRIDGES {
            let bridge = start + ROW_LEN + m;
            let col = offset + 4 * m;
            coords[bridge] = (col as f64, r as f64 + 0.5);
            edges.push((start + col, bridge));
            if r + 1 < ROWS {
                edges.push((bridge, start + stride + col));
            }
        }
    }
    LatticeGraph::new(n, edges, Some(coords), LatticeKind::Custom)
}

/// The shipped 28-qubit region, relabeled to `0..28`, with coordinates taken
/// from the device layout.
pub fn torino_l28() -> Result<LatticeGraph> {
    let map = load_coupling_map(TORINO_L28_MAP)?;
    let device = ibm_torino()?;
    let device_coords = device.coords().expect("device has coords");
    let coords = TORINO_L28_REGION.iter().map(|&q| device_coords[q]).collect();
    LatticeGraph::new(map.num_qubits(), map.edges().iter().copied(), Some(coords), LatticeKind::Custom)
}

/// Local indices of [`TORINO_A_L28`] inside [`torino_l28`].
pub fn torino_l28_measure_set() -> Result<MeasureSet> {
    region_measure_set(&TORINO_L28_REGION, &TORINO_A_L28)
}

/// The subgraph of the 133-qubit device on `labels`, renumbered in order.
pub fn torino_region(labels: &[usize]) -> Result<LatticeGraph> {
    ibm_torino()?.induced(labels)
}

/// Positions of device `labels` inside a region given by its label list.
pub fn region_measure_set(region: &[usize], labels: &[usize]) -> Result<MeasureSet> {
    let local: Option<Vec<usize>> = labels.iter().map(|q| region.iter().position(|r| r == q)).collect();
    let local = local.ok_or_else(|| super::LatticeError::InvalidSize("measured label outside the region".into()))?;
    MeasureSet::new(local, region.len())
}
