use std::collections::BTreeSet;

use super::{LatticeError, LatticeGraph, LatticeKind, Result};

/// Heavy-hexagonal patch of `rows x cols` hexagons.
///
/// The underlying honeycomb is laid out as a brick wall: hexagon `(r, k)`
/// spans columns `x0..=x0+2` with `x0 = 2k + (r mod 2)` on the horizontal
/// lines `r` and `r+1`. Every honeycomb edge then receives a bridge qubit.
///
/// Qubits are numbered row by row the way device maps are: a horizontal
/// line left to right, then the bridges hanging below it, then the next line.
/// Coordinates put line `y` at height `y`, its bridges at `y + 0.5`, and use
/// doubled columns so that horizontal bridges sit at odd `x`.
pub fn build_heavy_hex(rows: usize, cols: usize) -> Result<LatticeGraph> {
    if rows == 0 || cols == 0 {
        return Err(LatticeError::InvalidSize(format!(
            "heavy-hex patch needs rows, cols >= 1 (got {rows} x {cols})"
        )));
    }
    // honeycomb edges between lattice points (x, y)
    let mut base = BTreeSet::new();
    for r in 0..rows {
        for k in 0..cols {
            let x0 = 2 * k + r % 2;
            for y in [r, r + 1] {
                base.insert(((x0, y), (x0 + 1, y)));
                base.insert(((x0 + 1, y), (x0 + 2, y)));
            }
            base.insert(((x0, r), (x0, r + 1)));
            base.insert(((x0 + 2, r), (x0 + 2, r + 1)));
        }
    }

    // qubit positions in doubled units: (2x, 2y) for honeycomb points,
    // midpoints for bridges; ordering key is (row, column)
    let mut sites = BTreeSet::new();
    let mut links = Vec::with_capacity(2 * base.len());
    for &((x1, y1), (x2, y2)) in &base {
        let a = (2 * y1, 2 * x1);
        let b = (2 * y2, 2 * x2);
        let mid = (y1 + y2, x1 + x2);
        sites.extend([a, b, mid]);
        links.push((a, mid));
        links.push((mid, b));
    }
    let sites: Vec<(usize, usize)> = sites.into_iter().collect();
    let index = |p: (usize, usize)| sites.binary_search(&p).expect("site registered");
    let edges: Vec<(usize, usize)> = links.iter().map(|&(a, b)| (index(a), index(b))).collect();
    let coords = sites.iter().map(|&(yy, xx)| (xx as f64, yy as f64 / 2.0)).collect();
    LatticeGraph::new(sites.len(), edges, Some(coords), LatticeKind::HeavyHex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_a_twelve_ring() {
        let g = build_heavy_hex(1, 1).unwrap();
        assert_eq!(g.num_qubits(), 12);
        assert_eq!(g.num_edges(), 12);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(g.layers().len(), 2);
        assert!(g.is_connected());
        assert_eq!(g.cycle_rank(), 1);
    }

    #[test]
    fn degree_three_patches_use_three_layers() {
        for (r, c) in [(1, 2), (2, 1), (2, 2), (3, 4)] {
            let g = build_heavy_hex(r, c).unwrap();
            assert_eq!(g.max_degree(), 3);
            assert_eq!(g.layers().len(), 3, "{r}x{c}");
            assert_eq!(g.cycle_rank(), r * c);
            assert!(g.bipartition().is_some());
        }
    }

    #[test]
    fn numbering_runs_along_rows() {
        let g = build_heavy_hex(1, 1).unwrap();
        let c = g.coords().unwrap();
        assert_eq!(&c[..5], &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        assert_eq!(&c[5..7], &[(0.0, 0.5), (4.0, 0.5)]);
        assert!(g.edge_index(0, 5).is_some() && g.edge_index(5, 7).is_some());
    }

    #[test]
    fn rejects_empty_patch() {
        assert!(build_heavy_hex(0, 2).is_err());
    }
}
