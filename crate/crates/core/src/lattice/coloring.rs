//! Edge coloring used to split the two-qubit gates of a cycle into layers.

/// Colors `edges` (sorted, normalized) so that no two edges sharing a vertex
/// get the same color. Greedy first-fit in edge order; if that needs more than
/// the maximum degree and the graph is bipartite, the alternating-path
/// construction is used instead, which always reaches the maximum degree.
pub(super) fn color_edges(num_qubits: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let max_degree = {
        let mut deg = vec![0usize; num_qubits];
        for &(a, b) in edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    };
    let greedy = greedy(num_qubits, edges);
    let used = greedy.iter().copied().max().map_or(0, |c| c + 1);
    let colors = if used > max_degree && is_bipartite(num_qubits, edges) {
        bipartite(num_qubits, edges, max_degree)
    } else {
        greedy
    };
    let num_colors = colors.iter().copied().max().map_or(0, |c| c + 1);
    let mut layers = vec![Vec::new(); num_colors];
    for (e, &c) in colors.iter().enumerate() {
        layers[c].push(e);
    }
    layers
}

fn greedy(num_qubits: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut taken: Vec<Vec<usize>> = vec![Vec::new(); num_qubits];
    edges
        .iter()
        .map(|&(a, b)| {
            let c = (0..).find(|c| !taken[a].contains(c) && !taken[b].contains(c)).unwrap();
            taken[a].push(c);
            taken[b].push(c);
            c
        })
        .collect()
}

fn is_bipartite(num_qubits: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); num_qubits];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut side = vec![None; num_qubits];
    for s in 0..num_qubits {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                match side[w] {
                    None => {
                        side[w] = Some(!side[v].unwrap());
                        stack.push(w);
                    }
                    Some(x) if x == side[v].unwrap() => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// Kőnig edge coloring with `delta` colors via alternating-path swaps.
fn bipartite(num_qubits: usize, edges: &[(usize, usize)], delta: usize) -> Vec<usize> {
    // slot[v][c] = edge index using color c at vertex v
    let mut slot: Vec<Vec<Option<usize>>> = vec![vec![None; delta]; num_qubits];
    let mut color = vec![usize::MAX; edges.len()];
    let other = |e: usize, v: usize| if edges[e].0 == v { edges[e].1 } else { edges[e].0 };

    for (e, &(u, v)) in edges.iter().enumerate() {
        let a = (0..delta).find(|&c| slot[u][c].is_none()).expect("free color at u");
        let b = (0..delta).find(|&c| slot[v][c].is_none()).expect("free color at v");
        if slot[v][a].is_some() {
            // Walk the a/b alternating path from v and swap its colors; in a
            // bipartite graph it cannot end at u.
            let mut path = Vec::new();
            let mut at = v;
            let mut want = a;
            while let Some(f) = slot[at][want] {
                path.push(f);
                at = other(f, at);
                want = if want == a { b } else { a };
            }
            for &f in &path {
                let (x, y) = edges[f];
                let c = color[f];
                slot[x][c] = None;
                slot[y][c] = None;
            }
            for &f in &path {
                let (x, y) = edges[f];
                let c = if color[f] == a { b } else { a };
                color[f] = c;
                slot[x][c] = Some(f);
                slot[y][c] = Some(f);
            }
        }
        color[e] = a;
        slot[u][a] = Some(e);
        slot[v][a] = Some(e);
    }
    color
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(num_qubits: usize, edges: &[(usize, usize)], layers: &[Vec<usize>]) {
        let mut seen = vec![0; edges.len()];
        for layer in layers {
            let mut used = vec![false; num_qubits];
            for &e in layer {
                seen[e] += 1;
                let (a, b) = edges[e];
                assert!(!used[a] && !used[b]);
                used[a] = true;
                used[b] = true;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn konig_colors_k33_with_three() {
        let mut edges: Vec<_> = (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect();
        edges.sort();
        let colors = bipartite(6, &edges, 3);
        let mut layers = vec![Vec::new(); 3];
        for (e, &c) in colors.iter().enumerate() {
            layers[c].push(e);
        }
        check(6, &edges, &layers);
    }

    #[test]
    fn greedy_fallback_keeps_delta_colors() {
        // path 0-2-4-1-3: first-fit in sorted order needs a third color
        let edges = vec![(0, 2), (1, 3), (1, 4), (2, 4)];
        assert_eq!(greedy(5, &edges).into_iter().max(), Some(2));
        let layers = color_edges(5, &edges);
        check(5, &edges, &layers);
        assert_eq!(layers.len(), 2);
    }
}
