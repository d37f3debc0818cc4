//! Text formats: coupling maps (`i j` per line, `#` comments) and pattern
//! files (a single line of `0`/`1`).

use std::fmt::Write;

use super::{InitialPattern, LatticeError, LatticeGraph, LatticeKind, Result};

#[derive(Debug, Clone, Copy)]
pub struct CouplingMapOptions {
    /// Accept indices that no edge uses. Device maps routinely have them.
    pub allow_gaps: bool,
    /// Largest accepted vertex index + 1.
    pub max_qubits: usize,
}

impl Default for CouplingMapOptions {
    fn default() -> Self {
        Self { allow_gaps: true, max_qubits: 1 << 16 }
    }
}

pub fn load_coupling_map(source: &str) -> Result<LatticeGraph> {
    load_coupling_map_with(source, CouplingMapOptions::default())
}

pub fn load_coupling_map_with(source: &str, opts: CouplingMapOptions) -> Result<LatticeGraph> {
    let mut edges = Vec::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| LatticeError::Parse { line: lineno + 1, message };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(format!("expected two indices, found {}", tokens.len())));
        }
        let mut pair = [0usize; 2];
        for (slot, tok) in pair.iter_mut().zip(&tokens) {
            *slot = tok.parse().map_err(|_| parse_err(format!("'{tok}' is not a vertex index")))?;
            if *slot >= opts.max_qubits {
                return Err(parse_err(format!("index {tok} exceeds the limit {}", opts.max_qubits)));
            }
        }
        edges.push((pair[0], pair[1]));
    }
    let num_qubits = edges.iter().map(|&(a, b)| a.max(b) + 1).max().ok_or(LatticeError::EmptyMap)?;
    let graph = LatticeGraph::new(num_qubits, edges, None, LatticeKind::Custom)?;
    if !opts.allow_gaps {
        if let Some(v) = graph.degrees().iter().position(|&d| d == 0) {
            return Err(LatticeError::IndexGap(v));
        }
    }
    Ok(graph)
}

/// Writes the edge list in layer order, one comment line per layer.
pub fn serialize_coupling_map(graph: &LatticeGraph) -> String {
    let mut out = format!("# qubits: {}, edges: {}\n", graph.num_qubits(), graph.num_edges());
    for (c, _) in graph.layers().iter().enumerate() {
        writeln!(out, "# layer {c}").unwrap();
        for (a, b) in graph.layer_edges(c) {
            writeln!(out, "{a} {b}").unwrap();
        }
    }
    out
}

pub fn parse_pattern(source: &str, num_qubits: usize) -> Result<InitialPattern> {
    let body: Vec<&str> = source
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    let [line] = body.as_slice() else {
        return Err(LatticeError::Parse {
            line: 1,
            message: format!("expected one line of bits, found {}", body.len()),
        });
    };
    let bits = line
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(LatticeError::Parse { line: 1, message: format!("unexpected character '{other}'") }),
        })
        .collect::<Result<Vec<u8>>>()?;
    if bits.len() != num_qubits {
        return Err(LatticeError::LengthMismatch { expected: num_qubits, found: bits.len() });
    }
    InitialPattern::explicit(bits)
}

pub fn serialize_pattern(pattern: &InitialPattern) -> String {
    let mut s: String = pattern.bits().iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    s.push('\n');
    s
}
