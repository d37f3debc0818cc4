use serde::{Deserialize, Serialize};

use super::{LatticeError, LatticeGraph, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Bit = parity of the vertex's row, `floor(y)` of its coordinate.
    Stripe,
    /// Left half `|0>`, right half `|1>` (by vertex index).
    DomainWall,
    /// All `|0>`.
    Polarized,
    Explicit,
}

/// Computational-basis product state, one bit per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialPattern {
    bits: Vec<u8>,
    kind: PatternKind,
}

impl InitialPattern {
    pub fn explicit(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(LatticeError::Parse { line: 1, message: "bits must be 0 or 1".into() });
        }
        Ok(Self { bits, kind: PatternKind::Explicit })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `<Z_j>` of the product state: +1 for `|0>`, -1 for `|1>`.
    pub fn z_values(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
    }
}

pub fn make_pattern(
    graph: &LatticeGraph,
    kind: PatternKind,
    explicit_bits: Option<&[u8]>,
) -> Result<InitialPattern> {
    let n = graph.num_qubits();
    if explicit_bits.is_some() != (kind == PatternKind::Explicit) {
        return Err(LatticeError::ExplicitBits);
    }
    let bits = match kind {
        PatternKind::Polarized => vec![0; n],
        PatternKind::DomainWall => (0..n).map(|i| u8::from(i >= n / 2)).collect(),
        PatternKind::Stripe => {
            let coords = graph.coords().ok_or(LatticeError::MissingCoords)?;
            coords.iter().map(|&(_, y)| (y.floor() as i64).rem_euclid(2) as u8).collect()
        }
        PatternKind::Explicit => {
            let bits = explicit_bits.expect("checked above");
            if bits.len() != n {
                return Err(LatticeError::LengthMismatch { expected: n, found: bits.len() });
            }
            return InitialPattern::explicit(bits.to_vec());
        }
    };
    Ok(InitialPattern { bits, kind })
}

/// The set `A` of qubits averaged over when forming the magnetisation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureSet {
    qubits: Vec<usize>,
}

impl MeasureSet {
    pub fn new(qubits: impl IntoIterator<Item = usize>, num_qubits: usize) -> Result<Self> {
        let mut qubits: Vec<usize> = qubits.into_iter().collect();
        qubits.sort_unstable();
        qubits.dedup();
        if qubits.is_empty() {
            return Err(LatticeError::EmptyMeasureSet);
        }
        if let Some(&bad) = qubits.iter().find(|&&q| q >= num_qubits) {
            return Err(LatticeError::VertexOutOfRange { vertex: bad, num_qubits });
        }
        Ok(Self { qubits })
    }

    /// Every vertex that takes part in at least one coupling.
    pub fn active(graph: &LatticeGraph) -> Result<Self> {
        Self::new(graph.active_vertices(), graph.num_qubits())
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }
}
