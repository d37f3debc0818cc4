//! The single-cycle Floquet operator of the kicked Ising model as an ordered,
//! backend-independent gate program:
//!
//! ```text
//! U_F = [prod_i R_Z(θz)] [prod_<ij> R_ZZ(θJ)] [prod_i R_X(θx)]
//! ```
//!
//! applied right to left: the transverse kick first, then the Ising layers in
//! the graph's color order, then the longitudinal field.

pub mod gates;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::LatticeGraph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("no CZ decomposition for R_ZZ({0}); only -pi/2 is supported")]
    UnsupportedAngle(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Rotation angles of one cycle, in radians: `θJ = -J T`, `θx = hx T`,
/// `θz = hz T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetParams {
    pub theta_j: f64,
    pub theta_x: f64,
    pub theta_z: f64,
}

impl Default for FloquetParams {
    fn default() -> Self {
        Self { theta_j: -FRAC_PI_2, theta_x: PI, theta_z: 0.0 }
    }
}

impl FloquetParams {
    pub fn new(theta_j: f64, theta_x: f64, theta_z: f64) -> Self {
        Self { theta_j, theta_x, theta_z }
    }

    /// Angles given as multiples of π.
    pub fn from_pi_units(theta_j: f64, theta_x: f64, theta_z: f64) -> Self {
        Self::new(theta_j * PI, theta_x * PI, theta_z * PI)
    }

    /// `θJ = -π/2` with the given transverse and longitudinal angles.
    pub fn standard(theta_x: f64, theta_z: f64) -> Self {
        Self { theta_x, theta_z, ..Self::default() }
    }

    /// Perturbation of the transverse kick away from a perfect flip.
    pub fn epsilon(&self) -> f64 {
        epsilon_of(self)
    }

    /// Same couplings with `θx = π`, the calibration circuit.
    pub fn trivial(&self) -> Self {
        Self { theta_x: PI, ..*self }
    }
}

/// `ε` with `2ε = π - θx`.
pub fn epsilon_of(params: &FloquetParams) -> f64 {
    (PI - params.theta_x) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rx,
    Rz,
    Rzz,
}

impl GateKind {
    pub fn label(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Rz => "RZ",
            GateKind::Rzz => "RZZ",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rzz => 2,
            _ => 1,
        }
    }

    pub fn is_diagonal(self) -> bool {
        !matches!(self, GateKind::Rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Targets {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Targets,
    pub angle: f64,
    /// 0 for the X kick, `1..=layers` for the Ising layers, `layers+1` for
    /// the Z field.
    pub layer_tag: usize,
}

impl Gate {
    pub fn single_matrix(&self) -> nalgebra::Matrix2<C64> {
        match self.kind {
            GateKind::Rx => gates::rx(self.angle),
            GateKind::Rz => gates::rz(self.angle),
            GateKind::Rzz => panic!("RZZ is a two-qubit gate"),
        }
    }

    pub fn two_matrix(&self) -> Matrix4<C64> {
        assert_eq!(self.kind, GateKind::Rzz, "only RZZ acts on two qubits");
        gates::rzz(self.angle)
    }
}

/// Ordered gates of one Floquet cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProgram {
    num_qubits: usize,
    num_layers: usize,
    gates: Vec<Gate>,
    cz_equivalent_count: usize,
}

impl GateProgram {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of Ising layers; tags run `0..=num_layers + 1`.
    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    /// One CZ per `R_ZZ` at `θJ = -π/2`.
    pub fn cz_equivalent_count(&self) -> usize {
        self.cz_equivalent_count
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// One gate per line: `{kind} {targets...} {angle}`, angles printed with
    /// round-trip precision.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            match g.targets {
                Targets::One(q) => writeln!(out, "{} {} {:?}", g.kind.label(), q, g.angle),
                Targets::Two(a, b) => writeln!(out, "{} {} {} {:?}", g.kind.label(), a, b, g.angle),
            }
            .unwrap();
        }
        out
    }

    /// Inverse of [`GateProgram::to_text`]. Layer tags are reassigned from the
    /// order of kind changes.
    pub fn from_text(text: &str, num_qubits: usize) -> Result<Self, CircuitError> {
        let mut gates = Vec::new();
        let mut tag = 0;
        let mut prev: Option<GateKind> = None;
        let mut layer_used: Vec<usize> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::Parse { line: i + 1, message };
            let tok: Vec<&str> = line.split_whitespace().collect();
            let kind = match tok[0] {
                "RX" => GateKind::Rx,
                "RZ" => GateKind::Rz,
                "RZZ" => GateKind::Rzz,
                other => return Err(err(format!("unknown gate '{other}'"))),
            };
            if tok.len() != kind.arity() + 2 {
                return Err(err(format!("{} expects {} fields", kind.label(), kind.arity() + 2)));
            }
            let idx = |s: &str| -> Result<usize, CircuitError> {
                let q: usize = s.parse().map_err(|_| err(format!("bad qubit '{s}'")))?;
                if q >= num_qubits {
                    return Err(err(format!("qubit {q} out of range")));
                }
                Ok(q)
            };
            let angle: f64 = tok[tok.len() - 1].parse().map_err(|_| err("bad angle".into()))?;
            let targets = if kind.arity() == 1 {
                Targets::One(idx(tok[1])?)
            } else {
                Targets::Two(idx(tok[1])?, idx(tok[2])?)
            };
            // a new tag starts whenever the kind changes or an RZZ would
            // reuse a qubit already touched in the current layer
            let qubits: Vec<usize> = match targets {
                Targets::One(q) => vec![q],
                Targets::Two(a, b) => vec![a, b],
            };
            let clash = kind == GateKind::Rzz && qubits.iter().any(|q| layer_used.contains(q));
            if prev.is_some() && (prev != Some(kind) || clash) {
                tag += 1;
                layer_used.clear();
            }
            layer_used.extend(qubits);
            prev = Some(kind);
            gates.push(Gate { kind, targets, angle, layer_tag: tag });
        }
        let cz_equivalent_count = gates.iter().filter(|g| g.kind == GateKind::Rzz).count();
        let num_layers = tag.saturating_sub(1);
        Ok(Self { num_qubits, num_layers, gates, cz_equivalent_count })
    }
}

/// Builds the gate program of one cycle on `graph`.
pub fn floquet_cycle(params: &FloquetParams, graph: &LatticeGraph) -> GateProgram {
    let n = graph.num_qubits();
    let num_layers = graph.layers().len();
    let mut gates = Vec::with_capacity(2 * n + graph.num_edges());
    gates.extend((0..n).map(|q| Gate {
        kind: GateKind::Rx,
        targets: Targets::One(q),
        angle: params.theta_x,
        layer_tag: 0,
    }));
    for layer in 0..num_layers {
        gates.extend(graph.layer_edges(layer).map(|(a, b)| Gate {
            kind: GateKind::Rzz,
            targets: Targets::Two(a, b),
            angle: params.theta_j,
            layer_tag: layer + 1,
        }));
    }
    gates.extend((0..n).map(|q| Gate {
        kind: GateKind::Rz,
        targets: Targets::One(q),
        angle: params.theta_z,
        layer_tag: num_layers + 1,
    }));
    GateProgram { num_qubits: n, num_layers, gates, cz_equivalent_count: graph.num_edges() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NativeTwoQubit {
    Cz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NativeLocal {
    SDagger,
}

/// `R_ZZ(-π/2) = e^{iπ/4} CZ (S† ⊗ S†)`: the locals act first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzDecomposition {
    pub global_phase: f64,
    pub two_qubit: NativeTwoQubit,
    pub locals: [NativeLocal; 2],
}

impl CzDecomposition {
    pub fn matrix(&self) -> Matrix4<C64> {
        let sd = gates::s_dagger();
        gates::cz() * gates::kron2(&sd, &sd) * C64::from_polar(1.0, self.global_phase)
    }
}

pub fn rzz_cz_decomposition(angle: f64) -> Result<CzDecomposition, CircuitError> {
    if (angle + FRAC_PI_2).abs() > 1e-12 {
        return Err(CircuitError::UnsupportedAngle(angle));
    }
    Ok(CzDecomposition {
        global_phase: FRAC_PI_4,
        two_qubit: NativeTwoQubit::Cz,
        locals: [NativeLocal::SDagger; 2],
    })
}
