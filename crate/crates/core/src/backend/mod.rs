//! Simulation backends behind a common interface, selected by name at run
//! time through a [`Registry`].

pub mod mps;
pub mod sv;
pub mod tns;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::GateProgram;
use crate::lattice::{InitialPattern, LatticeGraph};
use crate::linalg::LinalgError;

pub use mps::MpsState;
pub use sv::StateVector;
pub use tns::{GaugeReport, GaugedTns};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("{num_qubits} qubits exceed the state-vector cap of {cap}")]
    CapExceeded { num_qubits: usize, cap: usize },
    #[error("backend '{backend}' cannot run on this graph: {reason}")]
    GraphMismatch { backend: String, reason: String },
    #[error("pattern has {found} bits but the graph has {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
    #[error("gauge on edge {edge} has no usable entries")]
    SingularGauge { edge: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Vidal-gauge error {c:e} exceeds the expectation tolerance {tol:e}")]
    GaugeTooLoose { c: f64, tol: f64 },
    #[error("regauging stopped after {sweeps} sweeps at C = {c:e}")]
    NotConverged { sweeps: usize, c: f64 },
    #[error("unknown backend '{0}'")]
    UnknownBackend(String),
    #[error("invalid backend option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, BackendError>;

/// When the tensor-network backend restores the Vidal gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegaugePolicy {
    /// After every layer of two-qubit gates.
    #[default]
    EveryStep,
    /// Only when expectation values are requested.
    BeforeMeasurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendOptions {
    pub chi: usize,
    pub regauge: RegaugePolicy,
    pub regauge_tol: f64,
    pub max_sweeps: usize,
    pub expectation_gauge_tol: f64,
    pub sv_cap: usize,
}

impl Default for BackendOptions {
    fn default() -> Self {
        Self {
            chi: 32,
            regauge: RegaugePolicy::EveryStep,
            regauge_tol: 1e-8,
            max_sweeps: 100,
            expectation_gauge_tol: 1e-6,
            sv_cap: sv::DEFAULT_CAP,
        }
    }
}

impl BackendOptions {
    pub fn validate(&self) -> Result<()> {
        if self.chi == 0 {
            return Err(BackendError::InvalidOption("chi must be at least 1".into()));
        }
        if !(self.regauge_tol > 0.0) || !(self.expectation_gauge_tol > 0.0) {
            return Err(BackendError::InvalidOption("gauge tolerances must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(BackendError::InvalidOption("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// One tSU sweep as logged by the tensor-network backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegaugeEntry {
    pub step: usize,
    pub sweep: usize,
    pub c: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub cum_truncation: f64,
    pub max_bond: usize,
    pub regauge_log: Vec<RegaugeEntry>,
    /// Sweep count of every regauge call, in order.
    pub regauge_sweeps: Vec<usize>,
}

/// A simulation engine. Implementations validate the graph and produce an
/// [`Evolver`] holding the state.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;

    fn check_graph(&self, graph: &LatticeGraph) -> Result<()>;

    fn prepare(&self, graph: &LatticeGraph, pattern: &InitialPattern) -> Result<Box<dyn Evolver>>;
}

/// A state being evolved cycle by cycle.
pub trait Evolver: Send {
    /// Applies one Floquet cycle.
    fn apply_cycle(&mut self, program: &GateProgram) -> Result<()>;

    /// `<Z_j>` for every vertex.
    fn expect_z_all(&mut self) -> Result<Vec<f64>>;

    fn diagnostics(&self) -> Diagnostics {
        Diagnostics::default()
    }
}

type Factory = Box<dyn Fn(&BackendOptions) -> Result<Box<dyn Backend>> + Send + Sync>;

/// Name-keyed backend constructors.
pub struct Registry {
    factories: BTreeMap<String, Factory>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry").field("backends", &self.names()).finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register("sv", |o| Ok(Box::new(sv::SvBackend::new(o.sv_cap))));
        r.register("mps", |o| Ok(Box::new(mps::MpsBackend::new(o.chi))));
        r.register("tns", |o| Ok(Box::new(tns::TnsBackend::new(*o))));
        r
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// Registers or replaces a backend under `name`.
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&BackendOptions) -> Result<Box<dyn Backend>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_owned(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn create(&self, name: &str, options: &BackendOptions) -> Result<Box<dyn Backend>> {
        options.validate()?;
        let factory = self.factories.get(name).ok_or_else(|| BackendError::UnknownBackend(name.to_owned()))?;
        factory(options)
    }
}

fn check_pattern(graph: &LatticeGraph, pattern: &InitialPattern) -> Result<()> {
    if pattern.len() != graph.num_qubits() {
        return Err(BackendError::LengthMismatch { expected: graph.num_qubits(), found: pattern.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{floquet_cycle, FloquetParams};
    use crate::lattice::{build_chain, build_heavy_hex, make_pattern, PatternKind};

    #[test]
    fn default_registry_names() {
        let r = Registry::default();
        assert_eq!(r.names(), vec!["mps", "sv", "tns"]);
        assert!(matches!(r.create("peps", &BackendOptions::default()), Err(BackendError::UnknownBackend(_))));
        let bad = BackendOptions { chi: 0, ..Default::default() };
        assert!(matches!(r.create("mps", &bad), Err(BackendError::InvalidOption(_))));
    }

    #[test]
    fn mps_rejects_heavy_hex() {
        let r = Registry::default();
        let b = r.create("mps", &BackendOptions::default()).unwrap();
        let g = build_heavy_hex(1, 1).unwrap();
        assert!(matches!(b.check_graph(&g), Err(BackendError::GraphMismatch { .. })));
    }

    #[test]
    fn all_backends_agree_on_a_short_chain() {
        let r = Registry::default();
        let g = build_chain(6).unwrap();
        let p = make_pattern(&g, PatternKind::DomainWall, None).unwrap();
        let prog = floquet_cycle(&FloquetParams::standard(0.9 * std::f64::consts::PI, 0.4), &g);
        let mut results = Vec::new();
        for name in r.names() {
            let mut ev = r.create(name, &BackendOptions::default()).unwrap().prepare(&g, &p).unwrap();
            for _ in 0..4 {
                ev.apply_cycle(&prog).unwrap();
            }
            results.push(ev.expect_z_all().unwrap());
        }
        for other in &results[1..] {
            for (a, b) in results[0].iter().zip(other) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }
}
