use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Prepared;
use super::series::{rows, write_series};
use super::{calibration_seed, point_seed, HarnessError, Result};
use crate::analysis::{averaged_z, dft, find_dtqc_peaks, predicted_env, DtqcPeaks};
use crate::backend::{Diagnostics, Registry};
use crate::circuit::{floquet_cycle, FloquetParams};
use crate::noise::{mitigate, run_noisy, Channel, EstimatedSeries, TrajectoryOptions, DEFAULT_UNDERFLOW_FLOOR};

pub const MANIFEST: &str = "manifest.json";
pub const POINTS: &str = "points.csv";

/// Above this many qubits state-vector grid points run one at a time.
const PARALLEL_SV_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub name: String,
    pub code_version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub backend: String,
    pub n_steps: usize,
    pub measure: Vec<usize>,
    /// Output file name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub point: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub index: usize,
    pub params: FloquetParams,
    /// `Z̄` per step (mitigated when available).
    pub series: Vec<f64>,
    pub peaks: Option<DtqcPeaks>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub points: Vec<PointSummary>,
    pub manifest: Manifest,
}

impl RunSummary {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

type Files = Vec<(String, Vec<u8>)>;

struct PointOutput {
    summary: PointSummary,
    files: Files,
}

/// Runs every grid point and writes the artifacts into `out`. A failing
/// point is recorded in `points.csv` and the manifest; the others proceed.
pub fn run(prepared: &Prepared, out: &Path) -> Result<RunSummary> {
    let cfg = &prepared.config;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let grid = cfg.params.points();

    let calibrations = calibrations(prepared)?;
    let job = |(i, params): (usize, &FloquetParams)| {
        let tz_index = i % cfg.params.theta_z.len();
        run_point(prepared, i, params, calibrations.get(&tz_index))
    };
    let parallel = !(cfg.backend.name == "sv" && prepared.graph.num_qubits() > PARALLEL_SV_LIMIT);
    let outputs: Vec<PointOutput> = if parallel {
        grid.par_iter().enumerate().map(job).collect()
    } else {
        grid.iter().enumerate().map(job).collect()
    };

    let config_text = cfg.to_toml();
    let mut files: Files = vec![("config.toml".into(), config_text.clone().into_bytes())];
    let mut points_csv = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| HarnessError::Format { path: out.join(POINTS), message: e.to_string() };
    points_csv
        .write_record([
            "point",
            "theta_x_over_pi",
            "theta_z_over_pi",
            "epsilon_over_pi",
            "main_freq",
            "omega_env",
            "predicted_env",
            "a_side",
            "status",
        ])
        .map_err(io_err)?;
    let pi = std::f64::consts::PI;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut summaries = Vec::with_capacity(outputs.len());
    let mut failures = Vec::new();
    for o in outputs {
        let s = &o.summary;
        let p = &s.params;
        points_csv
            .write_record([
                s.index.to_string(),
                (p.theta_x / pi).to_string(),
                (p.theta_z / pi).to_string(),
                (p.epsilon() / pi).to_string(),
                opt(s.peaks.map(|k| k.peaks.main.freq)),
                opt(s.peaks.and_then(|k| k.omega_env)),
                opt(predicted_env(p).ok()),
                opt(s.peaks.and_then(|k| k.a_side)),
                s.error.as_ref().map_or("ok".into(), |e| format!("error: {e}")),
            ])
            .map_err(io_err)?;
        if let Some(e) = &s.error {
            failures.push(Failure { point: s.index, error: e.clone() });
        }
        files.extend(o.files);
        summaries.push(o.summary);
    }
    files.push((POINTS.into(), points_csv.into_inner().expect("in-memory writer")));

    let mut hashes = BTreeMap::new();
    for (name, bytes) in &files {
        let path = out.join(name);
        std::fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
        hashes.insert(name.clone(), hex::encode(Sha256::digest(bytes)));
    }
    let manifest = Manifest {
        schema: super::SCHEMA_VERSION,
        name: cfg.name.clone(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
        backend: cfg.backend.name.clone(),
        n_steps: cfg.n_steps,
        measure: prepared.measure.qubits().to_vec(),
        files: hashes,
        failures,
    };
    let path = out.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(RunSummary { out_dir: out.to_owned(), points: summaries, manifest })
}

/// Noisy `θx = π` runs keyed by `θz` index, when mitigation is on.
fn calibrations(prepared: &Prepared) -> Result<BTreeMap<usize, EstimatedSeries>> {
    let cfg = &prepared.config;
    let Some(noise) = cfg.noise.as_ref().filter(|n| n.mitigate) else {
        return Ok(BTreeMap::new());
    };
    let grid = &cfg.params;
    (0..grid.theta_z.len())
        .into_par_iter()
        .map(|k| {
            let params = FloquetParams::from_pi_units(grid.theta_j, 1.0, grid.theta_z[k]);
            let opts = TrajectoryOptions {
                n_steps: cfg.n_steps,
                n_shots: noise.shots,
                n_trajectories: noise.trajectories,
                seed: calibration_seed(cfg.seed, k as u64),
                cap: cfg.backend.options.sv_cap,
            };
            let r = run_noisy(&prepared.pattern, &params, &prepared.graph, &noise.model, &prepared.measure, &opts)
                .map_err(|e| HarnessError::Config(format!("calibration run at theta_z index {k}: {e}")))?;
            Ok((k, r.series.with_channel(Channel::Calibration)))
        })
        .collect()
}

fn run_point(prepared: &Prepared, index: usize, params: &FloquetParams, calib: Option<&EstimatedSeries>) -> PointOutput {
    let mut summary = PointSummary { index, params: *params, series: Vec::new(), peaks: None, error: None };
    let mut files = Files::new();
    if let Err(e) = evolve_point(prepared, index, params, calib, &mut summary, &mut files) {
        summary.error = Some(e);
    }
    PointOutput { summary, files }
}

fn evolve_point(
    prepared: &Prepared,
    index: usize,
    params: &FloquetParams,
    calib: Option<&EstimatedSeries>,
    summary: &mut PointSummary,
    files: &mut Files,
) -> std::result::Result<(), String> {
    let cfg = &prepared.config;
    let tag = format!("p{index:03}");
    let measured = prepared.measure.qubits();

    // snapshots[n] covers every vertex (noiseless) or the measured set (noisy)
    let (raw, snapshot_qubits, snapshots, diagnostics) = match &cfg.noise {
        Some(noise) => {
            let opts = TrajectoryOptions {
                n_steps: cfg.n_steps,
                n_shots: noise.shots,
                n_trajectories: noise.trajectories,
                seed: point_seed(cfg.seed, index as u64),
                cap: cfg.backend.options.sv_cap,
            };
            let r = run_noisy(&prepared.pattern, params, &prepared.graph, &noise.model, &prepared.measure, &opts)
                .map_err(|e| e.to_string())?;
            (r.series, measured.to_vec(), r.per_qubit, None)
        }
        None => {
            let backend = Registry::default()
                .create(&cfg.backend.name, &cfg.backend.options)
                .map_err(|e| e.to_string())?;
            let mut ev = backend.prepare(&prepared.graph, &prepared.pattern).map_err(|e| e.to_string())?;
            let program = floquet_cycle(params, &prepared.graph);
            let mut snaps = Vec::with_capacity(cfg.n_steps + 1);
            snaps.push(ev.expect_z_all().map_err(|e| format!("step 0: {e}"))?);
            for n in 1..=cfg.n_steps {
                ev.apply_cycle(&program).map_err(|e| format!("step {n}: {e}"))?;
                snaps.push(ev.expect_z_all().map_err(|e| format!("step {n}: {e}"))?);
            }
            let z = averaged_z(&snaps, None, &prepared.measure).map_err(|e| e.to_string())?;
            let raw = EstimatedSeries::new(z.values, z.errors, 0, Channel::Raw);
            (raw, (0..prepared.graph.num_qubits()).collect(), snaps, Some(ev.diagnostics()))
        }
    };
    let mitigated = match calib {
        Some(c) => Some(mitigate(&raw, c, DEFAULT_UNDERFLOW_FLOOR).map_err(|e| e.to_string())?),
        None => None,
    };
    let table = rows(&raw, calib, mitigated.as_ref());
    summary.series = table.iter().map(|r| r.primary()).collect();

    let mut buf = Vec::new();
    write_series(&mut buf, &table).map_err(|e| e.to_string())?;
    files.push((format!("{tag}_series.csv"), buf));

    for &step in &cfg.output.snapshot_steps {
        files.push((format!("{tag}_snapshot_{step:03}.csv"), snapshot_csv(prepared, &snapshot_qubits, &snapshots[step])));
    }
    if let Some(d) = diagnostics.filter(|_| cfg.backend.name == "tns") {
        files.push((format!("{tag}_regauge.csv"), regauge_csv(&d)));
    }

    let n_max = cfg.analysis.n_max;
    if let Some(step) = table[..n_max].iter().position(|r| r.flag) {
        files.push((format!("{tag}_peaks.txt"), format!("spectrum = none\nreason = calibration underflow at step {step}\n").into_bytes()));
        return Ok(());
    }
    let mut spectrum = dft(&summary.series, n_max).map_err(|e| e.to_string())?;
    let peaks = find_dtqc_peaks(&mut spectrum, &cfg.analysis.peaks).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    spectrum.write_csv(&mut buf).map_err(|e| e.to_string())?;
    files.push((format!("{tag}_spectrum.csv"), buf));
    files.push((format!("{tag}_peaks.txt"), peaks.to_text().into_bytes()));
    summary.peaks = Some(peaks);
    Ok(())
}

fn snapshot_csv(prepared: &Prepared, qubits: &[usize], values: &[f64]) -> Vec<u8> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["qubit", "x", "y", "z_expectation"]).expect("in-memory writer");
    for (&q, z) in qubits.iter().zip(values) {
        let (x, y) = prepared.graph.coords().map_or((q as f64, 0.0), |c| c[q]);
        wr.write_record([q.to_string(), x.to_string(), y.to_string(), z.to_string()]).expect("in-memory writer");
    }
    wr.into_inner().expect("in-memory writer")
}

fn regauge_csv(d: &Diagnostics) -> Vec<u8> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["step", "sweep", "c"]).expect("in-memory writer");
    for e in &d.regauge_log {
        wr.write_record([e.step.to_string(), e.sweep.to_string(), e.c.to_string()]).expect("in-memory writer");
    }
    wr.into_inner().expect("in-memory writer")
}
