use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::{Channel, EstimatedSeries, NoiseError, NoiseModel};
use crate::backend::sv::StateVector;
use crate::circuit::{floquet_cycle, gates, FloquetParams, GateKind, GateProgram, Targets};
use crate::lattice::{InitialPattern, LatticeGraph, MeasureSet};

/// Stream index reserved for shot resampling; trajectory `t` uses stream `t`.
const SHOT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    pub n_steps: usize,
    /// 0 keeps exact trajectory averages (no shot noise).
    pub n_shots: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub cap: usize,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { n_steps: 100, n_shots: 1 << 14, n_trajectories: 200, seed: 0, cap: crate::backend::sv::DEFAULT_CAP }
    }
}

#[derive(Debug, Clone)]
pub struct NoisyRun {
    /// `Z̄` per step `0..=n_steps` with readout and shot noise.
    pub series: EstimatedSeries,
    /// Trajectory-averaged `<Z_j>` for each `j` in the measured set, before
    /// readout and shots; indexed `[step][member]`.
    pub per_qubit: Vec<Vec<f64>>,
}

/// Emulates the noisy circuit by Pauli trajectories: after every gate a
/// uniformly drawn non-identity Pauli hits the gate's support with the
/// model's probability. `R_ZZ(-π/2)` is run as `S† ⊗ S†` followed by `CZ`,
/// each stage with its own noise.
pub fn run_noisy(
    pattern: &InitialPattern,
    params: &FloquetParams,
    graph: &LatticeGraph,
    model: &NoiseModel,
    measure: &MeasureSet,
    opts: &TrajectoryOptions,
) -> Result<NoisyRun, NoiseError> {
    model.validate()?;
    let program = floquet_cycle(params, graph);
    let initial = StateVector::init_product(pattern, opts.cap)?;
    let n_traj = if model.has_gate_noise() { opts.n_trajectories.max(1) } else { 1 };

    let run_one = |t: usize| -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(t as u64);
        let mut state = initial.clone();
        let mut out = Vec::with_capacity(opts.n_steps + 1);
        out.push(measured(&state, measure));
        for _ in 0..opts.n_steps {
            if model.has_gate_noise() {
                apply_noisy(&mut state, &program, model, &mut rng);
            } else {
                state.apply_program(&program);
            }
            out.push(measured(&state, measure));
        }
        out
    };
    let trajectories: Vec<Vec<Vec<f64>>> = (0..n_traj).into_par_iter().map(run_one).collect();

    let a = measure.len() as f64;
    let steps = opts.n_steps + 1;
    let mut per_qubit = vec![vec![0.0; measure.len()]; steps];
    let mut traj_var = vec![0.0; steps];
    for n in 0..steps {
        for traj in &trajectories {
            for (acc, z) in per_qubit[n].iter_mut().zip(&traj[n]) {
                *acc += z;
            }
        }
        per_qubit[n].iter_mut().for_each(|z| *z /= n_traj as f64);
        if n_traj > 1 {
            let bars: Vec<f64> = trajectories.iter().map(|t| t[n].iter().sum::<f64>() / a).collect();
            let mean = bars.iter().sum::<f64>() / n_traj as f64;
            let var = bars.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n_traj - 1) as f64;
            traj_var[n] = var / n_traj as f64;
        }
    }

    let series = shot_estimates(&per_qubit, &traj_var, model.p_readout, opts.n_shots, opts.seed);
    Ok(NoisyRun { series, per_qubit })
}

/// Shot-sampled `Z̄` from exact per-qubit expectations `per_qubit[step][member]`:
/// each qubit is read `n_shots` times through a symmetric readout flip of
/// probability `p_readout`. `extra_var[step]` (the variance of the mean over
/// trajectories) is scaled by the readout contrast and added to the shot
/// variance. With `n_shots = 0` the exact readout-scaled means are returned.
pub fn shot_estimates(
    per_qubit: &[Vec<f64>],
    extra_var: &[f64],
    p_readout: f64,
    n_shots: usize,
    seed: u64,
) -> EstimatedSeries {
    assert_eq!(per_qubit.len(), extra_var.len());
    let r = p_readout;
    let scale = 1.0 - 2.0 * r;
    let mut values = Vec::with_capacity(per_qubit.len());
    let mut stderrs = Vec::with_capacity(per_qubit.len());
    let mut shot_rng = ChaCha8Rng::seed_from_u64(seed);
    shot_rng.set_stream(SHOT_STREAM);
    for (zs, &var) in per_qubit.iter().zip(extra_var) {
        let a = zs.len() as f64;
        let tv = var * scale * scale;
        if n_shots == 0 {
            values.push(scale * zs.iter().sum::<f64>() / a);
            stderrs.push(tv.sqrt());
            continue;
        }
        let shots = n_shots as u64;
        let mut sum = 0.0;
        let mut binom_var = 0.0;
        for &m in zs {
            let p1 = ((1.0 - m) / 2.0).clamp(0.0, 1.0);
            let p1 = p1 * (1.0 - r) + (1.0 - p1) * r;
            let k = Binomial::new(shots, p1).expect("valid probability").sample(&mut shot_rng);
            let mhat = 1.0 - 2.0 * k as f64 / shots as f64;
            sum += mhat;
            binom_var += (1.0 - mhat * mhat) / shots as f64;
        }
        values.push(sum / a);
        stderrs.push((binom_var / (a * a) + tv).sqrt());
    }
    EstimatedSeries::new(values, stderrs, n_shots, Channel::Raw)
}

fn measured(state: &StateVector, measure: &MeasureSet) -> Vec<f64> {
    let all = state.expect_z_all();
    measure.qubits().iter().map(|&q| all[q]).collect()
}

fn maybe_pauli1(state: &mut StateVector, q: usize, p: f64, rng: &mut ChaCha8Rng) {
    if p > 0.0 && rng.random::<f64>() < p {
        let k = rng.random_range(1..4u8);
        apply_pauli(state, q, k);
    }
}

fn maybe_pauli2(state: &mut StateVector, a: usize, b: usize, p: f64, rng: &mut ChaCha8Rng) {
    if p > 0.0 && rng.random::<f64>() < p {
        let k = rng.random_range(1..16u8);
        apply_pauli(state, a, k / 4);
        apply_pauli(state, b, k % 4);
    }
}

fn apply_pauli(state: &mut StateVector, q: usize, k: u8) {
    match k {
        0 => {}
        1 => state.apply_x(q),
        3 => state.apply_z(q),
        _ => state.apply_single(q, &gates::pauli(k)),
    }
}

fn apply_noisy(state: &mut StateVector, program: &GateProgram, model: &NoiseModel, rng: &mut ChaCha8Rng) {
    let (p1, p2) = (model.p_single_qubit, model.p_two_qubit);
    for g in program.gates() {
        match (g.kind, g.targets) {
            (GateKind::Rzz, Targets::Two(a, b)) if (g.angle + FRAC_PI_2).abs() < 1e-12 => {
                let sd = gates::s_dagger();
                state.apply_single(a, &sd);
                maybe_pauli1(state, a, p1, rng);
                state.apply_single(b, &sd);
                maybe_pauli1(state, b, p1, rng);
                state.apply_cz(a, b);
                maybe_pauli2(state, a, b, p2, rng);
            }
            (_, Targets::Two(a, b)) => {
                state.apply_gate(g);
                maybe_pauli2(state, a, b, p2, rng);
            }
            (_, Targets::One(q)) => {
                state.apply_gate(g);
                maybe_pauli1(state, q, p1, rng);
            }
        }
    }
}
