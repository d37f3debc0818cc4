//! Dense state-vector simulation. Qubit `q` is bit `q` of the amplitude
//! index (qubit 0 least significant).

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_pattern, Backend, BackendError, Evolver, Result};
use crate::circuit::{Gate, GateKind, GateProgram, Targets};
use crate::lattice::{InitialPattern, LatticeGraph, MeasureSet};

pub const DEFAULT_CAP: usize = 26;

/// Below this many qubits the kernels stay single-threaded.
const PAR_THRESHOLD: usize = 14;
const CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn init_product(pattern: &InitialPattern, cap: usize) -> Result<Self> {
        let n = pattern.len();
        if n > cap {
            return Err(BackendError::CapExceeded { num_qubits: n, cap });
        }
        let index = pattern.bits().iter().enumerate().fold(0usize, |acc, (q, &b)| acc | ((b as usize) << q));
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits: n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(amps.len().is_power_of_two());
        Self { num_qubits: amps.len().trailing_zeros() as usize, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    fn parallel(&self) -> bool {
        self.num_qubits >= PAR_THRESHOLD
    }

    /// Arbitrary single-qubit matrix on qubit `q`.
    pub fn apply_single(&mut self, q: usize, m: &Matrix2<C64>) {
        let bit = 1usize << q;
        let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let kernel = |chunk: &mut [C64]| {
            // chunks are aligned to 2*bit so both halves of each pair are local
            let (lo, hi) = chunk.split_at_mut(bit);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m00 * x + m01 * y;
                *a1 = m10 * x + m11 * y;
            }
        };
        if self.parallel() {
            self.amps.par_chunks_mut(2 * bit).for_each(kernel);
        } else {
            self.amps.chunks_mut(2 * bit).for_each(kernel);
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        self.amps.chunks_mut(2 * bit).for_each(|c| {
            let (lo, hi) = c.split_at_mut(bit);
            lo.swap_with_slice(hi);
        });
    }

    /// Multiplies amplitude `b` by `phase(b)`.
    fn apply_phase_fn(&mut self, phase: impl Fn(usize) -> C64 + Sync) {
        if self.parallel() {
            self.amps.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, c)| {
                let base = ci * CHUNK;
                for (i, z) in c.iter_mut().enumerate() {
                    *z *= phase(base + i);
                }
            });
        } else {
            for (b, z) in self.amps.iter_mut().enumerate() {
                *z *= phase(b);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        self.apply_phase_fn(|b| if b >> q & 1 == 1 { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) });
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        self.apply_phase_fn(|i| if i & mask == mask { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) });
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        self.apply_diagonal_run(std::slice::from_ref(gate));
        if gate.kind == GateKind::Rx {
            if let Targets::One(q) = gate.targets {
                self.apply_single(q, &gate.single_matrix());
            }
        }
    }

    /// Applies every gate of the program in order, fusing runs of diagonal
    /// gates into a single pass.
    pub fn apply_program(&mut self, program: &GateProgram) {
        let gates = program.gates();
        let mut i = 0;
        while i < gates.len() {
            if gates[i].kind.is_diagonal() {
                let start = i;
                while i < gates.len() && gates[i].kind.is_diagonal() {
                    i += 1;
                }
                self.apply_diagonal_run(&gates[start..i]);
            } else {
                self.apply_gate(&gates[i]);
                i += 1;
            }
        }
    }

    /// Fused diagonal pass. Gates sharing (kind, angle) form a group; the
    /// phase of a group depends only on how many of its factors are `-1`,
    /// so each group gets a small lookup table.
    fn apply_diagonal_run(&mut self, gates: &[Gate]) {
        let mut groups: BTreeMap<(u8, u64), Vec<(usize, usize)>> = BTreeMap::new();
        for g in gates.iter().filter(|g| g.kind.is_diagonal()) {
            let key = (g.kind as u8, g.angle.to_bits());
            let pair = match g.targets {
                Targets::One(q) => (1usize << q, 0),
                Targets::Two(a, b) => (1usize << a, 1usize << b),
            };
            groups.entry(key).or_default().push(pair);
        }
        if groups.is_empty() {
            return;
        }
        // table[c] = exp(-i θ/2 (n - 2c)) for c factors equal to -1
        let tables: Vec<(Vec<(usize, usize)>, Vec<C64>)> = groups
            .into_iter()
            .map(|((_, bits), members)| {
                let theta = f64::from_bits(bits);
                let n = members.len() as f64;
                let table = (0..=members.len())
                    .map(|c| C64::from_polar(1.0, -theta / 2.0 * (n - 2.0 * c as f64)))
                    .collect();
                (members, table)
            })
            .collect();
        self.apply_phase_fn(|b| {
            let mut phase = C64::new(1.0, 0.0);
            for (members, table) in &tables {
                // single-qubit members carry 0 as the second mask
                let c = members.iter().filter(|&&(ma, mb)| (b & ma != 0) ^ (b & mb != 0)).count();
                phase *= table[c];
            }
            phase
        });
    }

    pub fn expect_z(&self, qubit: usize) -> f64 {
        assert!(qubit < self.num_qubits);
        let f = |(b, z): (usize, &C64)| if b >> qubit & 1 == 0 { z.norm_sqr() } else { -z.norm_sqr() };
        if self.parallel() {
            self.amps.par_iter().enumerate().map(f).sum()
        } else {
            self.amps.iter().enumerate().map(f).sum()
        }
    }

    /// `<Z_q>` for every qubit in one pass.
    pub fn expect_z_all(&self) -> Vec<f64> {
        let n = self.num_qubits;
        let accumulate = |mut acc: Vec<f64>, base: usize, chunk: &[C64]| {
            for (i, z) in chunk.iter().enumerate() {
                let p = z.norm_sqr();
                let b = base + i;
                for (q, a) in acc.iter_mut().enumerate() {
                    if b >> q & 1 == 0 {
                        *a += p;
                    } else {
                        *a -= p;
                    }
                }
            }
            acc
        };
        if self.parallel() {
            self.amps
                .par_chunks(CHUNK)
                .enumerate()
                .map(|(ci, c)| accumulate(vec![0.0; n], ci * CHUNK, c))
                .reduce(|| vec![0.0; n], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
        } else {
            accumulate(vec![0.0; n], 0, &self.amps)
        }
    }

    /// Measurement outcomes on `qubits` in the computational basis, one row
    /// per shot, one column per member of `qubits` (in its sorted order).
    pub fn sample_bits(&self, qubits: &MeasureSet, n_shots: usize, seed: u64) -> Vec<Vec<u8>> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for z in &self.amps {
            acc += z.norm_sqr();
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_shots)
            .map(|_| {
                let u = rng.random::<f64>() * acc;
                let b = cdf.partition_point(|&c| c <= u).min(self.amps.len() - 1);
                qubits.qubits().iter().map(|&q| (b >> q & 1) as u8).collect()
            })
            .collect()
    }

    /// Little-endian interleaved `(re, im)` doubles.
    pub fn dump(&self, mut out: impl Write) -> std::io::Result<()> {
        for z in &self.amps {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SvBackend {
    cap: usize,
}

impl SvBackend {
    pub fn new(cap: usize) -> Self {
        Self { cap }
    }
}

impl Backend for SvBackend {
    fn name(&self) -> &'static str {
        "sv"
    }

    fn check_graph(&self, graph: &LatticeGraph) -> Result<()> {
        if graph.num_qubits() > self.cap {
            return Err(BackendError::CapExceeded { num_qubits: graph.num_qubits(), cap: self.cap });
        }
        Ok(())
    }

    fn prepare(&self, graph: &LatticeGraph, pattern: &InitialPattern) -> Result<Box<dyn Evolver>> {
        self.check_graph(graph)?;
        check_pattern(graph, pattern)?;
        Ok(Box::new(StateVector::init_product(pattern, self.cap)?))
    }
}

impl Evolver for StateVector {
    fn apply_cycle(&mut self, program: &GateProgram) -> Result<()> {
        self.apply_program(program);
        Ok(())
    }

    fn expect_z_all(&mut self) -> Result<Vec<f64>> {
        Ok(StateVector::expect_z_all(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gates;
    use crate::lattice::PatternKind;

    fn product(bits: &[u8]) -> StateVector {
        StateVector::init_product(&InitialPattern::explicit(bits.to_vec()).unwrap(), DEFAULT_CAP).unwrap()
    }

    #[test]
    fn bit_order_convention() {
        let s = product(&[1, 0, 1]);
        assert_eq!(s.amplitudes()[0b101].re, 1.0);
        let s = product(&[1, 1, 0]);
        assert_eq!(s.amplitudes()[0b011].re, 1.0);
        assert_eq!(s.expect_z_all(), vec![-1.0, -1.0, 1.0]);
        assert_eq!(s.norm_sqr(), 1.0);
    }

    #[test]
    fn cap_is_enforced() {
        let p = InitialPattern::explicit(vec![0; 5]).unwrap();
        assert!(matches!(StateVector::init_product(&p, 4), Err(BackendError::CapExceeded { .. })));
        assert_eq!(p.kind(), PatternKind::Explicit);
    }

    #[test]
    fn rx_half_pi_is_on_equator() {
        let mut s = product(&[0]);
        s.apply_single(0, &gates::rx(std::f64::consts::FRAC_PI_2));
        assert!(s.expect_z(0).abs() < 1e-15);
    }

    #[test]
    fn sampling_product_state() {
        let s = product(&[0, 0, 0]);
        let a = MeasureSet::new([0, 2], 3).unwrap();
        let shots = s.sample_bits(&a, 100, 3);
        assert!(shots.iter().all(|row| row == &[0, 0]));
        let t = product(&[1, 0, 1]);
        assert!(t.sample_bits(&a, 10, 3).iter().all(|row| row == &[1, 1]));
    }

    #[test]
    fn dump_layout() {
        let s = product(&[1]);
        let mut buf = Vec::new();
        s.dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 32);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1.0);
    }
}
