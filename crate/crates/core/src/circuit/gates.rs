//! Gate matrices, `R_P(θ) = exp(-iθP/2)`.
//!
//! Two-qubit matrices act on the local basis `|s_a s_b>` with row/column
//! index `2*s_a + s_b`, where `a` is the first target.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn rx(theta: f64) -> Matrix2<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix2::new(C64::from(c), -I * s, -I * s, C64::from(c))
}

pub fn rz(theta: f64) -> Matrix2<C64> {
    Matrix2::new(C64::from_polar(1.0, -theta / 2.0), ZERO, ZERO, C64::from_polar(1.0, theta / 2.0))
}

/// Diagonal of `R_ZZ(θ)`: phase `exp(-iθ z_a z_b / 2)`.
pub fn rzz(theta: f64) -> Matrix4<C64> {
    let same = C64::from_polar(1.0, -theta / 2.0);
    let diff = C64::from_polar(1.0, theta / 2.0);
    Matrix4::from_diagonal(&nalgebra::Vector4::new(same, diff, diff, same))
}

pub fn cz() -> Matrix4<C64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ONE, -ONE))
}

pub fn s_dagger() -> Matrix2<C64> {
    Matrix2::new(ONE, ZERO, ZERO, -I)
}

pub fn pauli(index: u8) -> Matrix2<C64> {
    match index {
        0 => Matrix2::identity(),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// `a ⊗ b` in the two-qubit local basis (`a` on the first target).
pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// The same two-qubit operator with its targets exchanged.
pub fn swap_targets(m: &Matrix4<C64>) -> Matrix4<C64> {
    const P: [usize; 4] = [0, 2, 1, 3];
    Matrix4::from_fn(|r, c| m[(P[r], P[c])])
}
