//! Haar-distributed random unitaries and states.
//!
//! Sampling follows the QR recipe: fill a matrix with i.i.d. standard complex
//! Gaussians, factor it as `A = QR`, then rescale column `j` of `Q` by
//! `r_jj / |r_jj|`. The phase fix makes the factorisation unique and the
//! resulting `Q` Haar distributed.
//!
//! Gaussians come from the Box-Muller transform over [`SimRng`]: two uniforms
//! `u1, u2` in `[0, 1)` give `sqrt(-2 ln(1 - u1)) * (cos 2pi u2, sin 2pi u2) / sqrt 2`
//! as the real and imaginary parts. Entries are drawn column by column.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use num_traits::{One, Zero};
use rand::Rng;

use super::{Matrix, StateVector, C64, MAX_QUBITS, MAX_UNITARY_QUBITS};
use crate::error::{bail, Result};
use crate::{rng_from_seed, SimRng};

/// One complex normal sample with `E|z|^2 = 1`.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let radius = (-2.0 * (1.0 - u1).ln()).sqrt() * FRAC_1_SQRT_2;
    let (s, c) = (TAU * u2).sin_cos();
    C64::new(radius * c, radius * s)
}

/// One real standard normal sample (the cosine branch of Box-Muller).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (TAU * u2).cos()
}

fn gaussian_matrix(dim: usize, rng: &mut SimRng) -> Matrix {
    let mut a = Matrix::zeros(dim);
    for c in 0..dim {
        for r in 0..dim {
            a[(r, c)] = standard_complex_gaussian(rng);
        }
    }
    a
}

/// Householder QR of a square complex matrix: returns `(Q, R)` with `Q`
/// unitary and `R` upper triangular such that `Q R = A`.
pub fn qr_decompose(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.dim();
    let mut r = a.clone();
    let mut q = Matrix::identity(n);
    let mut v: Vec<C64> = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        let norm_x = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == 0.0 { C64::one() } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        v.clear();
        v.extend((k..n).map(|i| r[(i, k)]));
        v[0] -= alpha;
        let v_norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if v_norm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= v_norm;
        }
        // R <- (I - 2 v v^H) R on rows k..n
        for col in k..n {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * r[(k + i, col)]).sum();
            for (i, vi) in v.iter().enumerate() {
                r[(k + i, col)] -= *vi * dot * 2.0;
            }
        }
        // Q <- Q (I - 2 v v^H) on columns k..n
        for row in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(i, vi)| q[(row, k + i)] * vi).sum();
            for (i, vi) in v.iter().enumerate() {
                q[(row, k + i)] -= dot * vi.conj() * 2.0;
            }
        }
        for i in k + 1..n {
            r[(i, k)] = C64::zero();
        }
    }
    (q, r)
}

/// Haar-random unitary on `num_qubits` qubits, deterministic per `seed`.
pub fn haar_random_unitary(num_qubits: usize, seed: u64) -> Result<Matrix> {
    if num_qubits == 0 || num_qubits > MAX_UNITARY_QUBITS {
        bail!(InvalidConfig, "random unitary needs 1..={MAX_UNITARY_QUBITS} qubits, got {num_qubits}");
    }
    let dim = 1 << num_qubits;
    let mut rng = rng_from_seed(seed);
    let a = gaussian_matrix(dim, &mut rng);
    let (mut q, r) = qr_decompose(&a);
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { C64::one() } else { d / d.norm() };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Haar-random state `U|0...0>` for `U = haar_random_unitary(num_qubits, seed)`.
///
/// After the phase fix, column 0 of `U` is the first Gaussian column divided by
/// its norm, so only that column is drawn. The result matches the full
/// unitary's first column up to rounding and also works beyond the dense
/// unitary cap.
pub fn haar_random_state(num_qubits: usize, seed: u64) -> Result<StateVector> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        bail!(InvalidConfig, "random state needs 1..={MAX_QUBITS} qubits, got {num_qubits}");
    }
    let dim = 1usize << num_qubits;
    let mut rng = rng_from_seed(seed);
    let mut amps: Vec<C64> = (0..dim).map(|_| standard_complex_gaussian(&mut rng)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in amps.iter_mut() {
        *z /= norm;
    }
    Ok(StateVector::from_raw(num_qubits, amps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_reconstructs_input() {
        let mut rng = rng_from_seed(5);
        for dim in [1, 2, 4, 8] {
            let a = gaussian_matrix(dim, &mut rng);
            let (q, r) = qr_decompose(&a);
            assert!(q.is_unitary(1e-12));
            for i in 0..dim {
                for j in 0..i {
                    assert_eq!(r[(i, j)], C64::zero());
                }
            }
            assert!(q.mul(&r).max_abs_diff(&a) < 1e-12);
        }
    }

    #[test]
    fn haar_unitary_is_unitary_and_seeded() {
        for seed in 0..100 {
            let u = haar_random_unitary(2, seed).unwrap();
            assert!(u.is_unitary(1e-9));
        }
        assert_eq!(haar_random_unitary(2, 9).unwrap(), haar_random_unitary(2, 9).unwrap());
        assert_ne!(haar_random_unitary(2, 9).unwrap(), haar_random_unitary(2, 10).unwrap());
    }

    #[test]
    fn haar_state_is_first_column() {
        for seed in 0..20 {
            let s = haar_random_state(1, seed).unwrap();
            let col = haar_random_unitary(1, seed).unwrap().column(0);
            for (a, b) in s.amplitudes().iter().zip(&col) {
                assert!((a - b).norm() < 1e-12);
            }
            assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_has_unit_second_moment() {
        let mut rng = rng_from_seed(1);
        let n = 20000;
        let m2: f64 = (0..n).map(|_| standard_complex_gaussian(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.03, "{m2}");
    }

    #[test]
    fn rejects_oversized_registers() {
        assert!(haar_random_unitary(0, 1).is_err());
        assert!(haar_random_unitary(MAX_UNITARY_QUBITS + 1, 1).is_err());
        assert!(haar_random_state(MAX_QUBITS + 1, 1).is_err());
    }
}
