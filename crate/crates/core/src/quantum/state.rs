use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use num_traits::{One, Zero};
use rand::Rng;

use super::{qubit_mask, C64, MAX_QUBITS, TOL};
use crate::error::{bail, Result};

/// Pure state of an `n`-qubit register: `2^n` complex amplitudes of unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Validate length and norm (within `1e-9`).
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            bail!(InvalidArgument, "statevector length {len} is not a power of two >= 2");
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            bail!(InvalidArgument, "{num_qubits} qubits exceeds the cap of {MAX_QUBITS}");
        }
        let state = Self { num_qubits, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > TOL {
            bail!(InvalidArgument, "statevector has squared norm {norm}, expected 1");
        }
        Ok(state)
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self { num_qubits, amplitudes }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            bail!(InvalidArgument, "inner product of {}- and {}-qubit states", self.num_qubits, other.num_qubits);
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Multiply every amplitude by `phase`; `phase` must have unit modulus.
    pub fn with_global_phase(&self, phase: C64) -> Self {
        Self { num_qubits: self.num_qubits, amplitudes: self.amplitudes.iter().map(|a| a * phase).collect() }
    }

    /// Interleaved `(re, im)` pairs in amplitude-index order.
    pub fn to_interleaved(&self) -> Vec<f64> {
        self.amplitudes.iter().flat_map(|a| [a.re, a.im]).collect()
    }

    /// Probability of reading 1 on `qubit`.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let mask = qubit_mask(qubit, self.num_qubits);
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// `|0...0>` on `num_qubits` qubits.
pub fn init_state(num_qubits: usize) -> Result<StateVector> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        bail!(InvalidConfig, "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}");
    }
    let mut amplitudes = vec![C64::zero(); 1 << num_qubits];
    amplitudes[0] = C64::one();
    Ok(StateVector { num_qubits, amplitudes })
}

/// `|<a|b>|^2`, clamped into `[0, 1]` against rounding.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Projective Z-basis measurement of one qubit.
///
/// Draws one uniform `f64` from `rng`; outcome 1 when it falls below the
/// marginal probability of 1. The returned state keeps only the amplitudes
/// consistent with the outcome, renormalised. A branch with probability 0 is
/// never selected.
pub fn measure_qubit<R: Rng + ?Sized>(
    state: &StateVector,
    qubit: usize,
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    let n = state.num_qubits;
    if qubit >= n {
        bail!(InvalidAction, "measured qubit {qubit} out of range for {n} qubits");
    }
    let p1 = state.prob_one(qubit);
    let p0 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() - p1;
    let draw: f64 = rng.random();
    let outcome: u8 = if p1 <= 0.0 {
        0
    } else if p0 <= 0.0 {
        1
    } else if draw < p1 / (p0 + p1) {
        1
    } else {
        0
    };
    let kept = if outcome == 1 { p1 } else { p0 };
    let scale = 1.0 / kept.sqrt();
    let mask = qubit_mask(qubit, n);
    let amplitudes = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| if ((i & mask != 0) as u8) == outcome { a * scale } else { C64::zero() })
        .collect();
    Ok((outcome, StateVector { num_qubits: n, amplitudes }))
}
