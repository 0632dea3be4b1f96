//! Quantum circuit designer core.
//!
//! A dense statevector simulator, an episodic gate-by-gate circuit building
//! environment, the State Preparation / Unitary Composition challenge
//! registry and two baseline agents (uniform random, REINFORCE).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! command-line front end and parallel training live in the `qcd` companion
//! crate. Every stochastic component takes an explicit seed.
//!
//! Bit convention: qubit 0 is the most significant bit of an amplitude index,
//! so the basis state `|b0 b1 ... b(n-1)>` sits at index `b0*2^(n-1) + ... + b(n-1)`.
#![no_std]

extern crate alloc;

pub mod agents;
pub mod challenge;
pub mod circuit;
pub mod env;
mod error;
pub mod oracles;
pub mod quantum;

pub use error::{Error, Result};

/// Seeded generator used everywhere randomness is needed.
///
/// ChaCha8 with `seed_from_u64` is a fixed, documented algorithm, so a given
/// seed produces the same stream on every platform.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Build a [`SimRng`] from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
