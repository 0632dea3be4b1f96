use rand::Rng;

use super::{Decision, Policy};
use crate::env::Action;
use crate::SimRng;

/// Four independent uniform draws on `[-1, 1]`.
pub fn random_action<R: Rng + ?Sized>(rng: &mut R) -> Action {
    let mut draw = || rng.random_range(-1.0..=1.0);
    Action::new(draw(), draw(), draw(), draw())
}

/// Uniformly random actions, regardless of observation or mode.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn act(&mut self, _observation: &[f64], _explore: bool, rng: &mut SimRng) -> Decision {
        random_action(rng).into()
    }
}
