//! Time-dependent concession rules.
//!
//! None of these come from the negotiation model itself, which only says a
//! counter-proposal carries "different conditions". They are simulation
//! defaults and can be swapped through [`CounterStrategy`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::NegotiationError;
use crate::scalar::Scalar;

/// Fraction of the distance between a party's own position and its target
/// that has been conceded after `round` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum Concession<T: Scalar> {
    /// Never move.
    Constant,
    /// `min(1, round·step)`.
    Linear { step: T },
    /// `min(1, round·step)^exponent`: slow early, fast late for `exponent > 1`.
    Boulware { step: T, exponent: T },
}

impl<T: Scalar> Default for Concession<T> {
    fn default() -> Self {
        Concession::Linear { step: T::lit(0.1) }
    }
}

impl<T: Scalar> Concession<T> {
    pub fn linear(step: T) -> Self {
        Concession::Linear { step }
    }

    pub fn validate(&self) -> Result<(), NegotiationError> {
        let ok = match *self {
            Concession::Constant => true,
            Concession::Linear { step } => step >= T::zero() && step <= T::one(),
            Concession::Boulware { step, exponent } => {
                step >= T::zero() && step <= T::one() && exponent > T::zero() && exponent.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(NegotiationError::InvalidConfig(format!("invalid concession settings {self:?}")))
        }
    }

    pub fn fraction(&self, round: u32) -> T {
        let elapsed = |step: T| (T::lit(f64::from(round)) * step).min(T::one()).max(T::zero());
        match *self {
            Concession::Constant => T::zero(),
            Concession::Linear { step } => elapsed(step),
            Concession::Boulware { step, exponent } => elapsed(step).powf(exponent),
        }
    }
}

/// Moves `from` toward `toward` by `fraction`, clamping every level to `[0,1]`.
/// Attributes missing from `toward` stay where they are.
pub fn interpolate<T: Scalar>(from: &BTreeMap<String, T>, toward: &BTreeMap<String, T>, fraction: T) -> BTreeMap<String, T> {
    from.iter()
        .map(|(name, a)| {
            let b = toward.get(name).copied().unwrap_or(*a);
            let v = if fraction >= T::one() { b } else { *a + fraction * (b - *a) };
            (name.clone(), v.max(T::zero()).min(T::one()))
        })
        .collect()
}

/// Produces the broker's counter-proposal terms.
pub trait CounterStrategy<T: Scalar> {
    fn counter_terms(&self, ideal: &BTreeMap<String, T>, opponent_last: &BTreeMap<String, T>, round: u32) -> BTreeMap<String, T>;
}

impl<T: Scalar> CounterStrategy<T> for Concession<T> {
    fn counter_terms(&self, ideal: &BTreeMap<String, T>, opponent_last: &BTreeMap<String, T>, round: u32) -> BTreeMap<String, T> {
        interpolate(ideal, opponent_last, self.fraction(round))
    }
}
