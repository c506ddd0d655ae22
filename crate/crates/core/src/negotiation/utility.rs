//! Per-attribute utility functions and their additive combination.
//!
//! Terms are normalized offer levels in `[0,1]`. For utility-driven
//! attributes `1` is the best level; for cost-driven ones `0` is (a response
//! time "close to zero").

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::NegotiationError;
use crate::qos::Direction;
use crate::scalar::{weights_sum_to_one, Scalar};

fn check_domain<T: Scalar>(value: T, alpha: T, beta: T) -> Result<(), NegotiationError> {
    let ok = value >= T::zero() && value <= T::one() && alpha >= T::zero() && beta >= T::zero();
    if ok && alpha.is_finite() && beta.is_finite() {
        Ok(())
    } else {
        Err(NegotiationError::Domain(format!(
            "level {value} must lie in [0,1], alpha {alpha} and beta {beta} must be finite and non-negative"
        )))
    }
}

/// Utility of a utility-driven level `x`: `x^β(1+α) / (1+α·x^β)`.
///
/// `β = 0` makes the consumer indifferent: the utility is `1` everywhere.
pub fn utility_gain<T: Scalar>(x: T, alpha: T, beta: T) -> Result<T, NegotiationError> {
    check_domain(x, alpha, beta)?;
    let p = x.powf(beta);
    Ok((p * (T::one() + alpha) / (T::one() + alpha * p)).min(T::one()))
}

/// Utility of a cost-driven level `y`: `(1 − y^β) / (1 + α·y^β)`.
///
/// Equals `1` at `y = 0` and `0` at `y = 1` for any `β > 0`. With `β = 0`
/// the contribution is the constant `0`.
pub fn utility_cost<T: Scalar>(y: T, alpha: T, beta: T) -> Result<T, NegotiationError> {
    check_domain(y, alpha, beta)?;
    let p = y.powf(beta);
    Ok(((T::one() - p) / (T::one() + alpha * p)).max(T::zero()))
}

/// Derivative of [`utility_gain`] with respect to `x`, for `x ∈ (0,1]`.
pub fn utility_gain_slope<T: Scalar>(x: T, alpha: T, beta: T) -> Result<T, NegotiationError> {
    check_domain(x, alpha, beta)?;
    let p = x.powf(beta);
    let dp = beta * x.powf(beta - T::one());
    let denom = T::one() + alpha * p;
    Ok((T::one() + alpha) * dp / (denom * denom))
}

/// Shape of one attribute's utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AttributeUtility<T: Scalar> {
    pub name: String,
    pub direction: Direction,
    pub alpha: T,
    /// Sensitivity; `0` means indifferent.
    pub beta: T,
    pub weight: T,
}

impl<T: Scalar> AttributeUtility<T> {
    pub fn new(name: impl Into<String>, direction: Direction, alpha: T, beta: T, weight: T) -> Self {
        Self { name: name.into(), direction, alpha, beta, weight }
    }

    pub fn utility(&self, level: T) -> Result<T, NegotiationError> {
        match self.direction {
            Direction::UtilityDriven => utility_gain(level, self.alpha, self.beta),
            Direction::CostDriven => utility_cost(level, self.alpha, self.beta),
        }
    }

    /// The level this attribute's utility peaks at.
    pub fn ideal_level(&self) -> T {
        match self.direction {
            Direction::UtilityDriven => T::one(),
            Direction::CostDriven => T::zero(),
        }
    }
}

/// A consumer's utility model over all negotiated attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "Vec<AttributeUtility<T>>", into = "Vec<AttributeUtility<T>>")]
pub struct UtilityParams<T: Scalar> {
    attributes: Vec<AttributeUtility<T>>,
}

impl<T: Scalar> UtilityParams<T> {
    pub fn new(attributes: Vec<AttributeUtility<T>>) -> Result<Self, NegotiationError> {
        let mut seen = std::collections::BTreeSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(NegotiationError::InvalidConfig(format!("attribute `{}` listed twice", a.name)));
            }
            let ok = a.alpha >= T::zero() && a.beta >= T::zero() && a.alpha.is_finite() && a.beta.is_finite();
            if !ok {
                return Err(NegotiationError::Domain(format!("`{}` has a negative or non-finite alpha/beta", a.name)));
            }
            if !(a.weight >= T::zero() && a.weight <= T::one()) {
                return Err(NegotiationError::InvalidConfig(format!("weight of `{}` outside [0,1]", a.name)));
            }
        }
        weights_sum_to_one(attributes.iter().map(|a| a.weight))
            .map_err(|sum| NegotiationError::WeightSumError { sum: sum.as_f64() })?;
        Ok(Self { attributes })
    }

    pub fn attributes(&self) -> &[AttributeUtility<T>] {
        &self.attributes
    }

    pub fn get(&self, name: &str) -> Option<&AttributeUtility<T>> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Best level per attribute: `1` for utility-driven, `0` for cost-driven.
    pub fn ideal_terms(&self) -> BTreeMap<String, T> {
        self.attributes.iter().map(|a| (a.name.clone(), a.ideal_level())).collect()
    }
}

impl<T: Scalar> TryFrom<Vec<AttributeUtility<T>>> for UtilityParams<T> {
    type Error = NegotiationError;

    fn try_from(attributes: Vec<AttributeUtility<T>>) -> Result<Self, Self::Error> {
        Self::new(attributes)
    }
}

impl<T: Scalar> From<UtilityParams<T>> for Vec<AttributeUtility<T>> {
    fn from(params: UtilityParams<T>) -> Self {
        params.attributes
    }
}

/// Additive global utility `Σ_V wᵢ·Fᵢ + Σ_R wⱼ·Gⱼ`.
pub fn global_utility<T: Scalar>(terms: &BTreeMap<String, T>, params: &UtilityParams<T>) -> Result<T, NegotiationError> {
    if let Some(extra) = terms.keys().find(|k| params.get(k).is_none()) {
        return Err(NegotiationError::AttributeMismatch(format!("unexpected term `{extra}`")));
    }
    let sum = params.attributes.iter().try_fold(T::zero(), |acc, a| {
        let level = terms
            .get(&a.name)
            .ok_or_else(|| NegotiationError::AttributeMismatch(format!("missing term `{}`", a.name)))?;
        Ok::<T, NegotiationError>(acc + a.weight * a.utility(*level)?)
    })?;
    // weights only sum to one within tolerance
    Ok(sum.max(T::zero()).min(T::one()))
}
