use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_coverage, check_names, Direction, Offer, ProviderId, QosAttributeSpec, QosError, Requirement};
use crate::scalar::Scalar;

/// Per-attribute normalization range, taken over every offer plus the
/// requirement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Bounds<T: Scalar> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Bounds<T> {
    /// Maps a raw value into `[0,1]`, with `1` the most desirable end.
    ///
    /// A zero-width range maps everything to `1`: nobody differs on the
    /// attribute, so everyone fully satisfies it.
    pub fn normalize(&self, value: T, direction: Direction) -> T {
        let range = self.max - self.min;
        if range <= T::zero() {
            return T::one();
        }
        let q = match direction {
            Direction::UtilityDriven => (value - self.min) / range,
            Direction::CostDriven => (self.max - value) / range,
        };
        // Rounding can push an extreme a hair outside the unit interval.
        q.max(T::zero()).min(T::one())
    }
}

/// Offers and requirement after normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NormalizedMatrix<T: Scalar> {
    /// Attribute names in spec order.
    pub attributes: Vec<String>,
    /// One row per offer, in input order.
    pub rows: Vec<(ProviderId, BTreeMap<String, T>)>,
    pub requirement_row: BTreeMap<String, T>,
    pub bounds: BTreeMap<String, Bounds<T>>,
}

impl<T: Scalar> NormalizedMatrix<T> {
    pub fn row(&self, id: &ProviderId) -> Option<&BTreeMap<String, T>> {
        self.rows.iter().find(|(pid, _)| pid == id).map(|(_, row)| row)
    }
}

/// Normalizes every offer and the requirement against bounds computed over
/// `offers ∪ {requirement}`.
pub fn normalize<T: Scalar>(
    offers: &[Offer<T>],
    requirement: &Requirement<T>,
    specs: &[QosAttributeSpec<T>],
) -> Result<NormalizedMatrix<T>, QosError> {
    if offers.is_empty() {
        return Err(QosError::EmptyOfferSet);
    }
    check_names(specs)?;
    for offer in offers {
        check_coverage(&format!("offer {}", offer.provider_id), &offer.values, specs)?;
    }
    check_coverage("requirement", &requirement.values, specs)?;

    let bounds: BTreeMap<String, Bounds<T>> = specs
        .iter()
        .map(|spec| {
            let c = requirement.values[&spec.name];
            let (min, max) = offers
                .iter()
                .map(|o| o.values[&spec.name])
                .fold((c, c), |(lo, hi), v| (lo.min(v), hi.max(v)));
            (spec.name.clone(), Bounds { min, max })
        })
        .collect();

    let normalize_values = |values: &BTreeMap<String, T>| -> BTreeMap<String, T> {
        specs
            .iter()
            .map(|spec| (spec.name.clone(), bounds[&spec.name].normalize(values[&spec.name], spec.direction)))
            .collect()
    };

    Ok(NormalizedMatrix {
        attributes: specs.iter().map(|s| s.name.clone()).collect(),
        rows: offers.iter().map(|o| (o.provider_id.clone(), normalize_values(&o.values))).collect(),
        requirement_row: normalize_values(&requirement.values),
        bounds,
    })
}
