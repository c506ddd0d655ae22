use std::collections::BTreeMap;

use super::{
    normalize, validate_specs, NormalizedMatrix, Offer, ProviderId, QosAttributeSpec, QosError, RankingMethod,
    RankingTable, Requirement,
};
use crate::scalar::Scalar;

/// Weighted combined level of satisfaction `Σ wᵢ·qᵢ` for one normalized row.
pub fn aggregate_utility<T: Scalar>(
    normalized_row: &BTreeMap<String, T>,
    specs: &[QosAttributeSpec<T>],
) -> Result<T, QosError> {
    validate_specs(specs)?;
    specs.iter().try_fold(T::zero(), |acc, spec| {
        let q = normalized_row.get(&spec.name).ok_or_else(|| QosError::AttributeMismatch {
            owner: "normalized row".into(),
            detail: format!("missing `{}`", spec.name),
        })?;
        Ok(acc + spec.weight * *q)
    })
}

/// Ranks every offer by aggregate utility. Entry 1 is the best offer.
pub fn select_best<T: Scalar>(
    offers: &[Offer<T>],
    requirement: &Requirement<T>,
    specs: &[QosAttributeSpec<T>],
) -> Result<RankingTable<T>, QosError> {
    let matrix = normalize(offers, requirement, specs)?;
    let scores = matrix
        .rows
        .iter()
        .map(|(id, row)| aggregate_utility(row, specs).map(|u| (id.clone(), u)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RankingTable::from_scores(RankingMethod::WeightedUtility, scores))
}

/// For each provider, whether its normalized value meets or exceeds the
/// normalized requirement on each attribute (`qᵢ ≥ cᵢ`).
pub fn satisfaction_flags<T: Scalar>(matrix: &NormalizedMatrix<T>) -> BTreeMap<ProviderId, BTreeMap<String, bool>> {
    matrix
        .rows
        .iter()
        .map(|(id, row)| {
            let flags = row.iter().map(|(name, q)| (name.clone(), *q >= matrix.requirement_row[name])).collect();
            (id.clone(), flags)
        })
        .collect()
}
