use serde::{Deserialize, Serialize};

use super::{
    check_coverage, check_names, normalize, validate_specs, Direction, Offer, QosAttributeSpec, QosError,
    RankingMethod, RankingTable, Requirement,
};
use crate::scalar::Scalar;

/// How the TOPSIS decision matrix is built before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopsisNormalization {
    /// Reuse the min-max normalized matrix of the weighted-utility ranking.
    /// Every column is then benefit-oriented and the requirement only enters
    /// through the normalization bounds.
    #[default]
    MinMax,
    /// Classic column-wise Euclidean normalization of the raw offers; the
    /// requirement is ignored.
    Vector,
}

/// TOPSIS ranking with the default [`TopsisNormalization::MinMax`] matrix.
pub fn topsis_rank<T: Scalar>(
    offers: &[Offer<T>],
    requirement: &Requirement<T>,
    specs: &[QosAttributeSpec<T>],
) -> Result<RankingTable<T>, QosError> {
    topsis_rank_with(offers, requirement, specs, TopsisNormalization::default())
}

/// Ranks offers by closeness to the ideal solution, `S⁻ / (S⁺ + S⁻)`.
///
/// An offer sitting on the ideal solution scores `1` even in the fully
/// degenerate case where ideal and negative-ideal coincide.
pub fn topsis_rank_with<T: Scalar>(
    offers: &[Offer<T>],
    requirement: &Requirement<T>,
    specs: &[QosAttributeSpec<T>],
    normalization: TopsisNormalization,
) -> Result<RankingTable<T>, QosError> {
    if offers.len() < 2 {
        return Err(QosError::TooFewOffers(offers.len()));
    }
    validate_specs(specs)?;

    // (benefit-oriented?, weighted column) per attribute, rows in offer order
    let columns: Vec<(bool, Vec<T>)> = match normalization {
        TopsisNormalization::MinMax => {
            let matrix = normalize(offers, requirement, specs)?;
            specs
                .iter()
                .map(|spec| (true, matrix.rows.iter().map(|(_, row)| spec.weight * row[&spec.name]).collect()))
                .collect()
        }
        TopsisNormalization::Vector => {
            check_names(specs)?;
            for offer in offers {
                check_coverage(&format!("offer {}", offer.provider_id), &offer.values, specs)?;
            }
            specs
                .iter()
                .map(|spec| {
                    let raw: Vec<T> = offers.iter().map(|o| o.values[&spec.name]).collect();
                    let norm = raw.iter().map(|v| *v * *v).sum::<T>().sqrt();
                    if norm <= T::zero() {
                        return Err(QosError::DegenerateColumn(spec.name.clone()));
                    }
                    let benefit = spec.direction == Direction::UtilityDriven;
                    Ok((benefit, raw.into_iter().map(|v| spec.weight * v / norm).collect()))
                })
                .collect::<Result<_, _>>()?
        }
    };

    let extremes: Vec<(T, T)> = columns
        .iter()
        .map(|(benefit, col)| {
            let hi = col.iter().copied().fold(T::neg_infinity(), T::max);
            let lo = col.iter().copied().fold(T::infinity(), T::min);
            if *benefit {
                (hi, lo)
            } else {
                (lo, hi)
            }
        })
        .collect();

    let scores = offers
        .iter()
        .enumerate()
        .map(|(r, offer)| {
            let (mut to_ideal, mut to_negative) = (T::zero(), T::zero());
            for ((_, col), (ideal, negative)) in columns.iter().zip(&extremes) {
                let v = col[r];
                to_ideal = to_ideal + (v - *ideal) * (v - *ideal);
                to_negative = to_negative + (v - *negative) * (v - *negative);
            }
            let (s_plus, s_minus) = (to_ideal.sqrt(), to_negative.sqrt());
            let closeness = if s_plus == T::zero() { T::one() } else { s_minus / (s_plus + s_minus) };
            (offer.provider_id.clone(), closeness)
        })
        .collect();

    Ok(RankingTable::from_scores(RankingMethod::Topsis, scores))
}
