//! Attribute means, the weighted index, achievable bounds, rankings and
//! single-weight sensitivity.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::catalog::{AttributeId, Catalog, CriterionId, Rating};
use crate::error::{Error, Result};
use crate::exact::{self, int, Rational};
use crate::profile::{LibraryInfo, LibraryProfile};
use crate::weighting::{default_tolerance, validate_weights, WeightVector};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionRating {
    pub criterion: CriterionId,
    pub rating: Rating,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeRow {
    pub attribute_id: AttributeId,
    pub name: String,
    pub ratings: Vec<CriterionRating>,
    /// Number of rated criteria (m_i).
    pub assessed_count: usize,
    #[serde(with = "exact::option")]
    pub mean: Option<Rational>,
    pub mean_display: Option<String>,
    #[serde(with = "exact")]
    pub weight: Rational,
    #[serde(with = "exact")]
    pub contribution: Rational,
    pub assessed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub library: LibraryInfo,
    pub library_id: String,
    pub catalog_version: String,
    pub engine_version: String,
    pub rows: Vec<AttributeRow>,
    #[serde(with = "exact")]
    pub total: Rational,
    pub total_display: String,
    pub total_exact: String,
    #[serde(with = "exact")]
    pub achievable_min: Rational,
    #[serde(with = "exact")]
    pub achievable_max: Rational,
    pub weights_used: WeightVector,
}

impl IndexReport {
    pub fn row(&self, id: AttributeId) -> Option<&AttributeRow> {
        self.rows.iter().find(|r| r.attribute_id == id)
    }
}

/// Weights must cover exactly the catalog attributes.
pub fn check_weight_coverage(catalog: &Catalog, weights: &WeightVector) -> Result<()> {
    let expected: std::collections::BTreeSet<_> = catalog.attribute_ids().into_iter().collect();
    let actual = weights.attribute_ids();
    if expected != actual {
        return Err(Error::WeightMismatch {
            missing: expected.difference(&actual).copied().collect(),
            unexpected: actual.difference(&expected).copied().collect(),
        });
    }
    Ok(())
}

/// Ratings of `profile` grouped by attribute, in catalog order.
fn ratings_by_attribute(catalog: &Catalog, profile: &LibraryProfile) -> BTreeMap<AttributeId, Vec<CriterionRating>> {
    let mut out: BTreeMap<AttributeId, Vec<CriterionRating>> = BTreeMap::new();
    for attr in &catalog.attributes {
        let rated = attr
            .criteria
            .iter()
            .filter_map(|c| {
                profile.rating(c.id.as_str()).map(|r| CriterionRating {
                    criterion: c.id.clone(),
                    rating: r.clone(),
                })
            })
            .collect();
        out.insert(attr.id, rated);
    }
    out
}

fn mean(ratings: &[CriterionRating]) -> Option<Rational> {
    if ratings.is_empty() {
        return None;
    }
    let sum: Rational = ratings.iter().map(|r| r.rating.value().clone()).sum();
    Some(sum / int(ratings.len() as i64))
}

/// Mean rating over the rated criteria of one attribute; `None` when nothing
/// was rated.
pub fn attribute_score(catalog: &Catalog, profile: &LibraryProfile, attribute_id: AttributeId) -> Result<Option<Rational>> {
    let attr = catalog
        .attribute(attribute_id)
        .ok_or_else(|| Error::UnknownAttribute(attribute_id.to_string()))?;
    let rated: Vec<CriterionRating> = attr
        .criteria
        .iter()
        .filter_map(|c| {
            profile.rating(c.id.as_str()).map(|r| CriterionRating {
                criterion: c.id.clone(),
                rating: r.clone(),
            })
        })
        .collect();
    Ok(mean(&rated))
}

/// Scores a profile without the weight-sum check. Weight coverage and profile
/// validity are still enforced.
pub fn evaluate(catalog: &Catalog, profile: &LibraryProfile, weights: &WeightVector) -> Result<IndexReport> {
    check_weight_coverage(catalog, weights)?;
    profile.validate(catalog)?;
    let grouped = ratings_by_attribute(catalog, profile);
    let mut rows = Vec::with_capacity(catalog.n());
    let mut total = Rational::zero();
    let mut max = Rational::zero();
    for attr in &catalog.attributes {
        let ratings = grouped.get(&attr.id).cloned().unwrap_or_default();
        let weight = weights.get(attr.id).expect("coverage checked").clone();
        let m = mean(&ratings);
        let contribution = m.as_ref().map_or_else(Rational::zero, |m| m * &weight);
        if m.is_some() {
            total += &contribution;
            max += &weight * int(2);
        }
        rows.push(AttributeRow {
            attribute_id: attr.id,
            name: attr.name.clone(),
            assessed_count: ratings.len(),
            ratings,
            mean_display: m.as_ref().map(|m| exact::fmt_signed(m, 2)),
            assessed: m.is_some(),
            mean: m,
            weight,
            contribution,
        });
    }
    Ok(IndexReport {
        library: profile.library.clone(),
        library_id: profile.library_id(),
        catalog_version: catalog.version.clone(),
        engine_version: ENGINE_VERSION.to_string(),
        rows,
        total_display: exact::fmt_fixed(&total, 2),
        total_exact: exact::fmt_exact(&total),
        total,
        achievable_min: -max.clone(),
        achievable_max: max,
        weights_used: weights.clone(),
    })
}

/// Weighted index: sum over assessed attributes of mean rating times weight.
pub fn compute_index(catalog: &Catalog, profile: &LibraryProfile, weights: &WeightVector) -> Result<IndexReport> {
    check_weight_coverage(catalog, weights)?;
    validate_weights(weights, &default_tolerance())?;
    evaluate(catalog, profile, weights)
}

/// `(-max, max)` with `max = 2 * sum of weights of assessed attributes`.
pub fn achievable_bounds(catalog: &Catalog, profile: &LibraryProfile, weights: &WeightVector) -> Result<(Rational, Rational)> {
    let report = compute_index(catalog, profile, weights)?;
    Ok((report.achievable_min, report.achievable_max))
}

fn by_total_then_name(a: &IndexReport, b: &IndexReport) -> Ordering {
    b.total
        .cmp(&a.total)
        .then_with(|| a.library.name.cmp(&b.library.name))
}

/// Reports sorted by descending total; exact ties break by library name.
pub fn rank_libraries(catalog: &Catalog, profiles: &[LibraryProfile], weights: &WeightVector) -> Result<Vec<IndexReport>> {
    if profiles.is_empty() {
        return Err(Error::EmptyInput("profiles"));
    }
    let mut versions: Vec<String> = profiles.iter().map(|p| p.catalog_version.clone()).collect();
    versions.sort();
    versions.dedup();
    if versions.len() > 1 {
        return Err(Error::MixedCatalogVersions(versions));
    }
    let mut reports = profiles
        .iter()
        .map(|p| compute_index(catalog, p, weights))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(by_total_then_name);
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossoverPoint {
    #[serde(with = "exact")]
    pub g_value: Rational,
    pub leader_before: String,
    pub leader_after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SensitivityReport {
    pub library_a: String,
    pub library_b: String,
    pub attribute_id: AttributeId,
    #[serde(with = "exact")]
    pub lo: Rational,
    #[serde(with = "exact")]
    pub hi: Rational,
    /// Index difference `a - b` with the varied attribute's weight at zero.
    #[serde(with = "exact")]
    pub base_difference: Rational,
    /// Change of `a - b` per unit of the varied weight.
    #[serde(with = "exact")]
    pub slope: Rational,
    pub crossovers: Vec<CrossoverPoint>,
    /// The other weights stay fixed, so the swept vector no longer sums to n.
    pub sum_constraint_relaxed: bool,
}

/// Finds where the ranking of two libraries flips while one weight sweeps
/// `[lo, hi]` and all others stay fixed.
pub fn weight_sensitivity(
    catalog: &Catalog,
    a: &LibraryProfile,
    b: &LibraryProfile,
    weights: &WeightVector,
    attribute_id: AttributeId,
    lo: &Rational,
    hi: &Rational,
) -> Result<SensitivityReport> {
    if lo > hi {
        return Err(Error::DegenerateRange {
            lo: exact::fmt_exact(lo),
            hi: exact::fmt_exact(hi),
        });
    }
    if lo.is_negative() {
        return Err(Error::InvalidRange(format!(
            "weight range must start at or above 0, got {}",
            exact::fmt_exact(lo)
        )));
    }
    catalog
        .attribute(attribute_id)
        .ok_or_else(|| Error::UnknownAttribute(attribute_id.to_string()))?;
    let ra = compute_index(catalog, a, weights)?;
    let rb = compute_index(catalog, b, weights)?;
    let row_mean = |r: &IndexReport| r.row(attribute_id).and_then(|row| row.mean.clone()).unwrap_or_else(Rational::zero);
    let row_contribution = |r: &IndexReport| r.row(attribute_id).map(|row| row.contribution.clone()).unwrap_or_else(Rational::zero);

    let base_difference = (&ra.total - row_contribution(&ra)) - (&rb.total - row_contribution(&rb));
    let slope = row_mean(&ra) - row_mean(&rb);

    let mut crossovers = Vec::new();
    if !slope.is_zero() {
        let g = -&base_difference / &slope;
        if &g >= lo && &g <= hi {
            let (before, after) = if slope.is_positive() {
                (&b.library.name, &a.library.name)
            } else {
                (&a.library.name, &b.library.name)
            };
            crossovers.push(CrossoverPoint {
                g_value: g,
                leader_before: before.clone(),
                leader_after: after.clone(),
            });
        }
    }
    Ok(SensitivityReport {
        library_a: a.library.name.clone(),
        library_b: b.library.name.clone(),
        attribute_id,
        lo: lo.clone(),
        hi: hi.clone(),
        base_difference,
        slope,
        crossovers,
        sum_constraint_relaxed: true,
    })
}
