//! Attribute weights derived from ranked evidence.
//!
//! Every source (mention counts, survey ballots, or ranks taken verbatim) is
//! normalized to a rank vector with the mean-rank method: items sharing a
//! value receive the arithmetic mean of the positions they occupy, and the
//! highest value gets rank `n`. The per-attribute average over all sources is
//! ranked again, and the resulting total rank is mapped to one of five weight
//! bands (1.5, 1.25, 1.0, 0.75, 0.5).

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::catalog::AttributeId;
use crate::error::{Error, Result};
use crate::exact::{self, int, ratio, Rational};

/// Weight assigned to each of the five bands, top band first.
pub const BAND_WEIGHTS: [(i64, i64); 5] = [(3, 2), (5, 4), (1, 1), (3, 4), (1, 2)];

/// Default tolerance for the weight-sum check, 1e-9.
pub fn default_tolerance() -> Rational {
    ratio(1, 1_000_000_000)
}

/// Per-attribute ranks; rank `n` is the most relevant attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RankMap", into = "RankMap")]
pub struct RankVector {
    ranks: BTreeMap<AttributeId, Rational>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RankMap(#[serde(with = "exact::map")] BTreeMap<AttributeId, Rational>);

impl TryFrom<RankMap> for RankVector {
    type Error = Error;

    fn try_from(value: RankMap) -> Result<Self> {
        RankVector::new(value.0)
    }
}

impl From<RankVector> for RankMap {
    fn from(value: RankVector) -> Self {
        RankMap(value.ranks)
    }
}

impl RankVector {
    /// Accepts any ranks within `[1, n]`. Vectors taken verbatim from a
    /// publication need not sum to `n(n+1)/2`; see [`RankVector::is_normalized`].
    pub fn new(ranks: BTreeMap<AttributeId, Rational>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::EmptyInput("rank vector"));
        }
        let n = ranks.len();
        if let Some(bad) = ranks.values().find(|r| **r < int(1) || **r > int(n as i64)) {
            return Err(Error::RankRange {
                rank: exact::fmt_exact(bad),
                n,
            });
        }
        Ok(RankVector { ranks })
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    pub fn get(&self, id: AttributeId) -> Option<&Rational> {
        self.ranks.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttributeId, &Rational)> {
        self.ranks.iter()
    }

    pub fn attribute_ids(&self) -> BTreeSet<AttributeId> {
        self.ranks.keys().copied().collect()
    }

    pub fn as_map(&self) -> &BTreeMap<AttributeId, Rational> {
        &self.ranks
    }

    pub fn rank_sum(&self) -> Rational {
        self.ranks.values().sum()
    }

    /// True when the ranks sum to `n(n+1)/2`, as every tied-rank vector does.
    pub fn is_normalized(&self) -> bool {
        let n = self.n() as i64;
        self.rank_sum() == ratio(n * (n + 1), 2)
    }
}

/// Mean-rank normalization of arbitrary ordered values; the smallest value
/// gets rank 1.
pub fn tied_ranks<K: Ord + Copy, V: Ord>(values: &BTreeMap<K, V>) -> BTreeMap<K, Rational> {
    let mut sorted: Vec<(&K, &V)> = values.iter().collect();
    sorted.sort_by(|a, b| a.1.cmp(b.1));
    let mut out = BTreeMap::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].1 == sorted[start].1 {
            end += 1;
        }
        // positions start+1 ..= end
        let mean = ratio((start + 1 + end) as i64, 2);
        for (k, _) in &sorted[start..end] {
            out.insert(**k, mean.clone());
        }
        start = end;
    }
    out
}

/// Ranks attributes by mention count; the most mentioned attribute gets rank `n`.
pub fn mean_ranks(counts: &BTreeMap<AttributeId, u64>) -> Result<RankVector> {
    if counts.is_empty() {
        return Err(Error::EmptyInput("mention counts"));
    }
    let ranks = RankVector::new(tied_ranks(counts))?;
    debug_assert!(ranks.is_normalized());
    Ok(ranks)
}

/// Positional ranks of a single survey ballot; `n` = most relevant.
pub type Ballot = BTreeMap<AttributeId, u32>;

/// Converts a most-relevant-first ordering into positional ranks.
pub fn ballot_from_ordering(most_relevant_first: &[AttributeId]) -> Ballot {
    let n = most_relevant_first.len() as u32;
    most_relevant_first
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, n - i as u32))
        .collect()
}

/// Mean positional rank per attribute over all ballots.
pub fn aggregate_ballots(ballots: &[Ballot]) -> Result<RankVector> {
    let first = ballots.first().ok_or(Error::EmptyInput("ballots"))?;
    let attributes: BTreeSet<AttributeId> = first.keys().copied().collect();
    let n = attributes.len();
    let expected: BTreeSet<u32> = (1..=n as u32).collect();
    let mut sums: BTreeMap<AttributeId, Rational> = attributes.iter().map(|id| (*id, Rational::zero())).collect();
    for (index, ballot) in ballots.iter().enumerate() {
        let keys: BTreeSet<AttributeId> = ballot.keys().copied().collect();
        if keys != attributes {
            let missing: Vec<_> = attributes.difference(&keys).collect();
            let extra: Vec<_> = keys.difference(&attributes).collect();
            return Err(Error::MalformedBallot {
                index,
                reason: format!("missing attributes {missing:?}, unexpected attributes {extra:?}"),
            });
        }
        let positions: BTreeSet<u32> = ballot.values().copied().collect();
        if positions != expected {
            return Err(Error::MalformedBallot {
                index,
                reason: format!("positions are not a permutation of 1..={n}"),
            });
        }
        for (id, pos) in ballot {
            *sums.get_mut(id).expect("same key set") += int(*pos as i64);
        }
    }
    let count = int(ballots.len() as i64);
    let ranks = RankVector::new(sums.into_iter().map(|(id, s)| (id, s / &count)).collect())?;
    assert!(ranks.is_normalized(), "mean of permutations must keep the rank sum");
    Ok(ranks)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvidencePayload {
    MentionCounts(BTreeMap<AttributeId, u64>),
    Ballots(Vec<Ballot>),
    Ranks(RankVector),
}

/// One evidence source feeding the reference weighting.
///
/// JSON form: `{"label", "kind": "counts"|"ballots"|"ranks", "data"}`, with
/// optional `stated_ranks` and `note`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EvidenceDocument", into = "EvidenceDocument")]
pub struct EvidenceSource {
    pub label: String,
    pub payload: EvidencePayload,
    /// Ranks as published next to the raw data, used to detect transcription
    /// inconsistencies.
    pub stated_ranks: Option<RankVector>,
    pub note: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum EvidenceKind {
    Counts,
    Ballots,
    Ranks,
}

#[derive(Serialize, Deserialize)]
struct EvidenceDocument {
    label: String,
    kind: EvidenceKind,
    data: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stated_ranks: Option<RankVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl TryFrom<EvidenceDocument> for EvidenceSource {
    type Error = serde_json::Error;

    fn try_from(doc: EvidenceDocument) -> std::result::Result<Self, serde_json::Error> {
        let payload = match doc.kind {
            EvidenceKind::Counts => EvidencePayload::MentionCounts(serde_json::from_value(doc.data)?),
            EvidenceKind::Ballots => EvidencePayload::Ballots(serde_json::from_value(doc.data)?),
            EvidenceKind::Ranks => EvidencePayload::Ranks(serde_json::from_value(doc.data)?),
        };
        Ok(EvidenceSource {
            label: doc.label,
            payload,
            stated_ranks: doc.stated_ranks,
            note: doc.note,
        })
    }
}

impl From<EvidenceSource> for EvidenceDocument {
    fn from(source: EvidenceSource) -> Self {
        let (kind, data) = match source.payload {
            EvidencePayload::MentionCounts(c) => (EvidenceKind::Counts, serde_json::to_value(c)),
            EvidencePayload::Ballots(b) => (EvidenceKind::Ballots, serde_json::to_value(b)),
            EvidencePayload::Ranks(r) => (EvidenceKind::Ranks, serde_json::to_value(r)),
        };
        EvidenceDocument {
            label: source.label,
            kind,
            data: data.expect("evidence payload serializes"),
            stated_ranks: source.stated_ranks,
            note: source.note,
        }
    }
}

/// Attribute whose computed rank differs from the published one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankDiscrepancy {
    pub attribute_id: AttributeId,
    #[serde(with = "exact")]
    pub computed: Rational,
    #[serde(with = "exact")]
    pub stated: Rational,
}

impl EvidenceSource {
    pub fn new(label: impl Into<String>, payload: EvidencePayload) -> Self {
        EvidenceSource {
            label: label.into(),
            payload,
            stated_ranks: None,
            note: None,
        }
    }

    pub fn attribute_ids(&self) -> BTreeSet<AttributeId> {
        match &self.payload {
            EvidencePayload::MentionCounts(c) => c.keys().copied().collect(),
            EvidencePayload::Ballots(b) => b.first().map(|b| b.keys().copied().collect()).unwrap_or_default(),
            EvidencePayload::Ranks(r) => r.attribute_ids(),
        }
    }

    pub fn ranks(&self) -> Result<RankVector> {
        match &self.payload {
            EvidencePayload::MentionCounts(c) => mean_ranks(c),
            EvidencePayload::Ballots(b) => aggregate_ballots(b),
            EvidencePayload::Ranks(r) => Ok(r.clone()),
        }
    }

    pub fn ranked(&self) -> Result<RankedSource> {
        Ok(RankedSource {
            label: self.label.clone(),
            ranks: self.ranks()?,
        })
    }

    /// Attributes whose computed rank contradicts `stated_ranks`.
    pub fn discrepancies(&self) -> Result<Vec<RankDiscrepancy>> {
        let Some(stated) = &self.stated_ranks else {
            return Ok(Vec::new());
        };
        let computed = self.ranks()?;
        Ok(computed
            .iter()
            .filter_map(|(id, r)| match stated.get(*id) {
                Some(s) if s != r => Some(RankDiscrepancy {
                    attribute_id: *id,
                    computed: r.clone(),
                    stated: s.clone(),
                }),
                _ => None,
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedSource {
    pub label: String,
    pub ranks: RankVector,
}

/// Per-attribute weights. Valid vectors sum to the attribute count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector {
    #[serde(with = "exact::map")]
    weights: BTreeMap<AttributeId, Rational>,
}

impl WeightVector {
    pub fn new(weights: BTreeMap<AttributeId, Rational>) -> Self {
        WeightVector { weights }
    }

    pub fn uniform(ids: impl IntoIterator<Item = AttributeId>) -> Self {
        WeightVector {
            weights: ids.into_iter().map(|id| (id, int(1))).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, id: AttributeId) -> Option<&Rational> {
        self.weights.get(&id)
    }

    pub fn set(&mut self, id: AttributeId, value: Rational) {
        self.weights.insert(id, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AttributeId, &Rational)> {
        self.weights.iter()
    }

    pub fn as_map(&self) -> &BTreeMap<AttributeId, Rational> {
        &self.weights
    }

    pub fn attribute_ids(&self) -> BTreeSet<AttributeId> {
        self.weights.keys().copied().collect()
    }

    pub fn sum(&self) -> Rational {
        self.weights.values().sum()
    }

    pub fn scaled(&self, factor: &Rational) -> WeightVector {
        WeightVector {
            weights: self.weights.iter().map(|(k, v)| (*k, v * factor)).collect(),
        }
    }
}

/// Band index (0 = top band) for a total rank.
///
/// Bands have width `n/5` counted down from `n`; each band is closed at its
/// upper end, so for `n = 15` rank 12 falls in the 1.25 band.
pub fn bucket_index(total_rank: &Rational, n: usize) -> Result<usize> {
    if n < 5 {
        return Err(Error::InvalidRange(format!("bucket mapping needs at least 5 attributes, got {n}")));
    }
    let n_r = int(n as i64);
    if *total_rank < int(1) || *total_rank > n_r {
        return Err(Error::RankRange {
            rank: exact::fmt_exact(total_rank),
            n,
        });
    }
    let depth = ((n_r.clone() - total_rank) * int(5) / n_r).floor();
    let band = depth.to_integer().try_into().unwrap_or(4usize);
    Ok(band.min(4))
}

pub fn bucket_weight(total_rank: &Rational, n: usize) -> Result<Rational> {
    let (num, den) = BAND_WEIGHTS[bucket_index(total_rank, n)?];
    Ok(ratio(num, den))
}

/// Full record of a reference-weight derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub per_source_ranks: Vec<RankedSource>,
    #[serde(with = "exact::map")]
    pub averages: BTreeMap<AttributeId, Rational>,
    pub total_ranks: RankVector,
    /// Band number per attribute, 1 = top band.
    pub buckets: BTreeMap<AttributeId, u8>,
}

impl DerivationTrace {
    /// Groups of tied total ranks whose occupied positions span more than
    /// one band. Only these can break the weight-sum invariant.
    pub fn straddling_ties(&self) -> Vec<Vec<AttributeId>> {
        let n = self.total_ranks.n();
        let mut groups: BTreeMap<Rational, Vec<AttributeId>> = BTreeMap::new();
        for (id, r) in self.total_ranks.iter() {
            groups.entry(r.clone()).or_default().push(*id);
        }
        groups
            .into_iter()
            .filter(|(rank, ids)| {
                if ids.len() < 2 {
                    return false;
                }
                let half = ratio(ids.len() as i64 - 1, 2);
                let lo = rank - &half;
                let hi = rank + &half;
                bucket_index(&lo, n).ok() != bucket_index(&hi, n).ok()
            })
            .map(|(_, ids)| ids)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub weights: WeightVector,
    pub trace: DerivationTrace,
}

/// Average the source ranks, re-rank the averages and map total ranks to
/// weight bands.
pub fn derive_reference_weights(sources: &[RankedSource]) -> Result<Derivation> {
    let first = sources.first().ok_or(Error::EmptyInput("evidence sources"))?;
    let attributes = first.ranks.attribute_ids();
    for s in &sources[1..] {
        if s.ranks.attribute_ids() != attributes {
            return Err(Error::MismatchedAttributes(format!(
                "{:?} and {:?} differ",
                first.label, s.label
            )));
        }
    }
    let count = int(sources.len() as i64);
    let averages: BTreeMap<AttributeId, Rational> = attributes
        .iter()
        .map(|id| {
            let total: Rational = sources.iter().map(|s| s.ranks.get(*id).expect("checked").clone()).sum();
            (*id, total / &count)
        })
        .collect();
    let total_ranks = RankVector::new(tied_ranks(&averages))?;
    let n = total_ranks.n();
    let mut weights = BTreeMap::new();
    let mut buckets = BTreeMap::new();
    for (id, rank) in total_ranks.iter() {
        let band = bucket_index(rank, n)?;
        let (num, den) = BAND_WEIGHTS[band];
        weights.insert(*id, ratio(num, den));
        buckets.insert(*id, band as u8 + 1);
    }
    Ok(Derivation {
        weights: WeightVector::new(weights),
        trace: DerivationTrace {
            per_source_ranks: sources.to_vec(),
            averages,
            total_ranks,
            buckets,
        },
    })
}

/// Checks non-negativity and `|sum - n| <= tolerance`.
pub fn validate_weights(weights: &WeightVector, tolerance: &Rational) -> Result<()> {
    let negatives: Vec<AttributeId> = weights.iter().filter(|(_, v)| v.is_negative()).map(|(k, _)| *k).collect();
    if !negatives.is_empty() {
        return Err(Error::NegativeWeight(negatives));
    }
    let n = weights.n();
    let difference = weights.sum() - int(n as i64);
    if difference.abs() > *tolerance {
        return Err(Error::WeightSum {
            sum: exact::fmt_exact(&weights.sum()),
            expected: n,
            difference: exact::fmt_exact(&difference),
        });
    }
    Ok(())
}

/// Scales the unpinned weights by a common factor so the vector sums to `n`.
/// If every unpinned weight is zero they are set to equal shares instead.
pub fn rebalance_weights(weights: &WeightVector, pinned: &BTreeSet<AttributeId>) -> Result<WeightVector> {
    if let Some(unknown) = pinned.iter().find(|id| weights.get(**id).is_none()) {
        return Err(Error::UnknownAttribute(unknown.to_string()));
    }
    let negatives: Vec<AttributeId> = weights.iter().filter(|(_, v)| v.is_negative()).map(|(k, _)| *k).collect();
    if !negatives.is_empty() {
        return Err(Error::NegativeWeight(negatives));
    }
    let n = int(weights.n() as i64);
    let pinned_sum: Rational = weights.iter().filter(|(k, _)| pinned.contains(k)).map(|(_, v)| v.clone()).sum();
    let unpinned: Vec<AttributeId> = weights.attribute_ids().difference(pinned).copied().collect();

    if unpinned.is_empty() {
        if (pinned_sum.clone() - &n).abs() > default_tolerance() {
            return Err(Error::InfeasiblePin(format!(
                "all attributes pinned but weights sum to {}",
                exact::fmt_exact(&pinned_sum)
            )));
        }
        return Ok(weights.clone());
    }
    if pinned_sum >= n {
        return Err(Error::InfeasiblePin(format!(
            "pinned weights sum to {} which leaves nothing for {} unpinned attributes",
            exact::fmt_exact(&pinned_sum),
            unpinned.len()
        )));
    }

    let remaining = n - pinned_sum;
    let unpinned_sum: Rational = unpinned.iter().map(|id| weights.get(*id).expect("present").clone()).sum();
    let mut out = weights.clone();
    if unpinned_sum.is_zero() {
        let share = remaining / int(unpinned.len() as i64);
        for id in unpinned {
            out.set(id, share.clone());
        }
    } else {
        let factor = remaining / unpinned_sum;
        for id in unpinned {
            let scaled = weights.get(id).expect("present") * &factor;
            out.set(id, scaled);
        }
    }
    Ok(out)
}

/// Sets the given weights, pins them and rebalances the rest.
pub fn rebalance_with_pins(
    weights: &WeightVector,
    pins: &BTreeMap<AttributeId, Rational>,
) -> Result<WeightVector> {
    let mut adjusted = weights.clone();
    for (id, value) in pins {
        if weights.get(*id).is_none() {
            return Err(Error::UnknownAttribute(id.to_string()));
        }
        adjusted.set(*id, value.clone());
    }
    rebalance_weights(&adjusted, &pins.keys().copied().collect())
}
