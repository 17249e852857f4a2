//! Shipped fixtures: the reference evidence, the expected reference weights
//! and two assessed profiles.

use std::sync::OnceLock;

use crate::catalog::{builtin_catalog, AttributeId, Catalog};
use crate::error::{Error, Result};
use crate::profile::LibraryProfile;
use crate::store::{load_evidence, load_profile, load_weights};
use crate::weighting::{derive_reference_weights, Derivation, EvidenceSource, RankedSource, WeightVector};

pub const LITERATURE_JSON: &str = include_str!("../data/evidence/literature.json");
pub const INTERVIEWS_JSON: &str = include_str!("../data/evidence/interviews.json");
pub const QUESTIONNAIRE_JSON: &str = include_str!("../data/evidence/questionnaire.json");
pub const REFERENCE_WEIGHTS_JSON: &str = include_str!("../data/weights.reference.json");
pub const BOUNCY_CASTLE_JSON: &str = include_str!("../data/bouncy-castle.profile.json");
pub const TINK_JSON: &str = include_str!("../data/tink.profile.json");

/// Literature, interviews, questionnaire, in that order.
pub fn evidence_sources() -> Result<Vec<EvidenceSource>> {
    let catalog = builtin_catalog();
    [LITERATURE_JSON, INTERVIEWS_JSON, QUESTIONNAIRE_JSON]
        .iter()
        .map(|text| load_evidence(&catalog, text))
        .collect()
}

/// Expected reference vector as stored next to the evidence.
pub fn expected_reference_weights() -> Result<WeightVector> {
    Ok(load_weights(&builtin_catalog(), REFERENCE_WEIGHTS_JSON)?.weights)
}

/// Reference weighting derived from the shipped evidence, with the stored
/// vector it is checked against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceWeighting {
    pub derivation: Derivation,
    pub expected: WeightVector,
    /// Attributes whose derived weight differs from the stored one.
    pub mismatches: Vec<AttributeId>,
}

impl ReferenceWeighting {
    pub fn verify(&self) -> Result<()> {
        if self.mismatches.is_empty() {
            Ok(())
        } else {
            Err(Error::ReferenceMismatch(self.mismatches.clone()))
        }
    }
}

/// Computed once per process. Panics only if the embedded data is corrupt.
pub fn reference_weighting() -> &'static ReferenceWeighting {
    static CACHE: OnceLock<ReferenceWeighting> = OnceLock::new();
    CACHE.get_or_init(|| derive().expect("embedded reference evidence is valid"))
}

fn derive() -> Result<ReferenceWeighting> {
    let ranked = evidence_sources()?
        .iter()
        .map(EvidenceSource::ranked)
        .collect::<Result<Vec<RankedSource>>>()?;
    let derivation = derive_reference_weights(&ranked)?;
    let expected = expected_reference_weights()?;
    let mismatches = expected
        .attribute_ids()
        .union(&derivation.weights.attribute_ids())
        .filter(|id| expected.get(**id) != derivation.weights.get(**id))
        .copied()
        .collect();
    Ok(ReferenceWeighting {
        derivation,
        expected,
        mismatches,
    })
}

/// The derived vector; the stored one is only a check.
pub fn reference_weights() -> WeightVector {
    reference_weighting().derivation.weights.clone()
}

pub fn bouncy_castle(catalog: &Catalog) -> Result<LibraryProfile> {
    load_profile(catalog, BOUNCY_CASTLE_JSON)
}

pub fn tink(catalog: &Catalog) -> Result<LibraryProfile> {
    load_profile(catalog, TINK_JSON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    #[test]
    fn derived_weights_are_valid_and_checked() {
        let r = reference_weighting();
        assert_eq!(r.derivation.weights.sum(), int(15));
        assert_eq!(r.expected.sum(), int(15));
        // Verbatim questionnaire input puts Data Types level with Performance
        // Impact, which swaps the 0.5 and 0.75 bands of attributes 4 and 6.
        assert_eq!(r.mismatches, [AttributeId(4), AttributeId(6)]);
        assert_eq!(r.verify().unwrap_err().code(), "REFERENCE_MISMATCH");
        for id in r.expected.attribute_ids() {
            if !r.mismatches.contains(&id) {
                assert_eq!(r.expected.get(id), r.derivation.weights.get(id));
            }
        }
    }

    #[test]
    fn fixtures_load() {
        let c = builtin_catalog();
        assert_eq!(bouncy_castle(&c).unwrap().assessments.len(), 28);
        assert_eq!(tink(&c).unwrap().assessments.len(), 28);
    }

    #[test]
    fn interview_counts_agree_with_stated_ranks() {
        for source in evidence_sources().unwrap() {
            assert!(source.discrepancies().unwrap().is_empty(), "{}", source.label);
        }
    }
}
