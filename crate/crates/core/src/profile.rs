//! Assessed library profiles.

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::catalog::{validate_rating, Catalog, CriterionId, Rating, RatingWarning};
use crate::error::{Error, Result};
use crate::exact::int;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryInfo {
    pub name: String,
    #[serde(default)]
    pub version: String,
    #[serde(default)]
    pub language: String,
    #[serde(default)]
    pub source_url: String,
}

impl LibraryInfo {
    pub fn named(name: impl Into<String>) -> Self {
        LibraryInfo {
            name: name.into(),
            version: String::new(),
            language: String::new(),
            source_url: String::new(),
        }
    }
}

/// One rated criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub criterion: CriterionId,
    pub rating: Rating,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub assessor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assessed_at: Option<DateTime<Utc>>,
}

impl Assessment {
    pub fn new(criterion: impl Into<CriterionId>, rating: Rating) -> Self {
        Assessment {
            criterion: criterion.into(),
            rating,
            note: String::new(),
            assessor: String::new(),
            assessed_at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryProfile {
    pub library: LibraryInfo,
    pub catalog_version: String,
    pub assessments: Vec<Assessment>,
}

impl LibraryProfile {
    pub fn new(library: LibraryInfo, catalog_version: impl Into<String>) -> Self {
        LibraryProfile {
            library,
            catalog_version: catalog_version.into(),
            assessments: Vec::new(),
        }
    }

    /// Store key derived from the library name, e.g. `bouncy-castle`.
    pub fn library_id(&self) -> String {
        slug(&self.library.name)
    }

    pub fn rating(&self, criterion: &str) -> Option<&Rating> {
        self.assessments
            .iter()
            .find(|a| a.criterion.as_str() == criterion)
            .map(|a| &a.rating)
    }

    /// Adds or replaces the assessment for its criterion (last write wins).
    pub fn upsert(&mut self, assessment: Assessment) {
        match self.assessments.iter_mut().find(|a| a.criterion == assessment.criterion) {
            Some(slot) => *slot = assessment,
            None => self.assessments.push(assessment),
        }
    }

    /// Checks the profile against `catalog` and returns non-fatal warnings.
    pub fn validate(&self, catalog: &Catalog) -> Result<Vec<RatingWarning>> {
        if self.catalog_version != catalog.version {
            return Err(Error::CatalogVersion {
                expected: catalog.version.clone(),
                found: self.catalog_version.clone(),
            });
        }
        let mut seen = BTreeSet::new();
        let mut warnings = Vec::new();
        for a in &self.assessments {
            let criterion = catalog
                .criterion(a.criterion.as_str())
                .ok_or_else(|| Error::UnknownCriterion(a.criterion.to_string()))?;
            if !seen.insert(&a.criterion) {
                return Err(Error::DuplicateCriterion(a.criterion.clone()));
            }
            warnings.extend(validate_rating(criterion, a.rating.value())?);
            if a.rating.value().abs() == int(2) && a.note.trim().is_empty() {
                warnings.push(RatingWarning {
                    criterion: a.criterion.clone(),
                    message: "extreme rating without an evidence note".into(),
                });
            }
        }
        Ok(warnings)
    }
}

pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        "library".into()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_catalog;

    fn profile() -> LibraryProfile {
        let c = builtin_catalog();
        LibraryProfile::new(LibraryInfo::named("Bouncy Castle"), c.version)
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Bouncy Castle"), "bouncy-castle");
        assert_eq!(slug("  Tink "), "tink");
        assert_eq!(slug("libsodium (C)"), "libsodium-c");
        assert_eq!(slug("???"), "library");
    }

    #[test]
    fn validation_errors() {
        let c = builtin_catalog();
        let mut p = profile();
        p.assessments.push(Assessment::new("99z", Rating::from_int(1).unwrap()));
        assert_eq!(p.validate(&c).unwrap_err().code(), "UNKNOWN_CRITERION");

        let mut p = profile();
        p.assessments.push(Assessment::new("1a", Rating::from_int(1).unwrap()));
        p.assessments.push(Assessment::new("1a", Rating::from_int(0).unwrap()));
        assert_eq!(p.validate(&c).unwrap_err().code(), "DUPLICATE_CRITERION");

        let mut p = profile();
        p.catalog_version = "other".into();
        assert_eq!(p.validate(&c).unwrap_err().code(), "CATALOG_VERSION");

        let mut p = profile();
        p.assessments.push(Assessment::new("1b", Rating::from_int(-2).unwrap()));
        assert_eq!(p.validate(&c).unwrap_err().code(), "OFF_ANCHOR");
    }

    #[test]
    fn extreme_rating_without_note_warns() {
        let c = builtin_catalog();
        let mut p = profile();
        p.assessments.push(Assessment::new("8a", Rating::from_int(2).unwrap()));
        let mut noted = Assessment::new("8b", Rating::from_int(2).unwrap());
        noted.note = "Apache-2.0".into();
        p.assessments.push(noted);
        let w = p.validate(&c).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].criterion.as_str(), "8a");
    }

    #[test]
    fn upsert_is_last_write_wins() {
        let mut p = profile();
        p.upsert(Assessment::new("1a", Rating::from_int(1).unwrap()));
        p.upsert(Assessment::new("1a", Rating::from_int(-1).unwrap()));
        assert_eq!(p.assessments.len(), 1);
        assert_eq!(p.rating("1a").unwrap().value(), &int(-1));
    }
}
