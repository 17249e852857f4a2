use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{AttributeId, Catalog, CriterionId, Rating, RatingWarning};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::profile::{Assessment, LibraryInfo, LibraryProfile};
use crate::weighting::{DerivationTrace, EvidenceSource, WeightVector};

pub const PROFILE_FORMAT_VERSION: u32 = 1;

/// Compact JSON with recursively sorted keys and a trailing LF.
pub fn canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("value serializes");
    let mut out = serde_json::to_vec(&sorted(value)).expect("value serializes");
    out.push(b'\n');
    out
}

/// Pretty JSON with sorted keys and a trailing LF, for files meant to be read.
pub fn pretty_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes");
    let mut out = serde_json::to_string_pretty(&sorted(value)).expect("value serializes");
    out.push('\n');
    out
}

fn sorted(value: serde_json::Value) -> serde_json::Value {
    match value {
        serde_json::Value::Object(map) => {
            let mut entries: Vec<_> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            serde_json::Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        serde_json::Value::Array(items) => serde_json::Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// On-disk profile format (`*.profile.json`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub format_version: u32,
    pub catalog_version: String,
    pub library: LibraryInfo,
    pub assessments: Vec<Assessment>,
}

impl From<&LibraryProfile> for ProfileDocument {
    fn from(p: &LibraryProfile) -> Self {
        ProfileDocument {
            format_version: PROFILE_FORMAT_VERSION,
            catalog_version: p.catalog_version.clone(),
            library: p.library.clone(),
            assessments: p.assessments.clone(),
        }
    }
}

impl From<ProfileDocument> for LibraryProfile {
    fn from(d: ProfileDocument) -> Self {
        LibraryProfile {
            library: d.library,
            catalog_version: d.catalog_version,
            assessments: d.assessments,
        }
    }
}

/// Canonical bytes of a profile; the basis of its content hash.
pub fn canonical_profile(profile: &LibraryProfile) -> Vec<u8> {
    canonical_json(&ProfileDocument::from(profile))
}

pub fn profile_hash(profile: &LibraryProfile) -> String {
    sha256_hex(&canonical_profile(profile))
}

/// Human-readable profile document.
pub fn profile_to_json(profile: &LibraryProfile) -> String {
    pretty_json(&ProfileDocument::from(profile))
}

#[derive(Deserialize)]
struct RawAssessment {
    criterion: String,
    #[serde(with = "exact")]
    rating: Rational,
    #[serde(default)]
    note: String,
    #[serde(default)]
    assessor: String,
    #[serde(default)]
    assessed_at: Option<DateTime<Utc>>,
}

#[derive(Deserialize)]
struct RawProfile {
    format_version: u32,
    catalog_version: String,
    library: LibraryInfo,
    #[serde(default)]
    assessments: Vec<RawAssessment>,
}

/// Parses and validates a profile document against `catalog`.
pub fn load_profile(catalog: &Catalog, text: &str) -> Result<LibraryProfile> {
    load_profile_with_warnings(catalog, text).map(|(p, _)| p)
}

pub fn load_profile_with_warnings(catalog: &Catalog, text: &str) -> Result<(LibraryProfile, Vec<RatingWarning>)> {
    let raw: RawProfile = serde_json::from_str(text).map_err(|e| Error::parse("profile", e))?;
    profile_from_raw(catalog, raw)
}

/// Same as [`load_profile`] for an already parsed JSON value.
pub fn profile_from_value(catalog: &Catalog, value: serde_json::Value) -> Result<LibraryProfile> {
    let raw: RawProfile = serde_json::from_value(value).map_err(|e| Error::parse("profile", e))?;
    profile_from_raw(catalog, raw).map(|(p, _)| p)
}

fn profile_from_raw(catalog: &Catalog, raw: RawProfile) -> Result<(LibraryProfile, Vec<RatingWarning>)> {
    if raw.format_version != PROFILE_FORMAT_VERSION {
        return Err(Error::parse(
            "profile",
            format!("unsupported format_version {}", raw.format_version),
        ));
    }
    let assessments = raw
        .assessments
        .into_iter()
        .map(|a| {
            let rating = Rating::new(a.rating).map_err(|e| match e {
                Error::RatingRange { value, .. } => Error::RatingRange {
                    criterion: a.criterion.clone(),
                    value,
                },
                other => other,
            })?;
            Ok(Assessment {
                criterion: CriterionId(a.criterion),
                rating,
                note: a.note,
                assessor: a.assessor,
                assessed_at: a.assessed_at,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let profile = LibraryProfile {
        library: raw.library,
        catalog_version: raw.catalog_version,
        assessments,
    };
    let warnings = profile.validate(catalog)?;
    Ok((profile, warnings))
}

/// Weight file (`weights.json`). A bare `{attr: weight}` map is accepted too.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_version: Option<String>,
    pub weights: WeightVector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<DerivationTrace>,
}

pub fn load_weights(catalog: &Catalog, text: &str) -> Result<WeightsDocument> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse("weights", e))?;
    weights_from_value(catalog, value)
}

pub fn weights_from_value(catalog: &Catalog, value: serde_json::Value) -> Result<WeightsDocument> {
    let doc: WeightsDocument = if value.get("weights").is_some() {
        serde_json::from_value(value).map_err(|e| Error::parse("weights", e))?
    } else {
        WeightsDocument {
            catalog_version: None,
            weights: serde_json::from_value(value).map_err(|e| Error::parse("weights", e))?,
            trace: None,
        }
    };
    if let Some(v) = &doc.catalog_version {
        if *v != catalog.version {
            return Err(Error::CatalogVersion {
                expected: catalog.version.clone(),
                found: v.clone(),
            });
        }
    }
    Ok(doc)
}

/// Parses an evidence file and checks it covers exactly the catalog's attributes.
pub fn load_evidence(catalog: &Catalog, text: &str) -> Result<EvidenceSource> {
    let source: EvidenceSource = serde_json::from_str(text).map_err(|e| Error::parse("evidence", e))?;
    let expected: std::collections::BTreeSet<AttributeId> = catalog.attribute_ids().into_iter().collect();
    let actual = source.attribute_ids();
    if actual != expected {
        let missing: Vec<_> = expected.difference(&actual).collect();
        let extra: Vec<_> = actual.difference(&expected).collect();
        return Err(Error::MismatchedAttributes(format!(
            "evidence {:?}: missing {missing:?}, unexpected {extra:?}",
            source.label
        )));
    }
    Ok(source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_catalog;

    fn doc(rating: &str) -> String {
        format!(
            r#"{{"format_version":1,"catalog_version":"{}","library":{{"name":"X"}},
                "assessments":[{{"criterion":"2a","rating":{rating},"note":"n"}}]}}"#,
            builtin_catalog().version
        )
    }

    #[test]
    fn out_of_range_names_criterion() {
        match load_profile(&builtin_catalog(), &doc("7")) {
            Err(Error::RatingRange { criterion, value }) => {
                assert_eq!(criterion, "2a");
                assert_eq!(value, "7");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fraction_ratings_accepted() {
        let p = load_profile(&builtin_catalog(), &doc("\"1/3\"")).unwrap();
        assert_eq!(p.rating("2a").unwrap().value(), &exact::ratio(1, 3));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_profile(&builtin_catalog(), "{\n  \"format_version\": 1,\n  oops").unwrap_err();
        assert_eq!(err.code(), "PARSE");
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn empty_assessments_are_valid() {
        let text = format!(
            r#"{{"format_version":1,"catalog_version":"{}","library":{{"name":"Empty"}},"assessments":[]}}"#,
            builtin_catalog().version
        );
        let p = load_profile(&builtin_catalog(), &text).unwrap();
        assert!(p.assessments.is_empty());
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let v = serde_json::json!({"b": 1, "a": {"d": 2, "c": [ {"z": 1, "y": 2} ]}});
        assert_eq!(
            String::from_utf8(canonical_json(&v)).unwrap(),
            "{\"a\":{\"c\":[{\"y\":2,\"z\":1}],\"d\":2},\"b\":1}\n"
        );
    }

    #[test]
    fn weights_accept_bare_maps_and_documents() {
        let c = builtin_catalog();
        let bare = load_weights(&c, r#"{"1": 1.5, "2": "27/28"}"#).unwrap();
        assert_eq!(bare.weights.get(AttributeId(2)), Some(&exact::ratio(27, 28)));
        let wrapped = load_weights(&c, r#"{"weights": {"1": 1}}"#).unwrap();
        assert_eq!(wrapped.weights.n(), 1);
        let wrong = load_weights(&c, r#"{"catalog_version": "nope", "weights": {"1": 1}}"#);
        assert_eq!(wrong.unwrap_err().code(), "CATALOG_VERSION");
    }
}
