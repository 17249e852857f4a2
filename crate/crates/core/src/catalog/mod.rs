//! Attribute and criterion rubric, rating scales and rating normalization.

mod builtin;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{self, int, ratio, Rational};

pub use builtin::BUILTIN_CATALOG_VERSION;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeId(pub u32);

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Criterion identifier such as `"1a"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CriterionId(pub String);

impl CriterionId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CriterionId {
    fn from(value: &str) -> Self {
        CriterionId(value.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RubricKind {
    /// Percentage of the condition met, mapped through fixed thresholds.
    DefaultPercentage,
    EnumeratedAnchors,
    /// Letter grades A..E mapped to +2..-2.
    GradeScale,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub label: String,
    pub value: i8,
}

impl Anchor {
    pub fn new(label: impl Into<String>, value: i8) -> Self {
        Anchor {
            label: label.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricSpec {
    pub kind: RubricKind,
    #[serde(serialize_with = "serialize_anchors", deserialize_with = "deserialize_anchors")]
    pub anchors: Vec<Anchor>,
    pub interpolation_allowed: bool,
}

impl RubricSpec {
    pub fn default_percentage() -> Self {
        RubricSpec {
            kind: RubricKind::DefaultPercentage,
            anchors: Vec::new(),
            interpolation_allowed: true,
        }
    }

    pub fn grade_scale() -> Self {
        RubricSpec {
            kind: RubricKind::GradeScale,
            anchors: GRADES
                .iter()
                .zip([2, 1, 0, -1, -2])
                .map(|(g, v)| Anchor::new(g.to_string(), v))
                .collect(),
            interpolation_allowed: true,
        }
    }

    pub fn enumerated(anchors: Vec<Anchor>, interpolation_allowed: bool) -> Self {
        RubricSpec {
            kind: RubricKind::EnumeratedAnchors,
            anchors,
            interpolation_allowed,
        }
    }

    fn anchor_values(&self) -> BTreeSet<i8> {
        self.anchors.iter().map(|a| a.value).collect()
    }

    fn check(&self, owner: &str) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCatalog(format!("criterion {owner}: {msg}")));
        if let Some(a) = self.anchors.iter().find(|a| !(-2..=2).contains(&a.value)) {
            return bad(format!("anchor {:?} has value {} outside [-2, +2]", a.label, a.value));
        }
        match self.kind {
            RubricKind::DefaultPercentage if !self.anchors.is_empty() => {
                bad("default percentage rubric must not define anchors".into())
            }
            RubricKind::GradeScale if self.anchors != RubricSpec::grade_scale().anchors => {
                bad("grade scale must map A..E to +2..-2".into())
            }
            RubricKind::EnumeratedAnchors if self.anchors.is_empty() => bad("enumerated rubric without anchors".into()),
            _ => Ok(()),
        }
    }
}

fn serialize_anchors<S: Serializer>(anchors: &[Anchor], serializer: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = serializer.serialize_map(Some(anchors.len()))?;
    for a in anchors {
        map.serialize_entry(&a.label, &a.value)?;
    }
    map.end()
}

fn deserialize_anchors<'de, D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Vec<Anchor>, D::Error> {
    struct AnchorVisitor;

    impl<'de> Visitor<'de> for AnchorVisitor {
        type Value = Vec<Anchor>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map from anchor label to integer rating")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Vec<Anchor>, A::Error> {
            let mut out = Vec::new();
            while let Some((label, value)) = access.next_entry::<String, i8>()? {
                out.push(Anchor { label, value });
            }
            Ok(out)
        }
    }

    deserializer.deserialize_map(AnchorVisitor)
}

/// Externally maintained reference value a criterion is rated against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub description: String,
    pub value: u64,
    pub as_of: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionDef {
    pub id: CriterionId,
    pub name: String,
    /// Filled in from the owning attribute when a catalog is built or loaded.
    #[serde(skip)]
    pub attribute_id: AttributeId,
    pub rubric: RubricSpec,
    pub guidance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub id: AttributeId,
    pub name: String,
    pub description: String,
    pub criteria: Vec<CriterionDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: String,
    pub attributes: Vec<AttributeDef>,
}

impl Catalog {
    /// Builds a catalog, linking criteria to their attributes and checking
    /// every structural invariant.
    pub fn new(version: impl Into<String>, mut attributes: Vec<AttributeDef>) -> Result<Self> {
        for attr in &mut attributes {
            for c in &mut attr.criteria {
                c.attribute_id = attr.id;
            }
        }
        let catalog = Catalog {
            version: version.into(),
            attributes,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Catalog = serde_json::from_str(text).map_err(|e| Error::parse("catalog", e))?;
        Catalog::new(raw.version, raw.attributes)
    }

    /// Pretty JSON with a trailing newline; stable across runs.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("catalog serializes");
        out.push('\n');
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::InvalidCatalog("no attributes".into()));
        }
        let mut attr_ids = BTreeSet::new();
        let mut crit_ids = BTreeSet::new();
        for attr in &self.attributes {
            if !attr_ids.insert(attr.id) {
                return Err(Error::InvalidCatalog(format!("duplicate attribute id {}", attr.id)));
            }
            for c in &attr.criteria {
                if !crit_ids.insert(c.id.clone()) {
                    return Err(Error::InvalidCatalog(format!("duplicate criterion id {}", c.id)));
                }
                if c.attribute_id != attr.id {
                    return Err(Error::InvalidCatalog(format!(
                        "criterion {} points at attribute {} but is listed under {}",
                        c.id, c.attribute_id, attr.id
                    )));
                }
                c.rubric.check(c.id.as_str())?;
            }
        }
        Ok(())
    }

    /// Number of attributes.
    pub fn n(&self) -> usize {
        self.attributes.len()
    }

    pub fn attribute_ids(&self) -> Vec<AttributeId> {
        self.attributes.iter().map(|a| a.id).collect()
    }

    pub fn attribute(&self, id: AttributeId) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.id == id)
    }

    pub fn criterion(&self, id: &str) -> Option<&CriterionDef> {
        self.criteria().find(|c| c.id.as_str() == id)
    }

    pub fn criteria(&self) -> impl Iterator<Item = &CriterionDef> {
        self.attributes.iter().flat_map(|a| a.criteria.iter())
    }

    /// Resolves an attribute from its numeric id or its (case-insensitive) name.
    pub fn resolve_attribute(&self, token: &str) -> Result<AttributeId> {
        let token = token.trim();
        if let Ok(n) = token.parse::<u32>() {
            if self.attribute(AttributeId(n)).is_some() {
                return Ok(AttributeId(n));
            }
        }
        self.attributes
            .iter()
            .find(|a| a.name.eq_ignore_ascii_case(token))
            .map(|a| a.id)
            .ok_or_else(|| Error::UnknownAttribute(token.to_string()))
    }
}

/// The built-in 15-attribute catalog.
pub fn builtin_catalog() -> Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG
        .get_or_init(|| builtin::build().expect("built-in catalog is valid"))
        .clone()
}

/// A criterion rating on the closed scale [-2, +2].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rating(Rational);

impl Rating {
    pub fn new(value: Rational) -> Result<Self> {
        if value < int(-2) || value > int(2) {
            return Err(Error::RatingRange {
                criterion: "-".into(),
                value: exact::fmt_exact(&value),
            });
        }
        Ok(Rating(value))
    }

    pub fn from_int(value: i64) -> Result<Self> {
        Rating::new(int(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }
}

impl Serialize for Rating {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        exact::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for Rating {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = exact::deserialize(deserializer)?;
        Rating::new(value).map_err(serde::de::Error::custom)
    }
}

/// Default rating: >=90% -> +2, >=75% -> +1, >=50% -> 0, >=25% -> -1, else -2.
pub fn rate_default_percentage(fraction_met: &Rational) -> Result<Rating> {
    if *fraction_met < int(0) || *fraction_met > int(1) {
        return Err(Error::FractionRange(exact::fmt_exact(fraction_met)));
    }
    let thresholds = [(ratio(9, 10), 2), (ratio(3, 4), 1), (ratio(1, 2), 0), (ratio(1, 4), -1)];
    let value = thresholds
        .iter()
        .find(|(t, _)| fraction_met >= t)
        .map_or(-2, |&(_, v)| v);
    Rating::from_int(value)
}

const GRADES: [char; 5] = ['A', 'B', 'C', 'D', 'E'];

/// Letter grade A..E mapped to +2..-2.
pub fn rate_grade(grade: &str) -> Result<Rating> {
    let token = grade.trim();
    let mut chars = token.chars();
    let letter = match (chars.next(), chars.next()) {
        (Some(c), None) => c.to_ascii_uppercase(),
        _ => return Err(Error::UnknownGrade(grade.to_string())),
    };
    let pos = GRADES
        .iter()
        .position(|&g| g == letter)
        .ok_or_else(|| Error::UnknownGrade(grade.to_string()))?;
    Rating::from_int(2 - pos as i64)
}

/// Non-fatal finding attached to an accepted rating.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatingWarning {
    pub criterion: CriterionId,
    pub message: String,
}

/// Checks a rating against a criterion's rubric.
///
/// Returns a warning for in-range values that sit between the letters of a
/// grade scale.
pub fn validate_rating(criterion: &CriterionDef, rating: &Rational) -> Result<Option<RatingWarning>> {
    if *rating < int(-2) || *rating > int(2) {
        return Err(Error::RatingRange {
            criterion: criterion.id.to_string(),
            value: exact::fmt_exact(rating),
        });
    }
    let rubric = &criterion.rubric;
    let is_anchor = || rubric.anchor_values().iter().any(|&v| int(v as i64) == *rating);
    match rubric.kind {
        RubricKind::DefaultPercentage => Ok(None),
        RubricKind::GradeScale => Ok((!rating.is_integer()).then(|| RatingWarning {
            criterion: criterion.id.clone(),
            message: format!(
                "rating {} lies between grade letters",
                exact::fmt_exact(rating)
            ),
        })),
        RubricKind::EnumeratedAnchors => {
            let values = rubric.anchor_values();
            let lo = int(*values.first().expect("validated non-empty") as i64);
            let hi = int(*values.last().expect("validated non-empty") as i64);
            let ok = if rubric.interpolation_allowed {
                *rating >= lo && *rating <= hi
            } else {
                is_anchor()
            };
            if ok {
                Ok(None)
            } else {
                Err(Error::OffAnchor {
                    criterion: criterion.id.clone(),
                    value: exact::fmt_exact(rating),
                    nearest: nearest_anchors(&values, rating),
                })
            }
        }
    }
}

fn nearest_anchors(values: &BTreeSet<i8>, rating: &Rational) -> String {
    let below = values.iter().rev().find(|&&v| int(v as i64) <= *rating);
    let above = values.iter().find(|&&v| int(v as i64) >= *rating);
    match (below, above) {
        (Some(b), Some(a)) if a == b => format!("{b:+}"),
        (Some(b), Some(a)) => format!("{b:+} and {a:+}"),
        (Some(v), None) | (None, Some(v)) => format!("{v:+}"),
        (None, None) => "none".into(),
    }
}
