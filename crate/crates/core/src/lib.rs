//! Weighted comparison index for software libraries.
//!
//! A [`Catalog`] of attributes and rated criteria, evidence-based reference
//! weights, exact scoring of [`LibraryProfile`]s, ranking, weight sensitivity
//! and a small revisioned profile store. All arithmetic is exact; rounding
//! happens only when rendering.

pub mod catalog;
pub mod error;
pub mod exact;
pub mod profile;
pub mod reference;
pub mod report;
pub mod scoring;
pub mod store;
pub mod weighting;

pub use catalog::{builtin_catalog, AttributeId, Catalog, CriterionId, Rating};
pub use error::{Error, Result};
pub use exact::Rational;
pub use profile::{Assessment, LibraryInfo, LibraryProfile};
pub use scoring::{compute_index, rank_libraries, weight_sensitivity, IndexReport, SensitivityReport};
pub use store::{ProfileRecord, ProfileStore};
pub use weighting::{RankVector, WeightVector};
