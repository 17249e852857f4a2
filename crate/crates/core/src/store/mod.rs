//! Profile, weight and evidence documents plus the revisioned profile store.

mod documents;
mod grades;
mod repository;

pub use documents::*;
pub use grades::{import_grade_report, GradeReport};
pub use repository::{ProfileRecord, ProfileStore, ProfileSummary};
