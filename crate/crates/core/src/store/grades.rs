use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::catalog::rate_grade;
use crate::error::{Error, Result};
use crate::profile::Assessment;

/// Static-analysis grade report (`*.grades.json`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeReport {
    pub bugs: String,
    pub vulnerability: String,
    pub code_smell: String,
}

const KEYS: [(&str, &str); 3] = [("bugs", "7a"), ("vulnerability", "7b"), ("code_smell", "7c")];

/// Assessments for 7a/7b/7c from a grade report document.
pub fn import_grade_report(text: &str, assessor: &str, assessed_at: Option<DateTime<Utc>>) -> Result<Vec<Assessment>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse("grade report", e))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("grade report", "expected a JSON object"))?;
    KEYS.iter()
        .map(|(key, criterion)| {
            let grade = match obj.get(*key) {
                None | Some(serde_json::Value::Null) => return Err(Error::MissingKey(key)),
                Some(serde_json::Value::String(s)) => s.as_str(),
                Some(other) => return Err(Error::UnknownGrade(other.to_string())),
            };
            let mut a = Assessment::new(*criterion, rate_grade(grade)?);
            a.note = format!("{key} grade {}", grade.trim().to_ascii_uppercase());
            a.assessor = assessor.to_string();
            a.assessed_at = assessed_at;
            Ok(a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratings(text: &str) -> Vec<(String, i64)> {
        import_grade_report(text, "", None)
            .unwrap()
            .into_iter()
            .map(|a| (a.criterion.to_string(), a.rating.value().to_integer().try_into().unwrap()))
            .collect()
    }

    #[test]
    fn bouncy_castle_and_tink_grades() {
        assert_eq!(
            ratings(r#"{"bugs":"A","vulnerability":"E","code_smell":"E"}"#),
            [("7a".into(), 2), ("7b".into(), -2), ("7c".into(), -2)]
        );
        assert_eq!(
            ratings(r#"{"bugs":"B","vulnerability":"A","code_smell":"a"}"#),
            [("7a".into(), 1), ("7b".into(), 2), ("7c".into(), 2)]
        );
        assert!(ratings(r#"{"bugs":"C","vulnerability":"C","code_smell":"C"}"#)
            .iter()
            .all(|(_, v)| *v == 0));
    }

    #[test]
    fn missing_and_unknown() {
        let err = import_grade_report(r#"{"bugs":"A","vulnerability":"B"}"#, "", None).unwrap_err();
        assert_eq!(err.code(), "MISSING_KEY");
        assert!(err.to_string().contains("code_smell"));
        let err = import_grade_report(r#"{"bugs":"F","vulnerability":"B","code_smell":"C"}"#, "", None).unwrap_err();
        assert_eq!(err.code(), "UNKNOWN_GRADE");
    }
}
