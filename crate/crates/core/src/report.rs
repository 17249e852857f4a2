//! Report rendering: JSON, CSV and a markdown comparison table.
//!
//! Values are rounded to two decimals here and nowhere else.

use std::fmt::Write as _;

use crate::catalog::Catalog;
use crate::exact::{fmt_fixed, fmt_signed};
use crate::scoring::IndexReport;

pub fn to_json(report: &IndexReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

/// One row per attribute plus a `total` footer carrying the bounds.
pub fn to_csv(report: &IndexReport) -> String {
    let mut out = String::from("attribute_id,m_i,mean,weight,contribution,achievable_min,achievable_max\n");
    for row in &report.rows {
        let mean = row.mean.as_ref().map_or_else(|| "-".to_string(), |m| fmt_fixed(m, 2));
        let _ = writeln!(
            out,
            "{},{},{},{},{},,",
            row.attribute_id,
            row.assessed_count,
            mean,
            fmt_fixed(&row.weight, 2),
            fmt_fixed(&row.contribution, 2)
        );
    }
    let _ = writeln!(
        out,
        "total,,,,{},{},{}",
        fmt_fixed(&report.total, 2),
        fmt_fixed(&report.achievable_min, 2),
        fmt_fixed(&report.achievable_max, 2)
    );
    out
}

/// Side-by-side comparison: attribute rows with their mean, criterion rows
/// with the individual ratings, and the index at the bottom. Unassessed
/// attributes show `-`.
pub fn to_markdown(catalog: &Catalog, reports: &[IndexReport]) -> String {
    let mut out = String::from("| Nr | Attribute |");
    for r in reports {
        let _ = write!(out, " {} |", r.library.name);
    }
    out.push_str("\n|---|---|");
    for _ in reports {
        out.push_str("---|");
    }
    out.push('\n');

    for attr in &catalog.attributes {
        let _ = write!(out, "| {} | **{}** |", attr.id, attr.name);
        for r in reports {
            let cell = r
                .row(attr.id)
                .and_then(|row| row.mean.as_ref())
                .map_or_else(|| "-".to_string(), |m| fmt_signed(m, 2));
            let _ = write!(out, " **{cell}** |");
        }
        out.push('\n');
        for criterion in &attr.criteria {
            let ratings: Vec<Option<String>> = reports
                .iter()
                .map(|r| {
                    r.row(attr.id).and_then(|row| {
                        row.ratings
                            .iter()
                            .find(|cr| cr.criterion == criterion.id)
                            .map(|cr| fmt_signed(cr.rating.value(), 2))
                    })
                })
                .collect();
            if ratings.iter().all(Option::is_none) {
                continue;
            }
            let _ = write!(out, "| {} | {} |", criterion.id, criterion.name);
            for cell in ratings {
                let _ = write!(out, " {} |", cell.as_deref().unwrap_or("-"));
            }
            out.push('\n');
        }
    }

    out.push_str("| | **Index** |");
    for r in reports {
        let _ = write!(out, " **{}** |", fmt_fixed(&r.total, 2));
    }
    out.push_str("\n| | Achievable range |");
    for r in reports {
        let _ = write!(
            out,
            " {} .. {} |",
            fmt_fixed(&r.achievable_min, 2),
            fmt_fixed(&r.achievable_max, 2)
        );
    }
    out.push('\n');
    out
}
