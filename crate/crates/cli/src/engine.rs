//! Glue shared by the command line and the HTTP API, so both produce the same
//! numbers from the same inputs.

use std::collections::{BTreeMap, BTreeSet};

use libdex_core::exact::{parse_rational, Rational};
use libdex_core::reference::reference_weighting;
use libdex_core::scoring::ENGINE_VERSION;
use libdex_core::weighting::{default_tolerance, rebalance_weights, validate_weights};
use libdex_core::{AttributeId, Catalog, Error, Result, WeightVector};
use serde_json::{json, Value};

/// Wraps a payload with the engine and catalog versions.
pub fn envelope(catalog: &Catalog, data: Value) -> Value {
    json!({
        "engine_version": ENGINE_VERSION,
        "catalog_version": catalog.version,
        "data": data,
    })
}

pub fn error_body(err: &Error) -> Value {
    json!({
        "error": {
            "code": err.code(),
            "message": err.to_string(),
            "detail": err.detail(),
        }
    })
}

/// Parses `lo:hi`.
pub fn parse_range(text: &str) -> Result<(Rational, Rational)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidRange(format!("range {text:?} is not of the form lo:hi")))?;
    let parse = |s: &str| parse_rational(s.trim()).map_err(|e| Error::InvalidRange(format!("range bound {s:?}: {e}")));
    Ok((parse(lo)?, parse(hi)?))
}

/// Parses `attribute=value` where attribute is an id or a name.
pub fn parse_pin(catalog: &Catalog, text: &str) -> Result<(AttributeId, Rational)> {
    let (attr, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse {
            context: "pin".into(),
            message: format!("{text:?} is not of the form attribute=value"),
        })?;
    let value = parse_rational(value.trim()).map_err(|e| Error::parse("pin", e))?;
    Ok((catalog.resolve_attribute(attr)?, value))
}

/// Rebalances `weights` holding `pins` (set to their values) and `fixed`
/// (kept at their current values).
pub fn rebalance(
    catalog: &Catalog,
    weights: &WeightVector,
    pins: &BTreeMap<AttributeId, Rational>,
    fixed: &BTreeSet<AttributeId>,
) -> Result<WeightVector> {
    for id in pins.keys().chain(fixed) {
        weights
            .get(*id)
            .ok_or_else(|| Error::UnknownAttribute(id.to_string()))?;
        catalog
            .attribute(*id)
            .ok_or_else(|| Error::UnknownAttribute(id.to_string()))?;
    }
    let mut adjusted = weights.clone();
    for (id, value) in pins {
        adjusted.set(*id, value.clone());
    }
    let mut held: BTreeSet<AttributeId> = pins.keys().copied().collect();
    held.extend(fixed);
    let out = rebalance_weights(&adjusted, &held)?;
    validate_weights(&out, &default_tolerance())?;
    Ok(out)
}

/// Body of the reference-weights response.
pub fn reference_payload() -> Value {
    let r = reference_weighting();
    json!({
        "weights": r.derivation.weights,
        "expected": r.expected,
        "mismatches": r.mismatches,
        "trace": r.derivation.trace,
    })
}
