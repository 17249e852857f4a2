//! Python bindings. Exact values cross the boundary as `fractions.Fraction`;
//! reports come back as plain dicts.

use std::collections::{BTreeMap, BTreeSet};

use libdex_core::exact::{fmt_exact, parse_rational, Rational};
use libdex_core::store::{self, ProfileStore};
use libdex_core::weighting::{self, EvidenceSource};
use libdex_core::{catalog, reference, scoring, AttributeId, Error, LibraryProfile, WeightVector};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

create_exception!(libdex, LibdexError, PyValueError, "Engine error; args are (code, message).");

fn err(e: Error) -> PyErr {
    LibdexError::new_err((e.code(), e.to_string()))
}

fn fraction<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((fmt_exact(value),))
}

/// Accepts int, float, str ("1/3", "0.25") or Fraction.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = value.str()?.to_string();
    parse_rational(&text).map_err(|e| err(Error::parse("number", e)))
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| err(Error::parse("result", e)))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn py_to_json(value: &Bound<'_, PyAny>) -> PyResult<String> {
    let py = value.py();
    py.import("json")?
        .call_method1("dumps", (value,))?
        .extract::<String>()
}

#[pyclass(name = "Catalog", module = "libdex", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCatalog {
    inner: catalog::Catalog,
}

#[pymethods]
impl PyCatalog {
    /// The built-in catalog.
    #[new]
    fn new() -> Self {
        PyCatalog {
            inner: catalog::builtin_catalog(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyCatalog {
            inner: catalog::Catalog::from_json(text).map_err(err)?,
        })
    }

    #[getter]
    fn version(&self) -> String {
        self.inner.version.clone()
    }

    fn attribute_ids(&self) -> Vec<u32> {
        self.inner.attribute_ids().into_iter().map(|a| a.0).collect()
    }

    fn criterion_ids(&self) -> Vec<String> {
        self.inner.criteria().map(|c| c.id.to_string()).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Catalog({:?}, {} attributes)", self.inner.version, self.inner.n())
    }
}

#[pyclass(name = "Profile", module = "libdex", skip_from_py_object)]
#[derive(Clone)]
struct PyProfile {
    inner: LibraryProfile,
}

#[pymethods]
impl PyProfile {
    #[new]
    #[pyo3(signature = (name, version = String::new()))]
    fn new(name: String, version: String) -> Self {
        let mut info = libdex_core::LibraryInfo::named(name);
        info.version = version;
        PyProfile {
            inner: LibraryProfile::new(info, catalog::builtin_catalog().version),
        }
    }

    /// Parses and validates a profile document.
    #[staticmethod]
    #[pyo3(signature = (text, catalog = None))]
    fn from_json(text: &str, catalog: Option<&PyCatalog>) -> PyResult<Self> {
        let c = catalog.map_or_else(catalog::builtin_catalog, |c| c.inner.clone());
        Ok(PyProfile {
            inner: store::load_profile(&c, text).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.library.name.clone()
    }

    #[getter]
    fn library_id(&self) -> String {
        self.inner.library_id()
    }

    /// Criterion id to rating.
    fn ratings<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for a in &self.inner.assessments {
            out.set_item(a.criterion.as_str(), fraction(py, a.rating.value())?)?;
        }
        Ok(out)
    }

    /// Adds or replaces one rating after checking it against the catalog.
    #[pyo3(signature = (criterion, rating, note = String::new()))]
    fn rate(&mut self, criterion: &str, rating: &Bound<'_, PyAny>, note: String) -> PyResult<()> {
        let c = catalog::builtin_catalog();
        let def = c
            .criterion(criterion)
            .ok_or_else(|| err(Error::UnknownCriterion(criterion.to_string())))?;
        let value = rational(rating)?;
        catalog::validate_rating(def, &value).map_err(err)?;
        let mut a = libdex_core::Assessment::new(criterion, catalog::Rating::new(value).map_err(err)?);
        a.note = note;
        self.inner.upsert(a);
        Ok(())
    }

    /// Warnings as `(criterion, message)` pairs; raises on invalid profiles.
    fn validate(&self) -> PyResult<Vec<(String, String)>> {
        let warnings = self.inner.validate(&catalog::builtin_catalog()).map_err(err)?;
        Ok(warnings.into_iter().map(|w| (w.criterion.to_string(), w.message)).collect())
    }

    fn to_json(&self) -> String {
        store::profile_to_json(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.assessments.len()
    }

    fn __eq__(&self, other: &PyProfile) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Profile({:?}, {} assessments)", self.inner.library.name, self.inner.assessments.len())
    }
}

#[pyclass(name = "Weights", module = "libdex", skip_from_py_object)]
#[derive(Clone)]
struct PyWeights {
    inner: WeightVector,
}

fn attribute_map(values: &Bound<'_, PyDict>) -> PyResult<BTreeMap<AttributeId, Rational>> {
    let c = catalog::builtin_catalog();
    let mut out = BTreeMap::new();
    for (k, v) in values.iter() {
        let id = c.resolve_attribute(&k.str()?.to_string()).map_err(err)?;
        out.insert(id, rational(&v)?);
    }
    Ok(out)
}

#[pymethods]
impl PyWeights {
    /// From `{attribute: weight}`; attributes are ids or names.
    #[new]
    fn new(values: &Bound<'_, PyDict>) -> PyResult<Self> {
        Ok(PyWeights {
            inner: WeightVector::new(attribute_map(values)?),
        })
    }

    /// Derived from the shipped evidence.
    #[staticmethod]
    fn reference() -> Self {
        PyWeights {
            inner: reference::reference_weights(),
        }
    }

    #[staticmethod]
    fn uniform() -> Self {
        PyWeights {
            inner: WeightVector::uniform(catalog::builtin_catalog().attribute_ids()),
        }
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for (k, v) in self.inner.iter() {
            out.set_item(k.0, fraction(py, v)?)?;
        }
        Ok(out)
    }

    fn sum<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.sum())
    }

    /// Raises unless the weights are non-negative and sum to n.
    fn validate(&self) -> PyResult<()> {
        scoring::check_weight_coverage(&catalog::builtin_catalog(), &self.inner).map_err(err)?;
        weighting::validate_weights(&self.inner, &weighting::default_tolerance()).map_err(err)
    }

    /// Sets `pins`, holds `hold` at current values, rescales the rest.
    #[pyo3(signature = (pins = None, hold = None))]
    fn rebalance(&self, pins: Option<&Bound<'_, PyDict>>, hold: Option<Vec<u32>>) -> PyResult<Self> {
        let pins = match pins {
            Some(p) => attribute_map(p)?,
            None => BTreeMap::new(),
        };
        let mut adjusted = self.inner.clone();
        for (id, v) in &pins {
            adjusted.set(*id, v.clone());
        }
        let mut held: BTreeSet<AttributeId> = pins.keys().copied().collect();
        held.extend(hold.unwrap_or_default().into_iter().map(AttributeId));
        Ok(PyWeights {
            inner: weighting::rebalance_weights(&adjusted, &held).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> = self.inner.iter().map(|(k, v)| format!("{k}: {}", fmt_exact(v))).collect();
        format!("Weights({{{}}})", parts.join(", "))
    }
}

fn weights_or_reference(weights: Option<&PyWeights>) -> WeightVector {
    weights.map_or_else(reference::reference_weights, |w| w.inner.clone())
}

/// Full index report as a dict.
#[pyfunction]
#[pyo3(signature = (profile, weights = None))]
fn compute_index<'py>(py: Python<'py>, profile: &PyProfile, weights: Option<&PyWeights>) -> PyResult<Bound<'py, PyAny>> {
    let c = catalog::builtin_catalog();
    let report = scoring::compute_index(&c, &profile.inner, &weights_or_reference(weights)).map_err(err)?;
    json_to_py(py, &report)
}

/// Exact index total.
#[pyfunction]
#[pyo3(signature = (profile, weights = None))]
fn index_total<'py>(py: Python<'py>, profile: &PyProfile, weights: Option<&PyWeights>) -> PyResult<Bound<'py, PyAny>> {
    let c = catalog::builtin_catalog();
    let report = scoring::compute_index(&c, &profile.inner, &weights_or_reference(weights)).map_err(err)?;
    fraction(py, &report.total)
}

/// Reports in ranking order.
#[pyfunction]
#[pyo3(signature = (profiles, weights = None))]
fn rank<'py>(py: Python<'py>, profiles: Vec<PyRef<'_, PyProfile>>, weights: Option<&PyWeights>) -> PyResult<Bound<'py, PyAny>> {
    let c = catalog::builtin_catalog();
    let ps: Vec<LibraryProfile> = profiles.iter().map(|p| p.inner.clone()).collect();
    let ranked = scoring::rank_libraries(&c, &ps, &weights_or_reference(weights)).map_err(err)?;
    json_to_py(py, &ranked)
}

#[pyfunction]
#[pyo3(signature = (a, b, attribute, lo = None, hi = None, weights = None))]
fn whatif<'py>(
    py: Python<'py>,
    a: &PyProfile,
    b: &PyProfile,
    attribute: &Bound<'_, PyAny>,
    lo: Option<&Bound<'_, PyAny>>,
    hi: Option<&Bound<'_, PyAny>>,
    weights: Option<&PyWeights>,
) -> PyResult<Bound<'py, PyAny>> {
    let c = catalog::builtin_catalog();
    let attr = c.resolve_attribute(&attribute.str()?.to_string()).map_err(err)?;
    let lo = lo.map(rational).transpose()?.unwrap_or_else(|| libdex_core::exact::int(0));
    let hi = hi.map(rational).transpose()?.unwrap_or_else(|| libdex_core::exact::int(3));
    let report =
        scoring::weight_sensitivity(&c, &a.inner, &b.inner, &weights_or_reference(weights), attr, &lo, &hi).map_err(err)?;
    json_to_py(py, &report)
}

/// Tied mean ranks of `{attribute: count}`.
#[pyfunction]
fn mean_ranks<'py>(py: Python<'py>, counts: BTreeMap<u32, u64>) -> PyResult<Bound<'py, PyDict>> {
    let counts = counts.into_iter().map(|(k, v)| (AttributeId(k), v)).collect();
    let ranks = weighting::mean_ranks(&counts).map_err(err)?;
    let out = PyDict::new(py);
    for (k, v) in ranks.iter() {
        out.set_item(k.0, fraction(py, v)?)?;
    }
    Ok(out)
}

/// Weights and derivation trace from evidence documents (dicts or JSON text).
#[pyfunction]
fn derive_weights<'py>(py: Python<'py>, evidence: &Bound<'py, PyList>) -> PyResult<Bound<'py, PyAny>> {
    let c = catalog::builtin_catalog();
    let mut ranked = Vec::new();
    for item in evidence.iter() {
        let text = match item.extract::<String>() {
            Ok(s) => s,
            Err(_) => py_to_json(&item)?,
        };
        let source: EvidenceSource = store::load_evidence(&c, &text).map_err(err)?;
        ranked.push(source.ranked().map_err(err)?);
    }
    let d = weighting::derive_reference_weights(&ranked).map_err(err)?;
    json_to_py(py, &d)
}

#[pyfunction]
fn rate_default_percentage<'py>(py: Python<'py>, fraction_met: &Bound<'_, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let r = catalog::rate_default_percentage(&rational(fraction_met)?).map_err(err)?;
    fraction(py, r.value())
}

#[pyfunction]
fn rate_grade<'py>(py: Python<'py>, grade: &str) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, catalog::rate_grade(grade).map_err(err)?.value())
}

/// `{criterion: rating}` for a static-analysis grade report.
#[pyfunction]
fn import_grade_report<'py>(py: Python<'py>, report: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let text = match report.extract::<String>() {
        Ok(s) => s,
        Err(_) => py_to_json(report)?,
    };
    let out = PyDict::new(py);
    for a in store::import_grade_report(&text, "", None).map_err(err)? {
        out.set_item(a.criterion.as_str(), fraction(py, a.rating.value())?)?;
    }
    Ok(out)
}

#[pyfunction]
fn bouncy_castle() -> PyResult<PyProfile> {
    Ok(PyProfile {
        inner: reference::bouncy_castle(&catalog::builtin_catalog()).map_err(err)?,
    })
}

#[pyfunction]
fn tink() -> PyResult<PyProfile> {
    Ok(PyProfile {
        inner: reference::tink(&catalog::builtin_catalog()).map_err(err)?,
    })
}

#[pyclass(name = "Store", module = "libdex")]
struct PyStore {
    inner: ProfileStore,
}

#[pymethods]
impl PyStore {
    #[new]
    fn new(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyStore {
            inner: ProfileStore::open(path).map_err(err)?,
        })
    }

    /// Stores a revision; returns the record as a dict.
    #[pyo3(signature = (profile, force = false))]
    fn save<'py>(&self, py: Python<'py>, profile: &PyProfile, force: bool) -> PyResult<Bound<'py, PyAny>> {
        let record = self
            .inner
            .save_profile(&catalog::builtin_catalog(), &profile.inner, force)
            .map_err(err)?;
        json_to_py(py, &record)
    }

    #[pyo3(signature = (library_id, revision = None))]
    fn get(&self, library_id: &str, revision: Option<u64>) -> PyResult<PyProfile> {
        let record = self.inner.get_profile(library_id, revision).map_err(err)?;
        Ok(PyProfile {
            inner: record.library_profile(),
        })
    }

    fn revisions(&self, library_id: &str) -> PyResult<Vec<u64>> {
        self.inner.revisions(library_id).map_err(err)
    }

    fn list<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.inner.list_profiles().map_err(err)?)
    }
}

#[pymodule]
fn libdex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LibdexError", m.py().get_type::<LibdexError>())?;
    m.add("ENGINE_VERSION", scoring::ENGINE_VERSION)?;
    m.add_class::<PyCatalog>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyWeights>()?;
    m.add_class::<PyStore>()?;
    m.add_function(wrap_pyfunction!(compute_index, m)?)?;
    m.add_function(wrap_pyfunction!(index_total, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(whatif, m)?)?;
    m.add_function(wrap_pyfunction!(mean_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(derive_weights, m)?)?;
    m.add_function(wrap_pyfunction!(rate_default_percentage, m)?)?;
    m.add_function(wrap_pyfunction!(rate_grade, m)?)?;
    m.add_function(wrap_pyfunction!(import_grade_report, m)?)?;
    m.add_function(wrap_pyfunction!(bouncy_castle, m)?)?;
    m.add_function(wrap_pyfunction!(tink, m)?)?;
    Ok(())
}
