//! Python bindings for the key ordering library.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use keyorder::exec::{self, Property, SearchLimits};
use keyorder::keydep::{self, ExtractOptions, KeyClassDag};
use keyorder::oracle::{self, OracleConfig};
use keyorder::synth::{self, ChainSpec, LemmaOrdering};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed protocol model.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: keyorder::Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = keyorder::parse_model(text).map_err(value_error)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(value_error)?;
        Self::parse(&text)
    }

    /// One of `static`, `static_nomatch`, `dynamic`.
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        let inner = match name {
            "static" => keyorder::assets::ensemble_static(),
            "static_nomatch" => keyorder::assets::ensemble_static_nomatch(),
            "dynamic" => keyorder::assets::ensemble_dynamic(),
            _ => return Err(value_error(format!("no bundled model `{name}`"))),
        };
        Ok(PyModel { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn rules(&self) -> Vec<String> {
        self.inner.rules.iter().map(|r| r.name.clone()).collect()
    }

    #[getter]
    fn lemmas(&self) -> Vec<String> {
        self.inner.lemmas.iter().map(|l| l.name.clone()).collect()
    }

    fn serialize(&self) -> String {
        keyorder::serialize(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?}, {} rules)", self.inner.name, self.inner.rules.len())
    }
}

/// Reduced key class DAG.
#[pyclass(name = "KeyOrder", frozen)]
struct PyKeyOrder {
    dag: KeyClassDag,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pymethods]
impl PyKeyOrder {
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.dag.labels().to_vec()
    }

    /// Classes in priority order.
    #[getter]
    fn order(&self) -> Vec<String> {
        self.dag.linear_labels()
    }

    /// `(from, to, kinds)` with `from` depending on `to`.
    #[getter]
    fn edges(&self) -> Vec<(String, String, Vec<String>)> {
        self.dag
            .edges()
            .iter()
            .map(|e| {
                let kinds = e.kinds().iter().map(|k| k.to_string()).collect();
                (self.dag.label(e.from).to_string(), self.dag.label(e.to).to_string(), kinds)
            })
            .collect()
    }

    fn dependencies(&self, label: &str) -> PyResult<Vec<String>> {
        Ok(self.dag.dependencies(label).map_err(value_error)?.into_iter().collect())
    }

    fn longest_chain(&self) -> usize {
        self.dag.longest_chain()
    }

    fn to_dot(&self) -> String {
        self.dag.to_dot()
    }

    fn order_text(&self) -> String {
        self.dag.order_text()
    }

    fn __len__(&self) -> usize {
        self.dag.len()
    }
}

#[pyfunction]
#[pyo3(signature = (model, extended_authenticity = false))]
fn extract(model: &PyModel, extended_authenticity: bool) -> PyResult<PyKeyOrder> {
    let ex = keydep::extract(&model.inner, &ExtractOptions { extended_authenticity }).map_err(value_error)?;
    Ok(PyKeyOrder {
        dag: ex.dag,
        warnings: ex.warnings,
    })
}

#[pyfunction]
#[pyo3(signature = (depth, reuse = false, order = "dep"))]
fn generate_chain(depth: usize, reuse: bool, order: &str) -> PyResult<PyModel> {
    let ordering: LemmaOrdering = order.parse().map_err(value_error)?;
    let inner = synth::generate_chain_model(&ChainSpec { depth, reuse, ordering }).map_err(value_error)?;
    Ok(PyModel { inner })
}

/// Rank prover goal lines (`index: text`) for the given class ordering.
#[pyfunction]
#[pyo3(signature = (ordering, goals, ltk_labels = Vec::new()))]
fn rank_goals(ordering: Vec<String>, goals: Vec<String>, ltk_labels: Vec<String>) -> Vec<usize> {
    let cfg = OracleConfig::new(ordering, ltk_labels);
    let parsed: Vec<oracle::GoalLine> = goals.iter().filter_map(|g| oracle::parse_goal_line(g)).collect();
    oracle::rank_goals(&parsed, &cfg)
}

/// Replay a scenario script; returns the `step rule action` trace text.
#[pyfunction]
#[pyo3(signature = (model, script, json = false))]
fn run_scenario(model: &PyModel, script: &str, json: bool) -> PyResult<String> {
    let steps = exec::parse_script(script, &model.inner).map_err(value_error)?;
    let state = exec::run_scenario(&model.inner, &steps, None).map_err(value_error)?.state;
    Ok(if json {
        state.trace.to_json(&state.knowledge).to_string()
    } else {
        state.trace.to_text()
    })
}

/// Result of a bounded search for one property.
#[pyclass(name = "CheckResult", frozen, get_all)]
struct PyCheckResult {
    property: String,
    holds: bool,
    explored: usize,
    violations: Vec<String>,
    trace: Option<String>,
}

#[pymethods]
impl PyCheckResult {
    fn __repr__(&self) -> String {
        format!("CheckResult({:?}, holds={}, explored={})", self.property, self.holds, self.explored)
    }
}

#[pyfunction]
#[pyo3(signature = (model, properties, max_steps = 12, fresh = 6, depth = None, reveal = false))]
fn check(
    py: Python<'_>,
    model: &PyModel,
    properties: Vec<String>,
    max_steps: usize,
    fresh: usize,
    depth: Option<usize>,
    reveal: bool,
) -> PyResult<Vec<PyCheckResult>> {
    let props = properties
        .iter()
        .map(|p| p.parse::<Property>().map_err(value_error))
        .collect::<PyResult<Vec<_>>>()?;
    let limits = SearchLimits {
        max_steps,
        fresh,
        depth,
        reveal,
    };
    let m = &model.inner;
    let outcomes = py
        .detach(|| {
            let ex = keydep::extract(m, &ExtractOptions::default()).ok();
            exec::search_many(m, &props, &limits, ex.as_ref().map(|e| &e.dag))
        })
        .map_err(value_error)?;
    Ok(props
        .iter()
        .zip(outcomes)
        .map(|(p, o)| {
            let (violations, trace) = match &o.counterexample {
                Some((s, v)) => (v.iter().map(|x| x.to_string()).collect(), Some(s.trace.to_text())),
                None => (Vec::new(), None),
            };
            PyCheckResult {
                property: p.to_string(),
                holds: o.holds(),
                explored: o.explored,
                violations,
                trace,
            }
        })
        .collect())
}

#[pymodule]
fn keyorder_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyKeyOrder>()?;
    m.add_class::<PyCheckResult>()?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(generate_chain, m)?)?;
    m.add_function(wrap_pyfunction!(rank_goals, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
