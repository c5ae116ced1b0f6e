//! Python bindings: datasets, mappings, discovery, rules, cross-validation,
//! rendering, projection models and interactive sessions.
//!
//! Structured results (metrics, reports, candidate lists) come back as plain
//! Python dicts and lists. Config arguments are dicts with the same keys as
//! the JSON forms, missing keys taking their defaults.

use std::io::Cursor;

use ilc_core::dataset::{load_csv, ClassLabel, LoadOptions, DEFAULT_PALETTE};
use ilc_core::discovery::{discover as run_discovery, DiscoveryConfig, TopSelector};
use ilc_core::evaluation::{run_cv, scenario_estimates as estimates, CvConfig, RuleConfig};
use ilc_core::formats::{read_ruleset, read_trace, write_ruleset, write_trace};
use ilc_core::linear::{fit_model, LinearConfig};
use ilc_core::mapping::{self, MappingKind, MappingMode, PolylineGraph};
use ilc_core::render::{render_scene, BoxOverlay, RenderOptions};
use ilc_core::rules::{self, evaluate, from_trace, simplify_all};
use ilc_core::session::{Choice, Session as CoreSession, SessionConfig};
use ilc_core::{GridBox, LabeledDataset, NDPoint};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: ilc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn from_py<T: DeserializeOwned + Default>(obj: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    let Some(obj) = obj else {
        return Ok(T::default());
    };
    let s: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// How n-D points become 2-D polylines.
#[pyclass(module = "pyilc", skip_from_py_object)]
#[derive(Clone)]
pub struct Mapping {
    kind: MappingKind,
    weights: Option<Vec<f64>>,
    offsets: Option<Vec<f64>>,
    spacing: f64,
}

impl Mapping {
    fn mode(&self, dim: usize) -> PyResult<MappingMode> {
        let mut mode = MappingMode::new(self.kind);
        mode.weights = self.weights.clone();
        mode.offsets = self.offsets.clone();
        if self.kind == MappingKind::IlcSequential && mode.offsets.is_none() {
            mode.offsets = MappingMode::sequential_spaced(dim, self.spacing).offsets;
        }
        if self.kind == MappingKind::Ilc2Weighted && mode.weights.is_none() {
            mode.weights = Some(vec![1.0; dim]);
        }
        mode.validate(dim).map_err(err)?;
        Ok(mode)
    }
}

#[pymethods]
impl Mapping {
    /// `kind` is one of static, partial-dynamic, full-dynamic, weighted,
    /// sequential, collocated, generic.
    #[new]
    #[pyo3(signature = (kind = "partial-dynamic", weights = None, offsets = None, spacing = 10.0))]
    fn new(kind: &str, weights: Option<Vec<f64>>, offsets: Option<Vec<f64>>, spacing: f64) -> PyResult<Self> {
        Ok(Self {
            kind: kind.parse().map_err(err)?,
            weights,
            offsets,
            spacing,
        })
    }

    #[getter]
    fn kind(&self) -> String {
        self.kind.to_string()
    }

    fn encode(&self, values: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        let mode = self.mode(values.len())?;
        let g = mapping::encode(&NDPoint::new(values).map_err(err)?, &mode).map_err(err)?;
        Ok(g.nodes.iter().map(|n| (n[0], n[1])).collect())
    }

    /// Recovers the `dim` values behind `nodes`.
    fn decode(&self, nodes: Vec<(f64, f64)>, dim: usize) -> PyResult<Vec<f64>> {
        let mode = self.mode(dim)?;
        let g = PolylineGraph {
            nodes: nodes.into_iter().map(|(x, y)| [x, y]).collect(),
            padded: self.kind.is_paired() && dim % 2 == 1,
            source_dim: dim,
        };
        Ok(mapping::decode(&g, &mode).map_err(err)?.values)
    }

    fn __repr__(&self) -> String {
        format!("Mapping({:?})", self.kind.to_string())
    }
}

/// Labeled n-D cases.
#[pyclass(module = "pyilc", skip_from_py_object)]
#[derive(Clone)]
pub struct Dataset {
    inner: LabeledDataset,
}

impl Dataset {
    fn graphs(&self, m: Option<&Mapping>) -> PyResult<(MappingMode, Vec<PolylineGraph>)> {
        let m = m.cloned().unwrap_or_else(default_mapping);
        let mode = m.mode(self.inner.dim().unwrap_or(2))?;
        let graphs = mapping::encode_all(&self.inner.points, &mode).map_err(err)?;
        Ok((mode, graphs))
    }

    fn names(&self) -> Vec<String> {
        self.inner.classes.iter().map(|c| c.name.clone()).collect()
    }
}

fn default_mapping() -> Mapping {
    Mapping {
        kind: MappingKind::Ilc2PartialDynamic,
        weights: None,
        offsets: None,
        spacing: 10.0,
    }
}

#[pymethods]
impl Dataset {
    /// Class order follows `classes` when given, else first appearance.
    #[new]
    #[pyo3(signature = (points, labels, classes = None))]
    fn new(points: Vec<Vec<f64>>, labels: Vec<String>, classes: Option<Vec<String>>) -> PyResult<Self> {
        let mut names = classes.unwrap_or_default();
        for l in &labels {
            if !names.contains(l) {
                names.push(l.clone());
            }
        }
        let label_idx = labels.iter().map(|l| names.iter().position(|n| n == l).unwrap()).collect();
        let pts = points.into_iter().map(NDPoint::new).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let classes = names
            .iter()
            .enumerate()
            .map(|(i, n)| ClassLabel::new(n.clone(), DEFAULT_PALETTE[i % DEFAULT_PALETTE.len()]))
            .collect();
        let inner = LabeledDataset::new(pts, label_idx, classes, Vec::new()).map_err(err)?;
        Ok(Self { inner })
    }

    /// `preset` is "plain" or "wbc".
    #[staticmethod]
    #[pyo3(signature = (path, preset = "plain", label_column = None, id_column = None))]
    fn from_csv(path: &str, preset: &str, label_column: Option<String>, id_column: Option<String>) -> PyResult<Self> {
        let mut opts = match preset {
            "plain" => LoadOptions::default(),
            "wbc" => LoadOptions::wbc(),
            other => return Err(PyValueError::new_err(format!("unknown preset `{other}`"))),
        };
        if let Some(c) = label_column {
            opts.label_column = c;
        }
        if id_column.is_some() {
            opts.id_column = id_column;
        }
        Ok(Self {
            inner: load_csv(path, &opts).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> Option<usize> {
        self.inner.dim()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.names()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        (0..self.inner.len()).map(|i| self.inner.label_name(i).to_string()).collect()
    }

    #[getter]
    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points.iter().map(|p| p.values.clone()).collect()
    }

    fn subset(&self, indices: Vec<usize>) -> PyResult<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.inner.len()) {
            return Err(PyValueError::new_err(format!("case {bad} out of range")));
        }
        Ok(Self {
            inner: self.inner.subset(&indices),
        })
    }

    fn __repr__(&self) -> String {
        format!("Dataset({} cases, classes {:?})", self.inner.len(), self.names())
    }
}

/// Box rules with the boxes they reference.
#[pyclass(module = "pyilc", skip_from_py_object)]
#[derive(Clone)]
pub struct RuleSet {
    inner: rules::RuleSet,
}

#[pymethods]
impl RuleSet {
    #[staticmethod]
    fn empty(classes: Vec<String>) -> Self {
        Self {
            inner: rules::RuleSet::empty(classes),
        }
    }

    /// Reads the JSON-lines form written by the command line tools.
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: read_ruleset(Cursor::new(text.as_bytes())).map_err(err)?,
        })
    }

    fn to_jsonl(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        write_ruleset(&mut buf, &self.inner).map_err(err)?;
        String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes.clone()
    }

    #[getter]
    fn rule_ids(&self) -> Vec<String> {
        self.inner.rules.iter().map(|r| r.id.clone()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.rules.len()
    }

    /// Predicted class per case, `None` where refused.
    #[pyo3(signature = (data, mapping = None))]
    fn classify(&self, data: &Dataset, mapping: Option<&Mapping>) -> PyResult<Vec<Option<String>>> {
        let (_, graphs) = data.graphs(mapping)?;
        let preds = self.inner.classify_all(&graphs).map_err(err)?;
        Ok(preds.iter().map(|p| p.class().map(str::to_string)).collect())
    }

    #[pyo3(signature = (data, mapping = None))]
    fn metrics<'py>(&self, py: Python<'py>, data: &Dataset, mapping: Option<&Mapping>) -> PyResult<Bound<'py, PyAny>> {
        let (_, graphs) = data.graphs(mapping)?;
        let m = evaluate(&self.inner, &graphs, &data.inner.labels, &data.names()).map_err(err)?;
        to_py(py, &m)
    }

    /// Cases each rule decides, by rule id.
    #[pyo3(signature = (data, mapping = None))]
    fn coverage<'py>(&self, py: Python<'py>, data: &Dataset, mapping: Option<&Mapping>) -> PyResult<Bound<'py, PyAny>> {
        let (_, graphs) = data.graphs(mapping)?;
        let c: std::collections::BTreeMap<_, _> = self.inner.coverage(&graphs).map_err(err)?.into_iter().collect();
        to_py(py, &c)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("RuleSet({} rules)", self.inner.rules.len())
    }
}

/// Runs discovery to completion, taking the top candidate each turn.
/// Returns the rules and the trace as JSON lines.
#[pyfunction]
#[pyo3(signature = (data, mapping = None, config = None, simplify = false))]
fn discover(
    data: &Dataset,
    mapping: Option<&Mapping>,
    config: Option<&Bound<'_, PyAny>>,
    simplify: bool,
) -> PyResult<(RuleSet, String)> {
    let cfg: DiscoveryConfig = from_py(config)?;
    cfg.validate().map_err(err)?;
    let (_, graphs) = data.graphs(mapping)?;
    let trace = run_discovery(&graphs, &data.inner.labels, &data.names(), &cfg, &mut TopSelector).map_err(err)?;
    let mut rs = from_trace(&trace, &graphs);
    if simplify {
        rs = simplify_all(&rs, &graphs);
    }
    let ids: Vec<String> = (0..data.inner.len()).map(|i| data.inner.case_id(i)).collect();
    let mut buf = Vec::new();
    write_trace(&mut buf, &trace, &ids).map_err(err)?;
    Ok((RuleSet { inner: rs }, String::from_utf8(buf).unwrap()))
}

/// Rebuilds rules from a trace written by `discover`.
#[pyfunction]
#[pyo3(signature = (trace, data, mapping = None))]
fn rules_from_trace(trace: &str, data: &Dataset, mapping: Option<&Mapping>) -> PyResult<RuleSet> {
    let t = read_trace(Cursor::new(trace.as_bytes())).map_err(err)?;
    let (_, graphs) = data.graphs(mapping)?;
    Ok(RuleSet {
        inner: from_trace(&t, &graphs),
    })
}

/// Joins rules without changing any prediction on `data`. Returns the
/// joined rules and the join steps.
#[pyfunction]
#[pyo3(signature = (ruleset, data, mapping = None))]
fn join<'py>(
    py: Python<'py>,
    ruleset: &RuleSet,
    data: &Dataset,
    mapping: Option<&Mapping>,
) -> PyResult<(RuleSet, Bound<'py, PyAny>)> {
    let (_, graphs) = data.graphs(mapping)?;
    let report = rules::join(&ruleset.inner, &graphs).map_err(err)?;
    let steps = to_py(py, &report.steps)?;
    Ok((RuleSet { inner: report.ruleset }, steps))
}

/// Reassigns or refuses rules deciding at most `tau` cases, or only `rule`
/// when given. Returns the new rules and what was pruned.
#[pyfunction]
#[pyo3(signature = (ruleset, data, strategy = "reassign", tau = 7, rule = None, mapping = None))]
fn prune<'py>(
    py: Python<'py>,
    ruleset: &RuleSet,
    data: &Dataset,
    strategy: &str,
    tau: usize,
    rule: Option<&str>,
    mapping: Option<&Mapping>,
) -> PyResult<(RuleSet, Bound<'py, PyAny>)> {
    let strategy = strategy.parse().map_err(err)?;
    let (_, graphs) = data.graphs(mapping)?;
    let names = data.names();
    let labels = &data.inner.labels;
    let report = match rule {
        Some(id) => rules::prune_rule(&ruleset.inner, id, strategy, &graphs, labels, &names),
        None => rules::prune(&ruleset.inner, tau, strategy, &graphs, labels, &names),
    }
    .map_err(err)?;
    let pruned = to_py(py, &report.pruned)?;
    Ok((RuleSet { inner: report.ruleset }, pruned))
}

/// k-fold cross-validation of discovery plus rule building. `cv` takes k,
/// seed, stratified, adversarial ("none" or "mini-box"), designated_fold;
/// `rules` takes prune and tau.
#[pyfunction]
#[pyo3(signature = (data, mapping = None, config = None, cv = None, rules = None))]
fn cross_validate<'py>(
    py: Python<'py>,
    data: &Dataset,
    mapping: Option<&Mapping>,
    config: Option<&Bound<'py, PyAny>>,
    cv: Option<&Bound<'py, PyAny>>,
    rules: Option<&Bound<'py, PyAny>>,
) -> PyResult<(Bound<'py, PyAny>, String)> {
    let dcfg: DiscoveryConfig = from_py(config)?;
    let cvcfg: CvConfig = from_py(cv)?;
    let rcfg: RuleConfig = from_py(rules)?;
    let (mode, _) = data.graphs(mapping)?;
    let report = py
        .detach(|| run_cv(&data.inner, &mode, &dcfg, &rcfg, &cvcfg))
        .map_err(err)?;
    Ok((to_py(py, &report)?, report.to_text()))
}

/// Fold accuracy and k-fold average when `misclassified` cases land in one
/// fold of `fold_size`.
#[pyfunction]
fn scenario_estimates(fold_size: u64, misclassified: u64, k: u64) -> PyResult<(f64, f64)> {
    let e = estimates(fold_size, misclassified, k).map_err(err)?;
    Ok((e.fold_accuracy_pct(), e.average_pct()))
}

/// SVG of the dataset, with the boxes of `ruleset` when given.
#[pyfunction]
#[pyo3(signature = (data, mapping = None, ruleset = None, mirrored = false, width = 800.0, height = 600.0, limit = None))]
fn render(
    data: &Dataset,
    mapping: Option<&Mapping>,
    ruleset: Option<&RuleSet>,
    mirrored: bool,
    width: f64,
    height: f64,
    limit: Option<usize>,
) -> PyResult<String> {
    let (mode, _) = data.graphs(mapping)?;
    let boxes = ruleset
        .map(|rs| rs.inner.boxes.iter().cloned().map(BoxOverlay::new).collect())
        .unwrap_or_default();
    let opts = RenderOptions {
        mode,
        mirrored,
        boxes,
        width,
        height,
        sample_limit: limit,
        ..RenderOptions::default()
    };
    render_scene(&data.inner, &opts).map_err(err)
}

/// Projection-line model for `target`. `config` takes angles, selectors
/// ("endpoint" or {"node": k}) and mode ("two_sided" or "one_sided").
/// Returns the fit as a dict and a readable description.
#[pyfunction]
#[pyo3(signature = (data, target, mapping = None, config = None))]
fn fit_linear<'py>(
    py: Python<'py>,
    data: &Dataset,
    target: &str,
    mapping: Option<&Mapping>,
    config: Option<&Bound<'py, PyAny>>,
) -> PyResult<(Bound<'py, PyAny>, String)> {
    let cfg: LinearConfig = from_py(config)?;
    let t = data
        .inner
        .class_index(target)
        .ok_or_else(|| PyValueError::new_err(format!("unknown class `{target}`")))?;
    let (_, graphs) = data.graphs(mapping)?;
    let fit = fit_model(&graphs, &data.inner.labels, &data.names(), t, &cfg).map_err(err)?;
    Ok((to_py(py, &fit)?, fit.model.to_string()))
}

/// Interactive discovery with versioned accepts and undo.
#[pyclass(module = "pyilc")]
pub struct Session {
    inner: CoreSession,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (data, mapping = None, config = None))]
    fn new(data: &Dataset, mapping: Option<&Mapping>, config: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let (mode, _) = data.graphs(mapping)?;
        let cfg = SessionConfig {
            mode,
            discovery: from_py(config)?,
            ..SessionConfig::default()
        };
        Ok(Self {
            inner: CoreSession::new("py", data.inner.clone(), cfg).map_err(err)?,
        })
    }

    #[getter]
    fn version(&self) -> u64 {
        self.inner.version()
    }

    #[getter]
    fn done(&self) -> bool {
        self.inner.is_done()
    }

    /// Ranked candidates: {phase, turn, items}.
    #[pyo3(signature = (limit = None))]
    fn candidates<'py>(&mut self, py: Python<'py>, limit: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
        let list = self.inner.candidates(limit).map_err(err)?;
        to_py(py, &list)
    }

    /// Accepts candidate `candidate`, or the box (x1, x2, y1, y2). `token`
    /// must equal the current version.
    #[pyo3(signature = (token, candidate = None, r#box = None))]
    fn accept<'py>(
        &mut self,
        py: Python<'py>,
        token: u64,
        candidate: Option<usize>,
        r#box: Option<(f64, f64, f64, f64)>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let choice = match (candidate, r#box) {
            (Some(i), None) => Choice::Candidate(i),
            (None, Some((x1, x2, y1, y2))) => {
                let id = format!("B{}", self.inner.trace().steps.len() + 1);
                Choice::Box(GridBox::new(id, x1, x2, y1, y2).map_err(err)?)
            }
            _ => return Err(PyValueError::new_err("give exactly one of candidate, box")),
        };
        let step = self.inner.accept(token, choice).map_err(err)?;
        to_py(py, &step)
    }

    fn undo(&mut self) -> bool {
        self.inner.undo()
    }

    fn auto_complete(&mut self) -> PyResult<usize> {
        self.inner.auto_complete().map_err(err)
    }

    fn ruleset(&self) -> RuleSet {
        RuleSet {
            inner: self.inner.ruleset(),
        }
    }

    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.metrics().map_err(err)?)
    }

    #[pyo3(signature = (mirrored = false, all_cases = false))]
    fn plot(&self, mirrored: bool, all_cases: bool) -> PyResult<String> {
        self.inner.plot(mirrored, &[], all_cases).map_err(err)
    }
}

#[pymodule]
fn pyilc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Mapping>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<RuleSet>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(discover, m)?)?;
    m.add_function(wrap_pyfunction!(rules_from_trace, m)?)?;
    m.add_function(wrap_pyfunction!(join, m)?)?;
    m.add_function(wrap_pyfunction!(prune, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(fit_linear, m)?)?;
    Ok(())
}
