//! Python bindings: load models, run and replay experiments, and use the
//! perception densities directly.

use pyo3::prelude::*;

#[pymodule]
mod alp_py {
    use std::path::PathBuf;

    use alp_core::harness::{self, ExperimentConfig, ModelFile, RunOutput};
    use alp_core::perception::pdf::FamilyKind;
    use alp_core::{domain, learner, perception, Assignment, DomainModel, PerceptionModel};
    use pyo3::exceptions::PyValueError;
    use pyo3::prelude::*;

    fn err(e: alp_core::Error) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
        let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
        py.import("json")?.call_method1("loads", (text,))
    }

    fn state(m: &DomainModel, text: &str) -> PyResult<Assignment> {
        let s = Assignment::from_digits(text)
            .filter(|s| s.values().len() == m.variables.len())
            .ok_or_else(|| PyValueError::new_err(format!("`{text}` is not an assignment of {} digits", m.variables.len())))?;
        for (v, &c) in s.values().iter().enumerate() {
            if c >= m.domain_size(v) {
                return Err(PyValueError::new_err(format!("value {c} outside the domain of {}", m.variables[v].name)));
            }
        }
        Ok(s)
    }

    /// A planning domain with its perception model and initial state.
    #[pyclass(module = "alp_py", skip_from_py_object)]
    #[derive(Clone)]
    struct Model {
        model: DomainModel,
        perception: PerceptionModel,
        initial: Assignment,
    }

    #[pymethods]
    impl Model {
        #[staticmethod]
        #[pyo3(signature = (path, from_scratch = false))]
        fn load(path: PathBuf, from_scratch: bool) -> PyResult<Self> {
            let l = harness::load_model(&path, from_scratch).map_err(err)?;
            Ok(Self { model: l.model, perception: l.perception, initial: l.initial })
        }

        #[staticmethod]
        #[pyo3(signature = (text, from_scratch = false))]
        fn parse(text: &str, from_scratch: bool) -> PyResult<Self> {
            let file = ModelFile::parse(text).map_err(err)?;
            let l = if from_scratch { file.load_from_scratch() } else { file.load() }.map_err(err)?;
            Ok(Self { model: l.model, perception: l.perception, initial: l.initial })
        }

        #[getter]
        fn variables(&self) -> Vec<String> {
            self.model.names()
        }

        #[getter]
        fn actions(&self) -> Vec<String> {
            self.model.actions.clone()
        }

        #[getter]
        fn domain_sizes(&self) -> Vec<(String, u32)> {
            self.model.domains.iter().map(|d| (d.name.clone(), d.size)).collect()
        }

        #[getter]
        fn constraints(&self) -> Vec<String> {
            self.model.constraints.iter().map(|c| self.model.show_formula(c)).collect()
        }

        #[getter]
        fn rules(&self) -> Vec<String> {
            self.model.rules.iter().map(|r| self.model.show_rule(r)).collect()
        }

        #[getter]
        fn initial(&self) -> String {
            self.initial.to_string()
        }

        fn states(&self) -> Vec<String> {
            self.model.enumerate_states().iter().map(|s| s.to_string()).collect()
        }

        fn is_state(&self, s: &str) -> PyResult<bool> {
            Ok(self.model.is_state(&state(&self.model, s)?))
        }

        fn apply_action(&self, s: &str, action: &str) -> PyResult<String> {
            let s = state(&self.model, s)?;
            Ok(self.model.apply_action(&s, action).map_err(err)?.to_string())
        }

        /// The same model with exactly one more state.
        fn weaken(&self, s: &str) -> PyResult<Self> {
            let s = state(&self.model, s)?;
            let mut out = self.clone();
            let weakened = domain::weaken_constraints(&self.model.constraints, &s, &[]);
            out.model.constraints = domain::simplify_constraints(&weakened, &self.model);
            Ok(out)
        }

        /// Merges the rule set into fewer, more general rules.
        fn factorize(&self) -> Self {
            let mut out = self.clone();
            out.model.rules = learner::factorize_rules(&self.model.rules, &self.model);
            out
        }

        fn sim(&self, a: &str, b: &str, delta: f64) -> PyResult<f64> {
            Ok(learner::sim(&state(&self.model, a)?, &state(&self.model, b)?, delta, &self.model))
        }

        fn log_likelihood(&self, x: Vec<f64>, s: &str) -> PyResult<f64> {
            self.perception.log_likelihood(&x, &state(&self.model, s)?).map_err(err)
        }

        /// States whose every sensor reading is within the threshold.
        fn above_threshold(&self, x: Vec<f64>, epsilon: f64) -> PyResult<Vec<String>> {
            let states = self.model.enumerate_states();
            let passing = self.perception.above_threshold(&x, &states, epsilon).map_err(err)?;
            Ok(passing.iter().map(|s| s.to_string()).collect())
        }

        fn describe(&self) -> String {
            harness::describe(&harness::LoadedModel {
                model: self.model.clone(),
                perception: self.perception.clone(),
                initial: self.initial.clone(),
            })
        }

        fn to_toml(&self) -> String {
            ModelFile::from_model(&self.model, &self.perception, &self.initial).to_toml()
        }

        fn __repr__(&self) -> String {
            let sizes: Vec<String> = self.model.domains.iter().map(|d| format!("{}={}", d.name, d.size)).collect();
            format!("Model({}, {} states)", sizes.join(", "), self.model.enumerate_states().len())
        }
    }

    /// An experiment configuration.
    #[pyclass(module = "alp_py", skip_from_py_object)]
    #[derive(Clone)]
    struct Config {
        cfg: ExperimentConfig,
    }

    #[pymethods]
    impl Config {
        #[staticmethod]
        fn read(path: PathBuf) -> PyResult<Self> {
            Ok(Self { cfg: ExperimentConfig::read(&path).map_err(err)? })
        }

        /// Parses a configuration; relative paths stay relative to the
        /// working directory.
        #[staticmethod]
        fn parse(text: &str) -> PyResult<Self> {
            Ok(Self { cfg: ExperimentConfig::parse(text).map_err(err)? })
        }

        fn with_seed(&self, seed: u64) -> Self {
            Self { cfg: self.cfg.with_seed(seed) }
        }

        fn to_toml(&self) -> String {
            self.cfg.to_toml()
        }

        #[getter]
        fn get_max_iter(&self) -> usize {
            self.cfg.learner.max_iter
        }

        #[setter]
        fn set_max_iter(&mut self, n: usize) {
            self.cfg.learner.max_iter = n;
        }

        #[getter]
        fn get_epsilon(&self) -> f64 {
            self.cfg.learner.epsilon
        }

        #[setter]
        fn set_epsilon(&mut self, v: f64) {
            self.cfg.learner.epsilon = v;
        }

        #[getter]
        fn get_alpha(&self) -> f64 {
            self.cfg.learner.alpha
        }

        #[setter]
        fn set_alpha(&mut self, v: f64) {
            self.cfg.learner.alpha = v;
        }

        #[getter]
        fn get_beta(&self) -> f64 {
            self.cfg.learner.beta
        }

        #[setter]
        fn set_beta(&mut self, v: f64) {
            self.cfg.learner.beta = v;
        }

        #[getter]
        fn get_delta(&self) -> f64 {
            self.cfg.learner.delta
        }

        #[setter]
        fn set_delta(&mut self, v: f64) {
            self.cfg.learner.delta = v;
        }

        fn __repr__(&self) -> String {
            format!("Config(model={:?}, max_iter={})", self.cfg.model, self.cfg.learner.max_iter)
        }
    }

    /// The outcome of a run.
    #[pyclass(module = "alp_py")]
    struct Run {
        out: RunOutput,
        cfg: ExperimentConfig,
    }

    #[pymethods]
    impl Run {
        #[getter]
        fn steps(&self) -> usize {
            self.out.steps.len()
        }

        fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
            json(py, &self.out.metrics)
        }

        /// Step records as dictionaries, each with the true world state.
        fn records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
            json(py, &self.out.steps)
        }

        fn trace(&self) -> String {
            self.out.trace_text()
        }

        fn model(&self) -> Model {
            let st = &self.out.state;
            Model { model: st.model.clone(), perception: st.perception.clone(), initial: st.current.clone() }
        }

        fn write_reports(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
            harness::write_reports(&self.cfg, &self.out, &dir).map_err(err)
        }
    }

    #[pyfunction]
    fn run(config: &Config) -> PyResult<Run> {
        let out = harness::run_experiment(&config.cfg).map_err(err)?;
        Ok(Run { out, cfg: config.cfg.clone() })
    }

    /// `"identical"` or a description of the first differing step.
    #[pyfunction]
    fn replay(trace: PathBuf, config: &Config) -> PyResult<String> {
        let recorded = harness::read_trace(&trace).map_err(err)?;
        Ok(harness::replay(&recorded, &config.cfg).map_err(err)?.to_string())
    }

    /// A Gaussian, Beta or Gamma density.
    #[pyclass(module = "alp_py", frozen, skip_from_py_object)]
    #[derive(Clone)]
    struct Pdf {
        pdf: perception::Pdf,
    }

    fn family(name: &str) -> PyResult<FamilyKind> {
        FamilyKind::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown family `{name}`")))
    }

    #[pymethods]
    impl Pdf {
        #[new]
        fn new(family_name: &str, a: f64, b: f64) -> PyResult<Self> {
            Ok(Self { pdf: perception::Pdf::from_params(family(family_name)?, &[a, b]).map_err(err)? })
        }

        /// Maximum-likelihood fit to `samples`.
        #[staticmethod]
        fn fit(family_name: &str, samples: Vec<f64>) -> PyResult<Self> {
            Ok(Self { pdf: perception::fit_mle(family(family_name)?, &samples).map_err(err)? })
        }

        /// `beta * self + (1 - beta) * other`.
        fn blend(&self, other: &Pdf, beta: f64) -> PyResult<Self> {
            Ok(Self { pdf: perception::blend_update(&self.pdf, &other.pdf, beta).map_err(err)? })
        }

        #[getter]
        fn family(&self) -> &'static str {
            self.pdf.kind().name()
        }

        #[getter]
        fn params(&self) -> (f64, f64) {
            let [a, b] = self.pdf.params();
            (a, b)
        }

        #[getter]
        fn mean(&self) -> f64 {
            self.pdf.mean()
        }

        fn density(&self, x: f64) -> f64 {
            self.pdf.density(x)
        }

        fn mode_density(&self) -> f64 {
            self.pdf.mode_density()
        }

        fn __repr__(&self) -> String {
            let [a, b] = self.pdf.params();
            format!("Pdf({:?}, {a}, {b})", self.pdf.kind().name())
        }
    }
}
