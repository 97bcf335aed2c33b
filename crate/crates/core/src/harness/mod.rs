//! Experiment runner: wires a model file, a simulated world and the learner
//! together, records traces and metrics, and replays traces.

pub mod config;
pub mod metrics;
pub mod model_file;
pub mod trace;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ReportFormat, OUTPUT_DIR_ENV};
pub use metrics::{steps_csv, RunMetrics};
pub use model_file::{describe, load_model, write_model, LoadedModel, ModelFile};
pub use trace::{parse_trace, read_trace, render_step, render_trace, TraceStep, Truth};

use crate::domain::Assignment;
use crate::environment::{Environment, RpcFlat};
use crate::error::{Error, Result};
use crate::learner::{alp_step, LearnerState};

pub struct RunOutput {
    pub steps: Vec<TraceStep>,
    pub metrics: RunMetrics,
    pub initial: Assignment,
    pub state: LearnerState,
}

impl RunOutput {
    pub fn trace_text(&self) -> String {
        render_trace(&self.steps)
    }
}

/// Runs an experiment in memory. Every step is followed by a consistency
/// check; a failure aborts with the offending step record in the message.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let loaded = load_model(&cfg.model, cfg.from_scratch)?;
    run_loaded(cfg, loaded)
}

pub fn run_loaded(cfg: &ExperimentConfig, loaded: LoadedModel) -> Result<RunOutput> {
    run_while(cfg, loaded, |_| true)
}

/// Like [`run_loaded`], but stops after the first step for which `go_on`
/// returns false.
pub fn run_while(
    cfg: &ExperimentConfig,
    loaded: LoadedModel,
    mut go_on: impl FnMut(&TraceStep) -> bool,
) -> Result<RunOutput> {
    cfg.validate()?;
    let mut env = RpcFlat::new(cfg.environment.clone())?;
    let initial = loaded.initial.clone();
    let initial_truth = Truth::of(env.state());
    let mut st = LearnerState::new(loaded.model, loaded.perception, loaded.initial, cfg.learner.seed)?;
    let mut steps = Vec::new();
    let mut states: BTreeSet<Assignment> = st.model.enumerate_states().into_iter().collect();
    for _ in 0..cfg.learner.max_iter {
        let Some(record) = alp_step(&mut st, &mut env as &mut dyn Environment, &cfg.learner)? else {
            break;
        };
        let now: BTreeSet<Assignment> = st.model.enumerate_states().into_iter().collect();
        let check = st.check_invariants().and_then(|()| match states.difference(&now).next() {
            Some(lost) => Err(Error::Internal(format!("state {lost} was dropped"))),
            None => Ok(()),
        });
        if let Err(e) = check {
            return Err(Error::Internal(format!(
                "step {}: {e}; record {}",
                record.iter,
                serde_json::to_string(&record).unwrap_or_default()
            )));
        }
        states = now;
        steps.push(TraceStep {
            record,
            truth: Truth::of(env.state()),
        });
        if !go_on(steps.last().expect("just pushed")) {
            break;
        }
    }
    let metrics = RunMetrics::compute(&st.model, &steps, &st.transitions, (&initial, initial_truth));
    Ok(RunOutput {
        steps,
        metrics,
        initial,
        state: st,
    })
}

/// Writes the requested reports into `dir` and returns their paths.
pub fn write_reports(cfg: &ExperimentConfig, out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    if cfg.wants(ReportFormat::Trace) {
        put("trace.jsonl", out.trace_text())?;
    }
    if cfg.wants(ReportFormat::Csv) {
        put("steps.csv", steps_csv(&out.steps))?;
    }
    if cfg.wants(ReportFormat::Model) {
        let st = &out.state;
        put(
            "model.toml",
            ModelFile::from_model(&st.model, &st.perception, &st.current).to_toml(),
        )?;
    }
    if cfg.wants(ReportFormat::Metrics) {
        put(
            "metrics.json",
            serde_json::to_string_pretty(&out.metrics).expect("metrics always serialize") + "\n",
        )?;
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Identical,
    Diverged {
        /// 1-based step of the first difference.
        step: usize,
        /// Top-level record fields that differ; empty when one run is longer.
        fields: Vec<String>,
        recorded: Option<String>,
        replayed: Option<String>,
    },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Identical => write!(f, "identical"),
            Verdict::Diverged { step, fields, recorded, replayed } => {
                write!(f, "diverged at step {step}")?;
                if !fields.is_empty() {
                    write!(f, " in {}", fields.join(", "))?;
                }
                if let Some(r) = recorded {
                    write!(f, "\n  recorded: {r}")?;
                }
                if let Some(r) = replayed {
                    write!(f, "\n  replayed: {r}")?;
                }
                Ok(())
            }
        }
    }
}

/// Re-runs `cfg` and compares it step by step with a recorded trace,
/// stopping at the first difference.
pub fn replay(recorded: &[TraceStep], cfg: &ExperimentConfig) -> Result<Verdict> {
    cfg.validate()?;
    let loaded = load_model(&cfg.model, cfg.from_scratch)?;
    let mut i = 0;
    let fresh = run_while(cfg, loaded, |step| {
        let same = recorded.get(i).is_some_and(|r| render_step(r) == render_step(step));
        i += 1;
        same
    })?;
    Ok(compare(recorded, &fresh.steps))
}

pub fn compare(recorded: &[TraceStep], replayed: &[TraceStep]) -> Verdict {
    let n = recorded.len().max(replayed.len());
    for i in 0..n {
        let (a, b) = (recorded.get(i), replayed.get(i));
        let (sa, sb) = (a.map(render_step), b.map(render_step));
        if sa == sb {
            continue;
        }
        let fields = match (a, b) {
            (Some(a), Some(b)) => differing_fields(a, b),
            _ => Vec::new(),
        };
        return Verdict::Diverged {
            step: i + 1,
            fields,
            recorded: sa,
            replayed: sb,
        };
    }
    Verdict::Identical
}

fn differing_fields(a: &TraceStep, b: &TraceStep) -> Vec<String> {
    let (va, vb) = (
        serde_json::to_value(a).unwrap_or_default(),
        serde_json::to_value(b).unwrap_or_default(),
    );
    let mut out = Vec::new();
    for part in ["record", "truth"] {
        match (va.get(part), vb.get(part)) {
            (Some(serde_json::Value::Object(x)), Some(serde_json::Value::Object(y))) => {
                for (k, v) in x {
                    if y.get(k) != Some(v) {
                        out.push(k.clone());
                    }
                }
            }
            (x, y) if x != y => out.push(part.to_string()),
            _ => {}
        }
    }
    out
}

/// Runs the experiment once per seed in `seeds`, in parallel.
pub fn sweep(cfg: &ExperimentConfig, seeds: Range<u64>) -> Result<Vec<(u64, RunMetrics)>> {
    cfg.validate()?;
    let seeds: Vec<u64> = seeds.collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(seeds.len().max(1));
    let chunks: Vec<&[u64]> = seeds.chunks(seeds.len().div_ceil(workers).max(1)).collect();
    let results: Vec<Result<Vec<(u64, RunMetrics)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&seed| Ok((seed, run_experiment(&cfg.with_seed(seed))?.metrics)))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("sweep worker panicked".into()))))
            .collect()
    });
    let mut out = Vec::with_capacity(seeds.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Sweep results as CSV.
pub fn sweep_csv(rows: &[(u64, RunMetrics)]) -> String {
    let mut out = String::from("seed,steps,states,assignments,domain_sizes,transition_agreement,mean_loglik,constraints,rules\n");
    for (seed, m) in rows {
        let sizes: Vec<String> = m.domain_sizes.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!(
            "{seed},{},{},{},{},{},{},{},{}\n",
            m.steps,
            m.states_learned,
            m.assignments_total,
            sizes.join(";"),
            m.transition_agreement.map_or(String::new(), |a| a.to_string()),
            m.mean_observation_loglik,
            m.constraint_count,
            m.rule_count
        ));
    }
    out
}
