//! The acting-and-learning loop: act, interpret the observation against the
//! current model, grow the model when it cannot explain what was seen, and
//! revise transitions and perception from the accumulated history.

pub mod explore;
pub mod extend;
pub mod hitting_set;
pub mod sim;
pub mod transition;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use explore::{explore, ExplorePolicy};
pub use extend::{extend_dom, extend_f, new_values, DomainExtension, ExtendDomOutcome};
pub use hitting_set::minimal_hitting_set;
pub use sim::sim;
pub use transition::{factorize_rules, revise_rules, transition_scores, update_trans, Transition};

use crate::domain::{simplify_constraints, weaken_constraints, Assignment, DomainModel};
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::perception::{Observation, PerceptionModel};

/// Scores within this distance of the best one count as tied.
pub const SCORE_TOL: f64 = 1e-9;

fn default_alpha() -> f64 {
    0.85
}
fn default_beta() -> f64 {
    0.998
}
fn default_delta() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    0.9999
}
fn default_max_iter() -> usize {
    2000
}
fn default_explore() -> ExplorePolicy {
    ExplorePolicy::Random
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    /// Trust in the current transition function against observed transitions.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Trust in the current perception parameters against refitted ones.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Weight of similarity to the predicted state when choosing the next one.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Openness of the threshold: readings down to `(1 - epsilon)` of a
    /// conditional's peak density are accepted.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_explore")]
    pub explore: ExplorePolicy,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            beta: default_beta(),
            delta: default_delta(),
            epsilon: default_epsilon(),
            max_iter: default_max_iter(),
            seed: 0,
            explore: default_explore(),
        }
    }
}

impl LearnerConfig {
    pub fn problems(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
        ] {
            if !(0.0..=1.0).contains(&v) {
                out.push(format!("{prefix}{name}: {v} is outside [0, 1]"));
            }
        }
        if self.max_iter == 0 {
            out.push(format!("{prefix}max_iter: must be at least 1"));
        }
        out
    }
}

/// Where the next state was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Among the current states.
    S,
    /// Among assignments that are not states yet.
    DomMinusS,
    /// Only after extending domains.
    Extend,
}

/// Everything one iteration did, for traces and replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iter: usize,
    pub action: String,
    pub observation: Vec<f64>,
    pub predicted: String,
    pub branch: Branch,
    pub candidates: usize,
    /// Candidates were found only by falling back to the most likely assignments.
    pub fallback: bool,
    pub chosen: String,
    pub extended: Vec<DomainExtension>,
    /// Sensors the most likely assignment failed to explain before extension.
    pub failing: Vec<String>,
    pub constraints_added: Vec<String>,
    pub constraints_removed: Vec<String>,
    pub gamma_changed: bool,
    pub rules_before: usize,
    pub rules_revised: usize,
    pub rules_after: usize,
    pub perception_touched: Vec<String>,
    pub states: usize,
    pub assignments: usize,
    pub constraints: usize,
    pub loglik: f64,
}

/// Model, perception, current belief and histories of a learning run.
#[derive(Debug, Clone)]
pub struct LearnerState {
    pub model: DomainModel,
    pub perception: PerceptionModel,
    pub current: Assignment,
    pub transitions: Vec<Transition>,
    pub observations: Vec<(Assignment, Observation)>,
    pub rng: ChaCha8Rng,
    pub iter: usize,
}

impl LearnerState {
    pub fn new(model: DomainModel, perception: PerceptionModel, current: Assignment, seed: u64) -> Result<Self> {
        model.validate()?;
        perception.validate(&model)?;
        let st = Self {
            model,
            perception,
            current,
            transitions: Vec::new(),
            observations: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            iter: 0,
        };
        st.check_invariants()?;
        Ok(st)
    }

    /// The belief is a state, perception is total and rules are deterministic.
    pub fn check_invariants(&self) -> Result<()> {
        if self.current.values().len() != self.model.variables.len() {
            return Err(Error::Internal("current assignment has the wrong length".into()));
        }
        if !self.model.is_state(&self.current) {
            return Err(Error::Internal(format!("current assignment {} is not a state", self.current)));
        }
        if !self.perception.is_total(&self.model) {
            return Err(Error::Internal("perception function is not total".into()));
        }
        if let Some(v) = self.model.check_determinism().first() {
            return Err(Error::Internal(format!(
                "rules {} and {} of `{}` conflict at {}",
                v.first, v.second, v.action, v.witness
            )));
        }
        Ok(())
    }
}

/// Indices whose score is within [`SCORE_TOL`] of the maximum; NaN counts as `-inf`.
pub fn maximizers(scores: &[f64]) -> Vec<usize> {
    let clean = |x: f64| if x.is_nan() { f64::NEG_INFINITY } else { x };
    let best = scores.iter().map(|&x| clean(x)).fold(f64::NEG_INFINITY, f64::max);
    (0..scores.len())
        .filter(|&i| {
            let x = clean(scores[i]);
            x == best || x >= best - SCORE_TOL
        })
        .collect()
}

/// One maximizer, drawn uniformly when several tie.
pub(crate) fn pick<R: Rng>(scores: &[f64], rng: &mut R) -> usize {
    let ties = maximizers(scores);
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Most plausible next state among `candidates`: maximizes
/// `f(x, s) * sim(s, predicted)`, ties drawn from `rng`.
pub fn select_next_state<R: Rng>(
    candidates: &[Assignment],
    x: &[f64],
    predicted: &Assignment,
    delta: f64,
    f: &PerceptionModel,
    m: &DomainModel,
    rng: &mut R,
) -> Result<Assignment> {
    if candidates.is_empty() {
        return Err(Error::Internal("no candidate states to choose from".into()));
    }
    let scores = candidates
        .iter()
        .map(|s| Ok(f.log_likelihood(x, s)? + sim(s, predicted, delta, m).ln()))
        .collect::<Result<Vec<_>>>()?;
    Ok(candidates[pick(&scores, rng)].clone())
}

/// One iteration of the loop. Returns `None` without acting when the
/// exploration policy has no further action.
pub fn alp_step(st: &mut LearnerState, env: &mut dyn Environment, cfg: &LearnerConfig) -> Result<Option<StepRecord>> {
    let step_index = st.iter;
    let Some(action) = explore(
        &st.model,
        &st.current,
        &st.transitions,
        step_index,
        &cfg.explore,
        &mut st.rng,
    ) else {
        return Ok(None);
    };
    let x = env.act(&action)?;
    let predicted = st.model.apply_action(&st.current, &action)?;
    let eps = cfg.epsilon;

    let states = st.model.enumerate_states();
    let mut branch = Branch::S;
    let mut extended = Vec::new();
    let mut failing = Vec::new();
    let mut fallback = false;
    let mut candidates = st.perception.above_threshold(&x, &states, eps)?;
    if candidates.is_empty() {
        branch = Branch::DomMinusS;
        let non_states: Vec<Assignment> = st
            .model
            .space()
            .iter()
            .map(Assignment)
            .filter(|s| !st.model.is_state(s))
            .collect();
        candidates = st.perception.above_threshold(&x, &non_states, eps)?;
    }
    if candidates.is_empty() {
        branch = Branch::Extend;
        let out = extend_dom(&st.model, &st.perception, &x, eps, &mut st.rng)?;
        st.perception = extend_f(&out.model, &st.perception, &x, eps, &out.extended)?;
        st.model = out.model;
        extended = out.extended;
        failing = out.failing.iter().map(|&i| st.perception.variables[i].name.clone()).collect();
        let all: Vec<Assignment> = st.model.space().iter().map(Assignment).collect();
        candidates = st.perception.above_threshold(&x, &all, eps)?;
        if candidates.is_empty() {
            fallback = true;
            let scores = all
                .iter()
                .map(|s| st.perception.log_likelihood(&x, s))
                .collect::<Result<Vec<_>>>()?;
            candidates = maximizers(&scores).into_iter().map(|i| all[i].clone()).collect();
        }
    }
    let n_candidates = candidates.len();
    let chosen = select_next_state(
        &candidates,
        &x,
        &predicted,
        cfg.delta,
        &st.perception,
        &st.model,
        &mut st.rng,
    )?;

    let before: Vec<String> = st.model.constraints.iter().map(|c| st.model.show_formula(c)).collect();
    let uses_new_value = extended.iter().any(|e| {
        st.model
            .vars_of_domain(&e.domain)
            .iter()
            .any(|&v| chosen.get(v) == e.value)
    });
    if !extended.is_empty() || !st.model.is_state(&chosen) || uses_new_value {
        let nv = new_values(&st.model, &extended);
        let weakened = weaken_constraints(&st.model.constraints, &chosen, &nv);
        st.model.constraints = simplify_constraints(&weakened, &st.model);
    }
    let after: Vec<String> = st.model.constraints.iter().map(|c| st.model.show_formula(c)).collect();

    st.transitions.push(Transition {
        from: st.current.clone(),
        action: action.clone(),
        to: chosen.clone(),
    });
    st.observations.push((chosen.clone(), x.clone()));
    let loglik = st.perception.log_likelihood(&x, &chosen)?;

    let (model, trans) = update_trans(&st.model, &st.transitions, cfg.alpha)?;
    st.model = model;
    let touched = st.perception.update(&st.observations, &chosen, cfg.beta)?;
    st.current = chosen.clone();
    st.iter += 1;

    let touched = touched
        .into_iter()
        .map(|(i, key)| {
            let parts: Vec<String> = key.iter().map(u32::to_string).collect();
            format!("{}[{}]", st.perception.variables[i].name, parts.join(","))
        })
        .collect();
    Ok(Some(StepRecord {
        iter: st.iter,
        action,
        observation: x,
        predicted: predicted.to_string(),
        branch,
        candidates: n_candidates,
        fallback,
        chosen: chosen.to_string(),
        extended,
        failing,
        constraints_added: after.iter().filter(|c| !before.contains(c)).cloned().collect(),
        constraints_removed: before.iter().filter(|c| !after.contains(c)).cloned().collect(),
        gamma_changed: trans.changed,
        rules_before: trans.rules_before,
        rules_revised: trans.rules_revised,
        rules_after: trans.rules_after,
        perception_touched: touched,
        states: st.model.enumerate_states().len(),
        assignments: st.model.space().len(),
        constraints: st.model.constraints.len(),
        loglik,
    }))
}

/// Runs up to `cfg.max_iter` iterations, stopping early when the
/// exploration policy runs out of actions.
pub fn run(st: &mut LearnerState, env: &mut dyn Environment, cfg: &LearnerConfig) -> Result<Vec<StepRecord>> {
    let problems = cfg.problems("");
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut out = Vec::new();
    for _ in 0..cfg.max_iter {
        match alp_step(st, env, cfg)? {
            Some(rec) => out.push(rec),
            None => break,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::rpc_prior;
    use crate::perception::tests::rpc_perception;

    fn s(d: &str) -> Assignment {
        Assignment::from_digits(d).unwrap()
    }

    #[test]
    fn equal_scores_tie_and_seed_decides() {
        let m = rpc_prior();
        let f = rpc_perception();
        let cands = [s("100"), s("120"), s("130")];
        let x = [1.5, 0.5, 0.01, 0.01];
        let picks: std::collections::BTreeSet<Assignment> = (0..32)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                select_next_state(&cands, &x, &s("110"), 0.5, &f, &m, &mut rng).unwrap()
            })
            .collect();
        assert_eq!(picks.len(), 3);
    }

    #[test]
    fn full_similarity_weight_returns_prediction() {
        let m = rpc_prior();
        let f = rpc_perception();
        let cands = [s("100"), s("110"), s("130")];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let got = select_next_state(&cands, &[1.5, 0.5, 0.01, 0.01], &s("110"), 1.0, &f, &m, &mut rng).unwrap();
        assert_eq!(got, s("110"));
        let got = select_next_state(&[s("000")], &[1.5, 0.5, 0.01, 0.01], &s("110"), 0.5, &f, &m, &mut rng).unwrap();
        assert_eq!(got, s("000"));
    }

    #[test]
    fn maximizers_are_shift_invariant() {
        let scores = [-3.0, -1.0, -1.0 + 1e-12, -7.0];
        let shifted: Vec<f64> = scores.iter().map(|x| x + 5.0f64.ln()).collect();
        assert_eq!(maximizers(&scores), vec![1, 2]);
        assert_eq!(maximizers(&shifted), vec![1, 2]);
        assert_eq!(maximizers(&[f64::NEG_INFINITY; 2]), vec![0, 1]);
    }

    #[test]
    fn config_problems_listed() {
        let cfg = LearnerConfig { alpha: 2.0, epsilon: -0.1, max_iter: 0, ..Default::default() };
        assert_eq!(cfg.problems("").len(), 3);
    }
}
