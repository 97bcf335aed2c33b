//! The two worked scenarios: a room discovered while walking east, then a
//! dropped pack and a cat on the robot and on the pack.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use alp_core::domain::semantically_equivalent;
use alp_core::harness::{load_model, ExperimentConfig};
use alp_core::learner::Branch;
use alp_core::{alp_step, Assignment, DomainModel, Environment, Formula, LearnerState, RpcFlat, StepRecord};

pub fn fixture(name: &str) -> ExperimentConfig {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    ExperimentConfig::read(path.as_ref()).unwrap()
}

/// Steps the learner by hand so the model can be inspected between steps.
pub struct Stepper {
    pub cfg: ExperimentConfig,
    pub env: RpcFlat,
    pub st: LearnerState,
}

impl Stepper {
    pub fn new(cfg: ExperimentConfig) -> Self {
        let loaded = load_model(&cfg.model, cfg.from_scratch).unwrap();
        let env = RpcFlat::new(cfg.environment.clone()).unwrap();
        let st = LearnerState::new(loaded.model, loaded.perception, loaded.initial, cfg.learner.seed).unwrap();
        Self { cfg, env, st }
    }

    pub fn step(&mut self) -> StepRecord {
        let before = self.st.clone();
        let rec = alp_step(&mut self.st, &mut self.env as &mut dyn Environment, &self.cfg.learner)
            .unwrap()
            .expect("script not exhausted");
        self.st.check_invariants().unwrap();
        let now: BTreeSet<Assignment> = self.st.model.enumerate_states().into_iter().collect();
        for s in before.model.enumerate_states() {
            assert!(now.contains(&s), "step {} dropped state {s}", rec.iter);
        }
        rec
    }
}

pub fn s(d: &str) -> Assignment {
    Assignment::from_digits(d).unwrap()
}

fn all_of(m: &DomainModel, texts: &[&str]) -> Formula {
    Formula::and(texts.iter().map(|t| m.parse_formula(t).unwrap()))
}

fn assert_constraints_equivalent(m: &DomainModel, expected: &[&str]) {
    let got = Formula::and(m.constraints.iter().cloned());
    let want = all_of(m, expected);
    let shown: Vec<String> = m.constraints.iter().map(|c| m.show_formula(c)).collect();
    assert!(semantically_equivalent(&got, &want, m), "constraints {shown:?} differ from {expected:?}");
}

pub fn domain_size(m: &DomainModel, name: &str) -> u32 {
    m.domains[m.domain_index(name).unwrap()].size
}

pub fn check_new_room() {
    let started = Instant::now();
    let mut run = Stepper::new(fixture("new_room.toml"));
    let eps = run.cfg.learner.epsilon;
    assert_eq!(run.st.current, s("010"));

    let initial = run.st.clone();
    let r1 = run.step();
    assert_eq!(r1.action, "E");
    assert_eq!(r1.branch, Branch::S);
    let cands: BTreeSet<Assignment> = initial
        .perception
        .above_threshold(&r1.observation, &initial.model.enumerate_states(), eps)
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(cands, [s("100"), s("120"), s("130")].into_iter().collect());
    assert_eq!(r1.candidates, 3);
    assert_eq!(r1.predicted, "110");
    assert_eq!(r1.chosen, "130");
    assert!(r1.extended.is_empty());
    assert_eq!(run.st.current, s("130"));
    assert!(run.st.model.apply_action(&s("010"), "E").unwrap() == s("110"));

    let r2 = run.step();
    assert_eq!(r2.branch, Branch::Extend);
    assert_eq!(r2.failing, vec!["X".to_string()]);
    assert_eq!(domain_size(&run.st.model, "room"), 5);
    assert_eq!(r2.chosen, "440");
    let added: BTreeSet<&str> = r2.constraints_added.iter().map(String::as_str).collect();
    assert_eq!(
        added,
        ["loc(r) = 4 -> loc(p) = 4 & loaded = 0", "loc(p) = 4 -> loc(r) = 4 & loaded = 0"]
            .into_iter()
            .collect()
    );
    assert_constraints_equivalent(
        &run.st.model,
        &[
            "loaded = 1 -> loc(r) = loc(p)",
            "loc(r) = 4 -> loc(p) = 4 & loaded = 0",
            "loc(p) = 4 -> loc(r) = 4 & loaded = 0",
        ],
    );
    let states: BTreeSet<Assignment> = run.st.model.enumerate_states().into_iter().collect();
    let before: BTreeSet<Assignment> = initial.model.enumerate_states().into_iter().collect();
    assert_eq!(states.len(), before.len() + 1);
    assert!(states.contains(&s("440")));

    let r3 = run.step();
    assert_eq!(r3.action, "L");
    assert_eq!(r3.branch, Branch::DomMinusS);
    assert_eq!(r3.chosen, "441");
    assert_eq!(run.st.model.space().len(), 50);
    assert_constraints_equivalent(
        &run.st.model,
        &["loc(r) = 4 -> loc(p) = 4", "loc(p) = 4 -> loc(r) = 4", "loaded = 1 -> loc(r) = loc(p)"],
    );
    assert!(started.elapsed() < Duration::from_secs(1), "took {:?}", started.elapsed());
}

pub fn check_exogenous() {
    let started = Instant::now();
    let mut run = Stepper::new(fixture("exogenous.toml"));
    let recs: Vec<StepRecord> = (0..4).map(|_| run.step()).collect();
    assert_eq!(
        recs.iter().map(|r| r.chosen.as_str()).collect::<Vec<_>>(),
        ["130", "440", "441", "141"]
    );
    let w = &recs[3];
    assert_eq!(w.action, "W");
    assert_eq!(w.branch, Branch::DomMinusS);
    assert_constraints_equivalent(
        &run.st.model,
        &[
            "loc(r) = 4 -> loc(p) = 4",
            "loc(p) = 4 -> loc(r) = 4 | loc(r) = 1 & loaded = 1",
            "loaded = 1 -> loc(r) = loc(p) | loc(r) = 1 & loc(p) = 4",
        ],
    );

    let rest: Vec<StepRecord> = (0..3).map(|_| run.step()).collect();
    assert_eq!(
        rest.iter().map(|r| r.action.as_str()).collect::<Vec<_>>(),
        ["E", "L", "L"]
    );
    let last = rest.last().unwrap();
    assert_eq!(last.branch, Branch::Extend);
    assert_eq!(last.failing, vec!["W".to_string()]);
    assert_eq!(last.extended.len(), 1);
    assert_eq!(last.extended[0].domain, "nr_of_carried_objects");
    assert_eq!(domain_size(&run.st.model, "nr_of_carried_objects"), 3);
    assert_eq!(domain_size(&run.st.model, "room"), 5);
    assert_eq!(last.chosen, "442");
    assert!(started.elapsed() < Duration::from_secs(1), "took {:?}", started.elapsed());
}

