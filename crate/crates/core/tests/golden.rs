mod common;

use common::scenarios::*;
use alp_core::learner::Branch;
use alp_core::StepRecord;

#[test]
fn new_room_discovery() {
    check_new_room();
}

#[test]
fn exogenous_events() {
    check_exogenous();
}

#[test]
fn worked_runs_are_seed_stable_after_the_first_step() {
    for seed in 0..8 {
        let mut cfg = fixture("exogenous.toml");
        cfg.learner.seed = seed;
        let mut run = Stepper::new(cfg);
        let recs: Vec<StepRecord> = (0..7).map(|_| run.step()).collect();
        assert!(["100", "120", "130"].contains(&recs[0].chosen.as_str()));
        assert_eq!(recs[1].branch, Branch::Extend, "seed {seed}");
        assert_eq!(domain_size(&run.st.model, "nr_of_carried_objects"), 3, "seed {seed}");
    }
}
