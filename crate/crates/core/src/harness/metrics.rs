use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::trace::{TraceStep, Truth};
use crate::domain::{Assignment, DomainModel};
use crate::environment::{abstract_step, AbstractRpc};
use crate::learner::Transition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub steps: usize,
    pub states_learned: usize,
    pub assignments_total: usize,
    pub domain_sizes: BTreeMap<String, u32>,
    /// Share of visited (state, action) pairs whose learned successor is the
    /// true one; absent when the model lacks the robot/pack variables.
    pub transition_agreement: Option<f64>,
    pub mean_observation_loglik: f64,
    pub constraint_count: usize,
    pub rule_count: usize,
}

impl RunMetrics {
    pub fn compute(model: &DomainModel, steps: &[TraceStep], transitions: &[Transition], initial: (&Assignment, Truth)) -> Self {
        let loglik = if steps.is_empty() {
            0.0
        } else {
            steps.iter().map(|s| s.record.loglik).sum::<f64>() / steps.len() as f64
        };
        let mut beliefs = vec![(initial.0.clone(), initial.1)];
        for (t, s) in transitions.iter().zip(steps) {
            beliefs.push((t.to.clone(), s.truth));
        }
        Self {
            steps: steps.len(),
            states_learned: model.enumerate_states().len(),
            assignments_total: model.space().len(),
            domain_sizes: model.domains.iter().map(|d| (d.name.clone(), d.size)).collect(),
            transition_agreement: transition_agreement(model, transitions, &beliefs),
            mean_observation_loglik: loglik,
            constraint_count: model.constraints.len(),
            rule_count: model.rules.len(),
        }
    }
}

/// Reads learned values as physical rooms and carry states by majority
/// vote over the steps where they were believed.
struct Grounding {
    robot: usize,
    pack: usize,
    loaded: usize,
    rooms: BTreeMap<u32, u8>,
    loads: BTreeMap<u32, bool>,
}

impl Grounding {
    fn new(model: &DomainModel, beliefs: &[(Assignment, Truth)]) -> Option<Self> {
        let robot = model.var_index("loc(r)")?;
        let pack = model.var_index("loc(p)")?;
        let loaded = model.var_index("loaded")?;
        let mut room_votes: BTreeMap<u32, BTreeMap<u8, usize>> = BTreeMap::new();
        let mut pack_votes: BTreeMap<u32, BTreeMap<u8, usize>> = BTreeMap::new();
        let mut load_votes: BTreeMap<u32, BTreeMap<bool, usize>> = BTreeMap::new();
        for (s, t) in beliefs {
            *room_votes.entry(s.get(robot)).or_default().entry(t.robot).or_default() += 1;
            *pack_votes.entry(s.get(pack)).or_default().entry(t.pack).or_default() += 1;
            *load_votes.entry(s.get(loaded)).or_default().entry(t.loaded).or_default() += 1;
        }
        // The robot's position is sensed directly, the pack's only when the
        // robot is with it: pack beliefs name a room only if the robot never
        // believed itself there.
        for (v, votes) in pack_votes {
            room_votes.entry(v).or_insert(votes);
        }
        fn winner<K: Copy + Ord>(votes: &BTreeMap<K, usize>) -> K {
            let best = votes.values().max().copied().unwrap_or(0);
            *votes.iter().find(|(_, &n)| n == best).expect("non-empty vote").0
        }
        Some(Self {
            robot,
            pack,
            loaded,
            rooms: room_votes.iter().map(|(&v, votes)| (v, winner(votes))).collect(),
            loads: load_votes.iter().map(|(&v, votes)| (v, winner(votes))).collect(),
        })
    }

    fn ground(&self, s: &Assignment) -> Option<AbstractRpc> {
        Some(AbstractRpc {
            robot: *self.rooms.get(&s.get(self.robot))?,
            pack: *self.rooms.get(&s.get(self.pack))?,
            loaded: *self.loads.get(&s.get(self.loaded))?,
        })
    }
}

/// Fraction of distinct visited `(s, a)` whose learned successor, read
/// physically, is what the true abstract dynamics give from `s` read
/// physically.
pub fn transition_agreement(
    model: &DomainModel,
    transitions: &[Transition],
    beliefs: &[(Assignment, Truth)],
) -> Option<f64> {
    let g = Grounding::new(model, beliefs)?;
    let pairs: BTreeSet<(&Assignment, &str)> = transitions.iter().map(|t| (&t.from, t.action.as_str())).collect();
    if pairs.is_empty() {
        return Some(1.0);
    }
    let good = pairs
        .iter()
        .filter(|&&(s, a)| {
            let Ok(next) = model.apply_action(s, a) else { return false };
            match (g.ground(s), g.ground(&next)) {
                (Some(from), Some(to)) => abstract_step(from, a) == to,
                _ => false,
            }
        })
        .count();
    Some(good as f64 / pairs.len() as f64)
}

/// Per-step scalars, one row per step after the header.
pub fn steps_csv(steps: &[TraceStep]) -> String {
    let mut out = String::from("iter,action,branch,candidates,states,assignments,constraints,rules,loglik\n");
    for s in steps {
        let r = &s.record;
        out.push_str(&format!(
            "{},{},{:?},{},{},{},{},{},{}\n",
            r.iter, r.action, r.branch, r.candidates, r.states, r.assignments, r.constraints, r.rules_after, r.loglik
        ));
    }
    out
}
