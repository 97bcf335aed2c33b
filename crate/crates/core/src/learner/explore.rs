use rand::Rng;
use serde::{Deserialize, Serialize};

use super::transition::Transition;
use crate::domain::{Assignment, DomainModel};

/// How the learner chooses its next action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExplorePolicy {
    /// Uniform over all actions.
    Random,
    /// An action least often tried from the current state; ties uniform.
    Novelty,
    /// A fixed action list; the run ends when it is used up.
    Scripted { actions: Vec<String> },
}

/// The next action, or `None` once a scripted policy is exhausted.
pub fn explore<R: Rng>(
    m: &DomainModel,
    s0: &Assignment,
    history: &[Transition],
    step: usize,
    policy: &ExplorePolicy,
    rng: &mut R,
) -> Option<String> {
    if m.actions.is_empty() {
        return None;
    }
    match policy {
        ExplorePolicy::Random => Some(m.actions[rng.random_range(0..m.actions.len())].clone()),
        ExplorePolicy::Novelty => {
            let counts: Vec<usize> = m
                .actions
                .iter()
                .map(|a| history.iter().filter(|t| &t.from == s0 && &t.action == a).count())
                .collect();
            let least = *counts.iter().min()?;
            let ties: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == least).collect();
            let i = if ties.len() == 1 { ties[0] } else { ties[rng.random_range(0..ties.len())] };
            Some(m.actions[i].clone())
        }
        ExplorePolicy::Scripted { actions } => actions.get(step).cloned(),
    }
}
