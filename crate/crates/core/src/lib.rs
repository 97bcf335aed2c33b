pub mod domain;
pub mod environment;
pub mod error;
pub mod formula;
pub mod harness;
pub mod learner;
pub mod perception;
pub mod space;

pub use domain::{ActionRule, Assignment, Domain, DomainModel, VariableSpec};
pub use environment::{Environment, RpcFlat, RpcFlatConfig};
pub use error::{Error, Result};
pub use formula::{Formula, Literal, VarId};
pub use learner::{alp_step, run, LearnerConfig, LearnerState, StepRecord};
pub use perception::{Pdf, PerceptionModel, PerceptionVariable};
