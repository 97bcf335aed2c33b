//! Line-delimited JSON traces: a header, one line per step, a footer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::RpcFlatState;
use crate::error::{Error, Result};
use crate::learner::StepRecord;

pub const SCHEMA: &str = "alp-trace";
pub const VERSION: u32 = 1;

/// The world as it really was after a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truth {
    pub robot: u8,
    pub pack: u8,
    pub loaded: bool,
    pub carried: u32,
}

impl Truth {
    pub fn of(s: &RpcFlatState) -> Self {
        let a = s.abstraction();
        Self {
            robot: a.robot,
            pack: a.pack,
            loaded: a.loaded,
            carried: s.carried_objects(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub record: StepRecord,
    pub truth: Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header { schema: String, version: u32 },
    Step(TraceStep),
    Footer { steps: usize },
}

pub fn render_trace(steps: &[TraceStep]) -> String {
    let mut out = String::new();
    let mut push = |line: &Line| {
        out.push_str(&serde_json::to_string(line).expect("trace lines always serialize"));
        out.push('\n');
    };
    push(&Line::Header {
        schema: SCHEMA.into(),
        version: VERSION,
    });
    for s in steps {
        push(&Line::Step(s.clone()));
    }
    push(&Line::Footer { steps: steps.len() });
    out
}

/// Step lines exactly as [`render_trace`] writes them.
pub fn render_step(step: &TraceStep) -> String {
    serde_json::to_string(&Line::Step(step.clone())).expect("trace lines always serialize")
}

/// Parses a trace, rejecting foreign schemas, other versions and files
/// without a matching footer.
pub fn parse_trace(text: &str) -> Result<Vec<TraceStep>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let parse = |n: usize, l: &str| -> Result<Line> {
        serde_json::from_str(l).map_err(|e| Error::Schema(format!("line {}: {e}", n + 1)))
    };
    match lines.next() {
        Some((n, l)) => match parse(n, l)? {
            Line::Header { schema, version } if schema == SCHEMA && version == VERSION => {}
            Line::Header { schema, version } => {
                return Err(Error::Schema(format!(
                    "unsupported trace {schema} v{version}, expected {SCHEMA} v{VERSION}"
                )))
            }
            _ => return Err(Error::Schema("trace does not start with a header".into())),
        },
        None => return Err(Error::Schema("empty trace".into())),
    }
    let mut steps = Vec::new();
    for (n, l) in lines {
        match parse(n, l)? {
            Line::Step(s) => steps.push(s),
            Line::Footer { steps: count } if count == steps.len() => return Ok(steps),
            Line::Footer { steps: count } => {
                return Err(Error::Schema(format!(
                    "footer announces {count} steps but {} were recorded",
                    steps.len()
                )))
            }
            Line::Header { .. } => return Err(Error::Schema(format!("line {}: second header", n + 1))),
        }
    }
    Err(Error::Schema(format!("truncated trace: no footer after {} steps", steps.len())))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceStep>> {
    parse_trace(&std::fs::read_to_string(path)?)
}
