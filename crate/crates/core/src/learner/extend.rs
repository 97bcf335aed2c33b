//! Growing the domains and the perception function when no known assignment
//! explains an observation.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hitting_set::minimal_hitting_set;
use super::pick;
use crate::domain::{Assignment, DomainModel};
use crate::error::{Error, Result};
use crate::formula::VarId;
use crate::perception::{init_pdf, PerceptionModel};

/// A value appended to a domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainExtension {
    pub domain: String,
    pub value: u32,
}

#[derive(Debug, Clone)]
pub struct ExtendDomOutcome {
    pub model: DomainModel,
    pub extended: Vec<DomainExtension>,
    /// The most likely assignment before extension.
    pub best: Assignment,
    /// Sensors below threshold under `best`.
    pub failing: Vec<usize>,
}

/// Picks the most likely assignment over all current assignments, collects
/// the sensors it fails to explain and appends one value to each domain of a
/// minimum hitting set of their dependency domains.
pub fn extend_dom<R: Rng>(
    m: &DomainModel,
    f: &PerceptionModel,
    x: &[f64],
    eps: f64,
    rng: &mut R,
) -> Result<ExtendDomOutcome> {
    let all: Vec<Assignment> = m.space().iter().map(Assignment).collect();
    let scores = all
        .iter()
        .map(|s| f.log_likelihood(x, s))
        .collect::<Result<Vec<_>>>()?;
    let best = all[pick(&scores, rng)].clone();
    let failing = f.failing_sensors(x, &best, eps)?;
    if failing.is_empty() {
        return Err(Error::Internal(format!(
            "domain extension requested but {best} explains every sensor"
        )));
    }
    let family: Vec<BTreeSet<String>> = failing
        .iter()
        .map(|&i| {
            f.variables[i]
                .depends
                .iter()
                .map(|&v| m.variables[v].domain.clone())
                .collect()
        })
        .collect();
    let hit = minimal_hitting_set(&family).ok_or_else(|| {
        Error::Internal("a failing sensor depends on no state variable".into())
    })?;
    let mut model = m.clone();
    let mut extended = Vec::new();
    for domain in hit {
        let value = model.extend_domain(&domain)?;
        extended.push(DomainExtension { domain, value });
    }
    Ok(ExtendDomOutcome {
        model,
        extended,
        best,
        failing,
    })
}

/// `(variable, new value)` for every variable whose domain was extended.
pub fn new_values(m: &DomainModel, extended: &[DomainExtension]) -> Vec<(VarId, u32)> {
    let mut out = Vec::new();
    for e in extended {
        for v in m.vars_of_domain(&e.domain) {
            out.push((v, e.value));
        }
    }
    out.sort();
    out
}

/// Defines the conditionals that the extension left undefined.
///
/// A missing entry copies the defined entry, agreeing with it on every
/// pre-extension component, that best explains the current reading, when
/// that reading is at least `(1 - eps)` of the initializer's peak; otherwise
/// the initializer's density for the reading is installed. When a sensor
/// depends on several variables over one domain, candidates are first
/// restricted to entries with the same pattern of equal components, and
/// such a candidate is copied whenever one exists.
pub fn extend_f(
    m: &DomainModel,
    f: &PerceptionModel,
    x: &[f64],
    eps: f64,
    extended: &[DomainExtension],
) -> Result<PerceptionModel> {
    let mut out = f.clone();
    let is_old = |var: VarId, value: u32| {
        let domain = &m.variables[var].domain;
        !extended.iter().any(|e| &e.domain == domain && value >= e.value)
    };
    let floor = (1.0 - eps).max(0.0).ln();
    for (i, pv) in f.variables.iter().enumerate() {
        let shared: Vec<(usize, usize)> = pairs_sharing_domain(m, &pv.depends);
        let pattern = |key: &[u32]| -> Vec<bool> { shared.iter().map(|&(a, b)| key[a] == key[b]).collect() };
        for key in pv.key_space(m).iter() {
            if pv.table.contains_key(&key) {
                continue;
            }
            let agreeing: Vec<(&Vec<u32>, f64)> = pv
                .table
                .iter()
                .filter(|(k, _)| {
                    pv.depends
                        .iter()
                        .enumerate()
                        .all(|(j, &v)| !is_old(v, key[j]) || k[j] == key[j])
                })
                .map(|(k, p)| (k, p.ln_density(x[i])))
                .collect();
            let best_of = |want: Option<&[bool]>| -> Option<(Vec<u32>, f64)> {
                let mut best: Option<(&Vec<u32>, f64)> = None;
                for &(k, score) in &agreeing {
                    if want.is_some_and(|w| pattern(k) != w) {
                        continue;
                    }
                    if best.is_none_or(|(_, b)| score > b) {
                        best = Some((k, score));
                    }
                }
                best.map(|(k, s)| (k.clone(), s))
            };
            let chosen = if shared.is_empty() {
                None
            } else {
                let want = pattern(&key);
                best_of(Some(&want))
            };
            let pdf = match chosen {
                Some((k, _)) => pv.table[&k],
                None => {
                    let fresh = init_pdf(&pv.init, x[i]);
                    match best_of(None) {
                        Some((k, score)) if score > f64::NEG_INFINITY && score >= floor + fresh.ln_mode_density() => {
                            pv.table[&k]
                        }
                        _ => fresh,
                    }
                }
            };
            out.variables[i].table.insert(key, pdf);
        }
    }
    Ok(out)
}

fn pairs_sharing_domain(m: &DomainModel, depends: &[VarId]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..depends.len() {
        for b in a + 1..depends.len() {
            if m.variables[depends[a]].domain == m.variables[depends[b]].domain {
                out.push((a, b));
            }
        }
    }
    out
}
