//! Factorized perception functions: one conditional density per continuous
//! sensor, indexed by the values of the state variables it depends on.

pub mod mle;
pub mod pdf;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use mle::{blend_update, fit_mle};
pub use pdf::{pdf_eval, pdf_mode_density, FamilyKind, Pdf};

use crate::domain::{Assignment, DomainModel};
use crate::error::{Error, Result};
use crate::formula::VarId;
use crate::space::AssignmentSpace;

/// One sensor reading per perception variable.
pub type Observation = Vec<f64>;

/// Produces a density for a value seen under a dependency assignment that has
/// no conditional yet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Initializer {
    /// `N(x, sigma)`.
    Gaussian { sigma: f64 },
    /// Beta with mode `x` and `alpha + beta = concentration`.
    Beta { concentration: f64 },
    /// Gamma with mode `x` and the given scale.
    Gamma { scale: f64 },
}

impl Initializer {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Initializer::Gaussian { .. } => FamilyKind::Gaussian,
            Initializer::Beta { .. } => FamilyKind::Beta,
            Initializer::Gamma { .. } => FamilyKind::Gamma,
        }
    }

    pub fn default_for(kind: FamilyKind) -> Self {
        match kind {
            FamilyKind::Gaussian => Initializer::Gaussian { sigma: 0.25 },
            FamilyKind::Beta => Initializer::Beta { concentration: 6.0 },
            FamilyKind::Gamma => Initializer::Gamma { scale: 0.01 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Initializer::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            Initializer::Beta { concentration } => concentration > 2.0 && concentration.is_finite(),
            Initializer::Gamma { scale } => scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter {
                family: self.kind().name().to_string(),
                reason: format!("invalid initializer {self:?}"),
            })
        }
    }
}

/// The density the initializer assigns to a fresh observation `x`.
pub fn init_pdf(init: &Initializer, x: f64) -> Pdf {
    match *init {
        Initializer::Gaussian { sigma } => Pdf::Gaussian { mu: x, sigma },
        Initializer::Beta { concentration } => {
            let m = x.clamp(0.0, 1.0);
            let spread = concentration - 2.0;
            Pdf::Beta {
                alpha: 1.0 + spread * m,
                beta: 1.0 + spread * (1.0 - m),
            }
        }
        Initializer::Gamma { scale } => Pdf::Gamma {
            shape: 1.0 + x.max(0.0) / scale,
            scale,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionVariable {
    pub name: String,
    pub family: FamilyKind,
    pub depends: Vec<VarId>,
    pub init: Initializer,
    pub table: BTreeMap<Vec<u32>, Pdf>,
}

impl PerceptionVariable {
    pub fn new(name: impl Into<String>, depends: Vec<VarId>, init: Initializer) -> Self {
        Self {
            name: name.into(),
            family: init.kind(),
            depends,
            init,
            table: BTreeMap::new(),
        }
    }

    pub fn conditional(&self, s: &Assignment) -> Result<&Pdf> {
        let key = s.project(&self.depends);
        self.table.get(&key).ok_or(Error::UndefinedConditional {
            variable: self.name.clone(),
            key,
        })
    }

    /// Every dependency assignment over the model's current domains.
    pub fn key_space(&self, m: &DomainModel) -> AssignmentSpace {
        AssignmentSpace::new(self.depends.iter().map(|&v| m.domain_size(v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerceptionModel {
    pub variables: Vec<PerceptionVariable>,
}

/// A conditional whose parameters changed, as `(variable, key)`.
pub type Touched = (usize, Vec<u32>);

impl PerceptionModel {
    pub fn new(variables: Vec<PerceptionVariable>) -> Self {
        Self { variables }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn validate(&self, m: &DomainModel) -> Result<()> {
        for pv in &self.variables {
            pv.init.validate()?;
            if pv.init.kind() != pv.family {
                return Err(Error::InvalidModel(format!(
                    "perception variable `{}` mixes families",
                    pv.name
                )));
            }
            for &v in &pv.depends {
                if v >= m.variables.len() {
                    return Err(Error::InvalidModel(format!(
                        "perception variable `{}` depends on unknown variable #{v}",
                        pv.name
                    )));
                }
            }
            for (key, p) in &pv.table {
                if key.len() != pv.depends.len() {
                    return Err(Error::InvalidModel(format!(
                        "perception variable `{}` has a key of the wrong length",
                        pv.name
                    )));
                }
                for (&v, &c) in pv.depends.iter().zip(key) {
                    if c >= m.domain_size(v) {
                        return Err(Error::OutOfDomain {
                            variable: m.variables[v].name.clone(),
                            value: c,
                            size: m.domain_size(v),
                        });
                    }
                }
                if p.kind() != pv.family {
                    return Err(Error::InvalidModel(format!(
                        "perception variable `{}` mixes families",
                        pv.name
                    )));
                }
                p.validate()?;
            }
        }
        Ok(())
    }

    /// True when every variable has a conditional for every dependency assignment.
    pub fn is_total(&self, m: &DomainModel) -> bool {
        self.variables.iter().all(|pv| {
            let space = pv.key_space(m);
            pv.table.len() == space.len() && space.iter().all(|k| pv.table.contains_key(&k))
        })
    }

    /// Fills every missing conditional with `default(variable index)`.
    pub fn fill_missing(&mut self, m: &DomainModel, default: impl Fn(usize) -> Pdf) {
        for (i, pv) in self.variables.iter_mut().enumerate() {
            for key in pv.key_space(m).iter() {
                pv.table.entry(key).or_insert_with(|| default(i));
            }
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.variables.len() {
            return Err(Error::InvalidModel(format!(
                "observation has {} values, expected {}",
                x.len(),
                self.variables.len()
            )));
        }
        Ok(())
    }

    pub fn log_likelihood(&self, x: &[f64], s: &Assignment) -> Result<f64> {
        self.check_len(x)?;
        let mut acc = 0.0;
        for (pv, &xi) in self.variables.iter().zip(x) {
            acc += pv.conditional(s)?.ln_density(xi);
        }
        Ok(acc)
    }

    /// `f(x, s)`: product of the per-sensor conditional densities.
    pub fn likelihood(&self, x: &[f64], s: &Assignment) -> Result<f64> {
        self.check_len(x)?;
        let mut acc = 1.0;
        for (pv, &xi) in self.variables.iter().zip(x) {
            acc *= pv.conditional(s)?.density(xi);
        }
        Ok(acc)
    }

    /// Indices of sensors whose reading under `s` is below `(1 - eps)` times
    /// the mode density of the conditional selected by `s`.
    pub fn failing_sensors(&self, x: &[f64], s: &Assignment, eps: f64) -> Result<Vec<usize>> {
        self.check_len(x)?;
        let floor = (1.0 - eps).max(0.0).ln();
        let mut out = Vec::new();
        for (i, (pv, &xi)) in self.variables.iter().zip(x).enumerate() {
            let p = pv.conditional(s)?;
            let ln = p.ln_density(xi);
            if ln == f64::NEG_INFINITY || ln < floor + p.ln_mode_density() {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn passes(&self, x: &[f64], s: &Assignment, eps: f64) -> Result<bool> {
        Ok(self.failing_sensors(x, s, eps)?.is_empty())
    }

    pub fn above_threshold(&self, x: &[f64], candidates: &[Assignment], eps: f64) -> Result<Vec<Assignment>> {
        let mut out = Vec::new();
        for s in candidates {
            if self.passes(x, s, eps)? {
                out.push(s.clone());
            }
        }
        Ok(out)
    }

    /// Refits the conditionals selected by `s` from every observation whose
    /// state agrees with `s` on the dependency variables, and blends the fit
    /// into the current parameters with weight `beta` on the old ones.
    pub fn update(&mut self, history: &[(Assignment, Observation)], s: &Assignment, beta: f64) -> Result<Vec<Touched>> {
        let mut touched = Vec::new();
        for (i, pv) in self.variables.iter_mut().enumerate() {
            let key = s.project(&pv.depends);
            let samples: Vec<f64> = history
                .iter()
                .filter(|(t, _)| pv.depends.iter().zip(&key).all(|(&v, &c)| t.get(v) == c))
                .map(|(_, x)| x[i])
                .collect();
            if samples.is_empty() {
                continue;
            }
            let old = *pv.table.get(&key).ok_or_else(|| Error::UndefinedConditional {
                variable: pv.name.clone(),
                key: key.clone(),
            })?;
            let fitted = fit_mle(pv.family, &samples)?;
            let new = blend_update(&old, &fitted, beta)?;
            if new != old {
                pv.table.insert(key.clone(), new);
                touched.push((i, key));
            }
        }
        Ok(touched)
    }
}

/// Functional form of [`PerceptionModel::update`].
pub fn update_perception(
    f: &PerceptionModel,
    history: &[(Assignment, Observation)],
    s: &Assignment,
    beta: f64,
) -> Result<PerceptionModel> {
    let mut out = f.clone();
    out.update(history, s, beta)?;
    Ok(out)
}

/// Builds a table entry map keyed by dependency tuples in deterministic order.
pub fn table_from(entries: impl IntoIterator<Item = (Vec<u32>, Pdf)>) -> BTreeMap<Vec<u32>, Pdf> {
    entries.into_iter().collect()
}
