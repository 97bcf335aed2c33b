//! TOML model files: domains, variables, constraints, rules, the perception
//! tables and the initial state.
//!
//! ```toml
//! actions = ["E", "W"]
//! initial = [0, 1, 0]
//! constraints = ["loaded = 1 -> loc(r) = loc(p)"]
//! rules = ["loc(r) = 0 => E : loc(r) = 1"]
//!
//! [[domains]]
//! name = "room"
//! size = 4
//!
//! [[variables]]
//! name = "loc(r)"
//! domain = "room"
//!
//! [[perception]]
//! name = "X"
//! family = "gaussian"
//! depends = ["loc(r)"]
//! init = { family = "gaussian", sigma = 0.25 }
//! table = [{ key = [0], params = [0.5, 0.25] }]
//! ```
//!
//! Formulas use `=`, `!=`, `!`, `&`, `|`, `->` and parentheses, with the
//! usual precedence; variable names may contain parentheses and underscores.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Assignment, Domain, DomainModel, VariableSpec};
use crate::error::{Error, Result};
use crate::perception::{FamilyKind, Initializer, Pdf, PerceptionModel, PerceptionVariable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub actions: Vec<String>,
    /// Initial state; all zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<u32>>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub rules: Vec<String>,
    pub domains: Vec<Domain>,
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub perception: Vec<SensorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorEntry {
    pub name: String,
    pub family: FamilyKind,
    pub depends: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Initializer>,
    #[serde(default)]
    pub table: Vec<TableEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub key: Vec<u32>,
    pub params: [f64; 2],
}

/// A parsed model: the domain, its perception function and the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub model: DomainModel,
    pub perception: PerceptionModel,
    pub initial: Assignment,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            column: e.span().map_or(0, |s| s.start),
            message: e.message().to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model files always serialize")
    }

    pub fn load(&self) -> Result<LoadedModel> {
        let mut model = DomainModel::new(self.domains.clone(), self.variables.clone(), self.actions.clone())?;
        model.constraints = self
            .constraints
            .iter()
            .map(|c| model.parse_formula(c))
            .collect::<Result<_>>()?;
        model.rules = self.rules.iter().map(|r| model.parse_rule(r)).collect::<Result<_>>()?;
        model.validate()?;
        let perception = PerceptionModel::new(
            self.perception
                .iter()
                .map(|e| e.load(&model))
                .collect::<Result<_>>()?,
        );
        perception.validate(&model)?;
        let initial = match &self.initial {
            Some(v) => Assignment::new(v.clone()),
            None => Assignment::new(vec![0; model.variables.len()]),
        };
        if initial.values().len() != model.variables.len() {
            return Err(Error::InvalidModel(format!(
                "initial state has {} values for {} variables",
                initial.values().len(),
                model.variables.len()
            )));
        }
        Ok(LoadedModel {
            model,
            perception,
            initial,
        })
    }

    /// Everything reset to what is known before any observation: domains
    /// `{0}`, no constraints, no rules, each sensor's single conditional
    /// set by its initializer at the reading 0.
    pub fn load_from_scratch(&self) -> Result<LoadedModel> {
        let names: Vec<String> = self.domains.iter().map(|d| d.name.clone()).collect();
        let model = DomainModel::from_scratch(&names, self.variables.clone(), self.actions.clone())?;
        let mut perception = PerceptionModel::new(
            self.perception
                .iter()
                .map(|e| {
                    let mut e = e.clone();
                    e.table.clear();
                    e.load(&model)
                })
                .collect::<Result<_>>()?,
        );
        let inits: Vec<Initializer> = perception.variables.iter().map(|v| v.init).collect();
        perception.fill_missing(&model, |i| crate::perception::init_pdf(&inits[i], 0.0));
        let initial = Assignment::new(vec![0; model.variables.len()]);
        Ok(LoadedModel {
            model,
            perception,
            initial,
        })
    }

    pub fn from_model(model: &DomainModel, perception: &PerceptionModel, initial: &Assignment) -> Self {
        Self {
            actions: model.actions.clone(),
            initial: Some(initial.values().to_vec()),
            constraints: model.constraints.iter().map(|c| model.show_formula(c)).collect(),
            rules: model.rules.iter().map(|r| model.show_rule(r)).collect(),
            domains: model.domains.clone(),
            variables: model.variables.clone(),
            perception: perception
                .variables
                .iter()
                .map(|v| SensorEntry {
                    name: v.name.clone(),
                    family: v.family,
                    depends: v.depends.iter().map(|&d| model.variables[d].name.clone()).collect(),
                    init: Some(v.init),
                    table: v
                        .table
                        .iter()
                        .map(|(key, pdf)| TableEntry {
                            key: key.clone(),
                            params: pdf.params(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl SensorEntry {
    fn load(&self, model: &DomainModel) -> Result<PerceptionVariable> {
        let depends = self
            .depends
            .iter()
            .map(|n| model.var_index(n).ok_or_else(|| Error::UnknownVariable(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        let init = self.init.unwrap_or_else(|| Initializer::default_for(self.family));
        if init.kind() != self.family {
            return Err(Error::InvalidModel(format!(
                "sensor `{}` is {} but its initializer is {}",
                self.name,
                self.family.name(),
                init.kind().name()
            )));
        }
        let mut v = PerceptionVariable::new(self.name.clone(), depends, init);
        v.family = self.family;
        for e in &self.table {
            let pdf = Pdf::from_params(self.family, &e.params)?;
            if v.table.insert(e.key.clone(), pdf).is_some() {
                return Err(Error::InvalidModel(format!(
                    "sensor `{}` lists key {:?} twice",
                    self.name, e.key
                )));
            }
        }
        Ok(v)
    }
}

/// Reads and loads a model file, optionally from scratch.
pub fn load_model(path: &Path, from_scratch: bool) -> Result<LoadedModel> {
    let file = ModelFile::read(path)?;
    if from_scratch {
        file.load_from_scratch()
    } else {
        file.load()
    }
}

/// Writes a model in the format [`load_model`] reads.
pub fn write_model(path: &Path, model: &DomainModel, perception: &PerceptionModel, initial: &Assignment) -> Result<()> {
    std::fs::write(path, ModelFile::from_model(model, perception, initial).to_toml())?;
    Ok(())
}

/// Human-readable summary of a loaded model.
pub fn describe(m: &LoadedModel) -> String {
    use std::fmt::Write;
    let model = &m.model;
    let mut out = String::new();
    writeln!(out, "domains:").unwrap();
    for d in &model.domains {
        writeln!(out, "  {} = {{0..{}}}", d.name, d.size - 1).unwrap();
    }
    writeln!(out, "variables:").unwrap();
    for v in &model.variables {
        writeln!(out, "  {} : {}", v.name, v.domain).unwrap();
    }
    writeln!(out, "initial: {}", m.initial).unwrap();
    let states = model.enumerate_states().len();
    writeln!(out, "states: {states} of {} assignments", model.space().len()).unwrap();
    writeln!(out, "constraints:").unwrap();
    for c in &model.constraints {
        writeln!(out, "  {}", model.show_formula(c)).unwrap();
    }
    writeln!(out, "rules:").unwrap();
    for r in &model.rules {
        writeln!(out, "  {}", model.show_rule(r)).unwrap();
    }
    writeln!(out, "perception:").unwrap();
    for v in &m.perception.variables {
        let deps: Vec<&str> = v.depends.iter().map(|&d| model.variables[d].name.as_str()).collect();
        writeln!(out, "  {} | {} ({})", v.name, deps.join(", "), v.family.name()).unwrap();
        for (key, pdf) in &v.table {
            let [a, b] = pdf.params();
            writeln!(out, "    {key:?}: ({a:.4}, {b:.4})").unwrap();
        }
    }
    out
}
