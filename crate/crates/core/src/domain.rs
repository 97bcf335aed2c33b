//! Discrete planning domains: state variables over shared finite domains,
//! constraints carving the state set out of all total assignments, and
//! action rules defining the transition function.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{lex, parse_formula, Formula, Parser, Tok, VarId};
use crate::space::{AssignmentSpace, BitSet};

/// A shared finite domain `{0, 1, ..., size-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub size: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub domain: String,
}

/// A total assignment, one value per state variable in model order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<u32>);

impl Assignment {
    pub fn new(values: Vec<u32>) -> Self {
        Assignment(values)
    }

    /// Parses the compact digit form used throughout the examples, e.g. `"010"`.
    pub fn from_digits(digits: &str) -> Option<Self> {
        digits
            .chars()
            .map(|c| c.to_digit(10))
            .collect::<Option<Vec<_>>>()
            .map(Assignment)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, var: VarId) -> u32 {
        self.0[var]
    }

    /// Projection onto a list of variables.
    pub fn project(&self, vars: &[VarId]) -> Vec<u32> {
        vars.iter().map(|&v| self.0[v]).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&v| v < 10) {
            for v in &self.0 {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
            f.write_str(&parts.join("."))
        }
    }
}

/// `premise =>action effect`: when the premise holds in the current state,
/// executing `action` sets every variable of the effect.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionRule {
    pub action: String,
    pub premise: Formula,
    /// Partial assignment sorted by variable, each variable at most once.
    pub effect: Vec<(VarId, u32)>,
}

impl ActionRule {
    pub fn new(action: impl Into<String>, premise: Formula, mut effect: Vec<(VarId, u32)>) -> Result<Self> {
        effect.sort();
        if effect.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidModel(
                "rule effect binds a variable twice".into(),
            ));
        }
        Ok(Self {
            action: action.into(),
            premise,
            effect,
        })
    }

    pub fn effect_holds(&self, s: &[u32]) -> bool {
        self.effect.iter().all(|&(v, c)| s[v] == c)
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> RuleDisplay<'a> {
        RuleDisplay { rule: self, names }
    }
}

pub struct RuleDisplay<'a> {
    rule: &'a ActionRule,
    names: &'a [String],
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} => {} : ",
            self.rule.premise.display(self.names),
            self.rule.action
        )?;
        for (i, (v, c)) in self.rule.effect.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} = {c}", self.names.get(*v).map(String::as_str).unwrap_or("?"))?;
        }
        Ok(())
    }
}

/// A determinism violation: two rules of one action whose premises hold
/// together (witnessed by `witness`) and whose effects disagree on `variable`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub action: String,
    pub first: usize,
    pub second: usize,
    pub witness: Assignment,
    pub variable: VarId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainModel {
    pub domains: Vec<Domain>,
    pub variables: Vec<VariableSpec>,
    pub constraints: Vec<Formula>,
    pub actions: Vec<String>,
    pub rules: Vec<ActionRule>,
}

impl DomainModel {
    pub fn new(domains: Vec<Domain>, variables: Vec<VariableSpec>, actions: Vec<String>) -> Result<Self> {
        let m = Self {
            domains,
            variables,
            constraints: Vec::new(),
            actions,
            rules: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    /// The model ALP starts from when it has no prior knowledge: every domain
    /// is `{0}`, no constraints and no rules.
    pub fn from_scratch(domains: &[String], variables: Vec<VariableSpec>, actions: Vec<String>) -> Result<Self> {
        let domains = domains
            .iter()
            .map(|name| Domain {
                name: name.clone(),
                size: 1,
            })
            .collect();
        Self::new(domains, variables, actions)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for d in &self.domains {
            if d.size == 0 {
                return Err(Error::InvalidModel(format!("domain `{}` is empty", d.name)));
            }
            if !seen.insert(d.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate domain `{}`", d.name)));
            }
        }
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !self.domains.iter().any(|d| d.name == v.domain) {
                return Err(Error::UnknownDomain(v.domain.clone()));
            }
            if !seen.insert(v.name.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate variable `{}`", v.name)));
            }
        }
        let n = self.variables.len();
        let check_formula = |f: &Formula| -> Result<()> {
            for v in f.vars() {
                if v >= n {
                    return Err(Error::InvalidModel(format!("formula references variable #{v}")));
                }
            }
            self.check_constants(f)
        };
        for c in &self.constraints {
            check_formula(c)?;
        }
        for r in &self.rules {
            if !self.actions.contains(&r.action) {
                return Err(Error::UnknownAction(r.action.clone()));
            }
            check_formula(&r.premise)?;
            for &(v, c) in &r.effect {
                if v >= n {
                    return Err(Error::InvalidModel(format!("effect references variable #{v}")));
                }
                self.check_value(v, c)?;
            }
        }
        Ok(())
    }

    fn check_constants(&self, f: &Formula) -> Result<()> {
        match f {
            Formula::Eq(v, c) => self.check_value(*v, *c),
            Formula::VarEq(v, w) => {
                if self.variables[*v].domain != self.variables[*w].domain {
                    return Err(Error::InvalidModel(format!(
                        "`{} = {}` compares variables over different domains",
                        self.variables[*v].name, self.variables[*w].name
                    )));
                }
                Ok(())
            }
            Formula::Not(g) => self.check_constants(g),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().try_for_each(|g| self.check_constants(g)),
            Formula::Const(_) => Ok(()),
        }
    }

    fn check_value(&self, var: VarId, value: u32) -> Result<()> {
        let size = self.domain_size(var);
        if value >= size {
            return Err(Error::OutOfDomain {
                variable: self.variables[var].name.clone(),
                value,
                size,
            });
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.domains.iter().position(|d| d.name == name)
    }

    pub fn domain_of(&self, var: VarId) -> &Domain {
        let name = &self.variables[var].domain;
        self.domains
            .iter()
            .find(|d| &d.name == name)
            .expect("validated variable domain")
    }

    pub fn domain_size(&self, var: VarId) -> u32 {
        self.domain_of(var).size
    }

    /// Variables whose domain is the named one.
    pub fn vars_of_domain(&self, domain: &str) -> Vec<VarId> {
        (0..self.variables.len())
            .filter(|&v| self.variables[v].domain == domain)
            .collect()
    }

    /// Appends the value `|D|` to a domain and returns it.
    pub fn extend_domain(&mut self, domain: &str) -> Result<u32> {
        let d = self
            .domains
            .iter_mut()
            .find(|d| d.name == domain)
            .ok_or_else(|| Error::UnknownDomain(domain.to_string()))?;
        d.size += 1;
        Ok(d.size - 1)
    }

    pub fn space(&self) -> AssignmentSpace {
        AssignmentSpace::new((0..self.variables.len()).map(|v| self.domain_size(v)).collect())
    }

    pub fn assignment(&self, bindings: &[(&str, u32)]) -> Result<Assignment> {
        let mut values = vec![None; self.variables.len()];
        for &(name, value) in bindings {
            let v = self
                .var_index(name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
            self.check_value(v, value)?;
            values[v] = Some(value);
        }
        values
            .into_iter()
            .enumerate()
            .map(|(v, x)| {
                x.ok_or_else(|| Error::Unbound {
                    variable: self.variables[v].name.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment)
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula> {
        let f = parse_formula(text, &|name| self.var_index(name))?;
        self.check_constants(&f)?;
        Ok(f)
    }

    /// Parses `premise => action : V = v, W = w`.
    pub fn parse_rule(&self, text: &str) -> Result<ActionRule> {
        let toks = lex(text)?;
        let resolve = |name: &str| self.var_index(name);
        let mut p = Parser::new(&toks, &resolve, text.chars().count() + 1);
        let premise = p.formula()?;
        p.expect(Tok::FatArrow, "`=>`")?;
        let action = match p.bump() {
            Some(Tok::Ident(a)) => a,
            _ => return Err(p.error("expected an action name")),
        };
        if !self.actions.contains(&action) {
            return Err(Error::UnknownAction(action));
        }
        p.expect(Tok::Colon, "`:`")?;
        let mut effect = Vec::new();
        loop {
            let v = p.variable()?;
            p.expect(Tok::Eq, "`=`")?;
            let c = match p.bump() {
                Some(Tok::Int(c)) => c,
                _ => return Err(p.error("expected a value")),
            };
            self.check_value(v, c)?;
            effect.push((v, c));
            if p.at_end() {
                break;
            }
            p.expect(Tok::Comma, "`,`")?;
        }
        self.check_constants(&premise)?;
        ActionRule::new(action, premise, effect)
    }

    pub fn show_formula(&self, f: &Formula) -> String {
        f.display(&self.names()).to_string()
    }

    pub fn show_rule(&self, r: &ActionRule) -> String {
        r.display(&self.names()).to_string()
    }

    /// Truth value of `f` under `s`; errors when `s` does not bind every
    /// variable occurring in `f`.
    pub fn eval_formula(&self, f: &Formula, s: &Assignment) -> Result<bool> {
        f.try_eval(&|v| s.0.get(v).copied()).map_err(|v| Error::Unbound {
            variable: self
                .variables
                .get(v)
                .map(|x| x.name.clone())
                .unwrap_or_else(|| format!("#{v}")),
        })
    }

    pub fn is_state(&self, s: &Assignment) -> bool {
        self.constraints.iter().all(|c| c.eval(&s.0))
    }

    /// Assignment indices of the state set, over [`DomainModel::space`].
    pub fn state_set(&self) -> BitSet {
        let space = self.space();
        let mut acc = BitSet::full(space.len());
        for c in &self.constraints {
            acc.and_with(&c.truth_table(&space));
        }
        acc
    }

    /// All total assignments satisfying every constraint, in enumeration order.
    pub fn enumerate_states(&self) -> Vec<Assignment> {
        self.space()
            .iter()
            .filter(|s| self.constraints.iter().all(|c| c.eval(s)))
            .map(Assignment)
            .collect()
    }

    /// Successor of `s` under `action`. Variables bound by no applicable rule
    /// keep their value. `s` need not satisfy the constraints.
    pub fn apply_action(&self, s: &Assignment, action: &str) -> Result<Assignment> {
        if !self.actions.iter().any(|a| a == action) {
            return Err(Error::UnknownAction(action.to_string()));
        }
        apply_rules(&self.rules, &self.variables, s, action)
    }

    pub fn check_determinism(&self) -> Vec<Violation> {
        check_determinism(&self.rules, self)
    }
}

/// γ over an explicit rule list, reporting the first conflicting pair.
pub fn apply_rules(
    rules: &[ActionRule],
    variables: &[VariableSpec],
    s: &Assignment,
    action: &str,
) -> Result<Assignment> {
    let mut out = s.clone();
    let mut setter: Vec<Option<usize>> = vec![None; s.0.len()];
    for (i, r) in rules.iter().enumerate() {
        if r.action != action || !r.premise.eval(&s.0) {
            continue;
        }
        for &(v, c) in &r.effect {
            match setter[v] {
                Some(j) if out.0[v] != c => {
                    return Err(Error::Conflict {
                        action: action.to_string(),
                        first: j,
                        second: i,
                        variable: variables[v].name.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    setter[v] = Some(i);
                    out.0[v] = c;
                }
            }
        }
    }
    Ok(out)
}

/// Every pair of rules of the same action that can fire together and
/// disagree on a variable. Joint satisfiability is decided by enumerating
/// all assignments of `model`'s domains; one witness is kept per pair and
/// variable.
pub fn check_determinism(rules: &[ActionRule], model: &DomainModel) -> Vec<Violation> {
    let space = model.space();
    let tables: Vec<BitSet> = rules.iter().map(|r| r.premise.truth_table(&space)).collect();
    let mut out = Vec::new();
    let mut reported = BTreeSet::new();
    for i in 0..rules.len() {
        for j in i + 1..rules.len() {
            if rules[i].action != rules[j].action {
                continue;
            }
            let conflicting: Vec<VarId> = rules[i]
                .effect
                .iter()
                .filter(|&&(v, c)| rules[j].effect.iter().any(|&(w, d)| w == v && d != c))
                .map(|&(v, _)| v)
                .collect();
            if conflicting.is_empty() {
                continue;
            }
            let mut both = tables[i].clone();
            both.and_with(&tables[j]);
            let first = both.ones().next();
            if let Some(k) = first {
                for v in conflicting {
                    if reported.insert((i, j, v)) {
                        out.push(Violation {
                            action: rules[i].action.clone(),
                            first: i,
                            second: j,
                            witness: Assignment(space.decode(k)),
                            variable: v,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Enlarges the state set by exactly `s0p`: every constraint `C` becomes
/// `C | s0p` and, for each variable whose domain just gained `v_new`,
/// `V = v_new -> (other variables as in s0p)` is added. When `s0p` does not
/// itself use `v_new` for that variable the added constraint is `V != v_new`,
/// so no other assignment carrying the new value becomes a state.
pub fn weaken_constraints(
    constraints: &[Formula],
    s0p: &Assignment,
    new_values: &[(VarId, u32)],
) -> Vec<Formula> {
    let state = Formula::state(&s0p.0);
    let mut out: Vec<Formula> = constraints
        .iter()
        .map(|c| Formula::or([c.clone(), state.clone()]))
        .collect();
    for &(var, value) in new_values {
        if s0p.0[var] == value {
            let rest = s0p
                .0
                .iter()
                .enumerate()
                .filter(|&(w, _)| w != var)
                .map(|(w, &c)| Formula::eq(w, c));
            out.push(Formula::implies(Formula::eq(var, value), Formula::and(rest)));
        } else {
            out.push(Formula::ne(var, value));
        }
    }
    out
}

/// Plain propositional equivalence over every total assignment of `model`.
pub fn semantically_equivalent(f1: &Formula, f2: &Formula, model: &DomainModel) -> bool {
    let space = model.space();
    f1.truth_table(&space) == f2.truth_table(&space)
}

/// Drops sub-formulas that do not change a constraint's meaning, removes
/// tautologies and duplicates. Each constraint keeps exactly its satisfying
/// set over the model's current domains.
pub fn simplify_constraints(constraints: &[Formula], model: &DomainModel) -> Vec<Formula> {
    let space = model.space();
    let mut out: Vec<Formula> = Vec::new();
    for c in constraints {
        let target = c.truth_table(&space);
        if target.count() == space.len() {
            continue;
        }
        let simplified = simplify_formula(c.clone(), &target, &space);
        if !out.contains(&simplified) {
            out.push(simplified);
        }
    }
    out
}

fn simplify_formula(mut f: Formula, target: &BitSet, space: &AssignmentSpace) -> Formula {
    'outer: loop {
        for path in removal_paths(&f) {
            let candidate = remove_at(&f, &path);
            if &candidate.truth_table(space) == target {
                f = candidate;
                continue 'outer;
            }
        }
        return f;
    }
}

/// Paths to every operand of an n-ary node, shallowest first.
fn removal_paths(f: &Formula) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<usize>, &Formula)> = vec![(Vec::new(), f)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (path, node) in frontier {
            match node {
                Formula::And(xs) | Formula::Or(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        let mut p = path.clone();
                        p.push(i);
                        out.push(p.clone());
                        next.push((p, x));
                    }
                }
                Formula::Not(x) => {
                    let mut p = path.clone();
                    p.push(0);
                    next.push((p, x.as_ref()));
                }
                _ => {}
            }
        }
        frontier = next;
    }
    out
}

fn remove_at(f: &Formula, path: &[usize]) -> Formula {
    match (f, path) {
        (Formula::And(xs), [i]) => Formula::and(without(xs, *i)),
        (Formula::Or(xs), [i]) => Formula::or(without(xs, *i)),
        (Formula::And(xs), [i, rest @ ..]) => Formula::and(replace(xs, *i, remove_at(&xs[*i], rest))),
        (Formula::Or(xs), [i, rest @ ..]) => Formula::or(replace(xs, *i, remove_at(&xs[*i], rest))),
        (Formula::Not(x), [0, rest @ ..]) => Formula::not(remove_at(x, rest)),
        _ => f.clone(),
    }
}

fn without(xs: &[Formula], i: usize) -> Vec<Formula> {
    xs.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| x.clone())
        .collect()
}

fn replace(xs: &[Formula], i: usize, with: Formula) -> Vec<Formula> {
    xs.iter()
        .enumerate()
        .map(|(j, x)| if j == i { with.clone() } else { x.clone() })
        .collect()
}
