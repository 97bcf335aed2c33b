#![allow(dead_code)]

pub mod scenarios;

use std::collections::BTreeSet;

use alp_core::formula::Literal;
use alp_core::learner::revise_rules;
use alp_core::{ActionRule, Assignment, Domain, DomainModel, Formula, VariableSpec};
use rand::Rng;

pub const ACTIONS: [&str; 2] = ["a", "b"];

/// 1 to 3 variables over 1 to 3 domains of size 1 to 4; some variables
/// share a domain so `V = W` atoms occur.
pub fn random_model<R: Rng>(rng: &mut R, max_constraints: usize) -> DomainModel {
    let nvars = rng.random_range(1..=3);
    let mut domains: Vec<Domain> = Vec::new();
    let mut variables = Vec::new();
    for i in 0..nvars {
        let domain = if !domains.is_empty() && rng.random_bool(0.4) {
            domains[rng.random_range(0..domains.len())].name.clone()
        } else {
            let name = format!("d{}", domains.len());
            domains.push(Domain {
                name: name.clone(),
                size: rng.random_range(1..=4),
            });
            name
        };
        variables.push(VariableSpec { name: format!("v{i}"), domain });
    }
    let mut m = DomainModel::new(domains, variables, ACTIONS.iter().map(|a| a.to_string()).collect()).unwrap();
    let k = rng.random_range(0..=max_constraints);
    m.constraints = (0..k).map(|_| random_formula(rng, &m, 2)).collect();
    m.validate().unwrap();
    m
}

pub fn random_atom<R: Rng>(rng: &mut R, m: &DomainModel) -> Formula {
    let n = m.variables.len();
    let v = rng.random_range(0..n);
    let partners: Vec<usize> = (0..n)
        .filter(|&w| w != v && m.variables[w].domain == m.variables[v].domain)
        .collect();
    if !partners.is_empty() && rng.random_bool(0.3) {
        return Formula::var_eq(v, partners[rng.random_range(0..partners.len())]);
    }
    Formula::eq(v, rng.random_range(0..m.domain_size(v)))
}

pub fn random_formula<R: Rng>(rng: &mut R, m: &DomainModel, depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.35) {
        let atom = random_atom(rng, m);
        return if rng.random_bool(0.3) { Formula::not(atom) } else { atom };
    }
    let a = random_formula(rng, m, depth - 1);
    let b = random_formula(rng, m, depth - 1);
    match rng.random_range(0..4) {
        0 => Formula::and([a, b]),
        1 => Formula::or([a, b]),
        2 => Formula::implies(a, b),
        _ => Formula::not(Formula::and([a, b])),
    }
}

pub fn random_assignment<R: Rng>(rng: &mut R, m: &DomainModel) -> Assignment {
    Assignment((0..m.variables.len()).map(|v| rng.random_range(0..m.domain_size(v))).collect())
}

pub fn random_literal<R: Rng>(rng: &mut R, m: &DomainModel) -> Literal {
    let n = m.variables.len();
    let v = rng.random_range(0..n);
    let partners: Vec<usize> = (0..n)
        .filter(|&w| w != v && m.variables[w].domain == m.variables[v].domain)
        .collect();
    let positive = rng.random_bool(0.6);
    if !partners.is_empty() && rng.random_bool(0.25) {
        return Literal::VarEq(v, partners[rng.random_range(0..partners.len())], positive);
    }
    Literal::Eq(v, rng.random_range(0..m.domain_size(v)), positive)
}

fn random_effect<R: Rng>(rng: &mut R, m: &DomainModel) -> Vec<(usize, u32)> {
    let n = m.variables.len();
    let mut vars: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if vars.is_empty() {
        vars.push(rng.random_range(0..n));
    }
    vars.into_iter().map(|v| (v, rng.random_range(0..m.domain_size(v)))).collect()
}

/// A deterministic rule set for `m`: either random conjunctive rules kept
/// only when they never conflict, or a chain of single-transition
/// revisions, which produces the specialised rules merging is meant for.
pub fn random_rules<R: Rng>(rng: &mut R, m: &DomainModel) -> Vec<ActionRule> {
    if rng.random_bool(0.5) {
        let mut rules: Vec<ActionRule> = Vec::new();
        for _ in 0..rng.random_range(1..=6) {
            let lits: Vec<Literal> = (0..rng.random_range(0..=3)).map(|_| random_literal(rng, m)).collect();
            let action = ACTIONS[rng.random_range(0..ACTIONS.len())];
            let rule = ActionRule::new(action, Formula::from_literals(&lits), random_effect(rng, m)).unwrap();
            let mut with = rules.clone();
            with.push(rule);
            if alp_core::domain::check_determinism(&with, m).is_empty() {
                rules = with;
            }
        }
        rules
    } else {
        let mut rules = Vec::new();
        for _ in 0..rng.random_range(1..=5) {
            let s = random_assignment(rng, m);
            let t = random_assignment(rng, m);
            let action = ACTIONS[rng.random_range(0..ACTIONS.len())];
            rules = revise_rules(&rules, &s, action, &t);
        }
        rules
    }
}

pub fn state_set(m: &DomainModel) -> BTreeSet<Assignment> {
    m.enumerate_states().into_iter().collect()
}

pub fn all_assignments(m: &DomainModel) -> Vec<Assignment> {
    m.space().iter().map(Assignment).collect()
}
