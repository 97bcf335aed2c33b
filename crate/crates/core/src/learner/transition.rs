//! Revising the transition function from the transition history, and
//! compressing the resulting rule set.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::domain::{apply_rules, check_determinism, ActionRule, Assignment, DomainModel};
use crate::error::{Error, Result};
use crate::formula::{Formula, Literal, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: Assignment,
    pub action: String,
    pub to: Assignment,
}

/// `alpha * [t = gamma(s, a)] + (1 - alpha) * #{<s, a, t> in history}` for
/// each target `t`.
pub fn transition_scores(
    m: &DomainModel,
    history: &[Transition],
    s: &Assignment,
    action: &str,
    alpha: f64,
    targets: &[Assignment],
) -> Result<Vec<f64>> {
    let predicted = m.apply_action(s, action)?;
    Ok(targets
        .iter()
        .map(|t| {
            let count = history
                .iter()
                .filter(|h| &h.from == s && h.action == action && &h.to == t)
                .count() as f64;
            let hit = if *t == predicted { 1.0 } else { 0.0 };
            alpha * hit + (1.0 - alpha) * count
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransUpdate {
    pub changed: bool,
    pub target: Option<Assignment>,
    pub rules_before: usize,
    pub rules_revised: usize,
    pub rules_after: usize,
}

const SCORE_TIE: f64 = 1e-12;

/// Re-decides `gamma(s, a)` for the newest transition `<s, a, _>`. The
/// current successor is kept unless another target scores strictly higher;
/// among equally scored other targets the most recently observed wins.
pub fn update_trans(m: &DomainModel, history: &[Transition], alpha: f64) -> Result<(DomainModel, TransUpdate)> {
    let last = history
        .last()
        .ok_or_else(|| Error::Internal("transition update on an empty history".into()))?;
    let (s, a) = (&last.from, last.action.as_str());
    let predicted = m.apply_action(s, a)?;
    let mut targets = vec![predicted.clone()];
    for h in history.iter().rev() {
        if &h.from == s && h.action == a && !targets.contains(&h.to) {
            targets.push(h.to.clone());
        }
    }
    let scores = transition_scores(m, history, s, a, alpha, &targets)?;
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut info = TransUpdate {
        rules_before: m.rules.len(),
        rules_revised: m.rules.len(),
        rules_after: m.rules.len(),
        ..Default::default()
    };
    if scores[0] >= best - SCORE_TIE {
        return Ok((m.clone(), info));
    }
    let k = (1..targets.len())
        .find(|&k| scores[k] >= best - SCORE_TIE)
        .expect("some target attains the maximum");
    let target = targets[k].clone();
    let revised = revise_rules(&m.rules, s, a, &target);
    info.rules_revised = revised.len();
    let factorized = factorize_rules(&revised, m);
    let mut out = m.clone();
    out.rules = factorized;
    if let Some(v) = check_determinism(&out.rules, &out).first() {
        return Err(Error::Internal(format!(
            "rule revision for {s} --{a}--> {target} broke determinism (rules {} and {})",
            v.first, v.second
        )));
    }
    let got = out.apply_action(s, a)?;
    if got != target {
        return Err(Error::Internal(format!(
            "rule revision for {s} --{a}--> {target} yields {got}"
        )));
    }
    info.changed = true;
    info.rules_after = out.rules.len();
    info.target = Some(target);
    Ok((out, info))
}

/// Makes `s --a--> s2` hold: every rule of `a` firing in `s` with an effect
/// not met by `s2` is split into one copy per variable, excluding `s` through
/// that variable, and one full-state rule is added per variable that changes.
pub fn revise_rules(rules: &[ActionRule], s: &Assignment, action: &str, s2: &Assignment) -> Vec<ActionRule> {
    let applicable: Vec<&ActionRule> = rules
        .iter()
        .filter(|r| r.action == action && r.premise.eval(s.values()))
        .collect();
    let reaches = applicable.iter().all(|r| r.effect_holds(s2.values()))
        && s.values().iter().zip(s2.values()).enumerate().all(|(v, (a, b))| {
            a == b || applicable.iter().any(|r| r.effect.contains(&(v, *b)))
        });
    if reaches {
        return rules.to_vec();
    }
    let mut out = Vec::with_capacity(rules.len() + s.values().len());
    for r in rules {
        if r.action == action && r.premise.eval(s.values()) && !r.effect_holds(s2.values()) {
            for (v, &c) in s.values().iter().enumerate() {
                out.push(ActionRule {
                    action: r.action.clone(),
                    premise: Formula::and([r.premise.clone(), Formula::ne(v, c)]),
                    effect: r.effect.clone(),
                });
            }
        } else {
            out.push(r.clone());
        }
    }
    let state = Formula::state(s.values());
    for (v, (&a, &b)) in s.values().iter().zip(s2.values()).enumerate() {
        if a != b {
            out.push(ActionRule {
                action: action.to_string(),
                premise: state.clone(),
                effect: vec![(v, b)],
            });
        }
    }
    out
}

/// Rewrite budget for one factorization.
pub const MAX_REWRITES: usize = 1000;

/// A rule whose premise is a conjunction of literals, as a literal set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Conj {
    action: String,
    effect: Vec<(VarId, u32)>,
    lits: BTreeSet<Literal>,
}

/// Merges rules with identical action and effect whose premises are
/// conjunctions of literals:
///
/// 1. `G & l` and `G & !l` become `G`;
/// 2. `G & V = d` for all but one value `u` of `Dom(V)` (at least two rules)
///    becomes `G & V != u`, and for every value becomes `G`;
/// 3. `G & V = d & W = d` for every `d` of the shared domain becomes
///    `G & V = W`.
///
/// Contradictory premises are dropped, as are duplicates and rules implied
/// by a more general rule with the same effect. The result is sorted.
pub fn factorize_rules(rules: &[ActionRule], m: &DomainModel) -> Vec<ActionRule> {
    let mut other = Vec::new();
    let mut conj: BTreeSet<Conj> = BTreeSet::new();
    for r in rules {
        match r.premise.conjuncts() {
            Some(lits) => {
                if let Some(lits) = normalize(lits.into_iter().collect(), m) {
                    conj.insert(Conj {
                        action: r.action.clone(),
                        effect: r.effect.clone(),
                        lits,
                    });
                }
            }
            None => other.push(r.clone()),
        }
    }
    remove_subsumed(&mut conj);
    for _ in 0..MAX_REWRITES {
        let step = merge_complementary(&conj)
            .or_else(|| merge_value_cover(&conj, m))
            .or_else(|| merge_equal_pairs(&conj, m));
        let Some((removed, added)) = step else { break };
        for r in &removed {
            conj.remove(r);
        }
        if let Some(lits) = normalize(added.lits.clone(), m) {
            conj.insert(Conj { lits, ..added });
        }
        remove_subsumed(&mut conj);
    }
    let mut out: Vec<ActionRule> = conj
        .into_iter()
        .map(|c| ActionRule {
            action: c.action,
            premise: Formula::from_literals(&c.lits.into_iter().collect::<Vec<_>>()),
            effect: c.effect,
        })
        .collect();
    other.sort();
    other.dedup();
    out.extend(other);
    out
}

/// Canonical literal set, or `None` when syntactically unsatisfiable.
fn normalize(mut lits: BTreeSet<Literal>, m: &DomainModel) -> Option<BTreeSet<Literal>> {
    lits = lits
        .into_iter()
        .map(|l| match l {
            Literal::VarEq(v, w, p) if v > w => Literal::VarEq(w, v, p),
            l => l,
        })
        .collect();
    let mut positive: BTreeMap<VarId, u32> = BTreeMap::new();
    let mut negative: BTreeMap<VarId, BTreeSet<u32>> = BTreeMap::new();
    for &l in &lits {
        match l {
            Literal::Eq(v, c, true) => {
                if positive.insert(v, c).is_some_and(|d| d != c) {
                    return None;
                }
            }
            Literal::Eq(v, c, false) => {
                negative.entry(v).or_default().insert(c);
            }
            Literal::VarEq(v, w, false) if v == w => return None,
            _ => {}
        }
    }
    for (v, c) in &positive {
        if negative.get(v).is_some_and(|n| n.contains(c)) {
            return None;
        }
    }
    for (v, n) in &negative {
        if !positive.contains_key(v) && n.len() as u32 >= m.domain_size(*v) {
            return None;
        }
    }
    for &l in &lits {
        if let Literal::VarEq(v, w, p) = l {
            if lits.contains(&l.negated()) {
                return None;
            }
            if let (Some(a), Some(b)) = (positive.get(&v), positive.get(&w)) {
                if (a == b) != p {
                    return None;
                }
            }
        }
    }
    lits.retain(|&l| match l {
        Literal::Eq(v, _, false) => !positive.contains_key(&v),
        Literal::VarEq(v, w, true) => v != w,
        _ => true,
    });
    Some(lits)
}

/// Drops rules whose literal set contains that of another rule with the same
/// action and effect.
fn remove_subsumed(conj: &mut BTreeSet<Conj>) {
    let all: Vec<Conj> = conj.iter().cloned().collect();
    for (i, c) in all.iter().enumerate() {
        let subsumed = all.iter().enumerate().any(|(j, d)| {
            j != i
                && d.action == c.action
                && d.effect == c.effect
                && d.lits.is_subset(&c.lits)
                && (d.lits.len() < c.lits.len() || j < i)
        });
        if subsumed {
            conj.remove(c);
        }
    }
}

type Rewrite = (Vec<Conj>, Conj);

fn with_lits(c: &Conj, lits: BTreeSet<Literal>) -> Conj {
    Conj {
        action: c.action.clone(),
        effect: c.effect.clone(),
        lits,
    }
}

fn merge_complementary(conj: &BTreeSet<Conj>) -> Option<Rewrite> {
    let mut seen: BTreeMap<(&str, &[(VarId, u32)], Vec<Literal>, Literal), &Conj> = BTreeMap::new();
    for c in conj {
        for &l in &c.lits {
            let rest: Vec<Literal> = c.lits.iter().copied().filter(|&x| x != l).collect();
            let pos = if l.is_positive() { l } else { l.negated() };
            let key = (c.action.as_str(), c.effect.as_slice(), rest.clone(), pos);
            if let Some(other) = seen.get(&key) {
                if other.lits.contains(&l.negated()) {
                    return Some((vec![(*other).clone(), c.clone()], with_lits(c, rest.into_iter().collect())));
                }
            } else {
                seen.insert(key, c);
            }
        }
    }
    None
}

fn merge_value_cover(conj: &BTreeSet<Conj>, m: &DomainModel) -> Option<Rewrite> {
    let mut groups: BTreeMap<(&str, &[(VarId, u32)], Vec<Literal>, VarId), Vec<(u32, &Conj)>> = BTreeMap::new();
    for c in conj {
        for &l in &c.lits {
            if let Literal::Eq(v, d, true) = l {
                let rest: Vec<Literal> = c.lits.iter().copied().filter(|&x| x != l).collect();
                groups
                    .entry((c.action.as_str(), c.effect.as_slice(), rest, v))
                    .or_default()
                    .push((d, c));
            }
        }
    }
    for ((_, _, rest, v), members) in groups {
        let size = m.domain_size(v);
        let values: BTreeSet<u32> = members.iter().map(|(d, _)| *d).collect();
        let template = members[0].1;
        let removed = members.iter().map(|(_, c)| (*c).clone()).collect();
        let mut lits: BTreeSet<Literal> = rest.into_iter().collect();
        if values.len() as u32 == size {
            return Some((removed, with_lits(template, lits)));
        }
        if values.len() >= 2 && values.len() as u32 + 1 == size {
            let u = (0..size).find(|d| !values.contains(d)).expect("one value missing");
            lits.insert(Literal::Eq(v, u, false));
            return Some((removed, with_lits(template, lits)));
        }
    }
    None
}

fn merge_equal_pairs(conj: &BTreeSet<Conj>, m: &DomainModel) -> Option<Rewrite> {
    let mut groups: BTreeMap<(&str, &[(VarId, u32)], Vec<Literal>, VarId, VarId), Vec<(u32, &Conj)>> =
        BTreeMap::new();
    for c in conj {
        let pos: Vec<(VarId, u32)> = c
            .lits
            .iter()
            .filter_map(|l| match *l {
                Literal::Eq(v, d, true) => Some((v, d)),
                _ => None,
            })
            .collect();
        for (i, &(v, d)) in pos.iter().enumerate() {
            for &(w, e) in &pos[i + 1..] {
                if d != e || m.variables[v].domain != m.variables[w].domain {
                    continue;
                }
                let rest: Vec<Literal> = c
                    .lits
                    .iter()
                    .copied()
                    .filter(|&x| x != Literal::Eq(v, d, true) && x != Literal::Eq(w, e, true))
                    .collect();
                groups
                    .entry((c.action.as_str(), c.effect.as_slice(), rest, v, w))
                    .or_default()
                    .push((d, c));
            }
        }
    }
    for ((_, _, rest, v, w), members) in groups {
        let values: BTreeSet<u32> = members.iter().map(|(d, _)| *d).collect();
        if values.len() as u32 == m.domain_size(v) {
            let mut lits: BTreeSet<Literal> = rest.into_iter().collect();
            lits.insert(Literal::VarEq(v, w, true));
            let removed = members.iter().map(|(_, c)| (*c).clone()).collect();
            return Some((removed, with_lits(members[0].1, lits)));
        }
    }
    None
}

/// True when both rule sets give the same successor (or both conflict) for
/// every assignment of `m` and every action.
pub fn same_transitions(a: &[ActionRule], b: &[ActionRule], m: &DomainModel) -> bool {
    m.space().iter().all(|s| {
        let s = Assignment(s);
        m.actions.iter().all(|act| {
            apply_rules(a, &m.variables, &s, act).ok() == apply_rules(b, &m.variables, &s, act).ok()
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::rpc_prior;
    use crate::domain::{Domain, VariableSpec};

    fn s(d: &str) -> Assignment {
        Assignment::from_digits(d).unwrap()
    }

    fn small(sizes: &[u32]) -> DomainModel {
        let domains = sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| Domain { name: format!("d{i}"), size })
            .collect();
        let variables = (0..sizes.len())
            .map(|i| VariableSpec { name: format!("v{i}"), domain: format!("d{i}") })
            .collect();
        DomainModel::new(domains, variables, vec!["a".into()]).unwrap()
    }

    fn rules(m: &DomainModel, texts: &[&str]) -> Vec<ActionRule> {
        texts.iter().map(|t| m.parse_rule(t).unwrap()).collect()
    }

    fn shown(m: &DomainModel, rs: &[ActionRule]) -> Vec<String> {
        rs.iter().map(|r| m.show_rule(r)).collect()
    }

    #[test]
    fn scores_match_worked_table() {
        let m = rpc_prior();
        let hist = vec![Transition { from: s("010"), action: "E".into(), to: s("130") }];
        let targets = [s("130"), s("110"), s("000")];
        let at = |alpha| transition_scores(&m, &hist, &s("010"), "E", alpha, &targets).unwrap();
        assert_eq!(at(0.0), vec![1.0, 0.0, 0.0]);
        assert_eq!(at(0.5), vec![0.5, 0.5, 0.0]);
        assert_eq!(at(1.0), vec![0.0, 1.0, 0.0]);
        for (alpha, changed) in [(0.0, true), (0.4, true), (0.5, false), (0.6, false), (1.0, false)] {
            let (m2, info) = update_trans(&m, &hist, alpha).unwrap();
            assert_eq!(info.changed, changed, "alpha {alpha}");
            let expected = if changed { s("130") } else { s("110") };
            assert_eq!(m2.apply_action(&s("010"), "E").unwrap(), expected);
        }
    }

    #[test]
    fn revision_example() {
        let mut m = rpc_prior();
        m.rules = rules(&m, &["loc(r) = 0 => E : loc(r) = 1"]);
        let revised = revise_rules(&m.rules, &s("010"), "E", &s("030"));
        assert_eq!(
            shown(&m, &revised),
            vec![
                "loc(r) = 0 & loc(r) != 0 => E : loc(r) = 1",
                "loc(r) = 0 & loc(p) != 1 => E : loc(r) = 1",
                "loc(r) = 0 & loaded != 0 => E : loc(r) = 1",
                "loc(r) = 0 & loc(p) = 1 & loaded = 0 => E : loc(p) = 3",
            ]
        );
        let mut after = m.clone();
        after.rules = revised;
        for st in m.space().iter().map(Assignment) {
            let got = after.apply_action(&st, "E").unwrap();
            if st == s("010") {
                assert_eq!(got, s("030"));
            } else {
                assert_eq!(got, m.apply_action(&st, "E").unwrap());
            }
        }
        assert_eq!(revise_rules(&m.rules, &s("010"), "E", &s("110")), m.rules);
        m.rules.clear();
        assert_eq!(revise_rules(&m.rules, &s("010"), "E", &s("110")).len(), 1);
    }

    #[test]
    fn three_merge_patterns() {
        let m = small(&[2, 3, 2]);
        let r = rules(&m, &["v0 = 1 & v2 = 0 => a : v0 = 0", "v0 = 1 & v2 != 0 => a : v0 = 0"]);
        assert_eq!(shown(&m, &factorize_rules(&r, &m)), vec!["v0 = 1 => a : v0 = 0"]);

        let r = rules(&m, &["v0 = 1 & v1 = 0 => a : v0 = 0", "v0 = 1 & v1 = 1 => a : v0 = 0"]);
        assert_eq!(shown(&m, &factorize_rules(&r, &m)), vec!["v0 = 1 & v1 != 2 => a : v0 = 0"]);

        let mut m2 = small(&[2, 2, 3]);
        m2.variables[1].domain = "d0".into();
        let r = rules(
            &m2,
            &["v2 = 1 & v0 = 0 & v1 = 0 => a : v2 = 0", "v2 = 1 & v0 = 1 & v1 = 1 => a : v2 = 0"],
        );
        assert_eq!(shown(&m2, &factorize_rules(&r, &m2)), vec!["v2 = 1 & v0 = v1 => a : v2 = 0"]);
    }

    #[test]
    fn factorization_cleans_revision_output() {
        let m = rpc_prior();
        let revised = revise_rules(&m.rules, &s("010"), "E", &s("130"));
        let f = factorize_rules(&revised, &m);
        assert!(same_transitions(&revised, &f, &m));
        assert!(f.len() < revised.len());
        assert!(same_transitions(&m.rules, &factorize_rules(&m.rules, &m), &m));
    }
}
