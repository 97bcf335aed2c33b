//! Propositional formulas over finite-domain atoms `V = v` and `V = W`.
//!
//! Textual syntax (infix, loosest binding first):
//!
//! ```text
//! formula := or ( "->" formula )?          implication, right associative
//! or      := and ( "|" and )*
//! and     := unary ( "&" unary )*
//! unary   := "!" unary | "(" formula ")" | "true" | "false" | atom
//! atom    := name ( "=" | "!=" ) ( integer | name )
//! ```
//!
//! `a -> b` is stored as `!a | b` and `x != v` as `!(x = v)`; the printer
//! re-sugars both, so printing then parsing returns the same tree.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{AssignmentSpace, BitSet};

/// Index of a state variable in its model.
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    Const(bool),
    Eq(VarId, u32),
    VarEq(VarId, VarId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

/// A possibly negated atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Eq(VarId, u32, bool),
    VarEq(VarId, VarId, bool),
}

impl Literal {
    pub fn negated(self) -> Literal {
        match self {
            Literal::Eq(v, c, p) => Literal::Eq(v, c, !p),
            Literal::VarEq(v, w, p) => Literal::VarEq(v, w, !p),
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Literal::Eq(.., true) | Literal::VarEq(.., true))
    }

    pub fn mentions(self, var: VarId) -> bool {
        match self {
            Literal::Eq(v, ..) => v == var,
            Literal::VarEq(v, w, _) => v == var || w == var,
        }
    }

    pub fn holds(self, s: &[u32]) -> bool {
        match self {
            Literal::Eq(v, c, p) => (s[v] == c) == p,
            Literal::VarEq(v, w, p) => (s[v] == s[w]) == p,
        }
    }

    pub fn to_formula(self) -> Formula {
        let atom = match self {
            Literal::Eq(v, c, _) => Formula::Eq(v, c),
            Literal::VarEq(v, w, _) => Formula::VarEq(v, w),
        };
        if self.is_positive() {
            atom
        } else {
            Formula::not(atom)
        }
    }
}

impl Formula {
    pub fn eq(var: VarId, value: u32) -> Formula {
        Formula::Eq(var, value)
    }

    pub fn ne(var: VarId, value: u32) -> Formula {
        Formula::not(Formula::Eq(var, value))
    }

    pub fn var_eq(a: VarId, b: VarId) -> Formula {
        Formula::VarEq(a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Conjunction; nested conjunctions are flattened and a single operand is
    /// returned as is.
    pub fn and(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut flat = Vec::new();
        for f in items {
            match f {
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::Const(true),
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    pub fn or(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut flat = Vec::new();
        for f in items {
            match f {
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::Const(false),
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn implies(premise: Formula, conclusion: Formula) -> Formula {
        Formula::or([Formula::not(premise), conclusion])
    }

    /// Conjunction `V1 = s[V1] & ... & Vm = s[Vm]` describing one total assignment.
    pub fn state(s: &[u32]) -> Formula {
        Formula::and(s.iter().enumerate().map(|(v, &c)| Formula::Eq(v, c)))
    }

    pub fn from_literals(lits: &[Literal]) -> Formula {
        Formula::and(lits.iter().map(|l| l.to_formula()))
    }

    pub fn as_literal(&self) -> Option<Literal> {
        match self {
            Formula::Eq(v, c) => Some(Literal::Eq(*v, *c, true)),
            Formula::VarEq(v, w) => Some(Literal::VarEq(*v, *w, true)),
            Formula::Not(inner) => inner.as_literal().map(Literal::negated),
            _ => None,
        }
    }

    /// The literals of a conjunction of literals (`true` is the empty
    /// conjunction); `None` for any other shape.
    pub fn conjuncts(&self) -> Option<Vec<Literal>> {
        match self {
            Formula::Const(true) => Some(Vec::new()),
            Formula::And(items) => items.iter().map(Formula::as_literal).collect(),
            other => other.as_literal().map(|l| vec![l]),
        }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Formula::Const(_) => {}
            Formula::Eq(v, _) => {
                out.insert(*v);
            }
            Formula::VarEq(v, w) => {
                out.insert(*v);
                out.insert(*w);
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
        }
    }

    /// Evaluates under a total assignment given as a value vector.
    ///
    /// Panics if the formula references a variable beyond `s.len()`; use
    /// [`Formula::try_eval`] when that can happen.
    pub fn eval(&self, s: &[u32]) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Eq(v, c) => s[*v] == *c,
            Formula::VarEq(v, w) => s[*v] == s[*w],
            Formula::Not(f) => !f.eval(s),
            Formula::And(fs) => fs.iter().all(|f| f.eval(s)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(s)),
        }
    }

    /// Evaluates against a lookup that may leave variables unbound. Returns
    /// the first unbound variable encountered as the error.
    pub fn try_eval(&self, lookup: &dyn Fn(VarId) -> Option<u32>) -> Result<bool, VarId> {
        Ok(match self {
            Formula::Const(b) => *b,
            Formula::Eq(v, c) => lookup(*v).ok_or(*v)? == *c,
            Formula::VarEq(v, w) => lookup(*v).ok_or(*v)? == lookup(*w).ok_or(*w)?,
            Formula::Not(f) => !f.try_eval(lookup)?,
            Formula::And(fs) => {
                let mut all = true;
                for f in fs {
                    all &= f.try_eval(lookup)?;
                }
                all
            }
            Formula::Or(fs) => {
                let mut any = false;
                for f in fs {
                    any |= f.try_eval(lookup)?;
                }
                any
            }
        })
    }

    /// Set of assignment indices of `space` satisfying the formula.
    pub fn truth_table(&self, space: &AssignmentSpace) -> BitSet {
        match self {
            Formula::Const(true) => BitSet::full(space.len()),
            Formula::Const(false) => BitSet::empty(space.len()),
            Formula::Eq(..) | Formula::VarEq(..) => {
                let mut out = BitSet::empty(space.len());
                for (i, s) in space.iter().enumerate() {
                    if self.eval(&s) {
                        out.set(i);
                    }
                }
                out
            }
            Formula::Not(f) => {
                let mut t = f.truth_table(space);
                t.negate();
                t
            }
            Formula::And(fs) => {
                let mut acc = BitSet::full(space.len());
                for f in fs {
                    acc.and_with(&f.truth_table(space));
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = BitSet::empty(space.len());
                for f in fs {
                    acc.or_with(&f.truth_table(space));
                }
                acc
            }
        }
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, names }
    }

    /// Binding level of the printed form: 0 implication, 1 disjunction,
    /// 2 conjunction, 3 unary or atom.
    fn level(&self) -> u8 {
        match self {
            Formula::Or(fs) if fs.len() >= 2 && matches!(fs[0], Formula::Not(_)) => 0,
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            _ => 3,
        }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    names: &'a [String],
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.formula, self.names, 0, f)
    }
}

fn name<'a>(names: &'a [String], v: VarId) -> &'a str {
    names.get(v).map(String::as_str).unwrap_or("?")
}

fn write_formula(
    formula: &Formula,
    names: &[String],
    min_level: u8,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    if formula.level() < min_level {
        f.write_str("(")?;
        write_formula(formula, names, 0, f)?;
        return f.write_str(")");
    }
    match formula {
        Formula::Const(b) => write!(f, "{b}"),
        Formula::Eq(v, c) => write!(f, "{} = {c}", name(names, *v)),
        Formula::VarEq(v, w) => write!(f, "{} = {}", name(names, *v), name(names, *w)),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Eq(v, c) => write!(f, "{} != {c}", name(names, *v)),
            Formula::VarEq(v, w) => write!(f, "{} != {}", name(names, *v), name(names, *w)),
            other => {
                f.write_str("!")?;
                write_formula(other, names, 3, f)
            }
        },
        Formula::And(fs) => {
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(" & ")?;
                }
                write_formula(x, names, 3, f)?;
            }
            Ok(())
        }
        Formula::Or(fs) => {
            if formula.level() == 0 {
                let Formula::Not(premise) = &fs[0] else {
                    unreachable!()
                };
                write_formula(premise, names, 1, f)?;
                f.write_str(" -> ")?;
                let rest = Formula::or(fs[1..].iter().cloned());
                return write_formula(&rest, names, 0, f);
            }
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write_formula(x, names, 2, f)?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Lexing and parsing

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u32),
    Eq,
    Ne,
    Bang,
    Amp,
    Pipe,
    Arrow,
    FatArrow,
    Colon,
    Comma,
    LParen,
    RParen,
}

pub(crate) fn lex(input: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |column: usize, message: &str| Error::Parse {
        column,
        message: message.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            '&' => {
                out.push((Tok::Amp, col));
                i += 1;
            }
            '|' => {
                out.push((Tok::Pipe, col));
                i += 1;
            }
            ':' => {
                out.push((Tok::Colon, col));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, col));
                i += 1;
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::Ne, col));
                i += 2;
            }
            '!' => {
                out.push((Tok::Bang, col));
                i += 1;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::FatArrow, col));
                i += 2;
            }
            '=' => {
                out.push((Tok::Eq, col));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, col));
                i += 2;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text
                    .parse::<u32>()
                    .map_err(|_| err(col, "integer out of range"))?;
                out.push((Tok::Int(n), col));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                // `loc(r)` style names: an identifier immediately followed by a
                // parenthesised identifier, without spaces, is one name.
                if chars.get(i) == Some(&'(') {
                    let mut j = i + 1;
                    while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                        j += 1;
                    }
                    if j > i + 1 && chars.get(j) == Some(&')') {
                        i = j + 1;
                    }
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            _ => return Err(err(col, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

pub(crate) struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    resolve: &'a dyn Fn(&str) -> Option<VarId>,
    end_column: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(
        toks: &'a [(Tok, usize)],
        resolve: &'a dyn Fn(&str) -> Option<VarId>,
        end_column: usize,
    ) -> Self {
        Self {
            toks,
            pos: 0,
            resolve,
            end_column,
        }
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    pub(crate) fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_column)
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            column: self.column(),
            message: message.into(),
        }
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    pub(crate) fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn variable(&mut self) -> Result<VarId> {
        match self.bump() {
            Some(Tok::Ident(name)) => {
                (self.resolve)(&name).ok_or(Error::UnknownVariable(name))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a variable name"))
            }
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut items = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            items.push(self.conjunction()?);
        }
        Ok(Formula::or(items))
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Formula::and(items))
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(name)) if name == "true" || name == "false" => {
                let b = name == "true";
                self.bump();
                Ok(Formula::Const(b))
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.error("expected a formula")),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let var = self.variable()?;
        let negated = match self.bump() {
            Some(Tok::Eq) => false,
            Some(Tok::Ne) => true,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected `=` or `!=`"));
            }
        };
        let atom = match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.bump();
                Formula::Eq(var, n)
            }
            Some(Tok::Ident(_)) => Formula::VarEq(var, self.variable()?),
            _ => return Err(self.error("expected a value or a variable")),
        };
        Ok(if negated { Formula::not(atom) } else { atom })
    }
}

/// Parses a formula, resolving variable names through `resolve`.
pub fn parse_formula(input: &str, resolve: &dyn Fn(&str) -> Option<VarId>) -> Result<Formula> {
    let toks = lex(input)?;
    let mut p = Parser::new(&toks, resolve, input.chars().count() + 1);
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.error("trailing input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["loc(r)".into(), "loc(p)".into(), "loaded".into()]
    }

    fn parse(s: &str) -> Formula {
        let n = names();
        parse_formula(s, &|x| n.iter().position(|y| y == x)).unwrap()
    }

    #[test]
    fn implication_desugars_and_resugars() {
        let f = parse("loaded = 1 -> loc(r) = loc(p)");
        assert_eq!(
            f,
            Formula::Or(vec![
                Formula::not(Formula::Eq(2, 1)),
                Formula::VarEq(0, 1)
            ])
        );
        assert_eq!(
            f.display(&names()).to_string(),
            "loaded = 1 -> loc(r) = loc(p)"
        );
    }

    #[test]
    fn precedence() {
        let f = parse("loc(r) = 0 | loc(r) = 1 & loaded = 0");
        assert!(matches!(&f, Formula::Or(xs) if matches!(xs[1], Formula::And(_))));
        let g = parse("(loc(r) = 0 | loc(r) = 1) & loaded = 0");
        assert_eq!(
            g.display(&names()).to_string(),
            "(loc(r) = 0 | loc(r) = 1) & loaded = 0"
        );
    }

    #[test]
    fn print_parse_fixpoint_on_nested_shapes() {
        for src in [
            "loc(r) = 4 -> loc(p) = 4 & loaded = 0",
            "loaded = 1 -> loc(r) = loc(p) | loc(r) = 1 & loc(p) = 4",
            "(loc(r) = 1 -> loaded = 0) -> loc(p) = 2",
            "!(loc(r) != 1)",
            "!(loc(r) = 1 & loaded = 0) | true",
            "loc(r) != loc(p) & false",
            "loc(r) = 0 -> loc(p) = 1 -> loaded = 1",
        ] {
            let f = parse(src);
            let printed = f.display(&names()).to_string();
            assert_eq!(parse(&printed), f, "{src} printed as {printed}");
        }
    }

    #[test]
    fn eval_examples() {
        let f = parse("loaded = 1 -> loc(r) = loc(p)");
        assert!(f.eval(&[0, 1, 0]));
        assert!(!f.eval(&[0, 1, 1]));
        assert!(parse("loaded = loaded").eval(&[3, 2, 1]));
    }

    #[test]
    fn unbound_variable_reported() {
        let f = parse("loaded = 1 -> loc(r) = loc(p)");
        let err = f
            .try_eval(&|v| if v == 2 { Some(1) } else { None })
            .unwrap_err();
        assert_eq!(err, 0);
    }

    #[test]
    fn parse_errors_carry_columns() {
        let n = names();
        let r = |x: &str| n.iter().position(|y| y == x);
        assert!(matches!(
            parse_formula("loaded = ", &r),
            Err(Error::Parse { column: 10, .. })
        ));
        assert!(matches!(
            parse_formula("nope = 1", &r),
            Err(Error::UnknownVariable(_))
        ));
        assert!(parse_formula("loaded = 1 )", &r).is_err());
    }

    #[test]
    fn conjuncts_of_rule_premises() {
        let f = parse("loc(r) = 0 & loc(p) != 1 & loc(r) = loc(p)");
        assert_eq!(
            f.conjuncts().unwrap(),
            vec![
                Literal::Eq(0, 0, true),
                Literal::Eq(1, 1, false),
                Literal::VarEq(0, 1, true)
            ]
        );
        assert!(parse("loc(r) = 0 | loaded = 1").conjuncts().is_none());
        assert_eq!(Formula::Const(true).conjuncts(), Some(vec![]));
    }
}
