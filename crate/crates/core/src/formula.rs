//! Modal formulas of GLP over ordinal-indexed modalities, the strictly
//! positive fragment, modality renamings (demotion and promotion), boxed
//! relativization and Q-formulas.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ordinal::Ordinal;
use crate::syntax::{Cursor, SyntaxError};
use crate::worm::Worm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("modality {0} is not in the range of the renaming")]
    UnmappedModality(Ordinal),
    #[error("formula is not strictly positive")]
    NotStrictlyPositive,
}

/// Strictly positive formula: `⊤`, variables, conjunction and diamonds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SPFormula {
    Top,
    Var(Arc<str>),
    And(Arc<SPFormula>, Arc<SPFormula>),
    Diamond(Ordinal, Arc<SPFormula>),
}

/// Full GLP formula. Diamonds are primitive and never rewritten implicitly.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GLPFormula {
    Top,
    Bottom,
    Var(Arc<str>),
    Not(Arc<GLPFormula>),
    And(Arc<GLPFormula>, Arc<GLPFormula>),
    Or(Arc<GLPFormula>, Arc<GLPFormula>),
    Implies(Arc<GLPFormula>, Arc<GLPFormula>),
    Box(Ordinal, Arc<GLPFormula>),
    Diamond(Ordinal, Arc<GLPFormula>),
}

impl SPFormula {
    pub fn var(name: &str) -> Self {
        SPFormula::Var(Arc::from(name))
    }

    pub fn and(l: SPFormula, r: SPFormula) -> Self {
        SPFormula::And(Arc::new(l), Arc::new(r))
    }

    pub fn diamond(m: Ordinal, body: SPFormula) -> Self {
        SPFormula::Diamond(m, Arc::new(body))
    }

    /// Left-nested conjunction of `parts`; `⊤` when empty.
    pub fn conj(parts: impl IntoIterator<Item = SPFormula>) -> Self {
        parts
            .into_iter()
            .reduce(SPFormula::and)
            .unwrap_or(SPFormula::Top)
    }

    /// Number of nested diamonds along the deepest branch.
    pub fn modal_depth(&self) -> usize {
        match self {
            SPFormula::Top | SPFormula::Var(_) => 0,
            SPFormula::And(l, r) => l.modal_depth().max(r.modal_depth()),
            SPFormula::Diamond(_, b) => 1 + b.modal_depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SPFormula::Top | SPFormula::Var(_) => 1,
            SPFormula::And(l, r) => 1 + l.size() + r.size(),
            SPFormula::Diamond(_, b) => 1 + b.size(),
        }
    }

    /// Top-level conjuncts, flattened, with `⊤` dropped.
    pub fn conjuncts(&self) -> Vec<&SPFormula> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a SPFormula, out: &mut Vec<&'a SPFormula>) {
            match f {
                SPFormula::Top => {}
                SPFormula::And(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn to_glp(&self) -> GLPFormula {
        match self {
            SPFormula::Top => GLPFormula::Top,
            SPFormula::Var(v) => GLPFormula::Var(v.clone()),
            SPFormula::And(l, r) => GLPFormula::and(l.to_glp(), r.to_glp()),
            SPFormula::Diamond(m, b) => GLPFormula::diamond(m.clone(), b.to_glp()),
        }
    }

    /// Drops `∧ ⊤` conjuncts. Display only; never used by the checks.
    pub fn simplify(&self) -> SPFormula {
        match self {
            SPFormula::And(l, r) => match (l.simplify(), r.simplify()) {
                (SPFormula::Top, x) | (x, SPFormula::Top) => x,
                (a, b) => SPFormula::and(a, b),
            },
            SPFormula::Diamond(m, b) => SPFormula::diamond(m.clone(), b.simplify()),
            other => other.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<SPFormula, SyntaxError> {
        let f = GLPFormula::parse(text)?;
        SPFormula::try_from(&f).map_err(|_| SyntaxError {
            position: 0,
            message: "formula is not strictly positive".into(),
        })
    }

    pub fn unicode(&self) -> String {
        self.to_glp().unicode()
    }
}

impl TryFrom<&GLPFormula> for SPFormula {
    type Error = FormulaError;

    fn try_from(f: &GLPFormula) -> Result<Self, Self::Error> {
        Ok(match f {
            GLPFormula::Top => SPFormula::Top,
            GLPFormula::Var(v) => SPFormula::Var(v.clone()),
            GLPFormula::And(l, r) => {
                SPFormula::and(SPFormula::try_from(&**l)?, SPFormula::try_from(&**r)?)
            }
            GLPFormula::Diamond(m, b) => SPFormula::diamond(m.clone(), SPFormula::try_from(&**b)?),
            _ => return Err(FormulaError::NotStrictlyPositive),
        })
    }
}

impl From<&SPFormula> for GLPFormula {
    fn from(f: &SPFormula) -> Self {
        f.to_glp()
    }
}

impl GLPFormula {
    pub fn var(name: &str) -> Self {
        GLPFormula::Var(Arc::from(name))
    }

    pub fn not(f: GLPFormula) -> Self {
        GLPFormula::Not(Arc::new(f))
    }

    pub fn and(l: GLPFormula, r: GLPFormula) -> Self {
        GLPFormula::And(Arc::new(l), Arc::new(r))
    }

    pub fn or(l: GLPFormula, r: GLPFormula) -> Self {
        GLPFormula::Or(Arc::new(l), Arc::new(r))
    }

    pub fn implies(l: GLPFormula, r: GLPFormula) -> Self {
        GLPFormula::Implies(Arc::new(l), Arc::new(r))
    }

    pub fn boxed(m: Ordinal, body: GLPFormula) -> Self {
        GLPFormula::Box(m, Arc::new(body))
    }

    pub fn diamond(m: Ordinal, body: GLPFormula) -> Self {
        GLPFormula::Diamond(m, Arc::new(body))
    }

    pub fn is_strictly_positive(&self) -> bool {
        SPFormula::try_from(self).is_ok()
    }

    /// Rewrites every `⟨ξ⟩f` as `¬[ξ]¬f`.
    pub fn diamonds_to_boxes(&self) -> GLPFormula {
        use GLPFormula::*;
        match self {
            Top | Bottom | Var(_) => self.clone(),
            Not(f) => GLPFormula::not(f.diamonds_to_boxes()),
            And(l, r) => GLPFormula::and(l.diamonds_to_boxes(), r.diamonds_to_boxes()),
            Or(l, r) => GLPFormula::or(l.diamonds_to_boxes(), r.diamonds_to_boxes()),
            Implies(l, r) => GLPFormula::implies(l.diamonds_to_boxes(), r.diamonds_to_boxes()),
            Box(m, f) => GLPFormula::boxed(m.clone(), f.diamonds_to_boxes()),
            Diamond(m, f) => GLPFormula::not(GLPFormula::boxed(
                m.clone(),
                GLPFormula::not(f.diamonds_to_boxes()),
            )),
        }
    }

    pub fn parse(text: &str) -> Result<GLPFormula, SyntaxError> {
        let mut cur = Cursor::new(text);
        let f = parse_implies(&mut cur)?;
        cur.finish()?;
        Ok(f)
    }

    pub fn unicode(&self) -> String {
        let mut out = String::new();
        write_formula(self, 0, true, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            GLPFormula::Implies(..) => 1,
            GLPFormula::Or(..) => 2,
            GLPFormula::And(..) => 3,
            _ => 4,
        }
    }
}

pub(crate) fn parse_implies(cur: &mut Cursor<'_>) -> Result<GLPFormula, SyntaxError> {
    let lhs = parse_or(cur)?;
    if cur.eat_str("->") {
        let rhs = parse_implies(cur)?;
        return Ok(GLPFormula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn parse_or(cur: &mut Cursor<'_>) -> Result<GLPFormula, SyntaxError> {
    let mut acc = parse_and(cur)?;
    while cur.eat_str("\\/") {
        acc = GLPFormula::or(acc, parse_and(cur)?);
    }
    Ok(acc)
}

fn parse_and(cur: &mut Cursor<'_>) -> Result<GLPFormula, SyntaxError> {
    let mut acc = parse_unary(cur)?;
    while cur.eat_str("/\\") {
        acc = GLPFormula::and(acc, parse_unary(cur)?);
    }
    Ok(acc)
}

fn parse_unary(cur: &mut Cursor<'_>) -> Result<GLPFormula, SyntaxError> {
    if cur.eat('~') {
        return Ok(GLPFormula::not(parse_unary(cur)?));
    }
    if cur.eat('<') {
        let m = Ordinal::parse_cursor(cur)?;
        cur.expect('>')?;
        return Ok(GLPFormula::diamond(m, parse_unary(cur)?));
    }
    if cur.eat('[') {
        let m = Ordinal::parse_cursor(cur)?;
        cur.expect(']')?;
        return Ok(GLPFormula::boxed(m, parse_unary(cur)?));
    }
    if cur.eat('(') {
        let f = parse_implies(cur)?;
        cur.expect(')')?;
        return Ok(f);
    }
    if cur.eat('T') {
        return Ok(GLPFormula::Top);
    }
    if cur.eat('F') {
        return Ok(GLPFormula::Bottom);
    }
    match cur.identifier() {
        Some(name) => Ok(GLPFormula::var(name)),
        None => Err(cur.error("expected a formula")),
    }
}

fn write_formula(f: &GLPFormula, ctx: u8, unicode: bool, out: &mut String) {
    let paren = f.precedence() < ctx;
    if paren {
        out.push('(');
    }
    let ord = |m: &Ordinal| if unicode { m.unicode() } else { m.to_string() };
    match f {
        GLPFormula::Top => out.push_str(if unicode { "⊤" } else { "T" }),
        GLPFormula::Bottom => out.push_str(if unicode { "⊥" } else { "F" }),
        GLPFormula::Var(v) => out.push_str(v),
        GLPFormula::Not(g) => {
            out.push_str(if unicode { "¬" } else { "~" });
            write_formula(g, 4, unicode, out);
        }
        GLPFormula::Diamond(m, g) => {
            out.push_str(if unicode { "⟨" } else { "<" });
            out.push_str(&ord(m));
            out.push_str(if unicode { "⟩" } else { ">" });
            write_formula(g, 4, unicode, out);
        }
        GLPFormula::Box(m, g) => {
            out.push('[');
            out.push_str(&ord(m));
            out.push(']');
            write_formula(g, 4, unicode, out);
        }
        GLPFormula::And(l, r) => {
            write_formula(l, 3, unicode, out);
            out.push_str(if unicode { " ∧ " } else { " /\\ " });
            write_formula(r, 4, unicode, out);
        }
        GLPFormula::Or(l, r) => {
            write_formula(l, 2, unicode, out);
            out.push_str(if unicode { " ∨ " } else { " \\/ " });
            write_formula(r, 3, unicode, out);
        }
        GLPFormula::Implies(l, r) => {
            write_formula(l, 2, unicode, out);
            out.push_str(if unicode { " → " } else { " -> " });
            write_formula(r, 1, unicode, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for GLPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_formula(self, 0, false, &mut out);
        f.write_str(&out)
    }
}

impl fmt::Display for SPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_glp())
    }
}

impl FromStr for GLPFormula {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GLPFormula::parse(s)
    }
}

impl FromStr for SPFormula {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SPFormula::parse(s)
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                <$ty>::from_str(&text).map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(SPFormula);
string_serde!(GLPFormula);

/// Anything carrying ordinal modalities that can be collected and renamed.
pub trait Modal: Sized {
    fn collect_modalities(&self, out: &mut BTreeSet<Ordinal>);

    /// Rewrites every modality with `f`; `Err` carries the first modality `f` rejects.
    fn try_map_modalities<F>(&self, f: &mut F) -> Result<Self, Ordinal>
    where
        F: FnMut(&Ordinal) -> Option<Ordinal>;
}

impl Modal for SPFormula {
    fn collect_modalities(&self, out: &mut BTreeSet<Ordinal>) {
        match self {
            SPFormula::Top | SPFormula::Var(_) => {}
            SPFormula::And(l, r) => {
                l.collect_modalities(out);
                r.collect_modalities(out);
            }
            SPFormula::Diamond(m, b) => {
                out.insert(m.clone());
                b.collect_modalities(out);
            }
        }
    }

    fn try_map_modalities<F>(&self, f: &mut F) -> Result<Self, Ordinal>
    where
        F: FnMut(&Ordinal) -> Option<Ordinal>,
    {
        Ok(match self {
            SPFormula::Top | SPFormula::Var(_) => self.clone(),
            SPFormula::And(l, r) => {
                SPFormula::and(l.try_map_modalities(f)?, r.try_map_modalities(f)?)
            }
            SPFormula::Diamond(m, b) => {
                let target = f(m).ok_or_else(|| m.clone())?;
                SPFormula::diamond(target, b.try_map_modalities(f)?)
            }
        })
    }
}

impl Modal for GLPFormula {
    fn collect_modalities(&self, out: &mut BTreeSet<Ordinal>) {
        use GLPFormula::*;
        match self {
            Top | Bottom | Var(_) => {}
            Not(g) => g.collect_modalities(out),
            And(l, r) | Or(l, r) | Implies(l, r) => {
                l.collect_modalities(out);
                r.collect_modalities(out);
            }
            Box(m, g) | Diamond(m, g) => {
                out.insert(m.clone());
                g.collect_modalities(out);
            }
        }
    }

    fn try_map_modalities<F>(&self, f: &mut F) -> Result<Self, Ordinal>
    where
        F: FnMut(&Ordinal) -> Option<Ordinal>,
    {
        use GLPFormula::*;
        Ok(match self {
            Top | Bottom | Var(_) => self.clone(),
            Not(g) => GLPFormula::not(g.try_map_modalities(f)?),
            And(l, r) => GLPFormula::and(l.try_map_modalities(f)?, r.try_map_modalities(f)?),
            Or(l, r) => GLPFormula::or(l.try_map_modalities(f)?, r.try_map_modalities(f)?),
            Implies(l, r) => {
                GLPFormula::implies(l.try_map_modalities(f)?, r.try_map_modalities(f)?)
            }
            Box(m, g) => {
                let t = f(m).ok_or_else(|| m.clone())?;
                GLPFormula::boxed(t, g.try_map_modalities(f)?)
            }
            Diamond(m, g) => {
                let t = f(m).ok_or_else(|| m.clone())?;
                GLPFormula::diamond(t, g.try_map_modalities(f)?)
            }
        })
    }
}

impl Modal for Worm {
    fn collect_modalities(&self, out: &mut BTreeSet<Ordinal>) {
        out.extend(self.modalities().iter().cloned());
    }

    fn try_map_modalities<F>(&self, f: &mut F) -> Result<Self, Ordinal>
    where
        F: FnMut(&Ordinal) -> Option<Ordinal>,
    {
        self.modalities()
            .iter()
            .map(|m| f(m).ok_or_else(|| m.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map(Worm::new)
    }
}

impl<A: Modal, B: Modal> Modal for (A, B) {
    fn collect_modalities(&self, out: &mut BTreeSet<Ordinal>) {
        self.0.collect_modalities(out);
        self.1.collect_modalities(out);
    }

    fn try_map_modalities<F>(&self, f: &mut F) -> Result<Self, Ordinal>
    where
        F: FnMut(&Ordinal) -> Option<Ordinal>,
    {
        Ok((self.0.try_map_modalities(f)?, self.1.try_map_modalities(f)?))
    }
}

/// The set of modalities occurring in `f`.
pub fn mod_set<T: Modal>(f: &T) -> BTreeSet<Ordinal> {
    let mut out = BTreeSet::new();
    f.collect_modalities(&mut out);
    out
}

/// Strictly increasing finite map between modality sets, stored sorted by source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Renaming {
    pairs: Vec<(Ordinal, Ordinal)>,
}

impl Renaming {
    /// Checks injectivity and strict monotonicity.
    pub fn new(mut pairs: Vec<(Ordinal, Ordinal)>) -> Option<Renaming> {
        pairs.sort();
        let ok = pairs
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        ok.then_some(Renaming { pairs })
    }

    /// Enumerates `set` in increasing order onto `0, 1, 2, …`.
    pub fn enumerating(set: &BTreeSet<Ordinal>) -> Renaming {
        Renaming {
            pairs: set
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), Ordinal::from(i as u64)))
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(Ordinal, Ordinal)] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|(s, t)| s == t)
    }

    pub fn apply(&self, m: &Ordinal) -> Option<Ordinal> {
        self.pairs
            .binary_search_by(|(s, _)| s.cmp(m))
            .ok()
            .map(|i| self.pairs[i].1.clone())
    }

    /// Swaps sources and targets.
    pub fn inverse(&self) -> Renaming {
        Renaming {
            pairs: self.pairs.iter().map(|(s, t)| (t.clone(), s.clone())).collect(),
        }
    }

    pub fn rename<T: Modal>(&self, f: &T) -> Result<T, FormulaError> {
        f.try_map_modalities(&mut |m| self.apply(m))
            .map_err(FormulaError::UnmappedModality)
    }
}

/// Renames the joint modality set of `fs` onto an initial segment of ω.
/// With `pin_zero`, 0 joins the set so it is always mapped to itself.
pub fn demote<T: Modal>(fs: &[T], pin_zero: bool) -> (Vec<T>, Renaming) {
    let mut set = BTreeSet::new();
    for f in fs {
        f.collect_modalities(&mut set);
    }
    if pin_zero {
        set.insert(Ordinal::zero());
    }
    let renaming = Renaming::enumerating(&set);
    let out = fs
        .iter()
        .map(|f| renaming.rename(f).expect("renaming covers the joint mod set"))
        .collect();
    (out, renaming)
}

/// Inverse of [`demote`]: maps targets of `r` back to their sources.
pub fn promote<T: Modal>(fs: &[T], r: &Renaming) -> Result<Vec<T>, FormulaError> {
    let inv = r.inverse();
    fs.iter().map(|f| inv.rename(f)).collect()
}

/// `ψ^χ`: every box subformula `[ξ]ψ′` becomes `[ξ](χ → ψ′^χ)`.
/// Diamonds are first rewritten as `¬[ξ]¬`.
pub fn boxed_relativize(psi: &GLPFormula, chi: &GLPFormula) -> GLPFormula {
    fn go(f: &GLPFormula, chi: &GLPFormula) -> GLPFormula {
        use GLPFormula::*;
        match f {
            Top | Bottom | Var(_) => f.clone(),
            Not(g) => GLPFormula::not(go(g, chi)),
            And(l, r) => GLPFormula::and(go(l, chi), go(r, chi)),
            Or(l, r) => GLPFormula::or(go(l, chi), go(r, chi)),
            Implies(l, r) => GLPFormula::implies(go(l, chi), go(r, chi)),
            Box(m, g) => GLPFormula::boxed(m.clone(), GLPFormula::implies(chi.clone(), go(g, chi))),
            Diamond(..) => unreachable!("diamonds are rewritten before relativization"),
        }
    }
    go(&psi.diamonds_to_boxes(), chi)
}

/// `Q(⊤, φ) = ⊤`, `Q(⟨γ⟩A, φ) = ⟨γ⟩(φ ∧ Q(A, φ))`.
pub fn q_formula(worm: &Worm, phi: &GLPFormula) -> GLPFormula {
    worm.modalities()
        .iter()
        .rev()
        .fold(GLPFormula::Top, |acc, m| {
            GLPFormula::diamond(m.clone(), GLPFormula::and(phi.clone(), acc))
        })
}

/// Strictly positive overload of [`q_formula`].
pub fn q_formula_sp(worm: &Worm, phi: &SPFormula) -> SPFormula {
    worm.modalities()
        .iter()
        .rev()
        .fold(SPFormula::Top, |acc, m| {
            SPFormula::diamond(m.clone(), SPFormula::and(phi.clone(), acc))
        })
}

/// `Q_n^0(φ) = ⊤`, `Q_n^{k+1}(φ) = ⟨n⟩(φ ∧ Q_n^k(φ))`.
pub fn q_iter(n: &Ordinal, k: usize, phi: &GLPFormula) -> GLPFormula {
    let mut acc = GLPFormula::Top;
    for _ in 0..k {
        acc = GLPFormula::diamond(n.clone(), GLPFormula::and(phi.clone(), acc));
    }
    acc
}

pub fn q_iter_sp(n: &Ordinal, k: usize, phi: &SPFormula) -> SPFormula {
    let mut acc = SPFormula::Top;
    for _ in 0..k {
        acc = SPFormula::diamond(n.clone(), SPFormula::and(phi.clone(), acc));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GLPFormula {
        GLPFormula::parse(s).unwrap()
    }

    fn o(s: &str) -> Ordinal {
        Ordinal::parse(s).unwrap()
    }

    fn w(s: &str) -> Worm {
        Worm::parse(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<Ordinal> {
        items.iter().map(|s| o(s)).collect()
    }

    #[test]
    fn mod_set_examples() {
        assert_eq!(mod_set(&g("<w>(p /\\ <3>p)")), set(&["3", "w"]));
        assert!(mod_set(&g("p -> q")).is_empty());
        assert_eq!(mod_set(&g("<1>[1]p")), set(&["1"]));
    }

    #[test]
    fn demote_examples() {
        let (fs, r) = demote(&[g("<w><3>T")], false);
        assert_eq!(fs, vec![g("<1><0>T")]);
        assert_eq!(r.pairs(), &[(o("3"), o("0")), (o("w"), o("1"))]);

        let (fs, r) = demote(&[g("<w>T"), g("<3>p")], true);
        assert_eq!(fs, vec![g("<2>T"), g("<1>p")]);
        assert_eq!(
            r.pairs(),
            &[(o("0"), o("0")), (o("3"), o("1")), (o("w"), o("2"))]
        );

        let (fs, r) = demote(&[g("<1><0>T")], false);
        assert_eq!(fs, vec![g("<1><0>T")]);
        assert!(r.is_identity());
    }

    #[test]
    fn promote_examples() {
        let r = Renaming::new(vec![(o("3"), o("0")), (o("w"), o("1"))]).unwrap();
        assert_eq!(promote(&[g("<1><0>T")], &r).unwrap(), vec![g("<w><3>T")]);
        assert_eq!(
            promote(&[g("<5>T")], &r),
            Err(FormulaError::UnmappedModality(o("5")))
        );
        let fs = vec![g("<w+1>p /\\ [3]q"), g("<w^w>~p")];
        let (d, r) = demote(&fs, true);
        assert_eq!(promote(&d, &r).unwrap(), fs);
    }

    #[test]
    fn renaming_rejects_non_monotone_maps() {
        assert!(Renaming::new(vec![(o("0"), o("1")), (o("1"), o("0"))]).is_none());
        assert!(Renaming::new(vec![(o("0"), o("1")), (o("1"), o("1"))]).is_none());
    }

    #[test]
    fn boxed_relativize_examples() {
        assert_eq!(boxed_relativize(&g("[0]p"), &g("q")), g("[0](q -> p)"));
        assert_eq!(boxed_relativize(&g("p"), &g("q")), g("p"));
        assert_eq!(
            boxed_relativize(&g("[1][0]p"), &g("q")),
            g("[1](q -> [0](q -> p))")
        );
        // diamonds are made explicit as ~[x]~ first
        assert_eq!(
            boxed_relativize(&g("<0>p"), &g("q")),
            g("~[0](q -> ~p)")
        );
    }

    #[test]
    fn q_formula_examples() {
        let p = g("p");
        assert_eq!(q_formula(&w("T"), &p), g("T"));
        assert_eq!(q_formula(&w("<0>T"), &p), g("<0>(p /\\ T)"));
        assert_eq!(
            q_formula(&w("<2><0>T"), &p),
            g("<2>(p /\\ <0>(p /\\ T))")
        );
    }

    #[test]
    fn q_iter_examples() {
        let p = g("p");
        assert_eq!(q_iter(&o("1"), 0, &p), g("T"));
        assert_eq!(q_iter(&o("1"), 1, &p), g("<1>(p /\\ T)"));
        assert_eq!(
            q_iter(&o("0"), 2, &g("T")),
            g("<0>(T /\\ <0>(T /\\ T))")
        );
    }

    #[test]
    fn q_iter_matches_q_formula_on_uniform_worms() {
        for n in 0..=3u64 {
            for k in 0..=5usize {
                let worm = Worm::new(vec![Ordinal::from(n); k]);
                for phi in [g("p"), g("T"), g("<1>p /\\ q")] {
                    assert_eq!(q_iter(&Ordinal::from(n), k, &phi), q_formula(&worm, &phi));
                }
                let sp = SPFormula::var("p");
                assert_eq!(q_iter_sp(&Ordinal::from(n), k, &sp), q_formula_sp(&worm, &sp));
            }
        }
    }

    #[test]
    fn diamond_and_negated_box_stay_distinct() {
        assert_ne!(g("<0>p"), g("~[0]~p"));
        assert_eq!(g("<0>p").diamonds_to_boxes(), g("~[0]~p"));
    }

    #[test]
    fn printing_and_precedence() {
        let f = g("p -> q -> r");
        assert_eq!(f, g("p -> (q -> r)"));
        assert_eq!(f.to_string(), "p -> q -> r");
        assert_eq!(g("(p -> q) -> r").to_string(), "(p -> q) -> r");
        assert_eq!(g("p /\\ (q /\\ r)").to_string(), "p /\\ (q /\\ r)");
        assert_eq!(g("p /\\ q /\\ r").to_string(), "p /\\ q /\\ r");
        assert_eq!(g("~<w+1>(p \\/ F)").to_string(), "~<w+1>(p \\/ F)");
        assert_eq!(g("<1>p /\\ [0]q").unicode(), "⟨1⟩p ∧ [0]q");
        assert!(SPFormula::parse("~p").is_err());
        assert!(GLPFormula::parse("<1p").is_err());
    }

    #[test]
    fn strictly_positive_embedding() {
        let sp = SPFormula::parse("<1>(p /\\ <0>T)").unwrap();
        let back = SPFormula::try_from(&sp.to_glp()).unwrap();
        assert_eq!(back, sp);
        assert_eq!(sp.simplify().to_string(), "<1>(p /\\ <0>T)");
        assert_eq!(
            SPFormula::parse("<0>(p /\\ T)").unwrap().simplify().to_string(),
            "<0>p"
        );
    }
}
