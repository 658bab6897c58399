//! Derivability oracle for strictly positive sequents.
//!
//! The rule set is the reflection-calculus shadow of GLP:
//!
//! | rule          | shape                                              |
//! |---------------|----------------------------------------------------|
//! | `top`         | `A ⊢ ⊤`                                            |
//! | `refl`        | `A ⊢ A`                                            |
//! | `and-elim-l/r`| `A∧B ⊢ A`, `A∧B ⊢ B`                               |
//! | `and-intro`   | `A⊢B`, `A⊢C` / `A ⊢ B∧C`                           |
//! | `cut`         | `A⊢B`, `B⊢C` / `A⊢C`                               |
//! | `mono`        | `A⊢B` / `⟨α⟩A ⊢ ⟨α⟩B`                              |
//! | `trans`       | `⟨α⟩⟨α⟩A ⊢ ⟨α⟩A`                                   |
//! | `lower`       | `⟨α⟩A ⊢ ⟨β⟩A` for `β < α`                          |
//! | `push`        | `⟨α⟩A ∧ ⟨β⟩B ⊢ ⟨α⟩(A ∧ ⟨β⟩B)` for `β < α`          |
//!
//! Search is goal directed. A diamond goal `⟨α⟩B` is discharged by picking a
//! conjunct `⟨β⟩C` with `β ≥ α` and moving into the successor world
//! `C ∧ (lowered diamonds of the antecedent) ∧ ⟨β−1⟩(self)`, where the
//! lowered diamonds and the self reference are derived with `lower` and
//! `push`. The successor must then prove `B` (or `⟨α⟩B`, closing with
//! `trans`). Depth counts diamond steps; the search is iterative deepening
//! with a per-call memo table. Every success is turned into an explicit
//! derivation tree that [`replay`] re-checks rule by rule.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{demote, Renaming, SPFormula};
use crate::ordinal::Ordinal;
use crate::syntax::{Cursor, SyntaxError};

pub const DEFAULT_DEPTH: u32 = 14;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RcError {
    #[error("node budget of {budget} exhausted before depth {depth}")]
    ResourceExhausted { budget: u64, depth: u32 },
    #[error("maximum depth must be at least 1")]
    InvalidDepth,
}

/// `antecedent ⊢ succedent` over strictly positive formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub antecedent: SPFormula,
    pub succedent: SPFormula,
}

impl Sequent {
    pub fn new(antecedent: SPFormula, succedent: SPFormula) -> Self {
        Sequent {
            antecedent,
            succedent,
        }
    }

    pub fn parse(text: &str) -> Result<Sequent, SyntaxError> {
        let mut cur = Cursor::new(text);
        let lhs = crate::formula::parse_implies(&mut cur)?;
        if !cur.eat_str("|-") {
            return Err(cur.error("expected '|-'"));
        }
        let rhs = crate::formula::parse_implies(&mut cur)?;
        cur.finish()?;
        let sp = |f: &crate::formula::GLPFormula| {
            SPFormula::try_from(f).map_err(|_| SyntaxError {
                position: 0,
                message: "sequents must be strictly positive".into(),
            })
        };
        Ok(Sequent::new(sp(&lhs)?, sp(&rhs)?))
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.antecedent, self.succedent)
    }
}

impl FromStr for Sequent {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sequent::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Top,
    Refl,
    AndElimL,
    AndElimR,
    AndIntro,
    Cut,
    Mono,
    Trans,
    Lower,
    Push,
}

/// A derivation tree; every node is one rule instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: SequentText,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<Derivation>,
}

/// Sequent that serializes as `A |- B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentText(pub Sequent);

impl Serialize for SequentText {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for SequentText {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Sequent::parse(&text)
            .map(SequentText)
            .map_err(serde::de::Error::custom)
    }
}

impl Derivation {
    pub fn antecedent(&self) -> &SPFormula {
        &self.conclusion.0.antecedent
    }

    pub fn succedent(&self) -> &SPFormula {
        &self.conclusion.0.succedent
    }

    pub fn node_count(&self) -> usize {
        1 + self.premises.iter().map(Derivation::node_count).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {rule:?} step at {path:?}: {message}")]
pub struct ReplayError {
    pub rule: Rule,
    /// Premise indices from the root to the offending node.
    pub path: Vec<usize>,
    pub message: String,
}

/// Re-checks every node of a derivation against the rule list.
pub fn replay(d: &Derivation) -> Result<(), ReplayError> {
    let mut path = Vec::new();
    replay_at(d, &mut path)
}

fn replay_at(d: &Derivation, path: &mut Vec<usize>) -> Result<(), ReplayError> {
    use SPFormula::*;
    let fail = |msg: &str| ReplayError {
        rule: d.rule,
        path: path.clone(),
        message: msg.to_string(),
    };
    let (a, b) = (d.antecedent(), d.succedent());
    let arity = match d.rule {
        Rule::AndIntro | Rule::Cut => 2,
        Rule::Mono => 1,
        _ => 0,
    };
    if d.premises.len() != arity {
        return Err(fail("wrong number of premises"));
    }
    let ok = match d.rule {
        Rule::Top => *b == Top,
        Rule::Refl => a == b,
        Rule::AndElimL => matches!(a, And(l, _) if **l == *b),
        Rule::AndElimR => matches!(a, And(_, r) if **r == *b),
        Rule::AndIntro => match b {
            And(l, r) => {
                let (p, q) = (&d.premises[0], &d.premises[1]);
                p.antecedent() == a
                    && q.antecedent() == a
                    && p.succedent() == &**l
                    && q.succedent() == &**r
            }
            _ => false,
        },
        Rule::Cut => {
            let (p, q) = (&d.premises[0], &d.premises[1]);
            p.antecedent() == a && p.succedent() == q.antecedent() && q.succedent() == b
        }
        Rule::Mono => match (a, b) {
            (Diamond(x, l), Diamond(y, r)) => {
                let p = &d.premises[0];
                x == y && p.antecedent() == &**l && p.succedent() == &**r
            }
            _ => false,
        },
        Rule::Trans => match (a, b) {
            (Diamond(x, inner), Diamond(y, body)) => {
                x == y && matches!(&**inner, Diamond(z, c) if z == x && c == body)
            }
            _ => false,
        },
        Rule::Lower => match (a, b) {
            (Diamond(x, l), Diamond(y, r)) => y < x && l == r,
            _ => false,
        },
        Rule::Push => match (a, b) {
            (And(l, r), Diamond(z, body)) => match (&**l, &**r, &**body) {
                (Diamond(x, p), Diamond(y, q), And(bp, bq)) => {
                    y < x && z == x && bp == p && matches!(&**bq, Diamond(y2, q2) if y2 == y && q2 == q)
                }
                _ => false,
            },
            _ => false,
        },
    };
    if !ok {
        return Err(fail(&format!("conclusion {} does not match", d.conclusion.0)));
    }
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        replay_at(p, path)?;
        path.pop();
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub cache_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofStatus {
    Derivable(Derivation),
    NotFoundWithinDepth(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofResult {
    pub status: ProofStatus,
    pub stats: SearchStats,
    /// Renaming applied before the search (identity on finite initial segments).
    pub renaming: Renaming,
    /// Iterative-deepening bound at which the proof was found.
    pub depth_used: Option<u32>,
}

impl ProofResult {
    pub fn is_derivable(&self) -> bool {
        matches!(self.status, ProofStatus::Derivable(_))
    }

    pub fn derivation(&self) -> Option<&Derivation> {
        match &self.status {
            ProofStatus::Derivable(d) => Some(d),
            ProofStatus::NotFoundWithinDepth(_) => None,
        }
    }

    pub fn into_derivation(self) -> Option<Derivation> {
        match self.status {
            ProofStatus::Derivable(d) => Some(d),
            ProofStatus::NotFoundWithinDepth(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProverConfig {
    pub max_depth: u32,
    pub budget: u64,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            max_depth: DEFAULT_DEPTH,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl ProverConfig {
    pub fn with_depth(max_depth: u32) -> Self {
        ProverConfig {
            max_depth,
            ..ProverConfig::default()
        }
    }
}

/// Searches for a derivation of `s` with at most `config.max_depth` diamond steps.
pub fn prove(s: &Sequent, config: &ProverConfig) -> Result<ProofResult, RcError> {
    if config.max_depth < 1 {
        return Err(RcError::InvalidDepth);
    }
    let (demoted, renaming) = demote(&[s.antecedent.clone(), s.succedent.clone()], true);
    let mut search = Search::new(config.budget);
    let ante = search.arena.import(&demoted[0]);
    let goal = search.arena.import(&demoted[1]);
    let ctx = search.context_of(ante);
    for depth in 1..=config.max_depth {
        let found = search
            .search(ctx, goal, depth)
            .map_err(|()| RcError::ResourceExhausted {
                budget: config.budget,
                depth,
            })?;
        if let Some(plan) = found {
            let tree = search.build(ante, goal, &plan);
            let targets: Vec<Ordinal> = renaming.pairs().iter().map(|(s, _)| s.clone()).collect();
            let derivation = search.arena.export_derivation(&tree, &targets);
            return Ok(ProofResult {
                status: ProofStatus::Derivable(derivation),
                stats: search.stats,
                renaming,
                depth_used: Some(depth),
            });
        }
    }
    Ok(ProofResult {
        status: ProofStatus::NotFoundWithinDepth(config.max_depth),
        stats: search.stats,
        renaming,
        depth_used: None,
    })
}

/// Convenience wrapper: `Some(derivation)` when `a ⊢ b` is found.
pub fn derive(a: &SPFormula, b: &SPFormula, config: &ProverConfig) -> Result<Option<Derivation>, RcError> {
    Ok(prove(&Sequent::new(a.clone(), b.clone()), config)?.into_derivation())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivResult {
    pub forward: ProofResult,
    pub backward: ProofResult,
}

impl EquivResult {
    pub fn equivalent(&self) -> bool {
        self.forward.is_derivable() && self.backward.is_derivable()
    }
}

/// `a ≡ b`: both directions derivable.
pub fn prove_equiv(a: &SPFormula, b: &SPFormula, config: &ProverConfig) -> Result<EquivResult, RcError> {
    Ok(EquivResult {
        forward: prove(&Sequent::new(a.clone(), b.clone()), config)?,
        backward: prove(&Sequent::new(b.clone(), a.clone()), config)?,
    })
}

// ---------------------------------------------------------------------------
// hash-consed formulas over natural-number modalities

type Id = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Var(Arc<str>),
    And(Id, Id),
    Dia(u32, Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    atoms: HashMap<Id, Rc<[Id]>>,
    depth: HashMap<Id, usize>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    fn node(&self, id: Id) -> &Node {
        &self.nodes[id as usize]
    }

    fn and(&mut self, l: Id, r: Id) -> Id {
        self.intern(Node::And(l, r))
    }

    fn dia(&mut self, m: u32, b: Id) -> Id {
        self.intern(Node::Dia(m, b))
    }

    fn import(&mut self, f: &SPFormula) -> Id {
        match f {
            SPFormula::Top => self.intern(Node::Top),
            SPFormula::Var(v) => self.intern(Node::Var(v.clone())),
            SPFormula::And(l, r) => {
                let (l, r) = (self.import(l), self.import(r));
                self.and(l, r)
            }
            SPFormula::Diamond(m, b) => {
                let m = m.to_u64().expect("demoted modalities are natural numbers") as u32;
                let b = self.import(b);
                self.dia(m, b)
            }
        }
    }

    /// Sorted, deduplicated top-level conjuncts other than `⊤`.
    fn atoms(&mut self, id: Id) -> Rc<[Id]> {
        if let Some(a) = self.atoms.get(&id) {
            return a.clone();
        }
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            match *self.node(x) {
                Node::Top => {}
                Node::And(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                _ => out.push(x),
            }
        }
        out.sort_unstable();
        out.dedup();
        let out: Rc<[Id]> = out.into();
        self.atoms.insert(id, out.clone());
        out
    }

    fn modal_depth(&mut self, id: Id) -> usize {
        if let Some(&d) = self.depth.get(&id) {
            return d;
        }
        let d = match *self.node(id) {
            Node::Top | Node::Var(_) => 0,
            Node::And(l, r) => self.modal_depth(l).max(self.modal_depth(r)),
            Node::Dia(_, b) => 1 + self.modal_depth(b),
        };
        self.depth.insert(id, d);
        d
    }

    fn export(&self, id: Id, modalities: &[Ordinal], cache: &mut HashMap<Id, SPFormula>) -> SPFormula {
        if let Some(f) = cache.get(&id) {
            return f.clone();
        }
        let f = match self.node(id) {
            Node::Top => SPFormula::Top,
            Node::Var(v) => SPFormula::Var(v.clone()),
            Node::And(l, r) => SPFormula::And(
                Arc::new(self.export(*l, modalities, cache)),
                Arc::new(self.export(*r, modalities, cache)),
            ),
            Node::Dia(m, b) => SPFormula::Diamond(
                modalities[*m as usize].clone(),
                Arc::new(self.export(*b, modalities, cache)),
            ),
        };
        cache.insert(id, f.clone());
        f
    }

    fn export_derivation(&self, tree: &Tree, modalities: &[Ordinal]) -> Derivation {
        let mut cache = HashMap::new();
        self.export_tree(tree, modalities, &mut cache)
    }

    fn export_tree(&self, t: &Tree, modalities: &[Ordinal], cache: &mut HashMap<Id, SPFormula>) -> Derivation {
        Derivation {
            rule: t.rule,
            conclusion: SequentText(Sequent::new(
                self.export(t.ante, modalities, cache),
                self.export(t.succ, modalities, cache),
            )),
            premises: t
                .premises
                .iter()
                .map(|p| self.export_tree(p, modalities, cache))
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// search

type Ctx = u32;

#[derive(Debug)]
enum Plan {
    Top,
    /// The goal is a conjunct of the antecedent.
    Proj,
    And(Rc<Plan>, Rc<Plan>),
    Step(Box<Step>),
}

#[derive(Debug)]
struct Step {
    /// `⟨β⟩C`, a conjunct of the antecedent.
    witness: Id,
    /// `(⟨β′⟩D, ⟨δ⟩D)` pairs, `δ = min(β′, β−1)`.
    inherits: Vec<(Id, Id)>,
    fuel: usize,
    /// The successor proves `⟨α⟩B` rather than `B`.
    trans: bool,
    sub: Rc<Plan>,
    needed: u32,
}

impl Plan {
    fn needed(&self) -> u32 {
        match self {
            Plan::Top | Plan::Proj => 0,
            Plan::And(a, b) => a.needed().max(b.needed()),
            Plan::Step(s) => s.needed,
        }
    }
}

#[derive(Default)]
struct MemoEntry {
    success: Option<Rc<Plan>>,
    /// Largest depth at which the goal is known to fail.
    failed_at: Option<u32>,
}

struct Tree {
    rule: Rule,
    ante: Id,
    succ: Id,
    premises: Vec<Rc<Tree>>,
}

struct Search {
    arena: Arena,
    contexts: Vec<Rc<[Id]>>,
    context_index: HashMap<Rc<[Id]>, Ctx>,
    memo: HashMap<(Ctx, Id), MemoEntry>,
    models: HashMap<Ctx, Rc<Model>>,
    verdicts: HashMap<(Ctx, Id), bool>,
    stats: SearchStats,
    budget: u64,
}

/// Finite frame read off an antecedent. Edge labels are the largest modality
/// relating two worlds, with `-1` for no edge. The labels are closed under the
/// frame conditions of every rule, so a goal false at the root is underivable.
struct Model {
    vars: Vec<Vec<Id>>,
    lab: Vec<Vec<i64>>,
}

impl Model {
    fn build(arena: &mut Arena, atoms: &[Id]) -> Model {
        let mut m = Model {
            vars: vec![Vec::new()],
            lab: Vec::new(),
        };
        let mut edges = Vec::new();
        let mut worlds = HashMap::new();
        m.unfold(arena, 0, atoms, &mut edges, &mut worlds);
        let n = m.vars.len();
        m.lab = vec![vec![-1; n]; n];
        for (x, y, l) in edges {
            m.lab[x][y] = m.lab[x][y].max(l);
        }
        m.close();
        m
    }

    /// Worlds are shared between diamonds with the same body. Sharing only
    /// adds truths, so the root still satisfies the antecedent.
    fn unfold(
        &mut self,
        arena: &mut Arena,
        w: usize,
        atoms: &[Id],
        edges: &mut Vec<(usize, usize, i64)>,
        worlds: &mut HashMap<Id, usize>,
    ) {
        for &a in atoms {
            match *arena.node(a) {
                Node::Var(_) => self.vars[w].push(a),
                Node::Dia(l, b) => {
                    let c = match worlds.get(&b) {
                        Some(&c) => c,
                        None => {
                            let c = self.vars.len();
                            self.vars.push(Vec::new());
                            worlds.insert(b, c);
                            let inner = arena.atoms(b);
                            self.unfold(arena, c, &inner, edges, worlds);
                            c
                        }
                    };
                    edges.push((w, c, l as i64));
                }
                Node::Top | Node::And(..) => {}
            }
        }
    }

    fn close(&mut self) {
        let n = self.vars.len();
        let mut changed = true;
        while changed {
            changed = false;
            for x in 0..n {
                for y in 0..n {
                    let xy = self.lab[x][y];
                    if xy < 0 {
                        continue;
                    }
                    for z in 0..n {
                        let xz = self.lab[x][z];
                        let yz = self.lab[y][z];
                        let via = yz.min(xy);
                        if via > self.lab[x][z] {
                            self.lab[x][z] = via;
                            changed = true;
                        }
                        let side = xz.min(xy - 1);
                        if side > yz {
                            self.lab[y][z] = side;
                            changed = true;
                        }
                    }
                }
            }
        }
    }

    fn holds(&self, arena: &Arena, w: usize, f: Id, memo: &mut HashMap<(usize, Id), bool>) -> bool {
        if let Some(&v) = memo.get(&(w, f)) {
            return v;
        }
        let v = match *arena.node(f) {
            Node::Top => true,
            Node::Var(_) => self.vars[w].contains(&f),
            Node::And(l, r) => self.holds(arena, w, l, memo) && self.holds(arena, w, r, memo),
            Node::Dia(a, b) => {
                (0..self.vars.len()).any(|z| self.lab[w][z] >= a as i64 && self.holds(arena, z, b, memo))
            }
        };
        memo.insert((w, f), v);
        v
    }
}

impl Search {
    fn new(budget: u64) -> Self {
        Search {
            arena: Arena::default(),
            contexts: Vec::new(),
            context_index: HashMap::new(),
            memo: HashMap::new(),
            models: HashMap::new(),
            verdicts: HashMap::new(),
            stats: SearchStats::default(),
            budget,
        }
    }

    fn context_of(&mut self, f: Id) -> Ctx {
        let atoms = self.arena.atoms(f);
        if let Some(&c) = self.context_index.get(&atoms) {
            return c;
        }
        let c = self.contexts.len() as Ctx;
        self.contexts.push(atoms.clone());
        self.context_index.insert(atoms, c);
        c
    }

    /// Whether `goal` is true at the root of the frame built from `ctx`.
    fn plausible(&mut self, ctx: Ctx, goal: Id) -> bool {
        if let Some(&v) = self.verdicts.get(&(ctx, goal)) {
            return v;
        }
        let model = match self.models.get(&ctx) {
            Some(m) => m.clone(),
            None => {
                let atoms = self.contexts[ctx as usize].clone();
                let m = Rc::new(Model::build(&mut self.arena, &atoms));
                self.models.insert(ctx, m.clone());
                m
            }
        };
        let v = model.holds(&self.arena, 0, goal, &mut HashMap::new());
        self.verdicts.insert((ctx, goal), v);
        v
    }

    /// Successor world for witness `⟨β⟩C` in context `ctx`.
    fn successor(&mut self, ctx: Ctx, witness: Id, fuel: usize) -> (Id, Vec<(Id, Id)>) {
        let Node::Dia(beta, body) = *self.arena.node(witness) else {
            unreachable!("witness is a diamond")
        };
        if beta == 0 {
            return (body, Vec::new());
        }
        let atoms = self.contexts[ctx as usize].clone();
        let mut inherits = Vec::new();
        let mut cur = body;
        for &a in atoms.iter() {
            if a == witness {
                continue;
            }
            if let Node::Dia(m, d) = *self.arena.node(a) {
                let low = self.arena.dia(m.min(beta - 1), d);
                inherits.push((a, low));
                cur = self.arena.and(cur, low);
            }
        }
        let t0 = cur;
        for _ in 0..fuel {
            let me = self.arena.dia(beta - 1, cur);
            cur = self.arena.and(t0, me);
        }
        (cur, inherits)
    }

    fn search(&mut self, ctx: Ctx, goal: Id, depth: u32) -> Result<Option<Rc<Plan>>, ()> {
        match self.arena.node(goal).clone() {
            Node::Top => Ok(Some(Rc::new(Plan::Top))),
            Node::Var(_) => Ok(self.contexts[ctx as usize]
                .binary_search(&goal)
                .is_ok()
                .then(|| Rc::new(Plan::Proj))),
            Node::And(l, r) => {
                let Some(pl) = self.search(ctx, l, depth)? else {
                    return Ok(None);
                };
                let Some(pr) = self.search(ctx, r, depth)? else {
                    return Ok(None);
                };
                Ok(Some(Rc::new(Plan::And(pl, pr))))
            }
            Node::Dia(alpha, body) => {
                if self.contexts[ctx as usize].binary_search(&goal).is_ok() {
                    return Ok(Some(Rc::new(Plan::Proj)));
                }
                if depth == 0 || !self.plausible(ctx, goal) {
                    return Ok(None);
                }
                if let Some(entry) = self.memo.get(&(ctx, goal)) {
                    if let Some(plan) = &entry.success {
                        if plan.needed() <= depth {
                            self.stats.cache_hits += 1;
                            return Ok(Some(plan.clone()));
                        }
                    }
                    if entry.failed_at.is_some_and(|f| depth <= f) {
                        self.stats.cache_hits += 1;
                        return Ok(None);
                    }
                }
                self.stats.nodes_expanded += 1;
                if self.stats.nodes_expanded > self.budget {
                    return Err(());
                }
                let found = self.expand_diamond(ctx, goal, alpha, body, depth)?;
                let entry = self.memo.entry((ctx, goal)).or_default();
                match &found {
                    Some(plan) => entry.success = Some(plan.clone()),
                    None => entry.failed_at = Some(entry.failed_at.map_or(depth, |f| f.max(depth))),
                }
                Ok(found)
            }
        }
    }

    fn expand_diamond(&mut self, ctx: Ctx, goal: Id, alpha: u32, body: Id, depth: u32) -> Result<Option<Rc<Plan>>, ()> {
        let atoms = self.contexts[ctx as usize].clone();
        let fuel = self.arena.modal_depth(goal);
        for &w in atoms.iter() {
            let Node::Dia(beta, _) = *self.arena.node(w) else {
                continue;
            };
            if beta < alpha {
                continue;
            }
            let (succ, inherits) = self.successor(ctx, w, fuel);
            let succ_ctx = self.context_of(succ);
            for trans in [false, true] {
                let target = if trans { goal } else { body };
                if let Some(sub) = self.search(succ_ctx, target, depth - 1)? {
                    let needed = 1 + sub.needed();
                    return Ok(Some(Rc::new(Plan::Step(Box::new(Step {
                        witness: w,
                        inherits,
                        fuel,
                        trans,
                        sub,
                        needed,
                    })))));
                }
            }
        }
        Ok(None)
    }

    // -- derivation construction --------------------------------------------

    fn leaf(&self, rule: Rule, ante: Id, succ: Id) -> Rc<Tree> {
        Rc::new(Tree {
            rule,
            ante,
            succ,
            premises: Vec::new(),
        })
    }

    fn node(&self, rule: Rule, ante: Id, succ: Id, premises: Vec<Rc<Tree>>) -> Rc<Tree> {
        Rc::new(Tree {
            rule,
            ante,
            succ,
            premises,
        })
    }

    fn cut(&self, first: Rc<Tree>, second: Rc<Tree>) -> Rc<Tree> {
        let (a, c) = (first.ante, second.succ);
        self.node(Rule::Cut, a, c, vec![first, second])
    }

    /// `a ⊢ atom` where `atom` is one of the flattened conjuncts of `a`.
    fn project(&mut self, a: Id, atom: Id) -> Rc<Tree> {
        if a == atom {
            return self.leaf(Rule::Refl, a, a);
        }
        let Node::And(l, r) = *self.arena.node(a) else {
            unreachable!("projection target is not a conjunct")
        };
        let (side, rule) = if self.arena.atoms(l).binary_search(&atom).is_ok() {
            (l, Rule::AndElimL)
        } else {
            (r, Rule::AndElimR)
        };
        let elim = self.leaf(rule, a, side);
        let rest = self.project(side, atom);
        self.cut(elim, rest)
    }

    /// `a ⊢ ⟨lo⟩body` from `a ⊢ ⟨hi⟩body`.
    fn lower(&mut self, d: Rc<Tree>, lo: u32) -> Rc<Tree> {
        let Node::Dia(hi, body) = *self.arena.node(d.succ) else {
            unreachable!()
        };
        if hi == lo {
            return d;
        }
        let target = self.arena.dia(lo, body);
        let step = self.leaf(Rule::Lower, d.succ, target);
        self.cut(d, step)
    }

    /// From `a ⊢ ⟨β⟩X` and `a ⊢ ⟨δ⟩Y` (δ < β) derive `a ⊢ ⟨β⟩(X ∧ ⟨δ⟩Y)`.
    fn push(&mut self, a: Id, big: Rc<Tree>, small: Rc<Tree>) -> Rc<Tree> {
        let Node::Dia(beta, x) = *self.arena.node(big.succ) else {
            unreachable!()
        };
        let pair = self.arena.and(big.succ, small.succ);
        let inner = self.arena.and(x, small.succ);
        let target = self.arena.dia(beta, inner);
        let both = self.node(Rule::AndIntro, a, pair, vec![big, small]);
        let step = self.leaf(Rule::Push, pair, target);
        self.cut(both, step)
    }

    fn build(&mut self, a: Id, goal: Id, plan: &Plan) -> Rc<Tree> {
        match plan {
            Plan::Top => self.leaf(Rule::Top, a, goal),
            Plan::Proj => self.project(a, goal),
            Plan::And(pl, pr) => {
                let Node::And(l, r) = *self.arena.node(goal) else {
                    unreachable!()
                };
                let dl = self.build(a, l, pl);
                let dr = self.build(a, r, pr);
                self.node(Rule::AndIntro, a, goal, vec![dl, dr])
            }
            Plan::Step(step) => self.build_step(a, goal, step),
        }
    }

    fn build_step(&mut self, a: Id, goal: Id, step: &Step) -> Rc<Tree> {
        let Node::Dia(alpha, body) = *self.arena.node(goal) else {
            unreachable!()
        };
        let Node::Dia(beta, _) = *self.arena.node(step.witness) else {
            unreachable!()
        };
        // a ⊢ ⟨β⟩T₀ with T₀ = C ∧ inherited diamonds
        let mut d0 = self.project(a, step.witness);
        for &(src, low) in &step.inherits {
            let Node::Dia(delta, _) = *self.arena.node(low) else {
                unreachable!()
            };
            let from = self.project(a, src);
            let lowered = self.lower(from, delta);
            d0 = self.push(a, d0, lowered);
        }
        // a ⊢ ⟨β⟩T_{i+1} with T_{i+1} = T₀ ∧ ⟨β−1⟩T_i
        let mut di = d0.clone();
        if beta > 0 {
            for _ in 0..step.fuel {
                let me = self.lower(di, beta - 1);
                di = self.push(a, d0.clone(), me);
            }
        }
        let Node::Dia(_, succ) = *self.arena.node(di.succ) else {
            unreachable!()
        };
        let target = if step.trans { goal } else { body };
        let sub = self.build(succ, target, &step.sub);
        let lifted_ante = self.arena.dia(beta, succ);
        let lifted_succ = self.arena.dia(beta, target);
        let mono = self.node(Rule::Mono, lifted_ante, lifted_succ, vec![sub]);
        let mut res = self.cut(di, mono);
        if !step.trans {
            return self.lower(res, alpha);
        }
        res = self.lower(res, alpha);
        let step_trans = self.leaf(Rule::Trans, res.succ, goal);
        self.cut(res, step_trans)
    }
}
