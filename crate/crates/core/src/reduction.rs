//! Bounded verification of conservativity and reduction-property statements.
//!
//! Every check enumerates a finite [`Universe`] of strictly positive formulas,
//! turns each quantified statement into independent instances, and runs the
//! [`rc`](crate::rc) oracle on them. Instances are evaluated in parallel and
//! assembled in input order, so a report depends only on its parameters.
//!
//! Conservation instances look for the least family index `k ≤ K` whose
//! member derives the consequence. When none is found the search is repeated
//! once with `2K` and twice the depth; success there is reported as
//! `inconclusive`, failure as `bounded-counterexample`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{demote, mod_set, promote, q_formula_sp, q_iter_sp, Renaming, SPFormula};
use crate::ordinal::Ordinal;
use crate::rc::{prove, Derivation, ProofStatus, ProverConfig, Sequent, DEFAULT_BUDGET, DEFAULT_DEPTH};
use crate::worm::{compare_order_values, Worm, WormOrder};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("bad bounds: {0}")]
    BadBounds(String),
}

fn bad(msg: impl Into<String>) -> ReductionError {
    ReductionError::BadBounds(msg.into())
}

// ---------------------------------------------------------------------------
// universe

/// Finite pool of formulas the checks quantify over.
///
/// The pool holds every worm over the modality set of length at most
/// `max_length`, followed by the same shapes ending in each variable instead
/// of `⊤`. An empty palette gives an empty pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    pub max_modality: Ordinal,
    pub max_length: usize,
    pub variables: Vec<String>,
    pub seed: u64,
    /// Instances drawn per check; 0 means exhaustive.
    pub sample_size: usize,
    /// Explicit modality set used instead of `0..=max_modality`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palette: Option<Vec<Ordinal>>,
}

impl Universe {
    pub fn new(max_modality: u64, max_length: usize) -> Self {
        Universe {
            max_modality: Ordinal::from(max_modality),
            max_length,
            variables: vec!["p".to_string()],
            seed: 0,
            sample_size: 0,
            palette: None,
        }
    }

    pub fn with_palette(palette: Vec<Ordinal>, max_length: usize) -> Self {
        let mut palette = palette;
        palette.sort();
        palette.dedup();
        Universe {
            max_modality: palette.last().cloned().unwrap_or_else(Ordinal::zero),
            palette: Some(palette),
            ..Universe::new(0, max_length)
        }
    }

    pub fn modalities(&self) -> Result<Vec<Ordinal>, ReductionError> {
        if let Some(p) = &self.palette {
            let mut p = p.clone();
            p.sort();
            p.dedup();
            return Ok(p);
        }
        let top = self
            .max_modality
            .to_u64()
            .ok_or_else(|| bad("a transfinite max modality needs an explicit palette"))?;
        Ok((0..=top).map(Ordinal::from).collect())
    }

    /// Worms by increasing length, each length in lexicographic palette order.
    pub fn worms(&self) -> Result<Vec<Worm>, ReductionError> {
        let mods = self.modalities()?;
        if mods.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = vec![Worm::top()];
        let mut layer = vec![Vec::<Ordinal>::new()];
        for _ in 0..self.max_length {
            let mut next = Vec::new();
            for w in &layer {
                for m in &mods {
                    let mut v = w.clone();
                    v.push(m.clone());
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned().map(Worm::new));
            layer = next;
        }
        Ok(out)
    }

    pub fn formulas(&self) -> Result<Vec<SPFormula>, ReductionError> {
        let worms = self.worms()?;
        let mut out: Vec<SPFormula> = worms.iter().map(Worm::to_sp).collect();
        for v in &self.variables {
            out.extend(worms.iter().map(|w| ending_in(w, SPFormula::var(v))));
        }
        Ok(out)
    }

    /// Seeded draw of `sample_size` items, kept in input order.
    pub fn sample<T>(&self, items: Vec<T>, salt: u64) -> Vec<T> {
        if self.sample_size == 0 || items.len() <= self.sample_size {
            return items;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut picked = index::sample(&mut rng, items.len(), self.sample_size).into_vec();
        picked.sort_unstable();
        let mut keep = vec![false; items.len()];
        for i in picked {
            keep[i] = true;
        }
        items.into_iter().zip(keep).filter(|(_, k)| *k).map(|(x, _)| x).collect()
    }
}

fn ending_in(w: &Worm, last: SPFormula) -> SPFormula {
    w.modalities()
        .iter()
        .rev()
        .fold(last, |acc, m| SPFormula::diamond(m.clone(), acc))
}

fn pairs<T: Clone, U: Clone>(xs: &[T], ys: &[U]) -> Vec<(T, U)> {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

// salts keep the draws of different instance lists independent
const SALT_EASY: u64 = 1;
const SALT_CONSERVATION: u64 = 2;
const SALT_AUX: u64 = 3;
const SALT_PAIRS: u64 = 4;

// ---------------------------------------------------------------------------
// bounds and reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Truncation of the infinite families.
    #[serde(rename = "K")]
    pub k: usize,
    pub depth: u32,
    pub budget: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            k: DEFAULT_K,
            depth: DEFAULT_DEPTH,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Bounds {
    pub fn escalated(&self) -> Bounds {
        Bounds {
            k: self.k * 2,
            depth: self.depth * 2,
            budget: self.budget,
        }
    }

    fn prover(&self) -> ProverConfig {
        ProverConfig {
            max_depth: self.depth,
            budget: self.budget,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The required sequent was derived.
    Derivable,
    /// A family member with index `≤ K` derives the consequence.
    Witnessed,
    /// An exact (non-search) property was confirmed.
    Holds,
    /// The premise was not derived, so nothing is claimed.
    NotApplicable,
    /// A side condition of the statement failed.
    Skipped,
    /// Resolved only after escalating to `2K` and twice the depth.
    Inconclusive,
    /// No derivation within the bounds; not a refutation.
    BoundedCounterexample,
    /// Refuted by an exact computation.
    Counterexample,
    ResourceExhausted,
}

impl Status {
    pub fn is_failure(self) -> bool {
        matches!(self, Status::BoundedCounterexample | Status::Counterexample)
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Derivable => "derivable",
            Status::Witnessed => "witnessed",
            Status::Holds => "holds",
            Status::NotApplicable => "not-applicable",
            Status::Skipped => "skipped",
            Status::Inconclusive => "inconclusive",
            Status::BoundedCounterexample => "bounded-counterexample",
            Status::Counterexample => "counterexample",
            Status::ResourceExhausted => "resource-exhausted",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub check: String,
    pub input: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_ref: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renaming: Option<Renaming>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Derivation>,
}

impl Instance {
    fn new(check: &str, input: impl fmt::Display, status: Status) -> Self {
        Instance {
            check: check.to_string(),
            input: input.to_string(),
            status,
            witness_k: None,
            witness: None,
            trace_ref: None,
            renaming: None,
            note: None,
            trace: None,
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn found(mut self, found: Found) -> Self {
        self.trace = Some(found.trace);
        self.renaming = (!found.renaming.is_identity()).then_some(found.renaming);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Ordinal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Ordinal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Ordinal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Ordinal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<Universe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consequences: Option<Vec<SPFormula>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(Ordinal, Ordinal)>>,
    pub bounds: Bounds,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    pub counterexamples: usize,
    pub by_status: BTreeMap<String, usize>,
    pub by_check: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Outcome of one check. Wall time is kept out of the serialized form so
/// reports are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub params: Params,
    pub instances: Vec<Instance>,
    pub summary: Summary,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl VerificationReport {
    fn assemble(theorem: &str, params: Params, mut instances: Vec<Instance>, start: Instant) -> Self {
        let mut summary = Summary {
            instances: instances.len(),
            ..Summary::default()
        };
        let mut next_ref = 0;
        for inst in &mut instances {
            if inst.trace.is_some() {
                inst.trace_ref = Some(next_ref);
                next_ref += 1;
            }
            if inst.status.is_failure() {
                summary.counterexamples += 1;
            }
            *summary.by_status.entry(inst.status.to_string()).or_default() += 1;
            *summary
                .by_check
                .entry(inst.check.clone())
                .or_default()
                .entry(inst.status.to_string())
                .or_default() += 1;
        }
        VerificationReport {
            theorem: theorem.to_string(),
            params,
            instances,
            summary,
            wall_time: start.elapsed(),
        }
    }

    pub fn ok(&self) -> bool {
        self.summary.counterexamples == 0
    }

    pub fn count(&self, check: &str, status: Status) -> usize {
        self.summary
            .by_check
            .get(check)
            .and_then(|m| m.get(status.name()))
            .copied()
            .unwrap_or(0)
    }

    pub fn check_total(&self, check: &str) -> usize {
        self.summary.by_check.get(check).map_or(0, |m| m.values().sum())
    }

    pub fn traces(&self) -> impl Iterator<Item = (usize, &Derivation)> {
        self.instances
            .iter()
            .filter_map(|i| Some((i.trace_ref?, i.trace.as_ref()?)))
    }

    /// Header line, one line per instance, summary line.
    pub fn write_jsonl<W: Write>(&self, mut w: W, inline_traces: bool) -> io::Result<()> {
        let header = serde_json::json!({
            "kind": "header",
            "theorem": self.theorem,
            "params": self.params,
        });
        writeln!(w, "{header}")?;
        for (index, inst) in self.instances.iter().enumerate() {
            let mut value = serde_json::to_value(inst)?;
            let obj = value.as_object_mut().expect("instances serialize as objects");
            if !inline_traces {
                obj.remove("trace");
            }
            let mut line = serde_json::Map::new();
            line.insert("kind".into(), "instance".into());
            line.insert("index".into(), index.into());
            line.extend(std::mem::take(obj));
            writeln!(w, "{}", serde_json::Value::Object(line))?;
        }
        let summary = serde_json::json!({
            "kind": "summary",
            "summary": self.summary,
        });
        writeln!(w, "{summary}")
    }

    pub fn write_traces_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (trace_ref, d) in self.traces() {
            let line = serde_json::json!({ "trace_ref": trace_ref, "trace": d });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// oracle calls

struct Found {
    trace: Derivation,
    renaming: Renaming,
}

enum Attempt {
    Found(Found),
    NotFound,
    Exhausted,
    /// Demotion followed by promotion did not give back the sequent.
    RoundTrip,
}

fn attempt(a: &SPFormula, b: &SPFormula, bounds: &Bounds) -> Attempt {
    let sides = [a.clone(), b.clone()];
    let (demoted, renaming) = demote(&sides, true);
    if promote(&demoted, &renaming).as_deref() != Ok(&sides[..]) {
        return Attempt::RoundTrip;
    }
    match prove(&Sequent::new(a.clone(), b.clone()), &bounds.prover()) {
        Ok(r) => match r.status {
            ProofStatus::Derivable(trace) => Attempt::Found(Found {
                trace,
                renaming: r.renaming,
            }),
            ProofStatus::NotFoundWithinDepth(_) => Attempt::NotFound,
        },
        Err(_) => Attempt::Exhausted,
    }
}

fn sequent_text(a: &SPFormula, b: &SPFormula) -> String {
    format!("{a} |- {b}")
}

/// The sequent must be derivable.
fn required(check: &str, a: &SPFormula, b: &SPFormula, bounds: &Bounds) -> Instance {
    let input = sequent_text(a, b);
    match attempt(a, b, bounds) {
        Attempt::Found(f) => Instance::new(check, input, Status::Derivable).found(f),
        Attempt::NotFound => Instance::new(check, input, Status::BoundedCounterexample),
        Attempt::Exhausted => Instance::new(check, input, Status::ResourceExhausted),
        Attempt::RoundTrip => {
            Instance::new(check, input, Status::Counterexample).note("demotion round trip is not exact")
        }
    }
}

/// If `premise ⊢ consequence` is found, some `family(k)` must derive it too.
fn conservation(
    check: &str,
    premise: &SPFormula,
    consequence: &SPFormula,
    family: &dyn Fn(usize) -> SPFormula,
    bounds: &Bounds,
) -> Instance {
    let input = sequent_text(premise, consequence);
    match attempt(premise, consequence, bounds) {
        Attempt::Found(_) => {}
        Attempt::NotFound => return Instance::new(check, input, Status::NotApplicable),
        Attempt::Exhausted => return Instance::new(check, input, Status::ResourceExhausted),
        Attempt::RoundTrip => {
            return Instance::new(check, input, Status::Counterexample).note("demotion round trip is not exact")
        }
    }
    let mut exhausted = false;
    for (status, b) in [(Status::Witnessed, *bounds), (Status::Inconclusive, bounds.escalated())] {
        for k in 0..=b.k {
            let member = family(k);
            match attempt(&member, consequence, &b) {
                Attempt::Found(f) => {
                    let mut inst = Instance::new(check, &input, status).found(f);
                    inst.witness_k = Some(k);
                    inst.witness = Some(member.to_string());
                    return inst;
                }
                Attempt::Exhausted => exhausted = true,
                Attempt::NotFound => {}
                Attempt::RoundTrip => {
                    return Instance::new(check, input, Status::Counterexample)
                        .note(format!("demotion round trip is not exact for member {k}"))
                }
            }
        }
    }
    let status = if exhausted {
        Status::ResourceExhausted
    } else {
        Status::BoundedCounterexample
    };
    Instance::new(check, input, status)
}

fn derives(a: &SPFormula, b: &SPFormula, bounds: &Bounds) -> Result<bool, Status> {
    match attempt(a, b, bounds) {
        Attempt::Found(_) => Ok(true),
        Attempt::NotFound => Ok(false),
        Attempt::Exhausted => Err(Status::ResourceExhausted),
        Attempt::RoundTrip => Err(Status::Counterexample),
    }
}

fn run<T: Sync>(items: &[T], f: impl Fn(&T) -> Instance + Sync + Send) -> Vec<Instance> {
    items.par_iter().map(f).collect()
}

// ---------------------------------------------------------------------------
// Q-families

/// `[Q_n^0(φ), …, Q_n^K(φ)]`.
pub fn q_family(n: &Ordinal, phi: &SPFormula, k: usize) -> Vec<SPFormula> {
    (0..=k).map(|i| q_iter_sp(n, i, phi)).collect()
}

fn dia(m: &Ordinal, f: SPFormula) -> SPFormula {
    SPFormula::diamond(m.clone(), f)
}

fn require_nonempty_modality(universe: &Universe, pool: &[SPFormula], m: &Ordinal) -> Result<(), ReductionError> {
    if !pool.is_empty() && m > &universe.max_modality {
        return Err(bad(format!(
            "modality {m} exceeds the universe maximum {}",
            universe.max_modality
        )));
    }
    Ok(())
}

/// `⟨n+1⟩φ ≡_n {Q_n^k(φ) : k ≤ K}` over the universe.
pub fn check_reduction(n: &Ordinal, universe: &Universe, bounds: &Bounds) -> Result<VerificationReport, ReductionError> {
    let start = Instant::now();
    let pool = universe.formulas()?;
    let n1 = n.succ();
    require_nonempty_modality(universe, &pool, &n1)?;
    let easy_items = universe.sample(pairs(&pool, &(0..=bounds.k).collect::<Vec<_>>()), SALT_EASY);
    let mut instances = run(&easy_items, |(phi, k)| {
        required("easy", &dia(&n1, phi.clone()), &q_iter_sp(n, *k, phi), bounds)
    });
    let cons_items = universe.sample(pairs(&pool, &pool), SALT_CONSERVATION);
    instances.extend(run(&cons_items, |(phi, psi)| {
        conservation(
            "conservation",
            &dia(&n1, phi.clone()),
            &dia(n, psi.clone()),
            &|k| q_iter_sp(n, k, phi),
            bounds,
        )
    }));
    let params = Params {
        n: Some(n.clone()),
        universe: Some(universe.clone()),
        bounds: *bounds,
        ..Params::default()
    };
    Ok(VerificationReport::assemble("reduction", params, instances, start))
}

/// `⟨n+1⟩φ ≡_j {⟨j⟩(φ ∧ Q_n^k(φ)) : k ≤ K}` plus the auxiliary derivations
/// `⟨j⟩(φ ∧ Q_n^{i+k}(φ)) ⊢ Q_j^i(φ ∧ Q_n^k(φ))` for `i + k ≤ K`.
pub fn check_pij(j: &Ordinal, n: &Ordinal, universe: &Universe, bounds: &Bounds) -> Result<VerificationReport, ReductionError> {
    let start = Instant::now();
    if j > n {
        return Err(bad(format!("j = {j} exceeds n = {n}")));
    }
    let pool = universe.formulas()?;
    let n1 = n.succ();
    require_nonempty_modality(universe, &pool, &n1)?;
    let member = |phi: &SPFormula, k: usize| dia(j, SPFormula::and(phi.clone(), q_iter_sp(n, k, phi)));
    let easy_items = universe.sample(pairs(&pool, &(0..=bounds.k).collect::<Vec<_>>()), SALT_EASY);
    let mut instances = run(&easy_items, |(phi, k)| {
        required("easy", &dia(&n1, phi.clone()), &member(phi, *k), bounds)
    });
    let cons_items = universe.sample(pairs(&pool, &pool), SALT_CONSERVATION);
    instances.extend(run(&cons_items, |(phi, psi)| {
        conservation(
            "conservation",
            &dia(&n1, phi.clone()),
            &dia(j, psi.clone()),
            &|k| member(phi, k),
            bounds,
        )
    }));
    let mut aux = Vec::new();
    for phi in &pool {
        for total in 0..=bounds.k {
            for i in 0..=total {
                aux.push((phi.clone(), i, total - i));
            }
        }
    }
    let aux = universe.sample(aux, SALT_AUX);
    instances.extend(run(&aux, |(phi, i, k)| {
        let lhs = member(phi, i + k);
        let rhs = q_iter_sp(j, *i, &SPFormula::and(phi.clone(), q_iter_sp(n, *k, phi)));
        required("auxiliary", &lhs, &rhs, bounds)
    }));
    let params = Params {
        n: Some(n.clone()),
        j: Some(j.clone()),
        universe: Some(universe.clone()),
        bounds: *bounds,
        ..Params::default()
    };
    Ok(VerificationReport::assemble("pij", params, instances, start))
}

/// If `A ≡_n B` over the pool and `A ⊢ ⟨n⟩⊤`, no `⟨j⟩ψ` in the pool separates them.
///
/// Axiom sets are the pool formulas, each `⟨n+1⟩φ`, and each truncated
/// family `{Q_n^k(φ) : k ≤ K}` as a conjunction. The pairs checked are
/// `(⟨n+1⟩φ, {Q_n^k(φ)})` for every `φ`, plus `sample_size` seeded pairs.
pub fn check_observation_pij(
    universe: &Universe,
    n: &Ordinal,
    j: &Ordinal,
    bounds: &Bounds,
) -> Result<VerificationReport, ReductionError> {
    let start = Instant::now();
    if j > n {
        return Err(bad(format!("j = {j} exceeds n = {n}")));
    }
    let pool = universe.formulas()?;
    let n1 = n.succ();
    let family = |phi: &SPFormula| SPFormula::conj(q_family(n, phi, bounds.k));
    let mut items: Vec<(SPFormula, SPFormula)> = pool.iter().map(|phi| (dia(&n1, phi.clone()), family(phi))).collect();
    if universe.sample_size > 0 {
        let mut sets = pool.clone();
        sets.extend(pool.iter().map(|phi| dia(&n1, phi.clone())));
        sets.extend(pool.iter().map(family));
        let all = pairs(&sets, &sets);
        items.extend(universe.sample(all, SALT_PAIRS));
    }
    let instances = run(&items, |(a, b)| observation(a, b, n, j, &pool, bounds));
    let params = Params {
        n: Some(n.clone()),
        j: Some(j.clone()),
        universe: Some(universe.clone()),
        bounds: *bounds,
        ..Params::default()
    };
    Ok(VerificationReport::assemble("observation-pij", params, instances, start))
}

fn observation(a: &SPFormula, b: &SPFormula, n: &Ordinal, j: &Ordinal, pool: &[SPFormula], bounds: &Bounds) -> Instance {
    let input = format!("{a} ; {b}");
    let check = "observation";
    let body = || -> Result<Instance, Status> {
        if !derives(a, &dia(n, SPFormula::Top), bounds)? {
            return Ok(Instance::new(check, &input, Status::Skipped).note("side condition A |- <n>T not found"));
        }
        for psi in pool {
            let c = dia(n, psi.clone());
            if derives(a, &c, bounds)? != derives(b, &c, bounds)? {
                return Ok(Instance::new(check, &input, Status::NotApplicable)
                    .note(format!("not n-conservative over the pool at {c}")));
            }
        }
        for psi in pool {
            let c = dia(j, psi.clone());
            if derives(a, &c, bounds)? != derives(b, &c, bounds)? {
                return Ok(Instance::new(check, &input, Status::BoundedCounterexample).note(format!("separated by {c}")));
            }
        }
        Ok(Instance::new(check, &input, Status::Holds))
    };
    body().unwrap_or_else(|status| Instance::new(check, &input, status))
}

// ---------------------------------------------------------------------------
// cofinal families

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// `ζ = ξ + 1`: the k-th member is `⟨γ⟩⟨ξ⟩^k⊤`.
    Successor { xi: Ordinal },
    /// Limit `ζ`: the k-th member is `⟨γ⟩⟨ζ[k + offset]⟩⊤`, where `offset`
    /// skips the fundamental-sequence entries below `γ`.
    Limit { offset: u64 },
    /// Fixed member list, for fixtures.
    Explicit(Vec<Worm>),
}

/// `o_γ(⟨ζ⟩⊤)`, either as a notation or, when it is beyond the notation
/// system, through the worm whose value it is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclaredLimit {
    Exact(Ordinal),
    ValueOf(Worm),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CofinalFamily {
    pub gamma: Ordinal,
    pub zeta: Ordinal,
    pub generator: Generator,
    pub declared_limit: DeclaredLimit,
    /// Members `0..=K`.
    pub members: Vec<Worm>,
}

impl CofinalFamily {
    pub fn member(&self, k: usize) -> Option<Worm> {
        match &self.generator {
            Generator::Successor { xi } => Some(Worm::repeat(xi, k).prepend(self.gamma.clone())),
            Generator::Limit { offset } => {
                let e = self.zeta.fundamental_sequence(k as u64 + offset).ok()?;
                Some(Worm::new(vec![self.gamma.clone(), e]))
            }
            Generator::Explicit(ws) => ws.get(k).cloned(),
        }
    }

    /// `⟨ζ⟩⊤`.
    pub fn target(&self) -> Worm {
        Worm::new(vec![self.zeta.clone()])
    }

    /// Family with fixed members, used to exercise the checks.
    pub fn explicit(gamma: Ordinal, zeta: Ordinal, members: Vec<Worm>) -> Self {
        CofinalFamily {
            declared_limit: declared_limit(&gamma, &zeta),
            gamma,
            zeta,
            generator: Generator::Explicit(members.clone()),
            members,
        }
    }

    /// The k-th element of the canonical sequence below the declared limit,
    /// as a worm whose `o_γ` value it is.
    fn limit_sequence(&self, k: usize) -> Option<Worm> {
        if self.zeta.is_limit() {
            let e = self.zeta.fundamental_sequence(k as u64).ok()?;
            let e = if e < self.gamma { self.gamma.clone() } else { e };
            Some(Worm::new(vec![e]))
        } else {
            Some(Worm::repeat(&self.zeta.pred()?, k))
        }
    }
}

fn declared_limit(gamma: &Ordinal, zeta: &Ordinal) -> DeclaredLimit {
    let target = Worm::new(vec![zeta.clone()]);
    match target.ordinal_value_gamma(gamma) {
        Ok(v) => DeclaredLimit::Exact(v),
        Err(_) => DeclaredLimit::ValueOf(target),
    }
}

pub fn cofinal_family(gamma: &Ordinal, zeta: &Ordinal, k: usize) -> Result<CofinalFamily, ReductionError> {
    if gamma >= zeta {
        return Err(bad(format!("need gamma < zeta, got {gamma} and {zeta}")));
    }
    let generator = match zeta.pred() {
        Some(xi) => Generator::Successor { xi },
        None => {
            let mut offset = 0;
            while zeta.fundamental_sequence(offset).map_err(|e| bad(e.to_string()))? < *gamma {
                offset += 1;
            }
            Generator::Limit { offset }
        }
    };
    let mut family = CofinalFamily {
        gamma: gamma.clone(),
        zeta: zeta.clone(),
        generator,
        declared_limit: declared_limit(gamma, zeta),
        members: Vec::new(),
    };
    family.members = (0..=k).filter_map(|i| family.member(i)).collect();
    Ok(family)
}

/// Checks strict increase, boundedness by `⟨ζ⟩⊤`, and that every element of
/// the canonical sequence below the declared limit is reached by some member
/// with index `≤ 2K`.
pub fn check_cofinality(f: &CofinalFamily, k: usize) -> VerificationReport {
    let start = Instant::now();
    let g = &f.gamma;
    let reach = 2 * k;
    let members: Vec<Worm> = (0..=reach).map_while(|i| f.member(i)).collect();
    let value = |w: &Worm| w.ordinal_value_gamma(g).ok();
    let show = |w: &Worm| value(w).map_or_else(|| format!("o_{g}({w})"), |v| v.to_string());
    let target = f.target();
    let mut instances = Vec::new();
    for i in 0..k {
        let input = format!("member {i} < member {}", i + 1);
        let inst = match (members.get(i), members.get(i + 1)) {
            (Some(a), Some(b)) => {
                let status = if compare_order_values(g, a, b) == WormOrder::Less {
                    Status::Holds
                } else {
                    Status::Counterexample
                };
                Instance::new("increasing", input, status).note(format!("{a} : {} ; {b} : {}", show(a), show(b)))
            }
            _ => Instance::new("increasing", input, Status::Counterexample).note("member missing"),
        };
        instances.push(inst);
    }
    for i in 0..=k {
        let input = format!("member {i} < {target}");
        let inst = match members.get(i) {
            Some(a) => {
                let status = if compare_order_values(g, a, &target) == WormOrder::Less {
                    Status::Holds
                } else {
                    Status::Counterexample
                };
                Instance::new("bounded", input, status).note(format!("{a} : {}", show(a)))
            }
            None => Instance::new("bounded", input, Status::Counterexample).note("member missing"),
        };
        instances.push(inst);
    }
    for i in 0..=k {
        let input = format!("limit[{i}] reached");
        let inst = match dominance(f, i, &members) {
            Ok(Some((idx, note))) => {
                let mut inst = Instance::new("dominance", input, Status::Holds).note(note);
                inst.witness_k = Some(idx);
                inst
            }
            Ok(None) => Instance::new("dominance", input, Status::Counterexample),
            Err(msg) => Instance::new("dominance", input, Status::Counterexample).note(msg),
        };
        instances.push(inst);
    }
    let params = Params {
        gamma: Some(f.gamma.clone()),
        zeta: Some(f.zeta.clone()),
        bounds: Bounds { k, ..Bounds::default() },
        ..Params::default()
    };
    VerificationReport::assemble("cofinal", params, instances, start)
}

fn dominance(f: &CofinalFamily, i: usize, members: &[Worm]) -> Result<Option<(usize, String)>, String> {
    let g = &f.gamma;
    match &f.declared_limit {
        DeclaredLimit::Exact(limit) => {
            let fs = limit
                .fundamental_sequence(i as u64)
                .map_err(|_| format!("declared limit {limit} is not a limit"))?;
            for (idx, m) in members.iter().enumerate() {
                let v = m.ordinal_value_gamma(g).map_err(|e| e.to_string())?;
                if fs <= v {
                    return Ok(Some((idx, format!("{fs} <= {v}"))));
                }
            }
            Ok(None)
        }
        DeclaredLimit::ValueOf(_) => {
            let w = f.limit_sequence(i).ok_or("no canonical sequence below the limit")?;
            for (idx, m) in members.iter().enumerate() {
                if compare_order_values(g, &w, m) != WormOrder::Greater {
                    return Ok(Some((idx, format!("o_{g}({w}) <= o_{g}({m})"))));
                }
            }
            Ok(None)
        }
    }
}

/// Modalities `{0, γ, ζ[0], ζ[1]}` for limit `ζ`, `{0, γ, ξ}` for `ζ = ξ + 1`.
pub fn default_palette(gamma: &Ordinal, zeta: &Ordinal) -> Vec<Ordinal> {
    let mut p = vec![Ordinal::zero(), gamma.clone()];
    match zeta.pred() {
        Some(xi) => p.push(xi),
        None => p.extend((0..2).filter_map(|k| zeta.fundamental_sequence(k).ok())),
    }
    p.retain(|m| m < zeta);
    p.sort();
    p.dedup();
    p
}

/// `⟨ζ⟩ψ ≡_γ {Q(τ_k, ψ) : k ≤ K}` for the canonical cofinal family `τ`.
pub fn check_generalized_reduction(
    gamma: &Ordinal,
    zeta: &Ordinal,
    universe: &Universe,
    bounds: &Bounds,
) -> Result<VerificationReport, ReductionError> {
    let start = Instant::now();
    let family = cofinal_family(gamma, zeta, bounds.k)?;
    let pool: Vec<SPFormula> = universe
        .formulas()?
        .into_iter()
        .filter(|f| mod_set(f).iter().all(|m| m < zeta))
        .collect();
    let mut thetas = universe.modalities()?;
    thetas.retain(|m| m < zeta);
    let top = dia(zeta, SPFormula::Top);
    let facts: Vec<(Ordinal, usize)> = pairs(&thetas, &(0..=bounds.k).collect::<Vec<_>>());
    let mut instances = run(&facts, |(theta, k)| {
        let w = Worm::repeat(theta, *k).prepend(gamma.clone());
        required("order-fact", &top, &w.to_sp(), bounds)
    });
    let member = |psi: &SPFormula, k: usize| {
        let m = family.member(k).expect("canonical families are infinite");
        q_formula_sp(&m, psi)
    };
    let easy_items = universe.sample(pairs(&pool, &(0..=bounds.k).collect::<Vec<_>>()), SALT_EASY);
    instances.extend(run(&easy_items, |(psi, k)| {
        required("easy", &dia(zeta, psi.clone()), &member(psi, *k), bounds)
    }));
    let cons_items = universe.sample(pairs(&pool, &pool), SALT_CONSERVATION);
    instances.extend(run(&cons_items, |(psi, phi)| {
        conservation(
            "conservation",
            &dia(zeta, psi.clone()),
            &dia(gamma, phi.clone()),
            &|k| member(psi, k),
            bounds,
        )
    }));
    let params = Params {
        gamma: Some(gamma.clone()),
        zeta: Some(zeta.clone()),
        universe: Some(universe.clone()),
        bounds: *bounds,
        ..Params::default()
    };
    Ok(VerificationReport::assemble("gen-reduction", params, instances, start))
}

/// `A ⊢ B ⇒ Q(A, φ) ⊢ Q(B, φ)` for worms `A, B` of the universe.
/// `phis` defaults to the universe pool.
pub fn check_qmono(
    universe: &Universe,
    phis: Option<&[SPFormula]>,
    bounds: &Bounds,
) -> Result<VerificationReport, ReductionError> {
    let start = Instant::now();
    let worms = universe.worms()?;
    let pool;
    let phis = match phis {
        Some(p) => p,
        None => {
            pool = universe.formulas()?;
            &pool[..]
        }
    };
    let items = universe.sample(pairs(&worms, &worms), SALT_PAIRS);
    let per_pair: Vec<Vec<Instance>> = items
        .par_iter()
        .map(|(a, b)| {
            let input = sequent_text(&a.to_sp(), &b.to_sp());
            match derives(&a.to_sp(), &b.to_sp(), bounds) {
                Ok(true) => phis
                    .iter()
                    .map(|phi| required("qmono", &q_formula_sp(a, phi), &q_formula_sp(b, phi), bounds))
                    .collect(),
                Ok(false) => vec![Instance::new("premise", input, Status::NotApplicable)],
                Err(status) => vec![Instance::new("premise", input, status)],
            }
        })
        .collect();
    let params = Params {
        universe: Some(universe.clone()),
        consequences: Some(phis.to_vec()),
        bounds: *bounds,
        ..Params::default()
    };
    Ok(VerificationReport::assemble("qmono", params, per_pair.concat(), start))
}

/// `⟨γ⟩(φ ∧ ⟨ζ⟩ψ) ≡ ⟨γ⟩φ ∧ ⟨ζ⟩ψ` for `ζ < γ`. `pairs_gz` lists `(γ, ζ)`;
/// by default every such pair of universe modalities is used.
pub fn check_push_diamond(
    universe: &Universe,
    pairs_gz: Option<&[(Ordinal, Ordinal)]>,
    bounds: &Bounds,
) -> Result<VerificationReport, ReductionError> {
    let start = Instant::now();
    let mods = universe.modalities()?;
    let chosen: Vec<(Ordinal, Ordinal)> = match pairs_gz {
        Some(p) => p.to_vec(),
        None => pairs(&mods, &mods).into_iter().filter(|(g, z)| z < g).collect(),
    };
    if let Some((g, z)) = chosen.iter().find(|(g, z)| z >= g) {
        return Err(bad(format!("need zeta < gamma, got gamma {g} and zeta {z}")));
    }
    let pool = universe.formulas()?;
    let fp = universe.sample(pairs(&pool, &pool), SALT_PAIRS);
    let mut items = Vec::new();
    for (g, z) in &chosen {
        for (phi, psi) in &fp {
            items.push((g.clone(), z.clone(), phi.clone(), psi.clone()));
        }
    }
    let per_item: Vec<[Instance; 2]> = items
        .par_iter()
        .map(|(g, z, phi, psi)| {
            let inner = dia(g, SPFormula::and(phi.clone(), dia(z, psi.clone())));
            let outer = SPFormula::and(dia(g, phi.clone()), dia(z, psi.clone()));
            [required("push-out", &inner, &outer, bounds), required("push-in", &outer, &inner, bounds)]
        })
        .collect();
    let params = Params {
        universe: Some(universe.clone()),
        pairs: Some(chosen),
        bounds: *bounds,
        ..Params::default()
    };
    let instances = per_item.into_iter().flatten().collect();
    Ok(VerificationReport::assemble("push-diamond", params, instances, start))
}
