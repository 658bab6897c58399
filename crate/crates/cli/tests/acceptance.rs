//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wormcalc::formula::{demote, promote, q_iter_sp, GLPFormula, Renaming};
use wormcalc::rc::{derive, prove, prove_equiv, replay, Derivation, ProverConfig, Sequent, SequentText};
use wormcalc::reduction::{
    check_cofinality, check_generalized_reduction, check_pij, check_push_diamond, check_qmono, check_reduction,
    cofinal_family, default_palette, Bounds, Instance, Status, Universe, VerificationReport,
};
use wormcalc::{compare_worms, Ordinal, SPFormula, Worm, WormOrder};

type Outcome = Result<String, String>;

fn ord(s: &str) -> Ordinal {
    Ordinal::parse(s).unwrap()
}

fn sp(s: &str) -> SPFormula {
    SPFormula::parse(s).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clean(r: &VerificationReport) -> Result<(), String> {
    let bad: Vec<&Instance> = r.instances.iter().filter(|i| i.status.is_failure()).collect();
    ensure(bad.is_empty(), || {
        format!("{} counterexamples in {}, first: {:?}", bad.len(), r.theorem, bad[0].input)
    })?;
    let exhausted = r.summary.by_status.get("resource-exhausted").copied().unwrap_or(0);
    ensure(exhausted == 0, || format!("{exhausted} resource-exhausted instances in {}", r.theorem))
}

fn replay_all(r: &VerificationReport) -> Result<(), String> {
    for (i, d) in r.traces() {
        replay(d).map_err(|e| format!("trace {i} of {} does not replay: {e}", r.theorem))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// orders against the oracle

fn all_worms(mods: &[u64], max_len: usize) -> Vec<Worm> {
    let mut out = vec![Worm::top()];
    let mut layer = vec![Worm::top()];
    for _ in 0..max_len {
        let next: Vec<Worm> = layer
            .iter()
            .flat_map(|w| mods.iter().map(move |&m| w.prepend(Ordinal::from(m))))
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn derives(a: &SPFormula, b: &SPFormula) -> Result<bool, String> {
    match derive(a, b, &ProverConfig::default()).map_err(|e| e.to_string())? {
        Some(d) => {
            replay(&d).map_err(|e| e.to_string())?;
            Ok(true)
        }
        None => Ok(false),
    }
}

fn order_agreement(gamma: u64, worms: &[Worm]) -> Result<usize, String> {
    let g = Ordinal::from(gamma);
    let mut pairs = 0;
    for a in worms {
        for b in worms {
            pairs += 1;
            let ord = compare_worms(&g, a, b).map_err(|e| e.to_string())?;
            let b_over_a = derives(&b.to_sp(), &a.prepend(g.clone()).to_sp())?;
            let a_over_b = derives(&a.to_sp(), &b.prepend(g.clone()).to_sp())?;
            ensure(!(a_over_b && b_over_a), || format!("{a} and {b} both strictly below each other"))?;
            let ok = match ord {
                WormOrder::Less => b_over_a,
                WormOrder::Greater => a_over_b,
                WormOrder::Equivalent => derives(&a.to_sp(), &b.to_sp())? && derives(&b.to_sp(), &a.to_sp())?,
            };
            ensure(ok, || format!("{a} vs {b}: order says {ord} but the oracle disagrees"))?;
        }
    }
    Ok(pairs)
}

fn c1() -> Outcome {
    let start = Instant::now();
    let worms = all_worms(&[0, 1, 2], 4);
    ensure(worms.len() == 121, || format!("{} worms", worms.len()))?;
    let pairs = order_agreement(0, &worms)?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("{pairs} ordered pairs agree, {:.1}s", t.as_secs_f64()))
}

fn c2() -> Outcome {
    let start = Instant::now();
    let mut total = 0;
    for gamma in [1u64, 2] {
        let mods: Vec<u64> = (gamma..=gamma + 2).collect();
        total += order_agreement(gamma, &all_worms(&mods, 3))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:?}"))?;
    Ok(format!("{total} ordered pairs agree for gamma 1 and 2, {:.1}s", t.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// ordinals

fn c3() -> Outcome {
    let value = |s: &str| Worm::parse(s).unwrap().ordinal_value().unwrap();
    let mut cases = vec![("T".to_string(), ord("0"))];
    for k in 0..=5u64 {
        cases.push((Worm::from_naturals(&vec![0; k as usize]).to_string(), Ordinal::from(k)));
    }
    for (w, v) in [("<1>T", "w"), ("<1><0>T", "w"), ("<0><1>T", "w+1"), ("<2>T", "w^w")] {
        cases.push((w.to_string(), ord(v)));
    }
    for (w, want) in &cases {
        let got = value(w);
        ensure(got.terms() == want.terms(), || format!("o({w}) = {got}, expected {want}"))?;
    }
    Ok(format!("{} values exact", cases.len()))
}

fn random_ordinal(rng: &mut ChaCha8Rng, level: u32) -> Ordinal {
    if level == 0 {
        return Ordinal::from(rng.gen_range(0..5u64));
    }
    let mut exps: Vec<Ordinal> = (0..rng.gen_range(1..=3)).map(|_| random_ordinal(rng, level - 1)).collect();
    exps.sort();
    exps.dedup();
    exps.iter()
        .rev()
        .fold(Ordinal::zero(), |acc, e| acc.add(&Ordinal::monomial(e.clone(), rng.gen_range(1..4u32))))
}

fn c4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let samples: Vec<Ordinal> = (0..50).map(|_| random_ordinal(&mut rng, 1)).collect();
    let mut checked = 0;
    for a in &samples {
        ensure(a.tower_height() <= 2, || format!("{a} is too tall"))?;
        for j in 0..=4u64 {
            for k in 0..=4 - j {
                let lhs = a.hyper_e(j + k);
                let rhs = a.hyper_e(k).hyper_e(j);
                ensure(lhs == rhs, || format!("e^{}({a}) = {lhs} but e^{j}(e^{k}({a})) = {rhs}", j + k))?;
                checked += 1;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), || format!("took {t:?}"))?;
    Ok(format!("{checked} identities on 50 seeded ordinals, {:.2}s", t.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// logic

fn c5() -> Outcome {
    let mut count = 0;
    for n in 0..=2u64 {
        let n = Ordinal::from(n);
        for k in 0..=4 {
            let q = q_iter_sp(&n, k, &SPFormula::Top);
            let w = Worm::repeat(&n, k).to_sp();
            let r = prove_equiv(&q, &w, &ProverConfig::with_depth(14)).map_err(|e| e.to_string())?;
            ensure(r.equivalent(), || format!("Q_{n}^{k}(T) and <{n}>^{k}T not shown equivalent"))?;
            count += 1;
        }
    }
    Ok(format!("{count} equivalences"))
}

fn c6() -> Outcome {
    let mut pairs = Vec::new();
    for g in 0..=2u64 {
        for z in 0..g {
            pairs.push((Ordinal::from(g), Ordinal::from(z)));
        }
    }
    pairs.push((ord("w"), ord("3")));
    let r = check_push_diamond(&Universe::new(2, 2), Some(&pairs), &Bounds::default()).map_err(|e| e.to_string())?;
    clean(&r)?;
    ensure(r.summary.by_status.get("derivable") == Some(&r.summary.instances), || {
        format!("{:?}", r.summary.by_status)
    })?;
    replay_all(&r)?;
    Ok(format!("{} directions derivable", r.summary.instances))
}

fn c7() -> Outcome {
    let phis = [sp("p"), sp("<0>T"), sp("p /\\ <1>T")];
    let r = check_qmono(&Universe::new(2, 4), Some(&phis), &Bounds::default()).map_err(|e| e.to_string())?;
    clean(&r)?;
    let n = r.count("qmono", Status::Derivable);
    ensure(n > 0, || "no derivable premise".to_string())?;
    Ok(format!("{n} monotonicity instances derivable"))
}

fn reduction_report(n: u64) -> Result<VerificationReport, String> {
    let bounds = Bounds { k: 5, depth: 14, ..Bounds::default() };
    check_reduction(&Ordinal::from(n), &Universe::new(n + 1, 2), &bounds).map_err(|e| e.to_string())
}

fn c8() -> Outcome {
    let mut parts = Vec::new();
    for n in 0..=1 {
        let r = reduction_report(n)?;
        clean(&r)?;
        let easy = r.check_total("easy");
        ensure(r.count("easy", Status::Derivable) == easy, || format!("n={n}: easy direction {:?}", r.summary.by_check["easy"]))?;
        let applicable = r.check_total("conservation") - r.count("conservation", Status::NotApplicable);
        let inconclusive = r.count("conservation", Status::Inconclusive);
        ensure(inconclusive * 50 <= applicable, || {
            format!("n={n}: {inconclusive} of {applicable} conservation instances need escalation")
        })?;
        replay_all(&r)?;
        parts.push(format!(
            "n={n}: {easy} easy, {applicable} conservation, {inconclusive} inconclusive"
        ));
    }
    Ok(parts.join("; "))
}

fn conservation_view(r: &VerificationReport, shift: usize) -> Vec<(String, Status, Option<String>, Option<usize>)> {
    r.instances
        .iter()
        .filter(|i| i.check == "conservation")
        .map(|i| (i.input.clone(), i.status, i.witness.clone(), i.witness_k.map(|k| k + shift)))
        .collect()
}

fn c9() -> Outcome {
    let bounds = Bounds { k: 5, depth: 14, ..Bounds::default() };
    let mut parts = Vec::new();
    for (j, n) in [(0u64, 1u64), (1, 2), (0, 2)] {
        let r = check_pij(&Ordinal::from(j), &Ordinal::from(n), &Universe::new(n + 1, 2), &bounds)
            .map_err(|e| e.to_string())?;
        clean(&r)?;
        replay_all(&r)?;
        parts.push(format!("({j},{n}) {} instances", r.summary.instances));
    }
    for n in 0..=1u64 {
        let base = reduction_report(n)?;
        let r = check_pij(&Ordinal::from(n), &Ordinal::from(n), &Universe::new(n + 1, 2), &bounds)
            .map_err(|e| e.to_string())?;
        clean(&r)?;
        let (a, b) = (conservation_view(&base, 0), conservation_view(&r, 1));
        ensure(a == b, || {
            let first = a.iter().zip(&b).find(|(x, y)| x != y);
            format!("j=n={n} differs from the reduction run: {first:?}")
        })?;
        parts.push(format!("j=n={n} identical on {} instances", a.len()));
    }
    Ok(parts.join("; "))
}

fn round_trip(input: &str) -> Result<(), String> {
    let s = Sequent::parse(input).map_err(|e| e.to_string())?;
    let sides = [s.antecedent, s.succedent];
    let (d, r) = demote(&sides, true);
    let back = promote(&d, &r).map_err(|e| e.to_string())?;
    ensure(back == sides, || format!("round trip changed {input}"))
}

fn c10() -> Outcome {
    let bounds = Bounds { k: 4, ..Bounds::default() };
    let mut parts = Vec::new();
    for (g, z) in [("0", "w"), ("1", "w"), ("0", "w+1"), ("3", "w*2")] {
        let (g, z) = (ord(g), ord(z));
        let u = Universe::with_palette(default_palette(&g, &z), 2);
        let r = check_generalized_reduction(&g, &z, &u, &bounds).map_err(|e| e.to_string())?;
        clean(&r)?;
        replay_all(&r)?;
        for i in &r.instances {
            round_trip(&i.input)?;
        }
        let family = cofinal_family(&g, &z, 5).map_err(|e| e.to_string())?;
        let c = check_cofinality(&family, 5);
        ensure(c.ok() && c.summary.by_status.get("holds") == Some(&c.summary.instances), || {
            format!("cofinality ({g},{z}): {:?}", c.summary.by_check)
        })?;
        parts.push(format!("({g},{z}) {}", r.summary.instances));
    }
    Ok(format!("instances {}", parts.join(", ")))
}

// ---------------------------------------------------------------------------
// demotion

fn random_glp(rng: &mut ChaCha8Rng, mods: &[Ordinal], depth: u32) -> GLPFormula {
    let pick = |rng: &mut ChaCha8Rng| mods.choose(rng).unwrap().clone();
    if depth == 0 {
        return match rng.gen_range(0..4) {
            0 => GLPFormula::Top,
            1 => GLPFormula::Bottom,
            2 => GLPFormula::var("p"),
            _ => GLPFormula::var("q"),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..7) {
        0 => GLPFormula::not(random_glp(rng, mods, d)),
        1 => GLPFormula::and(random_glp(rng, mods, d), random_glp(rng, mods, d)),
        2 => GLPFormula::or(random_glp(rng, mods, d), random_glp(rng, mods, d)),
        3 => GLPFormula::implies(random_glp(rng, mods, d), random_glp(rng, mods, d)),
        4 => GLPFormula::boxed(pick(rng), random_glp(rng, mods, d)),
        _ => GLPFormula::diamond(pick(rng), random_glp(rng, mods, d)),
    }
}

fn random_sp(rng: &mut ChaCha8Rng, mods: &[Ordinal], depth: u32) -> SPFormula {
    if depth == 0 {
        return if rng.gen_bool(0.5) { SPFormula::Top } else { SPFormula::var("p") };
    }
    match rng.gen_range(0..3) {
        0 => SPFormula::and(random_sp(rng, mods, depth - 1), random_sp(rng, mods, depth - 1)),
        _ => SPFormula::diamond(mods.choose(rng).unwrap().clone(), random_sp(rng, mods, depth - 1)),
    }
}

/// A consequence of `f`: drop conjuncts and lower modalities.
fn weaken(rng: &mut ChaCha8Rng, f: &SPFormula, mods: &[Ordinal]) -> SPFormula {
    match f {
        SPFormula::And(l, r) => match rng.gen_range(0..3) {
            0 => weaken(rng, l, mods),
            1 => weaken(rng, r, mods),
            _ => SPFormula::and(weaken(rng, l, mods), weaken(rng, r, mods)),
        },
        SPFormula::Diamond(m, b) => {
            let lower: Vec<&Ordinal> = mods.iter().filter(|x| *x <= m).collect();
            let m = (*lower.choose(rng).unwrap()).clone();
            SPFormula::diamond(m, weaken(rng, b, mods))
        }
        _ => f.clone(),
    }
}

fn promote_trace(d: &Derivation, r: &Renaming) -> Result<Derivation, String> {
    let s = &d.conclusion.0;
    let sides = promote(&[s.antecedent.clone(), s.succedent.clone()], r).map_err(|e| e.to_string())?;
    let [a, b]: [SPFormula; 2] = sides.try_into().unwrap();
    Ok(Derivation {
        rule: d.rule,
        conclusion: SequentText(Sequent::new(a, b)),
        premises: d.premises.iter().map(|p| promote_trace(p, r)).collect::<Result<_, _>>()?,
    })
}

fn c11() -> Outcome {
    let palette: Vec<Ordinal> = ["0", "1", "3", "w", "w+1", "w^w"].iter().map(|s| ord(s)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let choose_mods = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(1..=4);
        let mut m: Vec<Ordinal> = palette.choose_multiple(rng, k).cloned().collect();
        m.sort();
        m
    };
    for i in 0..200 {
        let mods = choose_mods(&mut rng);
        let f = random_glp(&mut rng, &mods, 4);
        for pin in [false, true] {
            let (d, r) = demote(std::slice::from_ref(&f), pin);
            let back = promote(&d, &r).map_err(|e| e.to_string())?;
            ensure(back[0] == f, || format!("formula {i}: {f} came back as {}", back[0]))?;
        }
    }
    let config = ProverConfig::default();
    let mut derivable = 0;
    for i in 0..100 {
        let mods = choose_mods(&mut rng);
        let a = random_sp(&mut rng, &mods, 3);
        let b = if i % 2 == 0 { weaken(&mut rng, &a, &mods) } else { random_sp(&mut rng, &mods, 2) };
        let original = prove(&Sequent::new(a.clone(), b.clone()), &config).map_err(|e| e.to_string())?;
        let Some(trace) = original.derivation() else {
            continue;
        };
        derivable += 1;
        let (d, r) = demote(&[a.clone(), b.clone()], true);
        let demoted = prove(&Sequent::new(d[0].clone(), d[1].clone()), &config).map_err(|e| e.to_string())?;
        let dt = demoted
            .derivation()
            .ok_or_else(|| format!("sequent {i}: {a} |- {b} derivable but its demotion is not"))?;
        ensure(promote_trace(dt, &r)? == *trace, || format!("sequent {i}: promoted trace differs"))?;
    }
    ensure(derivable >= 50, || format!("only {derivable} derivable sequents"))?;
    Ok(format!("200 formulas round trip, {derivable}/100 derivable sequents preserved"))
}

// ---------------------------------------------------------------------------
// determinism of the command-line runs

fn c12() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_worm");
    let dir = std::env::temp_dir().join(format!("worm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let runs: [&[&str]; 7] = [
        &["reduction", "--n", "0", "--max-mod", "1", "--max-len", "2", "--K", "4"],
        &["pij", "--j", "0", "--n", "1", "--max-len", "1"],
        &["observation-pij", "--n", "1", "--j", "0", "--max-len", "1", "--sample", "6"],
        &["cofinal", "--gamma", "0", "--zeta", "w", "--K", "5"],
        &["gen-reduction", "--gamma", "0", "--zeta", "w", "--K", "4", "--sample", "40"],
        &["qmono", "--max-mod", "1", "--max-len", "2", "--sample", "30"],
        &["push-diamond", "--max-len", "1", "--sample", "20"],
    ];
    let invoke = |args: &[&str], tag: &str, out: &Path| -> Result<(Vec<u8>, Vec<u8>), String> {
        let report = out.join(format!("{tag}.jsonl"));
        let traces = out.join(format!("{tag}.traces.jsonl"));
        let status = Command::new(bin)
            .arg("verify")
            .args(args)
            .args(["--seed", "7", "--jobs", tag.rsplit('-').next().unwrap()])
            .arg("--out")
            .arg(&report)
            .arg("--traces")
            .arg(&traces)
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.code() == Some(0), || format!("verify {} exited with {status}", args[0]))?;
        let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
        Ok((read(&report)?, read(&traces)?))
    };
    for args in runs {
        let first = invoke(args, &format!("{}-a-1", args[0]), &dir)?;
        let again = invoke(args, &format!("{}-b-1", args[0]), &dir)?;
        let wide = invoke(args, &format!("{}-c-8", args[0]), &dir)?;
        ensure(first == again && first == wide, || format!("verify {} is not reproducible", args[0]))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} verify commands byte-identical across --jobs 1 and 8", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("order/oracle agreement", c1),
        ("gamma-order instances", c2),
        ("named ordinal values", c3),
        ("hyperexponential law", c4),
        ("Q-observation equivalences", c5),
        ("pushing a bigger diamond out", c6),
        ("Q-formula monotonicity", c7),
        ("reduction property", c8),
        ("Pi_j consequences", c9),
        ("transfinite reduction", c10),
        ("demote/promote round trip", c11),
        ("determinism", c12),
    ];
    let filter: Option<Arc<str>> = std::env::args().nth(1).filter(|a| !a.starts_with('-')).map(Into::into);
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if let Some(only) = &filter {
            if only.parse::<usize>().ok() != Some(id) {
                continue;
            }
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
