//! `worm`: queries, proof search and verification runs over worms.
//!
//! Exit codes: 0 success, 1 counterexample found, 2 malformed input,
//! 3 transfinite modality where a finite one is required, 4 node budget
//! exhausted.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wormcalc::formula::{demote, q_formula, q_iter, GLPFormula};
use wormcalc::rc::{prove, ProofStatus, ProverConfig, RcError, Sequent, DEFAULT_BUDGET, DEFAULT_DEPTH};
use wormcalc::reduction::{
    check_cofinality, check_generalized_reduction, check_observation_pij, check_pij, check_push_diamond,
    check_qmono, check_reduction, cofinal_family, default_palette, Bounds, ReductionError, Universe,
    VerificationReport, DEFAULT_K,
};
use wormcalc::worm::{compare_worms, WormError};
use wormcalc::{Ordinal, SPFormula, SyntaxError, Worm};

#[derive(Parser)]
#[command(name = "worm", version, about = "Worm calculus for the provability logic GLP")]
struct Cli {
    /// Pretty-print with ω, ⊤, ⟨ ⟩ instead of the ASCII grammar.
    #[arg(long, global = true)]
    unicode: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Order value o(A), or o_γ(A) with --gamma.
    Ord {
        worm: String,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Compare two worms under <_γ; prints <, = or >.
    Cmp {
        #[arg(long, default_value = "0")]
        gamma: String,
        a: String,
        b: String,
    },
    /// Search for a derivation of `A |- B`.
    Prove {
        sequent: String,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Write the derivation tree as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a bounded verification and emit a JSON Lines report.
    Verify(VerifyArgs),
    /// Q_n^K(φ), or Q(A, φ) with --worm.
    Qexpand {
        phi: String,
        #[arg(long, default_value = "0")]
        n: String,
        #[arg(long = "K", default_value_t = 1)]
        k: usize,
        #[arg(long)]
        worm: Option<String>,
    },
    /// Rename the joint modality set of the formulas onto 0, 1, 2, ...
    Demote {
        #[arg(required = true)]
        formulas: Vec<String>,
        /// Keep 0 fixed.
        #[arg(long)]
        pin_zero: bool,
    },
    /// The γ-head of a worm.
    Head {
        #[arg(long)]
        gamma: String,
        worm: String,
    },
    /// Shift every modality of a worm up or down by α.
    Shift {
        #[arg(long, conflicts_with = "down", required_unless_present = "down")]
        up: Option<String>,
        #[arg(long)]
        down: Option<String>,
        worm: String,
    },
    /// Ordinal arithmetic.
    Ordcalc {
        #[arg(value_enum)]
        op: CalcOp,
        args: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CalcOp {
    /// Canonical form of a.
    Norm,
    /// a + b.
    Add,
    /// -a + b, the c with a + c = b.
    Lsub,
    /// a · n for natural n.
    Mul,
    /// -1 + ω^a.
    Step,
    /// k-fold iteration of step: e a k.
    E,
    /// a[k].
    Fs,
    /// Compare a and b.
    Cmp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Reduction,
    Pij,
    ObservationPij,
    Cofinal,
    GenReduction,
    Qmono,
    PushDiamond,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    theorem: Theorem,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    j: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    depth: u32,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    max_mod: Option<u64>,
    #[arg(long)]
    max_len: Option<usize>,
    /// Explicit modality set, comma separated.
    #[arg(long, value_delimiter = ',')]
    palette: Option<Vec<String>>,
    /// Propositional variables of the universe, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "p")]
    vars: Vec<String>,
    /// Instances drawn per check; 0 is exhaustive.
    #[arg(long, default_value_t = 0)]
    sample: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Formulas φ for qmono (repeatable); defaults to the universe pool.
    #[arg(long)]
    phi: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sidecar file for derivation traces, one JSON line per trace_ref.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Embed traces in the instance lines.
    #[arg(long)]
    inline_traces: bool,
}

enum Failure {
    Syntax(SyntaxError),
    Transfinite(String),
    Input(String),
    Exhausted(String),
    Io(io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Syntax(_) | Failure::Input(_) | Failure::Io(_) => 2,
            Failure::Transfinite(_) => 3,
            Failure::Exhausted(_) => 4,
        }
    }
}

impl From<SyntaxError> for Failure {
    fn from(e: SyntaxError) -> Self {
        Failure::Syntax(e)
    }
}

impl From<WormError> for Failure {
    fn from(e: WormError) -> Self {
        match e {
            WormError::TransfiniteModality(_) => Failure::Transfinite(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Syntax(e) => write!(f, "{e}"),
            Failure::Transfinite(m) | Failure::Input(m) | Failure::Exhausted(m) => f.write_str(m),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("worm: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn ordinal(s: &str) -> Result<Ordinal, Failure> {
    Ok(Ordinal::parse(s)?)
}

fn worm(s: &str) -> Result<Worm, Failure> {
    Ok(Worm::parse(s)?)
}

struct Printer {
    unicode: bool,
}

impl Printer {
    fn ord(&self, o: &Ordinal) -> String {
        if self.unicode {
            o.unicode()
        } else {
            o.to_string()
        }
    }

    fn worm(&self, w: &Worm) -> String {
        if self.unicode {
            w.unicode()
        } else {
            w.to_string()
        }
    }

    fn glp(&self, f: &GLPFormula) -> String {
        if self.unicode {
            f.unicode()
        } else {
            f.to_string()
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let p = Printer { unicode: cli.unicode };
    match &cli.command {
        Command::Ord { worm: w, gamma, json } => {
            let w = worm(w)?;
            let value = match gamma {
                Some(g) => w.ordinal_value_gamma(&ordinal(g)?)?,
                None => w.ordinal_value()?,
            };
            if *json {
                let line = serde_json::json!({ "worm": w, "gamma": gamma, "value": value });
                println!("{line}");
            } else {
                println!("{}", p.ord(&value));
            }
        }
        Command::Cmp { gamma, a, b } => {
            println!("{}", compare_worms(&ordinal(gamma)?, &worm(a)?, &worm(b)?)?);
        }
        Command::Prove {
            sequent,
            depth,
            budget,
            out,
        } => return cmd_prove(sequent, *depth, *budget, out.as_ref()),
        Command::Verify(args) => return cmd_verify(args),
        Command::Qexpand { phi, n, k, worm: w } => {
            let phi = GLPFormula::parse(phi)?;
            let q = match w {
                Some(w) => q_formula(&worm(w)?, &phi),
                None => q_iter(&ordinal(n)?, *k, &phi),
            };
            println!("{}", p.glp(&q));
        }
        Command::Demote { formulas, pin_zero } => {
            let fs = formulas
                .iter()
                .map(|f| GLPFormula::parse(f))
                .collect::<Result<Vec<_>, _>>()?;
            let (out, renaming) = demote(&fs, *pin_zero);
            for f in &out {
                println!("{}", p.glp(f));
            }
            let pairs: Vec<String> = renaming
                .pairs()
                .iter()
                .map(|(s, t)| format!("{} -> {}", p.ord(s), p.ord(t)))
                .collect();
            println!("renaming: {}", pairs.join(", "));
        }
        Command::Head { gamma, worm: w } => {
            println!("{}", p.worm(&worm(w)?.head(&ordinal(gamma)?)));
        }
        Command::Shift { up, down, worm: w } => {
            let w = worm(w)?;
            let shifted = match (up, down) {
                (Some(a), _) => w.shift_up(&ordinal(a)?),
                (None, Some(a)) => w.shift_down(&ordinal(a)?)?,
                (None, None) => unreachable!("clap requires one of --up and --down"),
            };
            println!("{}", p.worm(&shifted));
        }
        Command::Ordcalc { op, args } => println!("{}", ordcalc(*op, args, &p)?),
    }
    Ok(0)
}

fn ordcalc(op: CalcOp, args: &[String], p: &Printer) -> Result<String, Failure> {
    let arity = match op {
        CalcOp::Norm | CalcOp::Step => 1,
        _ => 2,
    };
    if args.len() != arity {
        return Err(Failure::Input(format!("expected {arity} argument(s), got {}", args.len())));
    }
    let natural = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| Failure::Input(format!("expected a natural number, got {s:?}")))
    };
    let a = ordinal(&args[0])?;
    let value = match op {
        CalcOp::Norm => a,
        CalcOp::Add => a.add(&ordinal(&args[1])?),
        CalcOp::Lsub => a
            .left_subtract(&ordinal(&args[1])?)
            .map_err(|e| Failure::Input(e.to_string()))?,
        CalcOp::Mul => a.mul_nat(&natural(&args[1])?.into()),
        CalcOp::Step => a.hyper_step(),
        CalcOp::E => a.hyper_e(natural(&args[1])?),
        CalcOp::Fs => a
            .fundamental_sequence(natural(&args[1])?)
            .map_err(|e| Failure::Input(e.to_string()))?,
        CalcOp::Cmp => {
            let b = ordinal(&args[1])?;
            let sym = match a.cmp(&b) {
                std::cmp::Ordering::Less => "<",
                std::cmp::Ordering::Equal => "=",
                std::cmp::Ordering::Greater => ">",
            };
            return Ok(sym.to_string());
        }
    };
    Ok(p.ord(&value))
}

fn cmd_prove(sequent: &str, depth: u32, budget: u64, out: Option<&PathBuf>) -> Result<u8, Failure> {
    let s = Sequent::parse(sequent)?;
    let config = ProverConfig {
        max_depth: depth,
        budget,
    };
    let result = prove(&s, &config).map_err(|e| match e {
        RcError::InvalidDepth => Failure::Input(e.to_string()),
        RcError::ResourceExhausted { .. } => Failure::Exhausted(e.to_string()),
    })?;
    eprintln!(
        "nodes expanded {}, cache hits {}",
        result.stats.nodes_expanded, result.stats.cache_hits
    );
    match &result.status {
        ProofStatus::Derivable(d) => {
            println!("derivable");
            if let Some(path) = out {
                let mut w = BufWriter::new(File::create(path)?);
                serde_json::to_writer_pretty(&mut w, d).map_err(io::Error::from)?;
                writeln!(w)?;
            }
        }
        ProofStatus::NotFoundWithinDepth(d) => println!("not-found depth={d}"),
    }
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Failure::Input(e.to_string()))?;
    let report = pool.install(|| verify(a))?;
    let mut out: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    report.write_jsonl(&mut out, a.inline_traces)?;
    out.flush()?;
    if let Some(path) = &a.traces {
        let mut w = BufWriter::new(File::create(path)?);
        report.write_traces_jsonl(&mut w)?;
        w.flush()?;
    }
    let s = &report.summary;
    eprintln!(
        "{}: {} instances, {} counterexamples, {:?} {}",
        report.theorem,
        s.instances,
        s.counterexamples,
        s.by_status,
        format_args!("{:.2}s", report.wall_time.as_secs_f64())
    );
    Ok(if report.ok() { 0 } else { 1 })
}

fn verify(a: &VerifyArgs) -> Result<VerificationReport, Failure> {
    let opt = |s: &Option<String>, default: &str| ordinal(s.as_deref().unwrap_or(default));
    let bounds = Bounds {
        k: a.k.unwrap_or(DEFAULT_K),
        depth: a.depth,
        budget: a.budget,
    };
    let universe = |default_max: u64, default_len: usize, default_palette: Option<Vec<Ordinal>>| -> Result<Universe, Failure> {
        let palette = match &a.palette {
            Some(p) => Some(p.iter().map(|m| ordinal(m)).collect::<Result<Vec<_>, _>>()?),
            None if a.max_mod.is_none() => default_palette,
            None => None,
        };
        let len = a.max_len.unwrap_or(default_len);
        let mut u = match palette {
            Some(p) => Universe::with_palette(p, len),
            None => Universe::new(a.max_mod.unwrap_or(default_max), len),
        };
        u.variables = a.vars.clone();
        u.seed = a.seed;
        u.sample_size = a.sample;
        Ok(u)
    };
    let finite = |o: &Ordinal| {
        o.to_u64()
            .ok_or_else(|| Failure::Input(format!("{o} must be finite to size the default universe")))
    };
    let report = match a.theorem {
        Theorem::Reduction => {
            let n = opt(&a.n, "0")?;
            let u = universe(finite(&n)? + 1, 2, None)?;
            check_reduction(&n, &u, &bounds)?
        }
        Theorem::Pij => {
            let n = opt(&a.n, "1")?;
            let j = opt(&a.j, "0")?;
            let u = universe(finite(&n)? + 1, 2, None)?;
            check_pij(&j, &n, &u, &bounds)?
        }
        Theorem::ObservationPij => {
            let n = opt(&a.n, "1")?;
            let j = opt(&a.j, "0")?;
            let u = universe(finite(&n)? + 1, 2, None)?;
            check_observation_pij(&u, &n, &j, &bounds)?
        }
        Theorem::Cofinal => {
            let family = cofinal_family(&opt(&a.gamma, "0")?, &opt(&a.zeta, "w")?, bounds.k)?;
            check_cofinality(&family, bounds.k)
        }
        Theorem::GenReduction => {
            let gamma = opt(&a.gamma, "0")?;
            let zeta = opt(&a.zeta, "w")?;
            let u = universe(0, 2, Some(default_palette(&gamma, &zeta)))?;
            check_generalized_reduction(&gamma, &zeta, &u, &bounds)?
        }
        Theorem::Qmono => {
            let u = universe(2, 2, None)?;
            let phis = a
                .phi
                .iter()
                .map(|f| SPFormula::parse(f))
                .collect::<Result<Vec<_>, _>>()?;
            check_qmono(&u, (!phis.is_empty()).then_some(&phis[..]), &bounds)?
        }
        Theorem::PushDiamond => {
            let u = universe(2, 2, None)?;
            let pair = match (&a.gamma, &a.zeta) {
                (Some(g), Some(z)) => Some(vec![(ordinal(g)?, ordinal(z)?)]),
                (None, None) => None,
                _ => return Err(Failure::Input("give both --gamma and --zeta, or neither".into())),
            };
            check_push_diamond(&u, pair.as_deref(), &bounds)?
        }
    };
    Ok(report)
}
