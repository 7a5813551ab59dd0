use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use fmtk::dsum::corpus::{exhaustive_corpus, random_spec, CorpusParams};
use fmtk::dsum::{
    check_otimes, verify_abstract_lemma, verify_distorted_sum, verify_distorted_sum_lemma, BaseExpansion,
    DistortedSumSpec, PredicateDepth, TableOutcome,
};
use fmtk::io::{load_structure_file, parse_tuple, write_structure, StructureFile};
use fmtk::locality::{
    as_distorted_sum, build_example_23, check_subclaim, distant_exists_brute, distant_exists_local, eval_basic_local,
    example_23_auto, gaifman_params, lemma22_depth, min_radius_search, radius_schedule_with, scattered_max,
    BallMode, BasicLocalSentence, BetaRule, DefinableSet, GaifmanVariant, RadiusSearch,
};
use fmtk::locality::distant::Ball;
use fmtk::report::{Outcome, RunReport};
use fmtk::structure::Structure;
use fmtk::theory::enumerate::{coloured_graph, enumerate_graphs};
use fmtk::theory::{ef_equivalent, parse_formula, Budget, Evaluator};
use fmtk::{Error, Result};

const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Parser)]
#[command(name = "fmtk", version, about = "Bounded-depth types, distorted sums and Gaifman locality")]
struct Cli {
    /// Seed for every randomized corpus.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Write the witness of a failing run to this file instead of stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    #[arg(long, global = true, default_value_t = 4_000_000)]
    max_nodes: usize,
    #[arg(long, global = true, default_value_t = 24)]
    max_depth: u32,
    #[arg(long, global = true, default_value_t = 20_000)]
    max_universe: usize,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        Budget { max_nodes: self.max_nodes, max_depth: self.max_depth, max_universe: self.max_universe }
    }

    fn json(self) -> serde_json::Value {
        json!({"max_nodes": self.max_nodes, "max_depth": self.max_depth, "max_universe": self.max_universe})
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the canonical serialization of th^n(M; a).
    Th {
        file: PathBuf,
        #[arg(long, default_value = "")]
        tuple: String,
        #[arg(short)]
        n: u32,
    },
    /// Compare two types; exit 0 iff equal.
    Eq {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, default_value = "")]
        tuple_a: String,
        #[arg(long, default_value = "")]
        tuple_b: String,
        #[arg(short)]
        n: u32,
    },
    /// Distorted sums.
    Dsum {
        #[command(subcommand)]
        cmd: DsumCmd,
    },
    /// Locality procedures.
    Locality {
        #[command(subcommand)]
        cmd: LocalityCmd,
    },
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Distorted-sum files.
    files: Vec<PathBuf>,
    /// Exhaustive corpus with up to this many index points.
    #[arg(long)]
    exhaustive: Option<usize>,
    /// This many random specs.
    #[arg(long)]
    random: Option<usize>,
    /// Index size for random specs.
    #[arg(long, default_value_t = 3)]
    index_size: usize,
    /// Only relate index points at distance ≤ 1.
    #[arg(long)]
    index_local: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    FullAtRoot,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum BetaArg {
    WithProjection,
    Printed,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Typed,
    Bare,
}

#[derive(Args, Clone, Copy)]
struct ScheduleArgs {
    #[arg(long, value_enum, default_value = "with-projection")]
    beta_rule: BetaArg,
    #[arg(long, value_enum, default_value = "typed")]
    base: BaseArg,
}

#[derive(Subcommand)]
enum DsumCmd {
    /// Depth-0 composition from window data.
    Verify {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 2)]
        max_len: usize,
    },
    /// Print the composition table F_{n,l} built from the corpus.
    Compose {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(short)]
        n: u32,
        #[arg(short)]
        l: usize,
    },
    /// The distorted sum lemma at (n, l).
    CheckLemma {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(short)]
        n: u32,
        #[arg(short)]
        l: usize,
        #[arg(long, value_enum, default_value = "full-at-root")]
        rule: RuleArg,
    },
    /// The abstract lemma at (n, l).
    CheckAbstract {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(short)]
        n: u32,
        #[arg(short)]
        l: usize,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// The hypothesis of the abstract lemma up to level n.
    CheckOtimes {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(short)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        max_len: usize,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
}

#[derive(Args, Clone)]
struct SetArgs {
    /// Unary predicate defining C.
    #[arg(long, default_value = "C")]
    c: String,
    /// Formula in x0 defining C, overriding --c.
    #[arg(long)]
    c_formula: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Improved,
    Classical,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Union,
    PerPoint,
}

#[derive(Subcommand)]
enum LocalityCmd {
    /// Distant elements of C: local procedure against brute force.
    Distant {
        file: Option<PathBuf>,
        #[arg(long, default_value = "")]
        tuple: String,
        #[arg(short, default_value_t = 1)]
        m: u32,
        #[command(flatten)]
        set: SetArgs,
        /// Check this many random coloured graphs instead of a file.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 12)]
        max_size: usize,
    },
    /// Longest sequence in C with pairwise distance > 2m, capped.
    Scattered {
        file: PathBuf,
        #[arg(short, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 8)]
        cap: usize,
        #[command(flatten)]
        set: SetArgs,
    },
    /// Build the radius-2 versus radius-3 graph and check its certificate.
    Example23 {
        /// A number, or `auto` for the least working fanout.
        #[arg(long, default_value = "auto")]
        fanout: String,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 8)]
        max_fanout: usize,
        /// Write the graph in structure-file format.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Least radius whose ball theories determine th^n within each structure.
    MinRadius {
        files: Vec<PathBuf>,
        /// Add the radius-2 versus radius-3 graph to the corpus.
        #[arg(long)]
        example23: bool,
        #[arg(short)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(long, default_value_t = 1)]
        tuple_len: usize,
        #[arg(long, value_enum, default_value = "union")]
        mode: ModeArg,
        #[arg(long, default_value_t = 16)]
        max_radius: u32,
    },
    /// The ball theory at (β(n), r(n)) determines DTh^n within each structure.
    Subclaim {
        files: Vec<PathBuf>,
        /// All graphs up to this many vertices.
        #[arg(long)]
        graphs: Option<usize>,
        #[arg(short)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        max_len: usize,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Radius and count bounds of Gaifman normal forms.
    GaifmanParams {
        #[arg(long, value_enum, default_value = "improved")]
        variant: VariantArg,
        #[arg(short)]
        n: u32,
        #[arg(short, default_value_t = 0)]
        m: u32,
    },
    /// Evaluate a basic local sentence; psi is relativized to V^r(x0).
    EvalBasicLocal {
        file: Option<PathBuf>,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value = "true")]
        psi: String,
        /// Random graphs checked against the unrelativized expansion.
        #[arg(long)]
        random: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(Output::Text(s)) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Ok(Output::Report(mut r, code)) => {
            r.wall_ms = start.elapsed().as_millis();
            print!("{}", if cli.json { r.json() + "\n" } else { r.text() });
            eprintln!("wall-time-ms: {}", r.wall_ms);
            if let Some(w) = &r.witness {
                let text = serde_json::to_string(w).expect("witness serializes");
                match &cli.out {
                    Some(p) => {
                        if let Err(e) = std::fs::write(p, text + "\n") {
                            eprintln!("error: {}: {e}", p.display());
                            return ExitCode::from(2);
                        }
                    }
                    None => eprintln!("witness: {text}"),
                }
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Budget(_) => 3,
                _ => 2,
            })
        }
    }
}

enum Output {
    Text(String),
    Report(RunReport, u8),
}

fn finish(r: RunReport) -> Output {
    let code = match r.outcome {
        Outcome::Pass => 0,
        Outcome::Fail => 1,
    };
    Output::Report(r, code)
}

fn run(cli: &Cli) -> Result<Output> {
    let budget = cli.budget.budget();
    let report = |name: &str| RunReport::new(name, cli.seed, cli.budget.json());
    match &cli.cmd {
        Cmd::Th { file, tuple, n } => {
            let f = load_structure_file(file)?;
            let m = f.structure();
            let a = parse_tuple(m, tuple)?;
            Ok(Output::Text(Evaluator::with_budget(m, budget).thn(&a, *n)?.serialize() + "\n"))
        }
        Cmd::Eq { file_a, file_b, tuple_a, tuple_b, n } => {
            let (fa, fb) = (load_structure_file(file_a)?, load_structure_file(file_b)?);
            let (ma, mb) = (fa.structure(), fb.structure());
            let (a, b) = (parse_tuple(ma, tuple_a)?, parse_tuple(mb, tuple_b)?);
            if a.len() != b.len() {
                return Err(Error::Domain("tuples of different length".into()));
            }
            let ta = Evaluator::with_budget(ma, budget).thn(&a, *n)?;
            let tb = Evaluator::with_budget(mb, budget).thn(&b, *n)?;
            let mut r = report("eq");
            r.inputs = vec![fa.fingerprint(), fb.fingerprint()];
            r.detail("n", n);
            r.detail("equal", ta == tb);
            r.detail("digest_a", ta.digest());
            r.detail("digest_b", tb.digest());
            // the game is exponential in n; only play it on small inputs
            let cost = (ma.size().max(mb.size()) as f64).powi(2 * *n as i32);
            if cost <= 1e8 {
                r.detail("ef_agrees", ef_equivalent(ma, &a, mb, &b, *n) == (ta == tb));
            } else {
                r.detail("ef_agrees", "skipped");
            }
            if ta != tb {
                r.outcome = Outcome::Fail;
            }
            Ok(finish(r))
        }
        Cmd::Dsum { cmd } => run_dsum(cli, cmd, budget),
        Cmd::Locality { cmd } => run_locality(cli, cmd, budget),
    }
}

fn corpus_of(args: &CorpusArgs, seed: u64) -> Result<(Vec<DistortedSumSpec>, Vec<String>, serde_json::Value)> {
    let mut specs = Vec::new();
    let mut inputs = Vec::new();
    for f in &args.files {
        match load_structure_file(f)? {
            StructureFile::Sum(s) => {
                inputs.push(s.fingerprint());
                specs.push(s);
            }
            StructureFile::Structure(_) => {
                return Err(Error::Domain(format!("{} is not a distorted sum", f.display())));
            }
        }
    }
    let params = CorpusParams { index_local: args.index_local, ..Default::default() };
    let mut desc = json!({"files": args.files.len()});
    if let Some(k) = args.exhaustive {
        let p = CorpusParams { max_index: k, ..params.clone() };
        let c = exhaustive_corpus(&p)?;
        desc["exhaustive"] = json!({"max_index": k, "index_local": args.index_local, "specs": c.len()});
        specs.extend(c);
    }
    if let Some(count) = args.random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            specs.push(random_spec(&mut rng, &params, args.index_size)?);
        }
        desc["random"] = json!({"count": count, "index_size": args.index_size, "index_local": args.index_local});
    }
    if specs.is_empty() {
        return Err(Error::Domain("empty corpus: give files, --exhaustive or --random".into()));
    }
    inputs.push(corpus_fingerprint(&specs));
    Ok((specs, inputs, desc))
}

fn corpus_fingerprint(specs: &[DistortedSumSpec]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for s in specs {
        h.update(s.fingerprint());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn schedule_of(n: u32, s: ScheduleArgs) -> Result<fmtk::dsum::RadiusSchedule> {
    let rule = match s.beta_rule {
        BetaArg::WithProjection => BetaRule::WithProjection,
        BetaArg::Printed => BetaRule::Printed,
    };
    let base = match s.base {
        BaseArg::Typed => BaseExpansion::Typed,
        BaseArg::Bare => BaseExpansion::Bare,
    };
    Ok(radius_schedule_with(n.max(1), 2, rule)?.with_base(base))
}

fn table_outcome<K: Ord + Clone + std::fmt::Debug + fmtk::dsum::table::KeyDigest>(
    r: &mut RunReport,
    t: TableOutcome<K>,
    corpus: &[DistortedSumSpec],
) {
    match t {
        TableOutcome::Functional(t) => {
            r.detail("entries", t.len());
            r.detail("instances", t.instances());
        }
        TableOutcome::Collision(c) => r.fail_with(json!({
            "first": {"spec": corpus[c.first.spec].fingerprint(), "index": c.first.spec, "tuple": c.first.tuple, "value": c.first_value.digest()},
            "second": {"spec": corpus[c.second.spec].fingerprint(), "index": c.second.spec, "tuple": c.second.tuple, "value": c.second_value.digest()},
            "key": c.key.digest_parts(),
        })),
    }
}

fn run_dsum(cli: &Cli, cmd: &DsumCmd, budget: Budget) -> Result<Output> {
    let mut r = RunReport::new("", cli.seed, cli.budget.json());
    let corpus_args = match cmd {
        DsumCmd::Verify { corpus, .. }
        | DsumCmd::Compose { corpus, .. }
        | DsumCmd::CheckLemma { corpus, .. }
        | DsumCmd::CheckAbstract { corpus, .. }
        | DsumCmd::CheckOtimes { corpus, .. } => corpus,
    };
    let (corpus, inputs, desc) = corpus_of(corpus_args, cli.seed)?;
    r.inputs = inputs;
    r.detail("corpus", desc);
    match cmd {
        DsumCmd::Verify { max_len, .. } => {
            r.command = "dsum verify".into();
            r.detail("max_len", max_len);
            table_outcome(&mut r, verify_distorted_sum(&corpus, *max_len)?, &corpus);
        }
        DsumCmd::Compose { n, l, .. } => {
            r.command = "dsum compose".into();
            match verify_distorted_sum_lemma(&corpus, *n, *l, PredicateDepth::default(), budget)? {
                TableOutcome::Functional(t) => r.detail("table", t.export()),
                other => table_outcome(&mut r, other, &corpus),
            }
        }
        DsumCmd::CheckLemma { n, l, rule, .. } => {
            r.command = "dsum check-lemma".into();
            let rule = match rule {
                RuleArg::FullAtRoot => PredicateDepth::FullAtRoot,
                RuleArg::Uniform => PredicateDepth::Uniform,
            };
            r.detail("n", n);
            r.detail("l", l);
            r.detail("rule", rule);
            table_outcome(&mut r, verify_distorted_sum_lemma(&corpus, *n, *l, rule, budget)?, &corpus);
        }
        DsumCmd::CheckAbstract { n, l, schedule, .. } => {
            r.command = "dsum check-abstract".into();
            let s = schedule_of(*n, *schedule)?;
            r.detail("n", n);
            r.detail("l", l);
            r.detail("beta", s.betas());
            r.detail("radius", s.radii());
            r.detail("base", s.base());
            table_outcome(&mut r, verify_abstract_lemma(&corpus, &s, *n, *l, budget)?, &corpus);
        }
        DsumCmd::CheckOtimes { n, max_len, schedule, .. } => {
            r.command = "dsum check-otimes".into();
            let s = schedule_of(*n, *schedule)?;
            r.detail("n", n);
            r.detail("max_len", max_len);
            r.detail("beta", s.betas());
            r.detail("radius", s.radii());
            let rep = check_otimes(&corpus, &s, *n, *max_len, budget)?;
            r.detail("keys", rep.result.keys);
            r.detail("instances", rep.result.instances);
            if let Some((a, b)) = rep.witnesses {
                r.fail_with(json!({
                    "first": {"spec": corpus[a.spec].fingerprint(), "index": a.spec, "tuple": a.tuple},
                    "second": {"spec": corpus[b.spec].fingerprint(), "index": b.spec, "tuple": b.tuple},
                }));
            }
        }
    }
    Ok(finish(r))
}

fn set_of(m: &Structure, s: &SetArgs) -> Result<DefinableSet> {
    match &s.c_formula {
        Some(f) => DefinableSet::formula(parse_formula(f, m.signature())?),
        None => Ok(DefinableSet::predicate(s.c.clone())),
    }
}

fn load_plain(path: &PathBuf) -> Result<(Structure, String)> {
    let f = load_structure_file(path)?;
    Ok((f.structure().clone(), f.fingerprint()))
}

/// A graph on `n` vertices with edge probability `p` and a random colour class.
fn random_coloured<R: Rng>(rng: &mut R, n: usize, p: f64) -> Result<Structure> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    let colour: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
    coloured_graph(n, &edges, &colour)
}

fn run_locality(cli: &Cli, cmd: &LocalityCmd, budget: Budget) -> Result<Output> {
    let mut r = RunReport::new("", cli.seed, cli.budget.json());
    match cmd {
        LocalityCmd::Distant { file, tuple, m, set, random, max_size } => {
            r.command = "locality distant".into();
            r.detail("m", m);
            let mut cases: Vec<(Structure, Vec<usize>)> = Vec::new();
            if let Some(path) = file {
                let (g, fp) = load_plain(path)?;
                r.inputs.push(fp);
                let a = parse_tuple(&g, tuple)?;
                cases.push((g, a));
            }
            if let Some(count) = random {
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                for _ in 0..*count {
                    let n = rng.gen_range(1..=*max_size);
                    let p = rng.gen_range(0.1..0.5);
                    let g = random_coloured(&mut rng, n, p)?;
                    let len = rng.gen_range(0..=2usize);
                    let a: Vec<usize> = (0..len).map(|_| rng.gen_range(0..n)).collect();
                    cases.push((g, a));
                }
                r.detail("random", json!({"count": count, "max_size": max_size}));
            }
            if cases.is_empty() {
                return Err(Error::Domain("give a file or --random".into()));
            }
            let mut mismatches = Vec::new();
            let mut answers = Vec::new();
            for (i, (g, a)) in cases.iter().enumerate() {
                let c = set_of(g, set)?;
                let global = scattered_max(g, &c, *m, a.len() + 1)?;
                let ball = Ball::new(g, a, 3 * m)?;
                let local = distant_exists_local(&ball, &c, *m, global)?;
                let brute = distant_exists_brute(g, a, &c, *m)?;
                answers.push(local);
                if local != brute {
                    mismatches.push(json!({"case": i, "tuple": a, "local": local, "brute": brute, "graph": write_structure(g)}));
                }
            }
            if cases.len() == 1 {
                r.detail("answer", answers[0]);
                let c = set_of(&cases[0].0, set)?;
                r.detail("pinned_depth", lemma22_depth(&c, cases[0].0.signature().max_arity().max(2), *m, cases[0].1.len())?);
            } else {
                r.detail("cases", cases.len());
                r.detail("true_answers", answers.iter().filter(|&&x| x).count());
            }
            r.detail("mismatches", mismatches.len());
            if !mismatches.is_empty() {
                r.fail_with(mismatches);
            }
        }
        LocalityCmd::Scattered { file, m, cap, set } => {
            r.command = "locality scattered".into();
            let (g, fp) = load_plain(file)?;
            r.inputs.push(fp);
            r.detail("m", m);
            r.detail("cap", cap);
            r.detail("scattered", scattered_max(&g, &set_of(&g, set)?, *m, *cap)?);
        }
        LocalityCmd::Example23 { fanout, depth, max_fanout, export } => {
            r.command = "locality example23".into();
            let e = if fanout == "auto" {
                example_23_auto(*depth, *max_fanout)?
            } else {
                let f = fanout.parse().map_err(|_| Error::Domain(format!("bad fanout {fanout}")))?;
                build_example_23(f, *depth)?
            };
            r.inputs.push(e.structure.fingerprint());
            r.detail("fanout", e.fanout);
            r.detail("size", e.structure.size());
            r.detail("a", e.structure.name(e.a));
            r.detail("b", e.structure.name(e.b));
            r.detail("c_star", e.structure.name(e.c_star));
            r.detail("certificate", &e.certificate);
            if let Some(p) = export {
                std::fs::write(p, example_file(&e))?;
            }
        }
        LocalityCmd::MinRadius { files, example23, n, depth, tuple_len, mode, max_radius } => {
            r.command = "locality min-radius".into();
            let mut corpus = Vec::new();
            for f in files {
                let (g, fp) = load_plain(f)?;
                r.inputs.push(fp);
                corpus.push(g);
            }
            if *example23 {
                let e = example_23_auto(2, 8)?;
                r.inputs.push(e.structure.fingerprint());
                corpus.push(e.structure);
            }
            if corpus.is_empty() {
                return Err(Error::Domain("empty corpus".into()));
            }
            let mode = match mode {
                ModeArg::Union => BallMode::Union,
                ModeArg::PerPoint => BallMode::PerPoint,
            };
            let search = RadiusSearch { tuple_len: *tuple_len, mode, max_radius: *max_radius };
            let res = min_radius_search(&corpus, *n, *depth, search, budget)?;
            r.detail("n", n);
            r.detail("depth", depth);
            r.detail("search", search);
            r.detail("radius", res.radius);
            r.detail("scope", "within each structure; a corpus-relative lower bound");
            if let Some(w) = &res.witness {
                let m = &corpus[w.structure];
                let names = |t: &[usize]| t.iter().map(|&x| m.name(x).to_string()).collect::<Vec<_>>();
                r.detail(
                    "witness_below",
                    json!({"radius": w.radius, "structure": w.structure, "first": names(&w.first), "second": names(&w.second)}),
                );
            }
        }
        LocalityCmd::Subclaim { files, graphs, n, max_len, schedule } => {
            r.command = "locality subclaim".into();
            let mut corpus = Vec::new();
            for f in files {
                let (g, fp) = load_plain(f)?;
                r.inputs.push(fp);
                corpus.push(as_distorted_sum(&g)?);
            }
            if let Some(k) = graphs {
                let gs = enumerate_graphs(*k)?;
                r.detail("graphs", json!({"max_size": k, "count": gs.len()}));
                for g in &gs {
                    corpus.push(as_distorted_sum(g)?);
                }
            }
            if corpus.is_empty() {
                return Err(Error::Domain("empty corpus".into()));
            }
            r.inputs.push(corpus_fingerprint(&corpus));
            let s = schedule_of(*n, *schedule)?;
            let rep = check_subclaim(&corpus, &s, *n, *max_len, budget)?;
            r.detail("n", n);
            r.detail("depth", rep.depth);
            r.detail("radius", rep.radius);
            r.detail("instances", rep.instances);
            r.detail("keys", rep.keys);
            if let Some(w) = rep.witness {
                r.fail_with(w);
            }
        }
        LocalityCmd::GaifmanParams { variant, n, m } => {
            r.command = "locality gaifman-params".into();
            let v = match variant {
                VariantArg::Improved => GaifmanVariant::Improved,
                VariantArg::Classical => GaifmanVariant::Classical,
            };
            let p = gaifman_params(*n, *m, v)?;
            r.detail("variant", p.variant);
            r.detail("params", format!("r={} s={} t={}", p.r, p.s, p.t));
        }
        LocalityCmd::EvalBasicLocal { file, count, radius, psi, random } => {
            r.command = "locality eval-basic-local".into();
            r.detail("count", count);
            r.detail("radius", radius);
            r.detail("psi", psi);
            if let Some(path) = file {
                let (g, fp) = load_plain(path)?;
                r.inputs.push(fp);
                let s = BasicLocalSentence::localize(*count, *radius, &parse_formula(psi, g.signature())?)?;
                r.detail("value", eval_basic_local(&g, &s)?);
            }
            if let Some(k) = random {
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                let mut trues = 0;
                let mut mismatches = Vec::new();
                for i in 0..*k {
                    let n = rng.gen_range(1..=8);
                    let p = rng.gen_range(0.1..0.5);
                    let g = random_coloured(&mut rng, n, p)?;
                    let s = BasicLocalSentence::localize(*count, *radius, &parse_formula(psi, g.signature())?)?;
                    let fast = eval_basic_local(&g, &s)?;
                    let slow = fmtk::theory::eval_formula(&g, &s.expand(), &[])?;
                    trues += usize::from(fast);
                    if fast != slow {
                        mismatches.push(json!({"case": i, "graph": write_structure(&g)}));
                    }
                }
                r.detail("random", k);
                r.detail("true_answers", trues);
                r.detail("mismatches", mismatches.len());
                if !mismatches.is_empty() {
                    r.fail_with(mismatches);
                }
            }
        }
    }
    Ok(finish(r))
}

fn example_file(e: &fmtk::locality::Example23) -> String {
    let m = &e.structure;
    let mut out = String::from("# radius 2 cannot tell a from b; radius 3 can\n");
    out.push_str(&format!(
        "# a = {}, b = {}, c* = {} (the C-element at distance 3 from a), fanout {}\n",
        m.name(e.a),
        m.name(e.b),
        m.name(e.c_star),
        e.fanout
    ));
    out.push_str(&write_structure(m));
    out
}
