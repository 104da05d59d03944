//! The `freiheit` command line. `dispatch` parses an argument vector, runs
//! one subcommand inside a worker pool of the requested size and writes the
//! result to stdout or to `--out` with a sibling `<out>.manifest.json`.

use clap::{Parser, Subcommand};
use freiheit::abstract_diagrams::{
    abstract_census, bound_terms, classify, count_inequalities, distinguished_vertices, elementary_segments,
    enumerate_fillings, filling_bound, filling_bound_exact, parse_abstract_json, relator_lengths,
};
use freiheit::density::{intersection_csv, intersection_experiment, parse_relators, sample_relators, DensityModel, ModelKind};
use freiheit::diagrams::{
    boundary_word, bounded_triviality, certify_bilipschitz, enumerate_reduced_disk_diagrams, TrivialityBudget,
};
use freiheit::experiments::{
    collapse_frequency, collapse_probability, critical_density, expected_witnesses, fillability_bound,
    fillability_crossover, sweep_csv, transition_sweep, validate_config, CollapseMatch,
};
use freiheit::seed::{density_key, rng_for};
use freiheit::stallings::{
    betti, enumerate_reduced_graphs, fold, fold_based, graph_stats, parse_graph, readable_word_list, readable_words,
};
use freiheit::words::{count_b, count_cyclically_reduced, count_reduced_exact, cyclic_reduce, enumerate_cyclically_reduced, free_reduce, parse_word, CrCounts};
use freiheit::{Alphabet, Error};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FEASIBILITY: i32 = 3;

/// Word enumeration refuses more than this many candidates by default.
const ENUMERATION_LIMIT: f64 = 1e7;

#[derive(Parser, Debug)]
#[command(name = "freiheit", version, about = "Random groups in the density model")]
pub struct Cli {
    /// Master seed; every random stream is split from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the result here plus <out>.manifest.json instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduced and cyclically reduced words.
    #[command(subcommand)]
    Words(WordsCmd),
    /// Random subsets at density d.
    #[command(subcommand)]
    Density(DensityCmd),
    /// Labelled graphs and folding.
    #[command(subcommand)]
    Stallings(StallingsCmd),
    /// Van Kampen diagrams over a relator file.
    #[command(subcommand)]
    Diagrams(DiagramsCmd),
    /// Abstract (distortion) diagrams.
    #[command(subcommand)]
    Abstract(AbstractCmd),
    /// Phase-transition experiments.
    #[command(subcommand)]
    Experiments(ExperimentsCmd),
    /// Re-run the command recorded in a manifest and compare digests.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum WordsCmd {
    /// All cyclically reduced words of length 1..=maxlen in shortlex order.
    Enumerate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        maxlen: usize,
        #[arg(long, default_value_t = ENUMERATION_LIMIT)]
        limit: f64,
    },
    /// Uniform draws from the cyclically reduced words of length ≤ maxlen.
    Sample {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        maxlen: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Free (or cyclic) reduction of a word.
    Reduce {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        word: String,
        #[arg(long)]
        cyclic: bool,
    },
    /// Exact counts of reduced and cyclically reduced words of length L.
    Count {
        #[arg(long)]
        m: usize,
        #[arg(long = "L")]
        len: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum DensityCmd {
    /// A random relator set; one word per line after an `m N` header.
    Sample {
        #[arg(long, default_value = "bernoulli")]
        model: String,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        maxlen: usize,
    },
    /// Independent A, B per trial and the density of A ∩ B, as CSV.
    Intersect {
        #[arg(long)]
        da: f64,
        #[arg(long)]
        db: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, num_args = 1.., required = true)]
        maxlen: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "bernoulli")]
        model: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum StallingsCmd {
    /// Fold a graph file until deterministic, then drop hanging trees.
    Fold {
        #[arg(long = "in")]
        input: PathBuf,
        /// Keep the base vertex and the tree hanging off it.
        #[arg(long)]
        based: bool,
    },
    /// Count (or list) reduced words of length L readable on a graph.
    Readable {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "L")]
        len: usize,
        #[arg(long)]
        list: bool,
    },
    /// Reduced graphs up to isomorphism, separated by blank lines.
    Enumerate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        max_edges: usize,
        #[arg(long)]
        max_betti: usize,
    },
    /// Rank, branch vertices and maximal arcs.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum DiagramsCmd {
    /// Reduced disk diagrams with at most K faces, as a JSON array.
    Enumerate {
        #[arg(long)]
        relators: PathBuf,
        #[arg(long = "K")]
        k: usize,
    },
    /// Check |p| ≤ λ/(1+λ)|∂D| for every boundary path readable on the graph.
    Certify {
        #[arg(long)]
        relators: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        lambda: f64,
    },
    /// Bounded search for a proof that a word is trivial.
    Trivial {
        #[arg(long)]
        relators: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum AbstractCmd {
    /// Letter classes, segments and distinguished vertices.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// All fillings by distinct cyclically reduced words with p readable.
    Fillings {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        maxlen: usize,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        list: bool,
    },
    /// The filling bound for a graph with `graph-size` edges.
    Bound {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        graph_size: usize,
    },
    /// The counting inequalities on one diagram.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Census of abstract diagrams with at most K faces of length ≤ maxlen.
    Enumerate {
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        maxlen: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentsCmd {
    /// Collapse, triviality and freeness frequencies over a grid; CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Collapse frequency beside the exact oracle.
    Collapse {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        maxlen: usize,
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value = "leading")]
        mode: String,
    },
    /// Critical density and the fillability bound.
    Bound {
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: f64,
        /// Also evaluate ln of the bound at this length.
        #[arg(long)]
        maxlen: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    pub output: FileDigest,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Core(Error::Feasibility { .. }) => EXIT_FEASIBILITY,
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(s) | CliError::Usage(s) => f.write_str(s),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Input files read by a run, with their digests.
#[derive(Default)]
struct Inputs(Vec<FileDigest>);

impl Inputs {
    fn read(&mut self, p: &Path) -> CliResult<String> {
        let bytes = std::fs::read(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        self.0.push(FileDigest { path: p.display().to_string(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }
}

fn model_kind(s: &str) -> CliResult<ModelKind> {
    match s {
        "bernoulli" => Ok(ModelKind::Bernoulli),
        "count" | "uniform_count" | "uniform-count" => Ok(ModelKind::UniformCount),
        _ => Err(CliError::Usage(format!("unknown model `{s}` (bernoulli or count)"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn words_cmd(c: &WordsCmd, seed: u64) -> CliResult<String> {
    let mut s = String::new();
    match c {
        WordsCmd::Enumerate { m, maxlen, limit } => {
            for w in enumerate_cyclically_reduced(*m, *maxlen, *limit)? {
                s.push_str(&w.to_text());
                s.push('\n');
            }
        }
        WordsCmd::Sample { m, maxlen, count } => {
            let counts = CrCounts::new(*m, *maxlen)?;
            let mut rng = rng_for(seed, &[*maxlen as u64]);
            for _ in 0..*count {
                s.push_str(&counts.sample(&mut rng).to_text());
                s.push('\n');
            }
        }
        WordsCmd::Reduce { m, word, cyclic } => {
            let a = Alphabet::new(*m)?;
            let w = parse_word(word)?;
            let r = if *cyclic { cyclic_reduce(&a, &w)? } else { free_reduce(&a, &w)? };
            s = r.to_text() + "\n";
        }
        WordsCmd::Count { m, len } => {
            Alphabet::new(*m)?;
            s = to_json(&json!({
                "m": m,
                "length": len,
                "reduced": count_reduced_exact(*m, *len).to_string(),
                "cyclically_reduced": count_cyclically_reduced(*m, *len).to_string(),
                "cyclically_reduced_up_to_length": count_b(*m, *len).to_string(),
            }));
        }
    }
    Ok(s)
}

fn density_cmd(c: &DensityCmd, seed: u64) -> CliResult<String> {
    match c {
        DensityCmd::Sample { model, d, m, maxlen } => {
            let model = DensityModel::new(model_kind(model)?, *d, seed)?;
            let mut rng = rng_for(seed, &[*maxlen as u64, density_key(*d), 0]);
            Ok(sample_relators(*m, *maxlen, &model, &mut rng)?.to_text())
        }
        DensityCmd::Intersect { da, db, m, maxlen, trials, model } => {
            let rows = intersection_experiment(*da, *db, *m, maxlen, *trials, model_kind(model)?, seed)?;
            Ok(intersection_csv(&rows))
        }
    }
}

fn stallings_cmd(c: &StallingsCmd, inputs: &mut Inputs) -> CliResult<String> {
    match c {
        StallingsCmd::Fold { input, based } => {
            let g = parse_graph(&inputs.read(input)?)?;
            let f = if *based { fold_based(&g)? } else { fold(&g)? };
            Ok(f.to_text())
        }
        StallingsCmd::Readable { input, len, list } => {
            let g = parse_graph(&inputs.read(input)?)?;
            if *list {
                let mut s = String::new();
                for w in readable_word_list(&g, *len) {
                    s.push_str(&w.to_text());
                    s.push('\n');
                }
                Ok(s)
            } else {
                let rc = readable_words(&g, *len)?;
                Ok(to_json(&json!({
                    "length": len,
                    "edges": g.edge_count(),
                    "words": rc.words.to_string(),
                    "paths": rc.paths.to_string(),
                })))
            }
        }
        StallingsCmd::Enumerate { m, max_edges, max_betti } => {
            let gs = enumerate_reduced_graphs(*m, *max_edges, *max_betti)?;
            Ok(gs.iter().map(|g| g.to_text()).collect::<Vec<_>>().join("\n"))
        }
        StallingsCmd::Stats { input } => {
            let g = parse_graph(&inputs.read(input)?)?;
            let st = graph_stats(&g)?;
            Ok(to_json(&json!({
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "rank": betti(&g)?,
                "reduced": g.is_reduced(),
                "degree3plus": st.degree3plus,
                "maximal_arcs": st.maximal_arcs,
            })))
        }
    }
}

fn diagrams_cmd(c: &DiagramsCmd, inputs: &mut Inputs) -> CliResult<String> {
    match c {
        DiagramsCmd::Enumerate { relators, k } => {
            let rels = parse_relators(&inputs.read(relators)?)?;
            let ds = enumerate_reduced_disk_diagrams(&rels, *k)?;
            let out: Vec<_> = ds
                .iter()
                .map(|d| json!({ "boundary": boundary_word(d).to_text(), "diagram": d.to_json() }))
                .collect();
            Ok(to_json(&out))
        }
        DiagramsCmd::Certify { relators, graph, k, lambda } => {
            let rels = parse_relators(&inputs.read(relators)?)?;
            let g = parse_graph(&inputs.read(graph)?)?;
            Ok(to_json(&certify_bilipschitz(&rels, &g, *k, *lambda)?))
        }
        DiagramsCmd::Trivial { relators, word, max_steps } => {
            let rels = parse_relators(&inputs.read(relators)?)?;
            let w = parse_word(word)?;
            let budget = TrivialityBudget { max_steps: *max_steps, ..TrivialityBudget::for_length(rels.max_len()) };
            Ok(to_json(&bounded_triviality(&rels, &w, budget)))
        }
    }
}

fn abstract_cmd(c: &AbstractCmd, inputs: &mut Inputs) -> CliResult<String> {
    match c {
        AbstractCmd::Classify { input } => {
            let add = parse_abstract_json(&inputs.read(input)?)?;
            let cls = classify(&add)?;
            let mut segments = Vec::new();
            for i in 1..=relator_lengths(&add.base)?.len() {
                segments.extend(elementary_segments(&add, i)?);
            }
            let letters: Vec<_> = cls.classes.iter().map(|(x, c)| json!({ "letter": x.to_string(), "class": c })).collect();
            Ok(to_json(&json!({
                "letters": letters,
                "relators": cls.relators,
                "segments": segments,
                "distinguished_vertices": distinguished_vertices(&add),
            })))
        }
        AbstractCmd::Fillings { input, m, maxlen, graph, list } => {
            let add = parse_abstract_json(&inputs.read(input)?)?;
            let g = parse_graph(&inputs.read(graph)?)?;
            let fs = enumerate_fillings(&add, *m, *maxlen, &g)?;
            let mut v = json!({ "count": fs.len() });
            if *list {
                v["fillings"] = json!(fs.iter().map(|t| t.iter().map(|w| w.to_text()).collect::<Vec<_>>()).collect::<Vec<_>>());
            }
            Ok(to_json(&v))
        }
        AbstractCmd::Bound { input, m, r, graph_size } => {
            let add = parse_abstract_json(&inputs.read(input)?)?;
            let terms = bound_terms(&add)?;
            let ln = filling_bound(&add, *m, *r, *graph_size)?;
            let mut v = json!({ "terms": terms, "ln_bound": ln });
            // The exact rational only when it is a reasonable size to print.
            if ln < 2000.0 {
                let (num, den) = filling_bound_exact(&add, *m, *r, *graph_size)?;
                v["numerator"] = json!(num.to_string());
                v["denominator"] = json!(den.to_string());
            }
            Ok(to_json(&v))
        }
        AbstractCmd::Check { input } => {
            let add = parse_abstract_json(&inputs.read(input)?)?;
            let rep = count_inequalities(&add)?;
            Ok(to_json(&json!({ "holds": rep.holds(), "report": rep })))
        }
        AbstractCmd::Enumerate { k, maxlen } => Ok(to_json(&abstract_census(*k, *maxlen)?)),
    }
}

fn experiments_cmd(c: &ExperimentsCmd, seed: Option<u64>, inputs: &mut Inputs) -> CliResult<(String, u64)> {
    let s = seed.unwrap_or(0);
    match c {
        ExperimentsCmd::Sweep { config } => {
            let text = inputs.read(config)?;
            let mut cfg = validate_config(&text).map_err(|e| CliError::Core(e.into()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let rows = transition_sweep(&cfg)?;
            Ok((sweep_csv(&rows), cfg.seed))
        }
        ExperimentsCmd::Collapse { m, r, maxlen, d, trials, mode } => {
            let mode: CollapseMatch = mode.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
            let freq = collapse_frequency(*m, *r, *maxlen, *d, *trials, s, mode)?;
            let v = json!({
                "m": m, "r": r, "maxlen": maxlen, "d": d, "trials": trials, "seed": s,
                "mode": mode,
                "collapse_freq": freq,
                "oracle_probability": collapse_probability(*m, *r, *maxlen, *d, mode)?,
                "expected_witnesses": expected_witnesses(*m, *r, *maxlen, *d, mode)?,
                "critical": critical_density(*m, *r)?,
            });
            Ok((to_json(&v), s))
        }
        ExperimentsCmd::Bound { k, m, r, d, maxlen } => {
            let mut v = json!({
                "critical": critical_density(*m, *r)?,
                "crossover_length": fillability_crossover(*k, *m, *r, *d)?,
            });
            if let Some(l) = maxlen {
                v["ln_bound"] = json!(fillability_bound(*k, *l, *m, *r, *d)?);
            }
            Ok((to_json(&v), s))
        }
    }
}

fn command_name(c: &Command) -> String {
    let sub = match c {
        Command::Words(w) => match w {
            WordsCmd::Enumerate { .. } => "words enumerate",
            WordsCmd::Sample { .. } => "words sample",
            WordsCmd::Reduce { .. } => "words reduce",
            WordsCmd::Count { .. } => "words count",
        },
        Command::Density(d) => match d {
            DensityCmd::Sample { .. } => "density sample",
            DensityCmd::Intersect { .. } => "density intersect",
        },
        Command::Stallings(s) => match s {
            StallingsCmd::Fold { .. } => "stallings fold",
            StallingsCmd::Readable { .. } => "stallings readable",
            StallingsCmd::Enumerate { .. } => "stallings enumerate",
            StallingsCmd::Stats { .. } => "stallings stats",
        },
        Command::Diagrams(d) => match d {
            DiagramsCmd::Enumerate { .. } => "diagrams enumerate",
            DiagramsCmd::Certify { .. } => "diagrams certify",
            DiagramsCmd::Trivial { .. } => "diagrams trivial",
        },
        Command::Abstract(a) => match a {
            AbstractCmd::Classify { .. } => "abstract classify",
            AbstractCmd::Fillings { .. } => "abstract fillings",
            AbstractCmd::Bound { .. } => "abstract bound",
            AbstractCmd::Check { .. } => "abstract check",
            AbstractCmd::Enumerate { .. } => "abstract enumerate",
        },
        Command::Experiments(e) => match e {
            ExperimentsCmd::Sweep { .. } => "experiments sweep",
            ExperimentsCmd::Collapse { .. } => "experiments collapse",
            ExperimentsCmd::Bound { .. } => "experiments bound",
        },
        Command::Replay { .. } => "replay",
    };
    sub.to_string()
}

/// Runs a parsed command and returns its output text, the seed in effect
/// and the inputs it read.
fn run(cli: &Cli) -> CliResult<(String, u64, Vec<FileDigest>)> {
    let seed = cli.seed.unwrap_or(0);
    let mut inputs = Inputs::default();
    let (text, seed) = match &cli.command {
        Command::Words(c) => (words_cmd(c, seed)?, seed),
        Command::Density(c) => (density_cmd(c, seed)?, seed),
        Command::Stallings(c) => (stallings_cmd(c, &mut inputs)?, seed),
        Command::Diagrams(c) => (diagrams_cmd(c, &mut inputs)?, seed),
        Command::Abstract(c) => (abstract_cmd(c, &mut inputs)?, seed),
        Command::Experiments(c) => experiments_cmd(c, cli.seed, &mut inputs)?,
        Command::Replay { .. } => unreachable!("handled by dispatch"),
    };
    Ok((text, seed, inputs.0))
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Io(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn write_file(p: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn execute(cli: &Cli, argv: &[String]) -> CliResult<()> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest);
    }
    let started = now_ms();
    let (text, seed, inputs) = in_pool(cli.jobs, || run(cli))??;
    match &cli.out {
        None => print!("{text}"),
        Some(out) => {
            write_file(out, text.as_bytes())?;
            let m = RunManifest {
                command: command_name(&cli.command),
                argv: argv.to_vec(),
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                inputs,
                output: FileDigest { path: out.display().to_string(), sha256: sha256_hex(text.as_bytes()) },
                started_unix_ms: started,
                finished_unix_ms: now_ms(),
            };
            write_file(&manifest_path(out), to_json(&m).as_bytes())?;
        }
    }
    Ok(())
}

/// `argv` with the value of `--out` replaced.
fn redirect_out(argv: &[String], to: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(argv.len());
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--out" {
            out.push(a.clone());
            out.push(to.to_string());
            i += 2;
            continue;
        }
        if a.starts_with("--out=") {
            out.push(format!("--out={to}"));
        } else {
            out.push(a.clone());
        }
        i += 1;
    }
    out
}

/// Checks the recorded inputs, re-runs the recorded argv into a scratch
/// file and compares its digest with the recorded output. Paths resolve
/// against the current directory, as in the original run.
fn replay(path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for f in &m.inputs {
        let bytes = std::fs::read(&f.path).map_err(|e| CliError::Io(format!("{}: {e}", f.path)))?;
        if sha256_hex(&bytes) != f.sha256 {
            return Err(CliError::Io(format!("input {} changed since the recorded run", f.path)));
        }
    }
    let scratch = format!("{}.replay", m.output.path);
    let argv = redirect_out(&m.argv, &scratch);
    let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::Usage("a manifest cannot record a replay".into()));
    }
    let res = execute(&cli, &argv);
    let produced = std::fs::read(&scratch);
    let _ = std::fs::remove_file(&scratch);
    let _ = std::fs::remove_file(manifest_path(Path::new(&scratch)));
    res?;
    let digest = sha256_hex(&produced.map_err(|e| CliError::Io(format!("{scratch}: {e}")))?);
    if digest != m.output.sha256 {
        return Err(CliError::Io(format!("replay of {} differs: {} vs recorded {}", m.output.path, digest, m.output.sha256)));
    }
    println!("reproduced {} sha256 {}", m.output.path, digest);
    Ok(())
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit code.
pub fn dispatch(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli, argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
