use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use combmod::builders::{
    build_book_complex, build_extended_speiser, build_keyl_tree, build_lattice, build_sigma,
    build_speiser_from_tree, build_t3_ball, plane_tree_from_word, EmbeddedTree, LatticeKind,
};
use combmod::modulus::{modulus, ChainFamilySpec, SolverOptions};
use combmod::par::with_jobs;
use combmod::pipeline::{
    book_checks, estimate_epsilon, keyl_setup, load_config, run_pipeline, verify_keyl, GrowthTable, KeylOptions,
    LFunction, PipelineConfig, ShelfSchedule,
};
use combmod::type_problem::{ball_truncation, classify_type, exhaustion_profile, TypePolicy};
use combmod::{Error, Exec, Graph, Result};

#[derive(Parser, Debug)]
#[command(name = "combmod", version, about = "Combinatorial modulus, plane-graph builders and growth checks")]
struct Cli {
    /// Worker threads (0 uses every core). Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for output files and the run manifest. Without it the main
    /// report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Build a graph and write it as JSON.
    Build {
        #[command(subcommand)]
        what: BuildCmd,
    },
    /// Modulus of a chain family on a graph file.
    Modulus(ModulusArgs),
    /// Exhaustion profile and type verdict around a vertex.
    TypeProfile(TypeArgs),
    /// Truncated escape moduli of the valence-3 tree.
    EpsilonTable(EpsArgs),
    /// Subtree checks for explicit shell depths.
    VerifyKeyl(KeylArgs),
    /// Odd annuli, ball growth and type evidence on the doubled book.
    BookCheck(BookArgs),
    /// Growth table to escape moduli to step function to subtree report.
    Pipeline(PipelineArgs),
    /// Rerun a manifest and compare output digests.
    Replay(ReplayArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BuildCmd {
    /// Ball of the valence-3 tree around the base vertex.
    T3 {
        #[arg(long)]
        radius: usize,
    },
    /// Growth-controlled subtree with the given shell depths.
    Keyl {
        #[arg(long, value_delimiter = ',', required = true)]
        floors: Vec<u32>,
        #[arg(long)]
        kmax: usize,
    },
    /// Square skeleton over a subtree (`--floors`) or a plane tree (`--word`).
    Sigma {
        #[arg(long, value_delimiter = ',', conflicts_with = "word")]
        floors: Option<Vec<u32>>,
        #[arg(long, requires = "floors")]
        kmax: Option<usize>,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        depth: usize,
    },
    /// Speiser graph of a plane tree given as a parenthesis word.
    Speiser {
        #[arg(long)]
        word: String,
    },
    /// Speiser graph with large faces filled by lattices.
    Extended {
        #[arg(long)]
        word: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Truncated half-plane or half-cylinder lattice.
    Lattice {
        #[arg(long, value_enum)]
        kind: LatticeArg,
        #[arg(long)]
        depth: usize,
        /// Columns of a half-plane piece, or the period of a cylinder.
        #[arg(long)]
        width: usize,
    },
    /// Doubled book with shelves (`zero`, `pow2` or a list of counts).
    Book {
        #[arg(long, default_value = "pow2")]
        shelves: String,
        #[arg(long)]
        height: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
enum LatticeArg {
    HalfPlane,
    HalfCylinder,
}

#[derive(Args, Debug, Serialize)]
struct ModulusArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Source vertex names.
    #[arg(long, value_delimiter = ',', required = true)]
    from: Vec<String>,
    /// Target vertex names.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["frontier", "through"])]
    to: Option<Vec<String>>,
    /// Chains ending on the frontier tag.
    #[arg(long)]
    frontier: bool,
    /// Chains escaping to the frontier through one of these vertices.
    #[arg(long, value_delimiter = ',')]
    through: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct TypeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<usize>,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct EpsArgs {
    #[arg(long)]
    kmax: usize,
    /// Ball radii; defaults to `kmax+2 ..= kmax+5`.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct KeylArgs {
    /// Shell depths `⌊L(ε̂_1)⌋, ⌊L(ε̂_2)⌋, ...`, at least `kmax + 1` of them.
    #[arg(long, value_delimiter = ',', required = true)]
    floors: Vec<u32>,
    #[arg(long)]
    kmax: usize,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<usize>>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct BookArgs {
    #[arg(long, default_value = "pow2")]
    shelves: String,
    #[arg(long)]
    height: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<usize>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct PipelineArgs {
    /// JSON configuration; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Growth table as `r,M` CSV.
    #[arg(long = "M")]
    m: Option<PathBuf>,
    #[arg(long = "C1")]
    c1: Option<f64>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct ReplayArgs {
    manifest: PathBuf,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct Manifest {
    command: String,
    /// Arguments after the program name, without `--jobs` and `--out`.
    args: Vec<String>,
    config: serde_json::Value,
    /// SHA-256 of every input file.
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
    version: String,
    /// SHA-256 of every output file.
    outputs: BTreeMap<String, String>,
}

struct Outputs(Vec<(String, Vec<u8>)>);

impl Outputs {
    fn json<T: Serialize>(name: &str, value: &T) -> Result<(String, Vec<u8>)> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        Ok((name.to_string(), text.into_bytes()))
    }

    fn text(name: &str, text: String) -> (String, Vec<u8>) {
        (name.to_string(), text.into_bytes())
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Graph::from_json(&read(path)?)
}

fn names(g: &Graph, list: &[String]) -> Result<BTreeSet<usize>> {
    list.iter().map(|n| g.require(n)).collect()
}

fn shelves(s: &str) -> Result<ShelfSchedule> {
    s.parse()
}

fn build(cmd: &BuildCmd) -> Result<Graph> {
    Ok(match cmd {
        BuildCmd::T3 { radius } => build_t3_ball(*radius)?.graph,
        BuildCmd::Keyl { floors, kmax } => build_keyl_tree(floors, *kmax)?.graph,
        BuildCmd::Sigma {
            floors,
            kmax,
            word,
            depth,
        } => {
            let tree: EmbeddedTree = match (floors, word) {
                (Some(f), None) => build_keyl_tree(f, kmax.unwrap_or(f.len().saturating_sub(1)))?,
                (None, Some(w)) => plane_tree_from_word(w)?,
                _ => return Err(Error::Input("give either --floors or --word".into())),
            };
            build_sigma(&tree, *depth)?.graph
        }
        BuildCmd::Speiser { word } => {
            let t = plane_tree_from_word(word)?.with_bipartite_labels();
            build_speiser_from_tree(&t)?.graph
        }
        BuildCmd::Extended { word, n, depth } => {
            let t = plane_tree_from_word(word)?.with_bipartite_labels();
            let gamma = build_speiser_from_tree(&t)?;
            build_extended_speiser(&gamma, *n, *depth)?.graph
        }
        BuildCmd::Lattice { kind, depth, width } => {
            let kind = match kind {
                LatticeArg::HalfPlane => LatticeKind::HalfPlane,
                LatticeArg::HalfCylinder => LatticeKind::HalfCylinder(*width),
            };
            build_lattice(kind, *depth, *width)?
        }
        BuildCmd::Book { shelves: s, height } => {
            let sched = shelves(s)?;
            build_book_complex(&|k| sched.count(k), *height)?.graph
        }
    })
}

fn pipeline_config(a: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => {
            let kmax = a.kmax.ok_or_else(|| Error::Input("pipeline needs --config or --kmax".into()))?;
            PipelineConfig::minimal(Vec::new(), 1.0, kmax)
        }
    };
    if let Some(p) = &a.m {
        cfg.m = GrowthTable::from_csv(&read(p)?)?.points().to_vec();
    }
    if let Some(c) = a.c1 {
        cfg.c1 = c;
    }
    if let Some(k) = a.kmax {
        cfg.kmax = k;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    if a.depth.is_some() {
        cfg.sigma_depth = a.depth;
    }
    if cfg.m.is_empty() {
        return Err(Error::Input("growth table `M` is missing (use --M or --config)".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command. Returns the files it produced, its resolved
/// configuration and its seed.
fn execute(cmd: &Command, exec: Exec) -> Result<(Outputs, serde_json::Value, Option<u64>)> {
    let mut cfg = serde_json::to_value(cmd)?;
    let (files, seed) = match cmd {
        Command::Build { what } => {
            let g = build(what)?;
            (vec![Outputs::text("graph.json", g.to_json() + "\n")], None)
        }
        Command::Modulus(a) => {
            let g = load_graph(&a.graph)?;
            let from = names(&g, &a.from)?;
            let spec = match (&a.to, a.frontier, &a.through) {
                (Some(to), false, None) => ChainFamilySpec::Connect { a: from, b: names(&g, to)? },
                (None, true, None) => ChainFamilySpec::ToFrontier { a: from },
                (None, false, Some(gates)) => ChainFamilySpec::EscapeThrough {
                    a: from,
                    gates: names(&g, gates)?,
                },
                _ => return Err(Error::Input("give exactly one of --to, --frontier, --through".into())),
            };
            let r = modulus(&g, &spec, &SolverOptions::with_tol(a.tol))?;
            (
                vec![Outputs::json("modulus.json", &r.to_json(&g))?, Outputs::text("masses.csv", r.to_csv(&g)?)],
                None,
            )
        }
        Command::TypeProfile(a) => {
            let g = load_graph(&a.graph)?;
            let v = g.require(&a.from)?;
            let builder = |r: usize| ball_truncation(&g, v, r);
            let profile = exhaustion_profile(&builder, &a.from, &a.radii, a.tol, exec)?;
            let verdict = classify_type(&profile, &TypePolicy::default())?;
            let csv = profile.to_csv()?;
            let report = serde_json::json!({ "profile": profile, "verdict": verdict });
            (vec![Outputs::json("profile.json", &report)?, Outputs::text("profile.csv", csv)], None)
        }
        Command::EpsilonTable(a) => {
            let radii = a.radii.clone().unwrap_or_else(|| (a.kmax + 2..=a.kmax + 5).collect());
            let t = estimate_epsilon(a.kmax, &radii, a.tol, exec)?;
            (vec![Outputs::json("epsilon.json", &t)?, Outputs::text("epsilon.csv", t.to_csv()?)], None)
        }
        Command::VerifyKeyl(a) => {
            let radii = a.radii.clone().unwrap_or_else(|| (a.kmax + 2..=a.kmax + 5).collect());
            let eps = estimate_epsilon(a.kmax, &radii, a.tol, exec)?;
            if a.floors.len() < a.kmax + 1 {
                return Err(Error::Input(format!("need {} floors", a.kmax + 1)));
            }
            let e: Vec<f64> = (1..=a.kmax + 1).map(|k| eps.estimate(k).expect("row")).collect();
            let l = LFunction::from_floors(&e, &a.floors[..=a.kmax])?;
            let setup = keyl_setup(&a.floors, a.kmax, a.depth)?;
            let opts = KeylOptions {
                tol: a.tol,
                samples: a.samples,
                seed: a.seed,
                ..KeylOptions::default()
            };
            let r = verify_keyl(&setup, &l, &eps, &opts, exec)?;
            (vec![Outputs::json("keyl.json", &r)?, Outputs::text("keyl.csv", r.to_csv()?)], Some(a.seed))
        }
        Command::BookCheck(a) => {
            let r = book_checks(&shelves(&a.shelves)?, a.height, &a.radii, a.tol, exec)?;
            (
                vec![
                    Outputs::json("book.json", &r)?,
                    Outputs::text("book_counts.csv", r.counts_csv()?),
                    Outputs::text("book_profile.csv", r.profile.to_csv()?),
                ],
                None,
            )
        }
        Command::Pipeline(a) => {
            let resolved = pipeline_config(a)?;
            let r = run_pipeline(&resolved, exec)?;
            let seed = resolved.seed;
            cfg = serde_json::json!({ "pipeline": resolved });
            (
                vec![
                    Outputs::json("pipeline.json", &r)?,
                    Outputs::text("keyl.csv", r.keyl.to_csv()?),
                    Outputs::text("epsilon.csv", r.epsilon.to_csv()?),
                ],
                Some(seed),
            )
        }
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    };
    Ok((Outputs(files), cfg, seed))
}

fn input_files(cmd: &Command) -> Vec<&Path> {
    match cmd {
        Command::Modulus(a) => vec![a.graph.as_path()],
        Command::TypeProfile(a) => vec![a.graph.as_path()],
        Command::Pipeline(a) => a.config.iter().chain(a.m.iter()).map(PathBuf::as_path).collect(),
        _ => Vec::new(),
    }
}

fn command_name(cmd: &Command) -> String {
    match serde_json::to_value(cmd) {
        Ok(serde_json::Value::Object(m)) => m.keys().next().cloned().unwrap_or_default(),
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

/// Drops the flags that never change results.
fn portable_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--jobs" || a == "--out" {
            it.next();
        } else if !(a.starts_with("--jobs=") || a.starts_with("--out=")) {
            out.push(a.clone());
        }
    }
    out
}

fn write_outputs(dir: &Path, outputs: &Outputs) -> Result<BTreeMap<String, String>> {
    fs::create_dir_all(dir)?;
    let mut digests = BTreeMap::new();
    for (name, bytes) in &outputs.0 {
        fs::write(dir.join(name), bytes)?;
        digests.insert(name.clone(), digest(bytes));
    }
    Ok(digests)
}

fn run(cli: Cli, argv: &[String]) -> Result<()> {
    let exec = Exec::Parallel;
    if let Command::Replay(r) = &cli.command {
        return replay(&r.manifest, cli.out.as_deref(), cli.jobs);
    }
    let mut inputs = BTreeMap::new();
    for p in input_files(&cli.command) {
        inputs.insert(p.display().to_string(), digest(read(p)?.as_bytes()));
    }
    let (outputs, config, seed) = with_jobs(cli.jobs, || execute(&cli.command, exec))?;
    match &cli.out {
        None => {
            let (_, bytes) = &outputs.0[0];
            print!("{}", String::from_utf8_lossy(bytes));
        }
        Some(dir) => {
            let digests = write_outputs(dir, &outputs)?;
            let manifest = Manifest {
                command: command_name(&cli.command),
                args: portable_args(argv),
                config,
                inputs,
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                outputs: digests,
            };
            let (_, bytes) = Outputs::json("manifest.json", &manifest)?;
            fs::write(dir.join("manifest.json"), bytes)?;
        }
    }
    Ok(())
}

fn replay(path: &Path, out: Option<&Path>, jobs: usize) -> Result<()> {
    let manifest: Manifest = serde_json::from_str(&read(path)?)?;
    for (file, want) in &manifest.inputs {
        let got = digest(read(Path::new(file))?.as_bytes());
        if &got != want {
            return Err(Error::Input(format!("input `{file}` changed since the manifest was written")));
        }
    }
    let argv: Vec<String> = std::iter::once("combmod".to_string()).chain(manifest.args.iter().cloned()).collect();
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Input(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::Input("a manifest cannot replay another manifest".into()));
    }
    let (outputs, _, _) = with_jobs(jobs, || execute(&cli.command, Exec::Parallel))?;
    let got: BTreeMap<String, String> = outputs.0.iter().map(|(n, b)| (n.clone(), digest(b))).collect();
    if let Some(dir) = out {
        write_outputs(dir, &outputs)?;
    }
    if got != manifest.outputs {
        let diff: Vec<&String> = manifest
            .outputs
            .keys()
            .chain(got.keys())
            .filter(|k| manifest.outputs.get(*k) != got.get(*k))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        return Err(Error::Verification(format!("replay outputs differ: {diff:?}")));
    }
    println!("replay ok: {} outputs match", got.len());
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
