//! `cplds` command-line driver.
//!
//! Exit codes: 0 success, 1 violations found, 2 I/O failure or malformed
//! input, 64 bad flags.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cplds::bench::{adversarial_climb, climb_mix, gen_workload, gnm, gnp, run, RunConfig, WorkloadPlan, CSV_HEADER};
use cplds::graph::{load_edge_list, Edge, LoadedGraph};
use cplds::oracle::{audit_lds, check_bound, check_history, exact_coreness, read_history, write_history, ReadMode};
use cplds::{Cplds, LevelParams};

const EXIT_VIOLATION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "cplds", version, about = "Approximate k-core decomposition with concurrent reads")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse an edge list and report its size.
    Ingest {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Write a synthetic edge list.
    Gen(GenArgs),
    /// Run the benchmark and write a CSV report.
    Bench(BenchArgs),
    /// Print exact coreness values.
    Exact {
        #[arg(long)]
        graph: PathBuf,
        /// Print a `k count` histogram instead of per-vertex values.
        #[arg(long)]
        histogram: bool,
    },
    /// Build in batches and audit the invariants and the bound at every boundary.
    Audit(AuditArgs),
    /// Check a recorded history, or record one and check it.
    Lincheck(LincheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Gnm,
    Gnp,
    Climb,
    Mix,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    n: usize,
    /// Edge count for gnm; background edges for mix.
    #[arg(long, default_value_t = 10_000)]
    m: usize,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    /// Clique size for climb and mix.
    #[arg(long, default_value_t = 64, value_parser = positive)]
    n_core: usize,
    #[arg(long, default_value_t = 4)]
    cliques: usize,
    /// Batch size the mix is aligned to.
    #[arg(long, default_value_t = 10_000, value_parser = positive)]
    batch_size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.2, value_parser = positive_f64)]
    delta: f64,
    #[arg(long, default_value_t = 9.0, value_parser = positive_f64)]
    lambda: f64,
    #[arg(long, default_value_t = 10_000, value_parser = positive)]
    batch_size: usize,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    update_threads: usize,
    /// Append a delete phase replaying the insert batches in reverse.
    #[arg(long)]
    mirror_deletes: bool,
    /// Shuffle the edge stream with the seed before batching.
    #[arg(long)]
    shuffle: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cplds,
    Sync,
    Nonsync,
    All,
}

impl ModeArg {
    fn modes(self) -> Vec<ReadMode> {
        match self {
            Self::Cplds => vec![ReadMode::Cplds],
            Self::Sync => vec![ReadMode::Sync],
            Self::Nonsync => vec![ReadMode::NonSync],
            Self::All => ReadMode::ALL.to_vec(),
        }
    }
}

#[derive(Args, Clone)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = ModeArg::Cplds)]
    mode: ModeArg,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    read_threads: usize,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write one history file per mode into this directory.
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000, value_parser = positive)]
    max_reads: usize,
    #[arg(long, default_value_t = 0)]
    read_interval_ns: u64,
    /// Exact coreness at every j-th batch boundary.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    truth_every: usize,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    /// Overwrite one level after the last batch.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct LincheckArgs {
    /// History file to check.
    #[arg(long, conflicts_with = "graph")]
    history: Option<PathBuf>,
    /// Record a run on this graph and check it.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Cplds)]
    mode: ModeArg,
    #[arg(long, default_value_t = 10_000, value_parser = positive)]
    batch_size: usize,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    update_threads: usize,
    #[arg(long, default_value_t = 4, value_parser = positive)]
    read_threads: usize,
    #[arg(long, default_value_t = 100_000, value_parser = positive)]
    max_reads: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Failure carrying its exit code.
struct Fail(u8, String);

fn input<E: std::fmt::Display>(e: E) -> Fail {
    Fail(EXIT_INPUT, e.to_string())
}

fn usage<E: std::fmt::Display>(e: E) -> Fail {
    Fail(EXIT_USAGE, e.to_string())
}

fn load(path: &Path) -> Result<LoadedGraph, Fail> {
    let f = File::open(path).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    load_edge_list(BufReader::new(f)).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Fail> {
    File::create(path).map(BufWriter::new).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn workload(c: &Common, loaded: &LoadedGraph) -> Result<Vec<cplds::EdgeBatch>, Fail> {
    let plan = WorkloadPlan {
        batch_size: c.batch_size,
        mirror_deletes: c.mirror_deletes,
        shuffle_seed: c.shuffle.then_some(c.seed),
    };
    gen_workload(&loaded.stream, &plan).map_err(input)
}

fn write_edges(path: &Path, edges: &[Edge]) -> Result<(), Fail> {
    let mut w = create(path)?;
    for (u, v) in edges {
        writeln!(w, "{u} {v}").map_err(input)?;
    }
    w.flush().map_err(input)
}

fn cmd_ingest(path: &Path) -> Result<u8, Fail> {
    let g = load(path)?;
    println!(
        "vertices {}\nedges {}\nself_loops {}\nduplicates {}",
        g.graph.num_vertices(),
        g.stream.len(),
        g.self_loops,
        g.duplicates
    );
    Ok(0)
}

fn cmd_gen(a: &GenArgs) -> Result<u8, Fail> {
    let edges = match a.kind {
        GenKind::Gnm => gnm(a.n, a.m, a.seed),
        GenKind::Gnp => gnp(a.n, a.p, a.seed),
        GenKind::Climb => adversarial_climb(a.n_core, 1, a.seed),
        GenKind::Mix => climb_mix(a.n, a.m, a.n_core, a.cliques, a.batch_size, a.seed),
    }
    .map_err(usage)?;
    write_edges(&a.output, &edges)?;
    eprintln!("wrote {} edges to {}", edges.len(), a.output.display());
    Ok(0)
}

fn cmd_bench(a: &BenchArgs) -> Result<u8, Fail> {
    let loaded = load(&a.common.graph)?;
    let batches = workload(&a.common, &loaded)?;
    let n = loaded.graph.num_vertices();
    let mut rows = vec![CSV_HEADER.to_string()];
    if let Some(dir) = &a.record {
        std::fs::create_dir_all(dir).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", dir.display())))?;
    }
    for mode in a.mode.modes() {
        let cfg = RunConfig {
            mode,
            batch_size: a.common.batch_size,
            update_workers: a.common.update_threads,
            reader_threads: a.read_threads,
            delta: a.common.delta,
            lambda: a.common.lambda,
            seed: a.common.seed,
            record: a.record.is_some(),
            read_interval_ns: a.read_interval_ns,
            max_reads_per_reader: a.max_reads,
            truth_every: a.truth_every,
        };
        let out = run(&cfg, n, &batches).map_err(usage)?;
        rows.push(out.report.csv_row());
        if let Some(dir) = &a.record {
            let path = dir.join(format!("{mode}.history"));
            let w = create(&path)?;
            write_history(w, &out.batches, &out.reads).map_err(input)?;
        }
    }
    let text = rows.join("\n") + "\n";
    match &a.output {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(input)?;
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(input)?,
    }
    Ok(0)
}

fn cmd_exact(path: &Path, histogram: bool) -> Result<u8, Fail> {
    let g = load(path)?;
    let mut graph = g.graph;
    let (b, _) = graph.normalize_batch(&cplds::EdgeBatch::insert(g.stream));
    graph.apply_batch(&b).map_err(input)?;
    let k = exact_coreness(&graph);
    let mut out = BufWriter::new(io::stdout().lock());
    if histogram {
        let mut counts = std::collections::BTreeMap::new();
        for &x in &k {
            *counts.entry(x).or_insert(0usize) += 1;
        }
        for (x, c) in counts {
            writeln!(out, "{x} {c}").map_err(input)?;
        }
        eprintln!("max k {}", k.iter().max().copied().unwrap_or(0));
    } else {
        let line: Vec<String> = k.iter().map(u32::to_string).collect();
        writeln!(out, "{}", line.join(" ")).map_err(input)?;
    }
    out.flush().map_err(input)?;
    Ok(0)
}

fn cmd_audit(a: &AuditArgs) -> Result<u8, Fail> {
    let c = &a.common;
    let loaded = load(&c.graph)?;
    let batches = workload(c, &loaded)?;
    let params = LevelParams::new(loaded.graph.num_vertices(), c.delta, c.lambda).map_err(usage)?;
    let factor = params.theoretical_factor();
    println!("bound threshold {factor:.4}");
    let mut s = Cplds::new(params, c.update_threads, false).map_err(usage)?;
    let (mut violations, mut over) = (0usize, 0usize);
    let mut worst: f64 = 1.0;
    let last = batches.len() - 1;
    for (i, b) in batches.iter().enumerate() {
        s.apply(b).map_err(input)?;
        if i == last && a.inject_fault {
            let top = s.params().num_levels() - 1;
            let v = (0..s.graph().num_vertices() as u32).min_by_key(|&v| s.graph().degree(v)).unwrap_or(0);
            s.set_level(v, top);
        }
        for v in audit_lds(s.graph(), s.state()) {
            if violations < 10 {
                println!("batch {}: {v}", i + 1);
            }
            violations += 1;
        }
        let r = check_bound(&s.estimates(), &exact_coreness(s.graph()), factor);
        worst = worst.max(r.max_ratio);
        for (v, x) in r.offenders.iter().take(10usize.saturating_sub(over)) {
            println!("batch {}: vertex {v} ratio {x:.4} exceeds the bound", i + 1);
        }
        over += r.offenders.len();
    }
    println!("batches {}\ninvariant violations {violations}\nbound offenders {over}\nmax ratio {worst:.4}", batches.len());
    Ok(if violations == 0 && over == 0 { 0 } else { EXIT_VIOLATION })
}

fn cmd_lincheck(a: &LincheckArgs) -> Result<u8, Fail> {
    let histories = match (&a.history, &a.graph) {
        (Some(p), _) => {
            let f = File::open(p).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", p.display())))?;
            vec![(p.display().to_string(), read_history(BufReader::new(f)).map_err(input)?)]
        }
        (None, Some(g)) => {
            let loaded = load(g)?;
            let common = Common {
                graph: g.clone(),
                delta: 0.2,
                lambda: 9.0,
                batch_size: a.batch_size,
                update_threads: a.update_threads,
                mirror_deletes: false,
                shuffle: false,
                seed: a.seed,
            };
            let batches = workload(&common, &loaded)?;
            let mut out = Vec::new();
            for mode in a.mode.modes() {
                let cfg = RunConfig {
                    mode,
                    batch_size: a.batch_size,
                    update_workers: a.update_threads,
                    reader_threads: a.read_threads,
                    seed: a.seed,
                    record: true,
                    max_reads_per_reader: a.max_reads,
                    ..Default::default()
                };
                let r = run(&cfg, loaded.graph.num_vertices(), &batches).map_err(usage)?;
                out.push((mode.to_string(), (r.batches, r.reads)));
            }
            out
        }
        (None, None) => return Err(usage("one of --history or --graph is required")),
    };
    let mut code = 0;
    for (name, (batches, reads)) in histories {
        let v = check_history(&batches, &reads).map_err(input)?;
        let boundary = v.iter().filter(|x| x.is_boundary()).count();
        println!(
            "{name}: {} batches, {} reads, {boundary} boundary violations, {} inversions",
            batches.len(),
            reads.len(),
            v.len() - boundary
        );
        for x in v.iter().take(5) {
            println!("  {x}");
        }
        if !v.is_empty() {
            code = EXIT_VIOLATION;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let res = match &cli.cmd {
        Cmd::Ingest { graph } => cmd_ingest(graph),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Exact { graph, histogram } => cmd_exact(graph, *histogram),
        Cmd::Audit(a) => cmd_audit(a),
        Cmd::Lincheck(a) => cmd_lincheck(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
