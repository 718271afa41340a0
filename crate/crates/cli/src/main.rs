use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use condtest_core::edgelist::to_edgelist;
use condtest_core::metrics::{graph_conductance_bruteforce, BRUTE_FORCE_MAX_N};
use condtest_core::protocols::{AcceptThreshold, RejectThreshold, TesterConfig, WalkMode};
use condtest_harness::sweep::format_table;
use condtest_harness::{
    oracle_battery, run_experiment, run_sweep, summarize, write_jsonl, Axis, CheckStatus, ExperimentSpec,
    GraphSource, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "condtest", version, about = "Distributed conductance testing experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a generated graph as an edge list.
    Generate {
        /// Generator name and parameters, e.g. `barbell 4` or `random-regular:64:3`.
        #[arg(required = true, num_args = 1..)]
        kind: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the tester repeatedly and write one JSON record per run.
    Test(RunArgs),
    /// Run the dense verification battery on one graph.
    Oracle {
        /// Edge-list path or generator spec.
        graph: String,
        #[arg(long, default_value_t = 0)]
        graph_seed: u64,
        /// Walk length.
        #[arg(long = "steps", short = 'l', default_value_t = 4)]
        steps: usize,
        /// Target conductance for the sparse-cut partition.
        #[arg(long, default_value_t = 0.5)]
        phi: f64,
    },
    /// Run the tester over a parameter grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Grid axis `key=v1,v2,...`; `n` fills `{n}` in the graph spec,
        /// other keys name tester fields. Repeatable.
        #[arg(long = "vary", required = true)]
        vary: Vec<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (TOML); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list path or generator spec.
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    graph_seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path (default: spec `out`, then `$CONDTEST_OUT_DIR`, then stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tester: TesterArgs,
}

#[derive(Args)]
struct TesterArgs {
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    bfs_depth: Option<usize>,
    #[arg(long)]
    aggregate_depth: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    walk_count: Option<u64>,
    #[arg(long)]
    sample_scale: Option<f64>,
    #[arg(long)]
    set_cap: Option<usize>,
    /// `paper` or a positive number.
    #[arg(long)]
    reject_threshold: Option<RejectThreshold>,
    /// `auto`, `paper`, `mixing` or `ln:<value>`.
    #[arg(long)]
    accept_threshold: Option<AcceptThreshold>,
    #[arg(long)]
    mode: Option<WalkMode>,
    #[arg(long)]
    congestion_lanes: Option<usize>,
    #[arg(long)]
    declared_n: Option<usize>,
    /// Abort a run at its first over-budget message.
    #[arg(long)]
    strict_congestion: bool,
}

impl TesterArgs {
    fn apply(&self, cfg: &mut TesterConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f.clone() { cfg.$f = v; })*};
        }
        set!(phi, eps, walk_count, sample_scale, reject_threshold, accept_threshold, mode, congestion_lanes);
        macro_rules! set_opt {
            ($($f:ident),*) => {$(if self.$f.is_some() { cfg.$f = self.$f; })*};
        }
        set_opt!(bfs_depth, aggregate_depth, walk_length, set_cap, declared_n);
        if self.strict_congestion {
            cfg.strict = true;
        }
    }
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => {
                let Some(graph) = &self.graph else { bail!("either --config or --graph is required") };
                ExperimentSpec::new(graph.clone(), TesterConfig::default())
            }
        };
        if let Some(g) = &self.graph {
            spec.graph = g.clone();
        }
        if let Some(s) = self.graph_seed {
            spec.graph_seed = s;
        }
        if let Some(r) = self.reps {
            spec.reps = r;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(o) = &self.out {
            spec.out = Some(o.clone());
        }
        self.tester.apply(&mut spec.tester);
        Ok(spec)
    }
}

/// Resolves the report destination; `None` means stdout.
fn report_path(explicit: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name)))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Generate { kind, seed, out } => {
            let spec = kind.join(":");
            let source = GraphSource::parse(&spec)?;
            let g = source.load(seed)?;
            let mut w = open_out(out.as_deref())?;
            w.write_all(to_edgelist(&g).as_bytes())?;
            w.flush()?;
            let mut line = format!("n={} m={}", g.n(), g.m());
            if g.n() >= 2 && g.n() <= BRUTE_FORCE_MAX_N && g.m() > 0 {
                line.push_str(&format!(" conductance={:.6}", graph_conductance_bruteforce(&g)?.value));
            }
            eprintln!("{line}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Test(args) => {
            let spec = args.spec()?;
            let records = run_experiment(&spec)?;
            let path = report_path(spec.out.as_deref(), "test.jsonl");
            write_jsonl(&records, open_out(path.as_deref())?)?;
            let s = summarize(&records);
            eprintln!(
                "runs={} accept_rate={:.3} max_rounds={} max_congestion_bits={} violations={} reasons={:?}",
                s.runs, s.accept_rate, s.max_rounds, s.max_congestion_bits, s.violations, s.reasons
            );
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle { graph, graph_seed, steps, phi } => {
            let g = GraphSource::parse(&graph)?.load(graph_seed)?;
            let results = oracle_battery(&g, steps, phi)?;
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().any(|r| r.status == CheckStatus::Fail);
            Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Cmd::Sweep { run, vary } => {
            let spec = run.spec()?;
            let axes = vary.iter().map(|v| Axis::parse(v)).collect::<Result<Vec<_>, _>>()?;
            let cells = run_sweep(&spec, &axes)?;
            print!("{}", format_table(&cells));
            if let Some(path) = report_path(spec.out.as_deref(), "sweep.jsonl") {
                write_jsonl(&cells, open_out(Some(&path))?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
