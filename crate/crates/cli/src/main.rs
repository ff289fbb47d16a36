use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kgdlt::bench::{
    self, emit_tables, BenchConfig, BenchError, MetricsReport, Phase, SynthSpec, TableFormat,
};
use kgdlt::gas::{ContractEffects, GasSchedule};
use kgdlt::query::{write_ntriples, IndexedGraph, TriplePattern};
use kgdlt::rdf::canonical_line;
use kgdlt::strategies::{load_strategy, AnchorMode, StrategyKind};

#[derive(Parser)]
#[command(
    name = "kgdlt",
    version,
    about = "Store, update, query and audit RDF graphs on simulated ledgers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Insert the first graph version into every selected strategy.
    Ingest(Common),
    /// Apply the diff between two graph versions to persisted ledgers.
    Update(Common),
    /// Read every strategy back and check that they agree.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Write the reconstructed graph as N-Triples.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Match a triple pattern against one strategy's graph.
    Query {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "private_batched")]
        strategy: StrategyKind,
        /// Three terms in N-Triples syntax, `?` for a wildcard.
        pattern: String,
    },
    /// Check hybrid anchors against the private ledger.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Emit JSON lines instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Ingest, read back, update, read back, audit, and write tables.
    Bench(Common),
    /// Print the gas schedule and reference costs.
    ShowSchedule(Common),
    /// Write a synthetic graph, and optionally its next version, as N-Triples.
    Generate {
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write an evolved second version here.
        #[arg(long)]
        evolved: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input_v1: Option<PathBuf>,
    #[arg(long)]
    input_v2: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated strategy names.
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<StrategyKind>>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_tx_payload_bytes: Option<u64>,
    #[arg(long)]
    bucket_width: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    anchor_mode: Option<AnchorModeArg>,
    /// Size of the synthetic corpus used without --input-v1.
    #[arg(long)]
    synthetic_triples: Option<usize>,
    /// Do not derive a second version when --input-v2 is absent.
    #[arg(long)]
    no_synthetic_update: bool,
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorModeArg {
    PerBatch,
    PerOperation,
}

impl Common {
    fn resolve(&self) -> Result<BenchConfig> {
        let mut c = match &self.config {
            Some(path) => BenchConfig::from_json_file(path)?,
            None => BenchConfig::default(),
        };
        if let Some(p) = &self.input_v1 {
            c.input_v1 = Some(p.clone());
        }
        if let Some(p) = &self.input_v2 {
            c.input_v2 = Some(p.clone());
        }
        if let Some(p) = &self.output_dir {
            c.output_dir = p.clone();
        }
        if let Some(s) = &self.strategies {
            c.strategies = s.clone();
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.max_tx_payload_bytes {
            c.max_tx_payload_bytes = v;
        }
        if let Some(v) = self.bucket_width {
            c.bucket_width = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(m) = self.anchor_mode {
            c.anchor_mode = match m {
                AnchorModeArg::PerBatch => AnchorMode::PerBatch,
                AnchorModeArg::PerOperation => AnchorMode::PerOperation,
            };
        }
        if let Some(n) = self.synthetic_triples {
            c.synthetic.triples = n;
        }
        if self.no_synthetic_update {
            c.synthetic_update = false;
        }
        if self.parallel {
            c.parallel = true;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Files under `dir`, recursively. Missing directories are empty.
fn list_files(dir: &Path) -> HashSet<PathBuf> {
    let mut out = HashSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(entries) = fs::read_dir(&d) else {
            continue;
        };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p);
            }
        }
    }
    out
}

/// Removes files that appeared under `dir` since `before` was taken, and
/// `dir` itself if it did not exist then.
fn remove_new_outputs(dir: &Path, existed: bool, before: &HashSet<PathBuf>) {
    if !existed {
        let _ = fs::remove_dir_all(dir);
        return;
    }
    for p in list_files(dir).difference(before) {
        let _ = fs::remove_file(p);
    }
}

fn write_report(report: &MetricsReport, config: &BenchConfig) -> Result<()> {
    let tables = config.output_dir.join("tables");
    emit_tables(report, &tables, TableFormat::Csv)?;
    emit_tables(report, &tables, TableFormat::Markdown)?;
    let metrics = config.output_dir.join("metrics.jsonl");
    fs::write(&metrics, report.to_json_lines()).with_context(|| metrics.display().to_string())?;
    Ok(())
}

/// Runs `f`, deleting whatever it wrote under the output directory if it fails.
fn with_cleanup(config: &BenchConfig, f: impl FnOnce() -> Result<()>) -> Result<()> {
    let dir = &config.output_dir;
    let existed = dir.exists();
    let before = list_files(dir);
    let result = f();
    if result.is_err() {
        remove_new_outputs(dir, existed, &before);
    }
    result
}

fn print_summary(report: &MetricsReport) {
    for t in &report.totals {
        let gas = t
            .gas
            .map_or_else(|| "n/a".to_string(), |g| format!("{:.0}", g.total));
        println!(
            "{:?} {:<16} ops={} txs={} anchors={} disk={}B gas={} write={:.1}ms",
            t.phase,
            t.strategy.name(),
            t.ops,
            t.ledger_txs,
            t.anchor_txs,
            t.disk_bytes,
            gas,
            t.write_ms.total
        );
    }
    for r in &report.reads {
        println!(
            "{:?} read {:<16} triples={} {:.3}ms",
            r.phase,
            r.strategy.name(),
            r.triples,
            r.duration_ms
        );
    }
    if let Some(d) = &report.diff {
        println!(
            "diff added={} updated={} deleted={}",
            d.added, d.updated, d.deleted
        );
    }
    if let Some(a) = &report.audit {
        print!("{}", a.to_text());
    }
}

fn show_schedule(config: &BenchConfig) -> Result<()> {
    let s: GasSchedule = config.gas;
    println!("{}", serde_json::to_string_pretty(&s)?);
    let line = |n: usize| vec![b'x'; n];
    println!("direct tx, 78 bytes: {}", s.direct_tx_gas(&line(78)));
    println!("direct tx, 131 bytes: {}", s.direct_tx_gas(&line(131)));
    let effects = ContractEffects {
        new_slots: kgdlt::gas::string_storage_slots(131),
        updated_slots: 0,
        event_topics: kgdlt::strategies::CONTRACT_EVENT_TOPICS,
        event_data_bytes: 131,
    };
    println!(
        "contract insert, 131 bytes: {}",
        s.contract_store_gas(&line(131), effects)
    );
    for n in [182, 184, 185] {
        println!(
            "anchor, {n}-char metadata: {}",
            s.anchor_tx_gas(&"m".repeat(n))
        );
    }
    Ok(())
}

fn generate(triples: usize, seed: u64, out: &Path, evolved: Option<&Path>) -> Result<()> {
    let spec = SynthSpec {
        triples,
        ..Default::default()
    };
    let v1 = bench::generate(&spec, seed);
    let write = |path: &Path, ts: &[kgdlt::rdf::Triple]| -> Result<()> {
        let mut w =
            io::BufWriter::new(fs::File::create(path).with_context(|| path.display().to_string())?);
        for t in ts {
            writeln!(w, "{}", canonical_line(t))?;
        }
        w.flush()?;
        Ok(())
    };
    write(out, &v1)?;
    if let Some(path) = evolved {
        let v2 = bench::evolve(&v1, &bench::EvolveRates::default(), seed.wrapping_add(1));
        write(path, &v2)?;
    }
    Ok(())
}

/// Exit status 1 for correctness findings, 2 for everything else.
struct Findings(String);

fn run(cli: Cli) -> Result<Option<Findings>> {
    match cli.command {
        Command::Ingest(common) => {
            let config = common.resolve()?;
            with_cleanup(&config, || {
                let report = bench::run_ingest(&config)?;
                write_report(&report, &config)?;
                print_summary(&report);
                Ok(())
            })?;
        }
        Command::Update(common) => {
            let config = common.resolve()?;
            let report = bench::run_update(&config)?;
            write_report(&report, &config)?;
            print_summary(&report);
        }
        Command::Reconstruct { common, export } => {
            let config = common.resolve()?;
            let (rows, graph) = bench::run_reconstruct(&config, Phase::Ingest, None)?;
            for r in &rows {
                println!(
                    "{:<16} triples={} {:.3}ms",
                    r.strategy.name(),
                    r.triples,
                    r.duration_ms
                );
            }
            if let Some(path) = export {
                let f = fs::File::create(&path).with_context(|| path.display().to_string())?;
                write_ntriples(&graph, io::BufWriter::new(f))?;
            }
        }
        Command::Query {
            common,
            strategy,
            pattern,
        } => {
            let config = common.resolve()?;
            let pattern: TriplePattern = pattern.parse().context("invalid pattern")?;
            let s = load_strategy(strategy, &config.strategy_config(), &config.ledger_dir())?;
            let graph = s.reconstruct()?;
            let index = IndexedGraph::new(&graph);
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for t in index.match_pattern(&pattern) {
                writeln!(out, "{}", canonical_line(t))?;
            }
        }
        Command::Audit { common, json } => {
            let mut config = common.resolve()?;
            if !config.strategies.contains(&StrategyKind::HybridAnchored) {
                config.strategies.push(StrategyKind::HybridAnchored);
            }
            let report = bench::run_audit(&config)?.expect("hybrid selected");
            if json {
                print!("{}", report.to_json_lines());
            } else {
                print!("{}", report.to_text());
            }
            if !report.is_clean() {
                return Ok(Some(Findings(format!(
                    "{} audit findings",
                    report.finding_count()
                ))));
            }
        }
        Command::Bench(common) => {
            let config = common.resolve()?;
            let mut findings = None;
            with_cleanup(&config, || {
                let report = bench::run_pipeline(&config)?;
                if let Some(a) = report.audit.as_ref().filter(|a| !a.is_clean()) {
                    findings = Some(Findings(format!("{} audit findings", a.finding_count())));
                }
                write_report(&report, &config)?;
                print_summary(&report);
                Ok(())
            })?;
            return Ok(findings);
        }
        Command::ShowSchedule(common) => show_schedule(&common.resolve()?)?,
        Command::Generate {
            triples,
            seed,
            out,
            evolved,
        } => {
            if evolved.as_deref() == Some(out.as_path()) {
                bail!("--out and --evolved must differ");
            }
            generate(triples, seed, &out, evolved.as_deref())?;
        }
    }
    Ok(None)
}

/// A closed stdout (`kgdlt query ... | head`) is not a failure.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Findings(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let gate = e
                .downcast_ref::<BenchError>()
                .is_some_and(BenchError::is_gate_failure);
            ExitCode::from(if gate { 1 } else { 2 })
        }
    }
}
