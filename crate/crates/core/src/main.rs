use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use transjudge::corpus::{enumerate_tasks, load_manifest, load_manifest_lenient, split_tasks, validate_corpus, default_targets};
use transjudge::pipeline::{CassetteMode, PhaseSummary, PipelineError, Run, RunConfig};
use transjudge::report::{Format, TableKind};

#[derive(Parser)]
#[command(name = "transjudge", version, about = "Evaluate, classify and repair code translations by running them")]
struct Cli {
    /// More log output (repeatable); RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads, overriding the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load a corpus manifest and summarize it.
    Ingest {
        #[arg(long)]
        manifest: PathBuf,
        /// Report empty programs, missing tests, duplicate test ids and non-UTF-8 code.
        #[arg(long)]
        check: bool,
    },
    /// Prompt every translator for every task.
    Translate {
        #[command(flatten)]
        run: RunArgs,
        /// Record live completions into this cassette.
        #[arg(long, conflicts_with = "replay")]
        record: Option<PathBuf>,
        /// Answer every translator from this cassette, without network.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Retry pairs whose previous attempt got no completion.
        #[arg(long)]
        retry_failed: bool,
    },
    /// Compile and test every extracted translation.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Assign root-cause categories to failed translations.
    Classify {
        #[command(flatten)]
        run: RunArgs,
        /// Manual labels (CSV with header task_id,category); they override heuristics.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Run the corrector chain over failed translations.
    Repair {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated chain such as `rules,backend:NAME`.
        #[arg(long)]
        chain: Option<String>,
        /// Answer backend correctors from this cassette.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Write report tables under <out_dir>/reports.
    Report {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "success,breakdown,category,repair,transitions")]
        tables: String,
        #[arg(long, default_value = "md")]
        format: String,
    },
    /// Write verified (invalid, valid) pairs from repair attempts and manual fixes.
    Export {
        #[command(flatten)]
        run: RunArgs,
        /// Directory laid out as <task_id>/fixed.<ext>.
        #[arg(long)]
        manual_fixes: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split ids (one per line) into train/valid/test.
    Split {
        #[arg(long)]
        ids: PathBuf,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_run(args: &RunArgs, stop: &Arc<AtomicBool>) -> Result<Run, PipelineError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    Ok(Run::from_config(cfg)?.with_stop_flag(stop.clone()))
}

fn print_summary(phase: &str, s: &PhaseSummary) {
    if let Some(n) = &s.notice {
        println!("{phase}: {n}");
    }
    println!("{phase}: {} done, {} skipped, {} failed", s.done, s.skipped, s.failed);
}

fn parse_ratios(s: &str) -> anyhow::Result<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad ratios `{s}`"))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => bail!("expected three comma-separated ratios, got `{s}`"),
    }
}

fn ingest(manifest: &Path, check: bool) -> anyhow::Result<bool> {
    if check {
        let corpus = load_manifest_lenient(manifest)?;
        let report = validate_corpus(&corpus);
        for f in &report.findings {
            println!("{}: {}", f.program_id, f.detail);
        }
        println!(
            "{}: {} programs, {} tests, {} findings",
            corpus.name,
            corpus.programs.len(),
            corpus.test_count(),
            report.findings.len()
        );
        return Ok(report.ok);
    }
    let corpus = load_manifest(manifest)?;
    for (lang, n) in corpus.count_by_language() {
        println!("{lang}: {n} programs");
    }
    let tasks = enumerate_tasks(&corpus, &default_targets())?;
    println!(
        "{}: {} programs, {} tests, {} translation tasks",
        corpus.name,
        corpus.programs.len(),
        corpus.test_count(),
        tasks.len()
    );
    Ok(true)
}

fn run(cli: Cli, stop: &Arc<AtomicBool>) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Ingest { manifest, check } => return ingest(&manifest, check),
        Cmd::Translate {
            run,
            record,
            replay,
            retry_failed,
        } => {
            let mode = match (record, replay) {
                (Some(c), _) => CassetteMode::Record(c),
                (_, Some(c)) => CassetteMode::Replay(c),
                _ => CassetteMode::Live,
            };
            let s = open_run(&run, stop)?.translate(&mode, retry_failed)?;
            print_summary("translate", &s);
        }
        Cmd::Evaluate { run } => print_summary("evaluate", &open_run(&run, stop)?.evaluate()?),
        Cmd::Classify { run, labels } => print_summary("classify", &open_run(&run, stop)?.classify(labels.as_deref())?),
        Cmd::Repair { run, chain, replay } => {
            let chain: Option<Vec<String>> = chain.map(|c| vec![c]);
            print_summary("repair", &open_run(&run, stop)?.repair(chain.as_deref(), replay.as_deref())?);
        }
        Cmd::Report { run, tables, format } => {
            let kinds: Vec<TableKind> = tables
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(str::parse)
                .collect::<Result<_, _>>()?;
            let format: Format = format.parse().map_err(anyhow::Error::msg)?;
            for p in open_run(&run, stop)?.report(&kinds, format)? {
                println!("{}", p.display());
            }
        }
        Cmd::Export { run, manual_fixes, out } => {
            let s = open_run(&run, stop)?.export(manual_fixes.as_deref(), out.as_deref())?;
            for (task, backend, why) in &s.skipped {
                println!("skipped {task} ({backend}): {why}");
            }
            println!("export: {} pairs written", s.written);
        }
        Cmd::Split { ids, ratios, seed, out } => {
            let text = std::fs::read_to_string(&ids).with_context(|| ids.display().to_string())?;
            let list: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
            let split = split_tasks(&list, parse_ratios(&ratios)?, seed)?;
            let json = serde_json::to_string_pretty(&split)? + "\n";
            match out {
                Some(p) => std::fs::write(&p, json).with_context(|| p.display().to_string())?,
                None => print!("{json}"),
            }
            let (a, b, c) = split.sizes();
            eprintln!("split: {a} train, {b} valid, {c} test");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level)))
        .with_writer(std::io::stderr)
        .init();

    let stop = Arc::new(AtomicBool::new(false));
    let flag = stop.clone();
    let installed = ctrlc::set_handler(move || {
        if flag.swap(true, Ordering::SeqCst) {
            std::process::exit(130);
        }
        eprintln!("interrupt: finishing in-flight work (press again to abort)");
    });
    if let Err(e) = installed {
        tracing::warn!("cannot install interrupt handler: {e}");
    }

    match run(cli, &stop) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<PipelineError>() {
                Some(PipelineError::Interrupted) => ExitCode::from(130),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
