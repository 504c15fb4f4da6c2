//! `utpada` — guideline validation, snippet bank, and productivity reporting.
//!
//! Exit codes: 0 clean, 1 validation violations, 2 execution error, 3 store
//! error, 64 usage error.

use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use utpada_core::analyzer::{run_validation, SourceTree};
use utpada_core::metrics::{analyze_tree, parse_checkins};
use utpada_core::rsi::{compute_rsi, Scorecard};
use utpada_core::snippetbank::{SnippetBank, SnippetDraft, SnippetId};
use utpada_core::store::{Event, MetricDb, StoreError, ValidationSummary};
use utpada_core::valcase::load_case_set;

const ENV_DB: &str = "UTPADA_DB";
const DEFAULT_DB: &str = "utpada.db";

const EXIT_VIOLATIONS: i32 = 1;
const EXIT_ERROR: i32 = 2;
const EXIT_STORE: i32 = 3;
const EXIT_USAGE: i32 = 64;

#[derive(Parser)]
#[command(
    name = "utpada",
    version,
    about = "New-hire programming productivity toolchain"
)]
struct Cli {
    /// Metric log path (overrides the UTPADA_DB environment variable)
    #[arg(long, global = true)]
    db: Option<PathBuf>,

    /// Output format for reports
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a source tree against a case directory
    Validate {
        /// Source tree root (replaces the decompiled package input)
        #[arg(long)]
        source: PathBuf,
        /// Directory of .vcase files
        #[arg(long)]
        cases: PathBuf,
        /// Snippet bank directory for remediation lookups
        #[arg(long)]
        bank: PathBuf,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Organization id recorded with the run summary
        #[arg(long)]
        org: Option<String>,
    },
    /// Manage the code snippet bank
    Snippet {
        #[command(subcommand)]
        command: SnippetCommand,
    },
    /// Ingest external exports into the metric log
    Ingest {
        #[command(subcommand)]
        command: IngestCommand,
    },
    /// Review scoring
    Review {
        #[command(subcommand)]
        command: ReviewCommand,
    },
    /// Aggregated reports from the metric log
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
    /// Code-quality metrics for a source tree
    Metrics {
        #[arg(long)]
        source: PathBuf,
    },
    /// Copy the metric log with participant/reviewer ids re-keyed
    Mask {
        /// Destination log path (must not exist)
        #[arg(long)]
        out: PathBuf,
        /// Write the id mapping here (keep it out of shared artifacts)
        #[arg(long)]
        map: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SnippetCommand {
    /// Submit a draft snippet (status starts as candidate)
    Add {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        title: String,
        #[arg(long)]
        language: String,
        /// Comma-separated keywords
        #[arg(long)]
        keywords: String,
        /// Comma-separated guideline ids
        #[arg(long, default_value = "")]
        guidelines: String,
        /// Submitter role: developer|ux|qa|reviewer
        #[arg(long, default_value = "developer")]
        role: String,
        /// Read the body from this file (stdin when omitted)
        #[arg(long)]
        body_file: Option<PathBuf>,
    },
    /// Approve or reject a candidate snippet
    Curate {
        #[arg(long)]
        bank: PathBuf,
        id: String,
        #[arg(long)]
        approve: bool,
        #[arg(long)]
        reject: bool,
    },
    /// Keyword search over curated snippets
    Search {
        #[arg(long)]
        bank: PathBuf,
        query: String,
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
    /// Print one snippet
    Show {
        #[arg(long)]
        bank: PathBuf,
        id: String,
    },
}

#[derive(Subcommand)]
enum IngestCommand {
    /// Load a tab-separated check-in export
    Checkins { tsv: PathBuf },
}

#[derive(Subcommand)]
enum ReviewCommand {
    /// Score a reviewer scorecard file and record it
    Score {
        #[arg(long)]
        scorecard: PathBuf,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Cohort-level code-bank usage and quality trends
    Cohort {
        #[arg(long)]
        bank: Option<PathBuf>,
    },
    /// One participant's sprint series and classification
    Participant {
        id: String,
        #[arg(long)]
        bank: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit codes don't match the contract; 64 is usage
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err.downcast_ref::<StoreError>().is_some() {
                EXIT_STORE
            } else {
                EXIT_ERROR
            };
            std::process::exit(code);
        }
    }
}

/// `--db` wins over `UTPADA_DB`; commands that need the log fall back to
/// ./utpada.db. `explicit` reports whether the user pointed at a log at all.
fn db_path(cli_db: &Option<PathBuf>) -> (PathBuf, bool) {
    if let Some(p) = cli_db {
        return (p.clone(), true);
    }
    if let Ok(env) = std::env::var(ENV_DB) {
        if !env.is_empty() {
            return (PathBuf::from(env), true);
        }
    }
    (PathBuf::from(DEFAULT_DB), false)
}

fn open_bank(path: &Path) -> Result<SnippetBank> {
    if path.join("index.tsv").exists() || path.join("archive.log").exists() || has_snip(path) {
        Ok(SnippetBank::open(path)?)
    } else {
        Ok(SnippetBank::create(path)?)
    }
}

fn has_snip(path: &Path) -> bool {
    std::fs::read_dir(path)
        .map(|entries| {
            entries
                .flatten()
                .any(|e| e.path().extension().is_some_and(|x| x == "snip"))
        })
        .unwrap_or(false)
}

fn run(cli: Cli) -> Result<i32> {
    let (db, db_explicit) = db_path(&cli.db);
    let format = cli.format;
    match cli.command {
        Command::Validate {
            source,
            cases,
            bank,
            out,
            org,
        } => cmd_validate(
            &source,
            &cases,
            &bank,
            out.as_deref(),
            org,
            &db,
            db_explicit,
            format,
        ),
        Command::Snippet { command } => cmd_snippet(command, &db, db_explicit),
        Command::Ingest { command } => match command {
            IngestCommand::Checkins { tsv } => cmd_ingest_checkins(&tsv, &db),
        },
        Command::Review { command } => match command {
            ReviewCommand::Score { scorecard } => cmd_review_score(&scorecard, &db, format),
        },
        Command::Report { command } => match command {
            ReportCommand::Cohort { bank } => cmd_report_cohort(bank.as_deref(), &db, format),
            ReportCommand::Participant { id, bank } => {
                cmd_report_participant(&id, bank.as_deref(), &db, format)
            }
        },
        Command::Metrics { source } => cmd_metrics(&source, format),
        Command::Mask { out, map } => cmd_mask(&db, &out, map.as_deref()),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    source: &Path,
    cases_dir: &Path,
    bank_dir: &Path,
    out: Option<&Path>,
    org: Option<String>,
    db: &Path,
    db_explicit: bool,
    format: Format,
) -> Result<i32> {
    let cases = load_case_set(cases_dir)?;
    let tree = SourceTree::load(source)?;
    let bank = SnippetBank::open(bank_dir)?;
    let report = run_validation(&tree, &cases, &bank)?;
    let json = report.to_json();
    match out {
        Some(path) => {
            std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
            if format == Format::Text {
                print_validation_summary(&report);
            }
        }
        None => println!("{json}"),
    }
    if db_explicit {
        let mut log = MetricDb::open(db)?;
        log.append(Event::Validation(ValidationSummary::from_report(
            &report, org,
        )))?;
    }
    Ok(if report.has_violations() {
        EXIT_VIOLATIONS
    } else {
        0
    })
}

fn print_validation_summary(report: &utpada_core::analyzer::ValidationReport) {
    println!(
        "run {}  cases {}  files {}",
        report.run_id, report.totals.cases_run, report.totals.files_scanned
    );
    println!(
        "{:<20} {:>8} {:>10} {:>8} {:>8}",
        "case", "correct", "incorrect", "missing", "n/a"
    );
    for row in &report.cases {
        println!(
            "{:<20} {:>8} {:>10} {:>8} {:>8}",
            row.case_id, row.correct, row.incorrect, row.missing, row.not_applicable
        );
    }
}

fn cmd_snippet(command: SnippetCommand, db: &Path, db_explicit: bool) -> Result<i32> {
    match command {
        SnippetCommand::Add {
            bank,
            title,
            language,
            keywords,
            guidelines,
            role,
            body_file,
        } => {
            let body = match body_file {
                Some(path) => std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?,
                None => {
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .context("reading stdin")?;
                    buf
                }
            };
            let split = |s: &str| -> Vec<String> {
                s.split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(str::to_string)
                    .collect()
            };
            let mut bank = open_bank(&bank)?;
            let snippet = bank.add_snippet(SnippetDraft {
                title,
                language_tag: language,
                keywords: split(&keywords),
                guideline_ids: split(&guidelines),
                body,
                submitted_by_role: role.parse().map_err(|e: String| anyhow!(e))?,
            })?;
            println!("{} candidate", snippet.snippet_id);
            Ok(0)
        }
        SnippetCommand::Curate {
            bank,
            id,
            approve,
            reject,
        } => {
            if approve == reject {
                eprintln!("exactly one of --approve or --reject is required");
                return Ok(EXIT_USAGE);
            }
            let snippet_id: SnippetId = id.parse().map_err(|e: String| anyhow!(e))?;
            let mut bank = SnippetBank::open(&bank)?;
            match bank.curate(snippet_id, approve)? {
                Some(s) => println!("{} curated", s.snippet_id),
                None => println!("{snippet_id} rejected and archived"),
            }
            if db_explicit {
                let mut log = MetricDb::open(db)?;
                log.append(Event::Curation {
                    snippet_id,
                    approved: approve,
                })?;
            }
            Ok(0)
        }
        SnippetCommand::Search { bank, query, limit } => {
            let bank = SnippetBank::open(&bank)?;
            let hits = bank.search(&query, limit)?;
            for hit in &hits {
                let snippet = bank.lookup(hit.snippet_id)?;
                println!("{}\t{}\t{}", hit.snippet_id, hit.score, snippet.title);
            }
            Ok(0)
        }
        SnippetCommand::Show { bank, id } => {
            let snippet_id: SnippetId = id.parse().map_err(|e: String| anyhow!(e))?;
            let bank = SnippetBank::open(&bank)?;
            let snippet = bank.lookup(snippet_id)?;
            println!("id: {}", snippet.snippet_id);
            println!("title: {}", snippet.title);
            println!("language: {}", snippet.language_tag);
            println!("keywords: {}", snippet.keywords.join(","));
            println!("status: {:?}", snippet.status);
            println!();
            println!("{}", snippet.body);
            Ok(0)
        }
    }
}

fn cmd_ingest_checkins(tsv: &Path, db: &Path) -> Result<i32> {
    let records = parse_checkins(tsv)?;
    let mut log = MetricDb::open(db)?;
    let count = records.len();
    for record in records {
        log.append(Event::Contribution(record))?;
    }
    println!(
        "ingested {count} contribution records into {}",
        db.display()
    );
    Ok(0)
}

fn cmd_review_score(scorecard: &Path, db: &Path, format: Format) -> Result<i32> {
    let card = Scorecard::parse_file(scorecard)?;
    let score = compute_rsi(&card);
    let mut log = MetricDb::open(db)?;
    let participant_id = log
        .contribution(&card.contribution_id)
        .map(|r| r.participant_id.clone())
        .ok_or(StoreError::DanglingReference {
            kind: "scorecard",
            contribution_id: card.contribution_id.clone(),
        })?;
    log.append(Event::Scorecard(card.clone()))?;
    log.append(Event::RsiComputed {
        contribution_id: card.contribution_id.clone(),
        participant_id,
        score,
    })?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&score)?),
        Format::Text => println!(
            "{}: review {} + productivity {} = {} -> {:.1}/10 ({})",
            card.contribution_id,
            score.review_points,
            score.productivity_points,
            score.total_100,
            score.value_10,
            if score.pass { "pass" } else { "fail" }
        ),
    }
    Ok(0)
}

fn cmd_report_cohort(bank: Option<&Path>, db: &Path, format: Format) -> Result<i32> {
    let log = MetricDb::open_read_only(db)?;
    let bank = bank.map(SnippetBank::open).transpose()?;
    let report = log.cohort_report(bank.as_ref());
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => {
            println!(
                "contributions {}  bank-backed {}  appropriate {}",
                report.totals.contributions, report.totals.bank_backed, report.totals.appropriate
            );
            println!("reliance rate: {}", fmt_rate(report.reliance_rate));
            println!(
                "correct snippet rate: {}",
                fmt_rate(report.correct_snippet_rate)
            );
            for p in &report.participants {
                let class = p
                    .summary
                    .as_ref()
                    .map(|s| format!("{:?}", s.classification))
                    .unwrap_or_else(|| "-".to_string());
                println!(
                    "  {:<12} contributions {:<4} bank-backed {:<4} {}",
                    p.participant_id, p.contributions, p.bank_backed, class
                );
            }
            for t in &report.quality_trends {
                println!(
                    "  {} {}: fatal {} trivial {}",
                    t.org, t.period, t.fatal_errors, t.trivial_errors
                );
            }
        }
    }
    Ok(0)
}

fn cmd_report_participant(id: &str, bank: Option<&Path>, db: &Path, format: Format) -> Result<i32> {
    let log = MetricDb::open_read_only(db)?;
    let bank = bank.map(SnippetBank::open).transpose()?;
    let report = log.participant_report(id, bank.as_ref())?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
        Format::Text => {
            println!(
                "{}: {} contributions, {} bank-backed, sprints from {}",
                report.participant_id,
                report.contributions,
                report.bank_backed,
                report.sprint_start
            );
            for s in &report.sprints {
                println!(
                    "  sprint {:>2} ({} .. {}): {} scores, mean {:.2}, {} passes",
                    s.sprint, s.start, s.end, s.scores, s.mean_value_10, s.passes
                );
            }
            if let Some(summary) = &report.summary {
                println!(
                    "  mean RSI {:.2}, pass rate {:.2} -> {:?}: {}",
                    summary.mean_rsi,
                    summary.pass_rate,
                    summary.classification,
                    summary.recommendation
                );
            } else {
                println!("  no RSI scores recorded yet");
            }
        }
    }
    Ok(0)
}

fn cmd_metrics(source: &Path, format: Format) -> Result<i32> {
    let tree = SourceTree::load(source)?;
    let quality = analyze_tree(&tree);
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&quality)?),
        Format::Text => {
            for file in &quality.files {
                println!(
                    "{}: depth {}  loc {}  dead spans {}",
                    file.path,
                    file.max_nested_block_depth,
                    file.loc,
                    file.dead_code.len()
                );
                for class in &file.classes {
                    println!(
                        "  {:<20} methods {:<3} wmc {:<3} loc {}",
                        class.class_name, class.methods, class.wmc, class.loc
                    );
                }
            }
            match quality.wacc {
                Some(w) => println!("wacc: {w:.3}"),
                None => println!("wacc: undefined (no class rows)"),
            }
            for e in &quality.errors {
                println!("unavailable: {e}");
            }
        }
    }
    Ok(0)
}

fn cmd_mask(db: &Path, out: &Path, map: Option<&Path>) -> Result<i32> {
    let log = MetricDb::open_read_only(db)?;
    let mapping = log.mask_to(out)?;
    if let Some(map_path) = map {
        let json = serde_json::to_string_pretty(&mapping)?;
        std::fs::write(map_path, json)
            .with_context(|| format!("writing {}", map_path.display()))?;
    }
    println!("masked {} ids into {}", mapping.len(), out.display());
    Ok(0)
}

fn fmt_rate(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{r:.4}"),
        None => "undefined".to_string(),
    }
}
