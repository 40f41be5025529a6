//! `mathworld` command-line tool.
//!
//! Exit codes: 0 on success, 1 when an input fails validation, 2 on internal
//! or output errors (and for usage errors reported by the argument parser).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use mathworld::convert::{graph_to_lfs, lfs_to_graph};
use mathworld::corpus::{self, AnnotatedMsp};
use mathworld::eval::{evaluate, EvalConfig};
use mathworld::fol::{AxiomSelection, FolDocument};
use mathworld::lf::ParseMode;
use mathworld::metrics::{smatch_with, strong_equivalent, weak_equivalent, Mode, SmatchConfig};
use mathworld::number::{format_rational, to_f64, Rational};
use mathworld::qagen::{build_prompt, sidecar_line, PromptStyle};
use mathworld::reason::{solve_all, solve_reference};

#[derive(Debug, Parser)]
#[command(name = "mathworld", version, about = "World-model graphs for math story problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct SmatchArgs {
    /// Seed for hill-climbing restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest number of container and relation variables searched exhaustively.
    #[arg(long, default_value_t = 8)]
    smatch_exhaustive_limit: usize,
    /// Hill-climbing restarts beyond the limit.
    #[arg(long, alias = "restarts", default_value_t = 4)]
    smatch_restarts: usize,
}

impl SmatchArgs {
    fn config(&self) -> SmatchConfig {
        SmatchConfig {
            exhaustive_limit: self.smatch_exhaustive_limit,
            restarts: self.smatch_restarts,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Style {
    AllAtOnce,
    SentenceBySentence,
    Original,
}

impl From<Style> for PromptStyle {
    fn from(s: Style) -> Self {
        match s {
            Style::AllAtOnce => PromptStyle::AllAtOnce,
            Style::SentenceBySentence => PromptStyle::SentenceBySentence,
            Style::Original => PromptStyle::Original,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a logical-form file (sentences separated by `---` lines) to a graph file.
    Parse {
        input: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Drop malformed predicates and unconvertible forms with a warning instead of failing.
        #[arg(long)]
        lenient: bool,
    },
    /// Solve a graph file for its reference variable.
    Solve {
        graph: PathBuf,
        /// Print every variable the solver can determine.
        #[arg(long)]
        all: bool,
    },
    /// Compare two graph files: equivalence and weak/strong smatch.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        smatch: SmatchArgs,
    },
    /// Export a graph file as first-order logic.
    ToFol {
        graph: PathBuf,
        /// Axiom families to append: all, measure, relations or reasoning.
        #[arg(long, value_parser = parse_axioms)]
        axioms: Option<AxiomSelection>,
    },
    /// Build prompts with synthetic question-answer pairs for a corpus.
    GenQa {
        corpus: PathBuf,
        /// Directory for `<id>.txt` prompts and `sidecar.jsonl`.
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Style::AllAtOnce)]
        style: Style,
        /// Synthetic pairs per problem.
        #[arg(short, long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated ids used as few-shot examples and excluded as targets.
        #[arg(long, value_delimiter = ',')]
        shots: Vec<String>,
    },
    /// Evaluate predicted logical forms against an annotated corpus.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[command(flatten)]
        smatch: SmatchArgs,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Check that every record survives linearization and reconversion.
    RoundtripCheck { corpus: PathBuf },
}

fn parse_axioms(s: &str) -> Result<AxiomSelection, String> {
    AxiomSelection::parse(s)
        .ok_or_else(|| format!("unknown axiom family {s:?}; expected all, measure, relations or reasoning"))
}

/// An error and the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: 2,
            error: e.into(),
        }
    }
}

fn invalid(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

type Outcome = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(invalid)
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<corpus::GraphFile, Failure> {
    corpus::load_graph(path).map_err(invalid)
}

fn load_corpus(path: &Path) -> Result<Vec<AnnotatedMsp>, Failure> {
    corpus::load_corpus(path).map_err(invalid)
}

/// Decimal with at least one fractional digit, e.g. `1.0` or `0.9855`.
fn decimal(v: &Rational) -> String {
    let s = format!("{:.4}", to_f64(v));
    let trimmed = s.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    }
}

fn parse(input: &Path, output: Option<&Path>, lenient: bool) -> Outcome {
    let text = read_text(input)?;
    let mode = if lenient { ParseMode::Recover } else { ParseMode::Strict };
    let (forms, dropped) = corpus::parse_sentence_forms(&text, mode).map_err(invalid)?;
    for (sentence, e) in &dropped {
        log::warn!("sentence {}: dropped malformed predicate: {e}", sentence + 1);
    }
    let conversion = lfs_to_graph(&forms);
    if !conversion.diagnostics.is_empty() {
        let all: Vec<String> = conversion.diagnostics.iter().map(ToString::to_string).collect();
        if !lenient {
            return Err(invalid(anyhow!("conversion failed:\n  {}", all.join("\n  "))));
        }
        for d in all {
            log::warn!("{d}");
        }
    }
    write_out(output, &corpus::graph_to_string(&conversion.model, &conversion.states))
}

fn solve(path: &Path, all: bool) -> Outcome {
    let file = load_graph(path)?;
    if all {
        for (var, value) in solve_all(&file.model) {
            println!("{var} = {}", format_rational(&value));
        }
        return Ok(());
    }
    let answer = solve_reference(&file.model).map_err(invalid)?;
    println!("{}", format_rational(&answer));
    Ok(())
}

fn compare(first: &Path, second: &Path, smatch: &SmatchArgs) -> Outcome {
    let a = load_graph(first)?.model;
    let b = load_graph(second)?.model;
    let verdict = if strong_equivalent(&a, &b) {
        "strong-equivalent"
    } else if weak_equivalent(&a, &b) {
        "weak-equivalent"
    } else {
        "not-equivalent"
    };
    let cfg = smatch.config();
    let weak = smatch_with(&a, &b, Mode::Weak, &cfg);
    let strong = smatch_with(&a, &b, Mode::Strong, &cfg);
    println!("{verdict}, f1={}/{}", decimal(&weak.f1), decimal(&strong.f1));
    Ok(())
}

fn to_fol(path: &Path, axioms: Option<AxiomSelection>) -> Outcome {
    let file = load_graph(path)?;
    print!("{}", FolDocument::new(&file.model, axioms).render());
    Ok(())
}

fn gen_qa(corpus_path: &Path, out: &Path, style: PromptStyle, k: usize, seed: u64, shot_ids: &[String]) -> Outcome {
    let records = load_corpus(corpus_path)?;
    let by_id: BTreeMap<&str, &AnnotatedMsp> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut shots = Vec::with_capacity(shot_ids.len());
    for id in shot_ids {
        let record = by_id
            .get(id.as_str())
            .ok_or_else(|| invalid(anyhow!("unknown shot id {id:?}")))?;
        shots.push((*record).clone());
    }
    let excluded: BTreeSet<&str> = shot_ids.iter().map(String::as_str).collect();
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut sidecar = String::new();
    let mut written = 0;
    for msp in records.iter().filter(|r| !excluded.contains(r.id.as_str())) {
        let prompt = build_prompt(msp, style, k, seed, &shots);
        let path = out.join(format!("{}.txt", msp.id));
        fs::write(&path, &prompt.text).with_context(|| format!("cannot write {}", path.display()))?;
        sidecar.push_str(&sidecar_line(msp, style, k, seed, &shots, &prompt));
        sidecar.push('\n');
        written += 1;
    }
    let path = out.join("sidecar.jsonl");
    fs::write(&path, sidecar).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {written} prompts to {}", out.display());
    Ok(())
}

fn eval(gold: &Path, pred: &Path, smatch: &SmatchArgs, format: Format, workers: usize) -> Outcome {
    let records = load_corpus(gold)?;
    let predictions = corpus::load_predictions(pred).map_err(invalid)?;
    for w in &predictions.warnings {
        log::warn!(
            "{}: sentence {}: dropped malformed predicate: {}",
            w.id,
            w.sentence + 1,
            w.error
        );
    }
    let config = EvalConfig {
        smatch: smatch.config(),
        workers,
    };
    let report = evaluate(&records, &predictions.forms, &config).map_err(|e| match e {
        mathworld::eval::EvalError::UnknownPrediction(_) => invalid(e),
        other => other.into(),
    })?;
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => print!("{}", report.to_json_string()),
        Format::Both => print!("{}\n{}", report.to_table(), report.to_json_string()),
    }
    Ok(())
}

fn roundtrip_check(path: &Path) -> Outcome {
    let records = load_corpus(path)?;
    let mut failed = Vec::new();
    for r in &records {
        let verdict = match graph_to_lfs(&r.graph, &r.states) {
            Err(e) => format!("error: {e}"),
            Ok(forms) => {
                let back = lfs_to_graph(&forms).model;
                if strong_equivalent(&r.graph, &back) {
                    "strong".to_string()
                } else if weak_equivalent(&r.graph, &back) {
                    "weak".to_string()
                } else {
                    "not-equivalent".to_string()
                }
            }
        };
        if verdict != "strong" && verdict != "weak" {
            failed.push(r.id.clone());
        }
        println!("{}\t{verdict}", r.id);
    }
    if !failed.is_empty() {
        return Err(invalid(anyhow!("round trip failed for: {}", failed.join(", "))));
    }
    Ok(())
}

/// The error chain, skipping causes already spelled out by their parent.
fn render(error: &anyhow::Error) -> String {
    let mut out = error.to_string();
    for cause in error.chain().skip(1) {
        let text = cause.to_string();
        if !out.contains(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
    }
    out
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Parse { input, output, lenient } => parse(&input, output.as_deref(), lenient),
        Command::Solve { graph, all } => solve(&graph, all),
        Command::Compare { first, second, smatch } => compare(&first, &second, &smatch),
        Command::ToFol { graph, axioms } => to_fol(&graph, axioms),
        Command::GenQa {
            corpus,
            out,
            style,
            k,
            seed,
            shots,
        } => gen_qa(&corpus, &out, style.into(), k, seed, &shots),
        Command::Eval {
            gold,
            pred,
            smatch,
            format,
            workers,
        } => eval(&gold, &pred, &smatch, format, workers),
        Command::RoundtripCheck { corpus } => roundtrip_check(&corpus),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {}", render(&error));
            ExitCode::from(code)
        }
    }
}
