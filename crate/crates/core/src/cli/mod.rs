//! The `wsticky` command line: argument parsing and the batch commands.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::Analysis;
use crate::chase::{
    answer_over_ground, answers, ground_ws, resumptions_for, run_oracle_chase, GroundingConfig,
};
use crate::model::{ConjunctiveQuery, Program, Term};
use crate::rewrite::{
    emit_sql, hybrid_answer, rewrite_sticky, RewriteError, SqlSchema, UCQRewriting,
    DEFAULT_MAX_DISJUNCTS,
};
use crate::syntax::{
    load_csv, parse_generated, parse_generated_query, serialize_document, serialize_program,
    CsvBinding,
};
use crate::transform::{partial_grounding, reduce_rank};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "wsticky",
    version,
    about = "Query answering over weakly-sticky existential rule programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class membership, position ranks and marked variables as JSON.
    Classify(RunConfig),
    /// Query-driven grounding of a weakly-sticky program.
    Ground(RunConfig),
    /// Certain answers to the query.
    Answer(RunConfig),
    /// Skolemize existentials at finite-rank positions.
    ReduceRank(RunConfig),
    /// Ground the weak variables of a zero/infinity program.
    PartialGround(RunConfig),
    /// UCQ rewriting of the query over a sticky rule set.
    Rewrite(RunConfig),
    /// The rewriting as one SQL statement.
    EmitSql(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Groundws,
    Hybrid,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Dl,
}

/// `pred=path` or `pred/N=path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvFlag {
    pub predicate: String,
    pub arity: Option<usize>,
    pub path: PathBuf,
}

impl std::str::FromStr for CsvFlag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lhs, path) = s
            .split_once('=')
            .ok_or("expected PRED=PATH or PRED/N=PATH")?;
        let (predicate, arity) = match lhs.split_once('/') {
            Some((p, n)) => (
                p,
                Some(
                    n.parse::<usize>()
                        .map_err(|e| format!("bad arity {n:?}: {e}"))?,
                ),
            ),
            None => (lhs, None),
        };
        if predicate.is_empty() || path.is_empty() {
            return Err("expected PRED=PATH or PRED/N=PATH".into());
        }
        Ok(CsvFlag {
            predicate: predicate.to_string(),
            arity,
            path: PathBuf::from(path),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Program file (`.dl`); may also hold the query.
    pub program: PathBuf,
    /// File holding exactly one query.
    #[arg(long)]
    pub query: Option<PathBuf>,
    /// Extra facts from a CSV file.
    #[arg(long = "csv", value_name = "PRED[/N]=PATH")]
    pub csv: Vec<CsvFlag>,
    /// Resumptions for grounding; defaults to the query's variable count.
    #[arg(long)]
    pub resumptions: Option<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Groundws)]
    pub mode: Mode,
    /// Chase depth bound, required by the oracle mode.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and maps failures to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: &Command) -> Result<(), Error> {
    let (cfg, text) = match command {
        Command::Classify(cfg) => (cfg, cmd_classify(cfg)?),
        Command::Ground(cfg) => (cfg, cmd_ground(cfg)?),
        Command::Answer(cfg) => (cfg, cmd_answer(cfg)?),
        Command::ReduceRank(cfg) => (cfg, cmd_reduce_rank(cfg)?),
        Command::PartialGround(cfg) => (cfg, cmd_partial_ground(cfg)?),
        Command::Rewrite(cfg) => (cfg, cmd_rewrite(cfg)?),
        Command::EmitSql(cfg) => (cfg, cmd_emit_sql(cfg)?),
    };
    write_output(cfg.out.as_deref(), &text)
}

struct Input {
    program: Program,
    query: Option<ConjunctiveQuery>,
}

impl Input {
    fn query(&self) -> Result<&ConjunctiveQuery, Error> {
        self.query.as_ref().ok_or_else(|| {
            Error::Usage("a query is required: pass --query or put one in the program file".into())
        })
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(cfg: &RunConfig) -> Result<Input, Error> {
    if cfg.mode == Mode::Oracle && cfg.depth.is_none() {
        return Err(Error::Usage("--mode oracle requires --depth".into()));
    }
    let label = cfg.program.display().to_string();
    let doc = parse_generated(&read(&cfg.program)?).map_err(|source| Error::Parse {
        path: label,
        source,
    })?;
    let query = match &cfg.query {
        Some(path) => Some(
            parse_generated_query(&read(path)?).map_err(|source| Error::Parse {
                path: path.display().to_string(),
                source,
            })?,
        ),
        None if doc.queries.len() > 1 => {
            return Err(Error::Usage(format!(
                "{} declares {} queries; choose one with --query",
                cfg.program.display(),
                doc.queries.len()
            )))
        }
        None => doc.queries.into_iter().next(),
    };
    let mut program = doc.program;
    if !cfg.csv.is_empty() {
        let schema = program.schema()?;
        let mut database = program.database;
        for flag in &cfg.csv {
            let arity = flag
                .arity
                .or_else(|| schema.arity(&flag.predicate))
                .or_else(|| query.as_ref().and_then(|q| query_arity(q, &flag.predicate)))
                .ok_or_else(|| {
                    Error::Usage(format!(
                        "arity of {} is unknown; write --csv {}/N={}",
                        flag.predicate,
                        flag.predicate,
                        flag.path.display()
                    ))
                })?;
            database.extend(load_csv(&CsvBinding {
                predicate: flag.predicate.clone(),
                arity,
                path: flag.path.clone(),
            })?);
        }
        program = Program::new(program.rules, database)?;
    }
    if let Some(q) = &query {
        program.schema_with_query(q)?;
    }
    Ok(Input { program, query })
}

fn query_arity(q: &ConjunctiveQuery, predicate: &str) -> Option<usize> {
    q.body
        .iter()
        .find(|a| &*a.predicate == predicate)
        .map(|a| a.arity())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn format_or(cfg: &RunConfig, default: Format, allowed: &[Format]) -> Result<Format, Error> {
    let f = cfg.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::Usage(
            format!("--format {f:?} is not available for this command").to_lowercase(),
        ))
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<String, Error> {
    format_or(cfg, Format::Json, &[Format::Json])?;
    let input = load(cfg)?;
    let analysis = Analysis::of_program(&input.program, input.query.as_ref())?;
    let r = analysis.report;
    let names =
        |ps: Vec<crate::model::Position>| ps.iter().map(ToString::to_string).collect::<Vec<_>>();
    let marked: Vec<Value> = analysis
        .marking
        .marked
        .iter()
        .map(|(rule, var)| json!({ "rule": rule + 1, "var": &**var }))
        .collect();
    Ok(pretty(&json!({
        "sticky": r.sticky,
        "weakly_acyclic": r.weakly_acyclic,
        "weakly_sticky": r.weakly_sticky,
        "zero_infinity": r.zero_infinity,
        "pi_f": names(analysis.ranks.finite()),
        "pi_inf": names(analysis.ranks.infinite()),
        "marked": marked,
    })))
}

fn grounding_config(cfg: &RunConfig, query: Option<&ConjunctiveQuery>) -> GroundingConfig {
    GroundingConfig::new(
        cfg.resumptions
            .unwrap_or_else(|| query.map_or(0, resumptions_for)),
    )
}

pub fn cmd_ground(cfg: &RunConfig) -> Result<String, Error> {
    format_or(cfg, Format::Dl, &[Format::Dl])?;
    let input = load(cfg)?;
    let gp = ground_ws(&input.program, &grounding_config(cfg, input.query.as_ref()))?;
    Ok(serialize_program(&gp.to_program()))
}

pub fn cmd_answer(cfg: &RunConfig) -> Result<String, Error> {
    let format = format_or(cfg, Format::Tsv, &[Format::Tsv, Format::Json])?;
    let input = load(cfg)?;
    let q = input.query()?;
    let tuples = match cfg.mode {
        Mode::Groundws => answer_over_ground(
            q,
            &ground_ws(&input.program, &grounding_config(cfg, Some(q)))?,
        ),
        Mode::Hybrid => hybrid_answer(&input.program, q).map_err(|e| match e {
            RewriteError::NotSticky => {
                Error::Internal("hybrid pipeline produced a non-sticky program".into())
            }
            e => e.into(),
        })?,
        Mode::Oracle => {
            let depth = cfg.depth.expect("checked by load");
            let run = run_oracle_chase(&input.program, depth);
            if !run.saturated {
                eprintln!("warning: chase did not saturate within depth {depth}; answers may be incomplete");
            }
            answers(q, &run.instance)
        }
    };
    Ok(render_answers(&tuples, format))
}

fn lexeme(t: &Term) -> String {
    match t {
        Term::Constant(c) => c.to_string(),
        other => other.to_string(),
    }
}

fn render_answers(tuples: &BTreeSet<Vec<Term>>, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<Vec<String>> = tuples
                .iter()
                .map(|t| t.iter().map(lexeme).collect())
                .collect();
            pretty(&json!({ "answers": rows }))
        }
        _ => tuples
            .iter()
            .map(|t| t.iter().map(lexeme).collect::<Vec<_>>().join("\t") + "\n")
            .collect(),
    }
}

pub fn cmd_reduce_rank(cfg: &RunConfig) -> Result<String, Error> {
    format_or(cfg, Format::Dl, &[Format::Dl])?;
    let input = load(cfg)?;
    let placeholder = ConjunctiveQuery::new("q", vec![], vec![])?;
    let (program, query) =
        reduce_rank(&input.program, input.query.as_ref().unwrap_or(&placeholder))?;
    let queries = if input.query.is_some() {
        vec![query]
    } else {
        vec![]
    };
    Ok(serialize_document(&program, &queries))
}

pub fn cmd_partial_ground(cfg: &RunConfig) -> Result<String, Error> {
    format_or(cfg, Format::Dl, &[Format::Dl])?;
    let input = load(cfg)?;
    let program = partial_grounding(&input.program)?;
    Ok(serialize_document(&program, input.query.as_slice()))
}

fn rewriting(input: &Input) -> Result<UCQRewriting, Error> {
    Ok(rewrite_sticky(
        input.query()?,
        &input.program.rules,
        DEFAULT_MAX_DISJUNCTS,
    )?)
}

pub fn cmd_rewrite(cfg: &RunConfig) -> Result<String, Error> {
    format_or(cfg, Format::Dl, &[Format::Dl])?;
    let input = load(cfg)?;
    Ok(rewriting(&input)?.to_string())
}

/// Tables exist for predicates with facts and for predicates no rule
/// derives. Disjuncts over the remaining, purely derived predicates have no
/// table to read and are dropped.
pub fn cmd_emit_sql(cfg: &RunConfig) -> Result<String, Error> {
    if cfg.format.is_some() {
        return Err(Error::Usage(
            "emit-sql always writes SQL; drop --format".into(),
        ));
    }
    let input = load(cfg)?;
    let mut ucq = rewriting(&input)?;
    let schema = input.program.schema_with_query(input.query()?)?;
    let derived: BTreeSet<&Arc<str>> = input
        .program
        .rules
        .iter()
        .map(|r| &r.head.predicate)
        .collect();
    let stored: BTreeSet<&Arc<str>> = input
        .program
        .database
        .iter()
        .map(|a| &a.predicate)
        .collect();
    let tables = schema
        .predicates()
        .filter(|(p, _)| stored.contains(p) || !derived.contains(p));
    let sql_schema = SqlSchema::with_predicates(tables);
    ucq.disjuncts
        .retain(|d| d.body.iter().all(|a| sql_schema.contains(&a.predicate)));
    let mut sql = emit_sql(&ucq, &sql_schema)?;
    sql.push_str(";\n");
    Ok(sql)
}
