#![allow(clippy::needless_range_loop)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use webclass::classify::{full_report, ClassificationReport, Config};
use webclass::corpus::{self, CorpusEntry, TensorDeviation, REGRESSION_TOL};
use webclass::engine::{EngineError, FrameInvariants};
use webclass::expr::Point;
use webclass::webfile::parse_web_file;

mod render;

#[derive(Parser)]
#[command(
    name = "webclass",
    version,
    about = "Invariants and classification of three-webs W(3,2,2)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the web defined in a file
    Classify {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Classify the built-in examples and compare them with their expected rows
    Corpus {
        /// Restrict to these example ids (1-18, group); repeatable
        #[arg(long, value_name = "ID")]
        only: Vec<String>,
        /// Write the selected example files to a directory instead of running them
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print every invariant at one point
    Invariants {
        file: PathBuf,
        #[arg(long, value_name = "X1,X2,Y1,Y2", value_parser = parse_point, allow_hyphen_values = true)]
        at: Point,
        #[arg(long, value_enum, default_value_t = Format::Text, env = "WEBCLASS_FORMAT")]
        format: Format,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 20, env = "WEBCLASS_SAMPLES")]
    samples: usize,
    #[arg(long, default_value_t = 42, env = "WEBCLASS_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 1e-9, env = "WEBCLASS_TOL_ZERO")]
    tol_zero: f64,
    #[arg(long, default_value_t = 1e-6, env = "WEBCLASS_TOL_NONZERO")]
    tol_nonzero: f64,
    /// Half-width of the sampling box
    #[arg(long = "box", default_value_t = 3.0, env = "WEBCLASS_BOX")]
    box_halfwidth: f64,
    #[arg(long, value_enum, default_value_t = Format::Text, env = "WEBCLASS_FORMAT")]
    format: Format,
}

impl RunArgs {
    fn config(&self) -> Config {
        Config {
            samples: self.samples,
            seed: self.seed,
            tol_zero: self.tol_zero,
            tol_nonzero: self.tol_nonzero,
            box_halfwidth: self.box_halfwidth,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let c: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    match c[..] {
        [x1, x2, y1, y2] if c.iter().all(|v| v.is_finite()) => Ok(Point::new(x1, x2, y1, y2)),
        [_, _, _, _] => Err("coordinates must be finite".into()),
        _ => Err(format!("expected four comma-separated coordinates, got {}", c.len())),
    }
}

const EXIT_UNDETERMINED: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify { file, run } => cmd_classify(&file, &run),
        Command::Corpus {
            only,
            export: Some(dir),
            ..
        } => cmd_export(&only, &dir),
        Command::Corpus {
            only,
            export: None,
            run,
        } => cmd_corpus(&only, &run),
        Command::Invariants { file, at, format } => cmd_invariants(&file, at, format),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn load_web(path: &Path) -> Result<webclass::engine::WebDefinition, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file = parse_web_file(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(file.web)
}

fn print_json<T: Serialize>(value: &T) -> Result<(), String> {
    let s = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    println!("{s}");
    Ok(())
}

fn cmd_classify(path: &Path, run: &RunArgs) -> Result<ExitCode, String> {
    let web = load_web(path)?;
    let report = full_report(&web, &run.config()).map_err(|e| e.to_string())?;
    match run.format {
        Format::Text => print!("{}", render::report(&report)),
        Format::Json => print_json(&report)?,
    }
    Ok(if report.has_undetermined() {
        ExitCode::from(EXIT_UNDETERMINED)
    } else {
        ExitCode::SUCCESS
    })
}

fn selected(only: &[String]) -> Result<Vec<CorpusEntry>, String> {
    let ids: Vec<String> = if only.is_empty() {
        corpus::ids().into_iter().map(String::from).collect()
    } else {
        only.to_vec()
    };
    ids.iter()
        .map(|id| corpus::load_example(id).map_err(|e| e.to_string()))
        .collect()
}

fn cmd_export(only: &[String], dir: &Path) -> Result<ExitCode, String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for e in selected(only)? {
        let name = match e.id.parse::<u32>() {
            Ok(n) => format!("ex{n:02}.web"),
            Err(_) => format!("{}.web", e.id),
        };
        let path = dir.join(name);
        fs::write(&path, &e.source).map_err(|err| format!("{}: {err}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// One corpus entry's outcome.
#[derive(Serialize)]
pub struct CorpusRow {
    pub id: String,
    pub row: String,
    pub expected_row: String,
    pub classes_match: bool,
    pub tensors_match: bool,
    pub tensors: Vec<TensorDeviation>,
    pub errata_notes: String,
    pub report: Option<ClassificationReport>,
    pub error: Option<String>,
}

fn corpus_row(e: &CorpusEntry, config: &Config) -> CorpusRow {
    let expected_row = corpus::table_row(&e.id, &e.expected_classes);
    let mut row = CorpusRow {
        id: e.id.clone(),
        row: String::new(),
        expected_row,
        classes_match: false,
        tensors_match: false,
        tensors: Vec::new(),
        errata_notes: e.errata_notes.clone(),
        report: None,
        error: None,
    };
    let report = match full_report(&e.web, config) {
        Ok(r) => r,
        Err(err) => {
            row.error = Some(err.to_string());
            return row;
        }
    };
    match corpus::run_regression_with(e, config) {
        Ok(t) => {
            row.tensors_match = t.iter().all(|d| !d.verified || d.max_deviation <= REGRESSION_TOL);
            row.tensors = t;
        }
        Err(err) => row.error = Some(err.to_string()),
    }
    row.row = corpus::table_row(&e.id, &report.classes);
    row.classes_match = e.classes_match(&report.classes);
    row.report = Some(report);
    row
}

fn cmd_corpus(only: &[String], run: &RunArgs) -> Result<ExitCode, String> {
    let config = run.config();
    config.validate().map_err(|e| e.to_string())?;
    let rows: Vec<CorpusRow> = selected(only)?.iter().map(|e| corpus_row(e, &config)).collect();
    match run.format {
        Format::Text => print!("{}", render::corpus(&rows)),
        Format::Json => print_json(&rows)?,
    }
    let undetermined = rows
        .iter()
        .any(|r| r.report.as_ref().is_some_and(|r| r.has_undetermined()));
    let failed = rows
        .iter()
        .any(|r| r.error.is_some() || !r.classes_match || !r.tensors_match);
    Ok(if rows.iter().any(|r| r.error.is_some()) {
        ExitCode::FAILURE
    } else if undetermined {
        ExitCode::from(EXIT_UNDETERMINED)
    } else if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct InvariantDump<'a> {
    web: &'a str,
    point: Point,
    invariants: &'a FrameInvariants,
}

fn cmd_invariants(path: &Path, at: Point, format: Format) -> Result<ExitCode, String> {
    let web = load_web(path)?;
    let inv = evaluate_at(&web, &at).map_err(|e| e.to_string())?;
    match format {
        Format::Text => print!("{}", render::invariants(web.name(), &inv)),
        Format::Json => print_json(&InvariantDump {
            web: web.name(),
            point: at,
            invariants: &inv,
        })?,
    }
    Ok(ExitCode::SUCCESS)
}

fn evaluate_at(web: &webclass::engine::WebDefinition, at: &Point) -> Result<FrameInvariants, EngineError> {
    web.check_domain(at)?;
    web.compiled().eval(at)
}
