//! Batch front end: every run echoes its configuration into a versioned
//! JSON report so that rerunning it reproduces the same bytes.

pub mod args;
pub mod commands;
pub mod render;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

use args::{Cli, Command};

pub const SCHEMA_VERSION: u32 = 1;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ifs_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

/// A finished run: the report, extra artifacts and whether the result was positive.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub files: Vec<(String, String)>,
    pub svg: Option<String>,
    pub positive: bool,
}

impl Outcome {
    pub fn new(command: &str, config: Value, result: Value, positive: bool) -> Self {
        let report = json!({
            "schema": SCHEMA_VERSION,
            "command": command,
            "config": config,
            "result": result,
        });
        Outcome {
            report,
            files: Vec::new(),
            svg: None,
            positive,
        }
    }

    pub fn with_file(mut self, name: &str, body: String) -> Self {
        self.files.push((name.to_string(), body));
        self
    }

    pub fn with_svg(mut self, svg: String) -> Self {
        self.svg = Some(svg);
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.positive {
            EXIT_OK
        } else {
            EXIT_NEGATIVE
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Certify(a) => commands::certify(a),
        Command::Wsp(a) => commands::wsp(a),
        Command::Dimension(a) => commands::dimension(a),
        Command::Scan(a) => commands::scan(a),
        Command::Render(a) => commands::render(a),
    }
}

fn command_name(cli: &Cli) -> &'static str {
    match cli.command {
        Command::Certify(_) => "certify",
        Command::Wsp(_) => "wsp",
        Command::Dimension(_) => "dimension",
        Command::Scan(_) => "scan",
        Command::Render(_) => "render",
    }
}

/// Writes the report and artifacts. Without `--out` the report (or the SVG
/// for `render`) goes to `stdout` and the other artifacts are dropped.
pub fn emit(cli: &Cli, outcome: &Outcome, stdout: &mut impl Write) -> Result<(), CliError> {
    let report = serde_json::to_string_pretty(&outcome.report).expect("json") + "\n";
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_file(dir, &format!("{}.json", command_name(cli)), &report)?;
            for (name, body) in &outcome.files {
                write_file(dir, name, body)?;
            }
            if let Some(svg) = &outcome.svg {
                write_file(dir, "render.svg", svg)?;
            }
            stdout.write_all(report.as_bytes())?;
        }
        None => match &outcome.svg {
            Some(svg) => stdout.write_all(svg.as_bytes())?,
            None => stdout.write_all(report.as_bytes())?,
        },
    }
    Ok(())
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), body)?;
    Ok(())
}

/// Runs the parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // Fails only if a pool already exists, which keeps the earlier setting.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = emit(cli, &outcome, &mut std::io::stdout().lock()) {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    outcome.exit_code()
}
