//! Command-line front end. `p3` parses with [`Cli`] and hands over to
//! [`execute`]; reports go to stdout, diagnostics to stderr.

mod commands;
mod input;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::Error;
use crate::expr::{Domain, Point};
use crate::DEFAULT_SEED;

pub use input::{spec_from_structure, Input, Source};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "p3", version, about = "Poisson structures in three dimensions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Parameter bindings, `k=v`, comma or space separated
    #[arg(long, global = true, num_args = 1.., value_delimiter = ',', value_parser = parse_binding)]
    pub params: Vec<(String, f64)>,
    /// `lo,hi` for all axes or `lo1,hi1,lo2,hi2,lo3,hi3`
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_domain)]
    pub domain: Option<Domain>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// J12 entry
    #[arg(short = 'u', allow_hyphen_values = true)]
    pub u: Option<String>,
    /// J31 entry
    #[arg(short = 'v', allow_hyphen_values = true)]
    pub v: Option<String>,
    /// J23 entry
    #[arg(short = 'w', allow_hyphen_values = true)]
    pub w: Option<String>,
    /// JSON family spec or structure file
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Catalog id
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the Jacobi identity
    Verify(InputArgs),
    /// Report the zero pattern and family
    Classify(InputArgs),
    /// Build a Casimir and check it
    Casimir(InputArgs),
    /// Build a Darboux chart and verify it
    Darboux {
        #[command(flatten)]
        input: InputArgs,
        /// Write the chart description here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the chart with factor eta for pair structures
        #[arg(long)]
        alternate: bool,
    },
    /// Integrate dx/dt = J grad H
    Integrate(IntegrateArgs),
    /// Combine structures entrywise
    Superpose {
        #[arg(long, value_enum)]
        op: Op,
        /// Exponent for otimes
        #[arg(long, allow_hyphen_values = true)]
        scalar: Option<f64>,
        /// Catalog ids (repeatable)
        #[arg(long)]
        catalog: Vec<String>,
        /// Spec files (repeatable)
        #[arg(long)]
        spec: Vec<PathBuf>,
    },
    /// Browse the built-in catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Hamiltonian; defaults to the catalog reference one
    #[arg(long, allow_hyphen_values = true)]
    pub hamiltonian: Option<String>,
    /// Start point `a,b,c`; defaults to the domain center
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    pub x0: Option<Point>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = crate::dynamics::DEFAULT_STEP)]
    pub step: f64,
    /// Step doubling with tolerance `--tol` (default 1e-10)
    #[arg(long)]
    pub adaptive: bool,
    /// Integrate in Darboux coordinates; the time span is read as tau
    #[arg(long)]
    pub reparam: bool,
    /// Keep every N-th row in CSV output
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Also write the CSV trajectory here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Oplus,
    Otimes,
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { id: String },
    Export,
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected k=v, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

fn parse_point(s: &str) -> Result<Point, String> {
    match parse_numbers(s)?[..] {
        [a, b, c] => Ok([a, b, c]),
        _ => Err("a point takes 3 numbers".into()),
    }
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    let nums = parse_numbers(s)?;
    let d = match nums[..] {
        [lo, hi] => Domain::cube(lo, hi),
        [a, b, c, d, e, f] => Domain::new([a, c, e], [b, d, f]),
        _ => return Err("domain takes 2 or 6 numbers".into()),
    };
    d.map_err(|e| e.to_string())
}

/// What a command produced: exit code, stdout text and optional stderr
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Exit code for an error: malformed input is a usage error, everything
/// else a mathematical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Domain(_)
        | Error::UnknownEntry(_)
        | Error::Invalid(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::DomainMismatch
        | Error::FamilyMismatch(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: C,
    result: R,
}

fn render_text(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(&p, x, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                render_text(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

pub(crate) fn report<C: Serialize, R: Serialize>(
    command: &str,
    format: Format,
    config: C,
    result: R,
) -> Result<String, Error> {
    let env = Envelope { command, config, result };
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&env)? + "\n",
        Format::Text => {
            let mut out = String::new();
            render_text("", &serde_json::to_value(&env)?, &mut out);
            out
        }
        Format::Csv => {
            return Err(Error::Invalid(format!("`{command}` has no CSV output")));
        }
    })
}

pub fn execute(cli: &Cli) -> Outcome {
    match commands::dispatch(cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: exit_code(&e), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// Parse `args` (program name first) and run. Help and version requests
/// exit 0; argument errors exit 2.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}
