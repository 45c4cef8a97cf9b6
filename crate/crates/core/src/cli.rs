//! The `saas-pricing` command line.
//!
//! Exit codes are part of the interface: see [`exit`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::diff;
use crate::evaluator::{parse_timestamp, EvalError, Subscription, Timestamp};
use crate::model::{Amount, Pricing};
use crate::validator::{validate, ValidationReport};
use crate::yaml::{self, ParseError};

pub mod exit {
    pub const OK: i32 = 0;
    /// Validation violations, or a non-empty diff.
    pub const VIOLATIONS: i32 = 1;
    pub const PARSE: i32 = 2;
    /// Bad flags, unreadable files, malformed state.
    pub const USAGE: i32 = 3;
    /// Unknown plan, add-on, feature or limit; exceeded quota.
    pub const EVALUATION: i32 = 4;
}

/// When set, `consume` aborts after writing the new state to its temporary
/// file and before renaming it over the old one.
pub const CRASH_BEFORE_RENAME_ENV: &str = "SAAS_PRICING_CRASH_BEFORE_RENAME";

#[derive(Debug, Parser)]
#[command(
    name = "saas-pricing",
    version,
    about = "Validate, evaluate and diff Yaml4SaaS pricings"
)]
struct Cli {
    /// Output format for human-facing reports. JSON-only commands ignore it.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a pricing document and its validity rules.
    Validate { file: PathBuf },
    /// Show which features a subscription can use and its limits.
    Evaluate {
        file: PathBuf,
        #[arg(long, conflicts_with = "subscription")]
        plan: Option<String>,
        #[arg(long, value_delimiter = ',', conflicts_with = "subscription")]
        addons: Vec<String>,
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        feature: Option<String>,
        /// Evaluate every feature.
        #[arg(long)]
        all: bool,
        /// Evaluation time (RFC 3339). Defaults to the subscription start.
        #[arg(long)]
        at: Option<String>,
        /// Persisted subscription state to evaluate.
        #[arg(long)]
        subscription: Option<PathBuf>,
    },
    /// Write a fresh subscription state file.
    Subscribe {
        file: PathBuf,
        #[arg(long)]
        plan: String,
        #[arg(long, value_delimiter = ',')]
        addons: Vec<String>,
        #[arg(long)]
        at: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Record usage of a limit against a subscription state file.
    Consume {
        file: PathBuf,
        #[arg(long)]
        subscription: PathBuf,
        #[arg(long)]
        limit: String,
        #[arg(long)]
        amount: String,
        #[arg(long)]
        at: String,
    },
    /// List the changes between two pricing versions, one JSON object per line.
    Diff {
        old: PathBuf,
        new: PathBuf,
        /// Keep only changes affecting this subscription of the old pricing.
        #[arg(long)]
        impact: Option<PathBuf>,
    },
    /// Summarize a pricing's catalogs.
    Stats { file: PathBuf },
}

enum Failure {
    Usage(String),
    Parse(PathBuf, Vec<ParseError>),
    Invalid(PathBuf, ValidationReport),
    Eval(String),
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::NonPositiveAmount => Failure::Usage(e.to_string()),
            EvalError::StateMismatch(_) => Failure::Usage(e.to_string()),
            other => Failure::Eval(other.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return exit::OK;
            }
            let _ = write!(err, "{e}");
            return exit::USAGE;
        }
    };
    let result = match cli.command {
        Command::Validate { file } => cmd_validate(&file, cli.format, out),
        Command::Evaluate {
            file,
            plan,
            addons,
            feature,
            all: _,
            at,
            subscription,
        } => cmd_evaluate(
            &file,
            plan,
            &addons,
            feature.as_deref(),
            at.as_deref(),
            subscription.as_deref(),
            out,
        ),
        Command::Subscribe {
            file,
            plan,
            addons,
            at,
            out: state,
        } => cmd_subscribe(&file, &plan, &addons, &at, &state),
        Command::Consume {
            file,
            subscription,
            limit,
            amount,
            at,
        } => cmd_consume(&file, &subscription, &limit, &amount, &at, cli.format, out),
        Command::Diff { old, new, impact } => cmd_diff(&old, &new, impact.as_deref(), out),
        Command::Stats { file } => cmd_stats(&file, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            exit::USAGE
        }
        Err(Failure::Parse(path, errors)) => {
            for e in errors {
                let _ = writeln!(err, "{}:{e}", path.display());
            }
            exit::PARSE
        }
        Err(Failure::Invalid(path, report)) => {
            let _ = writeln!(err, "{}: pricing is not valid", path.display());
            let _ = write_report_text(&report, err);
            exit::VIOLATIONS
        }
        Err(Failure::Eval(message)) => {
            let _ = writeln!(err, "error: {message}");
            exit::EVALUATION
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_pricing(path: &Path) -> Result<Pricing, Failure> {
    yaml::parse(&read(path)?).map_err(|errors| Failure::Parse(path.to_owned(), errors))
}

fn load_valid_pricing(path: &Path) -> Result<Pricing, Failure> {
    let pricing = load_pricing(path)?;
    let report = validate(&pricing);
    if report.valid {
        Ok(pricing)
    } else {
        Err(Failure::Invalid(path.to_owned(), report))
    }
}

fn load_state(path: &Path, pricing: &Pricing) -> Result<Subscription, Failure> {
    let state = Subscription::from_json(&read(path)?)
        .map_err(|e| Failure::Usage(format!("malformed subscription state {}: {e}", path.display())))?;
    state.check_against(pricing).map_err(|e| {
        Failure::Usage(format!(
            "subscription state {} does not fit the pricing: {e}",
            path.display()
        ))
    })?;
    Ok(state)
}

fn timestamp(text: &str) -> Result<Timestamp, Failure> {
    parse_timestamp(text).map_err(Failure::Usage)
}

fn print_json<T: Serialize>(value: &T, out: &mut dyn Write) {
    let text = serde_json::to_string_pretty(value).expect("output types are always serializable");
    let _ = writeln!(out, "{text}");
}

fn write_report_text(report: &ValidationReport, out: &mut dyn Write) -> std::io::Result<()> {
    if report.valid {
        return writeln!(out, "valid");
    }
    for v in &report.violations {
        writeln!(out, "{} [{}]: {}", v.rule, v.subjects.join(", "), v.message)?;
    }
    writeln!(out, "invalid: {} violation(s)", report.violations.len())
}

fn cmd_validate(file: &Path, format: Format, out: &mut dyn Write) -> Outcome {
    let pricing = load_pricing(file)?;
    let report = validate(&pricing);
    match format {
        Format::Json => print_json(&report, out),
        Format::Text => {
            let _ = write_report_text(&report, out);
        }
    }
    Ok(if report.valid { exit::OK } else { exit::VIOLATIONS })
}

fn cmd_evaluate(
    file: &Path,
    plan: Option<String>,
    add_ons: &[String],
    feature: Option<&str>,
    at: Option<&str>,
    state: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let pricing = load_valid_pricing(file)?;
    let at = at.map(timestamp).transpose()?;
    let subscription = match state {
        Some(path) => load_state(path, &pricing)?,
        None => {
            let plan = plan.ok_or_else(|| Failure::Usage("either --plan or --subscription is required".into()))?;
            let start = at.unwrap_or(Timestamp::UNIX_EPOCH);
            Subscription::new(&pricing, &plan, add_ons, start)?
        }
    };
    let now = at.unwrap_or(subscription.start_instant);
    match feature {
        Some(feature) => print_json(&subscription.evaluate_feature(&pricing, feature, now)?, out),
        None => print_json(&subscription.evaluation_context(&pricing, now)?, out),
    }
    Ok(exit::OK)
}

fn cmd_subscribe(file: &Path, plan: &str, add_ons: &[String], at: &str, state: &Path) -> Outcome {
    let pricing = load_valid_pricing(file)?;
    let subscription = Subscription::new(&pricing, plan, add_ons, timestamp(at)?)?;
    write_atomically(state, &subscription.to_json())?;
    Ok(exit::OK)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConsumeReport<'a> {
    limit: &'a str,
    effective: Amount,
    used: Amount,
    remaining: Amount,
}

fn cmd_consume(
    file: &Path,
    state: &Path,
    limit: &str,
    amount: &str,
    at: &str,
    format: Format,
    out: &mut dyn Write,
) -> Outcome {
    let pricing = load_valid_pricing(file)?;
    let subscription = load_state(state, &pricing)?;
    let amount: Amount = amount
        .parse()
        .map_err(|e| Failure::Usage(format!("invalid --amount: {e}")))?;
    let now = timestamp(at)?;
    let updated = subscription.record_usage(&pricing, limit, amount, now)?;
    write_atomically(state, &updated.to_json())?;
    let effective = updated.effective_limit(&pricing, limit)?;
    let used = updated.usage[limit].used;
    let report = ConsumeReport {
        limit,
        effective,
        used,
        remaining: effective.saturating_sub(used),
    };
    match format {
        Format::Json => print_json(&report, out),
        Format::Text => {
            let _ = writeln!(
                out,
                "{limit}: used={used} effective={effective} remaining={}",
                report.remaining
            );
        }
    }
    Ok(exit::OK)
}

/// Replaces `path` by writing a sibling temporary file and renaming it, so
/// readers see either the old or the new contents in full.
fn write_atomically(path: &Path, contents: &str) -> Result<(), Failure> {
    let io_error = |e: std::io::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut temp = tempfile::NamedTempFile::new_in(dir).map_err(io_error)?;
    temp.write_all(contents.as_bytes()).map_err(io_error)?;
    temp.as_file().sync_all().map_err(io_error)?;
    if std::env::var_os(CRASH_BEFORE_RENAME_ENV).is_some() {
        std::process::abort();
    }
    temp.persist(path).map_err(|e| io_error(e.error))?;
    Ok(())
}

fn cmd_diff(old_file: &Path, new_file: &Path, impact: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let old = load_pricing(old_file)?;
    let new = load_pricing(new_file)?;
    let mut changes = diff::diff(&old, &new);
    if let Some(state) = impact {
        let subscription = Subscription::from_json(&read(state)?)
            .map_err(|e| Failure::Usage(format!("malformed subscription state {}: {e}", state.display())))?;
        changes = diff::impact(&changes, &old, &subscription).map_err(|e| Failure::Eval(e.to_string()))?;
    }
    let _ = write!(out, "{}", changes.to_json_lines());
    Ok(if changes.is_empty() { exit::OK } else { exit::VIOLATIONS })
}

fn cmd_stats(file: &Path, out: &mut dyn Write) -> Outcome {
    let pricing = load_pricing(file)?;
    print_json(&pricing.stats(), out);
    Ok(exit::OK)
}
