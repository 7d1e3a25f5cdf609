//! Batch classifier for weighted composition operators on discrete L^2
//! spaces: reads a spec document, runs the pointwise criteria (and, on
//! finite spaces, the brute-force oracle), and emits a deterministic report.
//!
//! Exit status: 0 on success, 1 on input errors, 2 when the report contains
//! findings (a violated audit or an oracle mismatch).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num::rational::BigRational;

use wco::classify::{self, Options};
use wco::error::Error;
use wco::oracle;
use wco::scalar::Scalar;
use wco::space::{validate, ValidatedSystem};

mod examples_gen;
mod report;
mod schema;

use report::{InputInfo, OptionsInfo};
use schema::SpecDocument;

/// Error with its process exit class: 1 for input problems, 2 for internal
/// defects that must never be silent (route mismatches, oracle disagreement).
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }

    pub fn defect(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    pub fn unknown_example(name: &str) -> Self {
        CliError::input(format!(
            "unknown example `{name}` (expected identity, constant-mult, dirichlet, star-tail or two-cycle)"
        ))
    }
}

fn from_core(error: Error) -> CliError {
    match error {
        Error::RecursionDirectMismatch { .. } | Error::OracleMismatch(_) => {
            CliError::defect(error.to_string())
        }
        other => CliError::input(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "wco", version, about = "Classifies weighted composition operators on discrete L2 spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pointwise criteria and structural audits on a spec document.
    Classify {
        /// Path to the spec document (JSON).
        spec: PathBuf,
        /// Highest order checked for isometry/expansivity.
        #[arg(long)]
        max_order: Option<usize>,
        /// Shift range of the completely alternating test.
        #[arg(long)]
        alt_shifts: Option<usize>,
        /// Depth range of the completely alternating test.
        #[arg(long)]
        alt_depth: Option<usize>,
        /// Sign tolerance in float mode.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Test hook: injects a synthetic finding to exercise exit status 2.
        #[arg(long, hide = true)]
        inject_finding: bool,
    },
    /// Run the brute-force matrix oracle and compare it with the criteria.
    Oracle {
        /// Path to the spec document (JSON); finite spaces only.
        spec: PathBuf,
        /// Highest order checked.
        #[arg(long)]
        max_order: Option<usize>,
        /// Random Theta probes per system (seed required when nonzero).
        #[arg(long)]
        trials: Option<usize>,
        /// RNG seed for the Theta probes.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Test hook: injects a synthetic finding to exercise exit status 2.
        #[arg(long, hide = true)]
        inject_finding: bool,
    },
    /// Emit a ready-to-run example spec document.
    Example {
        /// identity | constant-mult | dirichlet | star-tail | two-cycle
        name: String,
        /// Multiplier for constant-mult (rational literal).
        #[arg(long)]
        c: Option<String>,
        /// Atom count for dirichlet.
        #[arg(long)]
        n: Option<usize>,
        /// Tail mass ratio for star-tail (rational literal).
        #[arg(long)]
        rho: Option<String>,
        /// Tail weight coefficient for star-tail (rational literal).
        #[arg(long)]
        beta: Option<String>,
        /// Write the document here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Classify {
            spec,
            max_order,
            alt_shifts,
            alt_depth,
            tolerance,
            format,
            inject_finding,
        } => {
            let raw = read_spec(&spec)?;
            let doc = SpecDocument::from_json(&raw)?;
            let file_opts = doc.options.clone().unwrap_or_default();
            let defaults = Options::default();
            let opts = Options {
                max_order: max_order.or(file_opts.max_order).unwrap_or(defaults.max_order),
                alt_shifts: alt_shifts
                    .or(file_opts.alt_shifts)
                    .unwrap_or(defaults.alt_shifts),
                alt_depth: alt_depth
                    .or(file_opts.alt_depth)
                    .unwrap_or(defaults.alt_depth),
                tolerance: tolerance
                    .or(file_opts.tolerance)
                    .unwrap_or(defaults.tolerance),
            };
            let output = match doc.field.as_str() {
                "rational" => classify_typed::<BigRational>(&doc, &raw, &opts, format, inject_finding)?,
                "float" => classify_typed::<f64>(&doc, &raw, &opts, format, inject_finding)?,
                other => {
                    return Err(CliError::input(format!(
                        "unknown field mode `{other}` (expected `rational` or `float`)"
                    )))
                }
            };
            print!("{}", output.0);
            Ok(if output.1 { 2 } else { 0 })
        }
        Command::Oracle {
            spec,
            max_order,
            trials,
            seed,
            format,
            inject_finding,
        } => {
            let raw = read_spec(&spec)?;
            let doc = SpecDocument::from_json(&raw)?;
            let file_opts = doc.options.clone().unwrap_or_default();
            let max_order = max_order
                .or(file_opts.max_order)
                .unwrap_or(Options::default().max_order);
            let trials = trials.or(file_opts.trials).unwrap_or(0);
            let seed = seed.or(file_opts.seed);
            if trials > 0 && seed.is_none() {
                return Err(CliError::input(
                    "--seed is required when --trials is nonzero (reports must be reproducible)",
                ));
            }
            let seed = seed.unwrap_or(0);
            let output = match doc.field.as_str() {
                "rational" => {
                    oracle_typed::<BigRational>(&doc, &raw, max_order, trials, seed, format, inject_finding)?
                }
                "float" => oracle_typed::<f64>(&doc, &raw, max_order, trials, seed, format, inject_finding)?,
                other => {
                    return Err(CliError::input(format!(
                        "unknown field mode `{other}` (expected `rational` or `float`)"
                    )))
                }
            };
            print!("{}", output.0);
            Ok(if output.1 { 2 } else { 0 })
        }
        Command::Example {
            name,
            c,
            n,
            rho,
            beta,
            output,
        } => {
            let doc = examples_gen::generate(
                &name,
                &examples_gen::ExampleParams { c, n, rho, beta },
            )?;
            let text = doc.to_json();
            match output {
                Some(path) => fs::write(&path, text).map_err(|e| {
                    CliError::input(format!("cannot write {}: {e}", path.display()))
                })?,
                None => print!("{text}"),
            }
            Ok(0)
        }
    }
}

fn read_spec(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn input_info(doc: &SpecDocument, raw: &str) -> InputInfo {
    InputInfo {
        digest: report::digest_of(raw.as_bytes()),
        kind: doc.kind.clone(),
        field: doc.field.clone(),
    }
}

fn classify_typed<K: Scalar>(
    doc: &SpecDocument,
    raw: &str,
    opts: &Options,
    format: Format,
    inject_finding: bool,
) -> Result<(String, bool), CliError> {
    let system = validate(doc.to_system::<K>()?).map_err(from_core)?;
    let classification = classify::expansivity(&system, opts).map_err(from_core)?;
    let audits = classify::audit_two_expansive(&system, &classification, opts).map_err(from_core)?;
    let mut extra = Vec::new();
    if inject_finding {
        extra.push("INJECTED synthetic finding (exit-path test hook)".to_owned());
    }
    let options = OptionsInfo {
        max_order: opts.max_order,
        alt_shifts: opts.alt_shifts,
        alt_depth: opts.alt_depth,
        tolerance: opts.tolerance.render(),
        seed: None,
        trials: None,
    };
    let document =
        report::classify_document(input_info(doc, raw), options, &classification, &audits, extra);
    let rendered = match format {
        Format::Text => document.to_text(),
        Format::Json => document.to_json(),
    };
    Ok((rendered, document.has_findings()))
}

fn oracle_typed<K: Scalar>(
    doc: &SpecDocument,
    raw: &str,
    max_order: usize,
    trials: usize,
    seed: u64,
    format: Format,
    inject_finding: bool,
) -> Result<(String, bool), CliError> {
    let system = validate(doc.to_system::<K>()?).map_err(from_core)?;
    let ValidatedSystem::Finite(finite) = &system else {
        return Err(from_core(Error::RefusesTailSpace));
    };
    let opts = Options {
        max_order,
        ..Options::default()
    };
    let oracle_report = oracle::oracle_verdicts(finite, max_order, trials, seed, opts.tolerance);
    let classification = classify::expansivity(&system, &opts).map_err(from_core)?;
    let failures =
        oracle::agreement_failures(&oracle_report, &classification.verdict_triples());
    let mut extra = Vec::new();
    if inject_finding {
        extra.push("INJECTED synthetic finding (exit-path test hook)".to_owned());
    }
    let document = report::oracle_document(
        input_info(doc, raw),
        max_order,
        &oracle_report,
        failures,
        extra,
    );
    let rendered = match format {
        Format::Text => document.to_text(),
        Format::Json => document.to_json(),
    };
    Ok((rendered, document.has_findings()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_exit_classes() {
        assert_eq!(from_core(Error::RefusesTailSpace).code, 1);
        assert_eq!(from_core(Error::InvalidMass { atom: 0 }).code, 1);
        assert_eq!(
            from_core(Error::RecursionDirectMismatch { order: 1, atom: 0 }).code,
            2
        );
        assert_eq!(from_core(Error::OracleMismatch("x".into())).code, 2);
    }

    #[test]
    fn options_travel_inside_the_document() {
        let doc = SpecDocument::from_json(
            r#"{"kind":"finite","field":"rational","masses":["1"],"phi":[0],"usq":["1"],
                "options":{"max_order":7,"trials":10,"seed":3}}"#,
        )
        .unwrap();
        let file_opts = doc.options.clone().unwrap();
        assert_eq!(file_opts.max_order, Some(7));
        assert_eq!(file_opts.trials, Some(10));
        assert_eq!(file_opts.seed, Some(3));
    }
}
