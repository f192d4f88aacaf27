//! The `pgst` command line.
//!
//! Every command prints one JSON report on stdout. Exit status is 0 on
//! success, 2 when inputs are rejected or a method's hypotheses do not hold,
//! and 1 on internal failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::decider::{
    corollary_family, decide_auto, decide_pgst_general, decide_pgst_parity_r, decide_pgst_parity_s,
    verify_certificate, Answer,
};
use crate::dynamics::{find_transfer_time, scan_max_fidelity, FidelityTrace, SearchOptions, DEFAULT_BUDGET};
use crate::error::Error;
use crate::report::{
    parse_verdict_document, CrossCheck, ErrorBody, ErrorReport, Report, VerdictJson, SCHEMA_VERSION,
};
use crate::spectrum::spectrum;
use crate::state::{eigenvalue_support, eigenvalue_support_numeric, DEFAULT_TOLERANCE};
use crate::statespec::StateSpec;

/// Largest `n` for which `--method auto` re-runs the general decider.
pub const AUTO_CROSS_CHECK_MAX_N: usize = 40;

#[derive(Debug, Parser)]
#[command(name = "pgst", version, about = "Pretty good state transfer on paths")]
pub struct Cli {
    /// Indent JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    General,
    SSets,
    RSets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpectrumFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of P_n.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: SpectrumFormat,
    },
    /// Eigenvalue support of a state.
    Support {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        state: String,
        /// Zero threshold for numeric states.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Decide PGST between a state and its mirror, or re-check a saved verdict.
    Decide {
        #[arg(long, required_unless_present = "check_certificate")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "check_certificate")]
        state: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
        /// Verify the certificate in a saved verdict or decide report.
        #[arg(long, value_name = "FILE", conflicts_with_all = ["n", "state"])]
        check_certificate: Option<PathBuf>,
    },
    /// Write |<mirror|U(t)|v>| over a time grid as CSV.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        state: String,
        /// Target state; defaults to the mirror image.
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for a time with overlap at least 1 - epsilon.
    SearchTime {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        state: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Largest overlap with the mirror image over a time grid.
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        state: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        step: f64,
    },
    /// Two-vertex states |a> + alpha|b> predicted to transfer on P_{2^t p - 1}.
    Family {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        t: u32,
        /// Decide every member with the S-set and general deciders.
        #[arg(long)]
        verify: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Support { .. } => "support",
            Command::Decide { .. } => "decide",
            Command::Simulate { .. } => "simulate",
            Command::SearchTime { .. } => "search-time",
            Command::Scan { .. } => "scan",
            Command::Family { .. } => "family",
        }
    }
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Inputs rejected or hypotheses unmet (exit 2).
    Refused { reason: String, message: String },
    /// A bug or I/O failure (exit 1).
    Internal(String),
}

impl Failure {
    fn refused(reason: &str, message: impl Into<String>) -> Self {
        Failure::Refused {
            reason: reason.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Refused { .. } => 2,
            Failure::Internal(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let reason = match &e {
            Error::Refused { reason, .. } => (*reason).to_string(),
            Error::Parse { .. } => "parse_error".into(),
            Error::IndexOutOfRange { .. } => "index_out_of_range".into(),
            Error::InvalidState(_) => "invalid_state".into(),
            Error::InvalidArgument(_) => "invalid_argument".into(),
            Error::FieldMismatch { .. } => "field_mismatch".into(),
            Error::ModulusMismatch { .. } => "modulus_mismatch".into(),
            Error::LengthMismatch { .. } => "length_mismatch".into(),
            Error::Inconsistent(_) => "inconsistent".into(),
        };
        if e.is_refusal() {
            Failure::Refused {
                reason,
                message: e.to_string(),
            }
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(format!("I/O error: {e}"))
    }
}

type Outcome = std::result::Result<(Value, Value), Failure>;

/// What a command writes to stdout: a JSON report, or raw CSV text.
enum Output {
    Report(Value, Value),
    Raw(String),
}

fn write_json<W: Write>(out: &mut W, value: &impl serde::Serialize, pretty: bool) -> std::io::Result<()> {
    if pretty {
        serde_json::to_writer_pretty(&mut *out, value)?;
    } else {
        serde_json::to_writer(&mut *out, value)?;
    }
    writeln!(out)
}

/// Parse `args` (including the program name), run, and write the report to `out`.
/// Returns the process exit code.
pub fn run<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    execute(&cli, out)
}

pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> i32 {
    let start = Instant::now();
    let command = cli.command.name();
    let result = dispatch(&cli.command);
    let timing_ms = start.elapsed().as_secs_f64() * 1e3;
    let written = match result {
        Ok(Output::Raw(text)) => out.write_all(text.as_bytes()).map(|_| 0),
        Ok(Output::Report(inputs, results)) => {
            let report = Report {
                schema_version: SCHEMA_VERSION,
                command: command.into(),
                inputs,
                results,
                timing_ms,
            };
            write_json(out, &report, cli.pretty).map(|_| 0)
        }
        Err(failure) => {
            let code = failure.exit_code();
            let (kind, reason, message) = match failure {
                Failure::Refused { reason, message } => ("refused", reason, message),
                Failure::Internal(message) => ("internal", "internal".to_string(), message),
            };
            eprintln!("pgst {command}: {message}");
            let report = ErrorReport {
                schema_version: SCHEMA_VERSION,
                command: command.into(),
                error: ErrorBody {
                    kind: kind.into(),
                    reason,
                    message,
                },
            };
            write_json(out, &report, cli.pretty).map(|_| code)
        }
    };
    written.unwrap_or(1)
}

fn dispatch(command: &Command) -> std::result::Result<Output, Failure> {
    if let Command::Spectrum {
        n,
        format: SpectrumFormat::Csv,
    } = command
    {
        return spectrum_csv(*n).map(Output::Raw);
    }
    let (inputs, results) = match command {
        Command::Spectrum { n, .. } => cmd_spectrum(*n),
        Command::Support { n, state, tolerance } => cmd_support(*n, state, *tolerance),
        Command::Decide {
            check_certificate: Some(path),
            ..
        } => cmd_check_certificate(path),
        Command::Decide { n, state, method, .. } => {
            let (n, state) = n
                .zip(state.as_ref())
                .ok_or_else(|| Failure::refused("missing_argument", "--n and --state are required"))?;
            cmd_decide(n, state, *method)
        }
        Command::Simulate {
            n,
            state,
            target,
            t_max,
            dt,
            out,
        } => cmd_simulate(*n, state, target.as_deref(), *t_max, *dt, out),
        Command::SearchTime {
            n,
            state,
            epsilon,
            budget,
        } => cmd_search_time(*n, state, *epsilon, *budget),
        Command::Scan {
            n,
            state,
            horizon,
            step,
        } => cmd_scan(*n, state, *horizon, *step),
        Command::Family { p, t, verify } => cmd_family(*p, *t, *verify),
    }?;
    Ok(Output::Report(inputs, results))
}

fn check_n(n: usize) -> std::result::Result<(), Failure> {
    if n == 0 {
        Err(Failure::refused("invalid_argument", "n must be at least 1"))
    } else {
        Ok(())
    }
}

fn spectrum_csv(n: usize) -> std::result::Result<String, Failure> {
    check_n(n)?;
    let mut text = String::from("j,theta_numeric,theta_exact_string\n");
    for e in spectrum(n).eigenvalues {
        text.push_str(&format!("{},{:?},{}\n", e.j, e.numeric, e.exact));
    }
    Ok(text)
}

fn cmd_spectrum(n: usize) -> Outcome {
    check_n(n)?;
    let s = spectrum(n);
    let eigenvalues: Vec<Value> = s
        .eigenvalues
        .iter()
        .map(|e| json!({"j": e.j, "theta_numeric": e.numeric, "theta_exact": e.exact.to_string()}))
        .collect();
    Ok((
        json!({"n": n}),
        json!({"n": n, "m": s.m, "eigenvalues": eigenvalues}),
    ))
}

fn cmd_support(n: usize, state: &str, tolerance: f64) -> Outcome {
    let spec = StateSpec::parse(state, n)?;
    let v = spec.to_state()?;
    let support = if v.is_exact() {
        eigenvalue_support(&v)?
    } else {
        eigenvalue_support_numeric(&v, tolerance)?
    };
    Ok((
        json!({"n": n, "state": state, "tolerance": tolerance}),
        json!({
            "n": n,
            "m": v.m(),
            "state_spec": spec.render(),
            "mode": if v.is_exact() { "exact" } else { "numeric" },
            "support": support.indices,
            "excluded": support.complement(),
            "mirror_closed": support.is_mirror_closed(),
            "parity_state": v.is_parity_state(),
        }),
    ))
}

fn method_arg_name(method: MethodArg) -> &'static str {
    match method {
        MethodArg::Auto => "auto",
        MethodArg::General => "general",
        MethodArg::SSets => "s-sets",
        MethodArg::RSets => "r-sets",
    }
}

fn cmd_decide(n: usize, state: &str, method: MethodArg) -> Outcome {
    let spec = StateSpec::parse(state, n)?;
    let v = spec.to_state()?;
    let rendered = spec.render();
    let verdict = match method {
        MethodArg::General => VerdictJson::new(&decide_pgst_general(&v)?, rendered),
        MethodArg::SSets => VerdictJson::new(&decide_pgst_parity_s(&v)?, rendered),
        MethodArg::RSets => VerdictJson::new(&decide_pgst_parity_r(&v)?, rendered),
        MethodArg::Auto => {
            let auto = decide_auto(&v, AUTO_CROSS_CHECK_MAX_N)?;
            let cross_check = auto.general.map(|g| CrossCheck {
                method: g.method,
                answer: g.answer,
                agree: g.answer == auto.verdict.answer,
            });
            VerdictJson::new(&auto.verdict, rendered).auto(cross_check)
        }
    };
    verdict
        .check()
        .map_err(|e| Failure::Internal(format!("emitted certificate fails verification: {e}")))?;
    Ok((
        json!({"n": n, "state": state, "method": method_arg_name(method)}),
        serde_json::to_value(&verdict).map_err(|e| Failure::Internal(e.to_string()))?,
    ))
}

fn cmd_check_certificate(path: &PathBuf) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::refused("unreadable_file", format!("{}: {e}", path.display())))?;
    let doc = parse_verdict_document(&text).map_err(|e| Failure::refused("malformed_certificate", e))?;
    let inputs = json!({"check_certificate": path.display().to_string()});
    match doc.check() {
        Ok(()) => Ok((
            inputs,
            json!({"valid": true, "answer": doc.answer, "n": doc.n, "state_spec": doc.state_spec}),
        )),
        Err(e) => Err(Failure::refused("certificate_invalid", e)),
    }
}

fn cmd_simulate(n: usize, state: &str, target: Option<&str>, t_max: f64, dt: f64, out: &PathBuf) -> Outcome {
    let v = StateSpec::parse(state, n)?.to_state()?;
    let w = match target {
        Some(t) => StateSpec::parse(t, n)?.to_state()?,
        None => v.mirror(),
    };
    let trace = FidelityTrace::sample(&v, &w, t_max, dt)?;
    let file = File::create(out)
        .map_err(|e| Failure::refused("unwritable_file", format!("{}: {e}", out.display())))?;
    let mut writer = BufWriter::new(file);
    trace.write_csv(&mut writer)?;
    writer.flush()?;
    let best = trace
        .samples
        .iter()
        .fold(None::<&crate::dynamics::FidelitySample>, |acc, s| match acc {
            Some(b) if b.overlap >= s.overlap => Some(b),
            _ => Some(s),
        })
        .expect("grid is nonempty");
    Ok((
        json!({"n": n, "state": state, "target": target, "t_max": t_max, "dt": dt, "out": out.display().to_string()}),
        json!({"samples": trace.samples.len(), "max_overlap": best.overlap, "t_at_max": best.t, "out": out.display().to_string()}),
    ))
}

fn cmd_search_time(n: usize, state: &str, epsilon: f64, budget: u64) -> Outcome {
    let v = StateSpec::parse(state, n)?.to_state()?;
    let options = SearchOptions {
        budget,
        ..SearchOptions::default()
    };
    let result = find_transfer_time(&v, epsilon, options)?;
    Ok((
        json!({"n": n, "state": state, "epsilon": epsilon, "budget": budget}),
        serde_json::to_value(result).map_err(|e| Failure::Internal(e.to_string()))?,
    ))
}

fn cmd_scan(n: usize, state: &str, horizon: f64, step: f64) -> Outcome {
    let v = StateSpec::parse(state, n)?.to_state()?;
    let r = scan_max_fidelity(&v, &v.mirror(), horizon, step)?;
    Ok((
        json!({"n": n, "state": state, "horizon": horizon, "step": step}),
        json!({"t_star": r.t_star, "overlap_star": r.overlap_star, "fidelity_star": r.overlap_star * r.overlap_star}),
    ))
}

fn cmd_family(p: u64, t: u32, verify: bool) -> Outcome {
    let family = corollary_family(p, t)?;
    let n = family.first().map_or(((1u64 << t) * p - 1) as usize, |i| i.n);
    let rows: Vec<std::result::Result<Value, Failure>> = family
        .par_iter()
        .map(|inst| {
            let mut row =
                json!({"a": inst.a, "b": inst.b, "alpha": inst.alpha, "state_spec": inst.state_spec()});
            if verify {
                let v = inst.state();
                let s = decide_pgst_parity_s(&v)?;
                let g = decide_pgst_general(&v)?;
                let certified = verify_certificate(&s).is_ok() && verify_certificate(&g).is_ok();
                row["s_sets"] = json!(s.answer);
                row["general_lattice"] = json!(g.answer);
                row["certificates_ok"] = json!(certified);
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    let failures: Vec<&Value> = rows
        .iter()
        .filter(|r| {
            verify
                && (r["s_sets"] != json!(Answer::Yes)
                    || r["general_lattice"] != json!(Answer::Yes)
                    || r["certificates_ok"] != json!(true))
        })
        .collect();
    if !failures.is_empty() {
        return Err(Failure::Internal(format!(
            "{} predicted-positive instances were not confirmed, first: {}",
            failures.len(),
            failures[0]
        )));
    }
    let mut results = json!({"p": p, "t": t, "n": n, "count": rows.len(), "instances": rows});
    if verify {
        results["all_yes"] = json!(true);
    }
    Ok((json!({"p": p, "t": t, "verify": verify}), results))
}
