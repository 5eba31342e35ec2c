//! Command-line surface for the lamhat workbench.
//!
//! Exit codes: 0 success, 1 usage or parse errors, 2 semantic failures
//! (clashes, untypable terms, derivation violations, refuted simulations),
//! 3 fuel or search bound exhaustion.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lamhat::classify::{is_clash, is_clash_free_nf, nf_class};
use lamhat::encodings::{
    check_simulation, parse_bang, parse_cbn, parse_cbv, SimulationFailure, SourceTerm,
    SIM_SEARCH_BOUND,
};
use lamhat::json::{derivation_from_json, derivation_to_json};
use lamhat::parse::parse_term;
use lamhat::reduction::{all_paths_to_nf, evaluate, EvalOutcome, PathEnumeration, DEFAULT_FUEL};
use lamhat::synthesis::{synthesize, SynthesisOutcome};
use lamhat::types::check_derivation;
use lamhat::Term;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_SEMANTIC: u8 = 2;
const EXIT_FUEL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lamhat",
    version,
    about = "Pattern-matching lambda calculus workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a term with the deterministic weak head strategy
    Eval {
        /// Step limit before giving up
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Print every reduction step
        #[arg(long)]
        trace: bool,
        /// Enumerate every maximal reduction path instead of following one
        #[arg(long)]
        all_paths: bool,
        /// Accept terms with free variables
        #[arg(long)]
        open: bool,
        /// Path to a .lamhat term file
        file: PathBuf,
    },
    /// Report the normal form class and clash status of a term
    Classify {
        /// Accept terms with free variables
        #[arg(long)]
        open: bool,
        /// Path to a .lamhat term file
        file: PathBuf,
    },
    /// Translate a source calculus term into the pattern calculus
    Encode {
        /// Source calculus the file is written in
        #[arg(long, value_enum)]
        from: Calculus,
        /// Path to the source term file
        file: PathBuf,
    },
    /// Step a source term and certify each step in the pattern calculus
    Simulate {
        /// Source calculus the file is written in
        #[arg(long, value_enum)]
        from: Calculus,
        /// Maximum number of source steps to take
        #[arg(long)]
        steps: usize,
        /// Path to the source term file
        file: PathBuf,
    },
    /// Check a derivation file and report its size
    Check {
        /// Path to a derivation .json file
        file: PathBuf,
    },
    /// Search for a typing derivation by evaluation and backward expansion
    Synth {
        /// Step limit for the evaluation phase
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: usize,
        /// Write the derivation to this JSON file on success
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Path to a .lamhat term file
        file: PathBuf,
    },
    /// Print the bundled example terms
    Examples,
}

#[derive(Clone, Copy, ValueEnum)]
enum Calculus {
    Cbn,
    Cbv,
    Bang,
}

fn main() -> ExitCode {
    // Rust ignores SIGPIPE, which turns `lamhat ... | head` into a panic on
    // the first write after the reader closes. Restore the default so the
    // process exits quietly instead.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Eval {
            fuel,
            trace,
            all_paths,
            open,
            file,
        } => cmd_eval(fuel, trace, all_paths, open, &file),
        Command::Classify { open, file } => cmd_classify(open, &file),
        Command::Encode { from, file } => cmd_encode(from, &file),
        Command::Simulate { from, steps, file } => cmd_simulate(from, steps, &file),
        Command::Check { file } => cmd_check(&file),
        Command::Synth { fuel, emit, file } => cmd_synth(fuel, emit.as_deref(), &file),
        Command::Examples => cmd_examples(),
    }
}

fn load_term(path: &Path) -> Result<Term> {
    let src =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (t, _) = parse_term(&src).with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(t)
}

/// Enforces the closed-term default. Returns the failure exit code when the
/// term is open and `--open` was not given.
fn reject_open(t: &Term, open: bool, what: &str) -> Option<u8> {
    if open || t.is_closed() {
        return None;
    }
    let mut vars: Vec<String> = t.free_vars().into_iter().collect();
    vars.sort();
    eprintln!("{what} requires a closed term; free: {}", vars.join(", "));
    Some(EXIT_SEMANTIC)
}

fn load_source(path: &Path, from: Calculus) -> Result<SourceTerm> {
    let src =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let src = src.trim();
    let parsed = match from {
        Calculus::Cbn => SourceTerm::Cbn(parse_cbn(src)?),
        Calculus::Cbv => SourceTerm::Cbv(parse_cbv(src)?),
        Calculus::Bang => SourceTerm::Bang(parse_bang(src)?),
    };
    Ok(parsed)
}

fn source_text(t: &SourceTerm) -> String {
    match t {
        SourceTerm::Cbn(t) => t.to_string(),
        SourceTerm::Cbv(t) => t.to_string(),
        SourceTerm::Bang(t) => t.to_string(),
    }
}

fn cmd_eval(fuel: usize, trace: bool, all_paths: bool, open: bool, file: &Path) -> Result<u8> {
    let t = load_term(file)?;
    if let Some(code) = reject_open(&t, open, "eval") {
        return Ok(code);
    }

    if all_paths {
        return Ok(match all_paths_to_nf(&t, fuel) {
            PathEnumeration::Complete(paths) => {
                if trace {
                    for (i, path) in paths.iter().enumerate() {
                        println!("path {}:", i + 1);
                        for step in &path.steps {
                            println!("  {step}");
                        }
                    }
                }
                let length = paths.first().map_or(0, |p| p.len());
                println!("paths: {} of length {}", paths.len(), length);
                0
            }
            PathEnumeration::Exceeded => {
                eprintln!("path enumeration exceeded the bound");
                EXIT_FUEL
            }
        });
    }

    match evaluate(&t, fuel) {
        EvalOutcome::Normal { term, trace: steps } => {
            if trace {
                for step in &steps.steps {
                    println!("{step}");
                }
            }
            println!("steps={}", steps.counters);
            if is_clash(&term).is_clash {
                println!("clash: {term}");
                Ok(EXIT_SEMANTIC)
            } else {
                println!("normal: {term}");
                Ok(0)
            }
        }
        EvalOutcome::OutOfFuel { trace: steps } => {
            if trace {
                for step in &steps.steps {
                    println!("{step}");
                }
            }
            println!("steps={}", steps.counters);
            eprintln!("out of fuel after {} steps", steps.len());
            Ok(EXIT_FUEL)
        }
    }
}

fn cmd_classify(open: bool, file: &Path) -> Result<u8> {
    let t = load_term(file)?;
    if let Some(code) = reject_open(&t, open, "classify") {
        return Ok(code);
    }
    let report = is_clash(&t);
    let clash = match &report.witness {
        Some(w) => format!("yes@{}", w.position),
        None => "no".to_string(),
    };
    let cf = if is_clash_free_nf(&t) { "yes" } else { "no" };
    println!("{}, clash: {clash}, clash-free-nf: {cf}", nf_class(&t));
    Ok(if report.is_clash { EXIT_SEMANTIC } else { 0 })
}

fn cmd_encode(from: Calculus, file: &Path) -> Result<u8> {
    let src = load_source(file, from)?;
    println!("{}", src.translate());
    Ok(0)
}

fn cmd_simulate(from: Calculus, steps: usize, file: &Path) -> Result<u8> {
    let src = load_source(file, from)?;
    match check_simulation(&src, steps, SIM_SEARCH_BOUND) {
        Ok(certs) => {
            for (i, cert) in certs.iter().enumerate() {
                println!(
                    "certificate {}: {} --> {}",
                    i + 1,
                    source_text(&cert.source_before),
                    source_text(&cert.source_after)
                );
                for step in &cert.trace.steps {
                    println!("  {step}");
                }
            }
            println!("certified {} source steps", certs.len());
            Ok(0)
        }
        Err(e @ SimulationFailure::Refuted(..)) => {
            eprintln!("simulation failed: {e}");
            Ok(EXIT_SEMANTIC)
        }
        Err(e @ SimulationFailure::SearchBoundExceeded(..)) => {
            eprintln!("simulation failed: {e}");
            Ok(EXIT_FUEL)
        }
    }
}

fn cmd_check(file: &Path) -> Result<u8> {
    let raw =
        fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .with_context(|| format!("{} is not valid JSON", file.display()))?;
    let derivation = derivation_from_json(&value)
        .with_context(|| format!("{} is not a derivation file", file.display()))?;
    match check_derivation(&derivation) {
        Ok(()) => {
            println!("ok size={}", derivation.size());
            Ok(0)
        }
        Err(violations) => {
            for v in &violations {
                eprintln!("violation: {v}");
            }
            Ok(EXIT_SEMANTIC)
        }
    }
}

fn cmd_synth(fuel: usize, emit: Option<&Path>, file: &Path) -> Result<u8> {
    let t = load_term(file)?;
    if let Some(code) = reject_open(&t, false, "synth") {
        return Ok(code);
    }
    match synthesize(&t, fuel).expect("closedness was checked above") {
        SynthesisOutcome::Typable {
            derivation,
            bound,
            steps,
        } => {
            println!("typable: steps={steps} bound={bound}");
            if let Some(path) = emit {
                let text = format!(
                    "{}\n",
                    serde_json::to_string_pretty(&derivation_to_json(&derivation))?
                );
                fs::write(path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            Ok(0)
        }
        SynthesisOutcome::Untypable { witness, position } => {
            println!("untypable: clash at {position} in {witness}");
            Ok(EXIT_SEMANTIC)
        }
        SynthesisOutcome::Unknown { fuel } => {
            println!("unknown: no verdict within fuel {fuel}");
            Ok(EXIT_FUEL)
        }
    }
}

fn cmd_examples() -> Result<u8> {
    for (name, src, _) in lamhat::fixtures::all_terms() {
        println!("# {name}");
        println!("{src}");
        println!();
    }
    Ok(0)
}
