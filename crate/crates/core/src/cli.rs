//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 when the analysis found something (a violation or a key cycle).

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::exec::{self, ExecError, Property, SearchLimits, SecretClasses};
use crate::keydep::{self, ExtractOptions, KeyDepError};
use crate::model::{self, Model, ModelError, Severity};
use crate::oracle::{self, OracleConfig, OracleError};
use crate::synth::{self, ChainSpec, LemmaOrdering, SynthError};

#[derive(Debug, Parser)]
#[command(name = "keyorder", version, propagate_version = true)]
#[command(about = "Key dependency ordering and bounded checking for protocol models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract the key class order from a model.
    Extract {
        model: PathBuf,
        /// Write the reduced class graph as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Write the priority order, one class per line.
        #[arg(long)]
        order: Option<PathBuf>,
        /// Count encrypted transport as an authenticity dependency too.
        #[arg(long)]
        extended_authenticity: bool,
    },
    /// Print the reduced class graph as DOT.
    Graph {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        extended_authenticity: bool,
    },
    /// Goal ranking hook: goal lines on stdin, chosen indices on stdout.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        lemma: String,
    },
    /// Generate a synthetic key chain model.
    Gen {
        #[arg(long)]
        depth: usize,
        /// Emit reusable helper lemmas.
        #[arg(long)]
        reuse: bool,
        /// Lemma order: dep, none or rand:SEED.
        #[arg(long, default_value = "dep")]
        order: LemmaOrdering,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the extracted key order of the generated model.
        #[arg(long)]
        order_file: Option<PathBuf>,
    },
    /// Replay a scenario script and print its trace.
    Run {
        model: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        /// Write the structured trace as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Attacker composition depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Search bounded executions for a property violation.
    Check {
        model: PathBuf,
        /// secrecy, secrecy:CLASS, aliveness, weak-agreement or non-injective-agreement.
        #[arg(long, required = true)]
        property: Vec<Property>,
        #[arg(long, default_value_t = 12)]
        max_steps: usize,
        #[arg(long, default_value_t = 6)]
        fresh: usize,
        #[arg(long)]
        depth: Option<usize>,
        /// Enable the model's reveal rules.
        #[arg(long)]
        reveal: bool,
        /// Write the first counterexample trace here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Which secrets of a scenario leak once the given classes are revealed.
    Closure {
        model: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        reveal: Vec<String>,
        #[arg(long)]
        depth: Option<usize>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelError },
    #[error("{0}: model has errors")]
    Invalid(PathBuf),
    #[error(transparent)]
    KeyDep(#[from] KeyDepError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("stdio: {0}")]
    Stdio(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::KeyDep(KeyDepError::CyclicDependency(_)) => 2,
            _ => 1,
        }
    }
}

/// Parse `args` (program name first) and execute; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, &mut io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("keyorder: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    let m = model::parse_model(&read(path)?).map_err(|source| CliError::Model {
        path: path.to_path_buf(),
        source,
    })?;
    let diags = model::validate(&m);
    for d in &diags {
        eprintln!("{}: {d}", path.display());
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(CliError::Invalid(path.to_path_buf()));
    }
    Ok(m)
}

fn extraction(m: &Model, extended_authenticity: bool) -> Result<keydep::Extraction, CliError> {
    let ex = keydep::extract(m, &ExtractOptions { extended_authenticity })?;
    for w in &ex.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ex)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn execute(cmd: Command, out: &mut impl Write) -> Result<i32, CliError> {
    match cmd {
        Command::Extract {
            model,
            dot,
            order,
            extended_authenticity,
        } => {
            let ex = extraction(&load_model(&model)?, extended_authenticity)?;
            if let Some(p) = dot {
                write(&p, &ex.dag.to_dot())?;
            }
            if let Some(p) = order {
                write(&p, &ex.dag.order_text())?;
            }
            writeln!(out, "classes: {}", ex.dag.len())?;
            writeln!(out, "longest chain: {}", ex.dag.longest_chain())?;
            writeln!(out, "order: {}", ex.dag.linear_labels().join(" "))?;
        }
        Command::Graph {
            model,
            output,
            extended_authenticity,
        } => {
            let dot = extraction(&load_model(&model)?, extended_authenticity)?.dag.to_dot();
            match output {
                Some(p) => write(&p, &dot)?,
                None => out.write_all(dot.as_bytes())?,
            }
        }
        Command::Oracle { config, lemma } => {
            let cfg = OracleConfig::load(&config)?;
            oracle::serve(&cfg, &lemma, io::stdin().lock(), out, io::stderr())?;
        }
        Command::Gen {
            depth,
            reuse,
            order,
            output,
            order_file,
        } => {
            let m = synth::generate_chain_model(&ChainSpec {
                depth,
                reuse,
                ordering: order,
            })?;
            let text = model::serialize(&m);
            match output {
                Some(p) => write(&p, &text)?,
                None => out.write_all(text.as_bytes())?,
            }
            if let Some(p) = order_file {
                write(&p, &extraction(&m, false)?.dag.order_text())?;
            }
        }
        Command::Run {
            model,
            scenario,
            json,
            depth,
        } => {
            let m = load_model(&model)?;
            let script = exec::parse_script(&read(&scenario)?, &m)?;
            let state = exec::run_scenario(&m, &script, depth)?.state;
            out.write_all(state.trace.to_text().as_bytes())?;
            if let Some(p) = json {
                write(&p, &pretty(&state.trace.to_json(&state.knowledge)))?;
            }
        }
        Command::Check {
            model,
            property,
            max_steps,
            fresh,
            depth,
            reveal,
            output,
            json,
        } => return check(&model, &property, SearchLimits { max_steps, fresh, depth, reveal }, output, json, out),
        Command::Closure {
            model,
            scenario,
            reveal,
            depth,
        } => closure(&model, &scenario, &reveal, depth, out)?,
    }
    Ok(0)
}

fn check(
    path: &Path,
    properties: &[Property],
    limits: SearchLimits,
    output: Option<PathBuf>,
    json: Option<PathBuf>,
    out: &mut impl Write,
) -> Result<i32, CliError> {
    let m = load_model(path)?;
    // class-aware secrecy needs the key order; without it every reveal excuses
    let ex = keydep::extract(&m, &ExtractOptions::default()).ok();
    let dag = ex.as_ref().map(|e| &e.dag);
    let outcomes = exec::search_many(&m, properties, &limits, dag)?;
    let mut code = 0;
    let mut written = false;
    for (p, o) in properties.iter().zip(&outcomes) {
        let Some((state, violations)) = &o.counterexample else {
            writeln!(out, "{p}: holds within bounds ({} states)", o.explored)?;
            continue;
        };
        code = 2;
        writeln!(out, "{p}: violated after {} steps ({} states)", state.trace.len(), o.explored)?;
        for v in violations {
            writeln!(out, "  {v}")?;
        }
        if written {
            continue;
        }
        written = true;
        if let Some(f) = &output {
            let mut text = state.trace.to_text();
            for v in violations {
                text.push_str(&format!("# {v}\n"));
            }
            write(f, &text)?;
        }
        if let Some(f) = &json {
            let mut doc = state.trace.to_json(&state.knowledge);
            doc["property"] = p.to_string().into();
            doc["violations"] = violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().into();
            write(f, &pretty(&doc))?;
        }
    }
    Ok(code)
}

fn closure(
    path: &Path,
    scenario: &Path,
    reveal: &[String],
    depth: Option<usize>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let m = load_model(path)?;
    let script = exec::parse_script(&read(scenario)?, &m)?;
    let state = exec::run_scenario(&m, &script, depth)?.state;
    let classes = SecretClasses::new(&state, None);
    let mut knowledge = state.knowledge.clone();
    for c in reveal {
        let inst = classes.instances(c);
        if inst.is_empty() {
            return Err(ExecError::UnknownClass(c.clone()).into());
        }
        knowledge.extend(inst.into_iter().cloned());
    }
    for (_, a) in state.trace.actions_named("Secret_key") {
        let Some(x) = a.args.last() else { continue };
        let status = if knowledge.derivable(x) { "derivable" } else { "secret" };
        writeln!(out, "{status} {x} {}", classes.class_of(x).unwrap_or("unclassified"))?;
    }
    Ok(())
}
