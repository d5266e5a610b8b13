//! Command-line front end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::emit::emit_sal;
use crate::error::{Error, Result};
use crate::mc::{check_refinement, oracle_downward_sim, CheckOptions};
use crate::refine::{ConditionKind, RefinementProblem};
use crate::translate::{derive_bounds, translate, Overrides};
use crate::zparse::parse_spec;

pub const EXIT_ERROR: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "zrefine", version, about = "Bounded downward-simulation checker for Z specifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that CONCRETE is a downward simulation of ABSTRACT under RETRIEVE.
    Check(CheckArgs),
    /// Print the SAL translation of one specification.
    Translate(TranslateArgs),
}

#[derive(Args, Debug, Default, Clone)]
pub struct BoundArgs {
    /// Upper end of the NAT range.
    #[arg(long)]
    pub nat_hi: Option<i64>,
    /// Number of elements of every given type.
    #[arg(long)]
    pub given_size: Option<usize>,
    /// Size of one given type, as NAME=N (repeatable).
    #[arg(long = "type-size", value_name = "NAME=N")]
    pub type_size: Vec<String>,
    /// Capacity of every bounded sequence.
    #[arg(long)]
    pub seq_capacity: Option<u8>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Abstract specification (LaTeX).
    pub abstract_spec: PathBuf,
    /// Concrete specification (LaTeX).
    pub concrete_spec: PathBuf,
    /// Retrieve relation schema over both state schemas.
    pub retrieve: PathBuf,
    #[command(flatten)]
    pub bounds: BoundArgs,
    /// Operation pairs, as A=C,A2=C2 (default: declaration order).
    #[arg(long, value_delimiter = ',', value_name = "A=C")]
    pub pairing: Vec<String>,
    /// Also run the brute-force oracle and compare verdicts.
    #[arg(long)]
    pub oracle: bool,
    /// Write the combined systems as SAL files.
    #[arg(long)]
    pub emit_combined: bool,
    /// Directory for --emit-combined output.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write the report as JSON.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Exploration threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// TOML file with defaults for the options above.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print only the verdict line.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Args, Debug)]
pub struct TranslateArgs {
    /// Specification (LaTeX).
    pub spec: PathBuf,
    #[command(flatten)]
    pub bounds: BoundArgs,
    /// Context name (default: the specification name in lower case).
    #[arg(long)]
    pub context: Option<String>,
    /// Write to a file instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Options read from `--config`. Command-line flags take precedence.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub nat_hi: Option<i64>,
    pub given_size: Option<usize>,
    #[serde(default)]
    pub type_sizes: BTreeMap<String, usize>,
    pub seq_capacity: Option<u8>,
    pub workers: Option<usize>,
    pub oracle: Option<bool>,
    pub pairing: Option<Vec<String>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = read(path)?;
        toml::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn split_pair(s: &str, what: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_string(), b.trim().to_string()))
        }
        _ => Err(Error::ConflictingOverride(format!("{what} expects NAME=VALUE, got `{s}`"))),
    }
}

impl BoundArgs {
    fn overrides(&self, cfg: &Config) -> Result<Overrides> {
        let mut type_sizes = cfg.type_sizes.clone();
        for t in &self.type_size {
            let (n, v) = split_pair(t, "--type-size")?;
            let v = v
                .parse()
                .map_err(|_| Error::ConflictingOverride(format!("--type-size {t}: not a number")))?;
            type_sizes.insert(n, v);
        }
        Ok(Overrides {
            nat_hi: self.nat_hi.or(cfg.nat_hi),
            given_size: self.given_size.or(cfg.given_size),
            type_sizes,
            seq_capacity: self.seq_capacity.or(cfg.seq_capacity),
            enum_cap: None,
        })
    }
}

fn check(args: &CheckArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let ov = args.bounds.overrides(&cfg)?;
    let pairing_src = if args.pairing.is_empty() {
        cfg.pairing.clone().unwrap_or_default()
    } else {
        args.pairing.clone()
    };
    let pairing = pairing_src
        .iter()
        .map(|p| split_pair(p, "--pairing"))
        .collect::<Result<Vec<_>>>()?;
    let p = RefinementProblem::from_sources(
        &read(&args.abstract_spec)?,
        &read(&args.concrete_spec)?,
        &read(&args.retrieve)?,
        &ov,
        (!pairing.is_empty()).then_some(pairing.as_slice()),
    )?;
    let mut opts = CheckOptions {
        enum_cap: p.bounds.enum_cap,
        ..CheckOptions::default()
    };
    if let Some(w) = args.workers.or(cfg.workers) {
        opts.workers = w.max(1);
    }
    if args.emit_combined {
        std::fs::create_dir_all(&args.out_dir)
            .map_err(|e| Error::Io(format!("{}: {e}", args.out_dir.display())))?;
        for k in ConditionKind::ALL {
            let sys = p.build(k)?;
            let path = args.out_dir.join(format!("{}.sal", k.context()));
            write(&path, &emit_sal(&sys.model, k.context()))?;
        }
    }
    let report = check_refinement(&p, &opts)?;
    let oracle = if args.oracle || cfg.oracle == Some(true) {
        Some(oracle_downward_sim(&p, opts.enum_cap)?)
    } else {
        None
    };
    let io = |e: std::io::Error| Error::Io(e.to_string());
    if args.quiet {
        writeln!(out, "{}", report.verdict).map_err(io)?;
    } else {
        writeln!(out, "{report}").map_err(io)?;
    }
    let mut disagree = false;
    if let Some(o) = &oracle {
        for k in ConditionKind::ALL {
            if o.verdict_of(k) != report.condition(k).verdict {
                disagree = true;
            }
        }
        if !args.quiet || disagree {
            writeln!(out, "oracle: {}{}", o.verdict.to_string().to_uppercase(), if disagree { " (DISAGREES)" } else { "" })
                .map_err(io)?;
        }
    }
    if let Some(path) = &args.json {
        let mut v = serde_json::to_value(&report).map_err(|e| Error::Io(e.to_string()))?;
        if let Some(o) = &oracle {
            v["oracle"] = serde_json::to_value(o).map_err(|e| Error::Io(e.to_string()))?;
        }
        let text = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
        write(path, &text)?;
    }
    Ok(if disagree {
        EXIT_ERROR
    } else {
        report.verdict.exit_code()
    })
}

fn translate_cmd(args: &TranslateArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let spec = parse_spec(&read(&args.spec)?)?;
    let bounds = derive_bounds(&[&spec], &args.bounds.overrides(&Config::default())?)?;
    let model = translate(&spec, &bounds)?;
    let ctx = args.context.clone().unwrap_or_else(|| spec.name.to_lowercase());
    let text = emit_sal(&model, &ctx);
    match &args.out {
        Some(p) => write(p, &text)?,
        None => write!(out, "{text}").map_err(|e| Error::Io(e.to_string()))?,
    }
    Ok(0)
}

/// Runs a parsed command line, returning the process exit code: 0 when the
/// refinement holds, 1 when it fails, 2 when it holds only vacuously and 3
/// on errors.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32 {
    let r = match &cli.command {
        Command::Check(a) => check(a, out),
        Command::Translate(a) => translate_cmd(a, out),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
