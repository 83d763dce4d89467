//! Command-line front end. Exit codes: 0 when every check passes, 1 when
//! any fails, 2 on usage or parse errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::checker::{
    fixture_suites, suite_all, suite_c0_c, suite_congruence, suite_prop_pullback, NamedSuite, SuiteReport,
};
use crate::congruence::RelationSeed;
use crate::instances::{Fragment, FragmentConfig, Instance, InstanceConfig};
use crate::kernel::{CSystem, KernelError};
use crate::subsystems::{check_closed, close_window, verify_subsystem_lemmas, SubsystemSeed};
use crate::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "csys", version, about = "Check and transform C-systems over finite windows")]
pub struct Cli {
    /// Instance configuration (JSON).
    #[arg(long, global = true)]
    pub instance: Option<PathBuf>,
    /// Length bound of the fragment and of subsystem windows.
    #[arg(long, global = true, default_value_t = 3)]
    pub max_len: usize,
    /// Objects with more points are left out of the fragment.
    #[arg(long, global = true, default_value_t = 8)]
    pub point_cap: usize,
    /// Larger hom-sets are sampled.
    #[arg(long, global = true, default_value_t = 4096)]
    pub hom_cap: usize,
    /// Seed for sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run every check on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Axiom suites and the pullback property.
    Check,
    /// Close a seed into a subsystem window and check it.
    Close {
        #[arg(long)]
        seed: PathBuf,
    },
    /// Run the congruence pipeline on a relation seed and dump the quotient.
    Quotient {
        #[arg(long)]
        relation: PathBuf,
    },
    /// Every shipped fixture suite and mutation fixture; with --instance,
    /// that instance's fixture suites as well.
    SuiteAll,
}

#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

impl Cli {
    fn fragment_config(&self) -> FragmentConfig {
        FragmentConfig {
            max_len: self.max_len,
            point_cap: self.point_cap,
            hom_cap: self.hom_cap,
            rng_seed: self.rng_seed,
        }
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    fn instance(&self) -> Result<Instance, UsageError> {
        let path = self
            .instance
            .as_ref()
            .ok_or_else(|| UsageError("--instance is required for this command".into()))?;
        let cfg: InstanceConfig = serde_json::from_value(read_json(path)?)?;
        Ok(Instance::build(&cfg)?)
    }
}

fn read_json(path: &Path) -> Result<Value, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

/// A command's rendered output and whether all its checks passed.
struct Outcome {
    json: Value,
    text: String,
    ok: bool,
}

fn suites_outcome(suites: &[SuiteReport], extra: Option<(&str, Value)>, header: String) -> Outcome {
    let mut json = json!({ "suites": suites });
    let mut text = header;
    for s in suites {
        text.push_str(&s.render_text());
    }
    if let Some((key, v)) = extra {
        json[key] = v;
    }
    Outcome { json, text, ok: suites.iter().all(SuiteReport::passed) }
}

fn cmd_check(cli: &Cli) -> Result<Outcome, UsageError> {
    let inst = cli.instance()?;
    let cs = inst.cs();
    let frag = Fragment::build(cs, cli.fragment_config(), cli.exec());
    let suites = [suite_c0_c(cs, &frag), suite_prop_pullback(cs, &frag)];
    Ok(suites_outcome(&suites, None, format!("instance {}\n", cs.describe())))
}

fn cmd_close(cli: &Cli, seed: &Path) -> Result<Outcome, UsageError> {
    let inst = cli.instance()?;
    let cs = inst.cs();
    let seed = SubsystemSeed::decode(cs, &read_json(seed)?)?;
    let frag = Fragment::build(cs, cli.fragment_config(), cli.exec());
    let w = close_window(cs, &seed, cli.max_len);
    let report =
        SuiteReport::new("close", vec![check_closed(cs, &w), verify_subsystem_lemmas(cs, &w, &frag)]);
    let header = format!(
        "instance {}\nwindow: {} objects, {} sections, {} frontier items\n",
        cs.describe(),
        w.b.len(),
        w.bt.len(),
        w.frontier.len()
    );
    Ok(suites_outcome(&[report], Some(("window", w.dump(cs))), header))
}

fn cmd_quotient(cli: &Cli, relation: &Path) -> Result<Outcome, UsageError> {
    let inst = cli.instance()?;
    let cs: &dyn CSystem = inst.cs();
    let seed = match RelationSeed::decode(cs, &read_json(relation)?) {
        Ok(s) => s,
        Err(KernelError::Decode(m)) => return Err(UsageError(m)),
        Err(e) => return Err(e.into()),
    };
    let frag = Fragment::build(cs, cli.fragment_config(), cli.exec());
    let out = suite_congruence(cs, &seed, &frag);
    let quotient = out.quotient.unwrap_or(Value::Null);
    let header = format!("instance {}\n", cs.describe());
    let mut o = suites_outcome(&[out.report], Some(("quotient", quotient.clone())), header);
    if let Some(objs) = quotient["objects"].as_array() {
        o.text.push_str(&format!(
            "quotient: {} objects, {} morphism classes\n",
            objs.len(),
            quotient["morphisms"].as_array().map_or(0, |m| m.len())
        ));
    }
    Ok(o)
}

/// The shipped suites, plus the fixture suites of `--instance` when given.
fn cmd_suite_all(cli: &Cli) -> Result<Outcome, UsageError> {
    let extra = cli.instance.as_ref().map(|_| cli.instance()).transpose()?;
    let mut all = suite_all(cli.exec());
    if let Some(inst) = extra {
        let cs = inst.cs();
        let frag = Fragment::build(cs, cli.fragment_config(), cli.exec());
        for report in fixture_suites(cs, &frag) {
            all.push(NamedSuite { fixture: cs.describe(), report });
        }
    }
    Ok(Outcome {
        json: serde_json::to_value(&all).expect("reports serialize"),
        text: all.render_text(),
        ok: all.ok(),
    })
}

/// Runs the command line `args` (program name first), writing the report
/// to `out` unless `--out` is given, and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Check => cmd_check(&cli),
        Command::Close { seed } => cmd_close(&cli, seed),
        Command::Quotient { relation } => cmd_quotient(&cli, relation),
        Command::SuiteAll => cmd_suite_all(&cli),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(UsageError(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
    };
    let body = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.json).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => outcome.text,
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, body).map_err(|e| format!("{}: {e}", path.display())),
        None => out.write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(m) = written {
        let _ = writeln!(err, "error: {m}");
        return 2;
    }
    if outcome.ok {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("csys").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let (code, _, err) = run_args(&["check", "--bogus"]);
        assert_eq!(code, 2);
        assert!(err.contains("--bogus"));
    }

    #[test]
    fn missing_instance_is_a_usage_error() {
        let (code, _, err) = run_args(&["check"]);
        assert_eq!(code, 2);
        assert!(err.contains("--instance"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("suite-all"));
    }
}
