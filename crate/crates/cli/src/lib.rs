//! Batch driver for the `kicked-core` experiments.
//!
//! Each subcommand resolves a [`RunConfig`] (flags over an optional
//! `key=value` file), runs one experiment family, writes CSV or JSON tables
//! plus a `manifest.json` with SHA-256 digests, and exits 0, 2 (configuration)
//! or 3 (numerical guard; also truncation warnings under `--strict`).

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches, Command};

pub use config::{Format, RunConfig, TauGrid};
pub use error::{CliError, CliResult};
pub use manifest::{RunManifest, MANIFEST_NAME};
pub use output::{Check, FileRecord, Output};

use crate::config::COMMON_KEYS;

/// Runs `cfg`, writes its files and manifest into `dir`.
///
/// Under `--strict` a run with warnings still writes everything, then fails
/// with a guard error.
pub fn execute(cfg: &RunConfig, dir: &Path) -> CliResult<RunManifest> {
    let Some(spec) = commands::find(&cfg.subcommand) else {
        return Err(CliError::Config(format!("unknown subcommand {:?}", cfg.subcommand)));
    };
    if let Some(k) = cfg.params.keys().find(|k| !spec.keys.contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown key {k:?} for {}", spec.name)));
    }
    let start = Instant::now();
    let out = (spec.run)(cfg)?;
    let files = out.write(dir, cfg.format)?;
    let manifest = RunManifest {
        tool: "kicked".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        checks: out.checks,
        warnings: out.warnings,
        files,
    };
    manifest.write(dir)?;
    if cfg.strict && !manifest.warnings.is_empty() {
        return Err(CliError::Guard(manifest.warnings.join("; ")));
    }
    Ok(manifest)
}

/// Re-runs the configuration recorded in `manifest` into `dir` and compares digests.
pub fn replay(manifest: &Path, dir: &Path) -> CliResult<RunManifest> {
    let old = RunManifest::read(manifest)?;
    let new = execute(&old.config, dir)?;
    let diff = old.digest_mismatches(&new);
    if !diff.is_empty() {
        return Err(CliError::Replay(format!("digests differ for {}", diff.join(", "))));
    }
    Ok(new)
}

fn value_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

/// The clap command tree, generated from the subcommand registry.
pub fn cli_command() -> Command {
    let mut app = Command::new("kicked")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Kicked sequential systems: batch experiments with reproducible outputs")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for spec in commands::COMMANDS {
        let mut sc = Command::new(spec.name)
            .about(spec.about)
            .arg(value_arg("config", "key=value file; flags take precedence"))
            .arg(value_arg("out", "output directory [default: out/<subcommand>]"))
            .arg(value_arg("tau", "single tau"))
            .arg(value_arg("tau-grid", "tau grid a:b:n"))
            .arg(value_arg("steps", "horizon N or K"))
            .arg(value_arg("window", "window nmin:nmax"))
            .arg(value_arg("seed", "64-bit seed"))
            .arg(value_arg("format", "csv or json"))
            .arg(value_arg("mode", "canonical or fast"))
            .arg(Arg::new("strict").long("strict").action(ArgAction::SetTrue).help("treat warnings as errors"));
        for &k in spec.keys {
            sc = sc.arg(Arg::new(k).long(k).value_name("VALUE"));
        }
        app = app.subcommand(sc);
    }
    app.subcommand(
        Command::new("replay")
            .about("Re-run a manifest and verify the output digests")
            .arg(Arg::new("manifest").required(true))
            .arg(value_arg("out", "output directory").required(true)),
    )
}

/// Builds the run configuration for one parsed subcommand.
pub fn config_from_matches(name: &str, m: &ArgMatches) -> CliResult<RunConfig> {
    let spec = commands::find(name).ok_or_else(|| CliError::Config(format!("unknown subcommand {name:?}")))?;
    let mut cfg = RunConfig::new(name);
    if let Some(path) = m.get_one::<String>("config") {
        cfg.apply_file(Path::new(path), spec.keys)?;
    }
    for &k in COMMON_KEYS.iter().filter(|&&k| k != "strict").chain(spec.keys) {
        if let Some(v) = m.get_one::<String>(k) {
            cfg.set(k, v, spec.keys)?;
        }
    }
    if m.get_flag("strict") {
        cfg.strict = true;
    }
    Ok(cfg)
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match cli_command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let result = if name == "replay" {
        let manifest = PathBuf::from(sub.get_one::<String>("manifest").expect("required"));
        let out = PathBuf::from(sub.get_one::<String>("out").expect("required"));
        replay(&manifest, &out)
    } else {
        config_from_matches(name, sub).and_then(|cfg| {
            let out = sub
                .get_one::<String>("out")
                .map_or_else(|| PathBuf::from("out").join(name), PathBuf::from);
            execute(&cfg, &out)
        })
    };
    match result {
        Ok(m) => {
            for c in &m.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": e.reason(), "message": e.to_string()}));
            e.exit_code()
        }
    }
}
