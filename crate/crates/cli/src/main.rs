mod args;
mod commands;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

const SUBCOMMANDS: [&str; 5] = ["sample", "augment", "match", "eval", "pipeline"];

/// Parses a `key = value` config file into flag tokens. Blank lines and
/// `#` comments are skipped; `true`/`false` toggle switch flags.
fn config_tokens(path: &Path) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut tokens = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), n + 1))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        match value {
            "true" => tokens.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                tokens.push(format!("--{key}").into());
                tokens.push(value.into());
            }
        }
    }
    Ok(tokens)
}

/// Splices config-file flags in right after the subcommand so that later
/// command-line flags override them.
fn expand_config(raw: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut config = None;
    for (i, arg) in raw.iter().enumerate() {
        let s = arg.to_string_lossy();
        if let Some(v) = s.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if s == "--config" {
            config = raw.get(i + 1).map(|v| v.to_string_lossy().into_owned());
        }
    }
    let Some(config) = config else {
        return Ok(raw);
    };
    let extra = config_tokens(Path::new(&config))?;
    let Some(pos) = raw
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(raw);
    };
    let mut out = raw[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&raw[pos + 1..]);
    Ok(out)
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("VPP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| format!("VPP_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let argv = match expand_config(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Sample(a) => commands::sample(a),
        Command::Augment(a) => commands::augment_cmd(a),
        Command::Match(a) => commands::match_cmd(a),
        Command::Eval(a) => commands::eval_cmd(a),
        Command::Pipeline(a) => commands::pipeline(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io_like() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
