use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use coopsense_cli::config::{Command, Format};
use coopsense_cli::output::{self, Provenance};
use coopsense_cli::{execute, parse_config, RunConfig};

/// Cooperative spectrum sensing experiments.
///
/// Commands: optimize, tradeoff, mc, bound, scaling, quiet-period.
/// Exit status: 0 success, 1 bad input or solver error, 2 some solve did
/// not converge, 3 an error target was unreachable. Results are written in
/// the last two cases and flagged in the `status` column.
#[derive(Debug, Parser)]
#[command(name = "coopsense", version)]
struct Cli {
    /// Command to run; may instead be given as `command` in the config.
    command: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted. A resolved copy of the
    /// configuration is written next to it as `<out>.config.toml`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format, overriding the config.
    #[arg(long)]
    format: Option<String>,
    /// Node count, overriding the config.
    #[arg(long = "K", short = 'K')]
    nodes: Option<usize>,
}

fn resolve(cli: &Cli) -> Result<(Command, RunConfig), String> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text).map_err(|e| match &cli.config {
        Some(p) => format!("{}: {e}", p.display()),
        None => e.to_string(),
    })?;
    let from_cli = cli.command.as_deref().map(Command::from_str).transpose().map_err(|e| e.to_string())?;
    let command = match (from_cli, cfg.command) {
        (Some(a), Some(b)) if a != b => return Err(format!("command `{a}` conflicts with `{b}` in the config")),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err("no command given".into()),
    };
    cfg.command = Some(command);
    if let Some(s) = cli.seed {
        if s > i64::MAX as u64 {
            return Err(format!("seed {s} exceeds {}", i64::MAX));
        }
        cfg.seed = s;
    }
    if let Some(f) = &cli.format {
        cfg.format = Format::from_str(f).map_err(|e| e.to_string())?;
    }
    if let Some(k) = cli.nodes {
        if k == 0 {
            return Err("--K must be at least 1".into());
        }
        cfg.nodes = k;
    }
    Ok((command, cfg))
}

fn run(cli: &Cli) -> Result<i32, String> {
    let (command, cfg) = resolve(cli)?;
    let outcome = execute(command, &cfg).map_err(|e| format!("{command}: {e}"))?;
    let prov = Provenance {
        seed: cfg.seed,
        config_hash: cfg.hash(),
        status: outcome.status.clone(),
    };
    match &cli.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            output::write(io::BufWriter::new(file), cfg.format, &outcome.table, &prov)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".config.toml");
            fs::write(&sidecar, cfg.to_toml()).map_err(|e| format!("{}: {e}", sidecar.to_string_lossy()))?;
        }
        None => output::write(io::stdout().lock(), cfg.format, &outcome.table, &prov).map_err(|e| e.to_string())?,
    }
    match &outcome.status {
        coopsense_cli::Status::Ok => {}
        coopsense_cli::Status::NonConverged(n) => {
            eprintln!("{command}: {n} solve(s) stopped before the duality gap closed; results flagged")
        }
        coopsense_cli::Status::Unreachable(why) => eprintln!("{command}: {why}; results flagged"),
    }
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which would read as "not converged".
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
