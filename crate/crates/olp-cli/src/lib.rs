//! The `olp` command line: game files in, JSON or CSV reports out.
//!
//! Exit codes are 0 on success, 1 when a verification or property check fails (the report is
//! still written) and 2 on input errors.

mod commands;
pub mod game_file;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

/// Environment variable that switches on strict determinism.
pub const CI_ENV: &str = "OLP_CI";

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; exit code 2.
    Input(String),
    /// A check failed; the payload is still reported and the exit code is 1.
    Failed(Map<String, Value>),
}

impl From<olp_core::Error> for CliError {
    fn from(e: olp_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "olp", version, about = "Limited-perception game solver")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Report destination (the reduced game file for `reduce`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Axioms,
    ConstantGap,
    NarrowlyReversible,
    StackelbergGap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perceive every matrix of the game file at a capability level.
    Perceive {
        #[arg(long)]
        game: PathBuf,
        /// Positive integer or `inf`.
        #[arg(long)]
        level: String,
    },
    /// Closed-form payoff bounds of one player, at one strategy pair or along a sweep.
    Bounds {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        player: u8,
        /// Row strategy; ignored by sweeps.
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: String,
        /// Sweep the row strategy over a simplex grid of this resolution.
        #[arg(long)]
        sweep: Option<usize>,
    },
    /// Maximin strategy of the lower-capability player.
    Maximin {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The higher-capability player's best response to a row strategy.
    BestResponse {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        x: String,
        /// Table id, or index into an enumerated narrow set; defaults to the row player's view.
        #[arg(long)]
        perception_id: Option<String>,
    },
    /// Numerical check of a structural property.
    Check {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Search and verify an equilibrium of a game with an enumerable narrow set.
    Equilibrium {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = olp_core::equilibrium::DEFAULT_GRID_RESOLUTION)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
    },
    /// Compact response representation of a found equilibrium.
    CompactRepr {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        /// Column-player slack granted to the oracle; family default when absent.
        #[arg(long)]
        eps_prime: Option<f64>,
        #[arg(long, default_value_t = olp_core::equilibrium::DEFAULT_GRID_RESOLUTION)]
        grid: usize,
        /// Evaluate the representation at this table id or narrow-set index.
        #[arg(long)]
        eval_perception: Option<String>,
    },
    /// Reduce a general-sum table game to a zero-sum one, written to `--out`.
    Reduce {
        #[arg(long)]
        game: PathBuf,
    },
    /// Sampled payoff extremes against the closed-form bounds.
    Oracle {
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Perceive { .. } => "perceive",
            Command::Bounds { .. } => "bounds",
            Command::Maximin { .. } => "maximin",
            Command::BestResponse { .. } => "best-response",
            Command::Check { .. } => "check",
            Command::Equilibrium { .. } => "equilibrium",
            Command::CompactRepr { .. } => "compact-repr",
            Command::Reduce { .. } => "reduce",
            Command::Oracle { .. } => "oracle",
        }
    }

    fn game(&self) -> &PathBuf {
        match self {
            Command::Perceive { game, .. }
            | Command::Bounds { game, .. }
            | Command::Maximin { game, .. }
            | Command::BestResponse { game, .. }
            | Command::Check { game, .. }
            | Command::Equilibrium { game, .. }
            | Command::CompactRepr { game, .. }
            | Command::Reduce { game }
            | Command::Oracle { game, .. } => game,
        }
    }

    /// The seed of a randomized command, or `None` for deterministic ones.
    fn seed(&self) -> Option<Option<u64>> {
        match self {
            Command::Maximin { seed, .. } | Command::Check { seed, .. } | Command::Oracle { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Output of one invocation before it is written anywhere.
pub struct Outcome {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

/// Runs one command line, writing reports to stdout or `--out` and diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = execute(args);
    std::io::stdout().write_all(&outcome.stdout).ok();
    std::io::stderr().write_all(&outcome.stderr).ok();
    outcome.code
}

/// Runs one command line and captures what it would print.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string().into_bytes();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: Vec::new() }
            } else {
                Outcome { code, stdout: Vec::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli, &args) {
        Ok(out) => out,
        Err(msg) => Outcome { code: 2, stdout: Vec::new(), stderr: format!("error: {msg}\n").into_bytes() },
    }
}

fn ci_mode() -> bool {
    std::env::var(CI_ENV).is_ok_and(|v| v == "1")
}

fn dispatch(cli: &Cli, args: &[OsString]) -> Result<Outcome, String> {
    let started = Instant::now();
    let seed = match cli.command.seed() {
        Some(None) if ci_mode() => {
            return Err(format!("{} needs an explicit --seed when {CI_ENV}=1", cli.command.name()));
        }
        Some(s) => Some(s.unwrap_or(0)),
        None => None,
    };
    let path = cli.command.game();
    let text = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let text_str = String::from_utf8(text.clone()).map_err(|_| format!("{}: not UTF-8", path.display()))?;
    let digest = inputs_digest(args, &text);
    let loaded = game_file::parse_game(&text_str, &path.display().to_string()).map_err(|e| match e {
        CliError::Input(msg) => msg,
        CliError::Failed(_) => unreachable!("parsing reports input errors only"),
    })?;

    let mut side_file = None;
    let result = match &cli.command {
        Command::Reduce { .. } => {
            let Some(out) = &cli.out else { return Err("reduce needs --out for the reduced game file".into()) };
            commands::reduce(&loaded).map(|(payload, file)| {
                side_file = Some((out.clone(), file));
                payload
            })
        }
        command => commands::run(command, &loaded, seed.unwrap_or(0)),
    };
    let (code, payload) = match result {
        Ok(p) => (0, p),
        Err(CliError::Failed(p)) => (1, p),
        Err(CliError::Input(msg)) => return Err(msg),
    };
    let elapsed = if ci_mode() { 0 } else { started.elapsed().as_millis() };
    let report = report::envelope(cli.command.name(), &digest, seed, payload, elapsed);
    let body = match cli.format {
        Format::Json => report::to_json(&report),
        Format::Csv => match commands::sweep_table(&report) {
            Some((header, rows)) => report::to_table_csv(&header, &rows),
            None => report::to_flat_csv(&report),
        },
    };
    let mut stdout = Vec::new();
    match (side_file, &cli.out) {
        (Some((path, file)), _) => {
            std::fs::write(&path, file).map_err(|e| format!("{}: {e}", path.display()))?;
            stdout = body.into_bytes();
        }
        (None, Some(path)) => std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?,
        (None, None) => stdout = body.into_bytes(),
    }
    Ok(Outcome { code, stdout, stderr: Vec::new() })
}

/// Digest of the command line with the game path replaced by the file contents and the
/// output path dropped.
fn inputs_digest(args: &[OsString], game: &[u8]) -> String {
    let mut parts: Vec<Vec<u8>> = Vec::new();
    let mut skip_next = false;
    let mut game_next = false;
    for a in args.iter().skip(1) {
        let s = a.to_string_lossy();
        if skip_next {
            skip_next = false;
            continue;
        }
        if game_next {
            game_next = false;
            parts.push(game.to_vec());
            continue;
        }
        match s.as_ref() {
            "--out" => skip_next = true,
            "--game" => {
                parts.push(b"--game".to_vec());
                game_next = true;
            }
            _ if s.starts_with("--out=") => {}
            _ if s.starts_with("--game=") => {
                parts.push(b"--game".to_vec());
                parts.push(game.to_vec());
            }
            _ => parts.push(s.as_bytes().to_vec()),
        }
    }
    report::digest(parts.iter().map(Vec::as_slice))
}
