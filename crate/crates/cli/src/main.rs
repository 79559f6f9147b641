//! `sphere-periods`: constants, seeded checks, orbit export and replay.
//!
//! Data (JSON reports, CSV orbits) goes to stdout or `--out`; diagnostics go
//! to stderr. Exit status is 0 when the check passes, 1 when it fails and 2
//! for usage or configuration errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use sphere_periods::lab::{
    replay, run_check, CheckConfig, CheckId, VerificationReport, CLOSED_FORM_TOLERANCE, DEFAULT_BUDGET,
    OPTIMIZER_TOLERANCE,
};
use sphere_periods::{extremal_lengths, orbit, MapSpec, PeriodicMap, SpherePoint};

#[derive(Parser)]
#[command(name = "sphere-periods", version, about = "Orbits of periodic maps of spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print rho_p, d_p, t_n and delta_n as JSON.
    Constants {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
    },
    /// Run one seeded check and emit its report.
    Check {
        #[arg(long)]
        id: CheckId,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Non-asserting scan of projective conjugates against d_p.
    Scan {
        /// Also report the simplex statistics of the open question.
        #[arg(long)]
        question: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Export the orbit of a point under a map as CSV.
    Orbit {
        /// JSON map specification.
        #[arg(long)]
        map: PathBuf,
        /// Comma-separated coordinates of the base point.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the witnesses of a stored report.
    Replay {
        #[arg(long)]
        report: PathBuf,
        /// Also rerun the stored configuration and compare verdicts.
        #[arg(long)]
        rerun: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = CLOSED_FORM_TOLERANCE)]
    closed_form_tolerance: f64,
    #[arg(long, default_value_t = OPTIMIZER_TOLERANCE)]
    optimizer_tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self, id: CheckId) -> CheckConfig {
        let mut cfg = CheckConfig::new(id, self.n, self.p, self.samples, self.seed).with_budget(self.budget);
        cfg.closed_form_tolerance = self.closed_form_tolerance;
        cfg.optimizer_tolerance = self.optimizer_tolerance;
        cfg
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Constants { p, n } => {
            let lengths = extremal_lengths(p, n)?;
            emit(None, &serde_json::to_string_pretty(&lengths)?)?;
            Ok(Outcome::Pass)
        }
        Command::Check { id, run } => run_report(run.config(id), run.out.as_deref()),
        Command::Scan { question, run } => {
            let id = if question {
                CheckId::Question
            } else {
                CheckId::Conjecture
            };
            run_report(run.config(id), run.out.as_deref())
        }
        Command::Orbit { map, x, out } => {
            let text = fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
            let spec: MapSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", map.display()))?;
            let h = PeriodicMap::from_spec(&spec)?;
            let coords = parse_coords(&x)?;
            let x = SpherePoint::from_slice(&coords)?;
            let o = orbit(&h, &x)?;
            let mut csv = Vec::new();
            o.write_csv(&mut csv)?;
            emit(out.as_deref(), &String::from_utf8(csv)?)?;
            Ok(Outcome::Pass)
        }
        Command::Replay { report, rerun, out } => {
            let text = fs::read_to_string(&report).with_context(|| format!("reading {}", report.display()))?;
            let stored: VerificationReport =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", report.display()))?;
            let outcome = replay(&stored, rerun)?;
            for w in outcome.witnesses.iter().filter(|w| !w.ok) {
                eprintln!(
                    "mismatch: {} stored {} recomputed {:?}",
                    w.label, w.stored, w.recomputed
                );
            }
            emit(out.as_deref(), &serde_json::to_string_pretty(&outcome)?)?;
            Ok(if outcome.ok { Outcome::Pass } else { Outcome::Fail })
        }
    }
}

fn run_report(cfg: CheckConfig, out: Option<&Path>) -> anyhow::Result<Outcome> {
    let report = run_check(&cfg)?;
    eprintln!(
        "{} n={} p={} samples={}: pass={} min_margin={:e} ({} ms)",
        report.check_id, cfg.n, cfg.p, cfg.samples, report.pass, report.min_margin, report.runtime_ms
    );
    emit(out, &serde_json::to_string_pretty(&report)?)?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

fn parse_coords(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad coordinate {c:?}: {e}"))
        })
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, format!("{}\n", text.trim_end())).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{}", text.trim_end())?;
            Ok(())
        }
    }
}
