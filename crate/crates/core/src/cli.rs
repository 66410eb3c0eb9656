//! Command-line front end. Exit codes: 0 all checks pass, 1 a check failed,
//! 2 bad input or usage.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bb84::{
    build_conjugate_pair, named_attack_for, norm_bound_check, posterior_invariant, theorem3_check,
    AttackKind, ConjugateDef, MUB_TOL, THEOREM3_SLACK,
};
use crate::protocol::{run_tradeoff, TRADEOFF_SLACK};
use crate::report::{Check, Report};
use crate::scenario::{parse_attack_kind, InputError, NamedParams, ScenarioFile};
use crate::selftest::{run_selftest, Execution};
use crate::steering::{verify_theorem1, SteeringContext, STEERING_TOL};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "infodist",
    version,
    about = "Steering, uncertainty and eavesdropping checks"
)]
struct Cli {
    /// Seed for every randomized step; falls back to the scenario's own seed, then 0.
    #[arg(long, global = true, env = "INFODIST_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that steering measurements prepare both ensembles of a scenario.
    SteerVerify {
        #[arg(required_unless_present = "gen", conflicts_with = "gen")]
        path: Option<PathBuf>,
        /// Use a random scenario of this dimension instead of a file.
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=8))]
        gen: Option<u32>,
        /// Acceptance threshold for every error.
        #[arg(long, default_value_t = STEERING_TOL)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate Bob's and Eve's information and check the trade-off bound.
    Tradeoff {
        path: PathBuf,
        /// Random restarts per information estimate; overrides the scenario's budget.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Conjugate coding on n qubits: Eve's information against error randomness.
    Bb84 {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=3))]
        n: u32,
        /// identity, intercept_resend, cnot_clone, partial_entangle, swap or depolarizing_swap.
        #[arg(long, default_value = "intercept_resend")]
        attack: String,
        /// Basis copied by intercept_resend: a or b.
        #[arg(long)]
        basis: Option<String>,
        /// Rotation angle for partial_entangle.
        #[arg(long, conflicts_with = "theta_sweep")]
        theta: Option<String>,
        /// `start:stop:count`, endpoints inclusive; accepts forms like `pi/2` and `3pi/8`.
        #[arg(long)]
        theta_sweep: Option<String>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the sweep table here (columns theta, i_ae_lower, h_error, margin).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the randomized property batteries.
    Selftest {
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Run trials on one thread.
        #[arg(long)]
        serial: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let seed = cli.seed;
    let result = match cli.command {
        Command::SteerVerify {
            path,
            gen,
            tolerance,
            out,
        } => steer_verify(path.as_deref(), gen, seed, tolerance, out.as_deref()),
        Command::Tradeoff { path, budget, out } => tradeoff(&path, budget, seed, out.as_deref()),
        Command::Bb84 {
            n,
            attack,
            basis,
            theta,
            theta_sweep,
            budget,
            out,
            csv,
        } => bb84(Bb84Args {
            n: n as usize,
            attack,
            basis,
            theta,
            theta_sweep,
            budget: budget as usize,
            seed: seed.unwrap_or(0),
            out,
            csv,
        }),
        Command::Selftest {
            trials,
            serial,
            out,
        } => selftest(seed.unwrap_or(0), trials as usize, serial, out.as_deref()),
    };
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Input(format!("cannot write output: {e}")))
        }
    }
}

fn finish(report: &Report, out: Option<&Path>) -> Outcome {
    emit(&report.to_json(), out)?;
    if out.is_some() {
        let failed = report.checks.iter().filter(|c| !c.passed()).count();
        eprintln!(
            "{}: {} checks, {} failed",
            report.command,
            report.checks.len(),
            failed
        );
    }
    Ok(report.pass)
}

fn steer_verify(
    path: Option<&Path>,
    gen: Option<u32>,
    seed: Option<u64>,
    tol: f64,
    out: Option<&Path>,
) -> Outcome {
    let file = match (path, gen) {
        (Some(p), _) => ScenarioFile::load(p)?,
        (None, Some(d)) => ScenarioFile::generate(d as usize, seed.unwrap_or(0))?,
        (None, None) => {
            return Err(Failure::Input(
                "a scenario path or --gen is required".into(),
            ))
        }
    };
    let seed = seed.unwrap_or(file.seed);
    let (x, y) = file.ensembles()?;
    let rho = x.average().clone();
    let strict = rho.rank() == rho.dim();
    let ctx = SteeringContext::new(rho)?;
    let mut report = Report::new(
        "steer-verify",
        seed,
        serde_json::to_value(&file).expect("plain data"),
    );
    for (label, ens) in [("x", &x), ("y", &y)] {
        let r = verify_theorem1(&ctx, ens, strict)?;
        report.push(Check::small(
            format!("{label}/completeness"),
            r.completeness_error,
            tol,
        ));
        report.push(Check::small(
            format!("{label}/probabilities"),
            r.max_prob_error(),
            tol,
        ));
        report.push(Check::small(
            format!("{label}/states"),
            r.max_state_error(),
            tol,
        ));
    }
    report.details = json!({ "full_rank": strict });
    finish(&report, out)
}

fn tradeoff(path: &Path, budget: Option<u64>, seed: Option<u64>, out: Option<&Path>) -> Outcome {
    let file = ScenarioFile::load(path)?;
    let sc = file.build()?;
    let seed = seed.unwrap_or(file.seed);
    let budget = budget.map(|b| b as usize).unwrap_or(file.budget);
    let r = run_tradeoff(&sc, budget, seed)?;
    let mut report = Report::new(
        "tradeoff",
        seed,
        serde_json::to_value(&file).expect("plain data"),
    );
    report.push(Check::le(
        "i_xb+i_ye",
        r.i_xb + r.i_ye,
        r.bound_bits,
        TRADEOFF_SLACK,
    ));
    report.push(Check::le(
        "i_xe+i_yb",
        r.i_xe + r.i_yb,
        r.bound_bits,
        TRADEOFF_SLACK,
    ));
    report.details = serde_json::to_value(&r).expect("plain data");
    finish(&report, out)
}

struct Bb84Args {
    n: usize,
    attack: String,
    basis: Option<String>,
    theta: Option<String>,
    theta_sweep: Option<String>,
    budget: usize,
    seed: u64,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
}

/// `pi`, `pi/2`, `3pi/8`, `3*pi/8`, `0.25`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let t = text.trim().to_lowercase().replace('*', "");
    if let Some(pos) = t.find("pi") {
        let coef = &t[..pos];
        let coef: f64 = if coef.is_empty() {
            1.0
        } else {
            coef.parse().ok()?
        };
        let rest = &t[pos + 2..];
        let div: f64 = match rest.strip_prefix('/') {
            Some(d) => d.parse().ok()?,
            None if rest.is_empty() => 1.0,
            None => return None,
        };
        Some(coef * std::f64::consts::PI / div)
    } else {
        t.parse().ok()
    }
}

/// `start:stop:count` with both endpoints included.
pub fn parse_sweep(text: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let start = parse_angle(parts[0])?;
    let stop = parse_angle(parts[1])?;
    let count: usize = parts[2].trim().parse().ok()?;
    match count {
        0 => None,
        1 => Some(vec![start]),
        _ => Some(
            (0..count)
                .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
                .collect(),
        ),
    }
}

#[derive(Serialize)]
struct CsvRow {
    theta: Option<f64>,
    i_ae_lower: f64,
    h_error: f64,
    margin: f64,
}

fn bb84(a: Bb84Args) -> Outcome {
    let thetas: Vec<Option<f64>> = match (&a.theta, &a.theta_sweep) {
        (_, Some(s)) => {
            if a.attack != "partial_entangle" {
                return Err(Failure::Input(
                    "--theta-sweep applies to partial_entangle only".into(),
                ));
            }
            parse_sweep(s)
                .ok_or_else(|| {
                    Failure::Input(format!("bad sweep '{s}', expected start:stop:count"))
                })?
                .into_iter()
                .map(Some)
                .collect()
        }
        (Some(t), None) => vec![Some(
            parse_angle(t).ok_or_else(|| Failure::Input(format!("bad angle '{t}'")))?,
        )],
        (None, None) => vec![None],
    };
    let cp = build_conjugate_pair(a.n, ConjugateDef::Hadamard)?;
    let mut report = Report::new(
        "bb84",
        a.seed,
        json!({
            "n": a.n,
            "attack": a.attack,
            "basis": a.basis,
            "thetas": thetas,
            "budget": a.budget,
        }),
    );
    let nb = norm_bound_check(&cp)?;
    report.push(Check::le("norm_bound", nb.max_norm, nb.bound, MUB_TOL));

    let mut rows = Vec::new();
    let mut points = Vec::new();
    let sweep = thetas.len() > 1;
    for (k, theta) in thetas.iter().enumerate() {
        let params = NamedParams {
            theta: *theta,
            basis: a.basis.clone(),
        };
        let kind = parse_attack_kind(&a.attack, &params)?;
        let attack = named_attack_for(kind, &cp)?;
        let r = theorem3_check(&cp, &attack, a.budget, a.seed.wrapping_add(2 * k as u64))?;
        let inv = posterior_invariant(&cp, &attack, &r.direct.eve_povm)?;
        let prefix = if sweep {
            format!("point{k}/")
        } else {
            String::new()
        };
        report.push(Check::le(
            format!("{prefix}direct"),
            r.direct.i_ae_lower,
            r.direct.h_error,
            THEOREM3_SLACK,
        ));
        report.push(Check::le(
            format!("{prefix}mirrored"),
            r.mirrored.i_ae_lower,
            r.mirrored.h_error,
            THEOREM3_SLACK,
        ));
        report.push(Check::le(
            format!("{prefix}posterior"),
            inv.bound,
            inv.min_sum,
            MUB_TOL,
        ));
        let theta_value = match kind {
            AttackKind::PartialEntangle(t) => Some(t),
            _ => None,
        };
        rows.push(CsvRow {
            theta: theta_value,
            i_ae_lower: r.direct.i_ae_lower,
            h_error: r.direct.h_error,
            margin: r.direct.margin,
        });
        points.push(json!({ "theta": theta_value, "result": r, "posterior_min_sum": inv.min_sum }));
    }
    report.details = json!({ "norm_bound": nb, "points": points });

    if let Some(path) = &a.csv {
        write_csv(&rows, path)?;
    }
    finish(&report, a.out.as_deref())
}

fn write_csv(rows: &[CsvRow], path: &Path) -> Result<(), Failure> {
    let err = |e: csv::Error| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush()
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn selftest(seed: u64, trials: usize, serial: bool, out: Option<&Path>) -> Outcome {
    let exec = if serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let summary = run_selftest(seed, trials, exec)?;
    emit(&summary.to_json(), out)?;
    Ok(summary.pass)
}
