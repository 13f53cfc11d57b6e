//! Command-line front end. Reports go to stdout (or `--out`) as JSON in the
//! same grammar as the inputs; a short human summary goes to stderr.
//!
//! Exit codes: 0 success, 2 input error, 3 convergence failure, 4 incomplete
//! r-SE basis.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::format::{self, density_value, observable_value, operation_value, pure_value, render, vector_value};
use crate::hilbert::{self, BipartiteDims, BipartitePureState, DensityOperator, Observable};
use crate::linalg::{self, CMat, CVec};
use crate::locc::OpClass;
use crate::measure_props::{self, PropertyReport, Samplers};
use crate::quasiprob::{self, LevelOutcome, QuasiProbability};
use crate::se_solver::{self, SolverConfig};
use crate::witness::{self, Frame, OperationSampler, SearchConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_INCOMPLETE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "schmidt", version, about = "Schmidt-number witnesses, quasi-probabilities and entanglement measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CommonArgs {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,
    #[arg(long = "max-iter", global = true, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long = "tol-lambda", global = true, default_value_t = 1e-10)]
    pub tol_lambda: f64,
    #[arg(long = "tol-residual", global = true, default_value_t = 1e-8)]
    pub tol_residual: f64,
    /// Cross-check against the sampling oracle with this many samples.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "10000")]
    pub oracle: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write a run manifest for `replay`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

impl CommonArgs {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol_lambda: self.tol_lambda,
            tol_residual: self.tol_residual,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
pub enum MeasureName {
    Schmidt,
    Purity,
    Marginal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Pure,
    Rank,
    Phi,
    Singlet,
    Density,
    Separable,
    NoisyPhi,
    Observable,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt decomposition of a pure state.
    Schmidt {
        state: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
    },
    /// Largest r-SE of an observable, a lower bound on f12^(r).
    F12 {
        observable: PathBuf,
        #[arg(long)]
        rank: usize,
    },
    /// Schmidt-number certificate tr(rho L) > f12^(r)(L).
    Witness {
        state: PathBuf,
        observable: PathBuf,
        #[arg(long)]
        rank: usize,
    },
    /// Entanglement quasi-probability at one level, or the Schmidt-number readout.
    Quasiprob {
        state: PathBuf,
        #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
        rank: Option<usize>,
        #[arg(long)]
        auto: bool,
    },
    /// Lower bound on the partial-transpose pseudo-measure.
    Ept {
        state: PathBuf,
        #[arg(long, default_value_t = 64)]
        li_samples: usize,
        #[arg(long, default_value_t = 32)]
        lp_samples: usize,
    },
    /// Operational measure E_M over a sampled operation class.
    Em {
        state: PathBuf,
        observable: PathBuf,
        #[arg(long = "class", default_value = "GENERAL")]
        class: OpClass,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// Measure-axiom property harness.
    Props {
        #[arg(long, value_enum, default_value = "schmidt")]
        measure: MeasureName,
        #[arg(long = "class", default_value = "GENERAL")]
        class: OpClass,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "2x2,2x3")]
        dims: Vec<String>,
    },
    /// Generate a state or observable file.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value = "2x2")]
        dims: String,
        /// Schmidt rank for `rank` and `phi`.
        #[arg(long)]
        rank: Option<usize>,
        /// Number of mixed components for `density` and `separable`.
        #[arg(long, default_value_t = 2)]
        mix: usize,
        /// Weight of `|phi⟩` in `noisy-phi`.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub solver: SolverConfig,
    pub seed: u64,
    pub version: String,
    pub wall_time_seconds: f64,
}

fn parse_dims(s: &str) -> Result<BipartiteDims> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| Error::Parse(format!("dims \"{s}\": expected D1xD2")))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("dims \"{s}\": not an integer")));
    BipartiteDims::new(p(a)?, p(b)?)
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn lower_bound_note() -> Value {
    json!("search-based value; certified lower bound")
}

fn quasiprob_value(qp: &QuasiProbability) -> Value {
    let pseudo = quasiprob::pseudomixture(qp).ok().map(|pm| {
        json!({
            "mu": pm.mu,
            "sigma": density_value(&pm.sigma),
            "sigma_prime": pm.sigma_prime.as_ref().map(density_value),
        })
    });
    json!({
        "r": qp.r,
        "succeeded": qp.succeeded(),
        "reconstruction_residual": qp.reconstruction_residual,
        "min_weight": qp.min_weight,
        "weight_sum": qp.weight_sum(),
        "nonnegative_fit": qp.nonnegative_fit,
        "solutions_found": qp.solutions_found,
        "lambdas": qp.lambdas,
        "gram": (0..qp.gram.nrows()).map(|i| (0..qp.gram.ncols()).map(|j| qp.gram[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "components": qp.components.iter().map(|c| json!({"weight": c.weight, "chi": pure_value(&c.chi)})).collect::<Vec<_>>(),
        "pseudomixture": pseudo,
    })
}

fn property_value(r: &PropertyReport) -> Value {
    json!({
        "measure": r.measure,
        "verdict": r.verdict,
        "checks_run": r.checks_run,
        "skipped": r.skipped,
        "max_deficit": r.max_deficit,
        "slack": r.slack,
        "violations": r.violations.iter().map(|v| json!({
            "kind": v.kind,
            "trial": v.trial,
            "seed": v.seed,
            "before": v.before,
            "after": v.after,
            "deficit": v.deficit,
            "state": density_value(&v.state),
            "operation": v.operation.as_ref().map(operation_value),
        })).collect::<Vec<_>>(),
    })
}

/// Outcome of one command: report, summary line and exit code.
struct Outcome {
    report: Value,
    summary: String,
    code: i32,
}

impl Outcome {
    fn ok(report: Value, summary: String) -> Self {
        Self { report, summary, code: EXIT_OK }
    }
}

fn execute(command: &Command, common: &CommonArgs) -> Result<Outcome> {
    let cfg = common.solver();
    cfg.validate()?;
    match command {
        Command::Schmidt { state, cutoff } => {
            let psi = format::parse_pure(&read(state)?)?;
            let dec = hilbert::schmidt_decompose(&psi, *cutoff)?;
            let report = json!({
                "command": "schmidt",
                "rank": dec.rank,
                "coefficients": dec.coefficients,
                "left_basis": (0..dec.rank).map(|n| vector_value(&dec.left_basis.column(n).into_owned())).collect::<Vec<_>>(),
                "right_basis": (0..dec.rank).map(|n| vector_value(&dec.right_basis.column(n).into_owned())).collect::<Vec<_>>(),
            });
            Ok(Outcome::ok(report, format!("Schmidt rank {}", dec.rank)))
        }
        Command::F12 { observable, rank } => {
            let l = format::parse_observable(&read(observable)?)?;
            let report = se_solver::f12_r_report(&l, *rank, &cfg)?;
            let f12 = report.max_lambda();
            let oracle = match common.oracle {
                Some(n) => {
                    let o = se_solver::oracle_f12_r(&l, *rank, n, common.seed)?;
                    Some(json!({"samples": n, "value": o, "consistent": f12 >= o - 1e-8}))
                }
                None => None,
            };
            let value = json!({
                "command": "f12",
                "rank": rank,
                "f12_r": f12,
                "f_max": se_solver::f_max(&l),
                "note": lower_bound_note(),
                "restarts": report.restarts,
                "converged_restarts": report.converged_restarts,
                "trajectories": report.trajectories,
                "converged_trajectories": report.converged_trajectories,
                "total_iterations": report.total_iterations,
                "solutions": report.solutions.iter().map(|s| json!({
                    "lambda": s.lambda,
                    "residual": s.residual,
                    "iterations": s.iterations,
                    "state": pure_value(&s.state),
                })).collect::<Vec<_>>(),
                "oracle": oracle,
            });
            Ok(Outcome::ok(value, format!("f12^({rank}) = {f12:.12}")))
        }
        Command::Witness { state, observable, rank } => {
            let rho = format::parse_density(&read(state)?)?;
            let l = format::parse_observable(&read(observable)?)?;
            let cert = witness::certify_schmidt_number(&rho, &l, *rank, &cfg, common.oracle)?;
            let report = json!({
                "command": "witness",
                "r": cert.r,
                "verdict": cert.verdict,
                "expectation_value": cert.expectation_value,
                "f12_r_value": cert.f12_r_value,
                "oracle_value": cert.oracle_value,
                "margin": cert.margin,
                "threshold": witness::CERTIFICATION_THRESHOLD,
                "restarts": cert.restarts,
                "converged_restarts": cert.converged_restarts,
                "observable": observable_value(&cert.observable),
            });
            Ok(Outcome::ok(report, format!("{:?}, margin {:.6}", cert.verdict, cert.margin)))
        }
        Command::Quasiprob { state, rank, auto } => {
            let rho = format::parse_density(&read(state)?)?;
            if *auto {
                let est = quasiprob::estimate_schmidt_number(&rho, &cfg)?;
                let report = json!({
                    "command": "quasiprob",
                    "schmidt_number": est.value,
                    "lower": est.lower,
                    "upper": est.upper,
                    "levels": est.levels.iter().map(|(r, o)| json!({
                        "r": r,
                        "outcome": match o {
                            LevelOutcome::Complete(_) => "complete",
                            LevelOutcome::Incomplete(_) => "incomplete",
                            LevelOutcome::Unconfirmed(_) => "unconfirmed",
                        },
                        "distribution": quasiprob_value(o.distribution()),
                    })).collect::<Vec<_>>(),
                });
                let code = if est.value.is_some() { EXIT_OK } else { EXIT_INCOMPLETE };
                let summary = match est.value {
                    Some(v) => format!("Schmidt number {v}"),
                    None => format!("Schmidt number in [{}, {}]", est.lower, est.upper),
                };
                return Ok(Outcome { report, summary, code });
            }
            let r = rank.expect("clap enforces --rank or --auto");
            match quasiprob::build_quasiprob(&rho, r, &cfg) {
                Ok(qp) => {
                    let summary = format!("r={r}: min weight {:.3e}", qp.min_weight);
                    Ok(Outcome::ok(json!({"command": "quasiprob", "distribution": quasiprob_value(&qp)}), summary))
                }
                Err(Error::IncompleteBasis { level, residual, partial }) => Ok(Outcome {
                    report: json!({"command": "quasiprob", "distribution": quasiprob_value(&partial)}),
                    summary: format!("incomplete r-SE basis at r={level}, residual {residual:.3e}"),
                    code: EXIT_INCOMPLETE,
                }),
                Err(e) => Err(e),
            }
        }
        Command::Ept { state, li_samples, lp_samples } => {
            let rho = format::parse_density(&read(state)?)?;
            let search = SearchConfig {
                seed: common.seed,
                li_samples: *li_samples,
                lp_samples: *lp_samples,
                ..SearchConfig::default()
            };
            let e = witness::e_pt_lower_bound(&rho, &search)?;
            let npt = witness::is_npt(&rho);
            let report = json!({
                "command": "ept",
                "value": e.value,
                "raw": e.raw,
                "best_r": e.best_r,
                "note": lower_bound_note(),
                "best_operation": operation_value(&e.best_operation),
                "npt": npt.npt,
                "min_pt_eigenvalue": npt.min_eigenvalue,
            });
            Ok(Outcome::ok(report, format!("E_PT >= {:.6}", e.value)))
        }
        Command::Em { state, observable, class, count } => {
            let rho = format::parse_density(&read(state)?)?;
            let m = format::parse_observable(&read(observable)?)?;
            let sampler = OperationSampler::Sampled {
                class: *class,
                count: *count,
                seed: common.seed,
                include_identity: true,
            };
            let r = witness::operational_measure(&rho, &m, &sampler, Frame::Input, &cfg)?;
            let report = json!({
                "command": "em",
                "class": class,
                "value": r.value,
                "raw_supremum": r.raw_supremum,
                "f_m": r.f_m,
                "f12_m": r.f12_m,
                "note": lower_bound_note(),
                "best_operation": r.best_operation.as_ref().map(operation_value),
            });
            Ok(Outcome::ok(report, format!("E_M >= {:.6}", r.value)))
        }
        Command::Props { measure, class, n, dims } => {
            let dims = dims.iter().map(|s| parse_dims(s)).collect::<Result<Vec<_>>>()?;
            let m = match measure {
                MeasureName::Schmidt => measure_props::schmidt_number_measure(cfg.clone()),
                MeasureName::Purity => measure_props::purity_measure(),
                MeasureName::Marginal => measure_props::marginal_purity_deficit(),
            };
            let mut samplers = Samplers::standard(dims);
            samplers.operations = Samplers::class_operations(*class);
            let slack = measure_props::DEFAULT_SLACK;
            let axioms = measure_props::check_measure_axioms(&m, &samplers, *n, common.seed, slack);
            let average = measure_props::check_average_monotonicity(&m, &samplers, *n, common.seed, slack);
            let summary = format!("axioms {:?}, average {:?}", axioms.verdict, average.verdict);
            let report = json!({
                "command": "props",
                "class": class,
                "n": n,
                "axioms": property_value(&axioms),
                "average": property_value(&average),
            });
            Ok(Outcome::ok(report, summary))
        }
        Command::Gen { kind, dims, rank, mix, p } => {
            let dims = parse_dims(dims)?;
            let seed = common.seed;
            let value = match kind {
                GenKind::Pure => pure_value(&hilbert::random_pure(dims, seed)),
                GenKind::Rank => pure_value(&hilbert::random_pure_with_rank(dims, rank.unwrap_or(dims.min()), seed)?),
                GenKind::Phi => pure_value(&hilbert::phi_r(rank.unwrap_or(dims.min()), dims)?),
                GenKind::Singlet => {
                    if dims.min() < 2 {
                        return Err(Error::OutOfRange { what: "dims", detail: "singlet needs both dimensions >= 2".into() });
                    }
                    let mut v = CVec::zeros(dims.total());
                    v[dims.index(0, 1)] = linalg::real(1.0);
                    v[dims.index(1, 0)] = linalg::real(-1.0);
                    pure_value(&BipartitePureState::normalized(dims, v)?)
                }
                GenKind::Density => density_value(&hilbert::random_density(dims, seed, *mix)),
                GenKind::Separable => density_value(&hilbert::random_separable(dims, seed, *mix)),
                GenKind::NoisyPhi => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::OutOfRange { what: "p", detail: format!("{p} not in [0, 1]") });
                    }
                    let phi = hilbert::phi_r(rank.unwrap_or(dims.min()), dims)?.density();
                    let mixed = DensityOperator::maximally_mixed(dims);
                    density_value(&DensityOperator::mixture(&[(*p, &phi), (1.0 - p, &mixed)])?)
                }
                GenKind::Observable => {
                    let mut rng = hilbert::rng_from(seed);
                    let n = dims.total();
                    let g = CMat::from_fn(n, n, |_, _| hilbert::gaussian_vector(&mut rng, 1)[0]);
                    observable_value(&Observable::new(dims, linalg::hermitian_part(&g))?)
                }
            };
            Ok(Outcome::ok(value, format!("generated {kind:?} on {dims}")))
        }
        Command::Replay { .. } => unreachable!("handled before dispatch"),
    }
}

fn inputs_of(command: &Command) -> Vec<PathBuf> {
    match command {
        Command::Schmidt { state, .. } | Command::Quasiprob { state, .. } | Command::Ept { state, .. } => vec![state.clone()],
        Command::F12 { observable, .. } => vec![observable.clone()],
        Command::Witness { state, observable, .. } | Command::Em { state, observable, .. } => {
            vec![state.clone(), observable.clone()]
        }
        Command::Replay { manifest } => vec![manifest.clone()],
        Command::Props { .. } | Command::Gen { .. } => Vec::new(),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Schmidt { .. } => "schmidt",
        Command::F12 { .. } => "f12",
        Command::Witness { .. } => "witness",
        Command::Quasiprob { .. } => "quasiprob",
        Command::Ept { .. } => "ept",
        Command::Em { .. } => "em",
        Command::Props { .. } => "props",
        Command::Gen { .. } => "gen",
        Command::Replay { .. } => "replay",
    }
}

/// Drops `--manifest`/`--out` and their values so a replay writes where the
/// replaying call asks.
fn replayable_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--manifest" || a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--manifest=") || a.starts_with("--out=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };

    if let Command::Replay { manifest } = &cli.command {
        let m: RunManifest = match read(manifest).and_then(|t| serde_json::from_str(&t).map_err(|e| Error::Parse(e.to_string()))) {
            Ok(m) => m,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return e.exit_code();
            }
        };
        let mut replay = m.args.clone();
        if let Some(out) = &cli.common.out {
            replay.push("--out".into());
            replay.push(out.display().to_string());
        }
        return run(replay, stdout, stderr);
    }

    let start = Instant::now();
    let result = execute(&cli.command, &cli.common);
    let code = match result {
        Ok(outcome) => {
            let text = render(&outcome.report);
            let written = match &cli.common.out {
                Some(path) => std::fs::write(path, &text).map_err(Error::from),
                None => stdout.write_all(text.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return e.exit_code();
            }
            let _ = writeln!(stderr, "{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    };

    if let Some(path) = &cli.common.manifest {
        let manifest = RunManifest {
            command: command_name(&cli.command).to_string(),
            args: replayable_args(&args),
            inputs: inputs_of(&cli.command),
            solver: cli.common.solver(),
            seed: cli.common.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: start.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest is serializable");
        if let Err(e) = std::fs::write(path, text + "\n") {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().map(|s| s.to_string()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn gen_then_schmidt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.json");
        let (code, text, _) = run_capture(&["schmidt", "gen", "--kind", "phi", "--dims", "2x2"]);
        assert_eq!(code, 0);
        std::fs::write(&path, text).unwrap();
        let (code, text, _) = run_capture(&["schmidt", "schmidt", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rank"], 2);
        assert!((v["coefficients"][0].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn missing_file_is_input_error() {
        let (code, _, err) = run_capture(&["schmidt", "schmidt", "/nonexistent/state.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("error"));
    }

    #[test]
    fn bad_flag_is_input_error() {
        assert_eq!(run_capture(&["schmidt", "f12"]).0, 2);
        assert_eq!(run_capture(&["schmidt", "gen", "--kind", "pure", "--dims", "2y2"]).0, 2);
    }

    #[test]
    fn dims_parsing() {
        assert_eq!(parse_dims("3x4").unwrap(), BipartiteDims::new(3, 4).unwrap());
        assert!(parse_dims("3").is_err());
    }
}
