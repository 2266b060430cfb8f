//! Command-line front end. Exit codes: 0 success, 2 usage or validation
//! error, 3 when a solve does not converge or a verification fails.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::branes::involution_type_report;
use crate::error::{Error, Result};
use crate::geometry::{
    arm_side_length, higgs_data, nilpotency_defect, polygon_sides, residue_sum_check, sample_char_coefficients,
};
use crate::integrable::{
    commutation_matrix, corollary_set, evaluate_hamiltonian, gt_hamiltonians, independence_rank, Policy,
};
use crate::io::{
    load_quiver, load_solution, matrix_to_doc, stamp, to_json_string, PolygonSummary, QuiverDoc, SolutionDoc,
};
use crate::moment::{hyperpolygon_residual, wild_specialization_check, InteriorCounts};
use crate::quiver::{
    count_gt_hamiltonians, dim_hyperpolygon_space, dim_polygon_space, empty_likely, wildify, CometQuiver,
};
use crate::rep::seeded_rng;
use crate::solver::{dimension_report, solve, solve_polygon, DimensionReport, Solution, SolveOptions};

/// Environment variable giving the default worker-thread count.
pub const THREADS_ENV: &str = "HYPERPOLYGON_THREADS";

/// Relative size of the level perturbation tried after a singular solve.
pub const ALPHA_JITTER: f64 = 1e-3;
const JITTER_STREAM: u64 = 1 << 40;

#[derive(Debug, Parser)]
#[command(name = "hyperpolygon", version, about = "Comet quiver varieties: solve, verify and inspect hyperpolygons")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Predicted dimensions and Hamiltonian tally of a quiver.
    Dims { quiver: PathBuf },
    /// Solve the hyperpolygon equations.
    Solve(SolveArgs),
    /// Solve the polygon equations (y = b = 0).
    Polygon(SolveArgs),
    /// Re-check a solution document against the equations.
    Verify {
        solution: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Higgs residues, nilpotency and characteristic coefficients.
    Higgs {
        solution: PathBuf,
        /// Comma-separated punctures such as `0,1,2+0.5i`; defaults to 0, 1, ..., n-1.
        #[arg(long, allow_hyphen_values = true)]
        punctures: Option<String>,
        /// Number of sample points for characteristic coefficients.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gelfand-Tsetlin Hamiltonians: values, brackets and independence.
    Gt {
        solution: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::TallyGreedy)]
        policy: PolicyArg,
    },
    /// Classify the sign involution against I, J, K.
    Brane {
        quiver: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Merge identical arms into one wild arm; optionally check a tame solution on it.
    Wildify {
        quiver: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Corollary,
    TallyGreedy,
}

#[derive(Debug, Args)]
struct SolveArgs {
    quiver: PathBuf,
    /// Comma-separated positive levels, one per arm.
    #[arg(long, default_value = "")]
    alpha: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, default_value_t = 8)]
    starts: usize,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotConverged(_) | Error::NotOnShell(_) | Error::SingularPoint(_) | Error::Inconclusive(_) => 3,
        _ => 2,
    }
}

fn parse_alpha(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::InvalidLevel(format!("cannot parse {t:?}"))))
        .collect()
}

/// Parse `a`, `bi`, `a+bi` or `a-bi`.
fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidOption(format!("cannot parse complex number {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

fn emit<T: Serialize>(value: &T, out_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = to_json_string(value, true)?;
    match out_path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn stamped(mut v: Value, q: &CometQuiver, seed: Option<u64>) -> Value {
    v["stamp"] = serde_json::to_value(stamp(q, seed)).expect("stamps serialize");
    v
}

fn jittered(alpha: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed, JITTER_STREAM);
    alpha.iter().map(|a| a * (1.0 + ALPHA_JITTER * rng.random_range(-1.0..=1.0))).collect()
}

fn solution_doc(
    q: &CometQuiver,
    alpha: &[f64],
    sol: &Solution,
    polygon: bool,
    opts: &SolveOptions,
    dimension: Option<DimensionReport>,
) -> Result<SolutionDoc> {
    let mut doc = SolutionDoc::new(q, alpha, sol, if polygon { "polygon" } else { "hyperpolygon" }, opts);
    doc.dimension = dimension;
    if polygon {
        let fig = polygon_sides(q, &sol.representation)?;
        doc.polygon = Some(PolygonSummary {
            arm_lengths: fig.arm_lengths().to_vec(),
            loop_lengths: fig.loop_lengths().to_vec(),
            expected_arm_lengths: alpha.iter().map(|&a| arm_side_length(a, q.central_rank())).collect(),
            closure_defect: fig.closure_defect,
        });
    }
    Ok(doc)
}

fn cmd_solve(
    args: &SolveArgs,
    polygon: bool,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let q = load_quiver(&args.quiver)?;
    let alpha = parse_alpha(&args.alpha)?;
    let opts = SolveOptions {
        max_iterations: args.max_iter,
        tolerance: args.tol,
        starts: args.starts,
        seed: args.seed,
        ..Default::default()
    };
    let run = |a: &[f64]| if polygon { solve_polygon(&q, a, &opts) } else { solve(&q, a, &opts) };
    let first = match run(&alpha) {
        Ok(sol) => sol,
        Err(Error::NotConverged(best)) => {
            writeln!(err, "not converged: best aggregate residual {:.3e}", best.residual.aggregate)?;
            emit(&solution_doc(&q, &alpha, &best, polygon, &opts, None)?, out_path, out)?;
            return Ok(3);
        }
        Err(e) => return Err(e),
    };
    for w in &first.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let report = dimension_report(&q, &first.representation, &alpha)?;
    if !report.singular || alpha.is_empty() {
        emit(&solution_doc(&q, &alpha, &first, polygon, &opts, Some(report))?, out_path, out)?;
        return Ok(0);
    }
    writeln!(err, "singular point (rank gap {:.3e}); retrying at a jittered level", report.gap)?;
    let perturbed = jittered(&alpha, args.seed);
    if let Ok(sol) = run(&perturbed) {
        let retry = dimension_report(&q, &sol.representation, &perturbed)?;
        if !retry.singular {
            let mut doc = solution_doc(&q, &perturbed, &sol, polygon, &opts, Some(retry))?;
            doc.requested_alpha = Some(alpha.clone());
            emit(&doc, out_path, out)?;
            return Ok(0);
        }
    }
    writeln!(err, "jittered level is also singular; reporting the original solution")?;
    emit(&solution_doc(&q, &alpha, &first, polygon, &opts, Some(report))?, out_path, out)?;
    Ok(0)
}

fn cmd_dims(path: &Path, out_path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let q = load_quiver(path)?;
    let gt = count_gt_hamiltonians(&q).ok();
    let v = json!({
        "dim_P": dim_polygon_space(&q),
        "dim_X": dim_hyperpolygon_space(&q),
        "empty_likely": empty_likely(&q),
        "gt_count": gt,
        "gauge_dim": q.gauge_dim(),
        "interior_conditions": InteriorCounts { general: q.interior_node_count(), printed: q.printed_interior_node_count() },
        "quiver": QuiverDoc::from_quiver(&q),
    });
    emit(&stamped(v, &q, None), out_path, out)?;
    Ok(0)
}

fn cmd_verify(path: &Path, tol: f64, out_path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let doc = load_solution(path)?;
    let (q, rep) = doc.parts()?;
    let residual = hyperpolygon_residual(&q, &rep, &doc.alpha)?;
    let passed = residual.aggregate < tol;
    let v = json!({ "passed": passed, "tolerance": tol, "residual": residual });
    emit(&stamped(v, &q, doc.stamp.seed), out_path, out)?;
    if passed {
        Ok(0)
    } else {
        writeln!(err, "verification failed: aggregate residual {:.3e} >= {tol:.1e}", residual.aggregate)?;
        Ok(3)
    }
}

fn cmd_higgs(
    path: &Path,
    punctures: Option<&str>,
    samples: usize,
    seed: u64,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let doc = load_solution(path)?;
    let (q, rep) = doc.parts()?;
    let points: Vec<Complex64> = match punctures {
        Some(s) => s.split(',').filter(|t| !t.trim().is_empty()).map(parse_complex).collect::<Result<_>>()?,
        None => (0..q.n_arms()).map(|k| Complex64::new(k as f64, 0.0)).collect(),
    };
    let data = higgs_data(&q, &rep, &points)?;
    let expected: Vec<usize> = q.arms().iter().map(|f| f.len()).collect();
    let defects: Vec<f64> = data.residues.iter().zip(&expected).map(|(m, &p)| nilpotency_defect(m, p)).collect();
    let char_samples = if q.loops() == 0 {
        let mut rng = seeded_rng(seed, 0);
        let zs: Vec<Complex64> =
            (0..samples).map(|_| Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.5..3.0))).collect();
        Some(sample_char_coefficients(&data, &zs)?)
    } else {
        None
    };
    let v = json!({
        "punctures": data.punctures.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "residues": data.residues.iter().map(matrix_to_doc).collect::<Vec<_>>(),
        "loop_commutator_sum": matrix_to_doc(&data.loop_commutator_sum),
        "nilpotency_orders": data.nilpotency_orders,
        "expected_orders": expected,
        "nilpotency_defects": defects,
        "residue_sum_defect": residue_sum_check(&q, &rep)?,
        "char_samples": char_samples,
    });
    emit(&stamped(v, &q, doc.stamp.seed), out_path, out)?;
    Ok(0)
}

fn cmd_gt(
    path: &Path,
    policy: PolicyArg,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let doc = load_solution(path)?;
    let (q, rep) = doc.parts()?;
    let alpha = &doc.alpha;
    let policy = match policy {
        PolicyArg::Corollary => Policy::Corollary,
        PolicyArg::TallyGreedy => Policy::TallyGreedy,
    };
    let set = match gt_hamiltonians(&q, policy, Some((&rep, alpha))) {
        Ok(set) => set,
        Err(e @ (Error::NotOnShell(_) | Error::SingularPoint(_))) => {
            writeln!(err, "{e}; falling back to the corollary listing")?;
            corollary_set(&q)?
        }
        Err(e) => return Err(e),
    };
    let values = set
        .descriptors
        .iter()
        .map(|d| evaluate_hamiltonian(d, &q, &rep).map(|z| [z.re, z.im]))
        .collect::<Result<Vec<_>>>()?;
    let comm = commutation_matrix(&set, &q, &rep, alpha)?;
    let (rank, rank_error) = match independence_rank(&set, &q, &rep, alpha) {
        Ok(r) => (Some(r), None),
        Err(e @ (Error::NotOnShell(_) | Error::SingularPoint(_))) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let tally = count_gt_hamiltonians(&q)?;
    let v = json!({
        "set": set,
        "values": values,
        "commutation": { "max_normalized": comm.max_normalized, "on_shell": comm.on_shell, "residual": comm.residual },
        "independence": rank,
        "independence_error": rank_error,
        "tally": tally,
        "corollary_size": corollary_set(&q)?.descriptors.len(),
    });
    emit(&stamped(v, &q, doc.stamp.seed), out_path, out)?;
    Ok(if comm.on_shell && rank.is_some() { 0 } else { 3 })
}

fn cmd_brane(path: &Path, samples: usize, seed: u64, out_path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let q = load_quiver(path)?;
    let report = involution_type_report(&q, samples, seed)?;
    let v = stamped(serde_json::to_value(&report)?, &q, Some(seed));
    emit(&v, out_path, out)?;
    Ok(0)
}

fn cmd_wildify(path: &Path, solution: Option<&Path>, out_path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let q = load_quiver(path)?;
    let wild = wildify(&q)?;
    let mut v = json!({ "wild": QuiverDoc::from_quiver(&wild), "dim_P": dim_polygon_space(&wild) });
    let mut code = 0;
    if let Some(sp) = solution {
        let doc = load_solution(sp)?;
        let (tq, rep) = doc.parts()?;
        if tq != q {
            return Err(Error::ShapeMismatch("solution was computed on a different quiver".into()));
        }
        let report = wild_specialization_check(&q, &rep, &doc.alpha)?;
        let tame = hyperpolygon_residual(&q, &rep, &doc.alpha)?.aggregate;
        if report.aggregate > tame + 1e-10 {
            code = 3;
        }
        v["merged_level"] = json!(doc.alpha.iter().sum::<f64>());
        v["tame_aggregate"] = json!(tame);
        v["wild_residual"] = serde_json::to_value(report)?;
    }
    emit(&stamped(v, &q, None), out_path, out)?;
    Ok(code)
}

/// Size the global worker pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // a pool may already exist when embedded; keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Run with explicit output streams; returns the exit code.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let out_path = cli.out.as_deref();
    let result = match &cli.command {
        Command::Dims { quiver } => cmd_dims(quiver, out_path, out),
        Command::Solve(a) => cmd_solve(a, false, out_path, out, err),
        Command::Polygon(a) => cmd_solve(a, true, out_path, out, err),
        Command::Verify { solution, tol } => cmd_verify(solution, *tol, out_path, out, err),
        Command::Higgs { solution, punctures, samples, seed } => {
            cmd_higgs(solution, punctures.as_deref(), *samples, *seed, out_path, out)
        }
        Command::Gt { solution, policy } => cmd_gt(solution, *policy, out_path, out, err),
        Command::Brane { quiver, samples, seed } => cmd_brane(quiver, *samples, *seed, out_path, out),
        Command::Wildify { quiver, solution } => cmd_wildify(quiver, solution.as_deref(), out_path, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Run against the process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    configure_threads();
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
