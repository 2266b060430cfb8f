//! Levenberg-Marquardt solves of the hyperpolygon and polygon equations, and
//! numerical dimension counts at solved points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_rank, RMat};
use crate::moment::{bilinear_blocks, check_levels, hyperpolygon_blocks, hyperpolygon_residual, ResidualReport};
use crate::quiver::{dim_hyperpolygon_space, CometQuiver};
use crate::rep::{gauge_tangent_matrix, random_representation_with, seeded_rng, Layout, Representation};

/// Rank decisions with a gap below this are treated as singular.
pub const REGULAR_GAP: f64 = 1e3;

/// Offset separating multi-start streams from other uses of the same seed.
const START_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Target for the aggregate residual.
    pub tolerance: f64,
    pub starts: usize,
    pub seed: u64,
    /// Initial damping relative to the largest squared singular value.
    pub damping_init: f64,
    /// Give up on a start once the damping exceeds this.
    pub damping_max: f64,
    /// Entry scale of the random starts; `sqrt(mean alpha)` when unset.
    pub init_scale: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-11,
            starts: 8,
            seed: 0,
            damping_init: 1e-3,
            damping_max: 1e20,
            init_scale: None,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidOption("tolerance must be positive".into()));
        }
        if self.starts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidOption("starts and max_iterations must be at least 1".into()));
        }
        if !(self.damping_init > 0.0) || !(self.damping_max > self.damping_init) {
            return Err(Error::InvalidOption("damping parameters must satisfy 0 < init < max".into()));
        }
        if let Some(s) = self.init_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidOption("init_scale must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub representation: Representation,
    pub residual: ResidualReport,
    pub start_index: usize,
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Residual and exact Jacobian of the equations over a subset of the real
/// flat coordinates.
struct Problem<'a> {
    q: &'a CometQuiver,
    alpha: &'a [f64],
    real_dim: usize,
    free: Vec<usize>,
    directions: Vec<Representation>,
    complex_eqs: bool,
}

impl<'a> Problem<'a> {
    fn new(q: &'a CometQuiver, alpha: &'a [f64], positions_only: bool) -> Self {
        let layout = Layout::new(q);
        let real_dim = layout.real_dim();
        let free: Vec<usize> =
            (0..real_dim).filter(|&k| !positions_only || layout.coords[k / 2].is_position()).collect();
        let directions = free
            .iter()
            .map(|&k| {
                let mut e = vec![0.0; real_dim];
                e[k] = 1.0;
                Representation::from_real_slice(q, &e).expect("layout length")
            })
            .collect();
        Self { q, alpha, real_dim, free, directions, complex_eqs: !positions_only }
    }

    fn embed(&self, v: &[f64]) -> Representation {
        let mut full = vec![0.0; self.real_dim];
        for (&k, &t) in self.free.iter().zip(v) {
            full[k] = t;
        }
        Representation::from_real_slice(self.q, &full).expect("layout length")
    }

    fn restrict(&self, rep: &Representation) -> Vec<f64> {
        let flat = rep.to_flat();
        self.free.iter().map(|&k| flat.0[k]).collect()
    }

    fn residual(&self, rep: &Representation) -> Vec<f64> {
        let blocks = hyperpolygon_blocks(self.q, rep, self.alpha).expect("validated before solving");
        let mut out = Vec::new();
        blocks.flatten_into(&mut out, self.complex_eqs);
        out
    }

    fn jacobian(&self, rep: &Representation) -> RMat {
        linearization(self.q, rep, &self.directions, self.complex_eqs)
    }
}

/// Columns `B(z, d) + B(d, z)` for each direction `d`, flattened like the residual.
fn linearization(q: &CometQuiver, rep: &Representation, directions: &[Representation], complex_eqs: bool) -> RMat {
    let cols: Vec<Vec<f64>> = directions
        .iter()
        .map(|d| {
            let mut a = Vec::new();
            let mut b = Vec::new();
            bilinear_blocks(q, rep, d).flatten_into(&mut a, complex_eqs);
            bilinear_blocks(q, d, rep).flatten_into(&mut b, complex_eqs);
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        })
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    RMat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Real Jacobian of all six equation families with respect to every real flat
/// coordinate (rows follow [`crate::moment::ResidualBlocks::flatten_into`]).
pub fn constraint_jacobian(q: &CometQuiver, rep: &Representation) -> Result<RMat> {
    rep.check_shape(q)?;
    let layout = Layout::new(q);
    let n = layout.real_dim();
    let directions: Vec<Representation> = (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            Representation::from_real_slice(q, &e)
        })
        .collect::<Result<_>>()?;
    Ok(linearization(q, rep, &directions, true))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct StartResult {
    v: Vec<f64>,
    residual_norm: f64,
    iterations: usize,
}

/// Damped Gauss-Newton with Nielsen's damping update. Each step solves
/// `(J^T J + lambda I) d = -J^T f` through the SVD of `J`, so directions in the
/// kernel of `J` (gauge directions) receive no update.
fn levenberg_marquardt(p: &Problem, mut v: Vec<f64>, opts: &SolveOptions) -> StartResult {
    let mut f = p.residual(&p.embed(&v));
    let mut cost = norm(&f);
    let mut lambda: Option<f64> = None;
    let mut nu = 2.0;
    let mut iterations = 0;
    while iterations < opts.max_iterations && cost >= opts.tolerance {
        iterations += 1;
        let rep = p.embed(&v);
        let svd = p.jacobian(&rep).svd(true, true);
        let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        let sigma = &svd.singular_values;
        let smax = sigma.iter().copied().fold(0.0, f64::max);
        if smax == 0.0 {
            break;
        }
        let lam = *lambda.get_or_insert(opts.damping_init * smax * smax);
        // projections of the residual onto the left singular vectors
        let fv = nalgebra::DVector::from_column_slice(&f);
        let proj = u.transpose() * &fv;
        let coeff: Vec<f64> = (0..sigma.len()).map(|k| -sigma[k] * proj[k] / (sigma[k] * sigma[k] + lam)).collect();
        let mut step = vec![0.0; v.len()];
        for (k, &ck) in coeff.iter().enumerate() {
            if ck != 0.0 {
                for (s, vt) in step.iter_mut().zip(v_t.row(k).iter()) {
                    *s += ck * vt;
                }
            }
        }
        let candidate: Vec<f64> = v.iter().zip(&step).map(|(a, b)| a + b).collect();
        let f_new = p.residual(&p.embed(&candidate));
        let cost_new = norm(&f_new);
        // predicted decrease of 0.5|f|^2 under the damped model
        let predicted: f64 = (0..sigma.len())
            .map(|k| {
                let c = coeff[k];
                -(c * sigma[k] * proj[k]) - 0.5 * c * c * sigma[k] * sigma[k]
            })
            .sum();
        let actual = 0.5 * (cost * cost - cost_new * cost_new);
        let rho = if predicted > 0.0 { actual / predicted } else { -1.0 };
        if rho > 0.0 && cost_new.is_finite() {
            v = candidate;
            f = f_new;
            cost = cost_new;
            lambda = Some(lam * (1.0 / 3.0f64).max(1.0 - (2.0 * rho - 1.0).powi(3)));
            nu = 2.0;
        } else {
            let next = lam * nu;
            nu *= 2.0;
            if next > opts.damping_max * smax * smax {
                break;
            }
            lambda = Some(next);
        }
    }
    StartResult { v, residual_norm: cost, iterations }
}

/// Warnings about instances unlikely to be solvable or regular.
pub fn solve_warnings(q: &CometQuiver, alpha: &[f64]) -> Vec<String> {
    let mut w = Vec::new();
    let all_minimal = q.n_arms() > 0 && q.arms().iter().all(|f| f.is_minimal());
    if all_minimal && q.loops() == 0 && q.n_arms() < q.central_rank() + 1 {
        w.push(format!(
            "minimal comet with g = 0 has n = {} < r + 1 = {}; solutions are not expected",
            q.n_arms(),
            q.central_rank() + 1
        ));
    }
    if crate::quiver::empty_likely(q) {
        w.push("predicted dimension is negative; the variety is likely empty".into());
    }
    if alpha.contains(&0.0) {
        w.push("some level is zero; the quotient may be singular".into());
    }
    w
}

fn run_starts(q: &CometQuiver, alpha: &[f64], opts: &SolveOptions, positions_only: bool) -> Result<Solution> {
    opts.validate()?;
    check_levels(q, alpha)?;
    if alpha.iter().any(|&a| a <= 0.0) {
        return Err(Error::InvalidLevel("solving requires every level to be positive".into()));
    }
    // residual evaluation validates basedness
    hyperpolygon_residual(q, &Representation::zeros(q), alpha)?;
    let problem = Problem::new(q, alpha, positions_only);
    let scale = opts.init_scale.unwrap_or_else(|| {
        if alpha.is_empty() {
            1.0
        } else {
            (alpha.iter().sum::<f64>() / alpha.len() as f64).sqrt()
        }
    });
    let results: Vec<StartResult> = (0..opts.starts)
        .into_par_iter()
        .map(|s| {
            let mut rng = seeded_rng(opts.seed, START_STREAM + s as u64);
            let start = random_representation_with(q, &mut rng, scale);
            levenberg_marquardt(&problem, problem.restrict(&start), opts)
        })
        .collect();
    let (start_index, best) = results
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.residual_norm.total_cmp(&b.residual_norm).then(i.cmp(j)))
        .expect("at least one start");
    let representation = problem.embed(&best.v);
    let residual = hyperpolygon_residual(q, &representation, alpha)?;
    let converged = residual.aggregate < opts.tolerance;
    let solution = Solution {
        representation,
        residual,
        start_index,
        iterations: best.iterations,
        converged,
        warnings: solve_warnings(q, alpha),
    };
    if converged {
        Ok(solution)
    } else {
        Err(Error::NotConverged(Box::new(solution)))
    }
}

/// Solve the full hyperpolygon equations from `opts.starts` seeded random starts.
pub fn solve(q: &CometQuiver, alpha: &[f64], opts: &SolveOptions) -> Result<Solution> {
    run_starts(q, alpha, opts, false)
}

/// Solve the polygon equations: only `x` and `a` vary, `y` and `b` stay zero.
pub fn solve_polygon(q: &CometQuiver, alpha: &[f64], opts: &SolveOptions) -> Result<Solution> {
    run_starts(q, alpha, opts, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub ambient_real: usize,
    pub constraint_rank: usize,
    pub level_set_real: usize,
    pub gauge_rank: usize,
    pub quotient_real: i64,
    /// Half of `quotient_real`; `None` when that is odd.
    pub quotient_complex: Option<i64>,
    pub predicted_complex: i64,
    pub constraint_gap: f64,
    pub gauge_gap: f64,
    /// Smaller of the two rank gaps.
    pub gap: f64,
    pub singular: bool,
    pub matches_prediction: bool,
}

impl DimensionReport {
    /// Error out instead of returning a singular report.
    pub fn certify(self) -> Result<Self> {
        if self.singular {
            Err(Error::SingularPoint(self.gap))
        } else {
            Ok(self)
        }
    }
}

/// Tangent-space dimension count at `rep`. Singular points are reported with
/// `singular` set rather than as an error; see [`DimensionReport::certify`].
pub fn dimension_report(q: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<DimensionReport> {
    check_levels(q, alpha)?;
    rep.check_shape(q)?;
    let jac = constraint_jacobian(q, rep)?;
    let ambient = jac.ncols();
    let c = real_rank(&jac);
    let g = real_rank(&gauge_tangent_matrix(q, rep));
    let level_set_real = ambient - c.rank;
    let quotient_real = level_set_real as i64 - g.rank as i64;
    let quotient_complex = (quotient_real % 2 == 0).then_some(quotient_real / 2);
    let predicted_complex = dim_hyperpolygon_space(q);
    let gap = c.gap.min(g.gap);
    Ok(DimensionReport {
        ambient_real: ambient,
        constraint_rank: c.rank,
        level_set_real,
        gauge_rank: g.rank,
        quotient_real,
        quotient_complex,
        predicted_complex,
        constraint_gap: c.gap,
        gauge_gap: g.gap,
        gap,
        singular: !(gap > REGULAR_GAP),
        matches_prediction: quotient_complex == Some(predicted_complex),
    })
}
