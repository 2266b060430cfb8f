//! Gelfand-Tsetlin Hamiltonians on the doubled comet, their canonical
//! brackets and on-shell independence.
//!
//! Indexing: arm and loop indices are 0-based; levels `k`, coefficients `j`
//! and matrix positions `(row, col)` are 1-based as in the usual notation
//! `h_{j,k}` and `b_{p,q}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::char_coefficients;
use crate::linalg::{null_space, real_rank, trace_free, CMat, RMat};
use crate::moment::hyperpolygon_residual;
use crate::quiver::{complete_arm_count, count_gt_hamiltonians, CometQuiver};
use crate::rep::{gauge_tangent_matrix, Layout, Representation};
use crate::solver::{constraint_jacobian, REGULAR_GAP};

/// Residual above which a point is treated as off-shell.
pub const ON_SHELL_RESIDUAL: f64 = 1e-8;
/// Normalized bracket below which two functions are taken to commute.
pub const COMMUTE_TOL: f64 = 1e-6;
/// Relative singular-value cutoff for ranks of finite-difference differentials.
pub const DIFFERENTIAL_RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianDescriptor {
    /// `t_j` of the leading `(k-1) x (k-1)` block of `(x y)_0` on the edge
    /// entering the node of rank `k` of a complete arm.
    ArmBlockTrace { arm: usize, level: usize, coefficient: usize },
    /// Entry `(1, r)` of `(x y)_0` on a minimal arm.
    MinimalCorner { arm: usize },
    /// Entry `(p, p)` of `(x y)_0` on a minimal arm, `2 <= p <= r - 1`.
    MinimalDiagonal { arm: usize, index: usize },
    /// Entry `b[row, col]` of loop `index`.
    LoopEntry { index: usize, row: usize, col: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Corollary,
    TallyGreedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSet {
    pub descriptors: Vec<HamiltonianDescriptor>,
    pub policy: Policy,
}

fn arm_kinds(q: &CometQuiver) -> Result<Vec<bool>> {
    complete_arm_count(q)?;
    Ok(q.arms().iter().map(|f| f.is_complete()).collect())
}

fn complete_arm_functions(q: &CometQuiver, arm: usize) -> impl Iterator<Item = HamiltonianDescriptor> {
    let m = q.arm(arm).len();
    (2..=m).flat_map(move |level| {
        (1..level).map(move |coefficient| HamiltonianDescriptor::ArmBlockTrace { arm, level, coefficient })
    })
}

fn loop_entries(r: usize, index: usize) -> impl Iterator<Item = HamiltonianDescriptor> {
    (1..=r)
        .flat_map(move |row| (1..=r).map(move |col| (row, col)))
        .filter(move |&(row, col)| (row, col) != (r, r))
        .map(move |(row, col)| HamiltonianDescriptor::LoopEntry { index, row, col })
}

/// The listing for complete comets: block traces on arms `r + 2..n` (1-based)
/// when `g = 0`, on every arm when `g >= 1`, plus entries of loops `2..g`
/// except `(r, r)`. Minimal arms contribute their corner function.
pub fn corollary_set(q: &CometQuiver) -> Result<HamiltonianSet> {
    let complete = arm_kinds(q)?;
    let r = q.central_rank();
    let first_arm = if q.loops() == 0 { r + 1 } else { 0 };
    let mut descriptors = Vec::new();
    for (arm, &is_complete) in complete.iter().enumerate() {
        if !is_complete {
            descriptors.push(HamiltonianDescriptor::MinimalCorner { arm });
        } else if arm >= first_arm {
            descriptors.extend(complete_arm_functions(q, arm));
        }
    }
    for index in 1..q.loops() {
        descriptors.extend(loop_entries(r, index));
    }
    Ok(HamiltonianSet { descriptors, policy: Policy::Corollary })
}

/// Every candidate considered by the greedy policy, in selection order: complete
/// arm block traces, minimal-arm corners then diagonals, loop entries.
pub fn candidate_descriptors(q: &CometQuiver) -> Result<Vec<HamiltonianDescriptor>> {
    let complete = arm_kinds(q)?;
    let r = q.central_rank();
    let mut out = Vec::new();
    for (arm, &is_complete) in complete.iter().enumerate() {
        if is_complete {
            out.extend(complete_arm_functions(q, arm));
        }
    }
    for (arm, &is_complete) in complete.iter().enumerate() {
        if !is_complete {
            out.push(HamiltonianDescriptor::MinimalCorner { arm });
            out.extend((2..r).map(|index| HamiltonianDescriptor::MinimalDiagonal { arm, index }));
        }
    }
    for index in 0..q.loops() {
        out.extend(loop_entries(r, index));
    }
    Ok(out)
}

fn arm_product(rep: &Representation, arm: usize, edge: usize) -> CMat {
    let e = &rep.arms[arm].edges[edge];
    let (rows, _) = e.x[0].shape();
    trace_free(&e.x.iter().zip(&e.y).fold(CMat::zeros(rows, rows), |acc, (x, y)| acc + x * y))
}

/// `j`-th elementary symmetric function of the eigenvalues.
fn elementary_symmetric(m: &CMat, j: usize) -> Complex64 {
    let c = char_coefficients(m)[j - 1];
    if j.is_multiple_of(2) {
        c
    } else {
        -c
    }
}

pub fn evaluate_hamiltonian(d: &HamiltonianDescriptor, q: &CometQuiver, rep: &Representation) -> Result<Complex64> {
    rep.check_shape(q)?;
    let bad = || Error::InvalidOption(format!("descriptor {d:?} does not fit the quiver"));
    let r = q.central_rank();
    match *d {
        HamiltonianDescriptor::ArmBlockTrace { arm, level, coefficient } => {
            let flag = q.arms().get(arm).ok_or_else(bad)?;
            if !flag.is_complete() || level < 2 || level > flag.len() || coefficient == 0 || coefficient >= level {
                return Err(bad());
            }
            let m = arm_product(rep, arm, level - 2);
            let block = m.view((0, 0), (level - 1, level - 1)).into_owned();
            Ok(elementary_symmetric(&block, coefficient))
        }
        HamiltonianDescriptor::MinimalCorner { arm } => {
            let flag = q.arms().get(arm).ok_or_else(bad)?;
            if !flag.is_minimal() {
                return Err(bad());
            }
            Ok(arm_product(rep, arm, 0)[(0, r - 1)])
        }
        HamiltonianDescriptor::MinimalDiagonal { arm, index } => {
            let flag = q.arms().get(arm).ok_or_else(bad)?;
            if !flag.is_minimal() || index < 1 || index > r {
                return Err(bad());
            }
            Ok(arm_product(rep, arm, 0)[(index - 1, index - 1)])
        }
        HamiltonianDescriptor::LoopEntry { index, row, col } => {
            if index >= q.loops() || row == 0 || col == 0 || row > r || col > r {
                return Err(bad());
            }
            Ok(rep.loops[index].b[(row - 1, col - 1)])
        }
    }
}

/// Holomorphic partial derivatives `df/dz_c` in the complex flat coordinates,
/// by central differences along the real part with step
/// `step_scale * (1 + |z_c|)`.
pub fn gradient_with_step(
    q: &CometQuiver,
    rep: &Representation,
    f: &(dyn Fn(&Representation) -> Complex64 + Sync),
    step_scale: f64,
) -> Result<Vec<Complex64>> {
    rep.check_shape(q)?;
    let z = rep.complex_coordinates();
    let mut work = z.clone();
    let mut out = Vec::with_capacity(z.len());
    for k in 0..z.len() {
        let h = step_scale * (1.0 + z[k].norm());
        work[k] = z[k] + h;
        let plus = f(&Representation::from_complex_coordinates(q, &work)?);
        work[k] = z[k] - h;
        let minus = f(&Representation::from_complex_coordinates(q, &work)?);
        work[k] = z[k];
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

pub const GRADIENT_STEP: f64 = 1e-5;

pub fn gradient(
    q: &CometQuiver,
    rep: &Representation,
    f: &(dyn Fn(&Representation) -> Complex64 + Sync),
) -> Result<Vec<Complex64>> {
    gradient_with_step(q, rep, f, GRADIENT_STEP)
}

pub fn hamiltonian_gradient(
    d: &HamiltonianDescriptor,
    q: &CometQuiver,
    rep: &Representation,
) -> Result<Vec<Complex64>> {
    evaluate_hamiltonian(d, q, rep)?;
    gradient(q, rep, &|p: &Representation| evaluate_hamiltonian(d, q, p).expect("validated descriptor"))
}

/// Canonical bracket from gradients: `sum over pairs (P, M) of
/// df/dP dg/dM - df/dM dg/dP`.
pub fn bracket_from_gradients(layout: &Layout, df: &[Complex64], dg: &[Complex64]) -> Complex64 {
    layout.pairs.iter().map(|&(p, m)| df[p] * dg[m] - df[m] * dg[p]).sum()
}

fn grad_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|{f, g}| / max(1, |df| |dg|)`.
pub fn normalized_bracket(layout: &Layout, df: &[Complex64], dg: &[Complex64]) -> f64 {
    bracket_from_gradients(layout, df, dg).norm() / (grad_norm(df) * grad_norm(dg)).max(1.0)
}

pub fn poisson_bracket(
    q: &CometQuiver,
    rep: &Representation,
    f: &(dyn Fn(&Representation) -> Complex64 + Sync),
    g: &(dyn Fn(&Representation) -> Complex64 + Sync),
) -> Result<Complex64> {
    let layout = Layout::new(q);
    Ok(bracket_from_gradients(&layout, &gradient(q, rep, f)?, &gradient(q, rep, g)?))
}

fn gradients(set: &[HamiltonianDescriptor], q: &CometQuiver, rep: &Representation) -> Result<Vec<Vec<Complex64>>> {
    set.par_iter().map(|d| hamiltonian_gradient(d, q, rep)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub brackets: Vec<Vec<Complex64>>,
    pub max_normalized: f64,
    pub residual: f64,
    pub on_shell: bool,
}

impl CommutationReport {
    /// Error out when the point was off-shell.
    pub fn certify(self) -> Result<Self> {
        if self.on_shell {
            Ok(self)
        } else {
            Err(Error::NotOnShell(self.residual))
        }
    }
}

/// All pairwise brackets. Off-shell points are reported with `on_shell` unset.
pub fn commutation_matrix(
    set: &HamiltonianSet,
    q: &CometQuiver,
    rep: &Representation,
    alpha: &[f64],
) -> Result<CommutationReport> {
    let residual = hyperpolygon_residual(q, rep, alpha)?.aggregate;
    let layout = Layout::new(q);
    let grads = gradients(&set.descriptors, q, rep)?;
    let n = grads.len();
    let mut brackets = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    let mut max_normalized: f64 = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let v = bracket_from_gradients(&layout, &grads[a], &grads[b]);
            brackets[a][b] = v;
            brackets[b][a] = -v;
            max_normalized = max_normalized.max(normalized_bracket(&layout, &grads[a], &grads[b]));
        }
    }
    Ok(CommutationReport { brackets, max_normalized, residual, on_shell: residual <= ON_SHELL_RESIDUAL })
}

/// Orthonormal real basis (columns) of the tangent space of the level set
/// that is Frobenius-orthogonal to the gauge orbit.
pub fn horizontal_space(q: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<RMat> {
    let residual = hyperpolygon_residual(q, rep, alpha)?.aggregate;
    if residual > ON_SHELL_RESIDUAL {
        return Err(Error::NotOnShell(residual));
    }
    let (kernel, jinfo) = null_space(&constraint_jacobian(q, rep)?);
    let tangents = gauge_tangent_matrix(q, rep);
    let ginfo = real_rank(&tangents);
    let gap = jinfo.gap.min(ginfo.gap);
    if !(gap > REGULAR_GAP) {
        return Err(Error::SingularPoint(gap));
    }
    let (w, _) = null_space(&(tangents.transpose() * &kernel));
    Ok(kernel * w)
}

/// Differentials of the functions (rows) evaluated on a real basis (columns).
fn differential_matrix(grads: &[Vec<Complex64>], basis: &RMat) -> CMat {
    CMat::from_fn(grads.len(), basis.ncols(), |k, l| {
        grads[k].iter().enumerate().map(|(c, d)| d * Complex64::new(basis[(2 * c, l)], basis[(2 * c + 1, l)])).sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub functions: usize,
    pub horizontal_dim: usize,
    /// `sigma_rank / sigma_{rank+1}` with the next value floored at the cutoff.
    pub gap: f64,
}

fn differential_rank(m: &CMat) -> (usize, f64) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (0, f64::INFINITY);
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cutoff = DIFFERENTIAL_RANK_TOL * sv[0];
    let rank = sv.iter().take_while(|&&s| s > cutoff).count();
    let gap = if rank == 0 { 0.0 } else { sv[rank - 1] / sv.get(rank).copied().unwrap_or(0.0).max(cutoff) };
    (rank, gap)
}

/// Complex rank of the differentials restricted to [`horizontal_space`].
pub fn independence_rank(
    set: &HamiltonianSet,
    q: &CometQuiver,
    rep: &Representation,
    alpha: &[f64],
) -> Result<RankReport> {
    let h = horizontal_space(q, rep, alpha)?;
    let grads = gradients(&set.descriptors, q, rep)?;
    let (rank, gap) = differential_rank(&differential_matrix(&grads, &h));
    Ok(RankReport { rank, functions: set.descriptors.len(), horizontal_dim: h.ncols(), gap })
}

/// Walk the candidates in order, keeping one when it raises the on-shell rank
/// and commutes with those already kept, until the tally is reached.
pub fn tally_greedy(q: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<HamiltonianSet> {
    let target = count_gt_hamiltonians(q)?.max(0) as usize;
    let candidates = candidate_descriptors(q)?;
    let h = horizontal_space(q, rep, alpha)?;
    let layout = Layout::new(q);
    let grads = gradients(&candidates, q, rep)?;
    let mut kept: Vec<usize> = Vec::new();
    for (idx, g) in grads.iter().enumerate() {
        if kept.len() >= target {
            break;
        }
        if kept.iter().any(|&k| normalized_bracket(&layout, &grads[k], g) >= COMMUTE_TOL) {
            continue;
        }
        let trial: Vec<Vec<Complex64>> = kept.iter().chain(std::iter::once(&idx)).map(|&k| grads[k].clone()).collect();
        if differential_rank(&differential_matrix(&trial, &h)).0 == trial.len() {
            kept.push(idx);
        }
    }
    Ok(HamiltonianSet { descriptors: kept.into_iter().map(|k| candidates[k]).collect(), policy: Policy::TallyGreedy })
}

/// Descriptor set under `policy`; the greedy policy needs an on-shell point.
pub fn gt_hamiltonians(
    q: &CometQuiver,
    policy: Policy,
    point: Option<(&Representation, &[f64])>,
) -> Result<HamiltonianSet> {
    match policy {
        Policy::Corollary => corollary_set(q),
        Policy::TallyGreedy => {
            let (rep, alpha) =
                point.ok_or_else(|| Error::InvalidOption("the greedy policy needs a solved point".into()))?;
            tally_greedy(q, rep, alpha)
        }
    }
}
