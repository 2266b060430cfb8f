//! Real and complex moment maps of a doubled comet, and the hyperpolygon
//! residual.
//!
//! At the outer (terminal) node of each arm the outgoing terms are reported
//! with the sign flipped, so the terminal real value is `x* x - y y*` and the
//! level `alpha_i` is positive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, dagger, frob, trace_free, CMat};
use crate::quiver::{wildify, CometQuiver};
use crate::rep::{ArmRep, EdgeRep, Representation};

/// One block per non-central arm node (outer to inner) and one central block.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub arms: Vec<Vec<CMat>>,
    pub central: CMat,
}

impl MomentValue {
    pub fn blocks(&self) -> impl Iterator<Item = &CMat> {
        self.arms.iter().flatten().chain(std::iter::once(&self.central))
    }

    pub fn norm(&self) -> f64 {
        self.blocks().map(|m| frob(m).powi(2)).sum::<f64>().sqrt()
    }
}

fn sum_copies(e: &EdgeRep, f: impl Fn(&CMat, &CMat) -> CMat) -> CMat {
    let mut it = e.x.iter().zip(&e.y).map(|(x, y)| f(x, y));
    let first = it.next().expect("every edge has at least one copy");
    it.fold(first, |acc, m| acc + m)
}

/// Per node: incoming terms minus outgoing terms, central block trace-free
/// plus loop commutators. `incoming(x, y)` and `outgoing(x, y)` give the
/// per-edge contributions at the head and tail of the edge.
fn node_moment(
    arm: &ArmRep,
    incoming: &impl Fn(&CMat, &CMat) -> CMat,
    outgoing: &impl Fn(&CMat, &CMat) -> CMat,
) -> (Vec<CMat>, CMat) {
    let m = arm.edges.len();
    let mut blocks = Vec::with_capacity(m);
    for node in 0..m {
        let out = sum_copies(&arm.edges[node], outgoing);
        let value = if node == 0 { out } else { sum_copies(&arm.edges[node - 1], incoming) - out };
        blocks.push(value);
    }
    (blocks, sum_copies(&arm.edges[m - 1], incoming))
}

fn moment(
    q: &CometQuiver,
    rep: &Representation,
    incoming: impl Fn(&CMat, &CMat) -> CMat,
    outgoing: impl Fn(&CMat, &CMat) -> CMat,
    loop_term: impl Fn(&CMat, &CMat) -> CMat,
) -> Result<MomentValue> {
    rep.check_shape(q)?;
    let r = q.central_rank();
    let mut central_in = CMat::zeros(r, r);
    let mut arms = Vec::with_capacity(rep.arms.len());
    for arm in &rep.arms {
        let (blocks, into_centre) = node_moment(arm, &incoming, &outgoing);
        central_in += into_centre;
        arms.push(blocks);
    }
    let mut central = trace_free(&central_in);
    for l in &rep.loops {
        central += loop_term(&l.a, &l.b);
    }
    Ok(MomentValue { arms, central })
}

/// Real moment map: `(x x* - y* y)` incoming minus `(x* x - y y*)` outgoing;
/// centre `(sum incoming)_0 + sum [a, a*] + [b, b*]`.
pub fn real_moment(q: &CometQuiver, rep: &Representation) -> Result<MomentValue> {
    moment(
        q,
        rep,
        |x, y| x * dagger(x) - dagger(y) * y,
        |x, y| dagger(x) * x - y * dagger(y),
        |a, b| commutator(a, &dagger(a)) + commutator(b, &dagger(b)),
    )
}

/// Complex moment map: `x y` incoming minus `y x` outgoing; centre
/// `(sum x y)_0 + sum [a, b]`.
pub fn complex_moment(q: &CometQuiver, rep: &Representation) -> Result<MomentValue> {
    moment(q, rep, |x, y| x * y, |x, y| y * x, commutator)
}

/// Matrix-valued residuals of the hyperpolygon equations, before taking norms.
///
/// `eq_ii`/`eq_II` hold one block per interior arm node (outer to inner).
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlocks {
    pub eq_i: CMat,
    pub eq_ii: Vec<Vec<CMat>>,
    pub eq_iii: Vec<CMat>,
    pub eq_I: CMat,
    pub eq_II: Vec<Vec<CMat>>,
    pub eq_III: Vec<CMat>,
}

impl ResidualBlocks {
    fn real_blocks(&self) -> impl Iterator<Item = &CMat> {
        std::iter::once(&self.eq_i).chain(self.eq_ii.iter().flatten()).chain(self.eq_iii.iter())
    }

    fn complex_blocks(&self) -> impl Iterator<Item = &CMat> {
        std::iter::once(&self.eq_I).chain(self.eq_II.iter().flatten()).chain(self.eq_III.iter())
    }

    /// Real and imaginary parts of every entry, row-major, in equation order.
    /// The Euclidean norm of the result equals [`Self::aggregate`].
    pub fn flatten_into(&self, out: &mut Vec<f64>, include_complex: bool) {
        let push = |out: &mut Vec<f64>, m: &CMat| {
            for row in 0..m.nrows() {
                for col in 0..m.ncols() {
                    out.push(m[(row, col)].re);
                    out.push(m[(row, col)].im);
                }
            }
        };
        for m in self.real_blocks() {
            push(out, m);
        }
        if include_complex {
            for m in self.complex_blocks() {
                push(out, m);
            }
        }
    }

    pub fn aggregate(&self) -> f64 {
        self.real_blocks().chain(self.complex_blocks()).map(|m| frob(m).powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.real_blocks()
            .chain(self.complex_blocks())
            .zip(other.real_blocks().chain(other.complex_blocks()))
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// Hyperpolygon equations evaluated on the pair `(u, v)` so that the residual
/// at `z` is `B(z, z)` minus the level, and its derivative along `d` is
/// `B(z, d) + B(d, z)`. Each quadratic term takes its first factor from `u`
/// and its second from `v`.
pub fn bilinear_blocks(q: &CometQuiver, u: &Representation, v: &Representation) -> ResidualBlocks {
    let r = q.central_rank();
    let mut eq_i = CMat::zeros(r, r);
    let mut eq_cap_i = CMat::zeros(r, r);
    let mut eq_ii = Vec::with_capacity(q.n_arms());
    let mut eq_iii = Vec::with_capacity(q.n_arms());
    let mut eq_cap_ii = Vec::with_capacity(q.n_arms());
    let mut eq_cap_iii = Vec::with_capacity(q.n_arms());

    let pairs = |eu: &EdgeRep, ev: &EdgeRep, f: &dyn Fn(&CMat, &CMat, &CMat, &CMat) -> CMat| -> CMat {
        let mut it = (0..eu.x.len()).map(|c| f(&eu.x[c], &eu.y[c], &ev.x[c], &ev.y[c]));
        let first = it.next().expect("every edge has at least one copy");
        it.fold(first, |acc, m| acc + m)
    };

    for (au, av) in u.arms.iter().zip(&v.arms) {
        let m = au.edges.len();
        let last = m - 1;
        // (i) and (I): innermost edge
        eq_i +=
            trace_free(&pairs(&au.edges[last], &av.edges[last], &|xu, yu, xv, yv| xu * dagger(xv) - dagger(yu) * yv));
        eq_cap_i += trace_free(&pairs(&au.edges[last], &av.edges[last], &|xu, _, _, yv| xu * yv));

        // (ii) and (II): interior nodes 1..m-1
        let mut real_int = Vec::new();
        let mut cplx_int = Vec::new();
        for node in 1..m {
            let (inn_u, inn_v) = (&au.edges[node - 1], &av.edges[node - 1]);
            let (out_u, out_v) = (&au.edges[node], &av.edges[node]);
            let incoming = pairs(inn_u, inn_v, &|xu, yu, xv, yv| xu * dagger(xv) - dagger(yu) * yv);
            let outgoing = pairs(out_u, out_v, &|xu, yu, xv, yv| yu * dagger(yv) - dagger(xu) * xv);
            real_int.push(incoming + outgoing);
            let c_in = pairs(inn_u, inn_v, &|xu, _, _, yv| xu * yv);
            let c_out = pairs(out_u, out_v, &|_, yu, xv, _| yu * xv);
            cplx_int.push(c_in - c_out);
        }
        eq_ii.push(real_int);
        eq_cap_ii.push(cplx_int);

        // (iii) and (III): outermost edge
        eq_iii.push(pairs(&au.edges[0], &av.edges[0], &|xu, yu, xv, yv| dagger(xu) * xv - yu * dagger(yv)));
        eq_cap_iii.push(pairs(&au.edges[0], &av.edges[0], &|_, yu, xv, _| yu * xv));
    }
    for (lu, lv) in u.loops.iter().zip(&v.loops) {
        eq_i += &lu.a * dagger(&lv.a) - dagger(&lv.a) * &lu.a;
        eq_i += &lu.b * dagger(&lv.b) - dagger(&lv.b) * &lu.b;
        eq_cap_i += &lu.a * &lv.b - &lv.b * &lu.a;
    }
    ResidualBlocks { eq_i, eq_ii, eq_iii, eq_I: eq_cap_i, eq_II: eq_cap_ii, eq_III: eq_cap_iii }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Advisory {
    /// Some level vanishes; the quotient may be singular.
    NonGeneric,
    /// Predicted dimension is negative.
    EmptyLikely,
}

/// How many interior-node conditions are imposed, under the general calculus
/// (every interior node) and under the narrower printed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteriorCounts {
    pub general: usize,
    pub printed: usize,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eq_i: f64,
    pub eq_ii: Vec<Vec<f64>>,
    pub eq_iii: Vec<f64>,
    pub eq_I: f64,
    pub eq_II: Vec<Vec<f64>>,
    pub eq_III: Vec<f64>,
    pub aggregate: f64,
    #[serde(default)]
    pub advisories: Vec<Advisory>,
    pub interior_conditions: InteriorCounts,
}

impl ResidualReport {
    pub fn from_blocks(q: &CometQuiver, b: &ResidualBlocks, advisories: Vec<Advisory>) -> Self {
        let norms = |v: &Vec<Vec<CMat>>| v.iter().map(|a| a.iter().map(frob).collect()).collect();
        Self {
            eq_i: frob(&b.eq_i),
            eq_ii: norms(&b.eq_ii),
            eq_iii: b.eq_iii.iter().map(frob).collect(),
            eq_I: frob(&b.eq_I),
            eq_II: norms(&b.eq_II),
            eq_III: b.eq_III.iter().map(frob).collect(),
            aggregate: b.aggregate(),
            advisories,
            interior_conditions: InteriorCounts {
                general: q.interior_node_count(),
                printed: q.printed_interior_node_count(),
            },
        }
    }

    /// Sum of squared component norms (should equal `aggregate^2`).
    pub fn component_sum_sq(&self) -> f64 {
        let sq = |x: &f64| x * x;
        sq(&self.eq_i)
            + self.eq_ii.iter().flatten().map(sq).sum::<f64>()
            + self.eq_iii.iter().map(sq).sum::<f64>()
            + sq(&self.eq_I)
            + self.eq_II.iter().flatten().map(sq).sum::<f64>()
            + self.eq_III.iter().map(sq).sum::<f64>()
    }
}

/// Validate a level vector; returns advisories for zero entries.
pub fn check_levels(q: &CometQuiver, alpha: &[f64]) -> Result<Vec<Advisory>> {
    if alpha.len() != q.n_arms() {
        return Err(Error::LengthMismatch { expected: q.n_arms(), got: alpha.len() });
    }
    if let Some(bad) = alpha.iter().find(|a| !a.is_finite() || **a < 0.0) {
        return Err(Error::InvalidLevel(format!("level {bad} is negative or not finite")));
    }
    let mut adv = Vec::new();
    if alpha.contains(&0.0) {
        adv.push(Advisory::NonGeneric);
    }
    Ok(adv)
}

fn check_based(q: &CometQuiver) -> Result<()> {
    match q.arms().iter().position(|f| f.entries()[0] != 1) {
        Some(i) => Err(Error::ArmNotBased(i)),
        None => Ok(()),
    }
}

/// Residual blocks of the hyperpolygon equations at level `alpha`.
pub fn hyperpolygon_blocks(q: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<ResidualBlocks> {
    check_based(q)?;
    check_levels(q, alpha)?;
    rep.check_shape(q)?;
    let mut blocks = bilinear_blocks(q, rep, rep);
    for (b, &a) in blocks.eq_iii.iter_mut().zip(alpha) {
        b[(0, 0)] -= a;
    }
    Ok(blocks)
}

pub fn hyperpolygon_residual(q: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<ResidualReport> {
    let advisories = check_levels(q, alpha)?;
    let blocks = hyperpolygon_blocks(q, rep, alpha)?;
    Ok(ResidualReport::from_blocks(q, &blocks, advisories))
}

/// The same residual assembled from [`real_moment`] and [`complex_moment`]
/// minus their targets.
pub fn blocks_from_moments(q: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<ResidualBlocks> {
    check_based(q)?;
    check_levels(q, alpha)?;
    let mu = real_moment(q, rep)?;
    let nu = complex_moment(q, rep)?;
    let interior = |v: &MomentValue| v.arms.iter().map(|a| a[1..].to_vec()).collect();
    Ok(ResidualBlocks {
        eq_i: mu.central.clone(),
        eq_ii: interior(&mu),
        eq_iii: mu
            .arms
            .iter()
            .zip(alpha)
            .map(|(a, &lvl)| {
                let mut t = a[0].clone();
                t[(0, 0)] -= lvl;
                t
            })
            .collect(),
        eq_I: nu.central.clone(),
        eq_II: interior(&nu),
        eq_III: nu.arms.iter().map(|a| a[0].clone()).collect(),
    })
}

/// Reinterpret a tame representation on the merged wild comet: the `i`-th
/// arm becomes the `i`-th parallel copy of every edge.
pub fn merge_to_wild(q_tame: &CometQuiver, rep: &Representation) -> Result<(CometQuiver, Representation)> {
    let wild = wildify(q_tame)?;
    rep.check_shape(q_tame)?;
    if q_tame.n_arms() == 0 {
        return Ok((wild, rep.clone()));
    }
    let m = q_tame.arm(0).len() - 1;
    let edges = (0..m)
        .map(|k| EdgeRep {
            x: rep.arms.iter().map(|a| a.edges[k].x[0].clone()).collect(),
            y: rep.arms.iter().map(|a| a.edges[k].y[0].clone()).collect(),
        })
        .collect();
    let merged = Representation { arms: vec![ArmRep { edges }], loops: rep.loops.clone() };
    Ok((wild, merged))
}

/// Residual of the merged representation on the wild comet at level
/// `sum alpha_i`.
pub fn wild_specialization_check(q_tame: &CometQuiver, rep: &Representation, alpha: &[f64]) -> Result<ResidualReport> {
    check_levels(q_tame, alpha)?;
    let (wild, merged) = merge_to_wild(q_tame, rep)?;
    let level: Vec<f64> = if wild.n_arms() == 0 { vec![] } else { vec![alpha.iter().sum()] };
    hyperpolygon_residual(&wild, &merged, &level)
}
