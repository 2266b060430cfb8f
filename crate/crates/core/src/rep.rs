//! Points of the doubled comet representation space and the group actions on
//! them.
//!
//! Flat coordinate order: arms in order; within an arm, edges from the outer
//! node inwards; within an edge, each parallel copy lists its `x` entries and
//! then its `y` entries. Loops follow, each listing `a` then `b` in the
//! trace-free basis of [`crate::linalg::sl_basis`]. Matrix entries are
//! row-major, and in real coordinates each complex entry contributes its real
//! part followed by its imaginary part.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, commutator, dagger, frob, random_gaussian, random_unitary, sl_basis, sl_coordinates, sl_from_coordinates,
    trace_free, unitary_algebra_basis, CMat, RMat,
};
use crate::quiver::CometQuiver;

/// Parallel copies of one arm edge: `x` points inwards, `y` outwards.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRep {
    pub x: Vec<CMat>,
    pub y: Vec<CMat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmRep {
    pub edges: Vec<EdgeRep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopRep {
    pub a: CMat,
    pub b: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub arms: Vec<ArmRep>,
    pub loops: Vec<LoopRep>,
}

/// Real coordinate vector in the documented flat order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatCoordinates(pub Vec<f64>);

impl FlatCoordinates {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArmField {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopField {
    A,
    B,
}

/// What a complex coordinate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Arm { arm: usize, edge: usize, copy: usize, field: ArmField, row: usize, col: usize },
    Loop { index: usize, field: LoopField, basis: usize },
}

impl Coordinate {
    /// Lies in an `x` or `a` slot (the polygon directions).
    pub fn is_position(&self) -> bool {
        matches!(self, Coordinate::Arm { field: ArmField::X, .. } | Coordinate::Loop { field: LoopField::A, .. })
    }
}

/// Complex coordinate layout of a quiver together with canonical pairings.
#[derive(Debug, Clone)]
pub struct Layout {
    pub coords: Vec<Coordinate>,
    /// `(position, momentum)` index pairs: `x[p,q]` with `y[q,p]`, and the
    /// `k`-th basis coordinate of `a` with that of `b`.
    pub pairs: Vec<(usize, usize)>,
}

impl Layout {
    pub fn new(q: &CometQuiver) -> Self {
        let mut coords = Vec::new();
        let mut pairs = Vec::new();
        for (i, flag) in q.arms().iter().enumerate() {
            let ranks = flag.entries();
            for k in 0..flag.len() - 1 {
                let (rows, cols) = (ranks[k + 1], ranks[k]);
                for copy in 0..q.multiplicity(i, k) {
                    let x0 = coords.len();
                    for row in 0..rows {
                        for col in 0..cols {
                            coords.push(Coordinate::Arm { arm: i, edge: k, copy, field: ArmField::X, row, col });
                        }
                    }
                    let y0 = coords.len();
                    for row in 0..cols {
                        for col in 0..rows {
                            coords.push(Coordinate::Arm { arm: i, edge: k, copy, field: ArmField::Y, row, col });
                        }
                    }
                    for p in 0..rows {
                        for qq in 0..cols {
                            pairs.push((x0 + p * cols + qq, y0 + qq * rows + p));
                        }
                    }
                }
            }
        }
        let dim = q.central_rank() * q.central_rank() - 1;
        for j in 0..q.loops() {
            let a0 = coords.len();
            coords.extend((0..dim).map(|basis| Coordinate::Loop { index: j, field: LoopField::A, basis }));
            coords.extend((0..dim).map(|basis| Coordinate::Loop { index: j, field: LoopField::B, basis }));
            pairs.extend((0..dim).map(|k| (a0 + k, a0 + dim + k)));
        }
        Self { coords, pairs }
    }

    pub fn complex_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.coords.len()
    }
}

impl Representation {
    pub fn zeros(q: &CometQuiver) -> Self {
        let arms = q
            .arms()
            .iter()
            .enumerate()
            .map(|(i, flag)| {
                let r = flag.entries();
                ArmRep {
                    edges: (0..flag.len() - 1)
                        .map(|k| {
                            let m = q.multiplicity(i, k);
                            EdgeRep { x: vec![CMat::zeros(r[k + 1], r[k]); m], y: vec![CMat::zeros(r[k], r[k + 1]); m] }
                        })
                        .collect(),
                }
            })
            .collect();
        let r = q.central_rank();
        let loops = (0..q.loops()).map(|_| LoopRep { a: CMat::zeros(r, r), b: CMat::zeros(r, r) }).collect();
        Self { arms, loops }
    }

    /// Shapes match `q` and loop matrices are trace-free to `1e-12` relative
    /// to their Frobenius norm.
    pub fn check_shape(&self, q: &CometQuiver) -> Result<()> {
        if self.arms.len() != q.n_arms() || self.loops.len() != q.loops() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} arms and {} loops, got {} and {}",
                q.n_arms(),
                q.loops(),
                self.arms.len(),
                self.loops.len()
            )));
        }
        for (i, (arm, flag)) in self.arms.iter().zip(q.arms()).enumerate() {
            let r = flag.entries();
            if arm.edges.len() != flag.len() - 1 {
                return Err(Error::ShapeMismatch(format!("arm {i}: wrong edge count")));
            }
            for (k, e) in arm.edges.iter().enumerate() {
                let m = q.multiplicity(i, k);
                if e.x.len() != m || e.y.len() != m {
                    return Err(Error::ShapeMismatch(format!("arm {i} edge {k}: expected {m} copies")));
                }
                let bad_x = e.x.iter().any(|x| x.shape() != (r[k + 1], r[k]));
                let bad_y = e.y.iter().any(|y| y.shape() != (r[k], r[k + 1]));
                if bad_x || bad_y {
                    return Err(Error::ShapeMismatch(format!("arm {i} edge {k}: wrong matrix shape")));
                }
            }
        }
        let r = q.central_rank();
        for (j, l) in self.loops.iter().enumerate() {
            if l.a.shape() != (r, r) || l.b.shape() != (r, r) {
                return Err(Error::ShapeMismatch(format!("loop {j}: expected {r}x{r}")));
            }
            let traced = |m: &CMat| linalg::trace(m).norm() > 1e-12 * linalg::frob(m).max(1.0);
            if traced(&l.a) || traced(&l.b) {
                return Err(Error::ShapeMismatch(format!("loop {j}: matrices must be trace-free")));
            }
        }
        Ok(())
    }

    /// Apply `f` to every matrix slot, `is_y_or_b` telling which half it is in.
    pub fn map_slots(&self, mut f: impl FnMut(&CMat, bool) -> CMat) -> Self {
        Self {
            arms: self
                .arms
                .iter()
                .map(|arm| ArmRep {
                    edges: arm
                        .edges
                        .iter()
                        .map(|e| EdgeRep {
                            x: e.x.iter().map(|m| f(m, false)).collect(),
                            y: e.y.iter().map(|m| f(m, true)).collect(),
                        })
                        .collect(),
                })
                .collect(),
            loops: self.loops.iter().map(|l| LoopRep { a: f(&l.a, false), b: f(&l.b, true) }).collect(),
        }
    }

    fn zip_slots(&self, other: &Self, f: impl Fn(&CMat, &CMat) -> CMat) -> Self {
        Self {
            arms: self
                .arms
                .iter()
                .zip(&other.arms)
                .map(|(a, b)| ArmRep {
                    edges: a
                        .edges
                        .iter()
                        .zip(&b.edges)
                        .map(|(e, d)| EdgeRep {
                            x: e.x.iter().zip(&d.x).map(|(u, v)| f(u, v)).collect(),
                            y: e.y.iter().zip(&d.y).map(|(u, v)| f(u, v)).collect(),
                        })
                        .collect(),
                })
                .collect(),
            loops: self
                .loops
                .iter()
                .zip(&other.loops)
                .map(|(l, m)| LoopRep { a: f(&l.a, &m.a), b: f(&l.b, &m.b) })
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_slots(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_slots(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_slots(|m, _| m * s)
    }

    pub fn slots(&self) -> impl Iterator<Item = &CMat> {
        self.arms
            .iter()
            .flat_map(|a| a.edges.iter())
            .flat_map(|e| e.x.iter().chain(e.y.iter()))
            .chain(self.loops.iter().flat_map(|l| [&l.a, &l.b]))
    }

    /// Frobenius norm over all slots.
    pub fn norm(&self) -> f64 {
        self.slots().map(|m| frob(m).powi(2)).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    /// Copy with every `y` and `b` set to zero.
    pub fn positions_only(&self) -> Self {
        self.map_slots(|m, momentum| if momentum { CMat::zeros(m.nrows(), m.ncols()) } else { m.clone() })
    }

    /// Norm of the `y` and `b` halves.
    pub fn momentum_norm(&self) -> f64 {
        let ys: f64 = self.arms.iter().flat_map(|a| &a.edges).flat_map(|e| &e.y).map(|m| frob(m).powi(2)).sum();
        let bs: f64 = self.loops.iter().map(|l| frob(&l.b).powi(2)).sum();
        (ys + bs).sqrt()
    }

    /// Complex coordinates in the documented order.
    pub fn complex_coordinates(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for arm in &self.arms {
            for e in &arm.edges {
                for (x, y) in e.x.iter().zip(&e.y) {
                    push_row_major(&mut out, x);
                    push_row_major(&mut out, y);
                }
            }
        }
        if let Some(first) = self.loops.first() {
            let basis = sl_basis(first.a.nrows());
            for l in &self.loops {
                out.extend(sl_coordinates(&l.a, &basis));
                out.extend(sl_coordinates(&l.b, &basis));
            }
        }
        out
    }

    pub fn from_complex_coordinates(q: &CometQuiver, coords: &[Complex64]) -> Result<Self> {
        let layout_len = Layout::new(q).complex_dim();
        if coords.len() != layout_len {
            return Err(Error::LengthMismatch { expected: layout_len, got: coords.len() });
        }
        let mut rep = Self::zeros(q);
        let mut it = coords.iter().copied();
        for arm in &mut rep.arms {
            for e in &mut arm.edges {
                for (x, y) in e.x.iter_mut().zip(e.y.iter_mut()) {
                    fill_row_major(x, &mut it);
                    fill_row_major(y, &mut it);
                }
            }
        }
        let r = q.central_rank();
        let basis = sl_basis(r);
        for l in &mut rep.loops {
            let a: Vec<Complex64> = it.by_ref().take(basis.len()).collect();
            let b: Vec<Complex64> = it.by_ref().take(basis.len()).collect();
            l.a = sl_from_coordinates(&a, &basis, r);
            l.b = sl_from_coordinates(&b, &basis, r);
        }
        Ok(rep)
    }

    pub fn to_flat(&self) -> FlatCoordinates {
        FlatCoordinates(self.complex_coordinates().iter().flat_map(|z| [z.re, z.im]).collect())
    }

    pub fn from_flat(q: &CometQuiver, flat: &FlatCoordinates) -> Result<Self> {
        Self::from_real_slice(q, &flat.0)
    }

    pub fn from_real_slice(q: &CometQuiver, v: &[f64]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::LengthMismatch { expected: v.len() + 1, got: v.len() });
        }
        let coords: Vec<Complex64> = v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Self::from_complex_coordinates(q, &coords)
    }
}

fn push_row_major(out: &mut Vec<Complex64>, m: &CMat) {
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            out.push(m[(row, col)]);
        }
    }
}

fn fill_row_major(m: &mut CMat, it: &mut impl Iterator<Item = Complex64>) {
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            m[(row, col)] = it.next().expect("coordinate length checked");
        }
    }
}

/// Deterministic generator used everywhere a seed is accepted. Child streams
/// give independent, order-free sequences for parallel work.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Entries i.i.d. complex Gaussian with `E|z|^2 = scale^2`; loops projected
/// trace-free.
pub fn random_representation(q: &CometQuiver, seed: u64, scale: f64) -> Representation {
    random_representation_with(q, &mut seeded_rng(seed, 0), scale)
}

pub fn random_representation_with<R: rand::Rng + ?Sized>(q: &CometQuiver, rng: &mut R, scale: f64) -> Representation {
    let zero = Representation::zeros(q);
    let mut rep = zero.map_slots(|m, _| random_gaussian(rng, m.nrows(), m.ncols(), scale));
    for l in &mut rep.loops {
        l.a = trace_free(&l.a);
        l.b = trace_free(&l.b);
    }
    rep
}

/// Change of basis at every node: one matrix per non-central arm node (outer
/// to inner) and one determinant-one matrix at the centre.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeElement {
    pub arms: Vec<Vec<CMat>>,
    pub central: CMat,
}

impl GaugeElement {
    pub fn identity(q: &CometQuiver) -> Self {
        Self {
            arms: q
                .arms()
                .iter()
                .map(|f| f.entries()[..f.len() - 1].iter().map(|&d| linalg::identity(d)).collect())
                .collect(),
            central: linalg::identity(q.central_rank()),
        }
    }

    /// Unitary at outer nodes, special unitary at the centre.
    pub fn random_unitary(q: &CometQuiver, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, 0);
        let arms = q
            .arms()
            .iter()
            .map(|f| f.entries()[..f.len() - 1].iter().map(|&d| random_unitary(&mut rng, d)).collect())
            .collect();
        let central = linalg::normalize_det(&random_unitary(&mut rng, q.central_rank()));
        Self { arms, central }
    }

    /// Invertible outer factors and a determinant-one centre (complexified group).
    pub fn random_complex(q: &CometQuiver, seed: u64) -> Self {
        let mut rng = seeded_rng(seed, 1);
        let mut near_identity = |d: usize| linalg::identity(d) + random_gaussian(&mut rng, d, d, 0.3);
        let arms =
            q.arms().iter().map(|f| f.entries()[..f.len() - 1].iter().map(|&d| near_identity(d)).collect()).collect();
        let central = linalg::normalize_det(&near_identity(q.central_rank()));
        Self { arms, central }
    }

    /// Central element only (identity elsewhere).
    pub fn central_only(q: &CometQuiver, central: CMat) -> Self {
        Self { central, ..Self::identity(q) }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv =
            |m: &CMat| m.clone().try_inverse().ok_or_else(|| Error::ShapeMismatch("gauge factor is singular".into()));
        Ok(Self {
            arms: self.arms.iter().map(|a| a.iter().map(inv).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?,
            central: inv(&self.central)?,
        })
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let unitary = |m: &CMat| linalg::frob_dist(&(m * dagger(m)), &linalg::identity(m.nrows())) <= tol;
        self.arms.iter().flatten().all(unitary)
            && unitary(&self.central)
            && (self.central.determinant() - Complex64::new(1.0, 0.0)).norm() <= tol
    }

    fn node(&self, arm: usize, node: usize, last: usize) -> &CMat {
        if node == last {
            &self.central
        } else {
            &self.arms[arm][node]
        }
    }

    fn check(&self, q: &CometQuiver) -> Result<()> {
        let ok =
            self.arms.len() == q.n_arms()
                && self.arms.iter().zip(q.arms()).all(|(g, f)| {
                    g.len() == f.len() - 1 && g.iter().zip(f.entries()).all(|(m, &d)| m.shape() == (d, d))
                })
                && self.central.shape() == (q.central_rank(), q.central_rank());
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("gauge element does not match quiver".into()))
        }
    }
}

/// `x -> g_head x g_tail^-1`, `y -> g_tail y g_head^-1`, loops by central conjugation.
pub fn apply_gauge(q: &CometQuiver, rep: &Representation, gauge: &GaugeElement) -> Result<Representation> {
    rep.check_shape(q)?;
    gauge.check(q)?;
    let inv = gauge.inverse()?;
    let mut out = rep.clone();
    for (i, arm) in out.arms.iter_mut().enumerate() {
        let last = arm.edges.len();
        for (k, e) in arm.edges.iter_mut().enumerate() {
            let (g_tail, g_head) = (gauge.node(i, k, last), gauge.node(i, k + 1, last));
            let (gi_tail, gi_head) = (inv.node(i, k, last), inv.node(i, k + 1, last));
            for x in &mut e.x {
                *x = g_head * &*x * gi_tail;
            }
            for y in &mut e.y {
                *y = g_tail * &*y * gi_head;
            }
        }
    }
    for l in &mut out.loops {
        l.a = &gauge.central * &l.a * &inv.central;
        l.b = &gauge.central * &l.b * &inv.central;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quaternion {
    I,
    J,
    K,
}

impl Quaternion {
    pub const ALL: [Quaternion; 3] = [Quaternion::I, Quaternion::J, Quaternion::K];
}

/// The three complex structures, slotwise:
/// `I: (ix, iy, ia, ib)`, `J: (-y*, x*, -b*, a*)`, `K: (-iy*, ix*, -ib*, ia*)`.
pub fn quaternion_apply(rep: &Representation, which: Quaternion) -> Representation {
    let i = linalg::I;
    match which {
        Quaternion::I => rep.scale(i),
        Quaternion::J | Quaternion::K => {
            let s = if which == Quaternion::J { Complex64::new(1.0, 0.0) } else { i };
            Representation {
                arms: rep
                    .arms
                    .iter()
                    .map(|arm| ArmRep {
                        edges: arm
                            .edges
                            .iter()
                            .map(|e| EdgeRep {
                                x: e.y.iter().map(|y| dagger(y) * (-s)).collect(),
                                y: e.x.iter().map(|x| dagger(x) * s).collect(),
                            })
                            .collect(),
                    })
                    .collect(),
                loops: rep.loops.iter().map(|l| LoopRep { a: dagger(&l.b) * (-s), b: dagger(&l.a) * s }).collect(),
            }
        }
    }
}

/// `e^{i theta}`, exact when `theta` is a whole number of quarter turns.
pub fn unit_phase(theta: f64) -> Complex64 {
    let quarters = theta / std::f64::consts::FRAC_PI_2;
    if quarters == quarters.round() && quarters.abs() < 1e15 {
        match (quarters as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, theta)
    }
}

/// `[x, y, a, b] -> [x, e^{i theta} y, a, e^{i theta} b]`.
pub fn circle_action(rep: &Representation, theta: f64) -> Representation {
    let phase = unit_phase(theta);
    rep.map_slots(|m, momentum| if momentum { m * phase } else { m.clone() })
}

/// Where an infinitesimal gauge generator acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Arm { arm: usize, node: usize },
    Central,
}

/// Infinitesimal action of `xi` placed at a single node:
/// `dx = xi_head x - x xi_tail`, `dy = xi_tail y - y xi_head`, `da = [xi, a]`.
pub fn infinitesimal_action(q: &CometQuiver, rep: &Representation, at: Node, xi: &CMat) -> Representation {
    let mut out = Representation::zeros(q);
    match at {
        Node::Arm { arm, node } => {
            let edges = &rep.arms[arm].edges;
            if node > 0 {
                let e = &edges[node - 1];
                let d = &mut out.arms[arm].edges[node - 1];
                for (c, x) in e.x.iter().enumerate() {
                    d.x[c] = xi * x;
                }
                for (c, y) in e.y.iter().enumerate() {
                    d.y[c] = -(y * xi);
                }
            }
            let e = &edges[node];
            let d = &mut out.arms[arm].edges[node];
            for (c, x) in e.x.iter().enumerate() {
                d.x[c] = -(x * xi);
            }
            for (c, y) in e.y.iter().enumerate() {
                d.y[c] = xi * y;
            }
        }
        Node::Central => {
            for (arm, d) in rep.arms.iter().zip(out.arms.iter_mut()) {
                let last = arm.edges.len() - 1;
                let (e, d) = (&arm.edges[last], &mut d.edges[last]);
                for (c, x) in e.x.iter().enumerate() {
                    d.x[c] = xi * x;
                }
                for (c, y) in e.y.iter().enumerate() {
                    d.y[c] = -(y * xi);
                }
            }
            for (l, d) in rep.loops.iter().zip(out.loops.iter_mut()) {
                d.a = commutator(xi, &l.a);
                d.b = commutator(xi, &l.b);
            }
        }
    }
    out
}

/// Images of an orthonormal basis of the compact gauge Lie algebra
/// (`u(r_k)` at outer nodes, `su(r)` at the centre), outer nodes first.
pub fn gauge_orbit_tangent_basis(q: &CometQuiver, rep: &Representation) -> Vec<FlatCoordinates> {
    let mut out = Vec::with_capacity(q.gauge_dim());
    for (i, flag) in q.arms().iter().enumerate() {
        for (k, &d) in flag.entries()[..flag.len() - 1].iter().enumerate() {
            for xi in unitary_algebra_basis(d, false) {
                out.push(infinitesimal_action(q, rep, Node::Arm { arm: i, node: k }, &xi).to_flat());
            }
        }
    }
    for xi in unitary_algebra_basis(q.central_rank(), true) {
        out.push(infinitesimal_action(q, rep, Node::Central, &xi).to_flat());
    }
    out
}

/// Columns are the gauge tangent vectors.
pub fn gauge_tangent_matrix(q: &CometQuiver, rep: &Representation) -> RMat {
    let basis = gauge_orbit_tangent_basis(q, rep);
    let n = Layout::new(q).real_dim();
    RMat::from_fn(n, basis.len(), |row, col| basis[col].0[row])
}
