//! Geometric readouts of a representation: polygon sides in `su(r)`, Higgs
//! residues, nilpotency, the residue-sum identity, genus-zero field values and
//! characteristic coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator, dagger, frob, identity, mat_pow, trace, trace_free, CMat};
use crate::quiver::CometQuiver;
use crate::rep::Representation;

/// Sides as Hermitian trace-free matrices: one per arm, then one per loop.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonFigure {
    pub sides: Vec<CMat>,
    pub lengths: Vec<f64>,
    pub arm_sides: usize,
    pub closure_defect: f64,
}

impl PolygonFigure {
    pub fn arm_lengths(&self) -> &[f64] {
        &self.lengths[..self.arm_sides]
    }

    pub fn loop_lengths(&self) -> &[f64] {
        &self.lengths[self.arm_sides..]
    }
}

/// Frobenius length of the side `(x x*)_0` of a solved arm at level `alpha`.
///
/// On shell `x x*` at the centre has rank one with eigenvalue `alpha`, so the
/// trace-free part has length `alpha sqrt((r - 1) / r)`; this equals
/// `alpha / sqrt(r)` only for `r = 2`.
pub fn arm_side_length(alpha: f64, r: usize) -> f64 {
    alpha * ((r as f64 - 1.0) / r as f64).sqrt()
}

/// Arm sides `(sum x x* - y* y)_0` on the innermost edge, loop sides
/// `[a, a*] + [b, b*]`, and the Frobenius norm of their sum.
pub fn polygon_sides(q: &CometQuiver, rep: &Representation) -> Result<PolygonFigure> {
    rep.check_shape(q)?;
    let mut sides = Vec::with_capacity(q.n_arms() + q.loops());
    for arm in &rep.arms {
        let e = arm.edges.last().expect("arms have an edge");
        let sum =
            e.x.iter()
                .zip(&e.y)
                .map(|(x, y)| x * dagger(x) - dagger(y) * y)
                .fold(CMat::zeros(q.central_rank(), q.central_rank()), |acc, m| acc + m);
        sides.push(trace_free(&sum));
    }
    for l in &rep.loops {
        sides.push(commutator(&l.a, &dagger(&l.a)) + commutator(&l.b, &dagger(&l.b)));
    }
    let r = q.central_rank();
    let total = sides.iter().fold(CMat::zeros(r, r), |acc, s| acc + s);
    Ok(PolygonFigure {
        lengths: sides.iter().map(frob).collect(),
        arm_sides: q.n_arms(),
        closure_defect: frob(&total),
        sides,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HiggsData {
    pub punctures: Vec<Complex64>,
    /// `(sum x y)_0` on the innermost edge of each arm.
    pub residues: Vec<CMat>,
    /// `sum_j [b_j, a_j]`.
    pub loop_commutator_sum: CMat,
    /// Smallest `p <= r` with `|R^p| < 1e-8 |R|^p`; `None` if no such `p`.
    pub nilpotency_orders: Vec<Option<usize>>,
}

/// Relative threshold for deciding `R^p = 0`.
pub const NILPOTENCY_THRESHOLD: f64 = 1e-8;

/// `|R^p| / |R|^p`, or 0 for `R = 0`.
pub fn nilpotency_defect(m: &CMat, p: usize) -> f64 {
    let n = frob(m);
    if n == 0.0 {
        return 0.0;
    }
    frob(&mat_pow(m, p)) / n.powi(p as i32)
}

pub fn nilpotency_order(m: &CMat) -> Option<usize> {
    if frob(m) == 0.0 {
        return Some(1);
    }
    (1..=m.nrows()).find(|&p| nilpotency_defect(m, p) < NILPOTENCY_THRESHOLD)
}

pub fn residues(q: &CometQuiver, rep: &Representation) -> Result<Vec<CMat>> {
    rep.check_shape(q)?;
    let r = q.central_rank();
    Ok(rep
        .arms
        .iter()
        .map(|arm| {
            let e = arm.edges.last().expect("arms have an edge");
            trace_free(&e.x.iter().zip(&e.y).fold(CMat::zeros(r, r), |acc, (x, y)| acc + x * y))
        })
        .collect())
}

fn loop_commutator_sum(q: &CometQuiver, rep: &Representation) -> CMat {
    let r = q.central_rank();
    rep.loops.iter().fold(CMat::zeros(r, r), |acc, l| acc + commutator(&l.b, &l.a))
}

pub fn higgs_data(q: &CometQuiver, rep: &Representation, punctures: &[Complex64]) -> Result<HiggsData> {
    if punctures.len() != q.n_arms() {
        return Err(Error::LengthMismatch { expected: q.n_arms(), got: punctures.len() });
    }
    if punctures.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidOption("punctures must be finite".into()));
    }
    for (i, a) in punctures.iter().enumerate() {
        if punctures[..i].contains(a) {
            return Err(Error::DuplicatePunctures);
        }
    }
    let residues = residues(q, rep)?;
    Ok(HiggsData {
        punctures: punctures.to_vec(),
        nilpotency_orders: residues.iter().map(nilpotency_order).collect(),
        loop_commutator_sum: loop_commutator_sum(q, rep),
        residues,
    })
}

/// `|sum_i R_i - sum_j [b_j, a_j]|`.
pub fn residue_sum_check(q: &CometQuiver, rep: &Representation) -> Result<f64> {
    let r = q.central_rank();
    let sum = residues(q, rep)?.into_iter().fold(CMat::zeros(r, r), |acc, m| acc + m);
    Ok(frob(&(sum - loop_commutator_sum(q, rep))))
}

/// `sum_i R_i / (z - z_i)`, the `dz` coefficient of the genus-zero field.
pub fn higgs_eval(data: &HiggsData, z: Complex64) -> Result<CMat> {
    let r = data.loop_commutator_sum.nrows();
    let mut out = CMat::zeros(r, r);
    for (i, (zi, res)) in data.punctures.iter().zip(&data.residues).enumerate() {
        let d = z - zi;
        if d.norm() <= f64::EPSILON * (1.0 + zi.norm()) {
            return Err(Error::EvaluationAtPole(i));
        }
        out += res / d;
    }
    Ok(out)
}

/// Coefficients `c_1..c_k` of `det(t I - M) = t^k + sum_j c_j t^(k-j)`, from
/// the Schur eigenvalues.
pub fn char_coefficients(m: &CMat) -> Vec<Complex64> {
    assert!(m.is_square(), "characteristic coefficients need a square matrix");
    match m.clone().schur().eigenvalues() {
        Some(ev) => coefficients_from_roots(ev.as_slice()),
        None => faddeev_leverrier(m),
    }
}

/// Monic polynomial coefficients (without the leading 1) from its roots.
pub fn coefficients_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for &root in roots {
        poly.push(Complex64::new(0.0, 0.0));
        for k in (1..poly.len()).rev() {
            let prev = poly[k - 1];
            poly[k] -= root * prev;
        }
    }
    poly[1..].to_vec()
}

/// Faddeev-LeVerrier recursion; exact in exact arithmetic, used as a second
/// route to the same coefficients.
pub fn faddeev_leverrier(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = CMat::zeros(n, n);
    let mut c = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        mk = m * (mk + identity(n) * c);
        c = -trace(&mk) / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Characteristic coefficients of the genus-zero field at sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharSample {
    pub z: Complex64,
    pub coefficients: Vec<Complex64>,
}

pub fn sample_char_coefficients(data: &HiggsData, points: &[Complex64]) -> Result<Vec<CharSample>> {
    points.iter().map(|&z| Ok(CharSample { z, coefficients: char_coefficients(&higgs_eval(data, z)?) })).collect()
}
