//! Small dense complex linear-algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `M - (tr M / n) Id`.
pub fn trace_free(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let shift = trace(m) / n as f64;
    let mut out = m.clone();
    for k in 0..n {
        out[(k, k)] -= shift;
    }
    out
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Frobenius norm, `sqrt(Re tr(M M*))`.
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob_dist(a: &CMat, b: &CMat) -> f64 {
    frob(&(a - b))
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && frob_dist(m, &dagger(m)) <= tol
}

pub fn mat_pow(m: &CMat, p: usize) -> CMat {
    let mut out = identity(m.nrows());
    for _ in 0..p {
        out = &out * m;
    }
    out
}

/// Frobenius-orthonormal real basis of the trace-free `r x r` matrices.
///
/// Order: off-diagonal units `E_pq` (p != q) row-major, then the diagonal
/// generators `diag(1,..,1,-k,0,..)/sqrt(k(k+1))` for `k = 1..r-1`.
pub fn sl_basis(r: usize) -> Vec<RMat> {
    let mut basis = Vec::with_capacity(r * r - 1);
    for p in 0..r {
        for q in 0..r {
            if p != q {
                let mut e = RMat::zeros(r, r);
                e[(p, q)] = 1.0;
                basis.push(e);
            }
        }
    }
    for k in 1..r {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut h = RMat::zeros(r, r);
        for d in 0..k {
            h[(d, d)] = 1.0 / norm;
        }
        h[(k, k)] = -(k as f64) / norm;
        basis.push(h);
    }
    basis
}

/// Coordinates of a trace-free matrix in [`sl_basis`]; complex-linear in `m`.
pub fn sl_coordinates(m: &CMat, basis: &[RMat]) -> Vec<Complex64> {
    basis.iter().map(|e| e.iter().zip(m.iter()).map(|(&w, z)| z * w).sum()).collect()
}

pub fn sl_from_coordinates(coords: &[Complex64], basis: &[RMat], r: usize) -> CMat {
    let mut m = zeros(r, r);
    for (z, e) in coords.iter().zip(basis) {
        for (dst, &w) in m.iter_mut().zip(e.iter()) {
            *dst += z * w;
        }
    }
    m
}

/// Frobenius-orthonormal basis of `u(n)` (anti-Hermitian), or of `su(n)` when
/// `special` is set.
pub fn unitary_algebra_basis(n: usize, special: bool) -> Vec<CMat> {
    let mut basis = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for p in 0..n {
        for q in (p + 1)..n {
            let mut re = zeros(n, n);
            re[(p, q)] = c(s, 0.0);
            re[(q, p)] = c(-s, 0.0);
            basis.push(re);
            let mut im = zeros(n, n);
            im[(p, q)] = c(0.0, s);
            im[(q, p)] = c(0.0, s);
            basis.push(im);
        }
    }
    if special {
        for h in sl_basis(n).into_iter().skip(n * n - n) {
            basis.push(h.map(|w| c(0.0, w)));
        }
    } else {
        for p in 0..n {
            let mut d = zeros(n, n);
            d[(p, p)] = I;
            basis.push(d);
        }
    }
    basis
}

/// Complex Gaussian matrix with `E|z|^2 = scale^2` per entry.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMat {
    let s = scale * std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(s * re, s * im)
    })
}

/// Haar-distributed unitary via QR of a Gaussian matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = random_gaussian(rng, n, n, 1.0);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q;
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for row in 0..n {
            out[(row, k)] *= phase;
        }
    }
    out
}

/// Rescale a square matrix to determinant one (principal `n`-th root).
pub fn normalize_det(m: &CMat) -> CMat {
    let n = m.nrows();
    let det = m.determinant();
    let root = det.powf(1.0 / n as f64);
    m / root
}

/// Outcome of a numerical rank decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// `sigma_rank / max(sigma_{rank+1}, eps * sigma_max)`; 0 when the matrix vanishes.
    pub gap: f64,
    pub cutoff: f64,
}

/// Rank from descending singular values; cutoff `max(rows, cols) * eps * sigma_max`.
pub fn rank_from_singular_values(sv: &[f64], rows: usize, cols: usize) -> RankInfo {
    let smax = sv.first().copied().unwrap_or(0.0);
    let cutoff = rows.max(cols) as f64 * f64::EPSILON * smax;
    if smax == 0.0 {
        return RankInfo { rank: 0, gap: 0.0, cutoff };
    }
    let rank = sv.iter().take_while(|&&s| s > cutoff).count();
    let tail = sv.get(rank).copied().unwrap_or(0.0);
    let gap = if rank == 0 { 0.0 } else { sv[rank - 1] / tail.max(f64::EPSILON * smax) };
    RankInfo { rank, gap, cutoff }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn real_rank(m: &RMat) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo { rank: 0, gap: 0.0, cutoff: 0.0 };
    }
    let sv = sorted_desc(m.clone().singular_values().iter().copied().collect());
    rank_from_singular_values(&sv, m.nrows(), m.ncols())
}

pub fn complex_rank(m: &CMat) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo { rank: 0, gap: 0.0, cutoff: 0.0 };
    }
    let sv = sorted_desc(m.clone().singular_values().iter().copied().collect());
    rank_from_singular_values(&sv, m.nrows(), m.ncols())
}

/// Orthonormal basis (as columns) of the null space of `m`, plus the rank decision.
pub fn null_space(m: &RMat) -> (RMat, RankInfo) {
    let cols = m.ncols();
    if cols == 0 {
        return (RMat::zeros(0, 0), RankInfo { rank: 0, gap: 0.0, cutoff: 0.0 });
    }
    // pad with zero rows so the thin SVD returns a full set of right vectors
    let rows = m.nrows().max(cols);
    let mut padded = RMat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let info = rank_from_singular_values(&sv, m.nrows(), cols);
    let kernel: Vec<DVector<f64>> = order[info.rank..].iter().map(|&k| v_t.row(k).transpose()).collect();
    let basis = if kernel.is_empty() { RMat::zeros(cols, 0) } else { RMat::from_columns(&kernel) };
    (basis, info)
}
