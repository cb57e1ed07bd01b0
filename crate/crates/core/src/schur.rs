//! Complex Schur decomposition `A = Q T Q*` with `T` upper triangular.
//!
//! Householder reduction to Hessenberg form followed by an explicit
//! single-shift QR iteration with Wilkinson shifts. Intended for the small
//! `N×N` blocks of symbol values (`N ≤ 8`); not tuned for large matrices.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;

use crate::cmat::ComplexMatrix;
use crate::error::{Error, Result};

/// `a = q · t · q^H`, `t` upper triangular, `q` unitary.
pub struct SchurDecomp {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
}

impl SchurDecomp {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.n_rows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Eigenvalues only (diagonal of the Schur factor).
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(schur(a)?.eigenvalues())
}

pub fn schur(a: &ComplexMatrix) -> Result<SchurDecomp> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(a.n_rows(), a.n_cols()));
    }
    let n = a.n_rows();
    if n == 0 {
        return Ok(SchurDecomp { q: ComplexMatrix::identity(0), t: ComplexMatrix::identity(0) });
    }
    if n == 1 {
        return Ok(SchurDecomp { q: ComplexMatrix::identity(1), t: a.clone() });
    }
    let (mut h, mut q) = hessenberg(a);
    qr_iteration(&mut h, &mut q)?;
    // clear the negligible subdiagonal so T is exactly triangular
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = Complex64::zero();
        }
    }
    Ok(SchurDecomp { q, t: h })
}

/// Householder reduction `a = q h q^H` with `h` upper Hessenberg.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.n_rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut v = vec![Complex64::zero(); n - k - 1];
        for i in 0..v.len() {
            v[i] = h[(k + 1 + i, k)];
        }
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if v[0].is_zero() { Complex64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        v[0] += phase * norm_x;
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // H := P H, P = I - beta v v^H (rows k+1.., all columns)
        for j in 0..n {
            let mut dot = Complex64::zero();
            for i in 0..v.len() {
                dot += v[i].conj() * h[(k + 1 + i, j)];
            }
            dot *= beta;
            for i in 0..v.len() {
                let t = v[i] * dot;
                h[(k + 1 + i, j)] -= t;
            }
        }
        // H := H P (all rows, columns k+1..)
        for i in 0..n {
            let mut dot = Complex64::zero();
            for j in 0..v.len() {
                dot += h[(i, k + 1 + j)] * v[j];
            }
            dot *= beta;
            for j in 0..v.len() {
                let t = dot * v[j].conj();
                h[(i, k + 1 + j)] -= t;
            }
        }
        // Q := Q P
        for i in 0..n {
            let mut dot = Complex64::zero();
            for j in 0..v.len() {
                dot += q[(i, k + 1 + j)] * v[j];
            }
            dot *= beta;
            for j in 0..v.len() {
                let t = dot * v[j].conj();
                q[(i, k + 1 + j)] -= t;
            }
        }
        // zero out the annihilated entries exactly
        for i in k + 2..n {
            h[(i, k)] = Complex64::zero();
        }
    }
    (h, q)
}

/// Givens rotation `G = [[c, s], [-s̄, c]]` with real `c` such that
/// `G·[a, b]^T = [r, 0]^T`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    if b.is_zero() {
        return (1.0, Complex64::zero(), a);
    }
    if a.is_zero() {
        let s = b.conj() / b.norm();
        return (0.0, s, Complex64::new(b.norm(), 0.0));
    }
    let d = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / d;
    let phase = a / a.norm();
    let s = phase * b.conj() / d;
    (c, s, phase * d)
}

fn qr_iteration(h: &mut ComplexMatrix, q: &mut ComplexMatrix) -> Result<()> {
    let n = h.n_rows();
    let eps = f64::EPSILON;
    let hnorm = h.max_norm().max(1e-300);
    let mut hi = n - 1;
    let mut stuck = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n * n + 200;
    loop {
        // deflate negligible subdiagonal entries
        for i in 1..=hi {
            let thr = eps * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm()).max(hnorm * eps);
            if h[(i, i - 1)].norm() <= thr {
                h[(i, i - 1)] = Complex64::zero();
            }
        }
        while hi > 0 && h[(hi, hi - 1)].is_zero() {
            hi -= 1;
            stuck = 0;
        }
        if hi == 0 {
            return Ok(());
        }
        let mut lo = hi;
        while lo > 0 && !h[(lo, lo - 1)].is_zero() {
            lo -= 1;
        }
        total += 1;
        stuck += 1;
        if total > max_total {
            return Err(Error::EigenNonConvergence);
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c2 = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mut mu = {
            let tr2 = (a + d) * 0.5;
            let disc = ((a - d) * 0.5).powi(2) + b * c2;
            let root = disc.sqrt();
            let l1 = tr2 + root;
            let l2 = tr2 - root;
            if (l1 - d).norm() <= (l2 - d).norm() {
                l1
            } else {
                l2
            }
        };
        if stuck % 16 == 15 {
            // exceptional shift to break rare cycling
            mu = d + Complex64::new(1.5 * c2.norm(), 0.5 * c2.norm());
        }
        single_shift_sweep(h, q, lo, hi, mu);
    }
}

/// One explicit shifted QR step on the active window `[lo, hi]`.
fn single_shift_sweep(
    h: &mut ComplexMatrix,
    q: &mut ComplexMatrix,
    lo: usize,
    hi: usize,
    mu: Complex64,
) {
    let n = h.n_rows();
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    // QR via Givens on the Hessenberg window: rotations stored for the RQ pass
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s, r) = givens(h[(i, i)], h[(i + 1, i)]);
        rots.push((c, s));
        h[(i, i)] = r;
        h[(i + 1, i)] = Complex64::zero();
        for j in i + 1..n {
            let x = h[(i, j)];
            let y = h[(i + 1, j)];
            h[(i, j)] = x * c + y * s;
            h[(i + 1, j)] = -x * s.conj() + y * c;
        }
    }
    // H := R Q^H_rot: apply conjugated rotations on columns
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        let top = (i + 2).min(hi + 1);
        for r in 0..top {
            let x = h[(r, i)];
            let y = h[(r, i + 1)];
            h[(r, i)] = x * c + y * s.conj();
            h[(r, i + 1)] = -x * s + y * c;
        }
        for r in 0..n {
            let x = q[(r, i)];
            let y = q[(r, i + 1)];
            q[(r, i)] = x * c + y * s.conj();
            q[(r, i + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}
