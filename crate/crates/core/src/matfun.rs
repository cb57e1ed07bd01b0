//! Matrix functions: exponential, principal logarithm, and `sinc`.
//!
//! * `expm` — scaling and squaring with the degree-13 Padé approximant.
//! * `logm_principal` — complex Schur form, inverse scaling and squaring on
//!   the triangular factor (Björck–Hammarling square roots, partial-fraction
//!   Padé for `log(I+X)`). Supports non-diagonalizable inputs; fails exactly
//!   when an eigenvalue lies on the branch cut `(-∞, 0]`.
//! * `sincm` — the entire function `sin(πz)/(πz)` of a matrix, by Taylor
//!   series plus the double-angle recurrence `sinc(2X) = sinc(X)·cos(πX)`.
//!   This is what the closed-form Fourier coefficients of jump symbols need,
//!   and it is well defined for singular and defective arguments alike.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cmat::{ComplexMatrix, LuFactors};
use crate::error::{Error, Result};
use crate::legendre::gauss_legendre_on;
use crate::schur::schur;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential, accurate to ~1e-14 relative for the block sizes here.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    debug_assert!(a.is_square());
    let n = a.n_rows();
    if n == 1 {
        return ComplexMatrix::scalar(a[(0, 0)].exp());
    }
    let norm = a.one_norm();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as u32 } else { 0 };
    let a = a.scale(Complex64::new(0.5f64.powi(s as i32), 0.0));

    let a2 = a.mul(&a);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);
    let id = ComplexMatrix::identity(n);
    let re = |x: f64| Complex64::new(x, 0.0);

    let u_inner = a6
        .scale(re(PADE13[13]))
        .add(&a4.scale(re(PADE13[11])))
        .add(&a2.scale(re(PADE13[9])));
    let u_poly = a6
        .mul(&u_inner)
        .add(&a6.scale(re(PADE13[7])))
        .add(&a4.scale(re(PADE13[5])))
        .add(&a2.scale(re(PADE13[3])))
        .add(&id.scale(re(PADE13[1])));
    let u = a.mul(&u_poly);

    let v_inner = a6
        .scale(re(PADE13[12]))
        .add(&a4.scale(re(PADE13[10])))
        .add(&a2.scale(re(PADE13[8])));
    let v = a6
        .mul(&v_inner)
        .add(&a6.scale(re(PADE13[6])))
        .add(&a4.scale(re(PADE13[4])))
        .add(&a2.scale(re(PADE13[2])))
        .add(&id.scale(re(PADE13[0])));

    let lhs = v.sub(&u);
    let rhs = v.add(&u);
    let mut f = LuFactors::new(&lhs).expect("square").solve(&rhs);
    for _ in 0..s {
        f = f.mul(&f);
    }
    f
}

/// Distance of `z` to the closed negative real half-line `(-∞, 0]`.
pub fn dist_to_branch_cut(z: Complex64) -> f64 {
    if z.re <= 0.0 {
        z.im.abs()
    } else {
        z.norm()
    }
}

/// Principal matrix logarithm. Errors with `BranchFailure` when an eigenvalue
/// lies on the cut; callers that need regularity diagnostics should run the
/// Schur form themselves and use [`logm_triangular`].
pub fn logm_principal(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dec = schur(a)?;
    for ev in dec.eigenvalues() {
        if dist_to_branch_cut(ev) == 0.0 {
            return Err(Error::BranchFailure("eigenvalue on the branch cut (-inf, 0]"));
        }
    }
    let lt = logm_triangular(&dec.t)?;
    Ok(dec.q.mul(&lt).mul(&dec.q.adjoint()))
}

/// Principal square root of an upper triangular matrix (Björck–Hammarling).
pub fn sqrtm_triangular(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = t.n_rows();
    let mut u = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        u[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= u[(i, k)] * u[(k, j)];
            }
            let den = u[(i, i)] + u[(j, j)];
            if den.norm() < 1e-300 {
                return Err(Error::BranchFailure("square root recurrence broke down"));
            }
            u[(i, j)] = s / den;
        }
    }
    Ok(u)
}

/// Principal logarithm of an upper triangular matrix with spectrum off
/// `(-∞, 0]`, by inverse scaling and squaring.
pub fn logm_triangular(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = t.n_rows();
    let id = ComplexMatrix::identity(n);
    let mut t = t.clone();
    let mut k = 0u32;
    while t.sub(&id).one_norm() > 0.25 {
        if k >= 60 {
            return Err(Error::BranchFailure("square-root sequence did not contract"));
        }
        t = sqrtm_triangular(&t)?;
        k += 1;
    }
    let x = t.sub(&id);
    // [8/8] Padé via Gauss-Legendre partial fractions on [0,1]:
    // log(I+X) ≈ Σ w_j X (I + x_j X)^{-1}
    let (nodes, weights) = gauss_legendre_on(8, 0.0, 1.0);
    let mut log = ComplexMatrix::zeros(n, n);
    for (xj, wj) in nodes.iter().zip(&weights) {
        let lhs = x.scale(Complex64::new(*xj, 0.0)).add(&id);
        let y = LuFactors::new(&lhs)?.solve(&x);
        log = log.add(&y.scale(Complex64::new(*wj, 0.0)));
    }
    Ok(log.scale(Complex64::new(2.0f64.powi(k as i32), 0.0)))
}

/// `sinc(A) = sin(πA)·(πA)^{-1}` extended to the entire function; exact at
/// singular and defective arguments.
pub fn sincm(a: &ComplexMatrix) -> ComplexMatrix {
    debug_assert!(a.is_square());
    let n = a.n_rows();
    let scaled_norm = core::f64::consts::PI * a.one_norm();
    let s = if scaled_norm > 1.0 { scaled_norm.log2().ceil() as u32 + 1 } else { 0 };
    let w = a.scale(Complex64::new(0.5f64.powi(s as i32), 0.0));
    // P = (πW)², shared by both series
    let pw = w.scale(Complex64::new(core::f64::consts::PI, 0.0));
    let p = pw.mul(&pw);
    let id = ComplexMatrix::identity(n);

    // sinc series: Σ (-1)^m P^m / (2m+1)!
    let mut sinc = id.clone();
    let mut term = id.clone();
    for m in 1..60 {
        let denom = -1.0 / ((2 * m) as f64 * (2 * m + 1) as f64);
        term = term.mul(&p).scale(Complex64::new(denom, 0.0));
        sinc = sinc.add(&term);
        if term.max_norm() <= 1e-18 * sinc.max_norm().max(1e-30) {
            break;
        }
    }
    // cos series: Σ (-1)^m P^m / (2m)!
    let mut cos = id.clone();
    let mut cterm = id.clone();
    for m in 1..60 {
        let denom = -1.0 / ((2 * m - 1) as f64 * (2 * m) as f64);
        cterm = cterm.mul(&p).scale(Complex64::new(denom, 0.0));
        cos = cos.add(&cterm);
        if cterm.max_norm() <= 1e-18 * cos.max_norm().max(1e-30) {
            break;
        }
    }
    // sinc(2X) = sinc(X) cos(πX), cos(2πX) = 2cos²(πX) - I
    for _ in 0..s {
        sinc = sinc.mul(&cos);
        cos = cos.mul(&cos).scale(Complex64::new(2.0, 0.0)).sub(&id);
    }
    sinc
}

/// `sin(πA)` via `πA·sinc(A)`.
pub fn sin_pi(a: &ComplexMatrix) -> ComplexMatrix {
    a.scale(Complex64::new(core::f64::consts::PI, 0.0)).mul(&sincm(a))
}

/// Eigenvalues of the Hermitian part `(A + A*)/2`, ascending.
pub fn hermitian_part_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0));
    let mut ev: Vec<f64> = crate::schur::eigenvalues(&h)?.iter().map(|z| z.re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(ev)
}
