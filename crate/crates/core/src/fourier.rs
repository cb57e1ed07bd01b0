//! Matrix Fourier coefficients `a_k = (1/2π)∫ a(e^{iθ}) e^{-ikθ} dθ`.
//!
//! Two routes:
//!
//! * closed form for canonical jump factors: the coefficients of `u_{B,τ}`
//!   are `τ^{-k} · f_k(B)` with the scalar map `f_k(β) = sin(πβ)/(π(β-k))`
//!   applied as a matrix function;
//! * jump-aware composite Gauss–Legendre quadrature for everything else:
//!   panel boundaries include every jump of the symbol, so each panel
//!   integrand is smooth, and the panel count doubles until two refinements
//!   agree within the requested tolerance.
//!
//! Per-coefficient quadrature is `O(K·points)` rather than FFT-fast, but it
//! keeps full accuracy in the presence of jumps, which uniform-grid FFT
//! cannot (the coefficients only decay like `1/k`).

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;

use crate::cmat::{ComplexMatrix, LuFactors};
use crate::error::{Error, Result};
use crate::legendre::gauss_legendre;
use crate::matfun::sincm;
use crate::symbol::{Factor, SymbolExpr, UnitPoint, TAU};

/// Coefficients `φ_k` for `k ∈ [-K, K]`, with a decay estimate.
#[derive(Debug, Clone)]
pub struct FourierTable {
    n: usize,
    k_max: i64,
    /// Index `k + k_max`.
    coeffs: Vec<ComplexMatrix>,
    /// Fitted constant `C` in `‖φ_k‖ ≈ C/|k|` over the top half of the range.
    pub est_tail: f64,
}

impl FourierTable {
    pub fn from_coeffs(n: usize, k_max: i64, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        if coeffs.len() != (2 * k_max + 1) as usize {
            return Err(Error::DimensionMismatch(coeffs.len(), (2 * k_max + 1) as usize));
        }
        let mut t = Self { n, k_max, coeffs, est_tail: 0.0 };
        t.est_tail = t.fit_tail_constant();
        Ok(t)
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn coeff(&self, k: i64) -> &ComplexMatrix {
        assert!(k.abs() <= self.k_max, "coefficient {k} outside table range ±{}", self.k_max);
        &self.coeffs[(k + self.k_max) as usize]
    }

    /// Coefficient with zero-extension beyond the stored range (valid for
    /// Laurent polynomials whose degree is within the table).
    pub fn coeff_or_zero(&self, k: i64) -> ComplexMatrix {
        if k.abs() <= self.k_max {
            self.coeff(k).clone()
        } else {
            ComplexMatrix::zeros(self.n, self.n)
        }
    }

    /// Table of the reflected symbol `ã`: index-reversed coefficients.
    pub fn tilde(&self) -> FourierTable {
        let coeffs = self.coeffs.iter().rev().cloned().collect();
        Self { n: self.n, k_max: self.k_max, coeffs, est_tail: self.est_tail }
    }

    fn fit_tail_constant(&self) -> f64 {
        let lo = (self.k_max / 2).max(1);
        let mut c: f64 = 0.0;
        for k in lo..=self.k_max {
            c = c.max(self.coeff(k).max_norm() * k as f64);
            c = c.max(self.coeff(-k).max_norm() * k as f64);
        }
        c
    }

    /// Least-squares decay exponent `p` of `‖φ_k‖ ≈ C·|k|^p`, fitted over
    /// `|k| ∈ [max(2, K/4), K]`. Returns `-inf` when the tail is numerically
    /// zero (finite Laurent polynomials).
    pub fn decay_exponent(&self) -> f64 {
        let lo = (self.k_max / 4).max(2);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in lo..=self.k_max {
            for &kk in &[k, -k] {
                let norm = self.coeff(kk).max_norm();
                if norm > 1e-200 {
                    xs.push((k as f64).ln());
                    ys.push(norm.ln());
                }
            }
        }
        if xs.len() < 4 {
            return f64::NEG_INFINITY;
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            num += (x - mx) * (y - my);
            den += (x - mx) * (x - mx);
        }
        num / den
    }
}

/// Closed-form Fourier coefficient of the canonical jump `u_{B,τ}`:
/// `τ^{-k}·f_k(B)`, `f_k(β) = sin(πβ)/(π(β-k))`, via `f_k(B) =
/// B·sinc(B)·(B-kI)^{-1}` for `k ≠ 0` and the entire limit `sinc(B)` at `k=0`.
pub fn fourier_jump(b: &ComplexMatrix, tau: UnitPoint, k: i64) -> Result<ComplexMatrix> {
    if !b.is_square() {
        return Err(Error::DimensionMismatch(b.n_rows(), b.n_cols()));
    }
    let f = if k == 0 {
        sincm(b)
    } else {
        let shifted = b.add_scaled_identity(Complex64::new(-(k as f64), 0.0));
        let lu = LuFactors::new(&shifted)?;
        if lu.is_singular() {
            return Err(Error::BranchFailure("jump coefficient resolvent is singular: B has an eigenvalue at k"));
        }
        lu.solve(&b.mul(&sincm(b)))
    };
    let phase = Complex64::from_polar(1.0, -(k as f64) * tau.theta());
    Ok(f.scale(phase))
}

/// Entry-wise Kahan-compensated matrix accumulator; keeps panel sums accurate
/// when symbol values are large compared to the resulting coefficient.
struct KahanMatrix {
    sum: Vec<Complex64>,
    comp: Vec<Complex64>,
    n_rows: usize,
    n_cols: usize,
}

impl KahanMatrix {
    fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            sum: alloc::vec![Complex64::zero(); n_rows * n_cols],
            comp: alloc::vec![Complex64::zero(); n_rows * n_cols],
            n_rows,
            n_cols,
        }
    }

    fn add_scaled(&mut self, m: &ComplexMatrix, w: Complex64) {
        for (i, v) in m.data().iter().enumerate() {
            let y = v * w - self.comp[i];
            let t = self.sum[i] + y;
            self.comp[i] = (t - self.sum[i]) - y;
            self.sum[i] = t;
        }
    }

    fn into_matrix(self) -> ComplexMatrix {
        ComplexMatrix::from_rows(self.n_rows, self.n_cols, self.sum).expect("sized")
    }
}

/// One composite pass over `[a, b]` with `panels` panels of the base rule.
fn composite_panel_integral(
    f: &mut dyn FnMut(f64) -> Result<ComplexMatrix>,
    n: usize,
    a: f64,
    b: f64,
    panels: usize,
    base: &(Vec<f64>, Vec<f64>),
) -> Result<ComplexMatrix> {
    let mut acc = KahanMatrix::new(n, n);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let pa = a + p as f64 * width;
        let mid = pa + 0.5 * width;
        let half = 0.5 * width;
        for (x, w) in base.0.iter().zip(&base.1) {
            let node = mid + half * x;
            let val = f(node)?;
            acc.add_scaled(&val, Complex64::new(w * half, 0.0));
        }
    }
    Ok(acc.into_matrix())
}

/// Adaptive integral of a matrix-valued function over `[a, b]`, doubling the
/// panel count until two refinements agree within `tol` (max-entry norm,
/// relative to the result scale).
pub(crate) fn adaptive_panel_integral(
    f: &mut dyn FnMut(f64) -> Result<ComplexMatrix>,
    n: usize,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
    base: &(Vec<f64>, Vec<f64>),
) -> Result<(ComplexMatrix, f64)> {
    let mut panels = initial_panels.max(1);
    let mut coarse = composite_panel_integral(f, n, a, b, panels, base)?;
    for _ in 0..9 {
        panels *= 2;
        let fine = composite_panel_integral(f, n, a, b, panels, base)?;
        let diff = fine.sub(&coarse).max_norm();
        let scale = fine.max_norm().max(1.0);
        if diff <= tol * scale {
            return Ok((fine, diff));
        }
        coarse = fine;
    }
    Err(Error::QuadratureNonConvergence { worst_k: 0, residual: f64::NAN })
}

/// Number of Gauss–Legendre nodes per smooth panel.
const PANEL_ORDER: usize = 32;

fn coefficient_by_quadrature(
    sym: &SymbolExpr,
    k: i64,
    tol: f64,
    base: &(Vec<f64>, Vec<f64>),
) -> Result<ComplexMatrix> {
    let n = sym.block_size();
    let mut total = ComplexMatrix::zeros(n, n);
    for (a, b) in sym.arcs() {
        // resolve the e^{-ikθ} oscillation: about 20 radians of phase per panel
        let initial = (((b - a) * (k.abs().max(1)) as f64) / 20.0).ceil() as usize;
        let mut integrand = |theta: f64| -> Result<ComplexMatrix> {
            let v = sym.eval(UnitPoint::from_theta(theta))?;
            Ok(v.scale(Complex64::from_polar(1.0 / TAU, -(k as f64) * theta)))
        };
        let (part, _) =
            adaptive_panel_integral(&mut integrand, n, a, b, initial.max(1), tol, base)
                .map_err(|e| match e {
                    Error::QuadratureNonConvergence { residual, .. } => {
                        Error::QuadratureNonConvergence { worst_k: k, residual }
                    }
                    other => other,
                })?;
        total = total.add(&part);
    }
    Ok(total)
}

/// Coefficient table by jump-aware panel quadrature, regardless of symbol
/// structure. Exposed separately so the closed-form route has an independent
/// cross-check.
pub fn fourier_table_quadrature(sym: &SymbolExpr, k_max: i64, tol: f64) -> Result<FourierTable> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("fourier table needs K >= 1"));
    }
    let base = gauss_legendre(PANEL_ORDER);
    let mut coeffs = Vec::with_capacity((2 * k_max + 1) as usize);
    for k in -k_max..=k_max {
        coeffs.push(coefficient_by_quadrature(sym, k, tol, &base)?);
    }
    FourierTable::from_coeffs(sym.block_size(), k_max, coeffs)
}

/// Coefficient table for a symbol: single canonical jump factors short-circuit
/// to the closed form; everything else integrates.
pub fn fourier_table(sym: &SymbolExpr, k_max: i64, tol: f64) -> Result<FourierTable> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("fourier table needs K >= 1"));
    }
    if let [Factor::Jump { tau, b }] = sym.factors() {
        let mut coeffs = Vec::with_capacity((2 * k_max + 1) as usize);
        for k in -k_max..=k_max {
            coeffs.push(fourier_jump(b, *tau, k)?);
        }
        return FourierTable::from_coeffs(sym.block_size(), k_max, coeffs);
    }
    fourier_table_quadrature(sym, k_max, tol)
}
