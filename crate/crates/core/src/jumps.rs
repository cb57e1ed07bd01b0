//! Jump analysis: ratio matrices, branch-controlled logarithms, regularity.
//!
//! A symbol is regular (for the interval `I = (-1/2, 1/2)`) when (a) its
//! values are invertible off the jumps, (b) both one-sided limits at each
//! jump are invertible, and (c) each jump ratio `φ(τ+0)^{-1}φ(τ-0)` admits a
//! logarithm
//!
//! ```text
//! L = (1/2πi)·log(φ(τ+0)^{-1}φ(τ-0))
//! ```
//!
//! whose eigenvalue real parts lie in `I`. With the principal branch this
//! holds exactly when no ratio eigenvalue lies on `(-∞, 0]`; eigenvalues
//! within `1e-10` of the cut are the boundary case the asymptotic theorem
//! excludes, and are diagnosed rather than perturbed.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cmat::{ComplexMatrix, LuFactors};
use crate::error::{Error, RegularityFailure, Result};
use crate::matfun::{dist_to_branch_cut, logm_triangular};
use crate::schur::schur;
use crate::symbol::{Side, SymbolExpr, UnitPoint};

/// Per-jump record: location, ratio, logarithm, spectrum, and the margin to
/// the boundary of the admissible strip.
#[derive(Debug, Clone)]
pub struct JumpAnalysis {
    pub tau: UnitPoint,
    /// `φ(τ+0)^{-1}·φ(τ-0)`.
    pub ratio: ComplexMatrix,
    /// Branch-controlled logarithm `L` with `exp(2πi·L) = ratio`.
    pub l: ComplexMatrix,
    /// Eigenvalues of `L` with multiplicity, sorted by `(Re, Im)`.
    pub betas: Vec<Complex64>,
    /// `1/2 - max_j |Re β_j|`; positive for regular jumps.
    pub margin: f64,
}

impl JumpAnalysis {
    pub fn trace_l(&self) -> Complex64 {
        self.l.trace()
    }
}

/// The jump ratio `φ(τ+0)^{-1}·φ(τ-0)`; fails with condition (b) when a
/// one-sided limit is singular.
pub fn jump_ratio(sym: &SymbolExpr, tau: UnitPoint) -> Result<ComplexMatrix> {
    let plus = sym.eval_sided(tau, Side::Plus)?;
    let minus = sym.eval_sided(tau, Side::Minus)?;
    let lu = LuFactors::new(&plus)?;
    if lu.is_singular() {
        return Err(Error::NotIRegular(RegularityFailure::LimitSingular { theta: tau.theta() }));
    }
    let lu_minus = LuFactors::new(&minus)?;
    if lu_minus.is_singular() {
        return Err(Error::NotIRegular(RegularityFailure::LimitSingular { theta: tau.theta() }));
    }
    Ok(lu.solve(&minus))
}

/// `(1/2πi)·log(ratio)` with the principal branch, plus the eigenvalue list.
///
/// Succeeds iff no eigenvalue of `ratio` lies on `(-∞, 0]`; the eigenvalue
/// real parts of the result then automatically lie in `(-1/2, 1/2)`.
pub fn principal_log_2pii(ratio: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let dec = schur(ratio)?;
    for ev in dec.eigenvalues() {
        let d = dist_to_branch_cut(ev);
        if d <= 1e-10 {
            return Err(Error::NotIRegular(RegularityFailure::LogBranch {
                theta: f64::NAN,
                eigenvalue: ev,
                distance: d,
            }));
        }
    }
    let log_t = logm_triangular(&dec.t)?;
    let two_pi_i_inv = Complex64::new(0.0, -1.0 / core::f64::consts::TAU);
    let l = dec.q.mul(&log_t).mul(&dec.q.adjoint()).scale(two_pi_i_inv);
    let mut betas: Vec<Complex64> =
        (0..log_t.n_rows()).map(|i| log_t[(i, i)] * two_pi_i_inv).collect();
    betas.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    Ok((l, betas))
}

/// Minimum `|det|` over a sampling of each arc, with local refinement around
/// the smallest value; flags condition (a) when the determinant is
/// numerically negligible somewhere.
fn check_values_invertible(sym: &SymbolExpr, samples_per_arc: usize) -> Result<()> {
    for (a, b) in sym.arcs() {
        let len = b - a;
        let m = samples_per_arc.max(8);
        let mut min_det = f64::INFINITY;
        let mut min_theta = a;
        let mut max_det = 0.0f64;
        let at = |theta: f64, min_det: &mut f64, min_theta: &mut f64, max_det: &mut f64| -> Result<()> {
            let v = sym.eval(UnitPoint::from_theta(theta))?;
            let d = LuFactors::new(&v)?.det().norm();
            if d < *min_det {
                *min_det = d;
                *min_theta = theta;
            }
            *max_det = max_det.max(d);
            Ok(())
        };
        for i in 0..m {
            let theta = a + len * (i as f64 + 0.5) / m as f64;
            at(theta, &mut min_det, &mut min_theta, &mut max_det)?;
        }
        // refine near the smallest determinant before judging
        if min_det < 1e-8 * max_det.max(1e-300) {
            let width = len / m as f64;
            for i in 0..64 {
                let theta = min_theta - width + 2.0 * width * (i as f64 + 0.5) / 64.0;
                at(theta, &mut min_det, &mut min_theta, &mut max_det)?;
            }
        }
        if min_det <= 1e-12 * max_det.max(1e-300) {
            return Err(Error::NotIRegular(RegularityFailure::ValueSingular {
                theta: crate::symbol::wrap_angle(min_theta),
            }));
        }
    }
    Ok(())
}

/// Full regularity analysis: one record per jump point, in counterclockwise
/// order starting from the smallest angle, after verifying condition (a) by
/// sampling `det φ` on at least 512 points per arc.
pub fn analyze_jumps(sym: &SymbolExpr) -> Result<Vec<JumpAnalysis>> {
    check_values_invertible(sym, 512)?;
    let mut out = Vec::with_capacity(sym.jump_set().len());
    for &tau in sym.jump_set() {
        let ratio = jump_ratio(sym, tau)?;
        let (l, betas) = principal_log_2pii(&ratio).map_err(|e| match e {
            Error::NotIRegular(RegularityFailure::LogBranch { eigenvalue, distance, .. }) => {
                Error::NotIRegular(RegularityFailure::LogBranch {
                    theta: tau.theta(),
                    eigenvalue,
                    distance,
                })
            }
            other => other,
        })?;
        let margin = 0.5 - betas.iter().fold(0.0f64, |m, b| m.max(b.re.abs()));
        out.push(JumpAnalysis { tau, ratio, l, betas, margin });
    }
    Ok(out)
}
