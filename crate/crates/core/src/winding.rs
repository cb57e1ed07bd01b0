//! Winding numbers and the Fredholm index, by two independent routes.
//!
//! For a regular symbol with jumps `τ_1 < … < τ_R` the interval winding
//! number is
//!
//! ```text
//! wind(φ; I) = -Σ_k tr(L_k) + (1/2πi) Σ_k [Δ log det φ(t)]_{τ_k+0}^{τ_{k+1}-0},
//! ```
//!
//! the bracket being the continuous increment of `log det φ` along each open
//! arc. The second route divides `det φ` by the scalar jumps `u_{tr L_k, τ_k}`
//! to get a continuous nonvanishing companion function `c(t)` and takes its
//! ordinary winding number. Both are integers, both must agree, and the
//! Fredholm index of the Toeplitz operator is their common negative.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cmat::ComplexMatrix;
use crate::error::{Error, Result};
use crate::jumps::{analyze_jumps, JumpAnalysis};
use crate::symbol::{Factor, Side, SymbolExpr, UnitPoint, TAU};

/// Continuous increment of `log det φ` over one open arc; endpoints are the
/// one-sided limits.
#[derive(Debug, Clone)]
pub struct ArcIncrement {
    pub from_tau: UnitPoint,
    pub to_tau: UnitPoint,
    pub delta_logdet: Complex64,
    /// Branch anchors `(θ, w)` with `w` the tracked continuous `log det`,
    /// starting from the principal value at the arc's left endpoint.
    pub anchors: Vec<(f64, Complex64)>,
}

fn det_at(sym: &SymbolExpr, theta: f64) -> Result<Complex64> {
    let v = sym.eval(UnitPoint::from_theta(theta))?;
    v.det()
}

/// Argument steps larger than this trigger local bisection. π/2 rather than π
/// leaves a 2x safety margin against aliasing near steep stretches.
const MAX_ARG_STEP: f64 = core::f64::consts::FRAC_PI_2;
const MAX_REFINE_LEVELS: usize = 20;

struct Tracker<'a> {
    sym: &'a SymbolExpr,
    anchors: Vec<(f64, Complex64)>,
}

impl<'a> Tracker<'a> {
    /// Extends the continuous branch from `(a, fa)` (tracked value `wa`) to
    /// `b` with value `fb`; returns the tracked value at `b`.
    fn extend(
        &mut self,
        a: f64,
        fa: Complex64,
        b: f64,
        fb: Complex64,
        wa: Complex64,
        level: usize,
    ) -> Result<Complex64> {
        if fa.norm() == 0.0 || fb.norm() == 0.0 || !fa.is_finite() || !fb.is_finite() {
            return Err(Error::UnwindFailure { theta: a });
        }
        let ratio = fb / fa;
        let step = ratio.arg();
        if step.abs() <= MAX_ARG_STEP {
            let wb = wa + Complex64::new((fb.norm() / fa.norm()).ln(), step);
            self.anchors.push((b, wb));
            return Ok(wb);
        }
        if level >= MAX_REFINE_LEVELS {
            return Err(Error::UnwindFailure { theta: a });
        }
        let m = 0.5 * (a + b);
        let fm = det_at(self.sym, m)?;
        let wm = self.extend(a, fa, m, fm, wa, level + 1)?;
        self.extend(m, fm, b, fb, wm, level + 1)
    }
}

/// Tracks `log det φ` continuously over the arc `(from, to)`, using the
/// one-sided limits at the endpoints. `samples` is the initial uniform mesh
/// (at least 8; enough to see several turns of winding before refinement).
pub fn arc_increment(
    sym: &SymbolExpr,
    from_tau: UnitPoint,
    to_tau: UnitPoint,
    samples: usize,
) -> Result<ArcIncrement> {
    let a = from_tau.theta();
    let mut b = to_tau.theta();
    if b <= a + crate::symbol::ANGLE_TOL {
        b += TAU;
    }
    // the arc interior must be jump-free
    for p in sym.jump_set() {
        let mut t = p.theta();
        if t <= a + crate::symbol::ANGLE_TOL {
            t += TAU;
        }
        if t > a + crate::symbol::ANGLE_TOL && t < b - crate::symbol::ANGLE_TOL {
            return Err(Error::InvalidArgument("arc interior contains a jump point"));
        }
    }
    let d_from = sym.eval_sided(from_tau, Side::Plus)?.det()?;
    let d_to = sym.eval_sided(to_tau, Side::Minus)?.det()?;
    if d_from.norm() == 0.0 || d_to.norm() == 0.0 {
        return Err(Error::UnwindFailure { theta: a });
    }

    let w0 = d_from.ln();
    let mut tracker = Tracker { sym, anchors: vec![(a, w0)] };
    let m = samples.max(8);
    let mut prev_theta = a;
    let mut prev_val = d_from;
    let mut w = w0;
    for i in 1..=m {
        let theta = a + (b - a) * i as f64 / m as f64;
        let val = if i == m { d_to } else { det_at(sym, theta)? };
        w = tracker.extend(prev_theta, prev_val, theta, val, w, 0)?;
        prev_theta = theta;
        prev_val = val;
    }
    Ok(ArcIncrement { from_tau, to_tau, delta_logdet: w - w0, anchors: tracker.anchors })
}

/// All arc increments of a symbol, counterclockwise; a continuous symbol is
/// one closed arc.
pub fn arc_increments(sym: &SymbolExpr, samples: usize) -> Result<Vec<ArcIncrement>> {
    let jumps = sym.jump_set();
    if jumps.is_empty() {
        let p = UnitPoint::from_theta(0.0);
        return Ok(vec![arc_increment(sym, p, p, samples)?]);
    }
    let mut out = Vec::with_capacity(jumps.len());
    for (i, &tau) in jumps.iter().enumerate() {
        let next = jumps[(i + 1) % jumps.len()];
        out.push(arc_increment(sym, tau, next, samples)?);
    }
    Ok(out)
}

fn round_to_integer(w: Complex64, context: &'static str) -> Result<i64> {
    let nearest = w.re.round();
    let residual = (w - Complex64::new(nearest, 0.0)).norm();
    if residual > 1e-6 {
        let _ = context;
        return Err(Error::NonIntegerWinding { residual });
    }
    Ok(nearest as i64)
}

/// The interval winding number from precomputed jump analyses.
pub fn winding_i_with(sym: &SymbolExpr, jumps: &[JumpAnalysis]) -> Result<i64> {
    let trace_sum: Complex64 = jumps.iter().map(|j| j.trace_l()).sum();
    let mut inc = Complex64::new(0.0, 0.0);
    for arc in arc_increments(sym, 64)? {
        inc += arc.delta_logdet;
    }
    let w = -trace_sum + inc / Complex64::new(0.0, TAU);
    round_to_integer(w, "winding_i")
}

/// The interval winding number; analyzes the jumps first.
pub fn winding_i(sym: &SymbolExpr) -> Result<i64> {
    let jumps = analyze_jumps(sym)?;
    winding_i_with(sym, &jumps)
}

/// The continuous scalar companion `c(t) = det φ(t) / ∏_k u_{β_k,τ_k}(t)`
/// with `β_k = tr L_k`. Continuous and nonvanishing for regular symbols.
pub fn scalar_c(sym: &SymbolExpr, jumps: &[JumpAnalysis]) -> Result<SymbolExpr> {
    let mut factors = vec![Factor::Det(sym.clone())];
    for j in jumps {
        // u^{-1}_{β,τ} = u_{-β,τ}
        factors.push(Factor::Jump { tau: j.tau, b: ComplexMatrix::scalar(-j.trace_l()) });
    }
    SymbolExpr::from_factors(1, factors)
}

/// Winding of the companion function by closed-circle arc tracking.
pub fn winding_c_with(sym: &SymbolExpr, jumps: &[JumpAnalysis]) -> Result<i64> {
    let c = scalar_c(sym, jumps)?;
    let mut inc = Complex64::new(0.0, 0.0);
    for arc in arc_increments(&c, 64)? {
        inc += arc.delta_logdet;
    }
    round_to_integer(inc / Complex64::new(0.0, TAU), "winding_c")
}

pub fn winding_c(sym: &SymbolExpr) -> Result<i64> {
    let jumps = analyze_jumps(sym)?;
    winding_c_with(sym, &jumps)
}

/// Fredholm index `ind T(φ) = -wind(φ; I)`, asserting that both winding
/// routes agree exactly.
pub fn fredholm_index(sym: &SymbolExpr) -> Result<i64> {
    let jumps = analyze_jumps(sym)?;
    fredholm_index_with(sym, &jumps)
}

pub fn fredholm_index_with(sym: &SymbolExpr, jumps: &[JumpAnalysis]) -> Result<i64> {
    let wi = winding_i_with(sym, jumps)?;
    let wc = winding_c_with(sym, jumps)?;
    if wi != wc {
        return Err(Error::RouteMismatch {
            context: "winding_i vs winding_c",
            left: Complex64::new(wi as f64, 0.0),
            right: Complex64::new(wc as f64, 0.0),
        });
    }
    Ok(-wi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{Builtin, LaurentPoly};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_jump_sym(beta: f64, theta: f64) -> SymbolExpr {
        SymbolExpr::jump(UnitPoint::from_theta(theta), ComplexMatrix::scalar(c(beta, 0.0)))
            .unwrap()
    }

    #[test]
    fn constant_symbol_has_zero_increment() {
        let sym = SymbolExpr::constant(ComplexMatrix::diag(&[c(2.0, 1.0), c(0.0, -3.0)]))
            .unwrap();
        let arcs = arc_increments(&sym, 16).unwrap();
        assert_eq!(arcs.len(), 1);
        assert!(arcs[0].delta_logdet.norm() < 1e-12);
    }

    #[test]
    fn full_circle_increment_of_t_times_identity() {
        // φ(t) = t·I_N: det = t^N, increment 2πi·N over the closed circle
        for n in [1usize, 3] {
            let p = LaurentPoly::new(
                n,
                [(1i64, ComplexMatrix::identity(n))].into_iter().collect(),
            )
            .unwrap();
            let sym = SymbolExpr::laurent(p);
            let arcs = arc_increments(&sym, 64).unwrap();
            let total: Complex64 = arcs.iter().map(|a| a.delta_logdet).sum();
            assert!(total.re.abs() < 1e-10);
            assert_relative_eq!(total.im, TAU * n as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn jump_arc_increment_is_2pi_i_beta() {
        // log u_{β,1} runs linearly from -iβπ to iβπ over the arc (1+0, 1-0)
        let beta = 0.3;
        let sym = scalar_jump_sym(beta, 0.0);
        let p = UnitPoint::from_theta(0.0);
        let arc = arc_increment(&sym, p, p, 64).unwrap();
        assert!((arc.delta_logdet - c(0.0, TAU * beta)).norm() < 1e-10);
        // consistency: exp(Δ) = det(to-0)/det(from+0)
        let d_plus = sym.eval_sided(p, Side::Plus).unwrap().det().unwrap();
        let d_minus = sym.eval_sided(p, Side::Minus).unwrap().det().unwrap();
        let want = d_minus / d_plus;
        assert!((arc.delta_logdet.exp() - want).norm() < 1e-9);
    }

    #[test]
    fn winding_of_pure_jump_is_zero() {
        // -tr B + (1/2πi)(2πi tr B) = 0
        let sym = scalar_jump_sym(0.3, 1.0);
        assert_eq!(winding_i(&sym).unwrap(), 0);
        assert_eq!(winding_c(&sym).unwrap(), 0);
        assert_eq!(fredholm_index(&sym).unwrap(), 0);
    }

    #[test]
    fn winding_of_t_identity_is_block_size() {
        let p = LaurentPoly::new(2, [(1i64, ComplexMatrix::identity(2))].into_iter().collect())
            .unwrap();
        let sym = SymbolExpr::laurent(p);
        assert_eq!(winding_i(&sym).unwrap(), 2);
        assert_eq!(fredholm_index(&sym).unwrap(), -2);
    }

    #[test]
    fn winding_of_xy_entropy_is_zero() {
        let sym = SymbolExpr::builtin(Builtin::XyEntropy {
            lambda: c(3.0, 0.0),
            alpha: 1.0,
            gamma: 1.0,
        })
        .unwrap();
        assert_eq!(winding_i(&sym).unwrap(), 0);
        assert_eq!(fredholm_index(&sym).unwrap(), 0);
    }

    #[test]
    fn scalar_c_of_pure_jump_is_constant() {
        // det u_{B,1} = u_{tr B,1}: companion is constant, winding 0
        let b = ComplexMatrix::from_rows(
            2,
            2,
            alloc::vec![c(0.3, 0.0), c(0.2, 0.1), c(0.0, 0.0), c(-0.1, 0.2)],
        )
        .unwrap();
        let sym = SymbolExpr::jump(UnitPoint::from_theta(1.2), b).unwrap();
        let jumps = analyze_jumps(&sym).unwrap();
        let comp = scalar_c(&sym, &jumps).unwrap();
        let mut values = Vec::new();
        for th in comp.sample_angles(50) {
            values.push(comp.eval(UnitPoint::from_theta(th)).unwrap()[(0, 0)]);
        }
        for v in &values {
            assert!((v - values[0]).norm() < 1e-10, "companion not constant");
        }
        assert_eq!(winding_c_with(&sym, &jumps).unwrap(), 0);
    }

    #[test]
    fn index_of_t_times_scalar_jump() {
        // φ(t) = t·u_{0.3,1}(t): wind = 1, index -1
        let p = LaurentPoly::scalar_terms(&[(1, c(1.0, 0.0))]);
        let sym = SymbolExpr::laurent(p).product(&scalar_jump_sym(0.3, 0.0)).unwrap();
        assert_eq!(winding_i(&sym).unwrap(), 1);
        assert_eq!(winding_c(&sym).unwrap(), 1);
        assert_eq!(fredholm_index(&sym).unwrap(), -1);
    }

    #[test]
    fn deformation_invariance_along_jump_scaling() {
        // φ_λ = φ₀·u_{λB,τ}: winding constant in λ
        let phi0 = SymbolExpr::laurent(LaurentPoly::new(
            2,
            [
                (0i64, ComplexMatrix::diag(&[c(2.0, 0.0), c(2.0, 0.0)])),
                (1i64, ComplexMatrix::diag(&[c(0.3, 0.0), c(0.0, 0.2)])),
                (-1i64, ComplexMatrix::diag(&[c(0.2, 0.1), c(0.3, 0.0)])),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap());
        let b = ComplexMatrix::from_rows(
            2,
            2,
            alloc::vec![c(0.25, 0.1), c(0.1, 0.0), c(0.05, 0.0), c(-0.3, 0.0)],
        )
        .unwrap();
        let mut winds = Vec::new();
        for lam in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let sym = phi0
                .product(
                    &SymbolExpr::jump(
                        UnitPoint::from_theta(2.0),
                        b.scale(c(lam, 0.0)),
                    )
                    .unwrap(),
                )
                .unwrap();
            winds.push(winding_i(&sym).unwrap());
        }
        assert!(winds.iter().all(|&w| w == winds[0]), "winds {winds:?}");
    }

    #[test]
    fn additivity_for_disjoint_jumps() {
        // wind(φ₁φ₂; I) = wind(φ₁; I) + wind(φ₂; I)
        let t_pow = |m: i64| SymbolExpr::laurent(LaurentPoly::scalar_terms(&[(m, c(1.0, 0.0))]));
        let f1 = t_pow(1).product(&scalar_jump_sym(0.2, 0.5)).unwrap();
        let f2 = t_pow(2).product(&scalar_jump_sym(-0.3, 3.5)).unwrap();
        let prod = f1.product(&f2).unwrap();
        let w1 = winding_i(&f1).unwrap();
        let w2 = winding_i(&f2).unwrap();
        assert_eq!(winding_i(&prod).unwrap(), w1 + w2);
    }
}
