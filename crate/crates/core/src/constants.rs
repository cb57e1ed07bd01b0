//! Log-Gamma, the Barnes G-function, and the asymptotic constants.
//!
//! The Barnes G-function enters through the explicit part of the constant
//! `E`; it is evaluated from its defining product
//!
//! ```text
//! G(1+z) = (2π)^{z/2} e^{-(z+1)z/2 - γ_E z²/2} ∏_{k≥1} (1+z/k)^k e^{-z+z²/(2k)}
//! ```
//!
//! summed in log space up to an adaptive cutoff with an Euler–Maclaurin tail
//! correction. Log-Gamma uses the Lanczos approximation, shifted by the
//! recurrence `logΓ(z) = logΓ(z+1) - log z` rather than reflection so that
//! the branch stays the canonical one on the cut plane; the Barnes
//! recurrence test depends on that.
//!
//! The leading constant is
//! `G = exp((1/2π)∫ log det φ₀(e^{ix}) dx)` with `log det φ₀` tracked
//! continuously around the circle, and
//! `Ω = -Σ_k Σ_j (β_k^{(j)})² = -Σ_k tr(L_k²)`, evaluated both ways.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fourier::adaptive_panel_integral;
use crate::jumps::JumpAnalysis;
use crate::legendre::gauss_legendre;
use crate::symbol::{SymbolExpr, UnitPoint, TAU};
use crate::winding::{arc_increments, ArcIncrement};

const EULER_GAMMA: f64 = 0.577215664901532860606512090082;

/// Lanczos coefficients, g = 7, n = 9 (published full-precision values).
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Canonical `log Γ(z)` on the plane cut along `(-∞, 0]`.
pub fn log_gamma(z: Complex64) -> Complex64 {
    // shift into Re ≥ 1.5 with the recurrence, preserving the branch
    let shift = if z.re < 1.5 { (1.5 - z.re).ceil() as usize } else { 0 };
    let w = z + Complex64::new(shift as f64, 0.0);
    let x = w - Complex64::new(1.0, 0.0);
    let mut a = Complex64::new(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        a += Complex64::new(p, 0.0) / (x + Complex64::new(i as f64, 0.0));
    }
    let t = x + Complex64::new(7.5, 0.0);
    let half_log_2pi = 0.5 * (2.0 * core::f64::consts::PI).ln();
    let mut lg = (x + Complex64::new(0.5, 0.0)) * t.ln() - t
        + Complex64::new(half_log_2pi, 0.0)
        + a.ln();
    for j in 0..shift {
        lg -= (z + Complex64::new(j as f64, 0.0)).ln();
    }
    lg
}

/// Tail `Σ_{k>K} k^{-s}` by Euler–Maclaurin.
fn zeta_tail(s: f64, k_cut: usize) -> f64 {
    let n = (k_cut + 1) as f64;
    let mut h = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    h += s * n.powf(-s - 1.0) / 12.0;
    h -= s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    h += s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0;
    h
}

fn barnes_partial(z: Complex64, k_cut: usize) -> Complex64 {
    let mut sum = Complex64::zero();
    for k in 1..=k_cut {
        let kf = k as f64;
        let term = Complex64::new(kf, 0.0) * (Complex64::new(1.0, 0.0) + z / kf).ln() - z
            + z * z / (2.0 * kf);
        sum += term;
    }
    // tail: Σ_{k>K} [k·log(1+z/k) - z + z²/(2k)] = Σ_{m≥3} (-1)^{m+1} z^m/m · Σ_{k>K} k^{1-m}
    let mut tail = Complex64::zero();
    let mut zp = z * z * z;
    for m in 3..200 {
        let h = zeta_tail((m - 1) as f64, k_cut);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let term = zp * Complex64::new(sign * h / m as f64, 0.0);
        tail += term;
        if term.norm() < 1e-19 * (1.0 + sum.norm()) {
            break;
        }
        zp *= z;
    }
    sum + tail
}

/// `log G(1+z)` from the defining product; relative accuracy ~1e-11 for
/// `|z| ≤ 2.5`. Fails at the zeros `1+z ∈ {0, -1, -2, …}`.
pub fn log_barnes_g(z: Complex64) -> Result<Complex64> {
    let nearest = z.re.round();
    if nearest <= -1.0 && (z - Complex64::new(nearest, 0.0)).norm() < 1e-12 {
        return Err(Error::PoleOfBarnes { z });
    }
    let prefix = z * Complex64::new(0.5 * (2.0 * core::f64::consts::PI).ln(), 0.0)
        - (z + Complex64::new(1.0, 0.0)) * z * 0.5
        - z * z * Complex64::new(0.5 * EULER_GAMMA, 0.0);
    // double the cutoff until two tail-corrected values agree
    let mut k_cut = 32.max((4.0 * z.norm()).ceil() as usize);
    let mut prev = barnes_partial(z, k_cut);
    for _ in 0..8 {
        k_cut *= 2;
        let next = barnes_partial(z, k_cut);
        if (next - prev).norm() <= 1e-11 * (1.0 + next.norm()) {
            return Ok(prefix + next);
        }
        prev = next;
    }
    Ok(prefix + prev)
}

/// The asymptotic constants of the determinant law `det T_n ~ G^n·n^Ω·E`.
#[derive(Debug, Clone)]
pub struct AsymptoticConstants {
    pub g: Complex64,
    /// The continuous-branch logarithm actually used; `exp(log_g) == g`.
    pub log_g: Complex64,
    pub omega: Complex64,
    /// The Barnes part of `E`: `∏_k ∏_j G(1+β_k^{(j)})·G(1-β_k^{(j)})`.
    pub e_barnes: Complex64,
}

/// Piecewise linear interpolation of the anchor imaginary parts.
fn anchor_im_at(anchors: &[(f64, Complex64)], shift_im: f64, theta: f64) -> f64 {
    debug_assert!(!anchors.is_empty());
    if theta <= anchors[0].0 {
        return anchors[0].1.im + shift_im;
    }
    for w in anchors.windows(2) {
        let (t0, w0) = w[0];
        let (t1, w1) = w[1];
        if theta <= t1 {
            let frac = if t1 > t0 { (theta - t0) / (t1 - t0) } else { 0.0 };
            return w0.im + frac * (w1.im - w0.im) + shift_im;
        }
    }
    anchors.last().unwrap().1.im + shift_im
}

/// `G = exp((1/2π)·∮ log det φ₀)` with the continuous branch; returns
/// `(G, log G)`. Requires `φ₀` continuous, invertible, with
/// `wind(det φ₀) = 0`, which is exactly what factorization guarantees.
pub fn compute_g(phi0: &SymbolExpr, tol: f64) -> Result<(Complex64, Complex64)> {
    let arcs: Vec<ArcIncrement> = arc_increments(phi0, 64)?;
    let base = gauss_legendre(32);
    let n_arcs = arcs.len();

    let first_start = arcs[0].anchors[0].1;
    let mut current_end = first_start;
    let mut integral = Complex64::zero();
    for (j, arc) in arcs.iter().enumerate() {
        let w_start = arc.anchors[0].1;
        // chain the branch across the (continuity) point between arcs
        let shift_im = if j == 0 {
            0.0
        } else {
            let m = ((current_end.im - w_start.im) / TAU).round();
            let shifted = w_start + Complex64::new(0.0, TAU * m);
            if (current_end - shifted).norm() > 1e-6 {
                return Err(Error::UnwindFailure { theta: arc.from_tau.theta() });
            }
            TAU * m
        };
        let a = arc.anchors.first().unwrap().0;
        let b = arc.anchors.last().unwrap().0;
        let anchors = &arc.anchors;
        let mut integrand = |theta: f64| -> Result<crate::cmat::ComplexMatrix> {
            let v = phi0.eval(UnitPoint::from_theta(theta))?;
            let d = v.det()?;
            if d.norm() == 0.0 {
                return Err(Error::UnwindFailure { theta });
            }
            let p = d.ln();
            let target = anchor_im_at(anchors, shift_im, theta);
            let m = ((target - p.im) / TAU).round();
            Ok(crate::cmat::ComplexMatrix::scalar(Complex64::new(
                p.re,
                p.im + TAU * m,
            )))
        };
        let initial = ((b - a).ceil() as usize).max(4);
        let (part, _) = adaptive_panel_integral(&mut integrand, 1, a, b, initial, tol, &base)?;
        integral += part[(0, 0)];
        current_end = arc.anchors.last().unwrap().1 + Complex64::new(0.0, shift_im);
    }
    // closed circle: the branch must come back to its start (winding zero)
    if n_arcs > 0 && (current_end - first_start).norm() > 1e-6 {
        return Err(Error::InvalidArgument(
            "log det φ₀ does not close up: winding of det φ₀ is nonzero",
        ));
    }
    let log_g = integral / TAU;
    Ok((log_g.exp(), log_g))
}

/// `Ω` from the eigenvalue sums, cross-checked against `-Σ tr(L_k²)`.
pub fn compute_omega(jumps: &[JumpAnalysis]) -> Result<Complex64> {
    let mut by_eigen = Complex64::zero();
    let mut by_trace = Complex64::zero();
    for j in jumps {
        by_eigen -= j.betas.iter().map(|b| b * b).sum::<Complex64>();
        by_trace -= j.l.mul(&j.l).trace();
    }
    if (by_eigen - by_trace).norm() > 1e-10 * (1.0 + by_eigen.norm()) {
        return Err(Error::RouteMismatch {
            context: "omega eigenvalue sum vs trace of squares",
            left: by_eigen,
            right: by_trace,
        });
    }
    Ok(by_eigen)
}

/// `∏_k ∏_j G(1+β_k^{(j)})·G(1-β_k^{(j)})`; nonzero whenever all
/// `|Re β| < 1/2` (the Barnes G vanishes only at nonpositive integers).
pub fn barnes_factor(jumps: &[JumpAnalysis]) -> Result<Complex64> {
    let mut log_sum = Complex64::zero();
    for j in jumps {
        for b in &j.betas {
            log_sum += log_barnes_g(*b)?;
            log_sum += log_barnes_g(-b)?;
        }
    }
    let value = log_sum.exp();
    debug_assert!(value.norm() > 0.0);
    Ok(value)
}

/// All constants for a factorized symbol.
pub fn constants_for(
    fact: &crate::factorization::Factorization,
    tol: f64,
) -> Result<AsymptoticConstants> {
    let (g, log_g) = compute_g(&fact.phi0, tol)?;
    let omega = compute_omega(&fact.analyses)?;
    let e_barnes = barnes_factor(&fact.analyses)?;
    Ok(AsymptoticConstants { g, log_g, omega, e_barnes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmat::ComplexMatrix;
    use crate::symbol::LaurentPoly;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_gamma_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(1/2) = √π, Γ(5) = 24
        assert!(log_gamma(c(1.0, 0.0)).norm() < 1e-13);
        assert!(log_gamma(c(2.0, 0.0)).norm() < 1e-13);
        assert_relative_eq!(
            log_gamma(c(0.5, 0.0)).re,
            0.5 * core::f64::consts::PI.ln(),
            epsilon = 1e-12
        );
        assert_relative_eq!(log_gamma(c(5.0, 0.0)).re, 24.0f64.ln(), max_relative = 1e-13);
    }

    #[test]
    fn log_gamma_recurrence_complex() {
        // logΓ(z+1) = logΓ(z) + log z, canonical branch off the cut
        for &z in &[c(0.3, 0.7), c(-0.8, 0.4), c(-1.2, -0.6), c(1.4, -1.2)] {
            let lhs = log_gamma(z + c(1.0, 0.0));
            let rhs = log_gamma(z) + z.ln();
            assert!((lhs - rhs).norm() < 1e-11, "z={z}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn barnes_g_at_small_integers() {
        // G(1) = G(2) = G(3) = 1
        for &z in &[0.0, 1.0, 2.0] {
            let lg = log_barnes_g(c(z, 0.0)).unwrap();
            assert!(lg.norm() < 1e-12, "log G(1+{z}) = {lg}");
        }
        // G(4) = Γ(3)·G(3) = 2
        let g4 = log_barnes_g(c(3.0, 0.0)).unwrap();
        assert_relative_eq!(g4.re, 2.0f64.ln(), epsilon = 1e-11);
        assert!(g4.im.abs() < 1e-12);
    }

    #[test]
    fn barnes_recursion_against_log_gamma() {
        // |log G(z+1) - log Γ(z) - log G(z)| small on a grid in the strip,
        // avoiding the cut (-∞, 0] where branches would legitimately differ
        let mut count = 0;
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            for j in 0..5 {
                let x = -1.4 + 0.31 * i as f64;
                let y = match j {
                    0 => 0.2,
                    1 => 0.8,
                    2 => 1.4,
                    3 => -0.5,
                    _ => -1.1,
                };
                let z = c(x, y);
                // log G(z+1) = b(z), log G(z) = b(z-1)
                let lhs = log_barnes_g(z).unwrap();
                let rhs = log_gamma(z) + log_barnes_g(z - c(1.0, 0.0)).unwrap();
                let rel = (lhs - rhs).norm() / lhs.norm().max(1.0);
                worst = worst.max(rel);
                count += 1;
            }
        }
        assert_eq!(count, 50);
        assert!(worst < 1e-9, "worst recursion residual {worst:.3e}");
    }

    #[test]
    fn barnes_g_matches_independent_reference_values() {
        // frozen from an independent arbitrary-precision evaluation (30
        // digits); compared as G(1+z) values, which is branch-insensitive
        let refs: &[(f64, f64, f64, f64)] = &[
            (0.3, 0.0, 0.067502364494865678, 0.0),
            (-0.3, 0.0, -0.21458989707506245, 0.0),
            (0.5, 0.0, 0.066931888435004704, 0.0),
            (1.3, 0.0, -0.040672445012994797, 0.0),
            (0.3, 0.2, 0.083891340370890015, 0.011110734623859355),
            (-0.4, 1.1, 1.0065603227656592, 0.43053558578102725),
            (0.0, 0.110317800076, 0.00955317055281802, 0.045483739449647905),
            (1.5, -0.7, -0.16495000013614192, 0.053666241369983547),
            (-0.2, -1.4, 1.2111779013092837, 0.17818150523972959),
        ];
        let mut worst = 0.0f64;
        for &(re, im, lre, lim) in refs {
            let mine = log_barnes_g(c(re, im)).unwrap().exp();
            let want = c(lre, lim).exp();
            worst = worst.max((mine - want).norm() / want.norm());
        }
        assert!(worst < 1e-11, "worst relative error in G(1+z): {worst:.3e}");
    }

    #[test]
    fn barnes_pole_detected() {
        assert!(matches!(log_barnes_g(c(-1.0, 0.0)), Err(Error::PoleOfBarnes { .. })));
        assert!(matches!(log_barnes_g(c(-3.0, 0.0)), Err(Error::PoleOfBarnes { .. })));
        assert!(log_barnes_g(c(-0.5, 0.0)).is_ok());
    }

    #[test]
    fn compute_g_of_identity_and_constant() {
        let id = SymbolExpr::identity(2);
        let (g, log_g) = compute_g(&id, 1e-12).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-12);
        assert!(log_g.norm() < 1e-12);

        let m = ComplexMatrix::from_rows(2, 2, alloc::vec![c(2., 1.), c(0.3, 0.), c(0., 0.2), c(-1., 1.)])
            .unwrap();
        let sym = SymbolExpr::constant(m.clone()).unwrap();
        let (g, _) = compute_g(&sym, 1e-12).unwrap();
        let want = m.det().unwrap();
        assert!((g - want).norm() < 1e-11 * want.norm());
    }

    #[test]
    fn compute_g_multiplicative_on_continuous_symbols() {
        let p1 = LaurentPoly::new(
            1,
            [(0i64, ComplexMatrix::scalar(c(2.0, 0.0))), (1i64, ComplexMatrix::scalar(c(0.5, 0.2)))]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let p2 = LaurentPoly::new(
            1,
            [
                (0i64, ComplexMatrix::scalar(c(0.0, 3.0))),
                (-1i64, ComplexMatrix::scalar(c(0.4, -0.3))),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        let a = SymbolExpr::laurent(p1);
        let b = SymbolExpr::laurent(p2);
        let (ga, _) = compute_g(&a, 1e-12).unwrap();
        let (gb, _) = compute_g(&b, 1e-12).unwrap();
        let (gab, _) = compute_g(&a.product(&b).unwrap(), 1e-12).unwrap();
        let rel = (gab - ga * gb).norm() / gab.norm();
        assert!(rel < 1e-10, "product rule violated: {rel:.3e}");
    }

    #[test]
    fn compute_g_rejects_nonzero_winding() {
        let sym = SymbolExpr::laurent(LaurentPoly::scalar_terms(&[(1, c(1.0, 0.0))]));
        assert!(compute_g(&sym, 1e-12).is_err());
    }

    #[test]
    fn omega_empty_and_xy() {
        assert!(compute_omega(&[]).unwrap().norm() < 1e-15);
        let sym = SymbolExpr::builtin(crate::symbol::Builtin::XyEntropy {
            lambda: c(3.0, 0.0),
            alpha: 1.0,
            gamma: 1.0,
        })
        .unwrap();
        let jumps = crate::jumps::analyze_jumps(&sym).unwrap();
        let omega = compute_omega(&jumps).unwrap();
        // Ω = -2β² = (log 2)²/(2π²) with β = log(2)/(2πi)
        let want = 2.0f64.ln().powi(2) / (2.0 * core::f64::consts::PI.powi(2));
        assert_relative_eq!(omega.re, want, epsilon = 1e-12);
        assert!(omega.im.abs() < 1e-12);
        assert_relative_eq!(omega.re, 0.024341, epsilon = 1e-6);
    }

    #[test]
    fn barnes_factor_trivial_and_paired() {
        assert!((barnes_factor(&[]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        // single scalar jump β: G(1+β)G(1-β)
        let sym = SymbolExpr::jump(
            crate::symbol::UnitPoint::from_theta(0.0),
            ComplexMatrix::scalar(c(0.3, 0.0)),
        )
        .unwrap();
        let jumps = crate::jumps::analyze_jumps(&sym).unwrap();
        let e = barnes_factor(&jumps).unwrap();
        let want = (log_barnes_g(c(0.3, 0.0)).unwrap() + log_barnes_g(c(-0.3, 0.0)).unwrap())
            .exp();
        assert!((e - want).norm() < 1e-12 * want.norm());
        assert!(e.norm() > 0.0);
    }
}
