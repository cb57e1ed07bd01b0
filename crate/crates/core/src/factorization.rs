//! Canonical representation `φ = φ₀ · u_{B₁,τ₁} ⋯ u_{B_R,τ_R}`.
//!
//! Constructed by peeling jumps off the right, largest angle first: with the
//! current remainder `ψ` and remaining jump `τ`, set `B = (1/2πi)·log` of
//! `ψ`'s jump ratio at `τ` and replace `ψ ← ψ·u_{B,τ}^{-1} = ψ·u_{-B,τ}`,
//! which is continuous at `τ`. The peeling order matters: matrix factors do
//! not commute, and the last matrix equals the analysis logarithm (`B_R =
//! L_R`) while the earlier ones are only similar to theirs, via
//! `L_k = S_k^{-1} B_k S_k` with `S_k = u_{B_{k+1},τ_{k+1}}(τ_k) ⋯
//! u_{B_R,τ_R}(τ_k)`.
//!
//! The remainder `φ₀` is kept as a lazy product (never resampled onto a
//! grid), so downstream quadrature retains full accuracy.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::cmat::ComplexMatrix;
use crate::error::{Error, Result};
use crate::jumps::{analyze_jumps, jump_ratio, principal_log_2pii, JumpAnalysis};
use crate::symbol::{Factor, Side, SymbolExpr, UnitPoint};

/// Tolerance for the continuity of `φ₀` at the peeled jump points; balances
/// log/exp round-trip error accumulated over up to ~8 jumps.
const RESIDUAL_TOL: f64 = 1e-9;
const SIMILARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Factorization {
    /// `(τ_k, B_k)` in counterclockwise order (ascending angle).
    pub jumps: Vec<(UnitPoint, ComplexMatrix)>,
    /// Continuous remainder, represented as the input times jump inverses.
    pub phi0: SymbolExpr,
    /// Similarity matrices `S_k` with `L_k = S_k^{-1} B_k S_k`.
    pub s_chain: Vec<ComplexMatrix>,
    /// Jump analyses of the input symbol (the `L_k` and their spectra).
    pub analyses: Vec<JumpAnalysis>,
    source: SymbolExpr,
}

impl Factorization {
    /// The original symbol the factorization was built from.
    pub fn source(&self) -> &SymbolExpr {
        &self.source
    }

    /// Eigenvalues `β_k^{(j)}` of `B_k`, per jump. Similar matrices share
    /// spectra, so these agree with the analysis betas to working accuracy,
    /// but they are computed from the `B_k` actually used in the product.
    pub fn jump_betas(&self) -> Result<Vec<Vec<Complex64>>> {
        let mut out = Vec::with_capacity(self.jumps.len());
        for (_, b) in &self.jumps {
            let mut ev = crate::schur::eigenvalues(b)?;
            ev.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            out.push(ev);
        }
        Ok(out)
    }

    /// The symbol `u_{B_k,τ_k}` as an expression.
    pub fn jump_symbol(&self, k: usize) -> SymbolExpr {
        let (tau, b) = &self.jumps[k];
        SymbolExpr::jump(*tau, b.clone()).expect("square")
    }

    /// The symbol `u_{B_k,τ_k}^{-1} = u_{-B_k,τ_k}`.
    pub fn jump_symbol_inverse(&self, k: usize) -> SymbolExpr {
        let (tau, b) = &self.jumps[k];
        SymbolExpr::jump(*tau, b.scale(Complex64::new(-1.0, 0.0))).expect("square")
    }
}

/// Peels the jumps off `sym` right-to-left and returns the canonical
/// factorization. Requires regularity; fails with `ResidualJump` if the
/// remainder is not numerically continuous at a peeled point.
pub fn factorize(sym: &SymbolExpr) -> Result<Factorization> {
    let analyses = analyze_jumps(sym)?;
    let taus: Vec<UnitPoint> = analyses.iter().map(|j| j.tau).collect();
    let r = taus.len();

    let mut psi = sym.clone();
    let mut bs: Vec<Option<ComplexMatrix>> = alloc::vec![None; r];
    for k in (0..r).rev() {
        let ratio = jump_ratio(&psi, taus[k])?;
        let (b, _betas) = principal_log_2pii(&ratio).map_err(|e| match e {
            Error::NotIRegular(crate::error::RegularityFailure::LogBranch {
                eigenvalue,
                distance,
                ..
            }) => Error::NotIRegular(crate::error::RegularityFailure::LogBranch {
                theta: taus[k].theta(),
                eigenvalue,
                distance,
            }),
            other => other,
        })?;
        psi = psi
            .product(&SymbolExpr::jump(taus[k], b.scale(Complex64::new(-1.0, 0.0)))?)?;
        bs[k] = Some(b);
    }
    let phi0 = psi;
    let jumps: Vec<(UnitPoint, ComplexMatrix)> =
        taus.iter().cloned().zip(bs.into_iter().map(|b| b.expect("filled"))).collect();

    // the remainder must be continuous at every peeled point
    for (tau, _) in &jumps {
        let plus = phi0.eval_sided(*tau, Side::Plus)?;
        let minus = phi0.eval_sided(*tau, Side::Minus)?;
        let size = plus.sub(&minus).max_norm() / plus.max_norm().max(1.0);
        if size > RESIDUAL_TOL {
            return Err(Error::ResidualJump { theta: tau.theta(), size });
        }
    }

    let mut fact = Factorization { jumps, phi0, s_chain: Vec::new(), analyses, source: sym.clone() };
    fact.s_chain = similarity_chain(&fact)?;
    Ok(fact)
}

/// `S_k = u_{B_{k+1},τ_{k+1}}(τ_k) ⋯ u_{B_R,τ_R}(τ_k)`, verifying
/// `L_k = S_k^{-1} B_k S_k` against the analysis logarithms.
pub fn similarity_chain(fact: &Factorization) -> Result<Vec<ComplexMatrix>> {
    let r = fact.jumps.len();
    let mut chain = Vec::with_capacity(r);
    for k in 0..r {
        let n = fact.jumps[k].1.n_rows();
        let mut s = ComplexMatrix::identity(n);
        let tau_k = fact.jumps[k].0;
        for j in k + 1..r {
            let factor = Factor::Jump { tau: fact.jumps[j].0, b: fact.jumps[j].1.clone() };
            let v = SymbolExpr::from_factors(n, alloc::vec![factor])?
                .eval(tau_k)
                .expect("τ_k is not a jump of a later factor");
            s = s.mul(&v);
        }
        let l_check = s.inverse()?.mul(&fact.jumps[k].1).mul(&s);
        let residual = l_check.sub(&fact.analyses[k].l).max_norm()
            / fact.analyses[k].l.max_norm().max(1.0);
        if residual > SIMILARITY_TOL {
            return Err(Error::SimilarityMismatch { index: k, residual });
        }
        chain.push(s);
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::fourier_table;
    use crate::symbol::LaurentPoly;
    use crate::winding::winding_i;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_strip_matrix(seed: u64) -> ComplexMatrix {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // upper triangular spectrum in the admissible strip + mild coupling
        let d1 = c(rng.gen_range(-0.35..0.35), rng.gen_range(-0.5..0.5));
        let d2 = c(rng.gen_range(-0.35..0.35), rng.gen_range(-0.5..0.5));
        let t = ComplexMatrix::from_rows(
            2,
            2,
            alloc::vec![d1, c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)), c(0., 0.), d2],
        )
        .unwrap();
        let s = ComplexMatrix::from_rows(
            2,
            2,
            alloc::vec![
                c(1.0, 0.0),
                c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
                c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
                c(1.0, 0.0)
            ],
        )
        .unwrap();
        s.mul(&t).mul(&s.inverse().unwrap())
    }

    fn smooth_invertible_2x2() -> SymbolExpr {
        // exp of a small Laurent polynomial: always invertible, winding 0
        let p = LaurentPoly::new(
            2,
            [
                (1i64, ComplexMatrix::from_rows(
                    2,
                    2,
                    alloc::vec![c(0.2, 0.1), c(0.1, 0.0), c(0.0, 0.1), c(-0.1, 0.2)],
                )
                .unwrap()),
                (-1i64, ComplexMatrix::from_rows(
                    2,
                    2,
                    alloc::vec![c(0.1, -0.1), c(0.0, 0.2), c(0.1, 0.0), c(0.2, 0.0)],
                )
                .unwrap()),
            ]
            .into_iter()
            .collect(),
        )
        .unwrap();
        SymbolExpr::exp_laurent(p)
    }

    #[test]
    fn single_jump_factorizes_trivially() {
        let b = random_strip_matrix(7);
        let tau = UnitPoint::from_theta(1.1);
        let sym = SymbolExpr::jump(tau, b.clone()).unwrap();
        let fact = factorize(&sym).unwrap();
        assert_eq!(fact.jumps.len(), 1);
        // B_R = L_R exactly (same computation path)
        assert_eq!(fact.jumps[0].1.data(), fact.analyses[0].l.data());
        assert!(fact.jumps[0].1.sub(&b).max_norm() < 1e-10);
        // φ₀ ≡ I to tolerance
        for th in fact.phi0.sample_angles(64) {
            let v = fact.phi0.eval(UnitPoint::from_theta(th)).unwrap();
            assert!(v.sub(&ComplexMatrix::identity(2)).max_norm() < 1e-10);
        }
        // R=1: S₁ = I
        assert!(fact.s_chain[0].sub(&ComplexMatrix::identity(2)).max_norm() < 1e-14);
    }

    #[test]
    fn smooth_times_jump_recovers_both_factors() {
        let smooth = smooth_invertible_2x2();
        let b = random_strip_matrix(21);
        let tau = UnitPoint::from_theta(2.7);
        let sym = smooth.product(&SymbolExpr::jump(tau, b.clone()).unwrap()).unwrap();
        let fact = factorize(&sym).unwrap();
        assert_eq!(fact.jumps.len(), 1);
        assert!(fact.jumps[0].1.sub(&b).max_norm() < 1e-10, "B recovered");
        for th in fact.phi0.sample_angles(64) {
            let t = UnitPoint::from_theta(th);
            let got = fact.phi0.eval(t).unwrap();
            let want = smooth.eval(t).unwrap();
            assert!(got.sub(&want).max_norm() < 1e-10, "φ₀ == smooth factor");
        }
    }

    #[test]
    fn reconstruction_of_two_jump_symbol() {
        let smooth = smooth_invertible_2x2();
        let b1 = random_strip_matrix(3);
        let b2 = random_strip_matrix(4);
        let t1 = UnitPoint::from_theta(0.8);
        let t2 = UnitPoint::from_theta(4.0);
        let sym = smooth
            .product(&SymbolExpr::jump(t1, b1).unwrap())
            .unwrap()
            .product(&SymbolExpr::jump(t2, b2).unwrap())
            .unwrap();
        let fact = factorize(&sym).unwrap();
        assert_eq!(fact.jumps.len(), 2);

        // pointwise reconstruction φ₀·∏u at off-jump samples
        let mut recon = fact.phi0.clone();
        for k in 0..fact.jumps.len() {
            recon = recon.product(&fact.jump_symbol(k)).unwrap();
        }
        let mut count = 0;
        for th in sym.sample_angles(128) {
            let t = UnitPoint::from_theta(th);
            let a = sym.eval(t).unwrap();
            let b = recon.eval(t).unwrap();
            assert!(a.sub(&b).max_norm() < 1e-9 * a.max_norm().max(1.0));
            count += 1;
        }
        assert!(count >= 256);

        // spectra of B_k and L_k agree as multisets
        let betas_b = fact.jump_betas().unwrap();
        for (k, bb) in betas_b.iter().enumerate() {
            for (x, y) in bb.iter().zip(&fact.analyses[k].betas) {
                assert!((x - y).norm() < 1e-9, "jump {k}: {x} vs {y}");
            }
        }

        // wind(det φ₀) equals the interval winding of the input (here 0)
        assert_eq!(winding_i(&fact.phi0).unwrap(), winding_i(&sym).unwrap());
    }

    #[test]
    fn commuting_diagonal_jumps_have_identity_chain_effect() {
        let b1 = ComplexMatrix::diag(&[c(0.2, 0.0), c(-0.1, 0.0)]);
        let b2 = ComplexMatrix::diag(&[c(0.15, 0.1), c(0.25, 0.0)]);
        let sym = SymbolExpr::jump(UnitPoint::from_theta(1.0), b1.clone())
            .unwrap()
            .product(&SymbolExpr::jump(UnitPoint::from_theta(3.0), b2.clone()).unwrap())
            .unwrap();
        let fact = factorize(&sym).unwrap();
        // diagonal jumps commute: B_k == L_k and S_k diagonal
        for (k, (_, b)) in fact.jumps.iter().enumerate() {
            assert!(b.sub(&fact.analyses[k].l).max_norm() < 1e-10);
            let s = &fact.s_chain[k];
            assert!(s[(0, 1)].norm() < 1e-12 && s[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn remainder_has_fast_fourier_decay() {
        // φ₀ is continuous with limited smoothness at the peeled point:
        // fitted decay strictly faster than O(1/k), unlike the jumped input
        let sym = SymbolExpr::builtin(crate::symbol::Builtin::XyEntropy {
            lambda: c(3.0, 0.0),
            alpha: 1.0,
            gamma: 1.0,
        })
        .unwrap();
        let fact = factorize(&sym).unwrap();
        let table = fourier_table(&fact.phi0, 48, 1e-11).unwrap();
        let p = table.decay_exponent();
        assert!(p < -1.2, "φ₀ decay exponent {p} not faster than 1/k");
        // while the input with its genuine jump decays like 1/k
        let t_in = fourier_table(&sym, 48, 1e-11).unwrap();
        let p_in = t_in.decay_exponent();
        assert!(p_in > -1.2 && p_in < -0.8, "input decay exponent {p_in}");
    }
}
