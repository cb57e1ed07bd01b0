//! Cross-module checks of the determinant asymptotics machinery against
//! independent closed-form oracles.

use btoep_core::engine::{
    det_section, estimate_e_opdet, geometric_n_grid, toeplitz_section, verify_asymptotics,
    VerifyOptions,
};
use btoep_core::factorization::factorize;
use btoep_core::fourier::fourier_table;
use btoep_core::jumps::analyze_jumps;
use btoep_core::symbol::LaurentPoly;
use btoep_core::{Builtin, Complex64, ComplexMatrix, SymbolExpr, UnitPoint};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Smooth scalar symbol with no jumps: `φ = exp(a₀ + a₁t + a₋₁t^{-1})`.
/// The classical limit gives `G = e^{a₀}` and `E = exp(Σ_{k≥1} k·c_k·c_{-k})`
/// with `c = log φ`, here exactly `E = exp(a₁·a₋₁)`.
#[test]
fn strong_szego_limit_scalar_oracle() {
    let (a0, a1, am1) = (c(0.1, 0.05), c(0.3, 0.0), c(0.2, -0.1));
    let sym = SymbolExpr::exp_laurent(LaurentPoly::scalar_terms(&[(0, a0), (1, a1), (-1, am1)]));
    let grid = geometric_n_grid(8, 64);
    let rep = verify_asymptotics(&sym, &grid, &VerifyOptions::default()).unwrap();

    let want_g = a0.exp();
    assert!(
        (rep.constants.g - want_g).norm() < 1e-10 * want_g.norm(),
        "G {} vs e^a0 {}",
        rep.constants.g,
        want_g
    );
    assert!((rep.constants.omega).norm() < 1e-13, "no jumps: Ω = 0");
    assert!((rep.constants.e_barnes - c(1.0, 0.0)).norm() < 1e-13);

    let want_e = (a1 * am1).exp();
    let emp = rep.e_extrapolated.expect("smooth symbol converges fast");
    assert!(
        (emp - want_e).norm() < 1e-6 * want_e.norm(),
        "empirical E {emp} vs exp(a₁a₋₁) {want_e}"
    );
    // the R=0 operator determinant is det T(φ)T(φ^{-1}) itself
    let opdet = rep.e_opdet.expect("enabled");
    assert!(
        (opdet.value - want_e).norm() < 1e-8 * want_e.norm(),
        "operator determinant {} vs {}",
        opdet.value,
        want_e
    );
}

/// A block-diagonal pair of scalar jumps: determinants split, so the whole
/// report must equal the product of the scalar reports.
#[test]
fn block_diagonal_report_is_product_of_scalar_reports() {
    let (b1, b2) = (c(0.3, 0.0), c(-0.15, 0.1));
    let theta = 1.1;
    let block = SymbolExpr::jump(UnitPoint::from_theta(theta), ComplexMatrix::diag(&[b1, b2]))
        .unwrap();
    let s1 = SymbolExpr::jump(UnitPoint::from_theta(theta), ComplexMatrix::scalar(b1)).unwrap();
    let s2 = SymbolExpr::jump(UnitPoint::from_theta(theta), ComplexMatrix::scalar(b2)).unwrap();

    let grid = geometric_n_grid(16, 128);
    let opts = VerifyOptions { opdet: false, ..VerifyOptions::default() };
    let rb = verify_asymptotics(&block, &grid, &opts).unwrap();
    let r1 = verify_asymptotics(&s1, &grid, &opts).unwrap();
    let r2 = verify_asymptotics(&s2, &grid, &opts).unwrap();

    assert!((rb.constants.omega - (r1.constants.omega + r2.constants.omega)).norm() < 1e-12);
    let eb_want = r1.constants.e_barnes * r2.constants.e_barnes;
    assert!((rb.constants.e_barnes - eb_want).norm() < 1e-10 * eb_want.norm());
    for ((b, x), y) in rb.rows.iter().zip(&r1.rows).zip(&r2.rows) {
        let want = x.e_n * y.e_n;
        let rel = (b.e_n - want).norm() / want.norm();
        assert!(rel < 1e-8, "n={}: block E_n {} vs product {} ({rel:.3e})", b.n, b.e_n, want);
    }
}

/// Triangular symbols have exactly the determinant asymptotics of their
/// diagonal: the finite determinants already factor exactly, and the
/// off-diagonal jump contributes a nilpotent logarithm with zero betas.
#[test]
fn triangular_symbol_determinants_ignore_off_diagonal_jump() {
    let (beta1, beta2) = (c(0.3, 0.0), c(-0.2, 0.0));
    let (t1, t2, tg) = (0.0, std::f64::consts::PI, 1.9);
    let tri = SymbolExpr::builtin(Builtin::Triangular2x2 {
        beta1,
        beta2,
        beta_g: c(0.25, 0.0),
        theta1: t1,
        theta2: t2,
        theta_g: tg,
        g_scale: c(1.0, 0.0),
    })
    .unwrap();

    // the g jump carries betas {0, 0}: a nilpotent (non-diagonalizable) log
    let jumps = analyze_jumps(&tri).unwrap();
    let g_jump = jumps
        .iter()
        .find(|j| (j.tau.theta() - tg).abs() < 1e-9)
        .expect("jump at theta_g declared");
    assert!(g_jump.betas.iter().all(|b| b.norm() < 1e-10));
    assert!(g_jump.l.max_norm() > 1e-3, "log is nilpotent but nonzero");

    let f = SymbolExpr::jump(UnitPoint::from_theta(t1), ComplexMatrix::scalar(beta1)).unwrap();
    let h = SymbolExpr::jump(UnitPoint::from_theta(t2), ComplexMatrix::scalar(beta2)).unwrap();
    let tt = fourier_table(&tri, 48, 1e-12).unwrap();
    let tf = fourier_table(&f, 48, 1e-12).unwrap();
    let th = fourier_table(&h, 48, 1e-12).unwrap();
    for n in [8usize, 24, 48] {
        let d = det_section(&toeplitz_section(&tt, n).unwrap()).unwrap();
        let df = det_section(&toeplitz_section(&tf, n).unwrap()).unwrap();
        let dh = det_section(&toeplitz_section(&th, n).unwrap()).unwrap();
        let want = df.det * dh.det;
        assert!(
            (d.det - want).norm() < 1e-10 * want.norm(),
            "n={n}: {} vs {}",
            d.det,
            want
        );
    }
}

/// Pure scalar jump: the tail of `E_n` is monotone in modulus past `n = 64`
/// and contracts at a rate consistent with an `O(1/n)` error model.
#[test]
fn pure_jump_tail_monotone_and_first_order() {
    let sym =
        SymbolExpr::jump(UnitPoint::from_theta(0.0), ComplexMatrix::scalar(c(0.3, 0.0))).unwrap();
    let grid = geometric_n_grid(16, 512);
    let opts = VerifyOptions { opdet: false, ..VerifyOptions::default() };
    let rep = verify_asymptotics(&sym, &grid, &opts).unwrap();
    let e = rep.e_extrapolated.unwrap();

    let tail: Vec<(usize, f64)> = rep
        .rows
        .iter()
        .filter(|r| r.n >= 64)
        .map(|r| (r.n, (r.e_n - e).norm()))
        .collect();
    for w in tail.windows(2) {
        assert!(w[1].1 <= w[0].1, "|E_n - E| not monotone: {tail:?}");
        // consistent with an O(1/n) envelope: err_n·n must not grow
        let scaled0 = w[0].1 * w[0].0 as f64;
        let scaled1 = w[1].1 * w[1].0 as f64;
        assert!(scaled1 < 1.2 * scaled0, "decay slower than O(1/n): {tail:?}");
    }
    // at least first order; for this symbol the data shows ~1/n², which the
    // fit clamps at its upper bound
    let p = rep.fitted_rate.unwrap();
    assert!(p >= 0.7, "fitted rate {p} below first order");
}

/// The operator determinant route agrees with the empirical sweep for the
/// entanglement symbol (two independent numerical routes to `E`).
#[test]
fn xy_entropy_e_routes_agree_to_one_percent() {
    let sym = SymbolExpr::builtin(Builtin::XyEntropy { lambda: c(3.0, 0.0), alpha: 1.0, gamma: 1.0 })
        .unwrap();
    let fact = factorize(&sym).unwrap();
    let opdet = estimate_e_opdet(&fact, 32, 1e-3, 1e-12, 64).unwrap();
    let e_barnes = btoep_core::constants::barnes_factor(&fact.analyses).unwrap();
    let formula = opdet.value * e_barnes;

    let grid = geometric_n_grid(16, 181);
    let opts = VerifyOptions { opdet: false, ..VerifyOptions::default() };
    let rep = verify_asymptotics(&sym, &grid, &opts).unwrap();
    let emp = rep.e_extrapolated.unwrap();
    let rel = (formula - emp).norm() / emp.norm();
    assert!(rel < 0.01, "formula {formula} vs empirical {emp} ({rel:.3e})");
}

/// Two jump factors sharing the same point merge into a single analyzed
/// jump; the peeled factorization still reconstructs the symbol pointwise.
#[test]
fn shared_jump_point_composes_multiplicatively() {
    let tau = UnitPoint::from_theta(2.4);
    let b1 = ComplexMatrix::from_rows(
        2,
        2,
        vec![c(0.15, 0.1), c(0.1, 0.0), c(0.0, 0.05), c(-0.2, 0.0)],
    )
    .unwrap();
    let b2 = ComplexMatrix::from_rows(
        2,
        2,
        vec![c(-0.1, 0.0), c(0.0, 0.1), c(0.05, 0.0), c(0.2, -0.1)],
    )
    .unwrap();
    let sym = SymbolExpr::jump(tau, b1)
        .unwrap()
        .product(&SymbolExpr::jump(tau, b2).unwrap())
        .unwrap();
    assert_eq!(sym.jump_set().len(), 1, "shared point is one jump");

    let jumps = analyze_jumps(&sym).unwrap();
    assert_eq!(jumps.len(), 1);
    assert!(jumps[0].margin > 0.0);

    let fact = factorize(&sym).unwrap();
    assert_eq!(fact.jumps.len(), 1);
    let mut recon = fact.phi0.clone();
    recon = recon.product(&fact.jump_symbol(0)).unwrap();
    for theta in sym.sample_angles(96) {
        let t = UnitPoint::from_theta(theta);
        let a = sym.eval(t).unwrap();
        let b = recon.eval(t).unwrap();
        assert!(a.sub(&b).max_norm() < 1e-9 * a.max_norm().max(1.0));
    }
}

/// Full pipeline over a defective jump: the triangular builtin's `g` jump
/// has a nilpotent logarithm (betas all zero), its Barnes contribution is 1,
/// and the operator determinant telescopes to 1 because the finite
/// determinants factor exactly into the two scalar jumps.
#[test]
fn defective_jump_through_verify_and_opdet() {
    let sym = SymbolExpr::builtin(Builtin::Triangular2x2 {
        beta1: c(0.3, 0.0),
        beta2: c(-0.2, 0.0),
        beta_g: c(0.25, 0.0),
        theta1: 0.0,
        theta2: std::f64::consts::PI,
        theta_g: 1.9,
        g_scale: c(1.0, 0.0),
    })
    .unwrap();
    let grid = geometric_n_grid(16, 256);
    let opts = VerifyOptions { opdet_initial: 32, opdet_cap: 128, ..VerifyOptions::default() };
    let rep = verify_asymptotics(&sym, &grid, &opts).unwrap();

    assert!((rep.constants.g - c(1.0, 0.0)).norm() < 1e-9);
    let want_omega = -(c(0.3, 0.0).powi(2) + c(-0.2, 0.0).powi(2));
    assert!((rep.constants.omega - want_omega).norm() < 1e-10);

    // E = ∏ G(1±β): determinants split exactly, so the opdet part is 1
    let opdet = rep.e_opdet.unwrap();
    assert!(
        (opdet.value - c(1.0, 0.0)).norm() < 1e-2,
        "opdet should telescope near 1, got {}",
        opdet.value
    );
    let emp = rep.e_extrapolated.unwrap();
    let rel = (emp - rep.constants.e_barnes).norm() / emp.norm();
    assert!(rel < 1e-2, "empirical E {emp} vs Barnes product {} ({rel:.2e})", rep.constants.e_barnes);
}

/// Complex contour parameter: the jump-ratio eigenvalues (λ+1)/(λ-1) and its
/// reciprocal leave the negative real axis, the betas gain nonzero real
/// parts, and the sweep runs with genuinely complex Ω.
#[test]
fn xy_entropy_with_complex_lambda() {
    let lambda = c(0.5, 0.8);
    let sym = SymbolExpr::builtin(Builtin::XyEntropy { lambda, alpha: 1.0, gamma: 1.0 }).unwrap();
    let jumps = analyze_jumps(&sym).unwrap();
    assert_eq!(jumps.len(), 1);

    // closed form: β = ±(1/2πi)·Log((λ+1)/(λ-1)), principal branch
    let ratio_ev = (lambda + c(1.0, 0.0)) / (lambda - c(1.0, 0.0));
    let beta = ratio_ev.ln() / c(0.0, std::f64::consts::TAU);
    assert!(beta.re.abs() > 0.05, "test should exercise nonzero Re β");
    let mut got = jumps[0].betas.clone();
    got.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
    let mut want = vec![beta, -beta];
    want.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).norm() < 1e-12, "{g} vs {w}");
    }

    let grid = geometric_n_grid(16, 181);
    let opts = VerifyOptions { opdet: false, ..VerifyOptions::default() };
    let rep = verify_asymptotics(&sym, &grid, &opts).unwrap();
    // G = 1 - λ², Ω = -2β² (both complex here)
    let want_g = c(1.0, 0.0) - lambda * lambda;
    assert!((rep.constants.g - want_g).norm() < 1e-9 * want_g.norm());
    let want_omega = -2.0 * beta * beta;
    assert!((rep.constants.omega - want_omega).norm() < 1e-10);
    assert!(rep.constants.omega.im.abs() > 1e-3, "Ω should be complex");
    assert!(rep.cauchy, "E_n should settle for complex λ as well");
}
