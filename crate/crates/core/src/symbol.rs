//! Matrix-valued symbols on the unit circle.
//!
//! A [`SymbolExpr`] is an ordered product of factors evaluated pointwise at
//! `t = e^{iθ}`. Jumps are first-class: every factor knows its discontinuity
//! points and supplies exact one-sided limits there, so downstream analysis
//! (jump ratios, winding, factorization) never has to approach a jump by
//! numerical limits.
//!
//! The canonical jump factor is
//!
//! ```text
//! u_{B,τ}(t) = exp(iB·arg(-t/τ)),   |arg(·)| < π,
//! ```
//!
//! equivalently `u_{B,1}(e^{ix}) = exp((x-π)iB)` for `0 < x < 2π`, with
//! one-sided limits `u_{B,τ}(τ±0) = exp(∓πiB)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;

use crate::cmat::ComplexMatrix;
use crate::error::{Error, Result};
use crate::matfun::expm;

pub const TAU: f64 = core::f64::consts::TAU;

/// Angular tolerance: two circle points are the same iff their angles differ
/// by less than this, mod 2π.
pub const ANGLE_TOL: f64 = 1e-12;

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// A point `e^{iθ}` on the unit circle, stored by its normalized angle.
#[derive(Debug, Clone, Copy)]
pub struct UnitPoint {
    theta: f64,
}

impl UnitPoint {
    pub fn from_theta(theta: f64) -> Self {
        Self { theta: wrap_angle(theta) }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// Equality mod 2π within [`ANGLE_TOL`].
    pub fn approx_eq(&self, other: &UnitPoint) -> bool {
        circular_distance(self.theta, other.theta) < ANGLE_TOL
    }

    /// The complex-conjugate point `e^{-iθ}`.
    pub fn conj(&self) -> UnitPoint {
        UnitPoint::from_theta(-self.theta)
    }
}

/// Which one-sided limit at a jump: `φ(τ±0) = lim_{θ→+0} φ(τe^{±iθ})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

/// A matrix Laurent polynomial `Σ_k a_k t^k` with finitely many terms.
#[derive(Debug, Clone)]
pub struct LaurentPoly {
    n: usize,
    coeffs: BTreeMap<i64, ComplexMatrix>,
}

impl LaurentPoly {
    pub fn new(n: usize, coeffs: BTreeMap<i64, ComplexMatrix>) -> Result<Self> {
        for m in coeffs.values() {
            if m.n_rows() != n || m.n_cols() != n {
                return Err(Error::DimensionMismatch(m.n_rows(), n));
            }
        }
        Ok(Self { n, coeffs })
    }

    /// Constant polynomial.
    pub fn constant(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(m.n_rows(), m.n_cols()));
        }
        let n = m.n_rows();
        let mut coeffs = BTreeMap::new();
        if m.max_norm() > 0.0 {
            coeffs.insert(0, m);
        }
        Ok(Self { n, coeffs })
    }

    /// Scalar Laurent polynomial from `(k, value)` pairs.
    pub fn scalar_terms(terms: &[(i64, Complex64)]) -> Self {
        let mut coeffs = BTreeMap::new();
        for &(k, z) in terms {
            coeffs.insert(k, ComplexMatrix::scalar(z));
        }
        Self { n: 1, coeffs }
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, ComplexMatrix> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> ComplexMatrix {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| ComplexMatrix::zeros(self.n, self.n))
    }

    /// Largest `|k|` with a nonzero coefficient.
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for (&k, a) in &self.coeffs {
            let tk = Complex64::from_polar(1.0, k as f64 * theta);
            acc = acc.add(&a.scale(tk));
        }
        acc
    }

    /// Exact coefficient convolution of two Laurent polynomials.
    pub fn mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut coeffs: BTreeMap<i64, ComplexMatrix> = BTreeMap::new();
        for (&j, a) in &self.coeffs {
            for (&k, b) in &other.coeffs {
                let prod = a.mul(b);
                coeffs
                    .entry(j + k)
                    .and_modify(|m| *m = m.add(&prod))
                    .or_insert(prod);
            }
        }
        Ok(LaurentPoly { n: self.n, coeffs })
    }
}

/// One arc of a piecewise constant symbol: value on `[from, to)`, counterclockwise.
#[derive(Debug, Clone)]
pub struct Arc {
    pub from: UnitPoint,
    pub to: UnitPoint,
    pub value: ComplexMatrix,
}

/// A piecewise constant symbol; the arcs partition the circle.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    n: usize,
    arcs: Vec<Arc>,
}

impl PiecewiseConstant {
    pub fn new(mut arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidArgument("piecewise constant symbol needs arcs"));
        }
        let n = arcs[0].value.n_rows();
        for a in &arcs {
            if !a.value.is_square() || a.value.n_rows() != n {
                return Err(Error::DimensionMismatch(a.value.n_rows(), n));
            }
        }
        arcs.sort_by(|a, b| a.from.theta().partial_cmp(&b.from.theta()).unwrap());
        // arcs must tile the circle: each ends where the next begins
        let mut total = 0.0;
        for i in 0..arcs.len() {
            let next = &arcs[(i + 1) % arcs.len()];
            if !arcs[i].to.approx_eq(&next.from) {
                return Err(Error::InvalidArgument("piecewise constant arcs do not tile the circle"));
            }
            let mut len = wrap_angle(arcs[i].to.theta() - arcs[i].from.theta());
            if len == 0.0 && arcs.len() == 1 {
                len = TAU;
            }
            total += len;
        }
        if (total - TAU).abs() > 1e-9 {
            return Err(Error::InvalidArgument("piecewise constant arcs do not cover 2π"));
        }
        Ok(Self { n, arcs })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    fn arc_index_at(&self, theta: f64) -> usize {
        let theta = wrap_angle(theta);
        // arcs sorted by `from`; pick the last arc whose start is <= theta,
        // wrapping to the final arc for angles before the first start
        let mut idx = self.arcs.len() - 1;
        for (i, a) in self.arcs.iter().enumerate() {
            if a.from.theta() <= theta + ANGLE_TOL {
                idx = i;
            } else {
                break;
            }
        }
        idx
    }

    pub fn value(&self, theta: f64) -> &ComplexMatrix {
        &self.arcs[self.arc_index_at(theta)].value
    }

    fn sided(&self, tau: &UnitPoint, side: Side) -> &ComplexMatrix {
        for (i, a) in self.arcs.iter().enumerate() {
            if a.from.approx_eq(tau) {
                return match side {
                    Side::Plus => &a.value,
                    Side::Minus => {
                        let prev = (i + self.arcs.len() - 1) % self.arcs.len();
                        &self.arcs[prev].value
                    }
                };
            }
        }
        self.value(tau.theta())
    }

    fn jump_thetas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let m = self.arcs.len();
        for i in 0..m {
            let prev = &self.arcs[(i + m - 1) % m];
            let here = &self.arcs[i];
            let scale = prev.value.max_norm().max(here.value.max_norm()).max(1.0);
            if prev.value.sub(&here.value).max_norm() > 1e-12 * scale {
                out.push(here.from.theta());
            }
        }
        out
    }
}

/// Scalar canonical jump `u_{β,τ}(e^{iθ}) = exp(iβ(x-π))`, `x = θ-θ_τ mod 2π`.
fn scalar_jump(beta: Complex64, theta_tau: f64, theta: f64) -> Complex64 {
    let x = wrap_angle(theta - theta_tau);
    (Complex64::i() * beta * (x - core::f64::consts::PI)).exp()
}

fn scalar_jump_sided(beta: Complex64, side: Side) -> Complex64 {
    let sign = match side {
        Side::Plus => -1.0,
        Side::Minus => 1.0,
    };
    (Complex64::i() * beta * sign * core::f64::consts::PI).exp()
}

/// Closed-form symbols used by the examples and the entanglement applications.
#[derive(Debug, Clone)]
pub enum Builtin {
    /// `[[iλ, g(θ)], [-g(θ)^{-1}, iλ]]` with
    /// `g = (α cos θ - 1 - iγα sin θ)/|α cos θ - 1 - iγα sin θ|`;
    /// has a jump at `θ = 0` exactly when `α = 1`.
    XyEntropy { lambda: Complex64, alpha: f64, gamma: f64 },
    /// `λI - M(θ)/Λ(θ)` for the long-range pairing chain; jumps at `±θ₀`.
    KitaevLongrange { lambda: Complex64, h: f64, theta0: f64 },
    /// Upper triangular `[[f, g], [0, h]]` with scalar jumps
    /// `f = u_{β₁,τ₁}`, `h = u_{β₂,τ₂}`, `g = c_g·u_{β_g,τ_g}`.
    Triangular2x2 {
        beta1: Complex64,
        beta2: Complex64,
        beta_g: Complex64,
        theta1: f64,
        theta2: f64,
        theta_g: f64,
        g_scale: Complex64,
    },
    /// `[[u_{β,τ}, b], [c, u_{β,τ}]]` with constant off-diagonal entries.
    JumpOffdiag2x2 { beta: Complex64, b: Complex64, c: Complex64, theta: f64 },
}

impl Builtin {
    pub fn block_size(&self) -> usize {
        2
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Builtin::XyEntropy { alpha, gamma, .. } => {
                if *gamma <= 0.0 {
                    return Err(Error::InvalidArgument("xy_entropy requires gamma > 0"));
                }
                if *alpha <= 0.0 {
                    return Err(Error::InvalidArgument("xy_entropy requires alpha > 0"));
                }
                Ok(())
            }
            Builtin::KitaevLongrange { h, theta0, .. } => {
                if !(*theta0 > 0.0 && *theta0 < core::f64::consts::PI) {
                    return Err(Error::InvalidArgument("kitaev_longrange requires 0 < theta0 < π"));
                }
                if (h - 2.0).abs() < 1e-12 || (h + 2.0).abs() < 1e-12 {
                    return Err(Error::InvalidArgument("kitaev_longrange requires h ≠ ±2"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn jump_thetas(&self) -> Vec<f64> {
        match self {
            Builtin::XyEntropy { alpha, .. } => {
                if (alpha - 1.0).abs() < 1e-12 {
                    vec![0.0]
                } else {
                    Vec::new()
                }
            }
            Builtin::KitaevLongrange { theta0, .. } => {
                vec![wrap_angle(*theta0), wrap_angle(-*theta0)]
            }
            Builtin::Triangular2x2 { theta1, theta2, theta_g, .. } => {
                vec![wrap_angle(*theta1), wrap_angle(*theta2), wrap_angle(*theta_g)]
            }
            Builtin::JumpOffdiag2x2 { theta, .. } => vec![wrap_angle(*theta)],
        }
    }

    fn xy_from_g(lambda: Complex64, g: Complex64) -> ComplexMatrix {
        let il = Complex64::i() * lambda;
        ComplexMatrix::from_rows(2, 2, vec![il, g, -g.finv(), il]).expect("2x2")
    }

    fn kitaev_from_parts(lambda: Complex64, h: f64, theta: f64, g: Complex64) -> ComplexMatrix {
        let a = h + 2.0 * theta.cos();
        let lam_big = (a * a + g.norm_sqr()).sqrt();
        let scale = Complex64::new(-1.0 / lam_big, 0.0);
        let mut m = ComplexMatrix::from_rows(
            2,
            2,
            vec![Complex64::new(a, 0.0), g, -g, Complex64::new(-a, 0.0)],
        )
        .expect("2x2")
        .scale(scale);
        m[(0, 0)] += lambda;
        m[(1, 1)] += lambda;
        m
    }

    /// The piecewise linear phase `G(θ)` of the long-range pairing symbol,
    /// on the principal interval `θ' ∈ (-π, π]`.
    fn kitaev_g(theta0: f64, theta: f64) -> Complex64 {
        let pi = core::f64::consts::PI;
        let tp = if theta > pi { theta - TAU } else { theta };
        let g = if tp < -theta0 {
            -(pi + tp)
        } else if tp < theta0 {
            -tp
        } else {
            pi - tp
        };
        Complex64::new(0.0, g)
    }

    fn value(&self, theta: f64) -> ComplexMatrix {
        match self {
            Builtin::XyEntropy { lambda, alpha, gamma } => {
                let w = Complex64::new(
                    alpha * theta.cos() - 1.0,
                    -gamma * alpha * theta.sin(),
                );
                Self::xy_from_g(*lambda, w / w.norm())
            }
            Builtin::KitaevLongrange { lambda, h, theta0 } => {
                Self::kitaev_from_parts(*lambda, *h, theta, Self::kitaev_g(*theta0, theta))
            }
            Builtin::Triangular2x2 { beta1, beta2, beta_g, theta1, theta2, theta_g, g_scale } => {
                let f = scalar_jump(*beta1, *theta1, theta);
                let h = scalar_jump(*beta2, *theta2, theta);
                let g = g_scale * scalar_jump(*beta_g, *theta_g, theta);
                ComplexMatrix::from_rows(2, 2, vec![f, g, Complex64::zero(), h]).expect("2x2")
            }
            Builtin::JumpOffdiag2x2 { beta, b, c, theta: theta_tau } => {
                let u = scalar_jump(*beta, *theta_tau, theta);
                ComplexMatrix::from_rows(2, 2, vec![u, *b, *c, u]).expect("2x2")
            }
        }
    }

    fn sided(&self, tau: &UnitPoint, side: Side) -> ComplexMatrix {
        let at_jump =
            self.jump_thetas().iter().any(|&t| circular_distance(t, tau.theta()) < ANGLE_TOL);
        if !at_jump {
            return self.value(tau.theta());
        }
        match self {
            Builtin::XyEntropy { lambda, gamma, .. } => {
                // jump at θ = 0 when α = 1: g(0±0) = ∓i for γ > 0
                debug_assert!(*gamma > 0.0);
                let g = match side {
                    Side::Plus => -Complex64::i(),
                    Side::Minus => Complex64::i(),
                };
                Self::xy_from_g(*lambda, g)
            }
            Builtin::KitaevLongrange { lambda, h, theta0 } => {
                let pi = core::f64::consts::PI;
                let at_plus = circular_distance(tau.theta(), *theta0) < ANGLE_TOL;
                let g = if at_plus {
                    match side {
                        Side::Plus => Complex64::new(0.0, pi - theta0),
                        Side::Minus => Complex64::new(0.0, -theta0),
                    }
                } else {
                    match side {
                        Side::Plus => Complex64::new(0.0, *theta0),
                        Side::Minus => Complex64::new(0.0, -(pi - theta0)),
                    }
                };
                Self::kitaev_from_parts(*lambda, *h, tau.theta(), g)
            }
            Builtin::Triangular2x2 { beta1, beta2, beta_g, theta1, theta2, theta_g, g_scale } => {
                let lim = |beta: Complex64, th: f64| {
                    if circular_distance(th, tau.theta()) < ANGLE_TOL {
                        scalar_jump_sided(beta, side)
                    } else {
                        scalar_jump(beta, th, tau.theta())
                    }
                };
                let f = lim(*beta1, *theta1);
                let h = lim(*beta2, *theta2);
                let g = g_scale * lim(*beta_g, *theta_g);
                ComplexMatrix::from_rows(2, 2, vec![f, g, Complex64::zero(), h]).expect("2x2")
            }
            Builtin::JumpOffdiag2x2 { beta, b, c, .. } => {
                let u = scalar_jump_sided(*beta, side);
                ComplexMatrix::from_rows(2, 2, vec![u, *b, *c, u]).expect("2x2")
            }
        }
    }
}

/// One factor of a symbol expression.
#[derive(Debug, Clone)]
pub enum Factor {
    Laurent(LaurentPoly),
    /// Pointwise matrix exponential of a Laurent polynomial; always invertible.
    ExpLaurent(LaurentPoly),
    /// Canonical jump `u_{B,τ}`.
    Jump { tau: UnitPoint, b: ComplexMatrix },
    PiecewiseConstant(PiecewiseConstant),
    Builtin(Builtin),
    /// Pointwise matrix inverse of a whole symbol expression.
    Inverse(SymbolExpr),
    /// `t ↦ inner(t^{-1})`.
    Tilde(SymbolExpr),
    /// Pointwise determinant of the inner symbol, a scalar (1×1) factor.
    /// Internal building block for the companion function `c(t)`; not part of
    /// the JSON schema.
    Det(SymbolExpr),
}

impl Factor {
    pub fn block_size(&self) -> usize {
        match self {
            Factor::Laurent(p) | Factor::ExpLaurent(p) => p.block_size(),
            Factor::Jump { b, .. } => b.n_rows(),
            Factor::PiecewiseConstant(pc) => pc.n,
            Factor::Builtin(b) => b.block_size(),
            Factor::Inverse(s) | Factor::Tilde(s) => s.block_size(),
            Factor::Det(_) => 1,
        }
    }

    fn jump_thetas(&self) -> Vec<f64> {
        match self {
            Factor::Laurent(_) | Factor::ExpLaurent(_) => Vec::new(),
            Factor::Jump { tau, .. } => vec![tau.theta()],
            Factor::PiecewiseConstant(pc) => pc.jump_thetas(),
            Factor::Builtin(b) => b.jump_thetas(),
            Factor::Inverse(s) | Factor::Det(s) => {
                s.jump_set.iter().map(|p| p.theta()).collect()
            }
            Factor::Tilde(s) => s.jump_set.iter().map(|p| wrap_angle(-p.theta())).collect(),
        }
    }

    fn value(&self, theta: f64) -> Result<ComplexMatrix> {
        match self {
            Factor::Laurent(p) => Ok(p.eval(theta)),
            Factor::ExpLaurent(p) => Ok(expm(&p.eval(theta))),
            Factor::Jump { tau, b } => {
                if b.n_rows() == 1 {
                    return Ok(ComplexMatrix::scalar(scalar_jump(b[(0, 0)], tau.theta(), theta)));
                }
                let x = wrap_angle(theta - tau.theta());
                Ok(expm(&b.scale(Complex64::new(0.0, x - core::f64::consts::PI))))
            }
            Factor::PiecewiseConstant(pc) => Ok(pc.value(theta).clone()),
            Factor::Builtin(b) => Ok(b.value(theta)),
            Factor::Inverse(s) => s
                .eval(UnitPoint::from_theta(theta))?
                .inverse()
                .map_err(|_| Error::SingularValue { theta }),
            Factor::Tilde(s) => s.eval(UnitPoint::from_theta(-theta)),
            Factor::Det(s) => {
                let v = s.eval(UnitPoint::from_theta(theta))?;
                Ok(ComplexMatrix::scalar(v.det()?))
            }
        }
    }

    fn sided(&self, tau: &UnitPoint, side: Side) -> Result<ComplexMatrix> {
        match self {
            Factor::Laurent(p) => Ok(p.eval(tau.theta())),
            Factor::ExpLaurent(p) => Ok(expm(&p.eval(tau.theta()))),
            Factor::Jump { tau: own, b } => {
                if own.approx_eq(tau) {
                    let sign = match side {
                        Side::Plus => -1.0,
                        Side::Minus => 1.0,
                    };
                    Ok(expm(&b.scale(Complex64::new(0.0, sign * core::f64::consts::PI))))
                } else {
                    self.value(tau.theta())
                }
            }
            Factor::PiecewiseConstant(pc) => Ok(pc.sided(tau, side).clone()),
            Factor::Builtin(b) => Ok(b.sided(tau, side)),
            Factor::Inverse(s) => s
                .eval_sided(*tau, side)?
                .inverse()
                .map_err(|_| Error::SingularValue { theta: tau.theta() }),
            Factor::Tilde(s) => s.eval_sided(tau.conj(), side.flip()),
            Factor::Det(s) => {
                let v = s.eval_sided(*tau, side)?;
                Ok(ComplexMatrix::scalar(v.det()?))
            }
        }
    }
}

/// An `N×N` matrix symbol: ordered product of factors, with its jump set.
#[derive(Debug, Clone)]
pub struct SymbolExpr {
    n: usize,
    factors: Vec<Factor>,
    jump_set: Vec<UnitPoint>,
}

impl SymbolExpr {
    pub fn from_factors(n: usize, factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            if f.block_size() != n {
                return Err(Error::DimensionMismatch(f.block_size(), n));
            }
            if let Factor::Builtin(b) = f {
                b.validate()?;
            }
        }
        let mut thetas: Vec<f64> = factors.iter().flat_map(|f| f.jump_thetas()).collect();
        thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut jump_set: Vec<UnitPoint> = Vec::new();
        for t in thetas {
            let p = UnitPoint::from_theta(t);
            if !jump_set.iter().any(|q| q.approx_eq(&p)) {
                jump_set.push(p);
            }
        }
        Ok(Self { n, factors, jump_set })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, factors: Vec::new(), jump_set: Vec::new() }
    }

    pub fn constant(m: ComplexMatrix) -> Result<Self> {
        let n = m.n_rows();
        Self::from_factors(n, vec![Factor::Laurent(LaurentPoly::constant(m)?)])
    }

    pub fn laurent(p: LaurentPoly) -> Self {
        let n = p.block_size();
        Self::from_factors(n, vec![Factor::Laurent(p)]).expect("validated")
    }

    pub fn exp_laurent(p: LaurentPoly) -> Self {
        let n = p.block_size();
        Self::from_factors(n, vec![Factor::ExpLaurent(p)]).expect("validated")
    }

    pub fn jump(tau: UnitPoint, b: ComplexMatrix) -> Result<Self> {
        if !b.is_square() {
            return Err(Error::DimensionMismatch(b.n_rows(), b.n_cols()));
        }
        let n = b.n_rows();
        Self::from_factors(n, vec![Factor::Jump { tau, b }])
    }

    pub fn piecewise_constant(pc: PiecewiseConstant) -> Self {
        let n = pc.n;
        Self::from_factors(n, vec![Factor::PiecewiseConstant(pc)]).expect("validated")
    }

    pub fn builtin(b: Builtin) -> Result<Self> {
        let n = b.block_size();
        Self::from_factors(n, vec![Factor::Builtin(b)])
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn jump_set(&self) -> &[UnitPoint] {
        &self.jump_set
    }

    pub fn is_jump_point(&self, theta: f64) -> bool {
        let p = UnitPoint::from_theta(theta);
        self.jump_set.iter().any(|q| q.approx_eq(&p))
    }

    /// Ordered product: `self(t)·other(t)` pointwise.
    pub fn product(&self, other: &SymbolExpr) -> Result<SymbolExpr> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(self.n, factors)
    }

    /// Pointwise matrix inverse (lazy).
    pub fn inverse(&self) -> SymbolExpr {
        Self::from_factors(self.n, vec![Factor::Inverse(self.clone())]).expect("validated")
    }

    /// `t ↦ self(t^{-1})` (lazy).
    pub fn tilde(&self) -> SymbolExpr {
        Self::from_factors(self.n, vec![Factor::Tilde(self.clone())]).expect("validated")
    }

    /// The scalar symbol `t ↦ det self(t)`.
    pub fn det_symbol(&self) -> SymbolExpr {
        Self::from_factors(1, vec![Factor::Det(self.clone())]).expect("validated")
    }

    /// `S · self · S^{-1}` for a constant invertible matrix.
    pub fn conjugate(&self, s: &ComplexMatrix) -> Result<SymbolExpr> {
        let si = s.inverse()?;
        SymbolExpr::constant(s.clone())?.product(self)?.product(&SymbolExpr::constant(si)?)
    }

    /// Pointwise value at a continuity point; refuses jump points.
    pub fn eval(&self, t: UnitPoint) -> Result<ComplexMatrix> {
        if self.is_jump_point(t.theta()) {
            return Err(Error::JumpPointEvaluation { theta: t.theta() });
        }
        let mut acc = ComplexMatrix::identity(self.n);
        for f in &self.factors {
            acc = acc.mul(&f.value(t.theta())?);
        }
        Ok(acc)
    }

    /// One-sided limit `φ(τ±0)`, composed multiplicatively over factors.
    /// Equals `eval` at continuity points.
    pub fn eval_sided(&self, tau: UnitPoint, side: Side) -> Result<ComplexMatrix> {
        let mut acc = ComplexMatrix::identity(self.n);
        for f in &self.factors {
            acc = acc.mul(&f.sided(&tau, side)?);
        }
        Ok(acc)
    }

    /// Open arcs `(θ_k, θ_{k+1})` between consecutive jumps, counterclockwise,
    /// starting from the smallest jump angle. A continuous symbol yields the
    /// single closed arc `(θ₀, θ₀ + 2π)`.
    pub fn arcs(&self) -> Vec<(f64, f64)> {
        if self.jump_set.is_empty() {
            return vec![(0.0, TAU)];
        }
        let mut out = Vec::with_capacity(self.jump_set.len());
        for (i, p) in self.jump_set.iter().enumerate() {
            let next = &self.jump_set[(i + 1) % self.jump_set.len()];
            let a = p.theta();
            let mut b = next.theta();
            if b <= a + ANGLE_TOL {
                b += TAU;
            }
            out.push((a, b));
        }
        out
    }

    /// `m` interior sample angles per arc, avoiding jump points.
    pub fn sample_angles(&self, per_arc: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (a, b) in self.arcs() {
            let len = b - a;
            for i in 0..per_arc {
                out.push(wrap_angle(a + len * (i as f64 + 0.5) / per_arc as f64));
            }
        }
        out
    }
}
