//! Block Toeplitz determinants for piecewise continuous matrix symbols.
//!
//! This crate computes finite sections `T_n(φ)` of block Toeplitz operators
//! generated by `N×N` matrix-valued symbols on the unit circle, together with
//! the ingredients of their large-`n` determinant asymptotics
//!
//! ```text
//! det T_n(φ) ~ G^n · n^Ω · E,    n → ∞,
//! ```
//!
//! for symbols with finitely many jump discontinuities:
//!
//! * [`symbol`] — symbol expressions, exact one-sided limits, builtin symbols;
//! * [`fourier`] — matrix Fourier coefficients (closed form and quadrature);
//! * [`jumps`] — jump ratios, branch-controlled matrix logarithms, regularity;
//! * [`winding`] — winding numbers and the Fredholm index, two routes;
//! * [`factorization`] — canonical representation `φ = φ₀·u_{B₁,τ₁}⋯u_{B_R,τ_R}`;
//! * [`constants`] — log-Gamma, the Barnes G-function, and the constants `G`, `Ω`;
//! * [`engine`] — Toeplitz/Hankel sections, log-determinants, operator
//!   determinant estimates, and the asymptotic verification sweep.
//!
//! The crate is `no_std`-compatible (it requires `alloc`); all IO and file
//! formats live in the companion CLI crate.
//!
//! ```
//! use btoep_core::engine::{geometric_n_grid, verify_asymptotics, VerifyOptions};
//! use btoep_core::{Complex64, ComplexMatrix, SymbolExpr, UnitPoint};
//!
//! // u_{0.3,1}: a single scalar jump at t = 1
//! let sym = SymbolExpr::jump(
//!     UnitPoint::from_theta(0.0),
//!     ComplexMatrix::scalar(Complex64::new(0.3, 0.0)),
//! )?;
//! let opts = VerifyOptions { opdet: false, ..VerifyOptions::default() };
//! let report = verify_asymptotics(&sym, &geometric_n_grid(16, 64), &opts)?;
//! assert_eq!(report.index, 0);
//! assert!((report.constants.omega.re + 0.09).abs() < 1e-12);
//! # Ok::<(), btoep_core::Error>(())
//! ```

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cmat;
pub mod constants;
pub mod engine;
pub mod error;
pub mod factorization;
pub mod fourier;
pub mod jumps;
pub mod legendre;
pub mod matfun;
pub mod schur;
pub mod symbol;
pub mod winding;

pub use cmat::ComplexMatrix;
pub use constants::AsymptoticConstants;
pub use engine::{AsymptoticReport, ToeplitzSection, VerifyOptions};
pub use error::{Error, RegularityFailure, Result};
pub use factorization::Factorization;
pub use fourier::FourierTable;
pub use jumps::JumpAnalysis;
pub use symbol::{Builtin, Factor, Side, SymbolExpr, UnitPoint};

pub use num_complex::Complex64;
