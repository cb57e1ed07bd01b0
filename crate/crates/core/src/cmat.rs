//! Dense complex matrices with row-major storage, plus a pivoted LU.
//!
//! Everything downstream (symbol values, Toeplitz sections, matrix functions)
//! is built on this type. Sizes range from tiny `N×N` blocks (`N ≤ 4` at desk
//! scale) up to `nN×nN` Toeplitz sections with `nN` around two thousand, so
//! the LU keeps its inner loops on contiguous rows.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

/// An `n_rows × n_cols` complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex64>,
}

impl core::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.n_rows, self.n_cols)?;
        for i in 0..self.n_rows {
            write!(f, "  ")?;
            for j in 0..self.n_cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![Complex64::zero(); n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Build from row-major scalar data.
    pub fn from_rows(n_rows: usize, n_cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(data.len(), n_rows * n_cols));
        }
        Ok(Self { n_rows, n_cols, data })
    }

    /// 1×1 matrix holding a single scalar.
    pub fn scalar(z: Complex64) -> Self {
        Self { n_rows: 1, n_cols: 1, data: vec![z] }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    /// Writes `block` into the submatrix with top-left corner `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &ComplexMatrix) {
        debug_assert!(r0 + block.n_rows <= self.n_rows && c0 + block.n_cols <= self.n_cols);
        for i in 0..block.n_rows {
            let dst = (r0 + i) * self.n_cols + c0;
            self.data[dst..dst + block.n_cols].copy_from_slice(block.row(i));
        }
    }

    /// Extracts the `rows × cols` submatrix with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rows, cols);
        for i in 0..rows {
            let src = (r0 + i) * self.n_cols + c0;
            out.row_mut(i).copy_from_slice(&self.data[src..src + cols]);
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> ComplexMatrix {
        let data = self.data.iter().map(|z| z.conj()).collect();
        Self { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        let data = self.data.iter().map(|z| z * s).collect();
        Self { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }

    /// `self + s·I` on the diagonal.
    pub fn add_scaled_identity(&self, s: Complex64) -> ComplexMatrix {
        debug_assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.n_rows {
            out[(i, i)] += s;
        }
        out
    }

    /// Matrix product, cache-friendly `ikj` ordering.
    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.n_cols, other.n_rows);
        let mut out = ComplexMatrix::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let src = k * other.n_cols;
                let dst = i * out.n_cols;
                for j in 0..other.n_cols {
                    out.data[dst + j] += a * other.data[src + j];
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut best: f64 = 0.0;
        for j in 0..self.n_cols {
            let mut s = 0.0;
            for i in 0..self.n_rows {
                s += self[(i, j)].norm();
            }
            best = best.max(s);
        }
        best
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.n_rows).map(|i| self[(i, i)]).sum()
    }

    /// Determinant via pivoted LU. Prefer [`LuFactors::log_det`] for large sizes.
    pub fn det(&self) -> Result<Complex64> {
        Ok(LuFactors::new(self)?.det())
    }

    /// Inverse via pivoted LU; errors with `SingularValue` at `theta = NaN`
    /// context-free (callers attach location information).
    pub fn inverse(&self) -> Result<ComplexMatrix> {
        let lu = LuFactors::new(self)?;
        if lu.is_singular() {
            return Err(Error::SingularValue { theta: f64::NAN });
        }
        lu.inverse()
    }

    /// Solves `self · X = rhs` for a matrix right-hand side.
    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        let lu = LuFactors::new(self)?;
        if lu.is_singular() {
            return Err(Error::SingularValue { theta: f64::NAN });
        }
        Ok(lu.solve(rhs))
    }
}

impl core::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n_cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Pivoted LU factorization `P·A = L·U`.
pub struct LuFactors {
    lu: ComplexMatrix,
    piv: Vec<usize>,
    /// Permutation parity, `+1` or `-1`.
    sign: i32,
    /// Largest entry of the input, used for singularity thresholds.
    scale: f64,
}

impl LuFactors {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(a.n_rows, a.n_cols));
        }
        let n = a.n_rows;
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        let mut sign = 1;
        let scale = a.max_norm();
        for k in 0..n {
            // partial pivoting on column k
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv.push(p);
            if p != k {
                sign = -sign;
                let (lo, hi) = lu.data.split_at_mut(p * n);
                lo[k * n..k * n + n].swap_with_slice(&mut hi[..n]);
            }
            let pivot = lu[(k, k)];
            if pivot.is_zero() {
                continue; // exactly singular; recorded by the zero pivot
            }
            let inv_pivot = pivot.finv();
            for i in k + 1..n {
                let m = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = m;
                if m.is_zero() {
                    continue;
                }
                let (row_k, row_i) = {
                    let (lo, hi) = lu.data.split_at_mut(i * n);
                    (&lo[k * n..k * n + n], &mut hi[..n])
                };
                for j in k + 1..n {
                    row_i[j] -= m * row_k[j];
                }
            }
        }
        Ok(Self { lu, piv, sign, scale })
    }

    pub fn n(&self) -> usize {
        self.lu.n_rows
    }

    pub fn smallest_pivot(&self) -> f64 {
        (0..self.n()).fold(f64::INFINITY, |m, i| m.min(self.lu[(i, i)].norm()))
    }

    /// Singularity test relative to the input scale.
    pub fn is_singular(&self) -> bool {
        let n = self.n();
        self.smallest_pivot() <= 1e-14 * self.scale.max(1e-300) * n as f64
    }

    pub fn det(&self) -> Complex64 {
        let mut d = Complex64::new(self.sign as f64, 0.0);
        for i in 0..self.n() {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// A logarithm of the determinant (imaginary part is a sum of principal
    /// args, not reduced mod 2π). `exp(log_det)` equals the determinant even
    /// when the determinant itself overflows `f64`.
    pub fn log_det(&self) -> Complex64 {
        let mut log = Complex64::zero();
        for i in 0..self.n() {
            log += self.lu[(i, i)].ln();
        }
        if self.sign < 0 {
            log += Complex64::new(0.0, core::f64::consts::PI);
        }
        log
    }

    /// Solves `A·X = rhs` (forward/back substitution over matrix columns).
    pub fn solve(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n();
        debug_assert_eq!(rhs.n_rows, n);
        let m = rhs.n_cols;
        let mut x = rhs.clone();
        // apply permutation
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                for j in 0..m {
                    let t = x[(k, j)];
                    x[(k, j)] = x[(p, j)];
                    x[(p, j)] = t;
                }
            }
        }
        // forward substitution with unit lower factor
        for i in 1..n {
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l.is_zero() {
                    continue;
                }
                for j in 0..m {
                    let t = l * x[(k, j)];
                    x[(i, j)] -= t;
                }
            }
        }
        // back substitution
        for i in (0..n).rev() {
            let inv = self.lu[(i, i)].finv();
            for j in 0..m {
                let mut acc = x[(i, j)];
                for k in i + 1..n {
                    acc -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc * inv;
            }
        }
        x
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        Ok(self.solve(&ComplexMatrix::identity(self.n())))
    }
}
