//! Dense complex matrices, LU with partial pivoting and a 2-norm condition
//! number estimate.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Joins a rectangular grid of blocks; block rows must share a height
    /// and block columns a width.
    pub fn from_blocks(blocks: &[Vec<ComplexMatrix<T>>]) -> Result<Self> {
        let heights: Vec<usize> = blocks.iter().map(|r| r.first().map_or(0, |b| b.rows)).collect();
        let widths: Vec<usize> = blocks.first().map(|r| r.iter().map(|b| b.cols).collect()).unwrap_or_default();
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(Error::Dimension(format!("block row {bi} has {} blocks", row.len())));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(Error::Dimension(format!("block ({bi},{bj}) is {}x{}", b.rows, b.cols)));
                }
            }
        }
        let rows = heights.iter().sum();
        let cols = widths.iter().sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for b in row {
                for i in 0..b.rows {
                    out.row_mut(r0 + i)[c0..c0 + b.cols].copy_from_slice(b.row(i));
                }
                c0 += b.cols;
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * c).collect() }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!("matvec: {} columns, vector of length {}", self.cols, x.len())));
        }
        Ok(self.data.par_chunks(self.cols.max(1)).map(|row| dot(row, x)).collect())
    }

    /// `A^H x`.
    pub fn matvec_adjoint(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.rows {
            return Err(Error::Dimension(format!("adjoint matvec: {} rows, vector of length {}", self.rows, x.len())));
        }
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.cols];
        for (i, xi) in x.iter().enumerate() {
            axpy(&mut y, *xi, self.row(i), true);
        }
        Ok(y)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        if other.cols == 0 {
            return Ok(out);
        }
        out.data.par_chunks_mut(other.cols).enumerate().for_each(|(i, orow)| {
            for (l, a) in self.row(i).iter().enumerate() {
                axpy(orow, *a, other.row(l), false);
            }
        });
        Ok(out)
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let (mut re, mut im) = (T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re - x.im * y.im;
        im += x.re * y.im + x.im * y.re;
    }
    Complex::new(re, im)
}

/// `y += a * x` (or `a * conj(x)`).
#[inline]
fn axpy<T: Real>(y: &mut [Complex<T>], a: Complex<T>, x: &[Complex<T>], conj_x: bool) {
    if conj_x {
        for (yi, xi) in y.iter_mut().zip(x) {
            yi.re += a.re * xi.re + a.im * xi.im;
            yi.im += a.im * xi.re - a.re * xi.im;
        }
    } else {
        for (yi, xi) in y.iter_mut().zip(x) {
            yi.re += a.re * xi.re - a.im * xi.im;
            yi.im += a.re * xi.im + a.im * xi.re;
        }
    }
}

pub fn vec_norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

/// Packed `PA = LU` factors; `L` has a unit diagonal.
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: ComplexMatrix<T>,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    growth: T,
}

impl<T: Real> LuFactors<T> {
    /// Right-looking elimination with row pivoting on the largest modulus.
    pub fn new(a: &ComplexMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU needs a square matrix, got {}x{}", a.rows, a.cols)));
        }
        if a.data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let n = a.rows;
        let a_max = a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n).fold((k, T::zero()), |(bi, bv), i| {
                let v = lu[(i, k)].norm();
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
            if pmax == T::zero() {
                return Err(Error::SingularMatrix { column: k });
            }
            if p != k {
                perm.swap(p, k);
                let (top, bottom) = lu.data.split_at_mut(p * n);
                top[k * n..(k + 1) * n].swap_with_slice(&mut bottom[..n]);
            }
            let (head, tail) = lu.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let inv = Complex::new(T::one(), T::zero()) / pivot_row[k];
            tail.par_chunks_mut(n).for_each(|row| {
                let l = row[k] * inv;
                row[k] = l;
                if l.re != T::zero() || l.im != T::zero() {
                    axpy(&mut row[k + 1..], -l, &pivot_row[k + 1..], false);
                }
            });
        }
        let u_max = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).fold(T::zero(), |m, (i, j)| m.max(lu[(i, j)].norm()));
        let growth = if a_max > T::zero() { u_max / a_max } else { T::one() };
        Ok(Self { lu, perm, growth })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// `max|U| / max|A|`; large values signal loss of accuracy.
    pub fn growth(&self) -> T {
        self.growth
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn packed(&self) -> &ComplexMatrix<T> {
        &self.lu
    }

    fn check_len(&self, b: &[Complex<T>]) -> Result<()> {
        if b.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension(format!("right-hand side of length {} for a system of size {}", b.len(), self.dim())))
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(b)?;
        let n = self.dim();
        let mut x: Vec<Complex<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = dot(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check_len(b)?;
        let n = self.dim();
        // A^H = U^H L^H P, so solve U^H y = b, L^H z = y, x = P^T z.
        let mut y = b.to_vec();
        for i in 0..n {
            let row = self.lu.row(i);
            y[i] /= row[i].conj();
            let yi = y[i];
            axpy(&mut y[i + 1..], -yi, &row[i + 1..], true);
        }
        for i in (0..n).rev() {
            let yi = y[i];
            let row = self.lu.row(i);
            axpy(&mut y[..i], -yi, &row[..i], true);
        }
        let mut x = vec![Complex::new(T::zero(), T::zero()); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        Ok(x)
    }
}

/// Factors `a` and solves `a x = b`.
pub fn lu_solve<T: Real>(a: &ComplexMatrix<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    LuFactors::new(a)?.solve(b)
}

/// Result of [`cond2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondEstimate<T> {
    pub value: T,
    pub sigma_max: T,
    pub sigma_min: T,
    /// False when either iteration hit the iteration cap; `value` is then
    /// the best estimate available.
    pub converged: bool,
    pub iterations: usize,
}

pub const COND_TOL: f64 = 1e-6;
pub const COND_MAX_ITER: usize = 10_000;

/// Spectral condition number `σ_max / σ_min`.
///
/// Power iteration on `A^H A` gives `σ_max`, inverse iteration through the
/// LU factors gives `σ_min`. Iterations stop once two successive Rayleigh
/// quotients agree to `COND_TOL` relative.
pub fn cond2<T: Real>(a: &ComplexMatrix<T>) -> Result<CondEstimate<T>> {
    let lu = LuFactors::new(a)?;
    let n = a.rows;
    let (lmax, it1, ok1) = power_iteration(n, |v| a.matvec_adjoint(&a.matvec(v)?))?;
    let (lmin_inv, it2, ok2) = power_iteration(n, |v| lu.solve(&lu.solve_adjoint(v)?))?;
    let sigma_max = lmax.sqrt();
    let sigma_min = T::one() / lmin_inv.sqrt();
    Ok(CondEstimate {
        value: (sigma_max / sigma_min).max(T::one()),
        sigma_max,
        sigma_min,
        converged: ok1 && ok2,
        iterations: it1 + it2,
    })
}

/// Largest singular value by power iteration on `A^H A`; the flag reports
/// convergence to `COND_TOL`.
pub fn spectral_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<(T, bool)> {
    if a.rows == 0 || a.cols == 0 {
        return Ok((T::zero(), true));
    }
    if a.max_abs() == T::zero() {
        return Ok((T::zero(), true));
    }
    let (l, _, ok) = power_iteration(a.cols, |v| a.matvec_adjoint(&a.matvec(v)?))?;
    Ok((l.max(T::zero()).sqrt(), ok))
}

/// Dominant eigenvalue of a Hermitian positive semidefinite operator.
fn power_iteration<T: Real>(
    n: usize,
    mut apply: impl FnMut(&[Complex<T>]) -> Result<Vec<Complex<T>>>,
) -> Result<(T, usize, bool)> {
    let tol = lit::<T>(COND_TOL);
    let start = |perturb: bool| -> Vec<Complex<T>> {
        let mut v: Vec<Complex<T>> = (0..n)
            .map(|i| {
                let w = if perturb { lit::<T>(((i * 7919) % 101) as f64 / 101.0) } else { T::zero() };
                Complex::new(T::one() + w, w)
            })
            .collect();
        normalize(&mut v);
        v
    };
    let mut v = start(false);
    let mut prev = T::zero();
    let mut perturbed = false;
    for it in 1..=COND_MAX_ITER {
        let w = apply(&v)?;
        let rq = dot_conj(&v, &w).re;
        let wn = vec_norm(&w);
        if !(wn > T::zero()) || !wn.is_finite() {
            // start vector in the null space of the operator
            if !perturbed {
                perturbed = true;
                v = start(true);
                continue;
            }
            return Err(Error::SingularMatrix { column: 0 });
        }
        if it > 1 && (rq - prev).abs() <= tol * rq.abs() {
            return Ok((rq, it, true));
        }
        prev = rq;
        v = w.into_iter().map(|z| z / wn).collect();
    }
    Ok((prev, COND_MAX_ITER, false))
}

fn dot_conj<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * y)
}

fn normalize<T: Real>(v: &mut [Complex<T>]) {
    let n = vec_norm(v);
    for z in v.iter_mut() {
        *z /= n;
    }
}
