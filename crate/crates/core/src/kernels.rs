//! Parametrized Helmholtz kernels.
//!
//! The curve-level functions take parameter values; the `*_at` variants take
//! precomputed points and scaled normals and are what the assembly loops use.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{ParametricCurve, Vec2};
use crate::scalar::{cplx, lit, Real};
use crate::specfun::{hankel1_0, hankel1_01, hankel1_1};

/// Wavenumber of the exterior problem.
///
/// Whether `k^2` is an interior Neumann eigenvalue of some curve is not
/// checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveContext<T> {
    k: T,
}

impl<T: Real> WaveContext<T> {
    pub fn new(k: T) -> Result<Self> {
        if k > T::zero() && k.is_finite() {
            Ok(Self { k })
        } else {
            Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")))
        }
    }

    pub fn k(&self) -> T {
        self.k
    }
}

fn distance<T: Real>(a: Vec2<T>, b: Vec2<T>) -> Result<(Vec2<T>, T)> {
    let d = a - b;
    let r = d.norm();
    // parameters differing by a period map to points that agree up to rounding
    let tiny = T::epsilon() * lit(16.0) * (T::one() + a.norm().max(b.norm()));
    if r > tiny && r.is_finite() {
        Ok((d, r))
    } else {
        Err(Error::Domain(format!("coincident points ({}, {}) in kernel evaluation", a.x, a.y)))
    }
}

/// `(i/4) H0(k|x - y|)`.
#[inline]
pub fn v1_at<T: Real>(x: Vec2<T>, y: Vec2<T>, k: T) -> Result<Complex<T>> {
    let (_, r) = distance(x, y)?;
    Ok(hankel1_0(k * r)? * cplx(T::zero(), lit(0.25)))
}

/// `-(i k^2/4) H0(k|x - y|) (n_x . n_y)`.
#[inline]
pub fn v2_at<T: Real>(x: Vec2<T>, nx: Vec2<T>, y: Vec2<T>, ny: Vec2<T>, k: T) -> Result<Complex<T>> {
    let (_, r) = distance(x, y)?;
    let c = nx.dot(ny);
    if c == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    Ok(hankel1_0(k * r)? * cplx(T::zero(), -k * k * lit(0.25) * c))
}

/// `(ik/4) H1(k|z - y|) ((z - y) . n) / |z - y|`.
#[inline]
pub fn dlp_at<T: Real>(z: Vec2<T>, y: Vec2<T>, ny: Vec2<T>, k: T) -> Result<Complex<T>> {
    let (d, r) = distance(z, y)?;
    let c = d.dot(ny);
    if c == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    Ok(hankel1_1(k * r)? * cplx(T::zero(), k * lit(0.25) * c / r))
}

/// `V1(s, t)` between observation curve `p` and source curve `q`.
pub fn v1<T: Real>(p: &ParametricCurve<T>, q: &ParametricCurve<T>, s: T, t: T, k: T) -> Result<Complex<T>> {
    v1_at(p.point(s), q.point(t), k)
}

/// `V2(s, t)` between observation curve `p` and source curve `q`.
pub fn v2<T: Real>(p: &ParametricCurve<T>, q: &ParametricCurve<T>, s: T, t: T, k: T) -> Result<Complex<T>> {
    let (x, nx) = p.frame(s);
    let (y, ny) = q.frame(t);
    v2_at(x, nx, y, ny, k)
}

/// Double-layer kernel at an off-curve point `z`, source at `x_q(t)`.
///
/// Points closer than `1e-12` times the curve diameter count as on the curve.
pub fn dlp_kernel<T: Real>(z: Vec2<T>, q: &ParametricCurve<T>, t: T, k: T) -> Result<Complex<T>> {
    let (y, ny) = q.frame(t);
    if (z - y).norm() <= lit::<T>(1e-12) * q.diameter(64) {
        return Err(Error::Domain(format!("evaluation point ({}, {}) lies on the curve", z.x, z.y)));
    }
    dlp_at(z, y, ny, k)
}

/// Adjoint double-layer kernel; the normal is taken at the observation
/// point `x_p(s)`:
/// `(ik/4) H1(kr) ((x_p(s) - x_q(t)) . n_p(s)) / r`.
pub fn adjoint_dlp_kernel<T: Real>(
    p: &ParametricCurve<T>,
    s: T,
    q: &ParametricCurve<T>,
    t: T,
    k: T,
) -> Result<Complex<T>> {
    let (x, nx) = p.frame(s);
    adjoint_dlp_at(x, nx, q.point(t), k)
}

#[inline]
pub fn adjoint_dlp_at<T: Real>(x: Vec2<T>, nx: Vec2<T>, y: Vec2<T>, k: T) -> Result<Complex<T>> {
    // Same expression as the double-layer kernel with the roles of the
    // normals exchanged.
    dlp_at(x, y, nx, k)
}

/// Exact radiating field `U(z) = H0(k|z - z0|)`.
pub fn point_source<T: Real>(z: Vec2<T>, z0: Vec2<T>, k: T) -> Result<Complex<T>> {
    let (_, r) = distance(z, z0)?;
    hankel1_0(k * r)
}

/// `∇U(z) = -k H1(kr) (z - z0)/r` as a pair of complex components.
pub fn point_source_gradient<T: Real>(z: Vec2<T>, z0: Vec2<T>, k: T) -> Result<(Complex<T>, Complex<T>)> {
    let (d, r) = distance(z, z0)?;
    let f = hankel1_1(k * r)? * (-k / r);
    Ok((f * d.x, f * d.y))
}

/// Scaled Neumann trace `∇U(x_p(t)) . n_p(t)`.
pub fn point_source_neumann<T: Real>(p: &ParametricCurve<T>, t: T, z0: Vec2<T>, k: T) -> Result<Complex<T>> {
    let (x, n) = p.frame(t);
    point_source_neumann_at(x, n, z0, k)
}

#[inline]
pub fn point_source_neumann_at<T: Real>(x: Vec2<T>, n: Vec2<T>, z0: Vec2<T>, k: T) -> Result<Complex<T>> {
    let (d, r) = distance(x, z0)?;
    Ok(hankel1_1(k * r)? * (-k * d.dot(n) / r))
}

/// `U` and `∇U . n` together, sharing one Bessel evaluation.
pub fn point_source_with_neumann<T: Real>(
    x: Vec2<T>,
    n: Vec2<T>,
    z0: Vec2<T>,
    k: T,
) -> Result<(Complex<T>, Complex<T>)> {
    let (d, r) = distance(x, z0)?;
    let (h0, h1) = hankel1_01(k * r)?;
    Ok((h0, h1 * (-k * d.dot(n) / r)))
}
