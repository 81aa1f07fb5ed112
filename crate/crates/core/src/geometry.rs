//! Smooth closed 1-periodic plane curves and scatterer configurations.
//!
//! Curves are parametrized counterclockwise over one unit of the parameter
//! `t`, so the scaled normal `n(t) = (x2'(t), -x1'(t))` points outward and
//! has length `|x'(t)|`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    /// Clockwise quarter turn, `(y, -x)`.
    #[inline]
    pub fn rotate_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

type CurveFn<T> = Arc<dyn Fn(T) -> Vec2<T> + Send + Sync>;

/// How a curve is described.
#[derive(Clone)]
pub enum CurveShape<T> {
    Ellipse { center: Vec2<T>, a: T, b: T },
    /// User supplied position and derivative; both must be 1-periodic.
    Custom { position: CurveFn<T>, derivative: CurveFn<T> },
}

impl<T: fmt::Debug> fmt::Debug for CurveShape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveShape::Ellipse { center, a, b } => f
                .debug_struct("Ellipse")
                .field("center", center)
                .field("a", a)
                .field("b", b)
                .finish(),
            CurveShape::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// A smooth closed curve `t -> x(t)` with period 1.
#[derive(Debug, Clone)]
pub struct ParametricCurve<T> {
    shape: CurveShape<T>,
}

impl<T: Real> ParametricCurve<T> {
    /// `x(t) = center + (a cos 2πt, b sin 2πt)`.
    pub fn ellipse(center: Vec2<T>, a: T, b: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero()) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ellipse semiaxes must be positive, got a={a}, b={b}"
            )));
        }
        Ok(Self { shape: CurveShape::Ellipse { center, a, b } })
    }

    pub fn circle(center: Vec2<T>, radius: T) -> Result<Self> {
        Self::ellipse(center, radius, radius)
    }

    /// Curve from analytic position and derivative closures.
    ///
    /// The closures must describe a regular, simple, 1-periodic,
    /// counterclockwise curve; orientation is not checked.
    pub fn custom<P, D>(position: P, derivative: D) -> Self
    where
        P: Fn(T) -> Vec2<T> + Send + Sync + 'static,
        D: Fn(T) -> Vec2<T> + Send + Sync + 'static,
    {
        Self {
            shape: CurveShape::Custom { position: Arc::new(position), derivative: Arc::new(derivative) },
        }
    }

    pub fn shape(&self) -> &CurveShape<T> {
        &self.shape
    }

    #[inline]
    pub fn point(&self, t: T) -> Vec2<T> {
        match &self.shape {
            CurveShape::Ellipse { center, a, b } => {
                let (s, c) = angle(t).sin_cos();
                Vec2::new(center.x + *a * c, center.y + *b * s)
            }
            CurveShape::Custom { position, .. } => position(t),
        }
    }

    #[inline]
    pub fn derivative(&self, t: T) -> Vec2<T> {
        match &self.shape {
            CurveShape::Ellipse { a, b, .. } => {
                let (s, c) = angle(t).sin_cos();
                let w = T::TAU();
                Vec2::new(-w * *a * s, w * *b * c)
            }
            CurveShape::Custom { derivative, .. } => derivative(t),
        }
    }

    /// Outward normal scaled by the parametric speed, `(x2', -x1')`.
    #[inline]
    pub fn scaled_normal(&self, t: T) -> Vec2<T> {
        self.derivative(t).rotate_cw()
    }

    /// Position and scaled normal in one call.
    #[inline]
    pub fn frame(&self, t: T) -> (Vec2<T>, Vec2<T>) {
        (self.point(t), self.scaled_normal(t))
    }

    /// Rough diameter from `samples` equispaced points.
    pub fn diameter(&self, samples: usize) -> T {
        let pts: Vec<_> = (0..samples).map(|i| self.point(from_usize::<T>(i) / from_usize(samples))).collect();
        let mut d = T::zero();
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                d = d.max((*p - *q).norm());
            }
        }
        d
    }
}

/// `2πt` with the integer part of `t` removed first, so that `t` and `t+1`
/// give bitwise identical angles for moderate `t`.
#[inline]
fn angle<T: Real>(t: T) -> T {
    let r = t - t.floor();
    T::TAU() * r
}

/// Reduces a staggering parameter to `(-1/2, 1/2]`.
///
/// The result is snapped to a lattice of spacing `2^-40`, so that `eps` and
/// `eps + m` give bitwise identical grids despite the rounding in `eps + m`.
pub fn normalize_eps<T: Real>(eps: T) -> Result<T> {
    if !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("staggering parameter must be finite, got {eps}")));
    }
    let half = lit::<T>(0.5);
    // r in (-1/2, 1/2]
    let r = eps - (eps - half).ceil();
    let lattice = lit::<T>(1_099_511_627_776.0);
    let r = (r * lattice).round() / lattice;
    if r == T::zero() || (r.abs() <= T::epsilon() * lit(8.0) * (T::one() + eps.abs())) {
        return Err(Error::InvalidArgument(format!(
            "integer staggering parameter {eps} leads to evaluations of the logarithmic kernels in their diagonal singularity"
        )));
    }
    Ok(r)
}

/// A collection of disjoint curves together with the discretization data.
#[derive(Debug, Clone)]
pub struct ScattererConfig<T> {
    curves: Vec<ParametricCurve<T>>,
    wavenumber: T,
    nodes: Vec<usize>,
    eps: T,
}

impl<T: Real> ScattererConfig<T> {
    /// Validates the inputs; `eps` is stored reduced to `(-1/2, 1/2]`.
    pub fn new(curves: Vec<ParametricCurve<T>>, wavenumber: T, nodes: Vec<usize>, eps: T) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidArgument("at least one curve is required".into()));
        }
        if nodes.len() != curves.len() {
            return Err(Error::InvalidArgument(format!(
                "{} node counts given for {} curves",
                nodes.len(),
                curves.len()
            )));
        }
        if !(wavenumber > T::zero()) || !wavenumber.is_finite() {
            return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {wavenumber}")));
        }
        if let Some(&n) = nodes.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidArgument(format!("at least 4 nodes per curve are required, got {n}")));
        }
        let eps = normalize_eps(eps)?;
        let cfg = Self { curves, wavenumber, nodes, eps };
        cfg.check_disjoint()?;
        Ok(cfg)
    }

    /// Same curves and wavenumber, every curve discretized with `n` nodes.
    pub fn uniform(curves: Vec<ParametricCurve<T>>, wavenumber: T, n: usize, eps: T) -> Result<Self> {
        let nodes = vec![n; curves.len()];
        Self::new(curves, wavenumber, nodes, eps)
    }

    pub fn curves(&self) -> &[ParametricCurve<T>] {
        &self.curves
    }

    pub fn wavenumber(&self) -> T {
        self.wavenumber
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn total_unknowns(&self) -> usize {
        self.nodes.iter().sum()
    }

    /// Copy with a different node count on every curve.
    pub fn with_nodes(&self, n: usize) -> Result<Self> {
        Self::new(self.curves.clone(), self.wavenumber, vec![n; self.curves.len()], self.eps)
    }

    pub fn with_eps(&self, eps: T) -> Result<Self> {
        Self::new(self.curves.clone(), self.wavenumber, self.nodes.clone(), eps)
    }

    /// Minimum node distance over all pairs of distinct curves must exceed
    /// `10 * machine epsilon * diameter`.
    fn check_disjoint(&self) -> Result<()> {
        let samples: Vec<Vec<Vec2<T>>> = self
            .curves
            .iter()
            .zip(&self.nodes)
            .map(|(c, &n)| {
                let h = T::one() / from_usize(n);
                // both node families used by the discretization
                (0..2 * n).map(|i| c.point(from_usize::<T>(i) * h * lit(0.5))).collect()
            })
            .collect();
        let diam = samples
            .iter()
            .flatten()
            .fold((T::zero(), None::<Vec2<T>>), |(d, first), p| match first {
                None => (d, Some(*p)),
                Some(f) => (d.max((*p - f).norm()), Some(f)),
            })
            .0
            * lit(2.0);
        let tol = lit::<T>(10.0) * T::epsilon() * diam.max(T::one());
        for p in 0..samples.len() {
            for q in p + 1..samples.len() {
                let mut dmin = T::infinity();
                for a in &samples[p] {
                    for b in &samples[q] {
                        dmin = dmin.min((*a - *b).norm());
                    }
                }
                if !(dmin > tol) {
                    return Err(Error::InvalidArgument(format!(
                        "curves {p} and {q} are not disjoint (minimum node distance {dmin})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn origin() -> Vec2<f64> {
        Vec2::new(0.0, 0.0)
    }

    #[test]
    fn ellipse_values() {
        let e = ParametricCurve::ellipse(origin(), 1.0, 2.0).unwrap();
        let x = e.point(0.0);
        assert!((x.x - 1.0).abs() < 1e-15 && x.y.abs() < 1e-15);
        let n = e.scaled_normal(0.0);
        assert!((n.x - 4.0 * PI).abs() < 1e-13 && n.y.abs() < 1e-13);

        let e = ParametricCurve::<f64>::ellipse(Vec2::new(4.0, 5.0), 2.0, 1.0).unwrap();
        let x = e.point(0.25);
        assert!((x.x - 4.0).abs() < 1e-14 && (x.y - 6.0).abs() < 1e-14);
        let d = e.derivative(0.25);
        assert!((d.x + 4.0 * PI).abs() < 1e-13 && d.y.abs() < 1e-13);
    }

    #[test]
    fn ellipse_is_periodic() {
        let e = ParametricCurve::ellipse(Vec2::new(0.3, -1.0), 1.5, 0.7).unwrap();
        for &t in &[0.0, 0.13, 0.5, 0.77, -0.31] {
            let close = |a: Vec2<f64>, b: Vec2<f64>| (a - b).norm() <= 1e-14 * (1.0 + a.norm());
            assert!(close(e.point(t), e.point(t + 1.0)));
            assert!(close(e.derivative(t), e.derivative(t + 1.0)));
            assert!(close(e.scaled_normal(t), e.scaled_normal(t + 1.0)));
        }
    }

    #[test]
    fn nonpositive_semiaxis_rejected() {
        assert!(matches!(ParametricCurve::ellipse(origin(), 0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(ParametricCurve::ellipse(origin(), 1.0, -2.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn circle_normals() {
        let c = ParametricCurve::circle(origin(), 1.0).unwrap();
        let n0 = c.scaled_normal(0.0);
        assert!((n0.x - 2.0 * PI).abs() < 1e-13 && n0.y.abs() < 1e-13);
        let n1 = c.scaled_normal(0.5);
        assert!((n1.x + 2.0 * PI).abs() < 1e-13 && n1.y.abs() < 1e-12);
    }

    #[test]
    fn ellipse_normal_at_eighth_turn() {
        let e = ParametricCurve::ellipse(origin(), 1.0, 2.0).unwrap();
        let n = e.scaled_normal(0.125);
        // 2π(2 cos π/4, sin π/4), evaluated independently
        let want = (2.0 * PI * 2.0 * (PI / 4.0).cos(), 2.0 * PI * (PI / 4.0).sin());
        assert!((n.x - 8.885_765_876_316_732).abs() < 1e-12);
        assert!((n.y - 4.442_882_938_158_366).abs() < 1e-12);
        assert!((n.x - want.0).abs() < 1e-12 && (n.y - want.1).abs() < 1e-12);
    }

    #[test]
    fn eps_normalization() {
        let a: f64 = normalize_eps(1.0 / 6.0).unwrap();
        let b: f64 = normalize_eps(7.0 / 6.0).unwrap();
        assert_eq!(a, b);
        assert!((a - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(normalize_eps(5.0_f64 / 6.0).unwrap(), -a);
        assert_eq!(normalize_eps(0.5).unwrap(), 0.5);
        assert_eq!(normalize_eps(-0.5).unwrap(), 0.5);
        assert!(normalize_eps(0.0).is_err());
        assert!(normalize_eps(-3.0).is_err());
        assert!(normalize_eps(f64::NAN).is_err());
    }

    #[test]
    fn overlapping_curves_rejected() {
        let c1 = ParametricCurve::circle(origin(), 1.0).unwrap();
        let c2 = ParametricCurve::circle(origin(), 1.0).unwrap();
        let err = ScattererConfig::uniform(vec![c1.clone(), c2], 1.0, 16, 1.0 / 6.0);
        assert!(err.is_err());
        let c3 = ParametricCurve::circle(Vec2::new(5.0, 0.0), 1.0).unwrap();
        assert!(ScattererConfig::uniform(vec![c1, c3], 1.0, 16, 1.0 / 6.0).is_ok());
    }

    #[test]
    fn config_validation() {
        let c = ParametricCurve::circle(origin(), 1.0).unwrap();
        assert!(ScattererConfig::uniform(vec![c.clone()], 0.0, 16, 0.2).is_err());
        assert!(ScattererConfig::uniform(vec![c.clone()], 1.0, 3, 0.2).is_err());
        assert!(ScattererConfig::uniform(vec![c.clone()], 1.0, 16, 2.0).is_err());
        assert!(ScattererConfig::new(vec![c.clone()], 1.0, vec![8, 8], 0.2).is_err());
        let cfg = ScattererConfig::uniform(vec![c], 1.0, 16, 1.2).unwrap();
        assert!((cfg.eps() - 0.2).abs() < 1e-12);
    }
}
