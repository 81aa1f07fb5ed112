//! Discrete double-layer potential and error metrics.

use num_complex::Complex;
use rayon::prelude::*;

use crate::assembly::{assemble_system, Formulation, StaggeredGrid};
use crate::dense_solver::LuFactors;
use crate::error::{Error, Result};
use crate::geometry::{ScattererConfig, Vec2};
use crate::kernels::dlp_at;
use crate::scalar::{lit, Real};

/// Nodal values `φ_j` at `t_j` on every curve.
#[derive(Debug, Clone)]
pub struct DensitySolution<T> {
    config: ScattererConfig<T>,
    grids: Vec<StaggeredGrid<T>>,
    values: Vec<Vec<Complex<T>>>,
    growth: T,
}

impl<T: Real> DensitySolution<T> {
    /// Splits a global solution vector into per-curve densities.
    pub fn new(config: ScattererConfig<T>, grids: Vec<StaggeredGrid<T>>, global: &[Complex<T>]) -> Result<Self> {
        if grids.len() != config.curves().len() {
            return Err(Error::Dimension(format!("{} grids for {} curves", grids.len(), config.curves().len())));
        }
        if global.len() != grids.iter().map(|g| g.n()).sum::<usize>() {
            return Err(Error::Dimension(format!("solution vector has length {}", global.len())));
        }
        let mut rest = global;
        let values = grids
            .iter()
            .map(|g| {
                let (head, tail) = rest.split_at(g.n());
                rest = tail;
                head.to_vec()
            })
            .collect();
        Ok(Self { config, grids, values, growth: T::one() })
    }

    /// Assembles and solves the system of `config` for `formulation`.
    pub fn solve(config: &ScattererConfig<T>, formulation: Formulation<T>) -> Result<Self> {
        let sys = assemble_system(config, formulation)?;
        let lu = LuFactors::new(&sys.matrix()?)?;
        let x = lu.solve(&sys.rhs)?;
        let mut sol = Self::new(config.clone(), sys.grids, &x)?;
        sol.growth = lu.growth();
        Ok(sol)
    }

    pub fn config(&self) -> &ScattererConfig<T> {
        &self.config
    }

    pub fn grids(&self) -> &[StaggeredGrid<T>] {
        &self.grids
    }

    pub fn values(&self) -> &[Vec<Complex<T>>] {
        &self.values
    }

    /// Pivot growth of the factorization that produced the solution.
    pub fn growth(&self) -> T {
        self.growth
    }

    /// Copy with the same grids and the density replaced by `f(curve, j, φ_j)`.
    pub fn map(&self, f: impl Fn(usize, usize, Complex<T>) -> Complex<T>) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(p, v)| v.iter().enumerate().map(|(j, &x)| f(p, j, x)).collect())
            .collect();
        Self { config: self.config.clone(), grids: self.grids.clone(), values, growth: self.growth }
    }
}

/// Potential value at one observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub point: Vec2<T>,
    pub value: Complex<T>,
    /// Set when the point lies within `5 h max|x'|` of a curve, where the
    /// midpoint rule loses accuracy.
    pub near_boundary: bool,
}

/// `U_h(z) = Σ_curves h Σ_j (ik/4) H1(k|z - x_j|) ((z - x_j) . n_j / |z - x_j|) φ_j`.
pub fn evaluate_potential<T: Real>(sol: &DensitySolution<T>, z: Vec2<T>) -> Result<Complex<T>> {
    let k = sol.config.wavenumber();
    let mut total = Complex::new(T::zero(), T::zero());
    for ((curve, grid), phi) in sol.config.curves().iter().zip(&sol.grids).zip(&sol.values) {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, &f) in phi.iter().enumerate() {
            let (y, ny) = curve.frame(grid.t(j));
            let kern = dlp_at(z, y, ny, k).map_err(|_| {
                Error::Domain(format!("observation point ({}, {}) lies on a curve", z.x, z.y))
            })?;
            acc += kern * f;
        }
        total += acc * grid.h();
    }
    Ok(total)
}

fn near_boundary<T: Real>(sol: &DensitySolution<T>, z: Vec2<T>) -> bool {
    sol.config.curves().iter().zip(&sol.grids).any(|(c, g)| {
        let mut speed = T::zero();
        let mut dist = T::infinity();
        for j in 0..g.n() {
            let t = g.t(j);
            speed = speed.max(c.derivative(t).norm());
            dist = dist.min((c.point(t) - z).norm());
        }
        dist < lit::<T>(5.0) * g.h() * speed
    })
}

/// Potential at several points.
pub fn evaluate_field<T: Real>(sol: &DensitySolution<T>, points: &[Vec2<T>]) -> Result<Vec<FieldSample<T>>> {
    points
        .par_iter()
        .map(|&z| {
            Ok(FieldSample { point: z, value: evaluate_potential(sol, z)?, near_boundary: near_boundary(sol, z) })
        })
        .collect()
}

/// `U* = (4/3) U_{h/2} - (1/3) U_h` pointwise.
pub fn richardson<T: Real>(coarse: &[FieldSample<T>], fine: &[FieldSample<T>]) -> Result<Vec<FieldSample<T>>> {
    if coarse.len() != fine.len() || coarse.iter().zip(fine).any(|(a, b)| a.point != b.point) {
        return Err(Error::InvalidArgument("Richardson extrapolation needs samples at the same points".into()));
    }
    let (a, b) = (lit::<T>(4.0 / 3.0), lit::<T>(1.0 / 3.0));
    Ok(coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| FieldSample {
            point: c.point,
            value: f.value * a - c.value * b,
            near_boundary: c.near_boundary || f.near_boundary,
        })
        .collect())
}

/// `max_z |U(z) - U_h(z)|`.
pub fn observation_error<T: Real>(
    samples: &[FieldSample<T>],
    exact: impl Fn(Vec2<T>) -> Result<Complex<T>>,
) -> Result<T> {
    samples.iter().try_fold(T::zero(), |m, s| Ok(m.max((exact(s.point)? - s.value).norm())))
}

/// `max_{p,j} |φ_j - φ(t_j)|`; `exact(p, t)` is the exact trace on curve `p`.
pub fn boundary_error<T: Real>(sol: &DensitySolution<T>, exact: impl Fn(usize, T) -> Result<Complex<T>>) -> Result<T> {
    let mut worst = T::zero();
    for (p, (g, phi)) in sol.grids.iter().zip(&sol.values).enumerate() {
        for (j, &f) in phi.iter().enumerate() {
            worst = worst.max((f - exact(p, g.t(j))?).norm());
        }
    }
    Ok(worst)
}

/// `Σ_p h_p Σ_j φ_j v(p, t_j)`.
pub fn postprocess_functional<T: Real>(sol: &DensitySolution<T>, v: impl Fn(usize, T) -> Complex<T>) -> Complex<T> {
    let mut total = Complex::new(T::zero(), T::zero());
    for (p, (g, phi)) in sol.grids.iter().zip(&sol.values).enumerate() {
        let s: Complex<T> = phi.iter().enumerate().map(|(j, &f)| f * v(p, g.t(j))).sum();
        total += s * g.h();
    }
    total
}
