//! Staggered grids and the dense Nyström system for the hypersingular
//! operator.
//!
//! On each curve the unknown `φ_j` lives at `t_j = j h`. Row `i` tests the
//! equation on the cell `(s_{i+ε}, s_{i+1+ε})`, which gives the entry
//!
//! ```text
//! W_ij = V1(s_{i+1+ε}, s_{j+1}) - V1(s_{i+ε}, s_{j+1})
//!      - V1(s_{i+1+ε}, s_j)     + V1(s_{i+ε}, s_j)
//!      + h_p h_q V2(t_{i+ε}, t_j).
//! ```
//!
//! The four `V1` terms are second differences of one table
//! `G_ij = V1(s_{i+ε}, s_j)`, so each kernel is evaluated once per node pair.

use num_complex::Complex;
use rayon::prelude::*;

use crate::dense_solver::ComplexMatrix;
use crate::error::{Error, Result};
use crate::geometry::{normalize_eps, ParametricCurve, ScattererConfig, Vec2};
use crate::kernels::{adjoint_dlp_at, point_source_neumann_at, v1_at, v2_at};
use crate::scalar::{from_usize, lit, Real};
use crate::specfun::hankel1_0;

/// Uniform grid of `N` cells on `[0, 1)` and its `εh` shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredGrid<T> {
    n: usize,
    h: T,
    eps: T,
}

/// Builds the grid; `eps` is reduced to `(-1/2, 1/2]` and must not be an
/// integer.
pub fn build_grid<T: Real>(n: usize, eps: T) -> Result<StaggeredGrid<T>> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("at least 4 nodes are required, got {n}")));
    }
    let eps = normalize_eps(eps)?;
    Ok(StaggeredGrid { n, h: T::one() / from_usize(n), eps })
}

impl<T: Real> StaggeredGrid<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    /// `s_i = (i - 1/2) h`.
    pub fn s(&self, i: usize) -> T {
        (from_usize::<T>(i) - lit(0.5)) * self.h
    }

    /// `t_i = i h`.
    pub fn t(&self, i: usize) -> T {
        from_usize::<T>(i) * self.h
    }

    /// `s_{i+ε} = (i + ε - 1/2) h`.
    pub fn s_eps(&self, i: usize) -> T {
        (from_usize::<T>(i) + self.eps - lit(0.5)) * self.h
    }

    /// `t_{i+ε} = (i + ε) h`.
    pub fn t_eps(&self, i: usize) -> T {
        (from_usize::<T>(i) + self.eps) * self.h
    }

    pub fn t_nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.t(i)).collect()
    }
}

fn frames<T: Real>(c: &ParametricCurve<T>, params: impl Iterator<Item = T>) -> Vec<(Vec2<T>, Vec2<T>)> {
    params.map(|t| c.frame(t)).collect()
}

fn to_assembly_error(e: Error, p: usize, q: usize) -> Error {
    match e {
        Error::Domain(msg) => Error::Assembly(format!("block ({p},{q}): {msg}")),
        other => other,
    }
}

/// Dense block `(p, q)`: observation curve `p`, source curve `q`.
pub fn assemble_w_block<T: Real>(
    p: &ParametricCurve<T>,
    q: &ParametricCurve<T>,
    grid_p: &StaggeredGrid<T>,
    grid_q: &StaggeredGrid<T>,
    k: T,
) -> Result<ComplexMatrix<T>> {
    if grid_p.eps != grid_q.eps {
        return Err(Error::InvalidArgument(format!(
            "grids carry different staggering parameters {} and {}",
            grid_p.eps, grid_q.eps
        )));
    }
    let (np, nq) = (grid_p.n, grid_q.n);
    let obs_s: Vec<Vec2<T>> = (0..np).map(|i| p.point(grid_p.s_eps(i))).collect();
    let obs_t = frames(p, (0..np).map(|i| grid_p.t_eps(i)));
    let src_s: Vec<Vec2<T>> = (0..nq).map(|j| q.point(grid_q.s(j))).collect();
    let src_t = frames(q, (0..nq).map(|j| grid_q.t(j)));
    let hh = grid_p.h * grid_q.h;

    let g: Vec<Vec<Complex<T>>> = obs_s
        .par_iter()
        .map(|&x| src_s.iter().map(|&y| v1_at(x, y, k)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let data: Vec<Complex<T>> = (0..np)
        .into_par_iter()
        .map(|i| {
            let i1 = (i + 1) % np;
            let (x, nx) = obs_t[i];
            (0..nq)
                .map(|j| {
                    let j1 = (j + 1) % nq;
                    let (y, ny) = src_t[j];
                    let second = g[i1][j1] - g[i][j1] - g[i1][j] + g[i][j];
                    Ok(second + v2_at(x, nx, y, ny, k)? * hh)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    ComplexMatrix::from_row_major(np, nq, data)
}

/// Right-hand side convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation<T> {
    /// Unknown is a double-layer density; the right-hand side is
    /// `h g(t_{i+ε})` with `g = -∇U . n` for the point source at `source`.
    Indirect { source: Vec2<T> },
    /// Unknown is the trace `U ∘ x` of the point-source field.
    Direct { source: Vec2<T> },
}

impl<T> Formulation<T> {
    pub fn source(&self) -> &Vec2<T> {
        match self {
            Formulation::Indirect { source } | Formulation::Direct { source } => source,
        }
    }
}

/// The assembled linear system, one block per pair of curves.
#[derive(Debug, Clone)]
pub struct BlockSystem<T> {
    pub blocks: Blocks<T>,
    pub rhs: Vec<Complex<T>>,
    pub grids: Vec<StaggeredGrid<T>>,
}

impl<T: Real> BlockSystem<T> {
    pub fn matrix(&self) -> Result<ComplexMatrix<T>> {
        ComplexMatrix::from_blocks(&self.blocks)
    }

    /// Start index of each curve's unknowns in the global vector.
    pub fn offsets(&self) -> Vec<usize> {
        self.grids
            .iter()
            .scan(0, |acc, g| {
                let o = *acc;
                *acc += g.n;
                Some(o)
            })
            .collect()
    }
}

fn grids_of<T: Real>(config: &ScattererConfig<T>) -> Result<Vec<StaggeredGrid<T>>> {
    config.nodes().iter().map(|&n| build_grid(n, config.eps())).collect()
}

/// `blocks[p][q]` couples curve `p` (rows) to curve `q` (columns).
pub type Blocks<T> = Vec<Vec<ComplexMatrix<T>>>;

/// All `W` blocks of a configuration.
pub fn assemble_blocks<T: Real>(config: &ScattererConfig<T>) -> Result<(Blocks<T>, Vec<StaggeredGrid<T>>)> {
    let grids = grids_of(config)?;
    let curves = config.curves();
    let k = config.wavenumber();
    let mut blocks = Vec::with_capacity(curves.len());
    for (p, cp) in curves.iter().enumerate() {
        let mut row = Vec::with_capacity(curves.len());
        for (q, cq) in curves.iter().enumerate() {
            row.push(assemble_w_block(cp, cq, &grids[p], &grids[q], k).map_err(|e| to_assembly_error(e, p, q))?);
        }
        blocks.push(row);
    }
    Ok((blocks, grids))
}

/// Matrix blocks plus the right-hand side of the chosen formulation.
pub fn assemble_system<T: Real>(config: &ScattererConfig<T>, formulation: Formulation<T>) -> Result<BlockSystem<T>> {
    let (blocks, grids) = assemble_blocks(config)?;
    let rhs = match formulation {
        Formulation::Indirect { source } => indirect_rhs(config, &grids, source)?,
        Formulation::Direct { source } => direct_rhs_terms(config, source)?.combine(),
    };
    Ok(BlockSystem { blocks, rhs, grids })
}

/// `h_p g_p(t_{i+ε})` with `g = -∇U . n`.
pub fn indirect_rhs<T: Real>(
    config: &ScattererConfig<T>,
    grids: &[StaggeredGrid<T>],
    source: Vec2<T>,
) -> Result<Vec<Complex<T>>> {
    let k = config.wavenumber();
    let mut rhs = Vec::with_capacity(config.total_unknowns());
    for (c, g) in config.curves().iter().zip(grids) {
        for i in 0..g.n {
            let (x, n) = c.frame(g.t_eps(i));
            rhs.push(-point_source_neumann_at(x, n, source, k)? * g.h);
        }
    }
    Ok(rhs)
}

/// The two parts of the direct-method right-hand side, kept apart so each
/// can be inspected.
///
/// With `g̃ = ∇U . n` the scaled Neumann datum,
/// `jump_i = h_p g̃_p(t_{i+ε})` and
/// `adjoint_i = h_p Σ_q h_q Σ_j K'(x_p(t_{i+ε}), x_q(t_j)) g̃_q(t_j)`,
/// where `K'` is the adjoint double-layer kernel.
#[derive(Debug, Clone)]
pub struct DirectRhsTerms<T> {
    pub jump: Vec<Complex<T>>,
    pub adjoint: Vec<Complex<T>>,
}

impl<T: Real> DirectRhsTerms<T> {
    /// `-jump/2 + adjoint`, the combination under which the solution
    /// converges to the trace of the exact field.
    pub fn combine(&self) -> Vec<Complex<T>> {
        self.combine_with(-T::one(), T::one())
    }

    /// `jump_sign * jump/2 + adjoint_sign * adjoint`.
    pub fn combine_with(&self, jump_sign: T, adjoint_sign: T) -> Vec<Complex<T>> {
        let half = lit::<T>(0.5) * jump_sign;
        self.jump.iter().zip(&self.adjoint).map(|(j, a)| *j * half + *a * adjoint_sign).collect()
    }
}

pub fn direct_rhs_terms<T: Real>(config: &ScattererConfig<T>, source: Vec2<T>) -> Result<DirectRhsTerms<T>> {
    let grids = grids_of(config)?;
    let k = config.wavenumber();
    let curves = config.curves();
    // scaled Neumann data at the unstaggered nodes, premultiplied by h_q
    let sources: Vec<(Vec2<T>, Complex<T>)> = curves
        .iter()
        .zip(&grids)
        .flat_map(|(c, g)| (0..g.n).map(move |j| (c, g, j)))
        .map(|(c, g, j)| {
            let (y, ny) = c.frame(g.t(j));
            Ok((y, point_source_neumann_at(y, ny, source, k)? * g.h))
        })
        .collect::<Result<_>>()?;
    let targets: Vec<(Vec2<T>, Vec2<T>, T)> = curves
        .iter()
        .zip(&grids)
        .flat_map(|(c, g)| (0..g.n).map(move |i| (c, g, i)))
        .map(|(c, g, i)| {
            let (x, n) = c.frame(g.t_eps(i));
            (x, n, g.h)
        })
        .collect();
    let rows: Vec<(Complex<T>, Complex<T>)> = targets
        .par_iter()
        .map(|&(x, nx, h)| {
            let mut sum = Complex::new(T::zero(), T::zero());
            for &(y, gy) in &sources {
                sum += adjoint_dlp_at(x, nx, y, k)? * gy;
            }
            Ok((point_source_neumann_at(x, nx, source, k)? * h, sum * h))
        })
        .collect::<Result<_>>()
        .map_err(|e| to_assembly_error(e, 0, 0))?;
    let (jump, adjoint) = rows.into_iter().unzip();
    Ok(DirectRhsTerms { jump, adjoint })
}

/// Calderón preconditioner `V_ij = H0(k |x_p(t_i) - x_q(t_{j+ε})|)`,
/// joined over all curve pairs. No `i/4` or `h` factor is applied.
pub fn assemble_calderon_v<T: Real>(config: &ScattererConfig<T>) -> Result<ComplexMatrix<T>> {
    let grids = grids_of(config)?;
    let k = config.wavenumber();
    let curves = config.curves();
    let rows: Vec<Vec2<T>> = curves
        .iter()
        .zip(&grids)
        .flat_map(|(c, g)| (0..g.n).map(move |i| c.point(g.t(i))))
        .collect();
    let cols: Vec<Vec2<T>> = curves
        .iter()
        .zip(&grids)
        .flat_map(|(c, g)| (0..g.n).map(move |j| c.point(g.t_eps(j))))
        .collect();
    let data: Vec<Complex<T>> = rows
        .par_iter()
        .map(|&x| {
            cols.iter()
                .map(|&y| {
                    let r = (x - y).norm();
                    hankel1_0(k * r).map_err(|e| Error::Assembly(format!("Calderón matrix: {e}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    ComplexMatrix::from_row_major(rows.len(), cols.len(), data)
}

/// Cell-wise defect of the midpoint rule applied to `V2`.
#[derive(Debug, Clone)]
pub struct QuadratureErrorMatrix<T> {
    pub entries: ComplexMatrix<T>,
    /// Gauss points per cell direction of the reference rule.
    pub order: usize,
}

impl<T: Real> QuadratureErrorMatrix<T> {
    /// Entry with indices taken modulo `N`.
    pub fn entry(&self, i: isize, j: isize) -> Complex<T> {
        let n = self.entries.rows() as isize;
        self.entries[(i.rem_euclid(n) as usize, j.rem_euclid(n) as usize)]
    }
}

/// `E_ij = ∫∫_{Q_ij} V2 - h^2 V2(t_{i+ε}, t_j)` on the cells
/// `Q_ij = (s_{i+ε}, s_{i+1+ε}) × (s_j, s_{j+1})`.
///
/// The reference integral is a tensor Gauss-Legendre rule of `order` points
/// per direction. When the diagonal `s = t` crosses a cell, the inner
/// `s`-interval is split there so that no Gauss panel straddles the
/// logarithmic singularity.
pub fn quadrature_error_matrix<T: Real>(
    curve: &ParametricCurve<T>,
    grid: &StaggeredGrid<T>,
    k: T,
    order: usize,
) -> Result<QuadratureErrorMatrix<T>> {
    if order < 1 {
        return Err(Error::InvalidArgument("reference rule needs at least one point".into()));
    }
    let (nodes, weights) = gauss_legendre::<T>(order);
    let n = grid.n;
    let h = grid.h;
    let half = lit::<T>(0.5);
    let v2 = |s: T, t: T| -> Result<Complex<T>> {
        let (x, nx) = curve.frame(s);
        let (y, ny) = curve.frame(t);
        v2_at(x, nx, y, ny, k)
    };
    // integral of f over (a, b) with the Gauss rule
    let gauss = |a: T, b: T, f: &dyn Fn(T) -> Result<Complex<T>>| -> Result<Complex<T>> {
        let (m, r) = ((a + b) * half, (b - a) * half);
        let mut acc = Complex::new(T::zero(), T::zero());
        for (x, w) in nodes.iter().zip(&weights) {
            acc += f(m + r * *x)? * (*w * r);
        }
        Ok(acc)
    };
    let data: Vec<Complex<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (s0, s1) = (grid.s_eps(i), grid.s_eps(i + 1));
            (0..n)
                .map(|j| {
                    let (t0, t1) = (grid.s(j), grid.s(j + 1));
                    let outer = |t: T| -> Result<Complex<T>> {
                        let inner = |s: T| v2(s, t);
                        // periodic image of t inside (s0, s1), if any
                        let shift = ((s0 + s1) * half - t).round();
                        let tt = t + shift;
                        if tt > s0 && tt < s1 {
                            Ok(gauss(s0, tt, &inner)? + gauss(tt, s1, &inner)?)
                        } else {
                            gauss(s0, s1, &inner)
                        }
                    };
                    let exact = gauss(t0, t1, &outer)?;
                    Ok(exact - v2(grid.t_eps(i), grid.t(j))? * (h * h))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    Ok(QuadratureErrorMatrix { entries: ComplexMatrix::from_row_major(n, n, data)?, order })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let mf = m as f64;
                let p2 = ((2.0 * mf - 1.0) * z * p1 - (mf - 1.0) * p0) / mf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x.into_iter().map(lit).collect(), w.into_iter().map(lit).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> ParametricCurve<f64> {
        ParametricCurve::circle(Vec2::new(0.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn grid_nodes() {
        let g = build_grid(4, 1.0_f64 / 6.0).unwrap();
        assert_eq!(g.h(), 0.25);
        assert!((g.s(1) - 0.125).abs() < 1e-15);
        assert!((g.t(1) - 0.25).abs() < 1e-15);
        assert!((g.s_eps(1) - 0.166_666_666_666_666_7).abs() < 1e-12);
        assert!((g.t_eps(1) - 0.291_666_666_666_666_7).abs() < 1e-12);
        assert_eq!(build_grid(4, 7.0 / 6.0).unwrap().eps(), g.eps());
        assert!(build_grid(4, 0.0).is_err());
        assert!(build_grid(4, 2.0).is_err());
        assert!(build_grid(3, 0.25).is_err());
    }

    #[test]
    fn circle_block_is_circulant() {
        let c = circle();
        let g = build_grid(24, 1.0 / 6.0).unwrap();
        let w = assemble_w_block(&c, &c, &g, &g, 1.0).unwrap();
        let scale = w.max_abs();
        for i in 0..24 {
            for j in 0..24 {
                let d = (w[(i, j)] - w[((i + 1) % 24, (j + 1) % 24)]).norm();
                assert!(d <= 1e-12 * scale, "({i},{j}): {d:e}");
            }
        }
    }

    #[test]
    fn mismatched_eps_rejected() {
        let c = circle();
        let g1 = build_grid(8, 0.25).unwrap();
        let g2 = build_grid(8, 0.3).unwrap();
        assert!(assemble_w_block(&c, &c, &g1, &g2, 1.0).is_err());
    }

    #[test]
    fn indirect_rhs_entries() {
        let c = circle();
        let cfg = ScattererConfig::uniform(vec![c.clone()], 1.0, 10, 1.0 / 3.0).unwrap();
        let z0 = Vec2::new(0.1, 0.2);
        let sys = assemble_system(&cfg, Formulation::Indirect { source: z0 }).unwrap();
        for i in 0..10 {
            let t = sys.grids[0].t_eps(i);
            let want = -crate::kernels::point_source_neumann(&c, t, z0, 1.0).unwrap() * 0.1;
            assert!((sys.rhs[i] - want).norm() <= 1e-15 * want.norm());
        }
    }

    #[test]
    fn direct_rhs_without_adjoint_term() {
        let cfg = ScattererConfig::uniform(vec![circle()], 1.0, 12, 1.0 / 6.0).unwrap();
        let terms = direct_rhs_terms(&cfg, Vec2::new(0.1, 0.2)).unwrap();
        let zeroed = DirectRhsTerms { jump: terms.jump.clone(), adjoint: vec![Complex::new(0.0, 0.0); 12] };
        for (r, j) in zeroed.combine_with(1.0, 1.0).iter().zip(&terms.jump) {
            assert_eq!(*r, *j * 0.5);
        }
    }

    #[test]
    fn calderon_matrix_on_circle_is_circulant() {
        let cfg = ScattererConfig::uniform(vec![circle()], 1.0, 16, 1.0 / 6.0).unwrap();
        let v = assemble_calderon_v(&cfg).unwrap();
        let scale = v.max_abs();
        for i in 0..16 {
            for j in 0..16 {
                assert!((v[(i, j)] - v[((i + 1) % 16, (j + 1) % 16)]).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        for n in [1usize, 2, 5, 16] {
            let (x, w) = gauss_legendre::<f64>(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-14);
            // x^{2n-2} is integrated exactly
            let d = 2 * n as i32 - 2;
            let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d)).sum();
            assert!((integral - 2.0 / (d as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn quadrature_error_is_periodic_and_small() {
        let g = build_grid(16, 1.0 / 6.0).unwrap();
        let e = quadrature_error_matrix(&circle(), &g, 1.0, 8).unwrap();
        assert_eq!(e.entry(3, 5), e.entry(3, 5 + 16));
        assert_eq!(e.entry(-1, 2), e.entry(15, 2));
        // midpoint defects are O(h^2 |log h|) against entries of size O(h^2)
        assert!(e.entries.max_abs() < 0.1);
    }
}
