//! Fourier-side utilities for 1-periodic functions: trigonometric
//! interpolation coefficients, periodic Sobolev norms, the Hilbert transform
//! `H`, the derivatives `D_n` and the periodized Bernoulli functions.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{cplx, from_usize, lit, Real};

/// Coefficients `û(m)` for `m` in the window `-M/2 < m <= M/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierVector<T> {
    /// Smallest mode in the window.
    lo: i64,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> FourierVector<T> {
    /// Window of size `m` with all coefficients zero.
    pub fn zeros(m: usize) -> Self {
        let lo = -(((m as i64) - 1) / 2);
        Self { lo, coeffs: vec![Complex::new(T::zero(), T::zero()); m] }
    }

    /// Window of size `m` with `û(mode) = f(mode)`.
    pub fn from_fn(m: usize, f: impl Fn(i64) -> Complex<T>) -> Self {
        let mut v = Self::zeros(m);
        for (idx, c) in v.coeffs.iter_mut().enumerate() {
            *c = f(v.lo + idx as i64);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `û(m)`, zero outside the window.
    pub fn get(&self, m: i64) -> Complex<T> {
        let idx = m - self.lo;
        if idx >= 0 && (idx as usize) < self.coeffs.len() {
            self.coeffs[idx as usize]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.lo + i as i64, *c))
    }

    fn map_modes(&self, f: impl Fn(i64, Complex<T>) -> Complex<T>) -> Self {
        Self { lo: self.lo, coeffs: self.modes().map(|(m, c)| f(m, c)).collect() }
    }

    /// `Σ_m û(m) e^{2πimt}`.
    pub fn evaluate(&self, t: T) -> Complex<T> {
        self.modes().fold(Complex::new(T::zero(), T::zero()), |acc, (m, c)| {
            let arg = T::TAU() * lit::<T>(m as f64) * t;
            acc + c * cplx(arg.cos(), arg.sin())
        })
    }

    /// Coefficient-wise difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.lo != other.lo || self.len() != other.len() {
            return Err(Error::Dimension("Fourier windows differ".into()));
        }
        Ok(self.map_modes(|m, c| c - other.get(m)))
    }
}

/// Trigonometric interpolation coefficients of `M` uniform samples
/// `u(j/M)`: `û(m) = (1/M) Σ_j u(j/M) e^{-2πimj/M}`.
pub fn fourier_coeffs<T: Real>(samples: &[Complex<T>]) -> Result<FourierVector<T>> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("at least 2 samples are required, got {m}")));
    }
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = T::one() / from_usize(m);
    Ok(FourierVector::from_fn(m, |mode| buf[mode.rem_euclid(m as i64) as usize] * scale))
}

/// `(|û(0)|^2 + Σ_{m≠0} |m|^{2r} |û(m)|^2)^{1/2}` over the window.
pub fn sobolev_norm<T: Real>(u: &FourierVector<T>, r: T) -> T {
    u.modes()
        .map(|(m, c)| {
            if m == 0 {
                c.norm_sqr()
            } else {
                lit::<T>((m as f64).abs()).powf(lit::<T>(2.0) * r) * c.norm_sqr()
            }
        })
        .sum::<T>()
        .sqrt()
}

/// `û(m) -> sign(m) û(m)`.
pub fn apply_hilbert<T: Real>(u: &FourierVector<T>) -> FourierVector<T> {
    u.map_modes(|m, c| match m.signum() {
        0 => Complex::new(T::zero(), T::zero()),
        s => c * lit::<T>(s as f64),
    })
}

/// `û(m) -> (2πim)^n û(m)`, `û(0) -> 0`; `n` may be negative.
pub fn apply_dn<T: Real>(u: &FourierVector<T>, n: i32) -> FourierVector<T> {
    u.map_modes(|m, c| {
        if m == 0 {
            Complex::new(T::zero(), T::zero())
        } else {
            c * cplx(T::zero(), T::TAU() * lit::<T>(m as f64)).powi(n)
        }
    })
}

/// Number of modes used to synthesize `C_2`.
pub const C2_MODES: usize = 2048;

fn check_order(ell: u32) -> Result<()> {
    if ell == 1 || ell == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("order must be 1 or 2, got {ell}")))
    }
}

fn check_jump<T: Real>(ell: u32, t: T) -> Result<()> {
    if ell == 1 && t == t.round() {
        Err(Error::Domain(format!("order 1 is singular at the integer {t}")))
    } else {
        Ok(())
    }
}

/// `B_ℓ` with `(-1)^ℓ ℓ! B_ℓ` equal to the Bernoulli polynomial of degree
/// `ℓ` on `(0, 1)`, extended periodically: `B_1 = 1/2 - t`,
/// `B_2 = (t^2 - t + 1/6)/2`.
pub fn periodized_bernoulli<T: Real>(ell: u32, t: T) -> Result<T> {
    check_order(ell)?;
    check_jump(ell, t)?;
    let x = t - t.floor();
    Ok(if ell == 1 {
        lit::<T>(0.5) - x
    } else {
        (x * x - x + lit(1.0 / 6.0)) * lit(0.5)
    })
}

/// Fourier coefficient of `B_ℓ`: `-(-2πim)^{-ℓ}` for `m ≠ 0`, zero at `m = 0`.
pub fn bernoulli_coeff<T: Real>(ell: u32, m: i64) -> Complex<T> {
    if m == 0 {
        return Complex::new(T::zero(), T::zero());
    }
    -cplx(T::zero(), -T::TAU() * lit::<T>(m as f64)).powi(-(ell as i32))
}

/// `C_ℓ = H B_ℓ`.
///
/// `C_1(t) = -(1/2πi) log(4 sin^2 πt)` in closed form; `C_2` is summed from
/// its first [`C2_MODES`] Fourier modes,
/// `C_2(t) = (i/2π^2) Σ_{m≥1} sin(2πmt)/m^2`.
pub fn c_ell<T: Real>(ell: u32, t: T) -> Result<Complex<T>> {
    check_order(ell)?;
    check_jump(ell, t)?;
    if ell == 1 {
        let s = (T::PI() * t).sin();
        let v = (lit::<T>(4.0) * s * s).ln();
        // -(1/2πi) v = (i/2π) v
        return Ok(cplx(T::zero(), v / T::TAU()));
    }
    let sum: T = (1..=C2_MODES)
        .rev()
        .map(|m| {
            let mf = from_usize::<T>(m);
            (T::TAU() * mf * t).sin() / (mf * mf)
        })
        .sum();
    Ok(cplx(T::zero(), sum / (lit::<T>(2.0) * T::PI() * T::PI())))
}
