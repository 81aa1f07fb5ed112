//! Bessel functions `J0, J1, Y0, Y1` and the Hankel functions of the first
//! kind `H0 = J0 + iY0`, `H1 = J1 + iY1` for positive real arguments.
//!
//! Three regimes, each accurate to a few ulps relative to `|H|` in `f64`:
//!
//! * `x <= SERIES_MAX`: ascending power series.
//! * `SERIES_MAX < x < ASYMPTOTIC_MIN`: Miller backward recurrence for the
//!   `J_n`, normalized with `J0 + 2 Σ J_2k = 1`, and the Neumann expansions
//!   of `Y0`, `Y1` in terms of the same `J_n`.
//! * `x >= ASYMPTOTIC_MIN`: Hankel's asymptotic expansion. The phase factor
//!   is built from `cos x`, `sin x` rather than `cos(x - π/4)` so no
//!   rounding is introduced by shifting a large argument.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

pub(crate) const SERIES_MAX: f64 = 3.0;
pub(crate) const ASYMPTOTIC_MIN: f64 = 20.0;

/// `J0, J1, Y0, Y1` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselSet<T> {
    pub j0: T,
    pub j1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> BesselSet<T> {
    pub fn h0(&self) -> Complex<T> {
        Complex::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex<T> {
        Complex::new(self.j1, self.y1)
    }
}

fn check_arg<T: Real>(x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Bessel/Hankel argument must be positive and finite, got {x}")))
    }
}

/// Evaluates `J0, J1, Y0, Y1` at `x > 0`.
pub fn bessel_set<T: Real>(x: T) -> Result<BesselSet<T>> {
    check_arg(x)?;
    Ok(if x <= lit(SERIES_MAX) {
        series(x)
    } else if x < lit(ASYMPTOTIC_MIN) {
        recurrence(x)
    } else {
        asymptotic(x)
    })
}

/// `H0(x) = J0(x) + i Y0(x)`.
pub fn hankel1_0<T: Real>(x: T) -> Result<Complex<T>> {
    if x >= lit(ASYMPTOTIC_MIN) && x.is_finite() {
        return Ok(asymptotic_hankel(x, 0));
    }
    bessel_set(x).map(|b| b.h0())
}

/// `H1(x) = J1(x) + i Y1(x)`.
pub fn hankel1_1<T: Real>(x: T) -> Result<Complex<T>> {
    if x >= lit(ASYMPTOTIC_MIN) && x.is_finite() {
        return Ok(asymptotic_hankel(x, 1));
    }
    bessel_set(x).map(|b| b.h1())
}

/// Both Hankel functions at once; cheaper than two separate calls.
pub fn hankel1_01<T: Real>(x: T) -> Result<(Complex<T>, Complex<T>)> {
    bessel_set(x).map(|b| (b.h0(), b.h1()))
}

pub(crate) fn series<T: Real>(x: T) -> BesselSet<T> {
    let half = x * lit(0.5);
    let q = half * half;
    let eps = T::epsilon() * lit(0.25);
    let gamma = T::euler_gamma();

    // J0, J1 and the harmonic-number series of Y0, Y1 share the term q^k / (k!)^2.
    let mut t0 = T::one(); // (-q)^k / (k!)^2
    let mut t1 = T::one(); // (-q)^k / (k! (k+1)!)
    let mut j0 = T::one();
    let mut j1s = T::one();
    let mut harm = T::zero(); // H_k
    let mut y0s = T::zero();
    // ψ(k+1) + ψ(k+2) = -2γ + H_k + H_{k+1}
    let mut y1s = -lit::<T>(2.0) * gamma + T::one();
    for k in 1..200usize {
        let kf = from_usize::<T>(k);
        t0 = -t0 * q / (kf * kf);
        t1 = -t1 * q / (kf * (kf + T::one()));
        j0 += t0;
        j1s += t1;
        harm += T::one() / kf;
        // series of Y0 uses (-1)^{k+1} H_k q^k/(k!)^2 = -H_k t0
        y0s -= harm * t0;
        let harm_next = harm + T::one() / (kf + T::one());
        y1s += (-lit::<T>(2.0) * gamma + harm + harm_next) * t1;
        if t0.abs() * (T::one() + harm) <= eps * j0.abs().max(y0s.abs()).max(T::min_positive_value())
            && t1.abs() * (T::one() + harm_next) <= eps * j1s.abs()
        {
            break;
        }
    }
    let two_over_pi = T::FRAC_2_PI();
    let log_half = half.ln();
    let j1 = half * j1s;
    let y0 = two_over_pi * ((log_half + gamma) * j0 + y0s);
    let y1 = -two_over_pi / x + two_over_pi * log_half * j1 - half * T::FRAC_1_PI() * y1s;
    BesselSet { j0, j1, y0, y1 }
}

pub(crate) fn recurrence<T: Real>(x: T) -> BesselSet<T> {
    // Start well above the turning point so J_M(x) is below working precision.
    let start = x + lit::<T>(12.0) * x.cbrt() + lit(20.0);
    let mut m = start.ceil().to_usize().unwrap_or(64);
    if m % 2 == 1 {
        m += 1;
    }
    let big = T::max_value().sqrt().sqrt();
    let inv_x2 = lit::<T>(2.0) / x;

    let mut next = T::zero(); // b_{n+1}
    let mut cur = T::min_positive_value().sqrt(); // b_n
    let mut norm = T::zero();
    let mut sum_y0 = T::zero();
    let mut sum_y1 = T::zero();
    let mut b1 = T::zero();
    let mut n = m;
    loop {
        // accumulate b_n
        if n == 1 {
            b1 = cur;
        }
        if n > 0 && n.is_multiple_of(2) {
            let k = n / 2;
            norm += lit::<T>(2.0) * cur;
            let term = cur / from_usize(k);
            if k.is_multiple_of(2) {
                sum_y0 += term;
            } else {
                sum_y0 -= term;
            }
        } else if n % 2 == 1 && n >= 3 {
            let mm = (n - 1) / 2;
            let mf = from_usize::<T>(mm);
            let coef = (lit::<T>(2.0) * mf + T::one()) / (mf * (mf + T::one()));
            if mm % 2 == 1 {
                sum_y1 += coef * cur;
            } else {
                sum_y1 -= coef * cur;
            }
        }
        if n == 0 {
            norm += cur;
            break;
        }
        let prev = from_usize::<T>(n) * inv_x2 * cur - next;
        next = cur;
        cur = prev;
        n -= 1;
        if cur.abs() > big {
            let s = T::one() / big;
            cur *= s;
            next *= s;
            norm *= s;
            sum_y0 *= s;
            sum_y1 *= s;
            b1 *= s;
        }
    }
    let b0 = cur;
    let j0 = b0 / norm;
    let j1 = b1 / norm;
    let lg = (x * lit(0.5)).ln() + T::euler_gamma();
    let two_over_pi = T::FRAC_2_PI();
    let y0 = two_over_pi * lg * j0 - lit::<T>(2.0) * two_over_pi * sum_y0 / norm;
    let y1 = two_over_pi * (lg * j1 - j0 / x - j1 + sum_y1 / norm);
    BesselSet { j0, j1, y0, y1 }
}

/// Hankel's expansion `H_ν(x) = sqrt(2/(πx)) e^{i(x - νπ/2 - π/4)} Σ i^k a_k(ν) / x^k`.
pub(crate) fn asymptotic_hankel<T: Real>(x: T, order: u32) -> Complex<T> {
    let mu = lit::<T>(4.0 * f64::from(order * order));
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    let i = Complex::new(T::zero(), T::one());
    let eps = T::epsilon() * lit(0.1);
    let mut last = T::infinity();
    for k in 1..200usize {
        let kf = from_usize::<T>(k);
        let odd = lit::<T>(2.0) * kf - T::one();
        let factor = (mu - odd * odd) / (lit::<T>(8.0) * kf * x);
        term = term * i * factor;
        let size = term.norm();
        if size > last {
            // asymptotic series started to diverge
            break;
        }
        sum += term;
        last = size;
        if size <= eps {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let r = T::FRAC_1_SQRT_2();
    // e^{-iπ/4} for ν = 0, e^{-3iπ/4} for ν = 1
    let rot = if order == 0 { Complex::new(r, -r) } else { Complex::new(-r, -r) };
    let amp = (T::FRAC_2_PI() / x).sqrt();
    Complex::new(c, s) * rot * sum * amp
}

pub(crate) fn asymptotic<T: Real>(x: T) -> BesselSet<T> {
    let h0 = asymptotic_hankel(x, 0);
    let h1 = asymptotic_hankel(x, 1);
    BesselSet { j0: h0.re, j1: h1.re, y0: h0.im, y1: h1.im }
}
