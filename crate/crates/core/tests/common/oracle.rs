//! Arbitrary precision reference values for J0, J1, Y0, Y1.
//!
//! Plain ascending series evaluated with enough working bits to absorb the
//! `e^x` cancellation, so it is valid for every x used in the tests.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;
const EULER_GAMMA: &str = "0.57721566490153286060651209008240243104215933593992359880576723488486772677766467093694706329174674951";

pub struct Oracle {
    cc: Consts,
}

#[derive(Debug, Clone, Copy)]
pub struct Bessel {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bessel {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }
    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

impl Oracle {
    pub fn new() -> Self {
        Self { cc: Consts::new().expect("astro-float constants") }
    }

    fn round_f64(&mut self, v: &BigFloat) -> f64 {
        v.format(Radix::Dec, RM, &mut self.cc).unwrap().parse().unwrap()
    }

    pub fn bessel(&mut self, x: f64) -> Bessel {
        assert!(x > 0.0);
        let p = 256 + (1.5 * x) as usize / 64 * 64 + 64;
        let one = BigFloat::from_f64(1.0, p);
        let two = BigFloat::from_f64(2.0, p);
        let xb = BigFloat::from_f64(x, p);
        let half = xb.div(&two, p, RM);
        let q = half.mul(&half, p, RM);
        let neg_q = q.neg();
        let gamma = BigFloat::parse(EULER_GAMMA, Radix::Dec, p, RM, &mut self.cc);
        let pi = self.cc.pi(p, RM);

        let mut t0 = one.clone();
        let mut t1 = one.clone();
        let mut j0 = one.clone();
        let mut j1s = one.clone();
        let mut harm = BigFloat::from_f64(0.0, p);
        let mut y0s = BigFloat::from_f64(0.0, p);
        let two_gamma = gamma.mul(&two, p, RM);
        let mut y1s = one.sub(&two_gamma, p, RM);
        let mut k: u64 = 1;
        loop {
            let kb = BigFloat::from_u64(k, p);
            let k1b = BigFloat::from_u64(k + 1, p);
            t0 = t0.mul(&neg_q, p, RM).div(&kb.mul(&kb, p, RM), p, RM);
            t1 = t1.mul(&neg_q, p, RM).div(&kb.mul(&k1b, p, RM), p, RM);
            j0 = j0.add(&t0, p, RM);
            j1s = j1s.add(&t1, p, RM);
            harm = harm.add(&one.div(&kb, p, RM), p, RM);
            y0s = y0s.sub(&harm.mul(&t0, p, RM), p, RM);
            let harm_next = harm.add(&one.div(&k1b, p, RM), p, RM);
            let c = harm.add(&harm_next, p, RM).sub(&two_gamma, p, RM);
            y1s = y1s.add(&c.mul(&t1, p, RM), p, RM);
            k += 1;
            let small = t0.is_zero() || t0.exponent().is_none_or(|e| (e as i64) < -230);
            if small && (k as f64) > x {
                break;
            }
        }
        let ln_half = half.ln(p, RM, &mut self.cc);
        let two_over_pi = two.div(&pi, p, RM);
        let lg = ln_half.add(&gamma, p, RM);
        let j1 = half.mul(&j1s, p, RM);
        let y0 = two_over_pi.mul(&lg.mul(&j0, p, RM).add(&y0s, p, RM), p, RM);
        // Y1 = -2/(πx) + (2/π) ln(x/2) J1 - (x/(2π)) Σ (ψ(k+1)+ψ(k+2)) (-q)^k/(k!(k+1)!)
        let y1 = two_over_pi
            .div(&xb, p, RM)
            .neg()
            .add(&two_over_pi.mul(&ln_half, p, RM).mul(&j1, p, RM), p, RM)
            .sub(&half.div(&pi, p, RM).mul(&y1s, p, RM), p, RM);
        Bessel { j0: self.round_f64(&j0), j1: self.round_f64(&j1), y0: self.round_f64(&y0), y1: self.round_f64(&y1) }
    }
}
