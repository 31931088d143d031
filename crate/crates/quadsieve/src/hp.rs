//! Minimal high-precision real and complex arithmetic on scaled integers.
//!
//! A value is a big integer mantissa m at precision p, representing
//! m / 2^p. All operations stay in exact integer arithmetic with explicit
//! truncation; pi is computed by Machin's formula and sin/cos by Taylor
//! series after quadrant reduction, so every constant carries an error of a
//! few last-place units which the callers account for in their reported
//! bounds. Internally everything runs with 64 guard bits.
//!
//! This is deliberately not a general float library: it supports exactly
//! the finite sums the zeta identities need (roots of unity, rational
//! scaling, complex multiply-accumulate).

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

const GUARD: u32 = 64;

/// A real number m / 2^prec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpReal {
    mant: BigInt,
    prec: u32,
}

impl HpReal {
    pub fn zero(prec: u32) -> HpReal {
        HpReal { mant: BigInt::zero(), prec }
    }

    pub fn from_int(v: &BigInt, prec: u32) -> HpReal {
        HpReal { mant: v << prec, prec }
    }

    pub fn from_i64(v: i64, prec: u32) -> HpReal {
        HpReal::from_int(&BigInt::from(v), prec)
    }

    /// num / den rounded to the working precision.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> HpReal {
        debug_assert!(!den.is_zero());
        HpReal { mant: div_round(&(num << prec), den), prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn add(&self, rhs: &HpReal) -> HpReal {
        debug_assert_eq!(self.prec, rhs.prec);
        HpReal { mant: &self.mant + &rhs.mant, prec: self.prec }
    }

    pub fn sub(&self, rhs: &HpReal) -> HpReal {
        debug_assert_eq!(self.prec, rhs.prec);
        HpReal { mant: &self.mant - &rhs.mant, prec: self.prec }
    }

    pub fn neg(&self) -> HpReal {
        HpReal { mant: -&self.mant, prec: self.prec }
    }

    pub fn mul(&self, rhs: &HpReal) -> HpReal {
        debug_assert_eq!(self.prec, rhs.prec);
        HpReal {
            mant: shift_round(&(&self.mant * &rhs.mant), self.prec),
            prec: self.prec,
        }
    }

    pub fn mul_i64(&self, v: i64) -> HpReal {
        HpReal { mant: &self.mant * v, prec: self.prec }
    }

    pub fn mul_int_hp(&self, v: &BigInt) -> HpReal {
        HpReal { mant: &self.mant * v, prec: self.prec }
    }

    pub fn div(&self, rhs: &HpReal) -> HpReal {
        debug_assert_eq!(self.prec, rhs.prec);
        debug_assert!(!rhs.mant.is_zero());
        HpReal {
            mant: div_round(&(&self.mant << self.prec), &rhs.mant),
            prec: self.prec,
        }
    }

    pub fn div_int(&self, den: &BigInt) -> HpReal {
        HpReal { mant: div_round(&self.mant, den), prec: self.prec }
    }

    pub fn abs(&self) -> HpReal {
        HpReal { mant: self.mant.abs(), prec: self.prec }
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Approximate f64 value; adequate for reporting residual magnitudes.
    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        if bits <= 900 {
            return self.mant.to_f64().unwrap_or(0.0) / 2f64.powi(self.prec as i32);
        }
        let shift = bits - 64;
        let top = (&self.mant >> shift).to_f64().unwrap_or(0.0);
        top * 2f64.powi((shift - self.prec as i64) as i32)
    }
}

fn shift_round(m: &BigInt, shift: u32) -> BigInt {
    let half = BigInt::from(1) << (shift - 1);
    if m.is_negative() {
        -((-m + half) >> shift)
    } else {
        (m + half) >> shift
    }
}

fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    let (num, den) = if den.is_negative() {
        (-num, -den)
    } else {
        (num.clone(), den.clone())
    };
    let two_num = &num * 2;
    let q: BigInt = &two_num / &den;
    if q.is_negative() {
        let inner: BigInt = (-&q + 1) / 2;
        -inner
    } else {
        (q + 1) / 2
    }
}

/// pi at the requested precision via Machin's formula
/// pi = 16 atan(1/5) - 4 atan(1/239), computed with guard bits.
pub fn pi(prec: u32) -> HpReal {
    let wp = prec + GUARD;
    let a5 = atan_inv(5, wp);
    let a239 = atan_inv(239, wp);
    let m = a5 * 16 - a239 * 4;
    HpReal { mant: shift_round(&m, GUARD), prec }
}

/// atan(1/x) * 2^prec as an integer, by the alternating series.
fn atan_inv(x: i64, prec: u32) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut term = (BigInt::from(1) << prec) / x;
    let mut sum = term.clone();
    let mut k = 1u64;
    while !term.is_zero() {
        term = &term / &x2;
        if term.is_zero() {
            break;
        }
        let contrib = &term / (2 * k + 1);
        if k % 2 == 1 {
            sum -= &contrib;
        } else {
            sum += &contrib;
        }
        k += 1;
    }
    sum
}

/// (cos, sin) of 2*pi*num/den at the requested precision.
///
/// The angle is reduced mod 2*pi exactly through the rational argument and
/// the Taylor series runs on a residual in [0, pi/2].
pub fn cos_sin_2pi_frac(num: i64, den: i64, prec: u32) -> (HpReal, HpReal) {
    debug_assert!(den > 0);
    let wp = prec + GUARD;
    let m = num.rem_euclid(den);
    // quadrant index: theta = 2 pi m / den in [0, 2 pi); quarter q = floor(4m/den)
    let quarter = (4 * m) / den;
    let frac_num = 4 * m - quarter * den; // residual angle = (pi/2) * frac_num/den
    let pi_wp = {
        let p = pi(wp);
        p.mant
    };
    let theta = div_round(&(&pi_wp * frac_num), &(BigInt::from(2) * den));
    let (c, s) = cos_sin_taylor(&theta, wp);
    let (c, s) = match quarter {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    };
    (
        HpReal { mant: shift_round(&c, GUARD), prec },
        HpReal { mant: shift_round(&s, GUARD), prec },
    )
}

/// Taylor cos/sin for 0 <= theta <= pi/2, on integer mantissas at prec.
fn cos_sin_taylor(theta: &BigInt, prec: u32) -> (BigInt, BigInt) {
    let one = BigInt::from(1) << prec;
    let mut cos = one.clone();
    let mut sin = theta.clone();
    // term_c holds theta^(2k)/(2k)!, term_s holds theta^(2k+1)/(2k+1)!
    let mut term_c = one;
    let mut term_s = theta.clone();
    let mut k = 1u64;
    loop {
        // advance: theta^2 / ((2k-1)(2k)) and /((2k)(2k+1))
        term_c = shift_round(&(&term_c * theta), prec);
        term_c = shift_round(&(&term_c * theta), prec);
        term_c = &term_c / ((2 * k - 1) * (2 * k));
        term_s = shift_round(&(&term_s * theta), prec);
        term_s = shift_round(&(&term_s * theta), prec);
        term_s = &term_s / ((2 * k) * (2 * k + 1));
        if term_c.is_zero() && term_s.is_zero() {
            break;
        }
        if k % 2 == 1 {
            cos -= &term_c;
            sin -= &term_s;
        } else {
            cos += &term_c;
            sin += &term_s;
        }
        k += 1;
    }
    (cos, sin)
}

/// A complex value with a rigorous (conservative) absolute error bound.
#[derive(Debug, Clone)]
pub struct ComplexValue {
    pub re: HpReal,
    pub im: HpReal,
    pub precision: u32,
    pub error_bound: f64,
}

impl ComplexValue {
    pub fn zero(prec: u32) -> ComplexValue {
        ComplexValue {
            re: HpReal::zero(prec),
            im: HpReal::zero(prec),
            precision: prec,
            error_bound: 0.0,
        }
    }

    pub fn from_real(re: HpReal) -> ComplexValue {
        let prec = re.prec();
        ComplexValue {
            re,
            im: HpReal::zero(prec),
            precision: prec,
            error_bound: ulp(prec),
        }
    }

    pub fn new(re: HpReal, im: HpReal, error_bound: f64) -> ComplexValue {
        let precision = re.prec();
        ComplexValue { re, im, precision, error_bound }
    }

    pub fn add(&self, rhs: &ComplexValue) -> ComplexValue {
        ComplexValue {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
            precision: self.precision,
            error_bound: self.error_bound + rhs.error_bound,
        }
    }

    pub fn sub(&self, rhs: &ComplexValue) -> ComplexValue {
        ComplexValue {
            re: self.re.sub(&rhs.re),
            im: self.im.sub(&rhs.im),
            precision: self.precision,
            error_bound: self.error_bound + rhs.error_bound,
        }
    }

    pub fn mul(&self, rhs: &ComplexValue) -> ComplexValue {
        let re = self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im));
        let im = self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re));
        let e = self.error_bound * rhs.norm_f64()
            + rhs.error_bound * self.norm_f64()
            + self.error_bound * rhs.error_bound
            + 4.0 * ulp(self.precision);
        ComplexValue { re, im, precision: self.precision, error_bound: e }
    }

    pub fn mul_i64(&self, v: i64) -> ComplexValue {
        ComplexValue {
            re: self.re.mul_i64(v),
            im: self.im.mul_i64(v),
            precision: self.precision,
            error_bound: self.error_bound * v.abs() as f64,
        }
    }

    pub fn mul_int(&self, v: &BigInt) -> ComplexValue {
        ComplexValue {
            re: self.re.mul_int_hp(v),
            im: self.im.mul_int_hp(v),
            precision: self.precision,
            error_bound: self.error_bound * v.to_f64().unwrap_or(f64::MAX).abs(),
        }
    }

    pub fn div_int(&self, den: &BigInt) -> ComplexValue {
        let d = den.to_f64().unwrap_or(1.0).abs().max(1.0);
        ComplexValue {
            re: self.re.div_int(den),
            im: self.im.div_int(den),
            precision: self.precision,
            error_bound: self.error_bound / d + 2.0 * ulp(self.precision),
        }
    }

    pub fn conj(&self) -> ComplexValue {
        ComplexValue {
            re: self.re.clone(),
            im: self.im.neg(),
            precision: self.precision,
            error_bound: self.error_bound,
        }
    }

    /// |z| as f64 (reporting only).
    pub fn norm_f64(&self) -> f64 {
        let re = self.re.to_f64();
        let im = self.im.to_f64();
        re.hypot(im)
    }

    /// |z|^2 exactly at working precision.
    pub fn norm_sq(&self) -> HpReal {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }
}

/// One unit in the last place at precision p.
pub fn ulp(prec: u32) -> f64 {
    2f64.powi(-(prec as i32))
}
