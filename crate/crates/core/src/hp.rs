//! High-precision complex numbers for Bethe roots and magnon states.
//!
//! The working precision is process-wide and set in decimal digits. Values
//! built from exact rationals are rounded once at that precision.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use dashu_float::round::mode::HalfEven;
use dashu_int::{IBig, Sign, UBig};

use crate::rational::Rat;
use crate::scalar::Scalar;

pub type Float = dashu_float::FBig<HalfEven>;

pub const DEFAULT_DIGITS: usize = 50;

static DIGITS: AtomicUsize = AtomicUsize::new(DEFAULT_DIGITS);

/// Sets the working precision in decimal digits (at least 16).
pub fn set_digits(digits: usize) {
    DIGITS.store(digits.max(16), Ordering::SeqCst);
}

pub fn digits() -> usize {
    DIGITS.load(Ordering::SeqCst)
}

fn bits() -> usize {
    // log2(10) < 3.33, plus guard bits
    digits() * 333 / 100 + 16
}

fn round(x: Float) -> Float {
    x.with_precision(bits()).value()
}

fn big(n: &num_bigint::BigInt) -> IBig {
    let (sign, bytes) = n.to_bytes_le();
    let mag = UBig::from_le_bytes(&bytes);
    match sign {
        num_bigint::Sign::Minus => IBig::from_parts(Sign::Negative, mag),
        _ => IBig::from(mag),
    }
}

fn float_of(r: &Rat) -> Float {
    let n = round(Float::from(big(&r.numer())));
    let d = round(Float::from(big(&r.denom())));
    n / d
}

#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Complex {
        Complex { re: round(re), im: round(im) }
    }

    pub fn from_parts(re: &Rat, im: &Rat) -> Complex {
        Complex { re: float_of(re), im: float_of(im) }
    }

    pub fn from_f64(re: f64, im: f64) -> Complex {
        let f = |x: f64| round(Float::try_from(x).expect("finite seed"));
        Complex { re: f(re), im: f(im) }
    }

    pub fn i() -> Complex {
        Complex::from_parts(&Rat::zero(), &Rat::one())
    }

    pub fn conj(&self) -> Complex {
        Complex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Float {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> f64 {
        let n = self.norm_sqr();
        if n == Float::ZERO {
            return 0.0;
        }
        n.sqrt().to_f64().value()
    }

    pub fn div(&self, o: &Complex) -> Option<Complex> {
        o.inv().map(|x| self.mul(&x))
    }

    pub fn powi(&self, e: u32) -> Complex {
        let mut acc = Complex::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64().value(), self.im.to_f64().value())
    }

    /// `cot(π r)` for a rational `r` that is not an integer.
    pub fn cot_pi(r: &Rat) -> Option<Complex> {
        let x = float_of(r);
        let s = x.sin_pi();
        if s == Float::ZERO {
            return None;
        }
        Some(Complex { re: round(x.cos_pi() / s), im: round(Float::ZERO) })
    }

    /// Decimal rendering with `digits` significant digits per component.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let f = |x: &Float| -> String {
            if *x == Float::ZERO {
                return "0".into();
            }
            x.to_decimal().value().with_precision(digits).value().to_string()
        };
        let im = f(&self.im);
        if im.starts_with('-') {
            format!("{}{}i", f(&self.re), im)
        } else {
            format!("{}+{}i", f(&self.re), im)
        }
    }
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        write!(f, "({re:e}{im:+e}i)")
    }
}

impl Scalar for Complex {
    fn zero() -> Self {
        Complex { re: round(Float::ZERO), im: round(Float::ZERO) }
    }
    fn one() -> Self {
        Complex { re: round(Float::ONE), im: round(Float::ZERO) }
    }
    fn is_zero(&self) -> bool {
        self.re == Float::ZERO && self.im == Float::ZERO
    }
    fn add(&self, o: &Self) -> Self {
        Complex { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Self) -> Self {
        Complex { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        Complex { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
    fn neg(&self) -> Self {
        Complex { re: -self.re.clone(), im: -self.im.clone() }
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = round(self.norm_sqr());
        Some(Complex { re: &self.re / &n, im: -(&self.im / &n) })
    }
    fn from_rat(r: &Rat) -> Self {
        Complex { re: float_of(r), im: Float::ZERO }
    }
    fn magnitude(&self) -> f64 {
        let (re, im) = self.to_f64();
        re.abs() + im.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        a.sub(b).abs() < tol
    }

    #[test]
    fn field_operations() {
        let a = Complex::from_parts(&q(1, 3), &q(-2, 7));
        let b = Complex::from_parts(&q(5, 2), &q(1, 9));
        let prod = a.mul(&b);
        // (1/3 - 2/7 i)(5/2 + 1/9 i) = 5/6 + 2/63 + (1/27 - 5/7) i
        let expect = Complex::from_parts(&(q(5, 6) + q(2, 63)), &(q(1, 27) - q(5, 7)));
        assert!(close(&prod, &expect, 1e-45));
        let back = prod.div(&b).unwrap();
        assert!(close(&back, &a, 1e-45));
        assert!(Complex::zero().inv().is_none());
    }

    #[test]
    fn thirds_are_not_exact_but_close() {
        let third = Complex::from_rat(&q(1, 3));
        let three = Complex::from_rat(&q(3, 1));
        let one = third.mul(&three);
        assert!(close(&one, &Complex::one(), 1e-45));
    }

    #[test]
    fn cotangent_values() {
        let c = Complex::cot_pi(&q(1, 4)).unwrap();
        assert!(close(&c, &Complex::one(), 1e-45));
        let c = Complex::cot_pi(&q(1, 6)).unwrap();
        assert!((c.to_f64().0 - 3f64.sqrt()).abs() < 1e-14);
        assert!(Complex::cot_pi(&q(2, 1)).is_none());
    }

    #[test]
    fn powers_and_conjugates() {
        let i = Complex::i();
        assert!(close(&i.powi(4), &Complex::one(), 1e-45));
        assert!(close(&i.mul(&i.conj()), &Complex::one(), 1e-45));
        let z = Complex::from_f64(0.5, -1.25);
        assert_eq!(z.to_f64(), (0.5, -1.25));
        assert_eq!(z.to_decimal_string(5), "0.5-1.25i");
    }
}
