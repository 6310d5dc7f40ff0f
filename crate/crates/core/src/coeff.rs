//! Coefficient fields for [`APPoly`](crate::appoly::APPoly).

use std::fmt;

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::freqspace::Rational;

pub trait Coefficient: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Whether arithmetic is exact, which selects the pruning rule.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;
    /// `|a|^2` embedded as a real coefficient.
    fn norm_sqr(&self) -> Self;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex64;
}

impl Coefficient for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex64::norm_sqr(self), 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Complex number with exact rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: Rational,
    pub im: Rational,
}

impl ExactComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        ExactComplex { re, im }
    }

    pub fn real(re: Rational) -> Self {
        ExactComplex {
            re,
            im: Rational::zero(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

impl fmt::Debug for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "({} + {}i)", self.re, self.im)
        }
    }
}

impl Coefficient for ExactComplex {
    const EXACT: bool = true;

    fn zero() -> Self {
        ExactComplex::real(Rational::zero())
    }
    fn one() -> Self {
        ExactComplex::real(Rational::from_integer(1.into()))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        ExactComplex::new(&self.re + &other.re, &self.im + &other.im)
    }
    fn mul(&self, other: &Self) -> Self {
        if self.im.is_zero() && other.im.is_zero() {
            return ExactComplex::real(&self.re * &other.re);
        }
        ExactComplex::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }
    fn neg(&self) -> Self {
        ExactComplex::new(-&self.re, -&self.im)
    }
    fn conj(&self) -> Self {
        ExactComplex::new(self.re.clone(), -&self.im)
    }
    fn norm_sqr(&self) -> Self {
        ExactComplex::real(&self.re * &self.re + &self.im * &self.im)
    }
    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}
