//! Scalar fields used throughout: exact Gaussian rationals for identity
//! checks, complex doubles for spectral work.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub type Rat = BigRational;
pub type C64 = Complex64;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    // good enough for the magnitudes appearing here; numerators stay modest
    let num = r.numer();
    let den = r.denom();
    bigint_to_f64(num) / bigint_to_f64(den)
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    let s = x.to_string();
    s.parse::<f64>().unwrap_or(f64::NAN)
}

/// Parse "p/q", "p", or a decimal like "-0.25" into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rat::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let digits = frac.len() as u32;
        let frac_part: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().ok()?
        };
        let den = BigInt::from(10u32).pow(digits);
        let mut val = Rat::new(int_part.clone() * &den, den.clone());
        let frac_rat = Rat::new(frac_part, den);
        if neg {
            val -= frac_rat;
        } else {
            val += frac_rat;
        }
        return Some(val);
    }
    let p: BigInt = s.parse().ok()?;
    Some(Rat::from(p))
}

/// A Gaussian rational: exact complex number with rational real and
/// imaginary parts.
#[derive(Clone, PartialEq, Eq)]
pub struct Gaussian {
    pub re: Rat,
    pub im: Rat,
}

impl Gaussian {
    pub fn new(re: Rat, im: Rat) -> Self {
        Gaussian { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        Gaussian {
            re,
            im: Rat::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_rat(rat(n, d))
    }

    pub fn i() -> Self {
        Gaussian {
            re: Rat::zero(),
            im: Rat::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gaussian {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "division by zero Gaussian rational");
        Gaussian {
            re: &self.re / &n,
            im: -&self.im / &n,
        }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

impl fmt::Debug for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for Gaussian {
    type Output = Gaussian;
    fn add(self, o: Gaussian) -> Gaussian {
        Gaussian {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Gaussian {
    type Output = Gaussian;
    fn sub(self, o: Gaussian) -> Gaussian {
        Gaussian {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for Gaussian {
    type Output = Gaussian;
    fn mul(self, o: Gaussian) -> Gaussian {
        Gaussian {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Div for Gaussian {
    type Output = Gaussian;
    fn div(self, o: Gaussian) -> Gaussian {
        self * o.inv()
    }
}

impl Neg for Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Zero for Gaussian {
    fn zero() -> Self {
        Gaussian {
            re: Rat::zero(),
            im: Rat::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for Gaussian {
    fn one() -> Self {
        Gaussian {
            re: Rat::one(),
            im: Rat::zero(),
        }
    }
}

/// Common interface for the two scalar fields. The exact field supports
/// exact equality testing; the float field carries tolerances externally.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    const EXACT: bool;

    fn conjugate(&self) -> Self;
    fn invert(&self) -> Self;
    fn from_i64(n: i64) -> Self;
    fn as_c64(&self) -> C64;
    /// Inject an exact Gaussian rational into this field.
    fn from_exact(g: &Gaussian) -> Self;
}

impl Scalar for Gaussian {
    const EXACT: bool = true;

    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn invert(&self) -> Self {
        self.inv()
    }
    fn from_i64(n: i64) -> Self {
        Gaussian::from_int(n)
    }
    fn as_c64(&self) -> C64 {
        self.to_c64()
    }
    fn from_exact(g: &Gaussian) -> Self {
        g.clone()
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn invert(&self) -> Self {
        C64::new(1.0, 0.0) / self
    }
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn as_c64(&self) -> C64 {
        *self
    }
    fn from_exact(g: &Gaussian) -> Self {
        g.to_c64()
    }
}
