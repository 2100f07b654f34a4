//! Scalar kinds shared by every matrix in the crate.
//!
//! Two kinds exist: [`GaussRat`] (exact complex rationals) and
//! [`Complex64`] (floating point). A matrix is uniformly one kind; all
//! algorithms are written once against [`Scalar`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Which arithmetic a matrix uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Exact,
    Float,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Exact => f.write_str("exact"),
            Kind::Float => f.write_str("float"),
        }
    }
}

/// Field operations plus the handful of predicates the algorithms need.
///
/// `tol` arguments are ignored by the exact kind.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const KIND: Kind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_gauss(re: i64, im: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_c64(z: Complex64) -> Option<Self>;
    fn to_c64(&self) -> Complex64;

    fn conj(&self) -> Self;
    fn real_part(&self) -> Self;
    fn imag_part(&self) -> Self;
    /// `|z|^2` as a scalar with zero imaginary part.
    fn norm_sqr(&self) -> Self;
    fn recip(&self) -> Option<Self>;

    /// Exactly zero. Floats compare against `0.0`.
    fn is_zero(&self) -> bool;
    /// Zero up to `tol` (absolute).
    fn is_negligible(&self, tol: f64) -> bool;
    /// Real and `>= -tol`. Floats additionally require `|im| <= tol`.
    fn is_nonneg_real(&self, tol: f64) -> bool;
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Rank of a matrix of this kind: exact elimination, or singular values
    /// above [`crate::linalg::DEFAULT_RANK_TOL`] times the largest.
    fn rank(m: &Matrix<Self>) -> usize;

    fn from_i64(v: i64) -> Self {
        Self::from_gauss(v, 0)
    }

    fn i() -> Self {
        Self::from_gauss(0, 1)
    }

    fn magnitude_f64(&self) -> f64 {
        self.to_c64().norm()
    }
}

/// Complex number with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_real(re: BigRational) -> Self {
        Self {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn from_bigints(re: BigInt, im: BigInt) -> Self {
        Self {
            re: BigRational::from_integer(re),
            im: BigRational::from_integer(im),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Both parts have denominator one.
    pub fn is_gaussian_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }

    /// Decimal strings `[re_num, re_den, im_num, im_den]`.
    pub fn to_parts(&self) -> [String; 4] {
        [
            self.re.numer().to_string(),
            self.re.denom().to_string(),
            self.im.numer().to_string(),
            self.im.denom().to_string(),
        ]
    }

    pub fn from_parts(parts: &[String; 4]) -> Result<Self, String> {
        let p = |s: &str| -> Result<BigInt, String> {
            s.trim()
                .parse::<BigInt>()
                .map_err(|_| format!("invalid integer {s:?}"))
        };
        let (rn, rd, inum, id) = (p(&parts[0])?, p(&parts[1])?, p(&parts[2])?, p(&parts[3])?);
        if rd.is_zero() || id.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Self {
            re: BigRational::new(rn, rd),
            im: BigRational::new(inum, id),
        })
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussRat {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl Sub for GaussRat {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for GaussRat {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        &self * &o
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        match (self.im.is_zero(), o.im.is_zero()) {
            (true, true) => GaussRat::from_real(&self.re * &o.re),
            (true, false) => GaussRat {
                re: &self.re * &o.re,
                im: &self.re * &o.im,
            },
            (false, true) => GaussRat {
                re: &self.re * &o.re,
                im: &self.im * &o.re,
            },
            (false, false) => GaussRat {
                re: &self.re * &o.re - &self.im * &o.im,
                im: &self.re * &o.im + &self.im * &o.re,
            },
        }
    }
}

impl Div for GaussRat {
    type Output = Self;
    /// Panics on division by zero, like the rational parts do.
    fn div(self, o: Self) -> Self {
        let inv = o.recip().expect("division by zero GaussRat");
        self * inv
    }
}

impl Neg for GaussRat {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Scalar for GaussRat {
    const KIND: Kind = Kind::Exact;

    fn zero() -> Self {
        Self {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn one() -> Self {
        Self::from_real(BigRational::one())
    }

    fn from_gauss(re: i64, im: i64) -> Self {
        Self::from_bigints(BigInt::from(re), BigInt::from(im))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_real(BigRational::new(num.into(), den.into()))
    }

    /// Exact conversion of the binary value of each part.
    fn from_c64(z: Complex64) -> Option<Self> {
        Some(Self {
            re: BigRational::from_float(z.re)?,
            im: BigRational::from_float(z.im)?,
        })
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn real_part(&self) -> Self {
        Self::from_real(self.re.clone())
    }

    fn imag_part(&self) -> Self {
        Self::from_real(self.im.clone())
    }

    fn norm_sqr(&self) -> Self {
        Self::from_real(&self.re * &self.re + &self.im * &self.im)
    }

    fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(Self {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn is_nonneg_real(&self, _tol: f64) -> bool {
        self.im.is_zero() && !self.re.is_negative()
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn rank(m: &Matrix<Self>) -> usize {
        crate::linalg::rank_exact(m)
    }
}

impl Scalar for Complex64 {
    const KIND: Kind = Kind::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_gauss(re: i64, im: i64) -> Self {
        Complex64::new(re as f64, im as f64)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        (z.re.is_finite() && z.im.is_finite()).then_some(z)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn real_part(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }

    fn imag_part(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }

    fn norm_sqr(&self) -> Self {
        Complex64::new(Complex64::norm_sqr(self), 0.0)
    }

    fn recip(&self) -> Option<Self> {
        (!Scalar::is_zero(self)).then(|| Complex64::new(1.0, 0.0) / self)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }

    fn is_nonneg_real(&self, tol: f64) -> bool {
        self.re >= -tol && self.im.abs() <= tol
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    fn rank(m: &Matrix<Self>) -> usize {
        crate::linalg::rank_numeric_complex(m, crate::linalg::DEFAULT_RANK_TOL)
    }
}

/// Least common multiple of the denominators of a list of Gaussian
/// rationals; multiplying by it yields Gaussian integers.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a GaussRat>) -> BigInt {
    use num_integer::Integer;
    let mut l = BigInt::one();
    for x in xs {
        for d in [x.re.denom(), x.im.denom()] {
            if !d.is_one() {
                l = l.lcm(d);
            }
        }
    }
    l
}
