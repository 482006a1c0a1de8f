//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use qd::Quad;

/// Real scalar the models are generic over: `f32`, `f64` or [`DoubleDouble`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + ScalarOperand + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Double-double real with about 31 significant digits. Much slower than
/// `f64`; meant as a high-precision reference, for instance when
/// finite-differencing losses. Arithmetic, `sqrt`, `exp`, `ln` and the
/// functions built from them carry full precision; trigonometric functions
/// are evaluated through `f64`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DoubleDouble(pub Quad);

#[inline]
fn dd(v: f64) -> DoubleDouble {
    DoubleDouble(Quad::from_f64(v))
}

impl DoubleDouble {
    /// Leading and trailing `f64` components.
    pub fn parts(self) -> (f64, f64) {
        (self.0 .0, self.0 .1)
    }

    fn via_f64(self, f: impl Fn(f64) -> f64) -> Self {
        dd(f(self.0 .0 + self.0 .1))
    }
}

impl Scalar for DoubleDouble {}
impl ScalarOperand for DoubleDouble {}

impl Default for DoubleDouble {
    fn default() -> Self {
        Self(Quad::ZERO)
    }
}

impl Display for DoubleDouble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e} + {:e}", self.0 .0, self.0 .1)
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        Self(Quad::from_f64(v))
    }
}

impl std::ops::Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self(self.0.add_accurate(rhs.0))
    }
}

impl std::ops::Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self(self.0.sub_accurate(rhs.0))
    }
}

impl std::ops::Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl std::ops::Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Self(self.0 / rhs.0)
    }
}

impl std::ops::Rem for DoubleDouble {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - (self / rhs).trunc() * rhs
    }
}

impl std::ops::Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self(Quad::ZERO), |a, b| a + b)
    }
}

impl num_traits::Zero for DoubleDouble {
    fn zero() -> Self {
        Self(Quad::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0 .0 == 0.0
    }
}

impl num_traits::One for DoubleDouble {
    fn one() -> Self {
        Self(Quad::ONE)
    }
}

impl num_traits::Num for DoubleDouble {
    type FromStrRadixErr = num_traits::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(dd)
    }
}

impl ToPrimitive for DoubleDouble {
    fn to_i64(&self) -> Option<i64> {
        self.to_f64().and_then(|v| v.to_i64())
    }
    fn to_u64(&self) -> Option<u64> {
        self.to_f64().and_then(|v| v.to_u64())
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0 .0 + self.0 .1)
    }
}

impl FromPrimitive for DoubleDouble {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        Some(Self(
            Quad::from_f64(hi).add_accurate(Quad::from_f64((n - hi as i64) as f64)),
        ))
    }
    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = n as i128 - hi as i128;
        Some(Self(Quad::from_f64(hi).add_accurate(Quad::from_f64(lo as f64))))
    }
    fn from_f64(n: f64) -> Option<Self> {
        Some(dd(n))
    }
}

impl num_traits::NumCast for DoubleDouble {
    fn from<N: ToPrimitive>(n: N) -> Option<Self> {
        n.to_f64().map(dd)
    }
}

impl Float for DoubleDouble {
    fn nan() -> Self {
        Self(Quad::NAN)
    }
    fn infinity() -> Self {
        Self(Quad::INFINITY)
    }
    fn neg_infinity() -> Self {
        Self(Quad::NEG_INFINITY)
    }
    fn neg_zero() -> Self {
        Self(Quad(-0.0, 0.0))
    }
    fn min_value() -> Self {
        Self(Quad::MIN)
    }
    fn min_positive_value() -> Self {
        Self(Quad::MIN_POSITIVE)
    }
    fn max_value() -> Self {
        Self(Quad::MAX)
    }
    fn epsilon() -> Self {
        Self(Quad::EPSILON)
    }
    fn is_nan(self) -> bool {
        self.0.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.0 .0.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.0.is_finite()
    }
    fn is_normal(self) -> bool {
        self.0 .0.is_normal()
    }
    fn classify(self) -> std::num::FpCategory {
        self.0 .0.classify()
    }
    fn floor(self) -> Self {
        let hi = self.0 .0.floor();
        if hi == self.0 .0 {
            Self(Quad::from_f64(hi).add_accurate(Quad::from_f64(self.0 .1.floor())))
        } else {
            dd(hi)
        }
    }
    fn ceil(self) -> Self {
        -(-self).floor()
    }
    fn round(self) -> Self {
        if self.0 .0 >= 0.0 {
            (self + dd(0.5)).floor()
        } else {
            (self - dd(0.5)).ceil()
        }
    }
    fn trunc(self) -> Self {
        if self.0 .0 >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Self {
        self - self.trunc()
    }
    fn abs(self) -> Self {
        Self(self.0.abs())
    }
    fn signum(self) -> Self {
        dd(self.0 .0.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.0 .0.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.0 .0.is_sign_negative()
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }
    fn recip(self) -> Self {
        Self(self.0.recip())
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self(Quad::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
    fn powf(self, n: Self) -> Self {
        if self.0 .0 == 0.0 {
            return if n.0 .0 > 0.0 {
                Self(Quad::ZERO)
            } else {
                Self::infinity()
            };
        }
        (n * self.ln()).exp()
    }
    fn sqrt(self) -> Self {
        if self.0 .0 < 0.0 {
            return Self::nan();
        }
        Self(self.0.sqrt())
    }
    fn exp(self) -> Self {
        Self(self.0.exp())
    }
    fn exp2(self) -> Self {
        (self * Self(Quad::LN_2)).exp()
    }
    fn ln(self) -> Self {
        Self(self.0.ln())
    }
    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }
    fn log2(self) -> Self {
        Self(self.0.log2())
    }
    fn log10(self) -> Self {
        Self(self.0.log10())
    }
    fn max(self, other: Self) -> Self {
        if self.is_nan() || other > self {
            other
        } else {
            self
        }
    }
    fn min(self, other: Self) -> Self {
        if self.is_nan() || other < self {
            other
        } else {
            self
        }
    }
    fn abs_sub(self, other: Self) -> Self {
        (self - other).max(Self(Quad::ZERO))
    }
    fn cbrt(self) -> Self {
        let r = self.abs().powf(dd(1.0) / dd(3.0));
        if self.0 .0 < 0.0 {
            -r
        } else {
            r
        }
    }
    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }
    fn sin(self) -> Self {
        self.via_f64(f64::sin)
    }
    fn cos(self) -> Self {
        self.via_f64(f64::cos)
    }
    fn tan(self) -> Self {
        self.via_f64(f64::tan)
    }
    fn asin(self) -> Self {
        self.via_f64(f64::asin)
    }
    fn acos(self) -> Self {
        self.via_f64(f64::acos)
    }
    fn atan(self) -> Self {
        self.via_f64(f64::atan)
    }
    fn atan2(self, other: Self) -> Self {
        dd(self.0 .0.atan2(other.0 .0))
    }
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
    fn exp_m1(self) -> Self {
        self.exp() - Self(Quad::ONE)
    }
    fn ln_1p(self) -> Self {
        (self + Self(Quad::ONE)).ln()
    }
    fn sinh(self) -> Self {
        (self.exp() - (-self).exp()) / dd(2.0)
    }
    fn cosh(self) -> Self {
        (self.exp() + (-self).exp()) / dd(2.0)
    }
    fn tanh(self) -> Self {
        let e = (self + self).exp();
        (e - Self(Quad::ONE)) / (e + Self(Quad::ONE))
    }
    fn asinh(self) -> Self {
        (self + (self * self + Self(Quad::ONE)).sqrt()).ln()
    }
    fn acosh(self) -> Self {
        (self + (self * self - Self(Quad::ONE)).sqrt()).ln()
    }
    fn atanh(self) -> Self {
        ((Self(Quad::ONE) + self) / (Self(Quad::ONE) - self)).ln() / dd(2.0)
    }
    fn integer_decode(self) -> (u64, i16, i8) {
        Float::integer_decode(self.0 .0)
    }
}
