//! Coefficient scalars: exact rationals and complex floats behind one trait.
//!
//! Two exact backings are provided. [`Q128`] keeps numerator/denominator in
//! `i128` with checked arithmetic (any overflow panics loudly, it never
//! wraps) and is what the oscillator-algebra sweeps run on. [`BigRational`]
//! has unbounded integers and is used where elimination makes entries grow.
//! [`Complex64`] is the float instantiation; comparisons against zero go
//! through an explicit tolerance supplied by the caller.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Common interface for coefficient arithmetic.
///
/// `is_zero` is an exact test; float code that needs tolerant comparisons
/// uses `abs_approx` against a threshold instead.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Complex conjugate; identity on the rational backings.
    fn conj(&self) -> Self;

    fn is_zero(&self) -> bool;

    /// Magnitude estimate, used for pivot selection and reporting.
    /// Exact for floats, a double approximation for rationals.
    fn abs_approx(&self) -> f64;

    /// Sign of the real part (pivots of hermitian forms are real); exact
    /// on the rational backings.
    fn real_sign(&self) -> i32;

    /// Whether this instantiation is exact (no rounding anywhere).
    fn exact() -> bool;

    /// Exact value as a `BigRational`, when the backing is rational.
    fn to_rational(&self) -> Option<BigRational>;

    fn from_rational(r: &BigRational) -> Self;
}

/// Exact rational on `i128`, always reduced, denominator positive.
///
/// All arithmetic is overflow-checked. The oscillator sweeps stay dozens of
/// orders of magnitude below the `i128` range, so a panic here means a bug,
/// not an expected condition; the elimination-heavy code paths use
/// `BigRational` and never hit this type.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Q128 {
    num: i128,
    den: i128,
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Q128 {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd_i128(num, den);
        let (mut n, mut d) = if g == 0 { (0, 1) } else { (num / g, den / g) };
        if d < 0 {
            n = n.checked_neg().expect("Q128 overflow");
            d = d.checked_neg().expect("Q128 overflow");
        }
        Q128 { num: n, den: d }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    fn checked_add(self, o: Self) -> Self {
        let n1 = self.num.checked_mul(o.den).expect("Q128 overflow");
        let n2 = o.num.checked_mul(self.den).expect("Q128 overflow");
        Q128::new(
            n1.checked_add(n2).expect("Q128 overflow"),
            self.den.checked_mul(o.den).expect("Q128 overflow"),
        )
    }

    fn checked_mul(self, o: Self) -> Self {
        // Cross-reduce first to keep intermediates small.
        let g1 = gcd_i128(self.num, o.den);
        let g2 = gcd_i128(o.num, self.den);
        let (a, d2) = (self.num / g1, o.den / g1);
        let (b, d1) = (o.num / g2, self.den / g2);
        Q128::new(
            a.checked_mul(b).expect("Q128 overflow"),
            d1.checked_mul(d2).expect("Q128 overflow"),
        )
    }
}

impl fmt::Debug for Q128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Display for Q128 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Add for Q128 {
    type Output = Q128;
    fn add(self, o: Q128) -> Q128 {
        self.checked_add(o)
    }
}

impl Sub for Q128 {
    type Output = Q128;
    fn sub(self, o: Q128) -> Q128 {
        self.checked_add(-o)
    }
}

impl Mul for Q128 {
    type Output = Q128;
    fn mul(self, o: Q128) -> Q128 {
        self.checked_mul(o)
    }
}

impl Div for Q128 {
    type Output = Q128;
    fn div(self, o: Q128) -> Q128 {
        assert!(o.num != 0, "Q128 division by zero");
        self.checked_mul(Q128 {
            num: o.den * o.num.signum(),
            den: o.num.abs(),
        })
    }
}

impl Neg for Q128 {
    type Output = Q128;
    fn neg(self) -> Q128 {
        Q128 {
            num: self.num.checked_neg().expect("Q128 overflow"),
            den: self.den,
        }
    }
}

impl AddAssign for Q128 {
    fn add_assign(&mut self, o: Q128) {
        *self = *self + o;
    }
}

impl SubAssign for Q128 {
    fn sub_assign(&mut self, o: Q128) {
        *self = *self - o;
    }
}

impl MulAssign for Q128 {
    fn mul_assign(&mut self, o: Q128) {
        *self = *self * o;
    }
}

impl Scalar for Q128 {
    fn zero() -> Self {
        Q128 { num: 0, den: 1 }
    }
    fn one() -> Self {
        Q128 { num: 1, den: 1 }
    }
    fn from_int(v: i64) -> Self {
        Q128 {
            num: v as i128,
            den: 1,
        }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Q128::new(num as i128, den as i128)
    }
    fn conj(&self) -> Self {
        *self
    }
    fn is_zero(&self) -> bool {
        self.num == 0
    }
    fn abs_approx(&self) -> f64 {
        (self.num as f64 / self.den as f64).abs()
    }
    fn real_sign(&self) -> i32 {
        self.num.signum() as i32
    }
    fn exact() -> bool {
        true
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(BigRational::new(
            BigInt::from(self.num),
            BigInt::from(self.den),
        ))
    }
    fn from_rational(r: &BigRational) -> Self {
        let n = r.numer().to_i128().expect("rational numerator exceeds i128");
        let d = r.denom().to_i128().expect("rational denominator exceeds i128");
        Q128::new(n, d)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_approx(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
    fn real_sign(&self) -> i32 {
        if Zero::is_zero(self) {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
    fn exact() -> bool {
        true
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_int(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn abs_approx(&self) -> f64 {
        self.norm()
    }
    fn real_sign(&self) -> i32 {
        if self.re > 0.0 {
            1
        } else if self.re < 0.0 {
            -1
        } else {
            0
        }
    }
    fn exact() -> bool {
        false
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex64::new(r.to_f64().expect("rational out of f64 range"), 0.0)
    }
}
