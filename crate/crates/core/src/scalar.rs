//! Scalar abstraction shared by the exact (rational) and numeric (float) modes.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Exact rational number, always reduced with a positive denominator.
pub type Rational = BigRational;

/// Largest prime tried when factoring a rational for symbolic logarithms.
const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

/// Numeric scalar used for coordinates, slopes and masses.
///
/// Exact arithmetic (`Rational`) certifies equalities and containments;
/// float arithmetic is admitted for numeric mode and every verdict built on
/// it is downgraded by the reporting layer.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// True when arithmetic is exact.
    const EXACT: bool;

    /// Totally ordered identity key. Exact for rationals, quantized for floats.
    type Key: Ord + Hash + Clone + Debug + Send + Sync;

    fn key(&self) -> Self::Key;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// Nearest representable value to a float (exact binary value for rationals).
    fn from_f64_lossy(x: f64) -> Self;

    /// Exact square root when it exists in this scalar type.
    fn sqrt_checked(&self) -> Option<Self>;

    /// Canonical text form: `p/q` for rationals, shortest round-trip for floats.
    fn render(&self) -> String;

    /// Prime factorisation of `|self|` as (prime, exponent) pairs, when the
    /// value is a rational whose factors are small enough to find.
    fn prime_factors(&self) -> Option<Vec<(u64, i64)>>;

    /// Comparison tolerance used in numeric mode (zero when exact).
    fn tolerance() -> f64;

    /// Short form used in report witnesses (`1/2`, `3`).
    fn render_compact(&self) -> String {
        self.render()
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// Identity comparison through [`Scalar::key`].
    fn same(&self, other: &Self) -> bool {
        self.key() == other.key()
    }

    /// `self <= other`, treating key-equal values as equal.
    fn le_tol(&self, other: &Self) -> bool {
        self <= other || self.same(other)
    }

    /// `self < other` with key-equal values treated as equal.
    fn lt_tol(&self, other: &Self) -> bool {
        self < other && !self.same(other)
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if b < a {
            b.clone()
        } else {
            a.clone()
        }
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if b > a {
            b.clone()
        } else {
            a.clone()
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    type Key = Rational;

    fn key(&self) -> Rational {
        self.clone()
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rational::new(n, d))
    }

    fn render(&self) -> String {
        format_rational(self)
    }

    fn render_compact(&self) -> String {
        format_compact(self)
    }

    fn prime_factors(&self) -> Option<Vec<(u64, i64)>> {
        if self.is_zero() {
            return None;
        }
        let num = self.numer().abs().to_u64()?;
        let den = self.denom().to_u64()?;
        let mut out = std::collections::BTreeMap::new();
        for (p, e) in factor_u64(num)? {
            *out.entry(p).or_insert(0) += e;
        }
        for (p, e) in factor_u64(den)? {
            *out.entry(p).or_insert(0) -= e;
        }
        Some(out.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    fn tolerance() -> f64 {
        0.0
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            type Key = i64;

            fn key(&self) -> i64 {
                (f64::from(*self) / $tol).round() as i64
            }

            fn from_rational(r: &Rational) -> Self {
                ratio_to_f64(r) as $t
            }

            fn to_f64(&self) -> f64 {
                f64::from(*self)
            }

            fn from_f64_lossy(x: f64) -> Self {
                x as $t
            }

            fn sqrt_checked(&self) -> Option<Self> {
                (*self >= 0.0).then(|| self.sqrt())
            }

            fn render(&self) -> String {
                format!("{:?}", self)
            }

            fn prime_factors(&self) -> Option<Vec<(u64, i64)>> {
                None
            }

            fn tolerance() -> f64 {
                $tol
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

fn ratio_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        // Huge numerators/denominators: shift both down to a common scale.
        _ => {
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

fn factor_u64(mut n: u64) -> Option<Vec<(u64, i64)>> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if p > TRIAL_DIVISION_LIMIT {
            return None;
        }
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    Some(out)
}

/// Formats a rational as `numerator/denominator` in lowest terms.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Formats a rational without the `/1` of integers (report witnesses).
pub fn format_compact(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format_rational(r)
    }
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n =
        BigInt::parse_bytes(n.as_bytes(), 10).ok_or_else(|| format!("bad numerator in `{s}`"))?;
    let d =
        BigInt::parse_bytes(d.as_bytes(), 10).ok_or_else(|| format!("bad denominator in `{s}`"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    if d.is_negative() {
        return Err(format!("negative denominator in `{s}`"));
    }
    Ok(Rational::new(n, d))
}

/// Shorthand for building small rationals in code and tests.
pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `2^e` for possibly negative `e`.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Smallest `e` with `x <= 2^e`, for positive `x`.
pub fn dyadic_exponent<S: Scalar>(x: &S) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let mut e = x.to_f64().log2().ceil() as i64;
    while *x > S::from_rational(&pow2(e)) {
        e += 1;
    }
    while *x <= S::from_rational(&pow2(e - 1)) {
        e -= 1;
    }
    Some(e)
}

/// `2^e` upper bound rendering used in report records (`0` for zero).
pub fn render_dyadic_bound<S: Scalar>(x: &S) -> String {
    dyadic_exponent(x).map_or_else(|| "0".to_string(), |e| format!("2^{e}"))
}
