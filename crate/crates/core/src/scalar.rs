//! Exact scalars over the tower ℚ ⊆ ℚ(√d) ⊆ ℚ(√d)(i).
//!
//! A [`Scalar`] is stored as `a + b√d + c·i + e·i√d` with rational components.
//! The radicand `d` travels with the value and is reset to zero whenever both
//! surd components vanish, so equality is plain componentwise comparison.
//! Combining two values that carry different radicands is a logic error and
//! panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Q = BigRational;

/// Build a rational from an integer.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Build the rational `num / den`.
pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// `num/den` rendering used everywhere a rational crosses the tool boundary.
pub fn format_rational(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse `n`, `-n` or `n/m`.
pub fn parse_rational(s: &str) -> Result<Q, ScalarParseError> {
    let s = s.trim();
    let bad = || ScalarParseError(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// The exact fields the linear algebra and exterior algebra run over.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
{
    fn from_rational(x: Q) -> Self;

    /// `Some` when the value lies in ℚ.
    fn to_rational(&self) -> Option<Q>;

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out *= other;
        out
    }

    fn from_int(n: i64) -> Self {
        Self::from_rational(q(n))
    }

    /// Multiplicative inverse; panics on zero.
    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }

    /// Canonical serialization (`num/den` for rationals).
    fn canonical_text(&self) -> String {
        self.to_string()
    }
}

impl Field for Q {
    fn from_rational(x: Q) -> Self {
        x
    }

    fn to_rational(&self) -> Option<Q> {
        Some(self.clone())
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn inv(&self) -> Self {
        self.recip()
    }

    fn canonical_text(&self) -> String {
        format_rational(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse scalar literal `{0}`")]
pub struct ScalarParseError(pub String);

/// Tower level of a scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Rational,
    Quadratic,
    Gaussian,
}

/// Element of ℚ(√d)(i): `a + b√d + c·i + e·i√d`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    a: Q,
    b: Q,
    c: Q,
    e: Q,
    d: u64,
}

fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

fn join_radicand(x: u64, y: u64) -> u64 {
    match (x, y) {
        (0, y) => y,
        (x, 0) => x,
        (x, y) if x == y => x,
        (x, y) => panic!("scalars over different quadratic fields: sqrt({x}) and sqrt({y})"),
    }
}

impl Scalar {
    pub fn new(a: Q, b: Q, c: Q, e: Q, d: u64) -> Self {
        if (!b.is_zero() || !e.is_zero()) && !is_square_free(d) {
            panic!("radicand {d} is not a square-free integer > 1");
        }
        let mut s = Scalar { a, b, c, e, d };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.b.is_zero() && self.e.is_zero() {
            self.d = 0;
        }
    }

    pub fn rational(x: Q) -> Self {
        Scalar { a: x, b: Q::zero(), c: Q::zero(), e: Q::zero(), d: 0 }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(q(n))
    }

    /// `√d`.
    pub fn sqrt(d: u64) -> Self {
        Self::new(Q::zero(), Q::one(), Q::zero(), Q::zero(), d)
    }

    /// `x + y√d`.
    pub fn quadratic(x: Q, y: Q, d: u64) -> Self {
        Self::new(x, y, Q::zero(), Q::zero(), d)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar { a: Q::zero(), b: Q::zero(), c: Q::one(), e: Q::zero(), d: 0 }
    }

    pub fn components(&self) -> (&Q, &Q, &Q, &Q) {
        (&self.a, &self.b, &self.c, &self.e)
    }

    pub fn radicand(&self) -> Option<u64> {
        (self.d != 0).then_some(self.d)
    }

    pub fn level(&self) -> Level {
        if !self.c.is_zero() || !self.e.is_zero() {
            Level::Gaussian
        } else if !self.b.is_zero() {
            Level::Quadratic
        } else {
            Level::Rational
        }
    }

    pub fn is_real(&self) -> bool {
        self.c.is_zero() && self.e.is_zero()
    }

    pub fn re(&self) -> Scalar {
        Scalar::new(self.a.clone(), self.b.clone(), Q::zero(), Q::zero(), self.d)
    }

    pub fn im(&self) -> Scalar {
        Scalar::new(self.c.clone(), self.e.clone(), Q::zero(), Q::zero(), self.d)
    }

    /// Complex conjugate (`i ↦ −i`, `√d` fixed).
    pub fn conj(&self) -> Scalar {
        Scalar { a: self.a.clone(), b: self.b.clone(), c: -&self.c, e: -&self.e, d: self.d }
    }

    /// Sign of a real scalar under the embedding `√d > 0`; `None` for non-real input.
    pub fn sign(&self) -> Option<Ordering> {
        if !self.is_real() {
            return None;
        }
        Some(sign_quadratic(&self.a, &self.b, self.d))
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Some(Ordering::Greater)
    }

    /// Approximate value of a real scalar, for diagnostics only.
    pub fn to_f64(&self) -> Option<f64> {
        if !self.is_real() {
            return None;
        }
        let a = self.a.to_f64()?;
        let b = self.b.to_f64()?;
        Some(a + b * (self.d as f64).sqrt())
    }
}

/// Exact sign of `a + b√d`.
fn sign_quadratic(a: &Q, b: &Q, d: u64) -> Ordering {
    let sa = a.cmp(&Q::zero());
    let sb = b.cmp(&Q::zero());
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    // opposite signs: the larger square wins
    let a2 = a * a;
    let b2d = b * b * Q::from_integer(BigInt::from(d));
    match a2.cmp(&b2d) {
        Ordering::Greater => sa,
        _ => sb,
    }
}

fn quad_mul(x: (&Q, &Q), y: (&Q, &Q), d: u64) -> (Q, Q) {
    let dq = Q::from_integer(BigInt::from(d));
    (x.0 * y.0 + x.1 * y.1 * dq, x.0 * y.1 + x.1 * y.0)
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Zero for Scalar {
    fn zero() -> Self {
        Scalar::rational(Q::zero())
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.e.is_zero()
    }
}

impl One for Scalar {
    fn one() -> Self {
        Scalar::rational(Q::one())
    }
}

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        Scalar { a: -self.a, b: -self.b, c: -self.c, e: -self.e, d: self.d }
    }
}

impl<'a> AddAssign<&'a Scalar> for Scalar {
    fn add_assign(&mut self, o: &'a Scalar) {
        self.d = join_radicand(self.d, o.d);
        self.a += &o.a;
        self.b += &o.b;
        self.c += &o.c;
        self.e += &o.e;
        self.normalize();
    }
}

impl<'a> SubAssign<&'a Scalar> for Scalar {
    fn sub_assign(&mut self, o: &'a Scalar) {
        self.d = join_radicand(self.d, o.d);
        self.a -= &o.a;
        self.b -= &o.b;
        self.c -= &o.c;
        self.e -= &o.e;
        self.normalize();
    }
}

impl<'a> MulAssign<&'a Scalar> for Scalar {
    fn mul_assign(&mut self, o: &'a Scalar) {
        *self = &*self * o;
    }
}

impl<'a, 'b> Mul<&'b Scalar> for &'a Scalar {
    type Output = Scalar;

    fn mul(self, o: &'b Scalar) -> Scalar {
        let d = join_radicand(self.d, o.d);
        if self.is_real() && o.is_real() {
            let (a, b) = quad_mul((&self.a, &self.b), (&o.a, &o.b), d);
            return Scalar::new(a, b, Q::zero(), Q::zero(), d);
        }
        // (x + iy)(x' + iy') with x, y, x', y' in ℚ(√d)
        let xx = quad_mul((&self.a, &self.b), (&o.a, &o.b), d);
        let yy = quad_mul((&self.c, &self.e), (&o.c, &o.e), d);
        let xy = quad_mul((&self.a, &self.b), (&o.c, &o.e), d);
        let yx = quad_mul((&self.c, &self.e), (&o.a, &o.b), d);
        Scalar::new(xx.0 - yy.0, xx.1 - yy.1, xy.0 + yx.0, xy.1 + yx.1, d)
    }
}

impl Add for Scalar {
    type Output = Scalar;

    fn add(mut self, o: Scalar) -> Scalar {
        self += &o;
        self
    }
}

impl Sub for Scalar {
    type Output = Scalar;

    fn sub(mut self, o: Scalar) -> Scalar {
        self -= &o;
        self
    }
}

impl Mul for Scalar {
    type Output = Scalar;

    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Div for Scalar {
    type Output = Scalar;

    fn div(self, o: Scalar) -> Scalar {
        assert!(!o.is_zero(), "division by zero scalar");
        // 1/(x + iy) = (x − iy)/(x² + y²), then 1/(u + v√d) = (u − v√d)/(u² − v²d)
        let norm = &o * &o.conj();
        let (u, v) = (&norm.a, &norm.b);
        let dq = Q::from_integer(BigInt::from(norm.d));
        let den = u * u - v * v * dq;
        let norm_inv = Scalar::new(u / &den, -(v / &den), Q::zero(), Q::zero(), norm.d);
        &(&self * &o.conj()) * &norm_inv
    }
}

impl Field for Scalar {
    fn from_rational(x: Q) -> Self {
        Scalar::rational(x)
    }

    fn to_rational(&self) -> Option<Q> {
        (self.level() == Level::Rational).then(|| self.a.clone())
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

impl From<Q> for Scalar {
    fn from(x: Q) -> Self {
        Scalar::rational(x)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl fmt::Display for Scalar {
    /// `a/b+c/e*sqrt(d)+f/g*i+h/k*i*sqrt(d)`, zero components omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: [(&Q, &str); 4] = [
            (&self.a, ""),
            (&self.b, "*sqrt"),
            (&self.c, "*i"),
            (&self.e, "*i*sqrt"),
        ];
        let mut first = true;
        for (coef, suffix) in parts {
            if coef.is_zero() {
                continue;
            }
            let mut text = format_rational(coef);
            if suffix.ends_with("sqrt") {
                text = format!("{text}{suffix}({})", self.d);
            } else {
                text.push_str(suffix);
            }
            if !first && !text.starts_with('-') {
                f.write_str("+")?;
            }
            f.write_str(&text)?;
            first = false;
        }
        if first {
            f.write_str("0/1")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = ScalarParseError;

    /// Sums of terms, each a `*`-product of a rational, `i` and `sqrt(d)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScalarParseError(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        let mut depth = 0;
        for (k, &ch) in bytes.iter().enumerate() {
            match ch {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if k > start && depth == 0 && bytes[k - 1] != b'/' && bytes[k - 1] != b'*' => {
                    terms.push(&compact[start..k]);
                    start = k;
                }
                _ => {}
            }
        }
        terms.push(&compact[start..]);

        let mut total = Scalar::zero();
        for term in terms {
            let (negative, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term.strip_prefix('+').unwrap_or(term)),
            };
            if body.is_empty() {
                return Err(bad());
            }
            let mut value = Scalar::one();
            for factor in body.split('*') {
                let factor_value = if factor == "i" {
                    Scalar::i()
                } else if let Some(inner) = factor.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
                    let d: u64 = inner.parse().map_err(|_| bad())?;
                    if !is_square_free(d) {
                        return Err(bad());
                    }
                    Scalar::sqrt(d)
                } else {
                    Scalar::rational(parse_rational(factor).map_err(|_| bad())?)
                };
                value *= &factor_value;
            }
            if negative {
                value = -value;
            }
            total += &value;
        }
        Ok(total)
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Binomial coefficient `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Q>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Whether a rational is an integer.
pub fn is_integral(x: &Q) -> bool {
    x.is_integer()
}

/// `|x|` for rationals, re-exported for convenience in call sites that avoid `Signed`.
pub fn abs(x: &Q) -> Q {
    x.abs()
}
