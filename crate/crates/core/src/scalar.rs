//! Coefficient fields.
//!
//! [`Scalar`] is an exact element of ℚ or of a real quadratic field ℚ(√d), or a
//! tolerance-tagged float. Every geometric type in the crate is generic over
//! the [`Field`] trait, which `Scalar`, `f64` and `f32` implement.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Default tolerance attached to approximate values.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("mixed quadratic fields Q(sqrt {0}) and Q(sqrt {1})")]
    FieldMismatch(u64, u64),
    #[error("{0} is not a square-free integer >= 2")]
    NotSquareFree(u64),
    #[error("cannot parse scalar {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("non-finite approximate value")]
    NonFinite,
}

fn parse_err(input: &str, reason: impl Into<String>) -> ScalarError {
    ScalarError::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Sign of a scalar. Approximate values inside their tolerance band are `Zero`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    fn of_ordering(o: Ordering) -> Sign {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    fn of_rational(q: &BigRational) -> Sign {
        Sign::of_ordering(q.numer().sign().cmp(&num_bigint::Sign::NoSign))
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        match self.to_i8() * rhs.to_i8() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// Rational coordinates of an exact value `a + b√d` in the basis `{1, √d}`.
/// `d` is `None` for rationals (then `b = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadCoords {
    pub a: BigRational,
    pub b: BigRational,
    pub d: Option<u64>,
}

/// The coefficient field abstraction.
///
/// Arithmetic is fallible because exact quadratic values from different
/// fields must not be mixed. Floating implementations never fail except on
/// inversion of zero.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn try_add(&self, rhs: &Self) -> Result<Self, ScalarError>;
    fn try_mul(&self, rhs: &Self) -> Result<Self, ScalarError>;
    fn try_inv(&self) -> Result<Self, ScalarError>;
    fn sign(&self) -> Sign;
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// True when equality and sign are decided without tolerance.
    fn is_exact(&self) -> bool;
    /// Basis coordinates for exact values; `None` for approximate ones.
    fn coords(&self) -> Option<QuadCoords>;
    fn parse_scalar(s: &str) -> Result<Self, ScalarError>;

    fn try_sub(&self, rhs: &Self) -> Result<Self, ScalarError> {
        self.try_add(&-rhs.clone())
    }

    fn try_div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        self.try_mul(&rhs.try_inv()?)
    }

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    fn abs_val(&self) -> Self {
        if self.sign() == Sign::Negative {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Sign of `self - rhs`.
    fn compare(&self, rhs: &Self) -> Result<Sign, ScalarError> {
        Ok(self.try_sub(rhs)?.sign())
    }
}

/// Exact element of ℚ or ℚ(√d), or a float with an explicit tolerance.
#[derive(Clone)]
pub enum Scalar {
    Rational(BigRational),
    /// `a + b√d` with `b ≠ 0` and `d` square-free, `d ≥ 2`.
    Quadratic {
        a: BigRational,
        b: BigRational,
        d: u64,
    },
    Approx {
        value: f64,
        tol: f64,
    },
}

pub fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Splits `n = k²·m` with `m` square-free (or `m = 1`).
fn square_part(n: u64) -> (u64, u64) {
    let mut k = 1u64;
    let mut m = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= p;
        }
        if e % 2 == 1 {
            m *= p;
        }
        p += 1;
    }
    (k, m * rest)
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    let (n, d) = (q.numer(), q.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // scale both down by the same power of two
            let shift = n.bits().max(d.bits()).saturating_sub(1000);
            let a = (n >> shift as usize).to_f64().unwrap_or(f64::NAN);
            let b = (d >> shift as usize).to_f64().unwrap_or(f64::NAN);
            a / b
        }
    }
}

fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

impl Scalar {
    pub fn int(n: i64) -> Scalar {
        Scalar::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; panics when `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Scalar {
        Scalar::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(q: BigRational) -> Scalar {
        Scalar::Rational(q)
    }

    /// `a + b√d`, normalized to `Rational` when `b = 0`.
    pub fn quadratic(a: BigRational, b: BigRational, d: u64) -> Result<Scalar, ScalarError> {
        if !is_square_free(d) {
            return Err(ScalarError::NotSquareFree(d));
        }
        if b.is_zero() {
            Ok(Scalar::Rational(a))
        } else {
            Ok(Scalar::Quadratic { a, b, d })
        }
    }

    /// `√n` for a non-negative integer, with square factors pulled out.
    pub fn sqrt(n: u64) -> Scalar {
        let (k, m) = square_part(n);
        if n == 0 {
            return Scalar::int(0);
        }
        let k = BigRational::from_integer(BigInt::from(k));
        if m == 1 {
            Scalar::Rational(k)
        } else {
            Scalar::Quadratic {
                a: BigRational::zero(),
                b: k,
                d: m,
            }
        }
    }

    pub fn approx(value: f64, tol: f64) -> Result<Scalar, ScalarError> {
        if !value.is_finite() || !tol.is_finite() || tol < 0.0 {
            return Err(ScalarError::NonFinite);
        }
        Ok(Scalar::Approx { value, tol })
    }

    /// The radicand `d` of a quadratic value.
    pub fn field(&self) -> Option<u64> {
        match self {
            Scalar::Quadratic { d, .. } => Some(*d),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            _ => None,
        }
    }

    /// Convert to the approximate variant, attaching one ulp of rounding.
    pub fn to_approx(&self) -> Scalar {
        match self {
            Scalar::Approx { .. } => self.clone(),
            _ => {
                let v = self.to_f64();
                Scalar::Approx {
                    value: v,
                    tol: v.abs() * f64::EPSILON,
                }
            }
        }
    }

    fn approx_parts(&self) -> (f64, f64) {
        match self {
            Scalar::Approx { value, tol } => (*value, *tol),
            _ => {
                let v = self.to_f64();
                (v, v.abs() * f64::EPSILON)
            }
        }
    }

    /// `(a, b)` with `b = 0` for rationals; `None` for approximate values.
    fn exact_parts(&self) -> Option<(BigRational, BigRational, Option<u64>)> {
        match self {
            Scalar::Rational(q) => Some((q.clone(), BigRational::zero(), None)),
            Scalar::Quadratic { a, b, d } => Some((a.clone(), b.clone(), Some(*d))),
            Scalar::Approx { .. } => None,
        }
    }

    fn common_field(x: Option<u64>, y: Option<u64>) -> Result<Option<u64>, ScalarError> {
        match (x, y) {
            (Some(p), Some(q)) if p != q => Err(ScalarError::FieldMismatch(p, q)),
            (Some(p), _) | (_, Some(p)) => Ok(Some(p)),
            (None, None) => Ok(None),
        }
    }

    fn build(a: BigRational, b: BigRational, d: Option<u64>) -> Scalar {
        match d {
            Some(d) if !b.is_zero() => Scalar::Quadratic { a, b, d },
            _ => Scalar::Rational(a),
        }
    }
}

impl Field for Scalar {
    fn try_add(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self.exact_parts(), rhs.exact_parts()) {
            (Some((a, b, d)), Some((a2, b2, d2))) => {
                let d = Scalar::common_field(d, d2)?;
                Ok(Scalar::build(a + a2, b + b2, d))
            }
            _ => {
                let (x, tx) = self.approx_parts();
                let (y, ty) = rhs.approx_parts();
                let v = x + y;
                Scalar::approx(v, tx + ty + v.abs() * f64::EPSILON)
            }
        }
    }

    fn try_mul(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self.exact_parts(), rhs.exact_parts()) {
            (Some((a, b, d)), Some((a2, b2, d2))) => {
                let field = Scalar::common_field(d, d2)?;
                let dd = BigRational::from_integer(BigInt::from(field.unwrap_or(0)));
                let re = &a * &a2 + &b * &b2 * dd;
                let im = &a * &b2 + &a2 * &b;
                Ok(Scalar::build(re, im, field))
            }
            _ => {
                let (x, tx) = self.approx_parts();
                let (y, ty) = rhs.approx_parts();
                let v = x * y;
                Scalar::approx(
                    v,
                    x.abs() * ty + y.abs() * tx + tx * ty + v.abs() * f64::EPSILON,
                )
            }
        }
    }

    fn try_inv(&self) -> Result<Scalar, ScalarError> {
        match self {
            Scalar::Rational(q) => {
                if q.is_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(Scalar::Rational(q.recip()))
                }
            }
            Scalar::Quadratic { a, b, d } => {
                let dd = BigRational::from_integer(BigInt::from(*d));
                let norm = a * a - b * b * dd;
                // norm is nonzero: d is not a rational square
                Ok(Scalar::Quadratic {
                    a: a / &norm,
                    b: -(b / &norm),
                    d: *d,
                })
            }
            Scalar::Approx { value, tol } => {
                let m = value.abs();
                if m <= *tol || m == 0.0 {
                    return Err(ScalarError::DivisionByZero);
                }
                let v = 1.0 / value;
                Scalar::approx(v, tol / (m * (m - tol)) + v.abs() * f64::EPSILON)
            }
        }
    }

    fn sign(&self) -> Sign {
        match self {
            Scalar::Rational(q) => Sign::of_rational(q),
            Scalar::Quadratic { a, b, d } => {
                let sa = Sign::of_rational(a);
                let sb = Sign::of_rational(b);
                if sa == sb || sb == Sign::Zero {
                    return sa;
                }
                if sa == Sign::Zero {
                    return sb;
                }
                // opposite signs: compare a² against b²d
                let dd = BigRational::from_integer(BigInt::from(*d));
                let lhs = a * a;
                let rhs = b * b * dd;
                match lhs.cmp(&rhs) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    Ordering::Equal => Sign::Zero,
                }
            }
            Scalar::Approx { value, tol } => {
                if value.abs() <= *tol {
                    Sign::Zero
                } else if *value > 0.0 {
                    Sign::Positive
                } else {
                    Sign::Negative
                }
            }
        }
    }

    fn from_rational(q: &BigRational) -> Scalar {
        Scalar::Rational(q.clone())
    }

    fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(q) => rational_to_f64(q),
            Scalar::Quadratic { a, b, d } => {
                let fa = rational_to_f64(a);
                let fb = rational_to_f64(b);
                let root = (*d as f64).sqrt();
                if fa.signum() == fb.signum() || fa == 0.0 {
                    fa + fb * root
                } else {
                    // a + b√d = (a² − b²d)/(a − b√d) avoids cancellation
                    let dd = BigRational::from_integer(BigInt::from(*d));
                    let norm = rational_to_f64(&(a * a - b * b * dd));
                    norm / (fa - fb * root)
                }
            }
            Scalar::Approx { value, .. } => *value,
        }
    }

    fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Approx { .. })
    }

    fn coords(&self) -> Option<QuadCoords> {
        self.exact_parts().map(|(a, b, d)| QuadCoords { a, b, d })
    }

    fn parse_scalar(s: &str) -> Result<Scalar, ScalarError> {
        s.parse()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Rational(x), Scalar::Rational(y)) => x == y,
            (
                Scalar::Quadratic { a, b, d },
                Scalar::Quadratic {
                    a: a2,
                    b: b2,
                    d: d2,
                },
            ) => d == d2 && a == a2 && b == b2,
            (Scalar::Rational(_), Scalar::Quadratic { .. })
            | (Scalar::Quadratic { .. }, Scalar::Rational(_)) => false,
            _ => {
                let (x, tx) = self.approx_parts();
                let (y, ty) = other.approx_parts();
                let tol = match (self.is_exact(), other.is_exact()) {
                    (false, false) => tx.max(ty),
                    (false, true) => tx,
                    _ => ty,
                };
                (x - y).abs() <= tol
            }
        }
    }
}

impl Zero for Scalar {
    fn zero() -> Scalar {
        Scalar::int(0)
    }
    fn is_zero(&self) -> bool {
        self.sign() == Sign::Zero
    }
}

impl One for Scalar {
    fn one() -> Scalar {
        Scalar::int(1)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Quadratic { a, b, d } => Scalar::Quadratic { a: -a, b: -b, d },
            Scalar::Approx { value, tol } => Scalar::Approx { value: -value, tol },
        }
    }
}

// Operator forms panic on mixed quadratic fields; use the `try_*` methods
// where operands may come from different fields.
impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.try_add(&rhs).expect("scalar addition")
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.try_sub(&rhs).expect("scalar subtraction")
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.try_mul(&rhs).expect("scalar multiplication")
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => f.write_str(&fmt_rational(q)),
            Scalar::Quadratic { a, b, d } => {
                let op = if b.is_negative() { '-' } else { '+' };
                write!(f, "({}{}{}√{})", fmt_rational(a), op, fmt_rational(&b.abs()), d)
            }
            Scalar::Approx { value, tol } => write!(f, "~{:?}±{:?}", value, tol),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Scalar {
    type Err = ScalarError;
    fn from_str(s: &str) -> Result<Scalar, ScalarError> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix('~') {
            let (v, tol) = match rest.split_once('±').or_else(|| rest.split_once("+-")) {
                Some((v, tol)) => (v, Some(tol)),
                None => (rest, None),
            };
            let value: f64 = v.trim().parse().map_err(|_| parse_err(s, "bad float"))?;
            let tol = match tol {
                Some(x) => x.trim().parse().map_err(|_| parse_err(s, "bad tolerance"))?,
                None => DEFAULT_TOL,
            };
            return Scalar::approx(value, tol).map_err(|_| parse_err(s, "non-finite"));
        }
        let mut p = ExprParser {
            src: s,
            chars: t.chars().collect(),
            pos: 0,
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(parse_err(s, format!("unexpected input at {}", p.pos)));
        }
        Ok(v)
    }
}

/// Recursive-descent parser for exact scalar expressions: integers, decimals,
/// `p/q`, `sqrt(n)` / `√n`, `+ - * /`, parentheses, unary minus, and
/// juxtaposition (`3/4√2` reads as `(3/4)·√2`).
struct ExprParser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn err(&self, reason: &str) -> ScalarError {
        parse_err(self.src, reason)
    }

    fn expr(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.try_add(&rhs)?;
                }
                Some('-') | Some('−') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = acc.try_sub(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Scalar, ScalarError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') | Some('·') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.try_mul(&rhs)?;
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.try_div(&rhs)?;
                }
                Some(c) if c == '(' || c == '√' || c == 's' || c.is_ascii_digit() => {
                    let rhs = self.unary()?;
                    acc = acc.try_mul(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some('-') | Some('−') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Scalar, ScalarError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some('√') => {
                self.pos += 1;
                self.radical()
            }
            Some('s') => {
                let word: String = self.chars[self.pos..].iter().take(4).collect();
                if word != "sqrt" {
                    return Err(self.err("expected sqrt"));
                }
                self.pos += 4;
                self.radical()
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            _ => Err(self.err("expected a number")),
        }
    }

    fn radical(&mut self) -> Result<Scalar, ScalarError> {
        let inner = if self.peek() == Some('(') {
            self.atom()?
        } else {
            self.number()?
        };
        let q = inner
            .as_rational()
            .filter(|q| q.is_integer() && !q.is_negative())
            .ok_or_else(|| self.err("sqrt needs a non-negative integer"))?;
        let n = q
            .numer()
            .to_u64()
            .ok_or_else(|| self.err("radicand too large"))?;
        Ok(Scalar::sqrt(n))
    }

    fn number(&mut self) -> Result<Scalar, ScalarError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.')
        {
            self.pos += 1;
        }
        let mut text: String = self.chars[start..self.pos].iter().collect();
        if text.is_empty() {
            return Err(self.err("expected digits"));
        }
        let mut exp: i32 = 0;
        if self.pos < self.chars.len() && (self.chars[self.pos] == 'e' || self.chars[self.pos] == 'E') {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1;
            if self.pos < self.chars.len() && (self.chars[self.pos] == '-' || self.chars[self.pos] == '+') {
                if self.chars[self.pos] == '-' {
                    sign = -1;
                }
                self.pos += 1;
            }
            let es = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if es == self.pos {
                self.pos = save;
            } else {
                let e: String = self.chars[es..self.pos].iter().collect();
                exp = sign * e.parse::<i32>().map_err(|_| self.err("bad exponent"))?;
            }
        }
        let mut scale: i32 = 0;
        if let Some(dot) = text.find('.') {
            scale = (text.len() - dot - 1) as i32;
            text.remove(dot);
        }
        if text.is_empty() || text.contains('.') {
            return Err(self.err("malformed number"));
        }
        let digits: BigInt = text.parse().map_err(|_| self.err("malformed number"))?;
        let p = exp - scale;
        let ten = BigInt::from(10);
        let q = if p >= 0 {
            BigRational::from_integer(digits * num_traits::pow(ten, p as usize))
        } else {
            BigRational::new(digits, num_traits::pow(ten, (-p) as usize))
        };
        Ok(Scalar::Rational(q))
    }
}

macro_rules! float_field {
    ($t:ty) => {
        impl Field for $t {
            fn try_add(&self, rhs: &$t) -> Result<$t, ScalarError> {
                Ok(self + rhs)
            }
            fn try_mul(&self, rhs: &$t) -> Result<$t, ScalarError> {
                Ok(self * rhs)
            }
            fn try_inv(&self) -> Result<$t, ScalarError> {
                if *self == 0.0 {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(1.0 / self)
                }
            }
            fn sign(&self) -> Sign {
                if *self > 0.0 {
                    Sign::Positive
                } else if *self < 0.0 {
                    Sign::Negative
                } else {
                    Sign::Zero
                }
            }
            fn from_rational(q: &BigRational) -> $t {
                rational_to_f64(q) as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn is_exact(&self) -> bool {
                false
            }
            fn coords(&self) -> Option<QuadCoords> {
                None
            }
            fn parse_scalar(s: &str) -> Result<$t, ScalarError> {
                match s.trim().parse::<$t>() {
                    Ok(v) => Ok(v),
                    Err(_) => Ok(Scalar::parse_scalar(s)?.to_f64() as $t),
                }
            }
        }
    };
}

float_field!(f64);
float_field!(f32);

/// Round-trip helper: an exact rational as the closest `Scalar::Approx`.
pub fn approx_from_f64(v: f64) -> Result<Scalar, ScalarError> {
    rational_from_f64(v).ok_or(ScalarError::NonFinite)?;
    Scalar::approx(v, DEFAULT_TOL)
}

#[cfg(test)]
pub(crate) fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
