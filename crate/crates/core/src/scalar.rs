//! Exact arithmetic over rational multiples of integer powers of pi.
//!
//! A [`PiScalar`] is a Laurent polynomial in pi with arbitrary-precision
//! rational coefficients, e.g. `64*pi^-1` or `5/18 + 1/12*pi^2`. All ring
//! operations are exact; floating-point only enters at the output boundary
//! through [`PiScalar::to_float`] and [`PiScalar::to_decimal`], which
//! substitute a truncation of a stored 120-digit value of pi.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Decimal digits of pi backing every float evaluation.
///
/// Truncating after `m <= 120` fractional digits yields a rational within
/// `10^-m` of pi, so a term `c*pi^k` evaluated with the truncation carries a
/// relative error below `|k| * 10^-m / 3`.
const PI_DIGITS: &str =
    "141592653589793238462643383279502884197169399375105820974944592307816406286208998628034825342117067982148086513282306647";

/// Extra truncation digits beyond the requested precision.
const GUARD_DIGITS: u32 = 10;

/// Default evaluation precision for quotients that leave the exact ring.
pub const DEFAULT_DIVISION_DIGITS: u32 = 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("non-monomial divisor (zero or multi-term)")]
    NonMonomialDivisor,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Exact scalar of the form `sum_k c_k * pi^k` with rational `c_k`.
///
/// Canonical form: no zero coefficients are stored, and every coefficient is
/// a reduced fraction with positive denominator (enforced by `BigRational`).
/// Equality is term-map equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiScalar {
    terms: BTreeMap<i64, BigRational>,
}

impl PiScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::pi_power(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The pi^0-graded scalar `p/q`.
    pub fn from_rational(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, ScalarError> {
        let q = q.into();
        if q.is_zero() {
            return Err(ScalarError::ZeroDenominator);
        }
        Ok(Self::from_big_rational(BigRational::new(p.into(), q)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::from_big_rational(BigRational::from_integer(n.into()))
    }

    pub fn from_big_rational(r: BigRational) -> Self {
        Self::monomial(0, r)
    }

    /// The monomial `1 * pi^k`.
    pub fn pi_power(k: i64) -> Self {
        Self::monomial(k, BigRational::one())
    }

    /// The monomial `coeff * pi^k`.
    pub fn monomial(k: i64, coeff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(k, coeff);
        }
        Self { terms }
    }

    /// Terms in ascending order of pi-exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(&k, c)| (k, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient at pi^k (zero if absent).
    pub fn coefficient(&self, k: i64) -> BigRational {
        self.terms.get(&k).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `Some((k, c))` iff the scalar is exactly one term `c * pi^k`.
    pub fn as_monomial(&self) -> Option<(i64, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(&k, c)| (k, c))
        } else {
            None
        }
    }

    fn insert_add(&mut self, k: i64, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    /// Multiply every coefficient by an exact rational.
    pub fn scale(&self, r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&k, c)| (k, c * r)).collect(),
        }
    }

    /// Exact quotient by a single-term divisor.
    ///
    /// Quotients by zero or by multi-term scalars leave the ring and are
    /// rejected; callers wanting those must evaluate to a float instead.
    pub fn div_by_monomial(&self, b: &Self) -> Result<Self, ScalarError> {
        let (kb, cb) = b.as_monomial().ok_or(ScalarError::NonMonomialDivisor)?;
        Ok(Self {
            terms: self.terms.iter().map(|(&k, c)| (k - kb, c / cb)).collect(),
        })
    }

    /// Truncation of pi to `digits` fractional decimal digits, as an exact
    /// rational. `digits` is clamped to the stored 120.
    fn pi_approx(digits: u32) -> BigRational {
        let digits = (digits as usize).min(PI_DIGITS.len());
        let mut s = String::with_capacity(digits + 1);
        s.push('3');
        s.push_str(&PI_DIGITS[..digits]);
        let numer: BigInt = s.parse().expect("pi digit table is numeric");
        let denom = BigInt::from(10u32).pow(digits as u32);
        BigRational::new(numer, denom)
    }

    /// Exact rational evaluation with pi replaced by a truncation carrying
    /// `digits + 10` fractional digits.
    ///
    /// The only error source is the pi truncation: the result is within
    /// `10^(1-digits)` relative of the true value for any scalar whose terms
    /// do not cancel catastrophically and whose exponents satisfy
    /// `|k| <= 10^9`.
    pub fn eval_rational(&self, digits: u32) -> BigRational {
        let pi = Self::pi_approx(digits.saturating_add(GUARD_DIGITS).min(120));
        let mut acc = BigRational::zero();
        for (&k, c) in &self.terms {
            acc += c * rational_pow(&pi, k);
        }
        acc
    }

    /// Floating evaluation with at least `digits` correct decimal digits
    /// (up to the limit of f64 for `digits > 15`).
    pub fn to_float(&self, digits: u32) -> f64 {
        let digits = digits.max(1);
        if self.is_zero() {
            return 0.0;
        }
        // Going through the decimal string avoids overflow for scalars whose
        // numerators exceed f64 range before division.
        self.to_decimal(digits.max(17))
            .parse::<f64>()
            .unwrap_or(f64::NAN)
    }

    /// f64 value at full double precision.
    pub fn to_f64(&self) -> f64 {
        self.to_float(17)
    }

    /// Decimal rendering with `digits` significant digits (round half up).
    ///
    /// Values with decimal exponent outside [-6, 20] are written in
    /// scientific notation `m.mmm...e+EE`.
    pub fn to_decimal(&self, digits: u32) -> String {
        let digits = digits.max(1);
        let r = self.eval_rational(digits);
        rational_to_decimal(&r, digits)
    }
}

/// `r^k` for integer `k` (negative allowed; `r` must be nonzero then).
fn rational_pow(r: &BigRational, k: i64) -> BigRational {
    if k == 0 {
        return BigRational::one();
    }
    let e = k.unsigned_abs() as u32;
    let p = BigRational::new(r.numer().pow(e), r.denom().pow(e));
    if k > 0 {
        p
    } else {
        p.recip()
    }
}

/// Decimal expansion of an exact rational with `digits` significant digits.
fn rational_to_decimal(r: &BigRational, digits: u32) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1) as i64;
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();

    // Decimal exponent e with 10^e <= |r| < 10^(e+1).
    let mut e = decimal_digits(&num) as i64 - decimal_digits(&den) as i64;
    if scale_cmp(&num, &den, e) == std::cmp::Ordering::Less {
        e -= 1;
    }

    // Mantissa: round(r / 10^(e - digits + 1)), half away from zero.
    let shift = e - digits + 1;
    let (n, d) = if shift >= 0 {
        (num, &den * BigInt::from(10u32).pow(shift as u32))
    } else {
        (&num * BigInt::from(10u32).pow((-shift) as u32), den)
    };
    let mant = (BigInt::from(2) * &n + &d) / (BigInt::from(2) * &d);
    let mut mant_str = mant.to_string();
    if mant_str.len() as i64 > digits {
        // 999.. rounded up to 1000..
        e += 1;
        mant_str = BigInt::from(10u32).pow(digits as u32 - 1).to_string();
    }
    debug_assert_eq!(mant_str.len() as i64, digits);

    let sign = if neg { "-" } else { "" };
    if (-6..=20).contains(&e) {
        let mut s = String::new();
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if int_len >= mant_str.len() {
                s.push_str(&mant_str);
                s.push_str(&"0".repeat(int_len - mant_str.len()));
            } else {
                s.push_str(&mant_str[..int_len]);
                s.push('.');
                s.push_str(&mant_str[int_len..]);
            }
        } else {
            s.push_str("0.");
            s.push_str(&"0".repeat((-e - 1) as usize));
            s.push_str(&mant_str);
        }
        // Trailing fractional zeros are kept: they encode the precision.
        format!("{sign}{s}")
    } else {
        let (first, rest) = mant_str.split_at(1);
        if rest.is_empty() {
            format!("{sign}{first}e{e}")
        } else {
            format!("{sign}{first}.{rest}e{e}")
        }
    }
}

/// Number of decimal digits of a nonnegative integer.
fn decimal_digits(n: &BigInt) -> u64 {
    if n.is_zero() {
        return 1;
    }
    let bits = n.bits();
    // log10(2) lower bound, then correct by direct comparison.
    let mut approx = ((bits as f64) * std::f64::consts::LOG10_2) as u64;
    if approx == 0 {
        approx = 1;
    }
    let mut p = BigInt::from(10u32).pow(approx as u32);
    while &p <= n {
        approx += 1;
        p *= 10;
    }
    approx
}

/// Compare num/den against 10^e.
fn scale_cmp(num: &BigInt, den: &BigInt, e: i64) -> std::cmp::Ordering {
    if e >= 0 {
        num.cmp(&(den * BigInt::from(10u32).pow(e as u32)))
    } else {
        (num * BigInt::from(10u32).pow((-e) as u32)).cmp(den)
    }
}

impl From<i64> for PiScalar {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigRational> for PiScalar {
    fn from(r: BigRational) -> Self {
        Self::from_big_rational(r)
    }
}

impl Add for &PiScalar {
    type Output = PiScalar;
    fn add(self, rhs: &PiScalar) -> PiScalar {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.insert_add(k, c);
        }
        out
    }
}

impl Sub for &PiScalar {
    type Output = PiScalar;
    fn sub(self, rhs: &PiScalar) -> PiScalar {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.insert_add(k, &-c.clone());
        }
        out
    }
}

impl Mul for &PiScalar {
    type Output = PiScalar;
    fn mul(self, rhs: &PiScalar) -> PiScalar {
        let mut out = PiScalar::zero();
        for (&ka, ca) in &self.terms {
            for (&kb, cb) in &rhs.terms {
                out.insert_add(ka + kb, &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &PiScalar {
    type Output = PiScalar;
    fn neg(self) -> PiScalar {
        PiScalar {
            terms: self.terms.iter().map(|(&k, c)| (k, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for PiScalar {
            type Output = PiScalar;
            fn $method(self, rhs: PiScalar) -> PiScalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&PiScalar> for PiScalar {
            type Output = PiScalar;
            fn $method(self, rhs: &PiScalar) -> PiScalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<PiScalar> for &PiScalar {
            type Output = PiScalar;
            fn $method(self, rhs: PiScalar) -> PiScalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for PiScalar {
    type Output = PiScalar;
    fn neg(self) -> PiScalar {
        -&self
    }
}

impl AddAssign<&PiScalar> for PiScalar {
    fn add_assign(&mut self, rhs: &PiScalar) {
        for (&k, c) in &rhs.terms {
            self.insert_add(k, c);
        }
    }
}

impl SubAssign<&PiScalar> for PiScalar {
    fn sub_assign(&mut self, rhs: &PiScalar) {
        for (&k, c) in &rhs.terms {
            self.insert_add(k, &-c.clone());
        }
    }
}

impl MulAssign<&PiScalar> for PiScalar {
    fn mul_assign(&mut self, rhs: &PiScalar) {
        *self = (&*self) * rhs;
    }
}

impl Sum for PiScalar {
    fn sum<I: Iterator<Item = PiScalar>>(iter: I) -> PiScalar {
        let mut acc = PiScalar::zero();
        for s in iter {
            acc += &s;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Canonical string form: `term ( ('+'|'-') term )*`,
// term = `p['/'q]['*pi^'k]`, terms emitted in descending pi-exponent.
// ---------------------------------------------------------------------------

impl fmt::Display for PiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (&k, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}", mag.numer())?;
            if !mag.denom().is_one() {
                write!(f, "/{}", mag.denom())?;
            }
            if k != 0 {
                write!(f, "*pi^{}", k)?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Self { input, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> ScalarError {
        ScalarError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.input.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn integer(&mut self, what: &str) -> Result<BigInt, ScalarError> {
        let start = self.pos;
        let mut chars = self.rest().char_indices().peekable();
        if let Some((_, '-')) = chars.peek() {
            chars.next();
        }
        let mut end = self.pos;
        let mut digits = 0usize;
        for (i, ch) in chars {
            if ch.is_ascii_digit() {
                digits += 1;
                end = start + i + 1;
            } else {
                break;
            }
        }
        if digits == 0 {
            return Err(self.err(format!("expected {what}")));
        }
        let text = &self.input[start..end];
        self.pos = end;
        text.parse::<BigInt>()
            .map_err(|e| self.err(format!("invalid {what}: {e}")))
    }

    fn unsigned(&mut self, what: &str) -> Result<BigInt, ScalarError> {
        if self.rest().starts_with('-') {
            return Err(self.err(format!("{what} must be unsigned")));
        }
        self.integer(what)
    }

    /// One `p['/'q]['*pi^'k]` term; `sign` flips the coefficient.
    fn term(&mut self, negate: bool) -> Result<(i64, BigRational), ScalarError> {
        let p = self.integer("coefficient numerator")?;
        let q = if self.eat("/") {
            let qpos = self.pos;
            let q = self.unsigned("denominator")?;
            if q.is_zero() {
                return Err(ScalarError::Parse {
                    pos: qpos,
                    msg: "zero denominator".into(),
                });
            }
            q
        } else {
            BigInt::one()
        };
        let k = if self.eat("*") {
            if !self.eat("pi^") {
                return Err(self.err("expected `pi^` after `*`"));
            }
            let k = self.integer("pi exponent")?;
            k.to_i64().ok_or_else(|| self.err("pi exponent out of range"))?
        } else {
            0
        };
        let mut coeff = BigRational::new(p, q);
        if negate {
            coeff = -coeff;
        }
        Ok((k, coeff))
    }
}

impl FromStr for PiScalar {
    type Err = ScalarError;

    /// Parses the canonical grammar; inverse of `Display` on canonical forms.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::new(s);
        let mut out = PiScalar::zero();
        p.skip_ws();
        let neg = p.eat("-");
        p.skip_ws();
        let (k, c) = p.term(neg)?;
        out.insert_add(k, &c);
        loop {
            p.skip_ws();
            if p.rest().is_empty() {
                return Ok(out);
            }
            let negate = if p.eat("+") {
                false
            } else if p.eat("-") {
                true
            } else {
                return Err(p.err("expected `+`, `-`, or end of input"));
            };
            p.skip_ws();
            let (k, c) = p.term(negate)?;
            out.insert_add(k, &c);
        }
    }
}

impl Serialize for PiScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PiScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
