//! Simple closed curves and measured foliations on the torus.
//!
//! With the standard marking, a simple closed curve is a primitive integer
//! vector `(p, q)` up to sign, a weighted curve `c·(p, q)` is the vector
//! `(c·p, c·q)`, and the geometric intersection number of two foliations is
//! the absolute determinant `|a·d - b·c|`. Irrational directions are carried
//! as continued fractions so that minimality (no closed leaves) stays a
//! decidable property.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A vertex of the curve complex: a reduced fraction `p/q` with `q >= 0`.
///
/// `1/0` is the slope at infinity. The sign lives on `p`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub const INFINITY: Slope = Slope { p: 1, q: 0 };
    pub const ZERO: Slope = Slope { p: 0, q: 1 };

    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::ZeroVector);
        }
        if q == 0 {
            return Ok(Self::INFINITY);
        }
        let g = (p as i128).gcd(&(q as i128));
        let (mut p, mut q) = ((p as i128) / g, (q as i128) / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        let p = i64::try_from(p).map_err(|_| Error::Overflow("normalizing a slope"))?;
        let q = i64::try_from(q).map_err(|_| Error::Overflow("normalizing a slope"))?;
        Ok(Slope { p, q })
    }

    pub fn integer(n: i64) -> Self {
        Slope { p: n, q: 1 }
    }

    /// Builds a slope from components already known to be canonical.
    pub(crate) fn from_canonical(p: i64, q: i64) -> Self {
        debug_assert!(q > 0 || (q == 0 && p == 1));
        Slope { p, q }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_infinite(&self) -> bool {
        self.q == 0
    }

    /// `max(|p|, q)`; the number of slopes of height at most `h` is finite.
    pub fn height(&self) -> u64 {
        self.p.unsigned_abs().max(self.q as u64)
    }

    /// Geometric intersection number `|p·s - q·r|`, exact.
    pub fn intersection(&self, other: &Slope) -> u128 {
        let det = self.p as i128 * other.q as i128 - self.q as i128 * other.p as i128;
        det.unsigned_abs()
    }

    pub fn value(&self) -> f64 {
        if self.q == 0 {
            f64::INFINITY
        } else {
            self.p as f64 / self.q as f64
        }
    }

    /// Ideal point of the upper half-plane where this curve becomes short:
    /// `-p/q`, or `None` for the cusp at infinity.
    pub fn cusp(&self) -> Option<f64> {
        if self.q == 0 {
            None
        } else {
            Some(-(self.p as f64) / self.q as f64)
        }
    }

    pub fn to_foliation(&self) -> FoliationVec {
        FoliationVec::Exact {
            a: BigRational::from_integer(BigInt::from(self.p)),
            b: BigRational::from_integer(BigInt::from(self.q)),
        }
    }

    /// The measured foliation `c·self`.
    pub fn weighted(&self, c: BigRational) -> Result<FoliationVec> {
        if !c.is_positive() {
            return Err(Error::InvalidParameter(format!("weight must be positive, got {c}")));
        }
        Ok(FoliationVec::Exact {
            a: BigRational::from_integer(BigInt::from(self.p)) * &c,
            b: BigRational::from_integer(BigInt::from(self.q)) * c,
        })
    }

    /// Finite continued fraction of `p/q`; `None` for infinity.
    pub fn to_continued_fraction(&self) -> Option<ContinuedFraction> {
        if self.q == 0 {
            return None;
        }
        let (mut num, mut den) = (self.p as i128, self.q as i128);
        let a0 = num.div_euclid(den);
        let mut quotients = Vec::new();
        let r = num - a0 * den;
        num = den;
        den = r;
        while den != 0 {
            let a = num / den;
            quotients.push(a as u64);
            let r = num - a * den;
            num = den;
            den = r;
        }
        Some(ContinuedFraction {
            a0: a0 as i64,
            prefix: quotients,
            period: Vec::new(),
        })
    }
}

impl Ord for Slope {
    /// Lexicographic on `(q, p)`.
    fn cmp(&self, other: &Self) -> Ordering {
        (self.q, self.p).cmp(&(other.q, other.p))
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "slope",
            input: s.to_string(),
        };
        let t = s.trim();
        match t {
            "inf" | "infinity" | "∞" => return Ok(Slope::INFINITY),
            _ => {}
        }
        match t.split_once('/') {
            Some((p, q)) => {
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                Slope::new(p, q).map_err(|_| bad())
            }
            None => t.parse::<i64>().map(Slope::integer).map_err(|_| bad()),
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Simple continued fraction `[a0; a1, a2, ...]`, either finite or with a
/// periodic tail (quadratic irrationals).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ContinuedFraction {
    a0: i64,
    prefix: Vec<u64>,
    period: Vec<u64>,
}

/// Result of [`ContinuedFraction::convergents`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergents {
    pub slopes: Vec<Slope>,
    /// Set when fewer convergents exist than were requested.
    pub truncated: bool,
}

impl ContinuedFraction {
    pub fn new(a0: i64, prefix: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = prefix.iter().chain(period.iter()).find(|&&a| a == 0) {
            return Err(Error::BadPartialQuotient(bad as i128));
        }
        Ok(Self { a0, prefix, period })
    }

    pub fn finite(a0: i64, quotients: Vec<u64>) -> Result<Self> {
        Self::new(a0, quotients, Vec::new())
    }

    pub fn periodic(a0: i64, prefix: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidParameter("periodic continued fraction needs a non-empty period".into()));
        }
        Self::new(a0, prefix, period)
    }

    /// `[1; 1, 1, ...]`
    pub fn golden() -> Self {
        Self {
            a0: 1,
            prefix: Vec::new(),
            period: vec![1],
        }
    }

    /// `[1; 2, 2, ...]`
    pub fn sqrt2() -> Self {
        Self {
            a0: 1,
            prefix: Vec::new(),
            period: vec![2],
        }
    }

    pub fn integer_part(&self) -> i64 {
        self.a0
    }

    pub fn prefix(&self) -> &[u64] {
        &self.prefix
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    /// Finite expansion, i.e. a rational number.
    pub fn is_rational(&self) -> bool {
        self.period.is_empty()
    }

    /// Partial quotients `a1, a2, ...`; infinite when periodic.
    pub fn quotients(&self) -> impl Iterator<Item = u64> + '_ {
        let tail: Box<dyn Iterator<Item = u64> + '_> = if self.period.is_empty() {
            Box::new(std::iter::empty())
        } else {
            Box::new(self.period.iter().copied().cycle())
        };
        self.prefix.iter().copied().chain(tail)
    }

    /// First `n` convergents `p_k/q_k` from `p_k = a_k p_{k-1} + p_{k-2}`.
    pub fn convergents(&self, n: usize) -> Result<Convergents> {
        if n == 0 {
            return Err(Error::InvalidParameter("convergent count must be >= 1".into()));
        }
        let mut slopes = Vec::with_capacity(n);
        let (mut p_prev, mut q_prev): (i128, i128) = (1, 0);
        let (mut p, mut q): (i128, i128) = (self.a0 as i128, 1);
        slopes.push(Slope::new(p as i64, q as i64)?);
        let mut terms = self.quotients();
        while slopes.len() < n {
            let Some(a) = terms.next() else {
                return Ok(Convergents { slopes, truncated: true });
            };
            let a = a as i128;
            let p_next = a
                .checked_mul(p)
                .and_then(|v| v.checked_add(p_prev))
                .ok_or(Error::Overflow("computing convergents"))?;
            let q_next = a
                .checked_mul(q)
                .and_then(|v| v.checked_add(q_prev))
                .ok_or(Error::Overflow("computing convergents"))?;
            let pn = i64::try_from(p_next).map_err(|_| Error::Overflow("computing convergents"))?;
            let qn = i64::try_from(q_next).map_err(|_| Error::Overflow("computing convergents"))?;
            slopes.push(Slope::from_canonical(pn, qn));
            (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        }
        Ok(Convergents {
            slopes,
            truncated: false,
        })
    }

    /// Convergents until the denominator would exceed `max_denominator`
    /// (or the expansion ends).
    pub fn convergents_up_to(&self, max_denominator: i64) -> Vec<Slope> {
        let mut out = Vec::new();
        let mut n = 1;
        loop {
            match self.convergents(n) {
                Ok(c) => {
                    let last = *c.slopes.last().expect("n >= 1");
                    if last.q() > max_denominator {
                        break;
                    }
                    out.push(last);
                    if c.truncated {
                        out.pop();
                        break;
                    }
                }
                Err(_) => break,
            }
            n += 1;
        }
        out
    }

    /// The exact value of a finite expansion.
    pub fn to_slope(&self) -> Option<Slope> {
        if !self.is_rational() {
            return None;
        }
        self.convergents(self.prefix.len() + 1)
            .ok()
            .and_then(|c| c.slopes.last().copied())
    }

    /// Numeric value, evaluated backwards over at most 64 quotients.
    pub fn value(&self) -> f64 {
        let terms: Vec<u64> = self.quotients().take(64).collect();
        let mut acc = 0.0_f64;
        for &a in terms.iter().rev() {
            acc = 1.0 / (a as f64 + acc);
        }
        self.a0 as f64 + acc
    }

    /// The continued fraction `[a1; a2, a3, ...]` of the first complete
    /// quotient. `None` for an integer.
    pub fn shifted(&self) -> Option<ContinuedFraction> {
        if let Some((&first, rest)) = self.prefix.split_first() {
            return Some(ContinuedFraction {
                a0: first as i64,
                prefix: rest.to_vec(),
                period: self.period.clone(),
            });
        }
        let (&first, rest) = self.period.split_first()?;
        let mut period = rest.to_vec();
        period.push(first);
        Some(ContinuedFraction {
            a0: first as i64,
            prefix: Vec::new(),
            period,
        })
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.a0)?;
        if self.prefix.is_empty() && self.period.is_empty() {
            return write!(f, "]");
        }
        write!(f, ";")?;
        let prefix: Vec<String> = self.prefix.iter().map(u64::to_string).collect();
        write!(f, "{}", prefix.join(","))?;
        if !self.period.is_empty() {
            if !self.prefix.is_empty() {
                write!(f, ",")?;
            }
            let period: Vec<String> = self.period.iter().map(u64::to_string).collect();
            write!(f, "({})", period.join(","))?;
        }
        write!(f, "]")
    }
}

impl FromStr for ContinuedFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "continued fraction",
            input: s.to_string(),
        };
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
        let (head, rest) = match inner.split_once(';') {
            Some((h, r)) => (h, r),
            None => (inner, ""),
        };
        let a0: i64 = head.parse().map_err(|_| bad())?;
        let parse_list = |list: &str| -> Result<Vec<u64>> {
            list.split(',')
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<u64>().map_err(|_| bad()))
                .collect()
        };
        let (prefix, period) = match rest.find('(') {
            Some(open) => {
                let body = rest[open + 1..].strip_suffix(')').ok_or_else(bad)?;
                if body.contains('(') || body.contains(')') {
                    return Err(bad());
                }
                let period = parse_list(body)?;
                if period.is_empty() {
                    return Err(bad());
                }
                let head = rest[..open].trim_end_matches(',');
                (parse_list(head)?, period)
            }
            None => (parse_list(rest)?, Vec::new()),
        };
        ContinuedFraction::new(a0, prefix, period)
    }
}

impl Serialize for ContinuedFraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ContinuedFraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of [`slope_of`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlopeClass {
    Rational(Slope),
    /// Minimal foliation; the direction has an infinite expansion.
    Irrational(ContinuedFraction),
}

/// Measured foliation on the torus with direction `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FoliationVec {
    /// Exact rational components, e.g. a weighted simple closed curve.
    Exact { a: BigRational, b: BigRational },
    /// Floating-point components. Rationality of these is never guessed.
    Real { a: f64, b: f64 },
    /// `weight · (x, 1)` for an irrational `x` given by a periodic expansion.
    Minimal { direction: ContinuedFraction, weight: f64 },
}

impl FoliationVec {
    pub fn exact(a: BigRational, b: BigRational) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(FoliationVec::Exact { a, b })
    }

    pub fn from_integers(a: i64, b: i64) -> Result<Self> {
        Self::exact(
            BigRational::from_integer(BigInt::from(a)),
            BigRational::from_integer(BigInt::from(b)),
        )
    }

    pub fn real(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(FoliationVec::Real { a, b })
    }

    /// `weight · (x, 1)` where `x` is the value of `cf`. Finite expansions
    /// give an exact vector when the weight is 1.
    pub fn from_continued_fraction(cf: &ContinuedFraction, weight: f64) -> Result<Self> {
        if !(weight.is_finite()) || weight == 0.0 {
            return Err(Error::ZeroVector);
        }
        match cf.to_slope() {
            Some(s) if weight == 1.0 => Ok(s.to_foliation()),
            Some(s) => Self::real(weight * s.value(), weight),
            None => Ok(FoliationVec::Minimal {
                direction: cf.clone(),
                weight,
            }),
        }
    }

    /// Components as floats.
    pub fn components(&self) -> (f64, f64) {
        match self {
            FoliationVec::Exact { a, b } => (ratio_to_f64(a), ratio_to_f64(b)),
            FoliationVec::Real { a, b } => (*a, *b),
            FoliationVec::Minimal { direction, weight } => (weight * direction.value(), *weight),
        }
    }

    /// Multiplies the transverse measure by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {c}")));
        }
        Ok(match self {
            FoliationVec::Exact { .. } | FoliationVec::Real { .. } => {
                let (a, b) = self.components();
                FoliationVec::Real { a: a * c, b: b * c }
            }
            FoliationVec::Minimal { direction, weight } => FoliationVec::Minimal {
                direction: direction.clone(),
                weight: weight * c,
            },
        })
    }

    pub fn scaled_exact(&self, c: &BigRational) -> Result<Self> {
        match self {
            FoliationVec::Exact { a, b } if c.is_positive() => Ok(FoliationVec::Exact {
                a: a * c,
                b: b * c,
            }),
            FoliationVec::Exact { .. } => Err(Error::InvalidParameter(format!("scale must be positive, got {c}"))),
            _ => Err(Error::InexactRationality),
        }
    }

    /// Ideal endpoint `-a/b` of the Teichmüller rays this foliation drives
    /// (`None` means the cusp at infinity).
    pub fn ideal_endpoint(&self) -> Option<f64> {
        if let FoliationVec::Exact { a, b } = self {
            if b.is_zero() {
                return None;
            }
            return Some(-ratio_to_f64(&(a / b)));
        }
        let (a, b) = self.components();
        if b == 0.0 {
            None
        } else {
            Some(-a / b)
        }
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Intersection number `|a_F b_G - b_F a_G|`.
pub fn intersection(f: &FoliationVec, g: &FoliationVec) -> f64 {
    if let Some(exact) = intersection_exact(f, g) {
        return ratio_to_f64(&exact);
    }
    if let (
        FoliationVec::Minimal { direction: d1, .. },
        FoliationVec::Minimal { direction: d2, .. },
    ) = (f, g)
    {
        if d1 == d2 {
            return 0.0;
        }
    }
    let (a1, b1) = f.components();
    let (a2, b2) = g.components();
    (a1 * b2 - b1 * a2).abs()
}

/// Exact intersection number when both arguments have rational components.
pub fn intersection_exact(f: &FoliationVec, g: &FoliationVec) -> Option<BigRational> {
    match (f, g) {
        (FoliationVec::Exact { a: a1, b: b1 }, FoliationVec::Exact { a: a2, b: b2 }) => {
            Some((a1 * b2 - b1 * a2).abs())
        }
        _ => None,
    }
}

/// The slope of a foliation, or the irrational marker for a minimal one.
pub fn slope_of(f: &FoliationVec) -> Result<SlopeClass> {
    match f {
        FoliationVec::Exact { a, b } => {
            let num = a.numer() * b.denom();
            let den = b.numer() * a.denom();
            let g = num.gcd(&den);
            let (num, den) = if g.is_zero() { (num, den) } else { (&num / &g, &den / &g) };
            let p = num.to_i64().ok_or(Error::Overflow("reducing a slope"))?;
            let q = den.to_i64().ok_or(Error::Overflow("reducing a slope"))?;
            Ok(SlopeClass::Rational(Slope::new(p, q)?))
        }
        FoliationVec::Real { .. } => Err(Error::InexactRationality),
        FoliationVec::Minimal { direction, .. } => Ok(SlopeClass::Irrational(direction.clone())),
    }
}

/// `cf_convergents` with the truncation flag.
pub fn cf_convergents(x: &ContinuedFraction, n: usize) -> Result<Convergents> {
    x.convergents(n)
}

/// Exact rational `p/q` as a [`BigRational`].
pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
