//! Exact numeric payloads: nonnegative rationals extended by `∞`, and
//! rational functions of the chain index `d` used to describe chain tails.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CuError, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn is_integer(r: &BigRational) -> bool {
    r.denom().is_one()
}

/// Renders `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || CuError::Parse(format!("invalid rational `{s}`"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Operations a payload must support so that the same model and morphism
/// code can run on concrete values and on index-dependent families.
pub trait Payload: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn scale(&self, r: &BigRational) -> Self;
    fn constant(r: BigRational) -> Self;
    /// The value when it does not depend on the index.
    fn as_constant(&self) -> Option<BigRational>;
}

impl Payload for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, r: &BigRational) -> Self {
        self * r
    }
    fn constant(r: BigRational) -> Self {
        r
    }
    fn as_constant(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

/// A nonnegative payload or `∞`.
///
/// The derived ordering puts every finite value below `Inf`, which is the
/// numeric order on `[0, ∞]` when `P` is a rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext<P> {
    Fin(P),
    Inf,
}

pub type ExtRat = Ext<BigRational>;

impl<P: Payload> Ext<P> {
    pub fn zero() -> Self {
        Ext::Fin(P::nil())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Ext::Fin(p) if p.is_nil())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Ext::Inf)
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a.plus(b)),
            _ => Ext::Inf,
        }
    }

    /// Multiplication with the convention `0·∞ = 0`.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Ext::zero();
        }
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a.times(b)),
            _ => Ext::Inf,
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        if Zero::is_zero(r) {
            return Ext::zero();
        }
        match self {
            Ext::Fin(a) => Ext::Fin(a.scale(r)),
            Ext::Inf => Ext::Inf,
        }
    }

    /// `∞·x`: zero stays zero, everything else becomes `∞`.
    pub fn infinite_multiple(&self) -> Self {
        if self.is_zero() {
            Ext::zero()
        } else {
            Ext::Inf
        }
    }

    pub fn as_constant(&self) -> Option<ExtRat> {
        match self {
            Ext::Fin(p) => p.as_constant().map(Ext::Fin),
            Ext::Inf => Some(Ext::Inf),
        }
    }
}

impl ExtRat {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Ext::Fin(r) => Some(r),
            Ext::Inf => None,
        }
    }

    pub fn from_u64(n: u64) -> Self {
        Ext::Fin(int(n))
    }

    /// Smallest integer `≥ self` (`⌈∞⌉ = ∞`).
    pub fn ceil(&self) -> ExtRat {
        match self {
            Ext::Fin(r) => Ext::Fin(r.ceil()),
            Ext::Inf => Ext::Inf,
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(r) => f.write_str(&fmt_rat(r)),
            Ext::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRat {
    type Err = CuError;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Ext::Inf);
        }
        let r = parse_rat(s)?;
        if r.is_negative() {
            return Err(CuError::Parse(format!("negative value `{s}`")));
        }
        Ok(Ext::Fin(r))
    }
}

/// Dense polynomial in the chain index `d`, lowest coefficient first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    fn normalized(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    pub fn constant(r: BigRational) -> Self {
        Poly::normalized(vec![r])
    }

    pub fn index() -> Self {
        Poly(vec![Zero::zero(), One::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let c = (0..n)
            .map(|i| {
                let a = self.0.get(i).cloned().unwrap_or_else(Zero::zero);
                let b = o.0.get(i).cloned().unwrap_or_else(Zero::zero);
                a + b
            })
            .collect();
        Poly::normalized(c)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(vec![]);
        }
        let mut c = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::normalized(c)
    }

    pub fn scale(&self, r: &BigRational) -> Poly {
        Poly::normalized(self.0.iter().map(|a| a * r).collect())
    }

    pub fn eval(&self, d: &BigRational) -> BigRational {
        let (n, q) = self.eval_parts(d);
        BigRational::new(n, q)
    }

    /// Unreduced numerator and denominator of the value at `d`.
    fn eval_parts(&self, d: &BigRational) -> (BigInt, BigInt) {
        let (dn, dd) = (d.numer(), d.denom());
        let (mut n, mut q) = (BigInt::zero(), BigInt::one());
        for a in self.0.iter().rev() {
            // n/q · dn/dd + an/aq
            let (an, aq) = (a.numer(), a.denom());
            let den = &q * dd;
            n = &n * dn * aq + an * &den;
            q = den * aq;
        }
        (n, q)
    }
}

/// Quotient of two polynomials in the chain index `d`.
///
/// Chain tails are described by these; the supremum of a monotone tail is
/// the limit as `d → ∞`.
#[derive(Clone, Debug)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        RatFn { num, den }
    }

    /// The index itself, `d ↦ d`.
    pub fn index() -> Self {
        RatFn::new(Poly::index(), Poly::constant(One::one()))
    }

    /// `d ↦ c·d/(d+1)`, the standard way-below approximation of `c`.
    pub fn approaching(c: &BigRational) -> Self {
        let d = Poly::index();
        let d1 = d.add(&Poly::constant(One::one()));
        RatFn::new(d.scale(c), d1)
    }

    pub fn eval(&self, d: u64) -> BigRational {
        let x = int(d);
        let (a, b) = self.num.eval_parts(&x);
        let (c, e) = self.den.eval_parts(&x);
        BigRational::new(a * e, b * c)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.as_const().is_some()
    }

    fn as_const(&self) -> Option<BigRational> {
        if self.num.is_zero() {
            return Some(Zero::zero());
        }
        if self.num.degree() != self.den.degree() {
            return None;
        }
        let c = self.num.leading()? / self.den.leading()?;
        self.num.sub(&self.den.scale(&c)).is_zero().then_some(c)
    }

    /// Limit as `d → ∞`, or `None` when it diverges to `-∞`.
    pub fn limit(&self) -> Option<ExtRat> {
        let (Some(dn), Some(dd)) = (self.num.degree(), self.den.degree()) else {
            return Some(Ext::zero());
        };
        let ratio = self.num.leading()? / self.den.leading()?;
        match dn.cmp(&dd) {
            std::cmp::Ordering::Less => Some(Ext::zero()),
            std::cmp::Ordering::Equal => Some(Ext::Fin(ratio)),
            std::cmp::Ordering::Greater => ratio.is_positive().then_some(Ext::Inf),
        }
    }
}

impl Payload for RatFn {
    fn nil() -> Self {
        RatFn::constant(Zero::zero())
    }
    fn is_nil(&self) -> bool {
        self.is_identically_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        RatFn::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    fn times(&self, o: &Self) -> Self {
        RatFn::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn scale(&self, r: &BigRational) -> Self {
        RatFn::new(self.num.scale(r), self.den.clone())
    }
    fn constant(r: BigRational) -> Self {
        RatFn::new(Poly::constant(r), Poly::constant(One::one()))
    }
    fn as_constant(&self) -> Option<BigRational> {
        self.as_const()
    }
}

impl Ext<RatFn> {
    pub fn eval(&self, d: u64) -> ExtRat {
        match self {
            Ext::Fin(f) => Ext::Fin(f.eval(d)),
            Ext::Inf => Ext::Inf,
        }
    }
}

/// Parses a set of primes written `2, 3`.
pub fn parse_primes(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let p: u64 = part.parse().map_err(|_| CuError::Parse(format!("invalid prime `{part}`")))?;
        if p < 2 || (2..p).take_while(|q| q * q <= p).any(|q| p.is_multiple_of(q)) {
            return Err(CuError::Parse(format!("`{p}` is not prime")));
        }
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// True when every prime factor of `n` lies in `primes`.
pub fn is_smooth(n: &BigInt, primes: &[u64]) -> bool {
    let mut n = n.abs();
    if n.is_zero() {
        return false;
    }
    for &p in primes {
        let p = BigInt::from(p);
        while (&n % &p).is_zero() {
            n /= &p;
        }
    }
    n.is_one()
}

/// Products of powers of `primes` in `2..=bound`.
pub fn smooth_numbers(primes: &[u64], bound: u64) -> Vec<u64> {
    (2..=bound).filter(|n| is_smooth(&BigInt::from(*n), primes)).collect()
}

pub fn to_u64(r: &BigRational) -> Option<u64> {
    if is_integer(r) {
        r.numer().to_u64()
    } else {
        None
    }
}
