//! Element representation shared by every model.

use std::fmt;

use num_rational::BigRational;

use crate::rational::{fmt_rat, Ext, ExtRat, Payload, RatFn};

/// A point of some model, with payloads of type `P`.
///
/// With `P = BigRational` this is a concrete element. With `P = RatFn` it is
/// a family indexed by `d`, which is how chain tails are written down.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem<P> {
    /// Value in `N ∪ {∞}`.
    Nat(Ext<P>),
    /// Compact part of `Z` (integers) or of `K_q ⊔ (0,∞]` (rationals).
    Compact(P),
    /// Soft part `(0, ∞]` of `Z` or of `K_q ⊔ (0,∞]`. Never zero.
    Soft(Ext<P>),
    /// Value in `[0, ∞]`.
    Real(Ext<P>),
    Tuple(Vec<Elem<P>>),
    /// Monotone function on a finite poset, one value per point.
    Lsc(Vec<Ext<P>>),
    /// Index into a finite table model.
    Table(usize),
}

pub type Element = Elem<BigRational>;
pub type Family = Elem<RatFn>;

impl<P: Payload> Elem<P> {
    /// Zero of the same shape as `self`.
    pub fn zero_like(&self) -> Self {
        match self {
            Elem::Nat(_) => Elem::Nat(Ext::zero()),
            Elem::Compact(_) | Elem::Soft(_) => Elem::Compact(P::nil()),
            Elem::Real(_) => Elem::Real(Ext::zero()),
            Elem::Tuple(v) => Elem::Tuple(v.iter().map(Elem::zero_like).collect()),
            Elem::Lsc(v) => Elem::Lsc(vec![Ext::zero(); v.len()]),
            Elem::Table(_) => Elem::Table(0),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Elem::Nat(x) | Elem::Real(x) => x.is_zero(),
            Elem::Compact(x) => x.is_nil(),
            Elem::Soft(_) => false,
            Elem::Tuple(v) => v.iter().all(Elem::is_zero),
            Elem::Lsc(v) => v.iter().all(Ext::is_zero),
            Elem::Table(i) => *i == 0,
        }
    }

    /// Rewrites `Soft(0)` to `Compact(0)`.
    pub fn canonical(self) -> Self {
        match self {
            Elem::Soft(x) if x.is_zero() => Elem::Compact(P::nil()),
            Elem::Tuple(v) => Elem::Tuple(v.into_iter().map(Elem::canonical).collect()),
            e => e,
        }
    }

    /// Sum for every shape except tables, which need the model's table.
    pub fn add_untabled(&self, other: &Self) -> Option<Self> {
        use Elem::*;
        let r = match (self, other) {
            (Nat(a), Nat(b)) => Nat(a.add(b)),
            (Real(a), Real(b)) => Real(a.add(b)),
            (Compact(a), Compact(b)) => Compact(a.plus(b)),
            (Compact(a), Soft(b)) | (Soft(b), Compact(a)) => Soft(Ext::Fin(a.clone()).add(b)),
            (Soft(a), Soft(b)) => Soft(a.add(b)),
            (Tuple(a), Tuple(b)) if a.len() == b.len() => {
                Tuple(a.iter().zip(b).map(|(x, y)| x.add_untabled(y)).collect::<Option<_>>()?)
            }
            (Lsc(a), Lsc(b)) if a.len() == b.len() => Lsc(a.iter().zip(b).map(|(x, y)| x.add(y)).collect()),
            _ => return None,
        };
        Some(r.canonical())
    }

    /// Multiplies by a nonnegative payload (used for `n·a` with `n` possibly
    /// depending on the chain index). Tables are not handled here.
    pub fn mul_payload(&self, n: &P) -> Option<Self> {
        use Elem::*;
        if n.is_nil() {
            return Some(self.zero_like());
        }
        let e = Ext::Fin(n.clone());
        let r = match self {
            Nat(a) => Nat(a.mul(&e)),
            Real(a) => Real(a.mul(&e)),
            Compact(a) => Compact(a.times(n)),
            Soft(a) => Soft(a.mul(&e)),
            Tuple(v) => Tuple(v.iter().map(|x| x.mul_payload(n)).collect::<Option<_>>()?),
            Lsc(v) => Lsc(v.iter().map(|x| x.mul(&e)).collect()),
            Table(_) => return None,
        };
        Some(r.canonical())
    }

    /// `∞·a`. Tables are not handled here.
    pub fn infinite_multiple_untabled(&self) -> Option<Self> {
        use Elem::*;
        let r = match self {
            Nat(a) => Nat(a.infinite_multiple()),
            Real(a) => Real(a.infinite_multiple()),
            Compact(a) if a.is_nil() => Compact(P::nil()),
            Compact(_) | Soft(_) => Soft(Ext::Inf),
            Tuple(v) => Tuple(v.iter().map(Elem::infinite_multiple_untabled).collect::<Option<_>>()?),
            Lsc(v) => Lsc(v.iter().map(Ext::infinite_multiple).collect()),
            Table(_) => return None,
        };
        Some(r)
    }

    /// Scales into the soft part: compacts become soft, payloads are
    /// multiplied by `r`. Defined where a soft part exists.
    pub fn soft_scale(&self, r: &P) -> Option<Self> {
        use Elem::*;
        if r.is_nil() || self.is_zero() {
            return Some(self.zero_like());
        }
        let e = Ext::Fin(r.clone());
        let out = match self {
            Compact(a) => Soft(Ext::Fin(a.times(r))),
            Soft(a) => Soft(a.mul(&e)),
            Real(a) => Real(a.mul(&e)),
            Tuple(v) => Tuple(v.iter().map(|x| x.soft_scale(r)).collect::<Option<_>>()?),
            Nat(_) | Lsc(_) | Table(_) => return None,
        };
        Some(out.canonical())
    }

    /// Numeric coordinates, ignoring tags. Table indices have none.
    pub fn coordinates(&self) -> Vec<Ext<P>> {
        match self {
            Elem::Nat(a) | Elem::Soft(a) | Elem::Real(a) => vec![a.clone()],
            Elem::Compact(a) => vec![Ext::Fin(a.clone())],
            Elem::Tuple(v) => v.iter().flat_map(Elem::coordinates).collect(),
            Elem::Lsc(v) => v.clone(),
            Elem::Table(_) => vec![],
        }
    }
}

impl<P: Payload> Elem<P> {
    /// The concrete element, when no payload depends on the index.
    pub fn as_concrete(&self) -> Option<Element> {
        let r = match self {
            Elem::Nat(a) => Elem::Nat(a.as_constant()?),
            Elem::Compact(a) => Elem::Compact(a.as_constant()?),
            Elem::Soft(a) => Elem::Soft(a.as_constant()?),
            Elem::Real(a) => Elem::Real(a.as_constant()?),
            Elem::Tuple(v) => Elem::Tuple(v.iter().map(Elem::as_concrete).collect::<Option<_>>()?),
            Elem::Lsc(v) => Elem::Lsc(v.iter().map(Ext::as_constant).collect::<Option<_>>()?),
            Elem::Table(i) => Elem::Table(*i),
        };
        Some(r.canonical())
    }
}

impl Family {
    /// The concrete element at index `d`.
    pub fn eval(&self, d: u64) -> Element {
        match self {
            Elem::Nat(a) => Elem::Nat(a.eval(d)),
            Elem::Compact(a) => Elem::Compact(a.eval(d)),
            Elem::Soft(a) => Elem::Soft(a.eval(d)),
            Elem::Real(a) => Elem::Real(a.eval(d)),
            Elem::Tuple(v) => Elem::Tuple(v.iter().map(|x| x.eval(d)).collect()),
            Elem::Lsc(v) => Elem::Lsc(v.iter().map(|x| x.eval(d)).collect()),
            Elem::Table(i) => Elem::Table(*i),
        }
        .canonical()
    }

    /// The element itself when no payload depends on the index.
    pub fn as_constant(&self) -> Option<Element> {
        self.as_concrete()
    }
}

impl Element {
    /// Lifts a concrete element to a constant family.
    pub fn lift(&self) -> Family {
        self.to_payload()
    }

    /// The same element with payloads of another type.
    pub fn to_payload<P: Payload>(&self) -> Elem<P> {
        fn ext<P: Payload>(x: &ExtRat) -> Ext<P> {
            match x {
                Ext::Fin(r) => Ext::Fin(P::constant(r.clone())),
                Ext::Inf => Ext::Inf,
            }
        }
        match self {
            Elem::Nat(a) => Elem::Nat(ext(a)),
            Elem::Compact(a) => Elem::Compact(P::constant(a.clone())),
            Elem::Soft(a) => Elem::Soft(ext(a)),
            Elem::Real(a) => Elem::Real(ext(a)),
            Elem::Tuple(v) => Elem::Tuple(v.iter().map(Element::to_payload).collect()),
            Elem::Lsc(v) => Elem::Lsc(v.iter().map(ext).collect()),
            Elem::Table(i) => Elem::Table(*i),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elem::Nat(a) | Elem::Real(a) => write!(f, "{a}"),
            Elem::Compact(a) => write!(f, "compact:{}", fmt_rat(a)),
            Elem::Soft(a) => write!(f, "soft:{a}"),
            Elem::Tuple(v) => {
                f.write_str("[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Elem::Lsc(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Elem::Table(i) => write!(f, "#{i}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn compact_plus_soft_is_soft() {
        let a = Element::Compact(int(2));
        let b = Element::Soft(Ext::Fin(rat(1, 2)));
        assert_eq!(a.add_untabled(&b), Some(Element::Soft(Ext::Fin(rat(5, 2)))));
    }

    #[test]
    fn soft_zero_canonicalizes() {
        let z = Element::Soft(Ext::Fin(int(0))).canonical();
        assert_eq!(z, Element::Compact(int(0)));
        assert_eq!(z.clone().canonical(), z);
    }

    #[test]
    fn family_eval_and_lift() {
        let fam = Family::Soft(Ext::Fin(RatFn::approaching(&int(1))));
        assert_eq!(fam.eval(1), Element::Soft(Ext::Fin(rat(1, 2))));
        assert!(fam.as_constant().is_none());
        let c = Element::Tuple(vec![Element::Compact(int(1)), Element::Soft(Ext::Inf)]);
        assert_eq!(c.lift().as_constant(), Some(c));
    }

    #[test]
    fn infinite_multiple_keeps_zero() {
        let z = Element::Compact(int(0));
        assert_eq!(z.infinite_multiple_untabled(), Some(z));
        let one = Element::Compact(int(1));
        assert_eq!(one.infinite_multiple_untabled(), Some(Element::Soft(Ext::Inf)));
    }
}
