//! Increasing sequences given in closed form, the approximating chain of
//! each element, and suprema.

use crate::element::{Elem, Element, Family};
use crate::error::{CuError, Result};
use crate::model::{ModelKind, SemigroupModel};
use crate::rational::{int, Ext, Payload, RatFn};

/// Number of leading terms checked for monotonicity before a supremum is
/// taken.
pub const VERIFY_DEPTH: u64 = 32;

/// The sequence `d ↦ term(d)` for `d ≥ 1`: an explicit prefix, then a
/// closed-form tail.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub prefix: Vec<Element>,
    pub tail: Family,
}

impl Chain {
    pub fn constant(a: &Element) -> Self {
        Chain { prefix: vec![], tail: a.lift() }
    }

    pub fn from_family(tail: Family) -> Self {
        Chain { prefix: vec![], tail }
    }

    pub fn term(&self, d: u64) -> Element {
        assert!(d >= 1, "chains are indexed from 1");
        match self.prefix.get(d as usize - 1) {
            Some(e) => e.clone(),
            None => self.tail.eval(d),
        }
    }

    /// Applies `f` to every term, keeping the tail symbolic.
    pub fn map(&self, f: impl Fn(&Family) -> Option<Family>) -> Option<Chain> {
        let prefix = self.prefix.iter().map(|e| f(&e.lift()).and_then(|x| x.as_constant())).collect::<Option<_>>()?;
        Some(Chain { prefix, tail: f(&self.tail)? })
    }

    /// Termwise combination of two chains.
    pub fn zip(&self, other: &Chain, f: impl Fn(&Family, &Family) -> Option<Family>) -> Option<Chain> {
        let n = self.prefix.len().max(other.prefix.len()) as u64;
        let prefix = (1..=n)
            .map(|d| f(&self.term(d).lift(), &other.term(d).lift()).and_then(|x| x.as_constant()))
            .collect::<Option<_>>()?;
        Some(Chain { prefix, tail: f(&self.tail, &other.tail)? })
    }
}

impl SemigroupModel {
    /// A `≪`-increasing chain with supremum `a`: compacts are constant,
    /// soft and real payloads `t` approach as `t·d/(d+1)`, `∞` as `d`, and
    /// functions are truncated pointwise as `min(f, d)`.
    pub fn factory_chain(&self, a: &Element) -> Chain {
        fn approach(x: &Ext<num_rational::BigRational>) -> Ext<RatFn> {
            match x {
                Ext::Fin(t) if t == &int(0) => Ext::zero(),
                Ext::Fin(t) => Ext::Fin(RatFn::approaching(t)),
                Ext::Inf => Ext::Fin(RatFn::index()),
            }
        }
        match (&self.kind, a) {
            (_, Elem::Nat(Ext::Inf)) => Chain::from_family(Elem::Nat(Ext::Fin(RatFn::index()))),
            (_, Elem::Soft(x)) => Chain::from_family(Elem::Soft(approach(x))),
            (_, Elem::Real(x)) => Chain::from_family(Elem::Real(approach(x))),
            (ModelKind::Product(ms), Elem::Tuple(v)) => {
                let parts: Vec<Chain> = ms.iter().zip(v).map(|(m, x)| m.factory_chain(x)).collect();
                let n = parts.iter().map(|c| c.prefix.len()).max().unwrap_or(0) as u64;
                Chain {
                    prefix: (1..=n).map(|d| Elem::Tuple(parts.iter().map(|c| c.term(d)).collect())).collect(),
                    tail: Elem::Tuple(parts.into_iter().map(|c| c.tail).collect()),
                }
            }
            (ModelKind::Lsc(_), Elem::Lsc(v)) => {
                let top = v.iter().filter_map(|x| x.finite().cloned()).max().unwrap_or_else(|| int(0));
                let top = crate::rational::to_u64(&top).unwrap_or(0);
                let prefix = (1..top)
                    .map(|d| {
                        Elem::Lsc(
                            v.iter()
                                .map(|x| match x {
                                    Ext::Fin(r) if *r <= int(d) => x.clone(),
                                    _ => Ext::Fin(int(d)),
                                })
                                .collect(),
                        )
                    })
                    .collect();
                let tail = Elem::Lsc(
                    v.iter()
                        .map(|x| match x {
                            Ext::Fin(r) => Ext::Fin(RatFn::constant(r.clone())),
                            Ext::Inf => Ext::Fin(RatFn::index()),
                        })
                        .collect(),
                );
                Chain { prefix, tail }
            }
            _ => Chain::constant(a),
        }
    }

    /// Closed-form chains used when testing suprema: the approximating
    /// chain of every grid element plus `d ↦ d·1` where a compact unit
    /// exists.
    pub fn test_chains(&self, depth: u64) -> Vec<Chain> {
        let mut out: Vec<Chain> = self.grid(depth).iter().map(|a| self.factory_chain(a)).collect();
        if matches!(self.kind, ModelKind::Z | ModelKind::Kq(_)) {
            out.push(Chain::from_family(Elem::Compact(RatFn::index())));
        }
        out
    }

    /// Supremum of a chain written in closed form.
    pub fn sup_chain(&self, c: &Chain) -> Result<Element> {
        for d in 1..=VERIFY_DEPTH {
            let (a, b) = (c.term(d), c.term(d + 1));
            if !self.contains(&a) || !self.contains(&b) {
                return Err(CuError::ModelMismatch { model: self.name.clone(), element: a.to_string() });
            }
            if !self.le(&a, &b) {
                return Err(CuError::NotMonotone { index: d });
            }
        }
        let sup = self.family_sup(&c.tail)?;
        if !self.contains(&sup) {
            return Err(CuError::UnsupportedChainForm(format!("limit {sup} is not in {}", self.name)));
        }
        for d in 1..=VERIFY_DEPTH {
            if !self.le(&c.term(d), &sup) {
                return Err(CuError::UnsupportedChainForm(format!("limit {sup} does not dominate term {d}")));
            }
        }
        Ok(sup)
    }

    fn family_sup(&self, f: &Family) -> Result<Element> {
        let unsupported = || CuError::UnsupportedChainForm(format!("{f:?} in {}", self.name));
        let limit = |x: &Ext<RatFn>| -> Result<(Ext<num_rational::BigRational>, bool)> {
            match x {
                Ext::Inf => Ok((Ext::Inf, true)),
                Ext::Fin(g) => match g.as_constant() {
                    Some(c) => Ok((Ext::Fin(c), true)),
                    None => Ok((g.limit().ok_or_else(unsupported)?, false)),
                },
            }
        };
        // A nonconstant integer-valued tail with a finite limit cannot exist.
        let nat = |x: &Ext<RatFn>| -> Result<Ext<num_rational::BigRational>> {
            match limit(x)? {
                (v, true) => Ok(v),
                (Ext::Inf, false) => Ok(Ext::Inf),
                _ => Err(unsupported()),
            }
        };
        let out = match (&self.kind, f) {
            (ModelKind::Product(ms), Elem::Tuple(v)) if ms.len() == v.len() => {
                Elem::Tuple(ms.iter().zip(v).map(|(m, x)| m.family_sup(x)).collect::<Result<_>>()?)
            }
            (_, Elem::Nat(x)) => Elem::Nat(nat(x)?),
            (_, Elem::Lsc(v)) => Elem::Lsc(v.iter().map(nat).collect::<Result<_>>()?),
            (_, Elem::Real(x)) => Elem::Real(limit(x)?.0),
            (_, Elem::Soft(x)) => Elem::Soft(limit(x)?.0).canonical(),
            (_, Elem::Compact(g)) => match g.as_constant() {
                Some(c) => Elem::Compact(c),
                // Strictly increasing compacts have a soft supremum.
                None => Elem::Soft(g.limit().ok_or_else(unsupported)?).canonical(),
            },
            (_, Elem::Table(i)) => Elem::Table(*i),
            _ => return Err(unsupported()),
        };
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FinitePoset;
    use crate::rational::{rat, ExtRat};

    #[test]
    fn examples() {
        let z = SemigroupModel::z();
        let c = Chain::from_family(Elem::Soft(Ext::Fin(RatFn::approaching(&int(1)))));
        assert_eq!(z.sup_chain(&c).unwrap(), Elem::Soft(Ext::Fin(int(1))));
        let c = Chain::from_family(Elem::Compact(RatFn::index()));
        assert_eq!(z.sup_chain(&c).unwrap(), Elem::Soft(Ext::Inf));
        let n = SemigroupModel::nbar();
        let two = Elem::Nat(ExtRat::from_u64(2));
        assert_eq!(n.sup_chain(&Chain::constant(&two)).unwrap(), two);
    }

    #[test]
    fn decreasing_chain_is_rejected() {
        let h = SemigroupModel::half_line();
        // d ↦ 1/d
        let f = RatFn::new(crate::rational::Poly::constant(int(1)), crate::rational::Poly::index());
        let c = Chain::from_family(Elem::Real(Ext::Fin(f)));
        assert_eq!(h.sup_chain(&c), Err(CuError::NotMonotone { index: 1 }));
    }

    #[test]
    fn factory_chains_have_the_right_sup_and_are_way_below_increasing() {
        let p = FinitePoset::new(2, vec![(0, 1)]).unwrap();
        let models = [
            SemigroupModel::z(),
            SemigroupModel::nbar(),
            SemigroupModel::half_line(),
            SemigroupModel::kq(&[2]),
            SemigroupModel::new("L", ModelKind::Lsc(p)),
            SemigroupModel::product(vec![SemigroupModel::z(), SemigroupModel::nbar()]),
        ];
        for m in &models {
            for a in m.grid(3) {
                let c = m.factory_chain(&a);
                assert_eq!(m.sup_chain(&c).unwrap(), a, "{} {a}", m.name);
                for d in 1..10 {
                    assert!(m.wb(&c.term(d), &c.term(d + 1)), "{} {a} at {d}", m.name);
                }
            }
        }
    }

    #[test]
    fn lsc_truncation() {
        let p = FinitePoset::new(2, vec![(0, 1)]).unwrap();
        let m = SemigroupModel::new("L", ModelKind::Lsc(p));
        let f = m.parse_element("(3, inf)").unwrap();
        let c = m.factory_chain(&f);
        assert_eq!(c.term(1).to_string(), "(1, 1)");
        assert_eq!(c.term(5).to_string(), "(3, 5)");
        let _ = rat(1, 1);
    }
}
