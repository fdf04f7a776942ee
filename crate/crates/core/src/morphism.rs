//! The closed catalog of maps between models.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Signed;

use crate::element::{Elem, Element};
use crate::error::{CuError, Result};
use crate::model::{ModelKind, SemigroupModel};
use crate::rational::{fmt_rat, to_u64, Ext, Payload};

#[derive(Clone, Debug, PartialEq)]
pub enum MorphismKind {
    Identity,
    Zero,
    MultiplyBy(u64),
    /// `x ↦ ∞·x`.
    Infinite,
    /// Soft retraction of `Z`, into `Z` or into `[0, ∞]`.
    Sigma,
    /// `N ∪ {∞} → Z`, `n ↦ Soft(n)`.
    NatToSoft,
    /// Multiplies payloads by `r`, landing in the soft part of the codomain.
    Scale(BigRational),
    Project(usize),
    Inject(usize),
    /// `Z → T` given by `n ↦ n·one` on compacts and by `soft` on the soft part.
    Glue {
        one: Element,
        soft: Box<Morphism>,
    },
    /// Finite graph; the domain must be a table or the map is only defined
    /// on the listed points.
    Explicit(BTreeMap<Element, Element>),
    /// Applied first to last.
    Compose(Vec<Morphism>),
}

/// How divisibility witnesses are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessOracle {
    /// `z = φ(x)/k` in the soft part of the codomain, then verified.
    SoftQuotient,
    /// First witness in canonical grid order.
    Search,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Morphism {
    pub name: String,
    pub domain: SemigroupModel,
    pub codomain: SemigroupModel,
    pub kind: MorphismKind,
    /// The map is claimed to preserve `≪`.
    pub declared_cu: bool,
    pub witness: WitnessOracle,
}

fn mismatch(m: &SemigroupModel, why: &str) -> CuError {
    CuError::ModelMismatch { model: m.name.clone(), element: why.to_string() }
}

fn is_zlike(m: &SemigroupModel) -> bool {
    matches!(m.kind, ModelKind::Z | ModelKind::Kq(_))
}

impl Morphism {
    fn build(
        name: impl Into<String>,
        domain: SemigroupModel,
        codomain: SemigroupModel,
        kind: MorphismKind,
        declared_cu: bool,
    ) -> Morphism {
        let witness = if codomain.has_soft_part() { WitnessOracle::SoftQuotient } else { WitnessOracle::Search };
        Morphism { name: name.into(), domain, codomain, kind, declared_cu, witness }
    }

    pub fn identity(s: &SemigroupModel) -> Morphism {
        Self::build(format!("id_{}", s.name), s.clone(), s.clone(), MorphismKind::Identity, true)
    }

    pub fn zero(s: &SemigroupModel, t: &SemigroupModel) -> Morphism {
        Self::build("zero", s.clone(), t.clone(), MorphismKind::Zero, true)
    }

    pub fn multiply_by(s: &SemigroupModel, m: u64) -> Morphism {
        Self::build(format!("times{m}"), s.clone(), s.clone(), MorphismKind::MultiplyBy(m), true)
    }

    pub fn infinite(s: &SemigroupModel) -> Morphism {
        Self::build("infinite", s.clone(), s.clone(), MorphismKind::Infinite, false)
    }

    /// Soft retraction from `Z` (or `K_q ⊔ (0,∞]`) into itself or `[0, ∞]`.
    pub fn sigma(domain: &SemigroupModel, codomain: &SemigroupModel) -> Result<Morphism> {
        let ok = is_zlike(domain) && (codomain == domain || matches!(codomain.kind, ModelKind::HalfLine));
        if !ok {
            return Err(mismatch(domain, "sigma maps Z into Z or [0,∞]"));
        }
        Ok(Self::build("sigma", domain.clone(), codomain.clone(), MorphismKind::Sigma, false))
    }

    pub fn nat_to_soft(domain: &SemigroupModel, codomain: &SemigroupModel) -> Result<Morphism> {
        if !matches!(domain.kind, ModelKind::Nbar) || !is_zlike(codomain) {
            return Err(mismatch(domain, "nat_to_soft maps Nbar into Z"));
        }
        Ok(Self::build("nat_to_soft", domain.clone(), codomain.clone(), MorphismKind::NatToSoft, false))
    }

    pub fn scale(domain: &SemigroupModel, codomain: &SemigroupModel, r: BigRational) -> Result<Morphism> {
        let dom_ok = matches!(domain.kind, ModelKind::HalfLine) || is_zlike(domain);
        let cod_ok = matches!(codomain.kind, ModelKind::HalfLine) || is_zlike(codomain);
        if !dom_ok || !cod_ok || !r.is_positive() {
            return Err(mismatch(domain, "scale needs a positive ratio between soft parts"));
        }
        let cu = matches!(domain.kind, ModelKind::HalfLine);
        let name = format!("scale{}", fmt_rat(&r));
        Ok(Self::build(name, domain.clone(), codomain.clone(), MorphismKind::Scale(r), cu))
    }

    pub fn project(domain: &SemigroupModel, i: usize) -> Result<Morphism> {
        match &domain.kind {
            ModelKind::Product(ms) if i < ms.len() => {
                Ok(Self::build(format!("project{i}"), domain.clone(), ms[i].clone(), MorphismKind::Project(i), true))
            }
            _ => Err(mismatch(domain, "projection index out of range")),
        }
    }

    pub fn inject(codomain: &SemigroupModel, i: usize) -> Result<Morphism> {
        match &codomain.kind {
            ModelKind::Product(ms) if i < ms.len() => {
                Ok(Self::build(format!("inject{i}"), ms[i].clone(), codomain.clone(), MorphismKind::Inject(i), true))
            }
            _ => Err(mismatch(codomain, "injection index out of range")),
        }
    }

    /// Glues `n ↦ n·one` on the compact part of `Z` with `soft` on the soft
    /// part.
    pub fn glue(domain: &SemigroupModel, one: Element, soft: Morphism) -> Result<Morphism> {
        if !matches!(domain.kind, ModelKind::Z) || !matches!(soft.domain.kind, ModelKind::HalfLine) {
            return Err(mismatch(domain, "glue maps Z using a map out of [0,∞]"));
        }
        soft.codomain.check(&one)?;
        let codomain = soft.codomain.clone();
        let kind = MorphismKind::Glue { one, soft: Box::new(soft) };
        Ok(Self::build("glue", domain.clone(), codomain, kind, false))
    }

    pub fn explicit(
        domain: &SemigroupModel,
        codomain: &SemigroupModel,
        pairs: Vec<(Element, Element)>,
    ) -> Result<Morphism> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            domain.check(&a)?;
            codomain.check(&b)?;
            map.insert(a, b);
        }
        if let ModelKind::Table(t) = &domain.kind {
            if let Some(i) = (0..t.len()).find(|i| !map.contains_key(&Elem::Table(*i))) {
                return Err(mismatch(domain, &format!("explicit map misses {}", t.names[i])));
            }
        }
        Ok(Self::build("explicit", domain.clone(), codomain.clone(), MorphismKind::Explicit(map), false))
    }

    /// `g ∘ f`.
    pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism> {
        Self::compose_all(vec![f.clone(), g.clone()])
    }

    /// Composite applying `parts` in order.
    pub fn compose_all(parts: Vec<Morphism>) -> Result<Morphism> {
        let first = parts.first().ok_or_else(|| CuError::Parse("empty composition".into()))?;
        for w in parts.windows(2) {
            if w[0].codomain != w[1].domain {
                return Err(mismatch(&w[1].domain, &format!("{} does not land in it", w[0].name)));
            }
        }
        let last = parts.last().expect("nonempty");
        let name = parts.iter().rev().map(|m| m.name.as_str()).collect::<Vec<_>>().join(".");
        let cu = parts.iter().all(|m| m.declared_cu);
        Ok(Self::build(name, first.domain.clone(), last.codomain.clone(), MorphismKind::Compose(parts.clone()), cu))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_cu(mut self, cu: bool) -> Self {
        self.declared_cu = cu;
        self
    }

    pub fn with_witness(mut self, w: WitnessOracle) -> Self {
        self.witness = w;
        self
    }

    /// Image of `a`, checked against domain and codomain.
    pub fn apply(&self, a: &Element) -> Result<Element> {
        self.domain.check(a)?;
        let b = self
            .apply_gen(a)
            .ok_or_else(|| CuError::ModelMismatch { model: self.domain.name.clone(), element: a.to_string() })?;
        self.codomain.check(&b)?;
        Ok(b)
    }

    /// Image of a canonical element known to lie in the domain.
    pub fn image(&self, a: &Element) -> Element {
        self.apply_gen(a).unwrap_or_else(|| panic!("{} is undefined at {a}", self.name))
    }

    /// Image of a concrete element or of a family; `None` where the map has
    /// no closed form (explicit graphs off their points).
    pub fn apply_gen<P: Payload>(&self, a: &Elem<P>) -> Option<Elem<P>> {
        use MorphismKind as K;
        let cod = &self.codomain;
        let to_cod = |x: Ext<P>| -> Elem<P> {
            match cod.kind {
                ModelKind::HalfLine => Elem::Real(x),
                _ => Elem::Soft(x).canonical(),
            }
        };
        let out = match (&self.kind, a) {
            (K::Identity, _) => a.clone(),
            (K::Zero, _) => cod.zero_gen(),
            (K::MultiplyBy(m), _) => cod.scale_gen(a, *m)?,
            (K::Infinite, _) => cod.infinite_multiple_gen(a)?,
            (K::Sigma, Elem::Compact(n)) => to_cod(Ext::Fin(n.clone())),
            (K::Sigma, Elem::Soft(t)) => to_cod(t.clone()),
            (K::NatToSoft, Elem::Nat(n)) => Elem::Soft(n.clone()).canonical(),
            (K::Scale(r), Elem::Real(t) | Elem::Soft(t)) => to_cod(t.scale(r)),
            (K::Scale(r), Elem::Compact(n)) => to_cod(Ext::Fin(n.scale(r))),
            (K::Project(i), Elem::Tuple(v)) => v.get(*i)?.clone(),
            (K::Inject(i), _) => match cod.zero_gen::<P>() {
                Elem::Tuple(mut v) => {
                    *v.get_mut(*i)? = a.clone();
                    Elem::Tuple(v)
                }
                _ => return None,
            },
            (K::Glue { one, .. }, Elem::Compact(n)) => match n.as_constant().and_then(|c| to_u64(&c)) {
                Some(k) => cod.scale_gen(&one.to_payload::<P>(), k)?,
                None => one.to_payload::<P>().mul_payload(n)?,
            },
            (K::Glue { soft, .. }, Elem::Soft(t)) => soft.apply_gen(&Elem::Real(t.clone()))?,
            (K::Explicit(map), _) => map.get(&a.as_concrete()?)?.to_payload(),
            (K::Compose(parts), _) => {
                let mut x = a.clone();
                for p in parts {
                    x = p.apply_gen(&x)?;
                }
                x
            }
            _ => return None,
        };
        Some(out)
    }

    /// The graph of the map on `points`.
    pub fn graph(&self, points: &[Element]) -> Vec<(Element, Element)> {
        points.iter().filter_map(|a| Some((a.clone(), self.apply_gen(a)?))).collect()
    }

    pub fn is_zero_map(&self) -> bool {
        matches!(self.kind, MorphismKind::Zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat, ExtRat};

    fn c(n: i64) -> Element {
        Elem::Compact(int(n as u64))
    }
    fn s(p: i64, q: i64) -> Element {
        Elem::Soft(Ext::Fin(rat(p, q)))
    }
    fn nat(n: u64) -> Element {
        Elem::Nat(ExtRat::from_u64(n))
    }

    #[test]
    fn catalog_examples() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        let sigma = Morphism::sigma(&z, &z).unwrap();
        assert_eq!(sigma.apply(&c(3)).unwrap(), s(3, 1));
        assert_eq!(Morphism::identity(&z).apply(&s(1, 2)).unwrap(), s(1, 2));
        assert_eq!(Morphism::multiply_by(&n, 2).apply(&nat(3)).unwrap(), nat(6));
        let ns = Morphism::nat_to_soft(&n, &z).unwrap();
        assert_eq!(Morphism::compose(&sigma, &ns).unwrap().apply(&nat(2)).unwrap(), s(2, 1));
        let m6 = Morphism::compose(&Morphism::multiply_by(&n, 2), &Morphism::multiply_by(&n, 3)).unwrap();
        assert_eq!(m6.apply(&nat(1)).unwrap(), nat(6));
        assert!(Morphism::apply(&sigma, &nat(1)).is_err());
    }

    #[test]
    fn compose_checks_types_and_flags() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        assert!(Morphism::compose(&Morphism::identity(&z), &Morphism::identity(&n)).is_err());
        let ns = Morphism::nat_to_soft(&n, &z).unwrap();
        assert!(!Morphism::compose(&Morphism::identity(&z), &ns).unwrap().declared_cu);
        assert!(Morphism::compose(&Morphism::identity(&n), &Morphism::identity(&n)).unwrap().declared_cu);
    }

    #[test]
    fn glue_and_products() {
        let z = SemigroupModel::z();
        let h = SemigroupModel::half_line();
        let soft = Morphism::scale(&h, &z, int(1)).unwrap();
        let g = Morphism::glue(&z, c(2), soft).unwrap();
        assert_eq!(g.apply(&c(3)).unwrap(), c(6));
        assert_eq!(g.apply(&s(1, 2)).unwrap(), s(1, 2));
        let zz = SemigroupModel::product(vec![z.clone(), z.clone()]);
        let inj = Morphism::inject(&zz, 1).unwrap();
        let pr = Morphism::project(&zz, 1).unwrap();
        assert_eq!(inj.apply(&s(1, 3)).unwrap(), Elem::Tuple(vec![c(0), s(1, 3)]));
        assert_eq!(pr.apply(&inj.apply(&s(1, 3)).unwrap()).unwrap(), s(1, 3));
    }

    #[test]
    fn families_map_symbolically() {
        let z = SemigroupModel::z();
        let ch = z.factory_chain(&s(1, 1));
        let sigma = Morphism::sigma(&z, &SemigroupModel::half_line()).unwrap();
        let img = ch.map(|f| sigma.apply_gen(f)).unwrap();
        assert_eq!(SemigroupModel::half_line().sup_chain(&img).unwrap(), Elem::Real(Ext::Fin(int(1))));
    }
}
