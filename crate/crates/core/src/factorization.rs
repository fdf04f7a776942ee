//! μ-sets, the α map `S₁ × Z → T` built from a pair `φ₁: S₁ → S₂`,
//! `φ₂: S₂ → T`, the gluing criterion for maps out of `Z`, and the rational
//! and soft variants of α.

use std::collections::HashMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::chain::Chain;
use crate::checks::{
    check_almost_divisible, check_almost_unperforated, check_generalized_cu_morphism, divisibility_witness,
    SAMPLE_INDEX,
};
use crate::element::{Elem, Element, Family};
use crate::error::{CuError, Result};
use crate::model::{grid_rationals, ModelKind, SemigroupModel};
use crate::morphism::Morphism;
use crate::oracle::{brute_graph, brute_morphism_check};
use crate::rational::{fmt_rat, int, is_smooth, Ext, ExtRat, RatFn};
use crate::report::{CheckReport, Counterexample};

/// Concrete witnesses computed before the chain is handed to its closed form.
pub const CHAIN_TERMS: u64 = 8;

/// Bound on `k` and `m` when the roles of a pair are validated.
pub const ROLE_BOUND: u64 = 3;

/// Grid depth of the second-image sweep behind `omega_n_eval`.
pub const OMEGA_SWEEP_DEPTH: u64 = 12;

/// `μ((k,n), x', x) = { y : ny ≤ kx, kx' ≤ (n+1)y }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuSpec {
    pub k: u64,
    pub n: u64,
    pub x_prime: Element,
    pub x: Element,
}

impl MuSpec {
    pub fn new(k: u64, n: u64, x_prime: Element, x: Element) -> Self {
        MuSpec { k, n, x_prime, x }
    }
}

pub fn mu_contains(s: &SemigroupModel, spec: &MuSpec, y: &Element) -> Result<bool> {
    s.check(&spec.x_prime)?;
    s.check(&spec.x)?;
    s.check(y)?;
    Ok(mu_holds(s, spec, y))
}

fn mu_holds(s: &SemigroupModel, spec: &MuSpec, y: &Element) -> bool {
    s.le(&s.times(y, spec.n), &s.times(&spec.x, spec.k))
        && s.le(&s.times(&spec.x_prime, spec.k), &s.times(y, spec.n + 1))
}

/// Grid elements of the μ-set, in grid order.
pub fn mu_sample(s: &SemigroupModel, spec: &MuSpec, depth: u64) -> Vec<Element> {
    s.grid(depth).into_iter().filter(|y| mu_holds(s, spec, y)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub name: String,
    /// Expected to be almost divisible.
    pub phi1: Morphism,
    /// Expected to be almost unperforated.
    pub phi2: Morphism,
}

impl FactorPair {
    pub fn new(name: impl Into<String>, phi1: Morphism, phi2: Morphism) -> Result<Self> {
        if phi1.codomain != phi2.domain {
            return Err(CuError::ModelMismatch {
                model: phi2.domain.name.clone(),
                element: format!("{} lands in {}", phi1.name, phi1.codomain.name),
            });
        }
        Ok(FactorPair { name: name.into(), phi1, phi2 })
    }

    pub fn source(&self) -> &SemigroupModel {
        &self.phi1.domain
    }

    pub fn middle(&self) -> &SemigroupModel {
        &self.phi1.codomain
    }

    pub fn target(&self) -> &SemigroupModel {
        &self.phi2.codomain
    }

    /// `φ₂φ₁(x)`.
    pub fn composite(&self, x: &Element) -> Element {
        self.phi2.image(&self.phi1.image(x))
    }
}

/// Fractions `k_d/n_d ↗ t`, source terms `x_d ↗ x`, and witnesses
/// `y_d ∈ μ((k_d,n_d), φ₁(x_{d-1}), φ₁(x_d))`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessChain {
    pub target: ExtRat,
    pub fractions: Vec<(u64, u64)>,
    pub xs: Vec<Element>,
    pub ys: Vec<Element>,
}

/// `r_d = t·d/(d+1)`, or `d` when `t = ∞`.
fn schedule(t: &ExtRat) -> RatFn {
    match t {
        Ext::Fin(t) => RatFn::approaching(t),
        Ext::Inf => RatFn::index(),
    }
}

/// `r = k/n` in lowest terms, scaled by the least `c` with
/// `kc/(nc+1) > prev`.
fn inflate(r: &BigRational, prev: &BigRational) -> Result<(u64, u64)> {
    let (k, n) = (r.numer().clone(), r.denom().clone());
    let c = if prev.is_zero() {
        BigInt::one()
    } else {
        // kc > prev·(nc + 1)  ⇔  c·(k − prev·n) > prev
        let gap = BigRational::from(k.clone()) - prev * BigRational::from(n.clone());
        (prev / gap).floor().to_integer() + BigInt::one()
    };
    let too_big = || CuError::UnsupportedChainForm(format!("fraction {} overflows", fmt_rat(r)));
    Ok(((&k * &c).to_u64().ok_or_else(too_big)?, (&n * &c).to_u64().ok_or_else(too_big)?))
}

/// Builds the chain for `x` and `t` and returns it with the symbolic
/// family of witnesses when `φ₁` has one.
pub fn witness_chain(p: &FactorPair, x: &Element, t: &ExtRat) -> Result<(WitnessChain, Chain, Option<Family>)> {
    let (s1, s2) = (p.source(), p.middle());
    let xc = s1.factory_chain(x);
    let len = xc.prefix.len() as u64 + CHAIN_TERMS;
    let r = schedule(t);
    let mut wc = WitnessChain { target: t.clone(), fractions: vec![], xs: vec![], ys: vec![] };
    let mut prev_x = s1.zero();
    let mut prev_r = BigRational::zero();
    for d in 1..=len {
        let rd = r.eval(d);
        let (k, n) = inflate(&rd, &prev_r)?;
        let xd = xc.term(d);
        let z = divisibility_witness(&p.phi1, n, &prev_x, &xd)?;
        let y = s2.times(&z, k);
        let spec = MuSpec::new(k, n, p.phi1.image(&prev_x), p.phi1.image(&xd));
        if !mu_holds(s2, &spec, &y) {
            return Err(CuError::PreconditionViolated(format!("witness chain breaks at d={d}")));
        }
        wc.fractions.push((k, n));
        wc.xs.push(xd.clone());
        wc.ys.push(y);
        prev_x = xd;
        prev_r = rd;
    }
    let family = p
        .phi1
        .apply_gen(&xc.tail)
        .and_then(|v| v.soft_scale(&r))
        .filter(|f| (xc.prefix.len() as u64 + 1..=len).all(|d| f.eval(d) == wc.ys[d as usize - 1]));
    let ychain =
        Chain { prefix: wc.ys[..xc.prefix.len()].to_vec(), tail: family.clone().unwrap_or_else(|| s2.zero().lift()) };
    Ok((wc, ychain, family))
}

fn z_model() -> SemigroupModel {
    SemigroupModel::z()
}

/// `α(x, m) = m·φ₂φ₁(x)` on compacts and `α(x, t) = sup Φ(t, φ₁(x))` on
/// soft `t`, computed from a witness chain.
pub fn alpha_eval(p: &FactorPair, x: &Element, t: &Element) -> Result<Element> {
    p.source().check(x)?;
    z_model().check(t)?;
    let target = p.target();
    if x.is_zero() || t.is_zero() {
        return Ok(target.zero());
    }
    match t {
        Elem::Compact(m) => {
            let m = m.to_u64().ok_or_else(|| CuError::Parse(format!("compact {}", fmt_rat(m))))?;
            Ok(target.times(&p.composite(x), m))
        }
        Elem::Soft(t) => {
            let (_, ychain, family) = witness_chain(p, x, t)?;
            if family.is_none() {
                return Err(CuError::UnsupportedChainForm(format!("{} has no closed-form witnesses", p.phi1.name)));
            }
            let image = ychain
                .map(|f| p.phi2.apply_gen(f))
                .ok_or_else(|| CuError::UnsupportedChainForm(format!("{} on a chain", p.phi2.name)))?;
            target.sup_chain(&image)
        }
        _ => Err(CuError::ModelMismatch { model: "Z".into(), element: t.to_string() }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleAlpha {
    pub value: Element,
    /// The value is the supremum itself rather than a bound at depth.
    pub exact: bool,
}

/// `sup { y : ny ≤ kv, k/n < t }` by model, independent of any chain.
pub fn mu_sup_below(s: &SemigroupModel, v: &Element, t: &ExtRat) -> Option<Element> {
    let nat = |m: &ExtRat| -> ExtRat {
        match (m, t) {
            (Ext::Fin(m), _) if m.is_zero() => Ext::zero(),
            (Ext::Inf, _) | (_, Ext::Inf) => Ext::Inf,
            (Ext::Fin(m), Ext::Fin(t)) => match Ext::Fin(m * t).ceil() {
                Ext::Fin(c) => Ext::Fin(c - int(1)),
                Ext::Inf => Ext::Inf,
            },
        }
    };
    let out = match (&s.kind, v) {
        (ModelKind::Z | ModelKind::Kq(_), Elem::Compact(m)) => Elem::Soft(Ext::Fin(m.clone()).mul(t)),
        (ModelKind::Z | ModelKind::Kq(_), Elem::Soft(u)) => Elem::Soft(u.mul(t)),
        (ModelKind::HalfLine, Elem::Real(u)) => Elem::Real(u.mul(t)),
        (ModelKind::Nbar, Elem::Nat(m)) => Elem::Nat(nat(m)),
        (ModelKind::Lsc(_), Elem::Lsc(f)) => Elem::Lsc(f.iter().map(nat).collect()),
        (ModelKind::Product(ms), Elem::Tuple(vs)) => {
            Elem::Tuple(ms.iter().zip(vs).map(|(m, v)| mu_sup_below(m, v, t)).collect::<Option<_>>()?)
        }
        _ => return None,
    };
    Some(out.canonical())
}

/// Bound on `k`, `n` and the grid when `Φ` is enumerated.
const ENUMERATION_DEPTH: u64 = 6;

/// Enumerates `Φ(t, φ₁(x))` over small `k, n` and grid `y`, and returns its
/// supremum: exactly where the middle model has a closed-form μ-supremum,
/// otherwise as the least grid upper bound.
pub fn alpha_eval_oracle(p: &FactorPair, x: &Element, t: &Element, depth: u64) -> OracleAlpha {
    let (s2, target) = (p.middle(), p.target());
    if x.is_zero() || t.is_zero() {
        return OracleAlpha { value: target.zero(), exact: true };
    }
    let t = match t {
        Elem::Compact(m) => {
            let m = m.to_u64().expect("compact elements of Z are integers");
            return OracleAlpha { value: target.times(&p.composite(x), m), exact: true };
        }
        Elem::Soft(t) => t.clone(),
        _ => panic!("{t} is not an element of Z"),
    };
    let v = p.phi1.image(x);
    let e = match s2.kind {
        // Product grids grow with the power of the number of factors.
        ModelKind::Product(_) | ModelKind::Lsc(_) => depth.min(ENUMERATION_DEPTH / 2),
        _ => depth.min(ENUMERATION_DEPTH),
    };
    let fractions: Vec<(u64, u64)> = (1..=e)
        .flat_map(|k| (1..=e).map(move |n| (k, n)))
        .filter(|&(k, n)| Ext::Fin(BigRational::new(k.into(), n.into())) < t)
        .collect();
    let mut images: Vec<Element> = vec![];
    for y in s2.grid(e) {
        let inside = fractions.iter().any(|&(k, n)| s2.le(&s2.times(&y, n), &s2.times(&v, k)));
        if inside {
            let w = p.phi2.image(&y);
            if !images.contains(&w) {
                images.push(w);
            }
        }
    }
    if let Some(c) = mu_sup_below(s2, &v, &t) {
        let value = p.phi2.image(&c);
        if images.iter().all(|w| target.le(w, &value)) {
            return OracleAlpha { value, exact: true };
        }
    }
    let mut candidates: Vec<Element> = target.grid(depth);
    candidates.extend(images.iter().cloned());
    let uppers: Vec<&Element> = candidates.iter().filter(|u| images.iter().all(|w| target.le(w, u))).collect();
    let least = uppers
        .iter()
        .find(|u| uppers.iter().all(|o| target.le(u, o)))
        .or_else(|| uppers.first())
        .map(|u| (*u).clone())
        .unwrap_or_else(|| target.inf_times(&p.composite(x)));
    OracleAlpha { value: least, exact: false }
}

/// `alpha_eval`, falling back to the oracle when the pair has no closed
/// form. The flag is false when the value is only a bound.
pub fn alpha_value(p: &FactorPair, x: &Element, t: &Element, depth: u64) -> Result<(Element, bool)> {
    match alpha_eval(p, x, t) {
        Ok(v) => Ok((v, true)),
        Err(CuError::UnsupportedChainForm(_)) => {
            let o = alpha_eval_oracle(p, x, t, depth);
            Ok((o.value, o.exact))
        }
        Err(e) => Err(e),
    }
}

/// `⌈t⌉·φ₂φ₁(x)`, the a priori bound on `α(x, t)`.
pub fn ceiling_bound(p: &FactorPair, x: &Element, t: &Element) -> Element {
    let target = p.target();
    let fx = p.composite(x);
    let c = match t {
        Elem::Compact(m) => Ext::Fin(m.clone()),
        Elem::Soft(s) => s.ceil(),
        _ => Ext::Inf,
    };
    match c {
        Ext::Inf => target.inf_times(&fx),
        Ext::Fin(c) => target.times(&fx, c.to_u64().unwrap_or(0)),
    }
}

fn checked_role(r: &CheckReport, role: &str, report: &mut CheckReport) -> bool {
    report.instances += r.instances;
    match r.status {
        crate::report::Status::Pass => true,
        crate::report::Status::Fail => {
            let mut cx = r.counterexample.clone().unwrap_or_else(|| Counterexample::new(role));
            cx.law = format!("precondition {role}: {}", cx.law);
            report.fail(cx, format!("{}: {}", r.check, r.detail));
            false
        }
        crate::report::Status::Inconclusive => {
            report.inconclusive(format!("precondition {role} unresolved: {}", r.detail));
            true
        }
    }
}

struct AlphaTable<'a> {
    p: &'a FactorPair,
    depth: u64,
    values: HashMap<(Element, Element), Element>,
    exact: bool,
}

impl<'a> AlphaTable<'a> {
    fn get(&mut self, x: &Element, t: &Element) -> Result<Element> {
        let key = (x.clone(), t.clone());
        if let Some(v) = self.values.get(&key) {
            return Ok(v.clone());
        }
        let (v, exact) = alpha_value(self.p, x, t, self.depth)?;
        self.exact &= exact;
        self.values.insert(key, v.clone());
        Ok(v)
    }
}

/// Bounded verification that `α` is additive, monotone and sup-preserving
/// in each variable, preserves `≪` jointly when both maps are Cu, and
/// satisfies `α(x, 1) = φ₂φ₁(x)`.
pub fn verify_alpha_bimorphism(p: &FactorPair, depth: u64) -> CheckReport {
    let start = Instant::now();
    let mut r = CheckReport::new("verify-bimorphism", &p.name, depth).bound("role_bound", ROLE_BOUND);
    if !checked_role(&check_almost_divisible(&p.phi1, depth, ROLE_BOUND), "almost-divisible", &mut r)
        || !checked_role(&check_almost_unperforated(&p.phi2, depth, ROLE_BOUND), "almost-unperforated", &mut r)
    {
        return r.timed(start);
    }
    if let Err(e) = verify_alpha_laws(p, depth, &mut r) {
        r.fail(Counterexample::new("alpha-undefined"), e.to_string());
    }
    r.timed(start)
}

fn verify_alpha_laws(p: &FactorPair, depth: u64, r: &mut CheckReport) -> Result<()> {
    let (s1, target, z) = (p.source(), p.target(), z_model());
    let xs = s1.grid(depth);
    let ts = z.grid(depth);
    let mut a = AlphaTable { p, depth, values: HashMap::new(), exact: true };
    let show = |x: &Element, t: &Element| (s1.render(x), z.render(t));

    for x in &xs {
        r.instances += 1;
        let v = a.get(x, &Elem::Compact(int(1)))?;
        if v != p.composite(x) {
            r.fail(
                Counterexample::new("anchor").with("x", s1.render(x)),
                format!("α(x,1) = {} but φ₂φ₁(x) = {}", target.render(&v), target.render(&p.composite(x))),
            );
            return Ok(());
        }
    }

    for t in &ts {
        for (i, x1) in xs.iter().enumerate() {
            for x2 in &xs[i..] {
                r.instances += 1;
                let (v1, v2) = (a.get(x1, t)?, a.get(x2, t)?);
                let sum = a.get(&s1.sum(x1, x2), t)?;
                if sum != target.sum(&v1, &v2) {
                    let (x1s, ts_) = show(x1, t);
                    r.fail(
                        Counterexample::new("additive-in-x").with("x1", x1s).with("x2", s1.render(x2)).with("t", ts_),
                        "α(x1+x2, t) ≠ α(x1,t) + α(x2,t)",
                    );
                    return Ok(());
                }
                for (lo, hi, vlo, vhi) in [(x1, x2, &v1, &v2), (x2, x1, &v2, &v1)] {
                    if s1.le(lo, hi) && !target.le(vlo, vhi) {
                        r.fail(
                            Counterexample::new("monotone-in-x")
                                .with("x1", s1.render(lo))
                                .with("x2", s1.render(hi))
                                .with("t", z.render(t)),
                            "x1 ≤ x2 but α(x1,t) ≰ α(x2,t)",
                        );
                        return Ok(());
                    }
                }
            }
        }
    }

    for x in &xs {
        for (i, t1) in ts.iter().enumerate() {
            for t2 in &ts[i..] {
                r.instances += 1;
                let (v1, v2) = (a.get(x, t1)?, a.get(x, t2)?);
                let sum = a.get(x, &z.sum(t1, t2))?;
                if sum != target.sum(&v1, &v2) {
                    r.fail(
                        Counterexample::new("additive-in-t")
                            .with("x", s1.render(x))
                            .with("t1", z.render(t1))
                            .with("t2", z.render(t2)),
                        "α(x, t1+t2) ≠ α(x,t1) + α(x,t2)",
                    );
                    return Ok(());
                }
                for (lo, hi, vlo, vhi) in [(t1, t2, &v1, &v2), (t2, t1, &v2, &v1)] {
                    if z.le(lo, hi) && !target.le(vlo, vhi) {
                        r.fail(
                            Counterexample::new("monotone-in-t")
                                .with("x", s1.render(x))
                                .with("t1", z.render(lo))
                                .with("t2", z.render(hi)),
                            "t1 ≤ t2 but α(x,t1) ≰ α(x,t2)",
                        );
                        return Ok(());
                    }
                }
            }
        }
    }

    let uppers = target.grid(depth);
    let sampled = [1, 2, 3, 4, SAMPLE_INDEX];
    // Sup preservation: along each test chain the sampled values increase,
    // stay below the value at the supremum, and every grid upper bound of
    // the deepest sample bounds that value too.
    let sup_law = |a: &mut AlphaTable,
                   r: &mut CheckReport,
                   terms: Vec<(Element, Element)>,
                   at_sup: (Element, Element),
                   law: &str|
     -> Result<bool> {
        r.instances += 1;
        let top = a.get(&at_sup.0, &at_sup.1)?;
        let vals = terms.iter().map(|(x, t)| a.get(x, t)).collect::<Result<Vec<_>>>()?;
        let increasing = vals.windows(2).all(|w| target.le(&w[0], &w[1]));
        let last = vals.last().expect("samples");
        let below = vals.iter().all(|v| target.le(v, &top));
        let least = uppers.iter().all(|u| !target.le(last, u) || target.le(&top, u));
        if !(increasing && below && least) {
            r.fail(
                Counterexample::new(law).with("x", s1.render(&at_sup.0)).with("t", z.render(&at_sup.1)),
                format!("sampled values do not converge to {}", target.render(&top)),
            );
            return Ok(false);
        }
        Ok(true)
    };
    for c in s1.test_chains(depth) {
        let sup = s1.sup_chain(&c)?;
        let terms: Vec<Element> = sampled.iter().map(|&d| c.term(d)).collect();
        for t in &ts {
            let pairs = terms.iter().map(|x| (x.clone(), t.clone())).collect();
            if !sup_law(&mut a, r, pairs, (sup.clone(), t.clone()), "sup-in-x")? {
                return Ok(());
            }
        }
    }
    for c in z.test_chains(depth) {
        let sup = z.sup_chain(&c)?;
        let terms: Vec<Element> = sampled.iter().map(|&d| c.term(d)).collect();
        for x in &xs {
            let pairs = terms.iter().map(|t| (x.clone(), t.clone())).collect();
            if !sup_law(&mut a, r, pairs, (x.clone(), sup.clone()), "sup-in-t")? {
                return Ok(());
            }
        }
    }

    if p.phi1.declared_cu && p.phi2.declared_cu {
        let wx: Vec<(&Element, &Element)> =
            xs.iter().flat_map(|x| xs.iter().map(move |y| (x, y))).filter(|(a, b)| s1.wb(a, b)).collect();
        let wt: Vec<(&Element, &Element)> =
            ts.iter().flat_map(|x| ts.iter().map(move |y| (x, y))).filter(|(a, b)| z.wb(a, b)).collect();
        for &(xp, x) in &wx {
            for &(tp, t) in &wt {
                r.instances += 1;
                let (lo, hi) = (a.get(xp, tp)?, a.get(x, t)?);
                if !target.wb(&lo, &hi) {
                    r.fail(
                        Counterexample::new("way-below-joint")
                            .with("x'", s1.render(xp))
                            .with("x", s1.render(x))
                            .with("t'", z.render(tp))
                            .with("t", z.render(t)),
                        "α(x',t') is not way below α(x,t)",
                    );
                    return Ok(());
                }
            }
        }
    } else {
        r.witness("way-below clause skipped: a map is not declared Cu");
    }
    if !a.exact {
        r.witness("some values are oracle bounds");
    }
    Ok(())
}

/// The gluing criterion for `Z → T`: `n ↦ n·one` on compacts and
/// `gamma_s` on the soft part give a generalized Cu-morphism iff
/// `γ(σ(1)) ≤ one ≤ γ(1+ε)` for all `ε > 0` and `gamma_s` is one.
pub fn z_extension_criterion(one: &Element, gamma_s: &Morphism, depth: u64) -> CheckReport {
    let start = Instant::now();
    let t = &gamma_s.codomain;
    let subject = format!("{}+{}", t.render(one), gamma_s.name);
    let mut r = CheckReport::new("z-extension-criterion", subject, depth);
    if !matches!(gamma_s.domain.kind, ModelKind::HalfLine) || !t.contains(one) {
        r.fail(Counterexample::new("shape"), "the soft map must start at [0,∞] and one must lie in its codomain");
        return r.timed(start);
    }
    let real = |q: BigRational| Elem::Real(Ext::Fin(q));
    r.instances += 1;
    let at_one = gamma_s.image(&real(int(1)));
    if !t.le(&at_one, one) {
        r.fail(
            Counterexample::new("soft-one-below").with("gamma(sigma(1))", t.render(&at_one)).with("one", t.render(one)),
            "γ(σ(1)) ≰ γ(1)",
        );
    }
    for eps in grid_rationals(depth) {
        r.instances += 1;
        let above = gamma_s.image(&real(int(1) + &eps));
        if !t.le(one, &above) {
            r.fail(
                Counterexample::new("one-below-soft").with("eps", fmt_rat(&eps)).with("one", t.render(one)),
                format!("γ(1) ≰ γ(1+ε) = {}", t.render(&above)),
            );
            break;
        }
    }
    r.absorb(&check_generalized_cu_morphism(gamma_s, depth));
    r.exact = false;
    r.timed(start)
}

/// The criterion, cross-validated against a brute-force check of the glued
/// map. A disagreement is a failure.
pub fn check_z_extension(one: &Element, gamma_s: &Morphism, depth: u64) -> CheckReport {
    let start = Instant::now();
    let mut r = z_extension_criterion(one, gamma_s, depth);
    r.check = "check-z-extension".into();
    let glued = match Morphism::glue(&z_model(), one.clone(), gamma_s.clone()) {
        Ok(g) => g,
        Err(e) => {
            r.fail(Counterexample::new("glue"), e.to_string());
            return r.timed(start);
        }
    };
    let brute = brute_morphism_check(&brute_graph(&glued, depth), depth);
    r.instances += brute.instances;
    r.witness(format!("brute: {}", brute.status));
    if r.passed() != brute.passed() {
        r.status = crate::report::Status::Fail;
        r.counterexample = Some(
            Counterexample::new("criterion-disagreement")
                .with("criterion", if r.passed() { "pass" } else { "fail" })
                .with("brute", brute.status),
        );
        r.detail = format!("brute-force check disagrees: {}", brute.detail);
    }
    r.timed(start)
}

/// Checks that `φ₂(y₁) ≤ φ₂(y₂)` for grid `y₁ ∈ μ((k₁,n₁),0,x₁)` and
/// `y₂ ∈ μ((k₂,n₂),x₁,x₂)`, and `φ₂(y₁) ≪ φ₂(y₂)` for
/// `y₂ ∈ μ((k₂,n₂),x₂',x₂)` when `φ₂` is Cu and an interpolant `x₂'` is
/// given.
#[allow(clippy::too_many_arguments)]
pub fn lemma_almunpf_check(
    p: &FactorPair,
    (k1, n1): (u64, u64),
    (k2, n2): (u64, u64),
    x1: &Element,
    x2: &Element,
    interpolant: Option<&Element>,
    depth: u64,
) -> Result<CheckReport> {
    let start = Instant::now();
    let (s, target, phi) = (p.middle(), p.target(), &p.phi2);
    s.check(x1)?;
    s.check(x2)?;
    if k1 == 0 || n1 == 0 || k2 == 0 || n2 == 0 {
        return Err(CuError::PreconditionViolated("k and n must be positive".into()));
    }
    // k₁/n₁ < k₂/(n₂+1)
    if k1 as u128 * (n2 as u128 + 1) >= k2 as u128 * n1 as u128 {
        return Err(CuError::PreconditionViolated(format!("{k1}/{n1} < {k2}/{} fails", n2 + 1)));
    }
    if !s.le(x1, x2) {
        return Err(CuError::PreconditionViolated("x1 ≤ x2 fails".into()));
    }
    let mut r = CheckReport::new("lemma-almunpf", &p.name, depth)
        .bound("k1", k1)
        .bound("n1", n1)
        .bound("k2", k2)
        .bound("n2", n2);
    let ys1 = mu_sample(s, &MuSpec::new(k1, n1, s.zero(), x1.clone()), depth);
    let ys2 = mu_sample(s, &MuSpec::new(k2, n2, x1.clone(), x2.clone()), depth);
    let img1: Vec<Element> = ys1.iter().map(|y| phi.image(y)).collect();
    'order: for (y1, w1) in ys1.iter().zip(&img1) {
        for y2 in &ys2 {
            r.instances += 1;
            if !target.le(w1, &phi.image(y2)) {
                r.fail(
                    Counterexample::new("lemma-order").with("y1", s.render(y1)).with("y2", s.render(y2)),
                    "φ(y1) ≰ φ(y2)",
                );
                break 'order;
            }
        }
    }
    if let (Some(x2p), true) = (interpolant, phi.declared_cu) {
        s.check(x2p)?;
        if !(s.wb(x1, x2p) && s.wb(x2p, x2)) {
            return Err(CuError::PreconditionViolated("x1 ≪ x2' ≪ x2 fails".into()));
        }
        let ys3 = mu_sample(s, &MuSpec::new(k2, n2, x2p.clone(), x2.clone()), depth);
        'wb: for (y1, w1) in ys1.iter().zip(&img1) {
            for y2 in &ys3 {
                r.instances += 1;
                if !target.wb(w1, &phi.image(y2)) {
                    r.fail(
                        Counterexample::new("lemma-way-below").with("y1", s.render(y1)).with("y2", s.render(y2)),
                        "φ(y1) is not way below φ(y2)",
                    );
                    break 'wb;
                }
            }
        }
    }
    r.witness(format!("|mu1|={} |mu2|={}", ys1.len(), ys2.len()));
    Ok(r.timed(start))
}

fn require_smooth(n: u64, primes: &[u64]) -> Result<()> {
    if n == 0 || (n > 1 && !is_smooth(&BigInt::from(n), primes)) {
        return Err(CuError::NotADivisor { n });
    }
    Ok(())
}

/// `ω_n(x) = φ₂(z)` for the `z` with `n·z = φ₁(x)`; a second grid `z'`
/// with a different image is reported as ambiguity.
pub fn omega_n_eval(p: &FactorPair, x: &Element, n: u64, primes: &[u64]) -> Result<Element> {
    require_smooth(n, primes)?;
    p.source().check(x)?;
    let s2 = p.middle();
    let v = p.phi1.image(x);
    let z = s2
        .exact_divide(&v, n)
        .ok_or_else(|| CuError::NoWitnessFound(format!("{} is not divisible by {n}", s2.render(&v))))?;
    let y = p.phi2.image(&z);
    let other = s2.grid(OMEGA_SWEEP_DEPTH).into_iter().find(|w| s2.times(w, n) == v && p.phi2.image(w) != y);
    if let Some(w) = other {
        return Err(CuError::Ambiguous(format!(
            "{} and {} both divide {} by {n}",
            s2.render(&z),
            s2.render(&w),
            s2.render(&v)
        )));
    }
    Ok(y)
}

/// `α_q(x, k/n) = k·ω_n(x)` on compacts of `K_q`; `α` on soft `t`.
pub fn alpha_q_eval(p: &FactorPair, x: &Element, t: &Element, primes: &[u64]) -> Result<Element> {
    match t {
        Elem::Compact(q) => {
            if q.is_negative() {
                return Err(CuError::Parse(fmt_rat(q)));
            }
            if q.is_zero() || x.is_zero() {
                return Ok(p.target().zero());
            }
            let (k, n) = (q.numer().to_u64(), q.denom().to_u64());
            let (k, n) = k.zip(n).ok_or_else(|| CuError::Parse(fmt_rat(q)))?;
            let w = omega_n_eval(p, x, n, primes)?;
            Ok(p.target().times(&w, k))
        }
        Elem::Soft(_) => alpha_eval(p, x, t),
        _ => Err(CuError::ModelMismatch { model: "Kq".into(), element: t.to_string() }),
    }
}

/// `α(x, Soft(t))`; at `t = 1` the value must be `φ₂φ₁(x)`.
pub fn alpha_soft_eval(p: &FactorPair, x: &Element, t: &ExtRat) -> Result<Element> {
    let got = alpha_eval(p, x, &Elem::Soft(t.clone()).canonical())?;
    if *t == Ext::Fin(int(1)) {
        let expected = p.composite(x);
        if got != expected {
            let target = p.target();
            return Err(CuError::SoftnessViolated { got: target.render(&got), expected: target.render(&expected) });
        }
    }
    Ok(got)
}

/// Built-in pairs with the expected roles.
pub fn catalog_pairs() -> Vec<FactorPair> {
    let z = SemigroupModel::z();
    let h = SemigroupModel::half_line();
    let nbar = SemigroupModel::nbar();
    let z2 = SemigroupModel::product(vec![z.clone(), z.clone()]);
    let id_z = Morphism::identity(&z);
    let id_h = Morphism::identity(&h);
    let inject = Morphism::inject(&z2, 0).expect("index 0");
    let pair = |name: &str, f: Morphism, g: Morphism| FactorPair::new(name, f, g).expect("composable");
    vec![
        pair("id_Z;id_Z", id_z.clone(), id_z.clone()),
        pair("nat_to_soft;id_Z", Morphism::nat_to_soft(&nbar, &z).expect("Nbar to Z"), id_z.clone()),
        pair("sigma;id_Z", Morphism::sigma(&z, &z).expect("Z to Z"), id_z.clone()),
        pair("id_H;id_H", id_h.clone(), id_h.clone()),
        pair("id_Z;times2", id_z.clone(), Morphism::multiply_by(&z, 2)),
        pair("inject0;project0", inject.clone(), Morphism::project(&z2, 0).expect("index 0")),
        pair("inject0;id_ZxZ", inject, Morphism::identity(&z2)),
        pair("sigma;id_H", Morphism::sigma(&z, &h).expect("Z to H"), id_h),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn c(n: i64) -> Element {
        Elem::Compact(rat(n, 1))
    }

    fn soft(n: i64, d: i64) -> Element {
        Elem::Soft(Ext::Fin(rat(n, d)))
    }

    fn pair(name: &str) -> FactorPair {
        catalog_pairs().into_iter().find(|p| p.name == name).unwrap()
    }

    #[test]
    fn mu_membership() {
        let z = SemigroupModel::z();
        assert!(mu_contains(&z, &MuSpec::new(1, 2, c(0), c(1)), &soft(1, 2)).unwrap());
        assert!(!mu_contains(&z, &MuSpec::new(1, 2, c(1), c(1)), &soft(1, 3)).unwrap());
        let sample = mu_sample(&z, &MuSpec::new(1, 2, c(1), c(1)), 6);
        assert!(!sample.is_empty());
        for y in &sample {
            match y {
                Elem::Soft(Ext::Fin(s)) => assert!(*s > rat(1, 3) && *s <= rat(1, 2)),
                _ => panic!("{y}"),
            }
        }
        let nbar = SemigroupModel::nbar();
        let one = Elem::Nat(ExtRat::from_u64(1));
        assert!(mu_sample(&nbar, &MuSpec::new(1, 2, one.clone(), one), 6).is_empty());
        assert_eq!(mu_sample(&z, &MuSpec::new(3, 2, c(0), c(0)), 6), vec![c(0)]);
    }

    #[test]
    fn inflation_keeps_the_gap() {
        let (k, n) = inflate(&rat(2, 3), &rat(1, 2)).unwrap();
        assert_eq!(BigRational::new(k.into(), n.into()), rat(2, 3));
        assert!(rat(k as i64, n as i64 + 1) > rat(1, 2));
        assert_eq!(inflate(&rat(3, 1), &rat(2, 1)).unwrap(), (9, 3));
    }

    #[test]
    fn witness_chain_invariants() {
        let p = pair("id_Z;id_Z");
        let (wc, _, family) = witness_chain(&p, &c(1), &Ext::Fin(rat(1, 2))).unwrap();
        assert!(family.is_some());
        for w in wc.fractions.windows(2) {
            let (k0, n0) = w[0];
            let (k1, n1) = w[1];
            assert!(rat(k0 as i64, n0 as i64) < rat(k1 as i64, n1 as i64 + 1));
        }
    }

    #[test]
    fn alpha_values() {
        let p = pair("id_Z;id_Z");
        assert_eq!(alpha_eval(&p, &c(1), &c(2)).unwrap(), c(2));
        assert_eq!(alpha_eval(&p, &c(1), &soft(1, 2)).unwrap(), soft(1, 2));
        assert_eq!(alpha_eval(&p, &c(1), &soft(1, 1)).unwrap(), soft(1, 1));
        assert_eq!(alpha_eval(&p, &c(0), &soft(5, 1)).unwrap(), c(0));
        let q = pair("nat_to_soft;id_Z");
        let two = Elem::Nat(ExtRat::from_u64(2));
        assert_eq!(alpha_eval(&q, &two, &soft(1, 1)).unwrap(), soft(2, 1));
    }

    #[test]
    fn oracle_values() {
        let p = pair("id_Z;id_Z");
        let o = alpha_eval_oracle(&p, &c(1), &soft(1, 2), 12);
        assert_eq!(o, OracleAlpha { value: soft(1, 2), exact: true });
        let q = pair("nat_to_soft;id_Z");
        let o = alpha_eval_oracle(&q, &Elem::Nat(ExtRat::from_u64(2)), &soft(1, 1), 12);
        assert_eq!(o, OracleAlpha { value: soft(2, 1), exact: true });
        assert_eq!(alpha_eval_oracle(&p, &c(0), &soft(5, 1), 3).value, c(0));
    }

    #[test]
    fn nbar_supremum_below() {
        let nbar = SemigroupModel::nbar();
        let v = Elem::Nat(ExtRat::from_u64(3));
        assert_eq!(mu_sup_below(&nbar, &v, &Ext::Fin(rat(1, 2))), Some(Elem::Nat(ExtRat::from_u64(1))));
        assert_eq!(mu_sup_below(&nbar, &v, &Ext::Fin(rat(2, 3))), Some(Elem::Nat(ExtRat::from_u64(1))));
        assert_eq!(mu_sup_below(&nbar, &v, &Ext::Inf), Some(Elem::Nat(Ext::Inf)));
    }

    #[test]
    fn bimorphism_examples() {
        assert!(verify_alpha_bimorphism(&pair("id_Z;id_Z"), 4).passed());
        let r = verify_alpha_bimorphism(&pair("nat_to_soft;id_Z"), 4);
        assert!(r.passed(), "{r}");
        assert!(r.witnesses.iter().any(|w| w.contains("skipped")));
        let nbar = SemigroupModel::nbar();
        let id = Morphism::identity(&nbar);
        let bad = FactorPair::new("id_Nbar", id.clone(), id).unwrap();
        let r = verify_alpha_bimorphism(&bad, 4);
        assert!(r.failed());
        assert!(r.counterexample.unwrap().law.starts_with("precondition almost-divisible"));
    }

    #[test]
    fn z_extension_examples() {
        let z = SemigroupModel::z();
        let h = SemigroupModel::half_line();
        let soft_id = Morphism::scale(&h, &z, int(1)).unwrap();
        assert!(check_z_extension(&c(1), &soft_id, 6).passed());
        assert!(check_z_extension(&soft(1, 1), &soft_id, 6).passed());
        let r = z_extension_criterion(&c(2), &soft_id, 6);
        assert!(r.failed());
        assert_eq!(r.counterexample.as_ref().unwrap().law, "one-below-soft");
        let r = check_z_extension(&c(2), &soft_id, 6);
        assert!(r.failed());
        assert_ne!(r.counterexample.unwrap().law, "criterion-disagreement");
    }

    #[test]
    fn lemma_examples() {
        let p = pair("id_Z;id_Z");
        let r = lemma_almunpf_check(&p, (1, 4), (1, 2), &c(1), &c(1), None, 8).unwrap();
        assert!(r.passed());
        assert!(r.instances > 0);
        assert!(matches!(
            lemma_almunpf_check(&p, (1, 2), (1, 2), &c(1), &c(1), None, 8),
            Err(CuError::PreconditionViolated(_))
        ));
        let z = SemigroupModel::z();
        let zero = FactorPair::new("zero", Morphism::identity(&z), Morphism::zero(&z, &z)).unwrap();
        assert!(lemma_almunpf_check(&zero, (1, 3), (1, 1), &c(1), &c(2), Some(&soft(3, 2)), 6).unwrap().passed());
    }

    #[test]
    fn rational_variant() {
        let kq = SemigroupModel::kq(&[2]);
        let id = Morphism::identity(&kq);
        let p = FactorPair::new("id_Kq", id.clone(), id).unwrap();
        let half = Elem::Compact(rat(1, 2));
        assert_eq!(omega_n_eval(&p, &c(1), 2, &[2]).unwrap(), half);
        assert_eq!(omega_n_eval(&p, &soft(1, 1), 2, &[2]).unwrap(), soft(1, 2));
        assert_eq!(omega_n_eval(&p, &c(1), 3, &[2]), Err(CuError::NotADivisor { n: 3 }));
        assert_eq!(alpha_q_eval(&p, &c(1), &Elem::Compact(rat(3, 2)), &[2]).unwrap(), Elem::Compact(rat(3, 2)));
        assert_eq!(alpha_q_eval(&p, &c(1), &c(1), &[2]).unwrap(), c(1));
        assert_eq!(alpha_q_eval(&p, &c(1), &soft(1, 2), &[2]).unwrap(), soft(1, 2));
    }

    #[test]
    fn soft_variant() {
        let q = pair("nat_to_soft;id_Z");
        let two = Elem::Nat(ExtRat::from_u64(2));
        assert_eq!(alpha_soft_eval(&q, &two, &Ext::Fin(int(1))).unwrap(), soft(2, 1));
        let p = pair("id_Z;id_Z");
        assert!(matches!(alpha_soft_eval(&p, &c(1), &Ext::Fin(int(1))), Err(CuError::SoftnessViolated { .. })));
        assert_eq!(alpha_soft_eval(&q, &Elem::Nat(Ext::zero()), &Ext::Fin(int(3))).unwrap(), c(0));
    }
}
