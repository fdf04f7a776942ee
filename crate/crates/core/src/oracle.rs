//! Brute-force references: an order decided from approximating chains, a
//! morphism check that only reads a tabulated graph, and the lemma suite.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::axioms::{semigroup_almost_divisible, semigroup_almost_unperforated};
use crate::checks::{
    check_almost_divisible, check_almost_unperforated, check_cu_morphism, check_generalized_cu_morphism,
};
use crate::element::{Elem, Element};
use crate::factorization::{
    alpha_value, catalog_pairs, ceiling_bound, lemma_almunpf_check, mu_sample, FactorPair, MuSpec,
};
use crate::model::{grid_rationals, ModelKind, SemigroupModel};
use crate::morphism::Morphism;
use crate::rational::{int, Ext, ExtRat};
use crate::report::{CheckReport, Counterexample, Status};

/// Chain index at which the order oracle compares terms.
fn oracle_index(depth: u64) -> u64 {
    (64 * depth.max(2).pow(4)).max(1 << 10)
}

/// Coordinates of the `d`-th term of the approximating chain of `a`.
fn term_coordinates(s: &SemigroupModel, a: &Element, d: u64) -> Vec<ExtRat> {
    s.factory_chain(a).term(d).coordinates()
}

fn dominated(a: &[ExtRat], b: &[ExtRat]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}

/// `a ≤ b` (or `a ≪ b` when `way_below`), decided by comparing numeric
/// coordinates of deep terms of the approximating chains, without the
/// closed-form order of the model. Tables have no chains and are looked
/// up.
pub fn brute_order_oracle(s: &SemigroupModel, a: &Element, b: &Element, depth: u64, way_below: bool) -> bool {
    if let ModelKind::Table(t) = &s.kind {
        return match (a, b) {
            (Elem::Table(i), Elem::Table(j)) => t.le(*i, *j),
            _ => false,
        };
    }
    let i = oracle_index(depth);
    if way_below {
        // a ≪ b iff a sits below some term of the chain of b; compare a much
        // deeper term of a with the i-th term of b.
        let bi = s.factory_chain(b).term(i);
        dominated(&term_coordinates(s, a, i * i), &term_coordinates(s, &bi, i * i))
    } else {
        dominated(&term_coordinates(s, a, i), &term_coordinates(s, b, i))
    }
}

/// Oracle order with per-element caching of chain coordinates.
struct OracleOrder<'a> {
    s: &'a SemigroupModel,
    index: u64,
    cache: HashMap<Element, Vec<ExtRat>>,
}

impl<'a> OracleOrder<'a> {
    fn new(s: &'a SemigroupModel, depth: u64) -> Self {
        OracleOrder { s, index: oracle_index(depth), cache: HashMap::new() }
    }

    fn le(&mut self, a: &Element, b: &Element) -> bool {
        if let ModelKind::Table(t) = &self.s.kind {
            return matches!((a, b), (Elem::Table(i), Elem::Table(j)) if t.le(*i, *j));
        }
        let ca = self.coords(a);
        let cb = self.coords(b);
        dominated(&ca, &cb)
    }

    fn coords(&mut self, a: &Element) -> Vec<ExtRat> {
        if let Some(c) = self.cache.get(a) {
            return c.clone();
        }
        let c = term_coordinates(self.s, a, self.index);
        self.cache.insert(a.clone(), c.clone());
        c
    }
}

/// A map tabulated on a grid, on sums of grid pairs, and on sampled terms
/// of approximating chains.
#[derive(Clone, Debug, PartialEq)]
pub struct MapGraph {
    pub name: String,
    pub domain: SemigroupModel,
    pub codomain: SemigroupModel,
    pub grid: Vec<Element>,
    /// Each grid element with sampled terms of a chain converging to it.
    pub chains: Vec<(Element, Vec<Element>)>,
    pub values: HashMap<Element, Element>,
}

impl MapGraph {
    pub fn get(&self, a: &Element) -> Option<&Element> {
        self.values.get(a)
    }

    /// Overrides one value, e.g. to seed a fault.
    pub fn set(&mut self, a: Element, b: Element) {
        self.values.insert(a, b);
    }
}

/// Sampled chain indices `2, 4, …, 2^12`.
const CHAIN_SAMPLES: u32 = 12;

pub fn brute_graph(f: &Morphism, depth: u64) -> MapGraph {
    let s = &f.domain;
    let grid = s.grid(depth);
    let mut chains = vec![];
    for a in &grid {
        let c = s.factory_chain(a);
        chains.push((a.clone(), (1..=CHAIN_SAMPLES).map(|j| c.term(1 << j)).collect()));
    }
    if matches!(s.kind, ModelKind::Z | ModelKind::Kq(_)) {
        let compacts: Vec<Element> = (1..=CHAIN_SAMPLES).map(|j| Elem::Compact(int(1 << j))).collect();
        chains.push((Elem::Soft(Ext::Inf), compacts));
    }
    let mut points: Vec<Element> = grid.clone();
    for (i, a) in grid.iter().enumerate() {
        for b in &grid[i..] {
            points.push(s.sum(a, b));
        }
    }
    points.extend(chains.iter().flat_map(|(_, ts)| ts.iter().cloned()));
    let values = points.into_iter().filter_map(|a| Some((a.clone(), f.apply_gen(&a)?))).collect();
    MapGraph { name: f.name.clone(), domain: s.clone(), codomain: f.codomain.clone(), grid, chains, values }
}

/// Monotonicity, additivity, zero and suprema of a tabulated map, using
/// the oracle order on both sides.
pub fn brute_morphism_check(g: &MapGraph, depth: u64) -> CheckReport {
    let start = Instant::now();
    let (s, t) = (&g.domain, &g.codomain);
    let mut r = CheckReport::new("brute-morphism-check", &g.name, depth);
    let mut dom = OracleOrder::new(s, depth);
    let mut cod = OracleOrder::new(t, depth);
    let mut img = Vec::with_capacity(g.grid.len());
    for a in &g.grid {
        match g.get(a) {
            Some(b) => img.push(b.clone()),
            None => {
                r.fail(Counterexample::new("total").with("a", s.render(a)), "graph misses a grid point");
                return r.timed(start);
            }
        }
    }
    r.instances += 1;
    if let Some(z) = g.get(&s.zero()) {
        if !cod.le(z, &t.zero()) {
            r.fail(Counterexample::new("zero"), "f(0) ≠ 0");
            return r.timed(start);
        }
    }
    let n = g.grid.len();
    'pairs: for i in 0..n {
        for j in 0..n {
            r.instances += 1;
            let (a, b) = (&g.grid[i], &g.grid[j]);
            if dom.le(a, b) && !cod.le(&img[i], &img[j]) {
                r.fail(
                    Counterexample::new("monotone").with("a", s.render(a)).with("b", s.render(b)),
                    format!("f(a) = {} ≰ f(b) = {}", t.render(&img[i]), t.render(&img[j])),
                );
                break 'pairs;
            }
            if j < i {
                continue;
            }
            if let Some(fab) = g.get(&s.sum(a, b)) {
                let sum = t.sum(&img[i], &img[j]);
                if !(cod.le(fab, &sum) && cod.le(&sum, fab)) {
                    r.fail(
                        Counterexample::new("additive").with("a", s.render(a)).with("b", s.render(b)),
                        format!("f(a+b) = {} ≠ f(a)+f(b) = {}", t.render(fab), t.render(&sum)),
                    );
                    break 'pairs;
                }
            }
        }
    }
    if r.failed() {
        return r.timed(start);
    }
    let uppers = t.grid(depth);
    for (sup, terms) in &g.chains {
        r.instances += 1;
        let (Some(top), Some(vals)) = (g.get(sup), terms.iter().map(|a| g.get(a)).collect::<Option<Vec<_>>>()) else {
            continue;
        };
        let increasing = vals.windows(2).all(|w| cod.le(w[0], w[1]));
        let below = vals.iter().all(|v| cod.le(v, top));
        let last = vals.last().expect("samples");
        let least = uppers.iter().all(|u| !cod.le(last, u) || cod.le(top, u));
        if !(increasing && below && least) {
            r.fail(
                Counterexample::new("sup").with("a", s.render(sup)),
                format!("sampled images do not converge to {}", t.render(top)),
            );
            break;
        }
    }
    r.timed(start)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaSuiteConfig {
    pub depth: u64,
    /// Bound on numerators and denominators of sampled fractions.
    pub frac_bound: u64,
    pub models: Vec<SemigroupModel>,
    pub morphisms: Vec<Morphism>,
    pub pairs: Vec<FactorPair>,
    pub seed: u64,
    /// Random instances per pair in the μ-lemma sweep.
    pub samples: u64,
}

impl LemmaSuiteConfig {
    pub fn empty() -> Self {
        LemmaSuiteConfig {
            depth: 6,
            frac_bound: 8,
            models: vec![],
            morphisms: vec![],
            pairs: vec![],
            seed: 0,
            samples: 8,
        }
    }
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        LemmaSuiteConfig {
            models: builtin_models(),
            morphisms: catalog_morphisms(),
            pairs: catalog_pairs(),
            seed: 7,
            ..LemmaSuiteConfig::empty()
        }
    }
}

pub fn builtin_models() -> Vec<SemigroupModel> {
    vec![
        SemigroupModel::z(),
        SemigroupModel::half_line(),
        SemigroupModel::nbar(),
        SemigroupModel::kq(&[2]),
        SemigroupModel::t4(),
    ]
}

/// Maps between built-in models, named uniquely.
pub fn catalog_morphisms() -> Vec<Morphism> {
    let z = SemigroupModel::z();
    let h = SemigroupModel::half_line();
    let n = SemigroupModel::nbar();
    let kq = SemigroupModel::kq(&[2]);
    let t4 = SemigroupModel::t4();
    vec![
        Morphism::identity(&z),
        Morphism::sigma(&z, &z).expect("Z to Z").named("sigma_Z"),
        Morphism::multiply_by(&z, 2).named("times2_Z"),
        Morphism::infinite(&z).named("infinite_Z"),
        Morphism::zero(&z, &z).named("zero_Z"),
        Morphism::sigma(&z, &h).expect("Z to H").named("sigma_ZH"),
        Morphism::identity(&n),
        Morphism::multiply_by(&n, 2).named("times2_Nbar"),
        Morphism::nat_to_soft(&n, &z).expect("Nbar to Z"),
        Morphism::identity(&h),
        Morphism::scale(&h, &z, int(1)).expect("H to Z").named("soft_HZ"),
        Morphism::scale(&h, &h, crate::rational::rat(1, 2)).expect("H to H").named("half_H"),
        Morphism::identity(&kq),
        Morphism::identity(&t4),
    ]
}

/// `k` and `m` bound in the pureness checks of the suite.
const PURE_BOUND: u64 = 3;

fn pure(f: &Morphism, depth: u64) -> (CheckReport, CheckReport) {
    (check_almost_unperforated(f, depth, PURE_BOUND), check_almost_divisible(f, depth, PURE_BOUND))
}

/// A check passes unless it found a counterexample.
fn not_failed(r: &CheckReport) -> bool {
    r.status != Status::Fail
}

fn render_cx(r: &CheckReport) -> String {
    r.counterexample.as_ref().map(|c| c.to_string()).unwrap_or_default()
}

struct Suite {
    report: CheckReport,
    controls: Vec<String>,
}

impl Suite {
    fn count(&mut self, n: u64) {
        self.report.instances += n;
    }

    fn violation(&mut self, cx: Counterexample, detail: impl Into<String>) {
        self.report.fail(cx, detail);
    }
}

/// Runs the permanence, μ-set and α sweeps over the configured catalog.
/// Known failures (Nbar divisibility, T4 unperforation, `nat_to_soft` not
/// preserving `≪`) are reproduced as negative controls whenever the
/// catalog contains them; a control that stops failing fails the suite.
pub fn lemma_suite(cfg: &LemmaSuiteConfig) -> CheckReport {
    let start = Instant::now();
    let mut suite = Suite {
        report: CheckReport::new("lemma-suite", "catalog", cfg.depth)
            .bound("frac_bound", cfg.frac_bound)
            .bound("seed", cfg.seed)
            .bound("samples", cfg.samples),
        controls: vec![],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    id_mult(cfg, &mut suite);
    comp_mult(cfg, &mut suite);
    mu_nesting(cfg, &mut suite, &mut rng);
    for p in &cfg.pairs {
        pair_sweeps(cfg, p, &mut suite, &mut rng);
    }
    let Suite { mut report, controls } = suite;
    for c in controls {
        report.witness(c);
    }
    report.timed(start)
}

/// The identity of a model is pure exactly when the model is.
fn id_mult(cfg: &LemmaSuiteConfig, suite: &mut Suite) {
    let d = cfg.depth;
    for s in &cfg.models {
        let id = Morphism::identity(s);
        let (u, v) = pure(&id, d);
        let su = semigroup_almost_unperforated(s, d, PURE_BOUND);
        let sv = semigroup_almost_divisible(s, d, PURE_BOUND);
        suite.count(2);
        if not_failed(&u) != not_failed(&su) || not_failed(&v) != not_failed(&sv) {
            suite.violation(
                Counterexample::new("id-mult").with("model", &s.name),
                format!("identity: {}/{}, model: {}/{}", u.status, v.status, su.status, sv.status),
            );
        }
        match &s.kind {
            ModelKind::Nbar => {
                if v.failed() {
                    suite.controls.push(format!("control nbar-divisibility: {}", render_cx(&v)));
                } else {
                    suite.violation(
                        Counterexample::new("control").with("model", &s.name),
                        "Nbar identity became almost divisible",
                    );
                }
            }
            ModelKind::Table(_) if s.name == "T4" => {
                if u.failed() {
                    suite.controls.push(format!("control t4-unperforation: {}", render_cx(&u)));
                } else {
                    suite.violation(
                        Counterexample::new("control").with("model", &s.name),
                        "T4 identity became almost unperforated",
                    );
                }
            }
            _ => {}
        }
    }
}

/// Composition keeps pureness: a pure `f` followed by any generalized
/// Cu-morphism `g`; a Cu-morphism `f` followed by a pure `g`; and any
/// generalized Cu-morphism into `Z` or `[0, ∞]` is pure.
fn comp_mult(cfg: &LemmaSuiteConfig, suite: &mut Suite) {
    let d = cfg.depth;
    let ms = &cfg.morphisms;
    let pure_of: Vec<bool> = ms
        .iter()
        .map(|f| {
            let (u, v) = pure(f, d);
            not_failed(&u) && not_failed(&v)
        })
        .collect();
    let generalized: Vec<bool> = ms.iter().map(|f| check_generalized_cu_morphism(f, d).passed()).collect();
    let cu: Vec<bool> = ms
        .iter()
        .map(|f| {
            let r = check_cu_morphism(f, d);
            if f.name == "nat_to_soft" {
                if r.failed() {
                    suite.controls.push(format!("control nat_to_soft-way-below: {}", render_cx(&r)));
                } else {
                    suite.violation(
                        Counterexample::new("control").with("map", &f.name),
                        "nat_to_soft became a Cu-morphism",
                    );
                }
            }
            r.passed()
        })
        .collect();
    for (i, f) in ms.iter().enumerate() {
        for (j, g) in ms.iter().enumerate() {
            if f.codomain != g.domain {
                continue;
            }
            let part1 = pure_of[i] && generalized[j];
            let part2 = cu[i] && pure_of[j];
            if !part1 && !part2 {
                continue;
            }
            let h = Morphism::compose(g, f).expect("composable");
            let (u, v) = pure(&h, d);
            suite.count(1);
            if !(not_failed(&u) && not_failed(&v)) {
                let part = if part1 { "comp-mult-1" } else { "comp-mult-2" };
                suite.violation(
                    Counterexample::new(part).with("f", &f.name).with("g", &g.name),
                    format!("{} is not pure: {}{}", h.name, render_cx(&u), render_cx(&v)),
                );
            }
        }
        let pure_target = matches!(f.codomain.kind, ModelKind::Z | ModelKind::HalfLine);
        if pure_target && generalized[i] {
            suite.count(1);
            if !pure_of[i] {
                suite.violation(
                    Counterexample::new("comp-mult-3").with("f", &f.name),
                    "a map into a pure model is not pure",
                );
            }
        }
    }
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, v: &'a [T]) -> &'a T {
    v.choose(rng).expect("nonempty")
}

/// `μ((k,n),x'',x) ⊆ μ((k,n),x',x) ⊆ μ((k,n),0,x)` for sampled
/// `x' ≤ x'' ≤ x`.
fn mu_nesting(cfg: &LemmaSuiteConfig, suite: &mut Suite, rng: &mut ChaCha8Rng) {
    let d = cfg.depth.min(6);
    let kn = cfg.frac_bound.clamp(1, 6);
    for s in &cfg.models {
        let g = s.grid(d);
        for _ in 0..cfg.samples {
            let three = [pick(rng, &g).clone(), pick(rng, &g).clone(), pick(rng, &g).clone()];
            let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let Some([i, j, l]) =
                orders.into_iter().find(|&[i, j, l]| s.le(&three[i], &three[j]) && s.le(&three[j], &three[l]))
            else {
                continue;
            };
            let (xp, xpp, x) = (three[i].clone(), three[j].clone(), three[l].clone());
            let (k, n) = (rng.gen_range(1..=kn), rng.gen_range(1..=kn));
            suite.count(1);
            let inner = mu_sample(s, &MuSpec::new(k, n, xpp.clone(), x.clone()), d);
            let middle = mu_sample(s, &MuSpec::new(k, n, xp.clone(), x.clone()), d);
            let outer = mu_sample(s, &MuSpec::new(k, n, s.zero(), x.clone()), d);
            if !inner.iter().all(|y| middle.contains(y)) || !middle.iter().all(|y| outer.contains(y)) {
                suite.violation(
                    Counterexample::new("mu-nesting")
                        .with("model", &s.name)
                        .with("k", k)
                        .with("n", n)
                        .with("x'", s.render(&xp))
                        .with("x''", s.render(&xpp))
                        .with("x", s.render(&x)),
                    "μ-sets are not nested",
                );
            }
        }
    }
}

/// For one pair: the ordering lemma on sampled μ-sets, the anchor
/// `α(x,1) = φ₂φ₁(x)`, and the bound `α(x,t) ≤ ⌈t⌉·φ₂φ₁(x)`.
fn pair_sweeps(cfg: &LemmaSuiteConfig, p: &FactorPair, suite: &mut Suite, rng: &mut ChaCha8Rng) {
    let d = cfg.depth;
    let fb = cfg.frac_bound.max(2);
    let (s1, s2, target) = (p.source(), p.middle(), p.target());
    let mids = s2.grid(d);
    for _ in 0..cfg.samples {
        let (k1, n1) = (rng.gen_range(1..=fb), rng.gen_range(1..=fb));
        let (k2, n2) = (rng.gen_range(1..=fb), rng.gen_range(1..=fb));
        if k1 * (n2 + 1) >= k2 * n1 {
            continue;
        }
        let (a, b) = (pick(rng, &mids).clone(), pick(rng, &mids).clone());
        let (x1, x2) = if s2.le(&a, &b) {
            (a, b)
        } else if s2.le(&b, &a) {
            (b, a)
        } else {
            continue;
        };
        let interp = mids.iter().find(|m| s2.wb(&x1, m) && s2.wb(m, &x2));
        match lemma_almunpf_check(p, (k1, n1), (k2, n2), &x1, &x2, interp, d.min(6)) {
            Ok(r) => {
                suite.count(1);
                if r.failed() {
                    suite.violation(r.counterexample.clone().expect("failure"), format!("{}: {}", p.name, r.detail));
                }
            }
            Err(e) => suite.violation(Counterexample::new("lemma-almunpf").with("pair", &p.name), e.to_string()),
        }
    }
    for x in s1.grid(d) {
        suite.count(1);
        match alpha_value(p, &x, &Elem::Compact(int(1)), d) {
            Ok((v, _)) if v == p.composite(&x) => {}
            other => suite.violation(
                Counterexample::new("anchor").with("pair", &p.name).with("x", s1.render(&x)),
                format!("α(x,1) = {other:?}"),
            ),
        }
        for q in grid_rationals(fb) {
            let t = Elem::Soft(Ext::Fin(q));
            suite.count(1);
            let bound = ceiling_bound(p, &x, &t);
            match alpha_value(p, &x, &t, d) {
                Ok((v, _)) if target.le(&v, &bound) => {}
                other => suite.violation(
                    Counterexample::new("ceiling-bound")
                        .with("pair", &p.name)
                        .with("x", s1.render(&x))
                        .with("t", t.to_string()),
                    format!("α(x,t) = {other:?} exceeds {}", target.render(&bound)),
                ),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn order_oracle_examples() {
        let z = SemigroupModel::z();
        let c1 = Elem::Compact(int(1));
        let s1 = Elem::Soft(Ext::Fin(int(1)));
        assert!(brute_order_oracle(&z, &s1, &c1, 12, false));
        assert!(!brute_order_oracle(&z, &c1, &s1, 12, false));
        assert!(brute_order_oracle(&z, &c1, &c1, 12, true));
        assert!(!brute_order_oracle(&z, &s1, &s1, 12, true));
        let h = SemigroupModel::half_line();
        let r = |p, q| Elem::Real(Ext::Fin(rat(p, q)));
        assert!(!brute_order_oracle(&h, &r(1, 1), &r(1, 2), 12, false));
        let n = SemigroupModel::nbar();
        let inf = Elem::Nat(Ext::Inf);
        assert!(!brute_order_oracle(&n, &inf, &inf, 12, true));
        assert!(brute_order_oracle(&n, &inf, &inf, 12, false));
    }

    #[test]
    fn brute_check_examples() {
        let z = SemigroupModel::z();
        assert!(brute_morphism_check(&brute_graph(&Morphism::identity(&z), 6), 6).passed());
        let sigma = Morphism::sigma(&z, &z).unwrap();
        assert!(brute_morphism_check(&brute_graph(&sigma, 6), 6).passed());
        let mut g = brute_graph(&Morphism::identity(&z), 6);
        g.set(Elem::Compact(int(2)), Elem::Compact(int(1)));
        let r = brute_morphism_check(&g, 6);
        assert!(r.failed());
        let cx = r.counterexample.unwrap();
        assert_eq!(cx.law, "additive");
        assert_eq!(cx.get("a"), Some("compact:1"));
    }

    #[test]
    fn empty_suite_is_vacuous() {
        let r = lemma_suite(&LemmaSuiteConfig::empty());
        assert!(r.passed());
        assert_eq!(r.instances, 0);
    }
}
