//! Grid checks of morphism properties and divisibility witnesses.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::axioms::is_strongly_soft;
use crate::chain::Chain;
use crate::element::Element;
use crate::error::{CuError, Result};
use crate::model::{ModelKind, SemigroupModel};
use crate::morphism::{Morphism, WitnessOracle};
use crate::rational::smooth_numbers;
use crate::report::{CheckReport, Counterexample};

/// Grid depth used by `divisibility_witness` when no closed form applies.
pub const DEFAULT_SEARCH_DEPTH: u64 = 24;

/// Chain index used to probe suprema when a map has no closed form on
/// chain tails.
pub const SAMPLE_INDEX: u64 = 1 << 20;

/// Monotone, additive, zero-preserving, and preserving suprema of the
/// closed-form chains of the domain.
pub fn check_generalized_cu_morphism(f: &Morphism, depth: u64) -> CheckReport {
    let start = Instant::now();
    let mut r = CheckReport::new("check-generalized-cu-morphism", &f.name, depth).exact(f.domain.is_table());
    generalized_into(f, depth, &mut r);
    r.timed(start)
}

fn generalized_into(f: &Morphism, depth: u64, r: &mut CheckReport) {
    let (s, t) = (&f.domain, &f.codomain);
    let g = s.grid(depth);
    let mut img = Vec::with_capacity(g.len());
    for a in &g {
        match f.apply(a) {
            Ok(b) => img.push(b),
            Err(e) => {
                r.fail(Counterexample::new("total").with("a", s.render(a)), e.to_string());
                return;
            }
        }
    }
    r.instances += 1;
    if f.image(&s.zero()) != t.zero() {
        r.fail(Counterexample::new("zero").with("a", s.render(&s.zero())), "f(0) ≠ 0");
        return;
    }
    let bad_pair = (0..g.len() * g.len()).into_par_iter().find_map_first(|idx| {
        let (i, j) = (idx / g.len(), idx % g.len());
        if s.le(&g[i], &g[j]) && !t.le(&img[i], &img[j]) {
            return Some(("monotone", i, j, "a ≤ b but f(a) ≰ f(b)"));
        }
        let sum = s.sum(&g[i], &g[j]);
        if f.apply_gen(&sum).as_ref() != Some(&t.sum(&img[i], &img[j])) {
            return Some(("additive", i, j, "f(a + b) ≠ f(a) + f(b)"));
        }
        None
    });
    r.instances += (g.len() * g.len()) as u64;
    if let Some((law, i, j, why)) = bad_pair {
        r.fail(Counterexample::new(law).with("a", s.render(&g[i])).with("b", s.render(&g[j])), why);
        return;
    }
    for c in s.test_chains(depth) {
        r.instances += 1;
        match sup_preserved(f, &c) {
            Ok(true) => {}
            Ok(false) => {
                let sup = s.sup_chain(&c).map(|e| s.render(&e)).unwrap_or_default();
                r.fail(
                    Counterexample::new("supremum").with("sup", sup).with("chain", format!("{:?}", c.tail)),
                    "f(sup c) ≠ sup f(c)",
                );
                return;
            }
            Err(e) => {
                r.inconclusive(format!("supremum not decidable: {e}"));
            }
        }
    }
}

/// Whether `f` maps the supremum of `c` to the supremum of its image.
fn sup_preserved(f: &Morphism, c: &Chain) -> Result<bool> {
    let (s, t) = (&f.domain, &f.codomain);
    let sup = s.sup_chain(c)?;
    let fsup = f.image(&sup);
    match c.map(|x| f.apply_gen(x)) {
        Some(image) => match t.sup_chain(&image) {
            Ok(v) => Ok(v == fsup),
            Err(CuError::NotMonotone { .. }) => Ok(false),
            Err(e) => Err(e),
        },
        None => {
            let far = f
                .apply_gen(&c.term(SAMPLE_INDEX))
                .ok_or_else(|| CuError::UnsupportedChainForm(format!("{} off its graph", f.name)))?;
            if !t.le(&far, &fsup) {
                return Ok(false);
            }
            Ok(t.grid(16).iter().all(|u| !t.le(&far, u) || t.le(&fsup, u)))
        }
    }
}

/// Generalized check plus preservation of `≪` on grid pairs.
pub fn check_cu_morphism(f: &Morphism, depth: u64) -> CheckReport {
    let start = Instant::now();
    let mut r = CheckReport::new("check-cu-morphism", &f.name, depth).exact(f.domain.is_table());
    generalized_into(f, depth, &mut r);
    if r.failed() {
        return r.timed(start);
    }
    let (s, t) = (&f.domain, &f.codomain);
    let g = s.grid(depth);
    let img: Vec<Element> = g.iter().map(|a| f.image(a)).collect();
    let bad = (0..g.len() * g.len()).into_par_iter().find_first(|&idx| {
        let (i, j) = (idx / g.len(), idx % g.len());
        s.wb(&g[i], &g[j]) && !t.wb(&img[i], &img[j])
    });
    r.instances += (g.len() * g.len()) as u64;
    if let Some(idx) = bad {
        let (i, j) = (idx / g.len(), idx % g.len());
        r.fail(
            Counterexample::new("way-below").with("a", s.render(&g[i])).with("b", s.render(&g[j])),
            format!("a ≪ b but {} is not ≪ {}", t.render(&img[i]), t.render(&img[j])),
        );
    }
    r.timed(start)
}

/// `(m+1)x ≤ my` implies `f(x) ≤ f(y)` for grid `x, y` and `m ≤ m_max`.
pub fn check_almost_unperforated(f: &Morphism, depth: u64, m_max: u64) -> CheckReport {
    let start = Instant::now();
    let (s, t) = (&f.domain, &f.codomain);
    let g = s.grid(depth);
    let mut r = CheckReport::new("check-almost-unperforated", &f.name, depth).bound("m_max", m_max).exact(s.is_table());
    let img: Vec<Element> = g.iter().map(|a| f.image(a)).collect();
    let multiples: Vec<Vec<Element>> = g.iter().map(|a| (0..=m_max + 1).map(|m| s.times(a, m)).collect()).collect();
    let bad = (0..g.len() * g.len()).into_par_iter().find_map_first(|idx| {
        let (i, j) = (idx / g.len(), idx % g.len());
        if t.le(&img[i], &img[j]) {
            return None;
        }
        (1..=m_max as usize).find(|&m| s.le(&multiples[i][m + 1], &multiples[j][m])).map(|m| (i, j, m))
    });
    r.instances += g.len() as u64 * g.len() as u64 * m_max;
    if let Some((i, j, m)) = bad {
        r.fail(
            Counterexample::new("almost-unperforated")
                .with("x", s.render(&g[i]))
                .with("y", s.render(&g[j]))
                .with("m", m),
            format!("{}·x ≤ {m}·y but f(x) ≰ f(y)", m + 1),
        );
    }
    r.timed(start)
}

/// Result of looking for `z` with `kz ≤ f(x)` and `f(x') ≤ (k+1)z`.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessSearch {
    Found(Element),
    /// Every candidate was examined.
    Absent,
    /// The search bound was reached.
    Unknown,
}

pub fn is_divisibility_witness(f: &Morphism, k: u64, xp: &Element, x: &Element, z: &Element) -> bool {
    let t = &f.codomain;
    t.le(&t.times(z, k), &f.image(x)) && t.le(&f.image(xp), &t.times(z, k + 1))
}

pub fn search_divisibility_witness(
    f: &Morphism,
    k: u64,
    xp: &Element,
    x: &Element,
    search_depth: u64,
) -> WitnessSearch {
    let t = &f.codomain;
    let fx = f.image(x);
    if f.witness == WitnessOracle::SoftQuotient {
        let inv = BigRational::new(BigInt::one(), BigInt::from(k));
        if let Some(z) = fx.soft_scale(&inv) {
            if t.contains(&z) && is_divisibility_witness(f, k, xp, x, &z) {
                return WitnessSearch::Found(z);
            }
        }
    }
    // kz ≤ f(x) forces z ≤ f(x), so a finite down-set is a complete search.
    if let Some(down) = t.down_set(&fx) {
        return match down.into_iter().find(|z| is_divisibility_witness(f, k, xp, x, z)) {
            Some(z) => WitnessSearch::Found(z),
            None => WitnessSearch::Absent,
        };
    }
    match t.grid(search_depth).into_iter().find(|z| is_divisibility_witness(f, k, xp, x, z)) {
        Some(z) => WitnessSearch::Found(z),
        None => WitnessSearch::Unknown,
    }
}

/// The witness `z` for `(k, x', x)`: the closed form when the map has one,
/// otherwise the first in canonical grid order.
pub fn divisibility_witness(f: &Morphism, k: u64, xp: &Element, x: &Element) -> Result<Element> {
    f.domain.check(xp)?;
    f.domain.check(x)?;
    match search_divisibility_witness(f, k, xp, x, DEFAULT_SEARCH_DEPTH) {
        WitnessSearch::Found(z) => Ok(z),
        _ => Err(CuError::NoWitnessFound(format!(
            "k={k} x'={} x={} under {}",
            f.domain.render(xp),
            f.domain.render(x),
            f.name
        ))),
    }
}

fn search_depth_for(m: &SemigroupModel, depth: u64, k_max: u64) -> u64 {
    match m.kind {
        ModelKind::Product(_) | ModelKind::Lsc(_) => depth,
        _ => depth * (k_max + 1),
    }
}

/// For grid `x' ≪ x` and `k ≤ k_max`, finds `z` with `kz ≤ f(x)` and
/// `f(x') ≤ (k+1)z`.
pub fn check_almost_divisible(f: &Morphism, depth: u64, k_max: u64) -> CheckReport {
    let start = Instant::now();
    let s = &f.domain;
    let g = s.grid(depth);
    let sd = search_depth_for(&f.codomain, depth, k_max);
    let mut r = CheckReport::new("check-almost-divisible", &f.name, depth)
        .bound("k_max", k_max)
        .bound("search_depth", sd)
        .exact(true);
    let cases: Vec<(usize, usize, u64)> = (0..g.len())
        .flat_map(|i| (0..g.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| s.wb(&g[j], &g[i]))
        .flat_map(|(i, j)| (1..=k_max).map(move |k| (i, j, k)))
        .collect();
    let outcomes: Vec<WitnessSearch> =
        cases.par_iter().map(|&(i, j, k)| search_divisibility_witness(f, k, &g[j], &g[i], sd)).collect();
    for (&(i, j, k), out) in cases.iter().zip(&outcomes) {
        r.instances += 1;
        let cx = || {
            Counterexample::new("almost-divisible").with("x'", s.render(&g[j])).with("x", s.render(&g[i])).with("k", k)
        };
        match out {
            WitnessSearch::Found(z) => {
                r.witness(format!("x'={} x={} k={k} z={}", s.render(&g[j]), s.render(&g[i]), f.codomain.render(z)))
            }
            WitnessSearch::Absent => {
                r.fail(cx(), "no z with kz ≤ f(x) and f(x') ≤ (k+1)z");
                break;
            }
            WitnessSearch::Unknown => {
                r.exact = false;
                r.inconclusive(format!("no witness within search depth at {}", cx()));
            }
        }
    }
    // A pass over an infinite carrier is only a bounded pass.
    if !r.failed() && !s.is_table() {
        r.exact = false;
    }
    r.timed(start)
}

/// Both pureness checks, folded into one report.
pub fn check_pure(f: &Morphism, depth: u64, k_max: u64, m_max: u64) -> CheckReport {
    let start = Instant::now();
    let mut r = CheckReport::new("check-pure", &f.name, depth).bound("k_max", k_max).bound("m_max", m_max).exact(true);
    let u = check_almost_unperforated(f, depth, m_max);
    let d = check_almost_divisible(f, depth, k_max);
    r.absorb(&u);
    r.absorb(&d);
    r.witnesses = d.witnesses;
    r.timed(start)
}

/// Divisibility by every `n` built from `primes` (up to `depth`), and
/// `nx ≤ ny ⇒ f(x) ≤ f(y)` for those `n` and `n = 1`.
pub fn check_q_rational(f: &Morphism, primes: &[u64], depth: u64) -> CheckReport {
    let start = Instant::now();
    let (s, t) = (&f.domain, &f.codomain);
    let g = s.grid(depth);
    let ns = smooth_numbers(primes, depth);
    let mut r =
        CheckReport::new("check-q-rational", &f.name, depth).bound("divisors", ns.len() as u64).exact(s.is_table());
    let img: Vec<Element> = g.iter().map(|a| f.image(a)).collect();
    'div: for (a, fa) in g.iter().zip(&img) {
        for &n in &ns {
            r.instances += 1;
            match t.exact_divide(fa, n) {
                Some(y) => r.witness(format!("f({})={}·{}", s.render(a), n, t.render(&y))),
                None => {
                    r.fail(
                        Counterexample::new("q-divisible").with("x", s.render(a)).with("n", n),
                        format!("no y with {} = {n}·y", t.render(fa)),
                    );
                    break 'div;
                }
            }
        }
    }
    if r.failed() {
        return r.timed(start);
    }
    let mut divisors = vec![1];
    divisors.extend(&ns);
    let multiples: Vec<Vec<Element>> = g.iter().map(|a| divisors.iter().map(|&n| s.times(a, n)).collect()).collect();
    let bad = (0..g.len() * g.len()).into_par_iter().find_map_first(|idx| {
        let (i, j) = (idx / g.len(), idx % g.len());
        if t.le(&img[i], &img[j]) {
            return None;
        }
        (0..divisors.len()).find(|&d| s.le(&multiples[i][d], &multiples[j][d])).map(|d| (i, j, divisors[d]))
    });
    r.instances += (g.len() * g.len() * divisors.len()) as u64;
    if let Some((i, j, n)) = bad {
        r.fail(
            Counterexample::new("q-unperforated").with("x", s.render(&g[i])).with("y", s.render(&g[j])).with("n", n),
            "nx ≤ ny but f(x) ≰ f(y)",
        );
    }
    r.timed(start)
}

/// Every image `f(x)` is strongly soft.
pub fn check_soft_morphism(f: &Morphism, depth: u64) -> CheckReport {
    let start = Instant::now();
    let (s, t) = (&f.domain, &f.codomain);
    let mut r = CheckReport::new("check-soft", &f.name, depth).exact(s.is_table());
    for a in s.grid(depth) {
        r.instances += 1;
        let fa = f.image(&a);
        if !is_strongly_soft(t, &fa, depth) {
            r.fail(
                Counterexample::new("soft").with("x", s.render(&a)),
                format!("{} is not strongly soft", t.render(&fa)),
            );
            break;
        }
    }
    r.timed(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Elem;
    use crate::rational::{int, rat, Ext, ExtRat};

    fn c(n: u64) -> Element {
        Elem::Compact(int(n))
    }
    fn s(p: i64, q: i64) -> Element {
        Elem::Soft(Ext::Fin(rat(p, q)))
    }
    fn nat(n: u64) -> Element {
        Elem::Nat(ExtRat::from_u64(n))
    }

    #[test]
    fn generalized_examples() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        let h = SemigroupModel::half_line();
        assert!(check_generalized_cu_morphism(&Morphism::identity(&z), 4).passed());
        let ns = Morphism::nat_to_soft(&n, &z).unwrap();
        assert!(check_generalized_cu_morphism(&ns, 4).passed());
        let doubling = Morphism::glue(&z, c(2), Morphism::scale(&h, &z, int(1)).unwrap()).unwrap();
        assert!(check_generalized_cu_morphism(&doubling, 4).failed());
    }

    #[test]
    fn cu_examples() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        let h = SemigroupModel::half_line();
        let ns = Morphism::nat_to_soft(&n, &z).unwrap();
        let r = check_cu_morphism(&ns, 4);
        let cx = r.counterexample.unwrap();
        assert_eq!((cx.law.as_str(), cx.get("a"), cx.get("b")), ("way-below", Some("1"), Some("1")));
        assert!(check_cu_morphism(&Morphism::multiply_by(&h, 2), 4).passed());
    }

    #[test]
    fn witnesses() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        let id = Morphism::identity(&z);
        assert_eq!(divisibility_witness(&id, 2, &c(1), &c(1)).unwrap(), s(1, 2));
        let ns = Morphism::nat_to_soft(&n, &z).unwrap();
        assert_eq!(divisibility_witness(&ns, 3, &nat(2), &nat(2)).unwrap(), s(2, 3));
        let idn = Morphism::identity(&n);
        assert!(matches!(divisibility_witness(&idn, 2, &nat(1), &nat(1)), Err(CuError::NoWitnessFound(_))));
        let searched = id.clone().with_witness(WitnessOracle::Search);
        assert_eq!(divisibility_witness(&searched, 2, &c(1), &c(1)).unwrap(), s(1, 2));
    }

    #[test]
    fn pureness_examples() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        assert!(check_pure(&Morphism::identity(&z), 4, 3, 3).passed());
        let r = check_almost_divisible(&Morphism::identity(&n), 4, 2);
        let cx = r.counterexample.unwrap();
        assert_eq!((cx.get("x"), cx.get("k")), (Some("1"), Some("2")));
        assert!(r.exact);
        let t4 = SemigroupModel::t4();
        let r = check_almost_unperforated(&Morphism::identity(&t4), 1, 3);
        let cx = r.counterexample.unwrap();
        assert_eq!((cx.get("x"), cx.get("y"), cx.get("m")), (Some("x"), Some("y"), Some("2")));
        let zero = Morphism::zero(&z, &z);
        assert!(check_pure(&zero, 3, 3, 3).passed());
    }

    #[test]
    fn q_rational_examples() {
        let k = SemigroupModel::kq(&[2]);
        assert!(check_q_rational(&Morphism::identity(&k), &[2], 8).passed());
        let n = SemigroupModel::nbar();
        let r = check_q_rational(&Morphism::identity(&n), &[2], 4);
        let cx = r.counterexample.unwrap();
        assert_eq!((cx.get("x"), cx.get("n")), (Some("1"), Some("2")));
        assert!(check_q_rational(&Morphism::zero(&n, &n), &[2], 4).passed());
    }

    #[test]
    fn softness_examples() {
        let z = SemigroupModel::z();
        let n = SemigroupModel::nbar();
        assert!(check_soft_morphism(&Morphism::nat_to_soft(&n, &z).unwrap(), 6).passed());
        let r = check_soft_morphism(&Morphism::identity(&z), 6);
        assert_eq!(r.counterexample.unwrap().get("x"), Some("compact:1"));
        assert!(check_soft_morphism(&Morphism::zero(&z, &z), 6).passed());
    }
}
