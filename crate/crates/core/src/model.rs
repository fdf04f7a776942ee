//! Concrete Cu-semigroup models: arithmetic, order, way-below, grids and
//! element syntax.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::element::{Elem, Element};
use crate::error::{CuError, Result};
use crate::rational::{int, is_integer, is_smooth, to_u64, Ext, ExtRat, Payload};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemigroupModel {
    pub name: String,
    pub kind: ModelKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// `N ∪ {∞}`.
    Nbar,
    /// `N ⊔ (0, ∞]`.
    Z,
    /// `[0, ∞]`.
    HalfLine,
    /// `K_q ⊔ (0, ∞]` for the supernatural number with the given primes.
    Kq(Vec<u64>),
    Product(Vec<SemigroupModel>),
    /// Monotone `N ∪ {∞}`-valued functions on a finite poset.
    Lsc(FinitePoset),
    Table(TableModel),
}

/// Finite poset on `0..size`, given by generating relations `a < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    pub size: usize,
    pub edges: Vec<(usize, usize)>,
    below: Vec<Vec<bool>>,
}

impl FinitePoset {
    pub fn new(size: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if size == 0 {
            return Err(CuError::Parse("poset needs at least one point".into()));
        }
        let mut below = vec![vec![false; size]; size];
        for (i, row) in below.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in &edges {
            if a >= size || b >= size {
                return Err(CuError::Parse(format!("edge {a} < {b} is out of range")));
            }
            below[a][b] = true;
        }
        transitive_closure(&mut below);
        for a in 0..size {
            for b in 0..size {
                if a != b && below[a][b] && below[b][a] {
                    return Err(CuError::Parse(format!("poset has a cycle through {a} and {b}")));
                }
            }
        }
        Ok(FinitePoset { size, edges, below })
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.below[a][b]
    }
}

/// Finite commutative monoid with a partial order, given by its tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableModel {
    pub names: Vec<String>,
    /// Declared sums `(a, b, a + b)`; sums with the zero are implied.
    pub sums: Vec<(usize, usize, usize)>,
    /// Declared relations `a ≤ b`; reflexive-transitive closure is taken.
    pub relations: Vec<(usize, usize)>,
    add: Vec<Vec<usize>>,
    leq: Vec<Vec<bool>>,
}

impl TableModel {
    pub fn new(names: Vec<String>, sums: Vec<(usize, usize, usize)>, relations: Vec<(usize, usize)>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(CuError::Parse("table needs at least one element".into()));
        }
        let mut add: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n];
        for i in 0..n {
            add[0][i] = Some(i);
            add[i][0] = Some(i);
        }
        for &(a, b, c) in &sums {
            if a.max(b).max(c) >= n {
                return Err(CuError::Parse("sum refers to an unknown element".into()));
            }
            add[a][b] = Some(c);
            add[b][a] = Some(c);
        }
        let add = add
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, c)| c.ok_or_else(|| CuError::Parse(format!("missing sum {} + {}", names[i], names[j]))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in &relations {
            if a.max(b) >= n {
                return Err(CuError::Parse("relation refers to an unknown element".into()));
            }
            leq[a][b] = true;
        }
        transitive_closure(&mut leq);
        Ok(TableModel { names, sums, relations, add, leq })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn sum(&self, a: usize, b: usize) -> usize {
        self.add[a][b]
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The four-element table `{0, x, y, ⊤}` with `x + x = y + y = x + y = ⊤`,
    /// `x` and `y` incomparable.
    pub fn t4() -> Self {
        Self::t4_with_xy_sum(3)
    }

    /// T4 with `x + y` redefined to `0`, which breaks monotonicity of
    /// addition.
    pub fn t4_faulty() -> Self {
        Self::t4_with_xy_sum(0)
    }

    fn t4_with_xy_sum(xy: usize) -> Self {
        let names = ["0", "x", "y", "top"].map(String::from).to_vec();
        let sums = vec![(1, 1, 3), (2, 2, 3), (1, 2, xy), (1, 3, 3), (2, 3, 3), (3, 3, 3)];
        let relations = vec![(0, 1), (0, 2), (1, 3), (2, 3)];
        TableModel::new(names, sums, relations).expect("T4 is well formed")
    }
}

fn transitive_closure(m: &mut [Vec<bool>]) {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Positive rationals `p/q` in lowest terms with `p, q ≤ depth`, ordered by
/// denominator and then numerator.
pub fn grid_rationals(depth: u64) -> Vec<BigRational> {
    let mut out = Vec::new();
    for q in 1..=depth {
        for p in 1..=depth {
            if num_integer::gcd(p, q) == 1 {
                out.push(BigRational::new(BigInt::from(p), BigInt::from(q)));
            }
        }
    }
    out
}

impl SemigroupModel {
    pub fn new(name: impl Into<String>, kind: ModelKind) -> Self {
        SemigroupModel { name: name.into(), kind }
    }

    pub fn z() -> Self {
        Self::new("Z", ModelKind::Z)
    }

    pub fn nbar() -> Self {
        Self::new("Nbar", ModelKind::Nbar)
    }

    pub fn half_line() -> Self {
        Self::new("HalfLine", ModelKind::HalfLine)
    }

    pub fn kq(primes: &[u64]) -> Self {
        let name = format!("Kq{{{}}}", primes.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        Self::new(name, ModelKind::Kq(primes.to_vec()))
    }

    pub fn product(parts: Vec<SemigroupModel>) -> Self {
        let name = parts.iter().map(|m| m.name.as_str()).collect::<Vec<_>>().join("x");
        Self::new(name, ModelKind::Product(parts))
    }

    pub fn t4() -> Self {
        Self::new("T4", ModelKind::Table(TableModel::t4()))
    }

    pub fn zero(&self) -> Element {
        self.zero_gen()
    }

    pub fn zero_gen<P: Payload>(&self) -> Elem<P> {
        match &self.kind {
            ModelKind::Nbar => Elem::Nat(Ext::zero()),
            ModelKind::Z | ModelKind::Kq(_) => Elem::Compact(P::nil()),
            ModelKind::HalfLine => Elem::Real(Ext::zero()),
            ModelKind::Product(ms) => Elem::Tuple(ms.iter().map(SemigroupModel::zero_gen).collect()),
            ModelKind::Lsc(p) => Elem::Lsc(vec![Ext::zero(); p.size]),
            ModelKind::Table(_) => Elem::Table(0),
        }
    }

    /// True when `a` is a canonical element of this model.
    pub fn contains(&self, a: &Element) -> bool {
        let nat = |x: &ExtRat| match x {
            Ext::Fin(r) => is_integer(r) && !r.is_negative(),
            Ext::Inf => true,
        };
        match (&self.kind, a) {
            (ModelKind::Nbar, Elem::Nat(x)) => nat(x),
            (ModelKind::Z, Elem::Compact(r)) => is_integer(r) && !r.is_negative(),
            (ModelKind::Kq(ps), Elem::Compact(r)) => !r.is_negative() && (r.is_zero() || is_smooth(r.denom(), ps)),
            (ModelKind::Z | ModelKind::Kq(_), Elem::Soft(x)) => match x {
                Ext::Fin(t) => t.is_positive(),
                Ext::Inf => true,
            },
            (ModelKind::HalfLine, Elem::Real(x)) => match x {
                Ext::Fin(t) => !t.is_negative(),
                Ext::Inf => true,
            },
            (ModelKind::Product(ms), Elem::Tuple(v)) => {
                ms.len() == v.len() && ms.iter().zip(v).all(|(m, x)| m.contains(x))
            }
            (ModelKind::Lsc(p), Elem::Lsc(v)) => {
                v.len() == p.size
                    && v.iter().all(nat)
                    && (0..p.size).all(|i| (0..p.size).all(|j| !p.le(i, j) || v[i] <= v[j]))
            }
            (ModelKind::Table(t), Elem::Table(i)) => *i < t.len(),
            _ => false,
        }
    }

    pub fn check(&self, a: &Element) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(CuError::ModelMismatch { model: self.name.clone(), element: a.to_string() })
        }
    }

    /// Addition for concrete elements or families; `None` on a shape
    /// mismatch.
    pub fn add_gen<P: Payload>(&self, a: &Elem<P>, b: &Elem<P>) -> Option<Elem<P>> {
        match (&self.kind, a, b) {
            (ModelKind::Table(t), Elem::Table(i), Elem::Table(j)) => {
                (*i < t.len() && *j < t.len()).then(|| Elem::Table(t.sum(*i, *j)))
            }
            (ModelKind::Product(ms), Elem::Tuple(x), Elem::Tuple(y)) if x.len() == ms.len() => ms
                .iter()
                .zip(x.iter().zip(y))
                .map(|(m, (p, q))| m.add_gen(p, q))
                .collect::<Option<Vec<_>>>()
                .map(Elem::Tuple),
            _ => a.add_untabled(b),
        }
    }

    /// `k·a` for a natural `k`.
    pub fn scale_gen<P: Payload>(&self, a: &Elem<P>, k: u64) -> Option<Elem<P>> {
        match (&self.kind, a) {
            (ModelKind::Table(t), Elem::Table(i)) => {
                let mut acc = 0;
                for _ in 0..k {
                    acc = t.sum(acc, *i);
                }
                Some(Elem::Table(acc))
            }
            (ModelKind::Product(ms), Elem::Tuple(v)) if v.len() == ms.len() => {
                ms.iter().zip(v).map(|(m, x)| m.scale_gen(x, k)).collect::<Option<Vec<_>>>().map(Elem::Tuple)
            }
            _ => a.mul_payload(&P::constant(int(k))),
        }
    }

    /// `∞·a`, the supremum of `n·a`.
    pub fn infinite_multiple_gen<P: Payload>(&self, a: &Elem<P>) -> Option<Elem<P>> {
        match (&self.kind, a) {
            (ModelKind::Table(t), Elem::Table(i)) => {
                // n·a is increasing and the carrier is finite, so it stabilizes.
                let mut acc = *i;
                for _ in 0..=t.len() {
                    acc = t.sum(acc, *i);
                }
                Some(Elem::Table(acc))
            }
            (ModelKind::Product(ms), Elem::Tuple(v)) if v.len() == ms.len() => {
                ms.iter().zip(v).map(|(m, x)| m.infinite_multiple_gen(x)).collect::<Option<Vec<_>>>().map(Elem::Tuple)
            }
            _ => a.infinite_multiple_untabled(),
        }
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sum(a, b))
    }

    /// Unchecked sum of canonical elements.
    pub fn sum(&self, a: &Element, b: &Element) -> Element {
        self.add_gen(a, b).expect("operands belong to the model")
    }

    /// Unchecked `k·a`.
    pub fn times(&self, a: &Element, k: u64) -> Element {
        self.scale_gen(a, k).expect("operand belongs to the model")
    }

    /// Unchecked `∞·a`.
    pub fn inf_times(&self, a: &Element) -> Element {
        self.infinite_multiple_gen(a).expect("operand belongs to the model")
    }

    pub fn leq(&self, a: &Element, b: &Element) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.le(a, b))
    }

    pub fn way_below(&self, a: &Element, b: &Element) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.wb(a, b))
    }

    /// Unchecked order on canonical elements.
    pub fn le(&self, a: &Element, b: &Element) -> bool {
        use Elem::*;
        match (&self.kind, a, b) {
            (ModelKind::Product(ms), Tuple(x), Tuple(y)) => {
                ms.iter().zip(x.iter().zip(y)).all(|(m, (p, q))| m.le(p, q))
            }
            (ModelKind::Table(t), Table(i), Table(j)) => t.le(*i, *j),
            (_, Nat(x), Nat(y)) | (_, Real(x), Real(y)) | (_, Soft(x), Soft(y)) => x <= y,
            (_, Compact(x), Compact(y)) => x <= y,
            // A compact lies below a soft element exactly when it is
            // strictly smaller; a soft element lies below a compact one of
            // at least the same size.
            (_, Compact(x), Soft(y)) => Ext::Fin(x.clone()) < *y,
            (_, Soft(x), Compact(y)) => *x <= Ext::Fin(y.clone()),
            (_, Lsc(x), Lsc(y)) => x.iter().zip(y).all(|(p, q)| p <= q),
            _ => false,
        }
    }

    /// Unchecked way-below relation on canonical elements.
    pub fn wb(&self, a: &Element, b: &Element) -> bool {
        use Elem::*;
        match (&self.kind, a, b) {
            (ModelKind::Product(ms), Tuple(x), Tuple(y)) => {
                ms.iter().zip(x.iter().zip(y)).all(|(m, (p, q))| m.wb(p, q))
            }
            (ModelKind::Table(t), Table(i), Table(j)) => t.le(*i, *j),
            (_, Nat(x), Nat(y)) => !x.is_inf() && x <= y,
            (_, Real(x), Real(y)) => x.is_zero() || x < y,
            (_, _, Compact(_)) => self.le(a, b),
            (_, Compact(x), Soft(y)) => Ext::Fin(x.clone()) < *y,
            (_, Soft(x), Soft(y)) => x < y,
            (_, Lsc(x), Lsc(y)) => x.iter().zip(y).all(|(p, q)| !p.is_inf() && p <= q),
            _ => false,
        }
    }

    pub fn is_compact(&self, a: &Element) -> bool {
        self.wb(a, a)
    }

    /// Whether `soft_scale` makes sense in this model.
    pub fn has_soft_part(&self) -> bool {
        match &self.kind {
            ModelKind::Z | ModelKind::Kq(_) | ModelKind::HalfLine => true,
            ModelKind::Product(ms) => ms.iter().all(SemigroupModel::has_soft_part),
            _ => false,
        }
    }

    /// The unique `z` with `n·z = a`, when it exists.
    pub fn exact_divide(&self, a: &Element, n: u64) -> Option<Element> {
        if n == 0 {
            return None;
        }
        let inv = BigRational::new(BigInt::one(), BigInt::from(n));
        let divide_nat = |x: &ExtRat| -> Option<ExtRat> {
            match x {
                Ext::Fin(r) => {
                    let q = r * &inv;
                    is_integer(&q).then_some(Ext::Fin(q))
                }
                Ext::Inf => Some(Ext::Inf),
            }
        };
        let out = match (&self.kind, a) {
            (ModelKind::Nbar, Elem::Nat(x)) => Elem::Nat(divide_nat(x)?),
            (ModelKind::Z | ModelKind::Kq(_), Elem::Compact(r)) => Elem::Compact(r * &inv),
            (ModelKind::Z | ModelKind::Kq(_), Elem::Soft(x)) => Elem::Soft(x.scale(&inv)),
            (ModelKind::HalfLine, Elem::Real(x)) => Elem::Real(x.scale(&inv)),
            (ModelKind::Product(ms), Elem::Tuple(v)) => {
                Elem::Tuple(ms.iter().zip(v).map(|(m, x)| m.exact_divide(x, n)).collect::<Option<_>>()?)
            }
            (ModelKind::Lsc(_), Elem::Lsc(v)) => Elem::Lsc(v.iter().map(divide_nat).collect::<Option<_>>()?),
            (ModelKind::Table(t), Elem::Table(_)) => (0..t.len()).map(Elem::Table).find(|z| self.times(z, n) == *a)?,
            _ => return None,
        };
        (self.contains(&out) && self.times(&out, n) == *a).then_some(out)
    }

    /// All elements below `a`, when there are finitely many.
    pub fn down_set(&self, a: &Element) -> Option<Vec<Element>> {
        if a.is_zero() {
            return Some(vec![self.zero()]);
        }
        match (&self.kind, a) {
            (ModelKind::Nbar, Elem::Nat(Ext::Fin(r))) => {
                let m = to_u64(r)?;
                Some((0..=m).map(|i| Elem::Nat(ExtRat::from_u64(i))).collect())
            }
            (ModelKind::Product(ms), Elem::Tuple(v)) => {
                let parts = ms.iter().zip(v).map(|(m, x)| m.down_set(x)).collect::<Option<Vec<_>>>()?;
                Some(cartesian(&parts).into_iter().map(Elem::Tuple).collect())
            }
            (ModelKind::Lsc(_), Elem::Lsc(v)) => {
                let mut top = 0;
                for x in v {
                    top = top.max(to_u64(x.finite()?)?);
                }
                Some(self.grid(top.max(1)).into_iter().filter(|g| self.le(g, a)).collect())
            }
            (ModelKind::Table(t), Elem::Table(_)) => {
                Some((0..t.len()).map(Elem::Table).filter(|g| self.le(g, a)).collect())
            }
            _ => None,
        }
    }

    /// Deterministic finite sample of canonical elements: payloads with
    /// numerator and denominator at most `depth`, plus `0` and `∞`.
    pub fn grid(&self, depth: u64) -> Vec<Element> {
        let depth = depth.max(1);
        match &self.kind {
            ModelKind::Nbar => {
                (0..=depth).map(|i| Elem::Nat(ExtRat::from_u64(i))).chain([Elem::Nat(Ext::Inf)]).collect()
            }
            ModelKind::HalfLine => std::iter::once(Elem::Real(Ext::zero()))
                .chain(grid_rationals(depth).into_iter().map(|r| Elem::Real(Ext::Fin(r))))
                .chain([Elem::Real(Ext::Inf)])
                .collect(),
            ModelKind::Z | ModelKind::Kq(_) => {
                let mut out = vec![Elem::Compact(Zero::zero())];
                for r in grid_rationals(depth) {
                    let keep = match &self.kind {
                        ModelKind::Kq(ps) => r.denom().is_one() || is_smooth(r.denom(), ps),
                        _ => true,
                    };
                    if !keep {
                        continue;
                    }
                    let compact = Elem::Compact(r.clone());
                    if self.contains(&compact) {
                        out.push(compact);
                    }
                    out.push(Elem::Soft(Ext::Fin(r)));
                }
                out.push(Elem::Soft(Ext::Inf));
                out
            }
            ModelKind::Product(ms) => {
                let parts: Vec<_> = ms.iter().map(|m| m.grid(depth)).collect();
                cartesian(&parts).into_iter().map(Elem::Tuple).collect()
            }
            ModelKind::Lsc(p) => {
                let values: Vec<ExtRat> = (0..=depth).map(ExtRat::from_u64).chain([Ext::Inf]).collect();
                let parts = vec![values; p.size];
                cartesian(&parts).into_iter().map(Elem::Lsc).filter(|e| self.contains(e)).collect()
            }
            ModelKind::Table(t) => (0..t.len()).map(Elem::Table).collect(),
        }
    }

    /// Parses the textual form of an element of this model.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let s = s.trim();
        let bad = |why: &str| CuError::Parse(format!("`{s}` is not an element of {}: {why}", self.name));
        let e = match &self.kind {
            ModelKind::Nbar => Elem::Nat(s.parse()?),
            ModelKind::HalfLine => Elem::Real(s.parse()?),
            ModelKind::Z | ModelKind::Kq(_) => {
                if s == "0" {
                    Elem::Compact(Zero::zero())
                } else if s == "inf" {
                    Elem::Soft(Ext::Inf)
                } else if let Some(v) = s.strip_prefix("compact:") {
                    match v.trim().parse::<ExtRat>()? {
                        Ext::Fin(r) => Elem::Compact(r),
                        Ext::Inf => return Err(bad("compact elements are finite")),
                    }
                } else if let Some(v) = s.strip_prefix("soft:") {
                    Elem::Soft(v.trim().parse()?).canonical()
                } else {
                    return Err(bad("expected compact:p/q, soft:p/q, 0 or inf"));
                }
            }
            ModelKind::Product(ms) => {
                let inner =
                    s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(|| bad("expected [a, b, ...]"))?;
                let parts = split_top_level(inner);
                if parts.len() != ms.len() {
                    return Err(bad("wrong number of coordinates"));
                }
                Elem::Tuple(ms.iter().zip(parts).map(|(m, p)| m.parse_element(p)).collect::<Result<_>>()?)
            }
            ModelKind::Lsc(_) => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| bad("expected (v0, v1, ...)"))?;
                Elem::Lsc(split_top_level(inner).into_iter().map(|p| p.trim().parse()).collect::<Result<_>>()?)
            }
            ModelKind::Table(t) => Elem::Table(t.index_of(s).ok_or_else(|| bad("unknown name"))?),
        };
        if self.contains(&e) {
            Ok(e)
        } else {
            Err(bad("not a canonical element"))
        }
    }

    /// Textual form accepted by `parse_element`.
    pub fn render(&self, a: &Element) -> String {
        match (&self.kind, a) {
            (ModelKind::Table(t), Elem::Table(i)) if *i < t.len() => t.names[*i].clone(),
            (ModelKind::Product(ms), Elem::Tuple(v)) if ms.len() == v.len() => {
                format!("[{}]", ms.iter().zip(v).map(|(m, x)| m.render(x)).collect::<Vec<_>>().join(", "))
            }
            _ => a.to_string(),
        }
    }

    /// Primes of a `K_q` model, if this is one.
    pub fn primes(&self) -> Option<&[u64]> {
        match &self.kind {
            ModelKind::Kq(ps) => Some(ps),
            _ => None,
        }
    }

    pub fn is_table(&self) -> bool {
        matches!(self.kind, ModelKind::Table(_))
    }
}

/// Splits on commas that are not nested inside brackets or parentheses.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut level = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => level += 1,
            ']' | ')' => level -= 1,
            ',' if level == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

/// Cartesian product in lexicographic order.
pub fn cartesian<T: Clone>(parts: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![vec![]];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for prefix in &out {
            for x in part {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Set of primes as written in model names and scenario files.
pub fn prime_set(ps: &[u64]) -> BTreeSet<u64> {
    ps.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn c(n: i64) -> Element {
        Elem::Compact(rat(n, 1))
    }
    fn s(p: i64, q: i64) -> Element {
        Elem::Soft(Ext::Fin(rat(p, q)))
    }

    #[test]
    fn z_addition_and_order() {
        let z = SemigroupModel::z();
        assert_eq!(z.add(&c(2), &c(3)).unwrap(), c(5));
        assert_eq!(z.add(&c(2), &s(1, 2)).unwrap(), s(5, 2));
        assert!(z.leq(&c(0), &s(5, 1)).unwrap());
        assert!(z.leq(&s(1, 1), &c(1)).unwrap());
        assert!(!z.leq(&c(1), &s(1, 1)).unwrap());
        assert!(!z.way_below(&s(1, 1), &s(1, 1)).unwrap());
        assert!(z.way_below(&c(3), &c(3)).unwrap());
        assert!(z.add(&Elem::Nat(Ext::zero()), &c(1)).is_err());
    }

    #[test]
    fn half_line_basics() {
        let h = SemigroupModel::half_line();
        let r = |p, q| Elem::Real(Ext::Fin(rat(p, q)));
        assert_eq!(h.add(&r(1, 3), &r(1, 6)).unwrap(), r(1, 2));
        assert!(h.way_below(&r(0, 1), &r(0, 1)).unwrap());
        assert!(!h.way_below(&r(1, 1), &r(1, 1)).unwrap());
    }

    #[test]
    fn grids() {
        let z = SemigroupModel::z();
        assert_eq!(z.grid(1), vec![c(0), c(1), s(1, 1), Elem::Soft(Ext::Inf)]);
        let n = SemigroupModel::nbar();
        let shown: Vec<_> = n.grid(2).iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["0", "1", "2", "inf"]);
        let h = SemigroupModel::half_line();
        let mut shown: Vec<_> = h.grid(2).iter().map(|e| e.to_string()).collect();
        shown.sort();
        assert_eq!(shown, ["0", "1", "1/2", "2", "inf"]);
        let k = SemigroupModel::kq(&[2]);
        assert!(k.grid(4).iter().all(|e| k.contains(e)));
        assert!(k.grid(4).contains(&Elem::Compact(rat(3, 4))));
        assert!(!k.grid(4).contains(&Elem::Compact(rat(1, 3))));
    }

    #[test]
    fn grid_is_monotone_in_depth() {
        for m in [SemigroupModel::z(), SemigroupModel::kq(&[2]), SemigroupModel::half_line()] {
            let small = m.grid(4);
            let big = m.grid(6);
            assert!(small.iter().all(|e| big.contains(e)), "{}", m.name);
        }
    }

    #[test]
    fn t4_tables() {
        let t = SemigroupModel::t4();
        let x = t.parse_element("x").unwrap();
        let y = t.parse_element("y").unwrap();
        assert_eq!(t.render(&t.sum(&x, &y)), "top");
        assert!(!t.le(&x, &y));
        assert_eq!(t.render(&t.inf_times(&x)), "top");
        assert!(TableModel::new(vec!["0".into(), "a".into()], vec![], vec![]).is_err());
    }

    #[test]
    fn parse_render_round_trip() {
        let m = SemigroupModel::product(vec![SemigroupModel::z(), SemigroupModel::half_line()]);
        for e in m.grid(2) {
            assert_eq!(m.parse_element(&m.render(&e)).unwrap(), e);
        }
        let z = SemigroupModel::z();
        assert_eq!(z.parse_element("soft:0").unwrap(), c(0));
        assert!(z.parse_element("compact:1/2").is_err());
        assert!(SemigroupModel::kq(&[2]).parse_element("compact:1/2").is_ok());
    }

    #[test]
    fn exact_division() {
        let k = SemigroupModel::kq(&[2]);
        assert_eq!(k.exact_divide(&Elem::Compact(rat(1, 1)), 2), Some(Elem::Compact(rat(1, 2))));
        assert_eq!(k.exact_divide(&Elem::Compact(rat(1, 1)), 3), None);
        let n = SemigroupModel::nbar();
        assert_eq!(n.exact_divide(&Elem::Nat(ExtRat::from_u64(1)), 2), None);
    }

    #[test]
    fn lsc_membership() {
        let p = FinitePoset::new(2, vec![(0, 1)]).unwrap();
        let m = SemigroupModel::new("L", ModelKind::Lsc(p));
        assert!(m.parse_element("(1, inf)").is_ok());
        assert!(m.parse_element("(2, 1)").is_err());
        assert!(FinitePoset::new(2, vec![(0, 1), (1, 0)]).is_err());
    }
}
