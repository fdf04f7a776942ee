//! Turns a parsed scenario into checks, runs them and persists the reports.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::axioms::{check_axioms, is_strongly_soft, semigroup_almost_divisible, semigroup_almost_unperforated};
use crate::checks::{
    check_cu_morphism, check_generalized_cu_morphism, check_pure, check_q_rational, check_soft_morphism,
    search_divisibility_witness, WitnessSearch,
};
use crate::element::{Elem, Element};
use crate::error::{CuError, Result};
use crate::factorization::{
    alpha_q_eval, alpha_soft_eval, alpha_value, check_z_extension, verify_alpha_bimorphism, FactorPair,
};
use crate::model::{FinitePoset, ModelKind, SemigroupModel, TableModel};
use crate::morphism::{Morphism, WitnessOracle};
use crate::oracle::{lemma_suite, LemmaSuiteConfig};
use crate::rational::{parse_primes, parse_rat, ExtRat};
use crate::report::{CheckReport, Counterexample, Status};
use crate::scenario::{
    dependency_order, references, Block, Entry, Format, Pos, Scenario, Settings, MODEL_KINDS, MORPHISM_KINDS,
};

/// A command with its arguments resolved against the declarations.
#[derive(Clone, Debug)]
pub enum Task {
    Axioms {
        model: SemigroupModel,
    },
    ModelPure {
        model: SemigroupModel,
        k_max: u64,
        m_max: u64,
    },
    Morphism {
        f: Morphism,
        cu: bool,
    },
    Pure {
        f: Morphism,
        k_max: u64,
        m_max: u64,
    },
    QRational {
        f: Morphism,
        primes: Vec<u64>,
    },
    Soft {
        f: Morphism,
    },
    Alpha {
        pair: FactorPair,
        x: Element,
        t: Element,
        value: Option<Element>,
    },
    AlphaQ {
        pair: FactorPair,
        x: Element,
        t: Element,
        primes: Vec<u64>,
        value: Option<Element>,
    },
    AlphaSoft {
        pair: FactorPair,
        x: Element,
        t: ExtRat,
        value: Option<Element>,
    },
    Bimorphism {
        pair: FactorPair,
    },
    LemmaSuite {
        cfg: LemmaSuiteConfig,
    },
    ZExtension {
        one: Element,
        soft: Morphism,
    },
    /// Re-evaluates one counterexample of another command.
    Instance {
        target: Box<Task>,
        cx: Counterexample,
    },
}

#[derive(Clone, Debug)]
pub struct Planned {
    pub kind: String,
    pub depth: u64,
    pub expect: Status,
    pub task: Task,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub settings: Settings,
    pub models: HashMap<String, SemigroupModel>,
    pub morphisms: HashMap<String, Morphism>,
    pub commands: Vec<Planned>,
}

/// Attaches the entry's position to errors that have none.
fn located(e: &Entry, err: CuError) -> CuError {
    match err {
        CuError::Syntax { .. }
        | CuError::UnknownModelKind { .. }
        | CuError::UnknownMorphismKind { .. }
        | CuError::UndeclaredName { .. }
        | CuError::CyclicComposition { .. } => err,
        other => CuError::Syntax { line: e.value_pos.line, col: e.value_pos.col, msg: other.to_string() },
    }
}

fn need<'a>(b: &'a Block, key: &str) -> Result<&'a Entry> {
    b.get(key).ok_or_else(|| CuError::Syntax {
        line: b.pos.line,
        col: b.pos.col,
        msg: format!("`{}` needs `{key}`", b.name),
    })
}

fn number<T: std::str::FromStr>(b: &Block, key: &str, default: Option<T>) -> Result<T> {
    match (b.get(key), default) {
        (None, Some(d)) => Ok(d),
        (None, None) => need(b, key).map(|_| unreachable!()),
        (Some(e), _) => e.value.parse().map_err(|_| CuError::Syntax {
            line: e.value_pos.line,
            col: e.value_pos.col,
            msg: format!("`{}` must be a non-negative integer", e.key),
        }),
    }
}

fn flag(b: &Block, key: &str) -> Result<Option<bool>> {
    match b.get(key) {
        None => Ok(None),
        Some(e) => match e.value.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            _ => Err(located(e, CuError::Parse(format!("`{}` must be true or false", e.key)))),
        },
    }
}

fn lookup<'a, T>(table: &'a HashMap<String, T>, e: &Entry) -> Result<&'a T> {
    table.get(e.value.as_str()).ok_or(CuError::UndeclaredName {
        line: e.value_pos.line,
        col: e.value_pos.col,
        name: e.value.clone(),
    })
}

fn element(m: &SemigroupModel, e: &Entry) -> Result<Element> {
    m.parse_element(&e.value).map_err(|err| located(e, err))
}

fn build_model(b: &Block, built: &HashMap<String, SemigroupModel>) -> Result<SemigroupModel> {
    let kind = need(b, "kind")?;
    let at = |err| located(kind, err);
    let mut m = match kind.value.as_str() {
        "z" => SemigroupModel::z(),
        "nbar" => SemigroupModel::nbar(),
        "halfline" => SemigroupModel::half_line(),
        "kq" => {
            let e = need(b, "primes")?;
            let ps = parse_primes(&e.value).map_err(|err| located(e, err))?;
            if ps.is_empty() {
                return Err(located(e, CuError::Parse("kq needs at least one prime".into())));
            }
            SemigroupModel::kq(&ps)
        }
        "product" => {
            let parts = references(b, &["parts"])
                .into_iter()
                .map(|(name, pos)| {
                    built.get(&name).cloned().ok_or(CuError::UndeclaredName { line: pos.line, col: pos.col, name })
                })
                .collect::<Result<Vec<_>>>()?;
            if parts.is_empty() {
                return Err(at(CuError::Parse("product needs `parts`".into())));
            }
            SemigroupModel::product(parts)
        }
        "lsc" => {
            let size: usize = number(b, "points", None)?;
            let mut edges = vec![];
            for e in b.all("edge") {
                let (a, c) = e
                    .value
                    .split_once('<')
                    .and_then(|(a, c)| Some((a.trim().parse().ok()?, c.trim().parse().ok()?)))
                    .ok_or_else(|| located(e, CuError::Parse("expected `i < j`".into())))?;
                edges.push((a, c));
            }
            SemigroupModel::new("", ModelKind::Lsc(FinitePoset::new(size, edges).map_err(at)?))
        }
        "table" => {
            let names: Vec<String> = need(b, "elements")?.value.split(',').map(|s| s.trim().to_string()).collect();
            let idx = |e: &Entry, s: &str| {
                names
                    .iter()
                    .position(|n| n == s.trim())
                    .ok_or_else(|| located(e, CuError::Parse(format!("`{}` is not a table element", s.trim()))))
            };
            let mut sums = vec![];
            for e in b.all("sum") {
                let (lhs, c) =
                    e.value.split_once('=').ok_or_else(|| located(e, CuError::Parse("expected `a + b = c`".into())))?;
                let (a, bb) =
                    lhs.split_once('+').ok_or_else(|| located(e, CuError::Parse("expected `a + b = c`".into())))?;
                sums.push((idx(e, a)?, idx(e, bb)?, idx(e, c)?));
            }
            let mut rels = vec![];
            for e in b.all("le") {
                let (a, c) =
                    e.value.split_once("<=").ok_or_else(|| located(e, CuError::Parse("expected `a <= b`".into())))?;
                rels.push((idx(e, a)?, idx(e, c)?));
            }
            SemigroupModel::new("", ModelKind::Table(TableModel::new(names, sums, rels).map_err(at)?))
        }
        "t4" => SemigroupModel::t4(),
        "t4-faulty" => SemigroupModel::new("", ModelKind::Table(TableModel::t4_faulty())),
        other => {
            debug_assert!(!MODEL_KINDS.contains(&other));
            return Err(CuError::UnknownModelKind {
                line: kind.value_pos.line,
                col: kind.value_pos.col,
                kind: other.to_string(),
            });
        }
    };
    m.name = b.name.clone();
    Ok(m)
}

fn build_morphism(
    b: &Block,
    models: &HashMap<String, SemigroupModel>,
    built: &HashMap<String, Morphism>,
) -> Result<Morphism> {
    let kind = need(b, "kind")?;
    let at = |err| located(kind, err);
    let model = |key: &str| -> Result<&SemigroupModel> { lookup(models, need(b, key)?) };
    let f = match kind.value.as_str() {
        "identity" => Morphism::identity(model("domain")?),
        "zero" => Morphism::zero(model("domain")?, model("codomain")?),
        "multiply" => Morphism::multiply_by(model("domain")?, number(b, "factor", None)?),
        "infinite" => Morphism::infinite(model("domain")?),
        "sigma" => Morphism::sigma(model("domain")?, model("codomain")?).map_err(at)?,
        "nat-to-soft" => Morphism::nat_to_soft(model("domain")?, model("codomain")?).map_err(at)?,
        "scale" => {
            let e = need(b, "ratio")?;
            let r = parse_rat(&e.value).map_err(|err| located(e, err))?;
            Morphism::scale(model("domain")?, model("codomain")?, r).map_err(|err| located(e, err))?
        }
        "project" => Morphism::project(model("domain")?, number(b, "index", None)?).map_err(at)?,
        "inject" => Morphism::inject(model("codomain")?, number(b, "index", None)?).map_err(at)?,
        "glue" => {
            let soft = lookup(built, need(b, "soft")?)?.clone();
            let one = element(&soft.codomain, need(b, "one")?)?;
            Morphism::glue(model("domain")?, one, soft).map_err(at)?
        }
        "explicit" => {
            let (s, t) = (model("domain")?, model("codomain")?);
            let mut pairs = vec![];
            for e in b.all("map") {
                let (a, c) =
                    e.value.split_once("->").ok_or_else(|| located(e, CuError::Parse("expected `a -> b`".into())))?;
                let a = s.parse_element(a).map_err(|err| located(e, err))?;
                let c = t.parse_element(c).map_err(|err| located(e, err))?;
                pairs.push((a, c));
            }
            Morphism::explicit(s, t, pairs).map_err(at)?
        }
        "compose" => {
            let parts = references(b, &["parts"])
                .into_iter()
                .map(|(name, pos)| {
                    built.get(&name).cloned().ok_or(CuError::UndeclaredName { line: pos.line, col: pos.col, name })
                })
                .collect::<Result<Vec<_>>>()?;
            Morphism::compose_all(parts).map_err(at)?
        }
        other => {
            debug_assert!(!MORPHISM_KINDS.contains(&other));
            return Err(CuError::UnknownMorphismKind {
                line: kind.value_pos.line,
                col: kind.value_pos.col,
                kind: other.to_string(),
            });
        }
    };
    let mut f = f.named(b.name.clone());
    if let Some(cu) = flag(b, "cu")? {
        f = f.with_cu(cu);
    }
    if let Some(e) = b.get("witness") {
        f = f.with_witness(match e.value.as_str() {
            "soft-quotient" => WitnessOracle::SoftQuotient,
            "search" => WitnessOracle::Search,
            _ => return Err(located(e, CuError::Parse("witness is soft-quotient or search".into()))),
        });
    }
    Ok(f)
}

fn kind_of(b: &Block) -> &str {
    b.value("kind").unwrap_or("")
}

struct Env<'a> {
    settings: &'a Settings,
    models: &'a HashMap<String, SemigroupModel>,
    morphisms: &'a HashMap<String, Morphism>,
}

impl Env<'_> {
    fn model(&self, b: &Block, key: &str) -> Result<SemigroupModel> {
        lookup(self.models, need(b, key)?).cloned()
    }

    fn morphism(&self, b: &Block, key: &str) -> Result<Morphism> {
        lookup(self.morphisms, need(b, key)?).cloned()
    }

    fn pair_of(&self, e1: &Entry, e2: &Entry) -> Result<FactorPair> {
        let f1 = lookup(self.morphisms, e1)?.clone();
        let f2 = lookup(self.morphisms, e2)?.clone();
        FactorPair::new(format!("{};{}", f1.name, f2.name), f1, f2).map_err(|err| located(e2, err))
    }

    fn pair(&self, b: &Block) -> Result<FactorPair> {
        self.pair_of(need(b, "phi1")?, need(b, "phi2")?)
    }

    fn optional(&self, m: &SemigroupModel, b: &Block, key: &str) -> Result<Option<Element>> {
        b.get(key).map(|e| element(m, e)).transpose()
    }

    fn task(&self, kind: &str, b: &Block) -> Result<Task> {
        Ok(match kind {
            "check-axioms" => Task::Axioms { model: self.model(b, "model")? },
            "check-model-pure" => Task::ModelPure {
                model: self.model(b, "model")?,
                k_max: number(b, "k_max", Some(3))?,
                m_max: number(b, "m_max", Some(3))?,
            },
            "check-morphism" => {
                let f = self.morphism(b, "morphism")?;
                let cu = flag(b, "cu")?.unwrap_or(f.declared_cu);
                Task::Morphism { f, cu }
            }
            "check-pure" => Task::Pure {
                f: self.morphism(b, "morphism")?,
                k_max: number(b, "k_max", Some(3))?,
                m_max: number(b, "m_max", Some(3))?,
            },
            "check-q-rational" => {
                let f = self.morphism(b, "morphism")?;
                let primes = match b.get("primes") {
                    Some(e) => parse_primes(&e.value).map_err(|err| located(e, err))?,
                    None => f.codomain.primes().or(f.domain.primes()).map(<[u64]>::to_vec).ok_or_else(|| {
                        CuError::Syntax {
                            line: b.pos.line,
                            col: b.pos.col,
                            msg: "check-q-rational needs `primes`".into(),
                        }
                    })?,
                };
                Task::QRational { f, primes }
            }
            "check-soft" => Task::Soft { f: self.morphism(b, "morphism")? },
            "compute-alpha" => {
                let pair = self.pair(b)?;
                let x = element(pair.source(), need(b, "x")?)?;
                let t = element(&SemigroupModel::z(), need(b, "t")?)?;
                let value = self.optional(pair.target(), b, "value")?;
                Task::Alpha { pair, x, t, value }
            }
            "compute-alpha-q" => {
                let pair = self.pair(b)?;
                let e = need(b, "primes")?;
                let primes = parse_primes(&e.value).map_err(|err| located(e, err))?;
                let x = element(pair.source(), need(b, "x")?)?;
                let t = element(&SemigroupModel::kq(&primes), need(b, "t")?)?;
                let value = self.optional(pair.target(), b, "value")?;
                Task::AlphaQ { pair, x, t, primes, value }
            }
            "compute-alpha-soft" => {
                let pair = self.pair(b)?;
                let x = element(pair.source(), need(b, "x")?)?;
                let e = need(b, "t")?;
                let t: ExtRat = e.value.parse().map_err(|err| located(e, err))?;
                let value = self.optional(pair.target(), b, "value")?;
                Task::AlphaSoft { pair, x, t, value }
            }
            "verify-bimorphism" => Task::Bimorphism { pair: self.pair(b)? },
            "lemma-suite" => {
                let mut cfg = match b.value("catalog").unwrap_or("builtin") {
                    "builtin" => LemmaSuiteConfig::default(),
                    "declared" => {
                        let mut cfg = LemmaSuiteConfig::empty();
                        let mut models: Vec<_> = self.models.values().cloned().collect();
                        models.sort_by(|a, c| a.name.cmp(&c.name));
                        let mut maps: Vec<_> = self.morphisms.values().cloned().collect();
                        maps.sort_by(|a, c| a.name.cmp(&c.name));
                        cfg.models = models;
                        cfg.morphisms = maps;
                        cfg
                    }
                    _ => {
                        let e = need(b, "catalog")?;
                        return Err(located(e, CuError::Parse("catalog is builtin or declared".into())));
                    }
                };
                for e in b.all("pair") {
                    let (a, c) = e
                        .value
                        .split_once(',')
                        .ok_or_else(|| located(e, CuError::Parse("expected `phi1, phi2`".into())))?;
                    let shifted = |s: &str| Entry {
                        key: e.key.clone(),
                        value: s.trim().to_string(),
                        pos: e.pos,
                        value_pos: Pos {
                            line: e.value_pos.line,
                            col: e.value_pos.col + e.value.find(s.trim()).unwrap_or(0),
                        },
                    };
                    cfg.pairs.push(self.pair_of(&shifted(a), &shifted(c))?);
                }
                cfg.depth = self.settings.depth;
                cfg.frac_bound = number(b, "frac_bound", Some(self.settings.frac_bound))?;
                cfg.seed = number(b, "seed", Some(self.settings.seed))?;
                cfg.samples = number(b, "samples", Some(self.settings.samples))?;
                Task::LemmaSuite { cfg }
            }
            "check-z-extension" => {
                let soft = self.morphism(b, "soft")?;
                let one = element(&soft.codomain, need(b, "one")?)?;
                Task::ZExtension { one, soft }
            }
            "check-instance" => {
                let e = need(b, "command")?;
                if e.value == "check-instance" || !crate::scenario::COMMAND_KINDS.contains(&e.value.as_str()) {
                    return Err(located(e, CuError::Parse(format!("cannot replay `{}`", e.value))));
                }
                let target = self.task(&e.value, b)?;
                let mut cx = Counterexample::new(&need(b, "law")?.value);
                for e in &b.entries {
                    if let Some(k) = e.key.strip_prefix("at.") {
                        cx = cx.with(k, &e.value);
                    }
                }
                Task::Instance { target: Box::new(target), cx }
            }
            other => {
                return Err(CuError::Syntax {
                    line: b.pos.line,
                    col: b.pos.col,
                    msg: format!("unknown command `{other}`"),
                })
            }
        })
    }
}

/// Resolves every declaration and command.
pub fn compile(sc: &Scenario) -> Result<Compiled> {
    for b in &sc.models {
        let k = need(b, "kind")?;
        if !MODEL_KINDS.contains(&k.value.as_str()) {
            return Err(CuError::UnknownModelKind {
                line: k.value_pos.line,
                col: k.value_pos.col,
                kind: k.value.clone(),
            });
        }
    }
    for b in &sc.morphisms {
        let k = need(b, "kind")?;
        if !MORPHISM_KINDS.contains(&k.value.as_str()) {
            return Err(CuError::UnknownMorphismKind {
                line: k.value_pos.line,
                col: k.value_pos.col,
                kind: k.value.clone(),
            });
        }
    }
    let model_deps = |b: &Block| if kind_of(b) == "product" { references(b, &["parts"]) } else { vec![] };
    let mut models = HashMap::new();
    for i in dependency_order(&sc.models, &model_deps)? {
        let m = build_model(&sc.models[i], &models)?;
        models.insert(m.name.clone(), m);
    }
    let map_deps = |b: &Block| match kind_of(b) {
        "compose" => references(b, &["parts"]),
        "glue" => references(b, &["soft"]),
        _ => vec![],
    };
    let mut morphisms = HashMap::new();
    for i in dependency_order(&sc.morphisms, &map_deps)? {
        let f = build_morphism(&sc.morphisms[i], &models, &morphisms)?;
        morphisms.insert(f.name.clone(), f);
    }
    let env = Env { settings: &sc.settings, models: &models, morphisms: &morphisms };
    let mut commands = vec![];
    for b in &sc.commands {
        let expect = match b.get("expect") {
            None => Status::Pass,
            Some(e) => match e.value.as_str() {
                "pass" => Status::Pass,
                "fail" => Status::Fail,
                "inconclusive" => Status::Inconclusive,
                _ => return Err(located(e, CuError::Parse("expect is pass, fail or inconclusive".into()))),
            },
        };
        let depth = number(b, "depth", Some(sc.settings.depth))?;
        commands.push(Planned { kind: b.name.clone(), depth, expect, task: env.task(&b.name, b)? });
    }
    Ok(Compiled { settings: sc.settings.clone(), models, morphisms, commands })
}

fn error_law(e: &CuError) -> &'static str {
    match e {
        CuError::SoftnessViolated { .. } => "softness",
        CuError::NoWitnessFound(_) => "no-witness",
        CuError::NotADivisor { .. } => "not-a-divisor",
        CuError::Ambiguous(_) => "ambiguous",
        CuError::PreconditionViolated(_) => "precondition",
        CuError::UnsupportedChainForm(_) => "unsupported-chain",
        _ => "error",
    }
}

fn computed(
    check: &str,
    pair: &FactorPair,
    x: &Element,
    t: String,
    depth: u64,
    out: Result<Element>,
    expected: &Option<Element>,
) -> CheckReport {
    let target = pair.target();
    let mut r = CheckReport::new(check, &pair.name, depth).exact(true);
    r.instances = 1;
    let cx = |law: &str| Counterexample::new(law).with("x", pair.source().render(x)).with("t", &t);
    match out {
        Ok(v) => {
            r.witness(format!("value = {}", target.render(&v)));
            if let Some(want) = expected {
                if *want != v {
                    r.fail(cx("value").with("expected", target.render(want)), format!("got {}", target.render(&v)));
                }
            }
        }
        Err(e) => {
            r.fail(cx(error_law(&e)), e.to_string());
        }
    }
    r
}

fn subject(task: &Task) -> String {
    match task {
        Task::Axioms { model } | Task::ModelPure { model, .. } => model.name.clone(),
        Task::Morphism { f, .. } | Task::Pure { f, .. } | Task::QRational { f, .. } | Task::Soft { f } => {
            f.name.clone()
        }
        Task::Alpha { pair, .. }
        | Task::AlphaQ { pair, .. }
        | Task::AlphaSoft { pair, .. }
        | Task::Bimorphism { pair } => pair.name.clone(),
        Task::LemmaSuite { .. } => "lemma-suite".into(),
        Task::ZExtension { one, soft } => format!("glue({}, {})", soft.codomain.render(one), soft.name),
        Task::Instance { target, .. } => subject(target),
    }
}

/// Runs one task at the given depth.
pub fn execute(task: &Task, depth: u64) -> CheckReport {
    let start = Instant::now();
    let r = match task {
        Task::Axioms { model } => check_axioms(model, depth),
        Task::ModelPure { model, k_max, m_max } => {
            let mut r = CheckReport::new("check-model-pure", &model.name, depth)
                .bound("k_max", *k_max)
                .bound("m_max", *m_max)
                .exact(true);
            let d = semigroup_almost_divisible(model, depth, *k_max);
            r.absorb(&semigroup_almost_unperforated(model, depth, *m_max));
            r.absorb(&d);
            r
        }
        Task::Morphism { f, cu: true } => check_cu_morphism(f, depth),
        Task::Morphism { f, cu: false } => check_generalized_cu_morphism(f, depth),
        Task::Pure { f, k_max, m_max } => check_pure(f, depth, *k_max, *m_max),
        Task::QRational { f, primes } => check_q_rational(f, primes, depth),
        Task::Soft { f } => check_soft_morphism(f, depth),
        Task::Alpha { pair, x, t, value } => {
            let out = alpha_value(pair, x, t, depth).map(|(v, _)| v);
            computed("compute-alpha", pair, x, SemigroupModel::z().render(t), depth, out, value)
        }
        Task::AlphaQ { pair, x, t, primes, value } => {
            let out = alpha_q_eval(pair, x, t, primes);
            computed("compute-alpha-q", pair, x, SemigroupModel::kq(primes).render(t), depth, out, value)
        }
        Task::AlphaSoft { pair, x, t, value } => {
            let out = alpha_soft_eval(pair, x, t);
            computed("compute-alpha-soft", pair, x, t.to_string(), depth, out, value)
        }
        Task::Bimorphism { pair } => verify_alpha_bimorphism(pair, depth),
        Task::LemmaSuite { cfg } => lemma_suite(&LemmaSuiteConfig { depth, ..cfg.clone() }),
        Task::ZExtension { one, soft } => check_z_extension(one, soft, depth),
        Task::Instance { target, cx } => replay_instance(target, cx, depth),
    };
    r.timed(start)
}

enum Replayed {
    Violated,
    Holds,
    /// No direct evaluation for this law.
    Rerun,
}

fn arg<'a>(cx: &'a Counterexample, key: &str) -> Result<&'a str> {
    cx.get(key).ok_or_else(|| CuError::Parse(format!("counterexample has no `{key}`")))
}

fn elem(m: &SemigroupModel, cx: &Counterexample, key: &str) -> Result<Element> {
    m.parse_element(arg(cx, key)?)
}

fn count(cx: &Counterexample, key: &str) -> Result<u64> {
    arg(cx, key)?.parse().map_err(|_| CuError::Parse(format!("`{key}` is not a number")))
}

fn verdict(violated: bool) -> Replayed {
    if violated {
        Replayed::Violated
    } else {
        Replayed::Holds
    }
}

fn replay_morphism_law(f: &Morphism, law: &str, cx: &Counterexample, depth: u64) -> Result<Replayed> {
    let (s, t) = (&f.domain, &f.codomain);
    let v = |k| elem(s, cx, k);
    Ok(match law {
        "total" => verdict(f.apply(&v("a")?).is_err()),
        "zero" => verdict(f.image(&s.zero()) != t.zero()),
        "monotone" => {
            let (a, b) = (v("a")?, v("b")?);
            verdict(s.le(&a, &b) && !t.le(&f.image(&a), &f.image(&b)))
        }
        "additive" => {
            let (a, b) = (v("a")?, v("b")?);
            verdict(f.apply_gen(&s.sum(&a, &b)) != Some(t.sum(&f.image(&a), &f.image(&b))))
        }
        "way-below" => {
            let (a, b) = (v("a")?, v("b")?);
            verdict(s.wb(&a, &b) && !t.wb(&f.image(&a), &f.image(&b)))
        }
        "almost-unperforated" => {
            let (x, y, m) = (v("x")?, v("y")?, count(cx, "m")?);
            verdict(s.le(&s.times(&x, m + 1), &s.times(&y, m)) && !t.le(&f.image(&x), &f.image(&y)))
        }
        "almost-divisible" => {
            let (xp, x, k) = (v("x'")?, v("x")?, count(cx, "k")?);
            let search = search_divisibility_witness(f, k, &xp, &x, depth * (k + 1));
            match search {
                WitnessSearch::Absent => verdict(s.wb(&xp, &x)),
                WitnessSearch::Found(_) => Replayed::Holds,
                WitnessSearch::Unknown => Replayed::Rerun,
            }
        }
        "q-divisible" => verdict(t.exact_divide(&f.image(&v("x")?), count(cx, "n")?).is_none()),
        "q-unperforated" => {
            let (x, y, n) = (v("x")?, v("y")?, count(cx, "n")?);
            verdict(s.le(&s.times(&x, n), &s.times(&y, n)) && !t.le(&f.image(&x), &f.image(&y)))
        }
        "soft" => verdict(!is_strongly_soft(t, &f.image(&v("x")?), depth)),
        _ => Replayed::Rerun,
    })
}

fn replay_model_law(s: &SemigroupModel, law: &str, cx: &Counterexample) -> Result<Replayed> {
    let v = |k| elem(s, cx, k);
    Ok(match law {
        "reflexive" => verdict(!s.le(&v("a")?, &v("a")?)),
        "zero-least" => verdict(!s.le(&s.zero(), &v("a")?)),
        "zero-neutral" => {
            let a = v("a")?;
            verdict(s.sum(&a, &s.zero()) != a || s.sum(&s.zero(), &a) != a)
        }
        "antisymmetric" => {
            let (a, b) = (v("a")?, v("b")?);
            verdict(a != b && s.le(&a, &b) && s.le(&b, &a))
        }
        "commutative" => {
            let (a, b) = (v("a")?, v("b")?);
            verdict(s.sum(&a, &b) != s.sum(&b, &a))
        }
        "way-below-implies-le" => {
            let (a, b) = (v("a")?, v("b")?);
            verdict(s.wb(&a, &b) && !s.le(&a, &b))
        }
        "transitive" => {
            let (a, b, c) = (v("a")?, v("b")?, v("c")?);
            verdict(s.le(&a, &b) && s.le(&b, &c) && !s.le(&a, &c))
        }
        "add-monotone" => {
            let (a, b, c) = (v("a")?, v("b")?, v("c")?);
            verdict(s.le(&a, &b) && !s.le(&s.sum(&a, &c), &s.sum(&b, &c)))
        }
        "associative" => {
            let (a, b, c) = (v("a")?, v("b")?, v("c")?);
            verdict(s.sum(&s.sum(&a, &b), &c) != s.sum(&a, &s.sum(&b, &c)))
        }
        "almost-unperforated" => {
            let (x, y, m) = (v("x")?, v("y")?, count(cx, "m")?);
            verdict(s.le(&s.times(&x, m + 1), &s.times(&y, m)) && !s.le(&x, &y))
        }
        "almost-divisible" => {
            let (xp, x, k) = (v("x'")?, v("x")?, count(cx, "k")?);
            match s.down_set(&x) {
                Some(ys) => verdict(
                    s.wb(&xp, &x) && !ys.iter().any(|y| s.le(&s.times(y, k), &x) && s.le(&xp, &s.times(y, k + 1))),
                ),
                None => Replayed::Rerun,
            }
        }
        _ => Replayed::Rerun,
    })
}

fn replay_direct(target: &Task, cx: &Counterexample, depth: u64) -> Result<Replayed> {
    match target {
        Task::Morphism { f, .. } | Task::Pure { f, .. } | Task::QRational { f, .. } | Task::Soft { f } => {
            replay_morphism_law(f, &cx.law, cx, depth)
        }
        Task::Axioms { model } | Task::ModelPure { model, .. } => replay_model_law(model, &cx.law, cx),
        Task::Bimorphism { pair } => {
            if let Some(rest) = cx.law.strip_prefix("precondition almost-divisible: ") {
                return replay_morphism_law(&pair.phi1, rest, cx, depth);
            }
            if let Some(rest) = cx.law.strip_prefix("precondition almost-unperforated: ") {
                return replay_morphism_law(&pair.phi2, rest, cx, depth);
            }
            if cx.law == "anchor" {
                let x = elem(pair.source(), cx, "x")?;
                let one = Elem::Compact(num_rational::BigRational::one());
                return Ok(match alpha_value(pair, &x, &one, depth) {
                    Ok((v, _)) => verdict(v != pair.composite(&x)),
                    Err(_) => Replayed::Violated,
                });
            }
            Ok(Replayed::Rerun)
        }
        _ => Ok(Replayed::Rerun),
    }
}

/// Fails when the counterexample still violates its law.
fn replay_instance(target: &Task, cx: &Counterexample, depth: u64) -> CheckReport {
    let mut r = CheckReport::new("check-instance", subject(target), depth).exact(true);
    r.instances = 1;
    match replay_direct(target, cx, depth) {
        Ok(Replayed::Violated) => r.fail(cx.clone(), "the law is violated at these values"),
        Ok(Replayed::Holds) => r.detail = "the law holds at these values".into(),
        Ok(Replayed::Rerun) => {
            let again = execute(target, depth);
            match &again.counterexample {
                Some(c) if again.failed() && c == cx => r.fail(cx.clone(), "the rerun reports the same violation"),
                _ if again.passed() => r.detail = "the rerun passes".into(),
                _ => r.inconclusive(format!("the rerun reports: {} {}", again.status, again.detail)),
            }
            r.exact = again.exact;
        }
        Err(e) => r.inconclusive(format!("cannot evaluate the counterexample: {e}")),
    }
    r
}

/// One executed command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandRecord {
    /// Position among the scenario's commands.
    pub index: usize,
    pub command: String,
    pub expect: Status,
    pub unexpected: bool,
    #[serde(flatten)]
    pub report: CheckReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub records: Vec<CommandRecord>,
}

impl RunOutcome {
    pub fn unexpected(&self) -> usize {
        self.records.iter().filter(|r| r.unexpected).count()
    }

    /// 0 when every command met its expectation.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.unexpected() > 0)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for rec in &self.records {
            let mark = if rec.unexpected { "UNEXPECTED" } else { "ok" };
            s += &format!("#{} {} (expect {}): {}\n", rec.index, rec.command, rec.expect, mark);
            s += &rec.report.to_text();
            s.push('\n');
        }
        s += &format!("{} commands, {} unexpected\n", self.records.len(), self.unexpected());
        s
    }

    pub fn to_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Machine => self.to_machine(),
        }
    }

    pub fn from_machine(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CuError::Parse(e.to_string()))
    }
}

/// Executes the commands in order.
pub fn run_compiled(c: &Compiled) -> RunOutcome {
    let records = c
        .commands
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let mut report = execute(&p.task, p.depth);
            if report.subject.is_empty() {
                report.subject = subject(&p.task);
            }
            CommandRecord {
                index,
                command: p.kind.clone(),
                expect: p.expect,
                unexpected: report.status != p.expect,
                report,
            }
        })
        .collect();
    RunOutcome { records }
}

pub fn run_scenario(sc: &Scenario) -> Result<RunOutcome> {
    Ok(run_compiled(&compile(sc)?))
}

/// File the report of `input` is written to inside `out`.
pub fn report_path(out: &Path, input: &Path, format: Format) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let ext = match format {
        Format::Text => "report.txt",
        Format::Machine => "report.json",
    };
    out.join(format!("{stem}.{ext}"))
}

pub fn write_report(outcome: &RunOutcome, path: &Path, format: Format) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, outcome.render(format))?;
    Ok(())
}

/// A scenario that re-checks only the counterexample of `record`.
pub fn replay_scenario(original: &Scenario, record: &CommandRecord) -> Option<Scenario> {
    let cx = record.report.counterexample.as_ref()?;
    let source = original.commands.get(record.index)?;
    if source.name == "check-instance" {
        let mut b = source.clone();
        b.entries.retain(|e| e.key != "expect" && e.key != "depth");
        b = b.with("depth", record.report.depth.to_string()).with("expect", "fail");
        return Some(Scenario { commands: vec![b], ..original.clone() });
    }
    let mut b = Block::new("check-instance").with("command", source.name.clone());
    for e in source.entries.iter().filter(|e| e.key != "expect" && e.key != "depth") {
        b.entries.push(Entry::new(e.key.clone(), e.value.clone()));
    }
    b = b.with("depth", record.report.depth.to_string()).with("law", cx.law.clone());
    for (k, v) in &cx.values {
        b = b.with(format!("at.{k}"), v.clone());
    }
    b = b.with("expect", "fail");
    Some(Scenario { commands: vec![b], ..original.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, serialize};

    fn scenario(model: &str, body: &str) -> Scenario {
        parse_scenario(&format!(
            "model M {{\n  kind = {model}\n}}\nmorphism id {{\n  kind = identity\n  domain = M\n}}\n{body}"
        ))
        .unwrap()
    }

    #[test]
    fn identity_on_z_is_pure() {
        let sc = scenario("z", "command check-pure {\n  morphism = id\n  depth = 6\n}\n");
        let out = run_scenario(&sc).unwrap();
        assert_eq!(out.records[0].report.status, Status::Pass);
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn identity_on_nbar_is_not_pure() {
        let sc = scenario("nbar", "command check-pure {\n  morphism = id\n  depth = 4\n}\n");
        let out = run_scenario(&sc).unwrap();
        let cx = out.records[0].report.counterexample.clone().unwrap();
        assert_eq!((cx.get("x'"), cx.get("x"), cx.get("k")), (Some("1"), Some("1"), Some("2")));
        assert_eq!(out.exit_code(), 1);
    }

    #[test]
    fn empty_command_list_exits_cleanly() {
        let out = run_scenario(&scenario("z", "")).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn failures_replay() {
        let sc = scenario("t4", "command check-pure {\n  morphism = id\n  expect = fail\n}\n");
        let out = run_scenario(&sc).unwrap();
        assert_eq!(out.exit_code(), 0);
        let replay = replay_scenario(&sc, &out.records[0]).unwrap();
        let replay = parse_scenario(&serialize(&replay)).unwrap();
        let again = run_scenario(&replay).unwrap();
        assert_eq!(again.records[0].report.status, Status::Fail);
        assert_eq!(again.records[0].report.counterexample, out.records[0].report.counterexample);
    }

    #[test]
    fn holding_laws_do_not_replay_as_failures() {
        let sc = scenario(
            "z",
            "command check-instance {\n  command = check-pure\n  morphism = id\n  law = almost-divisible\n  at.x' = compact:1\n  at.x = compact:1\n  at.k = 2\n}\n",
        );
        let out = run_scenario(&sc).unwrap();
        assert_eq!(out.records[0].report.status, Status::Pass);
    }

    #[test]
    fn machine_reports_parse_back() {
        let sc = scenario("nbar", "command check-pure {\n  morphism = id\n  depth = 3\n  expect = fail\n}\n");
        let out = run_scenario(&sc).unwrap();
        let back = RunOutcome::from_machine(&out.to_machine()).unwrap();
        assert_eq!(back, out);
        let v: serde_json::Value = serde_json::from_str(&out.to_machine()).unwrap();
        let rec = &v["records"][0];
        for key in ["check", "status", "counterexample", "depth", "exact", "elapsed_ms"] {
            assert!(rec.get(key).is_some(), "{key} missing");
        }
    }

    #[test]
    fn unwritable_output_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let out = RunOutcome { records: vec![] };
        let err = write_report(&out, &blocker.join("r.txt"), Format::Text).unwrap_err();
        assert!(matches!(err, CuError::Io(_)));
    }
}
