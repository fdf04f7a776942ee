//! End-to-end acceptance run: one line per criterion, each within its time
//! budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cu_factor::axioms::check_axioms;
use cu_factor::checks::{check_almost_divisible, check_almost_unperforated};
use cu_factor::element::{Elem, Element};
use cu_factor::error::CuError;
use cu_factor::factorization::{
    alpha_eval, alpha_eval_oracle, alpha_q_eval, alpha_soft_eval, catalog_pairs, ceiling_bound, check_z_extension,
    omega_n_eval, verify_alpha_bimorphism, z_extension_criterion, FactorPair,
};
use cu_factor::model::{SemigroupModel, TableModel};
use cu_factor::morphism::Morphism;
use cu_factor::oracle::{brute_graph, brute_morphism_check, brute_order_oracle, lemma_suite, LemmaSuiteConfig};
use cu_factor::rational::{int, rat, Ext};
use cu_factor::runner::{replay_scenario, report_path, RunOutcome};
use cu_factor::scenario::{parse_scenario, serialize, Format};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(n: u64) -> Element {
    Elem::Compact(int(n))
}

fn soft(p: i64, q: i64) -> Element {
    Elem::Soft(Ext::Fin(rat(p, q)))
}

fn order_oracle_agreement() -> Outcome {
    let mut pairs = 0;
    for s in [SemigroupModel::z(), SemigroupModel::nbar(), SemigroupModel::half_line(), SemigroupModel::kq(&[2])] {
        let g = s.grid(12);
        for a in &g {
            for b in &g {
                pairs += 1;
                let le = brute_order_oracle(&s, a, b, 12, false);
                ensure(s.le(a, b) == le, || format!("{}: {a} ≤ {b} oracle says {le}", s.name))?;
                let wb = brute_order_oracle(&s, a, b, 12, true);
                ensure(s.wb(a, b) == wb, || format!("{}: {a} ≪ {b} oracle says {wb}", s.name))?;
            }
        }
    }
    Ok(format!("{pairs} pairs agree"))
}

fn axiom_suite() -> Outcome {
    let models = vec![
        SemigroupModel::z(),
        SemigroupModel::nbar(),
        SemigroupModel::half_line(),
        SemigroupModel::kq(&[2]),
        SemigroupModel::t4(),
    ];
    for s in &models {
        let r = check_axioms(s, 8);
        ensure(r.passed(), || format!("{}: {}", s.name, r.to_text()))?;
    }
    let t4 = check_axioms(&SemigroupModel::t4(), 8);
    ensure(t4.exact, || "T4 check is not exhaustive".into())?;
    let faulty = SemigroupModel::new("T4-faulty", cu_factor::model::ModelKind::Table(TableModel::t4_faulty()));
    let r = check_axioms(&faulty, 8);
    ensure(r.failed() && r.counterexample.is_some(), || format!("fault not detected: {}", r.to_text()))?;
    Ok(format!("{} models pass, fault: {}", models.len(), r.counterexample.unwrap()))
}

fn pureness() -> Outcome {
    for s in [SemigroupModel::z(), SemigroupModel::half_line()] {
        let id = Morphism::identity(&s);
        let u = check_almost_unperforated(&id, 8, 6);
        let d = check_almost_divisible(&id, 8, 6);
        ensure(u.passed() && d.passed(), || format!("{}: {} / {}", s.name, u.status, d.status))?;
    }
    let d = check_almost_divisible(&Morphism::identity(&SemigroupModel::nbar()), 8, 6);
    let cx = d.counterexample.clone().ok_or("Nbar identity passed divisibility")?;
    ensure(d.exact && cx.get("x") == Some("1") && cx.get("k") == Some("2"), || format!("Nbar: {cx}"))?;
    let u = check_almost_unperforated(&Morphism::identity(&SemigroupModel::t4()), 8, 6);
    let cx2 = u.counterexample.clone().ok_or("T4 identity passed unperforation")?;
    ensure(u.exact && cx2.get("x") == Some("x") && cx2.get("y") == Some("y") && cx2.get("m") == Some("2"), || {
        format!("T4: {cx2}")
    })?;
    Ok(format!("Nbar: {cx}; T4: {cx2}"))
}

fn bimorphism() -> Outcome {
    let pairs = catalog_pairs();
    ensure(pairs.len() >= 6, || "catalog too small".into())?;
    let mut instances = 0;
    for p in &pairs {
        let r = verify_alpha_bimorphism(p, 6);
        ensure(r.passed(), || r.to_text())?;
        instances += r.instances;
    }
    Ok(format!("{} pairs, {instances} instances", pairs.len()))
}

fn alpha_oracle_equivalence() -> Outcome {
    let z = SemigroupModel::z();
    let ts = z.grid(8);
    let mut n = 0;
    for p in &catalog_pairs() {
        for x in p.source().grid(8) {
            for t in &ts {
                n += 1;
                let a = alpha_eval(p, &x, t).map_err(|e| format!("{}: α({x}, {t}): {e}", p.name))?;
                let o = alpha_eval_oracle(p, &x, t, 8);
                ensure(o.exact && o.value == a, || format!("{}: α({x}, {t}) = {a}, oracle {o:?}", p.name))?;
                let bound = ceiling_bound(p, &x, t);
                ensure(p.target().le(&a, &bound), || format!("{}: α({x}, {t}) = {a} above {bound}", p.name))?;
            }
        }
    }
    Ok(format!("{n} values agree"))
}

fn z_extension() -> Outcome {
    let z = SemigroupModel::z();
    let h = SemigroupModel::half_line();
    let ones =
        [c(0), c(1), c(2), c(3), soft(1, 2), soft(1, 1), soft(3, 2), soft(2, 1), soft(3, 1), Elem::Soft(Ext::Inf)];
    let mut softs = vec![
        Morphism::zero(&h, &z),
        Morphism::compose(&Morphism::infinite(&z), &Morphism::scale(&h, &z, int(1)).unwrap()).unwrap(),
    ];
    for r in [rat(1, 2), int(1), int(2), int(3)] {
        softs.push(Morphism::scale(&h, &z, r).unwrap());
    }
    let (mut maps, mut passes) = (0, 0);
    for one in &ones {
        for g in &softs {
            maps += 1;
            let crit = z_extension_criterion(one, g, 12);
            let glued = Morphism::glue(&z, one.clone(), g.clone()).unwrap();
            let brute = brute_morphism_check(&brute_graph(&glued, 12), 12);
            ensure(crit.passed() == brute.passed(), || {
                format!("{one} + {}: criterion {} brute {}", g.name, crit.status, brute.status)
            })?;
            passes += crit.passed() as u32;
        }
    }
    let id = Morphism::scale(&h, &z, int(1)).unwrap();
    ensure(check_z_extension(&soft(1, 1), &id, 12).passed(), || "sigma does not glue".into())?;
    let doubling = check_z_extension(&c(2), &id, 12);
    ensure(doubling.failed(), || "doubling glues".into())?;
    Ok(format!("{maps} maps agree, {passes} glue"))
}

fn rational_variant() -> Outcome {
    let kq = SemigroupModel::kq(&[2]);
    let id = Morphism::identity(&kq);
    let p = FactorPair::new("id_Kq", id.clone(), id).unwrap();
    let grid = kq.grid(8);
    let mut n = 0;
    for x in &grid {
        for d in [2, 4, 8] {
            n += 1;
            let w = omega_n_eval(&p, x, d, &[2]).map_err(|e| format!("ω_{d}({x}): {e}"))?;
            ensure(kq.times(&w, d) == *x, || format!("{d}·ω_{d}({x}) = {}", kq.times(&w, d)))?;
        }
        let a = alpha_q_eval(&p, x, &c(1), &[2]).map_err(|e| e.to_string())?;
        ensure(a == *x, || format!("α_q({x}, 1) = {a}"))?;
    }
    let v = alpha_q_eval(&p, &c(1), &Elem::Compact(rat(3, 2)), &[2]).map_err(|e| e.to_string())?;
    ensure(v == Elem::Compact(rat(3, 2)), || format!("α_q(1, 3/2) = {v}"))?;
    Ok(format!("{n} divisions unique"))
}

fn soft_variant() -> Outcome {
    let pairs = catalog_pairs();
    let p = pairs.iter().find(|p| p.name == "nat_to_soft;id_Z").unwrap();
    let mut n = 0;
    for x in p.source().grid(8) {
        n += 1;
        let v = alpha_soft_eval(p, &x, &Ext::Fin(int(1))).map_err(|e| format!("{x}: {e}"))?;
        ensure(v == p.composite(&x), || format!("{x}: {v}"))?;
    }
    let q = pairs.iter().find(|p| p.name == "id_Z;id_Z").unwrap();
    match alpha_soft_eval(q, &c(1), &Ext::Fin(int(1))) {
        Err(CuError::SoftnessViolated { .. }) => Ok(format!("{n} identities, violation raised")),
        other => Err(format!("expected SoftnessViolated, got {other:?}")),
    }
}

fn permanence() -> Outcome {
    let cfg = LemmaSuiteConfig::default();
    let r = lemma_suite(&cfg);
    ensure(r.passed(), || r.to_text())?;
    ensure(r.instances >= 200, || format!("only {} instances", r.instances))?;
    for control in ["nbar-divisibility", "t4-unperforation", "nat_to_soft-way-below"] {
        ensure(r.witnesses.iter().any(|w| w.contains(control)), || format!("control {control} missing"))?;
    }
    let again = lemma_suite(&cfg);
    ensure(again.without_timing() == r.without_timing(), || "suite is not deterministic".into())?;
    Ok(format!("{} instances", r.instances))
}

fn cli(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cu-factor")).args(args).output().map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "killed by a signal".into())
}

fn machine_report(dir: &Path, input: &Path) -> Result<RunOutcome, String> {
    let text = fs::read_to_string(report_path(dir, input, Format::Machine)).map_err(|e| e.to_string())?;
    RunOutcome::from_machine(&text).map_err(|e| e.to_string())
}

fn run_file(input: &Path, out: &Path) -> Result<(i32, RunOutcome), String> {
    let code = cli(&["--input", input.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "machine"])?;
    Ok((code, machine_report(out, input)?))
}

fn cli_contract() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let write = |name: &str, text: &str| -> Result<PathBuf, String> {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| e.to_string())?;
        Ok(p)
    };

    let minimal = "model Z {\n  kind = z\n}\nmorphism id {\n  kind = identity\n  domain = Z\n}\ncommand check-pure {\n  morphism = id\n  depth = 6\n}\n";
    let sc = parse_scenario(minimal).map_err(|e| e.to_string())?;
    ensure((sc.models.len(), sc.morphisms.len(), sc.commands.len()) == (1, 1, 1), || "minimal counts".into())?;
    ensure(
        matches!(parse_scenario(&minimal.replace("= id\n  depth", "= phi9\n  depth")), Err(CuError::UndeclaredName { ref name, .. }) if name == "phi9"),
        || "phi9 is not reported as undeclared".into(),
    )?;
    ensure(
        matches!(
            parse_scenario(&minimal.replace("kind = z", "kind = vonneumann")),
            Err(CuError::UnknownModelKind { .. })
        ),
        || "vonneumann is not reported as an unknown kind".into(),
    )?;

    let (code, _) = run_file(&write("z.scn", minimal)?, dir)?;
    ensure(code == 0, || format!("Z identity exits {code}"))?;
    let nbar = minimal.replace("kind = z", "kind = nbar").replace("depth = 6", "depth = 4");
    let (code, out) = run_file(&write("nbar.scn", &nbar)?, dir)?;
    ensure(code == 1, || format!("Nbar identity exits {code}"))?;
    let cx = out.records[0].report.counterexample.clone().ok_or("Nbar has no counterexample")?;
    ensure(cx.get("x") == Some("1") && cx.get("k") == Some("2"), || format!("Nbar counterexample {cx}"))?;

    let empty = write("empty.scn", "model Z {\n  kind = z\n}\n")?;
    let (code, out) = run_file(&empty, dir)?;
    ensure(code == 0 && out.records.is_empty(), || format!("empty scenario exits {code}"))?;
    let blocker = write("blocker", "")?;
    let code = cli(&["--input", empty.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()])?;
    ensure(code == 2, || format!("unwritable output exits {code}"))?;

    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut files: Vec<PathBuf> = fs::read_dir(&corpus)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    ensure(files.len() >= 15, || format!("only {} corpus files", files.len()))?;
    let mut replays = 0;
    for (i, file) in files.iter().enumerate() {
        let text = fs::read_to_string(file).map_err(|e| e.to_string())?;
        let sc = parse_scenario(&text).map_err(|e| format!("{}: {e}", file.display()))?;
        ensure(parse_scenario(&serialize(&sc)).as_ref() == Ok(&sc), || {
            format!("{} does not round-trip", file.display())
        })?;
        let out_dir = dir.join(format!("run{i}"));
        let (code, out) = run_file(file, &out_dir)?;
        ensure(code == 0, || format!("{} exits {code}", file.display()))?;
        if i == 0 {
            let again_dir = dir.join("again");
            let (_, again) = run_file(file, &again_dir)?;
            let strip = |o: &RunOutcome| o.records.iter().map(|r| r.report.without_timing()).collect::<Vec<_>>();
            ensure(strip(&again) == strip(&out), || format!("{} is not deterministic", file.display()))?;
        }
        for rec in out.records.iter().filter(|r| r.report.failed()) {
            let replay =
                replay_scenario(&sc, rec).ok_or_else(|| format!("{} #{} has no replay", file.display(), rec.index))?;
            let path = write(&format!("replay{i}_{}.scn", rec.index), &serialize(&replay))?;
            let (code, again) = run_file(&path, &out_dir)?;
            let r = &again.records[0].report;
            ensure(code == 0 && r.failed() && r.counterexample == rec.report.counterexample, || {
                format!("{} #{} does not replay: {}", file.display(), rec.index, r.to_text())
            })?;
            replays += 1;
        }
    }
    ensure(replays > 0, || "corpus has no failing checks".into())?;
    Ok(format!("{} corpus files, {replays} failures replay", files.len()))
}

/// Name, time limit in seconds, and the check.
type Criterion = (&'static str, u64, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("order oracle agreement", 30, order_oracle_agreement),
        ("axiom suite", 30, axiom_suite),
        ("pureness predicates", 60, pureness),
        ("alpha bimorphism and anchor", 120, bimorphism),
        ("ceiling bound and oracle equivalence", 120, alpha_oracle_equivalence),
        ("extension criterion", 60, z_extension),
        ("rational variant", 30, rational_variant),
        ("soft variant", 30, soft_variant),
        ("permanence lemma suite", 120, permanence),
        ("cli contract", 60, cli_contract),
    ];
    let mut failures = vec![];
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let status = match (&out, elapsed <= Duration::from_secs(limit)) {
            (Ok(_), true) => "PASS",
            _ => "FAIL",
        };
        let note = match &out {
            Ok(s) => s.clone(),
            Err(e) => e.clone(),
        };
        println!("criterion {:>2} {status} {name} ({:.1}s, limit {limit}s): {note}", i + 1, elapsed.as_secs_f64());
        if status == "FAIL" {
            failures.push(i + 1);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
