use cu_factor::axioms::check_axioms;
use cu_factor::checks::check_generalized_cu_morphism;
use cu_factor::factorization::{mu_sample, MuSpec};
use cu_factor::model::{FinitePoset, ModelKind, SemigroupModel};
use cu_factor::oracle::{brute_graph, brute_morphism_check, builtin_models, catalog_morphisms};

#[test]
fn mu_sets_shrink_as_the_lower_bound_grows() {
    for s in builtin_models() {
        let g = s.grid(3);
        let mut checked = 0;
        for x in &g {
            let below: Vec<_> = g.iter().filter(|y| s.le(y, x)).collect();
            for xp in &below {
                for xpp in below.iter().filter(|y| s.le(xp, y)) {
                    for k in 1..=3 {
                        for n in 1..=3 {
                            let inner = mu_sample(&s, &MuSpec::new(k, n, (*xpp).clone(), x.clone()), 3);
                            let middle = mu_sample(&s, &MuSpec::new(k, n, (*xp).clone(), x.clone()), 3);
                            let outer = mu_sample(&s, &MuSpec::new(k, n, s.zero(), x.clone()), 3);
                            assert!(inner.iter().all(|y| middle.contains(y)), "{}: {xp} ≤ {xpp} ≤ {x}", s.name);
                            assert!(middle.iter().all(|y| outer.contains(y)), "{}: {xp} ≤ {x}", s.name);
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 0, "{}", s.name);
    }
}

#[test]
fn products_and_function_models_satisfy_the_axioms() {
    let z = SemigroupModel::z();
    let models = [
        SemigroupModel::product(vec![z.clone(), SemigroupModel::nbar()]),
        SemigroupModel::product(vec![SemigroupModel::half_line(), SemigroupModel::t4()]),
        SemigroupModel::new("V", ModelKind::Lsc(FinitePoset::new(3, vec![(0, 1), (0, 2)]).unwrap())),
    ];
    for s in &models {
        let r = check_axioms(s, 2);
        assert!(r.passed(), "{}", r.to_text());
    }
}

#[test]
fn catalog_maps_agree_with_their_tabulated_graphs() {
    for f in catalog_morphisms() {
        let symbolic = check_generalized_cu_morphism(&f, 4);
        let brute = brute_morphism_check(&brute_graph(&f, 4), 4);
        assert_eq!(symbolic.passed(), brute.passed(), "{}: {} / {}", f.name, symbolic.to_text(), brute.to_text());
    }
}
