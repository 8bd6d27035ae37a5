use causa::causation::{Analyzer, DefinitionId as D, Effect, Mutation, Options};
use causa::corpus::fixture;
use causa::dsl;
use causa::scm::PartialSetting;
use causa::verify::{self, enumerate_models, minimize_counterexample, minimize_with, Claim, Group, Limits, Mode, ModelFamily, Query, TableModel, TableVar, VerifyConfig};

fn tv(range: u8, parents: &[usize], table: &[u8]) -> TableVar {
    TableVar { range, parents: parents.to_vec(), table: table.to_vec() }
}

fn holds(tm: &TableModel, ctx: &[u8], q: &Query, d: D) -> bool {
    let m = tm.to_model();
    let ids = tm.ids(&m);
    let an = Analyzer::new(&m, &tm.context(&m, ctx)).unwrap();
    let x = PartialSetting::new(q.cause.iter().map(|&(g, v)| (ids[g], v))).unwrap();
    an.holds(d, &x, &Effect::atom(ids[q.effect.0], q.effect.1)).unwrap()
}

fn small_config() -> VerifyConfig {
    let exhaustive = ModelFamily { roots: 1..=1, non_roots: 1..=2, ..ModelFamily::exhaustive_default() };
    let sampled = ModelFamily { total: 4..=4, mode: Mode::Sampled { count: 200, seed: 7, ranges: vec![2, 3] }, ..ModelFamily::sampled_default(7) };
    VerifyConfig { families: vec![exhaustive, sampled], ..VerifyConfig::standard(7) }
}

#[test]
fn inflated_ex2_shrinks_back_to_its_core() {
    // R1 = A, V1 = X := A, V2 = Y := X & A, plus an unrelated root R2 and a
    // variable copying it.
    let tm = TableModel { roots: vec![2, 2], vars: vec![tv(2, &[0], &[0, 1]), tv(2, &[0, 2], &[0, 0, 0, 1]), tv(2, &[1], &[0, 1])] };
    let q = Query { cause: vec![(2, 1)], effect: (3, 1) };
    let separates = |tm: &TableModel, ctx: &[u8], q: &Query| holds(tm, ctx, q, D::Def4) && !holds(tm, ctx, q, D::Def10);
    assert!(separates(&tm, &[1, 1], &q));
    let (small, ctx, q2) = minimize_with(&tm, &[1, 1], &q, separates);
    assert!(separates(&small, &ctx, &q2));
    // A is fixed at its actual value, leaving X := 1 and Y := X: two
    // variables still separate the definitions.
    let core = TableModel { roots: vec![], vars: vec![tv(2, &[], &[1]), tv(2, &[0], &[0, 1])] };
    assert_eq!(small, core);
    assert!(ctx.is_empty());
    assert_eq!(q2, Query { cause: vec![(0, 1)], effect: (1, 1) });
    // The shipped fixture separates them the same way.
    let doc = dsl::parse(fixture("ex2.scm").unwrap()).unwrap();
    let an = Analyzer::new(&doc.model, &doc.contexts[0].context).unwrap();
    let (x, y) = (dsl::parse_setting(&doc.model, "X=1").unwrap(), dsl::parse_effect(&doc.model, "Y=1").unwrap());
    assert!(an.holds(D::Def4, &x, &y).unwrap() && !an.holds(D::Def10, &x, &y).unwrap());
}

#[test]
fn minimal_examples_stay_put() {
    // ex4: X → A → Y, dependence without a Def3 cause. Nothing can go.
    let tm = TableModel { roots: vec![2], vars: vec![tv(2, &[0], &[0, 1]), tv(2, &[1], &[0, 1])] };
    let q = Query { cause: vec![(0, 1)], effect: (2, 1) };
    let keep = |tm: &TableModel, ctx: &[u8], q: &Query| tm.len() == 3 && !holds(tm, ctx, q, D::Def3) && holds(tm, ctx, q, D::Def2);
    assert!(keep(&tm, &[1], &q));
    assert_eq!(minimize_with(&tm, &[1], &q, keep), (tm.clone(), vec![1], q.clone()));
}

#[test]
fn a_mutated_engine_is_caught_and_the_example_shrinks() {
    let family = ModelFamily { total: 5..=5, mode: Mode::Sampled { count: 60, seed: 3, ranges: vec![2] }, ..ModelFamily::sampled_default(3) };
    let config = VerifyConfig {
        families: vec![family],
        claims: vec![Claim::MinimalSingleton],
        options: Options { mutation: Some(Mutation::SkipMinimality(D::Def8)), ..Options::default() },
        ..VerifyConfig::standard(3)
    };
    let report = verify::run(&config).unwrap();
    assert!(!report.ok());
    let v = report.violations().max_by_key(|v| v.model.len()).unwrap().clone();
    assert_eq!(v.model.len(), 5);
    let small = minimize_counterexample(&v, config.options);
    assert!(small.model.len() < v.model.len(), "{}", small.to_source());
    assert_eq!(small.claim, Claim::MinimalSingleton);
    // The shrunk example is a valid document that still exhibits the failure.
    let src = small.to_source();
    let doc = dsl::parse(&src).unwrap();
    assert_eq!(doc.model.endogenous().count(), small.model.len());
}

#[test]
fn reports_are_deterministic() {
    let config = small_config();
    let a = serde_json::to_string(&verify::run(&config).unwrap()).unwrap();
    let b = serde_json::to_string(&verify::run(&config).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reports_do_not_depend_on_the_thread_count() {
    let mut config = small_config();
    config.options = Options { mutation: Some(Mutation::SkipNecessity(D::Def2)), ..Options::default() };
    let run_on = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&verify::run(&config).unwrap()).unwrap())
    };
    assert_eq!(run_on(1), run_on(2));
}

#[test]
fn families_without_variables_are_empty() {
    let none = ModelFamily { roots: 0..=0, non_roots: 0..=0, ..ModelFamily::exhaustive_default() };
    assert_eq!(none.len().unwrap(), 0);
    assert_eq!(enumerate_models(&none).unwrap().count(), 0);
    let config = VerifyConfig { families: vec![none], ..VerifyConfig::standard(0) }.with_groups(&[Group::Equivalence]);
    let report = verify::run(&config).unwrap();
    assert_eq!(report.models, 0);
    assert!(report.claims.iter().all(|c| c.instances == 0));
}

#[test]
fn oversized_families_are_refused() {
    let big = ModelFamily { roots: 1..=3, non_roots: 1..=4, max_parents: 3, cap: 1000, ..ModelFamily::exhaustive_default() };
    assert!(matches!(big.len(), Err(verify::VerifyError::FamilyTooLarge { .. })));
}

#[test]
fn the_default_family_has_the_expected_size() {
    assert_eq!(ModelFamily::exhaustive_default().len().unwrap(), 45_684);
    let a: Vec<TableModel> = ModelFamily::sampled_default(1).iter().unwrap().take(20).collect();
    let b: Vec<TableModel> = ModelFamily::sampled_default(1).iter().unwrap().take(20).collect();
    assert_eq!(a, b);
    assert!(a.iter().all(|tm| (4..=5).contains(&tm.len())));
}

#[test]
fn equivalences_on_a_small_family() {
    let report = verify::check_equivalences(&small_config()).unwrap();
    assert!(report.ok(), "{report}");
    assert!(report.claims.iter().all(|c| c.instances > 0));
}

#[test]
fn equivalent_pairs_agree_on_the_examples() {
    let storm = dsl::parse(fixture("storm.scm").unwrap()).unwrap();
    let an = Analyzer::new(&storm.model, &storm.contexts[0].context).unwrap();
    for (x, y) in [("AS=1", "F=2"), ("ES=(1,1)", "F=2"), ("AS=1 & ES=(1,1)", "F=2")] {
        let (x, y) = (dsl::parse_setting(&storm.model, x).unwrap(), dsl::parse_effect(&storm.model, y).unwrap());
        assert_eq!(an.holds(D::Def2, &x, &y).unwrap(), an.holds(D::Def5, &x, &y).unwrap());
    }
    let t = dsl::parse(fixture("trumping.scm").unwrap()).unwrap();
    let an = Analyzer::new(&t.model, &t.contexts[0].context).unwrap();
    for x in ["S=1", "M=1"] {
        let (x, y) = (dsl::parse_setting(&t.model, x).unwrap(), dsl::parse_effect(&t.model, "C=1").unwrap());
        assert_eq!(an.holds(D::Def3, &x, &y).unwrap(), an.holds(D::Def12, &x, &y).unwrap());
        assert_eq!(an.holds(D::Def3, &x, &y).unwrap(), an.holds(D::Def6, &x, &y).unwrap());
    }
}

#[test]
fn unlimited_limits_cover_more() {
    let mut config = small_config().with_groups(&[Group::Evidence]);
    let a = verify::run(&config).unwrap();
    config.limits = Limits { reference_vars: 4, ..Limits::default() };
    let b = verify::run(&config).unwrap();
    assert!(a.ok() && b.ok());
    let inst = |r: &verify::VerifyReport| r.claim(Claim::Reference).unwrap().instances;
    assert!(inst(&b) > inst(&a));
}
