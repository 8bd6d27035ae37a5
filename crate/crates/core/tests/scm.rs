use std::collections::BTreeSet;

use causa::corpus::fixture;
use causa::scm::*;
use causa::{dsl, CausalFormula};
use proptest::prelude::*;

fn load(file: &str) -> (CausalModel, Context) {
    let doc = dsl::parse(fixture(file).unwrap()).unwrap();
    let ctx = doc.contexts[0].context.clone();
    (doc.model, ctx)
}

fn id(m: &CausalModel, name: &str) -> VarId {
    m.lookup(name).unwrap()
}

fn names(m: &CausalModel, set: &BTreeSet<VarId>) -> BTreeSet<String> {
    set.iter().map(|v| m.name(*v).to_string()).collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn value(m: &CausalModel, w: &World, name: &str) -> String {
    let v = id(m, name);
    m.label(v, w.get(v)).to_string()
}

#[test]
fn late_preemption_order_respects_parents() {
    let (m, _) = load("lp.scm");
    let order: Vec<&str> = check_recursive(&m).iter().map(|v| m.name(*v)).collect();
    assert_eq!(order, ["ST", "BT", "SH", "BH", "BS"]);
}

#[test]
fn two_cycle_is_rejected() {
    let err = CausalModel::builder().bool("X").bool("Y").equation("X", Expr::atom("Y")).equation("Y", Expr::atom("X")).build().unwrap_err();
    match err {
        ModelError::CyclicModel(cycle) => {
            let got: BTreeSet<String> = cycle.into_iter().collect();
            assert!(got.contains("X") && got.contains("Y"));
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn single_root_equation() {
    let m = CausalModel::builder().root("Y").build().unwrap();
    let order: Vec<&str> = check_recursive(&m).iter().map(|v| m.name(*v)).collect();
    assert_eq!(order, ["Y"]);
    assert!(ancestors(&m, id(&m, "Y")).unwrap().is_empty());
}

#[test]
fn parents_are_genuine_dependencies() {
    let (m, _) = load("lp.scm");
    assert_eq!(names(&m, &parents(&m, id(&m, "BH")).unwrap()), set(&["BT", "SH"]));
    assert_eq!(names(&m, &ancestors(&m, id(&m, "BS")).unwrap()), set(&["BH", "SH", "BT", "ST"]));
    assert_eq!(names(&m, &descendants(&m, id(&m, "ST")).unwrap()), set(&["SH", "BH", "BS"]));

    let (t, _) = load("trumping.scm");
    assert_eq!(names(&t, &parents(&t, id(&t, "C")).unwrap()), set(&["M", "S"]));

    let taut = CausalModel::builder()
        .root("X")
        .bool("Y")
        .equation("Y", Expr::or([Expr::atom("X"), Expr::not(Expr::atom("X"))]))
        .build()
        .unwrap();
    assert!(parents(&taut, id(&taut, "Y")).unwrap().is_empty());
}

#[test]
fn graph_queries_reject_exogenous_variables() {
    let (m, _) = load("lp.scm");
    assert!(matches!(parents(&m, id(&m, "U_ST")), Err(ModelError::NotEndogenous(_))));
}

#[test]
fn solutions_of_the_examples() {
    let (m, u) = load("switch.scm");
    let w = m.solve(&u);
    assert_eq!([value(&m, &w, "F"), value(&m, &w, "T"), value(&m, &w, "A")], ["1", "1", "1"]);

    let (m, u) = load("lp.scm");
    let w = m.solve(&u);
    assert_eq!([value(&m, &w, "SH"), value(&m, &w, "BH"), value(&m, &w, "BS")], ["1", "0", "1"]);

    let (m, u) = load("voting.scm");
    assert_eq!(value(&m, &m.solve(&u), "O"), "1");
}

#[test]
fn interventions() {
    let (m, u) = load("lp.scm");
    let sub = m.intervene(&m.setting([("SH", "0")]).unwrap()).unwrap();
    let w = sub.solve(&u);
    assert_eq!([value(&sub, &w, "BH"), value(&sub, &w, "BS")], ["1", "1"]);
    // Same answer without building the submodel.
    assert_eq!(m.solve_with(&u, &m.setting([("SH", "0")]).unwrap()), w);

    let (m, u) = load("switch.scm");
    let w = m.solve_with(&u, &m.setting([("T", "2")]).unwrap());
    assert_eq!(value(&m, &w, "A"), "0");
}

#[test]
fn empty_intervention_is_the_identity() {
    for file in ["lp.scm", "storm.scm", "voting.scm", "counter.scm"] {
        let (m, _) = load(file);
        for u in Context::all(&m) {
            assert_eq!(m.solve(&u), m.solve_with(&u, &PartialSetting::empty()));
            assert_eq!(m.intervene(&PartialSetting::empty()).unwrap().solve(&u), m.solve(&u));
        }
    }
}

#[test]
fn causal_formulas() {
    let (m, u) = load("lp.scm");
    let bs1 = CausalFormula::atom(id(&m, "BS"), 1);
    let st0 = m.setting([("ST", "0")]).unwrap();
    assert!(holds(&m, &u, &CausalFormula::under(st0, bs1.clone())).unwrap());
    let none = m.setting([("ST", "0"), ("BT", "0")]).unwrap();
    assert!(!holds(&m, &u, &CausalFormula::under(none, bs1)).unwrap());

    let (t, u) = load("trumping.scm");
    let f = CausalFormula::under(t.setting([("S", "0")]).unwrap(), CausalFormula::atom(id(&t, "C"), 1));
    assert!(holds(&t, &u, &f).unwrap());
}

#[test]
fn contexts_must_be_complete() {
    let (m, _) = load("lp.scm");
    assert!(matches!(m.context([("U_ST", "1")]), Err(ModelError::IncompleteContext(_))));
    assert!(matches!(m.context([("U_ST", "1"), ("U_BT", "7")]), Err(ModelError::ValueOutOfRange { .. })));
}

fn rendered(m: &CausalModel) -> Vec<String> {
    m.equations().iter().map(|e| format!("{} := {}", m.name(e.target), e.body)).collect()
}

#[test]
fn normalization_routes_exogenous_uses_through_a_fresh_variable() {
    let m = CausalModel::builder()
        .exo("U", ["0", "1"])
        .root("X")
        .bool("Y")
        .equation("Y", Expr::or([Expr::atom("X"), Expr::atom("U")]))
        .build()
        .unwrap();
    assert!(!is_normalized(&m));
    assert!(matches!(root_variables(&m), Err(ModelError::NotNormalized(_))));
    let n = normalize_exogenous(&m);
    assert!(is_normalized(&n));
    assert_eq!(rendered(&n), ["X := U_X", "Y := X | V_U", "V_U := U"]);
    assert_eq!(names(&n, &root_variables(&n).unwrap()), set(&["X", "V_U"]));
}

#[test]
fn normalizing_twice_changes_nothing() {
    let (m, _) = load("lp.scm");
    assert!(is_normalized(&m));
    assert_eq!(normalize_exogenous(&m), m);
    assert_eq!(names(&m, &root_variables(&m).unwrap()), set(&["ST", "BT"]));
}

#[test]
fn shared_exogenous_uses_share_one_variable() {
    let m = CausalModel::builder()
        .exo("U", ["0", "1"])
        .root("X")
        .bool("Y")
        .bool("Z")
        .equation("Y", Expr::and([Expr::atom("X"), Expr::atom("U")]))
        .equation("Z", Expr::or([Expr::atom("X"), Expr::atom("U")]))
        .build()
        .unwrap();
    let n = normalize_exogenous(&m);
    assert_eq!(n.endogenous().count(), m.endogenous().count() + 1);
    for u in Context::all(&m) {
        let nu = Context::new(&n, u.iter()).unwrap();
        let (a, b) = (m.solve(&u), n.solve(&nu));
        for v in m.endogenous() {
            assert_eq!(a.get(v), b.get(n.lookup(m.name(v)).unwrap()));
        }
    }
}

#[test]
fn model_without_root_form_is_not_normalized() {
    let m = CausalModel::builder().exo("U", ["0", "1"]).bool("Y").equation("Y", Expr::not(Expr::atom("U"))).build().unwrap();
    assert!(matches!(root_variables(&m), Err(ModelError::NotNormalized(_))));
}

/// Random recursive boolean models: roots, then gates over earlier
/// variables, with some equations reading exogenous variables directly.
fn arb_model() -> impl Strategy<Value = CausalModel> {
    (1usize..=3, prop::collection::vec((0usize..6, any::<u64>(), any::<bool>()), 1..5)).prop_map(|(roots, gates)| {
        let mut b = CausalModel::builder();
        let mut names: Vec<String> = Vec::new();
        for i in 0..roots {
            let n = format!("R{i}");
            b = b.root(&n);
            names.push(n);
        }
        for (j, (kind, pick, raw_u)) in gates.into_iter().enumerate() {
            let a = names[(pick as usize) % names.len()].clone();
            let c = names[((pick >> 8) as usize) % names.len()].clone();
            let a = if raw_u { format!("U_{}", names[0]) } else { a };
            let body = match kind {
                0 => Expr::and([Expr::atom(&a), Expr::atom(&c)]),
                1 => Expr::or([Expr::atom(&a), Expr::atom(&c)]),
                2 => Expr::not(Expr::atom(&a)),
                3 => Expr::ne(&a, &c),
                4 => Expr::ite(Expr::atom(&a), Expr::atom(&c), Expr::atom("1")),
                _ => Expr::atom(&a),
            };
            let n = format!("G{j}");
            b = b.bool(&n).equation(&n, body);
            names.push(n);
        }
        b.build().unwrap()
    })
}

fn arb_setting(m: &CausalModel, bits: u64) -> PartialSetting {
    PartialSetting::new(m.endogenous().enumerate().filter(|(i, _)| bits >> (2 * i) & 1 == 1).map(|(i, v)| (v, (bits >> (2 * i + 1) & 1) as Value))).unwrap()
}

proptest! {
    #[test]
    fn solutions_satisfy_interventions_and_equations(m in arb_model(), bits in any::<u64>()) {
        let iv = arb_setting(&m, bits);
        let sub = m.intervene(&iv).unwrap();
        for u in Context::all(&m) {
            let w = m.solve_with(&u, &iv);
            prop_assert!(w.satisfies(&m, &iv));
            prop_assert_eq!(&w, &sub.solve(&u));
            // Re-solving with every endogenous value fixed reproduces the world.
            let all = w.project(m.endogenous());
            prop_assert_eq!(&m.solve_with(&u, &all), &w);
        }
    }

    #[test]
    fn normalization_preserves_solutions(m in arb_model()) {
        let n = normalize_exogenous(&m);
        prop_assert!(is_normalized(&n));
        prop_assert!(root_variables(&n).is_ok());
        for u in Context::all(&m) {
            let nu = Context::new(&n, u.iter()).unwrap();
            let (a, b) = (m.solve(&u), n.solve(&nu));
            for v in m.endogenous() {
                prop_assert_eq!(a.get(v), b.get(n.lookup(m.name(v)).unwrap()));
            }
        }
    }

    #[test]
    fn topological_order_puts_parents_first(m in arb_model()) {
        let order = check_recursive(&m);
        for (i, v) in order.iter().enumerate() {
            for p in parents(&m, *v).unwrap() {
                prop_assert!(order[..i].contains(&p));
            }
        }
    }
}
