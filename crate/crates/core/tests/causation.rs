use causa::causation::{self, reference, Analyzer, CausationError, DefinitionId as D, Effect, Mutation, Necessity, Options};
use causa::corpus::fixture;
use causa::dsl::{self, ModelDocument};
use causa::scm::*;
use causa::sufficiency::SufficiencyKind;
use proptest::prelude::*;

fn load(file: &str) -> ModelDocument {
    dsl::parse(fixture(file).unwrap()).unwrap()
}

fn analyzer(doc: &ModelDocument) -> Analyzer {
    Analyzer::new(&doc.model, &doc.contexts[0].context).unwrap()
}

fn x(doc: &ModelDocument, src: &str) -> PartialSetting {
    dsl::parse_setting(&doc.model, src).unwrap()
}

fn y(doc: &ModelDocument, src: &str) -> Effect {
    dsl::parse_effect(&doc.model, src).unwrap()
}

fn shown(doc: &ModelDocument, s: &PartialSetting) -> String {
    s.display(&doc.model).to_string()
}

#[test]
fn ac1() {
    let lp = load("lp.scm");
    let an = analyzer(&lp);
    assert!(an.ac1(&x(&lp, "ST=1"), &y(&lp, "BS=1")).unwrap());
    assert!(!an.ac1(&x(&lp, "BT=0"), &y(&lp, "BS=1")).unwrap());
    let st = load("storm.scm");
    assert!(analyzer(&st).ac1(&x(&st, "AS=1"), &y(&st, "F=1 | F=2")).unwrap());
    assert!(causation::ac1(&lp.model, &lp.contexts[0].context, &x(&lp, "ST=1"), &y(&lp, "BS=1")).unwrap());
}

#[test]
fn trumping_under_def2() {
    let t = load("trumping.scm");
    let an = analyzer(&t);
    assert!(an.ac2(D::Def2, &x(&t, "S=1"), &y(&t, "C=1")).unwrap().is_none());
    assert!(!an.holds(D::Def2, &x(&t, "S=1"), &y(&t, "C=1")).unwrap());
    assert!(an.holds(D::Def2, &x(&t, "M=1"), &y(&t, "C=1")).unwrap());
}

#[test]
fn the_counter_gadget_needs_no_dependence() {
    let c = load("counter.scm");
    let an = analyzer(&c);
    let v = an.is_cause(D::Def2, &x(&c, "X=1"), &y(&c, "Y=1")).unwrap();
    assert!(v.is_cause && v.ac1);
    let ev = v.evidence.unwrap();
    assert_eq!(shown(&c, &ev.witness), "A=1");
    assert_eq!(shown(&c, ev.contrast.as_ref().unwrap()), "X=0");
    for d in [D::Def3, D::Def4, D::Def10, D::OriginalHP, D::UpdatedHP, D::ModifiedHP] {
        assert!(!an.holds(d, &x(&c, "X=1"), &y(&c, "Y=1")).unwrap(), "{d}");
    }
}

#[test]
fn switch_under_def8() {
    let s = load("switch.scm");
    let an = analyzer(&s);
    let v = an.is_cause(D::Def8, &x(&s, "F=1"), &y(&s, "A=1")).unwrap();
    assert!(v.is_cause);
    let ev = v.evidence.unwrap();
    assert!(ev.contrast.is_none(), "minimal necessity has no contrast");
    assert!(reference::verify_evidence(an.model(), an.context(), D::Def8, &x(&s, "F=1"), &y(&s, "A=1"), &ev).unwrap());
    assert!(!an.holds(D::Def2, &x(&s, "F=1"), &y(&s, "A=1")).unwrap());
}

#[test]
fn original_hp_accepts_the_loader_in_every_prisoner_variant() {
    for file in ["prisoner.scm", "prisoner_d1.scm", "prisoner_a_is_d.scm", "prisoner_a_not_d.scm", "prisoner_d_is_a.scm", "prisoner_d_not_a.scm"] {
        let p = load(file);
        let an = analyzer(&p);
        let v = an.is_cause(D::OriginalHP, &x(&p, "X=1"), &y(&p, "Y=1")).unwrap();
        assert!(v.is_cause, "{file}");
        assert!(reference::verify_evidence(an.model(), an.context(), D::OriginalHP, &x(&p, "X=1"), &y(&p, "Y=1"), v.evidence.as_ref().unwrap()).unwrap());
    }
    let p = load("prisoner.scm");
    let v = analyzer(&p).is_cause(D::OriginalHP, &x(&p, "X=1"), &y(&p, "Y=1")).unwrap();
    assert_eq!(shown(&p, &v.evidence.unwrap().witness), "A=0, D=1");
    assert!(!analyzer(&p).holds(D::UpdatedHP, &x(&p, "X=1"), &y(&p, "Y=1")).unwrap());
}

#[test]
fn modified_hp_rejects_an_overdetermining_copy() {
    let o = load("overdetermination.scm");
    let an = analyzer(&o);
    assert!(!an.holds(D::ModifiedHP, &x(&o, "X=1"), &y(&o, "Y=1")).unwrap());
    // Direct contrastive sufficiency coincides with the modified definition.
    assert!(!an.holds(D::Def1, &x(&o, "X=1"), &y(&o, "Y=1")).unwrap());
    for d in D::ALL.into_iter().filter(|d| ![D::ModifiedHP, D::Def1, D::Def7].contains(d)) {
        assert!(an.holds(d, &x(&o, "X=1"), &y(&o, "Y=1")).unwrap(), "{d}");
    }
}

#[test]
fn voting_causes() {
    let v = load("voting.scm");
    let an = analyzer(&v);
    assert!(an.holds(D::Def2, &x(&v, "A1=1"), &y(&v, "O=1")).unwrap());
    for voter in ["A1", "A2", "A3", "A4", "A5"] {
        let id = v.model.lookup(voter).unwrap();
        let actual = an.actual_world().get(id);
        assert!(an.part_of_holds(D::ModifiedHP, (id, actual), &y(&v, "O=1")).unwrap(), "{voter}");
    }
}

#[test]
fn voting_dissenters_follow_the_literal_definition() {
    // The engine and the literal implementation agree on every voter, and
    // positive verdicts carry evidence that re-verifies.
    let v = load("voting.scm");
    let an = analyzer(&v);
    for c in ["A1=1", "A2=1", "A3=0", "A4=0", "A5=0"] {
        let (xs, ys) = (x(&v, c), y(&v, "O=1"));
        let verdict = an.is_cause(D::Def2, &xs, &ys).unwrap();
        assert_eq!(verdict.is_cause, reference::is_cause(an.model(), an.context(), D::Def2, &xs, &ys).unwrap(), "{c}");
        if let Some(ev) = &verdict.evidence {
            assert!(reference::verify_evidence(an.model(), an.context(), D::Def2, &xs, &ys, ev).unwrap());
        }
    }
}

#[test]
fn late_preemption() {
    let lp = load("lp.scm");
    let an = analyzer(&lp);
    assert!(an.holds(D::Def4, &x(&lp, "BT=1"), &y(&lp, "BS=1")).unwrap());
    let v = an.is_cause(D::Def2, &x(&lp, "ST=1"), &y(&lp, "BS=1")).unwrap();
    assert!(v.is_cause);
    let net = v.evidence.unwrap().network.unwrap().values;
    assert!(net.contains(lp.model.lookup("SH").unwrap()));
    assert!(!an.dependence_holds(&x(&lp, "ST=1"), &y(&lp, "BS=1")).unwrap());
    let causes: Vec<String> = an.find_all_causes(D::Def2, &y(&lp, "BS=1"), 1).unwrap().iter().map(|v| shown(&lp, &v.cause)).collect();
    assert!(causes.contains(&"ST=1".to_string()));
    assert!(!causes.contains(&"BT=1".to_string()));
}

#[test]
fn part_of_a_cause() {
    let ex1 = load("ex1.scm");
    let an = analyzer(&ex1);
    let xid = ex1.model.lookup("X").unwrap();
    let v = an.is_part_of_cause(D::ModifiedHP, (xid, 1), &y(&ex1, "Y=1"), None).unwrap();
    assert!(v.is_cause);
    assert_eq!(shown(&ex1, v.containing_cause.as_ref().unwrap()), "X=1, D=1");

    let p = load("prisoner_a_not_d.scm");
    let an = analyzer(&p);
    let v = an.is_part_of_cause(D::ModifiedHP, (p.model.lookup("X").unwrap(), 1), &y(&p, "Y=1"), None).unwrap();
    assert!(v.is_cause);
    assert_eq!(shown(&p, v.containing_cause.as_ref().unwrap()), "X=1, D=0");
}

#[test]
fn part_of_equals_cause_under_minimal_necessity() {
    for file in ["lp.scm", "ex1.scm", "voting.scm", "switch.scm", "counter.scm"] {
        let doc = load(file);
        let an = analyzer(&doc);
        let w = an.actual_world();
        for yv in doc.model.endogenous() {
            let eff = Effect::atom(yv, w.get(yv));
            for xv in doc.model.endogenous().filter(|v| *v != yv) {
                let xs = PartialSetting::single(xv, w.get(xv));
                for d in [D::Def7, D::Def8, D::Def9, D::Def10, D::Def11, D::Def12] {
                    assert_eq!(an.part_of_holds(d, (xv, w.get(xv)), &eff).unwrap(), an.holds(d, &xs, &eff).unwrap(), "{file} {d}");
                }
            }
        }
    }
}

#[test]
fn constant_effects_have_no_causes() {
    let m = CausalModel::builder().root("X").bool("Y").equation("Y", Expr::atom("1")).build().unwrap();
    let u = m.context([("U_X", "1")]).unwrap();
    let an = Analyzer::new(&m, &u).unwrap();
    let eff = Effect::atom(m.lookup("Y").unwrap(), 1);
    for d in D::ALL {
        assert!(an.find_all_causes(d, &eff, 3).unwrap().is_empty(), "{d}");
    }
}

#[test]
fn dependence_without_causation() {
    let ex2 = load("ex2.scm");
    let an = analyzer(&ex2);
    assert!(an.dependence_holds(&x(&ex2, "X=1"), &y(&ex2, "Y=1")).unwrap());
    assert!(!an.holds(D::Def10, &x(&ex2, "X=1"), &y(&ex2, "Y=1")).unwrap());

    let ex4 = load("ex4.scm");
    let an = analyzer(&ex4);
    assert!(an.dependence_holds(&x(&ex4, "X=1"), &y(&ex4, "Y=1")).unwrap());
    assert!(!an.holds(D::Def3, &x(&ex4, "X=1"), &y(&ex4, "Y=1")).unwrap());
}

#[test]
fn free_functions_match_the_analyzer() {
    let lp = load("lp.scm");
    let (m, u) = (&lp.model, &lp.contexts[0].context);
    let (xs, ys) = (x(&lp, "ST=1"), y(&lp, "BS=1"));
    let an = analyzer(&lp);
    assert_eq!(causation::ac2_general(m, u, &xs, &ys, SufficiencyKind::ActualStrong, Necessity::Contrastive).unwrap(), an.ac2(D::Def2, &xs, &ys).unwrap());
    assert_eq!(causation::ac2_original_hp(m, u, &xs, &ys).unwrap(), an.ac2(D::OriginalHP, &xs, &ys).unwrap());
    assert_eq!(causation::ac2_updated_hp(m, u, &xs, &ys).unwrap(), an.ac2(D::UpdatedHP, &xs, &ys).unwrap());
    assert_eq!(causation::ac2_modified_hp(m, u, &xs, &ys).unwrap(), an.ac2(D::ModifiedHP, &xs, &ys).unwrap());
    assert_eq!(causation::ac2c_strong(m, u, &xs, &ys).unwrap(), an.ac2(D::StrongHP, &xs, &ys).unwrap());
    assert_eq!(causation::is_cause(m, u, D::Def4, &xs, &ys).unwrap(), an.is_cause(D::Def4, &xs, &ys).unwrap());
    assert_eq!(causation::dependence_holds(m, u, &xs, &ys).unwrap(), an.dependence_holds(&xs, &ys).unwrap());
    assert_eq!(causation::find_all_causes(m, u, &ys, D::Def8, 2).unwrap(), an.find_all_causes(D::Def8, &ys, 2).unwrap());
    let st = m.lookup("ST").unwrap();
    assert_eq!(causation::is_part_of_cause(m, u, (st, 1), &ys, D::ModifiedHP).unwrap(), an.is_part_of_cause(D::ModifiedHP, (st, 1), &ys, None).unwrap());
}

#[test]
fn bad_queries_are_errors() {
    let lp = load("lp.scm");
    let an = analyzer(&lp);
    assert!(matches!(an.holds(D::Def2, &x(&lp, "BS=1"), &y(&lp, "BS=1")), Err(CausationError::EffectInCause(_))));
    assert!(matches!(an.holds(D::Def2, &PartialSetting::empty(), &y(&lp, "BS=1")), Err(CausationError::EmptyCause)));
}

#[test]
fn strict_mode_refuses_unnormalized_models() {
    let m = CausalModel::builder().exo("U", ["0", "1"]).root("X").bool("Y").equation("Y", Expr::or([Expr::atom("X"), Expr::atom("U")])).build().unwrap();
    let u = m.context([("U", "0"), ("U_X", "1")]).unwrap();
    let strict = Options { strict: true, ..Options::default() };
    assert_eq!(Analyzer::with_options(&m, &u, strict).err(), Some(CausationError::NotNormalized));
    // Otherwise the model is normalized first; verdicts refer to the same names.
    let an = Analyzer::new(&m, &u).unwrap();
    assert!(is_normalized(an.model()));
    let xs = PartialSetting::single(an.model().lookup("X").unwrap(), 1);
    let ys = Effect::atom(an.model().lookup("Y").unwrap(), 1);
    assert!(an.holds(D::Def2, &xs, &ys).unwrap());
}

#[test]
fn verbose_mode_reports_the_alternative_reading() {
    let lp = load("lp.scm");
    let verbose = Options { verbose: true, ..Options::default() };
    let an = Analyzer::with_options(&lp.model, &lp.contexts[0].context, verbose).unwrap();
    let v = an.is_cause(D::Def2, &x(&lp, "ST=1"), &y(&lp, "BS=1")).unwrap();
    assert_eq!(v.alternative_reading, Some(true));
    assert_eq!(analyzer(&lp).is_cause(D::Def2, &x(&lp, "ST=1"), &y(&lp, "BS=1")).unwrap().alternative_reading, None);
}

#[test]
fn mutations_change_verdicts() {
    // Without AC3, the conjunction of a cause and a bystander passes.
    let lp = load("lp.scm");
    let u = &lp.contexts[0].context;
    let (xs, ys) = (x(&lp, "ST=1 & BT=1"), y(&lp, "BS=1"));
    assert!(!analyzer(&lp).holds(D::Def2, &xs, &ys).unwrap());
    let skip = Options { mutation: Some(Mutation::SkipMinimality(D::Def2)), ..Options::default() };
    assert!(Analyzer::with_options(&lp.model, u, skip).unwrap().holds(D::Def2, &xs, &ys).unwrap());

    let t = load("trumping.scm");
    let skip = Options { mutation: Some(Mutation::SkipNecessity(D::Def2)), ..Options::default() };
    assert!(Analyzer::with_options(&t.model, &t.contexts[0].context, skip).unwrap().holds(D::Def2, &x(&t, "S=1"), &y(&t, "C=1")).unwrap());
}

#[test]
fn definition_names_parse_back() {
    for d in D::ALL {
        assert_eq!(d.name().parse::<D>().unwrap(), d);
        if let Some((kind, nec)) = d.general_form() {
            assert_eq!(D::from_general_form(kind, nec), d);
        }
    }
    assert!("Def13".parse::<D>().is_err());
}

fn arb_model() -> impl Strategy<Value = CausalModel> {
    (1usize..=2, prop::collection::vec((0usize..5, any::<u16>(), any::<bool>()), 1..4)).prop_map(|(roots, gates)| {
        let mut b = CausalModel::builder();
        let mut names: Vec<String> = Vec::new();
        for i in 0..roots {
            let n = format!("R{i}");
            b = b.root(&n);
            names.push(n);
        }
        for (j, (kind, pick, raw_u)) in gates.into_iter().enumerate() {
            let a = names[pick as usize % names.len()].clone();
            let c = names[(pick >> 8) as usize % names.len()].clone();
            // Some equations read an exogenous variable directly, so the
            // engine has to normalize.
            let c = if raw_u { "U_R0".to_string() } else { c };
            let body = match kind {
                0 => Expr::and([Expr::atom(&a), Expr::atom(&c)]),
                1 => Expr::or([Expr::atom(&a), Expr::atom(&c)]),
                2 => Expr::not(Expr::atom(&a)),
                3 => Expr::ne(&a, &c),
                _ => Expr::atom(&a),
            };
            let n = format!("G{j}");
            b = b.bool(&n).equation(&n, body);
            names.push(n);
        }
        b.build().unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The packed engine agrees with the literal implementation, and every
    /// positive verdict's evidence re-verifies.
    #[test]
    fn engine_matches_the_literal_definitions(m in arb_model(), ctx_bits in any::<u8>()) {
        let u = Context::new(&m, m.exogenous().enumerate().map(|(i, v)| (v, (ctx_bits >> i & 1) as Value))).unwrap();
        let an = Analyzer::new(&m, &u).unwrap();
        let nm = an.model();
        let w = an.actual_world();
        let vars: Vec<VarId> = nm.endogenous().collect();
        for &yv in &vars {
            let eff = Effect::atom(yv, w.get(yv));
            for &xv in vars.iter().filter(|v| **v != yv) {
                let xs = PartialSetting::single(xv, w.get(xv));
                for d in D::ALL {
                    let v = an.is_cause(d, &xs, &eff).unwrap();
                    prop_assert_eq!(v.is_cause, reference::is_cause(nm, &u, d, &xs, &eff).unwrap(), "{} {}", d, xs.display(nm));
                    if let Some(ev) = &v.evidence {
                        prop_assert!(reference::verify_evidence(nm, &u, d, &xs, &eff, ev).unwrap());
                    }
                }
            }
        }
    }

    /// AC1 fails whenever the candidate's value is not the actual one.
    #[test]
    fn non_actual_candidates_are_never_causes(m in arb_model()) {
        let u = Context::all(&m).remove(0);
        let an = Analyzer::new(&m, &u).unwrap();
        let nm = an.model();
        let w = an.actual_world();
        for yv in nm.endogenous() {
            let eff = Effect::atom(yv, w.get(yv));
            for xv in nm.endogenous().filter(|v| *v != yv) {
                let xs = PartialSetting::single(xv, 1 - w.get(xv));
                for d in D::ALL {
                    prop_assert!(!an.holds(d, &xs, &eff).unwrap());
                }
            }
        }
    }
}
