//! The checked claims and their evaluation on one query.

use std::cell::OnceCell;
use std::fmt;

use serde::Serialize;

use super::family::TableModel;
use crate::causation::{reference, Analyzer, DefinitionId as D, Effect, Options};
use crate::scm::{CausalModel, Context, PartialSetting, Value, VarId};
use crate::sufficiency::{self, subsets_by_size, SufficiencyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Group {
    Equivalence,
    Implication,
    Structural,
    Sufficiency,
    Evidence,
}

macro_rules! claims {
    ($($name:ident => ($group:ident, $id:literal, $text:literal),)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub enum Claim { $($name,)* }

        impl Claim {
            pub const ALL: &'static [Claim] = &[$(Claim::$name,)*];

            pub fn id(self) -> &'static str {
                match self { $(Claim::$name => $id,)* }
            }

            pub fn text(self) -> &'static str {
                match self { $(Claim::$name => $text,)* }
            }

            pub fn group(self) -> Group {
                match self { $(Claim::$name => Group::$group,)* }
            }
        }
    };
}

claims! {
    ModifiedIffDef1 => (Equivalence, "equiv-modified-def1", "Modified HP iff Def1"),
    Def2IffDef5 => (Equivalence, "equiv-def2-def5", "Def2 iff Def5"),
    Def8IffDef11 => (Equivalence, "equiv-def8-def11", "Def8 iff Def11"),
    Def3Group => (Equivalence, "equiv-def3-def6-def9-def12", "Def3 iff Def6 iff Def9 iff Def12"),
    PartModifiedUpdated => (Implication, "impl-part-modified-updated", "X=x part of a Modified HP cause => X=x is an Updated HP cause"),
    PartUpdatedOriginal => (Implication, "impl-part-updated-original", "X=x part of an Updated HP cause => X=x is an Original HP cause"),
    Def3Def2 => (Implication, "impl-def3-def2", "Def3 => Def2"),
    PartDef2Def8 => (Implication, "impl-part-def2-def8", "X=x part of a Def2 cause => X=x is a Def8 cause"),
    Def3Original => (Implication, "impl-def3-original", "Def3 => Original HP"),
    Def10Def4 => (Implication, "impl-def10-def4", "Def10 => Def4"),
    Def7Never => (Structural, "def7-never", "Def7 never holds"),
    MinimalSingleton => (Structural, "minimal-singleton", "causes under minimal necessity (Def7-Def12) are singletons"),
    Def3Parent => (Structural, "def3-parent", "Def3 causes are single parents of the effect"),
    Dependence => (Structural, "dependence", "dependence on X=x => X=x is a cause (all but Def3, Def6, Def9, Def12, Def10, Def7)"),
    ParentShortcut => (Structural, "parent-shortcut", "X only a parent of Y => Def2, Def3 and Def8 agree on X=x"),
    ModifiedSingleton => (Structural, "modified-singleton", "singleton Modified HP cause => Def2, Def4 and Def8 cause"),
    RestrictNetworks => (Structural, "restrict-networks", "non-root networks leave every general-form verdict unchanged"),
    StrengthChain => (Sufficiency, "strength-chain", "direct => strong => weak sufficiency (actual and not)"),
    NetworkChain => (Sufficiency, "network-chain", "strongly sufficient iff sufficient along a chain of direct links"),
    Instantiation => (Sufficiency, "instantiation", "the general sufficiency form reproduces weak, strong and direct sufficiency"),
    ActualLemma => (Sufficiency, "actual-vs-nonactual", "outside the roots, actual direct/strong sufficiency equals the non-actual kind"),
    MonotoneC => (Sufficiency, "monotone-c", "growing C never makes a failed sufficiency hold"),
    Evidence => (Evidence, "evidence", "reported witness, network and contrast re-verify independently"),
    Reference => (Evidence, "reference-agreement", "the packed engine and the literal implementation agree"),
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A query on a table model, by global index: `X=x` and `Y=y`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Query {
    pub cause: Vec<(usize, u8)>,
    pub effect: (usize, u8),
}

impl Query {
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.cause.iter().map(|(g, _)| *g).chain([self.effect.0])
    }

    pub fn display(&self, tm: &TableModel) -> String {
        let x: Vec<String> = self.cause.iter().map(|(g, v)| format!("{}={v}", tm.name(*g))).collect();
        format!("{} -> {}={}", x.join(" & "), tm.name(self.effect.0), self.effect.1)
    }
}

/// Size bounds for the more expensive claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Limits {
    /// Causes with up to this many conjuncts are queried.
    pub max_cause: usize,
    /// Sufficiency claims run on models with at most this many endogenous
    /// variables.
    pub sufficiency_vars: usize,
    /// The literal implementation is compared on models up to this size.
    pub reference_vars: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_cause: 2, sufficiency_vars: 4, reference_vars: 3 }
    }
}

/// One model in one context.
pub(crate) struct Env<'a> {
    pub tm: &'a TableModel,
    pub model: CausalModel,
    pub ids: Vec<VarId>,
    pub context: Context,
    pub world: Vec<u8>,
    pub an: Analyzer,
    unrestricted: OnceCell<Analyzer>,
    options: Options,
    pub limits: Limits,
    /// Non-actual sufficiency does not depend on the context; only the
    /// first context checks it.
    pub first_context: bool,
}

pub(crate) type Outcome = Result<(), String>;

impl<'a> Env<'a> {
    pub fn new(tm: &'a TableModel, ctx_values: &[u8], options: Options, limits: Limits, first_context: bool) -> Self {
        let model = tm.to_model();
        let ids = tm.ids(&model);
        let context = tm.context(&model, ctx_values);
        let an = Analyzer::with_options(&model, &context, options).expect("table models fit the engine");
        Env {
            tm,
            world: tm.solve(ctx_values),
            model,
            ids,
            context,
            an,
            unrestricted: OnceCell::new(),
            options,
            limits,
            first_context,
        }
    }

    fn unrestricted(&self) -> &Analyzer {
        self.unrestricted.get_or_init(|| {
            Analyzer::with_options(&self.model, &self.context, Options { restrict_networks: false, ..self.options }).expect("fits")
        })
    }

    pub fn setting(&self, items: &[(usize, u8)]) -> PartialSetting {
        PartialSetting::new(items.iter().map(|&(g, v)| (self.ids[g], v as Value))).expect("distinct")
    }

    pub fn effect(&self, q: &Query) -> Effect {
        Effect::atom(self.ids[q.effect.0], q.effect.1 as Value)
    }

    /// Causation queries: actual values, every cause size up to the limit.
    pub fn causal_queries(&self) -> Vec<Query> {
        let mut out = Vec::new();
        for y in self.tm.roots.len()..self.tm.len() {
            let pool: Vec<usize> = (0..self.tm.len()).filter(|&g| g != y).collect();
            for xs in index_subsets(&pool, self.limits.max_cause) {
                let cause = xs.iter().map(|&g| (g, self.world[g])).collect();
                out.push(Query { cause, effect: (y, self.world[y]) });
            }
        }
        out
    }

    /// Sufficiency queries: every value of causes up to the limit and of
    /// every other variable.
    pub fn sufficiency_queries(&self) -> Vec<Query> {
        let mut out = Vec::new();
        if self.tm.len() > self.limits.sufficiency_vars {
            return out;
        }
        for y in 0..self.tm.len() {
            let pool: Vec<usize> = (0..self.tm.len()).filter(|&g| g != y).collect();
            for xs in index_subsets(&pool, self.limits.max_cause) {
                for vals in value_product(xs.iter().map(|&g| self.tm.range(g))) {
                    for yv in 0..self.tm.range(y) {
                        out.push(Query { cause: xs.iter().copied().zip(vals.iter().copied()).collect(), effect: (y, yv) });
                    }
                }
            }
        }
        out
    }
}

/// Nonempty subsets of at most `max` elements, by size then lexicographic.
pub(crate) fn index_subsets(pool: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    let mut all = Vec::new();
    for _ in 0..max.min(pool.len()) {
        let mut next = Vec::new();
        for s in &out {
            let start = s.last().map_or(0, |l| pool.iter().position(|p| p == l).unwrap() + 1);
            for &p in &pool[start..] {
                let mut t = s.clone();
                t.push(p);
                next.push(t);
            }
        }
        all.extend(next.iter().cloned());
        out = next;
    }
    all
}

fn value_product(ranges: impl Iterator<Item = u8>) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for r in ranges {
        out = out.into_iter().flat_map(|v: Vec<u8>| (0..r).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verdicts(v: &[(D, bool)]) -> String {
    v.iter().map(|(d, b)| format!("{d}={b}")).collect::<Vec<_>>().join(" ")
}

/// The sixteen verdicts of one causation query, computed on demand.
struct Verdicts<'e, 'a> {
    env: &'e Env<'a>,
    x: PartialSetting,
    effect: Effect,
    cache: [OnceCell<bool>; 16],
    parts: [OnceCell<bool>; 16],
}

impl<'e, 'a> Verdicts<'e, 'a> {
    fn new(env: &'e Env<'a>, q: &Query) -> Self {
        Verdicts { env, x: env.setting(&q.cause), effect: env.effect(q), cache: Default::default(), parts: Default::default() }
    }

    fn get(&self, d: D) -> bool {
        *self.cache[d.index()].get_or_init(|| self.env.an.holds(d, &self.x, &self.effect).expect("valid query"))
    }

    fn part(&self, d: D) -> bool {
        *self.parts[d.index()].get_or_init(|| {
            let (v, val) = self.x.iter().next().expect("nonempty");
            self.env.an.part_of_holds(d, (v, val), &self.effect).expect("valid query")
        })
    }

    fn show(&self, ds: &[D]) -> String {
        verdicts(&ds.iter().map(|&d| (d, self.get(d))).collect::<Vec<_>>())
    }
}

/// Does `claim` apply to causation queries?
pub(crate) fn is_causal(claim: Claim) -> bool {
    !matches!(claim.group(), Group::Sufficiency)
}

/// Evaluate several claims on one causation query, sharing verdicts.
pub(crate) fn eval_causal_with(env: &Env, q: &Query, claims: &[Claim]) -> Vec<(Claim, Option<Outcome>)> {
    let v = Verdicts::new(env, q);
    let single = q.cause.len() == 1;
    claims
        .iter()
        .map(|&claim| {
            let out = match claim {
                Claim::ModifiedIffDef1 => Some(check(v.get(D::ModifiedHP) == v.get(D::Def1), || v.show(&[D::ModifiedHP, D::Def1]))),
                Claim::Def2IffDef5 => Some(check(v.get(D::Def2) == v.get(D::Def5), || v.show(&[D::Def2, D::Def5]))),
                Claim::Def8IffDef11 => Some(check(v.get(D::Def8) == v.get(D::Def11), || v.show(&[D::Def8, D::Def11]))),
                Claim::Def3Group => {
                    let g = [D::Def3, D::Def6, D::Def9, D::Def12];
                    Some(check(g.iter().all(|&d| v.get(d) == v.get(D::Def3)), || v.show(&g)))
                }
                Claim::PartModifiedUpdated => single.then(|| {
                    check(!v.part(D::ModifiedHP) || v.get(D::UpdatedHP), || format!("part-of ModifiedHP=true {}", v.show(&[D::UpdatedHP])))
                }),
                Claim::PartUpdatedOriginal => single.then(|| {
                    check(!v.part(D::UpdatedHP) || v.get(D::OriginalHP), || format!("part-of UpdatedHP=true {}", v.show(&[D::OriginalHP])))
                }),
                Claim::Def3Def2 => Some(check(!v.get(D::Def3) || v.get(D::Def2), || v.show(&[D::Def3, D::Def2]))),
                Claim::PartDef2Def8 => {
                    single.then(|| check(!v.part(D::Def2) || v.get(D::Def8), || format!("part-of Def2=true {}", v.show(&[D::Def8]))))
                }
                Claim::Def3Original => Some(check(!v.get(D::Def3) || v.get(D::OriginalHP), || v.show(&[D::Def3, D::OriginalHP]))),
                Claim::Def10Def4 => Some(check(!v.get(D::Def10) || v.get(D::Def4), || v.show(&[D::Def10, D::Def4]))),
                Claim::Def7Never => Some(check(!v.get(D::Def7), || "Def7=true".into())),
                Claim::MinimalSingleton => {
                    let minimal = [D::Def7, D::Def8, D::Def9, D::Def10, D::Def11, D::Def12];
                    Some(check(single || minimal.iter().all(|&d| !v.get(d)), || v.show(&minimal)))
                }
                Claim::Def3Parent => Some(check(!v.get(D::Def3) || (single && env.tm.parents(q.effect.0).contains(&q.cause[0].0)), || {
                    "Def3=true for a cause that is not a single parent".into()
                })),
                Claim::Dependence => single.then(|| {
                    let depends = env.an.dependence_holds(&v.x, &v.effect).expect("valid");
                    let excluded = [D::Def3, D::Def6, D::Def9, D::Def12, D::Def10, D::Def7];
                    let bad: Vec<D> = D::ALL.iter().copied().filter(|d| !excluded.contains(d) && depends && !v.get(*d)).collect();
                    check(bad.is_empty(), || format!("depends, yet not a cause under {}", bad.iter().map(|d| d.name()).collect::<Vec<_>>().join(", ")))
                }),
                Claim::ParentShortcut => {
                    let (x, y) = (q.cause[0].0, q.effect.0);
                    (single && env.tm.parents(y).contains(&x) && !env.tm.long_path(x, y)).then(|| {
                        let a = v.get(D::Def2);
                        check(a == v.get(D::Def3) && a == v.get(D::Def8), || v.show(&[D::Def2, D::Def3, D::Def8]))
                    })
                }
                Claim::ModifiedSingleton => single.then(|| {
                    check(!v.get(D::ModifiedHP) || (v.get(D::Def2) && v.get(D::Def4) && v.get(D::Def8)), || {
                        v.show(&[D::ModifiedHP, D::Def2, D::Def4, D::Def8])
                    })
                }),
                Claim::RestrictNetworks => {
                    let un = env.unrestricted();
                    let bad: Vec<String> = D::GENERAL
                        .iter()
                        .filter(|&&d| un.holds(d, &v.x, &v.effect).expect("valid") != v.get(d))
                        .map(|d| format!("{d}: restricted={}", v.get(*d)))
                        .collect();
                    Some(check(bad.is_empty(), || bad.join(", ")))
                }
                Claim::Evidence => {
                    let mut bad = Vec::new();
                    for &d in D::ALL.iter() {
                        if !v.get(d) {
                            continue;
                        }
                        let verdict = env.an.is_cause(d, &v.x, &v.effect).expect("valid");
                        let ok = verdict.evidence.as_ref().is_some_and(|ev| {
                            reference::verify_evidence(env.an.model(), &env.context, d, &v.x, &v.effect, ev).unwrap_or(false)
                        });
                        if !ok {
                            bad.push(d.name());
                        }
                    }
                    Some(check(bad.is_empty(), || format!("evidence rejected for {}", bad.join(", "))))
                }
                Claim::Reference => (env.tm.len() <= env.limits.reference_vars).then(|| {
                    let bad: Vec<String> = D::ALL
                        .iter()
                        .filter(|&&d| reference::is_cause(env.an.model(), &env.context, d, &v.x, &v.effect).expect("valid") != v.get(d))
                        .map(|d| format!("{d}: engine={}", v.get(*d)))
                        .collect();
                    check(bad.is_empty(), || bad.join(", "))
                }),
                _ => None,
            };
            (claim, out)
        })
        .collect()
}

/// Counts of `A ∧ ¬B` among singleton causes, for the pair matrix.
pub(crate) const PAIR_DEFS: [D; 8] = [D::Def2, D::Def3, D::Def4, D::Def8, D::Def10, D::OriginalHP, D::UpdatedHP, D::ModifiedHP];

pub(crate) fn pair_hits(env: &Env, q: &Query, hits: &mut [[u64; 8]; 8]) {
    if q.cause.len() != 1 {
        return;
    }
    let v = Verdicts::new(env, q);
    let vals: Vec<bool> = PAIR_DEFS.iter().map(|&d| v.get(d)).collect();
    for a in 0..8 {
        for b in 0..8 {
            if vals[a] && !vals[b] {
                hits[a][b] += 1;
            }
        }
    }
}

/// Sufficiency verdicts of one query, computed on demand and shared
/// between claims.
struct SufficiencyVerdicts<'e, 'a> {
    env: &'e Env<'a>,
    x: PartialSetting,
    y: PartialSetting,
    cache: [OnceCell<Result<bool, String>>; 6],
}

impl<'e, 'a> SufficiencyVerdicts<'e, 'a> {
    fn get(&self, kind: SufficiencyKind) -> Result<bool, String> {
        let i = SufficiencyKind::ALL.iter().position(|k| *k == kind).unwrap();
        self.cache[i]
            .get_or_init(|| {
                let ctx = kind.is_actual().then_some(&self.env.context);
                sufficiency::sufficient(&self.env.model, &self.x, &self.y, kind, ctx).map_err(|e| e.to_string())
            })
            .clone()
    }

    /// The values `vars` take under `X=x` with every variable in `zeroed`
    /// set to 0. If any `N=n` is forced with `zeroed` as `C`, it is this one.
    fn candidate(&self, zeroed: &[VarId], vars: &[VarId]) -> PartialSetting {
        let c = PartialSetting::new(zeroed.iter().map(|v| (*v, 0))).expect("distinct");
        let iv = self.x.union(&c).expect("disjoint");
        let world = self.env.model.solve_with(&self.env.context, &iv);
        PartialSetting::new(vars.iter().map(|v| (*v, world.get(*v)))).expect("distinct")
    }
}

/// Evaluate sufficiency claims on `X=x`, `Y=y` (any values).
pub(crate) fn eval_sufficiency_with(env: &Env, q: &Query, claims: &[Claim]) -> Vec<(Claim, Option<Outcome>)> {
    let sv = SufficiencyVerdicts {
        env,
        x: env.setting(&q.cause),
        y: PartialSetting::single(env.ids[q.effect.0], q.effect.1 as Value),
        cache: Default::default(),
    };
    claims.iter().map(|&c| (c, Some(eval_one(&sv, q, c).unwrap_or_else(Err)))).collect()
}

fn eval_one(sv: &SufficiencyVerdicts, q: &Query, claim: Claim) -> Result<Outcome, String> {
    use sufficiency::Strength::*;
    let env = sv.env;
    let m = &env.model;
    let (x, y) = (&sv.x, &sv.y);
    let y_var = env.ids[q.effect.0];
    let rest: Vec<VarId> = m.endogenous().filter(|v| !x.contains(*v) && *v != y_var).collect();
    let ctx = Some(&env.context);
    let scopes: &[bool] = if env.first_context { &[false, true] } else { &[true] };
    let scope = |actual: bool| actual.then_some(&env.context);
    let err = |e: sufficiency::SufficiencyError| e.to_string();
    let k = SufficiencyKind::new;
    Ok(match claim {
        Claim::StrengthChain => {
            for &actual in scopes {
                let (d, s, w) = (sv.get(k(Direct, actual))?, sv.get(k(Strong, actual))?, sv.get(k(Weak, actual))?);
                if (d && !s) || (s && !w) {
                    return Ok(Err(format!("actual={actual}: direct={d} strong={s} weak={w}")));
                }
            }
            Ok(())
        }
        Claim::NetworkChain => {
            if !env.first_context {
                return Ok(Ok(()));
            }
            let strong = sv.get(SufficiencyKind::Strong)?;
            let pool: Vec<VarId> = m.endogenous().filter(|v| !x.contains(*v)).collect();
            let mut chained = false;
            for link_vars in subsets_by_size(&pool, &[]) {
                if link_vars.is_empty() {
                    continue;
                }
                let zeroed: Vec<VarId> = pool.iter().copied().filter(|v| !link_vars.contains(v)).collect();
                let link = sv.candidate(&zeroed, &link_vars);
                if sufficiency::strongly_sufficient_along_chain(m, x, y, std::slice::from_ref(&link), None).map_err(err)? {
                    chained = true;
                    break;
                }
            }
            check(strong == chained, || format!("strong={strong} chain={chained}"))
        }
        Claim::Instantiation => {
            for &actual in scopes {
                let c = scope(actual);
                let (weak, direct, strong) = (sv.get(k(Weak, actual))?, sv.get(k(Direct, actual))?, sv.get(k(Strong, actual))?);
                let g_weak = sufficiency::general_sufficient(m, x, y, y, &[], c).map_err(err)?;
                let g_direct = sufficiency::general_sufficient(m, x, y, y, &rest, c).map_err(err)?;
                let mut g_strong = false;
                for n in subsets_by_size(&rest, &[]) {
                    let c_vars: Vec<VarId> = rest.iter().copied().filter(|v| !n.contains(v)).collect();
                    let mut with_y = n.clone();
                    with_y.push(y_var);
                    let nv = sv.candidate(&c_vars, &with_y);
                    if nv.get(y_var) != y.get(y_var) {
                        continue;
                    }
                    if sufficiency::general_sufficient(m, x, y, &nv, &c_vars, c).map_err(err)? {
                        g_strong = true;
                        break;
                    }
                }
                if weak != g_weak || direct != g_direct || strong != g_strong {
                    return Ok(Err(format!("actual={actual}: weak {weak}/{g_weak} direct {direct}/{g_direct} strong {strong}/{g_strong}")));
                }
            }
            Ok(())
        }
        Claim::ActualLemma => {
            if env.tm.is_root(q.effect.0) {
                return Ok(Ok(()));
            }
            let (ad, d) = (sv.get(SufficiencyKind::ActualDirect)?, sv.get(SufficiencyKind::Direct)?);
            if ad != d {
                return Ok(Err(format!("direct: actual={ad} non-actual={d}")));
            }
            let non_roots: Vec<VarId> = (env.tm.roots.len()..env.tm.len()).map(|g| env.ids[g]).filter(|v| !x.contains(*v)).collect();
            for n in subsets_by_size(&non_roots, &[y_var]) {
                let a = sufficiency::sufficient_along(m, x, y_var, q.effect.1 as Value, &n, SufficiencyKind::ActualStrong, ctx).map_err(err)?;
                let s = sufficiency::sufficient_along(m, x, y_var, q.effect.1 as Value, &n, SufficiencyKind::Strong, None).map_err(err)?;
                if a.is_some() != s.is_some() {
                    let names: Vec<&str> = n.iter().map(|v| m.name(*v)).collect();
                    return Ok(Err(format!("strong along {{{}}}: actual={} non-actual={}", names.join(","), a.is_some(), s.is_some())));
                }
            }
            Ok(())
        }
        Claim::MonotoneC => {
            // Verdict for every C ⊆ rest, indexed by bitmask over `rest`.
            let full = 1usize << rest.len();
            for &actual in scopes {
                let c = scope(actual);
                let mut holds = vec![false; full];
                for (mask, h) in holds.iter_mut().enumerate() {
                    let cs: Vec<VarId> = rest.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| *v).collect();
                    *h = sufficiency::general_sufficient(m, x, y, y, &cs, c).map_err(err)?;
                }
                for mask in 0..full {
                    for (i, v) in rest.iter().enumerate() {
                        if mask >> i & 1 == 0 && !holds[mask] && holds[mask | 1 << i] {
                            return Ok(Err(format!("adding {} to C made sufficiency hold", m.name(*v))));
                        }
                    }
                }
            }
            Ok(())
        }
        _ => Err("not a sufficiency claim".into()),
    })
}
