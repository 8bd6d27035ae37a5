//! Greedy shrinking of counterexamples.

use super::claims::{eval_causal_with, eval_sufficiency_with, is_causal, Env, Limits, Query};
use super::family::{TableModel, TableVar};
use super::Violation;
use crate::causation::Options;

/// One structural edit.
#[derive(Clone, Copy)]
enum Edit {
    /// Remove the variable, substituting this value in its children.
    Fix(usize, u8),
    /// Drop a parent the child's table ignores.
    DropEdge { child: usize, parent: usize },
    /// Drop the top value of a variable's range.
    Shrink(usize),
}

fn apply(tm: &TableModel, ctx: &[u8], q: &Query, edit: Edit) -> (TableModel, Vec<u8>, Query) {
    let removed = match edit {
        Edit::Fix(g, v) => Some((g, v)),
        _ => None,
    };
    let new_index = |g: usize| match removed {
        Some((r, _)) if g == r => None,
        Some((r, _)) if g > r => Some(g - 1),
        _ => Some(g),
    };
    let new_range = |g: usize| match edit {
        Edit::Shrink(s) if s == g => tm.range(g) - 1,
        _ => tm.range(g),
    };
    let mut roots = Vec::new();
    let mut new_ctx = Vec::new();
    for g in 0..tm.roots.len() {
        if new_index(g).is_some() {
            roots.push(new_range(g));
            new_ctx.push(ctx[g]);
        }
    }
    let mut vars = Vec::new();
    for (j, var) in tm.vars.iter().enumerate() {
        let g = tm.roots.len() + j;
        if new_index(g).is_none() {
            continue;
        }
        let dropped = |p: usize| matches!(edit, Edit::DropEdge { child, parent } if child == g && parent == p);
        let kept: Vec<usize> = var.parents.iter().copied().filter(|&p| new_index(p).is_some() && !dropped(p)).collect();
        let mut table = Vec::new();
        let mut assignment = vec![0u8; kept.len()];
        loop {
            let old_row = var.parents.iter().fold(0usize, |acc, &p| {
                let v = match removed {
                    Some((r, v)) if r == p => v,
                    _ if dropped(p) => 0,
                    _ => assignment[kept.iter().position(|&k| k == p).unwrap()],
                };
                acc * tm.range(p) as usize + v as usize
            });
            table.push(var.table[old_row]);
            // Odometer, last parent fastest.
            let mut i = kept.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                assignment[i] += 1;
                if assignment[i] < new_range(kept[i]) {
                    break;
                }
                assignment[i] = 0;
            }
            if assignment.iter().all(|&a| a == 0) {
                break;
            }
        }
        let parents = kept.iter().map(|&p| new_index(p).unwrap()).collect();
        vars.push(TableVar { range: new_range(g), parents, table });
    }
    let query = Query {
        cause: q.cause.iter().map(|&(g, v)| (new_index(g).expect("query variables stay"), v)).collect(),
        effect: (new_index(q.effect.0).expect("query variables stay"), q.effect.1),
    };
    (TableModel { roots, vars }, new_ctx, query)
}

fn ignores(tm: &TableModel, child: usize, parent: usize) -> bool {
    let var = &tm.vars[child - tm.roots.len()];
    let pos = var.parents.iter().position(|&p| p == parent).unwrap();
    // Stride of `parent` in the row index.
    let stride: usize = var.parents[pos + 1..].iter().map(|&p| tm.range(p) as usize).product();
    let r = tm.range(parent) as usize;
    (0..var.table.len()).all(|row| {
        let digit = (row / stride) % r;
        var.table[row] == var.table[row - digit * stride]
    })
}

fn candidates(tm: &TableModel, ctx: &[u8], q: &Query) -> Vec<Edit> {
    let world = tm.solve(ctx);
    let in_query: Vec<usize> = q.vars().collect();
    let mut out = Vec::new();
    for g in (0..tm.len()).rev() {
        if !in_query.contains(&g) {
            out.push(Edit::Fix(g, world[g]));
        }
    }
    for g in tm.roots.len()..tm.len() {
        for &p in tm.parents(g) {
            if ignores(tm, g, p) {
                out.push(Edit::DropEdge { child: g, parent: p });
            }
        }
    }
    for g in 0..tm.len() {
        let top = tm.range(g).wrapping_sub(1);
        if tm.range(g) <= 2 {
            continue;
        }
        let used = q.cause.iter().any(|&(c, v)| c == g && v == top)
            || (q.effect.0 == g && q.effect.1 == top)
            || (tm.is_root(g) && ctx[g] == top)
            || (!tm.is_root(g) && tm.vars[g - tm.roots.len()].table.contains(&top));
        if !used {
            out.push(Edit::Shrink(g));
        }
    }
    out
}

/// Shrink `(tm, ctx, query)` while `still_fails` keeps holding: fix
/// variables outside the query to their actual values, drop ignored parents
/// and unused values. Returns the input unchanged if nothing can go.
pub fn minimize_with(
    tm: &TableModel,
    ctx: &[u8],
    query: &Query,
    mut still_fails: impl FnMut(&TableModel, &[u8], &Query) -> bool,
) -> (TableModel, Vec<u8>, Query) {
    let mut cur = (tm.clone(), ctx.to_vec(), query.clone());
    'outer: loop {
        for edit in candidates(&cur.0, &cur.1, &cur.2) {
            let next = apply(&cur.0, &cur.1, &cur.2, edit);
            if still_fails(&next.0, &next.1, &next.2) {
                cur = next;
                continue 'outer;
            }
        }
        return cur;
    }
}

/// Why `claim` fails on this model, context and query, if it does.
pub(crate) fn failure(tm: &TableModel, ctx: &[u8], q: &Query, v: &Violation, options: Options) -> Option<String> {
    let limits = Limits { sufficiency_vars: usize::MAX, reference_vars: usize::MAX, ..Limits::default() };
    let env = Env::new(tm, ctx, options, limits, true);
    let out = if is_causal(v.claim) { eval_causal_with(&env, q, &[v.claim]).pop()?.1 } else { eval_sufficiency_with(&env, q, &[v.claim]).pop()?.1 };
    out?.err()
}

/// A smaller model on which the same claim still fails, re-verified.
pub fn minimize_counterexample(v: &Violation, options: Options) -> Violation {
    let (model, context, query) = minimize_with(&v.model, &v.context, &v.query, |tm, ctx, q| failure(tm, ctx, q, v, options).is_some());
    let detail = failure(&model, &context, &query, v, options).expect("minimized example still fails");
    Violation { model, context, query, detail, ..v.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(range: u8, parents: &[usize], table: &[u8]) -> TableVar {
        TableVar { range, parents: parents.to_vec(), table: table.to_vec() }
    }

    #[test]
    fn fixing_a_root_substitutes_its_value() {
        // V1 = R1 & R2; fix R1 = 1 → V1 = R1' (old R2).
        let tm = TableModel { roots: vec![2, 2], vars: vec![tv(2, &[0, 1], &[0, 0, 0, 1])] };
        let q = Query { cause: vec![(1, 1)], effect: (2, 1) };
        let (m, ctx, q2) = apply(&tm, &[1, 1], &q, Edit::Fix(0, 1));
        assert_eq!(m, TableModel { roots: vec![2], vars: vec![tv(2, &[0], &[0, 1])] });
        assert_eq!(ctx, vec![1]);
        assert_eq!(q2, Query { cause: vec![(0, 1)], effect: (1, 1) });
    }

    #[test]
    fn ignored_parents_are_found() {
        let tm = TableModel { roots: vec![2, 3], vars: vec![tv(2, &[0, 1], &[0, 1, 1, 0, 1, 1])] };
        assert!(ignores(&tm, 2, 0));
        assert!(!ignores(&tm, 2, 1));
        let (m, _, _) = apply(&tm, &[0, 0], &Query { cause: vec![(1, 0)], effect: (2, 0) }, Edit::DropEdge { child: 2, parent: 0 });
        assert_eq!(m.vars[0], tv(2, &[1], &[0, 1, 1]));
    }

    #[test]
    fn shrinking_drops_rows() {
        let tm = TableModel { roots: vec![3], vars: vec![tv(2, &[0], &[0, 1, 1])] };
        let (m, _, _) = apply(&tm, &[0], &Query { cause: vec![(0, 0)], effect: (1, 0) }, Edit::Shrink(0));
        assert_eq!(m, TableModel { roots: vec![2], vars: vec![tv(2, &[0], &[0, 1])] });
    }

    #[test]
    fn isolated_variables_are_removed() {
        // Y = X, plus an unrelated root and a variable hanging off it.
        let tm = TableModel { roots: vec![2, 2], vars: vec![tv(2, &[1], &[1, 0]), tv(2, &[0], &[0, 1])] };
        let q = Query { cause: vec![(0, 1)], effect: (3, 1) };
        let (m, ctx, q2) = minimize_with(&tm, &[1, 0], &q, |tm, ctx, q| tm.solve(ctx)[q.effect.0] == q.cause[0].1);
        assert_eq!(m, TableModel { roots: vec![2], vars: vec![tv(2, &[0], &[0, 1])] });
        assert_eq!(ctx, vec![1]);
        assert_eq!(q2, Query { cause: vec![(0, 1)], effect: (1, 1) });
    }
}
