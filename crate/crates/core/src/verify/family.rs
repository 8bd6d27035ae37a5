//! Small normalized models given by value tables, and the families they are
//! drawn from.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::VerifyError;
use crate::scm::{CausalModel, Context, Expr, Range, Value, VarId, VarKind, Variable};

/// A non-root endogenous variable: its range size, its parents (global
/// indices, all smaller than its own) and its value for every parent
/// setting, the first parent varying slowest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TableVar {
    pub range: u8,
    pub parents: Vec<usize>,
    pub table: Vec<u8>,
}

/// A normalized model: roots `R_i := U_i` first, then table variables.
/// Global index `g` is root `g` for `g < roots.len()`, otherwise
/// `vars[g - roots.len()]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TableModel {
    /// Range size of each root (and of its exogenous parent).
    pub roots: Vec<u8>,
    pub vars: Vec<TableVar>,
}

impl TableModel {
    pub fn len(&self) -> usize {
        self.roots.len() + self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_root(&self, g: usize) -> bool {
        g < self.roots.len()
    }

    pub fn range(&self, g: usize) -> u8 {
        if self.is_root(g) {
            self.roots[g]
        } else {
            self.vars[g - self.roots.len()].range
        }
    }

    pub fn parents(&self, g: usize) -> &[usize] {
        if self.is_root(g) {
            &[]
        } else {
            &self.vars[g - self.roots.len()].parents
        }
    }

    pub fn name(&self, g: usize) -> String {
        if self.is_root(g) {
            format!("R{}", g + 1)
        } else {
            format!("V{}", g - self.roots.len() + 1)
        }
    }

    /// Row of `var`'s table for the given values of all variables.
    fn row(&self, var: &TableVar, values: &[u8]) -> usize {
        var.parents.iter().fold(0, |acc, &p| acc * self.range(p) as usize + values[p] as usize)
    }

    /// Values of every variable when the roots take `root_values`.
    pub fn solve(&self, root_values: &[u8]) -> Vec<u8> {
        let mut values = root_values.to_vec();
        for var in &self.vars {
            values.push(var.table[self.row(var, &values)]);
        }
        values
    }

    /// Every setting of the roots, the first root varying slowest.
    pub fn contexts(&self) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for &r in &self.roots {
            out = out.into_iter().flat_map(|c| (0..r).map(move |v| [c.clone(), vec![v]].concat())).collect();
        }
        out
    }

    /// Is there a directed path of length at least two from `a` to `b`?
    pub fn long_path(&self, a: usize, b: usize) -> bool {
        // far[g]: g is reached from a child of `a` by at least one edge.
        let mut far = vec![false; self.len()];
        for g in 0..self.len() {
            far[g] = self.parents(g).iter().any(|&p| far[p] || self.parents(p).contains(&a));
        }
        far[b]
    }

    /// The equivalent [`CausalModel`]: `U1..` exogenous, then `R1..` and
    /// `V1..` endogenous. Values are labelled `0`, `1`, ...
    pub fn to_model(&self) -> CausalModel {
        let range = |n: u8| Range::numeric(n as usize);
        let mut vars = Vec::new();
        let mut eqs = Vec::new();
        for (i, &r) in self.roots.iter().enumerate() {
            vars.push(Variable { name: format!("U{}", i + 1), kind: VarKind::Exogenous, range: range(r) });
        }
        for g in 0..self.len() {
            vars.push(Variable { name: self.name(g), kind: VarKind::Endogenous, range: range(self.range(g)) });
        }
        for (i, _) in self.roots.iter().enumerate() {
            eqs.push((self.name(i), Expr::atom(format!("U{}", i + 1))));
        }
        for (j, var) in self.vars.iter().enumerate() {
            eqs.push((self.name(self.roots.len() + j), self.body(var)));
        }
        CausalModel::new(vars, eqs).expect("table models are well formed")
    }

    fn body(&self, var: &TableVar) -> Expr {
        let label = |v: u8| Expr::atom(v.to_string());
        let Some(&last) = var.table.last() else { return label(0) };
        if var.parents.is_empty() {
            return label(last);
        }
        let mut arms = Vec::new();
        for (row, &out) in var.table.iter().enumerate() {
            if out == last {
                continue;
            }
            let mut rest = row;
            let mut conds = Vec::new();
            for &p in var.parents.iter().rev() {
                let r = self.range(p) as usize;
                conds.push(Expr::eq(self.name(p), (rest % r).to_string()));
                rest /= r;
            }
            conds.reverse();
            arms.push((Expr::and(conds), label(out)));
        }
        if arms.is_empty() {
            label(last)
        } else {
            Expr::Case { arms, default: Box::new(label(last)) }
        }
    }

    /// Endogenous ids of the [`CausalModel`] from [`TableModel::to_model`],
    /// by global index.
    pub fn ids(&self, model: &CausalModel) -> Vec<VarId> {
        model.endogenous().collect()
    }

    /// The context of [`TableModel::to_model`] with the given root values.
    pub fn context(&self, model: &CausalModel, root_values: &[u8]) -> Context {
        Context::new(model, model.exogenous().zip(root_values.iter().map(|v| *v as Value))).expect("one value per root")
    }
}

/// How models are drawn.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Every binary model up to isomorphism of the table representation: each
    /// variable picks a set of earlier parents and a function depending on
    /// all of them.
    Exhaustive,
    /// `count` models drawn with the given seed; range sizes are drawn from
    /// `ranges`.
    Sampled { count: u64, seed: u64, ranges: Vec<u8> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModelFamily {
    pub roots: RangeInclusive<usize>,
    pub non_roots: RangeInclusive<usize>,
    /// Total endogenous count bounds (sampled mode), applied on top of the
    /// two ranges above.
    pub total: RangeInclusive<usize>,
    pub max_parents: usize,
    pub mode: Mode,
    /// Refuse families larger than this.
    pub cap: u64,
}

impl ModelFamily {
    /// All binary models with 1–2 roots, 1–3 further variables and at most
    /// two parents per variable.
    pub fn exhaustive_default() -> Self {
        ModelFamily { roots: 1..=2, non_roots: 1..=3, total: 0..=usize::MAX, max_parents: 2, mode: Mode::Exhaustive, cap: 1_000_000 }
    }

    /// 10 000 models with 4–5 endogenous variables (1–2 of them roots) and
    /// ranges of size 2 or 3.
    pub fn sampled_default(seed: u64) -> Self {
        ModelFamily {
            roots: 1..=2,
            non_roots: 2..=4,
            total: 4..=5,
            max_parents: 2,
            mode: Mode::Sampled { count: 10_000, seed, ranges: vec![2, 3] },
            cap: 1_000_000,
        }
    }

    pub fn describe(&self) -> String {
        let base = format!(
            "{}–{} roots, {}–{} further variables, ≤{} parents",
            self.roots.start(),
            self.roots.end(),
            self.non_roots.start(),
            self.non_roots.end(),
            self.max_parents
        );
        match &self.mode {
            Mode::Exhaustive => format!("exhaustive binary: {base}"),
            Mode::Sampled { count, seed, ranges } => {
                format!("{count} sampled (seed {seed}): {base}, {}–{} endogenous in total, range sizes {ranges:?}", self.total.start(), self.total.end())
            }
        }
    }

    fn layouts(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in self.roots.clone() {
            for k in self.non_roots.clone() {
                if r + k > 0 && self.total.contains(&(r + k)) {
                    out.push((r, k));
                }
            }
        }
        out
    }

    /// Number of models, or `FamilyTooLarge`.
    pub fn len(&self) -> Result<u64, VerifyError> {
        let n = match &self.mode {
            Mode::Sampled { count, .. } => {
                if self.layouts().is_empty() {
                    0
                } else {
                    *count
                }
            }
            Mode::Exhaustive => {
                let tables = FunctionTables::new(self.max_parents);
                let mut total: u128 = 0;
                for (r, k) in self.layouts() {
                    total += (0..k).map(|j| tables.choices(r + j) as u128).product::<u128>();
                }
                u64::try_from(total).unwrap_or(u64::MAX)
            }
        };
        if n > self.cap {
            return Err(VerifyError::FamilyTooLarge { size: n, cap: self.cap });
        }
        Ok(n)
    }

    pub fn is_empty(&self) -> Result<bool, VerifyError> {
        Ok(self.len()? == 0)
    }

    /// Model `i` of the family. Sampled models depend only on the seed and
    /// `i`, so any worker can draw any model.
    pub fn model(&self, i: u64) -> TableModel {
        match &self.mode {
            Mode::Exhaustive => self.nth_exhaustive(i),
            Mode::Sampled { seed, ranges, .. } => self.sample(*seed, i, ranges),
        }
    }

    fn nth_exhaustive(&self, mut i: u64) -> TableModel {
        let tables = FunctionTables::new(self.max_parents);
        for (r, k) in self.layouts() {
            let counts: Vec<u64> = (0..k).map(|j| tables.choices(r + j)).collect();
            let size: u64 = counts.iter().product();
            if i >= size {
                i -= size;
                continue;
            }
            // Mixed radix, the last variable varying fastest.
            let mut digits = vec![0u64; k];
            for j in (0..k).rev() {
                digits[j] = i % counts[j];
                i /= counts[j];
            }
            let vars = digits.iter().enumerate().map(|(j, &d)| tables.choice(r + j, d)).collect();
            return TableModel { roots: vec![2; r], vars };
        }
        panic!("model index out of range");
    }

    fn sample(&self, seed: u64, i: u64, ranges: &[u8]) -> TableModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let layouts = self.layouts();
        let (r, k) = layouts[rng.random_range(0..layouts.len())];
        let pick = |rng: &mut ChaCha8Rng| ranges[rng.random_range(0..ranges.len())];
        let roots: Vec<u8> = (0..r).map(|_| pick(&mut rng)).collect();
        let mut tm = TableModel { roots, vars: Vec::new() };
        for j in 0..k {
            let available = r + j;
            let most = self.max_parents.min(available);
            let n_parents = if most == 0 { 0 } else { rng.random_range(1..=most) };
            let mut parents = rand::seq::index::sample(&mut rng, available, n_parents).into_vec();
            parents.sort_unstable();
            let range = pick(&mut rng);
            let rows: usize = parents.iter().map(|&p| tm.range(p) as usize).product();
            let table = (0..rows).map(|_| rng.random_range(0..range)).collect();
            tm.vars.push(TableVar { range, parents, table });
        }
        tm
    }

    /// Every model, in index order.
    pub fn iter(&self) -> Result<impl Iterator<Item = TableModel> + '_, VerifyError> {
        let n = self.len()?;
        Ok((0..n).map(move |i| self.model(i)))
    }
}

/// Stream the models of `family` (deterministic; sampled mode is seeded).
pub fn enumerate_models(family: &ModelFamily) -> Result<impl Iterator<Item = CausalModel> + '_, VerifyError> {
    Ok(family.iter()?.map(|tm| tm.to_model()))
}

/// Binary functions of `a` inputs that depend on every input, as tables.
struct FunctionTables {
    by_arity: Vec<Vec<Vec<u8>>>,
    max_parents: usize,
}

impl FunctionTables {
    fn new(max_parents: usize) -> Self {
        let by_arity = (0..=max_parents).map(essential_functions).collect();
        FunctionTables { by_arity, max_parents }
    }

    /// Parent sets of size `a` out of `available` predecessors.
    fn parent_sets(available: usize, a: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(start: usize, n: usize, a: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == a {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, a, cur, out);
                cur.pop();
            }
        }
        go(0, available, a, &mut cur, &mut out);
        out
    }

    fn choices(&self, available: usize) -> u64 {
        (0..=self.max_parents.min(available))
            .map(|a| Self::parent_sets(available, a).len() as u64 * self.by_arity[a].len() as u64)
            .sum()
    }

    fn choice(&self, available: usize, mut d: u64) -> TableVar {
        for a in 0..=self.max_parents.min(available) {
            let sets = Self::parent_sets(available, a);
            let fns = &self.by_arity[a];
            let here = sets.len() as u64 * fns.len() as u64;
            if d < here {
                let parents = sets[(d / fns.len() as u64) as usize].clone();
                let table = fns[(d % fns.len() as u64) as usize].clone();
                return TableVar { range: 2, parents, table };
            }
            d -= here;
        }
        panic!("choice index out of range");
    }
}

fn essential_functions(a: usize) -> Vec<Vec<u8>> {
    let rows = 1usize << a;
    (0u32..1 << rows)
        .map(|bits| (0..rows).map(|r| ((bits >> r) & 1) as u8).collect::<Vec<u8>>())
        .filter(|t| (0..a).all(|i| depends_on(t, a, i)))
        .collect()
}

/// Does the binary table over `a` inputs depend on input `i` (0 = slowest)?
fn depends_on(table: &[u8], a: usize, i: usize) -> bool {
    let bit = 1 << (a - 1 - i);
    (0..table.len()).any(|r| r & bit == 0 && table[r] != table[r | bit])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_counts() {
        assert_eq!(essential_functions(0).len(), 2);
        assert_eq!(essential_functions(1).len(), 2);
        assert_eq!(essential_functions(2).len(), 10);
        let t = FunctionTables::new(2);
        assert_eq!(t.choices(1), 4);
        assert_eq!(t.choices(2), 16);
        assert_eq!(t.choices(3), 38);
        assert_eq!(t.choices(4), 70);
    }

    #[test]
    fn default_family_size() {
        // r=1: 4 + 4·16 + 4·16·38; r=2: 16 + 16·38 + 16·38·70
        assert_eq!(ModelFamily::exhaustive_default().len().unwrap(), 4 + 64 + 2432 + 16 + 608 + 42560);
    }

    #[test]
    fn tables_round_trip_through_the_model() {
        let fam = ModelFamily::exhaustive_default();
        for i in (0..fam.len().unwrap()).step_by(977) {
            let tm = fam.model(i);
            let m = tm.to_model();
            let ids = tm.ids(&m);
            for c in tm.contexts() {
                let w = m.solve(&tm.context(&m, &c));
                let expect = tm.solve(&c);
                for (g, id) in ids.iter().enumerate() {
                    assert_eq!(w.get(*id), expect[g], "model {i}, var {g}");
                }
            }
        }
    }

    #[test]
    fn long_paths() {
        // R1 -> V1 -> V2, R1 -> V2
        let tm = TableModel {
            roots: vec![2],
            vars: vec![
                TableVar { range: 2, parents: vec![0], table: vec![0, 1] },
                TableVar { range: 2, parents: vec![0, 1], table: vec![0, 0, 0, 1] },
            ],
        };
        assert!(tm.long_path(0, 2));
        assert!(!tm.long_path(1, 2));
        assert!(!tm.long_path(0, 1));
    }
}
