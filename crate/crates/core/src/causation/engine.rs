//! Packed evaluation for the causation searches.
//!
//! Endogenous variables get positions `0..n` (declaration order). A world is
//! a `u64` with four bits per position; a partial setting is a position mask
//! plus packed values. Every partial intervention has a mixed-radix index
//! (digit 0 = not intervened, `v+1` = set to `v`), so per-context world
//! tables and the memo of forced projections are flat vectors.

use std::cell::{Cell, OnceCell, RefCell};
use std::collections::HashMap;

use crate::scm::{root_variables, CausalModel, Context, Value, VarId};

pub(crate) type Mask = u32;
pub(crate) type Packed = u64;

pub(crate) const MAX_VARS: usize = 15;
pub(crate) const MAX_RANGE: usize = 16;
const TABLE_CAP: usize = 1 << 20;
const MEMO_CAP: usize = 1 << 22;
const UNKNOWN: u64 = u64::MAX;
const NONE: u64 = u64::MAX - 1;

#[inline]
pub(crate) fn get(w: Packed, p: usize) -> Value {
    ((w >> (4 * p)) & 0xF) as Value
}

#[inline]
pub(crate) fn put(w: Packed, p: usize, v: Value) -> Packed {
    (w & !(0xF << (4 * p))) | ((v as u64) << (4 * p))
}

#[inline]
pub(crate) fn bits(mask: Mask) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let p = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(p)
        }
    })
}

/// Which contexts a sufficiency check quantifies over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Scope {
    Actual,
    All,
}

enum Memo {
    Dense(Vec<Cell<u64>>),
    Sparse(RefCell<HashMap<u64, u64>>),
}

impl Memo {
    fn new(entries: Option<usize>) -> Self {
        match entries {
            Some(n) if n <= MEMO_CAP => Memo::Dense(vec![Cell::new(UNKNOWN); n]),
            _ => Memo::Sparse(RefCell::new(HashMap::new())),
        }
    }

    #[inline]
    fn get(&self, key: u64) -> u64 {
        match self {
            Memo::Dense(v) => v[key as usize].get(),
            Memo::Sparse(m) => m.borrow().get(&key).copied().unwrap_or(UNKNOWN),
        }
    }

    #[inline]
    fn set(&self, key: u64, val: u64) {
        match self {
            Memo::Dense(v) => v[key as usize].set(val),
            Memo::Sparse(m) => {
                m.borrow_mut().insert(key, val);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum EngineError {
    TooManyVariables(usize),
    RangeTooLarge(String),
}

/// One model, one actual context, all the caches.
pub(crate) struct Session {
    pub(crate) model: CausalModel,
    pub(crate) n: usize,
    pub(crate) endo: Vec<VarId>,
    pub(crate) pos_of: Vec<Option<usize>>,
    pub(crate) radix: Vec<usize>,
    stride: Vec<u64>,
    /// Number of partial interventions, when it fits in a table.
    size: Option<usize>,
    /// Evaluation order as positions.
    order: Vec<usize>,
    contexts: Vec<Context>,
    pub(crate) actual: usize,
    tables: Vec<OnceCell<Vec<Packed>>>,
    memo_actual: Memo,
    memo_all: Memo,
    spread: Vec<u64>,
    pub(crate) full: Mask,
    pub(crate) roots: Mask,
    pub(crate) actual_world: Packed,
    scratch: RefCell<Vec<Value>>,
    subsets: RefCell<HashMap<Mask, std::rc::Rc<[Mask]>>>,
}

impl Session {
    /// `model` must be normalized; `context` must belong to it.
    pub(crate) fn new(model: CausalModel, context: &Context) -> Result<Self, EngineError> {
        let endo: Vec<VarId> = model.endogenous().collect();
        let n = endo.len();
        if n > MAX_VARS {
            return Err(EngineError::TooManyVariables(n));
        }
        if let Some(v) = endo.iter().find(|v| model.range(**v).len() > MAX_RANGE) {
            return Err(EngineError::RangeTooLarge(model.name(*v).to_string()));
        }
        let mut pos_of = vec![None; model.var_count()];
        for (p, v) in endo.iter().enumerate() {
            pos_of[v.index()] = Some(p);
        }
        let radix: Vec<usize> = endo.iter().map(|v| model.range(*v).len()).collect();
        let mut stride = vec![0u64; n];
        let mut acc: u64 = 1;
        for p in 0..n {
            stride[p] = acc;
            acc = acc.saturating_mul(radix[p] as u64 + 1);
        }
        let size = usize::try_from(acc).ok().filter(|s| *s <= TABLE_CAP);
        let memo_entries = size.and_then(|s| s.checked_mul(1 << n));
        let order: Vec<usize> = model.order().iter().map(|v| pos_of[v.index()].unwrap()).collect();
        let contexts = Context::all(&model);
        let actual = contexts.iter().position(|c| c == context).expect("context belongs to the model");
        let tables = (0..contexts.len()).map(|_| OnceCell::new()).collect();
        let spread = (0..1u32 << n).map(|m| bits(m).fold(0u64, |acc, p| acc | (0xF << (4 * p)))).collect();
        let roots = match root_variables(&model) {
            Ok(r) => r.iter().filter_map(|v| pos_of[v.index()]).fold(0, |m, p| m | (1 << p)),
            Err(_) => 0,
        };
        let scratch = RefCell::new(vec![0; model.var_count()]);
        let mut s = Session {
            model,
            n,
            endo,
            pos_of,
            radix,
            stride,
            size,
            order,
            contexts,
            actual,
            tables,
            memo_actual: Memo::new(memo_entries),
            memo_all: Memo::new(memo_entries),
            spread,
            full: ((1u64 << n) - 1) as Mask,
            roots,
            actual_world: 0,
            scratch,
            subsets: RefCell::new(HashMap::new()),
        };
        s.actual_world = s.world(s.actual, 0, 0, 0);
        Ok(s)
    }

    #[inline]
    pub(crate) fn spread(&self, mask: Mask) -> u64 {
        self.spread[mask as usize]
    }

    /// Mixed-radix index of the intervention `(mask, vals)`.
    #[inline]
    pub(crate) fn index(&self, mask: Mask, vals: Packed) -> u64 {
        bits(mask).map(|p| self.stride[p] * (get(vals, p) as u64 + 1)).sum()
    }

    fn solve(&self, k: usize, mask: Mask, vals: Packed) -> Packed {
        let mut buf = self.scratch.borrow_mut();
        for (v, x) in self.contexts[k].iter() {
            buf[v.index()] = x;
        }
        let mut out = 0;
        for &p in &self.order {
            let v = self.endo[p];
            let x = if mask & (1 << p) != 0 { get(vals, p) } else { self.model.eval_var(v, &buf) };
            buf[v.index()] = x;
            out |= (x as u64) << (4 * p);
        }
        out
    }

    fn table(&self, k: usize) -> Option<&[Packed]> {
        let size = self.size?;
        Some(self.tables[k].get_or_init(|| {
            let mut t = Vec::with_capacity(size);
            let mut digits = vec![0usize; self.n];
            for _ in 0..size {
                let mut mask = 0;
                let mut vals = 0;
                for p in 0..self.n {
                    if digits[p] > 0 {
                        mask |= 1 << p;
                        vals |= ((digits[p] - 1) as u64) << (4 * p);
                    }
                }
                t.push(self.solve(k, mask, vals));
                for p in 0..self.n {
                    digits[p] += 1;
                    if digits[p] <= self.radix[p] {
                        break;
                    }
                    digits[p] = 0;
                }
            }
            t
        }))
    }

    /// World of context `k` under intervention `(mask, vals)` with index `idx`.
    #[inline]
    pub(crate) fn world(&self, k: usize, mask: Mask, vals: Packed, idx: u64) -> Packed {
        match self.table(k) {
            Some(t) => t[idx as usize],
            None => self.solve(k, mask, vals),
        }
    }

    #[inline]
    pub(crate) fn world_of(&self, k: usize, mask: Mask, vals: Packed) -> Packed {
        self.world(k, mask, vals, self.index(mask, vals))
    }

    /// Projection onto `s` forced by `(p_mask, p_vals)` in context `k` under
    /// every setting of the remaining variables, if it is constant.
    fn forced_in(&self, k: usize, p_mask: Mask, p_vals: Packed, p_idx: u64, s: Mask) -> Option<u64> {
        let c_mask = self.full & !(p_mask | s);
        let proj = self.spread(s);
        let cs: Vec<usize> = bits(c_mask).collect();
        let mut digit = vec![0 as Value; cs.len()];
        let mut vals = p_vals;
        let mut idx = p_idx;
        for &p in &cs {
            idx += self.stride[p];
        }
        let first = self.world(k, p_mask | c_mask, vals, idx) & proj;
        'outer: loop {
            let mut i = 0;
            loop {
                if i == cs.len() {
                    break 'outer;
                }
                let p = cs[i];
                digit[i] += 1;
                idx += self.stride[p];
                if (digit[i] as usize) < self.radix[p] {
                    vals = put(vals, p, digit[i]);
                    break;
                }
                idx -= self.stride[p] * self.radix[p] as u64;
                digit[i] = 0;
                vals = put(vals, p, 0);
                i += 1;
            }
            if self.world(k, p_mask | c_mask, vals, idx) & proj != first {
                return None;
            }
        }
        Some(first)
    }

    /// Direct-sufficiency projection: constant value of `s` under
    /// `[P<-p, C<-c]` for all `c` over the rest, across the scope.
    pub(crate) fn forced(&self, scope: Scope, p_mask: Mask, p_vals: Packed, s: Mask) -> Option<u64> {
        let p_idx = self.index(p_mask, p_vals);
        let memo = match scope {
            Scope::Actual => &self.memo_actual,
            Scope::All => &self.memo_all,
        };
        let key = (p_idx << self.n) | s as u64;
        match memo.get(key) {
            UNKNOWN => {}
            NONE => return None,
            v => return Some(v),
        }
        let result = match scope {
            Scope::Actual => self.forced_in(self.actual, p_mask, p_vals, p_idx, s),
            Scope::All => {
                let mut agreed = None;
                let mut ok = true;
                for k in 0..self.contexts.len() {
                    match self.forced_in(k, p_mask, p_vals, p_idx, s) {
                        Some(v) if agreed.is_none() || agreed == Some(v) => agreed = Some(v),
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                agreed.filter(|_| ok)
            }
        };
        memo.set(key, result.unwrap_or(NONE));
        result
    }

    /// Weak-sufficiency projection: value of `s` under `[P<-p]` alone,
    /// if constant across the scope.
    pub(crate) fn weak(&self, scope: Scope, p_mask: Mask, p_vals: Packed, s: Mask) -> Option<u64> {
        let idx = self.index(p_mask, p_vals);
        let proj = self.spread(s);
        match scope {
            Scope::Actual => Some(self.world(self.actual, p_mask, p_vals, idx) & proj),
            Scope::All => {
                let first = self.world(0, p_mask, p_vals, idx) & proj;
                (1..self.contexts.len()).all(|k| self.world(k, p_mask, p_vals, idx) & proj == first).then_some(first)
            }
        }
    }

    /// Subsets of `pool` by increasing size, lexicographic by position among
    /// equal sizes. Cached per pool.
    pub(crate) fn subsets(&self, pool: Mask) -> std::rc::Rc<[Mask]> {
        if let Some(s) = self.subsets.borrow().get(&pool) {
            return s.clone();
        }
        let positions: Vec<usize> = bits(pool).collect();
        let mut all: Vec<Mask> = Vec::with_capacity(1 << positions.len());
        for k in 0..=positions.len() {
            combos(&positions, k, &mut all);
        }
        let rc: std::rc::Rc<[Mask]> = all.into();
        self.subsets.borrow_mut().insert(pool, rc.clone());
        rc
    }

    /// Every assignment of `mask`'s positions, lexicographic with the lowest
    /// position slowest.
    pub(crate) fn assignments(&self, mask: Mask) -> Vec<Packed> {
        let mut out = vec![0u64];
        for p in bits(mask) {
            out = out.into_iter().flat_map(|w| (0..self.radix[p] as Value).map(move |v| put(w, p, v))).collect();
        }
        out
    }

    pub(crate) fn pack(&self, setting: impl IntoIterator<Item = (VarId, Value)>) -> Option<(Mask, Packed)> {
        setting.into_iter().try_fold((0, 0), |(m, w), (v, x)| {
            let p = self.pos_of.get(v.index()).copied().flatten()?;
            Some((m | (1 << p), put(w, p, x)))
        })
    }

    pub(crate) fn unpack(&self, mask: Mask, vals: Packed) -> crate::scm::PartialSetting {
        crate::scm::PartialSetting::new(bits(mask).map(|p| (self.endo[p], get(vals, p)))).expect("distinct positions")
    }

    pub(crate) fn vars_of(&self, mask: Mask) -> Vec<VarId> {
        bits(mask).map(|p| self.endo[p]).collect()
    }
}

/// All `k`-subsets of `positions` as masks, in lexicographic order.
fn combos(positions: &[usize], k: usize, out: &mut Vec<Mask>) {
    let m = positions.len();
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0, |acc, i| acc | (1 << positions[*i])));
        let mut i = k;
        while i > 0 && idx[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
