//! AC2 searches over packed settings.

use super::engine::{get, Mask, Packed, Scope, Session};
use crate::sufficiency::{Strength, SufficiencyKind};

use super::Necessity;

/// A candidate `X=x` (always the actual values) and an effect `Y ∈ A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Query {
    pub x_mask: Mask,
    pub x_vals: Packed,
    pub y: usize,
    /// Accepted values of `Y` as a bit set.
    pub accept: u32,
}

impl Query {
    #[inline]
    pub fn accepts(&self, v: u8) -> bool {
        self.accept & (1 << v) != 0
    }
}

/// Evidence found by a search, in packed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Found {
    pub w_mask: Mask,
    pub w_vals: Packed,
    pub n_mask: Mask,
    pub n_vals: Packed,
    pub contrast: Option<Packed>,
    /// `Z` for the Original/Updated/Strong HP partitions.
    pub z_mask: Option<Mask>,
}

/// How the sweep over sub-networks `S ⊆ N` in AC2(a) is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub(crate) struct Reading {
    /// Contrastive: count `S=s` as sufficient only when `s` agrees with the
    /// actual world off `Y` (instead of for every `s` with an accepted `y`).
    pub actual_restriction: bool,
    /// Minimal: also sweep nonempty `S ⊆ N` that do not contain `Y`.
    pub all_subsets: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Hp {
    Original,
    Updated,
    Modified,
    Strong,
}

impl Session {
    /// Every setting of `q`'s variables except the actual one, lexicographic
    /// with the lowest position slowest.
    pub(crate) fn contrasts(&self, q: &Query) -> Vec<Packed> {
        self.assignments(q.x_mask).into_iter().filter(|v| *v != q.x_vals).collect()
    }

    fn scope(kind: SufficiencyKind) -> Scope {
        if kind.is_actual() {
            Scope::Actual
        } else {
            Scope::All
        }
    }

    /// Projection onto `s` that `P` is sufficient for, per strength.
    #[inline]
    fn projection(&self, scope: Scope, strength: Strength, p_mask: Mask, p_vals: Packed, s: Mask) -> Option<u64> {
        match strength {
            Strength::Weak => self.weak(scope, p_mask, p_vals, s),
            Strength::Direct | Strength::Strong => self.forced(scope, p_mask, p_vals, s),
        }
    }

    /// AC2(a) for fixed `P` (`X=x', W=w*` or `W=w*` alone) and network `n`.
    fn necessary(&self, scope: Scope, strength: Strength, p_mask: Mask, p_vals: Packed, n: Mask, q: &Query, reading: Reading) -> bool {
        let ybit = 1 << q.y;
        let rest = n & !ybit;
        let aw = self.actual_world;
        let mut sub = rest;
        loop {
            let s = sub | ybit;
            if let Some(proj) = self.projection(scope, strength, p_mask, p_vals, s) {
                let off_y = self.spread(s & !ybit);
                let agrees = proj & off_y == aw & off_y;
                if q.accepts(get(proj, q.y)) && (!reading.actual_restriction || agrees) {
                    return false;
                }
            }
            if reading.all_subsets && sub != 0 && self.projection(scope, strength, p_mask, p_vals, sub).is_some() {
                return false;
            }
            if sub == 0 {
                return true;
            }
            sub = (sub - 1) & rest;
        }
    }

    /// General form: AC2(b) with `(X=x, W=w*)` along `N`, plus AC2(aᶜ) or
    /// AC2(aᵐ). The first witness in search order.
    pub(crate) fn ac2_general(&self, q: &Query, kind: SufficiencyKind, necessity: Necessity, restrict_networks: bool, reading: Reading) -> Option<Found> {
        let scope = Self::scope(kind);
        let strength = kind.strength();
        let ybit: Mask = 1 << q.y;
        let aw = self.actual_world;
        let y_star = get(aw, q.y);
        let pool = self.full & !q.x_mask & !ybit;
        let contrasts = match necessity {
            Necessity::Contrastive => self.contrasts(q),
            Necessity::Minimal => Vec::new(),
        };
        for &w in self.subsets(pool).iter() {
            let w_vals = aw & self.spread(w);
            let p_mask = q.x_mask | w;
            let p_vals = q.x_vals | w_vals;
            let n_pool = match strength {
                Strength::Strong if restrict_networks => pool & !w & !self.roots,
                Strength::Strong => pool & !w,
                _ => 0,
            };
            for &t in self.subsets(n_pool).iter() {
                let n = t | ybit;
                let Some(proj) = self.projection(scope, strength, p_mask, p_vals, n) else { continue };
                if get(proj, q.y) != y_star {
                    continue;
                }
                let found = |contrast| Found { w_mask: w, w_vals, n_mask: n, n_vals: proj, contrast, z_mask: None };
                match necessity {
                    Necessity::Contrastive => {
                        for &xp in &contrasts {
                            if self.necessary(scope, strength, p_mask, xp | w_vals, n, q, reading) {
                                return Some(found(Some(xp)));
                            }
                        }
                    }
                    Necessity::Minimal => {
                        if self.necessary(scope, strength, w, w_vals, n, q, reading) {
                            return Some(found(None));
                        }
                    }
                }
            }
        }
        None
    }

    #[inline]
    fn y_under(&self, mask: Mask, vals: Packed, y: usize) -> u8 {
        get(self.world_of(self.actual, mask, vals), y)
    }

    /// The HP definitions, literally: `W` ranges over subsets of
    /// `V ∖ (X ∪ {Y})`, `Z` is the complement of `W`.
    pub(crate) fn ac2_hp(&self, q: &Query, which: Hp) -> Option<Found> {
        let ybit: Mask = 1 << q.y;
        let aw = self.actual_world;
        let pool = self.full & !q.x_mask & !ybit;
        let contrasts = self.contrasts(q);
        for &w in self.subsets(pool).iter() {
            let z = self.full & !w;
            let rest = pool & !w;
            if which == Hp::Modified {
                let w_vals = aw & self.spread(w);
                if let Some(&xp) = contrasts.iter().find(|xp| !q.accepts(self.y_under(q.x_mask | w, **xp | w_vals, q.y))) {
                    return Some(Found { w_mask: w, w_vals, n_mask: 0, n_vals: 0, contrast: Some(xp), z_mask: None });
                }
                continue;
            }
            for w_vals in self.assignments(w) {
                let Some(&xp) = contrasts.iter().find(|xp| !q.accepts(self.y_under(q.x_mask | w, **xp | w_vals, q.y))) else {
                    continue;
                };
                if self.hp_b(q, which, w, w_vals, rest) {
                    return Some(Found { w_mask: w, w_vals, n_mask: 0, n_vals: 0, contrast: Some(xp), z_mask: Some(z) });
                }
            }
        }
        None
    }

    /// AC2(b) (and AC2(c) for the strong variant). Subsets `Z'` containing
    /// `Y` are skipped: fixing `Y` at its actual value satisfies `φ`.
    fn hp_b(&self, q: &Query, which: Hp, w: Mask, w_vals: Packed, rest: Mask) -> bool {
        let aw = self.actual_world;
        let w_subsets: Vec<Mask> = if which == Hp::Original { vec![w] } else { self.subsets(w).to_vec() };
        for &wp in &w_subsets {
            let mut zp = rest;
            loop {
                let mask = q.x_mask | wp | zp;
                let vals = q.x_vals | (w_vals & self.spread(wp)) | (aw & self.spread(zp));
                if !q.accepts(self.y_under(mask, vals, q.y)) {
                    return false;
                }
                if zp == 0 {
                    break;
                }
                zp = (zp - 1) & rest;
            }
        }
        if which == Hp::Strong {
            return self.assignments(w).into_iter().all(|wv| q.accepts(self.y_under(q.x_mask | w, q.x_vals | wv, q.y)));
        }
        true
    }

    /// Some `x'` with `[X<-x'] Y ∉ A` in the actual context.
    pub(crate) fn depends(&self, q: &Query) -> Option<Packed> {
        self.contrasts(q).into_iter().find(|xp| !q.accepts(self.y_under(q.x_mask, *xp, q.y)))
    }
}
