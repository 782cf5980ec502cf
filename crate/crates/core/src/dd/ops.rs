use super::*;

const NOT_CODE: u8 = 200;

impl Manager {
    /// Pointwise combination of `f` and `g`.
    ///
    /// Boolean operators require 0/1-valued operands.
    pub fn apply(&mut self, op: Op, f: NodeRef, g: NodeRef) -> DdResult<NodeRef> {
        self.check(f)?;
        self.check(g)?;
        if op.is_boolean() {
            self.check_bool(f, "apply")?;
            self.check_bool(g, "apply")?;
        }
        let r = self.apply_rec(op, f.idx, g.idx);
        Ok(self.h(r))
    }

    pub fn and(&mut self, f: NodeRef, g: NodeRef) -> DdResult<NodeRef> {
        self.apply(Op::And, f, g)
    }

    pub fn or(&mut self, f: NodeRef, g: NodeRef) -> DdResult<NodeRef> {
        self.apply(Op::Or, f, g)
    }

    /// Conjunction of all operands; `1` when empty.
    pub fn and_all(&mut self, fs: impl IntoIterator<Item = NodeRef>) -> DdResult<NodeRef> {
        let mut acc = self.one();
        for f in fs {
            acc = self.and(acc, f)?;
        }
        Ok(acc)
    }

    /// Disjunction of all operands; `0` when empty.
    pub fn or_all(&mut self, fs: impl IntoIterator<Item = NodeRef>) -> DdResult<NodeRef> {
        let mut acc = self.zero();
        for f in fs {
            acc = self.or(acc, f)?;
        }
        Ok(acc)
    }

    /// `f -> g` for boolean operands.
    pub fn implies(&mut self, f: NodeRef, g: NodeRef) -> DdResult<NodeRef> {
        let nf = self.negate(f)?;
        self.or(nf, g)
    }

    /// `f <-> g` for boolean operands.
    pub fn iff(&mut self, f: NodeRef, g: NodeRef) -> DdResult<NodeRef> {
        let x = self.apply(Op::Xor, f, g)?;
        self.negate(x)
    }

    pub(super) fn apply_rec(&mut self, op: Op, f: u32, g: u32) -> u32 {
        if let (Some(a), Some(b)) = (self.terminal_value(f), self.terminal_value(g)) {
            return self.terminal_idx(op.eval(a, b));
        }
        match op {
            Op::And => {
                if f == ZERO_IDX || g == ZERO_IDX {
                    return ZERO_IDX;
                }
                if f == ONE_IDX || f == g {
                    return g;
                }
                if g == ONE_IDX {
                    return f;
                }
            }
            Op::Or => {
                if f == ONE_IDX || g == ONE_IDX {
                    return ONE_IDX;
                }
                if f == ZERO_IDX || f == g {
                    return g;
                }
                if g == ZERO_IDX {
                    return f;
                }
            }
            Op::Xor => {
                if f == g {
                    return ZERO_IDX;
                }
                if f == ZERO_IDX {
                    return g;
                }
                if g == ZERO_IDX {
                    return f;
                }
            }
            Op::Min | Op::Max => {
                if f == g {
                    return f;
                }
            }
            Op::Plus => {
                if f == ZERO_IDX {
                    return g;
                }
                if g == ZERO_IDX {
                    return f;
                }
            }
            Op::Times => {
                if f == ONE_IDX {
                    return g;
                }
                if g == ONE_IDX {
                    return f;
                }
                if f == ZERO_IDX || g == ZERO_IDX {
                    return ZERO_IDX;
                }
            }
        }
        // every operator is commutative
        let (f, g) = if f <= g { (f, g) } else { (g, f) };
        let key = (op.code(), f, g);
        if let Some(r) = self.cache_get(key) {
            return r;
        }
        let v = self.level(f).min(self.level(g));
        let (f1, f0) = self.cofactors(f, v);
        let (g1, g0) = self.cofactors(g, v);
        let hi = self.apply_rec(op, f1, g1);
        let lo = self.apply_rec(op, f0, g0);
        let r = self.mk(v, hi, lo);
        self.cache_put(key, r);
        r
    }

    /// Pointwise boolean negation.
    pub fn negate(&mut self, f: NodeRef) -> DdResult<NodeRef> {
        self.check_bool(f, "negate")?;
        let r = self.not_rec(f.idx);
        Ok(self.h(r))
    }

    pub(super) fn not_rec(&mut self, f: u32) -> u32 {
        if f == ZERO_IDX {
            return ONE_IDX;
        }
        if f == ONE_IDX {
            return ZERO_IDX;
        }
        let key = (NOT_CODE, f, 0);
        if let Some(r) = self.cache_get(key) {
            return r;
        }
        let v = self.level(f);
        let (f1, f0) = self.children(f);
        let hi = self.not_rec(f1);
        let lo = self.not_rec(f0);
        let r = self.mk(v, hi, lo);
        self.cache_put(key, r);
        r
    }

    /// Pointwise if-then-else with a boolean guard; the branches may be
    /// arbitrary diagrams.
    pub fn ite(&mut self, f: NodeRef, g: NodeRef, h: NodeRef) -> DdResult<NodeRef> {
        self.check_bool(f, "ite")?;
        self.check(g)?;
        self.check(h)?;
        let r = self.ite_rec(f.idx, g.idx, h.idx);
        Ok(self.h(r))
    }

    pub(super) fn ite_rec(&mut self, f: u32, g: u32, h: u32) -> u32 {
        if f == ONE_IDX {
            return g;
        }
        if f == ZERO_IDX {
            return h;
        }
        if g == h {
            return g;
        }
        if g == ONE_IDX && h == ZERO_IDX {
            return f;
        }
        if g == ZERO_IDX && h == ONE_IDX {
            return self.not_rec(f);
        }
        let key = (f, g, h);
        if self.caching {
            self.cache_lookups += 1;
            if let Some(&r) = self.ite_cache.get(&key) {
                self.cache_hits += 1;
                return r;
            }
        }
        let v = self.level(f).min(self.level(g)).min(self.level(h));
        let (f1, f0) = self.cofactors(f, v);
        let (g1, g0) = self.cofactors(g, v);
        let (h1, h0) = self.cofactors(h, v);
        let hi = self.ite_rec(f1, g1, h1);
        let lo = self.ite_rec(f0, g0, h0);
        let r = self.mk(v, hi, lo);
        if self.caching {
            if self.ite_cache.len() >= self.cache_limit {
                self.ite_cache.clear();
            }
            self.ite_cache.insert(key, r);
        }
        r
    }

    /// Map every terminal through `map`. Not cached across calls.
    pub fn map_terminals(&mut self, f: NodeRef, mut map: impl FnMut(Value) -> Value) -> DdResult<NodeRef> {
        self.check(f)?;
        let mut memo = FxHashMap::default();
        let r = self.map_rec(f.idx, &mut map, &mut memo);
        Ok(self.h(r))
    }

    fn map_rec(&mut self, f: u32, map: &mut impl FnMut(Value) -> Value, memo: &mut FxHashMap<u32, u32>) -> u32 {
        if let Some(v) = self.terminal_value(f) {
            return self.terminal_idx(map(v));
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let v = self.level(f);
        let (f1, f0) = self.children(f);
        let hi = self.map_rec(f1, map, memo);
        let lo = self.map_rec(f0, map, memo);
        let r = self.mk(v, hi, lo);
        memo.insert(f, r);
        r
    }

    /// Boolean diagram of the points where `f` satisfies `pred`.
    pub fn select(&mut self, f: NodeRef, pred: impl Fn(Value) -> bool) -> DdResult<NodeRef> {
        self.map_terminals(f, |v| if pred(v) { Value::ONE } else { Value::ZERO })
    }
}
