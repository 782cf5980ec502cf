use super::*;

impl Manager {
    /// Replace variable `v` in `f` by the boolean function `g`.
    pub fn compose(&mut self, f: NodeRef, v: VarId, g: NodeRef) -> DdResult<NodeRef> {
        self.vector_compose(f, &[(v, g)])
    }

    /// Simultaneous substitution: every listed variable is replaced by its
    /// function evaluated over the original variables, never over the result
    /// of another substitution in the same call.
    pub fn vector_compose(&mut self, f: NodeRef, subs: &[(VarId, NodeRef)]) -> DdResult<NodeRef> {
        self.check(f)?;
        if subs.is_empty() {
            return Ok(f);
        }
        let mut table: Vec<Option<u32>> = vec![None; self.num_vars as usize];
        let mut deepest = 0;
        for &(v, g) in subs {
            self.check_var(v)?;
            self.check_bool(g, "vector_compose")?;
            let slot = &mut table[v.index()];
            if slot.is_some() {
                return Err(DdError::DuplicateSubstitution(v.0));
            }
            *slot = Some(g.idx);
            deepest = deepest.max(v.0);
        }
        let mut memo = FxHashMap::default();
        let r = self.vcompose_rec(f.idx, &table, deepest, &mut memo);
        Ok(self.h(r))
    }

    fn vcompose_rec(&mut self, f: u32, table: &[Option<u32>], deepest: u32, memo: &mut FxHashMap<u32, u32>) -> u32 {
        let lvl = self.level(f);
        if lvl == TERMINAL_LEVEL || lvl > deepest {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let (f1, f0) = self.children(f);
        let hi = self.vcompose_rec(f1, table, deepest, memo);
        let lo = self.vcompose_rec(f0, table, deepest, memo);
        let guard = match table[lvl as usize] {
            Some(g) => g,
            None => self.mk(lvl, ONE_IDX, ZERO_IDX),
        };
        let r = self.ite_rec(guard, hi, lo);
        memo.insert(f, r);
        r
    }

    /// Cofactor of `f` with `v` fixed to `value`.
    pub fn restrict(&mut self, f: NodeRef, v: VarId, value: bool) -> DdResult<NodeRef> {
        self.check(f)?;
        self.check_var(v)?;
        let mut memo = FxHashMap::default();
        let r = self.restrict_rec(f.idx, v.0, value, &mut memo);
        Ok(self.h(r))
    }

    fn restrict_rec(&mut self, f: u32, v: u32, value: bool, memo: &mut FxHashMap<u32, u32>) -> u32 {
        let lvl = self.level(f);
        if lvl == TERMINAL_LEVEL || lvl > v {
            return f;
        }
        let (f1, f0) = self.children(f);
        if lvl == v {
            return if value { f1 } else { f0 };
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let hi = self.restrict_rec(f1, v, value, memo);
        let lo = self.restrict_rec(f0, v, value, memo);
        let r = self.mk(lvl, hi, lo);
        memo.insert(f, r);
        r
    }
}
