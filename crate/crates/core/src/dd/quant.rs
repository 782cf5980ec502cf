use super::*;

impl Manager {
    /// Eliminate `vars` from `f`.
    ///
    /// `Exists`/`Forall` require a boolean `f`. The abstraction modes take the
    /// pointwise minimum or maximum over both cofactors of each eliminated
    /// variable. Duplicates in `vars` are ignored.
    pub fn quantify(&mut self, q: Quant, f: NodeRef, vars: &[VarId]) -> DdResult<NodeRef> {
        self.check(f)?;
        let op = match q {
            Quant::Exists => {
                self.check_bool(f, "exists")?;
                Op::Or
            }
            Quant::Forall => {
                self.check_bool(f, "forall")?;
                Op::And
            }
            Quant::MinAbstract => Op::Min,
            Quant::MaxAbstract => Op::Max,
        };
        let mut mask = vec![false; self.num_vars as usize];
        let mut deepest = None;
        for &v in vars {
            self.check_var(v)?;
            mask[v.index()] = true;
            deepest = deepest.max(Some(v.0));
        }
        let Some(deepest) = deepest else {
            return Ok(f);
        };
        let mut memo = FxHashMap::default();
        let r = self.quant_rec(op, f.idx, &mask, deepest, &mut memo);
        Ok(self.h(r))
    }

    pub fn exists(&mut self, f: NodeRef, vars: &[VarId]) -> DdResult<NodeRef> {
        self.quantify(Quant::Exists, f, vars)
    }

    pub fn forall(&mut self, f: NodeRef, vars: &[VarId]) -> DdResult<NodeRef> {
        self.quantify(Quant::Forall, f, vars)
    }

    fn quant_rec(&mut self, op: Op, f: u32, mask: &[bool], deepest: u32, memo: &mut FxHashMap<u32, u32>) -> u32 {
        let lvl = self.level(f);
        if lvl == TERMINAL_LEVEL || lvl > deepest {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let (f1, f0) = self.children(f);
        let hi = self.quant_rec(op, f1, mask, deepest, memo);
        let lo = self.quant_rec(op, f0, mask, deepest, memo);
        let r = if mask[lvl as usize] { self.apply_rec(op, hi, lo) } else { self.mk(lvl, hi, lo) };
        memo.insert(f, r);
        r
    }

    /// `exists vars . f & g` without building the full conjunction first.
    pub fn and_exists(&mut self, f: NodeRef, g: NodeRef, vars: &[VarId]) -> DdResult<NodeRef> {
        let fg = self.and(f, g)?;
        self.exists(fg, vars)
    }
}
