use std::collections::BTreeSet;

use super::*;

impl Manager {
    /// Value of `f` under `assignment`, indexed by variable.
    pub fn eval(&self, f: NodeRef, assignment: &[bool]) -> DdResult<Value> {
        self.check(f)?;
        let mut i = f.idx;
        loop {
            match self.nodes[i as usize] {
                Node::Terminal(v) => return Ok(v),
                Node::Inner { var, hi, lo } => {
                    let bit = assignment.get(var as usize).ok_or(DdError::IncompleteAssignment(var))?;
                    i = if *bit { hi } else { lo };
                }
                Node::Free => unreachable!(),
            }
        }
    }

    /// Variables `f` depends on, in order.
    pub fn support(&self, f: NodeRef) -> DdResult<Vec<VarId>> {
        self.check(f)?;
        let mut seen = FxHashMap::default();
        let mut vars = BTreeSet::new();
        let mut stack = vec![f.idx];
        while let Some(i) = stack.pop() {
            if seen.insert(i, ()).is_some() {
                continue;
            }
            if let Node::Inner { var, hi, lo } = self.nodes[i as usize] {
                vars.insert(var);
                stack.push(hi);
                stack.push(lo);
            }
        }
        Ok(vars.into_iter().map(VarId).collect())
    }

    /// Number of distinct nodes, terminals included, reachable from `f`.
    pub fn node_count(&self, f: NodeRef) -> DdResult<usize> {
        self.node_count_many(&[f])
    }

    /// Size of the shared diagram rooted at all of `fs`.
    pub fn node_count_many(&self, fs: &[NodeRef]) -> DdResult<usize> {
        for f in fs {
            self.check(*f)?;
        }
        let mut seen = rustc_hash::FxHashSet::default();
        let mut stack: Vec<u32> = fs.iter().map(|f| f.idx).collect();
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            if let Node::Inner { hi, lo, .. } = self.nodes[i as usize] {
                stack.push(hi);
                stack.push(lo);
            }
        }
        Ok(seen.len())
    }

    /// Terminal values reachable from `f`.
    pub fn terminals(&self, f: NodeRef) -> DdResult<BTreeSet<Value>> {
        self.check(f)?;
        let mut seen = rustc_hash::FxHashSet::default();
        let mut out = BTreeSet::new();
        let mut stack = vec![f.idx];
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            match self.nodes[i as usize] {
                Node::Terminal(v) => {
                    out.insert(v);
                }
                Node::Inner { hi, lo, .. } => {
                    stack.push(hi);
                    stack.push(lo);
                }
                Node::Free => unreachable!(),
            }
        }
        Ok(out)
    }

    /// Call `visit(code, value)` for every assignment to `vars` whose value
    /// is not `skip`. `vars` must be strictly increasing and include the
    /// support of `f`; `vars[0]` is the most significant bit of `code`.
    pub fn for_each_assignment(
        &self,
        f: NodeRef,
        vars: &[VarId],
        skip: Option<Value>,
        mut visit: impl FnMut(u128, Value),
    ) -> DdResult<()> {
        self.check(f)?;
        check_sorted(vars)?;
        if vars.len() > 127 {
            return Err(DdError::CodeTooWide { code: 0, width: vars.len() });
        }
        self.walk(f.idx, vars, 0, 0, skip, &mut visit)
    }

    fn walk(
        &self,
        i: u32,
        vars: &[VarId],
        depth: usize,
        code: u128,
        skip: Option<Value>,
        visit: &mut impl FnMut(u128, Value),
    ) -> DdResult<()> {
        if let Some(v) = self.terminal_value(i) {
            if Some(v) == skip {
                return Ok(());
            }
            if depth == vars.len() {
                visit(code, v);
                return Ok(());
            }
        }
        let lvl = self.level(i);
        if depth == vars.len() {
            return Err(DdError::IncompleteAssignment(lvl));
        }
        let var = vars[depth].0;
        if lvl < var {
            return Err(DdError::IncompleteAssignment(lvl));
        }
        let (hi, lo) = self.cofactors(i, var);
        self.walk(lo, vars, depth + 1, code << 1, skip, visit)?;
        self.walk(hi, vars, depth + 1, (code << 1) | 1, skip, visit)
    }

    /// Number of assignments to `vars` on which the boolean `f` is true.
    pub fn sat_count(&self, f: NodeRef, vars: &[VarId]) -> DdResult<f64> {
        self.check_bool(f, "sat_count")?;
        check_sorted(vars)?;
        let mut memo = FxHashMap::default();
        self.count_rec(f.idx, vars, 0, &mut memo)
    }

    fn count_rec(
        &self,
        i: u32,
        vars: &[VarId],
        depth: usize,
        memo: &mut FxHashMap<(u32, usize), f64>,
    ) -> DdResult<f64> {
        if i == ZERO_IDX {
            return Ok(0.0);
        }
        if i == ONE_IDX {
            return Ok(2f64.powi((vars.len() - depth) as i32));
        }
        if let Some(&c) = memo.get(&(i, depth)) {
            return Ok(c);
        }
        let lvl = self.level(i);
        if depth == vars.len() || lvl < vars[depth].0 {
            return Err(DdError::IncompleteAssignment(lvl));
        }
        let (hi, lo) = self.cofactors(i, vars[depth].0);
        let c = self.count_rec(hi, vars, depth + 1, memo)? + self.count_rec(lo, vars, depth + 1, memo)?;
        memo.insert((i, depth), c);
        Ok(c)
    }

    /// Build the diagram mapping each listed code over `vars` to its value
    /// and every other assignment to `default`. `vars[0]` is the most
    /// significant bit. When a code repeats, the last entry wins.
    pub fn from_table(&mut self, vars: &[VarId], entries: &[(u128, Value)], default: Value) -> DdResult<NodeRef> {
        check_sorted(vars)?;
        for v in vars {
            self.check_var(*v)?;
        }
        let width = vars.len();
        let mut rows: Vec<(u128, Value)> = Vec::with_capacity(entries.len());
        for &(code, val) in entries {
            if width < 128 && code >> width != 0 {
                return Err(DdError::CodeTooWide { code, width });
            }
            rows.push((code, val));
        }
        // stable sort keeps input order among equal codes
        rows.sort_by_key(|r| r.0);
        let mut dedup: Vec<(u128, Value)> = Vec::with_capacity(rows.len());
        for r in rows {
            match dedup.last_mut() {
                Some(last) if last.0 == r.0 => *last = r,
                _ => dedup.push(r),
            }
        }
        let dflt = self.terminal_idx(default);
        let r = self.table_rec(vars, 0, &dedup, dflt);
        Ok(self.h(r))
    }

    fn table_rec(&mut self, vars: &[VarId], depth: usize, rows: &[(u128, Value)], dflt: u32) -> u32 {
        if rows.is_empty() {
            return dflt;
        }
        if depth == vars.len() {
            return self.terminal_idx(rows[0].1);
        }
        let bit = (vars.len() - 1 - depth) as u32;
        let split = rows.partition_point(|r| (r.0 >> bit) & 1 == 0);
        let lo = self.table_rec(vars, depth + 1, &rows[..split], dflt);
        let hi = self.table_rec(vars, depth + 1, &rows[split..], dflt);
        self.mk(vars[depth].0, hi, lo)
    }

    /// Characteristic function of one code over `vars`.
    pub fn cube(&mut self, vars: &[VarId], code: u128) -> DdResult<NodeRef> {
        self.from_table(vars, &[(code, Value::ONE)], Value::ZERO)
    }

    /// Characteristic function of a set of codes over `vars`.
    pub fn code_set(&mut self, vars: &[VarId], codes: impl IntoIterator<Item = u128>) -> DdResult<NodeRef> {
        let rows: Vec<(u128, Value)> = codes.into_iter().map(|c| (c, Value::ONE)).collect();
        self.from_table(vars, &rows, Value::ZERO)
    }
}

fn check_sorted(vars: &[VarId]) -> DdResult<()> {
    if vars.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(DdError::UnorderedVars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let mut m = Manager::new();
        let vars = m.new_vars(3).unwrap();
        let rows = vec![(0b101, Value::Finite(2)), (0b000, Value::Finite(3))];
        let f = m.from_table(&vars, &rows, Value::ZERO).unwrap();
        let mut got = Vec::new();
        m.for_each_assignment(f, &vars, Some(Value::ZERO), |c, v| got.push((c, v))).unwrap();
        assert_eq!(got, vec![(0b000, Value::Finite(3)), (0b101, Value::Finite(2))]);
        assert_eq!(m.eval(f, &[true, false, true]).unwrap(), Value::Finite(2));
    }

    #[test]
    fn eval_reports_missing_bits() {
        let mut m = Manager::new();
        let _ = m.new_var().unwrap();
        let x1 = m.new_var().unwrap();
        assert_eq!(m.eval(x1, &[true]), Err(DdError::IncompleteAssignment(1)));
    }

    #[test]
    fn counting_and_support() {
        let mut m = Manager::new();
        let vars = m.new_vars(4).unwrap();
        let a = m.var(vars[0]).unwrap();
        let c = m.var(vars[2]).unwrap();
        let f = m.or(a, c).unwrap();
        assert_eq!(m.support(f).unwrap(), vec![vars[0], vars[2]]);
        assert_eq!(m.sat_count(f, &vars).unwrap(), 12.0);
        assert_eq!(m.node_count(f).unwrap(), 4);
    }

    #[test]
    fn codes_must_fit() {
        let mut m = Manager::new();
        let vars = m.new_vars(2).unwrap();
        assert_eq!(m.cube(&vars, 4), Err(DdError::CodeTooWide { code: 4, width: 2 }));
        assert_eq!(m.cube(&[vars[1], vars[0]], 0), Err(DdError::UnorderedVars));
    }
}
