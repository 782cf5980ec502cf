use crate::dd::{NodeRef, Op, Quant, VarId};
use crate::Value;

use super::{SymError, SymbolicGame, TrKind, TrPart};

type Subst = Vec<(VarId, NodeRef)>;

/// Whether a quantitative controllable predecessor also steps the utility
/// block (and any block the caller substitutes itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Blocks {
    Xy,
    Xyu,
}

impl SymbolicGame {
    fn x_subst(&self, p: &TrPart) -> Subst {
        self.layout.x.iter().copied().zip(p.eta.iter().copied()).collect()
    }

    /// Simultaneous substitution stepping `X`, `Y` and optionally `U`
    /// through slice `p`.
    pub fn step_subst(&self, p: &TrPart, blocks: Blocks) -> Subst {
        let mut s = self.x_subst(p);
        s.extend(self.layout.y.iter().copied().zip(p.zeta_next.iter().copied()));
        if blocks == Blocks::Xyu {
            s.extend(self.layout.u.iter().copied().zip(p.eta_u.iter().copied()));
        }
        s
    }

    /// `pre(X,O,I)`: valid triples of slice `p` whose successor is in
    /// `omega(X)`.
    pub fn part_pre_image(&mut self, omega: NodeRef, p: &TrPart) -> Result<NodeRef, SymError> {
        let s = self.x_subst(p);
        let moved = self.mgr.vector_compose(omega, &s)?;
        Ok(self.mgr.and(moved, p.guard)?)
    }

    /// Union of [`part_pre_image`](Self::part_pre_image) over every slice.
    pub fn pre_image(&mut self, omega: NodeRef, kind: TrKind) -> Result<NodeRef, SymError> {
        let parts = self.parts(kind).to_vec();
        let mut acc = self.mgr.zero();
        for p in &parts {
            let pre = self.part_pre_image(omega, p)?;
            acc = self.mgr.or(acc, pre)?;
        }
        Ok(acc)
    }

    /// `pre(X,Y,O,I)` on the product: first the DFA reads the successor's
    /// label (`y <- zeta`), then the game moves (`x <- eta`).
    pub fn product_pre(&mut self, omega: NodeRef, p: &TrPart) -> Result<NodeRef, SymError> {
        let dfa_step = self.sd.step_substitution();
        let after_dfa = self.mgr.vector_compose(omega, &dfa_step)?;
        let s = self.x_subst(p);
        let moved = self.mgr.vector_compose(after_dfa, &s)?;
        let g = self.mgr.and(moved, p.guard)?;
        Ok(self.mgr.and(g, self.sd.valid)?)
    }

    /// States `(X,Y)` where some robot action of slice `p` forces the
    /// successor into `omega` whatever the human does, paired with that
    /// action: a function over `(X,Y,O)`.
    pub fn forced_by(&mut self, omega: NodeRef, p: &TrPart) -> Result<NodeRef, SymError> {
        let pre = self.product_pre(omega, p)?;
        let safe = self.mgr.implies(p.guard, pre)?;
        let i = self.layout.i.clone();
        let all_i = self.mgr.forall(safe, &i)?;
        let t = self.mgr.and(all_i, p.robot_valid)?;
        Ok(self.mgr.and(t, self.sd.valid)?)
    }

    /// `exists O. forall I. pre`: qualitative controllable predecessor over
    /// `(X, Y)`.
    pub fn controllable_pre(&mut self, omega: NodeRef, kind: TrKind) -> Result<NodeRef, SymError> {
        let parts = self.parts(kind).to_vec();
        let o = self.layout.o.clone();
        let mut acc = self.mgr.zero();
        for p in &parts {
            let t = self.forced_by(omega, p)?;
            let s = self.mgr.exists(t, &o)?;
            acc = self.mgr.or(acc, s)?;
        }
        Ok(acc)
    }

    /// Quantitative predecessor of a value function `w` over `X,Y[,U]` and
    /// any extra block the caller substitutes through `extra(p)`:
    /// `min_O (cost + max_I w(successor))`, per action, as a function over
    /// `(X,Y[,U],O)`. Invalid human codes count as 0 under the max and
    /// invalid robot codes as infinity.
    pub fn action_values(
        &mut self,
        w: NodeRef,
        p: &TrPart,
        blocks: Blocks,
        extra: &[(VarId, NodeRef)],
        add_cost: bool,
    ) -> Result<NodeRef, SymError> {
        let mut s = self.step_subst(p, blocks);
        s.extend_from_slice(extra);
        let moved = self.mgr.vector_compose(w, &s)?;
        let zero = self.mgr.zero();
        let masked = self.mgr.ite(p.guard, moved, zero)?;
        let i = self.layout.i.clone();
        let worst = self.mgr.quantify(Quant::MaxAbstract, masked, &i)?;
        let paid = if add_cost {
            let c = self.mgr.constant(Value::Finite(p.cost as i64));
            self.mgr.apply(Op::Plus, worst, c)?
        } else {
            worst
        };
        let inf = self.mgr.infinity();
        Ok(self.mgr.ite(p.robot_valid, paid, inf)?)
    }

    /// `min_O max_I` predecessor of `w` across every slice of `kind`.
    pub fn controllable_pre_quant(&mut self, w: NodeRef, kind: TrKind, blocks: Blocks) -> Result<NodeRef, SymError> {
        let parts = self.parts(kind).to_vec();
        let o = self.layout.o.clone();
        let mut acc = self.mgr.infinity();
        for p in &parts {
            let per_action = self.action_values(w, p, blocks, &[], true)?;
            let best = self.mgr.quantify(Quant::MinAbstract, per_action, &o)?;
            acc = self.mgr.apply(Op::Min, acc, best)?;
        }
        Ok(acc)
    }

    /// Relation `R_p(X,O,I,X')` for slice `index` of `kind`.
    fn relation(&mut self, kind: TrKind, index: usize) -> Result<NodeRef, SymError> {
        if let Some(&r) = self.relations.get(&(kind, index)) {
            return Ok(r);
        }
        let p = self.parts(kind)[index].clone();
        let mut r = p.guard;
        for (k, &e) in p.eta.iter().enumerate() {
            let xp = self.mgr.var(self.layout.xp[k])?;
            let eq = self.mgr.iff(xp, e)?;
            r = self.mgr.and(r, eq)?;
        }
        self.relations.insert((kind, index), r);
        Ok(r)
    }

    /// Forward image of `s` over `(X,Y[,U])` through every slice.
    pub fn image(&mut self, s: NodeRef, kind: TrKind, blocks: Blocks) -> Result<NodeRef, SymError> {
        let l = self.layout.clone();
        let to_primed: Vec<(VarId, NodeRef)> =
            l.x.iter().zip(&l.xp).map(|(&x, &xp)| Ok((x, self.mgr.var(xp)?))).collect::<Result<_, SymError>>()?;
        let mut y_rel = self.mgr.one();
        for (j, &z) in self.sd.zeta.clone().iter().enumerate() {
            let z_primed = self.mgr.vector_compose(z, &to_primed)?;
            let yp = self.mgr.var(l.yp[j])?;
            let eq = self.mgr.iff(yp, z_primed)?;
            y_rel = self.mgr.and(y_rel, eq)?;
        }
        let xoi: Vec<VarId> = [&l.x[..], &l.o[..], &l.i[..]].concat();
        let n = self.parts(kind).len();
        let mut acc = self.mgr.zero();
        for idx in 0..n {
            let p = self.parts(kind)[idx].clone();
            if p.guard == self.mgr.zero() {
                continue;
            }
            let r = self.relation(kind, idx)?;
            let mut t = self.mgr.and_exists(s, r, &xoi)?;
            if blocks == Blocks::Xyu {
                let mut u_rel = self.mgr.one();
                for (k, &e) in p.eta_u.iter().enumerate() {
                    let up = self.mgr.var(l.up[k])?;
                    let eq = self.mgr.iff(up, e)?;
                    u_rel = self.mgr.and(u_rel, eq)?;
                }
                t = self.mgr.and_exists(t, u_rel, &l.u)?;
            }
            t = self.mgr.and_exists(t, y_rel, &l.y)?;
            acc = self.mgr.or(acc, t)?;
        }
        let mut back = Vec::new();
        for (&p, &v) in l.xp.iter().zip(&l.x).chain(l.yp.iter().zip(&l.y)) {
            back.push((p, self.mgr.var(v)?));
        }
        if blocks == Blocks::Xyu {
            for (&p, &v) in l.up.iter().zip(&l.u) {
                back.push((p, self.mgr.var(v)?));
            }
        }
        Ok(self.mgr.vector_compose(acc, &back)?)
    }

    /// Least set containing `init` and closed under images of its members
    /// inside `expand`.
    pub fn reachable(
        &mut self,
        init: NodeRef,
        expand: NodeRef,
        kind: TrKind,
        blocks: Blocks,
    ) -> Result<NodeRef, SymError> {
        let mut reach = init;
        let mut frontier = init;
        loop {
            let src = self.mgr.and(frontier, expand)?;
            let img = self.image(src, kind, blocks)?;
            let old = self.mgr.negate(reach)?;
            let fresh = self.mgr.and(img, old)?;
            if fresh == self.mgr.zero() {
                return Ok(reach);
            }
            reach = self.mgr.or(reach, fresh)?;
            frontier = fresh;
        }
    }
}
