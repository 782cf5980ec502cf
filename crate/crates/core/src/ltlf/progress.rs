//! Formula progression over a boolean encoding of temporal obligations.
//!
//! A progressed formula is a boolean combination of atoms, `X` subformulas
//! and `U` subformulas of the original formula ("terms"). Each term gets one
//! diagram variable, so equivalent combinations share a handle and the
//! progression closure is finite without any syntactic normalisation.

use std::collections::HashMap;

use crate::dd::{DdResult, Manager, NodeRef, NodeView, VarId};

use super::{Formula, LtlError};

pub(crate) struct Progressor {
    pub(crate) mgr: Manager,
    terms: Vec<Formula>,
    index: HashMap<Formula, u32>,
    nonempty: Option<u32>,
}

impl Progressor {
    pub(crate) fn new(phi: &Formula) -> Result<Self, LtlError> {
        let mut terms = Vec::new();
        let mut index = HashMap::new();
        collect_terms(phi, &mut terms, &mut index);
        let nonempty_term = Formula::until(Formula::True, Formula::True);
        let needs_nonempty = terms.iter().any(|t| matches!(t, Formula::Next(_)));
        if needs_nonempty && !index.contains_key(&nonempty_term) {
            index.insert(nonempty_term.clone(), terms.len() as u32);
            terms.push(nonempty_term.clone());
        }
        let nonempty = index.get(&nonempty_term).copied();
        let mut mgr = Manager::with_var_limit(terms.len().max(1) as u32);
        mgr.new_vars(terms.len())?;
        Ok(Progressor { mgr, terms, index, nonempty })
    }

    fn term_var(&mut self, t: &Formula) -> DdResult<NodeRef> {
        let v = self.index[t];
        self.mgr.var(VarId(v))
    }

    /// Boolean encoding of `phi` over the term variables.
    pub(crate) fn encode(&mut self, phi: &Formula) -> DdResult<NodeRef> {
        Ok(match phi {
            Formula::True => self.mgr.one(),
            Formula::False => self.mgr.zero(),
            Formula::Atom(_) | Formula::Next(_) | Formula::Until(..) => self.term_var(phi)?,
            Formula::Not(a) => {
                let x = self.encode(a)?;
                self.mgr.negate(x)?
            }
            Formula::And(a, b) => {
                let (x, y) = (self.encode(a)?, self.encode(b)?);
                self.mgr.and(x, y)?
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.encode(a)?, self.encode(b)?);
                self.mgr.or(x, y)?
            }
        })
    }

    /// Progression of `phi` through one position where exactly the atoms
    /// accepted by `holds` are true.
    fn progress_formula(
        &mut self,
        phi: &Formula,
        holds: &dyn Fn(&str) -> bool,
        memo: &mut HashMap<Formula, NodeRef>,
    ) -> DdResult<NodeRef> {
        if let Some(&r) = memo.get(phi) {
            return Ok(r);
        }
        let r = match phi {
            Formula::True => self.mgr.one(),
            Formula::False => self.mgr.zero(),
            Formula::Atom(p) => self.mgr.boolean(holds(p)),
            Formula::Not(a) => {
                let x = self.progress_formula(a, holds, memo)?;
                self.mgr.negate(x)?
            }
            Formula::And(a, b) => {
                let x = self.progress_formula(a, holds, memo)?;
                let y = self.progress_formula(b, holds, memo)?;
                self.mgr.and(x, y)?
            }
            Formula::Or(a, b) => {
                let x = self.progress_formula(a, holds, memo)?;
                let y = self.progress_formula(b, holds, memo)?;
                self.mgr.or(x, y)?
            }
            Formula::Next(a) => {
                // the remainder must be nonempty and satisfy `a`
                let body = self.encode(a)?;
                let ne = self.mgr.var(VarId(self.nonempty.expect("nonempty term allocated")))?;
                self.mgr.and(body, ne)?
            }
            Formula::Until(a, b) => {
                let now = self.progress_formula(b, holds, memo)?;
                let keep = self.progress_formula(a, holds, memo)?;
                let again = self.term_var(phi)?;
                let later = self.mgr.and(keep, again)?;
                self.mgr.or(now, later)?
            }
        };
        memo.insert(phi.clone(), r);
        Ok(r)
    }

    /// Substitution that progresses every term through one letter.
    pub(crate) fn letter_substitution(&mut self, holds: &dyn Fn(&str) -> bool) -> DdResult<Vec<(VarId, NodeRef)>> {
        let mut memo = HashMap::new();
        let terms = self.terms.clone();
        terms
            .iter()
            .enumerate()
            .map(|(i, t)| Ok((VarId(i as u32), self.progress_formula(t, holds, &mut memo)?)))
            .collect()
    }

    /// Truth on the empty remainder: every term is false there.
    pub(crate) fn accepting(&self, state: NodeRef) -> DdResult<bool> {
        let zeros = vec![false; self.terms.len()];
        Ok(self.mgr.eval(state, &zeros)? == crate::Value::ONE)
    }

    /// Readable formula for a state diagram.
    pub(crate) fn decode(&self, state: NodeRef) -> DdResult<Formula> {
        let mut memo = HashMap::new();
        self.decode_rec(state, &mut memo)
    }

    fn decode_rec(&self, f: NodeRef, memo: &mut HashMap<NodeRef, Formula>) -> DdResult<Formula> {
        if let Some(x) = memo.get(&f) {
            return Ok(x.clone());
        }
        let out = match self.mgr.node(f)? {
            NodeView::Terminal(v) => {
                if v == crate::Value::ZERO {
                    Formula::False
                } else {
                    Formula::True
                }
            }
            NodeView::Inner { var, hi, lo } => {
                let t = self.terms[var.index()].clone();
                let (one, zero) = (self.mgr.one(), self.mgr.zero());
                if hi == one && lo == zero {
                    t
                } else if hi == zero && lo == one {
                    Formula::not(t)
                } else if lo == zero {
                    Formula::and(t, self.decode_rec(hi, memo)?)
                } else if hi == zero {
                    Formula::and(Formula::not(t), self.decode_rec(lo, memo)?)
                } else if hi == one {
                    Formula::or(t, self.decode_rec(lo, memo)?)
                } else if lo == one {
                    Formula::or(Formula::not(t), self.decode_rec(hi, memo)?)
                } else {
                    let a = Formula::and(t.clone(), self.decode_rec(hi, memo)?);
                    let b = Formula::and(Formula::not(t), self.decode_rec(lo, memo)?);
                    Formula::or(a, b)
                }
            }
        };
        memo.insert(f, out.clone());
        Ok(out)
    }
}

fn collect_terms(phi: &Formula, terms: &mut Vec<Formula>, index: &mut HashMap<Formula, u32>) {
    match phi {
        Formula::True | Formula::False => return,
        Formula::Not(a) => return collect_terms(a, terms, index),
        Formula::And(a, b) | Formula::Or(a, b) => {
            collect_terms(a, terms, index);
            return collect_terms(b, terms, index);
        }
        Formula::Next(a) => collect_terms(a, terms, index),
        Formula::Until(a, b) => {
            collect_terms(a, terms, index);
            collect_terms(b, terms, index);
        }
        Formula::Atom(_) => {}
    }
    if !index.contains_key(phi) {
        index.insert(phi.clone(), terms.len() as u32);
        terms.push(phi.clone());
    }
}

/// Progress `phi` through one letter: the result `psi` satisfies
/// `letter . rest |= phi` iff `rest |= psi`.
pub fn progress(phi: &Formula, letter: &super::Letter) -> Result<Formula, LtlError> {
    let mut p = Progressor::new(phi)?;
    let mut memo = HashMap::new();
    let holds = |a: &str| letter.contains(a);
    let r = p.progress_formula(phi, &holds, &mut memo)?;
    Ok(p.decode(r)?)
}
