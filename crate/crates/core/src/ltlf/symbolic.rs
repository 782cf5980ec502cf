use std::collections::BTreeMap;

use crate::dd::{Manager, NodeRef, VarId};
use crate::Value;

use super::{Dfa, LtlError};

/// Boolean encoding of a [`Dfa`] inside a game's manager.
///
/// DFA state `z` has code `z` over `y_vars` (most significant bit first).
/// `zeta[i](X, Y)` is bit `i` of the successor code when the current code
/// is `Y` and the propositions are read from the state encoded by `X`.
#[derive(Clone, Debug)]
pub struct SymbolicDfa {
    pub y_vars: Vec<VarId>,
    pub zeta: Vec<NodeRef>,
    /// Accepting codes.
    pub accepting: NodeRef,
    /// Codes that denote a DFA state.
    pub valid: NodeRef,
    pub initial: usize,
    pub num_states: usize,
}

/// Number of bits needed for codes `0..n`.
pub fn bits_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

impl SymbolicDfa {
    pub fn code(&self, z: usize) -> u128 {
        z as u128
    }

    pub fn state_cube(&self, mgr: &mut Manager, z: usize) -> Result<NodeRef, LtlError> {
        Ok(mgr.cube(&self.y_vars, z as u128)?)
    }

    /// Substitution `y_i <- zeta_i` for one DFA step.
    pub fn step_substitution(&self) -> Vec<(VarId, NodeRef)> {
        self.y_vars.iter().copied().zip(self.zeta.iter().copied()).collect()
    }
}

/// Encode `d` over `y_vars`, reading atom `p` through `labeling[p]`, a
/// boolean function of the game variables.
pub fn encode_symbolic(
    mgr: &mut Manager,
    d: &Dfa,
    y_vars: &[VarId],
    labeling: &BTreeMap<String, NodeRef>,
) -> Result<SymbolicDfa, LtlError> {
    let needed = bits_for(d.num_states());
    if y_vars.len() < needed {
        return Err(LtlError::NotEnoughBits { needed, available: y_vars.len() });
    }
    let mut labs = Vec::with_capacity(d.atoms.len());
    for a in &d.atoms {
        let f = labeling.get(a).ok_or_else(|| LtlError::UnencodedAtom(a.clone()))?;
        labs.push(*f);
    }
    let width = y_vars.len();
    let mut zeta = vec![mgr.zero(); width];
    for z in 0..d.num_states() {
        let succ = successor_add(mgr, d, z, &labs, 0, 0)?;
        let here = mgr.cube(y_vars, z as u128)?;
        for (i, slot) in zeta.iter_mut().enumerate() {
            let bit = width - 1 - i;
            let on = mgr.select(succ, |v| v.finite().is_some_and(|c| c >> bit & 1 == 1))?;
            let part = mgr.and(here, on)?;
            *slot = mgr.or(*slot, part)?;
        }
    }
    let acc_codes: Vec<u128> = (0..d.num_states()).filter(|&z| d.accepting[z]).map(|z| z as u128).collect();
    let accepting = mgr.code_set(y_vars, acc_codes)?;
    let valid = mgr.code_set(y_vars, (0..d.num_states()).map(|z| z as u128))?;
    Ok(SymbolicDfa { y_vars: y_vars.to_vec(), zeta, accepting, valid, initial: d.initial, num_states: d.num_states() })
}

/// Diagram over the game variables whose terminal is the successor of `z`.
fn successor_add(
    mgr: &mut Manager,
    d: &Dfa,
    z: usize,
    labs: &[NodeRef],
    depth: usize,
    mask: usize,
) -> Result<NodeRef, LtlError> {
    if depth == labs.len() {
        return Ok(mgr.constant(Value::Finite(d.step(z, mask) as i64)));
    }
    let on = successor_add(mgr, d, z, labs, depth + 1, mask | 1 << depth)?;
    let off = successor_add(mgr, d, z, labs, depth + 1, mask)?;
    Ok(mgr.ite(labs[depth], on, off)?)
}
