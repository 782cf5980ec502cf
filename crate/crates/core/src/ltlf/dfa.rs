use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::progress::Progressor;
use super::{Formula, Letter, LtlError};

pub const DEFAULT_ATOM_CAP: usize = 12;

/// Complete deterministic automaton over the alphabet `2^atoms`.
///
/// A letter is a bit mask: bit `i` is set iff `atoms[i]` holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    pub atoms: Vec<String>,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub delta: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn num_letters(&self) -> usize {
        1 << self.atoms.len()
    }

    pub fn step(&self, z: usize, mask: usize) -> usize {
        self.delta[z][mask]
    }

    /// Mask of a letter given as the set of true propositions; atoms outside
    /// the alphabet are ignored.
    pub fn mask_of<'a>(&self, props: impl IntoIterator<Item = &'a str>) -> usize {
        let mut m = 0;
        for p in props {
            if let Ok(i) = self.atoms.binary_search_by(|a| a.as_str().cmp(p)) {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn run(&self, trace: &[Letter]) -> usize {
        trace.iter().fold(self.initial, |z, l| self.step(z, self.mask_of(l.iter().map(String::as_str))))
    }

    pub fn accepts(&self, trace: &[Letter]) -> bool {
        self.accepting[self.run(trace)]
    }

    /// Moore partition refinement. Blocks are numbered in order of their
    /// smallest member, so the result is deterministic and the block of
    /// state 0 is state 0.
    pub fn minimize(&self) -> Dfa {
        let n = self.num_states();
        let mut block: Vec<usize> = renumber(&self.accepting);
        loop {
            let sigs: Vec<(usize, Vec<usize>)> =
                (0..n).map(|s| (block[s], self.delta[s].iter().map(|&t| block[t]).collect())).collect();
            let next = renumber(&sigs);
            let stable = next.iter().max() == block.iter().max();
            block = next;
            if stable {
                break;
            }
        }
        let count = block.iter().max().map_or(0, |m| m + 1);
        let mut accepting = vec![false; count];
        let mut delta = vec![Vec::new(); count];
        for s in 0..n {
            let b = block[s];
            if delta[b].is_empty() {
                accepting[b] = self.accepting[s];
                delta[b] = self.delta[s].iter().map(|&t| block[t]).collect();
            }
        }
        Dfa { atoms: self.atoms.clone(), initial: block[self.initial], accepting, delta }
    }

    /// Graphviz rendering; parallel edges are merged and labelled with their
    /// letters.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  init [shape=point];\n");
        for z in 0..self.num_states() {
            let shape = if self.accepting[z] { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  z{z} [shape={shape}];");
        }
        let _ = writeln!(out, "  init -> z{};", self.initial);
        for z in 0..self.num_states() {
            let mut by_target: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for m in 0..self.num_letters() {
                by_target.entry(self.delta[z][m]).or_default().push(self.letter_name(m));
            }
            for (t, letters) in by_target {
                let label = if letters.len() == self.num_letters() { "*".to_string() } else { letters.join(" ") };
                let _ = writeln!(out, "  z{z} -> z{t} [label=\"{label}\"];");
            }
        }
        out.push_str("}\n");
        out
    }

    fn letter_name(&self, m: usize) -> String {
        let on: Vec<&str> = (0..self.atoms.len()).filter(|i| m >> i & 1 == 1).map(|i| self.atoms[i].as_str()).collect();
        format!("{{{}}}", on.join(","))
    }
}

fn renumber<T: Eq + std::hash::Hash + Clone>(keys: &[T]) -> Vec<usize> {
    let mut ids: HashMap<T, usize> = HashMap::new();
    keys.iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k.clone()).or_insert(next)
        })
        .collect()
}

/// Minimal DFA accepting exactly the traces that satisfy `phi`.
pub fn to_dfa(phi: &Formula) -> Result<Dfa, LtlError> {
    to_dfa_with_cap(phi, DEFAULT_ATOM_CAP)
}

pub fn to_dfa_with_cap(phi: &Formula, atom_cap: usize) -> Result<Dfa, LtlError> {
    let atoms: Vec<String> = phi.atoms().into_iter().collect();
    if atoms.len() > atom_cap {
        return Err(LtlError::TooManyAtoms { count: atoms.len(), cap: atom_cap });
    }
    let mut p = Progressor::new(phi)?;
    let letters = 1usize << atoms.len();
    let mut substs = Vec::with_capacity(letters);
    for m in 0..letters {
        let holds = |a: &str| atoms.iter().position(|x| x == a).is_some_and(|i| m >> i & 1 == 1);
        substs.push(p.letter_substitution(&holds)?);
    }
    let start = p.encode(phi)?;
    let mut ids = HashMap::from([(start, 0usize)]);
    let mut states = vec![start];
    let mut queue = VecDeque::from([start]);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut accepting = Vec::new();
    while let Some(s) = queue.pop_front() {
        accepting.push(p.accepting(s)?);
        let mut row = Vec::with_capacity(letters);
        for sub in &substs {
            let t = p.mgr.vector_compose(s, sub)?;
            let id = match ids.get(&t) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    ids.insert(t, id);
                    states.push(t);
                    queue.push_back(t);
                    id
                }
            };
            row.push(id);
        }
        delta.push(row);
    }
    let raw = Dfa { atoms, initial: 0, accepting, delta };
    Ok(raw.minimize())
}
