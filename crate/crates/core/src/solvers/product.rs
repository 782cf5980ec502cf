use std::collections::{HashMap, VecDeque};

use crate::domain::Game;
use crate::ltlf::Dfa;

use super::SolveError;

/// Reachable part of game x DFA.
///
/// Robot states are `(v, z)`, human states `(h, z)`. A robot move keeps the
/// DFA state; a human move into robot state `v'` advances it on `L(v')`.
/// The initial state has already read `L(v0)`.
#[derive(Clone, Debug)]
pub struct ProductGame {
    pub robot: Vec<(u32, u32)>,
    pub human: Vec<(u32, u32)>,
    pub robot_edges: Vec<Vec<(u32, u32)>>,
    pub human_edges: Vec<Vec<(u32, u32)>>,
    pub accepting: Vec<bool>,
    pub costs: Vec<u32>,
    pub initial: usize,
    robot_index: HashMap<(u32, u32), u32>,
}

impl ProductGame {
    pub fn num_states(&self) -> usize {
        self.robot.len() + self.human.len()
    }

    pub fn robot_index(&self, v: u32, z: u32) -> Option<usize> {
        self.robot_index.get(&(v, z)).map(|&i| i as usize)
    }
}

/// DFA letter of every robot state of `g`; fails if a DFA atom is not a
/// game proposition.
pub fn letter_masks(g: &Game, d: &Dfa) -> Result<Vec<usize>, SolveError> {
    let mut bit_of_prop: Vec<Option<usize>> = vec![None; g.propositions.len()];
    for (i, a) in d.atoms.iter().enumerate() {
        let p = g.prop_index(a).ok_or_else(|| SolveError::UnknownAtom(a.clone()))?;
        bit_of_prop[p] = Some(i);
    }
    Ok(g.robot_states
        .iter()
        .map(|s| s.labels.iter().filter_map(|&p| bit_of_prop[p as usize]).fold(0, |m, b| m | 1 << b))
        .collect())
}

pub fn build_product(g: &Game, d: &Dfa) -> Result<ProductGame, SolveError> {
    let masks = letter_masks(g, d)?;
    let v0 = g.initial as u32;
    let z0 = d.step(d.initial, masks[g.initial]) as u32;
    let mut p = ProductGame {
        robot: vec![(v0, z0)],
        human: Vec::new(),
        robot_edges: Vec::new(),
        human_edges: Vec::new(),
        accepting: Vec::new(),
        costs: g.robot_actions.iter().map(|a| a.cost).collect(),
        initial: 0,
        robot_index: HashMap::from([((v0, z0), 0)]),
    };
    let mut human_index: HashMap<(u32, u32), u32> = HashMap::new();
    let mut queue = VecDeque::from([0u32]);
    while let Some(r) = queue.pop_front() {
        let (v, z) = p.robot[r as usize];
        p.accepting.push(d.accepting[z as usize]);
        let mut row = Vec::new();
        for &(a, h) in &g.robot_edges[v as usize] {
            let hid = match human_index.get(&(h, z)) {
                Some(&id) => id,
                None => {
                    let id = p.human.len() as u32;
                    human_index.insert((h, z), id);
                    p.human.push((h, z));
                    let mut hrow = Vec::new();
                    for &(e, v2) in &g.human_edges[h as usize] {
                        let z2 = d.step(z as usize, masks[v2 as usize]) as u32;
                        let next = p.robot.len() as u32;
                        let id2 = *p.robot_index.entry((v2, z2)).or_insert_with(|| {
                            queue.push_back(next);
                            next
                        });
                        if id2 == next {
                            p.robot.push((v2, z2));
                        }
                        hrow.push((e, id2));
                    }
                    p.human_edges.push(hrow);
                    id
                }
            };
            row.push((a, hid));
        }
        p.robot_edges.push(row);
    }
    Ok(p)
}
