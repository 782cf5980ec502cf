use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ltlf::bits_for;

use super::{DomainError, DomainModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionInfo {
    pub name: String,
    pub cost: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateInfo {
    pub name: String,
    pub code: u128,
    /// Proposition indices true here, ascending.
    pub labels: Vec<u32>,
}

/// Explicit turn-based game. Robot states and human states live in separate
/// index spaces; robot moves lead to human states and human moves lead back.
/// Only robot moves cost anything.
#[derive(Clone, Debug)]
pub struct Game {
    pub propositions: Vec<String>,
    pub robot_actions: Vec<ActionInfo>,
    pub human_actions: Vec<String>,
    pub robot_states: Vec<StateInfo>,
    pub human_states: Vec<StateInfo>,
    /// `(robot action, human state)` per robot state, ascending by action.
    pub robot_edges: Vec<Vec<(u32, u32)>>,
    /// `(human action, robot state)` per human state, ascending by action.
    pub human_edges: Vec<Vec<(u32, u32)>>,
    pub initial: usize,
    pub code_width: usize,
}

impl Game {
    pub fn cost(&self, robot_action: u32) -> u32 {
        self.robot_actions[robot_action as usize].cost
    }

    pub fn num_robot_edges(&self) -> usize {
        self.robot_edges.iter().map(Vec::len).sum()
    }

    pub fn num_human_edges(&self) -> usize {
        self.human_edges.iter().map(Vec::len).sum()
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.propositions.iter().position(|p| p == name)
    }

    pub fn label_names(&self, labels: &[u32]) -> Vec<&str> {
        labels.iter().map(|&p| self.propositions[p as usize].as_str()).collect()
    }

    /// Distinct robot action costs, ascending.
    pub fn cost_classes(&self) -> Vec<u32> {
        let mut cs: Vec<u32> = self.robot_actions.iter().map(|a| a.cost).collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    }
}

/// Unfold `model` from its initial state, alternating robot and human turns.
pub fn build_game<M: DomainModel>(model: &M, max_states: usize) -> Result<Game, DomainError> {
    let start = model.initial();
    let mut robot_ids: HashMap<M::State, u32> = HashMap::new();
    let mut human_ids: HashMap<M::State, u32> = HashMap::new();
    let mut robot_list = vec![start.clone()];
    let mut human_list: Vec<M::State> = Vec::new();
    robot_ids.insert(start, 0);
    let mut robot_edges: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut human_edges: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut queue = VecDeque::from([0u32]);
    let over = |r: usize, h: usize| r + h > max_states;

    while let Some(r) = queue.pop_front() {
        let s = robot_list[r as usize].clone();
        let mut row = Vec::new();
        for (a, t) in model.robot_successors(&s) {
            let h = match human_ids.get(&t) {
                Some(&h) => h,
                None => {
                    let h = human_list.len() as u32;
                    human_ids.insert(t.clone(), h);
                    human_list.push(t.clone());
                    if over(robot_list.len(), human_list.len()) {
                        return Err(DomainError::StateCap {
                            cap: max_states,
                            seen: robot_list.len() + human_list.len(),
                        });
                    }
                    let mut hrow = Vec::new();
                    for (e, t2) in model.human_successors(&t) {
                        let v = match robot_ids.get(&t2) {
                            Some(&v) => v,
                            None => {
                                let v = robot_list.len() as u32;
                                robot_ids.insert(t2.clone(), v);
                                robot_list.push(t2);
                                if over(robot_list.len(), human_list.len()) {
                                    return Err(DomainError::StateCap {
                                        cap: max_states,
                                        seen: robot_list.len() + human_list.len(),
                                    });
                                }
                                queue.push_back(v);
                                v
                            }
                        };
                        hrow.push((e, v));
                    }
                    human_edges.push(hrow);
                    h
                }
            };
            row.push((a, h));
        }
        robot_edges.push(row);
    }

    let infos = |list: &[M::State]| -> (Vec<StateInfo>, usize) {
        let mut width = 0;
        let out = list
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let code = match model.state_code(s) {
                    Some((c, w)) => {
                        width = w;
                        c
                    }
                    None => {
                        width = bits_for(list.len());
                        i as u128
                    }
                };
                StateInfo { name: model.describe(s), code, labels: model.labels(s) }
            })
            .collect();
        (out, width)
    };
    let (robot_states, w1) = infos(&robot_list);
    let (human_states, w2) = infos(&human_list);
    Ok(Game {
        propositions: model.propositions(),
        robot_actions: model.robot_actions(),
        human_actions: model.human_actions(),
        robot_states,
        human_states,
        robot_edges,
        human_edges,
        initial: 0,
        code_width: w1.max(w2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointEdge {
    pub robot: u32,
    pub human: u32,
    pub target: u32,
}

/// The game with human states folded into joint robot/human edges.
#[derive(Clone, Debug)]
pub struct AbstractedGame {
    pub propositions: Vec<String>,
    pub robot_actions: Vec<ActionInfo>,
    pub human_actions: Vec<String>,
    pub states: Vec<StateInfo>,
    /// Joint edges per state, ascending by `(robot, human)`.
    pub edges: Vec<Vec<JointEdge>>,
    pub initial: usize,
    pub code_width: usize,
}

impl AbstractedGame {
    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn cost(&self, robot_action: u32) -> u32 {
        self.robot_actions[robot_action as usize].cost
    }

    pub fn cost_classes(&self) -> Vec<u32> {
        let mut cs: Vec<u32> = self.robot_actions.iter().map(|a| a.cost).collect();
        cs.sort_unstable();
        cs.dedup();
        cs
    }
}

pub fn abstract_game(g: &Game) -> AbstractedGame {
    let edges = g
        .robot_edges
        .iter()
        .map(|row| {
            let mut out: Vec<JointEdge> = row
                .iter()
                .flat_map(|&(a, h)| {
                    g.human_edges[h as usize].iter().map(move |&(e, v)| JointEdge { robot: a, human: e, target: v })
                })
                .collect();
            out.sort_unstable();
            out
        })
        .collect();
    AbstractedGame {
        propositions: g.propositions.clone(),
        robot_actions: g.robot_actions.clone(),
        human_actions: g.human_actions.clone(),
        states: g.robot_states.clone(),
        edges,
        initial: g.initial,
        code_width: g.code_width,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ManipInstance, ManipModel, DEFAULT_MAX_STATES};

    fn one_box() -> ManipInstance {
        ManipInstance::from_json(
            r#"{"locations": [{"id": "l0", "region": "robot-only"}, {"id": "l1", "region": "shared"}],
                "objects": [{"id": "b0", "movable": true}],
                "init": {"placements": {"b0": "l1"}, "gripper": null},
                "goal": {"placements": {"b0": "l0"}},
                "costs": {"near": 1, "far": 3}}"#,
        )
        .unwrap()
    }

    #[test]
    fn one_box_two_locations_has_three_robot_states() {
        let m = ManipModel::new(one_box());
        let g = build_game(&m, DEFAULT_MAX_STATES).unwrap();
        let mut names: Vec<&str> = g.robot_states.iter().map(|s| s.name.as_str()).collect();
        names.sort();
        assert_eq!(names, ["b0@gripper", "b0@l0", "b0@l1"]);
        assert_eq!(g.robot_actions.len(), 4);
    }

    #[test]
    fn abstraction_counts_turn_pairs() {
        let m = ManipModel::new(one_box());
        let g = build_game(&m, DEFAULT_MAX_STATES).unwrap();
        let pairs: usize = g.robot_edges.iter().flatten().map(|&(_, h)| g.human_edges[h as usize].len()).sum();
        assert_eq!(abstract_game(&g).num_edges(), pairs);
    }

    #[test]
    fn state_cap_is_reported() {
        let m = ManipModel::new(one_box());
        assert!(matches!(build_game(&m, 2), Err(DomainError::StateCap { cap: 2, .. })));
    }
}
