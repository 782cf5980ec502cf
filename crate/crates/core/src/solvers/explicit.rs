use crate::Value;

use super::product::ProductGame;

/// Values and a memoryless strategy on a [`ProductGame`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitSolution {
    pub robot_values: Vec<Value>,
    pub human_values: Vec<Value>,
    /// Chosen robot action per robot product state; `None` where losing or
    /// accepting.
    pub strategy: Vec<Option<u32>>,
    /// Rounds that changed at least one value.
    pub iterations: usize,
}

impl ExplicitSolution {
    pub fn initial_value(&self, p: &ProductGame) -> Value {
        self.robot_values[p.initial]
    }
}

/// Min-max value iteration: robot states take the cheapest action, human
/// states the worst response, accepting robot states are worth 0.
/// Synchronous rounds from `W = inf` until nothing changes.
pub fn explicit_vi(p: &ProductGame) -> ExplicitSolution {
    let nr = p.robot.len();
    let mut w: Vec<Value> = p.accepting.iter().map(|&a| if a { Value::ZERO } else { Value::Infinity }).collect();
    let mut wh = vec![Value::Infinity; p.human.len()];
    let mut iterations = 0;
    loop {
        let next_h: Vec<Value> = p
            .human_edges
            .iter()
            .map(|row| row.iter().map(|&(_, r)| w[r as usize]).max().unwrap_or(Value::Infinity))
            .collect();
        let next_r: Vec<Value> = (0..nr)
            .map(|r| {
                if p.accepting[r] {
                    return Value::ZERO;
                }
                p.robot_edges[r]
                    .iter()
                    .map(|&(a, h)| wh[h as usize].add_cost(p.costs[a as usize] as u64))
                    .min()
                    .unwrap_or(Value::Infinity)
            })
            .collect();
        if next_h == wh && next_r == w {
            break;
        }
        w = next_r;
        wh = next_h;
        iterations += 1;
    }
    let strategy = (0..nr)
        .map(|r| {
            if p.accepting[r] || !w[r].is_finite() {
                return None;
            }
            p.robot_edges[r]
                .iter()
                .filter(|&&(a, h)| wh[h as usize].add_cost(p.costs[a as usize] as u64) == w[r])
                .map(|&(a, _)| a)
                .min()
        })
        .collect();
    ExplicitSolution { robot_values: w, human_values: wh, strategy, iterations }
}
