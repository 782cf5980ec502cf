use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::game::{ActionInfo, Game, StateInfo};
use super::instance::{Costs, GoalSpec, InitSpec, Location, ManipInstance, Object, Region};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchParams {
    pub locations: usize,
    pub objects: usize,
    pub seed: u64,
    pub cost_near: u32,
    pub cost_far: u32,
    /// Share of locations the human can reach (shared plus human-only).
    pub human_fraction: f64,
}

impl BenchParams {
    pub fn new(locations: usize, objects: usize, seed: u64) -> Self {
        BenchParams { locations, objects, seed, cost_near: 1, cost_far: 3, human_fraction: 0.3 }
    }
}

/// Seeded pick-and-place instance.
///
/// Goals prefer robot-only locations; every object starts somewhere other
/// than its goal. Panics unless `2 <= |L|` and `1 <= |O| <= |L|`.
pub fn gen_benchmark(p: &BenchParams) -> ManipInstance {
    assert!(p.locations >= 2 && p.objects >= 1 && p.objects <= p.locations, "bad benchmark shape");
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let nl = p.locations;
    let accessible = ((nl as f64 * p.human_fraction).round() as usize).min(nl - 1);
    let shared = accessible.div_ceil(2);
    let mut regions = vec![Region::RobotOnly; nl - accessible];
    regions.extend(std::iter::repeat_n(Region::Shared, shared));
    regions.extend(std::iter::repeat_n(Region::HumanReachable, accessible - shared));
    regions.shuffle(&mut rng);

    let by_region = |r: Region| -> Vec<usize> { (0..nl).filter(|&l| regions[l] == r).collect() };
    let mut goal_pool = by_region(Region::RobotOnly);
    goal_pool.shuffle(&mut rng);
    let mut rest = by_region(Region::Shared);
    rest.shuffle(&mut rng);
    goal_pool.extend(rest);
    let mut rest = by_region(Region::HumanReachable);
    rest.shuffle(&mut rng);
    goal_pool.extend(rest);
    let goals: Vec<usize> = goal_pool[..p.objects].to_vec();

    let mut robot_side: Vec<usize> = (0..nl).filter(|&l| regions[l].robot_reaches()).collect();
    let mut human_side: Vec<usize> = (0..nl).filter(|&l| !regions[l].robot_reaches()).collect();
    let mut init = Vec::new();
    for _ in 0..64 {
        robot_side.shuffle(&mut rng);
        human_side.shuffle(&mut rng);
        let pool: Vec<usize> = robot_side.iter().chain(human_side.iter()).copied().collect();
        init = assign_avoiding(&pool, &goals);
        if !init.is_empty() {
            break;
        }
    }
    if init.is_empty() {
        // every location is someone's goal: rotate the goals
        init = (0..p.objects).map(|o| goals[(o + 1) % p.objects]).collect();
    }

    let locations = (0..nl).map(|l| Location { id: format!("l{l}"), region: regions[l] }).collect();
    let objects: Vec<Object> = (0..p.objects).map(|o| Object { id: format!("b{o}"), movable: true }).collect();
    let placements = |ls: &[usize]| -> BTreeMap<String, String> {
        ls.iter().enumerate().map(|(o, l)| (format!("b{o}"), format!("l{l}"))).collect()
    };
    ManipInstance {
        locations,
        objects,
        init: InitSpec { placements: placements(&init), gripper: None },
        goal: GoalSpec { placements: placements(&goals) },
        costs: Costs { near: p.cost_near, far: p.cost_far },
    }
}

/// Distinct locations from `pool` (in pool order) with `out[o] != goals[o]`;
/// empty if the greedy pass gets stuck.
fn assign_avoiding(pool: &[usize], goals: &[usize]) -> Vec<usize> {
    let mut used = vec![false; pool.len()];
    let mut out = Vec::with_capacity(goals.len());
    for &g in goals {
        match (0..pool.len()).find(|&i| !used[i] && pool[i] != g) {
            Some(i) => {
                used[i] = true;
                out.push(pool[i]);
            }
            None => return Vec::new(),
        }
    }
    out
}

/// Member `seed` of the two-region family. Two or three objects start in
/// the robot's region. The task is done once the first object reaches the
/// human's side, or once every object sits on its own robot-only target.
/// There is a single shared hand-over spot and one or two human-only spots;
/// seeds also vary an extra robot-only spot and the location order.
///
/// Returns the instance and its task formula.
pub fn two_region(seed: u64) -> (ManipInstance, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=3);
    let mut locs: Vec<(String, Region)> = Vec::new();
    for i in 1..=k {
        locs.push((format!("r{i}"), Region::RobotOnly));
        locs.push((format!("t{i}"), Region::RobotOnly));
    }
    if rng.gen_bool(0.5) {
        locs.push(("spare".into(), Region::RobotOnly));
    }
    locs.push(("s".into(), Region::Shared));
    let humans = rng.gen_range(1..=2);
    for i in 1..=humans {
        locs.push((format!("h{i}"), Region::HumanReachable));
    }
    locs.shuffle(&mut rng);

    let inst = ManipInstance {
        locations: locs.into_iter().map(|(id, region)| Location { id, region }).collect(),
        objects: (1..=k).map(|i| Object { id: format!("x{i}"), movable: true }).collect(),
        init: InitSpec { placements: (1..=k).map(|i| (format!("x{i}"), format!("r{i}"))).collect(), gripper: None },
        goal: GoalSpec { placements: (1..=k).map(|i| (format!("x{i}"), format!("t{i}"))).collect() },
        costs: Costs::default(),
    };
    let handed = (1..=humans).map(|i| format!("p_x1,h{i}")).collect::<Vec<_>>().join(" | ");
    let stowed = (1..=k).map(|i| format!("F(p_x{i},t{i})")).collect::<Vec<_>>().join(" & ");
    (inst, format!("F({handed}) | ({stowed})"))
}

/// Small random instance with a reach-all-goals task: one or two objects,
/// two to four locations, near/far costs 1 and 3.
pub fn random_small(seed: u64) -> (ManipInstance, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let objects = rng.gen_range(1..=2);
    let locations = rng.gen_range(objects + 1..=4);
    let fraction = [0.25, 0.4, 0.5][rng.gen_range(0..3)];
    let p = BenchParams { human_fraction: fraction, ..BenchParams::new(locations, objects, rng.gen()) };
    let inst = gen_benchmark(&p);
    let formula = inst.goal_formula_text();
    (inst, formula)
}

/// Shape of a [`random_game`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomGameParams {
    pub robot_states: usize,
    pub robot_actions: usize,
    pub human_actions: usize,
    pub propositions: usize,
    /// Costs are drawn from this list.
    pub costs: &'static [u32],
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams { robot_states: 6, robot_actions: 3, human_actions: 2, propositions: 2, costs: &[1, 3] }
    }
}

/// Unstructured random game: every robot move gets its own human state,
/// whose moves (no-op included) lead to random robot states. Propositions
/// are named `p0, p1, ...`.
pub fn random_game(seed: u64, p: &RandomGameParams) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.robot_states.max(1);
    let robot_actions: Vec<ActionInfo> = (0..p.robot_actions)
        .map(|a| ActionInfo { name: format!("a{a}"), cost: p.costs[rng.gen_range(0..p.costs.len())] })
        .collect();
    let human_actions: Vec<String> =
        std::iter::once("noop".to_string()).chain((1..=p.human_actions).map(|e| format!("e{e}"))).collect();
    let mut robot_edges = Vec::with_capacity(n);
    let mut human_edges = Vec::new();
    let mut human_states = Vec::new();
    for _ in 0..n {
        let mut row = Vec::new();
        for a in 0..p.robot_actions as u32 {
            if !rng.gen_bool(0.6) {
                continue;
            }
            let h = human_edges.len() as u32;
            let mut hrow = vec![(0, rng.gen_range(0..n) as u32)];
            for e in 1..=p.human_actions as u32 {
                if rng.gen_bool(0.4) {
                    hrow.push((e, rng.gen_range(0..n) as u32));
                }
            }
            human_edges.push(hrow);
            human_states.push(StateInfo { name: format!("h{h}"), code: h as u128, labels: Vec::new() });
            row.push((a, h));
        }
        robot_edges.push(row);
    }
    let robot_states = (0..n)
        .map(|v| StateInfo {
            name: format!("v{v}"),
            code: v as u128,
            labels: (0..p.propositions as u32).filter(|_| rng.gen_bool(0.3)).collect(),
        })
        .collect();
    Game {
        propositions: (0..p.propositions).map(|i| format!("p{i}")).collect(),
        robot_actions,
        human_actions,
        robot_states,
        human_states,
        robot_edges,
        human_edges,
        initial: 0,
        code_width: crate::ltlf::bits_for(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_game, ManipModel, DEFAULT_MAX_STATES};

    #[test]
    fn defaults_split_costs_one_and_three() {
        let p = BenchParams::new(6, 2, 1);
        assert_eq!((p.cost_near, p.cost_far), (1, 3));
        let inst = gen_benchmark(&p);
        for (l, loc) in inst.locations.iter().enumerate() {
            let want = if loc.region == Region::RobotOnly { 3 } else { 1 };
            assert_eq!(inst.cost_at(l), want);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let p = BenchParams::new(7, 3, 42);
        assert_eq!(gen_benchmark(&p).to_json(), gen_benchmark(&p).to_json());
        let q = BenchParams { seed: 43, ..p };
        assert_ne!(gen_benchmark(&p).to_json(), gen_benchmark(&q).to_json());
    }

    #[test]
    fn generated_instances_validate() {
        for seed in 0..40 {
            for (nl, no) in [(2, 1), (3, 2), (4, 3), (5, 5), (8, 6)] {
                let inst = gen_benchmark(&BenchParams::new(nl, no, seed));
                inst.validate().unwrap();
                for (o, l) in &inst.init.placements {
                    assert_ne!(inst.goal.placements.get(o), Some(l), "{seed} {nl} {no}");
                }
            }
        }
    }

    #[test]
    fn scenario_axis_builds_under_default_cap() {
        for no in 2..=4 {
            let inst = gen_benchmark(&BenchParams::new(8, no, 7));
            build_game(&ManipModel::new(inst), DEFAULT_MAX_STATES).unwrap();
        }
    }

    #[test]
    fn two_region_family_is_valid() {
        for seed in 0..10 {
            let (inst, _) = two_region(seed);
            inst.validate().unwrap();
            assert!(inst.locations.iter().any(|l| l.region == Region::Shared));
        }
    }
}
