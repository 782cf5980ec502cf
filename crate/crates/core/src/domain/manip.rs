use crate::ltlf::bits_for;

use super::game::ActionInfo;
use super::instance::ManipInstance;
use super::DomainModel;

/// Place of every object: a location index, or `|L|` for the gripper.
pub type Config = Vec<u16>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RobotOp {
    Grasp,
    Release,
}

/// Game view of a [`ManipInstance`].
///
/// Robot actions are `grasp(o,l)` and `release(o,l)` for every movable
/// object and robot-reachable location; the human may `relocate(o,l)` an
/// object between human-reachable locations or do nothing.
#[derive(Clone, Debug)]
pub struct ManipModel {
    pub inst: ManipInstance,
    robot: Vec<(RobotOp, usize, usize, u32)>,
    human: Vec<(usize, usize)>,
    field_width: usize,
}

impl ManipModel {
    pub fn new(inst: ManipInstance) -> Self {
        let mut robot = Vec::new();
        let mut human = Vec::new();
        for (o, obj) in inst.objects.iter().enumerate() {
            if !obj.movable {
                continue;
            }
            for (l, loc) in inst.locations.iter().enumerate() {
                if loc.region.robot_reaches() {
                    let c = inst.cost_at(l);
                    robot.push((RobotOp::Grasp, o, l, c));
                    robot.push((RobotOp::Release, o, l, c));
                }
            }
            for (l, loc) in inst.locations.iter().enumerate() {
                if loc.region.human_reaches() {
                    human.push((o, l));
                }
            }
        }
        let field_width = bits_for(inst.locations.len() + 1);
        ManipModel { inst, robot, human, field_width }
    }

    fn gripper(&self) -> u16 {
        self.inst.locations.len() as u16
    }

    fn occupied(&self, c: &Config, l: usize) -> bool {
        c.iter().any(|&p| p as usize == l)
    }

    /// Location manipulated by robot action `a`.
    pub fn robot_action_location(&self, a: usize) -> usize {
        self.robot[a].2
    }

    pub fn config_of(&self, code: u128) -> Config {
        let n = self.inst.objects.len();
        (0..n)
            .map(|o| {
                let shift = (n - 1 - o) * self.field_width;
                ((code >> shift) & ((1 << self.field_width) - 1)) as u16
            })
            .collect()
    }
}

impl DomainModel for ManipModel {
    type State = Config;

    fn initial(&self) -> Config {
        self.inst
            .objects
            .iter()
            .map(|o| match self.inst.init.placements.get(&o.id) {
                Some(l) => self.inst.location_index(l).expect("validated") as u16,
                None => self.gripper(),
            })
            .collect()
    }

    fn propositions(&self) -> Vec<String> {
        self.inst.propositions()
    }

    fn labels(&self, s: &Config) -> Vec<u32> {
        let nl = self.inst.locations.len();
        s.iter().enumerate().filter(|(_, &p)| (p as usize) < nl).map(|(o, &p)| (o * nl + p as usize) as u32).collect()
    }

    fn robot_actions(&self) -> Vec<ActionInfo> {
        self.robot
            .iter()
            .map(|&(op, o, l, cost)| {
                let verb = match op {
                    RobotOp::Grasp => "grasp",
                    RobotOp::Release => "release",
                };
                ActionInfo { name: format!("{verb}({},{})", self.inst.objects[o].id, self.inst.locations[l].id), cost }
            })
            .collect()
    }

    fn human_actions(&self) -> Vec<String> {
        let mut out = vec!["noop".to_string()];
        for &(o, l) in &self.human {
            out.push(format!("relocate({},{})", self.inst.objects[o].id, self.inst.locations[l].id));
        }
        out
    }

    fn robot_successors(&self, s: &Config) -> Vec<(u32, Config)> {
        let g = self.gripper();
        let holding = s.iter().position(|&p| p == g);
        let mut out = Vec::new();
        for (a, &(op, o, l, _)) in self.robot.iter().enumerate() {
            let ok = match op {
                RobotOp::Grasp => holding.is_none() && s[o] as usize == l,
                RobotOp::Release => holding == Some(o) && !self.occupied(s, l),
            };
            if ok {
                let mut t = s.clone();
                t[o] = if op == RobotOp::Grasp { g } else { l as u16 };
                out.push((a as u32, t));
            }
        }
        out
    }

    fn human_successors(&self, s: &Config) -> Vec<(u32, Config)> {
        let mut out = vec![(0, s.clone())];
        for (i, &(o, to)) in self.human.iter().enumerate() {
            let from = s[o] as usize;
            let reachable = self.inst.locations.get(from).is_some_and(|loc| loc.region.human_reaches());
            if reachable && from != to && !self.occupied(s, to) {
                let mut t = s.clone();
                t[o] = to as u16;
                out.push((i as u32 + 1, t));
            }
        }
        out
    }

    fn state_code(&self, s: &Config) -> Option<(u128, usize)> {
        let mut code = 0u128;
        for &p in s {
            code = code << self.field_width | p as u128;
        }
        Some((code, self.field_width * s.len()))
    }

    fn describe(&self, s: &Config) -> String {
        let g = self.gripper();
        let parts: Vec<String> = s
            .iter()
            .enumerate()
            .map(|(o, &p)| {
                let place = if p == g { "gripper" } else { self.inst.locations[p as usize].id.as_str() };
                format!("{}@{place}", self.inst.objects[o].id)
            })
            .collect();
        parts.join(" ")
    }
}
