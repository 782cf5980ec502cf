use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::DomainError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Only the robot reaches these locations; it pays the far cost.
    RobotOnly,
    /// Both agents reach these; the robot pays the near cost.
    Shared,
    /// Only the human reaches these.
    HumanReachable,
}

impl Region {
    pub fn robot_reaches(self) -> bool {
        self != Region::HumanReachable
    }

    pub fn human_reaches(self) -> bool {
        self != Region::RobotOnly
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub region: Region,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Object {
    pub id: String,
    #[serde(default = "yes")]
    pub movable: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitSpec {
    #[serde(deserialize_with = "unique_map")]
    pub placements: BTreeMap<String, String>,
    #[serde(default)]
    pub gripper: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSpec {
    #[serde(deserialize_with = "unique_map")]
    pub placements: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Costs {
    pub near: u32,
    pub far: u32,
}

impl Default for Costs {
    fn default() -> Self {
        Costs { near: 1, far: 3 }
    }
}

/// Native description of a manipulation workspace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManipInstance {
    pub locations: Vec<Location>,
    pub objects: Vec<Object>,
    pub init: InitSpec,
    pub goal: GoalSpec,
    #[serde(default)]
    pub costs: Costs,
}

/// Rejects duplicate keys, which a plain map would silently overwrite.
fn unique_map<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, String>, D::Error> {
    struct V;
    impl<'de> Visitor<'de> for V {
        type Value = BTreeMap<String, String>;
        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an object mapping object ids to location ids")
        }
        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
            let mut out = BTreeMap::new();
            while let Some((k, v)) = map.next_entry::<String, String>()? {
                if out.contains_key(&k) {
                    return Err(serde::de::Error::custom(format!("object `{k}` placed twice")));
                }
                out.insert(k, v);
            }
            Ok(out)
        }
    }
    d.deserialize_map(V)
}

impl ManipInstance {
    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let inst: ManipInstance = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            DomainError::Schema { pointer: json_pointer(&path), msg: e.into_inner().to_string() }
        })?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load_json(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path).map_err(|e| DomainError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Check that every id resolves and the initial configuration is
    /// physically consistent.
    pub fn validate(&self) -> Result<(), DomainError> {
        let schema = |pointer: String, msg: String| Err(DomainError::Schema { pointer, msg });
        let mut locs = BTreeSet::new();
        for (i, l) in self.locations.iter().enumerate() {
            if !locs.insert(l.id.as_str()) {
                return schema(format!("/locations/{i}/id"), format!("duplicate location `{}`", l.id));
            }
        }
        let mut objs = BTreeSet::new();
        for (i, o) in self.objects.iter().enumerate() {
            if !objs.insert(o.id.as_str()) {
                return schema(format!("/objects/{i}/id"), format!("duplicate object `{}`", o.id));
            }
        }
        if self.locations.is_empty() {
            return schema("/locations".into(), "at least one location is required".into());
        }
        let mut taken: BTreeMap<&str, &str> = BTreeMap::new();
        for (o, l) in &self.init.placements {
            let ptr = format!("/init/placements/{}", escape(o));
            if !objs.contains(o.as_str()) {
                return schema(ptr, format!("unknown object `{o}`"));
            }
            if !locs.contains(l.as_str()) {
                return schema(ptr, format!("unknown location `{l}`"));
            }
            if let Some(other) = taken.insert(l.as_str(), o.as_str()) {
                return schema(ptr, format!("location `{l}` already holds `{other}`"));
            }
        }
        if let Some(g) = &self.init.gripper {
            if !objs.contains(g.as_str()) {
                return schema("/init/gripper".into(), format!("unknown object `{g}`"));
            }
            if self.init.placements.contains_key(g) {
                return schema("/init/gripper".into(), format!("object `{g}` is both held and placed"));
            }
            if !self.objects.iter().any(|o| &o.id == g && o.movable) {
                return schema("/init/gripper".into(), format!("immovable object `{g}` cannot be held"));
            }
        }
        for o in &self.objects {
            let held = self.init.gripper.as_deref() == Some(o.id.as_str());
            if !held && !self.init.placements.contains_key(&o.id) {
                return schema("/init/placements".into(), format!("object `{}` has no initial place", o.id));
            }
        }
        for (o, l) in &self.goal.placements {
            let ptr = format!("/goal/placements/{}", escape(o));
            if !objs.contains(o.as_str()) {
                return schema(ptr, format!("unknown object `{o}`"));
            }
            if !locs.contains(l.as_str()) {
                return schema(ptr, format!("unknown location `{l}`"));
            }
        }
        Ok(())
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    /// Name of the proposition "object `o` is at location `l`".
    pub fn prop_name(&self, o: usize, l: usize) -> String {
        format!("p_{},{}", self.objects[o].id, self.locations[l].id)
    }

    /// All placement propositions, object-major.
    pub fn propositions(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.objects.len() * self.locations.len());
        for o in 0..self.objects.len() {
            for l in 0..self.locations.len() {
                out.push(self.prop_name(o, l));
            }
        }
        out
    }

    /// Goal text `F(p_o,l & ...)` over the goal placements.
    pub fn goal_formula_text(&self) -> String {
        if self.goal.placements.is_empty() {
            return "true".into();
        }
        let parts: Vec<String> = self.goal.placements.iter().map(|(o, l)| format!("p_{o},{l}")).collect();
        format!("F({})", parts.join(" & "))
    }

    /// Robot cost of manipulating at location `l`.
    pub fn cost_at(&self, l: usize) -> u32 {
        match self.locations[l].region {
            Region::Shared | Region::HumanReachable => self.costs.near,
            Region::RobotOnly => self.costs.far,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

/// serde_path_to_error prints `a.b[0].c`; turn that into `/a/b/0/c`.
fn json_pointer(path: &str) -> String {
    if path == "." {
        return String::new();
    }
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        while let Some(open) = rest.find('[') {
            let (name, tail) = rest.split_at(open);
            if !name.is_empty() {
                out.push('/');
                out.push_str(&escape(name));
            }
            let close = tail.find(']').unwrap_or(tail.len() - 1);
            out.push('/');
            out.push_str(&tail[1..close]);
            rest = &tail[close + 1..];
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(&escape(rest));
        }
    }
    out
}
