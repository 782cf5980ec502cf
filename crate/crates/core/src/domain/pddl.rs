//! Typed STRIPS front end: parsing, grounding and the game view.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::game::ActionInfo;
use super::{DomainError, DomainModel};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v, _) => Some(v),
            Sexp::Atom(..) => None,
        }
    }

    fn head(&self) -> Option<&str> {
        self.list().and_then(|v| v.first()).and_then(Sexp::atom)
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> DomainError {
    DomainError::PddlSyntax { line, msg: msg.into() }
}

fn read_sexp(text: &str) -> Result<Sexp, DomainError> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = Vec::new();
    let mut done: Option<Sexp> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let code = raw.split(';').next().unwrap_or("");
        let spaced = code.replace('(', " ( ").replace(')', " ) ");
        for tok in spaced.split_whitespace() {
            if done.is_some() {
                return Err(syntax(line, "trailing input after the top-level form"));
            }
            match tok {
                "(" => stack.push((Vec::new(), line)),
                ")" => {
                    let (items, start) = stack.pop().ok_or_else(|| syntax(line, "unbalanced `)`"))?;
                    let node = Sexp::List(items, start);
                    match stack.last_mut() {
                        Some((parent, _)) => parent.push(node),
                        None => done = Some(node),
                    }
                }
                t => match stack.last_mut() {
                    Some((parent, _)) => parent.push(Sexp::Atom(t.to_ascii_lowercase(), line)),
                    None => return Err(syntax(line, format!("unexpected `{t}` outside a form"))),
                },
            }
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(syntax(*start, "unclosed `(`"));
    }
    done.ok_or_else(|| syntax(1, "empty input"))
}

/// `a b - t c - u d` into `[(a,t),(b,t),(c,u),(d,object)]`.
fn typed_list(items: &[Sexp]) -> Result<Vec<(String, String)>, DomainError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let line = items[i].line();
        let name = items[i].atom().ok_or_else(|| match items[i].head() {
            Some("either") => DomainError::Unsupported("either".into()),
            _ => syntax(line, "expected a name in a typed list"),
        })?;
        if name == "-" {
            let ty = items.get(i + 1).ok_or_else(|| syntax(line, "missing type after `-`"))?;
            let ty = match ty.atom() {
                Some(t) => t.to_string(),
                None if ty.head() == Some("either") => return Err(DomainError::Unsupported("either".into())),
                None => return Err(syntax(line, "type must be a name")),
            };
            out.extend(pending.drain(..).map(|n| (n, ty.clone())));
            i += 2;
        } else {
            pending.push(name.to_string());
            i += 1;
        }
    }
    out.extend(pending.drain(..).map(|n| (n, "object".to_string())));
    Ok(out)
}

#[derive(Clone, Debug)]
enum Term {
    Var(usize),
    Const(String),
}

#[derive(Clone, Debug)]
struct Literal {
    positive: bool,
    pred: String,
    args: Vec<Term>,
}

#[derive(Clone, Debug, Default)]
struct Condition {
    lits: Vec<Literal>,
    /// `(=, a, b)` pairs with polarity.
    eqs: Vec<(bool, Term, Term)>,
}

#[derive(Clone, Debug)]
struct Schema {
    name: String,
    params: Vec<(String, String)>,
    pre: Condition,
    effects: Vec<Literal>,
}

const UNSUPPORTED_FORMS: &[&str] = &[
    "or",
    "imply",
    "exists",
    "forall",
    "when",
    "increase",
    "decrease",
    "assign",
    "scale-up",
    "scale-down",
    "<",
    ">",
    "<=",
    ">=",
    "+",
    "-",
    "*",
    "/",
];

fn parse_term(s: &Sexp, params: &[(String, String)]) -> Result<Term, DomainError> {
    let a = s.atom().ok_or_else(|| DomainError::Unsupported("nested term".into()))?;
    if a.starts_with('?') {
        params
            .iter()
            .position(|(n, _)| n == a)
            .map(Term::Var)
            .ok_or_else(|| syntax(s.line(), format!("unknown parameter `{a}`")))
    } else {
        Ok(Term::Const(a.to_string()))
    }
}

fn parse_condition(
    s: &Sexp,
    params: &[(String, String)],
    positive: bool,
    out: &mut Condition,
    allow_eq: bool,
) -> Result<(), DomainError> {
    let items = s.list().ok_or_else(|| syntax(s.line(), "expected a formula"))?;
    let head = match items.first().and_then(Sexp::atom) {
        Some(h) => h,
        None if items.is_empty() => return Ok(()),
        None => return Err(syntax(s.line(), "formula must start with a name")),
    };
    if UNSUPPORTED_FORMS.contains(&head) {
        return Err(DomainError::Unsupported(head.to_string()));
    }
    match head {
        "and" => {
            if !positive {
                return Err(DomainError::Unsupported("not over and".into()));
            }
            for c in &items[1..] {
                parse_condition(c, params, true, out, allow_eq)?;
            }
        }
        "not" => {
            if !positive {
                return Err(DomainError::Unsupported("double negation".into()));
            }
            let inner = items.get(1).ok_or_else(|| syntax(s.line(), "empty `not`"))?;
            parse_condition(inner, params, false, out, allow_eq)?;
        }
        "=" => {
            if !allow_eq || items.len() != 3 {
                return Err(DomainError::Unsupported("=".into()));
            }
            out.eqs.push((positive, parse_term(&items[1], params)?, parse_term(&items[2], params)?));
        }
        pred => {
            let args = items[1..].iter().map(|t| parse_term(t, params)).collect::<Result<_, _>>()?;
            out.lits.push(Literal { positive, pred: pred.to_string(), args });
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
struct DomainDef {
    types: BTreeMap<String, String>,
    constants: Vec<(String, String)>,
    predicates: BTreeMap<String, Vec<String>>,
    schemas: Vec<Schema>,
}

const REQUIREMENTS: &[&str] = &[":strips", ":typing", ":negative-preconditions", ":equality"];

fn parse_domain(text: &str) -> Result<DomainDef, DomainError> {
    let top = read_sexp(text)?;
    let items = top.list().filter(|_| top.head() == Some("define"));
    let items = items.ok_or_else(|| syntax(top.line(), "expected `(define (domain ...) ...)`"))?;
    let mut d =
        DomainDef { types: BTreeMap::new(), constants: Vec::new(), predicates: BTreeMap::new(), schemas: Vec::new() };
    for sec in &items[1..] {
        let body = sec.list().ok_or_else(|| syntax(sec.line(), "expected a section"))?;
        match sec.head() {
            Some("domain") => {}
            Some(":requirements") => {
                for r in &body[1..] {
                    let r = r.atom().unwrap_or("?");
                    if !REQUIREMENTS.contains(&r) {
                        return Err(DomainError::Unsupported(r.to_string()));
                    }
                }
            }
            Some(":types") => {
                for (t, parent) in typed_list(&body[1..])? {
                    d.types.insert(t, parent);
                }
            }
            Some(":constants") => d.constants = typed_list(&body[1..])?,
            Some(":predicates") => {
                for p in &body[1..] {
                    let pl = p.list().ok_or_else(|| syntax(p.line(), "expected a predicate"))?;
                    let name = p.head().ok_or_else(|| syntax(p.line(), "predicate needs a name"))?;
                    let args = typed_list(&pl[1..])?.into_iter().map(|(_, t)| t).collect();
                    d.predicates.insert(name.to_string(), args);
                }
            }
            Some(":action") => d.schemas.push(parse_action(body)?),
            Some(other) => return Err(DomainError::Unsupported(other.to_string())),
            None => return Err(syntax(sec.line(), "section needs a keyword")),
        }
    }
    Ok(d)
}

fn parse_action(body: &[Sexp]) -> Result<Schema, DomainError> {
    let line = body[0].line();
    let name = body.get(1).and_then(Sexp::atom).ok_or_else(|| syntax(line, "action needs a name"))?.to_string();
    let mut params = Vec::new();
    let mut pre = Condition::default();
    let mut eff = Condition::default();
    let mut i = 2;
    while i < body.len() {
        let key = body[i].atom().ok_or_else(|| syntax(body[i].line(), "expected an action keyword"))?;
        let val = body.get(i + 1).ok_or_else(|| syntax(body[i].line(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                params = typed_list(val.list().ok_or_else(|| syntax(val.line(), "parameters must be a list"))?)?
            }
            ":precondition" => parse_condition(val, &params, true, &mut pre, true)?,
            ":effect" => parse_condition(val, &params, true, &mut eff, false)?,
            other => return Err(DomainError::Unsupported(other.to_string())),
        }
        i += 2;
    }
    Ok(Schema { name, params, pre, effects: eff.lits })
}

#[derive(Clone, Debug)]
struct ProblemDef {
    objects: Vec<(String, String)>,
    init: Vec<(String, Vec<String>)>,
    goal: Condition,
}

fn parse_problem(text: &str) -> Result<ProblemDef, DomainError> {
    let top = read_sexp(text)?;
    let items = top.list().filter(|_| top.head() == Some("define"));
    let items = items.ok_or_else(|| syntax(top.line(), "expected `(define (problem ...) ...)`"))?;
    let mut p = ProblemDef { objects: Vec::new(), init: Vec::new(), goal: Condition::default() };
    for sec in &items[1..] {
        let body = sec.list().ok_or_else(|| syntax(sec.line(), "expected a section"))?;
        match sec.head() {
            Some("problem") | Some(":domain") => {}
            Some(":requirements") => {}
            Some(":objects") => p.objects = typed_list(&body[1..])?,
            Some(":init") => {
                for f in &body[1..] {
                    let fl = f.list().ok_or_else(|| syntax(f.line(), "init facts must be lists"))?;
                    let pred = f.head().ok_or_else(|| syntax(f.line(), "fact needs a predicate"))?;
                    if pred == "=" || pred == "not" {
                        return Err(DomainError::Unsupported(format!("{pred} in :init")));
                    }
                    let args = fl[1..]
                        .iter()
                        .map(|a| {
                            a.atom().map(str::to_string).ok_or_else(|| syntax(a.line(), "fact arguments must be names"))
                        })
                        .collect::<Result<_, _>>()?;
                    p.init.push((pred.to_string(), args));
                }
            }
            Some(":goal") => {
                let g = body.get(1).ok_or_else(|| syntax(sec.line(), "empty goal"))?;
                parse_condition(g, &[], true, &mut p.goal, false)?;
            }
            Some(other) => return Err(DomainError::Unsupported(other.to_string())),
            None => return Err(syntax(sec.line(), "section needs a keyword")),
        }
    }
    Ok(p)
}

/// Capability sidecar: which action schemas belong to the human, and what
/// each robot action costs. Cost keys may name a schema or a ground action
/// such as `grasp(b0,l1)`; ground names take precedence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    #[serde(default)]
    pub human_actions: Vec<String>,
    #[serde(default)]
    pub costs: BTreeMap<String, u32>,
}

impl Caps {
    pub fn from_json(text: &str) -> Result<Caps, DomainError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| DomainError::Schema {
            pointer: format!("/{}", e.path()).replace('.', "/"),
            msg: e.into_inner().to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GroundAction {
    name: String,
    cost: u32,
    pre_pos: Vec<u32>,
    pre_neg: Vec<u32>,
    add: Vec<u32>,
    del: Vec<u32>,
}

/// A grounded STRIPS problem split into robot and human actions.
#[derive(Clone, Debug)]
pub struct StripsInstance {
    pub atoms: Vec<String>,
    init: Vec<u64>,
    robot: Vec<GroundAction>,
    human: Vec<GroundAction>,
    goal_pos: Vec<u32>,
    goal_neg: Vec<u32>,
}

/// Ground a typed STRIPS domain/problem pair. Every type-consistent
/// parameter tuple becomes an action; atom `(at b0 l1)` is named `at_b0_l1`.
pub fn parse_pddl(domain_text: &str, problem_text: &str, caps: &Caps) -> Result<StripsInstance, DomainError> {
    let d = parse_domain(domain_text)?;
    let p = parse_problem(problem_text)?;
    for h in &caps.human_actions {
        if !d.schemas.iter().any(|s| &s.name == h) {
            return Err(DomainError::Schema {
                pointer: "/human_actions".into(),
                msg: format!("unknown action schema `{h}`"),
            });
        }
    }

    let mut objects: Vec<(String, String)> = d.constants.clone();
    objects.extend(p.objects.iter().cloned());
    let is_a = |ty: &str, want: &str| -> bool {
        let mut t = ty.to_string();
        for _ in 0..=d.types.len() {
            if t == want {
                return true;
            }
            match d.types.get(&t) {
                Some(parent) => t = parent.clone(),
                None => return want == "object",
            }
        }
        false
    };
    let members =
        |ty: &str| -> Vec<&str> { objects.iter().filter(|(_, t)| is_a(t, ty)).map(|(n, _)| n.as_str()).collect() };

    let mut atoms = Vec::new();
    let mut atom_ids: HashMap<(String, Vec<String>), u32> = HashMap::new();
    for (pred, types) in &d.predicates {
        let domains: Vec<Vec<&str>> = types.iter().map(|t| members(t)).collect();
        for tuple in product(&domains) {
            let args: Vec<String> = tuple.iter().map(|s| s.to_string()).collect();
            atom_ids.insert((pred.clone(), args.clone()), atoms.len() as u32);
            atoms.push(atom_name(pred, &args));
        }
    }
    let lookup = |pred: &str, args: Vec<String>, line_ctx: &str| -> Result<u32, DomainError> {
        if !d.predicates.contains_key(pred) {
            return Err(DomainError::Grounding {
                action: line_ctx.to_string(),
                msg: format!("undeclared predicate `{pred}`"),
            });
        }
        atom_ids.get(&(pred.to_string(), args.clone())).copied().ok_or_else(|| DomainError::Grounding {
            action: line_ctx.to_string(),
            msg: format!("`({pred} {})` is not type-consistent", args.join(" ")),
        })
    };

    let mut robot = Vec::new();
    let mut human = Vec::new();
    for s in &d.schemas {
        let is_human = caps.human_actions.contains(&s.name);
        let mut domains = Vec::new();
        for (pname, ty) in &s.params {
            if ty != "object" && !d.types.contains_key(ty) {
                return Err(DomainError::Grounding {
                    action: s.name.clone(),
                    msg: format!("undeclared type `{ty}` for {pname}"),
                });
            }
            let m = members(ty);
            if m.is_empty() {
                return Err(DomainError::Grounding {
                    action: s.name.clone(),
                    msg: format!("no objects of type `{ty}` for {pname}"),
                });
            }
            domains.push(m);
        }
        for tuple in product(&domains) {
            let bind = |t: &Term| -> String {
                match t {
                    Term::Var(i) => tuple[*i].to_string(),
                    Term::Const(c) => c.clone(),
                }
            };
            if !s.pre.eqs.iter().all(|(pos, a, b)| (bind(a) == bind(b)) == *pos) {
                continue;
            }
            let gname = format!("{}({})", s.name, tuple.join(","));
            let mut ga = GroundAction {
                name: gname.clone(),
                cost: 0,
                pre_pos: Vec::new(),
                pre_neg: Vec::new(),
                add: Vec::new(),
                del: Vec::new(),
            };
            for l in &s.pre.lits {
                let id = lookup(&l.pred, l.args.iter().map(bind).collect(), &s.name)?;
                if l.positive {
                    ga.pre_pos.push(id)
                } else {
                    ga.pre_neg.push(id)
                }
            }
            for l in &s.effects {
                let id = lookup(&l.pred, l.args.iter().map(bind).collect(), &s.name)?;
                if l.positive {
                    ga.add.push(id)
                } else {
                    ga.del.push(id)
                }
            }
            if is_human {
                human.push(ga);
            } else {
                ga.cost = match caps.costs.get(&gname).or_else(|| caps.costs.get(&s.name)) {
                    Some(&c) => c,
                    None => {
                        return Err(DomainError::Schema {
                            pointer: format!("/costs/{}", s.name),
                            msg: format!("no cost for robot action `{}`", s.name),
                        })
                    }
                };
                robot.push(ga);
            }
        }
    }

    let words = atoms.len().div_ceil(64);
    let mut init = vec![0u64; words];
    for (pred, args) in &p.init {
        let id = lookup(pred, args.clone(), ":init")?;
        init[id as usize / 64] |= 1 << (id % 64);
    }
    let mut goal_pos = Vec::new();
    let mut goal_neg = Vec::new();
    for l in &p.goal.lits {
        let args = l
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => c.clone(),
                Term::Var(_) => unreachable!("goal has no parameters"),
            })
            .collect();
        let id = lookup(&l.pred, args, ":goal")?;
        if l.positive {
            goal_pos.push(id)
        } else {
            goal_neg.push(id)
        }
    }
    Ok(StripsInstance { atoms, init, robot, human, goal_pos, goal_neg })
}

pub fn load_pddl(domain: &Path, problem: &Path, caps: &Path) -> Result<StripsInstance, DomainError> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| DomainError::Io(format!("{}: {e}", p.display())));
    let caps = Caps::from_json(&read(caps)?)?;
    parse_pddl(&read(domain)?, &read(problem)?, &caps)
}

fn atom_name(pred: &str, args: &[String]) -> String {
    let mut s = pred.replace('-', "_");
    for a in args {
        s.push('_');
        s.push_str(&a.replace('-', "_"));
    }
    s
}

fn product<'a>(domains: &[Vec<&'a str>]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for d in domains {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

fn holds(s: &[u64], id: u32) -> bool {
    s[id as usize / 64] >> (id % 64) & 1 == 1
}

fn apply_action(s: &[u64], a: &GroundAction) -> Option<Vec<u64>> {
    if !a.pre_pos.iter().all(|&i| holds(s, i)) || a.pre_neg.iter().any(|&i| holds(s, i)) {
        return None;
    }
    let mut t = s.to_vec();
    for &i in &a.del {
        t[i as usize / 64] &= !(1 << (i % 64));
    }
    for &i in &a.add {
        t[i as usize / 64] |= 1 << (i % 64);
    }
    Some(t)
}

impl StripsInstance {
    pub fn num_robot_actions(&self) -> usize {
        self.robot.len()
    }

    pub fn num_human_actions(&self) -> usize {
        self.human.len()
    }

    pub fn robot_action_names(&self) -> Vec<&str> {
        self.robot.iter().map(|a| a.name.as_str()).collect()
    }

    /// `F(goal conjunction)` over the ground atom names.
    pub fn goal_formula_text(&self) -> String {
        let mut parts: Vec<String> = self.goal_pos.iter().map(|&i| self.atoms[i as usize].clone()).collect();
        parts.extend(self.goal_neg.iter().map(|&i| format!("!{}", self.atoms[i as usize])));
        if parts.is_empty() {
            "true".into()
        } else {
            format!("F({})", parts.join(" & "))
        }
    }

    pub fn atom_set(&self) -> BTreeSet<String> {
        self.atoms.iter().cloned().collect()
    }
}

impl DomainModel for StripsInstance {
    type State = Vec<u64>;

    fn initial(&self) -> Vec<u64> {
        self.init.clone()
    }

    fn propositions(&self) -> Vec<String> {
        self.atoms.clone()
    }

    fn labels(&self, s: &Vec<u64>) -> Vec<u32> {
        (0..self.atoms.len() as u32).filter(|&i| holds(s, i)).collect()
    }

    fn robot_actions(&self) -> Vec<ActionInfo> {
        self.robot.iter().map(|a| ActionInfo { name: a.name.clone(), cost: a.cost }).collect()
    }

    fn human_actions(&self) -> Vec<String> {
        std::iter::once("noop".to_string()).chain(self.human.iter().map(|a| a.name.clone())).collect()
    }

    fn robot_successors(&self, s: &Vec<u64>) -> Vec<(u32, Vec<u64>)> {
        self.robot.iter().enumerate().filter_map(|(i, a)| apply_action(s, a).map(|t| (i as u32, t))).collect()
    }

    fn human_successors(&self, s: &Vec<u64>) -> Vec<(u32, Vec<u64>)> {
        let mut out = vec![(0, s.clone())];
        for (i, a) in self.human.iter().enumerate() {
            if let Some(t) = apply_action(s, a) {
                out.push((i as u32 + 1, t));
            }
        }
        out
    }

    fn describe(&self, s: &Vec<u64>) -> String {
        let on: Vec<&str> =
            (0..self.atoms.len() as u32).filter(|&i| holds(s, i)).map(|i| self.atoms[i as usize].as_str()).collect();
        on.join(" ")
    }
}
