use std::collections::BTreeSet;
use std::fmt;

/// LTLf formula over named atoms.
///
/// `F` and `G` are not constructors: [`Formula::eventually`] and
/// [`Formula::always`] expand them into `Until` and `Not`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

/// One trace position: the set of atoms that hold there.
pub type Letter = BTreeSet<String>;

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    /// `F f`, stored as `true U f`.
    pub fn eventually(f: Formula) -> Formula {
        Formula::until(Formula::True, f)
    }

    /// `G f`, stored as `!(true U !f)`.
    pub fn always(f: Formula) -> Formula {
        Formula::not(Formula::eventually(Formula::not(f)))
    }

    /// Conjunction of all parts; `true` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Disjunction of all parts; `false` when empty.
    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Atoms occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Not(a) | Formula::Next(a) => a.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a) | Formula::Next(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Direct finite-trace semantics: does `trace` satisfy the formula?
    ///
    /// Positions past the end of the trace satisfy no atom, no `X` and no
    /// `U` obligation; this fixes the meaning of the empty trace.
    pub fn evaluate(&self, trace: &[Letter]) -> bool {
        self.holds_at(trace, 0)
    }

    fn holds_at(&self, trace: &[Letter], i: usize) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(p) => trace.get(i).is_some_and(|l| l.contains(p)),
            Formula::Not(a) => !a.holds_at(trace, i),
            Formula::And(a, b) => a.holds_at(trace, i) && b.holds_at(trace, i),
            Formula::Or(a, b) => a.holds_at(trace, i) || b.holds_at(trace, i),
            Formula::Next(a) => i + 1 < trace.len() && a.holds_at(trace, i + 1),
            Formula::Until(a, b) => {
                for j in i..trace.len() {
                    if b.holds_at(trace, j) {
                        return true;
                    }
                    if !a.holds_at(trace, j) {
                        return false;
                    }
                }
                false
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Not(a) => match a.as_ref() {
                Formula::Until(t, b) if **t == Formula::True => match b.as_ref() {
                    Formula::Not(inner) => write!(f, "G({inner})"),
                    _ => write!(f, "!F({b})"),
                },
                _ => write!(f, "!({a})"),
            },
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Next(a) => write!(f, "X({a})"),
            Formula::Until(a, b) if **a == Formula::True => write!(f, "F({b})"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
        }
    }
}
