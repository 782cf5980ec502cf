//! Reduced ordered binary and algebraic decision diagrams.
//!
//! A [`Manager`] owns a hash-consed node store under a fixed variable order.
//! Boolean functions (BDDs) are diagrams whose terminals are `0` and `1`;
//! algebraic diagrams (ADDs) may carry any [`Value`] terminal, including
//! `Infinity`. Both share one store so that a BDD can be used directly as an
//! ADD guard or mask.
//!
//! Handles ([`NodeRef`]) are canonical: two handles from the same manager are
//! equal iff they denote the same function. There are no complement edges.
//! A manager is single-threaded; distinct managers are independent.

mod export;
mod inspect;
mod ops;
mod quant;
mod subst;

use std::sync::atomic::{AtomicU32, Ordering};

use rustc_hash::FxHashMap;
use thiserror::Error;

pub use crate::value::Value;
pub use export::DdStats;

/// Diagram terminal value.
pub type Terminal = Value;

/// Position of a variable in the global order. Smaller indices are closer to
/// the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Handle to a canonical node owned by one manager.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    mgr: u32,
    idx: u32,
}

impl NodeRef {
    /// Raw index inside the owning manager's store.
    pub fn index(self) -> u32 {
        self.idx
    }
}

/// Pointwise binary operators for [`Manager::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    And,
    Or,
    Xor,
    Plus,
    Min,
    Max,
    Times,
}

impl Op {
    fn is_boolean(self) -> bool {
        matches!(self, Op::And | Op::Or | Op::Xor)
    }

    fn code(self) -> u8 {
        self as u8
    }

    fn eval(self, a: Value, b: Value) -> Value {
        let bit = |v: Value| v != Value::ZERO;
        let of = |b: bool| if b { Value::ONE } else { Value::ZERO };
        match self {
            Op::And => of(bit(a) && bit(b)),
            Op::Or => of(bit(a) || bit(b)),
            Op::Xor => of(bit(a) ^ bit(b)),
            Op::Plus => a.plus(b),
            Op::Min => a.min(b),
            Op::Max => a.max(b),
            Op::Times => a.times(b),
        }
    }
}

/// Variable elimination modes for [`Manager::quantify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    Exists,
    Forall,
    MinAbstract,
    MaxAbstract,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DdError {
    #[error("variable budget of {0} exceeded")]
    VariableBudget(u32),
    #[error("node handle belongs to a different manager")]
    ForeignNode,
    #[error("operation `{0}` requires a 0/1-valued diagram")]
    NotBoolean(&'static str),
    #[error("variable x{0} is not allocated")]
    UnknownVar(u32),
    #[error("variable x{0} substituted more than once")]
    DuplicateSubstitution(u32),
    #[error("assignment does not cover variable x{0}")]
    IncompleteAssignment(u32),
    #[error("variables must be listed in strictly increasing order")]
    UnorderedVars,
    #[error("code {code} does not fit in {width} variables")]
    CodeTooWide { code: u128, width: usize },
}

pub type DdResult<T> = Result<T, DdError>;

const TERMINAL_LEVEL: u32 = u32::MAX;
const ZERO_IDX: u32 = 0;
const ONE_IDX: u32 = 1;
const DEFAULT_CACHE_LIMIT: usize = 1 << 22;

#[derive(Clone, Copy, Debug)]
enum Node {
    Terminal(Value),
    Inner { var: u32, hi: u32, lo: u32 },
    Free,
}

/// Inspection view of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeView {
    Terminal(Value),
    Inner { var: VarId, hi: NodeRef, lo: NodeRef },
}

static NEXT_MANAGER_ID: AtomicU32 = AtomicU32::new(1);

/// Owner of the unique table, operation caches and variable order.
pub struct Manager {
    id: u32,
    nodes: Vec<Node>,
    boolean: Vec<bool>,
    free: Vec<u32>,
    unique: FxHashMap<(u32, u32, u32), u32>,
    terminals: FxHashMap<Value, u32>,
    apply_cache: FxHashMap<(u8, u32, u32), u32>,
    ite_cache: FxHashMap<(u32, u32, u32), u32>,
    num_vars: u32,
    max_vars: u32,
    caching: bool,
    cache_limit: usize,
    peak_live: usize,
    cache_lookups: u64,
    cache_hits: u64,
    gc_runs: u64,
}

impl Default for Manager {
    fn default() -> Self {
        Self::new()
    }
}

impl Manager {
    pub fn new() -> Self {
        Self::with_var_limit(1024)
    }

    pub fn with_var_limit(max_vars: u32) -> Self {
        let mut m = Manager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            boolean: Vec::new(),
            free: Vec::new(),
            unique: FxHashMap::default(),
            terminals: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
            ite_cache: FxHashMap::default(),
            num_vars: 0,
            max_vars,
            caching: true,
            cache_limit: DEFAULT_CACHE_LIMIT,
            peak_live: 0,
            cache_lookups: 0,
            cache_hits: 0,
            gc_runs: 0,
        };
        let z = m.terminal_idx(Value::ZERO);
        let o = m.terminal_idx(Value::ONE);
        debug_assert_eq!((z, o), (ZERO_IDX, ONE_IDX));
        m
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn var_limit(&self) -> u32 {
        self.max_vars
    }

    /// Enable or disable the global operation caches. Results are identical
    /// either way; only speed changes.
    pub fn set_caching(&mut self, on: bool) {
        self.caching = on;
        if !on {
            self.clear_caches();
        }
    }

    pub fn set_cache_limit(&mut self, limit: usize) {
        self.cache_limit = limit.max(1);
    }

    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
        self.ite_cache.clear();
    }

    /// Allocate the next variable in the order and return its literal.
    pub fn new_var(&mut self) -> DdResult<NodeRef> {
        if self.num_vars >= self.max_vars {
            return Err(DdError::VariableBudget(self.max_vars));
        }
        let v = self.num_vars;
        self.num_vars += 1;
        let idx = self.mk(v, ONE_IDX, ZERO_IDX);
        Ok(self.h(idx))
    }

    /// Allocate `n` consecutive variables.
    pub fn new_vars(&mut self, n: usize) -> DdResult<Vec<VarId>> {
        (0..n)
            .map(|_| {
                self.new_var()?;
                Ok(VarId(self.num_vars - 1))
            })
            .collect()
    }

    /// Literal diagram of an allocated variable.
    pub fn var(&mut self, v: VarId) -> DdResult<NodeRef> {
        self.check_var(v)?;
        let idx = self.mk(v.0, ONE_IDX, ZERO_IDX);
        Ok(self.h(idx))
    }

    /// Negative literal of an allocated variable.
    pub fn nvar(&mut self, v: VarId) -> DdResult<NodeRef> {
        self.check_var(v)?;
        let idx = self.mk(v.0, ZERO_IDX, ONE_IDX);
        Ok(self.h(idx))
    }

    pub fn zero(&self) -> NodeRef {
        self.h(ZERO_IDX)
    }

    pub fn one(&self) -> NodeRef {
        self.h(ONE_IDX)
    }

    pub fn infinity(&mut self) -> NodeRef {
        self.constant(Value::Infinity)
    }

    pub fn constant(&mut self, v: Value) -> NodeRef {
        let idx = self.terminal_idx(v);
        self.h(idx)
    }

    pub fn boolean(&self, b: bool) -> NodeRef {
        if b {
            self.one()
        } else {
            self.zero()
        }
    }

    /// True iff every terminal reachable from `f` is `0` or `1`.
    pub fn is_boolean(&self, f: NodeRef) -> DdResult<bool> {
        self.check(f)?;
        Ok(self.boolean[f.idx as usize])
    }

    pub fn constant_value(&self, f: NodeRef) -> DdResult<Option<Value>> {
        self.check(f)?;
        Ok(match self.nodes[f.idx as usize] {
            Node::Terminal(v) => Some(v),
            _ => None,
        })
    }

    pub fn node(&self, f: NodeRef) -> DdResult<NodeView> {
        self.check(f)?;
        Ok(match self.nodes[f.idx as usize] {
            Node::Terminal(v) => NodeView::Terminal(v),
            Node::Inner { var, hi, lo } => NodeView::Inner { var: VarId(var), hi: self.h(hi), lo: self.h(lo) },
            Node::Free => unreachable!("live handle points at a freed slot"),
        })
    }

    // ---- internals -------------------------------------------------------

    fn h(&self, idx: u32) -> NodeRef {
        NodeRef { mgr: self.id, idx }
    }

    fn check(&self, f: NodeRef) -> DdResult<()> {
        if f.mgr != self.id {
            Err(DdError::ForeignNode)
        } else {
            Ok(())
        }
    }

    fn check_var(&self, v: VarId) -> DdResult<()> {
        if v.0 >= self.num_vars {
            Err(DdError::UnknownVar(v.0))
        } else {
            Ok(())
        }
    }

    fn check_bool(&self, f: NodeRef, op: &'static str) -> DdResult<()> {
        self.check(f)?;
        if self.boolean[f.idx as usize] {
            Ok(())
        } else {
            Err(DdError::NotBoolean(op))
        }
    }

    #[inline]
    fn level(&self, idx: u32) -> u32 {
        match self.nodes[idx as usize] {
            Node::Inner { var, .. } => var,
            _ => TERMINAL_LEVEL,
        }
    }

    #[inline]
    fn children(&self, idx: u32) -> (u32, u32) {
        match self.nodes[idx as usize] {
            Node::Inner { hi, lo, .. } => (hi, lo),
            _ => (idx, idx),
        }
    }

    /// Cofactors of `idx` with respect to variable level `v` (which must be
    /// at or above the node's own level).
    #[inline]
    fn cofactors(&self, idx: u32, v: u32) -> (u32, u32) {
        match self.nodes[idx as usize] {
            Node::Inner { var, hi, lo } if var == v => (hi, lo),
            _ => (idx, idx),
        }
    }

    #[inline]
    fn terminal_value(&self, idx: u32) -> Option<Value> {
        match self.nodes[idx as usize] {
            Node::Terminal(v) => Some(v),
            _ => None,
        }
    }

    fn alloc(&mut self, node: Node, boolean: bool) -> u32 {
        let idx = if let Some(i) = self.free.pop() {
            self.nodes[i as usize] = node;
            self.boolean[i as usize] = boolean;
            i
        } else {
            self.nodes.push(node);
            self.boolean.push(boolean);
            (self.nodes.len() - 1) as u32
        };
        let live = self.nodes.len() - self.free.len();
        if live > self.peak_live {
            self.peak_live = live;
        }
        idx
    }

    fn terminal_idx(&mut self, v: Value) -> u32 {
        if let Some(&i) = self.terminals.get(&v) {
            return i;
        }
        let boolean = v == Value::ZERO || v == Value::ONE;
        let i = self.alloc(Node::Terminal(v), boolean);
        self.terminals.insert(v, i);
        i
    }

    /// Reduced, hash-consed node constructor.
    fn mk(&mut self, var: u32, hi: u32, lo: u32) -> u32 {
        if hi == lo {
            return hi;
        }
        debug_assert!(var < self.level(hi) && var < self.level(lo));
        if let Some(&i) = self.unique.get(&(var, hi, lo)) {
            return i;
        }
        let boolean = self.boolean[hi as usize] && self.boolean[lo as usize];
        let i = self.alloc(Node::Inner { var, hi, lo }, boolean);
        self.unique.insert((var, hi, lo), i);
        i
    }

    fn cache_get(&mut self, key: (u8, u32, u32)) -> Option<u32> {
        if !self.caching {
            return None;
        }
        self.cache_lookups += 1;
        let r = self.apply_cache.get(&key).copied();
        if r.is_some() {
            self.cache_hits += 1;
        }
        r
    }

    fn cache_put(&mut self, key: (u8, u32, u32), r: u32) {
        if !self.caching {
            return;
        }
        if self.apply_cache.len() >= self.cache_limit {
            self.apply_cache.clear();
        }
        self.apply_cache.insert(key, r);
    }

    /// Mark-and-sweep collection. Every node not reachable from `roots` is
    /// released and its slot may be reused; handles to released nodes become
    /// invalid. Must only be called between operations.
    pub fn collect_garbage(&mut self, roots: &[NodeRef]) -> DdResult<usize> {
        for r in roots {
            self.check(*r)?;
        }
        let mut marked = vec![false; self.nodes.len()];
        marked[ZERO_IDX as usize] = true;
        marked[ONE_IDX as usize] = true;
        let mut stack: Vec<u32> = roots.iter().map(|r| r.idx).collect();
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut marked[i as usize], true) {
                continue;
            }
            if let Node::Inner { hi, lo, .. } = self.nodes[i as usize] {
                stack.push(hi);
                stack.push(lo);
            }
        }
        // Variable literals are kept so that `var()` stays cheap.
        let mut freed = 0;
        for (i, &keep) in marked.iter().enumerate() {
            if keep {
                continue;
            }
            match self.nodes[i] {
                Node::Inner { var, hi, lo } => {
                    if hi == ONE_IDX && lo == ZERO_IDX {
                        continue;
                    }
                    self.unique.remove(&(var, hi, lo));
                }
                Node::Terminal(v) => {
                    self.terminals.remove(&v);
                }
                Node::Free => continue,
            }
            self.nodes[i] = Node::Free;
            self.free.push(i as u32);
            freed += 1;
        }
        self.clear_caches();
        self.gc_runs += 1;
        Ok(freed)
    }
}
