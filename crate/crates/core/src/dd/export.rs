use std::fmt::Write as _;

use serde::Serialize;

use super::*;

/// Counters exposed for benchmarking and reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DdStats {
    pub num_vars: u32,
    pub live_nodes: usize,
    pub peak_live_nodes: usize,
    pub cache_lookups: u64,
    pub cache_hits: u64,
    pub cache_hit_rate: f64,
    pub gc_runs: u64,
}

impl Manager {
    pub fn stats(&self) -> DdStats {
        DdStats {
            num_vars: self.num_vars,
            live_nodes: self.nodes.len() - self.free.len(),
            peak_live_nodes: self.peak_live,
            cache_lookups: self.cache_lookups,
            cache_hits: self.cache_hits,
            cache_hit_rate: if self.cache_lookups == 0 {
                0.0
            } else {
                self.cache_hits as f64 / self.cache_lookups as f64
            },
            gc_runs: self.gc_runs,
        }
    }

    /// Graphviz rendering of the shared diagram rooted at `roots`. Each
    /// statement sits on its own line; terminals are boxes, solid edges are
    /// the high branch and dashed edges the low branch.
    pub fn to_dot(&self, roots: &[(&str, NodeRef)], var_names: &dyn Fn(VarId) -> String) -> DdResult<String> {
        for (_, r) in roots {
            self.check(*r)?;
        }
        let mut out = String::from("digraph dd {\n");
        let mut seen = BTreeSet::new();
        let mut stack: Vec<u32> = roots.iter().map(|(_, r)| r.idx).collect();
        let mut order = Vec::new();
        while let Some(i) = stack.pop() {
            if !seen.insert(i) {
                continue;
            }
            order.push(i);
            if let Node::Inner { hi, lo, .. } = self.nodes[i as usize] {
                stack.push(lo);
                stack.push(hi);
            }
        }
        order.sort_unstable();
        for (name, r) in roots {
            let _ = writeln!(out, "  \"{}\" [shape=plaintext];", name.replace('"', "'"));
            let _ = writeln!(out, "  \"{}\" -> n{};", name.replace('"', "'"), r.idx);
        }
        for i in order {
            match self.nodes[i as usize] {
                Node::Terminal(v) => {
                    let _ = writeln!(out, "  n{i} [shape=box,label=\"{v}\"];");
                }
                Node::Inner { var, hi, lo } => {
                    let _ = writeln!(out, "  n{i} [shape=circle,label=\"{}\"];", var_names(VarId(var)));
                    let _ = writeln!(out, "  n{i} -> n{hi};");
                    let _ = writeln!(out, "  n{i} -> n{lo} [style=dashed];");
                }
                Node::Free => unreachable!(),
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}

use std::collections::BTreeSet;
