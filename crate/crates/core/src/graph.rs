//! Mixed graphs over the relevance score, the click, and presentation
//! features.
//!
//! The directed part is kept acyclic on every mutation. Undirected edges are
//! the usual leftover of constraint-based discovery (an equivalence class,
//! not a causal claim), so downstream consumers treat them separately.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved node label for the relevance score produced by the ranking model.
pub const REL_NODE: &str = "REL";
/// Reserved node label for the observed click.
pub const CLICK_NODE: &str = "CLICK";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMark {
    Directed,
    Undirected,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeJson {
    from: String,
    to: String,
    mark: EdgeMark,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<String>,
    edges: Vec<EdgeJson>,
}

/// A directed mixed graph. Node identity is the label; edge storage is
/// index-based and ordered so that serialization is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    directed: BTreeSet<(usize, usize)>,
    /// Canonical (lo, hi) pairs.
    undirected: BTreeSet<(usize, usize)>,
}

impl CausalGraph {
    pub fn new(nodes: Vec<String>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::Graph("empty node label".into()));
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Graph(format!("duplicate node `{n}`")));
            }
        }
        Ok(CausalGraph {
            nodes,
            index,
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    fn require(&self, label: &str) -> Result<usize> {
        self.node_index(label)
            .ok_or_else(|| Error::Graph(format!("unknown node `{label}`")))
    }

    /// Adds `from -> to`, rejecting self-loops, duplicate marks on the pair
    /// and anything that would close a directed cycle.
    pub fn add_directed(&mut self, from: &str, to: &str) -> Result<()> {
        let (f, t) = (self.require(from)?, self.require(to)?);
        if f == t {
            return Err(Error::Graph(format!("self-loop on `{from}`")));
        }
        if self.directed.contains(&(t, f)) {
            return Err(Error::Graph(format!(
                "edge {from} -> {to} conflicts with existing {to} -> {from}"
            )));
        }
        let key = (f.min(t), f.max(t));
        if self.undirected.contains(&key) {
            return Err(Error::Graph(format!(
                "pair {from} - {to} already has an undirected edge"
            )));
        }
        self.directed.insert((f, t));
        if !self.directed_is_acyclic() {
            self.directed.remove(&(f, t));
            return Err(Error::Graph(format!("edge {from} -> {to} closes a cycle")));
        }
        Ok(())
    }

    pub fn add_undirected(&mut self, a: &str, b: &str) -> Result<()> {
        let (x, y) = (self.require(a)?, self.require(b)?);
        if x == y {
            return Err(Error::Graph(format!("self-loop on `{a}`")));
        }
        if self.directed.contains(&(x, y)) || self.directed.contains(&(y, x)) {
            return Err(Error::Graph(format!(
                "pair {a} - {b} already has a directed edge"
            )));
        }
        self.undirected.insert((x.min(y), x.max(y)));
        Ok(())
    }

    pub fn remove_edge(&mut self, a: &str, b: &str) -> Result<()> {
        let (x, y) = (self.require(a)?, self.require(b)?);
        self.directed.remove(&(x, y));
        self.directed.remove(&(y, x));
        self.undirected.remove(&(x.min(y), x.max(y)));
        Ok(())
    }

    /// Replaces whatever mark the pair carries with `a -> b`.
    pub fn orient(&mut self, a: &str, b: &str) -> Result<()> {
        self.remove_edge(a, b)?;
        self.add_directed(a, b)
    }

    pub fn has_directed(&self, from: &str, to: &str) -> bool {
        match (self.node_index(from), self.node_index(to)) {
            (Some(f), Some(t)) => self.directed.contains(&(f, t)),
            _ => false,
        }
    }

    pub fn has_undirected(&self, a: &str, b: &str) -> bool {
        match (self.node_index(a), self.node_index(b)) {
            (Some(x), Some(y)) => self.undirected.contains(&(x.min(y), x.max(y))),
            _ => false,
        }
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.has_directed(a, b) || self.has_directed(b, a) || self.has_undirected(a, b)
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.directed
            .iter()
            .map(|&(f, t)| (self.nodes[f].as_str(), self.nodes[t].as_str()))
    }

    pub fn undirected_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.undirected
            .iter()
            .map(|&(a, b)| (self.nodes[a].as_str(), self.nodes[b].as_str()))
    }

    pub fn directed_edge_count(&self) -> usize {
        self.directed.len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.undirected.len()
    }

    /// Parents of `node` via directed edges only.
    pub fn parents(&self, node: &str) -> Vec<&str> {
        let Some(t) = self.node_index(node) else {
            return Vec::new();
        };
        self.directed
            .iter()
            .filter(|&&(_, to)| to == t)
            .map(|&(f, _)| self.nodes[f].as_str())
            .collect()
    }

    pub fn children(&self, node: &str) -> Vec<&str> {
        let Some(f) = self.node_index(node) else {
            return Vec::new();
        };
        self.directed
            .iter()
            .filter(|&&(from, _)| from == f)
            .map(|&(_, t)| self.nodes[t].as_str())
            .collect()
    }

    /// Labels adjacent to `node` under any mark.
    pub fn neighbors(&self, node: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for other in &self.nodes {
            if other != node && self.adjacent(node, other) {
                out.push(other.as_str());
            }
        }
        out
    }

    pub fn directed_is_acyclic(&self) -> bool {
        // Kahn's algorithm over the directed part.
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, t) in &self.directed {
            indeg[t] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(u) = stack.pop() {
            seen += 1;
            for &(f, t) in &self.directed {
                if f == u {
                    indeg[t] -= 1;
                    if indeg[t] == 0 {
                        stack.push(t);
                    }
                }
            }
        }
        seen == n
    }

    /// True if a directed path `from -> ... -> to` exists.
    pub fn has_directed_path(&self, from: &str, to: &str) -> bool {
        let (Some(f), Some(t)) = (self.node_index(from), self.node_index(to)) else {
            return false;
        };
        let mut stack = vec![f];
        let mut seen = vec![false; self.nodes.len()];
        while let Some(u) = stack.pop() {
            if u == t && !stack.is_empty() || (u == t && f != t) {
                return true;
            }
            if seen[u] {
                continue;
            }
            seen[u] = true;
            for &(a, b) in &self.directed {
                if a == u && !seen[b] {
                    if b == t {
                        return true;
                    }
                    stack.push(b);
                }
            }
        }
        false
    }

    /// Structural Hamming distance: one unit per node pair whose edge status
    /// (absent / undirected / either direction) differs. Node sets must match.
    pub fn shd(&self, other: &CausalGraph) -> Result<usize> {
        let mut names: Vec<&String> = self.nodes.iter().collect();
        names.sort();
        let mut other_names: Vec<&String> = other.nodes.iter().collect();
        other_names.sort();
        if names != other_names {
            return Err(Error::Graph("SHD requires identical node sets".into()));
        }
        let mut dist = 0;
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let (a, b) = (names[i].as_str(), names[j].as_str());
                let status = |g: &CausalGraph| -> u8 {
                    if g.has_directed(a, b) {
                        1
                    } else if g.has_directed(b, a) {
                        2
                    } else if g.has_undirected(a, b) {
                        3
                    } else {
                        0
                    }
                };
                if status(self) != status(other) {
                    dist += 1;
                }
            }
        }
        Ok(dist)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<EdgeJson> = self
            .directed_edges()
            .map(|(f, t)| EdgeJson {
                from: f.to_string(),
                to: t.to_string(),
                mark: EdgeMark::Directed,
            })
            .chain(self.undirected_edges().map(|(a, b)| EdgeJson {
                from: a.to_string(),
                to: b.to_string(),
                mark: EdgeMark::Undirected,
            }))
            .collect();
        serde_json::to_value(GraphJson {
            nodes: self.nodes.clone(),
            edges,
        })
        .expect("graph serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let parsed: GraphJson = serde_json::from_value(value.clone())?;
        let mut g = CausalGraph::new(parsed.nodes)?;
        for e in parsed.edges {
            match e.mark {
                EdgeMark::Directed => g.add_directed(&e.from, &e.to)?,
                EdgeMark::Undirected => g.add_undirected(&e.from, &e.to)?,
            }
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rejects_cycles_and_self_loops() {
        let mut g = CausalGraph::new(nodes(&["a", "b", "c"])).unwrap();
        g.add_directed("a", "b").unwrap();
        g.add_directed("b", "c").unwrap();
        assert!(g.add_directed("c", "a").is_err());
        assert!(g.add_directed("a", "a").is_err());
        assert!(g.directed_is_acyclic());
    }

    #[test]
    fn shd_counts_every_kind_of_difference() {
        let mut a = CausalGraph::new(nodes(&["x", "y", "z"])).unwrap();
        a.add_directed("x", "y").unwrap();
        a.add_undirected("y", "z").unwrap();
        let mut b = CausalGraph::new(nodes(&["x", "y", "z"])).unwrap();
        b.add_directed("y", "x").unwrap(); // reversed: 1
        b.add_directed("y", "z").unwrap(); // undirected vs directed: 1
        b.add_directed("x", "z").unwrap(); // extra edge: 1
        assert_eq!(a.shd(&b).unwrap(), 3);
        assert_eq!(a.shd(&a).unwrap(), 0);
    }

    #[test]
    fn json_round_trip() {
        let mut g = CausalGraph::new(nodes(&[REL_NODE, CLICK_NODE, "position"])).unwrap();
        g.add_directed(REL_NODE, CLICK_NODE).unwrap();
        g.add_undirected("position", CLICK_NODE).unwrap();
        let j = g.to_json();
        let back = CausalGraph::from_json(&j).unwrap();
        assert_eq!(g, back);
        assert_eq!(j["edges"][0]["mark"], "directed");
    }

    #[test]
    fn directed_path_search() {
        let mut g = CausalGraph::new(nodes(&["a", "b", "c", "d"])).unwrap();
        g.add_directed("a", "b").unwrap();
        g.add_directed("b", "c").unwrap();
        g.add_undirected("c", "d").unwrap();
        assert!(g.has_directed_path("a", "c"));
        assert!(!g.has_directed_path("a", "d"));
        assert!(!g.has_directed_path("c", "a"));
    }
}
