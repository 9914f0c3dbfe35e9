use std::collections::BTreeSet;
use std::fmt::Write;

use super::{EdgeKind, KeyDepError};

/// Class-level edge: `from` depends on `to`. Both kinds may be present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassEdge {
    pub from: usize,
    pub to: usize,
    pub secrecy: bool,
    pub authenticity: bool,
}

impl ClassEdge {
    pub fn new(from: usize, to: usize, kind: EdgeKind) -> Self {
        let mut e = ClassEdge {
            from,
            to,
            secrecy: false,
            authenticity: false,
        };
        e.add(kind);
        e
    }

    pub fn add(&mut self, kind: EdgeKind) {
        match kind {
            EdgeKind::Secrecy => self.secrecy = true,
            EdgeKind::Authenticity => self.authenticity = true,
        }
    }

    pub fn kinds(&self) -> Vec<EdgeKind> {
        let mut k = Vec::new();
        if self.secrecy {
            k.push(EdgeKind::Secrecy);
        }
        if self.authenticity {
            k.push(EdgeKind::Authenticity);
        }
        k
    }
}

/// Acyclic graph over key classes. Edges point from the dependent class to
/// the class it depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyClassDag {
    labels: Vec<String>,
    edges: Vec<ClassEdge>,
    topo: Vec<usize>,
}

impl KeyClassDag {
    /// Build a DAG, merging duplicate edges and dropping self-loops.
    pub fn new(labels: Vec<String>, edges: Vec<ClassEdge>) -> Result<Self, KeyDepError> {
        let mut merged: Vec<ClassEdge> = Vec::new();
        for e in edges {
            assert!(e.from < labels.len() && e.to < labels.len(), "edge endpoint out of range");
            if e.from == e.to {
                continue;
            }
            match merged.iter_mut().find(|m| m.from == e.from && m.to == e.to) {
                Some(m) => {
                    m.secrecy |= e.secrecy;
                    m.authenticity |= e.authenticity;
                }
                None => merged.push(e),
            }
        }
        merged.sort();
        let mut dag = KeyClassDag {
            labels,
            edges: merged,
            topo: Vec::new(),
        };
        if let Some(cycle) = dag.find_cycle() {
            return Err(KeyDepError::CyclicDependency(
                cycle.into_iter().map(|i| dag.labels[i].clone()).collect(),
            ));
        }
        dag.topo = dag.kahn();
        Ok(dag)
    }

    /// Convenience constructor from labelled edges.
    pub fn from_labels(labels: &[&str], edges: &[(&str, &str, EdgeKind)]) -> Result<Self, KeyDepError> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let idx = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| KeyDepError::UnknownClass(l.to_string()))
        };
        let mut es = Vec::new();
        for (a, b, k) in edges {
            es.push(ClassEdge::new(idx(a)?, idx(b)?, *k));
        }
        KeyClassDag::new(labels, es)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn edges(&self) -> &[ClassEdge] {
        &self.edges
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&ClassEdge> {
        let (a, b) = (self.index_of(from)?, self.index_of(to)?);
        self.edges.iter().find(|e| e.from == a && e.to == b)
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.from == i).map(|e| e.to)
    }

    fn find_cycle(&self) -> Option<Vec<usize>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(g: &KeyClassDag, v: usize, state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            let succ: Vec<usize> = g.successors(v).collect();
            for w in succ {
                if state[w] == 1 {
                    let pos = stack.iter().position(|&x| x == w).unwrap();
                    let mut cyc = stack[pos..].to_vec();
                    cyc.push(w);
                    return Some(cyc);
                }
                if state[w] == 0 {
                    if let Some(c) = dfs(g, w, state, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        for v in 0..self.len() {
            if state[v] == 0 {
                if let Some(c) = dfs(self, v, &mut state, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Depended-upon classes first; ties by ascending label.
    fn kahn(&self) -> Vec<usize> {
        let n = self.len();
        let mut pending: Vec<usize> = vec![0; n];
        for e in &self.edges {
            pending[e.from] += 1;
        }
        let mut ready: BTreeSet<(&str, usize)> = (0..n)
            .filter(|&i| pending[i] == 0)
            .map(|i| (self.labels[i].as_str(), i))
            .collect();
        let mut out = Vec::with_capacity(n);
        while let Some(first) = ready.pop_first() {
            let v = first.1;
            out.push(v);
            for e in self.edges.iter().filter(|e| e.to == v) {
                pending[e.from] -= 1;
                if pending[e.from] == 0 {
                    ready.insert((self.labels[e.from].as_str(), e.from));
                }
            }
        }
        out
    }

    /// Class indices in priority order.
    pub fn linearize(&self) -> &[usize] {
        &self.topo
    }

    pub fn linear_labels(&self) -> Vec<String> {
        self.topo.iter().map(|&i| self.labels[i].clone()).collect()
    }

    /// For each class, the classes reachable through one or more edges.
    pub fn closure(&self) -> Vec<BTreeSet<usize>> {
        let mut reach: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.len()];
        // topo lists dependencies first, so successors are complete when visited.
        for &v in &self.topo {
            let mut r = BTreeSet::new();
            for w in self.successors(v) {
                r.insert(w);
                r.extend(reach[w].iter().copied());
            }
            reach[v] = r;
        }
        reach
    }

    /// Closure restricted to edges carrying `kind`.
    pub fn closure_of_kind(&self, kind: EdgeKind) -> Vec<BTreeSet<usize>> {
        let edges: Vec<ClassEdge> = self
            .edges
            .iter()
            .filter(|e| e.kinds().contains(&kind))
            .copied()
            .collect();
        KeyClassDag::new(self.labels.clone(), edges)
            .expect("subgraph of a DAG is acyclic")
            .closure()
    }

    /// Labels `label` depends on, including itself.
    pub fn dependencies(&self, label: &str) -> Result<BTreeSet<String>, KeyDepError> {
        let i = self
            .index_of(label)
            .ok_or_else(|| KeyDepError::UnknownClass(label.to_string()))?;
        let mut out: BTreeSet<String> = self.closure()[i].iter().map(|&j| self.labels[j].clone()).collect();
        out.insert(label.to_string());
        Ok(out)
    }

    /// Remove every edge implied by a longer path.
    pub fn transitive_reduction(&self) -> KeyClassDag {
        let reach = self.closure();
        let edges: Vec<ClassEdge> = self
            .edges
            .iter()
            .filter(|e| {
                !self
                    .successors(e.from)
                    .any(|w| w != e.to && reach[w].contains(&e.to))
            })
            .copied()
            .collect();
        KeyClassDag {
            labels: self.labels.clone(),
            edges,
            topo: self.topo.clone(),
        }
    }

    /// Number of edges on the longest dependency path.
    pub fn longest_chain(&self) -> usize {
        let mut len = vec![0usize; self.len()];
        for &v in &self.topo {
            len[v] = self.successors(v).map(|w| len[w] + 1).max().unwrap_or(0);
        }
        len.into_iter().max().unwrap_or(0)
    }

    /// Graphviz rendering of the reduced graph.
    pub fn to_dot(&self) -> String {
        let g = self.transitive_reduction();
        let mut out = String::from("digraph keys {\n  rankdir=BT;\n  node [shape=box];\n");
        for &v in &g.topo {
            writeln!(out, "  \"{}\";", g.labels[v]).unwrap();
        }
        let mut edges: Vec<&ClassEdge> = g.edges.iter().collect();
        edges.sort_by_key(|e| (g.labels[e.from].clone(), g.labels[e.to].clone()));
        for e in edges {
            let style = match (e.secrecy, e.authenticity) {
                (true, true) => " [penwidth=2]",
                (false, true) => " [style=dashed]",
                _ => "",
            };
            writeln!(out, "  \"{}\" -> \"{}\"{style};", g.labels[e.from], g.labels[e.to]).unwrap();
        }
        out.push_str("}\n");
        out
    }

    /// Order file: edge summary as comments, then one label per line.
    pub fn order_text(&self) -> String {
        let g = self.transitive_reduction();
        let mut out = String::from("# key classes in priority order\n");
        for e in &g.edges {
            let arrow = match (e.secrecy, e.authenticity) {
                (true, true) => "->+~>",
                (false, true) => "~>",
                _ => "->",
            };
            writeln!(out, "# {} {arrow} {}", g.labels[e.from], g.labels[e.to]).unwrap();
        }
        for l in g.linear_labels() {
            writeln!(out, "{l}").unwrap();
        }
        out
    }
}

/// Read an order file: labels in order, comments and blank lines skipped.
pub fn parse_order(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}
