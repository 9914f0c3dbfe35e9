//! Key dependency extraction: key occurrences, secrecy/authenticity edges,
//! equivalence classes via fact unification, and the class DAG.

mod classes;
mod collect;
mod dag;

use std::fmt;

use thiserror::Error;

use crate::model::Model;
use crate::term::{KeyRole, Term};

pub use collect::{collect_key_nodes, extract_edges};
pub use dag::{parse_order, ClassEdge, KeyClassDag};

/// One syntactic key occurrence inside a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyNode {
    pub rule: String,
    pub rule_index: usize,
    pub term: Term,
    pub label: String,
    pub kind: KeyRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Secrecy,
    Authenticity,
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Secrecy => write!(f, "secrecy"),
            EdgeKind::Authenticity => write!(f, "authenticity"),
        }
    }
}

/// Node-level dependency: `from` depends on `to` (indices into the node list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    /// Also treat encrypted transport as an authenticity dependency.
    pub extended_authenticity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyDepError {
    #[error("cyclic key dependency: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("unknown key class `{0}`")]
    UnknownClass(String),
}

/// Everything computed by [`extract`], kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub nodes: Vec<KeyNode>,
    pub edges: Vec<NodeEdge>,
    /// Class index of each node.
    pub class_of: Vec<usize>,
    /// Reduced class DAG.
    pub dag: KeyClassDag,
    /// Class DAG before transitive reduction.
    pub full: KeyClassDag,
    pub warnings: Vec<String>,
}

/// Run the whole pipeline on a model.
pub fn extract(model: &Model, opts: &ExtractOptions) -> Result<Extraction, KeyDepError> {
    let nodes = collect_key_nodes(model);
    let (edges, mut warnings) = collect::edges_with_warnings(model, &nodes, opts);
    let part = classes::partition(model, &nodes);
    let mut class_edges: Vec<ClassEdge> = Vec::new();
    for e in &edges {
        let (a, b) = (part.class_of[e.from], part.class_of[e.to]);
        if a == b {
            let w = format!(
                "dropping self-dependency of class `{}` ({} edge in rule {})",
                part.labels[a], e.kind, nodes[e.from].rule
            );
            if !warnings.contains(&w) {
                warnings.push(w);
            }
            continue;
        }
        match class_edges.iter_mut().find(|c| c.from == a && c.to == b) {
            Some(c) => c.add(e.kind),
            None => class_edges.push(ClassEdge::new(a, b, e.kind)),
        }
    }
    let full = KeyClassDag::new(part.labels.clone(), class_edges)?;
    let dag = full.transitive_reduction();
    Ok(Extraction {
        nodes,
        edges,
        class_of: part.class_of,
        dag,
        full,
        warnings,
    })
}
