use std::collections::HashMap;

use super::{EdgeKind, ExtractOptions, KeyNode, NodeEdge};
use crate::model::{Model, Rule};
use crate::term::{key_positions, KeyRole, Sort, Term};

/// Whether a term in key position stands for a secret key at all.
fn is_key_term(t: &Term) -> bool {
    match t {
        Term::Var(v) => v.sort != Sort::Public,
        Term::App(f, _) => f != "pair",
        _ => false,
    }
}

/// Leaves of a term after splitting pairs.
fn pair_leaves(t: &Term) -> Vec<&Term> {
    match t {
        Term::App(f, args) if f == "pair" => args.iter().flat_map(pair_leaves).collect(),
        _ => vec![t],
    }
}

fn pk_of(t: &Term) -> Term {
    Term::pk(t.clone())
}

fn rule_nodes(rule: &Rule) -> Vec<(Term, KeyRole)> {
    let mut out: Vec<(Term, KeyRole)> = Vec::new();
    let mut push = |t: &Term, role: KeyRole| {
        if is_key_term(t) && !out.iter().any(|(x, _)| x == t) {
            out.push((t.clone(), role));
        }
    };
    for t in rule.outputs().chain(rule.inputs()) {
        for kp in key_positions(t) {
            push(&kp.key, kp.role);
        }
    }
    for t in rule.outputs() {
        for kp in key_positions(t) {
            let Some(payload) = &kp.payload else { continue };
            match kp.role {
                KeyRole::SigKey => {
                    for s in payload.subterms() {
                        if let Term::App(f, args) = s {
                            if f == "pk" {
                                push(&args[0], KeyRole::SigKey);
                            }
                        }
                    }
                }
                KeyRole::SymKey | KeyRole::AsymPrivKey => {
                    for leaf in pair_leaves(payload) {
                        if matches!(leaf, Term::Var(v) if v.sort != Sort::Public) {
                            push(leaf, KeyRole::SymKey);
                        }
                    }
                }
                KeyRole::KdfInput => {}
            }
        }
    }
    out
}

/// Key occurrences of every rule, in rule order.
pub fn collect_key_nodes(model: &Model) -> Vec<KeyNode> {
    let mut nodes = Vec::new();
    for (i, rule) in model.rules.iter().enumerate() {
        for (term, kind) in rule_nodes(rule) {
            let label = match &term {
                Term::Var(v) => v.name.to_string(),
                other => other.to_string(),
            };
            nodes.push(KeyNode {
                rule: rule.name.clone(),
                rule_index: i,
                term,
                label,
                kind,
            });
        }
    }
    nodes
}

/// Node-level dependency edges with default options.
pub fn extract_edges(model: &Model) -> Vec<NodeEdge> {
    let nodes = collect_key_nodes(model);
    edges_with_warnings(model, &nodes, &ExtractOptions::default()).0
}

pub(super) fn edges_with_warnings(
    model: &Model,
    nodes: &[KeyNode],
    opts: &ExtractOptions,
) -> (Vec<NodeEdge>, Vec<String>) {
    let index: HashMap<(usize, &Term), usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| ((n.rule_index, &n.term), i))
        .collect();
    let mut edges: Vec<NodeEdge> = Vec::new();
    let mut warnings = Vec::new();
    let mut add = |from: usize, to: usize, kind: EdgeKind| {
        let e = NodeEdge { from, to, kind };
        if !edges.contains(&e) {
            edges.push(e);
        }
    };
    for (ri, rule) in model.rules.iter().enumerate() {
        let here: Vec<(usize, &Term)> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.rule_index == ri)
            .map(|(i, n)| (i, &n.term))
            .collect();
        for t in rule.outputs() {
            for kp in key_positions(t) {
                let Some(&to) = index.get(&(ri, &kp.key)) else { continue };
                let Some(payload) = &kp.payload else { continue };
                match kp.role {
                    KeyRole::SymKey | KeyRole::AsymPrivKey => {
                        for leaf in pair_leaves(payload) {
                            if let Some(&from) = index.get(&(ri, leaf)) {
                                add(from, to, EdgeKind::Secrecy);
                                if opts.extended_authenticity {
                                    add(from, to, EdgeKind::Authenticity);
                                }
                            }
                        }
                    }
                    KeyRole::SigKey => {
                        for &(from, n) in &here {
                            if n != &kp.key && (payload.contains(n) || payload.contains(&pk_of(n))) {
                                add(from, to, EdgeKind::Authenticity);
                            }
                        }
                    }
                    KeyRole::KdfInput => {}
                }
            }
        }
        for t in rule.outputs().chain(rule.inputs()) {
            for kp in key_positions(t) {
                let Term::App(f, args) = &kp.key else { continue };
                if f != "kdf" || kp.role == KeyRole::KdfInput {
                    continue;
                }
                let Some(&from) = index.get(&(ri, &kp.key)) else { continue };
                for a in args.iter() {
                    if let Some(&to) = index.get(&(ri, a)) {
                        add(from, to, EdgeKind::Secrecy);
                    }
                }
                let w = format!(
                    "rule {}: key `{}` treated as depending on each kdf input separately (over-approximation)",
                    rule.name, kp.key
                );
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
    }
    (edges, warnings)
}
