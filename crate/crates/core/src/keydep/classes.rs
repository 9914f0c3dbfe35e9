use std::collections::{BTreeMap, HashMap};

use super::KeyNode;
use crate::model::{Fact, Model};
use crate::term::{unify_all, Sort, Term, Var};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root so results do not depend on merge order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub(super) struct Partition {
    pub class_of: Vec<usize>,
    pub labels: Vec<String>,
}

fn rename(t: &Term, side: usize) -> Term {
    t.map_vars(&mut |v| Term::Var(Var::new(v.sort, format!("{}@{side}", v.name))))
}

fn linkable(f: &Fact) -> bool {
    !matches!(f.name.as_str(), "Fr" | "In" | "Out" | "K")
}

/// Group key nodes into classes of keys that can be instantiated with the
/// same value, by unifying produced and consumed facts and sent and received
/// messages.
pub(super) fn partition(model: &Model, nodes: &[KeyNode]) -> Partition {
    // Occurrences: every variable of every rule plus every node term.
    let mut occ: Vec<(usize, Term)> = Vec::new();
    let mut occ_index: HashMap<(usize, Term), usize> = HashMap::new();
    let mut per_rule: Vec<Vec<usize>> = vec![Vec::new(); model.rules.len()];
    let mut add = |r: usize, t: Term, occ: &mut Vec<(usize, Term)>| -> usize {
        *occ_index.entry((r, t.clone())).or_insert_with(|| {
            occ.push((r, t));
            per_rule[r].push(occ.len() - 1);
            occ.len() - 1
        })
    };
    let node_occ: Vec<usize> = nodes
        .iter()
        .map(|n| add(n.rule_index, n.term.clone(), &mut occ))
        .collect();
    for (r, rule) in model.rules.iter().enumerate() {
        for f in rule.facts() {
            for v in f.vars() {
                add(r, Term::Var(v), &mut occ);
            }
        }
    }

    let mut uf = UnionFind::new(occ.len());
    let link = |i: usize, j: usize, lhs: &[Term], rhs: &[Term], uf: &mut UnionFind| {
        let l: Vec<Term> = lhs.iter().map(|t| rename(t, 0)).collect();
        let r: Vec<Term> = rhs.iter().map(|t| rename(t, 1)).collect();
        let Some(sigma) = unify_all(l.iter().zip(r.iter())) else { return };
        let mut by_image: HashMap<Term, usize> = HashMap::new();
        for (side, rule) in [(0, i), (1, j)] {
            for &o in &per_rule[rule] {
                let image = sigma.apply(&rename(&occ[o].1, side));
                match by_image.get(&image) {
                    Some(&first) => uf.union(first, o),
                    None => {
                        by_image.insert(image, o);
                    }
                }
            }
        }
    };
    for (i, ri) in model.rules.iter().enumerate() {
        for c in ri.conclusions.iter().filter(|f| linkable(f)) {
            for (j, rj) in model.rules.iter().enumerate() {
                for p in &rj.premises {
                    if p.name == c.name && p.persistent == c.persistent && p.args.len() == c.args.len() {
                        link(i, j, &c.args, &p.args, &mut uf);
                    }
                }
            }
        }
        for out in ri.outputs() {
            for (j, rj) in model.rules.iter().enumerate() {
                for inp in rj.inputs() {
                    link(i, j, std::slice::from_ref(out), std::slice::from_ref(inp), &mut uf);
                }
            }
        }
    }

    // Classes are the components holding at least one node, ordered by first node.
    let mut class_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut class_of = Vec::with_capacity(nodes.len());
    for &o in &node_occ {
        let root = uf.find(o);
        let next = class_of_root.len();
        class_of.push(*class_of_root.entry(root).or_insert(next));
    }
    let n_classes = class_of_root.len();
    let mut labels: Vec<Option<String>> = vec![None; n_classes];
    // Preferred label: a fresh variable bound by Fr, first in rule order.
    for (r, rule) in model.rules.iter().enumerate() {
        for v in rule.fresh_vars() {
            if let Some(&o) = occ_index_get(&occ, &per_rule[r], &Term::Var(v.clone())) {
                if let Some(&c) = class_of_root.get(&uf.find(o)) {
                    labels[c].get_or_insert_with(|| v.name.to_string());
                }
            }
        }
    }
    for (n, &c) in nodes.iter().zip(&class_of) {
        labels[c].get_or_insert_with(|| match &n.term {
            Term::Var(v) if v.sort != Sort::Public => v.name.to_string(),
            _ => n.label.clone(),
        });
    }
    let mut labels: Vec<String> = labels.into_iter().map(Option::unwrap).collect();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for l in labels.iter_mut() {
        let count = seen.entry(l.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            *l = format!("{l}#{count}");
        }
    }
    Partition { class_of, labels }
}

fn occ_index_get<'a>(occ: &[(usize, Term)], ids: &'a [usize], t: &Term) -> Option<&'a usize> {
    ids.iter().find(|&&o| &occ[o].1 == t)
}

#[cfg(test)]
mod tests {
    use crate::keydep::{extract, ExtractOptions};
    use crate::model::parse_model;

    fn classes(body: &str) -> Vec<String> {
        let m = parse_model(&format!("theory T begin {body} end")).unwrap();
        extract(&m, &ExtractOptions::default()).unwrap().dag.labels().to_vec()
    }

    #[test]
    fn state_fact_merges() {
        let l = classes(
            "rule A: [Fr(~k)] --> [St('a', ~k), Out(senc('x', ~k))]
             rule B: [St(id, k)] --> [Out(senc('y', k))]",
        );
        assert_eq!(l, vec!["k"]);
    }

    #[test]
    fn out_in_merges() {
        let l = classes(
            "rule S: [Fr(~eJoin), Fr(~m)] --> [Out(senc(~m, ~eJoin))]
             rule R: [In(senc(x, eJoin2)), !Key(eJoin2)] --> [Out(senc('ack', eJoin2))]",
        );
        assert_eq!(l, vec!["eJoin", "m"]);
    }

    #[test]
    fn unrelated_keys_stay_apart() {
        let l = classes(
            "rule A: [Fr(~k1)] --> [Out(senc('a', ~k1))]
             rule B: [Fr(~k2)] --> [Out(senc('b', ~k2))]",
        );
        assert_eq!(l, vec!["k1", "k2"]);
    }

    #[test]
    fn label_collision_suffix() {
        let l = classes(
            "rule A: [Fr(~k)] --> [Out(senc('a', ~k))]
             rule B: [Fr(~k)] --> [Out(senc('b', ~k))]",
        );
        assert_eq!(l, vec!["k", "k#2"]);
    }
}
