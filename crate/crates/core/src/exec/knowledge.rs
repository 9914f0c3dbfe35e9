use std::collections::BTreeSet;

use crate::term::{normalize, Term};

/// Attacker knowledge: the set of ground terms obtained by decomposing every
/// received message as far as the known keys allow. Composition is implicit
/// and checked on demand by [`Knowledge::derivable`], up to a nesting limit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Knowledge {
    known: BTreeSet<Term>,
    depth_limit: usize,
}

impl Knowledge {
    pub fn new(depth_limit: usize) -> Self {
        Knowledge {
            known: BTreeSet::new(),
            depth_limit,
        }
    }

    /// Closure of a set of terms.
    pub fn closure(terms: impl IntoIterator<Item = Term>, depth_limit: usize) -> Self {
        let mut k = Knowledge::new(depth_limit);
        k.extend(terms);
        k
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn add(&mut self, t: Term) {
        self.extend([t]);
    }

    pub fn extend(&mut self, terms: impl IntoIterator<Item = Term>) {
        let mut queue: Vec<Term> = terms
            .into_iter()
            .map(|t| normalize(&t))
            .filter(|t| !self.known.contains(t))
            .collect();
        if queue.is_empty() {
            return;
        }
        // ciphertexts whose payload is still hidden
        let mut locked: Vec<Term> = self
            .known
            .iter()
            .filter(|t| matches!(t.head(), Some("senc" | "aenc")) && !self.known.contains(&t.args()[0]))
            .cloned()
            .collect();
        loop {
            while let Some(t) = queue.pop() {
                if !self.known.insert(t.clone()) {
                    continue;
                }
                match (t.head(), t.args()) {
                    (Some("pair"), [a, b]) => queue.extend([a.clone(), b.clone()]),
                    (Some("senc" | "aenc"), _) => locked.push(t),
                    _ => {}
                }
            }
            let mut opened = false;
            locked.retain(|c| {
                let open = self.opens(c);
                if open {
                    queue.push(c.args()[0].clone());
                    opened = true;
                }
                !open
            });
            if !opened {
                return;
            }
        }
    }

    /// Whether the attacker holds what it takes to decrypt `c`.
    fn opens(&self, c: &Term) -> bool {
        match (c.head(), c.args()) {
            (Some("senc"), [_, k]) => self.derivable(k),
            (Some("aenc"), [_, Term::App(p, inner)]) if p == "pk" => self.derivable(&inner[0]),
            _ => false,
        }
    }

    /// Terms obtained by analysis (not including compositions).
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.known.iter()
    }

    /// Known terms built with function symbol `f`.
    pub fn with_head<'a>(&'a self, f: &'a str) -> impl Iterator<Item = &'a Term> {
        self.known
            .range(Term::App(f.into(), Vec::new().into())..)
            .take_while(move |t| matches!(t, Term::App(g, _) if g == f))
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    pub fn knows(&self, t: &Term) -> bool {
        self.known.contains(t)
    }

    /// Whether the attacker can produce `t`.
    pub fn derivable(&self, t: &Term) -> bool {
        self.derive(&normalize(t), self.depth_limit)
    }

    fn derive(&self, t: &Term, budget: usize) -> bool {
        if self.known.contains(t) {
            return true;
        }
        match t {
            Term::Const(_) => true,
            Term::App(_, args) if args.is_empty() => true,
            Term::App(_, args) => budget > 0 && args.iter().all(|a| self.derive(a, budget - 1)),
            Term::Var(_) | Term::Name(_) => false,
        }
    }

    /// Known fresh values.
    pub fn names(&self) -> impl Iterator<Item = &Term> {
        self.known.iter().filter(|t| matches!(t, Term::Name(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Name;

    fn n(label: &str) -> Term {
        Term::Name(Name {
            label: label.into(),
            id: 1,
        })
    }

    #[test]
    fn symmetric_and_asymmetric_analysis() {
        let k = Knowledge::closure([Term::senc(n("m"), n("k")), n("k")], 4);
        assert!(k.derivable(&n("m")));
        let k = Knowledge::closure([Term::aenc(n("e"), Term::pk(n("j"))), n("j")], 4);
        assert!(k.derivable(&n("e")));
        let k = Knowledge::closure([Term::aenc(n("e"), Term::pk(n("j")))], 4);
        assert!(!k.derivable(&n("e")));
    }

    #[test]
    fn late_key_unlocks_earlier_ciphertext() {
        let mut k = Knowledge::closure([Term::senc(n("a"), n("b")), Term::senc(n("b"), n("c"))], 4);
        assert!(!k.derivable(&n("a")));
        k.add(n("c"));
        assert!(k.derivable(&n("a")));
    }

    #[test]
    fn composition_and_limits() {
        let k = Knowledge::closure([n("k")], 2);
        assert!(k.derivable(&Term::senc(Term::constant("x"), n("k"))));
        assert!(k.derivable(&Term::h(Term::pk(n("k")))));
        assert!(!k.derivable(&Term::h(Term::h(Term::h(n("k"))))));
        assert!(!k.derivable(&n("other")));
        assert!(k.derivable(&Term::true_()));
    }

    #[test]
    fn head_index() {
        let k = Knowledge::closure([Term::pair(Term::h(n("a")), Term::pk(n("b")))], 4);
        assert_eq!(k.with_head("h").collect::<Vec<_>>(), vec![&Term::h(n("a"))]);
        assert_eq!(k.with_head("pair").count(), 1);
        assert_eq!(k.with_head("senc").count(), 0);
    }

    #[test]
    fn no_spontaneous_names() {
        let k = Knowledge::closure([Term::constant("a"), Term::constant("b")], 4);
        assert_eq!(k.names().count(), 0);
    }
}
