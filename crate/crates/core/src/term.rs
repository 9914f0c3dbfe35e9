//! Sorted first-order terms over the fixed cryptographic signature.
//!
//! Terms are plain immutable values. Variables carry one of three sorts
//! (fresh, public, message) with `fresh ∪ public ⊆ msg`: a message variable
//! may be bound to a fresh or public term but never the other way round.
//! Ground fresh values minted during execution are [`Name`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Variable sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Fresh,
    Public,
    Msg,
}

impl Sort {
    /// Whether a variable of sort `self` may be bound to a term of sort `other`.
    pub fn admits(self, other: Sort) -> bool {
        match self {
            Sort::Msg => true,
            Sort::Fresh => other == Sort::Fresh,
            Sort::Public => other == Sort::Public,
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            Sort::Fresh => "~",
            Sort::Public => "$",
            Sort::Msg => "",
        }
    }
}

/// Shared immutable string; cloning is a reference count bump.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::ops::Deref for Sym {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Sym {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Self {
        Sym(s.into())
    }
}

impl From<String> for Sym {
    fn from(s: String) -> Self {
        Sym(s.into())
    }
}

impl From<&String> for Sym {
    fn from(s: &String) -> Self {
        Sym(s.as_str().into())
    }
}

impl PartialEq<str> for Sym {
    fn eq(&self, other: &str) -> bool {
        &*self.0 == other
    }
}

impl PartialEq<&str> for Sym {
    fn eq(&self, other: &&str) -> bool {
        &*self.0 == *other
    }
}

impl PartialEq<String> for Sym {
    fn eq(&self, other: &String) -> bool {
        *self.0 == **other
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub sort: Sort,
    pub name: Sym,
}

impl Var {
    pub fn new(sort: Sort, name: impl Into<Sym>) -> Self {
        Var {
            sort,
            name: name.into(),
        }
    }
    pub fn fresh(name: impl Into<Sym>) -> Self {
        Self::new(Sort::Fresh, name)
    }
    pub fn public(name: impl Into<Sym>) -> Self {
        Self::new(Sort::Public, name)
    }
    pub fn msg(name: impl Into<Sym>) -> Self {
        Self::new(Sort::Msg, name)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sort.prefix(), self.name)
    }
}

/// A fresh value minted at run time, printed `~label.id` like the prover does.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub label: Sym,
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// Public constant `'c'`.
    Const(Sym),
    Name(Name),
    App(Sym, Arc<[Term]>),
}

/// Fixed symbols with their arities.
pub const BUILTIN_SYMBOLS: &[(&str, usize)] = &[
    ("senc", 2),
    ("sdec", 2),
    ("aenc", 2),
    ("adec", 2),
    ("pk", 1),
    ("sign", 2),
    ("verify", 3),
    ("h", 1),
    ("kdf", 2),
    ("pair", 2),
    ("fst", 1),
    ("snd", 1),
    ("true", 0),
];

const DESTRUCTORS: &[&str] = &["sdec", "adec", "fst", "snd", "verify"];

pub fn is_destructor(symbol: &str) -> bool {
    DESTRUCTORS.contains(&symbol)
}

/// The function symbols a model may use: the fixed set plus declarations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<String, usize>,
}

impl Default for Signature {
    fn default() -> Self {
        Signature {
            symbols: BUILTIN_SYMBOLS
                .iter()
                .map(|(n, a)| (n.to_string(), *a))
                .collect(),
        }
    }
}

impl Signature {
    pub fn with_declared<'a>(declared: impl IntoIterator<Item = &'a (String, usize)>) -> Self {
        let mut sig = Signature::default();
        for (name, arity) in declared {
            sig.symbols.insert(name.clone(), *arity);
        }
        sig
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.symbols.get(symbol).copied()
    }

    pub fn is_builtin(symbol: &str, arity: usize) -> bool {
        BUILTIN_SYMBOLS.contains(&(symbol, arity))
    }
}

impl Term {
    pub fn var(v: Var) -> Self {
        Term::Var(v)
    }
    pub fn fresh(name: &str) -> Self {
        Term::Var(Var::fresh(name))
    }
    pub fn public(name: &str) -> Self {
        Term::Var(Var::public(name))
    }
    pub fn msg(name: &str) -> Self {
        Term::Var(Var::msg(name))
    }
    pub fn constant(name: &str) -> Self {
        Term::Const(name.into())
    }
    pub fn app(symbol: &str, args: Vec<Term>) -> Self {
        Term::App(symbol.into(), args.into())
    }
    pub fn pair(a: Term, b: Term) -> Self {
        Term::app("pair", vec![a, b])
    }
    pub fn senc(m: Term, k: Term) -> Self {
        Term::app("senc", vec![m, k])
    }
    pub fn aenc(m: Term, k: Term) -> Self {
        Term::app("aenc", vec![m, k])
    }
    pub fn pk(k: Term) -> Self {
        Term::app("pk", vec![k])
    }
    pub fn sign(m: Term, k: Term) -> Self {
        Term::app("sign", vec![m, k])
    }
    pub fn h(m: Term) -> Self {
        Term::app("h", vec![m])
    }
    pub fn kdf(a: Term, b: Term) -> Self {
        Term::app("kdf", vec![a, b])
    }
    pub fn true_() -> Self {
        Term::App("true".into(), Vec::new().into())
    }

    /// Right-nested tuple `<a, b, c>` = `pair(a, pair(b, c))`.
    pub fn tuple(mut items: Vec<Term>) -> Self {
        assert!(!items.is_empty(), "empty tuple");
        let mut acc = items.pop().unwrap();
        while let Some(t) = items.pop() {
            acc = Term::pair(t, acc);
        }
        acc
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort,
            Term::Name(_) => Sort::Fresh,
            Term::Const(_) => Sort::Public,
            Term::App(..) => Sort::Msg,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Term::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, a) => a,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(self, Term::App(_, a) if !a.is_empty())
    }

    /// Variables in first-occurrence order, without duplicates.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Name(n) => {
                out.insert(n.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.names(out)),
            _ => {}
        }
    }

    /// Pre-order traversal of all subterms, including `self`.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            if let Term::App(_, args) = out[i] {
                out.extend(args.iter());
            }
            i += 1;
        }
        out
    }

    pub fn contains(&self, needle: &Term) -> bool {
        self == needle || self.args().iter().any(|a| a.contains(needle))
    }

    /// Constructor nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::App(_, args) if !args.is_empty() => {
                1 + args.iter().map(Term::depth).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Components of a right-nested tuple (a non-pair yields itself).
    pub fn tuple_items(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Term::App(f, args) = cur {
            if f != "pair" {
                break;
            }
            out.push(&args[0]);
            cur = &args[1];
        }
        out.push(cur);
        out
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::App(s, args) => Term::App(s.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
            other => other.clone(),
        }
    }

    pub fn map_names(&self, f: &mut impl FnMut(&Name) -> Term) -> Term {
        self.names_changed(f).unwrap_or_else(|| self.clone())
    }

    fn names_changed(&self, f: &mut impl FnMut(&Name) -> Term) -> Option<Term> {
        match self {
            Term::Name(n) => Some(f(n)),
            Term::App(s, args) => rebuild(s, args, |a| a.names_changed(f)),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "'{c}'"),
            Term::Name(n) => write!(f, "~{}.{}", n.label, n.id),
            Term::App(s, args) if s == "pair" && args.len() == 2 => {
                let items = self.tuple_items();
                write!(f, "<")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ">")
            }
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Finite map from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        Substitution {
            map: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.map.insert(v, t);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        substitute(t, self)
    }

    /// `self` followed by `other`: applying the result equals applying `self` then `other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Var, Term> = self
            .map
            .iter()
            .map(|(v, t)| (v.clone(), other.apply(t)))
            .collect();
        for (v, t) in &other.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        map.retain(|v, t| t.as_var() != Some(v));
        Substitution { map }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}↦{t}")?;
        }
        write!(f, "}}")
    }
}

/// Replace every variable in the domain of `s`, recursively.
pub fn substitute(t: &Term, s: &Substitution) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    subst_changed(t, s).unwrap_or_else(|| t.clone())
}

/// `None` when `t` is unaffected, so unchanged subterms stay shared.
fn subst_changed(t: &Term, s: &Substitution) -> Option<Term> {
    match t {
        Term::Var(v) => match s.get(v) {
            // images of an occurs-checked substitution cannot loop
            Some(img) if img.as_var() != Some(v) => Some(substitute(img, s)),
            _ => None,
        },
        Term::App(f, args) => rebuild(f, args, |a| subst_changed(a, s)),
        _ => None,
    }
}

/// Rebuild `f(args)` if `g` changes any argument.
fn rebuild(f: &Sym, args: &Arc<[Term]>, mut g: impl FnMut(&Term) -> Option<Term>) -> Option<Term> {
    let mut out: Option<Vec<Term>> = None;
    for (i, a) in args.iter().enumerate() {
        if let Some(n) = g(a) {
            out.get_or_insert_with(|| args[..i].to_vec()).push(n);
        } else if let Some(v) = out.as_mut() {
            v.push(a.clone());
        }
    }
    out.map(|v| Term::App(f.clone(), v.into()))
}

fn walk<'a>(t: &'a Term, bindings: &'a BTreeMap<Var, Term>) -> &'a Term {
    let mut cur = t;
    while let Term::Var(v) = cur {
        match bindings.get(v) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur
}

fn occurs(v: &Var, t: &Term, bindings: &BTreeMap<Var, Term>) -> bool {
    match walk(t, bindings) {
        Term::Var(w) => w == v,
        Term::App(_, args) => args.iter().any(|a| occurs(v, a, bindings)),
        _ => false,
    }
}

fn bind(v: &Var, t: &Term, bindings: &mut BTreeMap<Var, Term>) -> bool {
    if !v.sort.admits(t.sort()) || occurs(v, t, bindings) {
        return false;
    }
    bindings.insert(v.clone(), t.clone());
    true
}

/// Most general syntactic unifier of all pairs, if one exists.
pub fn unify_all<'a>(pairs: impl IntoIterator<Item = (&'a Term, &'a Term)>) -> Option<Substitution> {
    let mut bindings: BTreeMap<Var, Term> = BTreeMap::new();
    let mut stack: Vec<(Term, Term)> = pairs
        .into_iter()
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect();
    while let Some((a, b)) = stack.pop() {
        let a = walk(&a, &bindings).clone();
        let b = walk(&b, &bindings).clone();
        if a == b {
            continue;
        }
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) => {
                if x.sort.admits(y.sort) {
                    bindings.insert(x.clone(), b.clone());
                } else if y.sort.admits(x.sort) {
                    bindings.insert(y.clone(), a.clone());
                } else {
                    return None;
                }
            }
            (Term::Var(x), _) => {
                if !bind(x, &b, &mut bindings) {
                    return None;
                }
            }
            (_, Term::Var(y)) => {
                if !bind(y, &a, &mut bindings) {
                    return None;
                }
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                stack.extend(fa.iter().cloned().zip(ga.iter().cloned()));
            }
            _ => return None,
        }
    }
    // resolve the triangular form into an idempotent substitution
    let raw = Substitution { map: bindings };
    let resolved = raw
        .map
        .iter()
        .map(|(v, t)| (v.clone(), substitute(t, &raw)))
        .collect();
    Some(Substitution { map: resolved })
}

pub fn unify(t1: &Term, t2: &Term) -> Option<Substitution> {
    unify_all([(t1, t2)])
}

/// One-way matching: extends `s` so that `s(pattern) == target`.
/// `target` is treated as rigid (its variables are never bound).
pub fn match_term(pattern: &Term, target: &Term, s: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                if !v.sort.admits(target.sort()) {
                    return false;
                }
                s.insert(v.clone(), target.clone());
                true
            }
        },
        Term::App(f, pa) => match target {
            Term::App(g, ta) if f == g && pa.len() == ta.len() => {
                pa.iter().zip(ta.iter()).all(|(p, t)| match_term(p, t, s))
            }
            _ => false,
        },
        _ => pattern == target,
    }
}

fn has_destructor(t: &Term) -> bool {
    match t {
        Term::App(f, args) => is_destructor(f) || args.iter().any(has_destructor),
        _ => false,
    }
}

/// Normal form under the convergent destructor equations.
pub fn normalize(t: &Term) -> Term {
    if !has_destructor(t) {
        return t.clone();
    }
    let Term::App(f, args) = t else {
        return t.clone();
    };
    let args: Vec<Term> = args.iter().map(normalize).collect();
    match (f.as_str(), &args[..]) {
        ("sdec", [c, k]) => {
            if let Term::App(g, ca) = c {
                if g == "senc" && &ca[1] == k {
                    return ca[0].clone();
                }
            }
        }
        ("adec", [c, k]) => {
            if let Term::App(g, ca) = c {
                if g == "aenc" && ca[1] == Term::pk(k.clone()) {
                    return ca[0].clone();
                }
            }
        }
        ("fst", [p]) => {
            if p.head() == Some("pair") {
                return p.args()[0].clone();
            }
        }
        ("snd", [p]) => {
            if p.head() == Some("pair") {
                return p.args()[1].clone();
            }
        }
        ("verify", [s, m, pk]) => {
            if let Term::App(g, sa) = s {
                if g == "sign" && &sa[0] == m && *pk == Term::pk(sa[1].clone()) {
                    return Term::true_();
                }
            }
        }
        _ => {}
    }
    Term::App(f.clone(), args.into())
}

/// Role of a subterm sitting in a key position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum KeyRole {
    SymKey,
    AsymPrivKey,
    SigKey,
    KdfInput,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPosition {
    pub key: Term,
    pub role: KeyRole,
    /// What the key protects: encrypted or signed payload (none for kdf inputs).
    pub payload: Option<Term>,
}

/// Every subterm of `t` that occupies a key position, in pre-order.
pub fn key_positions(t: &Term) -> Vec<KeyPosition> {
    let mut out = Vec::new();
    for sub in t.subterms() {
        let Term::App(f, args) = sub else { continue };
        match (f.as_str(), &args[..]) {
            ("senc", [m, k]) => out.push(KeyPosition {
                key: k.clone(),
                role: KeyRole::SymKey,
                payload: Some(m.clone()),
            }),
            ("aenc", [m, pk]) => {
                if let Term::App(g, inner) = pk {
                    if g == "pk" {
                        out.push(KeyPosition {
                            key: inner[0].clone(),
                            role: KeyRole::AsymPrivKey,
                            payload: Some(m.clone()),
                        });
                    }
                }
            }
            ("sign", [m, k]) => out.push(KeyPosition {
                key: k.clone(),
                role: KeyRole::SigKey,
                payload: Some(m.clone()),
            }),
            ("kdf", [a, b]) => {
                for x in [a, b] {
                    out.push(KeyPosition {
                        key: x.clone(),
                        role: KeyRole::KdfInput,
                        payload: None,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::msg("x")
    }
    fn k() -> Term {
        Term::msg("k")
    }

    #[test]
    fn substitute_examples() {
        let s = Substitution::from_pairs([(Var::msg("x"), Term::constant("m"))]);
        assert_eq!(
            substitute(&Term::senc(x(), k()), &s),
            Term::senc(Term::constant("m"), k())
        );
        assert_eq!(substitute(&Term::constant("m"), &Substitution::new()), Term::constant("m"));
        let s = Substitution::from_pairs([(Var::msg("x"), Term::h(Term::constant("a")))]);
        let ha = Term::h(Term::constant("a"));
        assert_eq!(substitute(&Term::pair(x(), x()), &s), Term::pair(ha.clone(), ha));
    }

    #[test]
    fn unify_examples() {
        let pgk = Term::fresh("pgk");
        let s = unify(&Term::senc(x(), k()), &Term::senc(Term::constant("m"), pgk.clone())).unwrap();
        assert_eq!(s.get(&Var::msg("x")), Some(&Term::constant("m")));
        assert_eq!(s.get(&Var::msg("k")), Some(&pgk));
        assert_eq!(s.len(), 2);
        assert!(unify(&Term::senc(x(), k()), &Term::aenc(Term::constant("m"), Term::msg("p"))).is_none());
        assert!(unify(&x(), &Term::h(x())).is_none());
    }

    #[test]
    fn unify_respects_sorts() {
        // msg may take fresh, fresh may not take public
        assert!(unify(&Term::msg("x"), &Term::fresh("k")).is_some());
        assert!(unify(&Term::fresh("k"), &Term::public("A")).is_none());
        assert!(unify(&Term::fresh("k"), &Term::constant("c")).is_none());
        assert!(unify(&Term::public("A"), &Term::constant("c")).is_some());
        let s = unify(&Term::fresh("k"), &Term::msg("x")).unwrap();
        assert_eq!(s.get(&Var::msg("x")), Some(&Term::fresh("k")));
    }

    #[test]
    fn unifier_is_idempotent() {
        let t1 = Term::tuple(vec![x(), Term::msg("y"), Term::msg("z")]);
        let t2 = Term::tuple(vec![Term::msg("y"), Term::msg("z"), Term::h(Term::constant("a"))]);
        let s = unify(&t1, &t2).unwrap();
        assert_eq!(s.apply(&t1), s.apply(&t2));
        for (_, img) in s.iter() {
            assert_eq!(s.apply(img), *img);
        }
    }

    #[test]
    fn normalize_examples() {
        let m = Term::constant("m");
        let k = Term::fresh("k");
        assert_eq!(normalize(&Term::app("sdec", vec![Term::senc(m.clone(), k.clone()), k.clone()])), m);
        let e = Term::fresh("e");
        let j = Term::fresh("j");
        let t = Term::app("adec", vec![Term::aenc(e.clone(), Term::pk(j.clone())), j.clone()]);
        assert_eq!(normalize(&t), e);
        let stuck = Term::app("sdec", vec![Term::senc(m.clone(), Term::fresh("k1")), Term::fresh("k2")]);
        assert_eq!(normalize(&stuck), stuck);
        let v = Term::app("verify", vec![Term::sign(m.clone(), k.clone()), m.clone(), Term::pk(k.clone())]);
        assert_eq!(normalize(&v), Term::true_());
        let p = Term::app("snd", vec![Term::pair(m.clone(), k.clone())]);
        assert_eq!(normalize(&p), k);
    }

    #[test]
    fn key_positions_examples() {
        let kp = key_positions(&Term::senc(Term::fresh("ppk"), Term::fresh("eJoin")));
        assert_eq!(kp.len(), 1);
        assert_eq!((kp[0].key.clone(), kp[0].role), (Term::fresh("eJoin"), KeyRole::SymKey));
        assert!(key_positions(&Term::h(Term::msg("m"))).is_empty());
        let kp = key_positions(&Term::aenc(Term::fresh("eJoin"), Term::pk(Term::fresh("jrek"))));
        assert_eq!(kp.len(), 1);
        assert_eq!((kp[0].key.clone(), kp[0].role), (Term::fresh("jrek"), KeyRole::AsymPrivKey));
        // a raw public key variable is not a key position
        assert!(key_positions(&Term::aenc(Term::fresh("e"), Term::msg("pkj"))).is_empty());
        let kp = key_positions(&Term::kdf(Term::fresh("a"), Term::fresh("b")));
        assert_eq!(kp.iter().map(|p| p.role).collect::<Vec<_>>(), vec![KeyRole::KdfInput; 2]);
    }

    #[test]
    fn tuple_display_round() {
        let t = Term::tuple(vec![Term::constant("a"), Term::fresh("k"), Term::public("B")]);
        assert_eq!(t.to_string(), "<'a', ~k, $B>");
        let nested = Term::pair(Term::pair(Term::msg("a"), Term::msg("b")), Term::msg("c"));
        assert_eq!(nested.to_string(), "<<a, b>, c>");
        assert_eq!(Term::true_().to_string(), "true");
    }
}
