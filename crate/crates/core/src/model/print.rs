use std::fmt::Write;

use super::{Fact, Model, Rule};
use crate::term::Term;

/// Print a model back in the rule language. Output re-parses to an equal model.
pub fn serialize(model: &Model) -> String {
    let mut out = String::new();
    writeln!(out, "theory {}", model.name).unwrap();
    writeln!(out, "begin").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "builtins: symmetric-encryption, asymmetric-encryption, signing, hashing"
    )
    .unwrap();
    let mut funcs = vec!["kdf/2".to_string()];
    funcs.extend(model.functions.iter().map(|(n, a)| format!("{n}/{a}")));
    writeln!(out, "functions: {}", funcs.join(", ")).unwrap();
    writeln!(out).unwrap();
    for r in &model.rules {
        write_rule(&mut out, r);
        writeln!(out).unwrap();
    }
    for r in &model.restrictions {
        writeln!(out, "restriction {}:\n  \"{}\"\n", r.name, r.formula).unwrap();
    }
    for l in &model.lemmas {
        write!(out, "lemma {}", l.name).unwrap();
        if !l.attributes.is_empty() {
            write!(out, " [{}]", l.attributes.join(", ")).unwrap();
        }
        write!(out, ":").unwrap();
        if let Some(q) = &l.quantifier {
            write!(out, " {q}").unwrap();
        }
        writeln!(out, "\n  \"{}\"\n", l.formula).unwrap();
    }
    writeln!(out, "end").unwrap();
    out
}

fn write_rule(out: &mut String, r: &Rule) {
    writeln!(out, "rule {}:", r.name).unwrap();
    // Body facts are stored expanded; fold the let bindings back in so that
    // re-parsing reproduces them.
    let fold = |f: &Fact| -> Fact {
        let mut f = f.clone();
        for (v, t) in r.let_bindings.iter().rev() {
            f = f.map_terms(|x| replace(x, t, &Term::Var(v.clone())));
        }
        f
    };
    if !r.let_bindings.is_empty() {
        writeln!(out, "  let").unwrap();
        let mut earlier: Vec<(Term, Term)> = Vec::new();
        for (v, t) in &r.let_bindings {
            let mut shown = t.clone();
            for (bound, var) in earlier.iter().rev() {
                shown = replace(&shown, bound, var);
            }
            writeln!(out, "    {v} = {shown}").unwrap();
            earlier.push((t.clone(), Term::Var(v.clone())));
        }
        writeln!(out, "  in").unwrap();
    }
    let list = |fs: &[Fact]| -> String {
        fs.iter()
            .map(|f| fold(f).to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    writeln!(out, "  [ {} ]", list(&r.premises)).unwrap();
    if r.actions.is_empty() {
        writeln!(out, "  -->").unwrap();
    } else {
        writeln!(out, "  --[ {} ]->", list(&r.actions)).unwrap();
    }
    writeln!(out, "  [ {} ]", list(&r.conclusions)).unwrap();
}

/// Replace every occurrence of `from` in `t` by `to`.
fn replace(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    match t {
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| replace(a, from, to)).collect()),
        _ => t.clone(),
    }
}
