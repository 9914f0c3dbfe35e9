use super::{validate, Fact, FactAnnotation, Lemma, Model, ModelError, Restriction, Rule, Severity};
use crate::term::{substitute, Signature, Substitution, Term, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(usize),
    Quoted(String),
    Str(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Comma,
    Colon,
    Bang,
    Tilde,
    Dollar,
    Eq,
    Slash,
    Plus,
    Minus,
    /// `--[`
    ActOpen,
    /// `]->`
    ActClose,
    /// `-->`
    Arrow,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ModelError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: &str| ModelError::Syntax {
        line,
        col,
        msg: msg.to_string(),
    };
    macro_rules! advance {
        ($n:expr) => {
            for _ in 0..$n {
                if bytes[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        };
    }
    while i < bytes.len() {
        let c = bytes[i];
        let (tl, tc, ts) = (line, col, i);
        if c.is_ascii_whitespace() {
            advance!(1);
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                advance!(1);
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            match src[i + 2..].find("*/") {
                Some(off) => advance!(off + 4),
                None => return Err(err(tl, tc, "unterminated block comment")),
            }
            continue;
        }
        let (tok, len) = if c.is_ascii_alphabetic() || c == b'_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                j += 1;
            }
            (Tok::Ident(src[i..j].to_string()), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            (Tok::Number(src[i..j].parse().unwrap()), j - i)
        } else if c == b'\'' {
            match src[i + 1..].find(['\'', '\n']) {
                Some(off) if bytes[i + 1 + off] == b'\'' => {
                    (Tok::Quoted(src[i + 1..i + 1 + off].to_string()), off + 2)
                }
                _ => return Err(err(tl, tc, "unterminated constant")),
            }
        } else if c == b'"' {
            match src[i + 1..].find('"') {
                Some(off) => (Tok::Str(src[i + 1..i + 1 + off].to_string()), off + 2),
                None => return Err(err(tl, tc, "unterminated string")),
            }
        } else if src[i..].starts_with("--[") {
            (Tok::ActOpen, 3)
        } else if src[i..].starts_with("]->") {
            (Tok::ActClose, 3)
        } else if src[i..].starts_with("-->") {
            (Tok::Arrow, 3)
        } else {
            let t = match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBrack,
                b']' => Tok::RBrack,
                b'<' => Tok::Lt,
                b'>' => Tok::Gt,
                b',' => Tok::Comma,
                b':' => Tok::Colon,
                b'!' => Tok::Bang,
                b'~' => Tok::Tilde,
                b'$' => Tok::Dollar,
                b'=' => Tok::Eq,
                b'/' => Tok::Slash,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                _ => {
                    return Err(err(tl, tc, &format!("unexpected character `{}`", c as char)))
                }
            };
            (t, 1)
        };
        advance!(len);
        out.push(Token {
            tok,
            line: tl,
            col: tc,
            start: ts,
            end: i,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    sig: Signature,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ModelError> {
        Ok(Parser {
            src,
            toks: lex(src)?,
            pos: 0,
            sig: Signature::default(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ModelError> {
        let t = &self.toks[self.pos];
        Err(ModelError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ModelError> {
        if *self.peek() == tok {
            Ok(self.next())
        } else {
            self.fail(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ModelError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.fail(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn model(&mut self) -> Result<Model, ModelError> {
        if !self.eat_keyword("theory") {
            return self.fail("expected `theory`");
        }
        let mut model = Model {
            name: self.ident()?,
            ..Model::default()
        };
        self.eat_keyword("begin");
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "end" => {
                        self.next();
                        if *self.peek() != Tok::Eof {
                            return self.fail("unexpected input after `end`");
                        }
                        break;
                    }
                    "builtins" => self.builtins()?,
                    "functions" => {
                        let decls = self.functions()?;
                        for (name, arity) in decls {
                            if !Signature::is_builtin(&name, arity) {
                                model.functions.push((name, arity));
                            }
                        }
                        self.sig = Signature::with_declared(&model.functions);
                    }
                    "rule" => model.rules.push(self.rule()?),
                    "lemma" => model.lemmas.push(self.lemma()?),
                    "restriction" => model.restrictions.push(self.restriction()?),
                    other => return self.fail(format!("unexpected `{other}`")),
                },
                other => return self.fail(format!("unexpected {}", describe(&other))),
            }
        }
        Ok(model)
    }

    fn builtins(&mut self) -> Result<(), ModelError> {
        self.next();
        self.expect(Tok::Colon, "`:`")?;
        loop {
            self.ident()?;
            while *self.peek() == Tok::Minus {
                self.next();
                self.ident()?;
            }
            if *self.peek() != Tok::Comma {
                return Ok(());
            }
            self.next();
        }
    }

    fn functions(&mut self) -> Result<Vec<(String, usize)>, ModelError> {
        self.next();
        self.expect(Tok::Colon, "`:`")?;
        let mut out = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect(Tok::Slash, "`/`")?;
            let arity = match self.next().tok {
                Tok::Number(n) => n,
                _ => {
                    self.pos -= 1;
                    return self.fail("expected arity");
                }
            };
            if let Some(prev) = self.sig.arity(&name) {
                if prev != arity {
                    return self.fail(format!("function `{name}` redeclared with arity {arity}"));
                }
            }
            out.push((name, arity));
            if *self.peek() != Tok::Comma {
                return Ok(out);
            }
            self.next();
        }
    }

    /// `[a, b=c, ...]` kept as verbatim source slices.
    fn attributes(&mut self) -> Result<Vec<String>, ModelError> {
        let mut attrs = Vec::new();
        if *self.peek() != Tok::LBrack {
            return Ok(attrs);
        }
        self.next();
        let mut start: Option<usize> = None;
        let mut end = 0;
        loop {
            let t = self.next();
            match t.tok {
                Tok::RBrack | Tok::Comma => {
                    if let Some(s) = start.take() {
                        attrs.push(self.src[s..end].trim().to_string());
                    }
                    if t.tok == Tok::RBrack {
                        return Ok(attrs);
                    }
                }
                Tok::Eof => return self.fail("unterminated attribute list"),
                _ => {
                    start.get_or_insert(t.start);
                    end = t.end;
                }
            }
        }
    }

    fn rule(&mut self) -> Result<Rule, ModelError> {
        self.next();
        let name = self.ident()?;
        self.attributes()?;
        self.expect(Tok::Colon, "`:` after rule name")?;
        let mut lets: Vec<(Var, Term)> = Vec::new();
        let mut scope = Substitution::new();
        if self.eat_keyword("let") {
            while !self.eat_keyword("in") {
                let v = self.variable()?;
                self.expect(Tok::Eq, "`=` in let binding")?;
                let t = substitute(&self.term()?, &scope);
                scope.insert(v.clone(), t.clone());
                lets.push((v, t));
            }
        }
        let premises = self.fact_list()?;
        let actions = match self.peek() {
            Tok::Arrow => {
                self.next();
                Vec::new()
            }
            Tok::ActOpen => {
                self.next();
                let facts = self.facts_until(Tok::ActClose)?;
                self.next();
                facts
            }
            other => return self.fail(format!("expected `-->` or `--[`, found {}", describe(other))),
        };
        let conclusions = self.fact_list()?;
        let expand = |fs: Vec<Fact>| -> Vec<Fact> {
            fs.into_iter()
                .map(|f| f.map_terms(|t| substitute(t, &scope)))
                .collect()
        };
        Ok(Rule {
            name,
            let_bindings: lets,
            premises: expand(premises),
            actions: expand(actions),
            conclusions: expand(conclusions),
        })
    }

    fn fact_list(&mut self) -> Result<Vec<Fact>, ModelError> {
        self.expect(Tok::LBrack, "`[`")?;
        let facts = self.facts_until(Tok::RBrack)?;
        self.next();
        Ok(facts)
    }

    fn facts_until(&mut self, close: Tok) -> Result<Vec<Fact>, ModelError> {
        let mut facts = Vec::new();
        if *self.peek() == close {
            return Ok(facts);
        }
        loop {
            facts.push(self.fact()?);
            if *self.peek() == close {
                return Ok(facts);
            }
            self.expect(Tok::Comma, "`,` between facts")?;
        }
    }

    fn fact(&mut self) -> Result<Fact, ModelError> {
        let persistent = if *self.peek() == Tok::Bang {
            self.next();
            true
        } else {
            false
        };
        let name = self.ident()?;
        self.expect(Tok::LParen, "`(` after fact name")?;
        let args = self.args(Tok::RParen)?;
        let mut annotation = None;
        if *self.peek() == Tok::LBrack
            && matches!(self.peek_at(1), Tok::Plus | Tok::Minus)
            && *self.peek_at(2) == Tok::RBrack
        {
            self.next();
            annotation = Some(if self.next().tok == Tok::Plus {
                FactAnnotation::Plus
            } else {
                FactAnnotation::Minus
            });
            self.next();
        }
        Ok(Fact {
            name,
            persistent,
            args,
            annotation,
        })
    }

    fn args(&mut self, close: Tok) -> Result<Vec<Term>, ModelError> {
        let mut args = Vec::new();
        if *self.peek() == close {
            self.next();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                t if *t == close => {
                    self.next();
                    return Ok(args);
                }
                Tok::Comma => {
                    self.next();
                }
                other => return self.fail(format!("expected `,` or closing bracket, found {}", describe(other))),
            }
        }
    }

    fn variable(&mut self) -> Result<Var, ModelError> {
        match self.peek() {
            Tok::Tilde => {
                self.next();
                Ok(Var::fresh(self.ident()?))
            }
            Tok::Dollar => {
                self.next();
                Ok(Var::public(self.ident()?))
            }
            _ => Ok(Var::msg(self.ident()?)),
        }
    }

    fn term(&mut self) -> Result<Term, ModelError> {
        let t = self.atom()?;
        if *self.peek() == Tok::Plus {
            let tk = &self.toks[self.pos];
            return Err(ModelError::UnionNotSupported {
                line: tk.line,
                col: tk.col,
            });
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ModelError> {
        match self.peek().clone() {
            Tok::Tilde | Tok::Dollar => Ok(Term::Var(self.variable()?)),
            Tok::Quoted(c) => {
                self.next();
                Ok(Term::Const(c.into()))
            }
            Tok::Lt => {
                self.next();
                let items = self.args(Tok::Gt)?;
                if items.is_empty() {
                    return self.fail("empty tuple");
                }
                Ok(Term::tuple(items))
            }
            Tok::Ident(name) => {
                let at = self.next();
                if *self.peek() == Tok::LParen {
                    self.next();
                    let args = self.args(Tok::RParen)?;
                    match self.sig.arity(&name) {
                        None => Err(ModelError::UnknownSymbol {
                            line: at.line,
                            col: at.col,
                            symbol: name,
                        }),
                        Some(n) if n != args.len() => Err(ModelError::Syntax {
                            line: at.line,
                            col: at.col,
                            msg: format!("`{name}` expects {n} arguments, got {}", args.len()),
                        }),
                        Some(_) => Ok(Term::App(name.into(), args.into())),
                    }
                } else if self.sig.arity(&name) == Some(0) {
                    Ok(Term::App(name.into(), Vec::new().into()))
                } else {
                    Ok(Term::Var(Var::msg(name)))
                }
            }
            other => self.fail(format!("expected term, found {}", describe(&other))),
        }
    }

    fn lemma(&mut self) -> Result<Lemma, ModelError> {
        self.next();
        let name = self.ident()?;
        let attributes = self.attributes()?;
        self.expect(Tok::Colon, "`:` after lemma name")?;
        let mut quantifier = None;
        if let Tok::Ident(q) = self.peek().clone() {
            if q == "all" || q == "exists" {
                self.next();
                self.expect(Tok::Minus, "`-`")?;
                let rest = self.ident()?;
                quantifier = Some(format!("{q}-{rest}"));
            }
        }
        let formula = self.string()?;
        Ok(Lemma {
            name,
            attributes,
            quantifier,
            formula,
        })
    }

    fn restriction(&mut self) -> Result<Restriction, ModelError> {
        self.next();
        let name = self.ident()?;
        self.expect(Tok::Colon, "`:` after restriction name")?;
        Ok(Restriction {
            name,
            formula: self.string()?,
        })
    }

    fn string(&mut self) -> Result<String, ModelError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(s)
            }
            other => self.fail(format!("expected quoted formula, found {}", describe(&other))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(n) => format!("`{n}`"),
        Tok::Quoted(s) => format!("`'{s}'`"),
        Tok::Str(_) => "string".into(),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

/// Parse a model and check its invariants; let bindings are expanded and
/// tuples desugared into right-nested pairs.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let model = Parser::new(text)?.model()?;
    if let Some(d) = validate(&model)
        .into_iter()
        .find(|d| d.severity == Severity::Error)
    {
        return Err(ModelError::Invalid(d));
    }
    Ok(model)
}

/// Parse a single term in model syntax, with `functions` declared on top of
/// the fixed signature.
pub fn parse_term(text: &str, functions: &[(String, usize)]) -> Result<Term, ModelError> {
    let mut p = Parser::new(text)?;
    p.sig = Signature::with_declared(functions);
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.fail("trailing input after term");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DiagnosticKind;

    #[test]
    fn minimal_rule() {
        let m = parse_model("theory T begin rule A: [Fr(~k)] --[New(~k)]-> [Out(senc('m', ~k))] end")
            .unwrap();
        assert_eq!(m.rules.len(), 1);
        assert_eq!(m.rules[0].fresh_vars(), vec![Var::fresh("k")]);
        assert_eq!(
            m.rules[0].conclusions[0].args[0],
            Term::senc(Term::constant("m"), Term::fresh("k"))
        );
    }

    #[test]
    fn out_in_premise_rejected() {
        let err = parse_model("theory T begin rule A: [Out(x)] --> [] end").unwrap_err();
        match err {
            ModelError::Invalid(d) => {
                assert_eq!(d.kind, DiagnosticKind::Misplaced);
                assert_eq!(d.message, "Out not allowed in premise");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn let_bindings_are_sequential() {
        let src = "theory T begin
            rule A:
              let a = <'x', ~k>
                  b = h(a)
              in
              [Fr(~k)] --> [Out(b)]
            end";
        let m = parse_model(src).unwrap();
        let r = &m.rules[0];
        assert_eq!(r.let_bindings.len(), 2);
        assert_eq!(
            r.conclusions[0].args[0],
            Term::h(Term::pair(Term::constant("x"), Term::fresh("k")))
        );
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_model("theory T begin\nrule A: [Fr(~k) --> [] end").unwrap_err();
        match err {
            ModelError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_and_union() {
        let err = parse_model("theory T begin rule A: [Fr(~k)] --> [Out(mac(~k))] end").unwrap_err();
        assert!(matches!(err, ModelError::UnknownSymbol { ref symbol, .. } if symbol == "mac"));
        let ok = parse_model("theory T begin functions: mac/1 rule A: [Fr(~k)] --> [Out(mac(~k))] end");
        assert!(ok.is_ok());
        let err = parse_model("theory T begin rule A: [In(x)] --> [St(x + 'a')] end").unwrap_err();
        assert!(matches!(err, ModelError::UnionNotSupported { .. }));
    }

    #[test]
    fn comments_lemmas_annotations() {
        let src = r#"
        theory T
        begin
        builtins: symmetric-encryption, hashing
        // line comment
        /* block
           comment */
        rule A: [Fr(~k)[+], !Psk(p)] --> [Out(senc(~k, p))]
        restriction unique: "All x #i #j. U(x)@i & U(x)@j ==> #i = #j"
        lemma s [reuse, use_induction]: all-traces "All x #i. S(x)@i ==> not (Ex #j. K(x)@j)"
        end
        "#;
        let m = parse_model(src).unwrap();
        assert_eq!(m.rules[0].premises[0].annotation, Some(FactAnnotation::Plus));
        assert!(m.rules[0].premises[1].persistent);
        assert_eq!(m.lemmas[0].attributes, vec!["reuse", "use_induction"]);
        assert_eq!(m.lemmas[0].quantifier.as_deref(), Some("all-traces"));
        assert_eq!(m.restrictions[0].name, "unique");
    }

    #[test]
    fn nullary_symbol_is_application() {
        let t = parse_term("verify(s, m, pk(k)) ", &[]).unwrap();
        assert_eq!(t.args().len(), 3);
        let t = parse_term("true", &[]).unwrap();
        assert_eq!(t, Term::true_());
    }
}
