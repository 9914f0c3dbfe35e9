//! Goal ranking for the prover's oracle interface.
//!
//! Goals arrive as `index: text` lines. Helper lemmas for a key class are
//! tried first, in key order, but only while the attacker-knowledge goal
//! for that key is open; then signature goals; then the knowledge goals
//! themselves. Everything else is left to the prover.

use std::collections::BTreeSet;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("cannot read oracle config: {0}")]
    Io(#[from] io::Error),
    #[error("invalid oracle config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("duplicate label `{0}` in ordering")]
    DuplicateLabel(String),
    #[error("helper_pattern must contain `<label>`")]
    BadPattern,
}

fn default_pattern() -> String {
    "secret_<label>".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub ordering: Vec<String>,
    #[serde(default = "default_pattern")]
    pub helper_pattern: String,
    #[serde(default)]
    pub ltk_labels: Vec<String>,
}

impl OracleConfig {
    pub fn new(ordering: Vec<String>, ltk_labels: Vec<String>) -> Self {
        OracleConfig {
            ordering,
            helper_pattern: default_pattern(),
            ltk_labels,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, OracleError> {
        let cfg: OracleConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, OracleError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<(), OracleError> {
        let mut seen = BTreeSet::new();
        for l in &self.ordering {
            if !seen.insert(l) {
                return Err(OracleError::DuplicateLabel(l.clone()));
            }
        }
        if !self.helper_pattern.contains("<label>") {
            return Err(OracleError::BadPattern);
        }
        Ok(())
    }

    fn helper_name(&self, label: &str) -> String {
        self.helper_pattern.replace("<label>", label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalLine {
    pub index: usize,
    pub text: String,
}

impl GoalLine {
    pub fn new(index: usize, text: &str) -> Self {
        GoalLine {
            index,
            text: text.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GoalKind {
    KnowledgeOfKey(String),
    HelperLemma(String),
    SignatureGoal,
    Other,
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// `needle` occurs in `hay` as a whole identifier.
fn contains_word(hay: &str, needle: &str) -> bool {
    hay.match_indices(needle).any(|(i, _)| {
        let before = hay[..i].chars().next_back();
        let after = hay[i + needle.len()..].chars().next();
        !before.is_some_and(is_ident) && !after.is_some_and(is_ident)
    })
}

/// Arguments of every `KU( ... )` in the text, outer parentheses removed.
fn ku_arguments(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for (i, _) in text.match_indices("KU(") {
        if text[..i].chars().next_back().is_some_and(is_ident) {
            continue;
        }
        let start = i + 3;
        let mut depth = 1;
        for (j, c) in text[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        out.push(text[start..start + j].trim());
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Head symbol or variable name of a printed term, without sort marker or
/// instance suffix: `~pgk.3` gives `pgk`, `senc(x, k)` gives `senc`.
fn head_name(arg: &str) -> &str {
    let s = arg.trim_start_matches(['~', '$', '\'']);
    let end = s.find(|c: char| !is_ident(c)).unwrap_or(s.len());
    &s[..end]
}

pub fn classify_goal(g: &GoalLine, cfg: &OracleConfig) -> GoalKind {
    let text = g.text.as_str();
    for label in &cfg.ordering {
        if contains_word(text, &cfg.helper_name(label)) {
            return GoalKind::HelperLemma(label.clone());
        }
    }
    let args = ku_arguments(text);
    if args.iter().any(|a| a.starts_with("sign(")) {
        return GoalKind::SignatureGoal;
    }
    for a in &args {
        let name = head_name(a);
        if let Some(label) = cfg.ordering.iter().find(|l| l.as_str() == name) {
            return GoalKind::KnowledgeOfKey(label.clone());
        }
    }
    if text.contains("sign(") && cfg.ltk_labels.iter().any(|l| contains_word(text, l)) {
        return GoalKind::SignatureGoal;
    }
    GoalKind::Other
}

/// Indices in the order the prover should try them.
pub fn rank_goals(goals: &[GoalLine], cfg: &OracleConfig) -> Vec<usize> {
    let kinds: Vec<(usize, GoalKind)> = goals.iter().map(|g| (g.index, classify_goal(g, cfg))).collect();
    let mut out = Vec::new();
    for label in &cfg.ordering {
        let open = kinds
            .iter()
            .any(|(_, k)| matches!(k, GoalKind::KnowledgeOfKey(l) if l == label));
        if open {
            out.extend(
                kinds
                    .iter()
                    .filter(|(_, k)| matches!(k, GoalKind::HelperLemma(l) if l == label))
                    .map(|(i, _)| *i),
            );
        }
    }
    out.extend(
        kinds
            .iter()
            .filter(|(_, k)| *k == GoalKind::SignatureGoal)
            .map(|(i, _)| *i),
    );
    for label in &cfg.ordering {
        out.extend(
            kinds
                .iter()
                .filter(|(_, k)| matches!(k, GoalKind::KnowledgeOfKey(l) if l == label))
                .map(|(i, _)| *i),
        );
    }
    out
}

/// Parse `index: text`.
pub fn parse_goal_line(line: &str) -> Option<GoalLine> {
    let (idx, text) = line.split_once(':')?;
    let index = idx.trim().parse().ok()?;
    Some(GoalLine {
        index,
        text: text.trim().to_string(),
    })
}

/// Read goal lines, rank them, write the chosen indices one per line.
/// `lemma` names the lemma under proof and is only used in diagnostics.
pub fn serve(
    cfg: &OracleConfig,
    lemma: &str,
    input: impl BufRead,
    mut out: impl Write,
    mut diag: impl Write,
) -> io::Result<()> {
    let mut goals = Vec::new();
    let mut seen = BTreeSet::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_goal_line(&line) {
            Some(g) if seen.insert(g.index) => goals.push(g),
            Some(g) => writeln!(diag, "oracle[{lemma}]: duplicate goal index {}, skipped", g.index)?,
            None => writeln!(diag, "oracle[{lemma}]: malformed goal line skipped: {line}")?,
        }
    }
    for i in rank_goals(&goals, cfg) {
        writeln!(out, "{i}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> OracleConfig {
        OracleConfig::new(
            ["ltk_CA", "ltk", "jrek", "eJoin", "pgk", "eKUR", "eLeave", "ppk", "eKU", "pgkUpdate"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            vec!["ltk".into(), "ltk_CA".into()],
        )
    }

    fn goals(lines: &[&str]) -> Vec<GoalLine> {
        lines.iter().enumerate().map(|(i, t)| GoalLine::new(i, t)).collect()
    }

    fn kind(text: &str) -> GoalKind {
        classify_goal(&GoalLine::new(0, text), &cfg())
    }

    #[test]
    fn classify_fixtures() {
        use GoalKind::*;
        let k = |s: &str| KnowledgeOfKey(s.to_string());
        let h = |s: &str| HelperLemma(s.to_string());
        let cases: Vec<(&str, GoalKind)> = vec![
            ("KU( ~pgk.3 )", k("pgk")),
            ("!KU( ~pgk.3 ) @ #vk.2", k("pgk")),
            ("KU( ~ltk_CA )", k("ltk_CA")),
            ("KU( ~ltk.12 ) @ #t", k("ltk")),
            ("KU( ~pgkUpdate.1 )", k("pgkUpdate")),
            ("KU( ~eKU.4 )", k("eKU")),
            ("KU( ~eKUR.4 )", k("eKUR")),
            ("KU( jrek )", k("jrek")),
            ("secret_eJoin( ... )", h("eJoin")),
            ("secret_pgk", h("pgk")),
            ("secret_pgkUpdate(x)", h("pgkUpdate")),
            ("secret_eKU", h("eKU")),
            ("secret_eKUR", h("eKUR")),
            ("!KU( sign(msg, ~ltk.2) )", SignatureGoal),
            ("KU( sign(<'JoinRequest', pk(~jrek)>, ~ltk) ) @ #j", SignatureGoal),
            ("Commit(A, B, t) ▶₀ sign(m, ~ltk.1)", SignatureGoal),
            ("KU( ~nonce.1 )", Other),
            ("KU( senc(x, ~pgk) )", Other),
            ("KU( pk(~ltk.1) )", Other),
            ("secret_other(x)", Other),
            ("In( x ) ▶₀ #i", Other),
            ("splitEqs(0)", Other),
            ("sign(m, ~ppk)", Other),
            ("", Other),
        ];
        assert!(cases.len() >= 20);
        for (text, expect) in cases {
            assert_eq!(kind(text), expect, "goal `{text}`");
        }
    }

    #[test]
    fn algorithm_examples() {
        let c = cfg();
        assert_eq!(rank_goals(&goals(&["KU( ~pgk.1 )", "secret_pgk", "other"]), &c), vec![1, 0]);
        assert!(rank_goals(&goals(&["secret_pgk"]), &c).is_empty());
        let g = goals(&["secret_eLeave", "KU( ~eLeave.1 )", "secret_ltk_CA", "KU( ~ltk_CA )"]);
        assert_eq!(rank_goals(&g, &c), vec![2, 0, 3, 1]);
    }

    #[test]
    fn signature_goals_between_helpers_and_knowledge() {
        let g = goals(&["KU( ~ppk.1 )", "KU( sign(m, ~ltk) )", "secret_ppk", "KU( ~eJoin.2 )"]);
        assert_eq!(rank_goals(&g, &cfg()), vec![2, 1, 3, 0]);
    }

    #[test]
    fn serve_wire_format() {
        let c = OracleConfig::new(vec!["k1".into()], vec![]);
        let mut out = Vec::new();
        let mut err = Vec::new();
        serve(&c, "l", "0: KU( ~k1 )\n1: secret_k1(x)\n".as_bytes(), &mut out, &mut err).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1\n0\n");

        let mut out = Vec::new();
        serve(&c, "l", "".as_bytes(), &mut out, &mut err).unwrap();
        assert!(out.is_empty());

        let mut out = Vec::new();
        let mut err = Vec::new();
        serve(&c, "l", "garbage\n0: KU( ~k1 )\n".as_bytes(), &mut out, &mut err).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0\n");
        assert!(String::from_utf8(err).unwrap().contains("garbage"));
    }

    #[test]
    fn config_toml() {
        let c = OracleConfig::from_toml("ordering = [\"a\", \"b\"]\nltk_labels = [\"a\"]\n").unwrap();
        assert_eq!(c.helper_pattern, "secret_<label>");
        assert_eq!(OracleConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert!(matches!(
            OracleConfig::from_toml("ordering = [\"a\", \"a\"]"),
            Err(OracleError::DuplicateLabel(_))
        ));
    }
}
