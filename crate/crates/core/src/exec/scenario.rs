use super::state::{applicable_instances, State};
use super::ExecError;
use crate::model::{parse_term, Model};
use crate::term::{Sort, Substitution, Term, Var};

/// One script line: a rule to fire and variable values it must respect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub rule: String,
    pub bindings: Vec<(Var, Term)>,
}

/// Split on whitespace outside brackets and quotes.
fn fields(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut quoted, mut start) = (0i32, false, None);
    for (i, c) in line.char_indices() {
        match c {
            '\'' => quoted = !quoted,
            '(' | '<' if !quoted => depth += 1,
            ')' | '>' if !quoted => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 && !quoted {
            if let Some(s) = start.take() {
                out.push(&line[s..i]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}

fn parse_var(s: &str) -> Option<Var> {
    let (sort, name) = match s.chars().next()? {
        '$' => (Sort::Public, &s[1..]),
        '~' => (Sort::Fresh, &s[1..]),
        _ => (Sort::Msg, s),
    };
    let ok = !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_');
    ok.then(|| Var::new(sort, name))
}

/// Parse a scenario script: `Rule [var=term ...]` per line, `#` comments.
pub fn parse_script(text: &str, model: &Model) -> Result<Vec<ScriptStep>, ExecError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| ExecError::BadScript { line: i + 1, msg };
        let f = fields(line);
        let rule = f[0].to_string();
        if model.rule(&rule).is_none() {
            return Err(bad(format!("unknown rule `{rule}`")));
        }
        let mut bindings = Vec::new();
        for b in &f[1..] {
            let (v, t) = b
                .split_once('=')
                .ok_or_else(|| bad(format!("expected var=value, got `{b}`")))?;
            let var = parse_var(v.trim()).ok_or_else(|| bad(format!("bad variable `{v}`")))?;
            let term = parse_term(t.trim(), &model.functions).map_err(|e| bad(e.to_string()))?;
            bindings.push((var, term));
        }
        steps.push(ScriptStep { rule, bindings });
    }
    Ok(steps)
}

/// Result of replaying a script.
#[derive(Debug, Clone)]
pub struct Run {
    pub state: State,
}

/// Fire the script's rules in order, each time taking the first instance
/// consistent with the given bindings.
pub fn run_scenario(model: &Model, script: &[ScriptStep], depth_limit: Option<usize>) -> Result<Run, ExecError> {
    let mut state = match depth_limit {
        Some(d) => State::new(d),
        None => State::for_model(model),
    };
    let publics: Vec<Term> = model.constants().into_iter().collect();
    for (i, step) in script.iter().enumerate() {
        let rule = model
            .rule(&step.rule)
            .ok_or_else(|| ExecError::UnknownRule(step.rule.clone()))?;
        let seed = Substitution::from_pairs(step.bindings.iter().cloned());
        let mut inst = applicable_instances(rule, &state, &seed, &publics);
        if inst.is_empty() {
            return Err(ExecError::StuckScenario {
                step: i + 1,
                rule: step.rule.clone(),
            });
        }
        state = inst.swap_remove(0).next;
    }
    Ok(Run { state })
}
