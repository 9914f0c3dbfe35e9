//! Bounded symbolic execution of a model against a Dolev-Yao attacker.

mod knowledge;
mod matching;
mod props;
mod scenario;
mod search;
mod state;

pub use knowledge::Knowledge;
pub use matching::{match_input, ADVERSARY_VALUE};
pub use props::{check_agreement, check_replay_restriction, check_secrecy, AgreementKind, SecretClasses, Violation};
pub use scenario::{parse_script, run_scenario, Run, ScriptStep};
pub use search::{initial_state, search, search_many, Property, SearchLimits, SearchOutcome};
pub use state::{applicable_instances, Instance, State, Step, Trace};

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("scenario stuck at step {step}: rule `{rule}` has no enabled instance")]
    StuckScenario { step: usize, rule: String },
    #[error("scenario line {line}: {msg}")]
    BadScript { line: usize, msg: String },
    #[error("unknown key class `{0}`")]
    UnknownClass(String),
}
