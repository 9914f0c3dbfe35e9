//! Bundled models and scenarios.

use crate::model::{parse_model, Model};

pub const ENSEMBLE_STATIC: &str = include_str!("../../../models/ensemble_static.spk");
pub const ENSEMBLE_STATIC_NOMATCH: &str = include_str!("../../../models/ensemble_static_nomatch.spk");
pub const ENSEMBLE_DYNAMIC: &str = include_str!("../../../models/ensemble_dynamic.spk");
pub const STATIC_FULL_RUN: &str = include_str!("../../../scenarios/ensemble_static_full.txt");

pub fn ensemble_static() -> Model {
    parse_model(ENSEMBLE_STATIC).expect("bundled model parses")
}

pub fn ensemble_static_nomatch() -> Model {
    parse_model(ENSEMBLE_STATIC_NOMATCH).expect("bundled model parses")
}

pub fn ensemble_dynamic() -> Model {
    parse_model(ENSEMBLE_DYNAMIC).expect("bundled model parses")
}
