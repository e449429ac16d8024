mod compile;
mod curves;
mod general;
mod optimize;
mod simulate;
mod verify;

use crate::args::{Cli, Command, Common, Format, Resolution};
use serde::Serialize;
use serde_json::{json, Value};
use stator::optimizer::{CostOptimizer, OptimizerConfig};
use std::ops::Deref;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Io,
    Validation,
    Invariant,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Validation, message: message.into() }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Self { kind: FailureKind::Invariant, message: message.into() }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self { kind: FailureKind::Io, message: format!("{}: {err}", path.display()) }
    }

    pub fn code(&self) -> u8 {
        match self.kind {
            FailureKind::Io => 1,
            FailureKind::Validation => 2,
            FailureKind::Invariant => 3,
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "schema": "stator/v1/error",
            "error": { "kind": self.kind, "message": self.message },
        })
        .to_string()
    }
}

impl From<stator::Error> for Failure {
    fn from(e: stator::Error) -> Self {
        Self::validation(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// The process-wide default optimizer or a freshly built one.
pub enum Optimizer {
    Shared(&'static CostOptimizer),
    Owned(Box<CostOptimizer>),
}

impl Deref for Optimizer {
    type Target = CostOptimizer;
    fn deref(&self) -> &CostOptimizer {
        match self {
            Self::Shared(o) => o,
            Self::Owned(o) => o,
        }
    }
}

pub fn optimizer(common: &Common) -> Outcome<Optimizer> {
    let base = match common.resolution {
        Resolution::Full => OptimizerConfig::default(),
        Resolution::Fast => OptimizerConfig::fast(),
    };
    let config = OptimizerConfig { max_stages: common.stages, ..base };
    if config == OptimizerConfig::default() {
        return Ok(Optimizer::Shared(CostOptimizer::shared_default()));
    }
    Ok(Optimizer::Owned(Box::new(CostOptimizer::new(config)?)))
}

pub fn check_common(common: &Common) -> Outcome<()> {
    if !(common.delta >= 0.0 && common.delta.is_finite()) {
        return Err(Failure::validation(format!("--delta must be a finite non-negative number, got {}", common.delta)));
    }
    if !(common.epsilon > 0.0 && common.epsilon < 1.0) {
        return Err(Failure::validation(format!("--epsilon must lie in (0, 1), got {}", common.epsilon)));
    }
    if !(1..=64).contains(&common.stages) {
        return Err(Failure::validation(format!("--stages must lie in 1..=64, got {}", common.stages)));
    }
    Ok(())
}

pub fn json_only(common: &Common, command: &str) -> Outcome<()> {
    match common.format {
        Some(Format::Csv) => Err(Failure::validation(format!("`{command}` writes JSON only"))),
        _ => Ok(()),
    }
}

pub fn finite(name: &str, x: f64) -> Outcome<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::validation(format!("--{name} must be finite, got {x}")))
    }
}

/// Echo of the configuration for the report (the output path is left out).
pub fn config_block(command: &str, args: &impl Serialize) -> Value {
    let mut v = serde_json::to_value(args).expect("serializable");
    if let Value::Object(map) = &mut v {
        if let Some(Value::Object(common)) = map.remove("common") {
            map.extend(common);
        }
        map.insert("command".into(), Value::String(command.into()));
    }
    v
}

pub fn run(cli: &Cli) -> Outcome<()> {
    match &cli.command {
        Command::Curves(a) => curves::run(a),
        Command::Optimize(a) => optimize::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Compile(a) => compile::run(a),
        Command::General(a) => general::run(a),
        Command::Verify(a) => verify::run(a),
    }
}
