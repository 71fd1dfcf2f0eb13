//! Bi-Chainer plus the forward-only (Selection-Inference style) and
//! backward-only (LAMBADA style) baselines, all driving the same module
//! backend and producing the same trace format.

mod backward;
mod bichainer;
mod forward;
mod graph;
mod options;
mod replay;
mod session;
pub mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::KnowledgeBase;
use crate::modules::ModuleBackend;
use crate::parser::{Hypothesis, Label, Problem};

pub use backward::lambada_backward_prove;
pub use bichainer::bichainer_prove;
pub use forward::si_forward_prove;
pub use options::{evaluate_options, OptionsOutcome};
pub(crate) use replay::binding_from_premises;
pub use replay::{replay_validate, ReplayError};
pub use trace::{Action, DerivationRecord, Direction, ProofTrace, StepOutput, SwitchReason, TraceStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    BiChainer,
    Forward,
    Backward,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [EngineKind::BiChainer, EngineKind::Forward, EngineKind::Backward];
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            EngineKind::BiChainer => "bichainer",
            EngineKind::Forward => "forward",
            EngineKind::Backward => "backward",
        })
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "bichainer" | "bi-chainer" | "bi" => Ok(EngineKind::BiChainer),
            "forward" | "si" => Ok(EngineKind::Forward),
            "backward" | "lambada" => Ok(EngineKind::Backward),
            other => Err(format!("unknown engine {other:?} (expected bichainer, forward or backward)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Step budget D. Backward-only search uses it as the deepening limit.
    pub max_steps: usize,
    pub start_direction: Direction,
    /// Return as soon as a fact check is decisive instead of waiting for
    /// the next direction switch.
    pub immediate_return: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { max_steps: 50, start_direction: Direction::Forward, immediate_return: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("step budget must be at least 1")]
    ZeroBudget,
    #[error("problem lists options; use evaluate_options")]
    HasOptions,
    #[error("problem has no options")]
    NoOptions,
    #[error("problem has premises outside the grammar and backend {0} cannot read them")]
    RemoteOnly(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: Label,
    pub trace: ProofTrace,
    pub calls: usize,
    pub warnings: Vec<String>,
}

/// Runs `kind` on a single-hypothesis problem.
pub fn prove(
    kind: EngineKind,
    problem: &Problem,
    config: &EngineConfig,
    backend: &mut dyn ModuleBackend,
) -> Result<Verdict, EngineError> {
    match kind {
        EngineKind::BiChainer => bichainer_prove(problem, config, backend),
        EngineKind::Forward => si_forward_prove(problem, config, backend),
        EngineKind::Backward => lambada_backward_prove(problem, config, backend),
    }
}

fn check_preconditions(
    problem: &Problem,
    config: &EngineConfig,
    backend: &dyn ModuleBackend,
) -> Result<(), EngineError> {
    if config.max_steps == 0 {
        return Err(EngineError::ZeroBudget);
    }
    if problem.meta.remote_only() && !backend.handles_free_text() {
        return Err(EngineError::RemoteOnly(backend.name().to_string()));
    }
    Ok(())
}

fn single(problem: &Problem) -> Result<&Hypothesis, EngineError> {
    problem.hypothesis().ok_or(EngineError::HasOptions)
}

/// Shared entry for the three engines once preconditions hold.
pub(crate) fn run_engine(
    kind: EngineKind,
    kb: &KnowledgeBase,
    hypothesis: &Hypothesis,
    inherited: Vec<DerivationRecord>,
    free_text: &[String],
    config: &EngineConfig,
    backend: &mut dyn ModuleBackend,
) -> Verdict {
    let mut session = session::Session::new(kind, kb, hypothesis, inherited, free_text, backend);
    let label = match kind {
        EngineKind::BiChainer => bichainer::run(&mut session, config),
        EngineKind::Forward => forward::run(&mut session, config),
        EngineKind::Backward => backward::run(&mut session, config),
    };
    session.finish(label)
}
