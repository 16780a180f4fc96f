pub mod design;
pub mod evaluate;
pub mod formulation;
pub mod generate;
pub mod instance;
pub mod milp;
pub mod model;
pub mod pipeline;

pub use model::*;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance file: {0}")]
    InstanceFormat(String),
    #[error("lightpath {0} has no route")]
    Unrouted(model::LightpathKey),
    #[error(transparent)]
    Milp(#[from] milp::MilpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("stage {stage} ended {status:?}")]
    StageFailed {
        stage: formulation::StageKind,
        status: milp::SolveStatus,
        /// Stages completed so far, for diagnosis.
        partial: Box<design::Design>,
    },
    #[error("solver not available: {0}")]
    SolverMissing(String),
    #[error("stage {stage}: cannot decode {family}: {detail}")]
    Decode { stage: formulation::StageKind, family: String, detail: String },
    #[error("stage {stage}: malformed model: {detail}")]
    Formulation { stage: formulation::StageKind, detail: String },
    #[error("inconsistent design: {0}")]
    Inconsistent(String),
}
