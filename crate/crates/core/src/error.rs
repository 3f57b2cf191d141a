use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Stage of one reverse-diffusion step, used to give errors step context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Denoise,
    Fidelity,
    Renoise,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Denoise => "denoise",
            Stage::Fidelity => "fidelity",
            Stage::Renoise => "renoise",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} scalars, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("degenerate anchors: |sin Ω| = {sin_omega:.3e}")]
    DegenerateAnchor { sin_omega: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("spec error: {0}")]
    Spec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("step t={t} ({stage}): {source}")]
    Step {
        t: usize,
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, t: usize, stage: Stage) -> Error {
        Error::Step { t, stage, source: Box::new(self) }
    }
}
