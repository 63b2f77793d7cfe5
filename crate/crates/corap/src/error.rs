//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CorapError>;

#[derive(Debug, Error)]
pub enum CorapError {
    #[error("invalid mode {0}: expected 1, 2, or 3")]
    InvalidMode(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("rank out of range: {0}")]
    RankOutOfRange(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate rank-1 extraction: matrix is zero")]
    DegenerateRank1,

    #[error("degenerate component {component} of core {core}: rank-1 extraction failed")]
    DegenerateComponent { core: usize, component: usize },

    #[error("malformed tensor file: {0}")]
    MalformedFile(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CorapError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CorapError {
    /// Wrap the error with the name of the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Self {
        CorapError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Extension for tagging errors with a stage name as they propagate.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}
