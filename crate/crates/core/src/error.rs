use thiserror::Error;

use crate::corpus::CorpusError;
use crate::diffusion::DiffusionError;
use crate::measure::MeasureError;
use crate::migration::MigrationError;
use crate::plot::PlotError;
use crate::rank::RankError;
use crate::synth::SynthError;
use crate::trend::TrendError;

/// Any failure surfaced by the toolkit, tagged with its owning module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Trend(#[from] TrendError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Migration(#[from] MigrationError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Module-qualified code such as `corpus.duplicate_id`.
    pub fn code(&self) -> String {
        let (module, code) = match self {
            Error::Corpus(e) => ("corpus", e.code()),
            Error::Rank(e) => ("rank", e.code()),
            Error::Measure(e) => ("measure", e.code()),
            Error::Trend(e) => ("trend", e.code()),
            Error::Diffusion(e) => ("diffusion", e.code()),
            Error::Migration(e) => ("migration", e.code()),
            Error::Synth(e) => ("synth", e.code()),
            Error::Plot(e) => ("plot", e.code()),
            Error::Io(_) => ("io", "io"),
            Error::Json(_) => ("io", "json"),
            Error::Csv(_) => ("io", "csv"),
            Error::Invalid(_) => ("cli", "invalid_argument"),
        };
        format!("{module}.{code}")
    }
}
