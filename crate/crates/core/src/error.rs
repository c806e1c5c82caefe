use thiserror::Error;

use crate::analytics::Pmf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The `(p, m)` pair leaves the range where the closed forms are finite
    /// in double precision.
    #[error("outside the supported envelope: {0}")]
    Domain(String),

    /// Series expansion hit the hard term cap before the unexplained tail
    /// mass dropped below the requested tolerance.
    #[error("pmf truncated after {} terms with tail mass {:e} (tolerance {tolerance:e})", .partial.len(), .partial.truncation_mass())]
    Truncated { partial: Box<Pmf>, tolerance: f64 },

    /// An automaton or monitor was stepped after it had already stopped.
    #[error("automaton already stopped at trial {stopped_at}")]
    AlreadyStopped { stopped_at: u64 },

    /// A simulated episode exceeded the per-episode trial cap.
    #[error("episode{} did not stop within {cap} trials", .episode.map(|i| format!(" {i}")).unwrap_or_default())]
    RunawayEpisode { episode: Option<u64>, cap: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
