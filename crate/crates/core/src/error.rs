use thiserror::Error;

/// Errors surfaced by model construction and configuration-level checks.
///
/// Numerical routines themselves do not fail: degenerate trials resolve to
/// an outage or a documented default instead of an error.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}
