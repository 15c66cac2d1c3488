use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside the domain the formulas are defined on.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// A sampled spectrum violates its invariants.
    #[error("invalid spectrum: {0}")]
    Spectrum(String),

    /// The interference denominator vanishes; use the mu -> 0 limit instead.
    #[error(
        "singular configuration (phi = pi with vanishing detuning, denominator {denominator:e}); \
         evaluate the mu -> 0 limit instead"
    )]
    Singular { denominator: f64 },

    #[error(
        "quadrature did not converge after {evaluations} evaluations: \
         last two estimates differ by {difference:e} (relative), tolerance {tolerance:e}"
    )]
    NonConvergence {
        difference: f64,
        tolerance: f64,
        evaluations: usize,
    },

    /// The oracle only has an exact route for the analytic sinc family.
    #[error("unsupported spectrum for this method: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
