use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized (norm squared = {norm_squared})")]
    NotNormalized { norm_squared: f64 },

    /// Every amplitude was removed: nothing survives post-selection.
    #[error("total absorption: no surviving ensemble")]
    TotalAbsorption,

    #[error("operator flagged unitary but M†M deviates from identity by {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("beam splitter magnitudes violate t² + r² = 1 (t = {t}, r = {r})")]
    BeamSplitterMagnitude { t: f64, r: f64 },

    #[error("beam splitter phases violate tau + tau_p - rho - rho_p = pi (mod 2pi); residual {residual:e}")]
    BeamSplitterPhase { residual: f64 },

    #[error("unphysical gain: |T| = {magnitude} exceeds 1")]
    UnphysicalGain { magnitude: f64 },

    #[error("source not normalized: {detail}")]
    SourceNotNormalized { detail: String },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),

    #[error("visibility undefined: {0}")]
    UndefinedVisibility(String),

    #[error("{} diagnostic(s):\n{}", .0.len(), .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<crate::dsl::ParseDiagnostic>),
}

pub(crate) fn ensure_finite(what: &'static str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
