use thiserror::Error;

use crate::dispersion::Axis;
use crate::tpg_model::Regime;
use crate::units::UnitError;

pub type Result<T> = std::result::Result<T, TpgError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TpgError {
    #[error("crystal data is missing the {0} axis")]
    MissingAxis(Axis),
    #[error("malformed coefficient: {0}")]
    MalformedCoefficient(String),
    #[error("index ordering n_x < n_y < n_z violated at {wavelength_um:.4} µm")]
    OrderingViolation { wavelength_um: f64 },
    #[error("empty or inverted validity window [{min_um}, {max_um}] µm")]
    EmptyWindow { min_um: f64, max_um: f64 },
    #[error("wavelength {wavelength_um:.4} µm outside validity window [{min_um}, {max_um}] µm")]
    OutOfWindow {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Dimension(#[from] UnitError),
    #[error("energy conservation violated: relative residual {residual:.3e}")]
    EnergyViolation { residual: f64 },
    #[error("non-positive frequency {omega:.6e} rad/s")]
    NonPositiveFrequency { omega: f64 },
    #[error("no phase-matching root for lambda_1 in [{lo_nm:.1}, {hi_nm:.1}] nm")]
    NoRoot { lo_nm: f64, hi_nm: f64 },
    #[error("integration window of {lobes} lobes leaves the dispersion range ({detail})")]
    WindowCollapse { lobes: usize, detail: String },
    #[error("analytic yield requires weak coupling; found {regime:?} at {omega:.6e} rad/s")]
    RegimeError { regime: Regime, omega: f64 },
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("all measured counts are zero")]
    DegenerateData,
    #[error("step size too coarse: Richardson estimate {estimate:.3e} exceeds {limit:.1e}")]
    StepTooCoarse { estimate: f64, limit: f64 },
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for TpgError {
    fn from(e: serde_json::Error) -> Self {
        TpgError::Parse(e.to_string())
    }
}
