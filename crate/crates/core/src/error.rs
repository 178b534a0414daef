use thiserror::Error;

/// Errors raised by the geometry kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point is not on the hyperboloid: <x,x> = {norm} (x1 = {x1})")]
    NotOnHyperboloid { norm: f64, x1: f64 },

    #[error("vector is not tangent: <base,u> = {inner}")]
    NotTangent { inner: f64 },

    #[error("tangent vectors live at different base points")]
    BaseMismatch,

    #[error("normal is not a unit vector: <N,N> = {0}")]
    NonUnitNormal(f64),

    #[error("{name} out of range {range}: got {value}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("chart domain reaches a vanishing denominator in the {factor} factor (|value| = {value:e})")]
    DomainDenominator { factor: &'static str, value: f64 },

    #[error("chart differential is rank deficient (smallest singular value {sigma:e})")]
    RankDeficient { sigma: f64 },

    #[error("normal space is not one-dimensional (second-smallest singular value {sigma:e})")]
    NormalNullspace { sigma: f64 },

    #[error("degenerate product angle: C = {c}")]
    DegenerateProductAngle { c: f64 },

    #[error("focal point at l = {l}: det Q = {det:e}")]
    FocalPoint { l: f64, det: f64 },

    #[error("hypersurface '{0}' has no closed-form normal")]
    NoNormalHint(String),

    #[error("block is not an orthochronous Lorentz transformation (defect {defect:e})")]
    NotLorentz { defect: f64 },

    #[error("tangent plane is degenerate")]
    DegeneratePlane,

    #[error("{0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
