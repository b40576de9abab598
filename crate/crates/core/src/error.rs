use thiserror::Error;

pub type Result<T> = std::result::Result<T, QfcError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QfcError {
    #[error("optical depth must be non-negative, got {0}")]
    NegativeOd(f64),
    #[error("coherence decay rate {name} must be positive, got {value}")]
    NonPositiveDecay { name: &'static str, value: f64 },
    #[error("ground-state dephasing must be non-negative, got {0}")]
    NegativeDephasing(f64),
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
    #[error("first-order system is singular at omega = {omega} (condition number {condition:e})")]
    SingularSystem { omega: f64, condition: f64 },
    #[error("closed-form coefficients require the symmetric configuration")]
    NotSymmetricCase,
    #[error("G(omega) vanishes at omega = {0}")]
    SingularG(f64),
    #[error("backward boundary re-solve is ill-posed: |D'| = {0:e}")]
    IllPosedBoundary(f64),
    #[error("shooting solve is singular: |v_s(L)| = {0:e}")]
    ShootingFailure(f64),
    #[error("noise integral did not converge: last grid-doubling change {0:e}")]
    NonConvergedIntegral(f64),
    #[error("state does not fit the Fock truncation (population {population:e} outside the trusted levels of a {dim}-level basis)")]
    TruncationOverflow { dim: usize, population: f64 },
    #[error("beam-splitter oracle needs dim >= {required}, got {dim}")]
    DimensionTooSmall { dim: usize, required: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("fidelity is only defined here for Fock and coherent inputs")]
    UnsupportedState,
}
