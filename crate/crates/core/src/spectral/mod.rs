//! Discretization of the drifted nonlocal operator on an interval and its
//! principal eigenvalue.

mod analysis;
mod banded;
mod certificate;
mod eigen;
mod operator;

pub use analysis::{lambda_curve, limit_check, limit_check_ladder, CurveRow, LambdaCurve, LimitReport};
pub use banded::{BandedLu, BandedMatrix};
pub use certificate::{
    certificate_plan, certify_lower_bound, CertificatePlan, CertifyOptions, Certificate,
};
pub use eigen::{
    collatz_wielandt, collatz_wielandt_log, principal_eigen, symbol_minimizer, EigenMethod,
    EigenOptions, EigenPair,
};
pub use operator::{
    build_operator, build_operator_at, discrete_symbol, grid_steps, Boundary, DiscreteOperator,
    KernelStencil,
};
