//! Numerical toolkit for nonlocal dispersal operators with drift.
//!
//! The operator is `L[φ](x) = ∫ J(x−y)φ(y)dy + cφ'(x)` on an interval, where `J`
//! is a probability density. The crate computes its principal eigenvalue and the
//! infinite-interval limit `inf_ν [∫J(x)e^{−νx}dx + cν]`, the KPP spreading speeds
//! of `u_t = d(J∗u − u) + f(u)`, and simulates the associated dynamics.
//!
//! Every routine is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod dispersion;
pub mod error;
pub mod evolution;
pub mod kernels;
pub mod optimize;
pub mod propagation;
pub mod quadrature;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use kernels::{Dispersal, Kernel, TruncatedKernel};
pub use scalar::Scalar;

pub type Kernel64 = kernels::Kernel<f64>;
pub type Kernel32 = kernels::Kernel<f32>;
pub type DispersionResult64 = dispersion::DispersionResult<f64>;
pub type SpeedPair64 = dispersion::SpeedPair<f64>;
pub type DiscreteOperator64 = spectral::DiscreteOperator<f64>;
pub type EigenPair64 = spectral::EigenPair<f64>;
pub type Certificate64 = spectral::Certificate<f64>;
pub type Field64 = evolution::Field<f64>;
pub type Reaction64 = evolution::Reaction<f64>;
pub type FrontTrace64 = propagation::FrontTrace<f64>;

