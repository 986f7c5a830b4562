//! Fourier-mode laboratory for the wave equation with logarithmic damping
//!
//! ```text
//! u_tt − Δu + log(I + (−Δ)^θ) u_t = 0,   u(0) = 0,   u_t(0) = u₁.
//! ```
//!
//! Every frequency evolves independently, so the solution is known exactly in
//! Fourier variables. The modules build on that: [`symbols`] and
//! [`propagator`] give the per-mode solution, [`quadrature`] turns mode
//! amplitudes into L² norms, [`rates`] fits decay laws to norm curves and
//! checks them against the predicted exponents. [`oracle`] holds slow
//! independent reference computations.

pub mod data_models;
pub mod error;
pub mod exec;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod rates;
pub mod specfun;
pub mod sum;
pub mod symbols;

pub use error::{Error, Result};
pub use exec::ExecPolicy;
pub use num_complex::Complex64;
pub use propagator::{ModeState, ProfileKind};
pub use rates::{GrowthModel, Law, NormCurve, Quantity, RateFit, Report, Tolerances};
pub use symbols::{Branch, DampingParams, SymbolEval, Thresholds};
