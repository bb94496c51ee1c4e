//! Metric-induced gauge structure of quasi-Hermitian systems: connections,
//! curvatures, Wilson loops, proper similarity frames, Berry phases and
//! modified-Schrödinger dynamics.
//!
//! The numerical core is generic over [`scalar::Real`]; the aliases below fix
//! it to `f64`.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod path;
pub mod reproduce;
pub mod scalar;
pub mod spectra;
pub mod transport;

pub use error::{Error, Result};
pub use model::{Axis, ParameterPoint, QuasiHermitianModel};
pub use path::{Curve, PathConfig, PathSpec};
pub use spectra::Frame;
pub use transport::{GridSpec, Verdict};

pub type Complex = num_complex::Complex<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type Vector = linalg::CVector<f64>;
pub type Path = path::PathSpec<f64>;
