//! Partial condition numbers of indefinite, linear and total least squares
//! problems, with statistical estimators for them.

pub mod cond;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod ils;
pub mod io;
pub mod kron;
pub mod linalg;
pub mod par;
pub mod structured;
pub mod tls;

pub use error::{Error, Result};
