//! Reconstruction of two-dimensional steady stratified periodic water waves
//! from the horizontal velocity on the crest line and the wave height.
//!
//! The pseudo-stream function is recovered as an even power series in the
//! horizontal coordinate, `psi(x, y) = sum a_{2n}(y) x^{2n}`, whose leading
//! coefficient comes from the crest-line data and whose higher coefficients
//! follow from matching the semilinear elliptic equation order by order.

pub mod axis;
pub mod chebyshev;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod linalg;
pub mod pipeline;
pub mod profiles;
pub mod recovery;
pub mod reference;
pub mod series;

pub use error::{Error, Result};
