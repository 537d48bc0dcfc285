//! Shared numerical machinery: special functions, quadrature, summation.

pub mod erf;
pub mod kahan;
pub mod quadrature;
