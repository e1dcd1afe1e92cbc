//! Software models of two programmable non-uniform random variate
//! generators: Spot, which reshapes a Gaussian noise source with one
//! multiply-add per variate, and Grappa, which approximates a target quantile
//! function in a basis built from device response curves.

pub mod grappa;
pub mod spot;

pub use grappa::{build_basis, fit_icdf, grappa_sample, GalerkinBasis, IcdfApprox, Response};
pub use spot::{spot_sample, NoiseSource, SpotComponent, SpotProgram};
