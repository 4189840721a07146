//! Periodic scalar fields on the flat 3-torus `[0, 2π)³` and their spectral
//! calculus.

mod fft;
mod field;
mod grid;
mod norms;
pub mod random;

pub use fft::{inverse_transform, transform, SpectralPlan};
pub use field::{Field, MeanSplit, Spectrum};
pub use grid::GridSpec;
pub use norms::{
    dealiased_product, gradient_l2_norm, l2_inner, mean_decompose, multi_indices, sobolev_norm,
    sobolev_norm_spectrum, sobolev_weight, spectral_derivative, sup_norm, SobolevWeights,
};
