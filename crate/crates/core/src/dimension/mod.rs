//! Dimensions, Bernoulli measures, pushforward histograms and their convolutions.

mod boxdim;
mod histogram;
mod measure;
mod moran;

pub use boxdim::{box_count, box_dimension_estimate, ifs_cover_levels, BoxDimension, CoverLevel};
pub use histogram::{
    convolution_density, frostman_check, frostman_grid, pushforward_histogram, ConvolutionResult, FrostmanCertificate,
    MeasureHistogram,
};
pub use measure::{entropy, equilibrium_weights, lyapunov_exponent, BernoulliWeights, LyapunovEstimate, OrbitSample};
pub use moran::moran_dimension;
