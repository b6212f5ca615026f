//! Affine and nearly affine dynamically defined Cantor sets on the line.
//!
//! The crate is organised bottom-up:
//!
//! * [`symbolic`]: words, cylinders and eventually periodic symbol sequences.
//! * [`ifs`]: contracting systems on `[0, 1]`, their parameter families and the coding map.
//! * [`geometry`]: interval unions, Minkowski sums, thickness and the middle-α region map.
//! * [`dimension`]: Moran and box dimension, Bernoulli measures, histograms and convolutions.
//! * [`transversality`]: finite-depth checks of the convolution absolute-continuity criteria.
//! * [`config`] and [`sweep`]: JSON configuration and deterministic parameter sweeps.

// `!(x > 0.0)` is how the validators reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Orbit and stack loops index several parallel arrays by the same position.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod dimension;
pub mod error;
pub mod geometry;
pub mod ifs;
pub mod sweep;
pub mod symbolic;
pub mod transversality;

pub use dimension::{
    box_dimension_estimate, convolution_density, entropy, equilibrium_weights, frostman_check, lyapunov_exponent,
    moran_dimension, pushforward_histogram, BernoulliWeights, BoxDimension, ConvolutionResult, CoverLevel,
    FrostmanCertificate, LyapunovEstimate, MeasureHistogram, OrbitSample,
};
pub use error::{Error, Result};
pub use geometry::{
    gap_lemma_predicate, middle_alpha_classify, minkowski_sum, sum_cover_analysis, thickness, CoverSource, Interval,
    IntervalUnion, RegionTag, RegionVerdict, SumCoverAnalysis, VerdictHint,
};
pub use ifs::{
    AffineMap, CantorFamily, CoefficientFn, FamilyMap, Ifs, IfsMap, ParamInterval, Perturbation, PerturbationTerm,
    SeparationReport, Trig,
};
pub use symbolic::{cylinder_enumerate, SymbolPath, Word, DEFAULT_CYLINDER_CAP};
pub use transversality::{assemble_report, ExponentTriple, OmegaEpsilonSet, TransversalityReport, VerifySettings};
