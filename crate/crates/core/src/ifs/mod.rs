//! Contracting systems on `[0, 1]`, their one-parameter families, and the coding map.

mod expr;
mod family;
mod system;

pub use expr::{CoefficientFn, Jet, Perturbation, PerturbationTerm, Trig};
pub use family::{CantorFamily, FamilyMap, MapJet, ParamInterval};
pub use system::{AffineMap, CodingPoint, Ifs, IfsMap, SeparationReport, SEPARATION_TOL};
