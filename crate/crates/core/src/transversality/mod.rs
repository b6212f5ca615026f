//! Finite-depth verification of the criteria behind absolute continuity of `η ∗ ν_λ`.

mod checks;
mod orbit;
mod report;

pub use checks::{
    birkhoff_window_check, diameter_check, perturbation_sweep, profile_pairs, sample_pairs, select_omega_epsilon,
    smb_check, sublevel_check, sublevel_measure, transversality_lower_bound, DiameterBound, LowerBound,
    OmegaEpsilonSet, PairProfile, PerturbationSweep, SamplePair, SublevelBound, SweepRow, WorstPair, DECAY_FACTOR,
    GROWTH_TOL,
};
pub use orbit::{distortion_check, dphi_dlambda, multipliers, phi, PhiDerivative, PhiValue};
pub use report::{
    assemble_report, CylinderDecay, EtaCertificate, ExponentBalance, ExponentTriple, TransversalityReport,
    VerifySettings,
};
