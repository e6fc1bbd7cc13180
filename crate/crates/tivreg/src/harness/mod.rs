//! Synthetic benchmark harness: base shapes, degradation generators,
//! evaluation metrics, brute-force oracles and experiment drivers.

pub mod degrade;
pub mod experiment;
pub mod metrics;
pub mod shapes;

pub use degrade::{make_instance, DegradationKind, DegradationSpec, Instance};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, Profile, SummaryRow, TrialRecord};
pub use metrics::{brute_force_consensus, rms_error, translation_error, Norm};
