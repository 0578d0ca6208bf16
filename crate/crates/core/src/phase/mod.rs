//! Fiber phase drift, reference-pulse compensation and the interference
//! error it leaves behind.

pub mod compensation;
pub mod drift;
pub mod estimate;
pub mod interference;

pub use compensation::{apply_compensation, CompensationMode, CompensationResult, Estimator, PulseTrainSchedule};
pub use drift::{drift_anchors, drift_rate_for_length, sample_phase_path, DriftAnchor, DriftModel, PhasePath};
pub use estimate::{estimate_phase_offset, PhaseEstimate, ReferenceCounts};
pub use interference::{gaussian_error_closed_form, interference_error, DeltaPhiDistribution};
