//! Fatigue detection for bicep curls from a shoulder-mounted strain patch.
//!
//! The strain signal is recovered from a voltage divider, median filtered and
//! normalized against a static rest interval. Two detectors run on it: a
//! streaming amplitude-ratio detector ([`realtime`]) and a retrospective one
//! that also looks at a variability envelope ([`posthoc`]). Reference
//! detectors based on sEMG and shoulder kinematics live in [`benchmark`].
//! [`synth`] generates seeded sessions and [`eval`] compares detections with
//! declared fatigue times.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod error;
pub mod eval;
pub mod posthoc;
pub mod realtime;
pub mod session;
pub mod signal;
pub mod strain;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{evaluate_sessions, summary_stats, EvalConfig, EvaluationRow, Method, MethodStats, SummaryStats};
pub use posthoc::{posthoc_detect, PanTompkinsConfig, PeakCluster, PostHocResult};
pub use realtime::{detect_stream, process_batch, BatchReport, DetectorState, RealTimeConfig, RealTimeDetector};
pub use session::{load_session, write_report, write_session, ReportFormat, SessionManifest, SessionRecord};
pub use signal::{Extremum, ExtremumKind, TimeSeries, Unit};
pub use strain::{prepare_strain, StrainConfig};
pub use synth::{generate_full_session, generate_session, generate_strain, SynthSpec};
