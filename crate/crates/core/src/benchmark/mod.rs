//! Reference detectors: sEMG RMS rise and shoulder-elevation range of motion.

mod emg;
pub mod euler;
mod kinematics;

pub use emg::{bandpass_filter, semg_fatigue_detect, semg_rms, EmgConfig};
pub use euler::{euler_to_matrix, quat_to_euler, unwrap_degrees, EulerAngles, EulerConvention, QuaternionSample};
pub use kinematics::{elevation_series, joint_angles, kinematics_fatigue_detect, JointAngles, KinConfig};
