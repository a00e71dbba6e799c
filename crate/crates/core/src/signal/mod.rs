//! Units-aware signal primitives shared by every detector.

pub mod divider;
pub mod extrema;
pub mod filters;
pub mod measures;
mod normalize;
mod series;

pub use divider::{power_dissipation, resistance_from_voltage, resistance_series, DividerConfig};
pub use extrema::{cycle_amplitude, find_extrema, find_extrema_in, Extremum, ExtremumKind};
pub use filters::{detrend_linear, median_filter, median_filter_values};
pub use measures::{cross_correlation, rms_windowed, robust_noise_sigma, snr_db, LagCorrelation};
pub use normalize::normalize_static;
pub use series::{SeriesView, TimeSeries, Unit};

pub(crate) use series::{mean, median_in_place};
