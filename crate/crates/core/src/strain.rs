//! Raw strain recording to R_norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{median_filter, normalize_static, resistance_series, DividerConfig, TimeSeries, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrainConfig {
    pub divider: DividerConfig,
    /// Odd sample count for the median filter.
    pub median_window: usize,
}

impl Default for StrainConfig {
    fn default() -> Self {
        Self {
            divider: DividerConfig::default(),
            median_window: 3,
        }
    }
}

/// Volts or ohms in, R_norm out, starting after the static interval.
///
/// Voltage input goes through the divider inversion first. The median filter
/// runs on resistance, normalization uses the static-interval mean, and the
/// static samples themselves are dropped so batching starts with the curls.
pub fn prepare_strain(raw: &TimeSeries, static_interval: (f64, f64), cfg: &StrainConfig) -> Result<TimeSeries> {
    let ohms = match raw.unit() {
        Unit::Volts => resistance_series(raw, &cfg.divider)?,
        Unit::Ohms => raw.clone(),
        other => {
            return Err(Error::argument(format!(
                "strain must be volts or ohms, got {}",
                other.as_str()
            )))
        }
    };
    let filtered = median_filter(&ohms, cfg.median_window)?;
    let norm = normalize_static(&filtered, static_interval)?;
    let active = norm.after(static_interval.1);
    if active.is_empty() {
        return Err(Error::domain("no strain samples after the static interval"));
    }
    Ok(active)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volts_and_ohms_agree() {
        let cfg = StrainConfig::default();
        let ohms: Vec<f64> = (0..200)
            .map(|i| {
                if i < 75 {
                    700.0
                } else {
                    700.0 + 50.0 * (i as f64 * 0.3).sin()
                }
            })
            .collect();
        let volts: Vec<f64> = ohms.iter().map(|&r| cfg.divider.forward(r)).collect();
        let a = prepare_strain(
            &TimeSeries::uniform(0.0, 25.0, ohms, Unit::Ohms).unwrap(),
            (0.0, 3.0),
            &cfg,
        )
        .unwrap();
        let b = prepare_strain(
            &TimeSeries::uniform(0.0, 25.0, volts, Unit::Volts).unwrap(),
            (0.0, 3.0),
            &cfg,
        )
        .unwrap();
        assert_eq!(a.timestamps(), b.timestamps());
        assert_eq!(a.start_time().unwrap(), 3.0);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_degrees() {
        let s = TimeSeries::uniform(0.0, 25.0, vec![1.0; 100], Unit::Degrees).unwrap();
        assert!(prepare_strain(&s, (0.0, 1.0), &StrainConfig::default()).is_err());
    }
}
