//! Voltage-divider front end of the strain patch.
//!
//! The sensor sits between the ADC input and ground with a fixed reference
//! resistor to the supply rail, so `v_out = v_in * r_ref / (r_ref + r_strain)`
//! inverted gives the strain resistance below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{TimeSeries, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DividerConfig {
    /// Supply voltage in volts.
    pub v_in: f64,
    /// Reference resistor in ohms.
    pub r_ref: f64,
}

impl Default for DividerConfig {
    fn default() -> Self {
        Self {
            v_in: 5.0,
            r_ref: 1000.0,
        }
    }
}

impl DividerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_in > 0.0 && self.v_in.is_finite()) {
            return Err(Error::argument(format!("v_in must be > 0, got {}", self.v_in)));
        }
        if !(self.r_ref > 0.0 && self.r_ref.is_finite()) {
            return Err(Error::argument(format!("r_ref must be > 0, got {}", self.r_ref)));
        }
        Ok(())
    }

    /// Output voltage produced by a sensor of resistance `r_strain`.
    pub fn forward(&self, r_strain: f64) -> f64 {
        self.v_in * self.r_ref / (self.r_ref + r_strain)
    }
}

/// Sensor resistance from the divider output voltage.
pub fn resistance_from_voltage(v_out: f64, cfg: &DividerConfig) -> Result<f64> {
    cfg.validate()?;
    if !(v_out > 0.0 && v_out <= cfg.v_in) {
        return Err(Error::domain(format!(
            "divider output {v_out} V outside (0, {}] V: sensor saturated or disconnected",
            cfg.v_in
        )));
    }
    Ok(cfg.r_ref * (cfg.v_in / v_out - 1.0))
}

/// Convert a voltage series into a resistance series.
pub fn resistance_series(volts: &TimeSeries, cfg: &DividerConfig) -> Result<TimeSeries> {
    if volts.unit() != Unit::Volts {
        return Err(Error::argument(format!(
            "expected a volts series, got {}",
            volts.unit().as_str()
        )));
    }
    let ohms = volts
        .values()
        .iter()
        .map(|&v| resistance_from_voltage(v, cfg))
        .collect::<Result<Vec<_>>>()?;
    volts.with_values(ohms, Unit::Ohms)
}

/// Power dissipated by the divider, in watts.
pub fn power_dissipation(cfg: &DividerConfig, r_strain: f64) -> Result<f64> {
    if r_strain < 0.0 || !r_strain.is_finite() {
        return Err(Error::argument(format!("r_strain must be >= 0, got {r_strain}")));
    }
    let total = cfg.r_ref + r_strain;
    if total == 0.0 {
        return Err(Error::domain("total divider resistance is zero"));
    }
    Ok(cfg.v_in * cfg.v_in / total)
}
