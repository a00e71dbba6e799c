use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical unit carried by a [`TimeSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Volts,
    Ohms,
    Dimensionless,
    Degrees,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Volts => "volts",
            Unit::Ohms => "ohms",
            Unit::Dimensionless => "dimensionless",
            Unit::Degrees => "degrees",
        }
    }
}

impl std::str::FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "volts" | "V" => Ok(Unit::Volts),
            "ohms" | "ohm" => Ok(Unit::Ohms),
            "dimensionless" | "1" => Ok(Unit::Dimensionless),
            "degrees" | "deg" => Ok(Unit::Degrees),
            other => Err(Error::argument(format!("unknown unit {other:?}"))),
        }
    }
}

/// Timestamped scalar samples. Timestamps are seconds and strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
    unit: Unit,
    nominal_rate: Option<f64>,
}

/// Borrowed contiguous slice of a [`TimeSeries`].
#[derive(Debug, Clone, Copy)]
pub struct SeriesView<'a> {
    pub timestamps: &'a [f64],
    pub values: &'a [f64],
}

impl TimeSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::argument(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if let Some(i) = timestamps.iter().chain(&values).position(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite sample at position {i}")));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            timestamps,
            values,
            unit,
            nominal_rate: None,
        })
    }

    /// Uniformly sampled series starting at `start`.
    pub fn uniform(start: f64, rate_hz: f64, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(Error::argument(format!("sample rate must be positive, got {rate_hz}")));
        }
        let timestamps = (0..values.len()).map(|i| start + i as f64 / rate_hz).collect();
        Self::new(timestamps, values, unit)?.with_nominal_rate(rate_hz)
    }

    /// Attach a nominal sample rate. It must lie within 10% of the median
    /// reciprocal sample spacing.
    pub fn with_nominal_rate(mut self, rate_hz: f64) -> Result<Self> {
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(Error::argument(format!("sample rate must be positive, got {rate_hz}")));
        }
        if let Some(spacing) = self.median_spacing() {
            let observed = 1.0 / spacing;
            if (observed - rate_hz).abs() > 0.1 * rate_hz {
                return Err(Error::domain(format!(
                    "nominal rate {rate_hz} Hz disagrees with observed {observed:.3} Hz"
                )));
            }
        }
        self.nominal_rate = Some(rate_hz);
        Ok(self)
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn nominal_rate(&self) -> Option<f64> {
        self.nominal_rate
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_time(&self) -> Option<f64> {
        self.timestamps.first().copied()
    }

    pub fn end_time(&self) -> Option<f64> {
        self.timestamps.last().copied()
    }

    /// Median of successive timestamp differences; `None` for fewer than two samples.
    pub fn median_spacing(&self) -> Option<f64> {
        if self.timestamps.len() < 2 {
            return None;
        }
        let mut d: Vec<f64> = self.timestamps.windows(2).map(|w| w[1] - w[0]).collect();
        Some(median_in_place(&mut d))
    }

    /// Nominal rate if set, otherwise the reciprocal median spacing.
    pub fn rate(&self) -> Option<f64> {
        self.nominal_rate.or_else(|| self.median_spacing().map(|s| 1.0 / s))
    }

    pub fn view(&self) -> SeriesView<'_> {
        SeriesView {
            timestamps: &self.timestamps,
            values: &self.values,
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> SeriesView<'_> {
        SeriesView {
            timestamps: &self.timestamps[range.clone()],
            values: &self.values[range],
        }
    }

    /// Indices of samples whose timestamp lies in the closed interval `[t0, t1]`.
    pub fn index_range(&self, t0: f64, t1: f64) -> std::ops::Range<usize> {
        let lo = self.timestamps.partition_point(|&t| t < t0);
        let hi = self.timestamps.partition_point(|&t| t <= t1);
        lo..hi.max(lo)
    }

    /// Samples with timestamp `>= t0`.
    pub fn after(&self, t0: f64) -> TimeSeries {
        let lo = self.timestamps.partition_point(|&t| t < t0);
        TimeSeries {
            timestamps: self.timestamps[lo..].to_vec(),
            values: self.values[lo..].to_vec(),
            unit: self.unit,
            nominal_rate: self.nominal_rate,
        }
    }

    /// Same timestamps with new values (which must have the same length).
    pub fn with_values(&self, values: Vec<f64>, unit: Unit) -> Result<TimeSeries> {
        if values.len() != self.values.len() {
            return Err(Error::argument("replacement values change the series length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite value"));
        }
        Ok(TimeSeries {
            timestamps: self.timestamps.clone(),
            values,
            unit,
            nominal_rate: self.nominal_rate,
        })
    }

    /// Apply `f` to every value, keeping timestamps.
    pub fn map(&self, unit: Unit, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect(), unit)
    }

    /// Shift every timestamp by `-offset`.
    pub fn shifted(&self, offset: f64) -> TimeSeries {
        TimeSeries {
            timestamps: self.timestamps.iter().map(|t| t - offset).collect(),
            values: self.values.clone(),
            unit: self.unit,
            nominal_rate: self.nominal_rate,
        }
    }

    /// Linear interpolation at `t`; clamps outside the support.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let ts = &self.timestamps;
        if ts.is_empty() {
            return None;
        }
        let i = ts.partition_point(|&x| x <= t);
        Some(if i == 0 {
            self.values[0]
        } else if i == ts.len() {
            self.values[ts.len() - 1]
        } else {
            let (t0, t1) = (ts[i - 1], ts[i]);
            let (v0, v1) = (self.values[i - 1], self.values[i]);
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        })
    }
}

impl<'a> SeriesView<'a> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Median of a scratch buffer (reordered). Even lengths average the two middle values.
pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    debug_assert!(!buf.is_empty());
    let n = buf.len();
    let mid = n / 2;
    let (_, upper, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = buf[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_timestamp() {
        let err = TimeSeries::new(vec![0.0, 1.0, 1.0], vec![1.0; 3], Unit::Ohms).unwrap_err();
        assert!(err.to_string().contains("index 2"), "{err}");
    }

    #[test]
    fn rejects_length_mismatch_and_nan() {
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0], Unit::Ohms).is_err());
        assert!(TimeSeries::new(vec![0.0, 1.0], vec![1.0, f64::NAN], Unit::Ohms).is_err());
    }

    #[test]
    fn nominal_rate_must_match_spacing() {
        let s = TimeSeries::uniform(0.0, 25.0, vec![0.0; 100], Unit::Ohms).unwrap();
        assert!(s.clone().with_nominal_rate(26.0).is_ok());
        assert!(s.with_nominal_rate(30.0).is_err());
    }

    #[test]
    fn index_range_is_closed() {
        let s = TimeSeries::uniform(0.0, 1.0, vec![0.0; 10], Unit::Ohms).unwrap();
        assert_eq!(s.index_range(2.0, 4.0), 2..5);
        assert_eq!(s.index_range(20.0, 30.0), 10..10);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [9.0, 1.0]), 5.0);
    }

    #[test]
    fn interpolation() {
        let s = TimeSeries::new(vec![0.0, 2.0], vec![0.0, 4.0], Unit::Ohms).unwrap();
        assert_eq!(s.interpolate(1.0), Some(2.0));
        assert_eq!(s.interpolate(-1.0), Some(0.0));
        assert_eq!(s.interpolate(5.0), Some(4.0));
    }
}
