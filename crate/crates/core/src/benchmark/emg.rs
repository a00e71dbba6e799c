use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{mean, median_filter, rms_windowed, TimeSeries};

/// Butterworth pole-pair quality factors for a 4th-order section split.
const BUTTER4_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_376_4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmgConfig {
    pub band_low: f64,
    pub band_high: f64,
    /// RMS window, seconds.
    pub rms_window: f64,
    /// RMS hop, seconds.
    pub rms_hop: f64,
    /// Detection window over the RMS series, seconds.
    pub detect_window: f64,
    /// Fractional rise over baseline: the window mean must reach `B * (1 + x)`.
    pub increase_threshold: f64,
    pub median_window: usize,
}

impl Default for EmgConfig {
    fn default() -> Self {
        Self {
            band_low: 10.0,
            band_high: 150.0,
            rms_window: 0.5,
            rms_hop: 0.1,
            detect_window: 2.0,
            increase_threshold: 1.27,
            median_window: 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    // RBJ cookbook sections, normalized so a0 = 1.
    fn lowpass(fc: f64, fs: f64, q: f64) -> Self {
        let w = 2.0 * std::f64::consts::PI * fc / fs;
        let (s, c) = w.sin_cos();
        let alpha = s / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b1 = (1.0 - c) / a0;
        Biquad {
            b: [b1 / 2.0, b1, b1 / 2.0],
            a: [-2.0 * c / a0, (1.0 - alpha) / a0],
        }
    }

    fn highpass(fc: f64, fs: f64, q: f64) -> Self {
        let w = 2.0 * std::f64::consts::PI * fc / fs;
        let (s, c) = w.sin_cos();
        let alpha = s / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b0 = (1.0 + c) / 2.0 / a0;
        Biquad {
            b: [b0, -2.0 * b0, b0],
            a: [-2.0 * c / a0, (1.0 - alpha) / a0],
        }
    }

    fn run(&self, x: &mut [f64]) {
        // Transposed direct form II, started from the steady state of x[0].
        let Some(&x0) = x.first() else { return };
        let dc = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1]);
        let y0 = dc * x0;
        let mut z1 = y0 - self.b[0] * x0;
        let mut z2 = self.b[2] * x0 - self.a[1] * y0;
        for v in x.iter_mut() {
            let xin = *v;
            let y = self.b[0] * xin + z1;
            z1 = self.b[1] * xin - self.a[0] * y + z2;
            z2 = self.b[2] * xin - self.a[1] * y;
            *v = y;
        }
    }
}

/// Zero-phase 4th-order Butterworth band-pass (high-pass then low-pass, each
/// as two biquads), run forward and backward over an odd-reflected padding.
pub fn bandpass_filter(series: &TimeSeries, low: f64, high: f64) -> Result<TimeSeries> {
    let rate = series
        .rate()
        .ok_or_else(|| Error::argument("bandpass needs at least two samples"))?;
    if !(low > 0.0 && low < high && high < rate / 2.0) {
        return Err(Error::argument(format!(
            "band {low}-{high} Hz invalid for a {rate} Hz series"
        )));
    }
    let sections: Vec<Biquad> = BUTTER4_Q
        .iter()
        .map(|&q| Biquad::highpass(low, rate, q))
        .chain(BUTTER4_Q.iter().map(|&q| Biquad::lowpass(high, rate, q)))
        .collect();

    let x = series.values();
    let n = x.len();
    let pad = ((3.0 * rate / low).ceil() as usize).max(27).min(n - 1);
    let mut buf = Vec::with_capacity(n + 2 * pad);
    buf.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    buf.extend_from_slice(x);
    buf.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

    for s in &sections {
        s.run(&mut buf);
    }
    buf.reverse();
    for s in &sections {
        s.run(&mut buf);
    }
    buf.reverse();
    series.with_values(buf[pad..pad + n].to_vec(), series.unit())
}

/// sEMG RMS-rise detector. Returns the start of the first detection window
/// whose mean RMS reaches `B * (1 + increase_threshold)`, where B is the mean
/// RMS over `baseline_interval`; `None` when no window does.
pub fn semg_fatigue_detect(emg: &TimeSeries, cfg: &EmgConfig, baseline_interval: (f64, f64)) -> Result<Option<f64>> {
    if !(cfg.increase_threshold > 0.0) {
        return Err(Error::argument("increase_threshold must be > 0"));
    }
    let rms = semg_rms(emg, cfg)?;
    let (b0, b1) = baseline_interval;
    let base: Vec<f64> = rms
        .timestamps()
        .iter()
        .zip(rms.values())
        .filter(|(&t, _)| t >= b0 && t + cfg.rms_window <= b1 + 1e-9)
        .map(|(_, &v)| v)
        .collect();
    if base.is_empty() {
        return Err(Error::domain(format!("no RMS windows inside baseline [{b0}, {b1}]")));
    }
    let baseline = mean(&base);
    if !(baseline > 0.0) {
        return Err(Error::domain("baseline sEMG RMS is zero"));
    }
    let limit = baseline * (1.0 + cfg.increase_threshold);

    let step = rms.median_spacing().unwrap_or(cfg.rms_hop);
    let w = ((cfg.detect_window / step).round() as usize).max(1);
    let v = rms.values();
    if v.len() < w {
        return Ok(None);
    }
    let mut sum: f64 = v[..w].iter().sum();
    for start in 0..=v.len() - w {
        if start > 0 {
            sum += v[start + w - 1] - v[start - 1];
        }
        if sum / w as f64 >= limit {
            return Ok(Some(rms.timestamps()[start]));
        }
    }
    Ok(None)
}

/// Median, band-pass and windowed RMS stages of the sEMG pipeline.
pub fn semg_rms(emg: &TimeSeries, cfg: &EmgConfig) -> Result<TimeSeries> {
    let filtered = median_filter(emg, cfg.median_window)?;
    let banded = bandpass_filter(&filtered, cfg.band_low, cfg.band_high)?;
    rms_windowed(&banded, cfg.rms_window, cfg.rms_hop)
}
