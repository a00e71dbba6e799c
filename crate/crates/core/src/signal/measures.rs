use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::series::{mean, median_in_place};
use crate::signal::TimeSeries;

/// Best-aligned Pearson correlation between two streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub coefficient: f64,
    /// Seconds; positive when the first series leads the second.
    pub lag: f64,
}

/// Windowed root-mean-square, timestamped at each window start.
///
/// Window and hop are converted to sample counts using the series rate; only
/// complete windows are emitted. A hop shorter than one sample advances by one.
pub fn rms_windowed(series: &TimeSeries, window: f64, hop: f64) -> Result<TimeSeries> {
    if !(window > 0.0) || !(hop > 0.0) {
        return Err(Error::argument(format!(
            "window and hop must be positive (window={window}, hop={hop})"
        )));
    }
    let spacing = series
        .median_spacing()
        .ok_or_else(|| Error::argument("RMS needs at least two samples"))?;
    if window < spacing * (1.0 - 1e-9) {
        return Err(Error::argument(format!(
            "RMS window {window} s shorter than the sample spacing {spacing} s"
        )));
    }
    let win = ((window / spacing).round() as usize).max(1);
    let step = ((hop / spacing).round() as usize).max(1);
    let values = series.values();
    let ts = series.timestamps();

    // Prefix sums of squares keep this O(n) for overlapping windows.
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in values {
        acc += v * v;
        prefix.push(acc);
    }
    let mut out_t = Vec::new();
    let mut out_v = Vec::new();
    let mut start = 0;
    while start + win <= values.len() {
        let ss = (prefix[start + win] - prefix[start]).max(0.0);
        out_t.push(ts[start]);
        out_v.push((ss / win as f64).sqrt());
        start += step;
    }
    let out = TimeSeries::new(out_t, out_v, series.unit())?;
    Ok(match series.rate() {
        Some(rate) if out.len() >= 2 => out.with_nominal_rate(rate / step as f64)?,
        _ => out,
    })
}

/// Mean-removed power ratio in decibels.
pub fn snr_db(signal: &TimeSeries, noise: &TimeSeries) -> Result<f64> {
    if signal.is_empty() || noise.is_empty() {
        return Err(Error::argument("SNR segments must be nonempty"));
    }
    let ps = variance(signal.values());
    let pn = variance(noise.values());
    if pn <= 0.0 {
        return Err(Error::domain("noise segment has zero power"));
    }
    Ok(10.0 * (ps / pn).log10())
}

/// Robust white-noise level from second differences: for i.i.d. noise of
/// standard deviation s, `x[i-1] - 2x[i] + x[i+1]` has standard deviation
/// `s * sqrt(6)`, and the median absolute value scaled by 1.4826 estimates it
/// while ignoring the slow signal. Needs at least three samples.
pub fn robust_noise_sigma(values: &[f64]) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::argument("noise estimate needs >= 3 samples"));
    }
    let mut d2: Vec<f64> = values.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()).collect();
    Ok(1.4826 * median_in_place(&mut d2) / 6f64.sqrt())
}

/// Cross-correlation over lags in `[-max_lag, max_lag]`.
///
/// Both streams are linearly resampled onto a common grid at the coarser of
/// the two rates, spanning their overlap. For each lag the overlapping,
/// mean-removed segments are Pearson-correlated; the lag with the largest
/// |coefficient| wins (ties go to the smaller |lag|). Lags are limited to half
/// the overlap so every coefficient uses at least half the samples.
pub fn cross_correlation(a: &TimeSeries, b: &TimeSeries, max_lag: f64) -> Result<LagCorrelation> {
    if !(max_lag >= 0.0) {
        return Err(Error::argument(format!("max_lag must be >= 0, got {max_lag}")));
    }
    let rate_a = a.rate().ok_or_else(|| Error::argument("first series too short"))?;
    let rate_b = b.rate().ok_or_else(|| Error::argument("second series too short"))?;
    let rate = rate_a.min(rate_b);
    let (a0, a1) = (a.start_time().unwrap(), a.end_time().unwrap());
    let (b0, b1) = (b.start_time().unwrap(), b.end_time().unwrap());
    let (t0, t1) = (a0.max(b0), a1.min(b1));
    if t1 <= t0 {
        return Err(Error::domain("series do not overlap in time"));
    }
    let n = ((t1 - t0) * rate).floor() as usize + 1;
    if n < 3 {
        return Err(Error::domain("overlap shorter than three samples"));
    }
    let grid = |s: &TimeSeries| -> Vec<f64> { (0..n).map(|i| s.interpolate(t0 + i as f64 / rate).unwrap()).collect() };
    let (xa, xb) = (grid(a), grid(b));
    if variance(&xa) <= 0.0 || variance(&xb) <= 0.0 {
        return Err(Error::domain("zero-variance segment"));
    }

    let max_k = ((max_lag * rate).round() as usize).min(n / 2);
    let mut best: Option<(f64, i64)> = None;
    for k in 0..=max_k as i64 {
        for lag in if k == 0 { vec![0] } else { vec![k, -k] } {
            // b[i + lag] pairs with a[i].
            let (sa, sb) = if lag >= 0 {
                let l = lag as usize;
                (&xa[..n - l], &xb[l..])
            } else {
                let l = (-lag) as usize;
                (&xa[l..], &xb[..n - l])
            };
            let Some(r) = pearson(sa, sb) else { continue };
            if best.is_none_or(|(br, _)| r.abs() > br.abs() + 1e-12) {
                best = Some((r, lag));
            }
        }
    }
    let (coefficient, lag) = best.ok_or_else(|| Error::domain("zero-variance segment at every lag"))?;
    Ok(LagCorrelation {
        coefficient: coefficient.clamp(-1.0, 1.0),
        lag: lag as f64 / rate,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub(crate) fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}
