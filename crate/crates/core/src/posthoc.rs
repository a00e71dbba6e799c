//! Retrospective detector: the real-time pass gives t1, a variability
//! envelope (derivative, square, moving mean) gives t2, and the later of the
//! two is reported.

use serde::{Deserialize, Serialize};

use crate::benchmark::bandpass_filter;
use crate::error::{Error, Result};
use crate::realtime::{detect_stream, RealTimeConfig};
use crate::signal::filters::line_fit;
use crate::signal::{Extremum, ExtremumKind, TimeSeries, Unit};
use crate::strain::{prepare_strain, StrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PanTompkinsConfig {
    /// Derivative stencil half-width in samples.
    pub derivative_half_width: usize,
    /// Moving-mean window in seconds.
    pub integration_window: f64,
    pub top_k: usize,
    /// Peaks closer than this (seconds) merge into one cluster.
    pub min_separation: f64,
    /// Clusters further apart than this (seconds) break a run.
    pub max_separation: f64,
    /// Optional `(low, high)` Hz bandpass ahead of the derivative. Off by default.
    pub bandpass: Option<(f64, f64)>,
}

impl Default for PanTompkinsConfig {
    fn default() -> Self {
        Self {
            derivative_half_width: 2,
            integration_window: 2.0,
            top_k: 10,
            min_separation: 2.0,
            max_separation: 8.0,
            bandpass: None,
        }
    }
}

impl PanTompkinsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.derivative_half_width < 1 {
            return Err(Error::argument("derivative_half_width must be >= 1"));
        }
        if !(self.integration_window > 0.0) {
            return Err(Error::argument("integration_window must be > 0"));
        }
        if self.top_k < 1 {
            return Err(Error::argument("top_k must be >= 1"));
        }
        if !(self.min_separation > 0.0 && self.min_separation < self.max_separation) {
            return Err(Error::argument(format!(
                "need 0 < min_separation < max_separation, got {} and {}",
                self.min_separation, self.max_separation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakCluster {
    /// Earliest member time.
    pub representative_time: f64,
    pub member_times: Vec<f64>,
    /// Tallest member height.
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostHocResult {
    pub t1: f64,
    /// First cluster of the selected run; `None` when no peaks survive.
    pub t2: Option<f64>,
    pub t_p: f64,
    pub fatigued: bool,
}

/// Derivative, squaring and centered moving mean. Output keeps the input
/// timestamps and is nonnegative.
///
/// The derivative is the least-squares slope over `2h + 1` samples (the
/// Savitzky-Golay first-derivative stencil), truncated at the ends. The moving
/// mean uses the samples of a centered window, also truncated at the ends.
pub fn pan_tompkins_transform(series: &TimeSeries, cfg: &PanTompkinsConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    let h = cfg.derivative_half_width;
    let n = series.len();
    if n < 2 * h + 1 {
        return Err(Error::domain(format!(
            "{n} samples is shorter than the {}-sample derivative stencil",
            2 * h + 1
        )));
    }
    let dt = series.median_spacing().expect("n >= 3");
    let win = ((cfg.integration_window / dt).round() as usize).max(1);
    if n < win {
        return Err(Error::domain(format!(
            "series spans less than the {} s integration window",
            cfg.integration_window
        )));
    }
    let filtered;
    let values = match cfg.bandpass {
        Some((lo, hi)) => {
            filtered = bandpass_filter(series, lo, hi)?;
            filtered.values()
        }
        None => series.values(),
    };

    let squared: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(n);
            let (_, slope) = line_fit(&values[lo..hi]);
            let d = slope / dt;
            d * d
        })
        .collect();

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in &squared {
        prefix.push(prefix.last().unwrap() + v);
    }
    let before = (win - 1) / 2;
    let after = win / 2;
    let out: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after + 1).min(n);
            ((prefix[hi] - prefix[lo]) / (hi - lo) as f64).max(0.0)
        })
        .collect();
    series.with_values(out, Unit::Dimensionless)
}

/// Interior local maxima, the `top_k` tallest, returned in time order.
///
/// A plateau counts once, at its first sample, when it rises from the left
/// and falls to the right. Equal heights rank the earlier peak first.
pub fn select_top_peaks(transformed: &TimeSeries, top_k: usize) -> Vec<Extremum> {
    let v = transformed.values();
    let ts = transformed.timestamps();
    let n = v.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                peaks.push(Extremum {
                    index: i,
                    time: ts[i],
                    value: v[i],
                    kind: ExtremumKind::Peak,
                });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.time.total_cmp(&b.time)));
    peaks.truncate(top_k);
    peaks.sort_by(|a, b| a.time.total_cmp(&b.time));
    peaks
}

/// Merge close peaks, then keep the longest run of clusters that are no
/// further apart than `max_separation`.
///
/// Peaks chain-merge while successive gaps stay below `min_separation`. Run
/// gaps are measured between cluster representatives. The run with the most
/// clusters wins; ties go to the earliest run.
pub fn time_filter_peaks(peaks: &[Extremum], cfg: &PanTompkinsConfig) -> Vec<PeakCluster> {
    let mut clusters: Vec<PeakCluster> = Vec::new();
    for p in peaks {
        match clusters.last_mut() {
            Some(c) if p.time - c.member_times.last().unwrap() < cfg.min_separation => {
                c.member_times.push(p.time);
                c.height = c.height.max(p.value);
            }
            _ => clusters.push(PeakCluster {
                representative_time: p.time,
                member_times: vec![p.time],
                height: p.value,
            }),
        }
    }
    if clusters.is_empty() {
        return clusters;
    }
    let (mut best, mut start) = ((0, 1), 0);
    for i in 1..=clusters.len() {
        let breaks = i == clusters.len()
            || clusters[i].representative_time - clusters[i - 1].representative_time > cfg.max_separation;
        if breaks {
            if i - start > best.1 {
                best = (start, i - start);
            }
            start = i;
        }
    }
    clusters.drain(best.0..best.0 + best.1).collect()
}

/// Full retrospective pass over a raw strain recording (volts or ohms).
///
/// t1 comes from the real-time detector and t2 from the first surviving
/// cluster of the variability envelope; `t_p = max(t1, t2)`. The fatigue flag
/// is the real-time flag: when that pass does not fire, t1 is the end of the
/// recording and so is `t_p`, whatever t2 says.
pub fn posthoc_detect(
    raw: &TimeSeries,
    static_interval: (f64, f64),
    rt_cfg: &RealTimeConfig,
    pt_cfg: &PanTompkinsConfig,
    strain_cfg: &StrainConfig,
) -> Result<PostHocResult> {
    let norm = prepare_strain(raw, static_interval, strain_cfg)?;
    posthoc_detect_normalized(&norm, rt_cfg, pt_cfg)
}

/// [`posthoc_detect`] on an already normalized series.
pub fn posthoc_detect_normalized(
    norm: &TimeSeries,
    rt_cfg: &RealTimeConfig,
    pt_cfg: &PanTompkinsConfig,
) -> Result<PostHocResult> {
    pt_cfg.validate()?;
    let rt = detect_stream(norm, rt_cfg)?;
    let envelope = pan_tompkins_transform(norm, pt_cfg)?;
    let peaks = select_top_peaks(&envelope, pt_cfg.top_k);
    let t2 = time_filter_peaks(&peaks, pt_cfg).first().map(|c| c.representative_time);
    let t_p = t2.map_or(rt.t_r, |t2| rt.t_r.max(t2));
    Ok(PostHocResult {
        t1: rt.t_r,
        t2,
        t_p,
        fatigued: rt.fatigued,
    })
}
