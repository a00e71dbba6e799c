//! Streaming amplitude-ratio fatigue detector.
//!
//! Normalized strain is cut into fixed batches (50 samples, about one curl at
//! 25 Hz). Each batch is detrended, its cycle amplitude measured, and compared
//! with the smallest amplitude seen so far. A run of consecutive batches whose
//! ratio reaches `tau` marks fatigue at the start of the first batch in the
//! run; the detector then freezes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{cycle_amplitude, detrend_linear, find_extrema, robust_noise_sigma, SeriesView, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RealTimeConfig {
    /// Samples per batch.
    pub batch_size: usize,
    /// Amplitude-ratio threshold; a batch qualifies when `ratio >= tau`.
    pub tau: f64,
    /// Consecutive qualifying batches needed to declare fatigue.
    pub consecutive_required: u32,
    /// Minimum extremum swing as a fraction of the detrended batch range.
    pub prominence: f64,
    /// Minimum extremum swing as a multiple of the batch's robust noise level.
    pub noise_factor: f64,
}

impl Default for RealTimeConfig {
    fn default() -> Self {
        Self {
            batch_size: 50,
            tau: 3.5,
            consecutive_required: 2,
            prominence: 0.3,
            noise_factor: 3.0,
        }
    }
}

impl RealTimeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 8 {
            return Err(Error::argument(format!(
                "batch_size must be >= 8, got {}",
                self.batch_size
            )));
        }
        if !(self.tau > 1.0) {
            return Err(Error::argument(format!("tau must be > 1, got {}", self.tau)));
        }
        if self.consecutive_required < 1 {
            return Err(Error::argument("consecutive_required must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.prominence) {
            return Err(Error::argument("prominence must be in [0, 1)"));
        }
        if !(self.noise_factor >= 0.0) {
            return Err(Error::argument("noise_factor must be >= 0"));
        }
        Ok(())
    }
}

/// Outcome of one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub start_time: f64,
    /// Cycle amplitude; `None` when the batch had no peak/trough pair.
    pub amplitude: Option<f64>,
    /// Amplitude over the running minimum; `None` for skipped batches.
    pub ratio: Option<f64>,
    pub above_threshold: bool,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorState {
    /// Smallest cycle amplitude so far; `+inf` until the first usable batch.
    pub reference_amp: f64,
    /// Length of the current run of qualifying batches.
    pub consecutive: u32,
    /// Start time of the first batch of the current run.
    pub candidate_time: Option<f64>,
    pub fatigued: bool,
    pub batches_seen: usize,
    last_report: Option<BatchReport>,
}

impl Default for DetectorState {
    fn default() -> Self {
        Self {
            reference_amp: f64::INFINITY,
            consecutive: 0,
            candidate_time: None,
            fatigued: false,
            batches_seen: 0,
            last_report: None,
        }
    }
}

impl DetectorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fatigue time once fatigued.
    pub fn fatigue_time(&self) -> Option<f64> {
        self.fatigued.then_some(self.candidate_time).flatten()
    }
}

/// Cycle amplitude of one detrended batch.
///
/// The extremum threshold is the larger of `prominence` times the detrended
/// range and `noise_factor` times the robust noise level, so it scales with
/// the data.
pub fn batch_amplitude(values: &[f64], cfg: &RealTimeConfig) -> Result<f64> {
    let detrended = detrend_linear(values)?;
    let (lo, hi) = detrended
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let noise = robust_noise_sigma(&detrended)?;
    let threshold = (cfg.prominence * (hi - lo)).max(cfg.noise_factor * noise);
    cycle_amplitude(&find_extrema(&detrended, threshold))
}

/// Advance the detector by one full batch.
///
/// A frozen (fatigued) state replays its last report and is returned unchanged.
/// Skipped batches only bump `batches_seen`; in particular they do not break a
/// run of qualifying batches.
pub fn process_batch(
    state: &DetectorState,
    batch: SeriesView<'_>,
    cfg: &RealTimeConfig,
) -> Result<(DetectorState, BatchReport)> {
    if state.fatigued {
        if let Some(report) = state.last_report {
            return Ok((state.clone(), report));
        }
    }
    if batch.len() != cfg.batch_size {
        return Err(Error::argument(format!(
            "batch has {} samples, expected {}",
            batch.len(),
            cfg.batch_size
        )));
    }
    let start_time = batch.timestamps[0];
    let mut next = state.clone();
    next.batches_seen += 1;

    let amplitude = match batch_amplitude(batch.values, cfg) {
        Ok(a) => a,
        Err(Error::NoCycle) => {
            let report = BatchReport {
                start_time,
                amplitude: None,
                ratio: None,
                above_threshold: false,
                skipped: true,
            };
            next.last_report = Some(report);
            return Ok((next, report));
        }
        Err(e) => return Err(e),
    };

    next.reference_amp = next.reference_amp.min(amplitude);
    let ratio = amplitude / next.reference_amp;
    let above = ratio >= cfg.tau;
    if above {
        if next.consecutive == 0 {
            next.candidate_time = Some(start_time);
        }
        next.consecutive += 1;
        if next.consecutive >= cfg.consecutive_required {
            next.fatigued = true;
        }
    } else {
        next.consecutive = 0;
        next.candidate_time = None;
    }
    let report = BatchReport {
        start_time,
        amplitude: Some(amplitude),
        ratio: Some(ratio),
        above_threshold: above,
        skipped: false,
    };
    next.last_report = Some(report);
    Ok((next, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealTimeOutcome {
    /// Fatigue time, or the last sample time when fatigue was not detected.
    pub t_r: f64,
    pub fatigued: bool,
    pub reports: Vec<BatchReport>,
}

/// Run the detector over a whole normalized series. Processing stops at the
/// batch that declares fatigue; a trailing partial batch is ignored.
pub fn detect_stream(samples: &TimeSeries, cfg: &RealTimeConfig) -> Result<RealTimeOutcome> {
    cfg.validate()?;
    if samples.len() < cfg.batch_size {
        return Err(Error::domain(format!(
            "{} samples is less than one batch of {}",
            samples.len(),
            cfg.batch_size
        )));
    }
    let mut detector = RealTimeDetector::new(*cfg)?;
    let mut reports = Vec::new();
    for (&t, &v) in samples.timestamps().iter().zip(samples.values()) {
        if let Some(report) = detector.push(t, v)? {
            reports.push(report);
            if detector.state().fatigued {
                break;
            }
        }
    }
    let end = samples.end_time().expect("nonempty");
    let state = detector.state();
    Ok(RealTimeOutcome {
        t_r: state.fatigue_time().unwrap_or(end),
        fatigued: state.fatigued,
        reports,
    })
}

/// Sample-at-a-time front end: buffers one batch and reports as soon as the
/// batch is full, so a live caller sees each decision one batch after it starts.
#[derive(Debug, Clone)]
pub struct RealTimeDetector {
    cfg: RealTimeConfig,
    state: DetectorState,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl RealTimeDetector {
    pub fn new(cfg: RealTimeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: DetectorState::new(),
            times: Vec::with_capacity(cfg.batch_size),
            values: Vec::with_capacity(cfg.batch_size),
        })
    }

    pub fn state(&self) -> &DetectorState {
        &self.state
    }

    pub fn config(&self) -> &RealTimeConfig {
        &self.cfg
    }

    /// Feed one R_norm sample. Returns a report whenever a batch completes.
    pub fn push(&mut self, time: f64, value: f64) -> Result<Option<BatchReport>> {
        if !time.is_finite() || !value.is_finite() {
            return Err(Error::domain(format!("non-finite sample at t={time}")));
        }
        if let Some(&last) = self.times.last() {
            if time <= last {
                return Err(Error::domain(format!("timestamp {time} does not increase")));
            }
        }
        self.times.push(time);
        self.values.push(value);
        if self.times.len() < self.cfg.batch_size {
            return Ok(None);
        }
        let view = SeriesView {
            timestamps: &self.times,
            values: &self.values,
        };
        let (state, report) = process_batch(&self.state, view, &self.cfg)?;
        self.state = state;
        self.times.clear();
        self.values.clear();
        Ok(Some(report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Unit;
    use std::f64::consts::PI;

    const RATE: f64 = 25.0;

    /// Batches of one curl each; every batch starts a quarter-cycle in so its
    /// peak and trough are interior. `amps[k]` is the peak-to-trough swing of batch k.
    fn batches(amps: &[f64]) -> TimeSeries {
        let mut v = Vec::new();
        for &a in amps {
            for i in 0..50 {
                let phase = 0.25 + i as f64 / 50.0;
                v.push(0.5 * a * (1.0 - (2.0 * PI * phase).cos()));
            }
        }
        TimeSeries::uniform(0.0, RATE, v, Unit::Dimensionless).unwrap()
    }

    fn cfg() -> RealTimeConfig {
        RealTimeConfig::default()
    }

    #[test]
    fn amplitude_matches_detrended_range() {
        // The detrended batch has one interior peak and one interior trough;
        // the line is fitted here by normal equations.
        let s = batches(&[0.5]);
        let y = s.values();
        let n = y.len() as f64;
        let sx: f64 = (0..y.len()).map(|i| i as f64).sum();
        let sxx: f64 = (0..y.len()).map(|i| (i * i) as f64).sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = y.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
        let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let a = (sy - b * sx) / n;
        let r: Vec<f64> = y.iter().enumerate().map(|(i, v)| v - a - b * i as f64).collect();
        let inner = |want_max: bool| {
            (1..r.len() - 1)
                .filter(|&i| {
                    if want_max {
                        r[i] > r[i - 1] && r[i] > r[i + 1]
                    } else {
                        r[i] < r[i - 1] && r[i] < r[i + 1]
                    }
                })
                .map(|i| r[i])
                .collect::<Vec<_>>()
        };
        let (maxima, minima) = (inner(true), inner(false));
        assert_eq!((maxima.len(), minima.len()), (1, 1));
        let expected = maxima[0] - minima[0];
        let got = batch_amplitude(y, &cfg()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        // The tilt of a whole cycle eats into the swing.
        assert!(got < 0.5);
    }

    #[test]
    fn ten_normal_then_three_large() {
        let mut amps = vec![0.5; 10];
        amps.extend([2.0; 3]);
        let out = detect_stream(&batches(&amps), &cfg()).unwrap();
        assert!(out.fatigued);
        assert_eq!(out.t_r, 20.0);
        assert_eq!(out.reports.len(), 12);
        let r = out.reports[10].ratio.unwrap();
        assert!((r - 4.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn constant_amplitude_never_fires() {
        let s = batches(&[0.5; 20]);
        let out = detect_stream(&s, &cfg()).unwrap();
        assert!(!out.fatigued);
        assert_eq!(out.t_r, s.end_time().unwrap());
        assert!(out.reports.iter().all(|r| (r.ratio.unwrap() - 1.0).abs() < 1e-9));
    }

    #[test]
    fn isolated_spike_breaks_the_run() {
        let mut amps = vec![0.5; 8];
        amps.push(2.0);
        amps.extend([0.5; 5]);
        let out = detect_stream(&batches(&amps), &cfg()).unwrap();
        assert!(!out.fatigued);
        assert!(out.reports[8].above_threshold);
        assert!(!out.reports[9].above_threshold);
    }

    #[test]
    fn flat_signal_is_all_skipped() {
        let s = TimeSeries::uniform(0.0, RATE, vec![0.0; 500], Unit::Dimensionless).unwrap();
        let out = detect_stream(&s, &cfg()).unwrap();
        assert!(!out.fatigued);
        assert_eq!(out.t_r, s.end_time().unwrap());
        assert!(out.reports.iter().all(|r| r.skipped));
    }

    #[test]
    fn short_input_is_domain_error() {
        let s = TimeSeries::uniform(0.0, RATE, vec![0.0; 49], Unit::Dimensionless).unwrap();
        assert!(matches!(detect_stream(&s, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn skipped_batch_does_not_reset_run() {
        let mut amps = vec![0.5; 6];
        amps.extend([2.0, 0.0, 2.0]);
        let out = detect_stream(&batches(&amps), &cfg()).unwrap();
        assert!(out.reports[7].skipped);
        assert!(out.fatigued);
        assert_eq!(out.t_r, 6.0 * 2.0);
    }

    #[test]
    fn ratio_equal_to_tau_qualifies() {
        let c = RealTimeConfig { tau: 4.0, ..cfg() };
        let mut amps = vec![0.5; 4];
        amps.extend([2.0; 2]);
        let s = batches(&amps);
        let ratio = detect_stream(&s, &RealTimeConfig { tau: 100.0, ..cfg() })
            .unwrap()
            .reports[4]
            .ratio
            .unwrap();
        let exact = RealTimeConfig { tau: ratio, ..c };
        assert!(detect_stream(&s, &exact).unwrap().fatigued);
    }

    #[test]
    fn frozen_state_replays_last_report() {
        let mut amps = vec![0.5; 3];
        amps.extend([2.0; 2]);
        let s = batches(&amps);
        let mut state = DetectorState::new();
        let mut last = None;
        for k in 0..5 {
            let (next, report) = process_batch(&state, s.slice(k * 50..(k + 1) * 50), &cfg()).unwrap();
            state = next;
            last = Some(report);
        }
        assert!(state.fatigued);
        let other = batches(&[0.5]);
        let (again, report) = process_batch(&state, other.view(), &cfg()).unwrap();
        assert_eq!(again, state);
        assert_eq!(Some(report), last);
    }

    #[test]
    fn wrong_batch_length_is_rejected() {
        let s = batches(&[0.5]);
        assert!(process_batch(&DetectorState::new(), s.slice(0..40), &cfg()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RealTimeConfig { batch_size: 7, ..cfg() }.validate().is_err());
        assert!(RealTimeConfig { tau: 1.0, ..cfg() }.validate().is_err());
        assert!(RealTimeConfig {
            consecutive_required: 0,
            ..cfg()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn reference_tracks_minimum() {
        let s = batches(&[1.0, 0.8, 1.2, 0.6, 0.9]);
        let mut state = DetectorState::new();
        let mut amps = Vec::new();
        for k in 0..5 {
            let (next, report) = process_batch(&state, s.slice(k * 50..(k + 1) * 50), &cfg()).unwrap();
            assert!(next.reference_amp <= state.reference_amp);
            amps.push(report.amplitude.unwrap());
            let min = amps.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(next.reference_amp, min);
            state = next;
        }
    }
}
