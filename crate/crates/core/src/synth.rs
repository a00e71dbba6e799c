//! Seeded synthetic sessions.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)` with one ChaCha
//! stream per component (0: curl timing, 1: strain noise, 2: sEMG carrier),
//! so changing one noise level leaves the other components untouched. The
//! output is identical across platforms for the same spec.
//!
//! Timeline: `[0, static_duration]` is rest, curls start at `static_duration`
//! and the baseline interval covers the first `baseline_duration` seconds of
//! curls. Each curl is a raised cosine from trough to trough. A cycle's
//! amplitude and range of motion are set by the cycle's start time, moving
//! from the baseline to the fatigue value over `[onset, onset + amp_ramp]`.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::benchmark::{bandpass_filter, QuaternionSample};
use crate::error::{Error, Result};
use crate::session::{write_session, SessionManifest, SessionRecord, StreamRef, SCHEMA_VERSION};
use crate::signal::{TimeSeries, Unit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub subject_id: String,
    /// Total length, seconds.
    pub duration: f64,
    pub static_duration: f64,
    pub baseline_duration: f64,
    pub curl_period: f64,
    /// Relative per-cycle period spread: each period is drawn uniformly from
    /// `curl_period * [1 - j, 1 + j]`.
    pub period_jitter: f64,
    /// Curl phase (fraction of a cycle, 0 = trough) when curls start.
    pub curl_phase: f64,
    pub baseline_amp: f64,
    pub fatigue_onset: f64,
    pub fatigue_amp: f64,
    pub amp_ramp: f64,
    /// Linear drift of R_norm per second of curling.
    pub drift_slope: f64,
    pub noise_sigma: f64,
    /// Resting sensor resistance, ohms.
    pub rest_resistance: f64,
    pub semg_baseline_rms: f64,
    pub semg_fatigue_rms: f64,
    pub elevation_baseline_rom: f64,
    pub elevation_fatigue_rom: f64,
    /// Elevation at the bottom of each curl, degrees.
    pub elevation_offset: f64,
    pub strain_rate: f64,
    pub semg_rate: f64,
    pub kin_rate: f64,
    pub include_semg: bool,
    pub include_kinematics: bool,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            subject_id: "synth".into(),
            duration: 90.0,
            static_duration: 3.0,
            baseline_duration: 20.0,
            curl_period: 2.0,
            period_jitter: 0.1,
            curl_phase: 0.25,
            baseline_amp: 0.5,
            fatigue_onset: 60.0,
            fatigue_amp: 2.0,
            amp_ramp: 0.0,
            drift_slope: 0.0,
            noise_sigma: 0.01,
            rest_resistance: 700.0,
            semg_baseline_rms: 0.05,
            semg_fatigue_rms: 0.15,
            elevation_baseline_rom: 7.0,
            elevation_fatigue_rom: 20.0,
            elevation_offset: 30.0,
            strain_rate: 25.0,
            semg_rate: 1000.0,
            kin_rate: 100.0,
            include_semg: true,
            include_kinematics: true,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::argument(m));
        if !(self.fatigue_onset > 0.0 && self.fatigue_onset < self.duration) {
            return bad(format!(
                "need 0 < fatigue_onset < duration, got {} and {}",
                self.fatigue_onset, self.duration
            ));
        }
        if !(self.static_duration > 0.0 && self.baseline_duration > 0.0) {
            return bad("static_duration and baseline_duration must be > 0".into());
        }
        if self.static_duration + self.baseline_duration > self.fatigue_onset {
            return bad("baseline interval must end before fatigue_onset".into());
        }
        if !(self.curl_period > 0.0)
            || !(0.0..1.0).contains(&self.period_jitter)
            || !(0.0..1.0).contains(&self.curl_phase)
        {
            return bad("need curl_period > 0 and period_jitter, curl_phase in [0, 1)".into());
        }
        let nonneg = [
            self.baseline_amp,
            self.fatigue_amp,
            self.amp_ramp,
            self.noise_sigma,
            self.semg_baseline_rms,
            self.semg_fatigue_rms,
            self.elevation_baseline_rom,
            self.elevation_fatigue_rom,
        ];
        if nonneg.iter().any(|v| !(*v >= 0.0)) {
            return bad("amplitudes, ramp and noise must be >= 0".into());
        }
        if !(self.rest_resistance > 0.0) {
            return bad("rest_resistance must be > 0".into());
        }
        if !(self.strain_rate > 0.0 && self.kin_rate > 0.0 && self.semg_rate > 300.0) {
            return bad("rates must be > 0 and the sEMG rate > 300 Hz".into());
        }
        Ok(())
    }

    pub fn static_interval(&self) -> (f64, f64) {
        (0.0, self.static_duration)
    }

    pub fn baseline_interval(&self) -> (f64, f64) {
        (self.static_duration, self.static_duration + self.baseline_duration)
    }

    /// Fraction of the way from baseline to fatigue at time `t`.
    fn progress(&self, t: f64) -> f64 {
        if t < self.fatigue_onset {
            0.0
        } else if self.amp_ramp > 0.0 {
            ((t - self.fatigue_onset) / self.amp_ramp).min(1.0)
        } else {
            1.0
        }
    }

    fn lerp(&self, t: f64, base: f64, fatigued: f64) -> f64 {
        base + (fatigued - base) * self.progress(t)
    }
}

/// Cycle boundaries shared by every stream.
struct Curls {
    starts: Vec<f64>,
    begin: f64,
}

impl Curls {
    fn new(spec: &SynthSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(0);
        let period = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.random_range(-1.0..=1.0);
            spec.curl_period * (1.0 + spec.period_jitter * u)
        };
        let p0 = period(&mut rng);
        let mut starts = vec![
            spec.static_duration - spec.curl_phase * p0,
            spec.static_duration + (1.0 - spec.curl_phase) * p0,
        ];
        while *starts.last().unwrap() <= spec.duration {
            let next = starts.last().unwrap() + period(&mut rng);
            starts.push(next);
        }
        Self {
            starts,
            begin: spec.static_duration,
        }
    }

    /// `(cycle start, raised-cosine shape in [0, 1])`, or `None` before curls begin.
    fn at(&self, t: f64) -> Option<(f64, f64)> {
        if t < self.begin {
            return None;
        }
        let k = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        let (s0, s1) = (self.starts[k], self.starts[k + 1]);
        let phase = (t - s0) / (s1 - s0);
        Some((s0, 0.5 * (1.0 - (2.0 * PI * phase).cos())))
    }
}

fn sample_count(duration: f64, rate: f64) -> usize {
    (duration * rate).floor() as usize + 1
}

/// Normalized strain (R_norm) at `strain_rate`, plus the true onset.
pub fn generate_strain(spec: &SynthSpec) -> Result<(TimeSeries, f64)> {
    spec.validate()?;
    let curls = Curls::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma >= 0");
    let n = sample_count(spec.duration, spec.strain_rate);
    let values = (0..n)
        .map(|i| {
            let t = i as f64 / spec.strain_rate;
            let clean = match curls.at(t) {
                Some((start, shape)) => {
                    spec.lerp(start, spec.baseline_amp, spec.fatigue_amp) * shape
                        + spec.drift_slope * (t - spec.static_duration)
                }
                None => 0.0,
            };
            clean + noise.sample(&mut rng)
        })
        .collect();
    let s = TimeSeries::uniform(0.0, spec.strain_rate, values, Unit::Dimensionless)?;
    Ok((s, spec.fatigue_onset))
}

/// Band-limited noise carrier scaled by a stepping RMS envelope, in volts.
pub fn generate_semg(spec: &SynthSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(2);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let n = sample_count(spec.duration, spec.semg_rate);
    let white: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let carrier = bandpass_filter(
        &TimeSeries::uniform(0.0, spec.semg_rate, white, Unit::Volts)?,
        20.0,
        120.0,
    )?;
    let rms = (carrier.values().iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    let values = carrier
        .values()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let t = i as f64 / spec.semg_rate;
            c / rms * spec.lerp(t, spec.semg_baseline_rms, spec.semg_fatigue_rms)
        })
        .collect();
    carrier.with_values(values, Unit::Volts)
}

/// Shoulder orientation as a rotation about the elevation (Z) axis.
pub fn generate_shoulder(spec: &SynthSpec) -> Result<Vec<QuaternionSample>> {
    spec.validate()?;
    let curls = Curls::new(spec);
    let n = sample_count(spec.duration, spec.kin_rate);
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / spec.kin_rate;
            let lift = curls.at(t).map_or(0.0, |(start, shape)| {
                spec.lerp(start, spec.elevation_baseline_rom, spec.elevation_fatigue_rom) * shape
            });
            let half = (spec.elevation_offset + lift).to_radians() / 2.0;
            QuaternionSample {
                time: t,
                w: half.cos(),
                x: 0.0,
                y: 0.0,
                z: half.sin(),
            }
        })
        .collect())
}

/// In-memory session with strain in ohms. `t_s` is the fatigue onset.
pub fn generate_session(spec: &SynthSpec) -> Result<SessionRecord> {
    let (norm, onset) = generate_strain(spec)?;
    let r0 = spec.rest_resistance;
    let strain = norm.map(Unit::Ohms, |x| r0 * (1.0 + x))?;
    let semg = spec.include_semg.then(|| generate_semg(spec)).transpose()?;
    let shoulder = spec.include_kinematics.then(|| generate_shoulder(spec)).transpose()?;
    let manifest = SessionManifest {
        schema_version: SCHEMA_VERSION,
        subject_id: spec.subject_id.clone(),
        static_interval: spec.static_interval(),
        baseline_interval: spec.baseline_interval(),
        declared_fatigue_time: Some(onset),
        strain: StreamRef::new("strain.csv", spec.strain_rate).with_unit(Unit::Ohms),
        semg: semg
            .as_ref()
            .map(|_| StreamRef::new("semg.csv", spec.semg_rate).with_unit(Unit::Volts)),
        shoulder: shoulder.as_ref().map(|_| StreamRef::new("shoulder.csv", spec.kin_rate)),
        elbow: None,
    };
    Ok(SessionRecord {
        manifest,
        strain,
        semg,
        shoulder_quats: shoulder,
        elbow_quats: None,
    })
}

/// Generate a session and write it under `dir`; returns the manifest path.
pub fn generate_full_session(spec: &SynthSpec, dir: impl AsRef<Path>) -> Result<std::path::PathBuf> {
    write_session(&generate_session(spec)?, dir)
}
