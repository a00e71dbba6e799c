use serde::{Deserialize, Serialize};

use crate::benchmark::euler::{quat_to_euler, unwrap_degrees, EulerConvention, QuaternionSample};
use crate::error::{Error, Result};
use crate::signal::{cycle_amplitude, find_extrema_in, Extremum, TimeSeries, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointAngles {
    pub time: f64,
    pub plane_of_elevation: f64,
    pub elevation: f64,
    pub axial_rotation: f64,
    /// Elbow flexion/extension, when an elbow stream was recorded.
    pub flexion_extension: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KinConfig {
    /// Fractional rise over baseline: each cycle must reach `A0 * (1 + x)`.
    pub increase_threshold: f64,
    pub consecutive_cycles: usize,
    /// Standard-curl segment used for the baseline amplitude, seconds.
    pub baseline_interval: (f64, f64),
    /// Minimum swing for a peak or trough, degrees.
    pub prominence: f64,
}

impl Default for KinConfig {
    fn default() -> Self {
        Self {
            increase_threshold: 1.5,
            consecutive_cycles: 3,
            baseline_interval: (0.0, 0.0),
            prominence: 1.0,
        }
    }
}

/// Shoulder YZY angles per sample, with the outer angles unwrapped. Elbow
/// flexion is the middle XZY angle of the elbow sample at the same index.
pub fn joint_angles(shoulder: &[QuaternionSample], elbow: Option<&[QuaternionSample]>) -> Result<Vec<JointAngles>> {
    if let Some(e) = elbow {
        if e.len() != shoulder.len() {
            return Err(Error::argument(format!(
                "elbow stream has {} samples, shoulder has {}",
                e.len(),
                shoulder.len()
            )));
        }
    }
    let sh = shoulder
        .iter()
        .map(|q| quat_to_euler(q, EulerConvention::Yzy))
        .collect::<Result<Vec<_>>>()?;
    let plane = unwrap_degrees(&sh.iter().map(|e| e.first).collect::<Vec<_>>());
    let axial = unwrap_degrees(&sh.iter().map(|e| e.third).collect::<Vec<_>>());
    let flex = match elbow {
        Some(e) => {
            let raw = e
                .iter()
                .map(|q| quat_to_euler(q, EulerConvention::Xzy).map(|a| a.second))
                .collect::<Result<Vec<_>>>()?;
            Some(unwrap_degrees(&raw))
        }
        None => None,
    };
    Ok(shoulder
        .iter()
        .enumerate()
        .map(|(i, q)| JointAngles {
            time: q.time,
            plane_of_elevation: plane[i],
            elevation: sh[i].second,
            axial_rotation: axial[i],
            flexion_extension: flex.as_ref().map(|f| f[i]),
        })
        .collect())
}

/// Shoulder elevation as a degrees series.
pub fn elevation_series(shoulder: &[QuaternionSample]) -> Result<TimeSeries> {
    let angles = joint_angles(shoulder, None)?;
    TimeSeries::new(
        angles.iter().map(|a| a.time).collect(),
        angles.iter().map(|a| a.elevation).collect(),
        Unit::Degrees,
    )
}

/// Time of the first peak of the first run of `consecutive_cycles`
/// trough-peak-trough cycles whose amplitude (mean of the two sides) reaches
/// `A0 * (1 + increase_threshold)`. A0 is the mean peak-trough swing inside the
/// baseline interval.
pub fn kinematics_fatigue_detect(elevation: &TimeSeries, cfg: &KinConfig) -> Result<Option<f64>> {
    if cfg.consecutive_cycles < 1 {
        return Err(Error::argument("consecutive_cycles must be >= 1"));
    }
    if !(cfg.increase_threshold > 0.0) {
        return Err(Error::argument("increase_threshold must be > 0"));
    }
    let extrema = find_extrema_in(elevation.view(), cfg.prominence);
    let (b0, b1) = cfg.baseline_interval;
    let base: Vec<Extremum> = extrema
        .iter()
        .copied()
        .filter(|e| e.time >= b0 && e.time <= b1)
        .collect();
    let a0 = match cycle_amplitude(&base) {
        Ok(a) if a > 0.0 => a,
        _ => {
            return Err(Error::domain(format!(
                "no peak/trough pair inside baseline [{b0}, {b1}]"
            )))
        }
    };
    let limit = a0 * (1.0 + cfg.increase_threshold);

    let mut run = 0;
    let mut first_peak = None;
    for w in extrema.windows(3) {
        if w[1].kind == crate::signal::ExtremumKind::Peak && !w[0].is_peak() && !w[2].is_peak() {
            let amp = 0.5 * ((w[1].value - w[0].value) + (w[1].value - w[2].value));
            if amp >= limit {
                if run == 0 {
                    first_peak = Some(w[1].time);
                }
                run += 1;
                if run >= cfg.consecutive_cycles {
                    return Ok(first_peak);
                }
            } else {
                run = 0;
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Elevation with one ROM per 2 s cycle, starting at a trough.
    fn trajectory(roms: &[f64]) -> TimeSeries {
        let rate = 100.0;
        let mut v = Vec::new();
        for &rom in roms {
            for i in 0..200 {
                let ph = i as f64 / 200.0;
                v.push(30.0 + 0.5 * rom * (1.0 - (2.0 * PI * ph).cos()));
            }
        }
        v.push(30.0);
        TimeSeries::uniform(0.0, rate, v, Unit::Degrees).unwrap()
    }

    fn cfg() -> KinConfig {
        KinConfig {
            baseline_interval: (0.0, 20.0),
            ..KinConfig::default()
        }
    }

    #[test]
    fn rom_seven_to_twenty_is_detected_at_first_large_peak() {
        let mut roms = vec![7.0; 15];
        roms.extend([20.0; 6]);
        let t = kinematics_fatigue_detect(&trajectory(&roms), &cfg()).unwrap();
        assert_eq!(t, Some(31.0));
    }

    #[test]
    fn sixty_two_percent_growth_is_not_detected() {
        let mut roms = vec![7.0; 15];
        roms.extend([7.0 * 1.62; 10]);
        assert_eq!(kinematics_fatigue_detect(&trajectory(&roms), &cfg()).unwrap(), None);
    }

    #[test]
    fn two_large_cycles_then_regression() {
        let mut roms = vec![7.0; 15];
        roms.extend([20.0, 20.0, 7.0, 7.0, 7.0]);
        assert_eq!(kinematics_fatigue_detect(&trajectory(&roms), &cfg()).unwrap(), None);
    }

    #[test]
    fn offset_does_not_matter() {
        let mut roms = vec![7.0; 15];
        roms.extend([20.0; 6]);
        let base = trajectory(&roms);
        let want = kinematics_fatigue_detect(&base, &cfg()).unwrap();
        for off in [-50.0, 50.0] {
            let moved = base.map(Unit::Degrees, |v| v + off).unwrap();
            assert_eq!(kinematics_fatigue_detect(&moved, &cfg()).unwrap(), want);
        }
    }

    #[test]
    fn flat_baseline_is_domain_error() {
        let s = TimeSeries::uniform(0.0, 100.0, vec![10.0; 3000], Unit::Degrees).unwrap();
        assert!(matches!(kinematics_fatigue_detect(&s, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn elevation_from_z_rotations() {
        let quats: Vec<QuaternionSample> = (0..50)
            .map(|i| {
                let deg: f64 = 30.0 + i as f64 * 0.5;
                let h = deg.to_radians() / 2.0;
                QuaternionSample {
                    time: i as f64 / 100.0,
                    w: h.cos(),
                    x: 0.0,
                    y: 0.0,
                    z: h.sin(),
                }
            })
            .collect();
        let e = elevation_series(&quats).unwrap();
        for (i, v) in e.values().iter().enumerate() {
            assert!((v - (30.0 + i as f64 * 0.5)).abs() < 1e-9);
        }
        let a = joint_angles(&quats, Some(&quats)).unwrap();
        assert!((a[10].flexion_extension.unwrap() - 35.0).abs() < 1e-9);
    }
}
