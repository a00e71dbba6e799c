//! Peak/trough extraction and cycle amplitude.
//!
//! Extrema come from a hysteresis (zig-zag) scan: a running maximum is
//! confirmed as a peak once the signal falls at least `min_prominence` below
//! it, and symmetrically for troughs. Confirmed extrema therefore alternate
//! and every reported swing is at least `min_prominence`. The first and last
//! extremum of a series only need a qualifying swing on their inner side,
//! since the series edge cuts the other side short. Samples at index 0 and
//! `len - 1` are never reported. A plateau is reported at its first sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SeriesView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Peak,
    Trough,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    /// Seconds when produced from a timestamped series, otherwise the sample index.
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

impl Extremum {
    pub fn is_peak(&self) -> bool {
        self.kind == ExtremumKind::Peak
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Seeking {
    Either,
    Peak,
    Trough,
}

/// Alternating peaks and troughs whose swings are at least `min_prominence`.
pub fn find_extrema(values: &[f64], min_prominence: f64) -> Vec<Extremum> {
    let n = values.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let d = min_prominence.max(0.0);
    let interior = |i: usize| i > 0 && i + 1 < n;
    let push = |out: &mut Vec<Extremum>, i: usize, kind| {
        if interior(i) {
            out.push(Extremum {
                index: i,
                time: i as f64,
                value: values[i],
                kind,
            });
        }
    };

    let mut seeking = Seeking::Either;
    let (mut imax, mut imin) = (0usize, 0usize);
    for (i, &x) in values.iter().enumerate().skip(1) {
        match seeking {
            Seeking::Either => {
                if x > values[imax] {
                    imax = i;
                }
                if x < values[imin] {
                    imin = i;
                }
                if x < values[imax] && values[imax] - x >= d {
                    push(&mut out, imax, ExtremumKind::Peak);
                    seeking = Seeking::Trough;
                    imin = i;
                } else if x > values[imin] && x - values[imin] >= d {
                    push(&mut out, imin, ExtremumKind::Trough);
                    seeking = Seeking::Peak;
                    imax = i;
                }
            }
            Seeking::Peak => {
                if x > values[imax] {
                    imax = i;
                } else if x < values[imax] && values[imax] - x >= d {
                    push(&mut out, imax, ExtremumKind::Peak);
                    seeking = Seeking::Trough;
                    imin = i;
                }
            }
            Seeking::Trough => {
                if x < values[imin] {
                    imin = i;
                } else if x > values[imin] && x - values[imin] >= d {
                    push(&mut out, imin, ExtremumKind::Trough);
                    seeking = Seeking::Peak;
                    imax = i;
                }
            }
        }
    }

    // Pending extremum cut off by the end of the series.
    if let Some(last) = out.last().copied() {
        let (i, kind, swing) = match seeking {
            Seeking::Peak => (imax, ExtremumKind::Peak, values[imax] - last.value),
            Seeking::Trough => (imin, ExtremumKind::Trough, last.value - values[imin]),
            Seeking::Either => return out,
        };
        let strict = interior(i)
            && match kind {
                ExtremumKind::Peak => values[i] > values[i + 1],
                ExtremumKind::Trough => values[i] < values[i + 1],
            };
        if strict && i > last.index && swing >= d && swing > 0.0 {
            push(&mut out, i, kind);
        }
    }
    out
}

/// [`find_extrema`] with times taken from the view's timestamps.
pub fn find_extrema_in(view: SeriesView<'_>, min_prominence: f64) -> Vec<Extremum> {
    let mut ex = find_extrema(view.values, min_prominence);
    for e in &mut ex {
        e.time = view.timestamps[e.index];
    }
    ex
}

/// Mean absolute peak-to-trough difference over adjacent alternating pairs.
pub fn cycle_amplitude(extrema: &[Extremum]) -> Result<f64> {
    let diffs: Vec<f64> = extrema
        .windows(2)
        .filter(|w| w[0].kind != w[1].kind)
        .map(|w| (w[0].value - w[1].value).abs())
        .collect();
    if diffs.is_empty() {
        return Err(Error::NoCycle);
    }
    Ok(diffs.iter().sum::<f64>() / diffs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ex(kind: ExtremumKind, value: f64) -> Extremum {
        Extremum {
            index: 0,
            time: 0.0,
            value,
            kind,
        }
    }

    #[test]
    fn one_sine_period() {
        let v: Vec<f64> = (0..100).map(|i| (2.0 * PI * i as f64 / 100.0).sin()).collect();
        let e = find_extrema(&v, 0.05);
        assert_eq!(e.len(), 2);
        assert_eq!((e[0].kind, e[0].index), (ExtremumKind::Peak, 25));
        assert_eq!((e[1].kind, e[1].index), (ExtremumKind::Trough, 75));
    }

    #[test]
    fn ramp_and_flat_have_none() {
        let ramp: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(find_extrema(&ramp, 0.05).is_empty());
        assert!(find_extrema(&[0.0; 50], 0.0).is_empty());
        assert!(find_extrema(&[1.0, 2.0], 0.0).is_empty());
    }

    // Strict local extrema whose classic (two-sided, edge-bounded) prominence
    // reaches the threshold, found by exhaustive scanning.
    fn brute_force_extrema(v: &[f64], threshold: f64) -> Vec<(usize, ExtremumKind)> {
        let n = v.len();
        let mut out = Vec::new();
        for i in 1..n - 1 {
            for (kind, sign) in [(ExtremumKind::Peak, 1.0), (ExtremumKind::Trough, -1.0)] {
                let s = |j: usize| sign * v[j];
                if !(s(i) > s(i - 1) && s(i) > s(i + 1)) {
                    continue;
                }
                let mut left_base = s(i);
                for j in (0..i).rev() {
                    if s(j) > s(i) {
                        break;
                    }
                    left_base = left_base.min(s(j));
                }
                let mut right_base = s(i);
                for j in i + 1..n {
                    if s(j) > s(i) {
                        break;
                    }
                    right_base = right_base.min(s(j));
                }
                if s(i) - left_base.max(right_base) >= threshold {
                    out.push((i, kind));
                }
            }
        }
        out
    }

    #[test]
    fn two_tone_keeps_only_large_tone() {
        let n = 600;
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (2.0 * PI * 3.0 * t).sin() + 0.05 * (2.0 * PI * 40.0 * t).sin()
            })
            .collect();
        let oracle = brute_force_extrema(&v, 0.2);
        assert_eq!(oracle.len(), 6);
        let got: Vec<_> = find_extrema(&v, 0.2).iter().map(|e| (e.index, e.kind)).collect();
        assert_eq!(got, oracle);
        // Without a threshold the small tone adds extra extrema near the crests.
        assert!(brute_force_extrema(&v, 0.0).len() > 6);
    }

    #[test]
    fn trailing_extremum_needs_a_leading_swing() {
        // Trough at index 3 is cut off by the end: kept because the swing from
        // the peak is large.
        let e = find_extrema(&[0.0, 1.0, 0.0, -1.0, -0.9], 0.5);
        assert_eq!(e.iter().map(|e| e.index).collect::<Vec<_>>(), vec![1, 3]);
        // Pending maximum on the last sample is not interior.
        let e = find_extrema(&[0.0, 1.0, 0.0, 2.0], 0.5);
        assert_eq!(e.iter().map(|e| e.index).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn amplitude_examples() {
        use ExtremumKind::*;
        let a = cycle_amplitude(&[ex(Trough, 0.0), ex(Peak, 2.0), ex(Trough, 0.0)]).unwrap();
        assert_eq!(a, 2.0);
        let a = cycle_amplitude(&[ex(Trough, -1.0), ex(Peak, 3.0), ex(Trough, 1.0), ex(Peak, 3.0)]).unwrap();
        assert!((a - 8.0 / 3.0).abs() < 1e-12);
        assert!(matches!(cycle_amplitude(&[ex(Peak, 1.0)]), Err(Error::NoCycle)));
        assert!(matches!(cycle_amplitude(&[]), Err(Error::NoCycle)));
    }

    proptest! {
        #[test]
        fn extrema_alternate_and_peaks_dominate(
            v in prop::collection::vec(-10f64..10.0, 3..120),
            prom in 0f64..3.0,
        ) {
            let e = find_extrema(&v, prom);
            for w in e.windows(2) {
                prop_assert_ne!(w[0].kind, w[1].kind);
                prop_assert!(w[0].index < w[1].index);
                let (p, t) = if w[0].is_peak() { (w[0], w[1]) } else { (w[1], w[0]) };
                prop_assert!(p.value > t.value);
                prop_assert!(p.value - t.value >= prom);
            }
            for x in &e {
                prop_assert!(x.index > 0 && x.index + 1 < v.len());
            }
        }

        #[test]
        fn amplitude_is_nonnegative_and_homogeneous(
            v in prop::collection::vec(-10f64..10.0, 3..120),
            k in 0.01f64..100.0,
        ) {
            let e = find_extrema(&v, 0.5);
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let es = find_extrema(&scaled, 0.5 * k);
            match (cycle_amplitude(&e), cycle_amplitude(&es)) {
                (Ok(a), Ok(b)) => {
                    prop_assert!(a >= 0.0);
                    prop_assert!((b - k * a).abs() <= 1e-9 * (k * a).max(1.0));
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "mismatch {:?} vs {:?}", a, b),
            }
        }
    }
}
