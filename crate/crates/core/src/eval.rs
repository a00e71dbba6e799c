//! Per-subject timing differences against the declared fatigue time and the
//! Avr1/Avr2 aggregates.
//!
//! For each method the mean is taken over absolute differences and the
//! standard deviation (n - 1) over signed differences. Avr2 uses detected
//! subjects only. Avr1 keeps everyone, treating a non-detection as a
//! detection at time 0, i.e. a difference equal to t_s.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{elevation_series, kinematics_fatigue_detect, semg_fatigue_detect, EmgConfig, KinConfig};
use crate::error::{Error, Result};
use crate::posthoc::{posthoc_detect_normalized, PanTompkinsConfig};
use crate::realtime::{detect_stream, RealTimeConfig};
use crate::session::{load_session, SessionRecord};
use crate::strain::{prepare_strain, StrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Kinematics,
    Semg,
    Realtime,
    Posthoc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Kinematics, Method::Semg, Method::Realtime, Method::Posthoc];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Kinematics => "kinematics",
            Method::Semg => "semg",
            Method::Realtime => "realtime",
            Method::Posthoc => "posthoc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub subject_id: String,
    pub t_s: f64,
    pub t_k: Option<f64>,
    pub t_e: Option<f64>,
    pub t_r: Option<f64>,
    pub t_p: Option<f64>,
    pub d_k: Option<f64>,
    pub d_e: Option<f64>,
    pub d_r: Option<f64>,
    pub d_p: Option<f64>,
}

impl EvaluationRow {
    /// Row from detection times; each diff is `t_s - t`.
    pub fn from_times(
        subject_id: impl Into<String>,
        t_s: f64,
        t_k: Option<f64>,
        t_e: Option<f64>,
        t_r: Option<f64>,
        t_p: Option<f64>,
    ) -> Self {
        let d = |t: Option<f64>| t.map(|t| t_s - t);
        Self {
            subject_id: subject_id.into(),
            t_s,
            t_k,
            t_e,
            t_r,
            t_p,
            d_k: d(t_k),
            d_e: d(t_e),
            d_r: d(t_r),
            d_p: d(t_p),
        }
    }

    /// Row from published differences; detection times are recovered as
    /// `t_s - d`.
    pub fn from_diffs(
        subject_id: impl Into<String>,
        t_s: f64,
        d_k: Option<f64>,
        d_e: Option<f64>,
        d_r: Option<f64>,
        d_p: Option<f64>,
    ) -> Self {
        let t = |d: Option<f64>| d.map(|d| t_s - d);
        Self {
            subject_id: subject_id.into(),
            t_s,
            t_k: t(d_k),
            t_e: t(d_e),
            t_r: t(d_r),
            t_p: t(d_p),
            d_k,
            d_e,
            d_r,
            d_p,
        }
    }

    pub fn diff(&self, m: Method) -> Option<f64> {
        match m {
            Method::Kinematics => self.d_k,
            Method::Semg => self.d_e,
            Method::Realtime => self.d_r,
            Method::Posthoc => self.d_p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub n_detected: usize,
    pub avr1_mean: f64,
    pub avr1_std: Option<f64>,
    pub avr2_mean: Option<f64>,
    pub avr2_std: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n_subjects: usize,
    pub kinematics: MethodStats,
    pub semg: MethodStats,
    pub realtime: MethodStats,
    pub posthoc: MethodStats,
}

impl SummaryStats {
    pub fn method(&self, m: Method) -> &MethodStats {
        match m {
            Method::Kinematics => &self.kinematics,
            Method::Semg => &self.semg,
            Method::Realtime => &self.realtime,
            Method::Posthoc => &self.posthoc,
        }
    }
}

/// Mean of absolute values and n - 1 standard deviation of the signed values.
fn mean_abs_and_std(diffs: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = diffs.len();
    if n == 0 {
        return (None, None);
    }
    let mean_abs = diffs.iter().map(|d| d.abs()).sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean_abs), None);
    }
    let m = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean_abs), Some(var.sqrt()))
}

pub fn summary_stats(rows: &[EvaluationRow]) -> Result<SummaryStats> {
    if rows.is_empty() {
        return Err(Error::argument("summary needs at least one row"));
    }
    let stats = |m: Method| {
        let detected: Vec<f64> = rows.iter().filter_map(|r| r.diff(m)).collect();
        let substituted: Vec<f64> = rows.iter().map(|r| r.diff(m).unwrap_or(r.t_s)).collect();
        let (avr1_mean, avr1_std) = mean_abs_and_std(&substituted);
        let (avr2_mean, avr2_std) = mean_abs_and_std(&detected);
        MethodStats {
            n_detected: detected.len(),
            avr1_mean: avr1_mean.expect("rows nonempty"),
            avr1_std,
            avr2_mean,
            avr2_std,
        }
    };
    Ok(SummaryStats {
        n_subjects: rows.len(),
        kinematics: stats(Method::Kinematics),
        semg: stats(Method::Semg),
        realtime: stats(Method::Realtime),
        posthoc: stats(Method::Posthoc),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub strain: StrainConfig,
    pub realtime: RealTimeConfig,
    pub posthoc: PanTompkinsConfig,
    pub emg: EmgConfig,
    /// `baseline_interval` is taken from each manifest.
    pub kinematics: KinConfig,
}

/// Run every available detector on one session. Sessions without a declared
/// fatigue time yield `None`.
pub fn evaluate_session(session: &SessionRecord, cfg: &EvalConfig) -> Option<EvaluationRow> {
    let m = &session.manifest;
    let Some(t_s) = m.declared_fatigue_time else {
        log::warn!("{}: no declared fatigue time, skipped", m.subject_id);
        return None;
    };
    let warn = |what: &str, e: Error| {
        log::warn!("{}: {what} failed: {e}", m.subject_id);
    };

    let t_k = session.shoulder_quats.as_ref().and_then(|q| {
        let kin = KinConfig {
            baseline_interval: m.baseline_interval,
            ..cfg.kinematics
        };
        elevation_series(q)
            .and_then(|e| kinematics_fatigue_detect(&e, &kin))
            .map_err(|e| warn("kinematics", e))
            .ok()
            .flatten()
    });
    let t_e = session.semg.as_ref().and_then(|s| {
        semg_fatigue_detect(s, &cfg.emg, m.baseline_interval)
            .map_err(|e| warn("sEMG", e))
            .ok()
            .flatten()
    });
    let (t_r, t_p) = match prepare_strain(&session.strain, m.static_interval, &cfg.strain) {
        Ok(norm) => {
            let t_r = detect_stream(&norm, &cfg.realtime)
                .map_err(|e| warn("real-time", e))
                .ok()
                .map(|o| o.t_r);
            let t_p = posthoc_detect_normalized(&norm, &cfg.realtime, &cfg.posthoc)
                .map_err(|e| warn("post hoc", e))
                .ok()
                .map(|r| r.t_p);
            (t_r, t_p)
        }
        Err(e) => {
            warn("strain preparation", e);
            (None, None)
        }
    };
    Some(EvaluationRow::from_times(m.subject_id.clone(), t_s, t_k, t_e, t_r, t_p))
}

/// Evaluate sessions in parallel; output keeps input order.
pub fn evaluate_sessions(sessions: &[SessionRecord], cfg: &EvalConfig) -> Vec<EvaluationRow> {
    sessions
        .par_iter()
        .map(|s| evaluate_session(s, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Load and evaluate manifests in the given order.
pub fn evaluate_manifests<P: AsRef<Path> + Sync>(paths: &[P], cfg: &EvalConfig) -> Result<Vec<EvaluationRow>> {
    let sessions = paths
        .par_iter()
        .map(|p| load_session(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(evaluate_sessions(&sessions, cfg))
}

/// Parse a table of published differences with header
/// `subject,t_s,dt_kin,dt_semg,dt_rt,dt_ph`; `NA` marks a non-detection.
pub fn read_diff_table(path: impl AsRef<Path>) -> Result<Vec<EvaluationRow>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::load(path, None, e.to_string()))?;
    let expected = ["subject", "t_s", "dt_kin", "dt_semg", "dt_rt", "dt_ph"];
    let header = rdr.headers().map_err(|e| Error::load(path, Some(1), e.to_string()))?;
    if header.iter().ne(expected) {
        return Err(Error::load(
            path,
            Some(1),
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::load(path, e.position().map(|p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize);
        let cell = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("");
            if s.eq_ignore_ascii_case("NA") {
                return Ok(None);
            }
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| Error::load(path, line, format!("`{s}` in column {} is not a number", expected[i])))
        };
        let t_s = cell(1)?.ok_or_else(|| Error::load(path, line, "t_s cannot be NA"))?;
        rows.push(EvaluationRow::from_diffs(
            rec.get(0).unwrap_or(""),
            t_s,
            cell(2)?,
            cell(3)?,
            cell(4)?,
            cell(5)?,
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_has_no_std() {
        let rows = [EvaluationRow::from_diffs(
            "a",
            10.0,
            Some(5.0),
            None,
            Some(5.0),
            Some(-5.0),
        )];
        let s = summary_stats(&rows).unwrap();
        assert_eq!(s.realtime.avr2_mean, Some(5.0));
        assert_eq!(s.realtime.avr2_std, None);
        assert_eq!(s.posthoc.avr1_mean, 5.0);
        assert_eq!(s.semg.n_detected, 0);
        assert_eq!(s.semg.avr2_mean, None);
        assert_eq!(s.semg.avr1_mean, 10.0);
    }

    #[test]
    fn empty_is_argument_error() {
        assert!(matches!(summary_stats(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn hand_computed_stats() {
        let rows = [
            EvaluationRow::from_diffs("a", 20.0, Some(2.0), Some(-4.0), None, Some(1.0)),
            EvaluationRow::from_diffs("b", 30.0, Some(-6.0), None, None, Some(1.0)),
        ];
        let s = summary_stats(&rows).unwrap();
        assert_eq!(s.kinematics.avr2_mean, Some(4.0));
        // signed: 2, -6 -> mean -2, var (16 + 16) / 1.
        assert!((s.kinematics.avr2_std.unwrap() - 32f64.sqrt()).abs() < 1e-12);
        // substituted sEMG: -4, 30.
        assert_eq!(s.semg.avr1_mean, 17.0);
        assert_eq!(s.realtime.avr1_mean, 25.0);
        assert_eq!(s.posthoc.avr2_std, Some(0.0));
    }

    #[test]
    fn no_na_means_avr1_equals_avr2() {
        let rows: Vec<_> = (0..6)
            .map(|i| {
                EvaluationRow::from_diffs(
                    i.to_string(),
                    50.0,
                    Some(i as f64 - 2.0),
                    Some(1.5 * i as f64),
                    Some(-3.0),
                    Some(i as f64),
                )
            })
            .collect();
        let s = summary_stats(&rows).unwrap();
        for m in Method::ALL {
            let ms = s.method(m);
            assert_eq!(Some(ms.avr1_mean), ms.avr2_mean);
            assert_eq!(ms.avr1_std, ms.avr2_std);
        }
    }

    #[test]
    fn from_times_and_from_diffs_agree() {
        let a = EvaluationRow::from_times("x", 60.0, Some(55.0), None, Some(62.5), Some(70.0));
        let b = EvaluationRow::from_diffs("x", 60.0, a.d_k, a.d_e, a.d_r, a.d_p);
        assert_eq!(a, b);
        assert_eq!(a.d_r, Some(-2.5));
    }
}
