use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Unit;

pub const SCHEMA_VERSION: u32 = 1;

/// One recorded stream. `path` is relative to the manifest's directory unless
/// absolute. `offset` is the stream's trigger delay in seconds: samples are
/// shifted by `t - offset` at load and anything before zero is dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRef {
    pub path: PathBuf,
    /// Nominal sample rate, Hz.
    pub rate: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Unit>,
}

impl StreamRef {
    pub fn new(path: impl Into<PathBuf>, rate: f64) -> Self {
        Self {
            path: path.into(),
            rate,
            offset: 0.0,
            unit: None,
        }
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = Some(unit);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub schema_version: u32,
    pub subject_id: String,
    pub static_interval: (f64, f64),
    /// Standard-curl segment used by the benchmark baselines.
    pub baseline_interval: (f64, f64),
    /// Subject-declared fatigue time t_s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_fatigue_time: Option<f64>,
    /// Strain stream; `unit` must be volts or ohms.
    pub strain: StreamRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semg: Option<StreamRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shoulder: Option<StreamRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elbow: Option<StreamRef>,
}

impl SessionManifest {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let m: SessionManifest =
            serde_json::from_str(text).map_err(|e| Error::load(path, Some(e.line()), e.to_string()))?;
        m.validate().map_err(|e| match e {
            Error::Argument(msg) | Error::Domain(msg) => Error::load(path, None, msg),
            other => other,
        })?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::domain(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let (s0, s1) = self.static_interval;
        let (b0, b1) = self.baseline_interval;
        if !(s0 <= s1 && s1 <= b0 && b0 <= b1) {
            return Err(Error::domain(format!(
                "intervals out of order: static [{s0}, {s1}], baseline [{b0}, {b1}]"
            )));
        }
        if let Some(ts) = self.declared_fatigue_time {
            if !(ts >= b1) {
                return Err(Error::domain(format!(
                    "declared fatigue time {ts} precedes the baseline end {b1}"
                )));
            }
        }
        match self.strain.unit {
            Some(Unit::Volts) | Some(Unit::Ohms) => {}
            other => {
                return Err(Error::domain(format!(
                    "strain unit must be volts or ohms, got {}",
                    other.map_or("none", |u| u.as_str())
                )))
            }
        }
        let streams = [
            Some(&self.strain),
            self.semg.as_ref(),
            self.shoulder.as_ref(),
            self.elbow.as_ref(),
        ];
        for s in streams.into_iter().flatten() {
            if !(s.rate > 0.0 && s.rate.is_finite()) {
                return Err(Error::domain(format!("{}: rate must be > 0", s.path.display())));
            }
            if !s.offset.is_finite() {
                return Err(Error::domain(format!("{}: offset must be finite", s.path.display())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SessionManifest {
        SessionManifest {
            schema_version: 1,
            subject_id: "S01".into(),
            static_interval: (0.0, 3.0),
            baseline_interval: (3.0, 23.0),
            declared_fatigue_time: Some(60.0),
            strain: StreamRef::new("strain.csv", 25.0).with_unit(Unit::Ohms),
            semg: None,
            shoulder: Some(StreamRef::new("shoulder.csv", 100.0)),
            elbow: None,
        }
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        let back = SessionManifest::from_json(&m.to_json(), Path::new("m.json")).unwrap();
        assert_eq!(back, m);
        assert!(!m.to_json().contains("semg"));
    }

    #[test]
    fn rejects_bad_schema_and_order() {
        let p = Path::new("m.json");
        let mut m = sample();
        m.schema_version = 2;
        assert!(matches!(
            SessionManifest::from_json(&m.to_json(), p),
            Err(Error::Load { .. })
        ));
        let mut m = sample();
        m.declared_fatigue_time = Some(10.0);
        assert!(SessionManifest::from_json(&m.to_json(), p).is_err());
        let mut m = sample();
        m.strain.unit = Some(Unit::Degrees);
        assert!(SessionManifest::from_json(&m.to_json(), p).is_err());
        let err = SessionManifest::from_json("{\n\"schema_version\": 1,\n oops", p).unwrap_err();
        assert!(matches!(err, Error::Load { line: Some(3), .. }), "{err}");
    }
}
