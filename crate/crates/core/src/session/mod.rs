//! Session files: a JSON manifest plus one CSV per stream.
//!
//! Scalar streams use a `t,<value>` header, quaternion streams
//! `t,qw,qx,qy,qz`. Line numbers in load errors are 1-based and count the
//! header line.

mod manifest;
mod report;

use std::fs;
use std::path::{Path, PathBuf};

use crate::benchmark::QuaternionSample;
use crate::error::{Error, Result};
use crate::signal::{TimeSeries, Unit};

pub use manifest::{SessionManifest, StreamRef, SCHEMA_VERSION};
pub use report::{render_report, write_report, ReportFormat};

const QUAT_HEADER: [&str; 5] = ["t", "qw", "qx", "qy", "qz"];
const RATE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub manifest: SessionManifest,
    pub strain: TimeSeries,
    pub semg: Option<TimeSeries>,
    pub shoulder_quats: Option<Vec<QuaternionSample>>,
    pub elbow_quats: Option<Vec<QuaternionSample>>,
}

/// Load and validate a session. Stream paths resolve against the manifest's
/// directory.
pub fn load_session(manifest_path: impl AsRef<Path>) -> Result<SessionRecord> {
    let manifest_path = manifest_path.as_ref();
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest = SessionManifest::from_json(&text, manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));

    let strain_unit = manifest.strain.unit.expect("validated");
    let strain = load_scalar(dir, &manifest.strain, strain_unit)?;
    let semg = manifest
        .semg
        .as_ref()
        .map(|s| load_scalar(dir, s, Unit::Volts))
        .transpose()?;
    let shoulder_quats = manifest.shoulder.as_ref().map(|s| load_quats(dir, s)).transpose()?;
    let elbow_quats = manifest.elbow.as_ref().map(|s| load_quats(dir, s)).transpose()?;
    Ok(SessionRecord {
        manifest,
        strain,
        semg,
        shoulder_quats,
        elbow_quats,
    })
}

/// Write a record as manifest plus CSVs into `dir`, using the file names from
/// the manifest. Returns the manifest path.
pub fn write_session(record: &SessionRecord, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let m = &record.manifest;
    m.validate()?;
    let value_col = |u: Unit| u.as_str();
    write_csv(
        &dir.join(&m.strain.path),
        &["t", value_col(record.strain.unit())],
        scalar_rows(&record.strain),
    )?;
    match (&m.semg, &record.semg) {
        (Some(r), Some(s)) => write_csv(&dir.join(&r.path), &["t", value_col(s.unit())], scalar_rows(s))?,
        (None, None) => {}
        _ => return Err(Error::argument("sEMG stream and manifest entry disagree")),
    }
    for (r, q, name) in [
        (&m.shoulder, &record.shoulder_quats, "shoulder"),
        (&m.elbow, &record.elbow_quats, "elbow"),
    ] {
        match (r, q) {
            (Some(r), Some(q)) => write_csv(&dir.join(&r.path), &QUAT_HEADER, quat_rows(q))?,
            (None, None) => {}
            _ => return Err(Error::argument(format!("{name} stream and manifest entry disagree"))),
        }
    }
    let path = dir.join("manifest.json");
    fs::write(&path, m.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn scalar_rows(s: &TimeSeries) -> impl Iterator<Item = Vec<f64>> + '_ {
    s.timestamps().iter().zip(s.values()).map(|(&t, &v)| vec![t, v])
}

fn quat_rows(q: &[QuaternionSample]) -> impl Iterator<Item = Vec<f64>> + '_ {
    q.iter().map(|q| vec![q.time, q.w, q.x, q.y, q.z])
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::load(path, None, format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        // `{}` on f64 prints the shortest string that parses back exactly.
        w.write_record(row.iter().map(|v| format!("{v}"))).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Table {
    times: Vec<f64>,
    columns: Vec<Vec<f64>>,
    /// File line of each retained row.
    lines: Vec<usize>,
}

fn read_table(path: &Path, expect: Option<&[&str]>, width: usize) -> Result<Table> {
    if !path.exists() {
        return Err(Error::load(path, None, "file not found"));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::load(path, None, e.to_string()))?;
    let header = rdr
        .headers()
        .map_err(|e| Error::load(path, Some(1), e.to_string()))?
        .clone();
    if header.len() != width || header.get(0) != Some("t") {
        return Err(Error::load(
            path,
            Some(1),
            format!(
                "expected {width} columns starting with `t`, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    if let Some(names) = expect {
        if header.iter().ne(names.iter().copied()) {
            return Err(Error::load(
                path,
                Some(1),
                format!("expected header `{}`", names.join(",")),
            ));
        }
    }
    let mut table = Table {
        times: Vec::new(),
        columns: vec![Vec::new(); width - 1],
        lines: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            Error::load(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::load(
                path,
                Some(line),
                format!("expected {width} fields, got {}", rec.len()),
            ));
        }
        let mut vals = Vec::with_capacity(width);
        for (field, name) in rec.iter().zip(header.iter()) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::load(path, Some(line), format!("`{field}` in column {name} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::load(
                    path,
                    Some(line),
                    format!("non-finite value in column {name}"),
                ));
            }
            vals.push(v);
        }
        if let Some(&prev) = table.times.last() {
            if vals[0] <= prev {
                return Err(Error::load(
                    path,
                    Some(line),
                    format!("timestamp {} does not increase (previous {prev})", vals[0]),
                ));
            }
        }
        table.times.push(vals[0]);
        for (c, v) in table.columns.iter_mut().zip(&vals[1..]) {
            c.push(*v);
        }
        table.lines.push(line);
    }
    if table.times.len() < 2 {
        return Err(Error::load(path, None, "stream needs at least two samples"));
    }
    Ok(table)
}

fn check_rate(path: &Path, times: &[f64], rate: f64) -> Result<()> {
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let median = crate::signal::median_in_place(&mut gaps);
    let actual = 1.0 / median;
    if ((actual - rate) / rate).abs() > RATE_TOLERANCE {
        return Err(Error::load(
            path,
            None,
            format!("measured rate {actual:.3} Hz differs from manifest rate {rate} Hz by more than 10%"),
        ));
    }
    Ok(())
}

/// Shift by the trigger offset and drop samples before zero.
fn align(times: &mut Vec<f64>, columns: &mut [Vec<f64>], offset: f64) -> usize {
    for t in times.iter_mut() {
        *t -= offset;
    }
    let lo = times.partition_point(|&t| t < 0.0);
    times.drain(..lo);
    for c in columns.iter_mut() {
        c.drain(..lo);
    }
    lo
}

fn load_scalar(dir: &Path, stream: &StreamRef, unit: Unit) -> Result<TimeSeries> {
    let path = dir.join(&stream.path);
    let mut table = read_table(&path, None, 2)?;
    check_rate(&path, &table.times, stream.rate)?;
    align(&mut table.times, &mut table.columns, stream.offset);
    let values = table.columns.pop().expect("one value column");
    TimeSeries::new(table.times, values, unit)
        .and_then(|s| s.with_nominal_rate(stream.rate))
        .map_err(|e| Error::load(&path, None, e.to_string()))
}

fn load_quats(dir: &Path, stream: &StreamRef) -> Result<Vec<QuaternionSample>> {
    let path = dir.join(&stream.path);
    let mut table = read_table(&path, Some(&QUAT_HEADER), 5)?;
    check_rate(&path, &table.times, stream.rate)?;
    let dropped = align(&mut table.times, &mut table.columns, stream.offset);
    let c = &table.columns;
    (0..table.times.len())
        .map(|i| {
            let raw = QuaternionSample {
                time: table.times[i],
                w: c[0][i],
                x: c[1][i],
                y: c[2][i],
                z: c[3][i],
            };
            raw.normalized()
                .ok_or_else(|| Error::load(&path, Some(table.lines[i + dropped]), "zero-length quaternion"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn manifest(semg: bool) -> SessionManifest {
        SessionManifest {
            schema_version: 1,
            subject_id: "t".into(),
            static_interval: (0.0, 0.1),
            baseline_interval: (0.1, 0.2),
            declared_fatigue_time: None,
            strain: StreamRef::new("strain.csv", 10.0).with_unit(Unit::Ohms),
            semg: semg.then(|| StreamRef::new("semg.csv", 10.0)),
            shoulder: None,
            elbow: None,
        }
    }

    #[test]
    fn repeated_timestamp_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "strain.csv", "t,ohms\n0,700\n0.1,701\n0.1,702\n0.2,700\n");
        fs::write(dir.path().join("m.json"), manifest(false).to_json()).unwrap();
        let err = load_session(dir.path().join("m.json")).unwrap_err();
        match &err {
            Error::Load { path, line, .. } => {
                assert!(path.ends_with("strain.csv"));
                assert_eq!(*line, Some(4));
            }
            other => panic!("{other}"),
        }
        assert!(err.to_string().contains("strain.csv:4"));
    }

    #[test]
    fn malformed_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.json"), manifest(true).to_json()).unwrap();
        write(dir.path(), "strain.csv", "t,ohms\n0,700\n0.1,abc\n");
        let err = load_session(dir.path().join("m.json")).unwrap_err();
        assert!(matches!(err, Error::Load { line: Some(3), .. }), "{err}");

        write(dir.path(), "strain.csv", "t,ohms\n0,700\n0.1,700\n0.2,700\n");
        let err = load_session(dir.path().join("m.json")).unwrap_err();
        assert!(err.to_string().contains("semg.csv"), "{err}");
        assert!(err.to_string().contains("not found"), "{err}");
    }

    #[test]
    fn optional_semg_absent() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "strain.csv", "t,ohms\n0,700\n0.1,700\n0.2,700\n");
        fs::write(dir.path().join("m.json"), manifest(false).to_json()).unwrap();
        let rec = load_session(dir.path().join("m.json")).unwrap();
        assert!(rec.semg.is_none());
        assert_eq!(rec.strain.len(), 3);
    }

    #[test]
    fn rate_mismatch_and_offset() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "strain.csv", "t,ohms\n0,700\n0.2,700\n0.4,700\n");
        fs::write(dir.path().join("m.json"), manifest(false).to_json()).unwrap();
        assert!(load_session(dir.path().join("m.json")).is_err());

        write(dir.path(), "strain.csv", "t,ohms\n0,1\n0.1,2\n0.2,3\n0.3,4\n0.4,5\n");
        let mut m = manifest(false);
        m.strain.offset = 0.15;
        fs::write(dir.path().join("m.json"), m.to_json()).unwrap();
        let rec = load_session(dir.path().join("m.json")).unwrap();
        assert_eq!(rec.strain.values(), &[3.0, 4.0, 5.0]);
        assert!((rec.strain.timestamps()[0] - 0.05).abs() < 1e-12);
    }

    #[test]
    fn quaternions_are_renormalized() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "strain.csv", "t,ohms\n0,700\n0.1,700\n0.2,700\n");
        write(dir.path(), "q.csv", "t,qw,qx,qy,qz\n0,2,0,0,0\n0.1,0,0,0,3\n");
        let mut m = manifest(false);
        m.shoulder = Some(StreamRef::new("q.csv", 10.0));
        fs::write(dir.path().join("m.json"), m.to_json()).unwrap();
        let rec = load_session(dir.path().join("m.json")).unwrap();
        let q = rec.shoulder_quats.unwrap();
        assert_eq!((q[0].w, q[1].z), (1.0, 1.0));

        write(dir.path(), "q.csv", "t,qw,qx,qy\n0,1,0,0\n0.1,1,0,0\n");
        assert!(load_session(dir.path().join("m.json")).is_err());
    }
}
