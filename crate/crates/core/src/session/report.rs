use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::eval::{summary_stats, EvaluationRow, MethodStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::argument(format!("unknown report format `{other}`"))),
        }
    }
}

fn round2(v: f64) -> f64 {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{:.2}", round2(v)))
}

fn num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, |v| json!(round2(v)))
}

fn method_json(m: &MethodStats) -> Value {
    json!({
        "n_detected": m.n_detected,
        "avr1_mean": num(Some(m.avr1_mean)),
        "avr1_std": num(m.avr1_std),
        "avr2_mean": num(m.avr2_mean),
        "avr2_std": num(m.avr2_std),
    })
}

/// Report text. CSV has one row per subject with columns
/// `subject,t_s,dt_kin,dt_semg,dt_rt,dt_ph`; JSON holds the rows plus the
/// summary (null for an empty set). Times are rounded to 0.01 s.
pub fn render_report(rows: &[EvaluationRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from("subject,t_s,dt_kin,dt_semg,dt_rt,dt_ph\n");
            for r in rows {
                if r.subject_id.contains([',', '"', '\n']) {
                    return Err(Error::argument(format!(
                        "subject id `{}` cannot be written to CSV",
                        r.subject_id
                    )));
                }
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.subject_id,
                    cell(Some(r.t_s)),
                    cell(r.d_k),
                    cell(r.d_e),
                    cell(r.d_r),
                    cell(r.d_p)
                ));
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let rows_json: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "subject": r.subject_id,
                        "t_s": num(Some(r.t_s)),
                        "t_k": num(r.t_k),
                        "t_e": num(r.t_e),
                        "t_r": num(r.t_r),
                        "t_p": num(r.t_p),
                        "dt_kin": num(r.d_k),
                        "dt_semg": num(r.d_e),
                        "dt_rt": num(r.d_r),
                        "dt_ph": num(r.d_p),
                    })
                })
                .collect();
            let summary = if rows.is_empty() {
                Value::Null
            } else {
                let s = summary_stats(rows)?;
                json!({
                    "n_subjects": s.n_subjects,
                    "kinematics": method_json(&s.kinematics),
                    "semg": method_json(&s.semg),
                    "realtime": method_json(&s.realtime),
                    "posthoc": method_json(&s.posthoc),
                })
            };
            let doc = json!({ "rows": rows_json, "summary": summary });
            Ok(serde_json::to_string_pretty(&doc).expect("report serializes") + "\n")
        }
    }
}

pub fn write_report(rows: &[EvaluationRow], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(rows, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
