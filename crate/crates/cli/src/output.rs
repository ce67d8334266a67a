use std::path::Path;

use monoweight::report::VerificationReport;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// One emitted report.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub id: String,
    pub pass: bool,
    pub report: VerificationReport,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstMargin {
    pub id: String,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub failed_ids: Vec<String>,
    /// Five smallest margins, ascending.
    pub worst_margins: Vec<WorstMargin>,
    pub config: RunConfig,
}

impl Summary {
    pub fn of(records: &[Record], config: &RunConfig) -> Self {
        let failed_ids: Vec<String> = records.iter().filter(|r| !r.pass).map(|r| r.id.clone()).collect();
        let mut worst: Vec<WorstMargin> =
            records.iter().map(|r| WorstMargin { id: r.id.clone(), margin: r.report.margin }).collect();
        worst.sort_by(|x, y| x.margin.total_cmp(&y.margin).then_with(|| x.id.cmp(&y.id)));
        worst.truncate(5);
        Summary {
            command: config.command.clone(),
            total: records.len(),
            passed: records.len() - failed_ids.len(),
            failed: failed_ids.len(),
            failed_ids,
            worst_margins: worst,
            config: config.clone(),
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

/// JSON lines, one record per line.
pub fn records_jsonl(records: &[Record]) -> String {
    records.iter().map(|r| to_json(r) + "\n").collect()
}

/// CSV with a fixed header; `meta` and `config` are embedded as JSON.
pub fn records_csv(records: &[Record]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "inequality", "lhs", "rhs", "constant", "margin", "pass", "meta", "config"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    for r in records {
        let rep = &r.report;
        w.write_record([
            r.id.clone(),
            rep.inequality.clone(),
            to_json(&rep.lhs),
            to_json(&rep.rhs),
            to_json(&rep.constant),
            to_json(&rep.margin),
            r.pass.to_string(),
            to_json(&rep.meta),
            to_json(&r.config),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes reports and summary under `config.out`, or prints them. Returns
/// the summary.
pub fn emit(records: &[Record], config: &RunConfig) -> Result<Summary, CliError> {
    if records.is_empty() {
        return Err(CliError::Usage("nothing to report: empty corpus".into()));
    }
    let summary = Summary::of(records, config);
    let body = match config.format {
        Format::Json => records_jsonl(records),
        Format::Csv => records_csv(records)?,
    };
    let summary_text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    match &config.out {
        Some(dir) => {
            let dir = Path::new(dir);
            let name = match config.format {
                Format::Json => "reports.jsonl",
                Format::Csv => "reports.csv",
            };
            write_file(dir, name, &body)?;
            write_file(dir, "summary.json", &summary_text)?;
        }
        None => print!("{body}"),
    }
    print!("{summary_text}");
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Flags, RunConfig};

    fn record(id: &str, margin: f64) -> Record {
        let config = RunConfig::resolve("verify-isop", &Flags { a: Some(vec![1.0]), ..Default::default() }, 0.0).unwrap();
        Record {
            id: id.into(),
            pass: margin >= 0.0,
            report: VerificationReport::new("isoperimetric", 1.0, 2.0, 3.0, margin, margin >= 0.0),
            config,
        }
    }

    #[test]
    fn one_report_csv_has_header_and_row() {
        let text = records_csv(&[record("a", 0.5)]).unwrap();
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rdr.headers().unwrap().len(), 9);
        assert_eq!(rdr.records().count(), 1);
    }

    #[test]
    fn summary_lists_failures_and_worst_margins() {
        let recs = vec![record("a", 0.5), record("b", -0.1), record("c", 0.2)];
        let s = Summary::of(&recs, &recs[0].config);
        assert_eq!((s.total, s.passed, s.failed), (3, 2, 1));
        assert_eq!(s.failed_ids, vec!["b"]);
        assert_eq!(s.worst_margins[0].id, "b");
        assert_eq!(s.worst_margins[1].id, "c");
    }

    #[test]
    fn jsonl_embeds_config() {
        let line = records_jsonl(&[record("a", 0.5)]);
        assert_eq!(line.lines().count(), 1);
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["config"]["command"], "verify-isop");
    }
}
