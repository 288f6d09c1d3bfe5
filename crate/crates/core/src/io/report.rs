//! Report files: JSON lines or CSV, one measure value per record.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hin::{Hin, VertexId};
use crate::io::network::LoadedNetwork;
use crate::netdiv::{DiversityReport, Start};

/// A [`DiversityReport`] with every identifier replaced by its name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub kind: String,
    pub metapath: String,
    pub alpha: String,
    pub conditioning: Option<String>,
    pub start: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_metapath: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_start: Option<String>,
    pub value: f64,
    pub sink_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    JsonLines,
    Csv,
}

/// Describes a start distribution: `uniform`, `uniform:a;b` or `dist:a=0.5;b=0.5`.
pub fn describe_start(start: &Start, net: &LoadedNetwork, ty: crate::hin::VertexTypeId) -> String {
    let name = |i: u32| net.vertex_name(VertexId::new(ty, i)).to_string();
    match start {
        Start::Uniform => "uniform".into(),
        Start::UniformSubset(indices) => {
            let names: Vec<String> = indices.iter().map(|&i| name(i)).collect();
            format!("uniform:{}", names.join(";"))
        }
        Start::Explicit(d) => {
            let parts: Vec<String> = d
                .nonzero()
                .map(|(i, w)| format!("{}={}", name(i), round_significant(w, 12)))
                .collect();
            format!("dist:{}", parts.join(";"))
        }
    }
}

/// Rounds to `digits` significant decimal digits; the shortest round-trip rendering of the
/// result is then stable across platforms.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Formats `x` with 12 significant digits in its shortest round-trip form.
pub fn format_value(x: f64) -> String {
    format!("{}", round_significant(x, 12))
}

impl ReportRecord {
    /// Names every identifier of `report`. Values are rounded to 12 significant digits.
    pub fn from_report(report: &DiversityReport, net: &LoadedNetwork) -> Self {
        let hin: &Hin = &net.hin;
        let (baseline_metapath, baseline_start) = match &report.baseline {
            Some((path, start)) => (
                Some(path.to_expr(hin)),
                Some(describe_start(start, net, path.source())),
            ),
            None => (None, None),
        };
        ReportRecord {
            kind: report.kind.to_string(),
            metapath: report.metapath.to_expr(hin),
            alpha: report.alpha.to_string(),
            conditioning: report.conditioning.map(|v| net.vertex_name(v).to_string()),
            start: report
                .start
                .as_ref()
                .map(|s| describe_start(s, net, report.metapath.source())),
            baseline_metapath,
            baseline_start,
            value: round_significant(report.value, 12),
            sink_mass: round_significant(report.sink_mass, 12),
        }
    }
}

/// Writes `records` to `out`. CSV output always has a header, even with no records.
pub fn write_records<W: Write>(out: W, records: &[ReportRecord], format: ReportFormat) -> std::io::Result<()> {
    match format {
        ReportFormat::JsonLines => {
            let mut out = BufWriter::new(out);
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            let header = [
                "kind",
                "metapath",
                "alpha",
                "conditioning",
                "start",
                "baseline_metapath",
                "baseline_start",
                "value",
                "sink_mass",
            ];
            w.write_record(header)?;
            for r in records {
                let opt = |o: &Option<String>| o.clone().unwrap_or_default();
                w.write_record([
                    r.kind.clone(),
                    r.metapath.clone(),
                    r.alpha.clone(),
                    opt(&r.conditioning),
                    opt(&r.start),
                    opt(&r.baseline_metapath),
                    opt(&r.baseline_start),
                    r.value.to_string(),
                    r.sink_mass.to_string(),
                ])?;
            }
            w.flush()
        }
    }
}

pub fn write_reports(records: &[ReportRecord], path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(file, records, format).map_err(|e| Error::io(path, e))
}

/// Reads a report file in either format, telling them apart by the first line.
pub fn read_reports(path: &Path) -> Result<Vec<ReportRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: u64, message: String| Error::Parse {
        context: path.display().to_string(),
        line,
        message,
    };
    if first.trim_start().starts_with('{') || first.trim().is_empty() {
        let mut records = Vec::new();
        let mut text = first;
        let mut line = 1u64;
        loop {
            if !text.trim().is_empty() {
                records.push(serde_json::from_str(&text).map_err(|e| parse_err(line, e.to_string()))?);
            }
            text.clear();
            if reader.read_line(&mut text).map_err(|e| Error::io(path, e))? == 0 {
                break;
            }
            line += 1;
        }
        return Ok(records);
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut csv_reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = csv_reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &str| col(name).ok_or_else(|| parse_err(1, format!("missing column `{name}`")));
    let (kind, metapath, alpha, value, sink_mass) = (
        required("kind")?,
        required("metapath")?,
        required("alpha")?,
        required("value")?,
        required("sink_mass")?,
    );
    let optional = ["conditioning", "start", "baseline_metapath", "baseline_start"].map(col);
    let mut records = Vec::new();
    for rec in csv_reader.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let number = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("`{}`: {e}", &rec[i])))
        };
        let opt = |i: Option<usize>| i.map(|i| rec[i].to_string()).filter(|s| !s.is_empty());
        records.push(ReportRecord {
            kind: rec[kind].to_string(),
            metapath: rec[metapath].to_string(),
            alpha: rec[alpha].to_string(),
            conditioning: opt(optional[0]),
            start: opt(optional[1]),
            baseline_metapath: opt(optional[2]),
            baseline_start: opt(optional[3]),
            value: number(value)?,
            sink_mass: number(sink_mass)?,
        });
    }
    Ok(records)
}
