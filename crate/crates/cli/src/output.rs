//! CSV and JSON writers. Numbers use Rust's shortest round-trip formatting,
//! which is locale independent.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use copomo::scenario::SweepRow;
use copomo::PowerReport;

use crate::error::{CliError, CliResult};

pub const SWEEP_HEADER: [&str; 11] = [
    "axis",
    "axis_value",
    "context_label",
    "total_power_mw",
    "baseline_power_mw",
    "savings_fraction",
    "p1",
    "p2",
    "p3",
    "p4",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Doc,
}

impl Format {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "doc" => Ok(Format::Doc),
            other => Err(CliError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Opens the output path, or stdout.
pub fn open(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_doc<W: Write>(mut w: W, doc: &serde_json::Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut w, doc).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn report_fields(axis: &str, axis_value: f64, label: &str, report: &PowerReport) -> Vec<String> {
    let mut fields = vec![
        axis.to_string(),
        axis_value.to_string(),
        label.to_string(),
        report.total_power_mw.to_string(),
        report.baseline_total_power_mw.to_string(),
        report.savings_fraction.to_string(),
    ];
    fields.extend(report.stationary.p.iter().map(|p| p.to_string()));
    fields.push(String::new());
    fields
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> CliResult<()> {
    let mut out = csv_writer(w);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    out.write_record(SWEEP_HEADER).map_err(io)?;
    for row in rows {
        let record = match &row.outcome {
            Ok(report) => {
                report_fields(row.axis.name(), row.axis_value, &row.context_label, report)
            }
            Err(e) => {
                let mut f = vec![
                    row.axis.name().to_string(),
                    row.axis_value.to_string(),
                    row.context_label.clone(),
                ];
                f.extend(std::iter::repeat_n(String::new(), 7));
                f.push(e.to_string());
                f
            }
        };
        out.write_record(&record).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// Single evaluation in the sweep schema.
pub fn write_report_csv<W: Write>(
    w: W,
    a_ca: f64,
    label: &str,
    report: &PowerReport,
) -> CliResult<()> {
    let mut out = csv_writer(w);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    out.write_record(SWEEP_HEADER).map_err(io)?;
    out.write_record(report_fields("single", a_ca, label, report))
        .map_err(io)?;
    out.flush()?;
    Ok(())
}

pub fn write_records<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut out = csv_writer(w);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    out.write_record(header).map_err(io)?;
    for r in rows {
        out.write_record(r).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

/// Sidecar holding the resolved configuration of a CSV output.
pub fn provenance_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".provenance.json");
    PathBuf::from(name)
}
