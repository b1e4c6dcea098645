//! CSV emission and parse-back of sweep reports.

use std::io::Write;
use std::path::Path;

use super::{ExperimentReport, ReportRow, RowStatus, RNG_DESCRIPTION};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 12] = [
    "topology",
    "wss_loss_db",
    "source_node",
    "strategy",
    "mean_min_rate",
    "mean_min_rate_normalized",
    "mean_jain",
    "runs",
    "seed",
    "status",
    "sd_min_rate",
    "sd_jain",
];

/// Nine significant digits, fixed notation for decimal exponents in
/// `[-5, 9)` and scientific otherwise; trailing zeros dropped. NaN becomes
/// an empty field.
pub fn format_float(v: f64) -> String {
    format_significant(v, 9)
}

/// [`format_float`] with `digits` significant digits (at least 1).
pub fn format_significant(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v.is_nan() {
        return String::new();
    }
    if v == 0.0 || v.is_infinite() {
        return format!("{v}");
    }
    let sci = format!("{v:.*e}", digits - 1);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        trim_zeros(format!("{v:.*}", (digits as i32 - 1 - exp) as usize))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn record(row: &ReportRow) -> [String; 12] {
    [
        row.topology.clone(),
        format_float(row.wss_loss_db),
        row.source_node.clone(),
        row.strategy.to_string(),
        format_float(row.mean_min_rate),
        format_float(row.mean_min_rate_normalized),
        format_float(row.mean_jain),
        row.runs.to_string(),
        row.seed.to_string(),
        row.status.as_str().to_string(),
        format_float(row.sd_min_rate),
        format_float(row.sd_jain),
    ]
}

/// Writes the report to any sink: one `#` comment line naming the random
/// generator, the header, then one record per row.
pub fn write_csv(report: &ExperimentReport, sink: impl Write) -> std::result::Result<(), csv::Error> {
    let mut sink = sink;
    write!(sink, "# {RNG_DESCRIPTION}\r\n")?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(sink);
    writer.write_record(CSV_COLUMNS)?;
    for row in &report.rows {
        writer.write_record(record(row))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn emit_csv(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(report, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.into(),
        source,
    })
}

fn parse_float(field: &str) -> std::result::Result<f64, String> {
    if field.is_empty() {
        return Ok(f64::NAN);
    }
    field.parse().map_err(|_| format!("`{field}` is not a number"))
}

/// Parses a file written by [`emit_csv`] back into rows.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.into(),
        source,
    };
    let format_err = |message: String| Error::Format {
        path: path.into(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(format_err(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let f = |i: usize| parse_float(&rec[i]).map_err(format_err);
        let int = |i: usize| rec[i].parse::<u64>().map_err(|_| format_err(format!("`{}` is not an integer", &rec[i])));
        rows.push(ReportRow {
            topology: rec[0].to_string(),
            wss_loss_db: f(1)?,
            source_node: rec[2].to_string(),
            strategy: rec[3].parse()?,
            mean_min_rate: f(4)?,
            mean_min_rate_normalized: f(5)?,
            mean_jain: f(6)?,
            runs: int(7)? as usize,
            seed: int(8)?,
            status: RowStatus::parse(&rec[9]).ok_or_else(|| format_err(format!("unknown status `{}`", &rec[9])))?,
            sd_min_rate: f(10)?,
            sd_jain: f(11)?,
        });
    }
    Ok(rows)
}
