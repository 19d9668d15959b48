use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::config::OutputFormat;
use crate::Result;

/// Column order of result files.
pub const RESULT_COLUMNS: [&str; 9] = [
    "snr_db",
    "method",
    "p_hat",
    "std_err",
    "ess",
    "n_samples",
    "zero_events",
    "wall_time_s",
    "seed",
];

/// Writes records as CSV with a header (also when empty) or as one JSON object per line.
///
/// Floats use the shortest representation that parses back to the same value.
pub fn write_records<T: Serialize, W: Write>(
    records: &[T],
    header: &[&str],
    format: OutputFormat,
    out: W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(header)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::JsonLines => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn write_records_to_path<T: Serialize>(
    records: &[T],
    header: &[&str],
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    let file = File::create(path)?;
    write_records(records, header, format, BufWriter::new(file))
}

/// Result rows to a writer.
pub fn emit_results<W: Write>(rows: &[super::ResultRow], format: OutputFormat, out: W) -> Result<()> {
    write_records(rows, &RESULT_COLUMNS, format, out)
}

pub fn emit_results_to_path(rows: &[super::ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    write_records_to_path(rows, &RESULT_COLUMNS, format, path)
}

/// Reads records back from CSV with a header row.
pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn parse_results_csv<R: Read>(input: R) -> Result<Vec<super::ResultRow>> {
    read_csv(input)
}

pub fn read_results_path(path: &Path) -> Result<Vec<super::ResultRow>> {
    parse_results_csv(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::super::{Method, ResultRow};
    use super::*;

    fn sample_rows() -> Vec<ResultRow> {
        vec![
            ResultRow {
                snr_db: 25.0,
                method: Method::IsScale,
                p_hat: 6.838_123_456_789_012e-16,
                std_err: 1.0 / 3.0 * 1e-16,
                ess: 12_345.678_9,
                n_samples: 500_000,
                zero_events: false,
                wall_time_s: 0.123,
                seed: u64::MAX,
            },
            ResultRow {
                snr_db: -2.5,
                method: Method::QmcHalton,
                p_hat: 0.0,
                std_err: 0.0,
                ess: 10.0,
                n_samples: 10,
                zero_events: true,
                wall_time_s: 1e-9,
                seed: 0,
            },
        ]
    }

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        emit_results(&[], OutputFormat::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "snr_db,method,p_hat,std_err,ess,n_samples,zero_events,wall_time_s,seed\n"
        );
    }

    #[test]
    fn one_row_two_lines() {
        let rows = &sample_rows()[..1];
        let mut buf = Vec::new();
        emit_results(rows, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("25.0,is-scale,"));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = sample_rows();
        let mut buf = Vec::new();
        emit_results(&rows, OutputFormat::Csv, &mut buf).unwrap();
        assert_eq!(parse_results_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn json_lines_round_trip() {
        let rows = sample_rows();
        let mut buf = Vec::new();
        emit_results(&rows, OutputFormat::JsonLines, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: Vec<ResultRow> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, rows);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_results_to_path(&sample_rows(), OutputFormat::Csv, Path::new("/nonexistent/dir/x.csv"))
            .unwrap_err();
        assert!(matches!(err, crate::Error::Io(_)));
    }
}
