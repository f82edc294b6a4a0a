//! Two-column CSV files with a header row: `t,f` for signals and
//! `t,theta` for phases.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

/// Reads two numeric columns. Line numbers in errors count the header as 1.
fn read_two_columns(reader: impl Read) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(1, e.to_string()))?
        .clone();
    if headers.len() != 2 {
        return Err(parse_error(1, format!("expected 2 header columns, found {}", headers.len())));
    }
    if headers.iter().any(|h| h.parse::<f64>().is_ok()) {
        return Err(parse_error(1, "missing header row"));
    }
    let (mut first, mut second) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        for (i, cell) in record.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| parse_error(line, format!("not a number: {cell:?}")))?;
            if i == 0 { first.push(x) } else { second.push(x) }
        }
    }
    Ok((first, second))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_signal_csv(path: impl AsRef<Path>) -> Result<Signal> {
    let (t, f) = read_two_columns(open(path.as_ref())?)?;
    Signal::new(t, f)
}

/// Returns the `(t, theta)` columns. Times are not checked here; pair the
/// result with a signal through `validate_phase`.
pub fn load_phase_csv(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<f64>)> {
    read_two_columns(open(path.as_ref())?)
}

/// Writes equal-length columns under `headers` using shortest round-trip
/// float formatting.
pub fn write_columns_csv(path: impl AsRef<Path>, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(headers).map_err(io)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| c[i].to_string())).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(e.to_string()))?
        .flush()?;
    Ok(())
}

pub fn write_signal_csv(path: impl AsRef<Path>, signal: &Signal) -> Result<()> {
    write_columns_csv(path, &["t", "f"], &[signal.times(), signal.values()])
}

pub fn write_phase_csv(path: impl AsRef<Path>, times: &[f64], phases: &[f64]) -> Result<()> {
    write_columns_csv(path, &["t", "theta"], &[times, phases])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(rows: usize) -> String {
        let mut s = String::from("t,f\n");
        for i in 0..rows {
            s.push_str(&format!("{},{}\n", i, (i as f64).sin()));
        }
        s
    }

    #[test]
    fn reads_signal() {
        let (t, f) = read_two_columns(body(20).as_bytes()).unwrap();
        assert_eq!(t.len(), 20);
        assert_eq!(f[3], 3f64.sin());
    }

    #[test]
    fn crlf_accepted() {
        let text = body(20).replace('\n', "\r\n");
        assert_eq!(read_two_columns(text.as_bytes()).unwrap().0.len(), 20);
    }

    #[test]
    fn bad_cell_reports_line() {
        // header is line 1, so row index 15 sits on line 17
        let text = body(20).replace("15,", "oops,");
        match read_two_columns(text.as_bytes()) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 17),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_parse_error() {
        let text = body(5) + "1,2,3\n";
        assert!(matches!(
            read_two_columns(text.as_bytes()),
            Err(Error::ParseError { line: 7, .. })
        ));
    }

    #[test]
    fn missing_header() {
        assert!(matches!(
            read_two_columns("0,1\n1,2\n".as_bytes()),
            Err(Error::ParseError { line: 1, .. })
        ));
    }
}
