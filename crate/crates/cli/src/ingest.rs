//! CSV input: rows are observations, columns are variables.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use bandcov::DataMatrix;

use crate::error::{CliError, CliResult};

/// Reads a numeric table from `path`; `-` reads standard input.
pub fn ingest_csv(path: &Path, has_header: bool) -> CliResult<DataMatrix> {
    if path.as_os_str().is_empty() {
        return Err(CliError::Usage("input path is empty".into()));
    }
    if path == Path::new("-") {
        return ingest_reader(std::io::stdin().lock(), has_header);
    }
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, has_header)
}

pub fn ingest_reader<R: Read>(reader: R, has_header: bool) -> CliResult<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut p = None;
    let mut n = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let row = n + 1;
        let line = record.position().map_or(0, |pos| pos.line());
        let width = *p.get_or_insert(record.len());
        if record.len() != width {
            return Err(CliError::Data(format!(
                "row {row} (line {line}) has {} fields, expected {width}",
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(CliError::Data(format!(
                    "missing value at row {row} (line {line}), column {}",
                    j + 1
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "non-numeric value `{cell}` at row {row} (line {line}), column {}",
                    j + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "non-finite value `{cell}` at row {row} (line {line}), column {}",
                    j + 1
                )));
            }
            values.push(v);
        }
        n += 1;
    }
    if n < DataMatrix::MIN_OBSERVATIONS {
        return Err(CliError::Data(format!(
            "n < {}: the input has {n} observation rows",
            DataMatrix::MIN_OBSERVATIONS
        )));
    }
    Ok(DataMatrix::from_row_major(n, p.unwrap_or(0), values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, header: bool) -> CliResult<DataMatrix> {
        ingest_reader(text.as_bytes(), header)
    }

    #[test]
    fn plain_and_header() {
        let a = read("1,0\n0,1\n1,1\n0,0\n", false).unwrap();
        assert_eq!((a.n(), a.p()), (4, 2));
        assert_eq!(a.row(2), &[1.0, 1.0]);
        let b = read("x,y\n1,0\n0,1\n1,1\n0,0", true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_rows() {
        let e = read("1,0\n0,1\n1,1\n", false).unwrap_err();
        assert!(matches!(&e, CliError::Data(m) if m.contains("n < 4")), "{e}");
        // header counted out
        assert!(read("a,b\n1,0\n0,1\n1,1\n", true).is_err());
    }

    #[test]
    fn ragged_missing_and_text() {
        let e = read("1,0\n0,1,2\n1,1\n0,0\n", false).unwrap_err();
        assert!(matches!(&e, CliError::Data(m) if m.contains("row 2")), "{e}");
        let e = read("1,0\n0,\n1,1\n0,0\n", false).unwrap_err();
        assert!(matches!(&e, CliError::Data(m) if m.contains("missing") && m.contains("column 2")), "{e}");
        let e = read("1,0\n0,1\n1,abc\n0,0\n", false).unwrap_err();
        assert!(matches!(&e, CliError::Data(m) if m.contains("row 3") && m.contains("column 2")), "{e}");
        let e = read("1,0\n0,1\n1,NaN\n0,0\n", false).unwrap_err();
        assert!(matches!(e, CliError::Data(_)));
    }

    #[test]
    fn whitespace_and_exponents() {
        let m = read(" 1.5e0 , -2\n0,1\n1,1\n0,0\n", false).unwrap();
        assert_eq!(m.row(0), &[1.5, -2.0]);
    }
}
