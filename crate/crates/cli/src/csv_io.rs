//! CSV in and out of [`Dataset`].

use std::io::{Read, Write};
use std::path::Path;

use causalfair_core::{ColumnSpec, Dataset, DatasetBuilder};

use crate::error::{Error, Result};

/// `;` when the header line has semicolons but no commas (UCI student
/// data), `,` otherwise.
pub fn sniff_delimiter(first_line: &str) -> u8 {
    if first_line.contains(';') && !first_line.contains(',') {
        b';'
    } else {
        b','
    }
}

/// Reads a headered CSV, keeping only the declared columns. Rows with an
/// empty cell or `missing` token in a declared column are dropped.
pub fn read_csv<R: Read>(
    mut reader: R,
    specs: Vec<ColumnSpec>,
    missing: Option<&str>,
) -> std::result::Result<Dataset, ReadError> {
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(|e| ReadError::Csv(e.into()))?;
    let delim = sniff_delimiter(text.lines().next().unwrap_or(""));
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delim)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut b = DatasetBuilder::new(specs)?.with_header(&header)?;
    if let Some(m) = missing {
        b = b.missing_token(m);
    }
    for rec in rdr.records() {
        let rec = rec?;
        b.push_record(&rec.iter().collect::<Vec<_>>())?;
    }
    Ok(b.finish()?)
}

#[derive(Debug)]
pub enum ReadError {
    Csv(csv::Error),
    Core(causalfair_core::Error),
}

impl From<csv::Error> for ReadError {
    fn from(e: csv::Error) -> Self {
        ReadError::Csv(e)
    }
}

impl From<causalfair_core::Error> for ReadError {
    fn from(e: causalfair_core::Error) -> Self {
        ReadError::Core(e)
    }
}

pub fn load_csv(path: &Path, specs: Vec<ColumnSpec>, missing: Option<&str>) -> Result<Dataset> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(format!("cannot open {}", path.display()), e))?;
    read_csv(f, specs, missing).map_err(|e| match e {
        ReadError::Csv(source) => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        ReadError::Core(e) => Error::Core(e),
    })
}

/// Header names of a CSV file.
pub fn csv_header(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    let first = text.lines().next().unwrap_or("");
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(first))
        .trim(csv::Trim::All)
        .from_reader(first.as_bytes());
    let h = rdr.headers().map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(h.iter().map(str::to_string).collect())
}

pub fn write_csv<W: Write>(d: &Dataset, w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(d.columns().iter().map(|c| c.name()))?;
    let ncol = d.columns().len();
    for row in 0..d.n_rows() {
        wtr.write_record((0..ncol).map(|c| d.cell(row, c)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(d: &Dataset, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(format!("cannot create {}", path.display()), e))?;
    write_csv(d, std::io::BufWriter::new(f)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "a,b,extra\n x ,1,q\ny,2,r\n?,3,s\nx,,t\n";
        let specs = vec![ColumnSpec::categorical("a"), ColumnSpec::integer("b")];
        let d = read_csv(text.as_bytes(), specs.clone(), Some("?")).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.dropped_rows(), 2);
        let mut out = Vec::new();
        write_csv(&d, &mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "a,b\nx,1\ny,2\n");
        let again = read_csv(&out[..], specs, None).unwrap();
        assert_eq!(again.digest(), d.digest());
    }

    #[test]
    fn semicolon_files_are_read() {
        let text = "\"sex\";\"failures\"\n\"F\";0\n\"M\";1\n";
        let d = read_csv(text.as_bytes(), vec![ColumnSpec::categorical("sex")], None).unwrap();
        assert_eq!(d.column("sex").unwrap().states(), ["F", "M"]);
    }

    #[test]
    fn missing_declared_column_is_reported() {
        let r = read_csv("a\n1\n".as_bytes(), vec![ColumnSpec::categorical("b")], None);
        assert!(matches!(r, Err(ReadError::Core(_))));
    }
}
