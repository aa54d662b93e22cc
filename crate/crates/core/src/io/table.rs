use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Version of every CSV schema written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Header comment line identifying a schema.
pub fn schema_line(schema: &str) -> String {
    format!("# gnss-twin {schema} v{SCHEMA_VERSION}")
}

/// Temporary file in the directory of `path`, readable like a normally created file.
pub(crate) fn temp_beside(path: &Path) -> Result<tempfile::NamedTempFile> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut b = tempfile::Builder::new();
    b.prefix(".gnss-twin-");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        b.permissions(std::fs::Permissions::from_mode(0o644));
    }
    b.tempfile_in(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `contents` to `path` through a temporary file in the same directory
/// that is renamed into place once complete. On failure the temporary file is removed.
pub fn write_atomic<F>(path: &Path, contents: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> Result<()>,
{
    let mut tmp = temp_beside(path)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        contents(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes `rows` as CSV under a schema comment line, atomically.
pub fn write_csv<T: Serialize>(path: &Path, schema: &str, rows: &[T]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "{}", schema_line(schema)).map_err(|e| Error::io(path, e))?;
        let mut cw = csv::Writer::from_writer(w);
        for r in rows {
            cw.serialize(r)?;
        }
        cw.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    })
}

/// Row-at-a-time CSV writer that becomes visible at `path` only on [`CsvSink::finish`].
pub struct CsvSink {
    path: std::path::PathBuf,
    writer: csv::Writer<BufWriter<tempfile::NamedTempFile>>,
    rows: u64,
}

impl CsvSink {
    pub fn create(path: &Path, schema: &str) -> Result<Self> {
        let tmp = temp_beside(path)?;
        let mut w = BufWriter::new(tmp);
        writeln!(w, "{}", schema_line(schema)).map_err(|e| Error::io(path, e))?;
        Ok(CsvSink { path: path.to_path_buf(), writer: csv::Writer::from_writer(w), rows: 0 })
    }

    pub fn write<T: Serialize>(&mut self, row: &T) -> Result<()> {
        self.writer.serialize(row)?;
        self.rows += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<u64> {
        let path = self.path;
        let buf = self.writer.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        let tmp = buf.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(&path, e))?;
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        Ok(self.rows)
    }
}

/// Reads a CSV written by [`write_csv`], checking its schema line.
pub fn read_csv<T: DeserializeOwned>(path: &Path, schema: &str) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let expected = schema_line(schema);
    if first.trim_end() != expected {
        return Err(Error::Schema { path: path.to_path_buf(), expected, found: first.trim_end().to_string() });
    }
    let mut cr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for r in cr.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        a: f64,
        b: u8,
    }

    #[test]
    fn roundtrip_and_schema_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let rows = vec![Row { a: 1.5, b: 3 }, Row { a: -2.0, b: 4 }];
        write_csv(&p, "rows", &rows).unwrap();
        let back: Vec<Row> = read_csv(&p, "rows").unwrap();
        assert_eq!(back, rows);
        assert!(matches!(read_csv::<Row>(&p, "other"), Err(Error::Schema { .. })));
    }
}
