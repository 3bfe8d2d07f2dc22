//! Small CSV tables for report files.

use std::io::Write;

use crate::error::{Error, Result};

pub(crate) fn write_table<W, I, R>(out: W, header: &[String], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let err = |e: csv::Error| Error::invalid(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv output: {e}")))
}
