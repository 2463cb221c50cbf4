//! Numeric CSV output with round-trip-safe formatting.
//!
//! Comma separated, `.` decimal, LF line endings, 17 significant digits
//! so every f64 parses back bit-identically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Formats with 17 significant digits; parsing the result recovers the
/// exact same f64.
pub fn format_full_precision(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Writes one CSV row per slice; `header` adds a label line up front.
pub fn write_matrix_csv<'a, I>(
    path: &Path,
    rows: I,
    header: Option<&[String]>,
) -> std::io::Result<()>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = BufWriter::new(File::create(path)?);
    write_matrix(&mut out, rows, header)
}

/// Same as [`write_matrix_csv`] against any writer (stdout, buffers).
pub fn write_matrix<'a, W, I>(out: &mut W, rows: I, header: Option<&[String]>) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a [f64]>,
{
    if let Some(labels) = header {
        out.write_all(labels.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    let mut cell = String::new();
    for row in rows {
        for (i, &x) in row.iter().enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            cell.clear();
            cell.push_str(&format_full_precision(x));
            out.write_all(cell.as_bytes())?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
