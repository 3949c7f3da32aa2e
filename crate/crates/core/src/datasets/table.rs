use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{DancoError, Result};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    /// Treat the first data line as a header when any of its cells is not a number.
    #[default]
    Detect,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TableOptions {
    pub header: HeaderMode,
}

/// A parsed table plus what was skipped on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTable {
    pub matrix: DataMatrix,
    pub header: Option<Vec<String>>,
    /// 1-based line numbers of blank or `#` comment lines that were skipped.
    pub skipped_lines: Vec<usize>,
}

fn split_cells(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Reads a comma- or whitespace-delimited numeric table, one point per row.
pub fn load_table(path: impl AsRef<Path>, options: &TableOptions) -> Result<LoadedTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DancoError::io(path, e))?;
    parse_table(&text, path, options)
}

/// [`load_table`] on in-memory text; `path` is only used in error messages.
pub fn parse_table(text: &str, path: &Path, options: &TableOptions) -> Result<LoadedTable> {
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    let mut header = None;
    let mut skipped_lines = Vec::new();
    let mut first_content = true;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            skipped_lines.push(line_no);
            continue;
        }
        let cells = split_cells(line);
        if first_content {
            first_content = false;
            let is_header = match options.header {
                HeaderMode::Present => true,
                HeaderMode::Absent => false,
                HeaderMode::Detect => cells.iter().any(|c| c.parse::<f64>().is_err()),
            };
            if is_header {
                header = Some(cells.iter().map(|c| c.to_string()).collect());
                continue;
            }
        }
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(DancoError::RaggedRow {
                path: PathBuf::from(path),
                line: line_no,
                expected,
                found: cells.len(),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| DancoError::NonNumeric {
                    path: PathBuf::from(path),
                    line: line_no,
                    column: c + 1,
                    value: cell.to_string(),
                })?;
            values.push(v);
        }
        rows += 1;
    }
    let Some(dim) = width else {
        return Err(DancoError::EmptyInput {
            path: PathBuf::from(path),
        });
    };
    Ok(LoadedTable {
        matrix: DataMatrix::new(values, rows, dim)?,
        header,
        skipped_lines,
    })
}

/// Comma-separated rendering with shortest round-trip floats.
pub fn render_table(matrix: &DataMatrix) -> String {
    let mut out = String::with_capacity(matrix.as_slice().len() * 12);
    for row in matrix.rows() {
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn write_table(matrix: &DataMatrix, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(render_table(matrix).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, header: HeaderMode) -> Result<LoadedTable> {
        parse_table(text, Path::new("mem.csv"), &TableOptions { header })
    }

    #[test]
    fn small_csv() {
        let t = parse("1,2\n3,4\n5,6\n", HeaderMode::Detect).unwrap();
        assert_eq!((t.matrix.n_points(), t.matrix.ambient_dim()), (3, 2));
        assert_eq!(t.matrix.row(2), &[5.0, 6.0]);
        assert!(t.header.is_none());
    }

    #[test]
    fn header_detection() {
        let t = parse("x,y\n1,2\n3,4\n5,6\n", HeaderMode::Detect).unwrap();
        assert_eq!(t.header, Some(vec!["x".to_string(), "y".to_string()]));
        assert_eq!(t.matrix.n_points(), 3);
        assert!(matches!(
            parse("x,y\n1,2\n", HeaderMode::Absent),
            Err(DancoError::NonNumeric { line: 1, column: 1, .. })
        ));
    }

    #[test]
    fn whitespace_and_comments() {
        let t = parse("# comment\n1 2 3\n\n4\t5 6\n7 8 9\n", HeaderMode::Detect).unwrap();
        assert_eq!(t.matrix.ambient_dim(), 3);
        assert_eq!(t.skipped_lines, vec![1, 3]);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            parse("1,2\n3\n", HeaderMode::Detect),
            Err(DancoError::RaggedRow { line: 2, expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            parse("1,2\n3,abc\n", HeaderMode::Detect),
            Err(DancoError::NonNumeric { line: 2, column: 2, .. })
        ));
        assert!(matches!(parse("\n# only comments\n", HeaderMode::Detect), Err(DancoError::EmptyInput { .. })));
        assert!(matches!(parse("1,nan\n", HeaderMode::Absent), Err(DancoError::NonNumeric { .. })));
    }

    #[test]
    fn render_round_trips() {
        let m = DataMatrix::new(vec![0.1, 1.0 / 3.0, -2.5e-12, 7.0, 1e300, -0.0], 3, 2).unwrap();
        let back = parse(&render_table(&m), HeaderMode::Detect).unwrap();
        assert_eq!(back.matrix, m);
    }
}
