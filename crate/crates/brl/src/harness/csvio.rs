//! CSV files with an optional leading metadata comment line:
//! `# brl key=value key=value`, then a header row, then numeric rows
//! (empty fields allowed). Parse errors carry 1-based line numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsvDoc {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub fn write_csv(
    path: &Path,
    meta: &[(&str, &str)],
    header: &[&str],
    rows: &[Vec<Option<f64>>],
) -> Result<()> {
    let mut out = String::new();
    if !meta.is_empty() {
        out.push_str("# brl");
        for (k, v) in meta {
            let _ = write!(out, " {k}={v}");
        }
        out.push('\n');
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Some(v) => format!("{v}"),
                None => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn parse_csv(path: &Path) -> Result<CsvDoc> {
    let content = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut meta = BTreeMap::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim_start();
            let rest = rest.strip_prefix("brl").unwrap_or(rest);
            for pair in rest.split_whitespace() {
                if let Some((k, v)) = pair.split_once('=') {
                    meta.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        match &header {
            None => {
                header = Some(line.split(',').map(|s| s.trim().to_string()).collect());
            }
            Some(h) => {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() != h.len() {
                    return Err(Error::Parse {
                        path: name,
                        line: lineno,
                        what: format!("expected {} fields, found {}", h.len(), cells.len()),
                    });
                }
                let mut row = Vec::with_capacity(cells.len());
                for cell in cells {
                    let cell = cell.trim();
                    if cell.is_empty() {
                        row.push(None);
                    } else {
                        match cell.parse::<f64>() {
                            Ok(v) => row.push(Some(v)),
                            Err(_) => {
                                return Err(Error::Parse {
                                    path: name,
                                    line: lineno,
                                    what: format!("'{cell}' is not a number"),
                                })
                            }
                        }
                    }
                }
                rows.push(row);
            }
        }
    }
    let header = header.ok_or_else(|| Error::Parse {
        path: name.clone(),
        line: 1,
        what: "missing header row".to_string(),
    })?;
    Ok(CsvDoc { meta, header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_and_parses_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &[("env", "pointmass"), ("config_hash", "abc")],
            &["step", "loss"],
            &[
                vec![Some(1000.0), Some(0.5)],
                vec![Some(2000.0), None],
            ],
        )
        .unwrap();
        let doc = parse_csv(&path).unwrap();
        assert_eq!(doc.meta.get("env").unwrap(), "pointmass");
        assert_eq!(doc.header, vec!["step", "loss"]);
        assert_eq!(doc.rows[0], vec![Some(1000.0), Some(0.5)]);
        assert_eq!(doc.rows[1], vec![Some(2000.0), None]);
    }

    #[test]
    fn malformed_cell_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "step,loss\n1,0.5\n2,oops\n").unwrap();
        match parse_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_names_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "a,b\n1\n").unwrap();
        match parse_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
