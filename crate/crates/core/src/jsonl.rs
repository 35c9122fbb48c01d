//! Line-delimited JSON readers and writers shared by every stage.
//!
//! All dataset files use one JSON object per line, UTF-8, with a trailing
//! newline after the final record. Struct field order is preserved on write,
//! so identical inputs always produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Line {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

/// A malformed line, reported with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// Reads every line strictly; the first malformed line aborts with an error.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| JsonlError::Open {
        path: display.clone(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| JsonlError::Io {
            path: display.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| JsonlError::Line {
            path: display.clone(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Reads leniently: malformed lines are collected instead of aborting.
pub fn read_jsonl_lenient<T: DeserializeOwned>(
    reader: impl Read,
) -> Result<(Vec<T>, Vec<LineError>), std::io::Error> {
    let reader = BufReader::new(reader);
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(&line) {
            Ok(item) => records.push(item),
            Err(e) => errors.push(LineError {
                line: idx + 1,
                message: e.to_string(),
            }),
        }
    }
    Ok((records, errors))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), JsonlError> {
    let display = path.display().to_string();
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| JsonlError::Write {
            path: display.clone(),
            source,
        })?;
    }
    let file = File::create(path).map_err(|source| JsonlError::Write {
        path: display.clone(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| JsonlError::Write {
            path: display.clone(),
            source: std::io::Error::other(e),
        })?;
        writer
            .write_all(line.as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .map_err(|source| JsonlError::Write {
                path: display.clone(),
                source,
            })?;
    }
    writer.flush().map_err(|source| JsonlError::Write {
        path: display,
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        a: u32,
    }

    #[test]
    fn lenient_reader_reports_line_numbers() {
        let input = "{\"a\":1}\nnot json\n{\"a\":2}\n";
        let (rows, errs) = read_jsonl_lenient::<Row>(input.as_bytes()).unwrap();
        assert_eq!(rows, vec![Row { a: 1 }, Row { a: 2 }]);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, 2);
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.jsonl");
        let rows = vec![Row { a: 7 }, Row { a: 9 }];
        write_jsonl(&path, &rows).unwrap();
        let first = std::fs::read(&path).unwrap();
        write_jsonl(&path, &rows).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
        assert!(first.ends_with(b"\n"));
    }
}
