//! JSON-lines files with a schema header.
//!
//! The first line of every file is `{"schema": <name>, "version": <n>}`; each
//! further non-blank line holds one record.

use std::io::{self, BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("bad header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

pub fn write_records<T: Serialize, W: Write>(
    mut w: W,
    schema: &str,
    records: &[T],
) -> io::Result<()> {
    let header = Header {
        schema: schema.to_string(),
        version: SCHEMA_VERSION,
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()
}

/// Reads every record, checking the header names `schema`. Line numbers in
/// errors are 1-based and count the header.
pub fn read_records<T: DeserializeOwned, R: BufRead>(
    r: R,
    schema: &str,
) -> Result<Vec<T>, JsonlError> {
    Ok(read_numbered(r, schema)?
        .into_iter()
        .map(|(_, rec)| rec)
        .collect())
}

/// Like [`read_records`], pairing each record with its line number.
pub fn read_numbered<T: DeserializeOwned, R: BufRead>(
    r: R,
    schema: &str,
) -> Result<Vec<(usize, T)>, JsonlError> {
    let mut lines = r.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(JsonlError::Header("empty file".into())),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let header: Header = serde_json::from_str(&header)
        .map_err(|e| JsonlError::Header(format!("not a header line: {e}")))?;
    if header.schema != schema {
        return Err(JsonlError::Header(format!(
            "expected schema `{schema}`, found `{}`",
            header.schema
        )));
    }
    if header.version != SCHEMA_VERSION {
        return Err(JsonlError::Header(format!(
            "unsupported version {}",
            header.version
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| JsonlError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}
