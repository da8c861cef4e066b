//! CSV, JSON and checksum helpers for run artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// RFC 4180 text (CRLF line breaks, header row). Reals use the shortest
/// representation that round-trips.
pub fn csv_string(headers: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    let mut out = String::new();
    let header: Vec<String> = headers.iter().map(|h| quote(h)).collect();
    out.push_str(&header.join(","));
    out.push_str("\r\n");
    for (i, row) in rows.iter().enumerate() {
        if row.len() != headers.len() {
            return Err(Error::InvalidInput(format!(
                "CSV row {i} has {} fields, header has {}",
                row.len(),
                headers.len()
            )));
        }
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            match cell {
                Cell::Real(v) => {
                    let _ = write!(out, "{v:?}");
                }
                Cell::Int(v) => {
                    let _ = write!(out, "{v}");
                }
                Cell::Text(t) => out.push_str(&quote(t)),
            }
        }
        out.push_str("\r\n");
    }
    Ok(out)
}

/// Parses RFC 4180 text into a header and rows of raw fields.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut records: Vec<Vec<String>> = Vec::new();
    let mut record = Vec::new();
    let mut field = String::new();
    let mut chars = text.chars().peekable();
    let mut quoted = false;
    let mut touched = false;
    while let Some(c) = chars.next() {
        if quoted {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => quoted = false,
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' if field.is_empty() => {
                quoted = true;
                touched = true;
            }
            ',' => {
                record.push(std::mem::take(&mut field));
                touched = true;
            }
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' | '\r' => {
                if touched || !field.is_empty() {
                    record.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut record));
                }
                touched = false;
            }
            _ => {
                field.push(c);
                touched = true;
            }
        }
    }
    if quoted {
        return Err(Error::InvalidInput("unterminated quoted CSV field".into()));
    }
    if touched || !field.is_empty() {
        record.push(field);
        records.push(record);
    }
    let mut iter = records.into_iter();
    let header = iter
        .next()
        .ok_or_else(|| Error::InvalidInput("CSV input is empty".into()))?;
    let rows: Vec<Vec<String>> = iter.collect();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "CSV row {} has {} fields, header has {}",
                i + 2,
                row.len(),
                header.len()
            )));
        }
    }
    Ok((header, rows))
}

/// Numeric column `name` of parsed CSV data.
pub fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Result<Vec<f64>> {
    let idx = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidInput(format!("CSV has no column {name:?}")))?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            r[idx].trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!(
                    "CSV row {} column {name:?}: not a number: {:?}",
                    i + 2,
                    r[idx]
                ))
            })
        })
        .collect()
}

/// Pretty JSON of a value that serialises to an object.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    if !v.is_object() {
        return Err(Error::InvalidInput("JSON output must be an object".into()));
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
