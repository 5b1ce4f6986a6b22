//! Dense matrix files: CSV and the `SPMX` little-endian binary format.
//!
//! `SPMX` layout: the magic bytes `SPMX`, then `u32` rows, `u32` columns and
//! a reserved `u32` (zero), all little-endian, followed by `rows * cols`
//! little-endian `f64` values in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const SPMX_MAGIC: [u8; 4] = *b"SPMX";
pub const SPMX_HEADER_LEN: usize = 16;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn dimension(value: usize) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::InvalidCount {
        count: value,
        expected: "a dimension that fits in 32 bits".into(),
    })
}

pub fn spmx_bytes(m: &DMatrix<f64>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(SPMX_HEADER_LEN + 8 * m.len());
    out.extend_from_slice(&SPMX_MAGIC);
    out.extend_from_slice(&dimension(m.nrows())?.to_le_bytes());
    out.extend_from_slice(&dimension(m.ncols())?.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
    Ok(out)
}

pub fn parse_spmx(bytes: &[u8]) -> Result<DMatrix<f64>> {
    let bad = |message: &str| Error::Parse {
        line: 0,
        message: message.to_string(),
    };
    if bytes.len() < SPMX_HEADER_LEN || bytes[..4] != SPMX_MAGIC {
        return Err(bad("missing SPMX header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (rows, cols) = (word(4), word(8));
    let payload = &bytes[SPMX_HEADER_LEN..];
    if payload.len() != rows * cols * 8 {
        return Err(bad(&format!(
            "payload holds {} bytes, header announces {rows} x {cols} values",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn save_spmx(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let bytes = spmx_bytes(m)?;
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&bytes))
        .map_err(|e| io_error(path, e))
}

pub fn load_spmx(path: &Path) -> Result<DMatrix<f64>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| io_error(path, e))?;
    parse_spmx(&bytes)
}

/// CSV text with an optional header row. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn csv_string(m: &DMatrix<f64>, header: Option<&[&str]>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse {
        line: 0,
        message: e.to_string(),
    };
    if let Some(h) = header {
        if h.len() != m.ncols() {
            return Err(Error::mismatch(m.ncols(), h.len()));
        }
        writer.write_record(h).map_err(csv_err)?;
    }
    for r in 0..m.nrows() {
        writer
            .write_record(m.row(r).iter().map(|x| format!("{x:?}")))
            .map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Parses numeric CSV. A first row that is not entirely numeric is taken as
/// the header.
pub fn parse_csv(text: &str) -> Result<(Option<Vec<String>>, DMatrix<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: format!("expected {} fields, found {}", first.len(), row.len()),
                        });
                    }
                }
                rows.push(row);
            }
            Err(_) if i == 0 => {
                header = Some(record.iter().map(str::to_string).collect());
            }
            Err(e) => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok((header, DMatrix::from_row_slice(rows.len(), cols, &flat)))
}

pub fn save_csv(path: &Path, m: &DMatrix<f64>, header: Option<&[&str]>) -> Result<()> {
    std::fs::write(path, csv_string(m, header)?).map_err(|e| io_error(path, e))
}

pub fn load_csv(path: &Path) -> Result<(Option<Vec<String>>, DMatrix<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_csv(&text)
}
