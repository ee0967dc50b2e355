//! DWT v1: the weight file format.
//!
//! A descriptive text manifest followed by raw little-endian 64-bit
//! floats:
//!
//! ```text
//! DWT1 params=<n> payload=<bytes>
//! <name> shape=<d0>x<d1>x... offset=<byte offset>
//! ...                                          (n manifest lines)
//! data
//! <raw little-endian f64 payload>
//! ```
//!
//! Values round-trip bit-exactly (the payload is the IEEE bit pattern).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::{Error, Result};

/// One named parameter tensor as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl WeightRecord {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::param(format!(
                "weight name '{name}' must be non-empty without whitespace"
            )));
        }
        let numel: usize = shape.iter().product();
        if shape.is_empty() || numel != values.len() {
            return Err(Error::shape(
                "weight record",
                format!("shape {shape:?} does not hold {} values", values.len()),
            ));
        }
        Ok(WeightRecord { name, shape, values })
    }
}

fn parse_err(detail: impl Into<String>) -> Error {
    Error::Parse {
        what: "dwt",
        detail: detail.into(),
    }
}

/// Serializes records in order; offsets are assigned contiguously.
pub fn write_dwt_to(records: &[WeightRecord], mut out: impl Write) -> Result<()> {
    let payload_bytes: usize = records.iter().map(|r| r.values.len() * 8).sum();
    let mut header = format!("DWT1 params={} payload={}\n", records.len(), payload_bytes);
    let mut offset = 0usize;
    for r in records {
        let dims: Vec<String> = r.shape.iter().map(ToString::to_string).collect();
        header.push_str(&format!(
            "{} shape={} offset={}\n",
            r.name,
            dims.join("x"),
            offset
        ));
        offset += r.values.len() * 8;
    }
    header.push_str("data\n");
    out.write_all(header.as_bytes())?;
    for r in records {
        for v in &r.values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Writes a DWT v1 file.
pub fn write_dwt(path: impl AsRef<Path>, records: &[WeightRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dwt_to(records, std::io::BufWriter::new(file))
}

/// Parses a DWT v1 stream.
pub fn read_dwt_from(reader: impl Read) -> Result<Vec<WeightRecord>> {
    let mut reader = BufReader::new(reader);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("DWT1") {
        return Err(parse_err("missing DWT1 magic"));
    }
    let mut params = None;
    let mut payload = None;
    for field in fields {
        match field.split_once('=') {
            Some(("params", v)) => {
                params = Some(v.parse::<usize>().map_err(|e| parse_err(e.to_string()))?)
            }
            Some(("payload", v)) => {
                payload = Some(v.parse::<usize>().map_err(|e| parse_err(e.to_string()))?)
            }
            _ => return Err(parse_err(format!("malformed header field '{field}'"))),
        }
    }
    let (params, payload) = match (params, payload) {
        (Some(p), Some(b)) => (p, b),
        _ => return Err(parse_err("header must carry params and payload")),
    };

    struct Entry {
        name: String,
        shape: Vec<usize>,
        offset: usize,
    }
    let mut entries = Vec::with_capacity(params);
    for i in 0..params {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 {
            return Err(parse_err(format!("manifest truncated at entry {i}")));
        }
        let mut fields = line.split_whitespace();
        let name = fields
            .next()
            .ok_or_else(|| parse_err(format!("entry {i}: missing name")))?
            .to_string();
        let mut shape = None;
        let mut offset = None;
        for field in fields {
            match field.split_once('=') {
                Some(("shape", v)) => {
                    let dims: std::result::Result<Vec<usize>, _> =
                        v.split('x').map(str::parse).collect();
                    shape = Some(dims.map_err(|e| parse_err(format!("entry {i}: {e}")))?);
                }
                Some(("offset", v)) => {
                    offset =
                        Some(v.parse::<usize>().map_err(|e| parse_err(format!("entry {i}: {e}")))?)
                }
                _ => return Err(parse_err(format!("entry {i}: malformed field '{field}'"))),
            }
        }
        let (shape, offset) = match (shape, offset) {
            (Some(s), Some(o)) => (s, o),
            _ => return Err(parse_err(format!("entry {i}: shape and offset required"))),
        };
        entries.push(Entry { name, shape, offset });
    }

    let mut data_line = String::new();
    reader.read_line(&mut data_line)?;
    if data_line.trim_end() != "data" {
        return Err(parse_err("missing 'data' separator line"));
    }

    let mut raw = vec![0u8; payload];
    reader.read_exact(&mut raw)?;

    let mut records = Vec::with_capacity(entries.len());
    for e in entries {
        let numel: usize = e.shape.iter().product();
        let end = e.offset + numel * 8;
        if end > raw.len() {
            return Err(parse_err(format!(
                "'{}' spans bytes {}..{end} beyond payload of {}",
                e.name,
                e.offset,
                raw.len()
            )));
        }
        let values: Vec<f64> = raw[e.offset..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        records.push(WeightRecord {
            name: e.name,
            shape: e.shape,
            values,
        });
    }
    Ok(records)
}

/// Reads a DWT v1 file.
pub fn read_dwt(path: impl AsRef<Path>) -> Result<Vec<WeightRecord>> {
    let file = std::fs::File::open(path)?;
    read_dwt_from(file)
}
