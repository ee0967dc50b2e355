//! EGF v1: the plain-text electrodogram file format.
//!
//! A UTF-8 header line
//!
//! ```text
//! EGF1 m=<M> csr=<CSR> side=<l|r|m> frames=<T>
//! ```
//!
//! followed by `T` lines of `M` comma-separated amplitudes, written in
//! scientific notation with 9 significant digits. Since a 9-digit decimal
//! parses to a unique f64 which formats back to the same 9 digits, a
//! read/write cycle over a file is byte-identical.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Electrodogram, Side};
use crate::{Error, Result};

fn parse_err(detail: impl Into<String>) -> Error {
    Error::Parse {
        what: "egf",
        detail: detail.into(),
    }
}

/// Serializes an electrodogram into EGF v1 text.
pub fn write_egf_to(egram: &Electrodogram, mut out: impl Write) -> Result<()> {
    let mut text = String::new();
    writeln!(
        text,
        "EGF1 m={} csr={} side={} frames={}",
        egram.channels(),
        egram.csr(),
        egram.side().code(),
        egram.frames()
    )
    .expect("string write");
    for t in 0..egram.frames() {
        for k in 0..egram.channels() {
            if k > 0 {
                text.push(',');
            }
            write!(text, "{:.8e}", egram.get(k, t)).expect("string write");
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Writes EGF v1 to a file path.
pub fn write_egf(path: impl AsRef<Path>, egram: &Electrodogram) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_egf_to(egram, std::io::BufWriter::new(file))
}

/// Parses an EGF v1 stream.
pub fn read_egf_from(reader: impl Read) -> Result<Electrodogram> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err("empty file"))??;
    let mut m = None;
    let mut csr = None;
    let mut side = None;
    let mut frames = None;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("EGF1") {
        return Err(parse_err("missing EGF1 magic"));
    }
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(format!("malformed header field '{field}'")))?;
        match key {
            "m" => m = Some(value.parse::<usize>().map_err(|e| parse_err(e.to_string()))?),
            "csr" => csr = Some(value.parse::<u32>().map_err(|e| parse_err(e.to_string()))?),
            "side" => {
                let c = value.chars().next().filter(|_| value.len() == 1);
                side = Some(
                    c.and_then(Side::from_code)
                        .ok_or_else(|| parse_err(format!("bad side '{value}'")))?,
                );
            }
            "frames" => {
                frames = Some(value.parse::<usize>().map_err(|e| parse_err(e.to_string()))?)
            }
            _ => return Err(parse_err(format!("unknown header key '{key}'"))),
        }
    }
    let (m, csr, side, t) = match (m, csr, side, frames) {
        (Some(m), Some(csr), Some(side), Some(t)) => (m, csr, side, t),
        _ => return Err(parse_err("header must carry m, csr, side, frames")),
    };

    let mut rows = vec![Vec::with_capacity(t); m];
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        count += 1;
        if count > t {
            return Err(parse_err(format!("more than {t} frame lines")));
        }
        let mut k = 0;
        for field in line.split(',') {
            if k >= m {
                return Err(parse_err(format!(
                    "frame {count}: more than {m} values"
                )));
            }
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
            rows[k].push(v);
            k += 1;
        }
        if k != m {
            return Err(parse_err(format!("frame {count}: {k} values, expected {m}")));
        }
    }
    if count != t {
        return Err(parse_err(format!("{count} frame lines, header said {t}")));
    }
    Electrodogram::from_rows(rows, csr, side)
}

/// Reads EGF v1 from a file path.
pub fn read_egf(path: impl AsRef<Path>) -> Result<Electrodogram> {
    let file = std::fs::File::open(path)?;
    read_egf_from(file)
}
