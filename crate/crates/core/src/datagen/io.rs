//! Binary dataset files.
//!
//! Layout: the ASCII magic `CPSL`, a little-endian `u32` holding the element
//! width in bits (32 or 64), a little-endian `u64` element count, then the
//! elements themselves as little-endian IEEE-754 values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::sample::Sample;

pub const MAGIC: [u8; 4] = *b"CPSL";
pub const HEADER_LEN: usize = 16;

/// A dataset of either precision, as read from disk.
#[derive(Debug, Clone)]
pub enum Dataset {
    F32(Sample<f32>),
    F64(Sample<f64>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::F32(s) => s.len(),
            Dataset::F64(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn write_sample<T: Real, W: Write>(sample: &Sample<T>, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + sample.len() * T::BYTES);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&(T::BYTES as u32 * 8).to_le_bytes());
    buf.extend_from_slice(&(sample.len() as u64).to_le_bytes());
    for &v in sample.values() {
        v.write_le(&mut buf);
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(mut input: R) -> Result<Dataset> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header).map_err(|_| Error::Format("truncated header".into()))?;
    if header[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let bits = u32::from_le_bytes(header[4..8].try_into().unwrap());
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| Error::Format(format!("element count {n} too large")))?;
    match bits {
        32 => Ok(Dataset::F32(read_body(input, n)?)),
        64 => Ok(Dataset::F64(read_body(input, n)?)),
        other => Err(Error::Format(format!("unsupported precision flag {other}"))),
    }
}

fn read_body<T: Real, R: Read>(mut input: R, n: usize) -> Result<Sample<T>> {
    let len = n.checked_mul(T::BYTES).ok_or_else(|| Error::Format("element count overflows".into()))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != len {
        return Err(Error::Format(format!("expected {len} data bytes, found {}", body.len())));
    }
    Sample::new(body.chunks_exact(T::BYTES).map(T::read_le).collect::<Vec<T>>())
}

pub fn save<T: Real>(sample: &Sample<T>, path: impl AsRef<Path>) -> Result<()> {
    write_sample(sample, BufWriter::new(File::create(path)?))
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?))
}
