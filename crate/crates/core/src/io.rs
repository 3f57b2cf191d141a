//! IVF1 binary volume files.
//!
//! Layout: bytes 0–3 magic `IVF1`; byte 4 dtype flag (0 = f32, 1 = f64);
//! bytes 5–7 reserved zero; three little-endian `u32` for S, H, W; then S·H·W
//! little-endian scalars in slice-major order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume};

pub const MAGIC: &[u8; 4] = b"IVF1";
const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    fn flag(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

pub fn encode(v: &Volume, dtype: Dtype) -> Result<Vec<u8>> {
    let d = v.dims();
    let to_u32 = |n: usize| u32::try_from(n).map_err(|_| Error::Format(format!("dimension {n} exceeds u32")));
    let mut out = Vec::with_capacity(HEADER_LEN + v.len() * dtype.width());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[dtype.flag(), 0, 0, 0]);
    for n in [d.slices, d.height, d.width] {
        out.extend_from_slice(&to_u32(n)?.to_le_bytes());
    }
    match dtype {
        Dtype::F32 => v.data().iter().for_each(|&x| out.extend_from_slice(&(x as f32).to_le_bytes())),
        Dtype::F64 => v.data().iter().for_each(|&x| out.extend_from_slice(&x.to_le_bytes())),
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Volume> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    let dtype = match bytes[4] {
        0 => Dtype::F32,
        1 => Dtype::F64,
        f => return Err(Error::Format(format!("unknown dtype flag {f}"))),
    };
    if bytes[5..8] != [0, 0, 0] {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let dims = Dims::new(dim(0), dim(1), dim(2));
    let count = dims
        .slices
        .checked_mul(dims.height)
        .and_then(|n| n.checked_mul(dims.width))
        .filter(|n| n.checked_mul(dtype.width()).is_some())
        .ok_or_else(|| Error::Format(format!("dimensions {dims} overflow")))?;
    if count == 0 {
        return Err(Error::Format(format!("zero dimension in {dims}")));
    }
    let payload = &bytes[HEADER_LEN..];
    let found = payload.len() / dtype.width();
    if found < count {
        return Err(Error::Truncated { expected: count, found });
    }
    if payload.len() != count * dtype.width() {
        return Err(Error::Format(format!("{} trailing bytes", payload.len() - count * dtype.width())));
    }
    let data: Vec<f64> = match dtype {
        Dtype::F32 => payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect(),
        Dtype::F64 => payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect(),
    };
    Volume::from_vec(dims, data)
}

pub fn write_volume_as(v: &Volume, path: impl AsRef<Path>, dtype: Dtype) -> Result<()> {
    let bytes = encode(v, dtype)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Writes `v` as f64 IVF1.
pub fn write_volume(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    write_volume_as(v, path, Dtype::F64)
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
