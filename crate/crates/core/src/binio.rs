//! Little-endian primitives shared by the binary artifact formats.

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

/// Upper bound on any single length prefix, guards against corrupt headers.
const MAX_LEN: u64 = 1 << 32;

pub fn write_magic<W: Write>(w: &mut W, magic: &[u8; 4], version: u32) -> Result<()> {
    w.write_all(magic)?;
    w.write_u32::<LE>(version)?;
    Ok(())
}

pub fn read_magic<R: Read>(r: &mut R, magic: &[u8; 4], kind: &'static str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    if &buf != magic {
        return Err(Error::format(kind, format!("bad magic {buf:?}")));
    }
    Ok(r.read_u32::<LE>()?)
}

pub fn write_u32<W: Write>(w: &mut W, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::param(format!("{v} does not fit in u32")))?;
    w.write_u32::<LE>(v)?;
    Ok(())
}

pub fn read_u32<R: Read>(r: &mut R) -> Result<usize> {
    Ok(r.read_u32::<LE>()? as usize)
}

pub fn write_u64<W: Write>(w: &mut W, v: u64) -> Result<()> {
    w.write_u64::<LE>(v)?;
    Ok(())
}

pub fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(r.read_u64::<LE>()?)
}

pub fn write_f64<W: Write>(w: &mut W, v: f64) -> Result<()> {
    w.write_f64::<LE>(v)?;
    Ok(())
}

pub fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(r.read_f64::<LE>()?)
}

pub fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    write_u32(w, s.len())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_str<R: Read>(r: &mut R, kind: &'static str) -> Result<String> {
    let len = read_u32(r)?;
    if len as u64 > MAX_LEN {
        return Err(Error::format(kind, "string length out of range"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::format(kind, format!("invalid utf-8: {e}")))
}

pub fn write_f32s<W: Write>(w: &mut W, values: &[f32]) -> Result<()> {
    for &v in values {
        w.write_f32::<LE>(v)?;
    }
    Ok(())
}

pub fn read_f32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f32>> {
    let mut out = vec![0f32; n];
    r.read_f32_into::<LE>(&mut out)?;
    Ok(out)
}

pub fn write_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for &v in values {
        w.write_f64::<LE>(v)?;
    }
    Ok(())
}

pub fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0f64; n];
    r.read_f64_into::<LE>(&mut out)?;
    Ok(out)
}
