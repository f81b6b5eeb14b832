//! Flat binary container shared by the dictionary, measurement, and
//! balancing files.
//!
//! Layout: a magic string, little-endian u32 dimensions, column-major
//! 64-bit floats, then a u32 length-prefixed UTF-8 JSON blob describing
//! provenance. Round-trips are bit-exact.

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use std::io::{Read, Write};

pub const MAGIC_DICTIONARY: &[u8] = b"HSDICT1\0";
pub const MAGIC_MEASUREMENT: &[u8] = b"HSMEAS1\0";
pub const MAGIC_BALANCE: &[u8] = b"HSBAL1\0";

pub fn write_magic(w: &mut impl Write, magic: &'static [u8]) -> Result<()> {
    w.write_all(magic)?;
    Ok(())
}

pub fn read_magic(r: &mut impl Read, magic: &'static [u8]) -> Result<()> {
    let mut buf = vec![0u8; magic.len()];
    r.read_exact(&mut buf)?;
    if buf != magic {
        return Err(Error::BadMagic {
            expected: std::str::from_utf8(magic).unwrap_or("?"),
        });
    }
    Ok(())
}

pub fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn write_f64_slice(w: &mut impl Write, data: &[f64]) -> Result<()> {
    for &x in data {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_f64_vec(r: &mut impl Read, len: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Matrix as u32 rows, u32 cols, column-major f64 payload.
pub fn write_matrix(w: &mut impl Write, m: &Matrix) -> Result<()> {
    write_u32(w, m.rows() as u32)?;
    write_u32(w, m.cols() as u32)?;
    write_f64_slice(w, m.data())
}

pub fn read_matrix(r: &mut impl Read) -> Result<Matrix> {
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Parse("matrix dimensions overflow".into()))?;
    let data = read_f64_vec(r, len)?;
    Matrix::from_vec(rows, cols, data)
}

/// Matrix as plain CSV, row per line, 17 significant digits.
pub fn write_matrix_csv(m: &Matrix, w: &mut impl Write) -> Result<()> {
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<R: std::io::BufRead>(r: R) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad float '{t}': {e}")))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse("ragged CSV rows".into()));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix CSV".into()));
    }
    let (r_n, c_n) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(r_n, c_n, |i, j| rows[i][j]))
}

/// u32 length-prefixed UTF-8 blob.
pub fn write_blob(w: &mut impl Write, blob: &str) -> Result<()> {
    write_u32(w, blob.len() as u32)?;
    w.write_all(blob.as_bytes())?;
    Ok(())
}

pub fn read_blob(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(format!("provenance blob not UTF-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip_bit_exact() {
        let m = Matrix::from_fn(3, 5, |i, j| (i as f64 + 0.125) * (j as f64 - 2.5));
        let mut buf = Vec::new();
        write_magic(&mut buf, MAGIC_DICTIONARY).unwrap();
        write_matrix(&mut buf, &m).unwrap();
        write_blob(&mut buf, "{\"id\":\"x\"}").unwrap();

        let mut r = buf.as_slice();
        read_magic(&mut r, MAGIC_DICTIONARY).unwrap();
        let back = read_matrix(&mut r).unwrap();
        let blob = read_blob(&mut r).unwrap();
        assert_eq!(back.data(), m.data());
        assert_eq!(blob, "{\"id\":\"x\"}");
    }

    #[test]
    fn wrong_magic_rejected() {
        let mut buf = Vec::new();
        write_magic(&mut buf, MAGIC_MEASUREMENT).unwrap();
        let mut r = buf.as_slice();
        assert!(matches!(
            read_magic(&mut r, MAGIC_DICTIONARY),
            Err(Error::BadMagic { .. })
        ));
    }
}
