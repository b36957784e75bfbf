//! Binary model container.
//!
//! All integers and floats are little-endian:
//!
//! | offset | size      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | 8         | magic `b"SENTOPIC"`                     |
//! | 8      | 4         | format version (`u32`, currently 1)     |
//! | 12     | 1         | mode flag (`0` = RS, `1` = joint)       |
//! | 13     | 8 × 3     | K, H, S (`u64`)                         |
//! | 37     | 8         | metadata length M (`u64`)               |
//! | 45     | M         | metadata, UTF-8 (free-form, may be empty) |
//! | 45+M   | 8 × …     | W (K×H), U (S×H), a (K), b (H), c (S) as `f64`, row-major |
//!
//! Floats are stored by bit pattern, so a save/load round trip is exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Mode, ModelParams};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SENTOPIC";
pub const VERSION: u32 = 1;

pub fn write_params<W: Write>(mut out: W, params: &ModelParams, metadata: &str) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[matches!(params.mode(), Mode::Joint) as u8])?;
    for dim in [params.vocab_size(), params.hidden_size(), params.sentiment_size()] {
        out.write_all(&(dim as u64).to_le_bytes())?;
    }
    out.write_all(&(metadata.len() as u64).to_le_bytes())?;
    out.write_all(metadata.as_bytes())?;
    let floats = params
        .w
        .iter()
        .chain(params.u.iter())
        .chain(params.a.iter())
        .chain(params.b.iter())
        .chain(params.c.iter());
    for x in floats {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a model and its metadata string.
pub fn read_params<R: Read>(mut input: R) -> Result<(ModelParams, String)> {
    let io = |e| Error::io("reading model", e);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not a model file".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag).map_err(io)?;
    let k = read_len(&mut input)?;
    let h = read_len(&mut input)?;
    let s = read_len(&mut input)?;
    let joint = match flag[0] {
        0 => false,
        1 => true,
        f => return Err(Error::Format(format!("bad mode flag {f}"))),
    };
    if joint != (s > 0) {
        return Err(Error::Format(format!("mode flag {} disagrees with S = {s}", flag[0])));
    }
    let meta_len = read_len(&mut input)?;
    let mut meta = vec![0u8; meta_len];
    input.read_exact(&mut meta).map_err(io)?;
    let metadata = String::from_utf8(meta).map_err(|_| Error::Format("metadata is not UTF-8".into()))?;

    let mut floats = |n: usize| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; n * 8];
        input.read_exact(&mut buf).map_err(io)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let shape = |e: ndarray::ShapeError| Error::Format(e.to_string());
    let w = Array2::from_shape_vec((k, h), floats(k * h)?).map_err(shape)?;
    let u = Array2::from_shape_vec((s, h), floats(s * h)?).map_err(shape)?;
    let a = Array1::from(floats(k)?);
    let b = Array1::from(floats(h)?);
    let c = Array1::from(floats(s)?);
    Ok((ModelParams::from_blocks(w, u, a, b, c)?, metadata))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf).map_err(|e| Error::io("reading model", e))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_len<R: Read>(input: &mut R) -> Result<usize> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(|e| Error::io("reading model", e))?;
    let n = u64::from_le_bytes(buf);
    if n > (1 << 32) {
        return Err(Error::Format(format!("implausible size {n}")));
    }
    Ok(n as usize)
}

pub fn save_params(path: impl AsRef<Path>, params: &ModelParams, metadata: &str) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_params(&mut buf, params, metadata).expect("writing to memory");
    fs::write(path, buf).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn load_params(path: impl AsRef<Path>) -> Result<(ModelParams, String)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    read_params(bytes.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            k in 1usize..5, h in 1usize..4, s in 0usize..3,
            seed in any::<u64>(), meta in "[a-z=\n ]{0,20}",
        ) {
            let mut x = seed;
            let mut next = || {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits(x >> 2 | 0x3ff0_0000_0000_0000) - 1.5
            };
            let mut p = ModelParams::zeros(k, h, s);
            p.w.mapv_inplace(|_| next());
            p.u.mapv_inplace(|_| next());
            p.a.mapv_inplace(|_| next());
            p.b.mapv_inplace(|_| next());
            p.c.mapv_inplace(|_| next());
            let mut buf = Vec::new();
            write_params(&mut buf, &p, &meta).unwrap();
            let (back, m) = read_params(buf.as_slice()).unwrap();
            prop_assert_eq!(m, meta);
            prop_assert_eq!(back.mode(), p.mode());
            for (x, y) in p.w.iter().chain(p.u.iter()).chain(p.a.iter()).chain(p.b.iter()).chain(p.c.iter())
                .zip(back.w.iter().chain(back.u.iter()).chain(back.a.iter()).chain(back.b.iter()).chain(back.c.iter()))
            {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn rejects_foreign_and_truncated_files() {
        assert!(matches!(read_params(&b"NOTAMODEL..."[..]), Err(Error::Format(_))));
        let mut buf = Vec::new();
        write_params(&mut buf, &ModelParams::zeros(3, 2, 2), "").unwrap();
        buf.truncate(buf.len() - 4);
        assert!(read_params(buf.as_slice()).is_err());
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_params(&mut buf, &ModelParams::zeros(3, 2, 1), "ab").unwrap();
        assert_eq!(&buf[..8], MAGIC);
        assert_eq!(buf[12], 1);
        assert_eq!(u64::from_le_bytes(buf[13..21].try_into().unwrap()), 3);
        assert_eq!(&buf[45..47], b"ab");
        assert_eq!(buf.len(), 47 + 8 * (6 + 2 + 3 + 2 + 1));
    }
}
