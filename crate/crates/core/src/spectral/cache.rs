//! Binary cache of an eigendecomposition.
//!
//! Layout (all little-endian): 8 magic bytes, u64 dimension n, n eigenvalues
//! (f64), n*n eigenvector entries (f64, column-major), then the 64-bit FNV-1a
//! hash of everything between the magic and the hash.

use std::io::{Read, Write};

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const CACHE_MAGIC: &[u8; 8] = b"FRSPEC01";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn write_cache<W: Write>(dec: &SpectralDecomposition, mut w: W) -> Result<()> {
    let n = dec.dim();
    let mut payload = Vec::with_capacity(8 * (1 + n + n * n));
    payload.extend_from_slice(&(n as u64).to_le_bytes());
    for v in dec.values() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    for v in dec.vectors().as_slice() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&payload)?;
    w.write_all(&fnv1a64(&payload).to_le_bytes())?;
    w.flush()?;
    Ok(())
}

/// Reads a cache written by [`write_cache`]. The measure is not stored and
/// must be supplied (it comes from the graph the cache was keyed on).
pub fn read_cache<R: Read>(mut r: R, measure: &[f64]) -> Result<SpectralDecomposition> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 8 + 8 + 8 || &bytes[..8] != CACHE_MAGIC {
        return Err(Error::CorruptCache("missing magic bytes".into()));
    }
    let payload = &bytes[8..bytes.len() - 8];
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().expect("8 bytes"));
    if fnv1a64(payload) != stored {
        return Err(Error::CorruptCache("hash mismatch".into()));
    }
    let n = u64::from_le_bytes(payload[..8].try_into().expect("8 bytes")) as usize;
    let expected = n
        .checked_mul(n)
        .and_then(|nn| nn.checked_add(n + 1))
        .and_then(|k| k.checked_mul(8));
    if expected != Some(payload.len()) {
        return Err(Error::CorruptCache(format!(
            "length does not match dimension {n}"
        )));
    }
    if measure.len() != n {
        return Err(Error::CorruptCache(format!(
            "dimension {n} differs from graph size {}",
            measure.len()
        )));
    }
    let floats: Vec<f64> = payload[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let (values, vectors) = floats.split_at(n);
    Ok(SpectralDecomposition::from_raw(
        values.to_vec(),
        DenseMatrix::from_column_major(n, vectors.to_vec()),
        measure.to_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{build_fractal, Family, FractalSpec};
    use crate::spectral::{eigendecompose, GeneratorOperator};

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn roundtrip_is_bit_exact_and_detects_corruption() {
        let g = build_fractal(FractalSpec::new(Family::Gasket, 2)).unwrap();
        let dec = eigendecompose(&GeneratorOperator::from_graph(&g).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_cache(&dec, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"FRSPEC01");
        assert_eq!(
            buf.len(),
            8 + 8 * (1 + dec.dim() + dec.dim() * dec.dim()) + 8
        );
        let back = read_cache(&buf[..], g.measure()).unwrap();
        assert_eq!(back.values(), dec.values());
        assert_eq!(back.vectors(), dec.vectors());

        let mut bad = buf.clone();
        bad[40] ^= 1;
        assert!(matches!(
            read_cache(&bad[..], g.measure()),
            Err(Error::CorruptCache(_))
        ));
        assert!(read_cache(&buf[..buf.len() - 3], g.measure()).is_err());
        assert!(read_cache(&buf[..], &g.measure()[1..]).is_err());
        assert!(read_cache(&b"NOTMAGIC"[..], g.measure()).is_err());
    }
}
