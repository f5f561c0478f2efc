//! Binary coefficient cache.
//!
//! Layout (little-endian): magic `GVCT`, `u16` format version (1), `u16`
//! label length, UTF-8 label, `u64` N, then N+1 `i128` values.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::CoefficientTable;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GVCT";
pub const VERSION: u16 = 1;

pub fn encode(table: &CoefficientTable) -> Result<Vec<u8>> {
    let label = table.label().as_bytes();
    let label_len = u16::try_from(label.len())
        .map_err(|_| Error::Cache(format!("label too long ({} bytes)", label.len())))?;
    let mut out = Vec::with_capacity(16 + label.len() + 16 * table.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&label_len.to_le_bytes());
    out.extend_from_slice(label);
    out.extend_from_slice(&(table.len() as u64).to_le_bytes());
    for v in table.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

fn take<'a>(buf: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if buf.len() < n {
        return Err(Error::Cache("truncated file".into()));
    }
    let (head, rest) = buf.split_at(n);
    *buf = rest;
    Ok(head)
}

pub fn decode(mut buf: &[u8]) -> Result<CoefficientTable> {
    let buf = &mut buf;
    if take(buf, 4)? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(buf, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let label_len = u16::from_le_bytes(take(buf, 2)?.try_into().unwrap()) as usize;
    let label = std::str::from_utf8(take(buf, label_len)?)
        .map_err(|_| Error::Cache("label is not UTF-8".into()))?
        .to_string();
    let n = u64::from_le_bytes(take(buf, 8)?.try_into().unwrap());
    let count = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_add(1))
        .ok_or_else(|| Error::Cache(format!("N = {n} too large")))?;
    if buf.len() != count.saturating_mul(16) {
        return Err(Error::Cache(format!(
            "body holds {} bytes, expected {} entries",
            buf.len(),
            count
        )));
    }
    let values = buf
        .chunks_exact(16)
        .map(|c| i128::from_le_bytes(c.try_into().unwrap()))
        .collect();
    CoefficientTable::new(label, values)
}

/// Writes to a sibling temp file and renames it into place.
pub fn write_table(path: &Path, table: &CoefficientTable) -> Result<()> {
    let bytes = encode(table)?;
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<CoefficientTable> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip(values in proptest::collection::vec(any::<i128>(), 1..64), label in "[a-z_0-9]{0,12}") {
            let t = CoefficientTable::new(label, values).unwrap();
            prop_assert_eq!(decode(&encode(&t).unwrap()).unwrap(), t);
        }
    }

    #[test]
    fn header_layout() {
        let t = CoefficientTable::new("tau", vec![0, 1, -24]).unwrap();
        let b = encode(&t).unwrap();
        assert_eq!(&b[..4], b"GVCT");
        assert_eq!(&b[4..6], &[1, 0]);
        assert_eq!(&b[6..8], &[3, 0]);
        assert_eq!(&b[8..11], b"tau");
        assert_eq!(&b[11..19], &2u64.to_le_bytes());
        assert_eq!(b.len(), 19 + 3 * 16);
        assert_eq!(&b[19 + 32..19 + 48], &(-24i128).to_le_bytes());
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let t = CoefficientTable::new("x", vec![1]).unwrap();
        let mut b = encode(&t).unwrap();
        b[0] = b'X';
        assert!(decode(&b).is_err());
        let mut b = encode(&t).unwrap();
        b[4] = 2;
        assert!(decode(&b).is_err());
        let b = encode(&t).unwrap();
        assert!(decode(&b[..b.len() - 1]).is_err());
    }
}
