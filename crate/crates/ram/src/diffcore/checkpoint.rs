//! Flat binary parameter container.
//!
//! Byte layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "RAMCKPT\0"
//! 8       4     format version (u32), currently 1
//! 12      4     block count N (u32)
//!               then N manifest entries:
//!                 u32   name length L
//!                 L     name bytes (utf-8)
//!                 u64   rows
//!                 u64   cols
//!               then N payloads in manifest order:
//!                 rows*cols f64 values, little-endian, row-major
//! ```
//!
//! Only parameter values are stored; gradients and momentum buffers are
//! transient training state.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::tensor::Parameterized;

const MAGIC: &[u8; 8] = b"RAMCKPT\0";
const VERSION: u32 = 1;

pub fn save(path: &Path, model: &dyn Parameterized) -> Result<()> {
    let mut blocks: Vec<(String, usize, usize, Vec<f64>)> = Vec::new();
    model.visit_params(&mut |b| {
        blocks.push((
            b.name().to_string(),
            b.value.rows(),
            b.value.cols(),
            b.value.data().to_vec(),
        ));
    });

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    for (name, rows, cols, _) in &blocks {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
        w.write_all(&(*rows as u64).to_le_bytes())?;
        w.write_all(&(*cols as u64).to_le_bytes())?;
    }
    for (_, _, _, data) in &blocks {
        for v in data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Cursor<R> {
    inner: R,
    offset: u64,
    path: std::path::PathBuf,
}

impl<R: Read> Cursor<R> {
    fn fail(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            offset: self.offset,
            message: message.into(),
        }
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(_) => Err(self.fail("unexpected end of file")),
        }
    }

    fn read_u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
}

/// Loads a checkpoint into `model`. The checkpoint manifest must match the
/// model's blocks exactly (same names, shapes, and order).
pub fn load(path: &Path, model: &mut dyn Parameterized) -> Result<()> {
    let mut cur = Cursor {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
        path: path.to_path_buf(),
    };

    let mut magic = [0u8; 8];
    cur.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(cur.fail(format!("bad magic {magic:02x?}")));
    }
    let version = cur.read_u32()?;
    if version != VERSION {
        return Err(cur.fail(format!("unsupported format version {version}")));
    }
    let count = cur.read_u32()? as usize;

    let mut manifest: Vec<(String, usize, usize)> = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = cur.read_u32()? as usize;
        if name_len > 4096 {
            return Err(cur.fail(format!("implausible name length {name_len}")));
        }
        let mut name = vec![0u8; name_len];
        cur.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| cur.fail("name is not utf-8"))?;
        let rows = cur.read_u64()? as usize;
        let cols = cur.read_u64()? as usize;
        manifest.push((name, rows, cols));
    }

    // Validate the manifest against the model before reading payloads.
    let mut expected: Vec<(String, usize, usize)> = Vec::new();
    model.visit_params(&mut |b| {
        expected.push((b.name().to_string(), b.value.rows(), b.value.cols()));
    });
    if manifest.len() != expected.len() {
        return Err(Error::Compatibility(format!(
            "checkpoint has {} blocks, model has {}",
            manifest.len(),
            expected.len()
        )));
    }
    for (have, want) in manifest.iter().zip(&expected) {
        if have != want {
            return Err(Error::Compatibility(format!(
                "block mismatch: checkpoint has {} [{}x{}], model wants {} [{}x{}]",
                have.0, have.1, have.2, want.0, want.1, want.2
            )));
        }
    }

    let mut payloads: Vec<Vec<f64>> = Vec::with_capacity(count);
    for (_, rows, cols) in &manifest {
        let mut data = vec![0.0f64; rows * cols];
        for v in data.iter_mut() {
            let mut b = [0u8; 8];
            cur.read_exact(&mut b)?;
            *v = f64::from_le_bytes(b);
        }
        payloads.push(data);
    }

    let mut i = 0;
    model.visit_params_mut(&mut |b| {
        b.value.data_mut().copy_from_slice(&payloads[i]);
        i += 1;
    });
    Ok(())
}
