//! IDX-format MNIST ingestion.
//!
//! Image files: big-endian u32 magic 0x00000803, count, rows, cols, then
//! unsigned-byte pixels. Label files: magic 0x00000801, count, then bytes.
//! Pixels are kept as raw bytes internally and scaled to `[0, 1]` when an
//! image is materialized.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::Image;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// An image with its class label.
#[derive(Debug, Clone)]
pub struct LabeledImage {
    pub image: Image,
    pub label: usize,
}

/// A parsed MNIST split, stored compactly.
#[derive(Debug, Clone)]
pub struct MnistSet {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl MnistSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn raw_pixels(&self, i: usize) -> &[u8] {
        let n = self.rows * self.cols;
        &self.pixels[i * n..(i + 1) * n]
    }

    pub fn image(&self, i: usize) -> Image {
        Image::from_bytes(self.cols, self.rows, self.raw_pixels(i))
    }

    pub fn labeled(&self, i: usize) -> LabeledImage {
        LabeledImage {
            image: self.image(i),
            label: self.label(i),
        }
    }

    /// Borrows a contiguous index range as a sub-view (used for the
    /// train/validation split).
    pub fn slice(&self, start: usize, end: usize) -> MnistSet {
        let n = self.rows * self.cols;
        MnistSet {
            rows: self.rows,
            cols: self.cols,
            pixels: self.pixels[start * n..end * n].to_vec(),
            labels: self.labels[start..end].to_vec(),
        }
    }

    pub fn from_parts(rows: usize, cols: usize, pixels: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if pixels.len() != rows * cols * labels.len() {
            return Err(Error::Data(format!(
                "pixel buffer holds {} values, want {} for {} {}x{} images",
                pixels.len(),
                rows * cols * labels.len(),
                labels.len(),
                rows,
                cols
            )));
        }
        Ok(MnistSet {
            rows,
            cols,
            pixels,
            labels,
        })
    }
}

struct IdxReader<R> {
    inner: R,
    offset: u64,
    path: PathBuf,
}

impl<R: Read> IdxReader<R> {
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
            Err(_) => Err(self.fail("truncated payload")),
        }
    }

    fn read_u32_be(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(u32::from_be_bytes(b))
    }
}

fn open(path: &Path) -> Result<IdxReader<BufReader<File>>> {
    Ok(IdxReader {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
        path: path.to_path_buf(),
    })
}

/// Parses an IDX image file into (rows, cols, pixel bytes).
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let mut r = open(path)?;
    let magic = r.read_u32_be()?;
    if magic != IMAGES_MAGIC {
        return Err(r.fail(format!("bad magic {magic:#010x}, want {IMAGES_MAGIC:#010x}")));
    }
    let count = r.read_u32_be()? as usize;
    let rows = r.read_u32_be()? as usize;
    let cols = r.read_u32_be()? as usize;
    let mut pixels = vec![0u8; count * rows * cols];
    r.read_exact(&mut pixels)?;
    Ok((rows, cols, pixels))
}

/// Parses an IDX label file.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let mut r = open(path)?;
    let magic = r.read_u32_be()?;
    if magic != LABELS_MAGIC {
        return Err(r.fail(format!("bad magic {magic:#010x}, want {LABELS_MAGIC:#010x}")));
    }
    let count = r.read_u32_be()? as usize;
    let mut labels = vec![0u8; count];
    r.read_exact(&mut labels)?;
    for (i, &l) in labels.iter().enumerate() {
        if l > 9 {
            return Err(Error::Data(format!("label {l} out of range 0..=9 at index {i}")));
        }
    }
    Ok(labels)
}

/// Loads an image/label file pair, checking that the counts agree.
pub fn load_mnist_idx(images_path: &Path, labels_path: &Path) -> Result<MnistSet> {
    let (rows, cols, pixels) = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    let image_count = pixels.len() / (rows * cols);
    if image_count != labels.len() {
        return Err(Error::Data(format!(
            "{} images in {} but {} labels in {}",
            image_count,
            images_path.display(),
            labels.len(),
            labels_path.display()
        )));
    }
    MnistSet::from_parts(rows, cols, pixels, labels)
}

/// Loads the standard train/test split from a directory holding the four
/// conventionally named IDX files.
pub fn load_dir(dir: &Path) -> Result<(MnistSet, MnistSet)> {
    let train = load_mnist_idx(
        &dir.join("train-images-idx3-ubyte"),
        &dir.join("train-labels-idx1-ubyte"),
    )?;
    let test = load_mnist_idx(
        &dir.join("t10k-images-idx3-ubyte"),
        &dir.join("t10k-labels-idx1-ubyte"),
    )?;
    Ok((train, test))
}

/// Writes an IDX image file, bit-exact to the standard layout.
pub fn write_idx_images(path: &Path, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let count = pixels.len() / (rows * cols);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&IMAGES_MAGIC.to_be_bytes())?;
    w.write_all(&(count as u32).to_be_bytes())?;
    w.write_all(&(rows as u32).to_be_bytes())?;
    w.write_all(&(cols as u32).to_be_bytes())?;
    w.write_all(pixels)?;
    w.flush()?;
    Ok(())
}

/// Writes an IDX label file.
pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&LABELS_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)?;
    w.flush()?;
    Ok(())
}
