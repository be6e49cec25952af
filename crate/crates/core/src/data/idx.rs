//! IDX image/label files (the format MNIST-style datasets ship in).
//!
//! Big-endian throughout. An image file starts with magic `0x00000803`
//! followed by u32 count, rows, cols and then `count*rows*cols` unsigned
//! bytes; a label file starts with `0x00000801`, a u32 count and `count`
//! bytes. Anything else — wrong magic, truncated payload, trailing bytes,
//! dimension overflow — is rejected with an error naming the bad field.

use std::fs;
use std::path::Path;

use crate::data::{LabeledDataset, Provenance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Raw contents of an IDX image file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` pixels, row-major per image.
    pub pixels: Vec<u8>,
}

fn format_err(field: &str, message: impl Into<String>) -> Error {
    Error::Format { field: field.to_string(), message: message.into() }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl<'a> Cursor<'a> {
    fn u32_be(&mut self, field: &str) -> Result<u32> {
        let end = self.offset + 4;
        if end > self.bytes.len() {
            return Err(format_err(field, "file truncated inside header"));
        }
        let v = u32::from_be_bytes(self.bytes[self.offset..end].try_into().unwrap());
        self.offset = end;
        Ok(v)
    }

    fn payload(&mut self, field: &str, len: usize) -> Result<&'a [u8]> {
        let end = self
            .offset
            .checked_add(len)
            .ok_or_else(|| format_err(field, "payload length overflows"))?;
        if end > self.bytes.len() {
            return Err(format_err(
                field,
                format!("expected {len} bytes, file holds {}", self.bytes.len() - self.offset),
            ));
        }
        let slice = &self.bytes[self.offset..end];
        self.offset = end;
        Ok(slice)
    }

    fn finish(&self, field: &str) -> Result<()> {
        if self.offset != self.bytes.len() {
            return Err(format_err(
                field,
                format!("{} trailing bytes after payload", self.bytes.len() - self.offset),
            ));
        }
        Ok(())
    }
}

/// Parse an IDX image file.
pub fn read_idx_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    let bytes = fs::read(path.as_ref())?;
    let mut cur = Cursor { bytes: &bytes, offset: 0 };
    let magic = cur.u32_be("magic")?;
    if magic != IMAGE_MAGIC {
        return Err(format_err("magic", format!("expected {IMAGE_MAGIC:#010x}, got {magic:#010x}")));
    }
    let count = cur.u32_be("count")? as usize;
    let rows = cur.u32_be("rows")? as usize;
    let cols = cur.u32_be("cols")? as usize;
    if count == 0 {
        return Err(format_err("count", "zero images"));
    }
    if rows == 0 || cols == 0 {
        return Err(format_err("dimensions", format!("{rows}x{cols} image")));
    }
    let len = rows
        .checked_mul(cols)
        .and_then(|px| px.checked_mul(count))
        .ok_or_else(|| format_err("dimensions", format!("{count}x{rows}x{cols} overflows")))?;
    let pixels = cur.payload("pixels", len)?.to_vec();
    cur.finish("pixels")?;
    Ok(IdxImages { count, rows, cols, pixels })
}

/// Parse an IDX label file.
pub fn read_idx_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let bytes = fs::read(path.as_ref())?;
    let mut cur = Cursor { bytes: &bytes, offset: 0 };
    let magic = cur.u32_be("magic")?;
    if magic != LABEL_MAGIC {
        return Err(format_err("magic", format!("expected {LABEL_MAGIC:#010x}, got {magic:#010x}")));
    }
    let count = cur.u32_be("count")? as usize;
    if count == 0 {
        return Err(format_err("count", "zero labels"));
    }
    let labels = cur.payload("labels", count)?.to_vec();
    cur.finish("labels")?;
    Ok(labels)
}

/// Load an image/label file pair as a dataset with pixels scaled to [0, 1].
///
/// The class count is `max label + 1`; both files must agree on the sample
/// count.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let images = read_idx_images(images_path)?;
    let labels = read_idx_labels(labels_path)?;
    if images.count != labels.len() {
        return Err(format_err(
            "count",
            format!("{} images but {} labels", images.count, labels.len()),
        ));
    }
    let dim = images.rows * images.cols;
    let features = Matrix::from_vec(
        images.count,
        dim,
        images.pixels.iter().map(|&p| p as f64 / 255.0).collect(),
    )?;
    let class_count = labels.iter().copied().max().unwrap() as usize + 1;
    let mut ds = LabeledDataset::new(features, labels.iter().map(|&y| y as usize).collect(), class_count.max(2))?;
    ds.image_shape = Some((images.rows, images.cols));
    ds.provenance = Provenance::File;
    Ok(ds)
}

/// Write an IDX image file (encoder counterpart of [`read_idx_images`]).
pub fn write_idx_images(path: impl AsRef<Path>, rows: usize, cols: usize, pixels: &[u8]) -> Result<()> {
    let per_image = rows
        .checked_mul(cols)
        .filter(|&px| px > 0)
        .ok_or_else(|| format_err("dimensions", format!("{rows}x{cols} image")))?;
    if pixels.is_empty() || pixels.len() % per_image != 0 {
        return Err(format_err(
            "pixels",
            format!("{} bytes is not a whole number of {rows}x{cols} images", pixels.len()),
        ));
    }
    let count = pixels.len() / per_image;
    let mut bytes = Vec::with_capacity(16 + pixels.len());
    bytes.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(count as u32).to_be_bytes());
    bytes.extend_from_slice(&(rows as u32).to_be_bytes());
    bytes.extend_from_slice(&(cols as u32).to_be_bytes());
    bytes.extend_from_slice(pixels);
    fs::write(path, bytes)?;
    Ok(())
}

/// Write an IDX label file.
pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    if labels.is_empty() {
        return Err(format_err("count", "zero labels"));
    }
    let mut bytes = Vec::with_capacity(8 + labels.len());
    bytes.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    bytes.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    bytes.extend_from_slice(labels);
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two 2x3 "images" with recognizable pixel values.
    fn fixture_pixels() -> Vec<u8> {
        vec![0, 51, 102, 153, 204, 255, 10, 20, 30, 40, 50, 60]
    }

    fn write_fixture(dir: &tempfile::TempDir) -> (std::path::PathBuf, std::path::PathBuf) {
        let img = dir.path().join("images.idx");
        let lab = dir.path().join("labels.idx");
        write_idx_images(&img, 2, 3, &fixture_pixels()).unwrap();
        write_idx_labels(&lab, &[1, 0]).unwrap();
        (img, lab)
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = write_fixture(&dir);

        // Encoded bytes match the format laid out by hand.
        let mut expected = Vec::new();
        expected.extend_from_slice(&[0, 0, 8, 3]);
        expected.extend_from_slice(&2u32.to_be_bytes());
        expected.extend_from_slice(&2u32.to_be_bytes());
        expected.extend_from_slice(&3u32.to_be_bytes());
        expected.extend_from_slice(&fixture_pixels());
        assert_eq!(std::fs::read(&img).unwrap(), expected);

        let parsed = read_idx_images(&img).unwrap();
        assert_eq!(parsed, IdxImages { count: 2, rows: 2, cols: 3, pixels: fixture_pixels() });
        assert_eq!(read_idx_labels(&lab).unwrap(), vec![1, 0]);

        // And decoding scales into [0, 1].
        let ds = load_idx(&img, &lab).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.feature_dim(), 6);
        assert_eq!(ds.image_shape, Some((2, 3)));
        assert!((ds.features.get(0, 5) - 1.0).abs() < 1e-15);
        assert!((ds.features.get(0, 1) - 0.2).abs() < 1e-15);
        assert_eq!(ds.labels, vec![1, 0]);
    }

    /// Six deliberately corrupted files, each rejected with a field-naming
    /// error: bad magic, truncation, dimension overflow, count mismatch,
    /// zero count, trailing garbage.
    #[test]
    fn corrupted_corpus_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = write_fixture(&dir);
        let good = std::fs::read(&img).unwrap();

        let check = |name: &str, bytes: Vec<u8>, expect_field: &str| {
            let path = dir.path().join(name);
            std::fs::write(&path, bytes).unwrap();
            match read_idx_images(&path) {
                Err(Error::Format { field, .. }) => {
                    assert_eq!(field, expect_field, "fixture {name}");
                }
                other => panic!("fixture {name}: expected format error, got {other:?}"),
            }
        };

        // 1. Bad magic (label magic in an image file).
        let mut bad_magic = good.clone();
        bad_magic[3] = 1;
        check("bad_magic.idx", bad_magic, "magic");

        // 2. Truncated payload.
        let mut truncated = good.clone();
        truncated.truncate(good.len() - 4);
        check("truncated.idx", truncated, "pixels");

        // 3. Dimension overflow: count * rows * cols exceeds usize.
        let mut overflow = Vec::new();
        overflow.extend_from_slice(&[0, 0, 8, 3]);
        overflow.extend_from_slice(&u32::MAX.to_be_bytes());
        overflow.extend_from_slice(&u32::MAX.to_be_bytes());
        overflow.extend_from_slice(&u32::MAX.to_be_bytes());
        check("overflow.idx", overflow, "dimensions");

        // 4. Count mismatch between image and label files.
        let lab3 = dir.path().join("labels3.idx");
        write_idx_labels(&lab3, &[1, 0, 1]).unwrap();
        match load_idx(&img, &lab3) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "count"),
            other => panic!("count mismatch: expected format error, got {other:?}"),
        }

        // 5. Zero count.
        let mut zero = good.clone();
        zero[4..8].copy_from_slice(&0u32.to_be_bytes());
        check("zero_count.idx", zero, "count");

        // 6. Trailing garbage.
        let mut trailing = good;
        trailing.extend_from_slice(&[9, 9, 9]);
        check("trailing.idx", trailing, "pixels");

        // The intact pair still loads after all that.
        assert!(load_idx(&img, &lab).is_ok());
    }

    #[test]
    fn label_reader_rejects_image_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (img, _) = write_fixture(&dir);
        assert!(matches!(read_idx_labels(&img), Err(Error::Format { .. })));
    }

    #[test]
    fn writer_rejects_ragged_pixel_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.idx");
        assert!(write_idx_images(&path, 2, 3, &[0; 7]).is_err());
        assert!(write_idx_images(&path, 0, 3, &[0; 6]).is_err());
    }
}
