use std::fs;
use std::path::{Path, PathBuf};

use super::resample::resize_bilinear;
use super::{Dataset, LabeledImage, PIXELS};
use crate::error::{Error, Result};
use crate::model::{IMAGE_SIDE, N_CLASSES};

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const SHARD_MAGIC: &[u8; 4] = b"HQDS";
const SHARD_VERSION: u32 = 1;

/// What happened while loading a directory tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub loaded: usize,
    pub skipped: Vec<PathBuf>,
}

/// Reads a grayscale image file, scaling to `[0, 1]` and resizing to 28×28.
pub fn load_png(path: &Path) -> Result<Vec<f64>> {
    let img = image::open(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels: Vec<f64> = img.into_raw().into_iter().map(|p| f64::from(p) / 255.0).collect();
    if (h, w) == (IMAGE_SIDE, IMAGE_SIDE) {
        Ok(pixels)
    } else {
        Ok(resize_bilinear(&pixels, h, w, IMAGE_SIDE, IMAGE_SIDE))
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Loads a `root/<label>/<image>` tree. Files are visited in sorted path
/// order; files that fail to decode are skipped and reported. A class
/// directory with no readable image is an error.
pub fn load_image_dir(root: &Path) -> Result<(Dataset, LoadReport)> {
    let mut images = Vec::new();
    let mut report = LoadReport::default();
    let mut classes = 0;
    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            continue;
        }
        let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with('.') {
            continue;
        }
        let label: usize = name
            .parse()
            .ok()
            .filter(|l| *l < N_CLASSES)
            .ok_or_else(|| Error::Data(format!("{}: class directories must be named 0-9", dir.display())))?;
        let before = images.len();
        for file in sorted_entries(&dir)? {
            if !file.is_file() {
                continue;
            }
            match load_png(&file) {
                Ok(pixels) => {
                    let id = file.strip_prefix(root).unwrap_or(&file).display().to_string();
                    images.push(LabeledImage::new(pixels, label, id)?);
                }
                Err(_) => report.skipped.push(file),
            }
        }
        if images.len() == before {
            return Err(Error::Data(format!("class directory {} has no readable images", dir.display())));
        }
        classes += 1;
    }
    if classes == 0 {
        return Err(Error::Data(format!("{} contains no class directories", root.display())));
    }
    report.loaded = images.len();
    Ok((Dataset::new(images), report))
}

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes.get(at..at + 4).map(|b| u32::from_be_bytes(b.try_into().unwrap()))
}

/// Loads an IDX image/label file pair (the MNIST distribution format).
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = fs::read(images_path).map_err(|e| Error::io(images_path, e))?;
    let labels = fs::read(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let fmt = |msg: &str| Error::Format(format!("{}: {msg}", images_path.display()));

    if be_u32(&images, 0) != Some(IDX_IMAGES_MAGIC) {
        return Err(fmt("not an IDX image file (bad magic)"));
    }
    let (count, rows, cols) = match (be_u32(&images, 4), be_u32(&images, 8), be_u32(&images, 12)) {
        (Some(n), Some(r), Some(c)) => (n as usize, r as usize, c as usize),
        _ => return Err(fmt("truncated header")),
    };
    if rows == 0 || cols == 0 {
        return Err(fmt("zero image dimension"));
    }
    let payload = &images[16..];
    if payload.len() != count * rows * cols {
        return Err(fmt(&format!(
            "payload of {} bytes for {count} images of {rows}x{cols}",
            payload.len()
        )));
    }

    let lfmt = |msg: &str| Error::Format(format!("{}: {msg}", labels_path.display()));
    if be_u32(&labels, 0) != Some(IDX_LABELS_MAGIC) {
        return Err(lfmt("not an IDX label file (bad magic)"));
    }
    let label_count = be_u32(&labels, 4).ok_or_else(|| lfmt("truncated header"))? as usize;
    if label_count != count || labels.len() != 8 + count {
        return Err(lfmt(&format!("expected {count} labels")));
    }

    let mut out = Vec::with_capacity(count);
    for (i, (px, &label)) in payload.chunks_exact(rows * cols).zip(&labels[8..]).enumerate() {
        let pixels: Vec<f64> = px.iter().map(|p| f64::from(*p) / 255.0).collect();
        let pixels = if (rows, cols) == (IMAGE_SIDE, IMAGE_SIDE) {
            pixels
        } else {
            resize_bilinear(&pixels, rows, cols, IMAGE_SIDE, IMAGE_SIDE)
        };
        out.push(LabeledImage::new(pixels, usize::from(label), format!("idx:{i}"))?);
    }
    Ok(Dataset::new(out))
}

/// Writes a preprocessed shard. Layout (little-endian):
///
/// ```text
/// "HQDS" | version u32 | count u32 | rows u32 | cols u32
/// labels: count × u8
/// pixels: count × rows × cols × f64
/// ```
pub fn write_shard(path: &Path, data: &Dataset) -> Result<()> {
    let mut buf = Vec::with_capacity(20 + data.len() * (1 + 8 * PIXELS));
    buf.extend_from_slice(SHARD_MAGIC);
    for v in [SHARD_VERSION, data.len() as u32, IMAGE_SIDE as u32, IMAGE_SIDE as u32] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend(data.images.iter().map(|img| img.label as u8));
    for img in &data.images {
        for p in &img.pixels {
            buf.extend_from_slice(&p.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_shard(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let fmt = |msg: &str| Error::Format(format!("{}: {msg}", path.display()));
    if bytes.get(..4) != Some(SHARD_MAGIC.as_slice()) {
        return Err(fmt("not a dataset shard"));
    }
    let word = |i: usize| -> Result<usize> {
        bytes
            .get(4 + 4 * i..8 + 4 * i)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or_else(|| fmt("truncated header"))
    };
    if word(0)? != SHARD_VERSION as usize {
        return Err(fmt("unsupported shard version"));
    }
    let (count, rows, cols) = (word(1)?, word(2)?, word(3)?);
    if (rows, cols) != (IMAGE_SIDE, IMAGE_SIDE) {
        return Err(fmt("shard images are not 28x28"));
    }
    let labels_at = 20;
    let pixels_at = labels_at + count;
    if bytes.len() != pixels_at + count * PIXELS * 8 {
        return Err(fmt("payload length does not match header"));
    }
    let mut images = Vec::with_capacity(count);
    for i in 0..count {
        let start = pixels_at + i * PIXELS * 8;
        let pixels = bytes[start..start + PIXELS * 8]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        images.push(LabeledImage::new(pixels, usize::from(bytes[labels_at + i]), format!("shard:{i}"))?);
    }
    Ok(Dataset::new(images))
}

/// Loads whatever lives at `path`: a shard file, a directory holding one
/// `*images-idx3-ubyte` / `*labels-idx1-ubyte` pair, or a class-directory tree.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    if path.is_file() {
        return read_shard(path);
    }
    if !path.is_dir() {
        return Err(Error::Data(format!("{} does not exist", path.display())));
    }
    let entries = sorted_entries(path)?;
    let find = |needle: &str| {
        entries
            .iter()
            .find(|p| p.is_file() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.contains(needle)))
    };
    if let (Some(images), Some(labels)) = (find("images-idx3"), find("labels-idx1")) {
        return load_idx(images, labels);
    }
    Ok(load_image_dir(path)?.0)
}
