//! Digit images: loading, splitting, augmentation and batching.
//!
//! Pixels are kept in `[0, 1]` throughout; [`normalize`] maps them to
//! `[-1, 1]` right before they enter the model.

mod augment;
mod batch;
mod io;
mod resample;
mod split;
pub mod synthetic;

pub use augment::{augment, elastic_displacement, gaussian_blur, AugmentConfig};
pub use batch::{batches, epoch_permutation};
pub use io::{load_dataset, load_idx, load_image_dir, load_png, read_shard, write_shard, LoadReport};
pub use resample::{bilinear_sample, resize_bilinear, warp};
pub use split::{stratified_split, SplitSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IMAGE_SIDE, N_CLASSES};
use crate::tensor::Tensor;

pub const PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

/// A 28×28 grayscale image with intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledImage {
    pub pixels: Vec<f64>,
    pub label: usize,
    pub source_id: String,
}

impl LabeledImage {
    pub fn new(pixels: Vec<f64>, label: usize, source_id: impl Into<String>) -> Result<Self> {
        if pixels.len() != PIXELS {
            return Err(Error::shape(format!("image has {} pixels, expected {PIXELS}", pixels.len())));
        }
        if label >= N_CLASSES {
            return Err(Error::Label {
                label,
                classes: N_CLASSES,
            });
        }
        Ok(Self {
            pixels,
            label,
            source_id: source_id.into(),
        })
    }

    /// The normalized `[1, 28, 28]` model input.
    pub fn to_input(&self) -> Tensor {
        Tensor::new(vec![1, IMAGE_SIDE, IMAGE_SIDE], normalize(&self.pixels)).expect("784 pixels")
    }
}

/// An ordered collection of labelled images.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub images: Vec<LabeledImage>,
}

impl Dataset {
    pub fn new(images: Vec<LabeledImage>) -> Self {
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn class_counts(&self) -> [usize; N_CLASSES] {
        let mut counts = [0; N_CLASSES];
        for img in &self.images {
            counts[img.label] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset::new(indices.iter().map(|&i| self.images[i].clone()).collect())
    }

    /// Order-sensitive FNV-1a digest of labels and pixel bit patterns.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= u64::from(*b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        for img in &self.images {
            eat(&(img.label as u64).to_le_bytes());
            for p in &img.pixels {
                eat(&p.to_bits().to_le_bytes());
            }
        }
        h
    }
}

/// `(x - 0.5) / 0.5`, mapping `[0, 1]` onto `[-1, 1]`.
pub fn normalize(pixels: &[f64]) -> Vec<f64> {
    pixels.iter().map(|x| (x - 0.5) / 0.5).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_endpoints() {
        assert_eq!(normalize(&[0.0, 0.5, 1.0]), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn image_validation() {
        assert!(LabeledImage::new(vec![0.0; 10], 0, "x").is_err());
        assert!(LabeledImage::new(vec![0.0; PIXELS], 10, "x").is_err());
        let img = LabeledImage::new(vec![1.0; PIXELS], 3, "x").unwrap();
        assert!(img.to_input().data().iter().all(|v| *v == 1.0));
    }
}
