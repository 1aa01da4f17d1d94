use rand::Rng;
use serde::{Deserialize, Serialize};

use super::resample::warp;
use super::LabeledImage;
use crate::model::IMAGE_SIDE;

/// Training-time augmentation. Setting a magnitude or probability to zero
/// disables that step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Rotation angle is drawn from `U(-rotate_deg, rotate_deg)`.
    pub rotate_deg: f64,
    /// Shifts are drawn from `U(-f, f)` times the image side.
    pub translate_frac: f64,
    pub hflip_p: f64,
    pub elastic_alpha: f64,
    pub elastic_sigma: f64,
    pub elastic_p: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            rotate_deg: 20.0,
            translate_frac: 0.1,
            hflip_p: 0.5,
            elastic_alpha: 50.0,
            elastic_sigma: 5.0,
            elastic_p: 0.5,
        }
    }
}

impl AugmentConfig {
    pub fn none() -> Self {
        Self {
            rotate_deg: 0.0,
            translate_frac: 0.0,
            hflip_p: 0.0,
            elastic_alpha: 0.0,
            elastic_sigma: 0.0,
            elastic_p: 0.0,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotate_deg == 0.0
            && self.translate_frac == 0.0
            && self.hflip_p == 0.0
            && (self.elastic_p == 0.0 || self.elastic_alpha == 0.0)
    }
}

/// Applies rotation, translation, horizontal flip and elastic distortion,
/// in that order. Rotation and translation are folded into one affine
/// resample about the image center; everything resamples bilinearly and
/// reads zero outside the image.
pub fn augment(img: &LabeledImage, cfg: &AugmentConfig, rng: &mut impl Rng) -> LabeledImage {
    let n = IMAGE_SIDE;
    let side = n as f64;
    let mut px = img.pixels.clone();

    let theta = if cfg.rotate_deg > 0.0 {
        rng.gen_range(-cfg.rotate_deg..=cfg.rotate_deg).to_radians()
    } else {
        0.0
    };
    let (tx, ty) = if cfg.translate_frac > 0.0 {
        let f = cfg.translate_frac;
        (rng.gen_range(-f..=f) * side, rng.gen_range(-f..=f) * side)
    } else {
        (0.0, 0.0)
    };
    if theta != 0.0 || tx != 0.0 || ty != 0.0 {
        px = rotate_translate(&px, n, theta, tx, ty);
    }

    if cfg.hflip_p > 0.0 && rng.gen::<f64>() < cfg.hflip_p {
        for row in px.chunks_exact_mut(n) {
            row.reverse();
        }
    }

    if cfg.elastic_p > 0.0 && cfg.elastic_alpha > 0.0 && rng.gen::<f64>() < cfg.elastic_p {
        let mut noise = || (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (nx, ny) = (noise(), noise());
        let (dx, dy) = elastic_displacement(&nx, &ny, n, n, cfg.elastic_alpha, cfg.elastic_sigma);
        px = warp(&px, n, n, |x, y| {
            let i = y as usize * n + x as usize;
            (x + dx[i], y + dy[i])
        });
    }

    LabeledImage {
        pixels: px,
        label: img.label,
        source_id: img.source_id.clone(),
    }
}

/// Resamples through `p ↦ R(θ)(p - c) + c + t` about the image center `c`.
fn rotate_translate(px: &[f64], n: usize, theta: f64, tx: f64, ty: f64) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    let (s, co) = theta.sin_cos();
    warp(px, n, n, |x, y| {
        let (dx, dy) = (x - c - tx, y - c - ty);
        (co * dx + s * dy + c, -s * dx + co * dy + c)
    })
}

/// Smooths two uniform noise fields with a Gaussian of width `sigma` and
/// scales them by `alpha`, giving per-pixel `(dx, dy)` displacements.
pub fn elastic_displacement(
    noise_x: &[f64],
    noise_y: &[f64],
    h: usize,
    w: usize,
    alpha: f64,
    sigma: f64,
) -> (Vec<f64>, Vec<f64>) {
    let scale = |field: &[f64]| -> Vec<f64> {
        gaussian_blur(field, h, w, sigma).into_iter().map(|v| v * alpha).collect()
    };
    (scale(noise_x), scale(noise_y))
}

/// Separable Gaussian filter with zero padding, truncated at `4σ`.
pub fn gaussian_blur(field: &[f64], h: usize, w: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return field.to_vec();
    }
    let radius = (4.0 * sigma + 0.5) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let pass = |src: &[f64], along_rows: bool| -> Vec<f64> {
        let mut out = vec![0.0; h * w];
        for r in 0..h {
            for c in 0..w {
                let mut acc = 0.0;
                for (ki, k) in kernel.iter().enumerate() {
                    let off = ki as isize - radius;
                    let (rr, cc) = if along_rows {
                        (r as isize, c as isize + off)
                    } else {
                        (r as isize + off, c as isize)
                    };
                    if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
                        acc += k * src[rr as usize * w + cc as usize];
                    }
                }
                out[r * w + c] = acc;
            }
        }
        out
    };
    pass(&pass(field, true), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_image() -> LabeledImage {
        let px = (0..784).map(|i| ((i * 31) % 97) as f64 / 96.0).collect();
        LabeledImage::new(px, 4, "t").unwrap()
    }

    #[test]
    fn disabled_is_identity() {
        let img = sample_image();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(augment(&img, &AugmentConfig::none(), &mut rng), img);
    }

    #[test]
    fn zero_degree_rotation_is_identity() {
        let img = sample_image();
        let cfg = AugmentConfig {
            rotate_deg: 1e-300,
            ..AugmentConfig::none()
        };
        let out = augment(&img, &cfg, &mut ChaCha8Rng::seed_from_u64(3));
        for (a, b) in out.pixels.iter().zip(&img.pixels) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forced_flip_mirrors_rows() {
        let img = sample_image();
        let cfg = AugmentConfig {
            hflip_p: 1.0,
            ..AugmentConfig::none()
        };
        let out = augment(&img, &cfg, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(out.pixels[0], img.pixels[27]);
        assert_eq!(out.pixels[28 * 5 + 3], img.pixels[28 * 5 + 24]);
    }

    #[test]
    fn stays_in_unit_range() {
        let img = sample_image();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let out = augment(&img, &AugmentConfig::default(), &mut rng);
            assert!(out.pixels.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
        }
    }

    #[test]
    fn quarter_turn_moves_pixels() {
        // A lit pixel right of center lands below center after +90° in
        // image coordinates (y grows downward).
        let mut px = vec![0.0; 784];
        px[13 * 28 + 20] = 1.0;
        let out = rotate_translate(&px, 28, std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        assert!(out[20 * 28 + 14] > 0.999);
        let shifted = rotate_translate(&px, 28, 0.0, 2.0, -1.0);
        assert_eq!(shifted[12 * 28 + 22], 1.0);
    }
}
