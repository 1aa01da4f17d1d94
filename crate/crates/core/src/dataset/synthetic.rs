//! Procedurally drawn ten-class glyph dataset for smoke tests and
//! desk-scale training runs.
//!
//! Each class is a distinct geometric figure, every one of them symmetric
//! under a horizontal flip so the default augmentation keeps labels valid.
//! Samples vary in position, scale, stroke width and a small tilt, and
//! carry additive uniform noise.

use rand::Rng;

use super::{Dataset, LabeledImage};
use crate::error::Result;
use crate::model::{IMAGE_SIDE, N_CLASSES};
use crate::seeding::{self, tag};

pub const GLYPH_NAMES: [&str; N_CLASSES] = [
    "ring",
    "vertical bar",
    "horizontal bar",
    "plus",
    "cross",
    "square",
    "disk",
    "triangle",
    "double horizontal",
    "double vertical",
];

fn segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (abx, aby) = (b.0 - a.0, b.1 - a.1);
    let (apx, apy) = (p.0 - a.0, p.1 - a.1);
    let t = ((apx * abx + apy * aby) / (abx * abx + aby * aby)).clamp(0.0, 1.0);
    let (dx, dy) = (apx - t * abx, apy - t * aby);
    (dx * dx + dy * dy).sqrt()
}

/// Distance from `p` (glyph coordinates, roughly `[-1, 1]²`, y down) to
/// the stroke of glyph `class`.
fn glyph_distance(class: usize, p: (f64, f64)) -> f64 {
    let (x, y) = p;
    let r = (x * x + y * y).sqrt();
    match class {
        0 => (r - 0.6).abs(),
        1 => segment(p, (0.0, -0.7), (0.0, 0.7)),
        2 => segment(p, (-0.7, 0.0), (0.7, 0.0)),
        3 => segment(p, (0.0, -0.7), (0.0, 0.7)).min(segment(p, (-0.7, 0.0), (0.7, 0.0))),
        4 => segment(p, (-0.55, -0.55), (0.55, 0.55)).min(segment(p, (-0.55, 0.55), (0.55, -0.55))),
        5 => (x.abs().max(y.abs()) - 0.6).abs(),
        6 => (r - 0.45).max(0.0),
        7 => {
            let (apex, left, right) = ((0.0, -0.65), (-0.65, 0.55), (0.65, 0.55));
            segment(p, apex, left).min(segment(p, apex, right)).min(segment(p, left, right))
        }
        8 => segment(p, (-0.65, -0.35), (0.65, -0.35)).min(segment(p, (-0.65, 0.35), (0.65, 0.35))),
        9 => segment(p, (-0.35, -0.65), (-0.35, 0.65)).min(segment(p, (0.35, -0.65), (0.35, 0.65))),
        _ => unreachable!("class index checked by caller"),
    }
}

/// Renders one sample of `class` with intensities in `[0, 1]`.
pub fn render(class: usize, rng: &mut impl Rng) -> Vec<f64> {
    assert!(class < N_CLASSES, "class {class} out of range");
    let half = IMAGE_SIDE as f64 / 2.0;
    let cx = half + rng.gen_range(-2.0..2.0);
    let cy = half + rng.gen_range(-2.0..2.0);
    let scale = 10.0 * rng.gen_range(0.85..1.15);
    let thickness = rng.gen_range(0.10..0.16);
    let tilt: f64 = rng.gen_range(-10f64..10.0).to_radians();
    let (s, c) = tilt.sin_cos();
    let soft = 1.0 / scale;
    let mut px = Vec::with_capacity(IMAGE_SIDE * IMAGE_SIDE);
    for row in 0..IMAGE_SIDE {
        for col in 0..IMAGE_SIDE {
            let u = (col as f64 + 0.5 - cx) / scale;
            let v = (row as f64 + 0.5 - cy) / scale;
            let p = (c * u + s * v, -s * u + c * v);
            let d = glyph_distance(class, p);
            let ink = ((thickness - d) / soft + 0.5).clamp(0.0, 1.0);
            let noise = rng.gen_range(-0.15..0.15);
            px.push((ink + noise).clamp(0.0, 1.0));
        }
    }
    px
}

/// `per_class` samples of every class, ordered by class then index.
pub fn generate(per_class: usize, seed: u64) -> Result<Dataset> {
    let mut images = Vec::with_capacity(per_class * N_CLASSES);
    for class in 0..N_CLASSES {
        for i in 0..per_class {
            let mut rng = seeding::stream(seed, &[tag::SYNTHETIC, class as u64, i as u64]);
            images.push(LabeledImage::new(render(class, &mut rng), class, format!("synthetic/{class}/{i}"))?);
        }
    }
    Ok(Dataset::new(images))
}
