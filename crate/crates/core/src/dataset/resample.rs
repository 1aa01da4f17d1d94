/// Bilinear sample of a row-major `h × w` image at continuous coordinates
/// `(x, y)` (column, row). Points outside the image read as zero.
pub fn bilinear_sample(img: &[f64], h: usize, w: usize, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let pixel = |xi: f64, yi: f64| -> f64 {
        if xi < 0.0 || yi < 0.0 || xi >= w as f64 || yi >= h as f64 {
            0.0
        } else {
            img[yi as usize * w + xi as usize]
        }
    };
    let mut acc = (1.0 - fx) * (1.0 - fy) * pixel(x0, y0);
    if fx != 0.0 {
        acc += fx * (1.0 - fy) * pixel(x0 + 1.0, y0);
    }
    if fy != 0.0 {
        acc += (1.0 - fx) * fy * pixel(x0, y0 + 1.0);
        if fx != 0.0 {
            acc += fx * fy * pixel(x0 + 1.0, y0 + 1.0);
        }
    }
    acc
}

/// Inverse warp: output pixel `(col, row)` reads the input at
/// `source(col, row)`.
pub fn warp(img: &[f64], h: usize, w: usize, source: impl Fn(f64, f64) -> (f64, f64)) -> Vec<f64> {
    let mut out = Vec::with_capacity(h * w);
    for row in 0..h {
        for col in 0..w {
            let (sx, sy) = source(col as f64, row as f64);
            out.push(bilinear_sample(img, h, w, sx, sy));
        }
    }
    out
}

/// Bilinear resize with pixel-center alignment; edge pixels are clamped so
/// a constant image stays constant.
pub fn resize_bilinear(img: &[f64], h: usize, w: usize, out_h: usize, out_w: usize) -> Vec<f64> {
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    let mut out = Vec::with_capacity(out_h * out_w);
    for r in 0..out_h {
        let y = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        for c in 0..out_w {
            let x = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            out.push(bilinear_sample(img, h, w, x, y));
        }
    }
    out
}
