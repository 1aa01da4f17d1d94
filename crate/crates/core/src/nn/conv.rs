use rand::Rng;

use super::gemm::{gemm, MatRef};
use super::init::xavier_uniform_init;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Zero-padded cross-correlation with stride 1 and "same" padding.
///
/// Weights are stored `[F, C, K, K]`; the padding is `K / 2` on every side so
/// odd kernels preserve the spatial size.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    pub weights: Tensor,
    pub bias: Tensor,
}

/// Unrolled input patches saved by the forward pass.
#[derive(Clone, Debug)]
pub struct ConvCache {
    cols: Vec<f64>,
    in_shape: (usize, usize, usize),
}

#[derive(Clone, Debug)]
pub struct ConvGrads {
    pub d_input: Tensor,
    pub d_weights: Tensor,
    pub d_bias: Tensor,
}

impl ConvLayer {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        let [f, _, k, k2] = weights.shape()[..] else {
            return Err(Error::shape(format!("conv weights must be 4-d, got {:?}", weights.shape())));
        };
        if k != k2 || k % 2 == 0 {
            return Err(Error::shape(format!("kernel must be square and odd, got {k}x{k2}")));
        }
        if bias.shape() != [f] {
            return Err(Error::shape(format!("bias {:?} for {f} filters", bias.shape())));
        }
        Ok(Self { weights, bias })
    }

    /// Xavier-uniform weights and zero bias.
    pub fn xavier(in_channels: usize, filters: usize, kernel: usize, rng: &mut impl Rng) -> Self {
        Self {
            weights: xavier_uniform_init(&[filters, in_channels, kernel, kernel], rng),
            bias: Tensor::zeros(&[filters]),
        }
    }

    pub fn filters(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weights.shape()[2]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    fn patch_len(&self) -> usize {
        self.in_channels() * self.kernel() * self.kernel()
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, ConvCache)> {
        let (c, h, w) = x.chw()?;
        if c != self.in_channels() {
            return Err(Error::shape(format!(
                "conv expects {} input channels, got {c}",
                self.in_channels()
            )));
        }
        if h == 0 || w == 0 {
            return Err(Error::shape("conv input has an empty spatial dimension"));
        }
        let cols = im2col(x.data(), c, h, w, self.kernel());
        let f = self.filters();
        let hw = h * w;
        let mut out = vec![0.0; f * hw];
        for (row, b) in out.chunks_exact_mut(hw).zip(self.bias.data()) {
            row.fill(*b);
        }
        gemm(
            MatRef::new(self.weights.data(), f, self.patch_len()),
            MatRef::new(&cols, self.patch_len(), hw),
            1.0,
            &mut out,
        );
        let y = Tensor::new(vec![f, h, w], out)?;
        Ok((
            y,
            ConvCache {
                cols,
                in_shape: (c, h, w),
            },
        ))
    }

    pub fn backward(&self, cache: &ConvCache, upstream: &Tensor) -> Result<ConvGrads> {
        let (c, h, w) = cache.in_shape;
        let f = self.filters();
        if upstream.shape() != [f, h, w] || c != self.in_channels() {
            return Err(Error::shape(format!(
                "upstream {:?} does not match cached forward [{f}, {h}, {w}]",
                upstream.shape()
            )));
        }
        let hw = h * w;
        let plen = self.patch_len();
        let dy = MatRef::new(upstream.data(), f, hw);

        let mut d_weights = vec![0.0; f * plen];
        gemm(dy, MatRef::new(&cache.cols, plen, hw).t(), 0.0, &mut d_weights);

        let d_bias = upstream.data().chunks_exact(hw).map(|r| r.iter().sum()).collect();

        let mut d_cols = vec![0.0; plen * hw];
        gemm(MatRef::new(self.weights.data(), f, plen).t(), dy, 0.0, &mut d_cols);
        let d_input = col2im(&d_cols, c, h, w, self.kernel());

        Ok(ConvGrads {
            d_input: Tensor::new(vec![c, h, w], d_input)?,
            d_weights: Tensor::new(self.weights.shape().to_vec(), d_weights)?,
            d_bias: Tensor::new(vec![f], d_bias)?,
        })
    }
}

/// Rows indexed by `(channel, ky, kx)`, columns by output pixel.
fn im2col(x: &[f64], c: usize, h: usize, w: usize, k: usize) -> Vec<f64> {
    let pad = (k / 2) as isize;
    let hw = h * w;
    let mut cols = vec![0.0; c * k * k * hw];
    for ch in 0..c {
        let plane = &x[ch * hw..(ch + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = ((ch * k + ky) * k + kx) * hw;
                let dst = &mut cols[row..row + hw];
                let dy = ky as isize - pad;
                let dx = kx as isize - pad;
                for i in 0..h {
                    let si = i as isize + dy;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    let src_row = &plane[si as usize * w..(si as usize + 1) * w];
                    let dst_row = &mut dst[i * w..(i + 1) * w];
                    // valid output columns j satisfy 0 <= j + dx < w
                    let j0 = (-dx).max(0) as usize;
                    let j1 = (w as isize - dx).min(w as isize).max(0) as usize;
                    for j in j0..j1 {
                        dst_row[j] = src_row[(j as isize + dx) as usize];
                    }
                }
            }
        }
    }
    cols
}

fn col2im(cols: &[f64], c: usize, h: usize, w: usize, k: usize) -> Vec<f64> {
    let pad = (k / 2) as isize;
    let hw = h * w;
    let mut x = vec![0.0; c * hw];
    for ch in 0..c {
        let plane = &mut x[ch * hw..(ch + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = ((ch * k + ky) * k + kx) * hw;
                let src = &cols[row..row + hw];
                let dy = ky as isize - pad;
                let dx = kx as isize - pad;
                for i in 0..h {
                    let si = i as isize + dy;
                    if si < 0 || si >= h as isize {
                        continue;
                    }
                    let j0 = (-dx).max(0) as usize;
                    let j1 = (w as isize - dx).min(w as isize).max(0) as usize;
                    for j in j0..j1 {
                        plane[si as usize * w + (j as isize + dx) as usize] += src[i * w + j];
                    }
                }
            }
        }
    }
    x
}
