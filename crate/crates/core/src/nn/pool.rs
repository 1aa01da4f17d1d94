use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Output length of a 2×2, stride-2 pooling window in ceil mode.
///
/// An odd input leaves a final window of width one, so 7 pools to 4.
pub fn pooled_len(n: usize) -> usize {
    n.div_ceil(2)
}

/// Flat input index of the maximum chosen for every output element.
#[derive(Clone, Debug)]
pub struct PoolCache {
    argmax: Vec<usize>,
    in_shape: Vec<usize>,
}

/// 2×2 max pooling with stride 2 in ceil mode. Ties go to the first element
/// of the window in row-major order.
pub fn maxpool2x2_forward(x: &Tensor) -> Result<(Tensor, PoolCache)> {
    let (c, h, w) = x.chw()?;
    if h == 0 || w == 0 {
        return Err(Error::shape("cannot pool an empty feature map"));
    }
    let (oh, ow) = (pooled_len(h), pooled_len(w));
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut argmax = Vec::with_capacity(c * oh * ow);
    let data = x.data();
    for ch in 0..c {
        let base = ch * h * w;
        for oi in 0..oh {
            for oj in 0..ow {
                let mut best_idx = base + 2 * oi * w + 2 * oj;
                let mut best = data[best_idx];
                for i in 2 * oi..(2 * oi + 2).min(h) {
                    for j in 2 * oj..(2 * oj + 2).min(w) {
                        let idx = base + i * w + j;
                        if data[idx] > best {
                            best = data[idx];
                            best_idx = idx;
                        }
                    }
                }
                out.push(best);
                argmax.push(best_idx);
            }
        }
    }
    Ok((
        Tensor::new(vec![c, oh, ow], out)?,
        PoolCache {
            argmax,
            in_shape: x.shape().to_vec(),
        },
    ))
}

pub fn maxpool2x2_backward(upstream: &Tensor, cache: &PoolCache) -> Result<Tensor> {
    if upstream.len() != cache.argmax.len() {
        return Err(Error::shape("pool upstream does not match cached forward"));
    }
    let mut d = Tensor::zeros(&cache.in_shape);
    let dd = d.data_mut();
    for (g, &idx) in upstream.data().iter().zip(&cache.argmax) {
        dd[idx] += g;
    }
    Ok(d)
}
