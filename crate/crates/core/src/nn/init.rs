use rand::Rng;

use crate::tensor::Tensor;

/// Half-width `sqrt(6 / (fan_in + fan_out))` of the Xavier-uniform range.
pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Xavier-uniform initialization. Fans follow the usual convention: for
/// `[out, in]` they are `in` and `out`; for `[F, C, K, K]` both are scaled by
/// the receptive field `K·K`.
pub fn xavier_uniform_init(shape: &[usize], rng: &mut impl Rng) -> Tensor {
    let receptive: usize = shape.iter().skip(2).product();
    let (fan_out, fan_in) = match shape {
        [] => (1, 1),
        [n] => (*n, *n),
        [o, i, ..] => (o * receptive, i * receptive),
    };
    let a = xavier_bound(fan_in, fan_out);
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-a..=a)).collect();
    Tensor::new(shape.to_vec(), data).expect("length matches shape")
}
