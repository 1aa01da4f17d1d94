use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub fn relu_forward(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Passes `upstream` where the forward input was strictly positive.
pub fn relu_backward(upstream: &Tensor, input: &Tensor) -> Result<Tensor> {
    if upstream.shape() != input.shape() {
        return Err(Error::shape("relu upstream and input shapes differ"));
    }
    let data = upstream
        .data()
        .iter()
        .zip(input.data())
        .map(|(g, x)| if *x > 0.0 { *g } else { 0.0 })
        .collect();
    Tensor::new(upstream.shape().to_vec(), data)
}

/// Per-element scale applied by inverted dropout: `0` for dropped entries,
/// `1 / (1 - p)` for survivors.
#[derive(Clone, Debug)]
pub struct DropoutMask(Vec<f64>);

impl DropoutMask {
    pub fn scales(&self) -> &[f64] {
        &self.0
    }
}

/// Inverted dropout. Returns `None` for the mask when the call is a no-op
/// (evaluation mode or `p == 0`).
pub fn dropout_forward(
    x: &Tensor,
    p: f64,
    training: bool,
    rng: &mut impl Rng,
) -> Result<(Tensor, Option<DropoutMask>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Config(format!("dropout rate {p} outside [0, 1)")));
    }
    if !training || p == 0.0 {
        return Ok((x.clone(), None));
    }
    let keep = 1.0 / (1.0 - p);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
        .collect();
    let data = x.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
    Ok((Tensor::new(x.shape().to_vec(), data)?, Some(DropoutMask(mask))))
}

pub fn dropout_backward(upstream: &Tensor, mask: Option<&DropoutMask>) -> Result<Tensor> {
    let Some(mask) = mask else {
        return Ok(upstream.clone());
    };
    if mask.0.len() != upstream.len() {
        return Err(Error::shape("dropout mask does not match upstream"));
    }
    let data = upstream.data().iter().zip(&mask.0).map(|(g, m)| g * m).collect();
    Tensor::new(upstream.shape().to_vec(), data)
}
