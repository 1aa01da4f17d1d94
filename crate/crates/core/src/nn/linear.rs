use rand::Rng;

use super::gemm::{gemm, MatRef};
use super::init::xavier_uniform_init;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// `z = W·x + b` with `W` stored `[out, in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearLayer {
    pub weights: Tensor,
    pub bias: Tensor,
}

#[derive(Clone, Debug)]
pub struct LinearGrads {
    pub d_input: Vec<f64>,
    pub d_weights: Tensor,
    pub d_bias: Tensor,
}

impl LinearLayer {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        let [out, _] = weights.shape()[..] else {
            return Err(Error::shape(format!("linear weights must be 2-d, got {:?}", weights.shape())));
        };
        if bias.shape() != [out] {
            return Err(Error::shape(format!("bias {:?} for {out} outputs", bias.shape())));
        }
        Ok(Self { weights, bias })
    }

    /// Xavier-uniform weights and zero bias.
    pub fn xavier(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        Self {
            weights: xavier_uniform_init(&[outputs, inputs], rng),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(Error::shape(format!(
                "linear layer expects {} inputs, got {}",
                self.inputs(),
                x.len()
            )));
        }
        let mut z = self.bias.data().to_vec();
        gemm(
            MatRef::new(self.weights.data(), self.outputs(), self.inputs()),
            MatRef::new(x, x.len(), 1),
            1.0,
            &mut z,
        );
        Ok(z)
    }

    /// Returns `(Wᵀ·g, g ⊗ x, g)`.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<LinearGrads> {
        if x.len() != self.inputs() || upstream.len() != self.outputs() {
            return Err(Error::shape("linear backward: input or upstream has the wrong length"));
        }
        let mut d_input = vec![0.0; self.inputs()];
        gemm(
            MatRef::new(self.weights.data(), self.outputs(), self.inputs()).t(),
            MatRef::new(upstream, upstream.len(), 1),
            0.0,
            &mut d_input,
        );
        let mut d_weights = Vec::with_capacity(self.weights.len());
        for g in upstream {
            d_weights.extend(x.iter().map(|xi| g * xi));
        }
        Ok(LinearGrads {
            d_input,
            d_weights: Tensor::new(self.weights.shape().to_vec(), d_weights)?,
            d_bias: Tensor::new(vec![self.outputs()], upstream.to_vec())?,
        })
    }
}
