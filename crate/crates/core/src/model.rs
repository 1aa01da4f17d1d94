//! The hybrid classifier: four convolutional blocks, a linear bridge into
//! the amplitude-embedded register, the variational circuit, and a linear
//! head over the measured expectations.
//!
//! Parameters live in a fixed, flat namespace so optimizer state and
//! checkpoints can address them by offset:
//!
//! ```text
//! conv1.weight conv1.bias … conv4.weight conv4.bias
//! bridge.weight bridge.bias
//! circuit.thetas circuit.phis        (quantum mode only)
//! head.weight head.bias
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    dropout_backward, dropout_forward, maxpool2x2_backward, maxpool2x2_forward, pooled_len,
    relu_backward, relu_forward, ConvCache, ConvLayer, DropoutMask, LinearLayer, PoolCache,
};
use crate::qgrad::CircuitRun;
use crate::qsim::{CircuitParams, ObservableSet};
use crate::tensor::Tensor;

pub const N_CLASSES: usize = 10;
pub const IMAGE_SIDE: usize = 28;
pub const CONV_FILTERS: [usize; 4] = [32, 64, 128, 128];
pub const KERNEL: usize = 3;

/// Whether the bridge output goes through the circuit or straight into a
/// linear head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadMode {
    Quantum,
    /// Ablation: the circuit and its observables are replaced by one linear
    /// layer from the bridge output to the logits.
    #[serde(alias = "ablation")]
    Classical,
}

impl std::fmt::Display for HeadMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HeadMode::Quantum => "quantum",
            HeadMode::Classical => "classical",
        })
    }
}

impl std::str::FromStr for HeadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(HeadMode::Quantum),
            "classical" | "ablation" => Ok(HeadMode::Classical),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub mode: HeadMode,
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_qubits: 10,
            depth: 5,
            mode: HeadMode::Quantum,
            dropout: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=crate::qsim::MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::Config(format!("n_qubits {} unsupported", self.n_qubits)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }

    /// Length of the amplitude-embedded vector, `2^n_qubits`.
    pub fn register_dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `n + n(n-1)/2` Z and ZZ observables.
    pub fn n_observables(&self) -> usize {
        self.n_qubits + self.n_qubits * (self.n_qubits - 1) / 2
    }

    /// Flattened CNN output size.
    pub fn feature_dim(&self) -> usize {
        let mut side = IMAGE_SIDE;
        for _ in 0..3 {
            side = pooled_len(side);
        }
        CONV_FILTERS[3] * side * side
    }

    fn head_inputs(&self) -> usize {
        match self.mode {
            HeadMode::Quantum => self.n_observables(),
            HeadMode::Classical => self.register_dim(),
        }
    }
}

/// One named tensor in the flat parameter namespace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl ParamSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub component: String,
    pub count: usize,
}

/// Trainable parameter counts per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub rows: Vec<CensusRow>,
    pub total: usize,
}

impl Census {
    /// Counts derived from the configuration alone, without building weights.
    pub fn for_config(cfg: &ModelConfig) -> Self {
        let mut channels = 1;
        let mut extractor = 0;
        for f in CONV_FILTERS {
            extractor += f * (channels * KERNEL * KERNEL + 1);
            channels = f;
        }
        extractor += cfg.register_dim() * cfg.feature_dim() + cfg.register_dim();
        let head = N_CLASSES * cfg.head_inputs() + N_CLASSES;
        let rows = match cfg.mode {
            HeadMode::Quantum => vec![
                row("Classical Feature Extractor", extractor),
                row("Quantum Circuit", 2 * cfg.depth * cfg.n_qubits),
                row("Post-Processing Layer", head),
            ],
            HeadMode::Classical => vec![
                row("Classical Feature Extractor", extractor),
                row("Classical Head", head),
            ],
        };
        Self::from_rows(rows)
    }

    fn from_rows(rows: Vec<CensusRow>) -> Self {
        let total = rows.iter().map(|r| r.count).sum();
        Self { rows, total }
    }

    pub fn get(&self, component: &str) -> Option<usize> {
        self.rows.iter().find(|r| r.component == component).map(|r| r.count)
    }
}

fn row(component: &str, count: usize) -> CensusRow {
    CensusRow {
        component: component.to_string(),
        count,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridModel {
    config: ModelConfig,
    convs: Vec<ConvLayer>,
    bridge: LinearLayer,
    circuit: CircuitParams,
    head: LinearLayer,
    observables: ObservableSet,
}

#[derive(Debug)]
struct BlockCache {
    conv: ConvCache,
    pre_activation: Tensor,
    dropout: Option<DropoutMask>,
    pool: Option<PoolCache>,
}

/// Intermediates of one forward pass, consumed by [`HybridModel::backward`].
#[derive(Debug)]
pub struct ForwardCache {
    blocks: Vec<BlockCache>,
    block_shapes: Vec<Vec<usize>>,
    features: Vec<f64>,
    bridge_out: Vec<f64>,
    circuit: Option<CircuitRun>,
    head_input: Vec<f64>,
    logits: Vec<f64>,
}

impl ForwardCache {
    /// Shapes after each stage: the four conv blocks, the flattened
    /// features, the bridge, the quantum features (quantum mode), and the
    /// logits.
    pub fn stage_shapes(&self) -> Vec<Vec<usize>> {
        let mut out = self.block_shapes.clone();
        out.push(vec![self.features.len()]);
        out.push(vec![self.bridge_out.len()]);
        if self.circuit.is_some() {
            out.push(vec![self.head_input.len()]);
        }
        out.push(vec![self.logits.len()]);
        out
    }

    /// Measured expectations, or the bridge output in classical mode.
    pub fn head_input(&self) -> &[f64] {
        &self.head_input
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }
}

impl HybridModel {
    /// Xavier-uniform weights with zero biases; circuit angles `U(-π, π)`.
    pub fn new(config: ModelConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let mut channels = 1;
        let convs = CONV_FILTERS
            .iter()
            .map(|&f| {
                let layer = ConvLayer::xavier(channels, f, KERNEL, rng);
                channels = f;
                layer
            })
            .collect();
        let bridge = LinearLayer::xavier(config.feature_dim(), config.register_dim(), rng);
        let circuit = match config.mode {
            HeadMode::Quantum => CircuitParams::random(config.depth, config.n_qubits, rng),
            HeadMode::Classical => CircuitParams::zeros(0, config.n_qubits),
        };
        let head = LinearLayer::xavier(config.head_inputs(), N_CLASSES, rng);
        Ok(Self {
            config,
            convs,
            bridge,
            circuit,
            head,
            observables: ObservableSet::canonical(config.n_qubits),
        })
    }

    /// Replaces the circuit and its head with a single linear layer from the
    /// bridge output to the logits. The feature extractor is kept as is.
    pub fn into_ablation(mut self, rng: &mut impl Rng) -> Self {
        if self.config.mode == HeadMode::Classical {
            return self;
        }
        self.config.mode = HeadMode::Classical;
        self.circuit = CircuitParams::zeros(0, self.config.n_qubits);
        self.head = LinearLayer::xavier(self.config.head_inputs(), N_CLASSES, rng);
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Changes the dropout rate used by training-mode forward passes.
    pub fn set_dropout(&mut self, p: f64) -> Result<()> {
        let mut cfg = self.config;
        cfg.dropout = p;
        cfg.validate()?;
        self.config = cfg;
        Ok(())
    }

    pub fn circuit(&self) -> &CircuitParams {
        &self.circuit
    }

    pub fn head(&self) -> &LinearLayer {
        &self.head
    }

    pub fn observables(&self) -> &ObservableSet {
        &self.observables
    }

    pub fn layout(&self) -> Vec<ParamSpec> {
        let mut specs = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, shape: &[usize]| {
            specs.push(ParamSpec {
                name,
                shape: shape.to_vec(),
                offset,
            });
            offset += shape.iter().product::<usize>();
        };
        for (i, c) in self.convs.iter().enumerate() {
            push(format!("conv{}.weight", i + 1), c.weights.shape());
            push(format!("conv{}.bias", i + 1), c.bias.shape());
        }
        push("bridge.weight".into(), self.bridge.weights.shape());
        push("bridge.bias".into(), self.bridge.bias.shape());
        if self.config.mode == HeadMode::Quantum {
            let shape = [self.circuit.depth(), self.circuit.n_qubits()];
            push("circuit.thetas".into(), &shape);
            push("circuit.phis".into(), &shape);
        }
        push("head.weight".into(), self.head.weights.shape());
        push("head.bias".into(), self.head.bias.shape());
        specs
    }

    /// Parameter tensors in namespace order.
    pub fn params(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for c in &self.convs {
            out.push(c.weights.data());
            out.push(c.bias.data());
        }
        out.push(self.bridge.weights.data());
        out.push(self.bridge.bias.data());
        if self.config.mode == HeadMode::Quantum {
            out.push(self.circuit.thetas());
            out.push(self.circuit.phis());
        }
        out.push(self.head.weights.data());
        out.push(self.head.bias.data());
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for c in &mut self.convs {
            out.push(c.weights.data_mut());
            out.push(c.bias.data_mut());
        }
        out.push(self.bridge.weights.data_mut());
        out.push(self.bridge.bias.data_mut());
        if self.config.mode == HeadMode::Quantum {
            let (thetas, phis) = self.circuit.angles_mut();
            out.push(thetas);
            out.push(phis);
        }
        out.push(self.head.weights.data_mut());
        out.push(self.head.bias.data_mut());
        out
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.params().concat()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::shape(format!(
                "{} values for {} parameters",
                flat.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        for p in self.params_mut() {
            p.copy_from_slice(&flat[offset..offset + p.len()]);
            offset += p.len();
        }
        Ok(())
    }

    /// Per-component counts taken from the actual tensors.
    pub fn param_census(&self) -> Census {
        let extractor = self.convs.iter().map(ConvLayer::param_count).sum::<usize>() + self.bridge.param_count();
        let rows = match self.config.mode {
            HeadMode::Quantum => vec![
                row("Classical Feature Extractor", extractor),
                row("Quantum Circuit", self.circuit.len()),
                row("Post-Processing Layer", self.head.param_count()),
            ],
            HeadMode::Classical => vec![
                row("Classical Feature Extractor", extractor),
                row("Classical Head", self.head.param_count()),
            ],
        };
        Census::from_rows(rows)
    }

    /// Full forward pass. Dropout is active only when `training` is set; the
    /// rng is not touched otherwise.
    pub fn forward(&self, x: &Tensor, training: bool, rng: &mut impl Rng) -> Result<ForwardCache> {
        if x.shape() != [1, IMAGE_SIDE, IMAGE_SIDE] {
            return Err(Error::shape(format!(
                "model input must be [1, {IMAGE_SIDE}, {IMAGE_SIDE}], got {:?}",
                x.shape()
            )));
        }
        let mut blocks = Vec::with_capacity(self.convs.len());
        let mut block_shapes = Vec::with_capacity(self.convs.len());
        let mut act = x.clone();
        for (i, conv) in self.convs.iter().enumerate() {
            let (pre, conv_cache) = conv.forward(&act)?;
            let relu = relu_forward(&pre);
            let (dropped, dropout) = dropout_forward(&relu, self.config.dropout, training, rng)?;
            // the last block skips pooling
            let (out, pool) = if i + 1 < self.convs.len() {
                let (p, c) = maxpool2x2_forward(&dropped)?;
                (p, Some(c))
            } else {
                (dropped, None)
            };
            block_shapes.push(out.shape().to_vec());
            blocks.push(BlockCache {
                conv: conv_cache,
                pre_activation: pre,
                dropout,
                pool,
            });
            act = out;
        }
        let features = act.into_data();
        let bridge_out = self.bridge.forward(&features)?;
        let (circuit, head_input) = match self.config.mode {
            HeadMode::Quantum => {
                let run = CircuitRun::new(&bridge_out, &self.circuit)?;
                let q = run.expectations(&self.observables)?;
                (Some(run), q)
            }
            HeadMode::Classical => (None, bridge_out.clone()),
        };
        let logits = self.head.forward(&head_input)?;
        if logits.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("logits".into()));
        }
        Ok(ForwardCache {
            blocks,
            block_shapes,
            features,
            bridge_out,
            circuit,
            head_input,
            logits,
        })
    }

    /// Evaluation-mode logits.
    pub fn predict(&self, x: &Tensor) -> Result<Vec<f64>> {
        // Dropout is off in evaluation mode, so this rng is never drawn from.
        let mut unused = rand::rngs::mock::StepRng::new(0, 0);
        Ok(self.forward(x, false, &mut unused)?.logits)
    }

    /// Accumulates `∂(d_logits · logits)/∂θ` into `grad`, which is laid out
    /// per [`HybridModel::layout`].
    pub fn backward(&self, cache: &ForwardCache, d_logits: &[f64], grad: &mut [f64]) -> Result<()> {
        if d_logits.len() != N_CLASSES {
            return Err(Error::shape(format!("{} logit gradients", d_logits.len())));
        }
        if grad.len() != self.num_params() {
            return Err(Error::shape(format!(
                "gradient buffer of {} for {} parameters",
                grad.len(),
                self.num_params()
            )));
        }
        if cache.blocks.len() != self.convs.len() || cache.circuit.is_some() != (self.config.mode == HeadMode::Quantum) {
            return Err(Error::shape("forward cache was produced by a different model"));
        }
        let layout = self.layout();
        let mut slot = layout.len();
        let mut next = |grad: &mut [f64], values: &[f64]| -> Result<()> {
            slot -= 1;
            let spec = &layout[slot];
            if spec.len() != values.len() {
                return Err(Error::shape(format!("gradient for {} has the wrong size", spec.name)));
            }
            for (g, v) in grad[spec.range()].iter_mut().zip(values) {
                *g += v;
            }
            Ok(())
        };

        let head = self.head.backward(&cache.head_input, d_logits)?;
        next(grad, head.d_bias.data())?;
        next(grad, head.d_weights.data())?;

        let d_bridge_out = match &cache.circuit {
            Some(run) => {
                let q = run.backward(&self.circuit, &self.observables, &head.d_input)?;
                next(grad, &q.angles.d_phis)?;
                next(grad, &q.angles.d_thetas)?;
                q.d_input
            }
            None => head.d_input,
        };

        let bridge = self.bridge.backward(&cache.features, &d_bridge_out)?;
        next(grad, bridge.d_bias.data())?;
        next(grad, bridge.d_weights.data())?;

        let last_shape = cache.block_shapes.last().expect("four blocks").clone();
        let mut upstream = Tensor::new(last_shape, bridge.d_input)?;
        for (conv, block) in self.convs.iter().zip(&cache.blocks).rev() {
            if let Some(pool) = &block.pool {
                upstream = maxpool2x2_backward(&upstream, pool)?;
            }
            upstream = dropout_backward(&upstream, block.dropout.as_ref())?;
            upstream = relu_backward(&upstream, &block.pre_activation)?;
            let g = conv.backward(&block.conv, &upstream)?;
            next(grad, g.d_bias.data())?;
            next(grad, g.d_weights.data())?;
            upstream = g.d_input;
        }
        Ok(())
    }

    /// Rebuilds a model from a configuration and flat parameter values.
    pub fn from_flat(config: ModelConfig, flat: &[f64]) -> Result<Self> {
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let mut model = Self::new(config, &mut rng)?;
        model.set_flat_params(flat)?;
        if model.flat_params().iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(model)
    }
}
