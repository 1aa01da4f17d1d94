//! Statevector simulation of the variational circuit.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis-state
//! index, so for three qubits `|011⟩` is index 3 and has qubit 0 in `|0⟩`.
//!
//! All gate kernels update the amplitude array in place using stride-based
//! pair indexing; nothing here ever builds a dense `2^n × 2^n` matrix.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset added to the L2 norm before dividing during amplitude embedding.
pub const EMBED_EPSILON: f64 = 1e-8;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

/// Pure state of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// The all-zeros basis state `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// The computational basis state with the given index.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::Index { index, limit: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// `Σ |a_i|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Measurement probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::Index {
                index: qubit,
                limit: self.n_qubits,
            });
        }
        Ok(())
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// Applies `RY(theta)` to `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (theta / 2.0).sin_cos();
        let stride = self.stride(qubit);
        for_each_pair(&mut self.amps, stride, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = x0 * c - x1 * s;
            *a1 = x0 * s + x1 * c;
        });
        Ok(())
    }

    /// Applies `RZ(phi) = diag(e^{-iφ/2}, e^{iφ/2})` to `qubit`.
    pub fn apply_rz(&mut self, qubit: usize, phi: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let minus = Complex64::from_polar(1.0, -phi / 2.0);
        let plus = Complex64::from_polar(1.0, phi / 2.0);
        let stride = self.stride(qubit);
        for_each_pair(&mut self.amps, stride, |a0, a1| {
            *a0 *= minus;
            *a1 *= plus;
        });
        Ok(())
    }

    /// Applies `CNOT` with the given control and target.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidGate(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let cmask = self.stride(control);
        let tmask = self.stride(target);
        for i in 0..self.amps.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amps.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// Applies an arbitrary 2×2 matrix (row-major) to `qubit`. Used for
    /// gate derivatives, which are not unitary.
    pub fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = self.stride(qubit);
        for_each_pair(&mut self.amps, stride, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = m[0][0] * x0 + m[0][1] * x1;
            *a1 = m[1][0] * x0 + m[1][1] * x1;
        });
        Ok(())
    }

    /// Applies one variational layer: `RY(θ_i)` then `RZ(φ_i)` on every
    /// qubit, followed by the CNOT ring `(0,1), (1,2), …, (n-1,0)`.
    pub fn apply_layer(&mut self, params: &CircuitParams, layer: usize) -> Result<()> {
        params.check_register(self.n_qubits)?;
        if layer >= params.depth() {
            return Err(Error::Index {
                index: layer,
                limit: params.depth(),
            });
        }
        for q in 0..self.n_qubits {
            self.apply_ry(q, params.theta(layer, q))?;
            self.apply_rz(q, params.phi(layer, q))?;
        }
        for (control, target) in ring_pairs(self.n_qubits) {
            self.apply_cnot(control, target)?;
        }
        Ok(())
    }
}

/// Calls `f(a0, a1)` for every amplitude pair that differs only in the bit
/// selected by `stride`, with `a0` the bit-clear partner.
#[inline]
fn for_each_pair(amps: &mut [Complex64], stride: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "register of {n_qubits} qubits is outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Number of qubits whose state space has dimension `len`.
pub fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::shape(format!(
            "amplitude vector of length {len} is not 2^n for n >= 1"
        )));
    }
    let n = len.trailing_zeros() as usize;
    check_register(n)?;
    Ok(n)
}

/// Entangling pairs of the CNOT ring in application order.
pub fn ring_pairs(n_qubits: usize) -> impl DoubleEndedIterator<Item = (usize, usize)> {
    (0..n_qubits).map(move |i| (i, (i + 1) % n_qubits)).filter(|(c, t)| c != t)
}

/// Rotation angles of a layered `RY`/`RZ` circuit.
///
/// Angles are stored layer-major: entry `layer * n_qubits + qubit`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    depth: usize,
    n_qubits: usize,
    thetas: Vec<f64>,
    phis: Vec<f64>,
}

impl CircuitParams {
    pub fn zeros(depth: usize, n_qubits: usize) -> Self {
        Self {
            depth,
            n_qubits,
            thetas: vec![0.0; depth * n_qubits],
            phis: vec![0.0; depth * n_qubits],
        }
    }

    pub fn from_angles(depth: usize, n_qubits: usize, thetas: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        let want = depth * n_qubits;
        if thetas.len() != want || phis.len() != want {
            return Err(Error::shape(format!(
                "expected {want} thetas and phis, got {} and {}",
                thetas.len(),
                phis.len()
            )));
        }
        if thetas.iter().chain(&phis).any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("circuit angles".into()));
        }
        Ok(Self {
            depth,
            n_qubits,
            thetas,
            phis,
        })
    }

    /// Angles drawn independently from `U(-π, π)`.
    pub fn random(depth: usize, n_qubits: usize, rng: &mut impl Rng) -> Self {
        let mut draw = || (0..depth * n_qubits).map(|_| rng.gen_range(-PI..PI)).collect::<Vec<_>>();
        let thetas = draw();
        let phis = draw();
        Self {
            depth,
            n_qubits,
            thetas,
            phis,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Total number of trainable angles.
    pub fn len(&self) -> usize {
        2 * self.depth * self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, layer: usize, qubit: usize) -> f64 {
        self.thetas[layer * self.n_qubits + qubit]
    }

    pub fn phi(&self, layer: usize, qubit: usize) -> f64 {
        self.phis[layer * self.n_qubits + qubit]
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn thetas_mut(&mut self) -> &mut [f64] {
        &mut self.thetas
    }

    pub fn phis_mut(&mut self) -> &mut [f64] {
        &mut self.phis
    }

    /// Both angle arrays at once, `(thetas, phis)`.
    pub fn angles_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.thetas, &mut self.phis)
    }

    fn check_register(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            return Err(Error::shape(format!(
                "circuit built for {} qubits applied to a {n_qubits}-qubit state",
                self.n_qubits
            )));
        }
        Ok(())
    }
}

/// Z-diagonal observables measured at the end of the circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub singles: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl ObservableSet {
    /// Every `Z_i`, then every `Z_i Z_j` with `i < j` in lexicographic order.
    pub fn canonical(n_qubits: usize) -> Self {
        let singles = (0..n_qubits).collect();
        let pairs = (0..n_qubits)
            .flat_map(|i| (i + 1..n_qubits).map(move |j| (i, j)))
            .collect();
        Self { singles, pairs }
    }

    pub fn len(&self) -> usize {
        self.singles.len() + self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let max = self
            .singles
            .iter()
            .copied()
            .chain(self.pairs.iter().flat_map(|&(a, b)| [a, b]))
            .max();
        if let Some(m) = max {
            if m >= n_qubits {
                return Err(Error::Index {
                    index: m,
                    limit: n_qubits,
                });
            }
        }
        if let Some(&(a, _)) = self.pairs.iter().find(|(a, b)| a == b) {
            return Err(Error::InvalidGate(format!("Z{a}Z{a} is not a pair observable")));
        }
        Ok(())
    }

    /// Diagonal of `Σ_k w_k O_k` in the computational basis.
    pub fn weighted_diagonal(&self, n_qubits: usize, weights: &[f64]) -> Result<Vec<f64>> {
        self.validate(n_qubits)?;
        if weights.len() != self.len() {
            return Err(Error::shape(format!(
                "{} observable weights for {} observables",
                weights.len(),
                self.len()
            )));
        }
        let dim = 1usize << n_qubits;
        let bit = |i: usize, q: usize| (i >> (n_qubits - 1 - q)) & 1;
        let mut diag = vec![0.0; dim];
        for (i, d) in diag.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (&q, &w) in self.singles.iter().zip(weights) {
                acc += if bit(i, q) == 0 { w } else { -w };
            }
            for (&(a, b), &w) in self.pairs.iter().zip(&weights[self.singles.len()..]) {
                acc += if bit(i, a) == bit(i, b) { w } else { -w };
            }
            *d = acc;
        }
        Ok(diag)
    }
}

/// Divides `v` by `‖v‖₂ + ε`. The result is slightly short of unit norm.
pub fn scale_for_embedding(v: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    qubits_for_len(v.len())?;
    let norm = l2_norm(v);
    if !norm.is_finite() {
        return Err(Error::NonFinite("embedding input".into()));
    }
    if norm == 0.0 {
        return Err(Error::Degenerate("cannot embed an all-zero vector".into()));
    }
    Ok(v.iter().map(|x| x / (norm + epsilon)).collect())
}

/// Loads a real vector of length `2^n` into the amplitudes of an `n`-qubit
/// register. After the `ε`-offset division the state is renormalized to
/// exactly unit norm.
pub fn amplitude_embed(v: &[f64], epsilon: f64) -> Result<Statevector> {
    let scaled = scale_for_embedding(v, epsilon)?;
    let norm = l2_norm(&scaled);
    let amps = scaled.iter().map(|x| Complex64::new(x / norm, 0.0)).collect();
    Statevector::from_amplitudes(amps)
}

/// Embeds `v` and applies every layer of `params` in order.
pub fn run_circuit(v: &[f64], params: &CircuitParams) -> Result<Statevector> {
    let mut state = amplitude_embed(v, EMBED_EPSILON)?;
    for layer in 0..params.depth() {
        state.apply_layer(params, layer)?;
    }
    Ok(state)
}

/// Expectation values of every observable, singles first then pairs.
pub fn expectations(state: &Statevector, obs: &ObservableSet) -> Result<Vec<f64>> {
    let n = state.n_qubits();
    obs.validate(n)?;
    let probs = state.probabilities();
    let mask = |q: usize| 1usize << (n - 1 - q);
    let parity_sum = |m: usize| -> f64 {
        probs
            .iter()
            .enumerate()
            .map(|(i, p)| if (i & m).count_ones().is_multiple_of(2) { *p } else { -*p })
            .sum()
    };
    let mut out = Vec::with_capacity(obs.len());
    out.extend(obs.singles.iter().map(|&q| parity_sum(mask(q))));
    out.extend(obs.pairs.iter().map(|&(a, b)| parity_sum(mask(a) | mask(b))));
    Ok(out)
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
