//! Gradients of weighted observable expectations through the circuit.
//!
//! The scalar being differentiated is `E = Σ_k w_k ⟨O_k⟩`, where the weights
//! are the upstream gradient arriving from the classification head. All the
//! observables are Z-diagonal, so the weighted sum collapses into a single
//! diagonal operator before the reverse sweep.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{
    self, amplitude_embed, expectations, ring_pairs, CircuitParams, ObservableSet, Statevector,
    EMBED_EPSILON,
};

/// Gradients with respect to the rotation angles, laid out like
/// [`CircuitParams`] (layer-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleGradients {
    pub d_thetas: Vec<f64>,
    pub d_phis: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumGradients {
    pub angles: AngleGradients,
    /// Gradient with respect to the un-normalized input vector.
    pub d_input: Vec<f64>,
}

/// A forward pass kept around for the reverse sweep.
#[derive(Clone, Debug)]
pub struct CircuitRun {
    input: Vec<f64>,
    input_norm: f64,
    state: Statevector,
}

impl CircuitRun {
    pub fn new(v: &[f64], params: &CircuitParams) -> Result<Self> {
        let state = qsim::run_circuit(v, params)?;
        Ok(Self {
            input: v.to_vec(),
            input_norm: qsim::l2_norm(v),
            state,
        })
    }

    /// Final state after every layer.
    pub fn state(&self) -> &Statevector {
        &self.state
    }

    pub fn expectations(&self, obs: &ObservableSet) -> Result<Vec<f64>> {
        expectations(&self.state, obs)
    }

    /// Reverse sweep: one pass over the gates in reverse order yields every
    /// angle gradient plus the gradient with respect to the input vector.
    pub fn backward(
        &self,
        params: &CircuitParams,
        obs: &ObservableSet,
        obs_weights: &[f64],
    ) -> Result<QuantumGradients> {
        let n = self.state.n_qubits();
        if params.n_qubits() != n {
            return Err(Error::shape(format!(
                "circuit has {} qubits, state has {n}",
                params.n_qubits()
            )));
        }
        let diag = obs.weighted_diagonal(n, obs_weights)?;

        let mut phi = self.state.clone();
        let mut lambda = self.state.clone();
        for (a, d) in lambda.amps_mut().iter_mut().zip(&diag) {
            *a *= *d;
        }

        let mut d_thetas = vec![0.0; params.depth() * n];
        let mut d_phis = vec![0.0; params.depth() * n];
        let mut mu = phi.clone();

        for layer in (0..params.depth()).rev() {
            for (c, t) in ring_pairs(n).rev() {
                phi.apply_cnot(c, t)?;
                lambda.apply_cnot(c, t)?;
            }
            for q in (0..n).rev() {
                let idx = layer * n + q;

                let angle = params.phi(layer, q);
                phi.apply_rz(q, -angle)?;
                mu.amps_mut().copy_from_slice(phi.amps());
                mu.apply_single(q, rz_derivative(angle))?;
                d_phis[idx] = 2.0 * lambda.inner(&mu).re;
                lambda.apply_rz(q, -angle)?;

                let angle = params.theta(layer, q);
                phi.apply_ry(q, -angle)?;
                mu.amps_mut().copy_from_slice(phi.amps());
                mu.apply_single(q, ry_derivative(angle))?;
                d_thetas[idx] = 2.0 * lambda.inner(&mu).re;
                lambda.apply_ry(q, -angle)?;
            }
        }

        // lambda now holds U†·O·U·a for the embedded vector a, so dE/da = 2·Re(lambda).
        let grad_embedded: Vec<f64> = lambda.amps().iter().map(|a| 2.0 * a.re).collect();
        let d_input = embed_jacobian_transpose(&self.input, self.input_norm, &grad_embedded);

        Ok(QuantumGradients {
            angles: AngleGradients { d_thetas, d_phis },
            d_input,
        })
    }
}

/// Applies the transpose of `∂(v / (‖v‖ + ε)) / ∂v` to `g`.
fn embed_jacobian_transpose(v: &[f64], norm: f64, g: &[f64]) -> Vec<f64> {
    let denom = norm + EMBED_EPSILON;
    let vg: f64 = v.iter().zip(g).map(|(a, b)| a * b).sum();
    let radial = vg / (norm * denom * denom);
    v.iter().zip(g).map(|(vi, gi)| gi / denom - vi * radial).collect()
}

fn ry_derivative(theta: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    let r = |x: f64| Complex64::new(0.5 * x, 0.0);
    [[r(-s), r(-c)], [r(c), r(-s)]]
}

fn rz_derivative(phi: f64) -> [[Complex64; 2]; 2] {
    let half_i = Complex64::new(0.0, 0.5);
    let zero = Complex64::new(0.0, 0.0);
    [
        [-half_i * Complex64::from_polar(1.0, -phi / 2.0), zero],
        [zero, half_i * Complex64::from_polar(1.0, phi / 2.0)],
    ]
}

/// Adjoint-method gradients of `Σ_k w_k ⟨O_k⟩`.
pub fn grad_adjoint(
    v: &[f64],
    params: &CircuitParams,
    obs: &ObservableSet,
    obs_weights: &[f64],
) -> Result<QuantumGradients> {
    CircuitRun::new(v, params)?.backward(params, obs, obs_weights)
}

/// `Σ_k w_k ⟨O_k⟩` after running the full circuit on `v`.
pub fn weighted_expectation(
    v: &[f64],
    params: &CircuitParams,
    obs: &ObservableSet,
    obs_weights: &[f64],
) -> Result<f64> {
    if obs_weights.len() != obs.len() {
        return Err(Error::shape(format!(
            "{} observable weights for {} observables",
            obs_weights.len(),
            obs.len()
        )));
    }
    let e = expectations(&qsim::run_circuit(v, params)?, obs)?;
    Ok(e.iter().zip(obs_weights).map(|(a, b)| a * b).sum())
}

/// Angle gradients via the two-term shift rule, re-simulating the circuit
/// twice per angle. Slow; exists to cross-check [`grad_adjoint`].
pub fn grad_params_parameter_shift(
    v: &[f64],
    params: &CircuitParams,
    obs: &ObservableSet,
    obs_weights: &[f64],
) -> Result<AngleGradients> {
    // Validate once up front so shape errors surface even for depth 0.
    amplitude_embed(v, EMBED_EPSILON)?;
    weighted_expectation(v, params, obs, obs_weights)?;

    let mut shifted = params.clone();
    let mut shift = |which: fn(&mut CircuitParams) -> &mut [f64], i: usize| -> Result<f64> {
        let original = which(&mut shifted)[i];
        which(&mut shifted)[i] = original + FRAC_PI_2;
        let plus = weighted_expectation(v, &shifted, obs, obs_weights)?;
        which(&mut shifted)[i] = original - FRAC_PI_2;
        let minus = weighted_expectation(v, &shifted, obs, obs_weights)?;
        which(&mut shifted)[i] = original;
        Ok(0.5 * (plus - minus))
    };

    let count = params.thetas().len();
    let d_thetas = (0..count)
        .map(|i| shift(CircuitParams::thetas_mut, i))
        .collect::<Result<Vec<_>>>()?;
    let d_phis = (0..count)
        .map(|i| shift(CircuitParams::phis_mut, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleGradients { d_thetas, d_phis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_weights_give_zero_gradients() {
        let params = CircuitParams::from_angles(1, 2, vec![0.3, -1.1], vec![0.7, 2.0]).unwrap();
        let obs = ObservableSet::canonical(2);
        let v = [0.5, -0.2, 0.1, 0.9];
        let g = grad_adjoint(&v, &params, &obs, &[0.0; 3]).unwrap();
        assert!(g.angles.d_thetas.iter().chain(&g.angles.d_phis).chain(&g.d_input).all(|x| *x == 0.0));
        let s = grad_params_parameter_shift(&v, &params, &obs, &[0.0; 3]).unwrap();
        assert!(s.d_thetas.iter().chain(&s.d_phis).all(|x| *x == 0.0));
    }

    #[test]
    fn single_qubit_ry_closed_form() {
        // E(θ) = ⟨Z⟩ after RY(θ)|0⟩ = cos θ, so dE/dθ = -sin θ.
        let obs = ObservableSet::canonical(1);
        let theta = std::f64::consts::FRAC_PI_2;
        let params = CircuitParams::from_angles(1, 1, vec![theta], vec![0.0]).unwrap();
        let v = [1.0, 0.0];
        let shift = grad_params_parameter_shift(&v, &params, &obs, &[1.0]).unwrap();
        assert_abs_diff_eq!(shift.d_thetas[0], -1.0, epsilon = 1e-14);
        let adj = grad_adjoint(&v, &params, &obs, &[1.0]).unwrap();
        assert_abs_diff_eq!(adj.angles.d_thetas[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(adj.angles.d_phis[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn basis_input_radial_derivative_vanishes() {
        let obs = ObservableSet::canonical(2);
        let params = CircuitParams::zeros(1, 2);
        let v = [1.0, 0.0, 0.0, 0.0];
        let g = grad_adjoint(&v, &params, &obs, &[1.0, 0.0, 0.0]).unwrap();
        let radial: f64 = g.d_input.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!(radial.abs() < 1e-7, "radial derivative {radial}");
    }

    #[test]
    fn shape_errors() {
        let obs = ObservableSet::canonical(2);
        let params = CircuitParams::zeros(1, 2);
        let v = [1.0, 0.0, 0.0, 0.0];
        assert!(matches!(grad_adjoint(&v, &params, &obs, &[1.0]), Err(Error::Shape(_))));
        assert!(matches!(
            grad_params_parameter_shift(&v, &params, &obs, &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            grad_adjoint(&[1.0; 8], &params, &obs, &[1.0; 3]),
            Err(Error::Shape(_))
        ));
    }
}
