//! Adjoint sweep, parameter-shift rule and central differences must agree.

mod common;

use common::{central_difference, max_abs_diff};
use hqnet::qgrad::{grad_adjoint, grad_params_parameter_shift, weighted_expectation};
use hqnet::qsim::{CircuitParams, ObservableSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-4;

struct Instance {
    params: CircuitParams,
    obs: ObservableSet,
    v: Vec<f64>,
    weights: Vec<f64>,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let depth = rng.gen_range(1..=3);
    let obs = ObservableSet::canonical(n);
    Instance {
        params: CircuitParams::random(depth, n, &mut rng),
        v: (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        weights: (0..obs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        obs,
    }
}

fn energy(inst: &Instance, params: &CircuitParams, v: &[f64]) -> f64 {
    weighted_expectation(v, params, &inst.obs, &inst.weights).unwrap()
}

fn fd_angles(inst: &Instance) -> (Vec<f64>, Vec<f64>) {
    let p = &inst.params;
    let with = |thetas: &[f64], phis: &[f64]| {
        CircuitParams::from_angles(p.depth(), p.n_qubits(), thetas.to_vec(), phis.to_vec()).unwrap()
    };
    let d_thetas = (0..p.thetas().len())
        .map(|i| central_difference(p.thetas(), i, H, |t| energy(inst, &with(t, p.phis()), &inst.v)))
        .collect();
    let d_phis = (0..p.phis().len())
        .map(|i| central_difference(p.phis(), i, H, |f| energy(inst, &with(p.thetas(), f), &inst.v)))
        .collect();
    (d_thetas, d_phis)
}

#[test]
fn twenty_instances_agree() {
    for seed in 0..20 {
        let inst = instance(seed);
        let adj = grad_adjoint(&inst.v, &inst.params, &inst.obs, &inst.weights).unwrap();
        let shift = grad_params_parameter_shift(&inst.v, &inst.params, &inst.obs, &inst.weights).unwrap();
        let (fd_t, fd_p) = fd_angles(&inst);

        assert!(max_abs_diff(&adj.angles.d_thetas, &shift.d_thetas) <= 1e-9, "seed {seed}");
        assert!(max_abs_diff(&adj.angles.d_phis, &shift.d_phis) <= 1e-9, "seed {seed}");
        for (analytic, fd) in [(&adj.angles.d_thetas, &fd_t), (&adj.angles.d_phis, &fd_p)] {
            assert!(max_abs_diff(analytic, fd) <= 1e-5, "seed {seed}");
        }
        assert!(max_abs_diff(&shift.d_thetas, &fd_t) <= 1e-5);
        assert!(max_abs_diff(&shift.d_phis, &fd_p) <= 1e-5);

        let fd_v: Vec<f64> = (0..inst.v.len())
            .map(|i| central_difference(&inst.v, i, H, |v| energy(&inst, &inst.params, v)))
            .collect();
        assert!(max_abs_diff(&adj.d_input, &fd_v) <= 1e-5, "input gradient, seed {seed}");
    }
}

#[test]
fn input_gradient_is_scale_covariant() {
    // The embedding discards the input's scale, so the gradient at c·v is
    // the gradient at v divided by c (up to the ε offset).
    let inst = instance(99);
    let g1 = grad_adjoint(&inst.v, &inst.params, &inst.obs, &inst.weights).unwrap().d_input;
    let scaled: Vec<f64> = inst.v.iter().map(|x| 4.0 * x).collect();
    let g4 = grad_adjoint(&scaled, &inst.params, &inst.obs, &inst.weights).unwrap().d_input;
    for (a, b) in g1.iter().zip(&g4) {
        assert!((a - 4.0 * b).abs() < 1e-7);
    }
}
