//! Hybrid convolutional / variational-quantum digit classifier.
//!
//! A four-block CNN compresses a 28×28 grayscale image to 2048 features, a
//! linear bridge maps them to `2^n` values, and those are amplitude-embedded
//! into an `n`-qubit register. A layered RY/RZ + CNOT-ring circuit runs on
//! an exact statevector simulator; the `n` single-qubit Z and `n(n-1)/2`
//! pairwise ZZ expectations feed a linear head over ten classes.
//!
//! Everything is differentiated by hand: the convolutional stack by
//! ordinary backpropagation and the circuit by an adjoint reverse sweep,
//! with a parameter-shift implementation kept as a cross-check.
//!
//! ```
//! use hqnet::qsim::{expectations, run_circuit, CircuitParams, ObservableSet};
//!
//! let params = CircuitParams::zeros(2, 3);
//! let state = run_circuit(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &params)?;
//! let z = expectations(&state, &ObservableSet::canonical(3))?;
//! assert_eq!(z.len(), 6);
//! assert!(z.iter().all(|e| (e - 1.0).abs() < 1e-12));
//! # Ok::<(), hqnet::Error>(())
//! ```

pub mod checkpoint;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod optim;
pub mod qgrad;
pub mod qsim;
pub mod seeding;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use model::{Census, HeadMode, HybridModel, ModelConfig};
pub use tensor::Tensor;
pub use train::{train, TrainConfig, TrainOutcome};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/gradients.md")]
    mod gradients {}
    #[doc = include_str!("../../../book/src/layers.md")]
    mod layers {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
