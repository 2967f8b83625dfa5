//! White-box hyper-parameter search for feedforward classifiers.
//!
//! The central idea: the curvature of the training loss around the weights a
//! configuration reaches after a single epoch predicts how well that
//! configuration generalizes once trained fully. Flat landscapes are
//! preferable, so the search probes many configurations cheaply, scores each
//! by a closed-form strong-convexity proxy evaluated over mini-batches, and
//! spends full training budget only on the lowest-scoring survivors.
//!
//! The crate is organized around that pipeline:
//!
//! - [`linalg`]: dense matrices, Frobenius/spectral norms, a small Jacobi
//!   eigensolver for oracle-scale symmetric problems.
//! - [`data`]: CSV ingestion, stratified splits, standardization, batching,
//!   and synthetic blob generators for desk-scale experiments.
//! - [`nn`]: a from-scratch MLP (ReLU hidden layers, softmax head),
//!   cross-entropy, analytic backprop, Adam, and the epoch training loop.
//! - [`convexity`]: the strong-convexity proxy, its mini-batch supremum, a
//!   finite-difference Hessian oracle, epsilon-ball sharpness, the
//!   mini-batch deviation bound, and loss-landscape slice export.
//! - [`hpo`]: the search space, the probe-then-commit search, and the
//!   random-search baseline.
//! - [`metrics`]: accuracy, ROC AUC (binary and macro), normalized scores,
//!   rank correlation.
//! - [`theoryverify`]: executable checks of the convex-optimization
//!   inequalities the method leans on, run on analytically known quadratics.
//!
//! Everything is deterministic given caller-supplied seeds; no operation
//! reads the wall clock or global RNG state.

pub mod convexity;
pub mod data;
pub mod error;
pub mod hpo;
pub mod linalg;
pub mod metrics;
pub mod nn;
pub mod seed;
pub mod theoryverify;

pub use error::{Error, Result};
