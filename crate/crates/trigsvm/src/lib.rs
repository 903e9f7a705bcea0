//! Support-vector toolkit built around the trigonometric kernel
//! `K(x, x') = sin(pi / (2 + sigma * ||x - x'||^2))`.
//!
//! The crate provides the kernel family (polynomial, gaussian, rbf, sigmoid,
//! trig, and a trig/gaussian mixture), exact-symmetry Gram construction,
//! two independent positive-semidefiniteness audits (leading principal
//! minors and a symmetric eigensolver) with a jitter fallback, an SMO
//! solver shared by C-SVC classification and epsilon-SVR regression,
//! grid-search model selection with the compact/sparse sigma heuristic,
//! and deterministic data utilities (CSV ingestion, z-score scaling,
//! synthetic generators, JSON model persistence).
//!
//! Everything is `f64`, single-process, and deterministic: seeded runs
//! reproduce byte-identical artifacts. With the default `parallel` feature
//! the Gram rows, PSD survey trials, grid-search cells, and distance
//! statistics run on rayon; disabling the feature falls back to equivalent
//! sequential loops with identical output.

pub mod audit;
pub mod data;
pub mod error;
mod exec;
pub mod kernel;
pub mod select;
mod smo;
pub mod svc;
pub mod svr;

pub use error::{Error, Result};
pub use kernel::{GramMatrix, KernelSpec};
pub use svc::{SolverConfig, SvcModel};
pub use svr::SvrModel;
