//! Exact-to-tolerance computation of the transition kernel and semigroup of
//! the bilateral birth-death process on the geometric grid R_q = { q^n },
//! via q-Bessel Fourier analysis, with an independent continuous-time Markov
//! chain simulator for stochastic cross-validation.
//!
//! Module layout:
//! - [`qcore`]: parameters, grid windows, q-shifted factorials, Jackson
//!   integrals, inner products and norms
//! - [`qbessel`]: the normalized q-Bessel function j_nu(x, q^2), its decay
//!   estimate, the discrete delta, and a certified grid cache
//! - [`qfourier`]: the q-Bessel Fourier transform as a kernel matrix,
//!   translation, positivity probe, and q-convolution
//! - [`bdkernel`]: generator, heat kernel, transition probabilities,
//!   semigroup, and the q-heat equation residual
//! - [`ctmcsim`]: Gillespie simulation of the chain and empirical-vs-analytic
//!   comparison
//! - [`verify`]: the defect/tolerance check suite shared by the CLI and the
//!   acceptance tests
//! - [`config`]: run configuration, config-file parsing, artifact headers
//!
//! Quick start: transition probabilities from state q^0 at time t = 1.
//!
//! ```
//! use qbd_core::bdkernel::transition_row;
//! use qbd_core::qfourier::KernelMatrix;
//! use qbd_core::{GridWindow, QParams};
//!
//! let params = QParams::new(0.5, 1.0, 192, 1e-40)?;
//! let matrix = KernelMatrix::build(GridWindow::new(-8, 32)?, &params)?;
//! let row = transition_row(0, 1.0, &matrix)?;
//! assert!(row.defect().to_f64() < 1e-18);
//! let mass: f64 = row.probs().iter().map(|p| p.to_f64()).sum();
//! assert!((mass - 1.0).abs() < 1e-12);
//! # Ok::<(), qbd_core::Error>(())
//! ```

pub mod bdkernel;
pub mod config;
pub mod ctmcsim;
pub mod decimal;
pub mod error;
pub mod qbessel;
pub mod qcore;
pub mod qfourier;
pub mod verify;

pub use error::{Error, Result};
pub use qcore::{GridFunction, GridWindow, QParams};
