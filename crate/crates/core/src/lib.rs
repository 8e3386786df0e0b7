//! Periodic steady-state analysis of the `E_k/E_m/1` queue whose arrival and
//! service phase rates vary periodically in time (period one).
//!
//! The level-and-phase distribution is expanded as a series over the
//! characteristic roots of the generating function's denominator, one family of
//! `m` roots per Fourier index `n`. A truncated-state ODE integrator provides the
//! boundary probabilities the series needs and serves as an independent
//! reference. Waiting-time and busy-period distributions are built on the same
//! machinery.
//!
//! ## Examples
//!
//! Each capability has a runnable example under `examples/`:
//!
//! - **`characteristic_roots`** lists the outside roots per index with residuals and modulus brackets
//! - **`periodic_oracle`** runs the truncated chain to its periodic limit
//! - **`mm1_reduction`** recovers the geometric M/M/1 law from a closed-form boundary
//! - **`level_series`** compares series level probabilities with the oracle at several orders
//! - **`error_bounds`** tabulates truncation bounds against measured error, plus weight decay
//! - **`waiting_times`** prints queue-wait and sojourn CDFs by arrival time
//! - **`busy_period`** solves the busy-period equation and checks it against the absorbing chain
//!
//! ```bash
//! cargo run --example level_series
//! cargo run --example characteristic_roots -- examples/configs/mm1.toml
//! cargo run --example busy_period -- mm1
//! ```

pub mod error;
pub mod model;
pub mod quadrature;
pub mod interp;
pub mod bounds;
pub mod busy;
pub mod cli;
pub mod config;
mod chain;
pub mod oracle;
pub mod poisson;
pub mod roots;
pub mod series;
pub mod waiting;

pub use error::{Error, Result};
pub use model::{ergodic_check, ModelSpec, RateFunction};
