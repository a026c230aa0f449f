//! Simulation and limit-theorem checks for multilinear polynomial-form
//! (discrete chaos) processes
//!
//! ```text
//! X(n) = sum_{1 <= i_1 < .. < i_k} a_{i_1} .. a_{i_k} eps_{n-i_1} .. eps_{n-i_k}
//! ```
//!
//! driven by i.i.d. innovations `eps`. The crate covers exact second-order
//! structure ([`covariance`]), fast path simulation on shared noise
//! ([`process`]), normalized partial sums ([`partial_sums`]), Hermite-process
//! approximants ([`hermite`]) and a Monte Carlo harness that checks the
//! short-memory, long-memory and mixed limit theorems ([`harness`]).
//!
//! ```
//! use chaoslim::coefficients::CoefficientSpec;
//! use chaoslim::covariance::gamma_auto;
//! use chaoslim::process::ChaosProcessSpec;
//!
//! let x = ChaosProcessSpec::new("x", CoefficientSpec::explicit(vec![1.0, 1.0]), 2)?;
//! assert_eq!(gamma_auto(&x, 0)?, 1.0);
//! assert_eq!(gamma_auto(&x, 1)?, 0.0);
//! # Ok::<(), chaoslim::Error>(())
//! ```

pub mod coefficients;
pub mod covariance;
pub mod error;
pub mod harness;
pub mod hermite;
pub mod noise;
pub mod partial_sums;
pub mod process;
pub mod quadrature;
pub mod special;
pub mod stats;
pub mod symfun;
pub mod tail;

pub use error::{Error, Result};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    pub mod coefficients {}
    #[doc = include_str!("../../../book/src/symmetric-functions.md")]
    pub mod symmetric_functions {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/covariance.md")]
    pub mod covariance {}
    #[doc = include_str!("../../../book/src/partial-sums.md")]
    pub mod partial_sums {}
    #[doc = include_str!("../../../book/src/hermite.md")]
    pub mod hermite {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
