//! Sample paths of `X(n) = sum_{i_1 < .. < i_k} a_{i_1}..a_{i_k} eps_{n-i_1}..eps_{n-i_k}`.
//!
//! Each `X(n)` is the order-`k` elementary symmetric function of
//! `w_i = a_i eps_{n-i}`. Two engines evaluate it: a per-step recurrence
//! ([`Engine::Direct`]) and FFT power sums fed through Newton's identities
//! ([`Engine::Spectral`]). For regularly varying coefficients the noise
//! before the simulated window can be folded in through a Gaussian
//! far-field closure ([`History::Closure`]).

mod closure;
mod engine;
mod kernel;
mod paths;
mod vector;

use serde::{Deserialize, Serialize};

use crate::coefficients::{classify_memory, CoefficientSpec, Coefficients, MemoryRegime};
use crate::error::{Error, Result};
use crate::noise::NoiseWindow;

pub use kernel::{evaluate_polynomial_form, DiscreteKernel, DEFAULT_SUPPORT_CAP};
pub use paths::PathMatrix;
pub use vector::{simulate_vector, Replication, VectorSimulator};

/// One component: coefficients plus chaos order.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosProcessSpec {
    label: String,
    coeffs: CoefficientSpec,
    k: usize,
    regime: MemoryRegime,
}

impl ChaosProcessSpec {
    pub fn new(label: impl Into<String>, coeffs: CoefficientSpec, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("order", "chaos order must be at least 1"));
        }
        coeffs.validate()?;
        let regime = match coeffs.memory_d() {
            Some(d) => classify_memory(d, k)?,
            None => MemoryRegime::finite_support(k),
        };
        Ok(ChaosProcessSpec { label: label.into(), coeffs, k, regime })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeffs(&self) -> &CoefficientSpec {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn regime(&self) -> MemoryRegime {
        self.regime
    }

    /// Same component with working length `m`.
    pub fn with_truncation(&self, m: usize) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs.truncation = m;
        Self::new(self.label.clone(), coeffs, self.k)
    }

    pub fn filter(&self) -> Result<ChaosFilter> {
        Ok(ChaosFilter { k: self.k, coeffs: self.coeffs.build()? })
    }
}

/// Evaluated coefficients and order: everything the engines need.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosFilter {
    pub k: usize,
    pub coeffs: Coefficients,
}

impl ChaosFilter {
    pub fn new(k: usize, coeffs: Coefficients) -> Self {
        ChaosFilter { k, coeffs }
    }

    /// Working length `M`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn has_tail(&self) -> bool {
        self.coeffs.tail().is_some()
    }

    /// The filter as simulated under `history`.
    pub fn effective(&self, history: History) -> ChaosFilter {
        match history {
            History::Window => ChaosFilter { k: self.k, coeffs: self.coeffs.truncated() },
            History::Closure => self.clone(),
        }
    }
}

/// Evaluation strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Elementary symmetric recurrence per time step, `O(N M k)`.
    Direct,
    /// FFT power sums and Newton's identities, `O(k N log N)`.
    Spectral,
    /// Direct for short filters, spectral otherwise.
    #[default]
    Auto,
}

/// Treatment of innovations older than the materialized window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum History {
    /// Coefficients beyond `M` are zero.
    Window,
    /// The whole past enters: everything from `1 - M` on is simulated
    /// exactly, the linear part of older noise by a Gaussian field, and its
    /// higher power sums by their means.
    #[default]
    Closure,
}

/// Direct engine up to this working length under [`Engine::Auto`].
pub const AUTO_DIRECT_MAX: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationOptions {
    pub engine: Engine,
    pub history: History,
    /// Compensated accumulation in the direct engine.
    pub compensated: bool,
}

impl SimulationOptions {
    /// Truncated history, direct engine: the literal finite filter.
    pub fn window_direct() -> Self {
        SimulationOptions { engine: Engine::Direct, history: History::Window, compensated: false }
    }
}

/// `X(1..=N)` for the working-length filter of `spec`, using innovations
/// `eps_(n-M)..eps_(n-1)` from `noise`.
pub fn simulate_path(spec: &ChaosProcessSpec, noise: &NoiseWindow, n: usize) -> Result<Vec<f64>> {
    let f = spec.filter()?;
    simulate_filter(&f, noise, n, false)
}

/// `X(1..=N)` with coefficients beyond `m` set to zero; requires `m > k`.
pub fn simulate_truncated_path(
    spec: &ChaosProcessSpec,
    m: usize,
    noise: &NoiseWindow,
    n: usize,
) -> Result<Vec<f64>> {
    if m <= spec.order() {
        return Err(Error::invalid(
            "m",
            format!("truncation {m} must exceed the chaos order {}", spec.order()),
        ));
    }
    let f = spec.filter()?;
    let f = ChaosFilter::new(f.k, f.coeffs.truncate_to(m));
    simulate_filter(&f, noise, n, false)
}

/// Window-mode direct simulation of an evaluated filter.
pub fn simulate_filter(
    f: &ChaosFilter,
    noise: &NoiseWindow,
    n: usize,
    compensated: bool,
) -> Result<Vec<f64>> {
    let m = f.len() as i64;
    if n > 0 && !noise.covers(1 - m, n as i64 - 1) {
        let index = if noise.first_index > 1 - m { 1 - m } else { n as i64 - 1 };
        return Err(Error::NoiseWindow {
            index,
            first: noise.first_index,
            last: noise.last_index(),
        });
    }
    let e = engine::direct_esf(f.coeffs.head(), f.k, &noise.values, noise.first_index, n, compensated);
    Ok(e.chunks(f.k + 1).map(|c| c[f.k]).collect())
}
