//! Hermite processes: kernel, normalizing constant, marginal variances and
//! the discrete-chaos approximant.
//!
//! The approximant of `Z(t)` is the exactly normalized partial-sum process
//! of a long-memory component with `a_i = i^(d-1)`; no multidimensional
//! stochastic integral is discretized.

use serde::Serialize;

use crate::coefficients::{memory_boundary, CoefficientSpec, SlowlyVarying};
use crate::covariance::exact_partial_sum_variances;
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, SeedPolicy};
use crate::partial_sums::{floor_nt, simulate_partial_sums, NormalizationPlan, PartialSumSample, TimeGrid};
use crate::process::{ChaosProcessSpec, History, SimulationOptions, VectorSimulator};
use crate::quadrature::integrate_adaptive;
use crate::special::{log_factorial, log_gamma};

/// Order and memory parameter of a Hermite process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HermiteSpec {
    pub k: usize,
    pub d: f64,
    /// `1 + k (d - 1/2)`.
    pub h: f64,
    pub a_kd: f64,
}

impl HermiteSpec {
    pub fn new(k: usize, d: f64) -> Result<Self> {
        let a = a_kd(k, d)?;
        Ok(HermiteSpec { k, d, h: 1.0 + k as f64 * (d - 0.5), a_kd: a })
    }

    /// The component `a_i = i^(d-1)` of order `k` with working length `m`.
    pub fn chaos_spec(&self, label: impl Into<String>, m: usize) -> Result<ChaosProcessSpec> {
        ChaosProcessSpec::new(label, CoefficientSpec::reg_var(self.d, SlowlyVarying::default(), m), self.k)
    }
}

/// `a_kd = sqrt(H (2H - 1) Gamma(1-d)^k / (k! Gamma(d)^k Gamma(1-2d)^k))`.
pub fn a_kd(k: usize, d: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "order must be at least 1"));
    }
    let lo = memory_boundary(k);
    if !(d > lo && d < 0.5) {
        return Err(Error::invalid("d", format!("must lie in ({lo}, 1/2) for k = {k}, got {d}")));
    }
    let kf = k as f64;
    let h = 1.0 + kf * (d - 0.5);
    let log_sq = (h * (2.0 * h - 1.0)).ln() + kf * log_gamma(1.0 - d)
        - log_factorial(k)
        - kf * log_gamma(d)
        - kf * log_gamma(1.0 - 2.0 * d);
    Ok((0.5 * log_sq).exp())
}

/// `f(x) = a_kd int_0^t prod_j (s - x_j)_+^(d-1) ds`.
///
/// The endpoint singularity at `s = max x_j` is removed with
/// `u = (s - max x_j)^d`. Ties at a nonnegative maximum make the kernel
/// infinite and are rejected.
pub fn hermite_kernel(spec: &HermiteSpec, t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", format!("must be positive, got {t}")));
    }
    if x.len() != spec.k {
        return Err(Error::invalid("x", format!("expected {} coordinates, got {}", spec.k, x.len())));
    }
    let (top, xm) = x
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if xm >= t {
        return Ok(0.0);
    }
    let d = spec.d;
    let lower = xm.max(0.0);
    if xm >= 0.0 && x.iter().enumerate().any(|(i, &v)| i != top && v == xm) {
        return Err(Error::invalid("x", "tied maximal coordinates: the kernel is infinite there"));
    }
    let rest = |s: f64| -> f64 {
        x.iter()
            .enumerate()
            .filter(|&(i, _)| i != top)
            .map(|(_, &v)| (s - v).powf(d - 1.0))
            .product()
    };
    let v = if xm < 0.0 && -xm >= 0.1 * t {
        // bounded away from the singularity: integrate in s directly, which
        // avoids the cancellation in u1 - u0 for far-away x
        let all = |s: f64| rest(s) * (s - xm).powf(d - 1.0);
        integrate_adaptive(all, 0.0, t, 0.0, 1e-11)?
    } else {
        let u0 = (lower - xm).powf(d);
        let u1 = (t - xm).powf(d);
        integrate_adaptive(|u| rest(xm + u.powf(1.0 / d)) / d, u0, u1, 0.0, 1e-11)?
    };
    Ok(spec.a_kd * v)
}

/// `Var Z(t) = t^(2H)`.
pub fn hermite_theoretical_variance(spec: &HermiteSpec, t: f64) -> f64 {
    t.powf(2.0 * spec.h)
}

/// `Cov(Z(s), Z(t)) = (s^2H + t^2H - |t - s|^2H) / 2`.
pub fn hermite_covariance(spec: &HermiteSpec, s: f64, t: f64) -> f64 {
    let h2 = 2.0 * spec.h;
    0.5 * (s.powf(h2) + t.powf(h2) - (t - s).abs().powf(h2))
}

/// `Var(S_[Nt]) / Var(S_N)` for the approximant at level `N`; tends to
/// `t^(2H)`.
pub fn exact_variance_ratio(spec: &HermiteSpec, n: usize, t: f64) -> Result<f64> {
    let f = spec.chaos_spec("z", n)?.filter()?;
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid("t", format!("must lie in (0, 1], got {t}")));
    }
    let nt = floor_nt(n, t);
    let v = exact_partial_sum_variances(&f, &[nt, n])?;
    Ok(v[0] / v[1])
}

/// Approximants of several Hermite processes on shared noise, exactly
/// normalized at level `N` with working length `N` and the far-past closure.
pub fn simulate_hermite(
    specs: &[HermiteSpec],
    n: usize,
    grid: &TimeGrid,
    noise: NoiseSpec,
    seeds: SeedPolicy,
    replications: usize,
) -> Result<PartialSumSample> {
    let chaos = specs
        .iter()
        .enumerate()
        .map(|(j, s)| s.chaos_spec(format!("z{j}"), n))
        .collect::<Result<Vec<_>>>()?;
    let plans = chaos
        .iter()
        .map(|c| NormalizationPlan::exact(c, n, History::Closure))
        .collect::<Result<Vec<_>>>()?;
    let sim = VectorSimulator::new(&chaos, n, noise, seeds, SimulationOptions::default())?;
    simulate_partial_sums(&sim, &plans, grid, replications)
}
