//! Exact second-order structure.
//!
//! `gamma_pq(n) = E[X_p(t) X_q(t + n)]` is zero for different orders and
//! otherwise the order-`k` elementary symmetric function of
//! `c_i = a_i b_(n+i)`, `i >= 1`. For regularly varying coefficients the sum
//! runs to infinity: terms up to the working length are summed exactly and
//! the rest through [`crate::tail`].

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::coefficients::{Coefficients, MemoryRegime, Regime};
use crate::error::{Error, Result};
use crate::process::{ChaosFilter, ChaosProcessSpec};
use crate::special::{beta, factorial};
use crate::symfun::{esf, esf_from_power_sums, esf_join};
use crate::tail::{tail_sum, TailFactor};

// Batch lags through FFT power sums above this many head operations.
const FFT_WORK: usize = 4_000_000;

fn head_len(p: &Coefficients, q: &Coefficients, n: i64) -> usize {
    (p.len() as i64).max(q.len() as i64 - n).max(0) as usize
}

fn tail_power_sums(p: &Coefficients, q: &Coefficients, n: f64, i0: i64, k: usize) -> Result<Vec<f64>> {
    let (Some(ta), Some(tb)) = (p.tail(), q.tail()) else {
        return Ok(vec![0.0; k]);
    };
    (1..=k as u32)
        .map(|r| tail_sum(&[TailFactor::new(*ta, 0.0, r), TailFactor::new(*tb, n, r)], i0))
        .collect()
}

/// `gamma_pq(n)` for evaluated filters.
pub fn filter_gamma_cross(p: &ChaosFilter, q: &ChaosFilter, n: i64) -> Result<f64> {
    if p.k != q.k {
        return Ok(0.0);
    }
    let k = p.k;
    let h = head_len(&p.coeffs, &q.coeffs, n);
    let c: Vec<f64> = (1..=h as i64)
        .map(|i| p.coeffs.value(i) * q.coeffs.value(n + i))
        .collect();
    let head = esf(&c, k);
    let tail = esf_from_power_sums(&tail_power_sums(&p.coeffs, &q.coeffs, n as f64, h as i64 + 1, k)?);
    Ok(esf_join(&head, &tail, k))
}

/// `gamma(n)` for an evaluated filter; symmetric in `n`.
pub fn filter_gamma_auto(f: &ChaosFilter, n: i64) -> Result<f64> {
    filter_gamma_cross(f, f, n.abs())
}

/// Autocovariance `gamma(n)` of a component, including the closed-form tail
/// of regularly varying coefficients.
pub fn gamma_auto(spec: &ChaosProcessSpec, n: i64) -> Result<f64> {
    filter_gamma_auto(&spec.filter()?, n)
}

/// Cross-covariance `gamma_pq(n) = E[X_p(t) X_q(t + n)]`.
pub fn gamma_cross(p: &ChaosProcessSpec, q: &ChaosProcessSpec, n: i64) -> Result<f64> {
    filter_gamma_cross(&p.filter()?, &q.filter()?, n)
}

/// `gamma_pq(n)` for every `n` in `lo..=hi`.
pub fn gamma_cross_lags(p: &ChaosFilter, q: &ChaosFilter, lo: i64, hi: i64) -> Result<Vec<f64>> {
    if hi < lo {
        return Ok(Vec::new());
    }
    let count = (hi - lo + 1) as usize;
    if p.k != q.k {
        return Ok(vec![0.0; count]);
    }
    let (a, b) = (&p.coeffs, &q.coeffs);
    let both_tailed = a.tail().is_some() && b.tail().is_some();
    if !both_tailed {
        // finite support: gamma vanishes outside (-M_p, M_q)
        let lo_nz = lo.max(1 - a.len() as i64);
        let hi_nz = hi.min(b.len() as i64 - 1);
        let mut out = vec![0.0; count];
        if a.tail().is_none() && b.tail().is_none() {
            if lo_nz <= hi_nz {
                let vals: Vec<f64> = (lo_nz..=hi_nz)
                    .into_par_iter()
                    .map(|n| filter_gamma_cross(p, q, n))
                    .collect::<Result<_>>()?;
                out[(lo_nz - lo) as usize..=(hi_nz - lo) as usize].copy_from_slice(&vals);
            }
            return Ok(out);
        }
    }
    let h0 = head_len(a, b, lo);
    let nonneg = a.is_nonnegative() && b.is_nonnegative();
    if !nonneg || h0.saturating_mul(count) < FFT_WORK {
        return (lo..=hi).into_par_iter().map(|n| filter_gamma_cross(p, q, n)).collect();
    }

    // head power sums sum_{i<=h0} a_i^r b_(n+i)^r by FFT correlation
    let k = p.k;
    let blen = count + h0;
    let size = blen.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut heads = vec![vec![0.0; count]; k];
    for r in 1..=k {
        let mut fa = vec![Complex64::new(0.0, 0.0); size];
        for i in 1..=h0 {
            fa[i - 1].re = a.value(i as i64).powi(r as i32);
        }
        let mut fb = vec![Complex64::new(0.0, 0.0); size];
        for (t, slot) in fb.iter_mut().enumerate().take(blen) {
            slot.re = b.value(lo + 1 + t as i64).powi(r as i32);
        }
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        for (x, y) in fb.iter_mut().zip(&fa) {
            *x *= y.conj();
        }
        inv.process(&mut fb);
        for (s, v) in heads[r - 1].iter_mut().enumerate() {
            *v = fb[s].re / size as f64;
        }
    }
    (0..count)
        .into_par_iter()
        .map(|s| {
            let n = lo + s as i64;
            let mut pw = tail_power_sums(a, b, n as f64, h0 as i64 + 1, k)?;
            for r in 0..k {
                pw[r] += heads[r][s];
            }
            Ok(esf_from_power_sums(&pw)[k])
        })
        .collect()
}

/// `gamma(0..=max_lag)`.
pub fn gamma_auto_lags(f: &ChaosFilter, max_lag: usize) -> Result<Vec<f64>> {
    gamma_cross_lags(f, f, 0, max_lag as i64)
}

/// `Var(X(1) + .. + X(N)) = sum_{|h| < N} (N - |h|) gamma(h)`.
pub fn exact_partial_sum_variance(spec: &ChaosProcessSpec, n: usize) -> Result<f64> {
    Ok(exact_partial_sum_variances(&spec.filter()?, &[n])?[0])
}

/// [`exact_partial_sum_variance`] at several `N`, sharing one lag table.
pub fn exact_partial_sum_variances(f: &ChaosFilter, ns: &[usize]) -> Result<Vec<f64>> {
    let top = ns.iter().copied().max().unwrap_or(0);
    if top == 0 {
        return Ok(vec![0.0; ns.len()]);
    }
    let g = gamma_auto_lags(f, top - 1)?;
    Ok(ns.iter().map(|&n| variance_from_lags(&g, n)).collect())
}

pub(crate) fn variance_from_lags(g: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut s = n as f64 * g[0];
    for h in 1..n {
        s += 2.0 * (n - h) as f64 * g[h];
    }
    s
}

/// Covariances of partial sums `S_p(n1) = X_p(1) + .. + X_p(n1)` and
/// `S_q(n2)` for all `n1, n2 <= N`, from one table of `gamma_pq`.
pub struct PartialSumCovariance {
    lo: i64,
    gamma: Vec<f64>,
}

impl PartialSumCovariance {
    pub fn new(p: &ChaosFilter, q: &ChaosFilter, n: usize) -> Result<Self> {
        let lo = 1 - n as i64;
        let gamma = gamma_cross_lags(p, q, lo, n as i64 - 1)?;
        Ok(PartialSumCovariance { lo, gamma })
    }

    /// `Cov(S_p(n1), S_q(n2))`.
    pub fn cov(&self, n1: usize, n2: usize) -> f64 {
        let (n1, n2) = (n1 as i64, n2 as i64);
        let mut s = 0.0;
        for h in (1 - n1)..n2 {
            let count = n1.min(n2 - h) - 1i64.max(1 - h) + 1;
            if count > 0 {
                s += count as f64 * self.gamma[(h - self.lo) as usize];
            }
        }
        s
    }
}

/// A lag sum with its truncation diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LongRunSum {
    pub value: f64,
    /// Lags with `|n| < cutoff` are summed exactly.
    pub cutoff: usize,
    /// Contribution of lags beyond the cutoff.
    pub tail_estimate: f64,
    /// Error bound on `tail_estimate`.
    pub tail_bound: f64,
    pub converged: bool,
}

fn require_srd(spec: &ChaosProcessSpec) -> Result<()> {
    match spec.regime().regime {
        Regime::Srd => Ok(()),
        r => Err(Error::regime(spec.label(), format!("expected short memory, found {r:?}"))),
    }
}

/// `sum_{n >= n0} gamma_pq(n)` with `n0 >= M_q`, over the smooth extension of
/// `gamma_pq` to real lags.
fn smooth_lag_tail(p: &ChaosFilter, q: &ChaosFilter, n0: i64) -> Result<(f64, f64)> {
    let k = p.k;
    let (a, b) = (&p.coeffs, &q.coeffs);
    let Some(tb) = b.tail().copied() else {
        return Ok((0.0, 0.0));
    };
    let m = a.len();
    let g = |x: f64| -> Result<f64> {
        let c: Vec<f64> = (1..=m).map(|i| a.value(i as i64) * tb.eval(x + i as f64)).collect();
        let head = esf(&c, k);
        let tail = esf_from_power_sums(&tail_power_sums(a, b, x, m as i64 + 1, k)?);
        Ok(esf_join(&head, &tail, k))
    };
    let rule = crate::quadrature::FixedRule::new(12);
    let x0 = n0 as f64 - 0.5;
    let sigma = x0 + 1.0;
    let mut total = (g(n0 as f64)? - g(n0 as f64 - 1.0)?) / 24.0;
    let mut prev = f64::NAN;
    let mut lo = x0;
    for j in 0..400 {
        let hi = x0 + (2f64.powi(j + 1) - 1.0) * sigma;
        let mut err = None;
        let piece = rule.integrate(lo, hi, |x| match g(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        total += piece;
        lo = hi;
        if piece == 0.0 {
            return Ok((total, 0.0));
        }
        let r = piece / prev;
        if j >= 6 && r > 0.0 && r < 1.0 {
            let rest = piece * r / (1.0 - r);
            if rest.abs() <= 1e-13 * total.abs() || j >= 200 {
                // the ratio of successive panels drifts by O(1/x): bound the
                // extrapolation by its own size
                return Ok((total + rest, rest.abs() * 1e-2 + 1e-14 * total.abs()));
            }
        }
        prev = piece;
    }
    Err(Error::Quadrature("lag tail did not settle".into()))
}

/// `sigma_pq = sum_n gamma_pq(n)` for two short-memory components.
pub fn long_run_cross(p: &ChaosProcessSpec, q: &ChaosProcessSpec) -> Result<LongRunSum> {
    require_srd(p)?;
    require_srd(q)?;
    filter_long_run_cross(&p.filter()?, &q.filter()?)
}

/// [`long_run_cross`] for evaluated filters; no regime check.
pub fn filter_long_run_cross(p: &ChaosFilter, q: &ChaosFilter) -> Result<LongRunSum> {
    if p.k != q.k {
        return Ok(LongRunSum { value: 0.0, cutoff: 0, tail_estimate: 0.0, tail_bound: 0.0, converged: true });
    }
    let cut = p.len().max(q.len()).max(256);
    let exact: f64 = gamma_cross_lags(p, q, 1 - cut as i64, cut as i64 - 1)?.iter().sum();
    let (t_pos, b_pos) = smooth_lag_tail(p, q, cut as i64)?;
    let (t_neg, b_neg) = smooth_lag_tail(q, p, cut as i64)?;
    let value = exact + t_pos + t_neg;
    let tail_bound = b_pos + b_neg;
    Ok(LongRunSum {
        value,
        cutoff: cut,
        tail_estimate: t_pos + t_neg,
        tail_bound,
        converged: tail_bound <= 1e-8 * value.abs(),
    })
}

/// `sigma^2 = sum_n gamma(n)` and `sigma`.
///
/// Fails with [`Error::NonPositiveLongRunVariance`] when the sum is not
/// strictly positive.
pub fn long_run_sigma(spec: &ChaosProcessSpec) -> Result<(f64, LongRunSum)> {
    require_srd(spec)?;
    let f = spec.filter()?;
    let s = filter_long_run_cross(&f, &f)?;
    if s.value <= 0.0 {
        return Err(Error::NonPositiveLongRunVariance { label: spec.label().into(), sigma_sq: s.value });
    }
    Ok((s.value.sqrt(), s))
}

/// Limit covariance matrix `(s ^ t) sigma_pq / (sigma_p sigma_q)` of the
/// normalized partial sums of short-memory components.
pub fn srd_limit_covariance(specs: &[ChaosProcessSpec], s: f64, t: f64) -> Result<Vec<Vec<f64>>> {
    let filters = specs.iter().map(|x| x.filter()).collect::<Result<Vec<_>>>()?;
    let mut sig = Vec::with_capacity(specs.len());
    for x in specs {
        sig.push(long_run_sigma(x)?.0);
    }
    let m = s.min(t);
    let j = specs.len();
    let mut out = vec![vec![0.0; j]; j];
    for p in 0..j {
        for q in p..j {
            let v = if p == q {
                m
            } else {
                m * filter_long_run_cross(&filters[p], &filters[q])?.value / (sig[p] * sig[q])
            };
            out[p][q] = v;
            out[q][p] = v;
        }
    }
    Ok(out)
}

/// `B(d, 1 - 2d)^k / k!`, the constant of `gamma(n) ~ C n^(2 d_X - 1)` when
/// `L = 1`.
pub fn lstar_constant(d: f64, k: usize) -> f64 {
    beta(d, 1.0 - 2.0 * d).powi(k as i32) / factorial(k)
}

/// Ordinary least squares slope of `ln |gamma(n)|` on `ln n`.
pub fn power_law_slope(f: &ChaosFilter, lags: &[i64]) -> Result<f64> {
    let xs: Vec<f64> = lags.iter().map(|&n| (n as f64).ln()).collect();
    let ys = lags
        .iter()
        .map(|&n| Ok(filter_gamma_auto(f, n)?.abs().ln()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::stats::ols_slope(&xs, &ys))
}

/// Second-order summary of one component.
#[derive(Clone, Debug)]
pub struct CovarianceSummary {
    filter: ChaosFilter,
    pub regime: MemoryRegime,
    /// Long-run variance; short memory only.
    pub sigma_sq: Option<LongRunSum>,
    pub d_x: Option<f64>,
    /// `(k!)^-1 B(d, 1 - 2d)^k L^(2k)` for constant `L`; long memory only.
    pub lstar_constant: Option<f64>,
}

impl CovarianceSummary {
    pub fn new(spec: &ChaosProcessSpec) -> Result<Self> {
        let regime = spec.regime();
        let filter = spec.filter()?;
        let sigma_sq = match regime.regime {
            Regime::Srd => Some(long_run_sigma(spec)?.1),
            _ => None,
        };
        let lstar_constant = match (regime.regime, filter.coeffs.tail()) {
            (Regime::Lrd, Some(t)) => match t.l {
                crate::coefficients::SlowlyVarying::Constant { c } => {
                    Some(lstar_constant(regime.d, regime.k) * c.powi(2 * regime.k as i32))
                }
                _ => None,
            },
            _ => None,
        };
        Ok(CovarianceSummary { filter, regime, sigma_sq, d_x: regime.d_x, lstar_constant })
    }

    /// `gamma(n)` on demand.
    pub fn gamma(&self, n: i64) -> Result<f64> {
        filter_gamma_auto(&self.filter, n)
    }
}
