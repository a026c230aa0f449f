use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, SeedPolicy};
use crate::process::{evaluate_polynomial_form, DiscreteKernel};
use crate::stats::{mean, variance, Estimate};

/// Monte Carlo check of `E Q^4 <= (3 + 2 E eps^4)^(2k) (E Q^2)^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypercontractivityReport {
    pub k: usize,
    pub noise: NoiseSpec,
    pub replications: usize,
    pub support: usize,
    /// `(3 + 2 E eps^4)^(2k)`.
    pub constant: f64,
    pub second_exact: f64,
    pub second_mc: Estimate,
    pub fourth_mc: Estimate,
    /// `constant * (second_mc)^2`.
    pub bound: f64,
    /// `bound - fourth_mc`, with the standard error of the difference.
    pub slack: Estimate,
    pub pass: bool,
    /// `(second_mc - second_exact) / se`.
    pub cross_check_z: f64,
    pub cross_check_pass: bool,
}

pub fn hypercontractivity_check(
    h: &DiscreteKernel,
    k: usize,
    noise: NoiseSpec,
    replications: usize,
    seed: u64,
) -> Result<HypercontractivityReport> {
    hypercontractivity_check_with(h, k, noise, replications, seed, 4.0)
}

pub fn hypercontractivity_check_with(
    h: &DiscreteKernel,
    k: usize,
    noise: NoiseSpec,
    replications: usize,
    seed: u64,
    z: f64,
) -> Result<HypercontractivityReport> {
    if h.order() != k {
        return Err(Error::invalid("k", format!("kernel has order {}, got {k}", h.order())));
    }
    if !h.abs_sum().is_finite() {
        return Err(Error::InfiniteSupport(format!("sum |h| = {}", h.abs_sum())));
    }
    if replications < 2 {
        return Err(Error::invalid("replications", "need at least 2"));
    }
    let (lo, hi) = h.index_range().unwrap_or((1, 1));
    let seeds = SeedPolicy::new(seed);
    let q: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let w = seeds.stream(noise, r).window(lo, (hi - lo + 1) as usize);
            evaluate_polynomial_form(h, &w, k)
        })
        .collect::<Result<_>>()?;
    let q2: Vec<f64> = q.iter().map(|v| v * v).collect();
    let q4: Vec<f64> = q2.iter().map(|v| v * v).collect();
    let rn = replications as f64;
    let se = |x: &[f64]| (variance(x) / rn).sqrt();
    let second_mc = Estimate { value: mean(&q2), se: se(&q2) };
    let fourth_mc = Estimate { value: mean(&q4), se: se(&q4) };
    let constant = (3.0 + 2.0 * noise.fourth_moment()).powi(2 * k as i32);
    let bound = constant * second_mc.value * second_mc.value;
    // delta method on bound - fourth: influence 2 c m2 q2_i - q4_i
    let infl: Vec<f64> = q2
        .iter()
        .zip(&q4)
        .map(|(a, b)| 2.0 * constant * second_mc.value * a - b)
        .collect();
    let slack = Estimate { value: bound - fourth_mc.value, se: se(&infl) };
    let second_exact = h.second_moment();
    let cross_check_z = if second_mc.se > 0.0 {
        (second_mc.value - second_exact) / second_mc.se
    } else if second_mc.value == second_exact {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(HypercontractivityReport {
        k,
        noise,
        replications,
        support: h.support_size(),
        constant,
        second_exact,
        second_mc,
        fourth_mc,
        bound,
        pass: slack.value + z * slack.se >= 0.0,
        slack,
        cross_check_z,
        cross_check_pass: cross_check_z.abs() <= z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gaussian() {
        let h = DiscreteKernel::point(vec![1], 1.0).unwrap();
        let r = hypercontractivity_check(&h, 1, NoiseSpec::Gaussian, 20_000, 1).unwrap();
        assert_eq!(r.constant, 81.0);
        assert_eq!(r.second_exact, 1.0);
        assert!((r.fourth_mc.value - 3.0).abs() < 4.0 * r.fourth_mc.se);
        assert!(r.pass && r.cross_check_pass);
    }

    #[test]
    fn rademacher_pair_is_exact() {
        let h = DiscreteKernel::point(vec![1, 2], 1.0).unwrap();
        let r = hypercontractivity_check(&h, 2, NoiseSpec::Rademacher, 500, 3).unwrap();
        assert_eq!(r.constant, 625.0);
        assert_eq!(r.fourth_mc.value, 1.0);
        assert_eq!(r.second_mc.value, 1.0);
        assert!(r.pass && r.cross_check_pass);
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let h = DiscreteKernel::point(vec![1, 2], 1.0).unwrap();
        assert!(hypercontractivity_check(&h, 3, NoiseSpec::Gaussian, 10, 0).is_err());
    }
}
