use std::collections::BTreeMap;

use rand::Rng;

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::noise::NoiseWindow;

/// Default cap on the number of stored kernel tuples.
pub const DEFAULT_SUPPORT_CAP: u64 = 10_000_000;

/// A finitely supported kernel `h(i_1, .., i_k)` over ordered index tuples,
/// zero on every diagonal.
///
/// `Q_k(h) = sum h(i_1, .., i_k) eps_(i_1) .. eps_(i_k)` runs over the tuples
/// exactly as stored; no symmetrization is applied.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteKernel {
    k: usize,
    entries: Vec<(Vec<i64>, f64)>,
}

fn binomial_count(m: u64, k: u64) -> u64 {
    if k > m {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..k.min(m - k) {
        c = c * (m - i) as u128 / (i + 1) as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

// Visits every strictly increasing k-tuple drawn from 1..=m.
fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > m {
        return;
    }
    let mut idx: Vec<usize> = (1..=k).collect();
    loop {
        f(&idx);
        let mut p = k;
        while p > 0 && idx[p - 1] == m - k + p {
            p -= 1;
        }
        if p == 0 {
            return;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

impl DiscreteKernel {
    pub fn zero(k: usize) -> Self {
        DiscreteKernel { k, entries: Vec::new() }
    }

    /// Unit-support kernel `h(index) = value`.
    pub fn point(index: Vec<i64>, value: f64) -> Result<Self> {
        let k = index.len();
        Self::from_entries(k, vec![(index, value)], DEFAULT_SUPPORT_CAP)
    }

    /// Kernel with the given support; rejects diagonal tuples and repeated
    /// tuples.
    pub fn from_entries(k: usize, entries: Vec<(Vec<i64>, f64)>, cap: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "kernel order must be at least 1"));
        }
        if entries.len() as u64 > cap {
            return Err(Error::SupportTooLarge { size: entries.len() as u64, cap });
        }
        let mut seen = BTreeMap::new();
        for (pos, (idx, v)) in entries.iter().enumerate() {
            if idx.len() != k {
                return Err(Error::invalid(
                    format!("entries[{pos}]"),
                    format!("tuple has {} indices, expected {k}", idx.len()),
                ));
            }
            if !v.is_finite() {
                return Err(Error::invalid(format!("entries[{pos}]"), "value must be finite"));
            }
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) && *v != 0.0 {
                return Err(Error::invalid(
                    format!("entries[{pos}]"),
                    format!("kernel must vanish on diagonals, got {idx:?}"),
                ));
            }
            if seen.insert(idx.clone(), pos).is_some() {
                return Err(Error::invalid(format!("entries[{pos}]"), "duplicate tuple"));
            }
        }
        let entries = entries
            .into_iter()
            .filter(|(idx, v)| {
                *v != 0.0 && {
                    let mut s = idx.clone();
                    s.sort_unstable();
                    s.windows(2).all(|w| w[0] != w[1])
                }
            })
            .collect();
        Ok(DiscreteKernel { k, entries })
    }

    /// Uniform(-1, 1) values on every increasing tuple from `1..=width`.
    pub fn random_banded<R: Rng + ?Sized>(k: usize, width: usize, rng: &mut R) -> Result<Self> {
        let size = binomial_count(width as u64, k as u64);
        if size > DEFAULT_SUPPORT_CAP {
            return Err(Error::SupportTooLarge { size, cap: DEFAULT_SUPPORT_CAP });
        }
        let mut entries = Vec::with_capacity(size as usize);
        for_each_combination(width, k, |c| {
            let v = 2.0 * rng.random::<f64>() - 1.0;
            entries.push((c.iter().map(|&i| i as i64).collect(), v));
        });
        Self::from_entries(k, entries, DEFAULT_SUPPORT_CAP)
    }

    /// The kernel whose form is `X(n)`: `h(n - i_1, .., n - i_k) =
    /// a_(i_1)..a_(i_k)` for `1 <= i_1 < .. < i_k <= M`.
    pub fn filter_at(coeffs: &Coefficients, k: usize, n: i64, cap: u64) -> Result<Self> {
        let a = coeffs.head();
        let size = binomial_count(a.len() as u64, k as u64);
        if size > cap {
            return Err(Error::SupportTooLarge { size, cap });
        }
        let mut entries = Vec::with_capacity(size as usize);
        for_each_combination(a.len(), k, |c| {
            let v: f64 = c.iter().map(|&i| a[i - 1]).product();
            entries.push((c.iter().map(|&i| n - i as i64).collect(), v));
        });
        Self::from_entries(k, entries, cap)
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[(Vec<i64>, f64)] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn abs_sum(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.abs()).sum()
    }

    /// Smallest and largest index touched, if any.
    pub fn index_range(&self) -> Option<(i64, i64)> {
        let mut it = self.entries.iter().flat_map(|(i, _)| i.iter().copied());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x))))
    }

    /// Exact `E[Q_k(h)^2] = sum_S H(S)^2`, where `H(S)` adds `h` over all
    /// stored tuples with index set `S`.
    pub fn second_moment(&self) -> f64 {
        let mut by_set: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (idx, v) in &self.entries {
            let mut s = idx.clone();
            s.sort_unstable();
            *by_set.entry(s).or_insert(0.0) += v;
        }
        by_set.values().map(|v| v * v).sum()
    }
}

/// `Q_k(h)` for the realized innovations in `noise`.
pub fn evaluate_polynomial_form(h: &DiscreteKernel, noise: &NoiseWindow, k: usize) -> Result<f64> {
    if h.order() != k {
        return Err(Error::invalid("k", format!("kernel has order {}, got {k}", h.order())));
    }
    if let Some((lo, hi)) = h.index_range() {
        if !noise.covers(lo, hi) {
            let index = if lo < noise.first_index { lo } else { hi };
            return Err(Error::NoiseWindow { index, first: noise.first_index, last: noise.last_index() });
        }
    }
    let base = noise.first_index;
    Ok(h.entries
        .iter()
        .map(|(idx, v)| v * idx.iter().map(|&i| noise.values[(i - base) as usize]).product::<f64>())
        .sum())
}
