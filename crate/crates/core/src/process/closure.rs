//! Far-field closure for regularly varying filters.
//!
//! Innovations `eps_s` with `s <= -M` are not materialized. Their linear
//! contribution `G(n) = sum_{u >= M} a(n + u) eps_(-u)` is a smooth Gaussian
//! field in `n`, sampled jointly across components at Chebyshev nodes and
//! interpolated; higher power sums `sum_u a(n + u)^r eps_(-u)^r` are replaced
//! by their means.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::coefficients::RegVarTail;
use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::tail::{tail_sum, TailFactor};

pub(crate) struct FarField {
    nodes: usize,
    /// `n x nodes` barycentric weights.
    basis: Vec<f64>,
    /// `(members * nodes) x rank`.
    factor: Vec<f64>,
    rank: usize,
    members: usize,
    /// Per member, rows `r = 2..=k` of `E[eps^r] sum_u a(n + u)^r`.
    means: Vec<Vec<Vec<f64>>>,
}

fn node_count(n: usize, depth: usize) -> usize {
    if n <= 2 {
        return n;
    }
    let half = (n as f64 - 1.0) / 2.0;
    let z = ((n as f64 + 1.0) / 2.0 + depth as f64) / half;
    let rho = z + (z * z - 1.0).sqrt();
    ((37.0 / rho.ln()).ceil() as usize).clamp(8, 128).min(n)
}

impl FarField {
    /// `tails[c]` and `orders[c]` describe member `c`; the window starts at
    /// `1 - depth`.
    pub fn new(
        tails: &[RegVarTail],
        orders: &[usize],
        depth: usize,
        n: usize,
        noise: NoiseSpec,
    ) -> Result<Self> {
        if depth * 16 < n {
            return Err(Error::invalid(
                "truncation",
                format!("closure needs a working length of at least N/16 = {}, got {depth}", n / 16),
            ));
        }
        let q = node_count(n, depth);
        let (xs, basis) = if q == n {
            let xs: Vec<f64> = (1..=n).map(|i| i as f64).collect();
            let mut basis = vec![0.0; n * n];
            for i in 0..n {
                basis[i * n + i] = 1.0;
            }
            (xs, basis)
        } else {
            chebyshev_basis(n, q)
        };

        let members = tails.len();
        let dim = members * q;
        let u0 = depth as i64;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for c1 in 0..members {
            for q1 in 0..q {
                for c2 in c1..members {
                    let start = if c2 == c1 { q1 } else { 0 };
                    for q2 in start..q {
                        let v = tail_sum(
                            &[
                                TailFactor::new(tails[c1], xs[q1], 1),
                                TailFactor::new(tails[c2], xs[q2], 1),
                            ],
                            u0,
                        )?;
                        let (i, j) = (c1 * q + q1, c2 * q + q2);
                        cov[(i, j)] = v;
                        cov[(j, i)] = v;
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(cov);
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..dim).filter(|&l| eig.eigenvalues[l] > 1e-15 * top).collect();
        let rank = keep.len();
        let mut factor = vec![0.0; dim * rank];
        for (col, &l) in keep.iter().enumerate() {
            let s = eig.eigenvalues[l].sqrt();
            for i in 0..dim {
                factor[i * rank + col] = eig.eigenvectors[(i, l)] * s;
            }
        }

        let mut means = Vec::with_capacity(members);
        for (c, tail) in tails.iter().enumerate() {
            let mut rows = Vec::new();
            for r in 2..=orders[c] {
                let mu = noise.raw_moment(r as u32);
                let at_nodes: Vec<f64> = if mu == 0.0 {
                    vec![0.0; q]
                } else {
                    xs.iter()
                        .map(|&x| Ok(mu * tail_sum(&[TailFactor::new(*tail, x, r as u32)], u0)?))
                        .collect::<Result<_>>()?
                };
                rows.push(interpolate(&basis, q, &at_nodes));
            }
            means.push(rows);
        }
        Ok(FarField { nodes: q, basis, factor, rank, members, means })
    }

    /// One joint draw of `G_c(1..=N)` for every member.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        let z: Vec<f64> = (0..self.rank).map(|_| rng.sample(StandardNormal)).collect();
        let q = self.nodes;
        (0..self.members)
            .map(|c| {
                let at_nodes: Vec<f64> = (0..q)
                    .map(|qi| {
                        let row = &self.factor[(c * q + qi) * self.rank..(c * q + qi + 1) * self.rank];
                        row.iter().zip(&z).map(|(a, b)| a * b).sum()
                    })
                    .collect();
                interpolate(&self.basis, q, &at_nodes)
            })
            .collect()
    }

    /// Mean rows for member `c`: index `r - 2` holds power `r`.
    pub fn means(&self, c: usize) -> &[Vec<f64>] {
        &self.means[c]
    }
}

fn interpolate(basis: &[f64], q: usize, at_nodes: &[f64]) -> Vec<f64> {
    basis
        .chunks(q)
        .map(|w| w.iter().zip(at_nodes).map(|(a, b)| a * b).sum())
        .collect()
}

// First-kind Chebyshev nodes on [1, n] and barycentric weights at 1..=n.
fn chebyshev_basis(n: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    use std::f64::consts::PI;
    let mid = (n as f64 + 1.0) / 2.0;
    let half = (n as f64 - 1.0) / 2.0;
    let theta: Vec<f64> = (0..q).map(|j| PI * (j as f64 + 0.5) / q as f64).collect();
    let xs: Vec<f64> = theta.iter().map(|t| mid + half * t.cos()).collect();
    let w: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(j, t)| if j % 2 == 0 { t.sin() } else { -t.sin() })
        .collect();
    let mut basis = vec![0.0; n * q];
    for t in 1..=n {
        let x = t as f64;
        let row = &mut basis[(t - 1) * q..t * q];
        if let Some(hit) = xs.iter().position(|&xj| (x - xj).abs() < 1e-12 * half) {
            row[hit] = 1.0;
            continue;
        }
        let mut total = 0.0;
        for j in 0..q {
            let v = w[j] / (x - xs[j]);
            row[j] = v;
            total += v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    (xs, basis)
}
