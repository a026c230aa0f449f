use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::symfun::{esf_compensated, esf_from_power_sums};

const LANES: usize = 8;

/// `e_0..e_k` (stride `k + 1`) of `w_i = a_i eps_(n-i)` for `n = 1..=n_max`,
/// over `i = 1..=min(|a|, n - first)`; `eps[0]` is `eps_first`.
pub(crate) fn direct_esf(
    a: &[f64],
    k: usize,
    eps: &[f64],
    first: i64,
    n_max: usize,
    compensated: bool,
) -> Vec<f64> {
    let stride = k + 1;
    let mut out = vec![0.0; n_max * stride];
    if compensated {
        let mut w = Vec::with_capacity(a.len());
        for n in 1..=n_max {
            w.clear();
            let avail = (n as i64 - first).clamp(0, a.len() as i64) as usize;
            for (i, ai) in a.iter().enumerate().take(avail) {
                w.push(ai * eps[(n as i64 - 1 - i as i64 - first) as usize]);
            }
            out[(n - 1) * stride..n * stride].copy_from_slice(&esf_compensated(&w, k));
        }
        return out;
    }
    let mut e = vec![[0.0f64; LANES]; stride];
    let mut n0 = 1usize;
    while n0 <= n_max {
        let lanes = LANES.min(n_max - n0 + 1);
        for row in e.iter_mut() {
            *row = [0.0; LANES];
        }
        e[0] = [1.0; LANES];
        let reach = ((n0 + lanes - 1) as i64 - first).clamp(0, a.len() as i64) as usize;
        // eps index of (n0, i) is n0 - i - first; lane l adds l
        let full = (n0 as i64 - first).clamp(0, a.len() as i64) as usize;
        for (i0, &ai) in a.iter().enumerate().take(reach) {
            let i = i0 + 1;
            let mut w = [0.0; LANES];
            let base = n0 as i64 - i as i64 - first;
            if i <= full {
                let b = base as usize;
                for l in 0..lanes {
                    w[l] = ai * eps[b + l];
                }
            } else {
                for (l, wl) in w.iter_mut().enumerate().take(lanes) {
                    let idx = base + l as i64;
                    if idx >= 0 {
                        *wl = ai * eps[idx as usize];
                    }
                }
            }
            for j in (1..stride).rev() {
                let (lo, hi) = e.split_at_mut(j);
                let prev = &lo[j - 1];
                let cur = &mut hi[0];
                for l in 0..LANES {
                    cur[l] += w[l] * prev[l];
                }
            }
        }
        for l in 0..lanes {
            let row = &mut out[(n0 - 1 + l) * stride..(n0 + l) * stride];
            for (j, v) in row.iter_mut().enumerate() {
                *v = e[j][l];
            }
        }
        n0 += lanes;
    }
    out
}

// Smallest 2^a 3^b at or above `n`.
fn smooth_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p3 = 1;
    while p3 < best {
        let mut m = p3;
        while m < n {
            m *= 2;
        }
        best = best.min(m);
        p3 *= 3;
    }
    best
}

/// FFT machinery shared by every spectral component of a simulator.
pub(crate) struct SpectralPlan {
    pub size: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralPlan {
    pub fn new(min_len: usize) -> Self {
        let size = smooth_len(min_len.max(2));
        let mut planner = FftPlanner::new();
        SpectralPlan {
            size,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    /// Spectra of `a^r` for `r = 1..=k`, paired as in [`Self::forward_powers`].
    pub fn filter_spectra(&self, a: &[f64], k: usize) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(k);
        for r in 1..=k {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
            for (b, &x) in buf.iter_mut().zip(a) {
                b.re = x.powi(r as i32);
            }
            self.fwd.process(&mut buf);
            out.push(buf);
        }
        out
    }

    /// Packed spectra of `u^r + i u^(r+1)` for `r = 1, 3, 5, ..`.
    pub fn forward_powers(&self, u: &[f64], k: usize) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(k.div_ceil(2));
        let mut r = 1;
        while r <= k {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
            for (b, &x) in buf.iter_mut().zip(u) {
                let p = x.powi(r as i32);
                b.re = p;
                if r < k {
                    b.im = p * x;
                }
            }
            self.fwd.process(&mut buf);
            out.push(buf);
            r += 2;
        }
        out
    }

    /// Power sums `p_r(n)`, `r = 1..=k`, as `k` rows of length `n_max`, where
    /// row `r` holds the circular convolution of `a^r` and `u^r` read at
    /// `offset + n - 1`.
    pub fn power_sums(
        &self,
        noise: &[Vec<Complex64>],
        filter: &[Vec<Complex64>],
        k: usize,
        offset: usize,
        n_max: usize,
    ) -> Vec<Vec<f64>> {
        let f = self.size;
        let scale = 1.0 / f as f64;
        let mut rows = vec![vec![0.0; n_max]; k];
        let mut buf = vec![Complex64::new(0.0, 0.0); f];
        for (pair, z) in noise.iter().enumerate() {
            let r = 2 * pair + 1;
            let a1 = &filter[r - 1];
            let a2 = filter.get(r);
            for idx in 0..f {
                let zc = z[(f - idx) % f].conj();
                let x1 = (z[idx] + zc) * 0.5;
                let mut v = x1 * a1[idx];
                if let Some(a2) = a2 {
                    // X2 = (Z - conj Z(-f)) / 2i, then multiplied by i
                    let x2_times_i = (z[idx] - zc) * 0.5;
                    v += x2_times_i * a2[idx];
                }
                buf[idx] = v;
            }
            self.inv.process(&mut buf);
            for n in 0..n_max {
                let c = buf[offset + n];
                rows[r - 1][n] = c.re * scale;
                if a2.is_some() {
                    rows[r][n] = c.im * scale;
                }
            }
        }
        rows
    }
}

/// `e_0..e_k` (stride `k + 1`) from power-sum rows.
pub(crate) fn esf_rows(rows: &[Vec<f64>], k: usize, n_max: usize) -> Vec<f64> {
    let stride = k + 1;
    let mut out = vec![0.0; n_max * stride];
    let mut p = vec![0.0; k];
    for n in 0..n_max {
        for r in 0..k {
            p[r] = rows[r][n];
        }
        out[n * stride..(n + 1) * stride].copy_from_slice(&esf_from_power_sums(&p));
    }
    out
}
