//! Elementary symmetric functions `e_0..e_k`.

/// `e_0..e_k` of `c` by the forward recurrence
/// `e_j <- e_j + c_i e_(j-1)`, cost `O(|c| k)`.
///
/// Orders above `|c|` come out as zero.
pub fn esf(c: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &x) in c.iter().enumerate() {
        let top = k.min(i + 1);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// [`esf`] with Neumaier-compensated accumulation of every `e_j`.
pub fn esf_compensated(c: &[f64], k: usize) -> Vec<f64> {
    let mut s = vec![0.0; k + 1];
    let mut comp = vec![0.0; k + 1];
    s[0] = 1.0;
    for (i, &x) in c.iter().enumerate() {
        let top = k.min(i + 1);
        for j in (1..=top).rev() {
            let add = x * (s[j - 1] + comp[j - 1]);
            let t = s[j] + add;
            if s[j].abs() >= add.abs() {
                comp[j] += (s[j] - t) + add;
            } else {
                comp[j] += (add - t) + s[j];
            }
            s[j] = t;
        }
    }
    s.iter().zip(&comp).map(|(a, b)| a + b).collect()
}

/// Running symmetric functions of a stream.
#[derive(Clone, Debug, PartialEq)]
pub struct EsfState {
    e: Vec<f64>,
    count: usize,
}

impl EsfState {
    /// Empty state of order `k`: `e = (1, 0, .., 0)`.
    pub fn new(k: usize) -> Self {
        let mut e = vec![0.0; k + 1];
        e[0] = 1.0;
        EsfState { e, count: 0 }
    }

    pub fn absorb(&mut self, c: f64) {
        for j in (1..self.e.len()).rev() {
            self.e[j] += c * self.e[j - 1];
        }
        self.count += 1;
    }

    pub fn values(&self) -> &[f64] {
        &self.e
    }

    pub fn order(&self) -> usize {
        self.e.len() - 1
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Value-semantics form of [`EsfState::absorb`].
pub fn esf_incremental_absorb(mut state: EsfState, c_new: f64) -> EsfState {
    state.absorb(c_new);
    state
}

/// `e_0..e_k` from power sums `p_1..p_k` (given as `p[0..k]`) by Newton's
/// identities `j e_j = sum_i (-1)^(i-1) e_(j-i) p_i`.
///
/// Stable for sums of nonnegative terms; with mixed signs and `k >= 3`
/// prefer [`esf`].
pub fn esf_from_power_sums(p: &[f64]) -> Vec<f64> {
    let k = p.len();
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for j in 1..=k {
        let mut acc = 0.0;
        for i in 1..=j {
            let term = e[j - i] * p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e[j] = acc / j as f64;
    }
    e
}

/// `e_k` of the concatenation of two sequences from their separate
/// symmetric functions: `sum_j a_j b_(k-j)`.
pub fn esf_join(a: &[f64], b: &[f64], k: usize) -> f64 {
    (0..=k)
        .filter(|&j| j < a.len() && k - j < b.len())
        .map(|j| a[j] * b[k - j])
        .sum()
}
