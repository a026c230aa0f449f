//! Gamma-family special functions.

use statrs::function::gamma::ln_gamma;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> f64 {
    ln_gamma(x)
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn log_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Euler beta function `B(a, b)`.
pub fn beta(a: f64, b: f64) -> f64 {
    log_beta(a, b).exp()
}

/// `ln k!`.
pub fn log_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `k!` as a float; exact for every `k` used in this crate.
pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Generalised binomial coefficient `C(alpha, m)` for real `alpha`.
pub(crate) fn binomial(alpha: f64, m: usize) -> f64 {
    let mut out = 1.0;
    for j in 0..m {
        out *= (alpha - j as f64) / (j as f64 + 1.0);
    }
    out
}
