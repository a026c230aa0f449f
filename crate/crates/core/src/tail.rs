//! Sums of products of regularly varying coefficients over an infinite range.
//!
//! A tail `sum_{i >= i0} prod_f a_f(i + s_f)^(p_f)` is split into a short
//! explicit head, a midpoint Euler-Maclaurin integral over doubling panels,
//! and a closed-form remainder past the last panel.

use crate::coefficients::RegVarTail;
use crate::error::{Error, Result};
use crate::quadrature::FixedRule;
use crate::special::binomial;

/// One factor `a(i + shift)^power` of a tail product.
#[derive(Clone, Copy, Debug)]
pub struct TailFactor {
    pub a: RegVarTail,
    pub shift: f64,
    pub power: u32,
}

impl TailFactor {
    pub fn new(a: RegVarTail, shift: f64, power: u32) -> Self {
        TailFactor { a, shift, power }
    }

    fn exponent(&self) -> f64 {
        self.power as f64 * (1.0 - self.a.d)
    }
}

// Arguments below this are summed term by term.
const DIRECT_FROM: f64 = 64.0;
const MAX_PANELS: usize = 4000;

thread_local! {
    static RULE: FixedRule = FixedRule::new(12);
}

/// `sum_{i >= i0} prod_f a_f(i + s_f)^(p_f)`.
///
/// Every argument `i0 + s_f` must be at least 1 and the combined decay
/// exponent `sum_f p_f (1 - d_f)` must exceed 1.
pub fn tail_sum(factors: &[TailFactor], i0: i64) -> Result<f64> {
    if factors.is_empty() {
        return Err(Error::invalid("factors", "at least one factor is required"));
    }
    let min_shift = factors.iter().map(|f| f.shift).fold(f64::INFINITY, f64::min);
    if i0 as f64 + min_shift < 1.0 - 1e-9 {
        return Err(Error::invalid("i0", "tail arguments must be at least 1"));
    }
    let big_e: f64 = factors.iter().map(TailFactor::exponent).sum();
    if big_e <= 1.0 {
        return Err(Error::invalid(
            "factors",
            format!("decay exponent {big_e} does not exceed 1; the tail diverges"),
        ));
    }

    let log_term = |x: f64| -> f64 {
        factors
            .iter()
            .map(|f| {
                let y = x + f.shift;
                f.power as f64 * ((f.a.d - 1.0) * y.ln() + f.a.l.eval(y).ln())
            })
            .sum()
    };

    let i1 = (i0 as f64).max((DIRECT_FROM - min_shift).ceil()) as i64;
    let mut head = 0.0;
    for i in i0..i1 {
        head += log_term(i as f64).exp();
    }

    let x0 = i1 as f64 - 0.5;
    let slope: f64 = factors
        .iter()
        .map(|f| {
            let y = x0 + f.shift;
            f.power as f64 * ((f.a.d - 1.0) / y + f.a.l.log_derivative(y))
        })
        .sum();
    let correction = log_term(x0).exp() * slope / 24.0;

    Ok(head + integral_from(factors, x0, min_shift, big_e, &log_term)? + correction)
}

fn integral_from(
    factors: &[TailFactor],
    x0: f64,
    min_shift: f64,
    big_e: f64,
    log_term: &impl Fn(f64) -> f64,
) -> Result<f64> {
    let constant = factors.iter().all(|f| f.a.l.is_constant());
    let sigma = x0 + min_shift;
    let s_ref = factors[0].shift;
    let spread = factors
        .iter()
        .map(|f| (f.shift - s_ref).abs())
        .fold(0.0, f64::max);

    let mut total = 0.0;
    let mut prev = f64::NAN;
    let mut lo = x0;
    for j in 0..MAX_PANELS {
        let hi = x0 + (2f64.powi(j as i32 + 1) - 1.0) * sigma;
        let piece = RULE.with(|r| r.integrate(lo, hi, |x| log_term(x).exp()));
        total += piece;
        lo = hi;
        if constant {
            let v = hi + s_ref;
            if j >= 1 && v >= 8.0 * spread {
                return Ok(total + power_remainder(factors, v, big_e));
            }
        } else {
            if piece == 0.0 {
                return Ok(total);
            }
            let q = piece / prev;
            if j >= 8 && q > 0.0 && q < 1.0 {
                let rest = piece * q / (1.0 - q);
                if rest <= 1e-15 * total || hi > 1e250 {
                    return Ok(total + rest);
                }
            }
            prev = piece;
        }
        if !total.is_finite() {
            break;
        }
    }
    Err(Error::Quadrature(format!(
        "tail integral from {x0} did not settle (exponent {big_e})"
    )))
}

// Closed form of  int_V^inf prod_f c_f^p_f (v + delta_f)^(-e_f) dv  with
// v = x + s_ref, expanding each factor as a binomial series in delta_f / v.
fn power_remainder(factors: &[TailFactor], v: f64, big_e: f64) -> f64 {
    const TERMS: usize = 48;
    let s_ref = factors[0].shift;
    let mut series = vec![0.0; TERMS];
    series[0] = 1.0;
    let mut scale = 1.0;
    for f in factors {
        scale *= f.a.l.eval(1.0).powi(f.power as i32);
        let delta = (f.shift - s_ref) / v;
        if delta == 0.0 {
            continue;
        }
        let e = f.exponent();
        let own: Vec<f64> = (0..TERMS).map(|m| binomial(-e, m) * delta.powi(m as i32)).collect();
        let mut next = vec![0.0; TERMS];
        for (m, s) in series.iter().enumerate() {
            for (l, o) in own.iter().enumerate().take(TERMS - m) {
                next[m + l] += s * o;
            }
        }
        series = next;
    }
    let sum: f64 = series
        .iter()
        .enumerate()
        .map(|(m, c)| c / (big_e + m as f64 - 1.0))
        .sum();
    scale * v.powf(1.0 - big_e) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::SlowlyVarying;

    fn reg(d: f64, l: SlowlyVarying) -> RegVarTail {
        RegVarTail { d, l }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn matches_high_precision_product_sum() {
        // sum_{i>=1} i^-0.75 (i + 10^4)^-0.75, 30-digit reference
        let a = reg(0.25, SlowlyVarying::default());
        let v = tail_sum(&[TailFactor::new(a, 0.0, 1), TailFactor::new(a, 1e4, 1)], 1).unwrap();
        assert!(rel(v, 0.048_999_889_73) < 1e-9, "{v}");
    }

    #[test]
    fn matches_log_power_reference() {
        let a = reg(0.3, SlowlyVarying::LogPower { p: 1.0 });
        let v = tail_sum(&[TailFactor::new(a, 0.0, 2)], 100).unwrap();
        assert!(rel(v, 28.530_743_594_455_74) < 1e-7, "{v}");
    }

    #[test]
    fn matches_iterated_log_reference() {
        let a = reg(0.35, SlowlyVarying::IteratedLog);
        let f = [TailFactor::new(a, 0.0, 1), TailFactor::new(a, 37.0, 1)];
        let v = tail_sum(&f, 500).unwrap();
        assert!(rel(v, 3.171_934_534_082_931) < 1e-7, "{v}");
    }

    #[test]
    fn handles_negative_shift() {
        let a = reg(0.2, SlowlyVarying::Constant { c: 2.0 });
        let f = [TailFactor::new(a, 0.0, 2), TailFactor::new(a, -300.0, 2)];
        let v = tail_sum(&f, 400).unwrap();
        assert!(rel(v, 5.605_298_823_150_057e-5) < 1e-8, "{v}");
    }

    #[test]
    fn rejects_divergent_tail() {
        let a = reg(0.45, SlowlyVarying::default());
        assert!(tail_sum(&[TailFactor::new(a, 0.0, 1)], 10).is_err());
    }
}
