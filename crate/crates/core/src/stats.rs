//! Sample statistics with replication-level standard errors.

use serde::Serialize;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Unbiased sample covariance.
pub fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    covariance(x, y) / (variance(x) * variance(y)).sqrt()
}

/// An estimate with its delete-one jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `(value - target) / se`.
    pub fn z(&self, target: f64) -> f64 {
        (self.value - target) / self.se
    }
}

fn jackknife_se(loo: impl Iterator<Item = f64>, r: usize) -> f64 {
    let vals: Vec<f64> = loo.collect();
    let m = mean(&vals);
    let ss: f64 = vals.iter().map(|v| (v - m) * (v - m)).sum();
    ((r as f64 - 1.0) / r as f64 * ss).sqrt()
}

struct Moments {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Moments {
    fn new(x: &[f64], y: &[f64]) -> Self {
        // center first so the leave-one-out sums do not cancel
        let (cx, cy) = (mean(x), mean(y));
        let mut m = Moments { n: x.len() as f64, sx: 0.0, sy: 0.0, sxx: 0.0, syy: 0.0, sxy: 0.0 };
        for (a, b) in x.iter().zip(y) {
            let (a, b) = (a - cx, b - cy);
            m.sx += a;
            m.sy += b;
            m.sxx += a * a;
            m.syy += b * b;
            m.sxy += a * b;
        }
        m
    }

    fn without(&self, a: f64, b: f64) -> Moments {
        Moments {
            n: self.n - 1.0,
            sx: self.sx - a,
            sy: self.sy - b,
            sxx: self.sxx - a * a,
            syy: self.syy - b * b,
            sxy: self.sxy - a * b,
        }
    }

    fn cov(&self) -> f64 {
        (self.sxy - self.sx * self.sy / self.n) / (self.n - 1.0)
    }

    fn corr(&self) -> f64 {
        let vx = self.sxx - self.sx * self.sx / self.n;
        let vy = self.syy - self.sy * self.sy / self.n;
        (self.sxy - self.sx * self.sy / self.n) / (vx * vy).sqrt()
    }
}

/// Sample covariance with jackknife standard error.
pub fn covariance_estimate(x: &[f64], y: &[f64]) -> Estimate {
    let (cx, cy) = (mean(x), mean(y));
    let m = Moments::new(x, y);
    let loo = x.iter().zip(y).map(|(a, b)| m.without(a - cx, b - cy).cov());
    Estimate { value: m.cov(), se: jackknife_se(loo, x.len()) }
}

/// Sample correlation with jackknife standard error.
pub fn correlation_estimate(x: &[f64], y: &[f64]) -> Estimate {
    let (cx, cy) = (mean(x), mean(y));
    let m = Moments::new(x, y);
    let loo = x.iter().zip(y).map(|(a, b)| m.without(a - cx, b - cy).corr());
    Estimate { value: m.corr(), se: jackknife_se(loo, x.len()) }
}

/// Sample mean of `x^p` with the plain standard error.
pub fn raw_moment_estimate(x: &[f64], p: i32) -> Estimate {
    let v: Vec<f64> = x.iter().map(|a| a.powi(p)).collect();
    Estimate { value: mean(&v), se: (variance(&v) / v.len() as f64).sqrt() }
}

/// Sample skewness `g1 = m3 / m2^1.5`.
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Sample excess kurtosis `g2 = m4 / m2^2 - 3`.
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

/// Sample distance correlation, `O(R^2)`.
pub fn distance_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let centered = |v: &[f64]| -> Vec<f64> {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = (v[i] - v[j]).abs();
            }
        }
        let rows: Vec<f64> = (0..n).map(|i| d[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
        let all = rows.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] += all - rows[i] - rows[j];
            }
        }
        d
    };
    let (a, b) = (centered(x), centered(y));
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| u * v).sum::<f64>();
    let (vxy, vxx, vyy) = (dot(&a, &b), dot(&a, &a), dot(&b, &b));
    if vxx * vyy <= 0.0 {
        return 0.0;
    }
    (vxy / (vxx * vyy).sqrt()).max(0.0).sqrt()
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
