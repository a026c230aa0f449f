//! Normalized partial sums `Y_N(t) = A(N)^-1 sum_{n <= [Nt]} X(n)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::Regime;
use crate::covariance::{exact_partial_sum_variances, long_run_sigma, lstar_constant};
use crate::error::{Error, Result};
use crate::process::{ChaosFilter, ChaosProcessSpec, History, VectorSimulator};

/// Increasing time points in `(0, 1]`, always ending at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { points: vec![0.25, 0.5, 0.75, 1.0] }
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        TimeGrid::new(points)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.points
    }
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("grid", "needs at least one point"));
        }
        for (i, t) in points.iter().enumerate() {
            if !(t.is_finite() && *t > 0.0 && *t <= 1.0) {
                return Err(Error::invalid(format!("grid[{i}]"), format!("must lie in (0, 1], got {t}")));
            }
            if i > 0 && *t <= points[i - 1] {
                return Err(Error::invalid(format!("grid[{i}]"), "points must increase"));
            }
        }
        if *points.last().unwrap() != 1.0 {
            return Err(Error::invalid("grid", "must include t = 1"));
        }
        Ok(TimeGrid { points })
    }

    /// Parses `"0.25,0.5,1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let points = s
            .split(',')
            .enumerate()
            .map(|(i, p)| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("grid[{i}]"), format!("{p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `[N t]` for every point.
    pub fn indices(&self, n: usize) -> Vec<usize> {
        self.points.iter().map(|&t| floor_nt(n, t)).collect()
    }
}

// Guards against 0.29 * 100 = 28.999..
pub(crate) fn floor_nt(n: usize, t: f64) -> usize {
    ((n as f64 * t * (1.0 + 1e-12)).floor() as usize).min(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// `A(N)^2 = Var(X(1) + .. + X(N))`.
    ExactVariance,
    /// `A(N) = sigma sqrt(N)`.
    AsymptoticSrd,
    /// `A(N) = c N^H L(N)^k` with the limit constant `c`.
    AsymptoticLrd,
}

/// A normalization mode together with its value `A(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalizationPlan {
    pub mode: NormalizationMode,
    pub n: usize,
    pub value: f64,
}

impl NormalizationPlan {
    /// A fixed normalization; `value` must be positive.
    pub fn fixed(mode: NormalizationMode, n: usize, value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::invalid("normalization", format!("A(N) must be positive, got {value}")));
        }
        Ok(NormalizationPlan { mode, n, value })
    }

    /// Exact variance of the process as simulated under `history`.
    pub fn exact(spec: &ChaosProcessSpec, n: usize, history: History) -> Result<Self> {
        Self::exact_filter(&spec.filter()?.effective(history), n)
    }

    pub fn exact_filter(f: &ChaosFilter, n: usize) -> Result<Self> {
        let v = exact_partial_sum_variances(f, &[n])?[0];
        Self::fixed(NormalizationMode::ExactVariance, n, v.max(0.0).sqrt())
    }

    /// `sigma sqrt(N)`; short memory only.
    pub fn asymptotic_srd(spec: &ChaosProcessSpec, n: usize) -> Result<Self> {
        let (sigma, _) = long_run_sigma(spec)?;
        Self::fixed(NormalizationMode::AsymptoticSrd, n, sigma * (n as f64).sqrt())
    }

    /// `c N^H L(N)^k` with `c^2 = B(d, 1 - 2d)^k / (k! H (2H - 1))`; long
    /// memory only.
    pub fn asymptotic_lrd(spec: &ChaosProcessSpec, n: usize) -> Result<Self> {
        let (scale, c) = lrd_scale(spec, n)?;
        Self::fixed(NormalizationMode::AsymptoticLrd, n, c * scale)
    }

    pub fn normalize(&self, partial_sum: f64) -> f64 {
        partial_sum / self.value
    }
}

/// `(N^H L(N)^k, c)` for a long-memory component.
fn lrd_scale(spec: &ChaosProcessSpec, n: usize) -> Result<(f64, f64)> {
    let reg = spec.regime();
    if reg.regime != Regime::Lrd {
        return Err(Error::regime(spec.label(), format!("expected long memory, found {:?}", reg.regime)));
    }
    let l = match spec.coeffs().family {
        crate::coefficients::CoefficientFamily::RegVar { l, .. } => l.eval(n as f64),
        _ => 1.0,
    };
    let h = reg.hurst();
    let k = reg.k;
    let scale = (n as f64).powf(h) * l.powi(k as i32);
    let c = (lstar_constant(reg.d, k) / (h * (2.0 * h - 1.0))).sqrt();
    Ok((scale, c))
}

/// Exact-variance plan plus the implied constant
/// `c_hat(N) = A(N) / (N^H L(N)^k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LrdCalibration {
    pub plan: NormalizationPlan,
    pub implied_constant: f64,
    /// The limit of `implied_constant`.
    pub limit_constant: f64,
}

pub fn calibrate_lrd_normalization(spec: &ChaosProcessSpec, n: usize) -> Result<LrdCalibration> {
    let (scale, c) = lrd_scale(spec, n)?;
    let plan = NormalizationPlan::exact(spec, n, History::Closure)?;
    Ok(LrdCalibration { plan, implied_constant: plan.value / scale, limit_constant: c })
}

/// `Y(t_g)` for one path `X(1..=N)`.
pub fn partial_sum_process(path: &[f64], plan: &NormalizationPlan, grid: &TimeGrid) -> Result<Vec<f64>> {
    if !(plan.value > 0.0) {
        return Err(Error::invalid("normalization", format!("A(N) must be positive, got {}", plan.value)));
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut s = 0.0;
    let mut at = 0;
    for idx in grid.indices(path.len()) {
        s += path[at..idx].iter().sum::<f64>();
        at = idx;
        out.push(s / plan.value);
    }
    Ok(out)
}

/// `Y_j(t_g)` for `R` replications, plus the noise partial sums
/// `W_N(t) = N^-1/2 sum_{n <= [Nt]} eps_n` of each replication.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSumSample {
    grid: TimeGrid,
    labels: Vec<String>,
    replications: usize,
    /// Indexed `(r, j, g)`.
    values: Vec<f64>,
    /// Indexed `(r, g)`.
    noise_sums: Vec<f64>,
}

impl PartialSumSample {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn components(&self) -> usize {
        self.labels.len()
    }

    pub fn replications(&self) -> usize {
        self.replications
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Y_j(t_g)` across replications.
    pub fn column(&self, j: usize, g: usize) -> Vec<f64> {
        let (jn, gn) = (self.components(), self.grid.len());
        (0..self.replications).map(|r| self.values[(r * jn + j) * gn + g]).collect()
    }

    /// `W_N(t_g)` across replications.
    pub fn noise_column(&self, g: usize) -> Vec<f64> {
        let gn = self.grid.len();
        (0..self.replications).map(|r| self.noise_sums[r * gn + g]).collect()
    }

    /// Rows `r,j,t,value`, in that order.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,j,t,value")?;
        let (jn, gn) = (self.components(), self.grid.len());
        for r in 0..self.replications {
            for j in 0..jn {
                for (g, t) in self.grid.points().iter().enumerate() {
                    writeln!(w, "{r},{j},{t},{:e}", self.values[(r * jn + j) * gn + g])?;
                }
            }
        }
        Ok(())
    }
}

/// Runs `R` replications of `sim` and keeps only the normalized partial
/// sums; the paths themselves are dropped replication by replication.
pub fn simulate_partial_sums(
    sim: &VectorSimulator,
    plans: &[NormalizationPlan],
    grid: &TimeGrid,
    replications: usize,
) -> Result<PartialSumSample> {
    if plans.len() != sim.components() {
        return Err(Error::invalid(
            "normalization",
            format!("{} plans for {} components", plans.len(), sim.components()),
        ));
    }
    let n = sim.len();
    let idx = grid.indices(n);
    let root_n = (n as f64).sqrt();
    let reps = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let rep = sim.replicate(r);
            let mut y = Vec::with_capacity(plans.len() * idx.len());
            for (path, plan) in rep.paths.iter().zip(plans) {
                y.extend(partial_sum_process(path, plan, grid)?);
            }
            // eps_1..eps_N sit at the end of the window
            let eps = &rep.noise.values[rep.noise.values.len() - n..];
            let w = partial_sum_process(eps, &NormalizationPlan::fixed(NormalizationMode::ExactVariance, n, root_n)?, grid)?;
            Ok((y, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(replications * plans.len() * idx.len());
    let mut noise_sums = Vec::with_capacity(replications * idx.len());
    for (y, w) in reps {
        values.extend(y);
        noise_sums.extend(w);
    }
    Ok(PartialSumSample { grid: grid.clone(), labels: sim.labels().to_vec(), replications, values, noise_sums })
}
