//! Monte Carlo verification of the short-memory, long-memory and mixed
//! limit theorems.
//!
//! [`run_experiment`] simulates `R` replications of a vector of components
//! on shared noise, reduces each to `Y_j(t_g)` and compares the sample with
//! its limit: `(s ^ t) sigma_pq / (sigma_p sigma_q)` between short-memory
//! components, the Hermite covariance within a long-memory component, zero
//! across orders, and independence of the `S2` block from everything else.

mod config;
mod hyper;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

pub use config::{Block, CoefficientConfig, ComponentConfig, ExperimentConfig, Tolerances};
pub use hyper::{hypercontractivity_check, hypercontractivity_check_with, HypercontractivityReport};

use crate::coefficients::Regime;
use crate::covariance::{filter_long_run_cross, long_run_sigma, PartialSumCovariance};
use crate::error::{Error, Result};
use crate::hermite::{hermite_covariance, HermiteSpec};
use crate::noise::SeedPolicy;
use crate::partial_sums::{simulate_partial_sums, NormalizationPlan, PartialSumSample};
use crate::process::{ChaosFilter, ChaosProcessSpec, VectorSimulator};
use crate::stats::{
    correlation_estimate, covariance_estimate, distance_correlation, excess_kurtosis, skewness, Estimate,
};

/// `(value - target) / se`, with `0` for an exact hit at zero spread.
fn z_score(e: &Estimate, target: f64) -> f64 {
    if e.se > 0.0 {
        e.z(target)
    } else if e.value == target {
        0.0
    } else {
        f64::INFINITY.copysign(e.value - target)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSummary {
    pub label: String,
    pub block: Block,
    pub order: usize,
    pub regime: Regime,
    pub d_x: Option<f64>,
    pub hurst: Option<f64>,
    /// Long-run variance; short memory only.
    pub sigma_sq: Option<f64>,
    pub normalization: NormalizationPlan,
    /// `sum a_i` over the working length; order 1 only.
    pub coefficient_sum: Option<f64>,
}

/// Where a covariance target comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// `(s ^ t) sigma_pq / (sigma_p sigma_q)`.
    ShortMemory,
    /// Different chaos orders are uncorrelated.
    CrossOrder,
    /// `S2` against `S1` or `L`.
    Independent,
    /// Hermite covariance within one long-memory component.
    Hermite,
    /// No closed-form limit; reported only.
    Reported,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEntry {
    pub p: usize,
    pub q: usize,
    pub s: f64,
    pub t: f64,
    pub empirical: Estimate,
    pub kind: TargetKind,
    pub target: Option<f64>,
    /// `Cov(Y_p(s), Y_q(t))` at the simulated `N`, computed exactly.
    pub exact: f64,
    pub z: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceEntry {
    /// The `S2` component.
    pub a: usize,
    pub b: usize,
    pub t: f64,
    pub level: Estimate,
    pub square: Estimate,
    pub distance_correlation: Option<f64>,
    /// Exact level correlation at the simulated `N`.
    pub exact_level: f64,
    /// Only `t = 1` is asserted; other points are diagnostics.
    pub asserted: bool,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianityDiagnostics {
    pub replications: usize,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub z_skewness: f64,
    pub z_kurtosis: f64,
    pub skewness_flag: bool,
    pub kurtosis_flag: bool,
}

impl GaussianityDiagnostics {
    pub fn flagged(&self) -> bool {
        self.skewness_flag || self.kurtosis_flag
    }
}

/// Sample skewness and excess kurtosis with z-scores under a normal null,
/// using standard errors `sqrt(6/R)` and `sqrt(24/R)`; flags `|z| > 4`.
pub fn gaussianity_check(samples: &[f64]) -> Result<GaussianityDiagnostics> {
    gaussianity_check_with(samples, 4.0)
}

pub fn gaussianity_check_with(samples: &[f64], z: f64) -> Result<GaussianityDiagnostics> {
    let r = samples.len();
    if r < 500 {
        return Err(Error::invalid("replications", format!("need at least 500 samples, got {r}")));
    }
    let g1 = skewness(samples);
    let g2 = excess_kurtosis(samples);
    let z1 = g1 / (6.0 / r as f64).sqrt();
    let z2 = g2 / (24.0 / r as f64).sqrt();
    Ok(GaussianityDiagnostics {
        replications: r,
        skewness: g1,
        excess_kurtosis: g2,
        z_skewness: z1,
        z_kurtosis: z2,
        skewness_flag: z1.abs() > z,
        kurtosis_flag: z2.abs() > z,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalityEntry {
    pub j: usize,
    pub t: f64,
    pub diagnostics: GaussianityDiagnostics,
    /// Asserted for short-memory components only.
    pub asserted: bool,
}

/// Correlation of an `S1` component with another `S1` component or with
/// the noise partial sums `W_N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrownianEntry {
    pub a: usize,
    /// `None` stands for `W_N`.
    pub b: Option<usize>,
    pub t: f64,
    pub correlation: Estimate,
    /// `+1` or `-1` from the signs of the coefficient sums.
    pub target: f64,
    /// Exact correlation at the simulated `N`.
    pub exact: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub components: Vec<ComponentSummary>,
    pub covariance: Vec<CovarianceEntry>,
    /// Smallest eigenvalue of the empirical covariance matrix of all
    /// `Y_j(t_g)`.
    pub min_eigenvalue: f64,
    pub independence: Vec<IndependenceEntry>,
    pub normality: Vec<NormalityEntry>,
    pub brownian: Vec<BrownianEntry>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Writes the CSV set and `summary.txt` into `dir`; returns the paths in
    /// the order written.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let mut emit = |name: &str, body: String| -> Result<()> {
            let path = dir.join(name);
            std::fs::File::create(&path)?.write_all(body.as_bytes())?;
            out.push(path);
            Ok(())
        };
        emit("components.csv", self.components_csv())?;
        emit("covariance.csv", self.covariance_csv())?;
        emit("independence.csv", self.independence_csv())?;
        emit("normality.csv", self.normality_csv())?;
        emit("brownian.csv", self.brownian_csv())?;
        emit("verdicts.csv", self.verdicts_csv())?;
        emit("summary.txt", self.summary())?;
        Ok(out)
    }

    fn label(&self, j: usize) -> &str {
        &self.components[j].label
    }

    fn components_csv(&self) -> String {
        let mut s = String::from("j,label,block,order,regime,d_x,hurst,sigma_sq,normalization,a_n\n");
        for (j, c) in self.components.iter().enumerate() {
            let _ = writeln!(
                s,
                "{j},{},{:?},{},{:?},{},{},{},{:?},{}",
                c.label,
                c.block,
                c.order,
                c.regime,
                opt(c.d_x),
                opt(c.hurst),
                opt(c.sigma_sq),
                c.normalization.mode,
                c.normalization.value
            );
        }
        s
    }

    fn covariance_csv(&self) -> String {
        let mut s = String::from("p,q,s,t,value,se,kind,target,exact,z,pass\n");
        for e in &self.covariance {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:?},{},{},{},{}",
                self.label(e.p),
                self.label(e.q),
                e.s,
                e.t,
                e.empirical.value,
                e.empirical.se,
                e.kind,
                opt(e.target),
                e.exact,
                opt(e.z),
                e.pass.map(|b| b.to_string()).unwrap_or_default()
            );
        }
        s
    }

    fn independence_csv(&self) -> String {
        let mut s = String::from("a,b,t,level,level_se,square,square_se,dcor,exact_level,asserted,pass\n");
        for e in &self.independence {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.label(e.a),
                self.label(e.b),
                e.t,
                e.level.value,
                e.level.se,
                e.square.value,
                e.square.se,
                opt(e.distance_correlation),
                e.exact_level,
                e.asserted,
                e.pass
            );
        }
        s
    }

    fn normality_csv(&self) -> String {
        let mut s = String::from("j,t,skewness,excess_kurtosis,z_skewness,z_kurtosis,flagged,asserted\n");
        for e in &self.normality {
            let d = &e.diagnostics;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                self.label(e.j),
                e.t,
                d.skewness,
                d.excess_kurtosis,
                d.z_skewness,
                d.z_kurtosis,
                d.flagged(),
                e.asserted
            );
        }
        s
    }

    fn brownian_csv(&self) -> String {
        let mut s = String::from("a,b,t,corr,se,target,exact,z,pass\n");
        for e in &self.brownian {
            let b = e.b.map(|b| self.label(b).to_string()).unwrap_or_else(|| "W_N".into());
            let _ = writeln!(
                s,
                "{},{b},{},{},{},{},{},{},{}",
                self.label(e.a),
                e.t,
                e.correlation.value,
                e.correlation.se,
                e.target,
                e.exact,
                e.z,
                e.pass
            );
        }
        s
    }

    fn verdicts_csv(&self) -> String {
        let mut s = String::from("name,pass,detail\n");
        for v in &self.verdicts {
            let _ = writeln!(s, "{},{},\"{}\"", v.name, v.pass, v.detail.replace('"', "'"));
        }
        s
    }

    /// Human-readable verdict summary.
    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "N = {}, R = {}, seed = {}, noise = {:?}", c.n, c.replications, c.seed, c.noise);
        let _ = writeln!(s, "grid = {:?}", c.grid.points());
        for (j, x) in self.components.iter().enumerate() {
            let _ = writeln!(
                s,
                "component {j} `{}`: block {:?}, order {}, {:?}, A(N) = {:.6e}",
                x.label, x.block, x.order, x.regime, x.normalization.value
            );
        }
        let _ = writeln!(s, "min eigenvalue of empirical covariance: {:.3e}", self.min_eigenvalue);
        for v in &self.verdicts {
            let _ = writeln!(s, "[{}] {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        let _ = writeln!(s, "overall: {}", if self.pass() { "PASS" } else { "FAIL" });
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Runs the configured experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.replications < 2 {
        return Err(Error::invalid("replications", "an experiment needs at least 2 replications"));
    }
    let specs = config.specs()?;
    let (chaos, blocks): (Vec<ChaosProcessSpec>, Vec<Block>) = specs.into_iter().unzip();
    let n = config.n;
    let history = config.simulation.history;
    let plans = chaos
        .iter()
        .map(|c| NormalizationPlan::exact(c, n, history))
        .collect::<Result<Vec<_>>>()?;
    let sim = VectorSimulator::new(&chaos, n, config.noise, SeedPolicy::new(config.seed), config.simulation)?;
    let sample = simulate_partial_sums(&sim, &plans, &config.grid, config.replications)?;
    assemble(config, &chaos, &blocks, &plans, &sample)
}

/// Builds the report from an existing sample.
pub fn assemble(
    config: &ExperimentConfig,
    chaos: &[ChaosProcessSpec],
    blocks: &[Block],
    plans: &[NormalizationPlan],
    sample: &PartialSumSample,
) -> Result<ExperimentReport> {
    let n = config.n;
    let tol = config.tolerances.z;
    let jn = chaos.len();
    let grid = config.grid.points();
    let gidx = config.grid.indices(n);
    let filters = chaos
        .iter()
        .map(|c| Ok(c.filter()?.effective(config.simulation.history)))
        .collect::<Result<Vec<_>>>()?;

    let mut components = Vec::with_capacity(jn);
    let mut sigma = vec![None; jn];
    for j in 0..jn {
        let reg = chaos[j].regime();
        let sigma_sq = if reg.is_srd() { Some(long_run_sigma(&chaos[j])?.1.value) } else { None };
        sigma[j] = sigma_sq.map(f64::sqrt);
        components.push(ComponentSummary {
            label: chaos[j].label().to_string(),
            block: blocks[j],
            order: chaos[j].order(),
            regime: reg.regime,
            d_x: reg.d_x,
            hurst: reg.is_lrd().then(|| reg.hurst()),
            sigma_sq,
            normalization: plans[j],
            coefficient_sum: (chaos[j].order() == 1).then(|| filters[j].coeffs.head().iter().sum()),
        });
    }

    // exact finite-N cross structure for every same-order pair
    let mut exact_cov: Vec<Vec<Option<PartialSumCovariance>>> = (0..jn).map(|_| (0..jn).map(|_| None).collect()).collect();
    for p in 0..jn {
        for q in p..jn {
            if filters[p].k == filters[q].k {
                exact_cov[p][q] = Some(PartialSumCovariance::new(&filters[p], &filters[q], n)?);
            }
        }
    }
    let exact = |p: usize, gp: usize, q: usize, gq: usize| -> f64 {
        let (a, b, ga, gb) = if p <= q { (p, q, gp, gq) } else { (q, p, gq, gp) };
        match &exact_cov[a][b] {
            Some(c) => c.cov(gidx[ga], gidx[gb]) / (plans[a].value * plans[b].value),
            None => 0.0,
        }
    };

    let mut covariance = Vec::new();
    let columns: Vec<Vec<Vec<f64>>> = (0..jn).map(|j| (0..grid.len()).map(|g| sample.column(j, g)).collect()).collect();
    for p in 0..jn {
        for q in p..jn {
            let rho = match (sigma[p], sigma[q]) {
                (Some(sp), Some(sq)) => Some(if p == q {
                    1.0
                } else {
                    filter_long_run_cross(&filters[p], &filters[q])?.value / (sp * sq)
                }),
                _ => None,
            };
            for gp in 0..grid.len() {
                let g_start = if p == q { gp } else { 0 };
                for gq in g_start..grid.len() {
                    let (s, t) = (grid[gp], grid[gq]);
                    let est = covariance_estimate(&columns[p][gp], &columns[q][gq]);
                    let (kind, target) = if chaos[p].order() != chaos[q].order() {
                        (TargetKind::CrossOrder, Some(0.0))
                    } else if let Some(rho) = rho {
                        (TargetKind::ShortMemory, Some(s.min(t) * rho))
                    } else if (blocks[p] == Block::S2) != (blocks[q] == Block::S2) {
                        (TargetKind::Independent, Some(0.0))
                    } else if p == q && blocks[p] == Block::L {
                        let reg = chaos[p].regime();
                        let h = HermiteSpec::new(reg.k, reg.d)?;
                        (TargetKind::Hermite, Some(hermite_covariance(&h, s, t)))
                    } else {
                        (TargetKind::Reported, None)
                    };
                    let z = target.map(|x| z_score(&est, x));
                    covariance.push(CovarianceEntry {
                        p,
                        q,
                        s,
                        t,
                        empirical: est,
                        kind,
                        target,
                        exact: exact(p, gp, q, gq),
                        z,
                        pass: z.map(|z| z.abs() <= tol),
                    });
                }
            }
        }
    }

    let min_eigenvalue = {
        let vars: Vec<&Vec<f64>> = columns.iter().flatten().collect();
        let m = vars.len();
        let mut c = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let v = crate::stats::covariance(vars[a], vars[b]);
                c[(a, b)] = v;
                c[(b, a)] = v;
            }
        }
        c.symmetric_eigenvalues().min()
    };

    let mut independence = Vec::new();
    let last = grid.len() - 1;
    for a in (0..jn).filter(|&j| blocks[j] == Block::S2) {
        for b in (0..jn).filter(|&j| blocks[j] != Block::S2) {
            for g in 0..grid.len() {
                let (x, y) = (&columns[a][g], &columns[b][g]);
                let level = correlation_estimate(x, y);
                let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
                let y2: Vec<f64> = y.iter().map(|v| v * v).collect();
                let square = correlation_estimate(&x2, &y2);
                let exact_level = exact(a, g, b, g) / (exact(a, g, a, g) * exact(b, g, b, g)).sqrt();
                let asserted = g == last;
                let pass = z_score(&level, 0.0).abs() <= tol && z_score(&square, 0.0).abs() <= tol;
                independence.push(IndependenceEntry {
                    a,
                    b,
                    t: grid[g],
                    level,
                    square,
                    distance_correlation: config.tolerances.distance_correlation.then(|| distance_correlation(x, y)),
                    exact_level,
                    asserted,
                    pass,
                });
            }
        }
    }

    let mut normality = Vec::new();
    if config.replications >= 500 {
        for j in 0..jn {
            for g in 0..grid.len() {
                normality.push(NormalityEntry {
                    j,
                    t: grid[g],
                    diagnostics: gaussianity_check_with(&columns[j][g], tol)?,
                    asserted: blocks[j] != Block::L,
                });
            }
        }
    }

    let brownian = if blocks.contains(&Block::S1) {
        brownian_entries(config, &components, &filters, sample, &exact, tol)
    } else {
        Vec::new()
    };

    let mut verdicts = Vec::new();
    let targeted: Vec<&CovarianceEntry> = covariance.iter().filter(|e| e.target.is_some()).collect();
    let worst = targeted.iter().filter_map(|e| e.z).fold(0.0f64, |m, z| m.max(z.abs()));
    verdicts.push(Verdict {
        name: "covariance".into(),
        pass: targeted.iter().all(|e| e.pass == Some(true)),
        detail: format!("{} targeted entries, max |z| = {worst:.2}", targeted.len()),
    });
    let scale = columns.iter().flatten().map(|c| crate::stats::variance(c)).fold(0.0f64, f64::max);
    verdicts.push(Verdict {
        name: "psd".into(),
        pass: min_eigenvalue >= -1e-12 * scale.max(1.0),
        detail: format!("min eigenvalue {min_eigenvalue:.3e}"),
    });
    if !independence.is_empty() {
        let asserted: Vec<&IndependenceEntry> = independence.iter().filter(|e| e.asserted).collect();
        let worst = asserted
            .iter()
            .map(|e| z_score(&e.level, 0.0).abs().max(z_score(&e.square, 0.0).abs()))
            .fold(0.0f64, f64::max);
        verdicts.push(Verdict {
            name: "independence".into(),
            pass: asserted.iter().all(|e| e.pass),
            detail: format!("{} asserted pairs at t = 1, max |z| = {worst:.2}", asserted.len()),
        });
    }
    if !normality.is_empty() {
        let flagged = normality.iter().filter(|e| e.asserted && e.diagnostics.flagged()).count();
        verdicts.push(Verdict {
            name: "normality".into(),
            pass: flagged == 0,
            detail: format!("{flagged} short-memory marginals flagged"),
        });
    }
    if !brownian.is_empty() {
        let worst = brownian.iter().map(|e| e.z.abs()).fold(0.0f64, f64::max);
        verdicts.push(Verdict {
            name: "brownian".into(),
            pass: brownian.iter().all(|e| e.pass),
            detail: format!("{} S1 correlations, max |z| = {worst:.2}", brownian.len()),
        });
    }

    Ok(ExperimentReport {
        config: config.clone(),
        components,
        covariance,
        min_eigenvalue,
        independence,
        normality,
        brownian,
        verdicts,
    })
}

fn brownian_entries(
    config: &ExperimentConfig,
    components: &[ComponentSummary],
    filters: &[ChaosFilter],
    sample: &PartialSumSample,
    exact: &dyn Fn(usize, usize, usize, usize) -> f64,
    tol: f64,
) -> Vec<BrownianEntry> {
    let n = config.n;
    let grid = config.grid.points();
    let gidx = config.grid.indices(n);
    let s1: Vec<usize> = (0..components.len()).filter(|&j| components[j].block == Block::S1).collect();
    let sign = |j: usize| components[j].coefficient_sum.unwrap_or(0.0).signum();
    let mut out = Vec::new();
    for (g, &t) in grid.iter().enumerate() {
        let w = sample.noise_column(g);
        for (i, &a) in s1.iter().enumerate() {
            let ya = sample.column(a, g);
            let corr = correlation_estimate(&ya, &w);
            // Cov(S_a(m), eps_1 + .. + eps_m) = sum_i a_i (m - i)_+
            let m = gidx[g];
            let cov_w: f64 = (1..m).map(|i| filters[a].coeffs.value(i as i64) * (m - i) as f64).sum();
            let ex = cov_w / ((m as f64).sqrt() * exact(a, g, a, g).sqrt() * components[a].normalization.value);
            let target = sign(a);
            if target != 0.0 {
                let z = z_score(&corr, target);
                out.push(BrownianEntry { a, b: None, t, correlation: corr, target, exact: ex, z, pass: z.abs() <= tol });
            }
            for &b in &s1[i + 1..] {
                let target = sign(a) * sign(b);
                if target == 0.0 {
                    continue;
                }
                let corr = correlation_estimate(&ya, &sample.column(b, g));
                let ex = exact(a, g, b, g) / (exact(a, g, a, g) * exact(b, g, b, g)).sqrt();
                let z = z_score(&corr, target);
                out.push(BrownianEntry { a, b: Some(b), t, correlation: corr, target, exact: ex, z, pass: z.abs() <= tol });
            }
        }
    }
    out
}
