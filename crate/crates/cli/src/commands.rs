use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chaoslim::coefficients::{CoefficientSpec, Regime, SlowlyVarying};
use chaoslim::covariance::{gamma_cross_lags, power_law_slope};
use chaoslim::harness::{hypercontractivity_check, run_experiment, ExperimentConfig, HypercontractivityReport};
use chaoslim::hermite::{exact_variance_ratio, hermite_theoretical_variance, simulate_hermite, HermiteSpec};
use chaoslim::noise::{NoiseSpec, SeedPolicy};
use chaoslim::partial_sums::{partial_sum_process, NormalizationPlan, TimeGrid};
use chaoslim::process::{simulate_vector, ChaosFilter, ChaosProcessSpec, DiscreteKernel, DEFAULT_SUPPORT_CAP};
use chaoslim::stats::raw_moment_estimate;
use serde::{Deserialize, Serialize};

use crate::manifest::{now, RunManifest};
use crate::{AcfArgs, CheckArgs, CliError, Format, Global, HermiteArgs};

type Res<T> = Result<T, CliError>;

fn config_path(g: &Global) -> Res<&Path> {
    g.config.as_deref().ok_or_else(|| CliError::Usage("this command needs --config PATH".into()))
}

/// Loads the experiment config and applies `--seed` and `--grid`.
fn load_experiment(g: &Global) -> Res<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config_path(g)?)?;
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(grid) = &g.grid {
        cfg.grid = TimeGrid::parse(grid)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn echo<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).unwrap_or(serde_json::Value::Null)
}

fn create(path: &Path) -> Res<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn parse_noise(s: &str) -> Res<NoiseSpec> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        CliError::Usage(format!(
            "unknown noise `{s}`; expected gaussian, rademacher, centered_uniform or standardized_exponential"
        ))
    })
}

pub fn simulate(g: &Global) -> Res<()> {
    let started = now();
    let cfg = load_experiment(g)?;
    let specs: Vec<ChaosProcessSpec> = cfg.specs()?.into_iter().map(|s| s.0).collect();
    std::fs::create_dir_all(&g.out)?;
    let paths = simulate_vector(&specs, cfg.noise, SeedPolicy::new(cfg.seed), cfg.n, cfg.replications, cfg.simulation)?;

    let mut files = Vec::new();
    let path_file = match g.format {
        Format::Csv => {
            let p = g.out.join("paths.csv");
            let mut w = create(&p)?;
            paths.write_csv(&mut w)?;
            w.flush()?;
            p
        }
        Format::Bin => {
            let p = g.out.join("paths.bin");
            let mut w = create(&p)?;
            paths.write_bin(&mut w)?;
            w.flush()?;
            p
        }
    };
    files.push(path_file);

    let plans = specs
        .iter()
        .map(|s| NormalizationPlan::exact(s, cfg.n, cfg.simulation.history))
        .collect::<Result<Vec<_>, _>>()?;
    let ps = g.out.join("partial_sums.csv");
    let mut w = create(&ps)?;
    writeln!(w, "r,j,t,value")?;
    for r in 0..paths.replications() {
        for (j, plan) in plans.iter().enumerate() {
            let y = partial_sum_process(paths.path(r, j), plan, &cfg.grid)?;
            for (t, v) in cfg.grid.points().iter().zip(&y) {
                writeln!(w, "{r},{j},{t},{v:e}")?;
            }
        }
    }
    w.flush()?;
    files.push(ps);

    RunManifest::new("simulate", Some(cfg.seed), echo(&cfg), started).finish(&g.out, &files)?;
    println!("wrote {} replications x {} components x N = {} to {}", cfg.replications, specs.len(), cfg.n, g.out.display());
    Ok(())
}

fn inline_spec(label: &str, order: Option<usize>, values: &Option<Vec<f64>>, d: Option<f64>, m: usize) -> Res<ChaosProcessSpec> {
    let k = order.ok_or_else(|| CliError::Usage(format!("`{label}` needs an order")))?;
    let coeffs = match (values, d) {
        (Some(v), None) => CoefficientSpec::explicit(v.clone()),
        (None, Some(d)) => CoefficientSpec::reg_var(d, SlowlyVarying::default(), m),
        _ => return Err(CliError::Usage(format!("`{label}` needs exactly one of values or d"))),
    };
    Ok(ChaosProcessSpec::new(label, coeffs, k)?)
}

fn from_config(g: &Global, label: &str) -> Res<ChaosProcessSpec> {
    let cfg = ExperimentConfig::load(config_path(g)?)?;
    cfg.specs()?
        .into_iter()
        .map(|s| s.0)
        .find(|s| s.label() == label)
        .ok_or_else(|| CliError::Usage(format!("no component labelled `{label}` in the config")))
}

/// Log-spaced distinct integer lags in `1..=max`.
fn log_lags(max: usize, count: usize) -> Vec<i64> {
    let count = count.max(2);
    let top = (max.max(1) as f64).ln();
    let mut lags: Vec<i64> = (0..count)
        .map(|i| (top * i as f64 / (count - 1) as f64).exp().round() as i64)
        .collect();
    lags.dedup();
    lags
}

pub fn acf(g: &Global, a: &AcfArgs) -> Res<()> {
    let started = now();
    let p = match &a.component {
        Some(label) => from_config(g, label)?,
        None => inline_spec("x", a.order, &a.values, a.d, a.truncation)?,
    };
    let q = match (&a.with, a.with_order) {
        (Some(label), _) => Some(from_config(g, label)?),
        (None, Some(k)) => Some(inline_spec("y", Some(k), &a.with_values, a.with_d, a.truncation)?),
        (None, None) if a.with_values.is_some() || a.with_d.is_some() => {
            return Err(CliError::Usage("inline second component needs --with-order".into()))
        }
        (None, None) => None,
    };
    let fp = p.filter()?;
    let fq = match &q {
        Some(q) => q.filter()?,
        None => fp.clone(),
    };
    let lags: Vec<i64> = match a.log_lags {
        Some(c) => log_lags(a.max_lag, c),
        None => (0..=a.max_lag as i64).collect(),
    };
    let gamma = lags
        .iter()
        .map(|&n| Ok(gamma_cross_lags(&fp, &fq, n, n)?[0]))
        .collect::<Result<Vec<f64>, chaoslim::Error>>()?;

    std::fs::create_dir_all(&g.out)?;
    let file = g.out.join("acf.csv");
    let mut w = create(&file)?;
    if a.log_lags.is_some() {
        let slope = slope_of(&p, q.as_ref(), &fp, &lags)?;
        let target = match (p.regime().d_x, &q) {
            (Some(dx), None) => (2.0 * dx - 1.0).to_string(),
            _ => String::new(),
        };
        writeln!(w, "lag,gamma,local_slope,slope,target_slope")?;
        for (i, (n, v)) in lags.iter().zip(&gamma).enumerate() {
            let local = if i == 0 {
                String::new()
            } else {
                let (n0, v0) = (lags[i - 1], gamma[i - 1]);
                ((v.abs().ln() - v0.abs().ln()) / ((*n as f64).ln() - (n0 as f64).ln())).to_string()
            };
            writeln!(w, "{n},{v:e},{local},{slope},{target}")?;
        }
    } else {
        writeln!(w, "lag,gamma")?;
        for (n, v) in lags.iter().zip(&gamma) {
            writeln!(w, "{n},{v:e}")?;
        }
    }
    w.flush()?;
    let config = serde_json::json!({
        "x": {"label": p.label(), "order": p.order(), "coefficients": echo(p.coeffs())},
        "y": q.as_ref().map(|q| serde_json::json!({"label": q.label(), "order": q.order(), "coefficients": echo(q.coeffs())})),
        "lags": lags,
    });
    RunManifest::new("acf", None, config, started).finish(&g.out, &[file.clone()])?;
    println!("wrote {} lags to {}", lags.len(), file.display());
    Ok(())
}

/// Regression slope for a long-memory autocovariance; blank otherwise.
fn slope_of(p: &ChaosProcessSpec, q: Option<&ChaosProcessSpec>, f: &ChaosFilter, lags: &[i64]) -> Res<String> {
    if q.is_some() || p.regime().regime != Regime::Lrd {
        return Ok(String::new());
    }
    Ok(power_law_slope(f, lags)?.to_string())
}

pub fn experiment(g: &Global) -> Res<()> {
    let started = now();
    let cfg = load_experiment(g)?;
    let report = run_experiment(&cfg)?;
    let mut files = report.write_dir(&g.out)?;
    let json = g.out.join("report.json");
    std::fs::write(&json, serde_json::to_string_pretty(&report).map_err(chaoslim::Error::from)? + "\n")?;
    files.push(json);
    RunManifest::new("experiment", Some(cfg.seed), echo(&cfg), started).finish(&g.out, &files)?;
    print!("{}", report.summary());
    if report.pass() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.verdicts.iter().filter(|v| !v.pass).map(|v| v.name.as_str()).collect();
        Err(CliError::Verdict(failed.join(", ")))
    }
}

pub fn hermite(g: &Global, h: &HermiteArgs) -> Res<()> {
    let started = now();
    let spec = HermiteSpec::new(h.k, h.d)?;
    let grid = match &g.grid {
        Some(s) => TimeGrid::parse(s)?,
        None => TimeGrid::default(),
    };
    let noise = parse_noise(&h.noise)?;
    let seed = g.seed.unwrap_or(0);
    let sample = if h.replications > 0 {
        Some(simulate_hermite(&[spec], h.n, &grid, noise, SeedPolicy::new(seed), h.replications)?)
    } else {
        None
    };
    std::fs::create_dir_all(&g.out)?;
    let file = g.out.join("hermite.csv");
    let mut w = create(&file)?;
    writeln!(w, "t,theoretical,exact_ratio,mc_variance,mc_se")?;
    for (gi, &t) in grid.points().iter().enumerate() {
        let exact = exact_variance_ratio(&spec, h.n, t)?;
        let (mc, se) = match &sample {
            Some(s) => {
                let e = raw_moment_estimate(&s.column(0, gi), 2);
                (format!("{:e}", e.value), format!("{:e}", e.se))
            }
            None => (String::new(), String::new()),
        };
        writeln!(w, "{t},{:e},{exact:e},{mc},{se}", hermite_theoretical_variance(&spec, t))?;
    }
    w.flush()?;
    let config = serde_json::json!({
        "k": h.k, "d": h.d, "h": spec.h, "a_kd": spec.a_kd, "n": h.n,
        "replications": h.replications, "noise": noise, "grid": grid,
    });
    RunManifest::new("hermite", Some(seed), config, started).finish(&g.out, &[file.clone()])?;
    println!("H = {}, a_kd = {:e}; table in {}", spec.h, spec.a_kd, file.display());
    Ok(())
}

/// Kernel definition for `check`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub k: usize,
    #[serde(default = "default_check_r")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Noise names; empty means all four.
    #[serde(default)]
    pub noise: Vec<NoiseSpec>,
    pub kernel: KernelConfig,
}

fn default_check_r() -> usize {
    20_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    /// `count` kernels with Uniform(-1, 1) values on all increasing tuples
    /// of `1..=width`.
    RandomBanded { width: usize, #[serde(default = "one")] count: usize },
    /// Index tuples with values.
    Entries(Vec<(Vec<i64>, f64)>),
}

fn one() -> usize {
    1
}

fn load_check(g: &Global, c: &CheckArgs) -> Res<CheckConfig> {
    let mut cfg = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| chaoslim::Error::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<CheckConfig>(&text).map_err(|e| {
                chaoslim::Error::Config(format!("{}:{}:{}: {e}", p.display(), e.line(), e.column()))
            })?
        }
        None => CheckConfig {
            k: c.k,
            replications: c.replications,
            seed: 0,
            noise: if c.noise == "all" { Vec::new() } else { vec![parse_noise(&c.noise)?] },
            kernel: KernelConfig::RandomBanded { width: c.width, count: c.kernels },
        },
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if cfg.noise.is_empty() {
        cfg.noise = NoiseSpec::ALL.to_vec();
    }
    Ok(cfg)
}

pub fn check(g: &Global, c: &CheckArgs) -> Res<()> {
    let started = now();
    let cfg = load_check(g, c)?;
    let kernels = match &cfg.kernel {
        KernelConfig::RandomBanded { width, count } => {
            // kernel values come from a stream no replication uses
            let mut rng = SeedPolicy::new(cfg.seed).rng(u64::MAX);
            (0..*count)
                .map(|_| DiscreteKernel::random_banded(cfg.k, *width, &mut rng))
                .collect::<Result<Vec<_>, _>>()?
        }
        KernelConfig::Entries(e) => vec![DiscreteKernel::from_entries(cfg.k, e.clone(), DEFAULT_SUPPORT_CAP)?],
    };
    let mut reports: Vec<(usize, HypercontractivityReport)> = Vec::new();
    for (i, h) in kernels.iter().enumerate() {
        for &noise in &cfg.noise {
            reports.push((i, hypercontractivity_check(h, cfg.k, noise, cfg.replications, cfg.seed)?));
        }
    }
    std::fs::create_dir_all(&g.out)?;
    let file = g.out.join("check.csv");
    let mut w = create(&file)?;
    writeln!(
        w,
        "kernel,noise,k,support,constant,second_exact,second_mc,second_se,fourth_mc,fourth_se,bound,slack,slack_se,pass,cross_check_z,cross_check_pass"
    )?;
    for (i, r) in &reports {
        writeln!(
            w,
            "{i},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{}",
            echo(&r.noise).as_str().unwrap_or_default(),
            r.k,
            r.support,
            r.constant,
            r.second_exact,
            r.second_mc.value,
            r.second_mc.se,
            r.fourth_mc.value,
            r.fourth_mc.se,
            r.bound,
            r.slack.value,
            r.slack.se,
            r.pass,
            r.cross_check_z,
            r.cross_check_pass
        )?;
    }
    w.flush()?;
    RunManifest::new("check", Some(cfg.seed), echo(&cfg), started).finish(&g.out, &[file.clone()])?;
    let failed = reports.iter().filter(|(_, r)| !(r.pass && r.cross_check_pass)).count();
    println!("{} checks, {failed} failed; table in {}", reports.len(), file.display());
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verdict(format!("{failed} of {} hypercontractivity checks", reports.len())))
    }
}
