use chaoslim::coefficients::{CoefficientSpec, SlowlyVarying};
use chaoslim::covariance::{
    exact_partial_sum_variance, filter_gamma_auto, filter_long_run_cross, gamma_auto, gamma_auto_lags,
    gamma_cross, long_run_sigma, power_law_slope,
};
use chaoslim::noise::{generate_noise, NoiseSpec, SeedPolicy};
use chaoslim::partial_sums::{partial_sum_process, NormalizationPlan, TimeGrid};
use chaoslim::process::{simulate_vector, ChaosProcessSpec, History, SimulationOptions};
use chaoslim::stats::{correlation, covariance_estimate, mean, raw_moment_estimate, variance};
use chaoslim::symfun::esf;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn explicit(values: Vec<f64>, k: usize) -> ChaosProcessSpec {
    ChaosProcessSpec::new("x", CoefficientSpec::explicit(values), k).unwrap()
}

fn reg(d: f64, m: usize, k: usize) -> ChaosProcessSpec {
    ChaosProcessSpec::new("x", CoefficientSpec::reg_var(d, SlowlyVarying::default(), m), k).unwrap()
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 1..=max_len)
}

proptest! {
    #[test]
    fn esf_generating_function(c in prop::collection::vec(-20.0..20.0f64, 0..12)) {
        let e = esf(&c, c.len());
        for t in [1.0, -1.0, 0.5, -0.5] {
            let lhs: f64 = c.iter().map(|x| 1.0 + x * t).product();
            let rhs: f64 = e.iter().enumerate().map(|(j, v)| v * t.powi(j as i32)).sum();
            let scale: f64 = c.iter().map(|x| 1.0 + (x * t).abs()).product();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn esf_permutation_and_homogeneity(c in coeffs(12), k in 1usize..6, lambda in -3.0..3.0f64, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = c.clone();
        shuffled.shuffle(&mut SeedPolicy::new(seed).rng(0));
        let abs: Vec<f64> = c.iter().map(|x| x.abs()).collect();
        let bound = esf(&abs, k);
        let (e, s) = (esf(&c, k), esf(&shuffled, k));
        let scaled = esf(&c.iter().map(|x| lambda * x).collect::<Vec<_>>(), k);
        for j in 0..=k {
            prop_assert!((e[j] - s[j]).abs() <= 1e-12 * bound[j]);
            let want = lambda.powi(j as i32) * e[j];
            prop_assert!((scaled[j] - want).abs() <= 1e-12 * lambda.abs().powi(j as i32) * bound[j] + 1e-300);
        }
    }

    #[test]
    fn gamma_is_symmetric(a in coeffs(10), b in coeffs(10), k in 1usize..4, n in -15i64..15) {
        let (p, q) = (explicit(a, k), explicit(b, k));
        prop_assert_eq!(gamma_auto(&p, n).unwrap(), gamma_auto(&p, -n).unwrap());
        let (x, y) = (gamma_cross(&p, &q, -n).unwrap(), gamma_cross(&q, &p, n).unwrap());
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn gamma_vanishes_beyond_the_support(a in coeffs(10), k in 1usize..4) {
        let p = explicit(a.clone(), k);
        prop_assert_eq!(gamma_auto(&p, a.len() as i64).unwrap(), 0.0);
        let q = explicit(a, k + 1);
        prop_assert_eq!(gamma_cross(&p, &q, 0).unwrap(), 0.0);
    }

    #[test]
    fn cauchy_schwarz_for_long_run_sums(a in coeffs(12), b in coeffs(12), k in 1usize..3) {
        let (p, q) = (explicit(a, k), explicit(b, k));
        let (Ok((sp, _)), Ok((sq, _))) = (long_run_sigma(&p), long_run_sigma(&q)) else {
            return Ok(());
        };
        let spq = filter_long_run_cross(&p.filter().unwrap(), &q.filter().unwrap()).unwrap().value;
        prop_assert!(spq.abs() <= sp * sq + 1e-10);
    }

    #[test]
    fn autocovariance_is_positive_semidefinite(a in coeffs(12), k in 1usize..4) {
        let f = explicit(a, k).filter().unwrap();
        let g = gamma_auto_lags(&f, 50).unwrap();
        let m = DMatrix::from_fn(51, 51, |i, j| g[i.abs_diff(j)]);
        let min = m.symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-8 * g[0].max(f64::MIN_POSITIVE), "{min}");
    }

    #[test]
    fn exact_plan_has_unit_variance(a in coeffs(8), k in 1usize..3, n in 2usize..300) {
        let p = explicit(a, k);
        let v = exact_partial_sum_variance(&p, n).unwrap();
        prop_assume!(v > 1e-12);
        let plan = NormalizationPlan::exact(&p, n, History::Window).unwrap();
        prop_assert!((plan.value * plan.value / v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn increments_are_window_sums(path in prop::collection::vec(-5.0..5.0f64, 8..200), cut in 0.05..0.95f64) {
        let grid = TimeGrid::new(vec![cut, 1.0]).unwrap();
        let plan = NormalizationPlan::fixed(chaoslim::partial_sums::NormalizationMode::ExactVariance, path.len(), 1.7).unwrap();
        let y = partial_sum_process(&path, &plan, &grid).unwrap();
        let i = grid.indices(path.len())[0];
        let inc: f64 = path[i..].iter().sum::<f64>() / plan.value;
        let scale: f64 = path.iter().map(|x| x.abs()).sum::<f64>() / plan.value;
        prop_assert!((y[1] - y[0] - inc).abs() <= 1e-12 * scale);
    }

    #[test]
    fn grids_round_trip(mut pts in prop::collection::vec(0.001..0.999f64, 0..6)) {
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts.push(1.0);
        let g = TimeGrid::new(pts.clone()).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<TimeGrid>(&json).unwrap(), g);
        pts.reverse();
        prop_assert_eq!(TimeGrid::new(pts.clone()).is_ok(), pts.len() == 1);
    }
}

#[test]
fn memory_classes_separate_on_a_doubling_grid() {
    // increments of sum |gamma| over [2^j, 2^(j+1)) grow under long memory
    // and shrink under short memory
    let increments = |spec: &ChaosProcessSpec| {
        let f = spec.filter().unwrap();
        let g = gamma_auto_lags(&f, 1 << 14).unwrap();
        (6..14).map(|j| g[1 << j..1 << (j + 1)].iter().map(|x| x.abs()).sum::<f64>()).collect::<Vec<_>>()
    };
    let lrd = increments(&reg(0.4, 4096, 2));
    assert!(lrd.windows(2).all(|w| w[1] > w[0]), "{lrd:?}");
    let srd = increments(&reg(0.1, 4096, 2));
    assert!(srd.windows(2).all(|w| w[1] < w[0]), "{srd:?}");
}

#[test]
fn power_law_slope_of_long_memory_gamma() {
    let lags: Vec<i64> = (0..=10).map(|i| (1000.0 * 100f64.powf(i as f64 / 10.0)).round() as i64).collect();
    for (d, k) in [(0.3, 1), (0.4, 2), (0.45, 3)] {
        let spec = reg(d, 4096, k);
        let slope = power_law_slope(&spec.filter().unwrap(), &lags).unwrap();
        let target = 2.0 * spec.regime().d_x.unwrap() - 1.0;
        assert!((slope - target).abs() < 0.05, "k = {k}: {slope} vs {target}");
    }
}

#[test]
fn noise_fourth_moments_and_stream_independence() {
    let n = 1_000_000;
    for spec in NoiseSpec::ALL {
        let x = generate_noise(spec, SeedPolicy::new(8), 0, n);
        let m4 = raw_moment_estimate(&x, 4);
        assert!((m4.value - spec.fourth_moment()).abs() <= 4.0 * m4.se, "{spec:?}: {m4:?}");
        assert!((mean(&x)).abs() < 4.0 / (n as f64).sqrt());
        let m2 = raw_moment_estimate(&x, 2);
        assert!((m2.value - 1.0).abs() <= 4.0 * m2.se + 1e-12, "{spec:?}: {m2:?}");
    }
    let a = generate_noise(NoiseSpec::Gaussian, SeedPolicy::new(8), 0, 100_000);
    let b = generate_noise(NoiseSpec::Gaussian, SeedPolicy::new(8), 1, 100_000);
    assert!(correlation(&a, &b).abs() < 4.0 / 100_000f64.sqrt());
}

#[test]
fn simulated_moments_match_the_covariance_module() {
    // one time point per replication keeps the draws independent
    let specs = [
        ChaosProcessSpec::new("lin", CoefficientSpec::explicit(vec![1.0, -0.5, 0.25]), 1).unwrap(),
        ChaosProcessSpec::new("quad", CoefficientSpec::geometric(0.7, 12), 2).unwrap(),
        ChaosProcessSpec::new("lrd", CoefficientSpec::reg_var(0.4, SlowlyVarying::default(), 256), 2).unwrap(),
    ];
    let r = 4000;
    let n = 64;
    let opts = SimulationOptions { history: History::Window, ..Default::default() };
    let pm = simulate_vector(&specs, NoiseSpec::StandardizedExponential, SeedPolicy::new(21), n, r, opts).unwrap();
    let last = |j: usize| (0..r).map(|i| pm.path(i, j)[n - 1]).collect::<Vec<f64>>();
    for (j, spec) in specs.iter().enumerate() {
        let x = last(j);
        let sd = variance(&x).sqrt();
        assert!(mean(&x).abs() < 4.0 * sd / (r as f64).sqrt(), "{}", spec.label());
        let g0 = filter_gamma_auto(&spec.filter().unwrap().effective(History::Window), 0).unwrap();
        let m2 = raw_moment_estimate(&x, 2);
        assert!(m2.z(g0).abs() < 4.0, "{}: {m2:?} vs {g0}", spec.label());
    }
    // different chaos orders are uncorrelated
    let c = covariance_estimate(&last(0), &last(1));
    assert!(c.z(0.0).abs() < 4.0, "{c:?}");
}
