use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::closure::FarField;
use super::engine::{direct_esf, esf_rows, SpectralPlan};
use super::{ChaosFilter, ChaosProcessSpec, Engine, History, PathMatrix, SimulationOptions, AUTO_DIRECT_MAX};
use crate::error::{Error, Result};
use crate::noise::{NoiseSpec, NoiseWindow, SeedPolicy};
use crate::symfun::esf_from_power_sums;

enum Plan {
    Direct,
    Spectral(Vec<Vec<Complex64>>),
}

struct Component {
    k: usize,
    /// Near-field coefficients `a_1..`.
    a: Vec<f64>,
    plan: Plan,
    far_member: Option<usize>,
}

/// Simulates all components of a vector on one shared innovation sequence
/// per replication.
///
/// The window `eps_(1-M)..eps_N` is drawn first from the replication's
/// stream (`M` is the largest working length), followed by the far-field
/// draws when the closure is active.
pub struct VectorSimulator {
    comps: Vec<Component>,
    labels: Vec<String>,
    n: usize,
    depth: usize,
    noise: NoiseSpec,
    seeds: SeedPolicy,
    spectral: Option<SpectralPlan>,
    far: Option<FarField>,
    compensated: bool,
}

/// Paths of one replication plus the innovations that produced them.
pub struct Replication {
    pub paths: Vec<Vec<f64>>,
    pub noise: NoiseWindow,
}

impl VectorSimulator {
    pub fn new(
        specs: &[ChaosProcessSpec],
        n: usize,
        noise: NoiseSpec,
        seeds: SeedPolicy,
        opts: SimulationOptions,
    ) -> Result<Self> {
        let filters = specs.iter().map(|s| s.filter()).collect::<Result<Vec<_>>>()?;
        let labels = specs.iter().map(|s| s.label().to_string()).collect();
        Self::from_filters(filters, labels, n, noise, seeds, opts)
    }

    pub fn from_filters(
        filters: Vec<ChaosFilter>,
        labels: Vec<String>,
        n: usize,
        noise: NoiseSpec,
        seeds: SeedPolicy,
        opts: SimulationOptions,
    ) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::invalid("components", "at least one component is required"));
        }
        if n == 0 {
            return Err(Error::invalid("n", "path length must be positive"));
        }
        let depth = filters.iter().map(ChaosFilter::len).max().unwrap_or(1).max(1);
        let mut tails = Vec::new();
        let mut orders = Vec::new();
        let mut comps = Vec::with_capacity(filters.len());
        let mut fft_len = 0usize;
        for f in &filters {
            if f.k == 0 {
                return Err(Error::invalid("order", "chaos order must be at least 1"));
            }
            let closed = opts.history == History::Closure && f.has_tail();
            let a: Vec<f64> = if closed {
                (1..=(depth + n - 1) as i64).map(|i| f.coeffs.value(i)).collect()
            } else {
                f.coeffs.head().to_vec()
            };
            let spectral = match opts.engine {
                Engine::Direct => false,
                Engine::Spectral => true,
                Engine::Auto => closed || a.len() > AUTO_DIRECT_MAX,
            };
            if spectral {
                // the buffer holds the window; wrapped terms must land in its zero padding
                fft_len = fft_len.max(n - 1 + depth.max(a.len()));
            }
            let far_member = closed.then(|| {
                tails.push(*f.coeffs.tail().expect("closed filters carry a tail"));
                orders.push(f.k);
                tails.len() - 1
            });
            comps.push(Component {
                k: f.k,
                a,
                plan: if spectral { Plan::Spectral(Vec::new()) } else { Plan::Direct },
                far_member,
            });
        }
        let spectral = (fft_len > 0).then(|| SpectralPlan::new(fft_len));
        if let Some(plan) = &spectral {
            for c in comps.iter_mut() {
                if let Plan::Spectral(s) = &mut c.plan {
                    *s = plan.filter_spectra(&c.a, c.k);
                }
            }
        }
        let far = if tails.is_empty() {
            None
        } else {
            Some(FarField::new(&tails, &orders, depth, n, noise)?)
        };
        Ok(VectorSimulator {
            comps,
            labels,
            n,
            depth,
            noise,
            seeds,
            spectral,
            far,
            compensated: opts.compensated,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn components(&self) -> usize {
        self.comps.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn seeds(&self) -> SeedPolicy {
        self.seeds
    }

    /// Depth `M` of the materialized past.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn replicate(&self, r: u64) -> Replication {
        let mut stream = self.seeds.stream(self.noise, r);
        let noise = stream.window(1 - self.depth as i64, self.depth + self.n);
        let far = self.far.as_ref().map(|f| f.sample(stream.rng_mut()));
        let used = &noise.values[..self.depth + self.n - 1];

        let k_spec = self
            .comps
            .iter()
            .filter(|c| matches!(c.plan, Plan::Spectral(_)))
            .map(|c| c.k)
            .max();
        let packed = match (&self.spectral, k_spec) {
            (Some(plan), Some(k)) => plan.forward_powers(used, k),
            _ => Vec::new(),
        };

        let paths = self
            .comps
            .iter()
            .map(|c| {
                let k = c.k;
                let near = match &c.plan {
                    Plan::Direct => direct_esf(&c.a, k, used, noise.first_index, self.n, self.compensated),
                    Plan::Spectral(spectra) => {
                        let plan = self.spectral.as_ref().expect("spectral plan");
                        let rows = plan.power_sums(
                            &packed[..k.div_ceil(2)],
                            spectra,
                            k,
                            self.depth - 1,
                            self.n,
                        );
                        esf_rows(&rows, k, self.n)
                    }
                };
                match (c.far_member, &far, &self.far) {
                    (Some(m), Some(g), Some(field)) => {
                        combine_far(&near, &g[m], field.means(m), k, self.n)
                    }
                    _ => near.chunks(k + 1).map(|e| e[k]).collect(),
                }
            })
            .collect();
        Replication { paths, noise }
    }
}

fn combine_far(near: &[f64], g: &[f64], means: &[Vec<f64>], k: usize, n: usize) -> Vec<f64> {
    let mut p = vec![0.0; k];
    (0..n)
        .map(|t| {
            p[0] = g[t];
            for r in 2..=k {
                p[r - 1] = means[r - 2][t];
            }
            let far = esf_from_power_sums(&p);
            let e = &near[t * (k + 1)..(t + 1) * (k + 1)];
            (0..=k).map(|j| e[j] * far[k - j]).sum()
        })
        .collect()
}

/// `R` replications of every component on shared noise.
pub fn simulate_vector(
    specs: &[ChaosProcessSpec],
    noise: NoiseSpec,
    seeds: SeedPolicy,
    n: usize,
    replications: usize,
    opts: SimulationOptions,
) -> Result<PathMatrix> {
    let sim = VectorSimulator::new(specs, n, noise, seeds, opts)?;
    let reps: Vec<Vec<Vec<f64>>> = (0..replications as u64)
        .into_par_iter()
        .map(|r| sim.replicate(r).paths)
        .collect();
    let mut values = Vec::with_capacity(replications * specs.len() * n);
    for rep in reps {
        for path in rep {
            values.extend_from_slice(&path);
        }
    }
    Ok(PathMatrix::new(n, specs.len(), replications, seeds.master_seed, sim.labels().to_vec(), values))
}
