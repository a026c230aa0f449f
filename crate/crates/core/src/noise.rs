//! Seeded i.i.d. innovations with mean 0 and variance 1.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Innovation distribution. Every variant has mean 0, variance 1 and all
/// moments finite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    Gaussian,
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    CenteredUniform,
    /// `Exp(1) - 1`.
    StandardizedExponential,
}

impl NoiseSpec {
    pub const ALL: [NoiseSpec; 4] = [
        NoiseSpec::Gaussian,
        NoiseSpec::Rademacher,
        NoiseSpec::CenteredUniform,
        NoiseSpec::StandardizedExponential,
    ];

    /// `E[eps^r]`.
    pub fn raw_moment(&self, r: u32) -> f64 {
        let even = r % 2 == 0;
        match self {
            NoiseSpec::Gaussian => {
                if even {
                    (1..r).step_by(2).map(|j| j as f64).product()
                } else {
                    0.0
                }
            }
            NoiseSpec::Rademacher => {
                if even {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseSpec::CenteredUniform => {
                if even {
                    3f64.powi(r as i32 / 2) / (r as f64 + 1.0)
                } else {
                    0.0
                }
            }
            // central moments of Exp(1) are the derangement numbers
            NoiseSpec::StandardizedExponential => {
                let mut d = 1.0;
                for j in 1..=r {
                    d = j as f64 * d + if j % 2 == 0 { 1.0 } else { -1.0 };
                }
                d
            }
        }
    }

    /// `E[eps^4]`.
    pub fn fourth_moment(&self) -> f64 {
        self.raw_moment(4)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSpec::Gaussian => rng.sample(StandardNormal),
            NoiseSpec::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            NoiseSpec::CenteredUniform => (2.0 * rng.random::<f64>() - 1.0) * SQRT3,
            NoiseSpec::StandardizedExponential => {
                let x: f64 = rng.sample(Exp1);
                x - 1.0
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.sample(rng);
        }
    }
}

/// Derives one independent stream per replication from a master seed.
///
/// Streams are ChaCha8 keyed by the master seed with the replication index
/// as stream id, so they never overlap and need no coordination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        SeedPolicy { master_seed }
    }

    pub fn rng(&self, r: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(r);
        rng
    }

    pub fn stream(&self, spec: NoiseSpec, r: u64) -> NoiseStream {
        NoiseStream { spec, rng: self.rng(r) }
    }
}

/// The innovation stream of one replication.
pub struct NoiseStream {
    spec: NoiseSpec,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn spec(&self) -> NoiseSpec {
        self.spec
    }

    pub fn next_value(&mut self) -> f64 {
        self.spec.sample(&mut self.rng)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        self.spec.fill(&mut self.rng, out);
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Standard normal draws from the same stream, whatever the spec.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.rng.sample(StandardNormal);
        }
    }

    /// `eps_first, .., eps_(first + len - 1)`.
    pub fn window(&mut self, first_index: i64, len: usize) -> NoiseWindow {
        let mut values = vec![0.0; len];
        self.fill(&mut values);
        NoiseWindow { first_index, values }
    }
}

/// `length` draws for replication `r`.
pub fn generate_noise(spec: NoiseSpec, policy: SeedPolicy, r: u64, length: usize) -> Vec<f64> {
    let mut out = vec![0.0; length];
    policy.stream(spec, r).fill(&mut out);
    out
}

/// Realized innovations `eps_i` for `i` in `first_index..first_index + len`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseWindow {
    pub first_index: i64,
    pub values: Vec<f64>,
}

impl NoiseWindow {
    pub fn new(first_index: i64, values: Vec<f64>) -> Self {
        NoiseWindow { first_index, values }
    }

    pub fn last_index(&self) -> i64 {
        self.first_index + self.values.len() as i64 - 1
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        lo >= self.first_index && hi <= self.last_index()
    }

    pub fn get(&self, index: i64) -> Result<f64> {
        if self.covers(index, index) {
            Ok(self.values[(index - self.first_index) as usize])
        } else {
            Err(Error::NoiseWindow {
                index,
                first: self.first_index,
                last: self.last_index(),
            })
        }
    }
}
