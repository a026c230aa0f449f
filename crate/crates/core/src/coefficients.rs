//! Coefficient sequences `a_1, a_2, ...` and their memory classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in slowly varying functions `L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowlyVarying {
    /// `L(x) = c`.
    Constant { c: f64 },
    /// `L(x) = (1 + ln x)^p`.
    LogPower { p: f64 },
    /// `L(x) = ln(e + ln x)`.
    IteratedLog,
}

impl Default for SlowlyVarying {
    fn default() -> Self {
        SlowlyVarying::Constant { c: 1.0 }
    }
}

impl SlowlyVarying {
    /// `L(x)` for `x >= 1`.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { c } => c,
            SlowlyVarying::LogPower { p } => (1.0 + x.ln()).powf(p),
            SlowlyVarying::IteratedLog => (std::f64::consts::E + x.ln()).ln(),
        }
    }

    /// `d/dx ln L(x)`.
    pub fn log_derivative(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { .. } => 0.0,
            SlowlyVarying::LogPower { p } => p / (x * (1.0 + x.ln())),
            SlowlyVarying::IteratedLog => {
                let inner = std::f64::consts::E + x.ln();
                1.0 / (x * inner * inner.ln())
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SlowlyVarying::Constant { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SlowlyVarying::Constant { c } if !(c.is_finite() && c > 0.0) => {
                Err(Error::invalid("l.c", format!("must be positive and finite, got {c}")))
            }
            SlowlyVarying::LogPower { p } if !p.is_finite() => {
                Err(Error::invalid("l.p", format!("must be finite, got {p}")))
            }
            _ => Ok(()),
        }
    }
}

/// The shape of a coefficient sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientFamily {
    /// `a_i = i^(d-1) L(i)` with `0 < d < 1/2`.
    RegVar {
        d: f64,
        #[serde(default)]
        l: SlowlyVarying,
    },
    /// A finite list, zero beyond its end.
    Explicit { values: Vec<f64> },
    /// A finite list with a declared envelope `|a_i| <= c i^(d-1)`.
    BoundedDecay { d: f64, c: f64, values: Vec<f64> },
}

/// A coefficient family plus the working length `M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    pub family: CoefficientFamily,
    pub truncation: usize,
}

impl CoefficientSpec {
    pub fn reg_var(d: f64, l: SlowlyVarying, truncation: usize) -> Self {
        CoefficientSpec {
            family: CoefficientFamily::RegVar { d, l },
            truncation,
        }
    }

    /// Explicit values with `M` equal to their count.
    pub fn explicit(values: Vec<f64>) -> Self {
        let truncation = values.len();
        CoefficientSpec {
            family: CoefficientFamily::Explicit { values },
            truncation,
        }
    }

    /// `a_i = r^(i-1)` for `i = 1..=len`.
    pub fn geometric(ratio: f64, len: usize) -> Self {
        Self::explicit((0..len).map(|i| ratio.powi(i as i32)).collect())
    }

    /// The declared memory exponent; `None` for explicit sequences, which
    /// are finitely supported and therefore short-memory for every order.
    pub fn memory_d(&self) -> Option<f64> {
        match self.family {
            CoefficientFamily::RegVar { d, .. } | CoefficientFamily::BoundedDecay { d, .. } => {
                Some(d)
            }
            CoefficientFamily::Explicit { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation == 0 {
            return Err(Error::invalid("truncation", "must be a positive integer"));
        }
        match &self.family {
            CoefficientFamily::RegVar { d, l } => {
                if !(d.is_finite() && *d > 0.0 && *d < 0.5) {
                    return Err(Error::invalid("d", format!("must lie in (0, 1/2), got {d}")));
                }
                l.validate()
            }
            CoefficientFamily::Explicit { values } => check_finite(values),
            CoefficientFamily::BoundedDecay { d, c, values } => {
                if !(d.is_finite() && *d < 0.5) {
                    return Err(Error::invalid("d", format!("must be below 1/2, got {d}")));
                }
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::invalid("c", format!("must be positive, got {c}")));
                }
                check_finite(values)?;
                for (i, v) in values.iter().enumerate() {
                    let bound = c * ((i + 1) as f64).powf(d - 1.0);
                    if v.abs() > bound * (1.0 + 1e-12) {
                        return Err(Error::invalid(
                            format!("values[{i}]"),
                            format!("|{v}| exceeds the declared bound {bound}"),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Validates and evaluates the sequence.
    pub fn build(&self) -> Result<Coefficients> {
        self.validate()?;
        let m = self.truncation;
        Ok(match &self.family {
            CoefficientFamily::RegVar { d, l } => {
                let tail = RegVarTail { d: *d, l: *l };
                Coefficients {
                    head: (1..=m).map(|i| tail.eval(i as f64)).collect(),
                    tail: Some(tail),
                }
            }
            CoefficientFamily::Explicit { values }
            | CoefficientFamily::BoundedDecay { values, .. } => {
                let mut head = values.clone();
                head.resize(m, 0.0);
                Coefficients { head, tail: None }
            }
        })
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(format!("values[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

/// The closed form `a(x) = x^(d-1) L(x)` that continues a regularly varying
/// sequence past its working length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegVarTail {
    pub d: f64,
    pub l: SlowlyVarying,
}

impl RegVarTail {
    pub fn eval(&self, x: f64) -> f64 {
        x.powf(self.d - 1.0) * self.l.eval(x)
    }
}

/// An evaluated sequence: explicit values `a_1..a_M`, optionally continued
/// by a closed-form tail for `i > M`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    head: Vec<f64>,
    tail: Option<RegVarTail>,
}

impl Coefficients {
    /// A finitely supported sequence.
    pub fn from_values(values: Vec<f64>) -> Self {
        Coefficients { head: values, tail: None }
    }

    /// Working length `M`.
    pub fn len(&self) -> usize {
        self.head.len()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty()
    }

    /// `a_1..a_M`.
    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail(&self) -> Option<&RegVarTail> {
        self.tail.as_ref()
    }

    /// `a_i` with `a_i = 0` for `i <= 0`.
    pub fn value(&self, i: i64) -> f64 {
        if i <= 0 {
            0.0
        } else if (i as usize) <= self.head.len() {
            self.head[i as usize - 1]
        } else {
            self.tail.map_or(0.0, |t| t.eval(i as f64))
        }
    }

    /// Drops the closed-form tail: `a_i = 0` for `i > M`.
    pub fn truncated(&self) -> Coefficients {
        Coefficients { head: self.head.clone(), tail: None }
    }

    /// Keeps `a_1..a_m` and zeroes everything beyond.
    pub fn truncate_to(&self, m: usize) -> Coefficients {
        let mut head: Vec<f64> = (1..=m as i64).map(|i| self.value(i)).collect();
        head.truncate(m);
        Coefficients { head, tail: None }
    }

    /// Same sequence with a different working length.
    pub fn with_len(&self, m: usize) -> Coefficients {
        match self.tail {
            Some(t) => Coefficients {
                head: (1..=m).map(|i| t.eval(i as f64)).collect(),
                tail: Some(t),
            },
            None => self.truncate_to(m),
        }
    }

    /// Every coefficient is nonnegative, including the tail.
    pub fn is_nonnegative(&self) -> bool {
        self.head.iter().all(|&v| v >= 0.0)
    }
}

/// Evaluates `a_1..a_M` for a coefficient spec.
pub fn build_coefficients(spec: &CoefficientSpec) -> Result<Vec<f64>> {
    Ok(spec.build()?.head)
}

/// Short- or long-range dependence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Srd,
    Lrd,
    Boundary,
}

/// Classification of a `(d, k)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryRegime {
    pub regime: Regime,
    pub d: f64,
    pub k: usize,
    /// `1/2 - k (1/2 - d)`, present only under long memory.
    pub d_x: Option<f64>,
}

impl MemoryRegime {
    /// Finitely supported coefficients: short memory whatever the order.
    pub fn finite_support(k: usize) -> Self {
        MemoryRegime { regime: Regime::Srd, d: f64::NEG_INFINITY, k, d_x: None }
    }

    pub fn is_lrd(&self) -> bool {
        self.regime == Regime::Lrd
    }

    pub fn is_srd(&self) -> bool {
        self.regime == Regime::Srd
    }

    /// `H = 1 + k (d - 1/2)`; meaningful under long memory.
    pub fn hurst(&self) -> f64 {
        1.0 + self.k as f64 * (self.d - 0.5)
    }
}

/// The order-`k` boundary `(1/2)(1 - 1/k)` between the two regimes.
pub fn memory_boundary(k: usize) -> f64 {
    (k as f64 - 1.0) / (2.0 * k as f64)
}

/// Classifies `(d, k)`; `d >= 1/2` lies outside the model.
pub fn classify_memory(d: f64, k: usize) -> Result<MemoryRegime> {
    if k == 0 {
        return Err(Error::invalid("k", "chaos order must be at least 1"));
    }
    if d.is_nan() || d >= 0.5 {
        return Err(Error::invalid("d", format!("must be below 1/2, got {d}")));
    }
    let b = memory_boundary(k);
    let regime = if (d - b).abs() <= 1e-12 {
        Regime::Boundary
    } else if d > b {
        Regime::Lrd
    } else {
        Regime::Srd
    };
    let d_x = (regime == Regime::Lrd).then(|| 0.5 - k as f64 * (0.5 - d));
    Ok(MemoryRegime { regime, d, k, d_x })
}

/// `sum_{i>=1} a_{n+i} b_i` over the working lengths of two finite sequences
/// given as `a_1..`, `b_1..`.
pub fn tail_product_sum(a: &[f64], b: &[f64], n: usize) -> f64 {
    if n >= a.len() {
        return 0.0;
    }
    a[n..].iter().zip(b).map(|(x, y)| x * y).sum()
}
