//! Ground-truth planting, noiseless pool evaluation and the test channel.
//!
//! A pool's true state is the Boolean OR of its members' defect indicators;
//! the observed state flips with constant false-positive and false-negative
//! probabilities, identical across the A, B and AB pool families.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::matrix::IncidenceMatrix;

/// Test channel: sensitivity Pr(S=1 | Z=1) and specificity Pr(S=0 | Z=0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UncheckedNoiseModel", into = "UncheckedNoiseModel")]
pub struct NoiseModel {
    sensitivity: f64,
    specificity: f64,
}

/// Serde surrogate so deserialized values still pass validation.
#[derive(Serialize, Deserialize, Clone, Copy)]
struct UncheckedNoiseModel {
    sensitivity: f64,
    specificity: f64,
}

impl TryFrom<UncheckedNoiseModel> for NoiseModel {
    type Error = String;

    fn try_from(raw: UncheckedNoiseModel) -> std::result::Result<Self, String> {
        NoiseModel::new(raw.sensitivity, raw.specificity).map_err(|e| e.to_string())
    }
}

impl From<NoiseModel> for UncheckedNoiseModel {
    fn from(m: NoiseModel) -> Self {
        Self {
            sensitivity: m.sensitivity,
            specificity: m.specificity,
        }
    }
}

impl NoiseModel {
    pub fn new(sensitivity: f64, specificity: f64) -> Result<Self> {
        for (name, v) in [("sensitivity", sensitivity), ("specificity", specificity)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(Self {
            sensitivity,
            specificity,
        })
    }

    /// The error-free channel.
    pub fn noiseless() -> Self {
        Self {
            sensitivity: 1.0,
            specificity: 1.0,
        }
    }

    pub fn sensitivity(self) -> f64 {
        self.sensitivity
    }

    pub fn specificity(self) -> f64 {
        self.specificity
    }

    pub fn false_positive_rate(self) -> f64 {
        1.0 - self.specificity
    }

    pub fn false_negative_rate(self) -> f64 {
        1.0 - self.sensitivity
    }

    /// p(s | z): the probability of observing `s` when the pool's true state
    /// is `z`.
    pub fn prob_observed(self, s: bool, z: bool) -> f64 {
        match (s, z) {
            (true, true) => self.sensitivity,
            (false, true) => 1.0 - self.sensitivity,
            (true, false) => 1.0 - self.specificity,
            (false, false) => self.specificity,
        }
    }
}

/// Defective rates (p_A, p_B) used by the decoder. Strictly interior so the
/// prior never pins a state to probability 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UncheckedPriors", into = "UncheckedPriors")]
pub struct Priors {
    p_a: f64,
    p_b: f64,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
struct UncheckedPriors {
    p_a: f64,
    p_b: f64,
}

impl TryFrom<UncheckedPriors> for Priors {
    type Error = String;

    fn try_from(raw: UncheckedPriors) -> std::result::Result<Self, String> {
        Priors::new(raw.p_a, raw.p_b).map_err(|e| e.to_string())
    }
}

impl From<Priors> for UncheckedPriors {
    fn from(p: Priors) -> Self {
        Self {
            p_a: p.p_a,
            p_b: p.p_b,
        }
    }
}

impl Priors {
    pub fn new(p_a: f64, p_b: f64) -> Result<Self> {
        for (name, v) in [("p_a", p_a), ("p_b", p_b)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie strictly inside (0, 1), got {v}"
                )));
            }
        }
        Ok(Self { p_a, p_b })
    }

    pub fn p_a(self) -> f64 {
        self.p_a
    }

    pub fn p_b(self) -> f64 {
        self.p_b
    }

    /// Pr(X^A = x) as a factor.
    pub fn term_a(self, x: bool) -> f64 {
        if x {
            self.p_a
        } else {
            1.0 - self.p_a
        }
    }

    pub fn term_b(self, y: bool) -> f64 {
        if y {
            self.p_b
        } else {
            1.0 - self.p_b
        }
    }

    /// The independent joint prior over the four (x, y) states, indexed by
    /// s = 2x + y.
    pub fn joint(self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (s, slot) in out.iter_mut().enumerate() {
            *slot = self.term_a(s & 2 != 0) * self.term_b(s & 1 != 0);
        }
        out
    }
}

/// Planted defect indicators per item and type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub x_a: Vec<bool>,
    pub x_b: Vec<bool>,
}

impl GroundTruth {
    pub fn n_items(&self) -> usize {
        self.x_a.len()
    }

    pub fn defectives_a(&self) -> Vec<usize> {
        indices_of(&self.x_a)
    }

    pub fn defectives_b(&self) -> Vec<usize> {
        indices_of(&self.x_b)
    }
}

fn indices_of(v: &[bool]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter_map(|(i, &x)| x.then_some(i))
        .collect()
}

/// Noise-free pool states, aligned to the rows of M_A, M_B, M_AB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolStates {
    pub z_a: Vec<bool>,
    pub z_b: Vec<bool>,
    pub z_ab: Vec<bool>,
}

/// Observed pool outcomes, aligned the same way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observations {
    pub s_a: Vec<bool>,
    pub s_b: Vec<bool>,
    pub s_ab: Vec<bool>,
}

/// Plants exactly `count_a` type-A defectives and, independently, `count_b`
/// type-B defectives, each chosen uniformly without replacement. An item may
/// be defective for both types.
pub fn plant_fixed<R: Rng>(
    n: usize,
    count_a: usize,
    count_b: usize,
    rng: &mut R,
) -> Result<GroundTruth> {
    if count_a > n || count_b > n {
        return Err(Error::InvalidParameter(format!(
            "cannot plant {count_a}/{count_b} defectives among {n} items"
        )));
    }
    let mut plant = |count: usize| {
        let mut x = vec![false; n];
        for idx in rand::seq::index::sample(rng, n, count) {
            x[idx] = true;
        }
        x
    };
    let x_a = plant(count_a);
    let x_b = plant(count_b);
    Ok(GroundTruth { x_a, x_b })
}

/// Plants each indicator independently: X_j^A ~ Bernoulli(p_a) and
/// X_j^B ~ Bernoulli(p_b). The degenerate rates 0 and 1 are allowed here;
/// they are only excluded for decoder priors.
pub fn plant_bernoulli<R: Rng>(n: usize, p_a: f64, p_b: f64, rng: &mut R) -> Result<GroundTruth> {
    for (name, v) in [("p_a", p_a), ("p_b", p_b)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    let mut draw = |p: f64| (0..n).map(|_| rng.random_bool(p)).collect();
    let x_a = draw(p_a);
    let x_b = draw(p_b);
    Ok(GroundTruth { x_a, x_b })
}

fn or_over_row(m: &IncidenceMatrix, row: usize, f: impl Fn(usize) -> bool) -> bool {
    m.row_support(row).iter().any(|&j| f(j as usize))
}

/// Evaluates the noise-free pool states: A pools OR the x_A indicators,
/// B pools the x_B indicators, AB pools the per-item ORs x_A ∨ x_B.
pub fn true_pool_states(design: &PoolingDesign, truth: &GroundTruth) -> Result<PoolStates> {
    let n = design.n_items();
    if truth.x_a.len() != n || truth.x_b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "truth covers {}/{} items, design has {n}",
            truth.x_a.len(),
            truth.x_b.len()
        )));
    }
    let eval = |m: &IncidenceMatrix, f: &dyn Fn(usize) -> bool| {
        (0..m.n_rows()).map(|r| or_over_row(m, r, f)).collect()
    };
    Ok(PoolStates {
        z_a: eval(design.m_a(), &|j| truth.x_a[j]),
        z_b: eval(design.m_b(), &|j| truth.x_b[j]),
        z_ab: eval(design.m_ab(), &|j| truth.x_a[j] || truth.x_b[j]),
    })
}

/// Passes true pool states through the channel: each pool independently
/// observes 1 with probability p(1|1) if Z = 1 and p(1|0) if Z = 0.
pub fn apply_noise<R: Rng>(z: &[bool], noise: NoiseModel, rng: &mut R) -> Vec<bool> {
    z.iter()
        .map(|&zi| rng.random_bool(noise.prob_observed(true, zi)))
        .collect()
}

/// Convenience: pool states plus channel noise, drawn in the fixed order
/// z_A, z_B, z_AB so a given RNG stream always yields the same observations.
pub fn observe<R: Rng>(
    design: &PoolingDesign,
    truth: &GroundTruth,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<Observations> {
    let z = true_pool_states(design, truth)?;
    Ok(Observations {
        s_a: apply_noise(&z.z_a, noise, rng),
        s_b: apply_noise(&z.z_b, noise, rng),
        s_ab: apply_noise(&z.z_ab, noise, rng),
    })
}
