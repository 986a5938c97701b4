//! Exact marginal posteriors by full enumeration.
//!
//! Sums the unnormalized posterior over all 4ⁿ joint assignments — every
//! item independently in one of the four (x, y) states — and accumulates
//! per-item state masses. The likelihood factorizes over pools as
//! Π p(s_i | z_i) with z_i the OR of the members' relevant indicators.
//! Cost is O(4ⁿ · pool membership), so a work budget guards the call.
//!
//! Assignments are enumerated in pairs (m, τ(m)) where τ transposes the two
//! indicator bits of every item; contributions of a pair to the same bucket
//! are added together first. Combined with the symmetric products used for
//! the weights, an A/B role swap of the inputs then transposes the output
//! bit for bit, matching the decoder's behavior.

use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::matrix::IncidenceMatrix;
use crate::properties::WorkBudget;
use crate::sim::{NoiseModel, Observations, Priors};

use super::{sum4, Marginals, PoolFamily};

struct FlatPool {
    family: PoolFamily,
    members: Vec<u32>,
    observed: bool,
}

fn flatten_pools(design: &PoolingDesign, obs: &Observations) -> Result<Vec<FlatPool>> {
    let take = |m: &IncidenceMatrix, s: &[bool], family: PoolFamily| -> Result<Vec<FlatPool>> {
        if m.n_rows() != s.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} observations for {} pools",
                s.len(),
                m.n_rows()
            )));
        }
        Ok((0..m.n_rows())
            .map(|r| FlatPool {
                family,
                members: m.row_support(r).to_vec(),
                observed: s[r],
            })
            .collect())
    };
    let mut pools = take(design.m_a(), &obs.s_a, PoolFamily::A)?;
    pools.extend(take(design.m_b(), &obs.s_b, PoolFamily::B)?);
    pools.extend(take(design.m_ab(), &obs.s_ab, PoolFamily::Ab)?);
    Ok(pools)
}

/// Transposes the (x, y) bits of every item: state 2x+y becomes 2y+x.
fn transpose_states(m: u64, n: usize) -> u64 {
    let mask = if n == 32 { u64::MAX } else { (1u64 << (2 * n)) - 1 };
    let x_bits = 0xAAAA_AAAA_AAAA_AAAAu64 & mask;
    let y_bits = 0x5555_5555_5555_5555u64 & mask;
    ((m & x_bits) >> 1) | ((m & y_bits) << 1)
}

/// The exact per-item posterior over the four joint states given the pool
/// observations. Enumeration needs `4^n · (n + pool membership)` budget
/// units; intended for n ≤ 10 or so.
pub fn exact_posterior(
    design: &PoolingDesign,
    observations: &Observations,
    priors: Priors,
    noise: NoiseModel,
    budget: WorkBudget,
) -> Result<Marginals> {
    let n = design.n_items();
    if n > 31 {
        return Err(Error::InvalidParameter(format!(
            "exact enumeration supports at most 31 items, got {n}"
        )));
    }
    let pools = flatten_pools(design, observations)?;
    let membership: usize = pools.iter().map(|p| p.members.len()).sum();
    let per_term = (n + membership) as u128;
    let required = per_term.saturating_mul(1u128 << (2 * n as u32));
    budget.check(required)?;

    let ta = [priors.term_a(false), priors.term_a(true)];
    let tb = [priors.term_b(false), priors.term_b(true)];

    let weight = |m: u64| -> f64 {
        let mut ga = 1.0f64;
        let mut gb = 1.0f64;
        for j in 0..n {
            let s = ((m >> (2 * j)) & 3) as usize;
            ga *= ta[(s >> 1) & 1];
            gb *= tb[s & 1];
        }
        let mut fa = 1.0f64;
        let mut fb = 1.0f64;
        let mut fab = 1.0f64;
        for pool in &pools {
            let z = match pool.family {
                PoolFamily::A => pool.members.iter().any(|&j| (m >> (2 * j)) & 2 != 0),
                PoolFamily::B => pool.members.iter().any(|&j| (m >> (2 * j)) & 1 != 0),
                PoolFamily::Ab => pool.members.iter().any(|&j| (m >> (2 * j)) & 3 != 0),
            };
            let p = noise.prob_observed(pool.observed, z);
            match pool.family {
                PoolFamily::A => fa *= p,
                PoolFamily::B => fb *= p,
                PoolFamily::Ab => fab *= p,
            }
        }
        (ga * gb) * ((fa * fb) * fab)
    };

    let mut acc = vec![[0.0f64; 4]; n];
    let total_states = 1u64 << (2 * n as u32);
    for m in 0..total_states {
        let mt = transpose_states(m, n);
        if mt < m {
            continue;
        }
        let w = weight(m);
        if mt == m {
            for (j, slot) in acc.iter_mut().enumerate() {
                slot[((m >> (2 * j)) & 3) as usize] += w;
            }
        } else {
            let wt = weight(mt);
            for (j, slot) in acc.iter_mut().enumerate() {
                let s = ((m >> (2 * j)) & 3) as usize;
                let st = ((mt >> (2 * j)) & 3) as usize;
                if s == st {
                    slot[s] += w + wt;
                } else {
                    slot[s] += w;
                    slot[st] += wt;
                }
            }
        }
    }

    let mut joint = Vec::with_capacity(n);
    for (j, slot) in acc.iter().enumerate() {
        let total = sum4(*slot);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NumericDegeneracy(format!(
                "posterior of item {j} has zero total mass (inconsistent observations?)"
            )));
        }
        joint.push([
            slot[0] / total,
            slot[1] / total,
            slot[2] / total,
            slot[3] / total,
        ]);
    }
    Ok(Marginals::from_joint(joint))
}
