//! Belief propagation over the three pool families, and the exact oracle.
//!
//! Each item carries a joint state (x, y) ∈ {0,1}²: x is its type-A defect
//! indicator, y its type-B indicator. Throughout the crate the four states
//! are indexed s = 2x + y, i.e. [(0,0), (0,1), (1,0), (1,1)].
//!
//! The decoder passes messages over the union of the three bipartite graphs
//! with synchronous (flooding) sweeps:
//!
//! - pool-to-item messages R, per pool family for observation s_G:
//!
//!   ```text
//!   A :  R(0,y) = p(s_G|1) + (p(s_G|0) − p(s_G|1)) · Π_{c'≠c} (Q̄_{c'}(0,0) + Q̄_{c'}(0,1))
//!        R(1,y) = p(s_G|1)
//!   B :  symmetric, with the marginal Q̄(0,0) + Q̄(1,0)
//!   AB:  R(0,0) uses Π Q̄_{c'}(0,0); all other states get p(s_G|1)
//!   ```
//!
//!   The product runs over the pool's other members and is their probability
//!   of contributing a 0 to the OR.
//!
//! - item-to-pool messages Q, per edge (c, G):
//!
//!   ```text
//!   Q(x,y) ∝ Pr(X^A = x) Pr(X^B = y) · Π_{G'∋c, G'≠G} R̄_{G'c}(x,y)
//!   ```
//!
//!   normalized to sum 1 over the four states.
//!
//! Iteration stops once the largest state-wise change of any Q̄ message
//! drops below ε; the per-item marginals then use the same product over
//! *all* incident pools. R̄ is R normalized to sum 1 per edge — a pure
//! numeric-stability choice: any per-edge rescaling of R cancels in the
//! normalizations, which `renormalize_messages` lets tests confirm.
//!
//! Floating-point effects are kept symmetric deliberately: state sums are
//! grouped as (s₀₀+s₁₁)+(s₀₁+s₁₀), per-item products as
//! prior·(Π_A·Π_B)·Π_AB, and the leave-one-out products inside a pool are
//! folded in value order. Swapping the A/B roles or relabeling items then
//! permutes outputs bit for bit, and results do not depend on thread count.

mod exact;
mod graph;

pub use exact::exact_posterior;
pub use graph::{FactorGraph, PoolFamily};

use serde::{Deserialize, Serialize};

use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::par;
use crate::sim::{NoiseModel, Observations, Priors};

/// Stopping rule for the message-passing loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BpSettings {
    /// Convergence threshold on the largest Q̄ change per sweep.
    pub epsilon: f64,
    /// Hard cap on sweeps; marginals are still produced when it is hit.
    pub max_iterations: u32,
    /// Normalize R messages per edge. Disabling this leaves raw R values in
    /// place; marginals are unchanged up to rounding.
    pub renormalize_messages: bool,
}

impl Default for BpSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_iterations: 200,
            renormalize_messages: true,
        }
    }
}

/// Per-item joint posteriors over the four (x, y) states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    joint: Vec<[f64; 4]>,
}

impl Marginals {
    pub(crate) fn from_joint(joint: Vec<[f64; 4]>) -> Self {
        Self { joint }
    }

    pub fn n_items(&self) -> usize {
        self.joint.len()
    }

    /// The normalized joint distribution of item `c`, indexed by s = 2x + y.
    pub fn joint(&self, c: usize) -> [f64; 4] {
        self.joint[c]
    }

    pub fn as_slice(&self) -> &[[f64; 4]] {
        &self.joint
    }

    /// P(X_c^A = 1), i.e. the mass of states (1,0) and (1,1).
    pub fn p_defective_a(&self, c: usize) -> f64 {
        self.joint[c][2] + self.joint[c][3]
    }

    /// P(X_c^B = 1), i.e. the mass of states (0,1) and (1,1).
    pub fn p_defective_b(&self, c: usize) -> f64 {
        self.joint[c][1] + self.joint[c][3]
    }
}

/// Result of a decode: marginals plus convergence bookkeeping.
#[derive(Debug, Clone)]
pub struct BpOutcome {
    pub marginals: Marginals,
    pub converged: bool,
    pub iterations: u32,
}

fn mul4(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]]
}

/// Swap-symmetric four-state sum: (s₀₀ + s₁₁) + (s₀₁ + s₁₀).
fn sum4(v: [f64; 4]) -> f64 {
    (v[0] + v[3]) + (v[1] + v[2])
}

/// State-wise prefix and suffix products; `pre[i]` folds `vals[..i]`,
/// `suf[i]` folds `vals[i..]`.
fn prefix_suffix(vals: &[[f64; 4]]) -> (Vec<[f64; 4]>, Vec<[f64; 4]>) {
    let n = vals.len();
    let one = [1.0f64; 4];
    let mut pre = vec![one; n + 1];
    for i in 0..n {
        pre[i + 1] = mul4(pre[i], vals[i]);
    }
    let mut suf = vec![one; n + 1];
    for i in (0..n).rev() {
        suf[i] = mul4(vals[i], suf[i + 1]);
    }
    (pre, suf)
}

/// A message-passing decoder bound to one graph and one observation vector.
#[derive(Debug)]
pub struct Decoder<'g> {
    graph: &'g FactorGraph,
    /// Pool observations in pool-id order (A block, B block, AB block).
    observations: Vec<bool>,
    prior: [f64; 4],
    noise: NoiseModel,
    settings: BpSettings,
    /// Item-major Q̄ messages.
    q: Vec<[f64; 4]>,
    /// Pool-major R (or R̄) messages.
    r: Vec<[f64; 4]>,
    /// Per-item largest Q̄ change of the last sweep (NaN marks degeneracy).
    deltas: Vec<f64>,
    iterations: u32,
}

impl<'g> Decoder<'g> {
    pub fn new(
        graph: &'g FactorGraph,
        observations: &Observations,
        priors: Priors,
        noise: NoiseModel,
        settings: BpSettings,
    ) -> Result<Self> {
        if !(settings.epsilon > 0.0) || !settings.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive and finite, got {}",
                settings.epsilon
            )));
        }
        if settings.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        if observations.s_a.len() != graph.n_pools_a
            || observations.s_b.len() != graph.n_pools_b
            || observations.s_ab.len() != graph.n_pools_ab
        {
            return Err(Error::DimensionMismatch(format!(
                "observations cover {}/{}/{} pools, design has {}/{}/{}",
                observations.s_a.len(),
                observations.s_b.len(),
                observations.s_ab.len(),
                graph.n_pools_a,
                graph.n_pools_b,
                graph.n_pools_ab
            )));
        }
        let mut obs = Vec::with_capacity(graph.n_pools());
        obs.extend_from_slice(&observations.s_a);
        obs.extend_from_slice(&observations.s_b);
        obs.extend_from_slice(&observations.s_ab);
        let prior = priors.joint();
        Ok(Self {
            graph,
            observations: obs,
            prior,
            noise,
            settings,
            q: vec![prior; graph.n_edges()],
            r: vec![[0.0; 4]; graph.n_edges()],
            deltas: vec![0.0; graph.n_items],
            iterations: 0,
        })
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    /// Item-major Q̄ messages, normalized per edge. Exposed for invariant
    /// checks.
    pub fn q_messages(&self) -> &[[f64; 4]] {
        &self.q
    }

    /// One synchronous sweep: all R messages from the previous Q̄, then all
    /// Q̄ messages from the new R. Returns the largest state-wise Q̄ change.
    pub fn step(&mut self) -> Result<f64> {
        self.update_r();
        self.update_q();
        self.iterations += 1;
        if self.deltas.iter().any(|d| d.is_nan()) {
            return Err(Error::NumericDegeneracy(
                "a Q message normalized to zero mass".into(),
            ));
        }
        Ok(self.deltas.iter().fold(0.0f64, |m, &d| m.max(d)))
    }

    fn update_r(&mut self) {
        let Self {
            graph,
            observations,
            noise,
            settings,
            q,
            r,
            ..
        } = &mut *self;
        let graph = *graph;
        let q: &[[f64; 4]] = q;
        let observations: &[bool] = observations;
        let noise = *noise;
        let renorm = settings.renormalize_messages;

        let chunks = par::split_at_offsets(r, &graph.pool_offsets);
        par::for_each_chunk(chunks, |p, r_chunk| {
            let pool = &graph.pools[p];
            let deg = pool.members.len();
            if deg == 0 {
                return;
            }
            let s = observations[p];
            let p1 = noise.prob_observed(s, true);
            let p0 = noise.prob_observed(s, false);
            let base = graph.pool_offsets[p];

            // each member's probability of contributing a 0 to the OR
            let mut vals = Vec::with_capacity(deg);
            for k in 0..deg {
                let qv = &q[graph.pool_slot_item_edge[base + k]];
                vals.push(match pool.family {
                    PoolFamily::A => qv[0] + qv[1],
                    PoolFamily::B => qv[0] + qv[2],
                    PoolFamily::Ab => qv[0],
                });
            }
            // Fold the leave-one-out products in value order and reuse the
            // first computation for tied values: the result per member then
            // depends only on the value multiset, not on slot order.
            let mut order: Vec<usize> = (0..deg).collect();
            order.sort_unstable_by(|&i, &j| vals[i].total_cmp(&vals[j]));
            let mut pre = vec![1.0f64; deg + 1];
            for (i, &slot) in order.iter().enumerate() {
                pre[i + 1] = pre[i] * vals[slot];
            }
            let mut suf = vec![1.0f64; deg + 1];
            for i in (0..deg).rev() {
                suf[i] = vals[order[i]] * suf[i + 1];
            }
            let mut prev_val = f64::NAN;
            let mut prev_loo = 0.0f64;
            for (i, &slot) in order.iter().enumerate() {
                let v = vals[slot];
                let loo = if i > 0 && v == prev_val {
                    prev_loo
                } else {
                    // a product of probabilities; clamp rounding residue
                    (pre[i] * suf[i + 1]).clamp(0.0, 1.0)
                };
                prev_val = v;
                prev_loo = loo;
                let low = p1 + (p0 - p1) * loo;
                let mut msg = match pool.family {
                    PoolFamily::A => [low, low, p1, p1],
                    PoolFamily::B => [low, p1, low, p1],
                    PoolFamily::Ab => [low, p1, p1, p1],
                };
                if renorm {
                    let total = sum4(msg);
                    if total > 0.0 {
                        for m in &mut msg {
                            *m /= total;
                        }
                    }
                }
                r_chunk[slot] = msg;
            }
        });
    }

    fn update_q(&mut self) {
        let Self {
            graph,
            prior,
            q,
            r,
            deltas,
            ..
        } = &mut *self;
        let graph = *graph;
        let prior = *prior;
        let r: &[[f64; 4]] = r;

        let chunks = par::split_at_offsets(q, &graph.item_offsets);
        par::for_each_chunk_with(chunks, deltas, |c, q_chunk, delta| {
            *delta = 0.0;
            let deg = q_chunk.len();
            if deg == 0 {
                return;
            }
            let base = graph.item_offsets[c];
            let a_len = graph.item_a_len[c] as usize;
            let ab_start = graph.item_ab_start[c] as usize;

            let rv: Vec<[f64; 4]> = (0..deg)
                .map(|l| r[graph.item_edge_pool_slot[base + l]])
                .collect();
            let (pre_a, suf_a) = prefix_suffix(&rv[..a_len]);
            let (pre_b, suf_b) = prefix_suffix(&rv[a_len..ab_start]);
            let (pre_ab, suf_ab) = prefix_suffix(&rv[ab_start..]);
            let full_a = pre_a[a_len];
            let full_b = pre_b[ab_start - a_len];
            let full_ab = pre_ab[deg - ab_start];

            let mut dmax = 0.0f64;
            for l in 0..deg {
                let (fa, fb, fab) = if l < a_len {
                    (mul4(pre_a[l], suf_a[l + 1]), full_b, full_ab)
                } else if l < ab_start {
                    let i = l - a_len;
                    (full_a, mul4(pre_b[i], suf_b[i + 1]), full_ab)
                } else {
                    let i = l - ab_start;
                    (full_a, full_b, mul4(pre_ab[i], suf_ab[i + 1]))
                };
                let mut qn = [0.0f64; 4];
                for s in 0..4 {
                    qn[s] = (prior[s] * (fa[s] * fb[s])) * fab[s];
                }
                let total = sum4(qn);
                if !(total > 0.0) || !total.is_finite() {
                    *delta = f64::NAN;
                    return;
                }
                for s in 0..4 {
                    let nv = qn[s] / total;
                    let change = (nv - q_chunk[l][s]).abs();
                    if change > dmax {
                        dmax = change;
                    }
                    q_chunk[l][s] = nv;
                }
            }
            *delta = dmax;
        });
    }

    /// Per-item marginals from the current R messages: the prior times the
    /// product over *all* incident pools, normalized. Items with no pools
    /// keep their prior. Call after at least one sweep (as [`run`](Self::run)
    /// does) unless the graph has no edges.
    pub fn marginals(&self) -> Result<Marginals> {
        let graph = self.graph;
        let mut joint = Vec::with_capacity(graph.n_items);
        for c in 0..graph.n_items {
            let base = graph.item_offsets[c];
            let deg = graph.item_degree(c);
            let a_len = graph.item_a_len[c] as usize;
            let ab_start = graph.item_ab_start[c] as usize;
            let mut fa = [1.0f64; 4];
            let mut fb = [1.0f64; 4];
            let mut fab = [1.0f64; 4];
            for l in 0..deg {
                let rv = self.r[graph.item_edge_pool_slot[base + l]];
                if l < a_len {
                    fa = mul4(fa, rv);
                } else if l < ab_start {
                    fb = mul4(fb, rv);
                } else {
                    fab = mul4(fab, rv);
                }
            }
            let mut qn = [0.0f64; 4];
            for s in 0..4 {
                qn[s] = (self.prior[s] * (fa[s] * fb[s])) * fab[s];
            }
            let total = sum4(qn);
            if !(total > 0.0) || !total.is_finite() {
                return Err(Error::NumericDegeneracy(format!(
                    "marginal of item {c} normalized to zero mass"
                )));
            }
            for v in &mut qn {
                *v /= total;
            }
            joint.push(qn);
        }
        Ok(Marginals::from_joint(joint))
    }

    /// Sweeps until the Q̄ changes drop below ε or the iteration cap is hit,
    /// then computes marginals. `converged == false` flags a capped run; its
    /// marginals are still returned.
    pub fn run(&mut self) -> Result<BpOutcome> {
        let mut converged = false;
        for _ in 0..self.settings.max_iterations {
            let delta = self.step()?;
            if delta < self.settings.epsilon {
                converged = true;
                break;
            }
        }
        Ok(BpOutcome {
            marginals: self.marginals()?,
            converged,
            iterations: self.iterations,
        })
    }
}

/// Builds the graph for `design` and decodes `observations` in one call.
pub fn run_bp(
    design: &PoolingDesign,
    observations: &Observations,
    priors: Priors,
    noise: NoiseModel,
    settings: BpSettings,
) -> Result<BpOutcome> {
    let graph = FactorGraph::new(design);
    Decoder::new(&graph, observations, priors, noise, settings)?.run()
}
