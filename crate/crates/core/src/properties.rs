//! Exact brute-force verifiers for the combinatorial design properties.
//!
//! All checks are exhaustive — that is the point of an oracle. Each carries
//! an explicit work budget and refuses instances that would exceed it rather
//! than silently sampling.
//!
//! Terminology (standard in the group-testing literature):
//! - *d-disjunct*: no column's support is contained in the union of any `d`
//!   other columns' supports.
//! - *d̄-separable*: the unions of at most `d` supports are pairwise distinct
//!   across distinct index sets (the empty union participates).
//! - *(2, d̄)-separable*: M_A and M_B are (d−1)-disjunct and both stacks
//!   [M_A; M_AB], [M_B; M_AB] are d̄-separable.
//! - *unique collinearity*: any two pools share at most one item, i.e. the
//!   bipartite pool–item graph has no 4-cycle.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};

use crate::design::PoolingDesign;
use crate::error::{Error, Result};
use crate::matrix::IncidenceMatrix;

/// Unit budget for the exhaustive checks. One unit is roughly one candidate
/// subset (property checks) or one enumerated term (exact posterior).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkBudget {
    units: u128,
}

impl WorkBudget {
    pub const fn new(units: u128) -> Self {
        Self { units }
    }

    pub const fn unlimited() -> Self {
        Self { units: u128::MAX }
    }

    pub const fn units(self) -> u128 {
        self.units
    }

    pub(crate) fn check(self, required: u128) -> Result<()> {
        if required > self.units {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.units,
            });
        }
        Ok(())
    }
}

impl Default for WorkBudget {
    /// 10⁸ units: enough for every q ≤ 5 instance and the q = 3 disjunctness
    /// sweeps, while refusing the infeasible q = 7 enumerations loudly.
    fn default() -> Self {
        Self::new(100_000_000)
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Per-column row bitsets; word count covers `n_rows` bits.
fn column_bitsets(m: &IncidenceMatrix) -> (usize, Vec<Vec<u64>>) {
    let words = m.n_rows().div_ceil(64);
    let sets = (0..m.n_cols())
        .map(|c| {
            let mut bits = vec![0u64; words];
            for &r in m.col_support(c) {
                bits[r as usize / 64] |= 1u64 << (r % 64);
            }
            bits
        })
        .collect();
    (words, sets)
}

fn is_subset(sub: &[u64], sup: &[u64]) -> bool {
    sub.iter().zip(sup).all(|(a, b)| a & !b == 0)
}

/// Checks the unique collinearity condition: every pair of distinct rows
/// shares at most one common column. Returns the first violating row pair,
/// or `None` if the condition holds.
pub fn unique_collinearity_violation(m: &IncidenceMatrix) -> Option<(usize, usize)> {
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    for c in 0..m.n_cols() {
        let support = m.col_support(c);
        for (i, &r1) in support.iter().enumerate() {
            for &r2 in &support[i + 1..] {
                if !seen.insert((r1, r2)) {
                    return Some((r1 as usize, r2 as usize));
                }
            }
        }
    }
    None
}

/// `true` iff the matrix satisfies unique collinearity (no 4-cycle).
pub fn is_unique_collinear(m: &IncidenceMatrix) -> bool {
    unique_collinearity_violation(m).is_none()
}

/// Exhaustively checks d-disjunctness: for every column T₀ and every set of
/// `d` other distinct columns, T₀ is not covered by their union.
///
/// Refuses with [`Error::BudgetExceeded`] if `n_cols · C(n_cols−1, d)`
/// exceeds the budget.
pub fn is_disjunct(m: &IncidenceMatrix, d: usize, budget: WorkBudget) -> Result<bool> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let n = m.n_cols();
    if n == 0 || n - 1 < d {
        // no way to pick d distinct other columns
        return Ok(true);
    }
    let required = (n as u128).saturating_mul(binom(n - 1, d));
    budget.check(required)?;

    let (words, cols) = column_bitsets(m);
    let mut union = vec![0u64; words];
    for target in 0..n {
        if covered_by_some_d_union(&cols, target, d, &mut union, 0, 0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Depth-first search over ascending column choices. `union` holds the OR of
/// the columns chosen so far; entries above `depth` are restored on return.
/// An early cover at depth < d still implies a full d-cover because at least
/// d other columns exist.
fn covered_by_some_d_union(
    cols: &[Vec<u64>],
    target: usize,
    d: usize,
    union: &mut [u64],
    next: usize,
    depth: usize,
) -> bool {
    if is_subset(&cols[target], union) {
        return true;
    }
    if depth == d {
        return false;
    }
    // enough columns left (excluding target) to reach depth d?
    let remaining = cols.len() - next;
    let needed = d - depth + usize::from((next..cols.len()).contains(&target));
    if remaining < needed {
        return false;
    }
    for c in next..cols.len() {
        if c == target {
            continue;
        }
        let saved: Vec<u64> = union.to_vec();
        for (w, cw) in union.iter_mut().zip(&cols[c]) {
            *w |= cw;
        }
        if covered_by_some_d_union(cols, target, d, union, c + 1, depth + 1) {
            return true;
        }
        union.copy_from_slice(&saved);
    }
    false
}

/// Exhaustively checks d̄-separability: the unions of every subset of at
/// most `d` column supports (including the empty subset) must be pairwise
/// distinct across distinct subsets.
///
/// Refuses if `Σ_{t≤d} C(n_cols, t)` exceeds the budget.
pub fn is_separable(m: &IncidenceMatrix, d: usize, budget: WorkBudget) -> Result<bool> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let n = m.n_cols();
    let required: u128 = (0..=d.min(n)).map(|t| binom(n, t)).fold(0, u128::saturating_add);
    budget.check(required)?;

    let (words, cols) = column_bitsets(m);
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    seen.insert(vec![0u64; words], ());
    let mut union = vec![0u64; words];
    Ok(distinct_unions(&cols, d, &mut union, 0, &mut seen))
}

fn distinct_unions(
    cols: &[Vec<u64>],
    depth_left: usize,
    union: &mut [u64],
    next: usize,
    seen: &mut HashMap<Vec<u64>, ()>,
) -> bool {
    if depth_left == 0 {
        return true;
    }
    for c in next..cols.len() {
        let saved: Vec<u64> = union.to_vec();
        for (w, cw) in union.iter_mut().zip(&cols[c]) {
            *w |= cw;
        }
        match seen.entry(union.to_vec()) {
            Entry::Occupied(_) => return false,
            Entry::Vacant(v) => {
                v.insert(());
            }
        }
        if !distinct_unions(cols, depth_left - 1, union, c + 1, seen) {
            return false;
        }
        union.copy_from_slice(&saved);
    }
    true
}

/// Checks the (2, d̄)-separability of a two-type design: both M_A and M_B
/// must be (d−1)-disjunct (vacuous for d = 1) and both stacked matrices
/// [M_A; M_AB], [M_B; M_AB] must be d̄-separable.
pub fn is_two_type_separable(
    design: &PoolingDesign,
    d: usize,
    budget: WorkBudget,
) -> Result<bool> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    if d >= 2 {
        if !is_disjunct(design.m_a(), d - 1, budget)? {
            return Ok(false);
        }
        if !is_disjunct(design.m_b(), d - 1, budget)? {
            return Ok(false);
        }
    }
    if !is_separable(&design.stacked_a()?, d, budget)? {
        return Ok(false);
    }
    is_separable(&design.stacked_b()?, d, budget)
}
