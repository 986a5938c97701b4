//! Bipartite item–pool graphs of a design, flattened for message passing.
//!
//! The three pool families (A, B, AB) are concatenated into one pool list,
//! A block first, then B, then AB. Edges are materialized twice:
//!
//! - *pool-major*: pool p owns a contiguous run of edge slots, one per
//!   member item (ascending item index). Pool-to-item messages live here.
//! - *item-major*: item c owns a contiguous run, one per incident pool
//!   (ascending pool id, so the A edges come first, then B, then AB).
//!   Item-to-pool messages live here.
//!
//! Cross-index tables translate between the two layouts, so each update
//! sweep writes only its own contiguous runs and can run edge-parallel.

use crate::design::PoolingDesign;
use crate::matrix::IncidenceMatrix;

/// Which family a pool belongs to, i.e. which defect types it reacts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolFamily {
    A,
    B,
    Ab,
}

#[derive(Debug, Clone)]
pub(crate) struct PoolNode {
    pub family: PoolFamily,
    pub members: Vec<u32>,
}

/// The flattened edge structure of a design.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    pub(crate) n_items: usize,
    pub(crate) n_pools_a: usize,
    pub(crate) n_pools_b: usize,
    pub(crate) n_pools_ab: usize,
    pub(crate) pools: Vec<PoolNode>,
    /// Pool-major edge offsets, length `pools.len() + 1`.
    pub(crate) pool_offsets: Vec<usize>,
    /// Item-major edge offsets, length `n_items + 1`.
    pub(crate) item_offsets: Vec<usize>,
    /// Number of A-family edges at the front of each item's run.
    pub(crate) item_a_len: Vec<u32>,
    /// Number of A- plus B-family edges of each item (AB edges follow).
    pub(crate) item_ab_start: Vec<u32>,
    /// pool-major slot -> item-major slot of the same edge.
    pub(crate) pool_slot_item_edge: Vec<usize>,
    /// item-major slot -> pool-major slot of the same edge.
    pub(crate) item_edge_pool_slot: Vec<usize>,
}

impl FactorGraph {
    pub fn new(design: &PoolingDesign) -> Self {
        let n_items = design.n_items();
        let mut pools = Vec::with_capacity(design.n_pools());
        let mut push_family = |m: &IncidenceMatrix, family: PoolFamily| {
            for r in 0..m.n_rows() {
                pools.push(PoolNode {
                    family,
                    members: m.row_support(r).to_vec(),
                });
            }
        };
        push_family(design.m_a(), PoolFamily::A);
        push_family(design.m_b(), PoolFamily::B);
        push_family(design.m_ab(), PoolFamily::Ab);

        let mut pool_offsets = Vec::with_capacity(pools.len() + 1);
        pool_offsets.push(0usize);
        for p in &pools {
            pool_offsets.push(pool_offsets.last().unwrap() + p.members.len());
        }
        let n_edges = *pool_offsets.last().unwrap();

        let item_a_len: Vec<u32> = (0..n_items)
            .map(|c| design.m_a().col_weight(c) as u32)
            .collect();
        let item_ab_start: Vec<u32> = (0..n_items)
            .map(|c| (design.m_a().col_weight(c) + design.m_b().col_weight(c)) as u32)
            .collect();

        let mut item_offsets = Vec::with_capacity(n_items + 1);
        item_offsets.push(0usize);
        for c in 0..n_items {
            let deg = item_ab_start[c] as usize + design.m_ab().col_weight(c);
            item_offsets.push(item_offsets.last().unwrap() + deg);
        }

        // walk pools in id order so each item's edges fill in A | B | AB order
        let mut cursor = vec![0usize; n_items];
        let mut pool_slot_item_edge = vec![0usize; n_edges];
        let mut item_edge_pool_slot = vec![0usize; n_edges];
        for (p, pool) in pools.iter().enumerate() {
            let base = pool_offsets[p];
            for (k, &c) in pool.members.iter().enumerate() {
                let c = c as usize;
                let item_edge = item_offsets[c] + cursor[c];
                cursor[c] += 1;
                pool_slot_item_edge[base + k] = item_edge;
                item_edge_pool_slot[item_edge] = base + k;
            }
        }

        Self {
            n_items,
            n_pools_a: design.m_a().n_rows(),
            n_pools_b: design.m_b().n_rows(),
            n_pools_ab: design.m_ab().n_rows(),
            pools,
            pool_offsets,
            item_offsets,
            item_a_len,
            item_ab_start,
            pool_slot_item_edge,
            item_edge_pool_slot,
        }
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_pools(&self) -> usize {
        self.pools.len()
    }

    pub fn n_edges(&self) -> usize {
        *self.pool_offsets.last().unwrap()
    }

    pub fn item_degree(&self, c: usize) -> usize {
        self.item_offsets[c + 1] - self.item_offsets[c]
    }
}
