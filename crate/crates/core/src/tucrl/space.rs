use crate::error::{Error, Result};
use crate::model::{FlowId, Network, NodeId, QueueState};

/// Dense grids larger than this are refused.
const MAX_GRID_CELLS: u64 = 1 << 28;

const NO_STATE: u32 = u32::MAX;

/// Queue states whose total backlog is at most `V − 1`, indexed densely.
///
/// Only buffered queues (node, flow) with the node not the flow's destination
/// are coordinates; destination rows are always zero. States are numbered in
/// lexicographic order of their coordinate vectors, so state 0 is the empty
/// network.
#[derive(Debug, Clone)]
pub struct TruncatedStateSpace {
    nodes: usize,
    flows: usize,
    queues: Vec<(NodeId, FlowId)>,
    truncation: u32,
    coords: Vec<u16>,
    len: usize,
    grid: Vec<u32>,
    strides: Vec<usize>,
}

impl TruncatedStateSpace {
    pub fn new(net: &Network, truncation: u32) -> Result<Self> {
        Self::from_queues(net.node_count(), net.flow_count(), net.buffered_queues(), truncation)
    }

    pub fn from_queues(
        nodes: usize,
        flows: usize,
        queues: Vec<(NodeId, FlowId)>,
        truncation: u32,
    ) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::Config("truncation threshold must be positive".into()));
        }
        if truncation > u32::from(u16::MAX) {
            return Err(Error::StateSpace(format!("truncation {truncation} too large")));
        }
        let m = queues.len();
        let side = truncation as usize;
        let cells = (side as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
        if cells > MAX_GRID_CELLS {
            return Err(Error::StateSpace(format!(
                "{m} queues with V = {truncation} need a {cells}-cell grid"
            )));
        }
        let mut strides = vec![1usize; m];
        for d in (0..m.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * side;
        }

        let mut grid = vec![NO_STATE; cells as usize];
        let mut coords = Vec::new();
        let mut count = 0u32;
        let mut cur = vec![0u16; m];
        // lexicographic walk over coordinate vectors with sum ≤ V − 1
        loop {
            let cell: usize = cur.iter().zip(&strides).map(|(&c, &s)| c as usize * s).sum();
            grid[cell] = count;
            coords.extend_from_slice(&cur);
            count += 1;
            let mut total: u32 = cur.iter().map(|&c| u32::from(c)).sum();
            let mut d = m;
            loop {
                if d == 0 {
                    return Ok(TruncatedStateSpace {
                        nodes,
                        flows,
                        queues,
                        truncation,
                        coords,
                        len: count as usize,
                        grid,
                        strides,
                    });
                }
                d -= 1;
                if total < truncation - 1 {
                    cur[d] += 1;
                    break;
                }
                total -= u32::from(cur[d]);
                cur[d] = 0;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn queues(&self) -> &[(NodeId, FlowId)] {
        &self.queues
    }

    pub fn dims(&self) -> usize {
        self.queues.len()
    }

    pub fn coords(&self, state: usize) -> &[u16] {
        let m = self.queues.len();
        &self.coords[state * m..(state + 1) * m]
    }

    /// Total backlog of a state, its per-slot cost.
    pub fn cost(&self, state: usize) -> u64 {
        self.coords(state).iter().map(|&c| u64::from(c)).sum()
    }

    pub fn costs(&self) -> Vec<f64> {
        (0..self.len()).map(|s| self.cost(s) as f64).collect()
    }

    pub fn encode(&self, q: &QueueState) -> Result<usize> {
        let total = q.total();
        if total >= u64::from(self.truncation) {
            return Err(Error::OutsideTruncation {
                total,
                truncation: self.truncation,
            });
        }
        let cell: usize = self
            .queues
            .iter()
            .zip(&self.strides)
            .map(|(&(i, k), &s)| q.get(i, k) as usize * s)
            .sum();
        Ok(self.grid[cell] as usize)
    }

    pub fn decode(&self, state: usize) -> QueueState {
        let mut q = QueueState::zeros(self.nodes, self.flows);
        for (&(i, k), &c) in self.queues.iter().zip(self.coords(state)) {
            q.set(i, k, u64::from(c));
        }
        q
    }

    /// State index of a grid cell, `None` outside the truncated region.
    pub(crate) fn state_at(&self, cell: usize) -> Option<usize> {
        match self.grid[cell] {
            NO_STATE => None,
            s => Some(s as usize),
        }
    }

    pub(crate) fn cell_of(&self, state: usize) -> usize {
        self.coords(state)
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub(crate) fn grid_shape(&self) -> (usize, &[usize]) {
        (self.truncation as usize, &self.strides)
    }

    pub(crate) fn grid_len(&self) -> usize {
        self.grid.len()
    }
}

/// Which next states a transition may reach, used to place optimistic mass.
pub trait Neighborhood: Sync {
    /// For every state `s`, the reachable state with the smallest `w`
    /// (lowest index on ties).
    fn reachable_argmin(&self, w: &[f64]) -> Vec<usize>;
}

/// Every state reachable from every state.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unrestricted;

impl Neighborhood for Unrestricted {
    fn reachable_argmin(&self, w: &[f64]) -> Vec<usize> {
        let best = argmin(w);
        vec![best; w.len()]
    }
}

pub(crate) fn argmin(w: &[f64]) -> usize {
    let mut best = 0;
    for (s, &v) in w.iter().enumerate() {
        if v < w[best] {
            best = s;
        }
    }
    best
}

/// States whose every coordinate differs by at most `radius` from the source.
#[derive(Debug, Clone, Copy)]
pub struct BoxNeighborhood<'a> {
    space: &'a TruncatedStateSpace,
    radius: usize,
}

impl<'a> BoxNeighborhood<'a> {
    pub fn new(space: &'a TruncatedStateSpace, radius: usize) -> Self {
        BoxNeighborhood { space, radius }
    }

    /// Radius `(N + 1)·D`, the largest change of one queue in one slot.
    pub fn for_network(space: &'a TruncatedStateSpace, net: &Network) -> Self {
        let radius = (net.node_count() + 1) * net.topology().bound() as usize;
        BoxNeighborhood { space, radius }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.space
            .coords(from)
            .iter()
            .zip(self.space.coords(to))
            .all(|(&a, &b)| a.abs_diff(b) as usize <= self.radius)
    }
}

impl Neighborhood for BoxNeighborhood<'_> {
    /// Separable min filter over the dense grid, one axis at a time.
    /// Cells outside the truncated region hold `+∞`.
    fn reachable_argmin(&self, w: &[f64]) -> Vec<usize> {
        let space = self.space;
        let (side, strides) = space.grid_shape();
        let mut cur: Vec<(f64, u32)> = (0..space.grid_len())
            .map(|cell| match space.state_at(cell) {
                Some(s) => (w[s], s as u32),
                None => (f64::INFINITY, NO_STATE),
            })
            .collect();
        let better = |a: (f64, u32), b: (f64, u32)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        let mut next = cur.clone();
        let mut line = Vec::with_capacity(side);
        for &stride in strides {
            for cell in 0..cur.len() {
                // visit each line once, from its first cell
                if (cell / stride) % side != 0 {
                    continue;
                }
                line.clear();
                line.extend((0..side).map(|p| cur[cell + p * stride]));
                for p in 0..side {
                    let lo = p.saturating_sub(self.radius);
                    let hi = (p + self.radius).min(side - 1);
                    let mut best = line[lo];
                    for &c in &line[lo + 1..=hi] {
                        if better(c, best) {
                            best = c;
                        }
                    }
                    next[cell + p * stride] = best;
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        (0..space.len()).map(|s| cur[space.cell_of(s)].1 as usize).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(m: usize, v: u32) -> TruncatedStateSpace {
        let queues = (0..m).map(|i| (NodeId(i), FlowId(0))).collect();
        TruncatedStateSpace::from_queues(m + 1, 1, queues, v).unwrap()
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn state_count_is_stars_and_bars() {
        for (m, v) in [(1, 1), (1, 7), (2, 5), (3, 30), (4, 6)] {
            // #{x ∈ ℕ^m : Σx ≤ V − 1} = C(V − 1 + m, m)
            assert_eq!(space(m, v).len() as u64, binomial(v as u64 - 1 + m as u64, m as u64));
        }
    }

    #[test]
    fn codec_is_a_bijection() {
        let s = space(3, 8);
        for idx in 0..s.len() {
            let q = s.decode(idx);
            assert!(q.total() <= 7);
            assert_eq!(s.encode(&q).unwrap(), idx);
        }
        assert_eq!(s.cost(0), 0);
    }

    #[test]
    fn outside_states_are_rejected() {
        let s = space(2, 4);
        let q = QueueState::from_rows(&[vec![2], vec![2], vec![0]]);
        assert!(matches!(s.encode(&q), Err(Error::OutsideTruncation { total: 4, .. })));
    }

    #[test]
    fn box_argmin_matches_brute_force() {
        let s = space(3, 9);
        let w: Vec<f64> = (0..s.len()).map(|i| ((i * 7919) % 53) as f64).collect();
        for radius in [0, 1, 2, 5] {
            let nb = BoxNeighborhood::new(&s, radius);
            let got = nb.reachable_argmin(&w);
            for from in 0..s.len() {
                let want = (0..s.len())
                    .filter(|&to| nb.contains(from, to))
                    .min_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)))
                    .unwrap();
                assert_eq!(got[from], want, "radius {radius} state {from}");
            }
        }
    }

    #[test]
    fn huge_grids_are_refused() {
        let queues = (0..12).map(|i| (NodeId(i), FlowId(0))).collect();
        assert!(TruncatedStateSpace::from_queues(13, 1, queues, 100).is_err());
    }
}
