use std::collections::{BTreeSet, HashSet};

use super::Graph;
use crate::error::{Error, Result};

/// Largest graph accepted by exact clique search.
pub const EXACT_CLIQUE_LIMIT: usize = 32;
/// Largest graph accepted by [`enumerate_clique_peels`].
pub const PEEL_ENUMERATION_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliqueMode {
    /// A maximum clique, by branch and bound.
    Exact,
    /// A maximal clique grown greedily by degree.
    Greedy,
}

/// A sequence of disjoint cliques removed one after another until no vertex
/// remains. Each clique is complete in the subgraph left at its step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliquePeel {
    pub cliques: Vec<Vec<usize>>,
    /// Vertices not covered by any clique; zero for a finished peel.
    pub residual: usize,
}

impl CliquePeel {
    pub fn sizes(&self) -> Vec<usize> {
        self.cliques.iter().map(Vec::len).collect()
    }

    /// `sum_i min(|clique_i|, cap)`.
    pub fn capped_sum(&self, cap: usize) -> usize {
        self.cliques.iter().map(|c| c.len().min(cap)).sum()
    }
}

fn mask_vertices(mut mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

/// Branch and bound over candidate bitmasks.
fn max_clique_within(adj: &[u64], within: u64) -> u64 {
    fn expand(adj: &[u64], current: u64, mut candidates: u64, best: &mut u64) {
        if candidates == 0 {
            if current.count_ones() > best.count_ones() {
                *best = current;
            }
            return;
        }
        while candidates != 0 {
            if current.count_ones() + candidates.count_ones() <= best.count_ones() {
                return;
            }
            let v = candidates.trailing_zeros() as usize;
            candidates &= !(1 << v);
            expand(adj, current | (1 << v), candidates & adj[v], best);
        }
    }
    let mut best = 0;
    expand(adj, 0, within, &mut best);
    best
}

/// Every clique of maximum size inside `within`.
fn all_maximum_cliques_within(adj: &[u64], within: u64) -> Vec<u64> {
    let target = max_clique_within(adj, within).count_ones();
    fn collect(adj: &[u64], current: u64, mut candidates: u64, target: u32, out: &mut Vec<u64>) {
        if current.count_ones() == target {
            out.push(current);
            return;
        }
        while candidates != 0 {
            if current.count_ones() + candidates.count_ones() < target {
                return;
            }
            let v = candidates.trailing_zeros() as usize;
            candidates &= !(1 << v);
            collect(adj, current | (1 << v), candidates & adj[v], target, out);
        }
    }
    let mut out = Vec::new();
    collect(adj, 0, within, target, &mut out);
    out
}

fn greedy_clique_within(g: &Graph, within: &[bool]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.n_vertices()).filter(|&v| within[v]).collect();
    // degree inside the residual, highest first
    let inner_degree = |v: usize| g.neighbors(v).iter().filter(|&&w| within[w]).count();
    order.sort_by_key(|&v| (std::cmp::Reverse(inner_degree(v)), v));
    let mut clique: Vec<usize> = Vec::new();
    for v in order {
        if clique.iter().all(|&u| g.has_edge(u, v)) {
            clique.push(v);
        }
    }
    clique.sort_unstable();
    clique
}

/// A maximum (exact) or maximal (greedy) clique, as sorted vertex indices.
pub fn max_clique(g: &Graph, mode: CliqueMode) -> Result<Vec<usize>> {
    match mode {
        CliqueMode::Exact => {
            let n = g.n_vertices();
            if n > EXACT_CLIQUE_LIMIT {
                return Err(Error::TooLarge {
                    what: "exact clique search",
                    n,
                    limit: EXACT_CLIQUE_LIMIT,
                });
            }
            let adj = g.adjacency_masks();
            let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            Ok(mask_vertices(max_clique_within(&adj, all)))
        }
        CliqueMode::Greedy => Ok(greedy_clique_within(g, &vec![true; g.n_vertices()])),
    }
}

/// Peels cliques until the graph is exhausted, taking a maximum clique
/// (exact) or a greedy maximal clique at each step.
pub fn clique_peel(g: &Graph, mode: CliqueMode) -> Result<CliquePeel> {
    let n = g.n_vertices();
    let mut cliques = Vec::new();
    match mode {
        CliqueMode::Exact => {
            if n > EXACT_CLIQUE_LIMIT {
                return Err(Error::TooLarge {
                    what: "exact clique peel",
                    n,
                    limit: EXACT_CLIQUE_LIMIT,
                });
            }
            let adj = g.adjacency_masks();
            let mut left = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            while left != 0 {
                let c = max_clique_within(&adj, left);
                left &= !c;
                cliques.push(mask_vertices(c));
            }
        }
        CliqueMode::Greedy => {
            let mut within = vec![true; n];
            let mut left = n;
            while left > 0 {
                let c = greedy_clique_within(g, &within);
                for &v in &c {
                    within[v] = false;
                }
                left -= c.len();
                cliques.push(c);
            }
        }
    }
    Ok(CliquePeel {
        cliques,
        residual: 0,
    })
}

/// Every distinct peel that removes a maximum clique of the residual at each
/// step. Peels that differ only in the order of their cliques are reported
/// once, and an edgeless residual is split into singletons in one go.
pub fn enumerate_clique_peels(g: &Graph) -> Result<Vec<CliquePeel>> {
    let n = g.n_vertices();
    if n > PEEL_ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "clique peel enumeration",
            n,
            limit: PEEL_ENUMERATION_LIMIT,
        });
    }
    let adj = g.adjacency_masks();

    fn walk(
        adj: &[u64],
        left: u64,
        taken: &mut Vec<u64>,
        visited: &mut HashSet<(u64, Vec<u64>)>,
        found: &mut BTreeSet<Vec<u64>>,
    ) {
        let mut key = taken.clone();
        key.sort_unstable();
        if !visited.insert((left, key.clone())) {
            return;
        }
        if left == 0 {
            found.insert(key);
            return;
        }
        let edgeless = mask_vertices(left).iter().all(|&v| adj[v] & left == 0);
        if edgeless {
            let mut done = key;
            done.extend(mask_vertices(left).into_iter().map(|v| 1u64 << v));
            done.sort_unstable();
            found.insert(done);
            return;
        }
        for c in all_maximum_cliques_within(adj, left) {
            taken.push(c);
            walk(adj, left & !c, taken, visited, found);
            taken.pop();
        }
    }

    let all = (1u64 << n) - 1;
    let mut found = BTreeSet::new();
    walk(&adj, all, &mut Vec::new(), &mut HashSet::new(), &mut found);
    Ok(found
        .into_iter()
        .map(|masks| {
            let mut cliques: Vec<Vec<usize>> = masks.into_iter().map(mask_vertices).collect();
            cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            CliquePeel {
                cliques,
                residual: 0,
            }
        })
        .collect())
}
