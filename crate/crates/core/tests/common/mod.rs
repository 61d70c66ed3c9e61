#![allow(dead_code)]

use opinion_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random spanning tree (each vertex joins a uniform earlier one) plus each
/// remaining pair with probability `extra`.
pub fn random_connected(n: usize, extra: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) && rng.random_bool(extra) {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_tree(n: usize, seed: u64) -> Graph {
    random_connected(n, 0.0, seed)
}

pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, edges).unwrap()
}

/// Paths, cycles and complete graphs on up to `max_n` vertices plus
/// `randoms` random connected graphs.
pub fn small_connected(max_n: usize, randoms: usize, seed: u64) -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.push((format!("path:{n}"), Graph::path(n).unwrap()));
        out.push((format!("complete:{n}"), Graph::complete(n).unwrap()));
        if n >= 3 {
            out.push((format!("cycle:{n}"), Graph::cycle(n).unwrap()));
        }
    }
    for k in 0..randoms {
        let n = 3 + k % (max_n - 2);
        let extra = [0.15, 0.3, 0.5][k % 3];
        out.push((
            format!("random#{k} (n={n})"),
            random_connected(n, extra, seed + k as u64),
        ));
    }
    out
}
