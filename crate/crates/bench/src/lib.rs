//! Shared fixtures for the criterion benches.

use opinion_core::{random_initial, Graph, OpinionConfig};

/// A graph with seeded uniform opinions.
pub fn fixture(g: Graph, seed: u64) -> (Graph, OpinionConfig) {
    let init = random_initial(&g, seed);
    (g, init)
}

/// Petersen graph: 3-regular, 10 vertices, chromatic number 3.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, edges).expect("valid graph")
}
