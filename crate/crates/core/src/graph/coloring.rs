use super::Graph;
use crate::error::{Error, Result};

/// Default vertex limit for [`chromatic_number_exact`].
pub const EXACT_COLORING_LIMIT: usize = 16;

/// A proper vertex coloring with colors `0..n_colors`, every color used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    n_colors: usize,
}

impl Coloring {
    /// Validates that `colors` is proper on `g`. Colors are relabelled to
    /// `0..k` in order of first appearance, so `n_colors` counts distinct colors.
    pub fn new(g: &Graph, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != g.n_vertices() {
            return Err(Error::InvalidColoring(format!(
                "{} colors for {} vertices",
                colors.len(),
                g.n_vertices()
            )));
        }
        if let Some(&(i, j)) = g.edges().iter().find(|&&(i, j)| colors[i] == colors[j]) {
            return Err(Error::InvalidColoring(format!(
                "edge ({i}, {j}) is monochromatic"
            )));
        }
        let mut relabel = std::collections::HashMap::new();
        let colors: Vec<usize> = colors
            .into_iter()
            .map(|c| {
                let next = relabel.len();
                *relabel.entry(c).or_insert(next)
            })
            .collect();
        Ok(Coloring {
            n_colors: relabel.len(),
            colors,
        })
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> usize {
        self.colors[v]
    }

    pub fn n_colors(&self) -> usize {
        self.n_colors
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_colors];
        for &c in &self.colors {
            sizes[c] += 1;
        }
        sizes
    }
}

/// DSatur greedy coloring: repeatedly colors the vertex seeing the most
/// distinct neighbor colors (ties by degree, then index) with the smallest
/// free color. Always proper, not always optimal.
pub fn greedy_coloring(g: &Graph) -> Coloring {
    let n = g.n_vertices();
    let mut colors = vec![usize::MAX; n];
    let mut seen: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut saturation = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v] == usize::MAX)
            .max_by_key(|&v| (saturation[v], g.degree(v), std::cmp::Reverse(v)))
            .expect("an uncolored vertex remains");
        let c = (0..)
            .find(|&c| !seen[v].get(c).copied().unwrap_or(false))
            .unwrap();
        colors[v] = c;
        for &w in g.neighbors(v) {
            if seen[w].len() <= c {
                seen[w].resize(c + 1, false);
            }
            if !seen[w][c] {
                seen[w][c] = true;
                saturation[w] += 1;
            }
        }
    }
    Coloring::new(g, colors).expect("greedy coloring is proper")
}

/// Exact chromatic number by backtracking, with a witness coloring.
///
/// Fails with [`Error::TooLarge`] when the graph has more than `limit`
/// vertices; callers then fall back to [`greedy_coloring`].
pub fn chromatic_number_exact(g: &Graph, limit: usize) -> Result<Coloring> {
    let n = g.n_vertices();
    if n > limit || n > 64 {
        return Err(Error::TooLarge {
            what: "exact coloring",
            n,
            limit: limit.min(64),
        });
    }
    let greedy = greedy_coloring(g);
    if g.n_edges() == 0 {
        return Ok(greedy);
    }
    // Vertices in decreasing degree order; each vertex may only open one new color.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let masks = g.adjacency_masks();

    let mut best = greedy;
    let mut k = best.n_colors() - 1;
    let mut colors = vec![usize::MAX; n];
    while k >= 1 {
        colors.iter_mut().for_each(|c| *c = usize::MAX);
        let mut class_masks = vec![0u64; k];
        if color_within(&order, &masks, k, 0, 0, &mut colors, &mut class_masks) {
            best = Coloring::new(g, colors.clone()).expect("backtracking coloring is proper");
            k = best.n_colors() - 1;
        } else {
            break;
        }
    }
    Ok(best)
}

fn color_within(
    order: &[usize],
    masks: &[u64],
    k: usize,
    depth: usize,
    used: usize,
    colors: &mut [usize],
    class_masks: &mut [u64],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for c in 0..(used + 1).min(k) {
        if class_masks[c] & masks[v] != 0 {
            continue;
        }
        colors[v] = c;
        class_masks[c] |= 1 << v;
        if color_within(
            order,
            masks,
            k,
            depth + 1,
            used.max(c + 1),
            colors,
            class_masks,
        ) {
            return true;
        }
        class_masks[c] &= !(1 << v);
    }
    colors[v] = usize::MAX;
    false
}
