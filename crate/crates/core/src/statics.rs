//! Bounds on the opinion index: the largest number of distinct opinions an
//! absorbing configuration of a graph can hold at a given threshold.
//!
//! A configuration is absorbing when every edge joins equal opinions or
//! opinions at distance at least `epsilon`. Lower bounds come with witness
//! configurations; upper bounds come from peeling cliques, each clique of
//! size `k` contributing at most `min(k, ceil(1/epsilon))` opinions.

use serde::Serialize;

use crate::dynamics::{check_epsilon, count_opinions, is_absorbing, OpinionConfig};
use crate::error::{Error, Result};
use crate::graph::{
    chromatic_number_exact, clique_peel, enumerate_clique_peels, greedy_coloring, CliqueMode,
    Coloring, Graph, EXACT_COLORING_LIMIT, PEEL_ENUMERATION_LIMIT,
};

/// Largest graph accepted by [`brute_force_index`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

/// Slack used when comparing a span `k * epsilon` against 1.
const SPAN_TOLERANCE: f64 = 1e-12;

/// `ceil(1 / epsilon)`, or `None` for `epsilon = 0`.
///
/// Reciprocals within a relative `1e-12` of an integer count as that
/// integer, so `1.0 / 3.0` gives 3 rather than 4.
pub fn ceil_inverse(epsilon: f64) -> Option<usize> {
    if epsilon <= 0.0 {
        return None;
    }
    let x = 1.0 / epsilon;
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r {
        Some(r as usize)
    } else {
        Some(x.ceil() as usize)
    }
}

/// Opinion index of the complete graph on `n` vertices:
/// `min(n, ceil(1/epsilon))`, and `n` when `epsilon = 0`.
pub fn complete_index(n: usize, epsilon: f64) -> usize {
    match ceil_inverse(epsilon) {
        None => n,
        Some(cap) => n.min(cap),
    }
}

/// Evenly spread absorbing configuration with `complete_index(n, epsilon)`
/// opinions. It is absorbing on every graph with `n` vertices.
pub fn complete_witness(n: usize, epsilon: f64) -> OpinionConfig {
    let k = complete_index(n, epsilon);
    let values = if k <= 1 {
        vec![1.0; n]
    } else {
        (0..n)
            .map(|j| (j as f64 / (k - 1) as f64).min(1.0))
            .collect()
    };
    OpinionConfig::new(values).expect("values lie in [0, 1]")
}

/// Absorbing configuration built from a proper coloring with `c` colors.
///
/// If `epsilon < 1/(c-1)` every vertex gets its own opinion: color classes
/// sit near the points `0, 1/(c-1), ..., 1` and are spread apart by a small
/// step `alpha`. Otherwise the most popular color class gets distinct small
/// opinions and every other vertex gets 1, giving `|class| + 1` opinions.
pub fn coloring_construction(
    g: &Graph,
    coloring: &Coloring,
    epsilon: f64,
) -> Result<OpinionConfig> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let n = g.n_vertices();
    let colors = coloring.colors();
    if colors.len() != n {
        return Err(Error::InvalidColoring(format!(
            "{} colors for {n} vertices",
            colors.len()
        )));
    }
    if let Some(&(i, j)) = g.edges().iter().find(|&&(i, j)| colors[i] == colors[j]) {
        return Err(Error::InvalidColoring(format!(
            "edge ({i}, {j}) is monochromatic"
        )));
    }
    let c = coloring.n_colors();
    let nf = n as f64;
    // vertex v is the (v+1)-th in the total order
    let rank = |v: usize| (v + 1) as f64;

    let values: Vec<f64> = if c == 1 {
        let alpha = 1.0 / (nf + 1.0);
        (0..n).map(|v| rank(v) * alpha).collect()
    } else if epsilon < 1.0 / (c - 1) as f64 {
        let gap = 1.0 / (c - 1) as f64;
        // half of the largest step with epsilon + 2 N alpha < gap
        let alpha = (gap - epsilon) / (4.0 * nf);
        (0..n)
            .map(|v| {
                let j = colors[v] + 1;
                if j == c {
                    1.0 - rank(v) * alpha
                } else {
                    (j - 1) as f64 * gap + rank(v) * alpha
                }
            })
            .collect()
    } else {
        let sizes = coloring.class_sizes();
        let popular = (0..c)
            .max_by_key(|&k| (sizes[k], std::cmp::Reverse(k)))
            .unwrap();
        // half of the largest step with epsilon + N alpha < 1
        let alpha = (1.0 - epsilon) / (2.0 * nf);
        (0..n)
            .map(|v| {
                if colors[v] == popular {
                    rank(v) * alpha
                } else {
                    1.0
                }
            })
            .collect()
    };
    OpinionConfig::new(values)
}

/// How a lower bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundSource {
    /// Coloring construction with one opinion per vertex.
    ColoringAllDistinct,
    /// Coloring construction on the most popular color class.
    ColoringLargestClass,
    /// Comparison with the complete graph on the same vertices.
    CompleteGraph,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: usize,
    pub source: LowerBoundSource,
    /// Number of colors of the coloring used (exact below the coloring limit).
    pub colors: usize,
    pub witness: OpinionConfig,
}

/// Best of the coloring constructions and the complete-graph comparison,
/// with its witness. Uses an exact coloring up to
/// [`EXACT_COLORING_LIMIT`] vertices and a greedy one beyond.
pub fn index_lower_bound(g: &Graph, epsilon: f64) -> Result<LowerBound> {
    check_epsilon(epsilon)?;
    let n = g.n_vertices();
    let coloring = match chromatic_number_exact(g, EXACT_COLORING_LIMIT) {
        Ok(c) => c,
        Err(Error::TooLarge { .. }) => greedy_coloring(g),
        Err(e) => return Err(e),
    };
    let c = coloring.n_colors();

    let mut best = LowerBound {
        value: complete_index(n, epsilon),
        source: LowerBoundSource::CompleteGraph,
        colors: c,
        witness: complete_witness(n, epsilon),
    };
    if epsilon < 1.0 {
        let witness = coloring_construction(g, &coloring, epsilon)?;
        let all_distinct = c == 1 || epsilon < 1.0 / (c - 1) as f64;
        let value = if all_distinct {
            n
        } else {
            coloring.class_sizes().into_iter().max().unwrap() + 1
        };
        debug_assert_eq!(value, count_opinions(&witness));
        if value >= best.value {
            best = LowerBound {
                value,
                source: if all_distinct {
                    LowerBoundSource::ColoringAllDistinct
                } else {
                    LowerBoundSource::ColoringLargestClass
                },
                colors: c,
                witness,
            };
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeelChoice {
    /// Minimum over every maximum-clique peel (small graphs only).
    Enumerate,
    /// A single peel of greedy maximal cliques.
    Greedy,
}

/// `sum_i min(|W_i|, ceil(1/epsilon))` over a clique peel `W_1, W_2, ...`.
pub fn clique_upper_bound(g: &Graph, epsilon: f64, choice: PeelChoice) -> Result<usize> {
    check_epsilon(epsilon)?;
    let Some(cap) = ceil_inverse(epsilon) else {
        return Ok(g.n_vertices());
    };
    match choice {
        PeelChoice::Enumerate => Ok(enumerate_clique_peels(g)?
            .iter()
            .map(|p| p.capped_sum(cap))
            .min()
            .expect("at least one peel")),
        PeelChoice::Greedy => Ok(clique_peel(g, CliqueMode::Greedy)?.capped_sum(cap)),
    }
}

/// Exhaustive opinion index for graphs with at most [`BRUTE_FORCE_LIMIT`] vertices.
///
/// Every partition of the vertices into equal-opinion classes is tried. For
/// a partition and an ordering of its classes by value, the smallest
/// achievable spread of values is `L * epsilon`, where `L` is the longest
/// path in the constraint graph whose edges carry weight `epsilon` between
/// adjacent classes and weight 0 between classes consecutive in the order.
/// All constraints are strict, so the partition is realizable inside
/// `[0, 1]` iff some ordering has `L * epsilon < 1`.
#[derive(Clone, Debug)]
pub struct IndexOracle {
    n: usize,
    adjacency: Vec<u64>,
    /// For each class count `m`, the smallest `L` over partitions and
    /// orderings, with a partition and an ordering attaining it.
    best: Vec<Option<Arrangement>>,
}

#[derive(Clone, Debug)]
struct Arrangement {
    chain: usize,
    classes: Vec<usize>,
    order: Vec<usize>,
}

impl IndexOracle {
    pub fn new(g: &Graph) -> Result<Self> {
        let n = g.n_vertices();
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::TooLarge {
                what: "brute-force opinion index",
                n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let adjacency = g.adjacency_masks();
        let mut best: Vec<Option<Arrangement>> = vec![None; n + 1];
        let mut classes = vec![0usize; n];
        for_each_partition(&mut classes, 0, 0, &mut |classes, m| {
            let quotient = quotient_adjacency(&adjacency, classes, m);
            let bound = best[m].as_ref().map_or(usize::MAX, |a| a.chain);
            if let Some((chain, order)) = shortest_chain_ordering(&quotient, bound) {
                best[m] = Some(Arrangement {
                    chain,
                    classes: classes.to_vec(),
                    order,
                });
            }
        });
        Ok(IndexOracle { n, adjacency, best })
    }

    fn feasible(chain: usize, epsilon: f64) -> bool {
        (chain as f64) * epsilon < 1.0 - SPAN_TOLERANCE
    }

    /// Largest class count realizable as an absorbing configuration.
    pub fn index(&self, epsilon: f64) -> usize {
        (1..=self.n)
            .rev()
            .find(|&m| {
                self.best[m]
                    .as_ref()
                    .is_some_and(|a| Self::feasible(a.chain, epsilon))
            })
            .expect("a single class is always feasible")
    }

    /// An absorbing configuration with [`IndexOracle::index`] opinions.
    pub fn witness(&self, epsilon: f64) -> OpinionConfig {
        let m = self.index(epsilon);
        let a = self.best[m].as_ref().unwrap();
        let quotient = quotient_adjacency(&self.adjacency, &a.classes, m);
        // spread the unused slack 1 - L * epsilon over at most m + L steps
        let delta = (1.0 - a.chain as f64 * epsilon) / (2.0 * (m + a.chain + 1) as f64);
        let mut value = vec![0.0f64; m];
        let mut placed = 0u64;
        let mut previous: Option<f64> = None;
        for &b in &a.order {
            let mut v = previous.map_or(0.0, |p| p + delta);
            for c in 0..m {
                if placed & (1 << c) != 0 && quotient[b] & (1 << c) != 0 {
                    v = v.max(value[c] + epsilon + delta);
                }
            }
            value[b] = v;
            placed |= 1 << b;
            previous = Some(v);
        }
        OpinionConfig::new(a.classes.iter().map(|&c| value[c].min(1.0)).collect())
            .expect("values lie in [0, 1]")
    }
}

/// Restricted growth strings: `classes[i] <= max(classes[..i]) + 1`.
fn for_each_partition(
    classes: &mut [usize],
    i: usize,
    used: usize,
    f: &mut impl FnMut(&[usize], usize),
) {
    if i == classes.len() {
        f(classes, used);
        return;
    }
    for c in 0..=used {
        classes[i] = c;
        for_each_partition(classes, i + 1, used.max(c + 1), f);
    }
}

fn quotient_adjacency(adjacency: &[u64], classes: &[usize], m: usize) -> Vec<u64> {
    let mut q = vec![0u64; m];
    for (v, &cv) in classes.iter().enumerate() {
        let mut nb = adjacency[v];
        while nb != 0 {
            let w = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            let cw = classes[w];
            if cw != cv {
                q[cv] |= 1 << cw;
            }
        }
    }
    q
}

/// Ordering of the classes minimizing the longest chain, if it beats `bound`.
///
/// Placing the classes in value order, the chain length at class `b` is
/// `max(chain at the previous class, 1 + max chain at placed neighbours)`.
fn shortest_chain_ordering(quotient: &[u64], bound: usize) -> Option<(usize, Vec<usize>)> {
    let m = quotient.len();
    struct Search<'a> {
        quotient: &'a [u64],
        level: Vec<usize>,
        order: Vec<usize>,
        best: usize,
        best_order: Option<Vec<usize>>,
    }
    fn go(s: &mut Search<'_>, placed: u64, current: usize) {
        let m = s.quotient.len();
        if s.order.len() == m {
            s.best = current;
            s.best_order = Some(s.order.clone());
            return;
        }
        for b in 0..m {
            if placed & (1 << b) != 0 {
                continue;
            }
            let mut level = current;
            for c in 0..m {
                if placed & (1 << c) != 0 && s.quotient[b] & (1 << c) != 0 {
                    level = level.max(s.level[c] + 1);
                }
            }
            if level >= s.best {
                continue;
            }
            s.level[b] = level;
            s.order.push(b);
            go(s, placed | (1 << b), level);
            s.order.pop();
        }
    }
    let mut s = Search {
        quotient,
        level: vec![0; m],
        order: Vec::with_capacity(m),
        best: bound,
        best_order: None,
    };
    go(&mut s, 0, 0);
    s.best_order.map(|o| (s.best, o))
}

/// Exact opinion index by exhaustive search; see [`IndexOracle`].
pub fn brute_force_index(g: &Graph, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    Ok(IndexOracle::new(g)?.index(epsilon))
}

/// Lower and upper bounds on the opinion index, plus the exact value on
/// graphs small enough for [`brute_force_index`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexBounds {
    pub epsilon: f64,
    pub lower: usize,
    pub upper: usize,
    pub exact: Option<usize>,
    pub lower_source: LowerBoundSource,
    pub upper_choice: PeelChoice,
    #[serde(skip)]
    pub lower_witness: OpinionConfig,
    #[serde(skip)]
    pub exact_witness: Option<OpinionConfig>,
}

pub fn index_bounds(g: &Graph, epsilon: f64) -> Result<IndexBounds> {
    let lower = index_lower_bound(g, epsilon)?;
    let upper_choice = if g.n_vertices() <= PEEL_ENUMERATION_LIMIT {
        PeelChoice::Enumerate
    } else {
        PeelChoice::Greedy
    };
    let upper = clique_upper_bound(g, epsilon, upper_choice)?;
    let (exact, exact_witness) = if g.n_vertices() <= BRUTE_FORCE_LIMIT {
        let oracle = IndexOracle::new(g)?;
        (Some(oracle.index(epsilon)), Some(oracle.witness(epsilon)))
    } else {
        (None, None)
    };
    debug_assert!(is_absorbing(g, &lower.witness, epsilon));
    Ok(IndexBounds {
        epsilon,
        lower: lower.value,
        upper,
        exact,
        lower_source: lower.source,
        upper_choice,
        lower_witness: lower.witness,
        exact_witness,
    })
}
