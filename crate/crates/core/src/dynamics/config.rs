use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::{rng_for, Stream};

/// One opinion in `[0, 1]` per vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpinionConfig(pub(crate) Vec<f64>);

impl OpinionConfig {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((v, x)) = values
            .iter()
            .enumerate()
            .find(|(_, x)| !(0.0..=1.0).contains(*x))
        {
            return Err(Error::InvalidOpinions(format!(
                "vertex {v} has opinion {x} outside [0, 1]"
            )));
        }
        // -0.0 would break bit-equality between equal opinions
        Ok(OpinionConfig(values.into_iter().map(|x| x + 0.0).collect()))
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn check_matches(&self, g: &Graph) -> Result<()> {
        if self.len() != g.n_vertices() {
            return Err(Error::InvalidOpinions(format!(
                "{} opinions for {} vertices",
                self.len(),
                g.n_vertices()
            )));
        }
        Ok(())
    }

    /// One value per line, 17 significant digits, so parsing restores every bit.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.0.len() * 24);
        for x in &self.0 {
            out.push_str(&format!("{x:.16e}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let values = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(k, l)| {
                l.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: k + 1,
                    message: format!("not a number: {:?}", l.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

/// Independent uniform opinions, one per vertex, from the seeded source.
pub fn random_initial(g: &Graph, seed: u64) -> OpinionConfig {
    random_opinions(g.n_vertices(), seed)
}

pub fn random_opinions(n: usize, seed: u64) -> OpinionConfig {
    let mut rng = rng_for(seed, Stream::InitialOpinions);
    OpinionConfig((0..n).map(|_| rng.random::<f64>()).collect())
}

/// Number of distinct opinions under bit equality.
pub fn count_opinions(c: &OpinionConfig) -> usize {
    c.values()
        .iter()
        .map(|x| x.to_bits())
        .collect::<HashSet<_>>()
        .len()
}

/// Whether an edge with these endpoint opinions can interact: the opinions
/// differ and are strictly closer than `epsilon`.
#[inline]
pub fn interacts(a: f64, b: f64, epsilon: f64) -> bool {
    a != b && (a - b).abs() < epsilon
}

/// True iff no edge can interact.
pub fn is_absorbing(g: &Graph, c: &OpinionConfig, epsilon: f64) -> bool {
    let x = c.values();
    g.edges()
        .iter()
        .all(|&(i, j)| !interacts(x[i], x[j], epsilon))
}

/// Number of vertices whose opinion lies outside `(1 - epsilon, epsilon)`.
/// Only meaningful for `epsilon > 1/2`.
pub fn extremist_count(c: &OpinionConfig, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.5 && epsilon <= 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(c.values()
        .iter()
        .filter(|&&x| is_extremist(x, epsilon))
        .count())
}

#[inline]
pub(crate) fn is_extremist(x: f64, epsilon: f64) -> bool {
    x <= 1.0 - epsilon || x >= epsilon
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(epsilon))
    }
}
