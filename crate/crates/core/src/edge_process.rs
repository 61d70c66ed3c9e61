//! The edge-weight image of the opinion process.
//!
//! Edge `k = (i, j)`, `i < j`, carries the weight `opinion[j] - opinion[i]`.
//! When a vertex copies a neighbour across edge `e`, the weight of `e`
//! becomes exactly zero and every other edge at the updated vertex gains or
//! loses the old weight of `e`, depending on its orientation. On a path this
//! moves the weight onto the next edge; weight pushed past an end vertex is
//! dropped.

use serde::Serialize;

use crate::dynamics::{
    drive, Direction, Event, EventStream, OpinionConfig, ScriptedEvent, SimParams, SimReport,
    Simulator, TraceSchedule, Update,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::statics::ceil_inverse;

/// One signed weight per edge, in edge-index order.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn empty_count(&self) -> usize {
        self.0.iter().filter(|&&w| w == 0.0).count()
    }
}

pub fn weights_from_opinions(g: &Graph, c: &OpinionConfig) -> EdgeWeights {
    let x = c.values();
    EdgeWeights(g.edges().iter().map(|&(i, j)| x[j] - x[i]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeType {
    /// Weight exactly zero.
    Empty,
    /// `(j - 1) eps < |w| < j eps`.
    Type(usize),
    /// `|w|` a nonzero exact multiple of `eps`.
    Boundary,
}

/// Classifies a weight; `epsilon` must be positive.
pub fn classify_edge(weight: f64, epsilon: f64) -> EdgeType {
    assert!(epsilon > 0.0, "edge types need a positive threshold");
    let a = weight.abs();
    if a == 0.0 {
        return EdgeType::Empty;
    }
    let mut j = ((a / epsilon).ceil() as usize).max(1);
    // the quotient can be off by one ulp; settle j against the products
    while j > 1 && a <= (j - 1) as f64 * epsilon {
        j -= 1;
    }
    while a > j as f64 * epsilon {
        j += 1;
    }
    if a == j as f64 * epsilon || a == (j - 1) as f64 * epsilon {
        EdgeType::Boundary
    } else {
        EdgeType::Type(j)
    }
}

/// Edge counts per type: `counts[0]` empty edges, `counts[j]` type-`j`
/// edges for `j = 1..=J` with `J = ceil(1/eps)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeCensus {
    pub counts: Vec<usize>,
    pub boundary: usize,
}

impl EdgeCensus {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.boundary
    }

    /// `J`, the highest type.
    pub fn max_type(&self) -> usize {
        self.counts.len() - 1
    }
}

pub fn census(w: &EdgeWeights, epsilon: f64) -> Result<EdgeCensus> {
    let cap = match ceil_inverse(epsilon) {
        Some(cap) if epsilon <= 1.0 => cap,
        _ => return Err(Error::EpsilonOutOfRange(epsilon)),
    };
    let mut counts = vec![0usize; cap + 1];
    let mut boundary = 0;
    for &x in w.values() {
        match classify_edge(x, epsilon) {
            EdgeType::Empty => counts[0] += 1,
            // |w| <= 1 <= J eps, so only rounding can push a type past J
            EdgeType::Type(j) => counts[j.min(cap)] += 1,
            EdgeType::Boundary => boundary += 1,
        }
    }
    Ok(EdgeCensus { counts, boundary })
}

/// Edge weights evolved alongside the opinions by the update rules alone,
/// never recomputed from opinions.
#[derive(Clone, Debug)]
pub struct WeightState {
    weights: Vec<f64>,
    empty: usize,
}

impl WeightState {
    pub fn new(g: &Graph, init: &OpinionConfig) -> Self {
        let w = weights_from_opinions(g, init);
        WeightState {
            empty: w.empty_count(),
            weights: w.0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn snapshot(&self) -> EdgeWeights {
        EdgeWeights(self.weights.clone())
    }

    pub fn empty_count(&self) -> usize {
        self.empty
    }

    fn set(&mut self, k: usize, value: f64) {
        let was_empty = self.weights[k] == 0.0;
        let is_empty = value == 0.0;
        self.weights[k] = value;
        match (was_empty, is_empty) {
            (false, true) => self.empty += 1,
            (true, false) => self.empty -= 1,
            _ => {}
        }
    }

    /// Applies the weight rules for an executed copy.
    pub fn apply(&mut self, g: &Graph, u: &Update) {
        let w = self.weights[u.edge];
        let (e1, e2) = g.edge(u.edge);
        let target = u.target;
        for &k in g.incident_edges(target) {
            if k == u.edge {
                continue;
            }
            let (f1, f2) = g.edge(k);
            // sign of the change to edge k when `target` moves by -w (forward) or +w (backward)
            let gained = match (target == e2, target == f1) {
                (true, true) => w,
                (true, false) => -w,
                (false, true) => -w,
                (false, false) => w,
            };
            debug_assert!(target == f1 || target == f2);
            debug_assert!(target == e1 || target == e2);
            self.set(k, self.weights[k] + gained);
        }
        self.set(u.edge, 0.0);
    }
}

/// Opinion simulator with the edge weights evolved in lock step.
#[derive(Clone, Debug)]
pub struct CoupledSimulator<'g> {
    sim: Simulator<'g>,
    weights: WeightState,
}

impl<'g> CoupledSimulator<'g> {
    pub fn new(g: &'g Graph, init: &OpinionConfig, epsilon: f64) -> Result<Self> {
        Ok(CoupledSimulator {
            sim: Simulator::new(g, init, epsilon)?,
            weights: WeightState::new(g, init),
        })
    }

    pub fn simulator(&self) -> &Simulator<'g> {
        &self.sim
    }

    pub fn weights(&self) -> &WeightState {
        &self.weights
    }

    pub fn draw_event(&self, stream: &mut EventStream) -> Option<Event> {
        self.sim.draw_event(stream)
    }

    /// Applies a ring to both processes. Rings on edges that cannot
    /// interact change neither.
    pub fn apply(&mut self, event: Event) -> Result<Option<Update>> {
        let update = self.sim.apply(event)?;
        if let Some(u) = &update {
            self.weights.apply(self.sim.graph(), u);
        }
        Ok(update)
    }

    /// Draws and applies the next event; `None` once absorbed.
    pub fn step(&mut self, stream: &mut EventStream) -> Result<Option<Update>> {
        match self.draw_event(stream) {
            Some(e) => self.apply(e),
            None => Ok(None),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub time: f64,
    pub event_index: u64,
    pub census: EdgeCensus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledReport {
    pub report: SimReport,
    pub final_weights: EdgeWeights,
    /// `(time, event index, weights)` on the trace schedule.
    pub weight_trace: Vec<(f64, u64, EdgeWeights)>,
    pub census_trace: Vec<CensusRow>,
}

/// Runs the opinion process and its edge-weight image on one event stream.
pub fn simulate_coupled(g: &Graph, init: &OpinionConfig, p: &SimParams) -> Result<CoupledReport> {
    if !(p.epsilon > 0.0) {
        return Err(Error::EpsilonOutOfRange(p.epsilon));
    }
    let mut coupled = CoupledSimulator::new(g, init, p.epsilon)?;
    let mut stream = EventStream::new(p.seed);
    let mut weight_trace = Vec::new();
    let mut census_trace = Vec::new();
    let mut schedule = TraceSchedule::new();

    let record = |time: f64,
                  events: u64,
                  w: &WeightState,
                  trace: &mut Vec<(f64, u64, EdgeWeights)>|
     -> Result<CensusRow> {
        let snap = w.snapshot();
        let row = CensusRow {
            time,
            event_index: events,
            census: census(&snap, p.epsilon)?,
        };
        trace.push((time, events, snap));
        Ok(row)
    };

    schedule.due(0);
    census_trace.push(record(0.0, 0, &coupled.weights, &mut weight_trace)?);

    let CoupledSimulator { sim, weights } = &mut coupled;
    let mut failure = None;
    let report = drive(sim, &p.stop, &mut stream, |s, _, u| {
        weights.apply(s.graph(), u);
        if schedule.due(s.events()) {
            match record(s.time(), s.events(), weights, &mut weight_trace) {
                Ok(row) => census_trace.push(row),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if weight_trace.last().map(|t| t.1) != Some(report.events)
        || report.time > weight_trace.last().unwrap().0
    {
        census_trace.push(record(
            report.time,
            report.events,
            weights,
            &mut weight_trace,
        )?);
    }
    Ok(CoupledReport {
        report,
        final_weights: weights.snapshot(),
        weight_trace,
        census_trace,
    })
}

/// CSV with header `time,event_index,X0..XJ,boundary`.
pub fn census_csv(rows: &[CensusRow]) -> String {
    let j = rows.first().map_or(0, |r| r.census.max_type());
    let mut out = String::from("time,event_index");
    for k in 0..=j {
        out.push_str(&format!(",X{k}"));
    }
    out.push_str(",boundary\n");
    for r in rows {
        out.push_str(&format!("{},{}", r.time, r.event_index));
        for c in &r.census.counts {
            out.push_str(&format!(",{c}"));
        }
        out.push_str(&format!(",{}\n", r.census.boundary));
    }
    out
}

/// A five-vertex tree where copying ends in an absorbing state with two
/// opinions and only two empty edges, so opinions plus empty edges falls
/// short of the vertex count.
///
/// Vertices `A, B, C, D, E = 0..5`; `E` is joined to `A, B, C` and `D` hangs
/// off `A`. Opinions satisfy `|E-A|, |E-B|, |E-C|, |D-A| < eps < |E-D|`.
/// The script makes `B` and `C` copy `E`, then walks `E` over to `D`'s
/// opinion through `A`.
pub fn tree_counterexample() -> (Graph, OpinionConfig, f64, Vec<ScriptedEvent>) {
    let g = Graph::from_edges(5, [(0, 4), (1, 4), (2, 4), (0, 3)]).expect("valid tree");
    let init = OpinionConfig::new(vec![0.3, 0.8, 0.9, 0.0, 0.6]).expect("valid opinions");
    let script = vec![
        ScriptedEvent::new(1, Direction::Backward), // B <- E
        ScriptedEvent::new(2, Direction::Backward), // C <- E
        ScriptedEvent::new(0, Direction::Forward),  // E <- A
        ScriptedEvent::new(3, Direction::Backward), // A <- D
        ScriptedEvent::new(0, Direction::Forward),  // E <- A, now holding D's opinion
    ];
    (g, init, 0.5, script)
}
