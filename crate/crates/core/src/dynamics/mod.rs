//! Event-driven simulation of the confidence-threshold voter model.
//!
//! Each edge rings at rate 2; on a ring a fair coin picks which endpoint
//! copies the other, and the copy happens only if the two opinions differ by
//! strictly less than the threshold. Rings on edges that cannot interact are
//! no-ops, so the simulator only keeps clocks on *active* edges: the next
//! event comes after an exponential time with rate `2 * |active|` and falls
//! on an active edge chosen uniformly. This is the same jump chain as the
//! full per-edge construction.
//!
//! Opinions are only ever copied, never computed, so "same opinion" is bit
//! equality throughout.

mod config;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::{rng_for, Stream};

pub(crate) use config::{check_epsilon, is_extremist};
pub use config::{
    count_opinions, extremist_count, interacts, is_absorbing, random_initial, random_opinions,
    OpinionConfig,
};

/// Safety valve on runs that are otherwise unbounded.
pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000_000;

/// Which endpoint of an edge `(i, j)`, `i < j`, adopts the other's opinion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `j` copies `i` (the coin shows +1).
    Forward,
    /// `i` copies `j` (the coin shows -1).
    Backward,
}

impl Direction {
    /// `(source, target)` for the oriented edge `(i, j)`.
    pub fn endpoints(self, (i, j): (usize, usize)) -> (usize, usize) {
        match self {
            Direction::Forward => (i, j),
            Direction::Backward => (j, i),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub edge: usize,
    pub direction: Direction,
}

/// An executed copy: `target` took the opinion of `source` over `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub edge: usize,
    pub source: usize,
    pub target: usize,
}

/// Seeded source of holding times, edge picks and direction coins.
#[derive(Clone, Debug)]
pub struct EventStream {
    rng: ChaCha8Rng,
}

impl EventStream {
    pub fn new(seed: u64) -> Self {
        EventStream {
            rng: rng_for(seed, Stream::Events),
        }
    }

    /// Exponential holding time with the given total rate.
    pub fn holding_time(&mut self, rate: f64) -> f64 {
        // 1 - U lies in (0, 1], so the log is finite
        let u: f64 = self.rng.random();
        -(1.0 - u).ln() / rate
    }

    pub fn pick(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn coin(&mut self) -> Direction {
        if self.rng.random::<bool>() {
            Direction::Forward
        } else {
            Direction::Backward
        }
    }
}

/// When a run stops. Conditions compose: the first one reached wins, and
/// absorption always stops the run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopCondition {
    pub t_max: Option<f64>,
    pub max_events: u64,
}

impl StopCondition {
    pub fn to_absorption() -> Self {
        StopCondition {
            t_max: None,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn until(t_max: f64) -> Self {
        StopCondition {
            t_max: Some(t_max),
            max_events: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn events(max_events: u64) -> Self {
        StopCondition {
            t_max: None,
            max_events,
        }
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = max_events;
        self
    }

    fn validate(&self) -> Result<()> {
        match self.t_max {
            Some(t) if !(t >= 0.0) => Err(Error::InvalidArgument(format!(
                "t_max must be >= 0, got {t}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub epsilon: f64,
    pub stop: StopCondition,
    pub seed: u64,
}

impl SimParams {
    pub fn new(epsilon: f64, stop: StopCondition, seed: u64) -> Self {
        SimParams {
            epsilon,
            stop,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub final_opinions: OpinionConfig,
    pub time: f64,
    pub events: u64,
    pub absorbed: bool,
    /// `(time, distinct opinions)` at geometrically spaced event indices and at the end.
    pub opinion_trace: Vec<(f64, usize)>,
    /// `(time, extremist count)` on the same schedule; empty unless `epsilon > 1/2`.
    pub extremist_trace: Vec<(f64, usize)>,
}

impl SimReport {
    pub fn distinct_opinions(&self) -> usize {
        count_opinions(&self.final_opinions)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Simulation state: opinions, the active-edge set and lineage labels.
///
/// Every vertex carries a label naming the distinct initial value it holds;
/// label counts give the number of distinct opinions and the lineage sizes
/// `card{y : opinion(y) = initial(x)}` in constant time per event.
#[derive(Clone, Debug)]
pub struct Simulator<'g> {
    graph: &'g Graph,
    epsilon: f64,
    opinions: Vec<f64>,
    labels: Vec<u32>,
    initial_labels: Vec<u32>,
    label_counts: Vec<u32>,
    distinct: usize,
    extremists: usize,
    active: Vec<usize>,
    active_pos: Vec<usize>,
    time: f64,
    events: u64,
}

const INACTIVE: usize = usize::MAX;

impl<'g> Simulator<'g> {
    /// Rejects disconnected graphs, mismatched configurations and thresholds
    /// outside `[0, 1]`.
    pub fn new(graph: &'g Graph, init: &OpinionConfig, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        init.check_matches(graph)?;
        graph.require_connected()?;

        let opinions = init.values().to_vec();
        let mut distinct_bits: Vec<u64> = opinions.iter().map(|x| x.to_bits()).collect();
        distinct_bits.sort_unstable();
        distinct_bits.dedup();
        let labels: Vec<u32> = opinions
            .iter()
            .map(|x| distinct_bits.binary_search(&x.to_bits()).unwrap() as u32)
            .collect();
        let mut label_counts = vec![0u32; distinct_bits.len()];
        for &l in &labels {
            label_counts[l as usize] += 1;
        }
        let extremists = if epsilon > 0.5 {
            opinions
                .iter()
                .filter(|&&x| is_extremist(x, epsilon))
                .count()
        } else {
            0
        };

        let mut sim = Simulator {
            graph,
            epsilon,
            initial_labels: labels.clone(),
            labels,
            distinct: label_counts.len(),
            label_counts,
            extremists,
            opinions,
            active: Vec::new(),
            active_pos: vec![INACTIVE; graph.n_edges()],
            time: 0.0,
            events: 0,
        };
        for k in 0..graph.n_edges() {
            if sim.edge_interacts(k) {
                sim.activate(k);
            }
        }
        Ok(sim)
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn opinions(&self) -> &[f64] {
        &self.opinions
    }

    pub fn config(&self) -> OpinionConfig {
        OpinionConfig(self.opinions.clone())
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn distinct_opinions(&self) -> usize {
        self.distinct
    }

    /// Extremist count, tracked only when `epsilon > 1/2` (zero otherwise).
    pub fn extremists(&self) -> usize {
        self.extremists
    }

    /// Number of vertices currently holding the initial opinion of `x`.
    pub fn lineage_size(&self, x: usize) -> usize {
        self.label_counts[self.initial_labels[x] as usize] as usize
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn is_active(&self, edge: usize) -> bool {
        self.active_pos[edge] != INACTIVE
    }

    pub fn is_absorbed(&self) -> bool {
        self.active.is_empty()
    }

    fn edge_interacts(&self, k: usize) -> bool {
        let (i, j) = self.graph.edge(k);
        interacts(self.opinions[i], self.opinions[j], self.epsilon)
    }

    fn activate(&mut self, k: usize) {
        if self.active_pos[k] == INACTIVE {
            self.active_pos[k] = self.active.len();
            self.active.push(k);
        }
    }

    fn deactivate(&mut self, k: usize) {
        let pos = self.active_pos[k];
        if pos != INACTIVE {
            let last = *self.active.last().unwrap();
            self.active.swap_remove(pos);
            if last != k {
                self.active_pos[last] = pos;
            }
            self.active_pos[k] = INACTIVE;
        }
    }

    /// Draws the next event from the thinned clocks without applying it.
    /// `None` once absorbed.
    pub fn draw_event(&self, stream: &mut EventStream) -> Option<Event> {
        if self.active.is_empty() {
            return None;
        }
        let dt = stream.holding_time(2.0 * self.active.len() as f64);
        let edge = self.active[stream.pick(self.active.len())];
        let direction = stream.coin();
        Some(Event {
            time: self.time + dt,
            edge,
            direction,
        })
    }

    /// Applies a ring of `edge` at `time`. Returns the copy performed, or
    /// `None` when the edge cannot interact (the ring is a no-op and the
    /// clock is still advanced).
    pub fn apply(&mut self, event: Event) -> Result<Option<Update>> {
        let m = self.graph.n_edges();
        if event.edge >= m {
            return Err(Error::EdgeOutOfRange {
                index: event.edge,
                m,
            });
        }
        self.time = event.time;
        if !self.is_active(event.edge) {
            return Ok(None);
        }
        let (source, target) = event.direction.endpoints(self.graph.edge(event.edge));
        let old = self.opinions[target];
        let new = self.opinions[source];
        self.opinions[target] = new;

        let old_label = self.labels[target] as usize;
        let new_label = self.labels[source];
        self.labels[target] = new_label;
        self.label_counts[old_label] -= 1;
        if self.label_counts[old_label] == 0 {
            self.distinct -= 1;
        }
        self.label_counts[new_label as usize] += 1;

        if self.epsilon > 0.5 {
            let delta =
                is_extremist(new, self.epsilon) as isize - is_extremist(old, self.epsilon) as isize;
            self.extremists = (self.extremists as isize + delta) as usize;
        }

        for &k in self.graph.incident_edges(target) {
            if self.edge_interacts(k) {
                self.activate(k);
            } else {
                self.deactivate(k);
            }
        }
        self.events += 1;
        Ok(Some(Update {
            edge: event.edge,
            source,
            target,
        }))
    }
}

/// Geometric schedule of event indices at which traces are sampled.
#[derive(Clone, Debug)]
pub(crate) struct TraceSchedule {
    next: u64,
}

impl TraceSchedule {
    const RATIO: f64 = 1.25;

    pub(crate) fn new() -> Self {
        TraceSchedule { next: 0 }
    }

    /// True when `events` reaches the next sample point; advances the schedule.
    pub(crate) fn due(&mut self, events: u64) -> bool {
        if events < self.next {
            return false;
        }
        self.next = (events + 1).max((events as f64 * Self::RATIO).ceil() as u64);
        true
    }
}

#[derive(Default)]
struct Traces {
    opinions: Vec<(f64, usize)>,
    extremists: Vec<(f64, usize)>,
}

impl Traces {
    fn record(&mut self, sim: &Simulator<'_>) {
        self.opinions.push((sim.time(), sim.distinct_opinions()));
        if sim.epsilon() > 0.5 {
            self.extremists.push((sim.time(), sim.extremists()));
        }
    }

    fn finish(mut self, sim: &Simulator<'_>) -> (Vec<(f64, usize)>, Vec<(f64, usize)>) {
        let last = (sim.time(), sim.distinct_opinions());
        if self.opinions.last() != Some(&last) {
            self.record(sim);
        }
        (self.opinions, self.extremists)
    }
}

/// Runs the simulator until `stop`, calling `hook` after every executed copy
/// with the state as it is after the copy.
pub fn drive<F>(
    sim: &mut Simulator<'_>,
    stop: &StopCondition,
    stream: &mut EventStream,
    mut hook: F,
) -> Result<SimReport>
where
    F: FnMut(&Simulator<'_>, &Event, &Update),
{
    stop.validate()?;
    let mut schedule = TraceSchedule::new();
    let mut traces = Traces::default();
    if schedule.due(sim.events()) {
        traces.record(sim);
    }
    while sim.events() < stop.max_events {
        let Some(event) = sim.draw_event(stream) else {
            break;
        };
        if let Some(t_max) = stop.t_max {
            if event.time > t_max {
                // memoryless clocks: the pending event is simply discarded
                sim.time = t_max;
                break;
            }
        }
        let update = sim.apply(event)?.expect("drawn events are on active edges");
        hook(sim, &event, &update);
        if schedule.due(sim.events()) {
            traces.record(sim);
        }
    }
    let absorbed = sim.is_absorbed();
    let (opinion_trace, extremist_trace) = traces.finish(sim);
    Ok(SimReport {
        final_opinions: sim.config(),
        time: sim.time(),
        events: sim.events(),
        absorbed,
        opinion_trace,
        extremist_trace,
    })
}

/// One seeded run from `init`.
pub fn simulate(g: &Graph, init: &OpinionConfig, p: &SimParams) -> Result<SimReport> {
    simulate_with(g, init, p, |_, _, _| {})
}

/// [`simulate`] with a per-event hook for instrumentation.
pub fn simulate_with<F>(
    g: &Graph,
    init: &OpinionConfig,
    p: &SimParams,
    hook: F,
) -> Result<SimReport>
where
    F: FnMut(&Simulator<'_>, &Event, &Update),
{
    let mut sim = Simulator::new(g, init, p.epsilon)?;
    let mut stream = EventStream::new(p.seed);
    drive(&mut sim, &p.stop, &mut stream, hook)
}

/// A scripted ring: `edge` fires with the given direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedEvent {
    pub edge: usize,
    pub direction: Direction,
}

impl ScriptedEvent {
    pub fn new(edge: usize, direction: Direction) -> Self {
        ScriptedEvent { edge, direction }
    }
}

/// Applies `script` in order with the simulation update rule; rings on
/// edges that cannot interact are no-ops. The k-th scripted ring happens at
/// model time `k + 1`. Every script position is a trace sample.
pub fn replay(
    g: &Graph,
    init: &OpinionConfig,
    epsilon: f64,
    script: &[ScriptedEvent],
) -> Result<SimReport> {
    let mut sim = Simulator::new(g, init, epsilon)?;
    let mut traces = Traces::default();
    traces.record(&sim);
    for (k, s) in script.iter().enumerate() {
        sim.apply(Event {
            time: (k + 1) as f64,
            edge: s.edge,
            direction: s.direction,
        })?;
        traces.record(&sim);
    }
    let absorbed = sim.is_absorbed();
    let (opinion_trace, extremist_trace) = traces.finish(&sim);
    Ok(SimReport {
        final_opinions: sim.config(),
        time: sim.time(),
        events: sim.events(),
        absorbed,
        opinion_trace,
        extremist_trace,
    })
}
