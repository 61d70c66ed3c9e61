//! Confidence-threshold voter model on finite graphs.
//!
//! Vertices hold opinions in `[0, 1]`; neighbors whose opinions differ by
//! strictly less than a threshold `epsilon` may copy one another. The crate
//! provides the simulator, static bounds on how many opinions an absorbing
//! state can hold, the coupled edge-weight process used to count opinions on
//! paths, the box-and-ball game that bounds it, and Monte Carlo drivers.

pub mod dynamics;
pub mod edge_process;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod seed;
pub mod statics;
pub mod urn;

pub use dynamics::{
    count_opinions, extremist_count, is_absorbing, random_initial, replay, simulate, Direction,
    OpinionConfig, ScriptedEvent, SimParams, SimReport, Simulator, StopCondition,
};
pub use edge_process::{
    census, classify_edge, weights_from_opinions, CoupledSimulator, EdgeCensus, EdgeType,
    EdgeWeights,
};
pub use error::{Error, Result};
pub use experiments::{ExperimentReport, ExperimentSpec, ReplicateRecord};
pub use graph::{Coloring, Graph, GraphSpec};
pub use statics::{
    brute_force_index, clique_upper_bound, coloring_construction, index_bounds, index_lower_bound,
};
pub use urn::{closed_form_y, play_random, play_strategy_s, UrnState};
