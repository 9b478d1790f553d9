//! Collecting a particle swarm in a bounded grid world when every particle
//! receives the same global command (up, right, down or left).
//!
//! * [`world`]: workspaces, the map file format, connectivity and distances.
//! * [`dynamics`]: discrete and maximal moves for small and large particles.
//! * [`optimal`]: shortest collecting sequences by breadth-first search.
//! * [`greedy`]: pairwise merging with five pair-selection strategies.
//! * [`sticky`]: delivering large particles to an absorbing target region.

pub mod dynamics;
pub mod error;
pub mod greedy;
pub mod optimal;
pub mod sticky;
pub mod world;

pub use dynamics::{
    apply_discrete, apply_maximal, apply_move, apply_sequence, is_collected, CommandSequence,
    Configuration, Move, MoveMode, MoveTable, ParticleKind,
};
pub use error::CollectError;
pub use greedy::{
    collect_ab, greedy_collect, select_pair, shortest_control_sequence, GreedyOptions,
    GreedyOutcome, GreedyTrace, SplitMix64, Strategy,
};
pub use optimal::{optimal_collect, oracle_optimal_length, OptimalSolution, SearchOptions, SearchStats};
pub use sticky::{sticky_collect, sticky_step, StickyOptions, StickyOutcome, StickyState};
pub use world::{
    connected_components, diameter, parse_world, serialize_world, shortest_distance, Cell,
    WorldError, Workspace,
};
