//! Delivering large particles to an absorbing ("sticky") target region.
//!
//! A particle whose discrete step would enter a target cell is absorbed: it
//! leaves the active set, so it never blocks anyone afterwards. The
//! collector routes one particle at a time, nearest to the target first.

use std::collections::BTreeSet;

use crate::dynamics::{step_large, CommandSequence, Configuration, Move, ParticleKind, StepOutcome};
use crate::error::{require_kind, scaled_budget, CollectError};
use crate::world::{bfs_indices, ensure_connected, Cell, Workspace, NONE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StickyState {
    active: Configuration,
    absorbed: usize,
    target: BTreeSet<Cell>,
}

impl StickyState {
    /// Particles that start on a target cell count as absorbed immediately.
    pub fn new(c0: &Configuration, target: BTreeSet<Cell>) -> Result<Self, CollectError> {
        require_kind(c0.kind(), ParticleKind::Large)?;
        if target.is_empty() {
            return Err(CollectError::NoTarget);
        }
        let active: BTreeSet<Cell> = c0.positions().difference(&target).copied().collect();
        Ok(Self {
            absorbed: c0.len() - active.len(),
            active: Configuration::from_set(ParticleKind::Large, active),
            target,
        })
    }

    pub fn active(&self) -> &Configuration {
        &self.active
    }

    pub fn absorbed_count(&self) -> usize {
        self.absorbed
    }

    pub fn target(&self) -> &BTreeSet<Cell> {
        &self.target
    }

    pub fn is_done(&self) -> bool {
        self.active.is_empty()
    }

    /// Active particles plus absorbed ones, which is constant.
    pub fn total(&self) -> usize {
        self.active.len() + self.absorbed
    }
}

fn step_tracked(w: &Workspace, s: &StickyState, m: Move) -> (StickyState, Vec<(Cell, StepOutcome)>) {
    let (active, outcomes) = step_large(w, s.active.positions(), m, |c| s.target.contains(&c));
    let absorbed = outcomes
        .iter()
        .filter(|(_, o)| *o == StepOutcome::Absorbed)
        .count();
    let next = StickyState {
        active: Configuration::from_set(ParticleKind::Large, active),
        absorbed: s.absorbed + absorbed,
        target: s.target.clone(),
    };
    (next, outcomes)
}

/// One discrete large-particle step with absorbing target cells.
pub fn sticky_step(w: &Workspace, s: &StickyState, m: Move) -> StickyState {
    step_tracked(w, s, m).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickyOptions {
    /// Multiplier on the `m * D` command ceiling.
    pub budget_factor: f64,
}

impl Default for StickyOptions {
    fn default() -> Self {
        Self { budget_factor: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StickyOutcome {
    pub sequence: CommandSequence,
    pub state: StickyState,
    /// Active particle count initially and after every command.
    pub active_per_command: Vec<usize>,
    pub diameter: u32,
}

/// Free-space distance to the nearest target cell, per free index.
fn target_field(w: &Workspace, target: &BTreeSet<Cell>) -> (Vec<[u32; 4]>, Vec<u32>) {
    let adj = w.neighbor_table();
    let sources: Vec<u32> = target
        .iter()
        .map(|&t| w.free_index(t).expect("targets are free") as u32)
        .collect();
    let field = bfs_indices(&adj, &sources);
    (adj, field)
}

/// Descends the target distance field from `from`, taking the first
/// improving neighbor in u, d, r, l order. Returns the cells visited after
/// `from` and the moves taken.
fn route_to_target(w: &Workspace, adj: &[[u32; 4]], field: &[u32], from: Cell) -> Vec<(Move, Cell)> {
    let mut cur = w.free_index(from).expect("particles sit on free cells");
    let mut route = Vec::with_capacity(field[cur] as usize);
    while field[cur] > 0 {
        let (k, next) = adj[cur]
            .iter()
            .enumerate()
            .find(|(_, &n)| n != NONE && field[n as usize] + 1 == field[cur])
            .expect("a connected field always has a descending neighbor");
        route.push((Move::SEARCH_ORDER[k], w.free_cells()[*next as usize]));
        cur = *next as usize;
    }
    route
}

/// Routes every active particle into the target region with discrete moves.
///
/// Picks the active particle nearest the target (row-major on ties), plans
/// its shortest route, and executes it one command at a time. If another
/// active particle sits on the route the blocker is routed instead. When the
/// tracked particle fails to advance the plan is rebuilt from scratch.
pub fn sticky_collect(
    w: &Workspace,
    c0: &Configuration,
    target: &BTreeSet<Cell>,
    opts: StickyOptions,
) -> Result<StickyOutcome, CollectError> {
    let mut state = StickyState::new(c0, target.clone())?;
    for &t in target {
        if !w.is_free(t) {
            return Err(crate::world::WorldError::TargetOnObstacle(t).into());
        }
    }
    ensure_connected(w)?;
    let diameter = w.diameter()?;
    let budget = scaled_budget(opts.budget_factor, c0.len() as u128 * diameter as u128);

    let (adj, field) = target_field(w, target);
    let dist = |c: Cell| field[w.free_index(c).expect("free")];

    let mut sequence = CommandSequence::new();
    let mut active_per_command = vec![state.active.len()];

    while !state.is_done() {
        let mut tracked = *state
            .active
            .positions()
            .iter()
            .min_by_key(|&&p| (dist(p), p))
            .expect("active set is nonempty");
        let route = loop {
            let route = route_to_target(w, &adj, &field, tracked);
            match route.iter().find(|(_, c)| state.active.contains(*c)) {
                Some(&(_, blocker)) => tracked = blocker,
                None => break route,
            }
        };
        for (m, expect) in route {
            if sequence.len() as u64 >= budget {
                return Err(CollectError::CommandBudgetExceeded {
                    used: sequence.len() as u64 + 1,
                    budget,
                    factor: opts.budget_factor,
                });
            }
            let (next, outcomes) = step_tracked(w, &state, m);
            state = next;
            sequence.push(m);
            active_per_command.push(state.active.len());
            let outcome = outcomes
                .iter()
                .find(|(p, _)| *p == tracked)
                .map(|(_, o)| *o)
                .expect("tracked particle is active");
            match outcome {
                StepOutcome::Moved(c) => {
                    debug_assert_eq!(c, expect);
                    tracked = c;
                }
                StepOutcome::Absorbed | StepOutcome::Stayed => break,
            }
        }
    }

    Ok(StickyOutcome {
        sequence,
        state,
        active_per_command,
        diameter,
    })
}
