//! Greedy pairwise collection of small particles under discrete moves.
//!
//! `collect_ab` repeatedly plans the shortest single-particle route taking
//! particle `a` to the current cell of particle `b` and executes it on the
//! whole swarm until the two coincide. `greedy_collect` picks pairs with a
//! [`Strategy`] and merges them until one occupied cell remains.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{CommandSequence, Configuration, Move, MoveMode, MoveTable, ParticleKind};
use crate::error::{require_kind, scaled_budget, CollectError};
use crate::world::{ensure_connected, Cell, PairDistances, Workspace, NONE};

/// Pair-selection rule. Pairs are always returned in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Minimum free-space distance; ties go to the row-major-first pair.
    ClosestPair,
    /// Maximum free-space distance; ties go to the row-major-first pair.
    FurthestPair,
    /// The first two occupied cells of a row-major scan.
    ConnectToFirst,
    /// A uniformly random unordered pair from a [`SplitMix64`] stream.
    Random { seed: u64 },
    /// The row-major-first and row-major-last occupied cells.
    FirstToLast,
}

impl Strategy {
    /// The three strategies compared in the benchmark by default.
    pub const BENCHMARK: [Strategy; 3] = [
        Strategy::ClosestPair,
        Strategy::FurthestPair,
        Strategy::ConnectToFirst,
    ];

    pub fn needs_distances(self) -> bool {
        matches!(self, Strategy::ClosestPair | Strategy::FurthestPair)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::ClosestPair => f.write_str("closest"),
            Strategy::FurthestPair => f.write_str("furthest"),
            Strategy::ConnectToFirst => f.write_str("first"),
            Strategy::Random { seed } => write!(f, "random:{seed}"),
            Strategy::FirstToLast => f.write_str("firstlast"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "closest" => Ok(Strategy::ClosestPair),
            "furthest" => Ok(Strategy::FurthestPair),
            "first" => Ok(Strategy::ConnectToFirst),
            "firstlast" => Ok(Strategy::FirstToLast),
            _ => match s.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(|seed| Strategy::Random { seed })
                    .map_err(|e| format!("bad random seed {seed:?}: {e}")),
                None => Err(format!(
                    "unknown strategy {s:?} (closest, furthest, first, random:<seed>, firstlast)"
                )),
            },
        }
    }
}

/// SplitMix64 (Steele, Lea and Flood), a 64-bit counter-based generator.
/// Output depends only on the seed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..n` by rejection sampling.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = n * (u64::MAX / n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    /// Multiplier on the `n^3` (per pair) and `m * n^3` (whole swarm)
    /// command ceilings.
    pub bound_factor: f64,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self { bound_factor: 1.0 }
    }
}

/// Breadth-first route planner over free indices, reusing its buffers.
struct Planner {
    adj: Vec<[u32; 4]>,
    stamp: Vec<u32>,
    parent: Vec<u32>,
    via: Vec<u8>,
    epoch: u32,
    queue: VecDeque<u32>,
}

impl Planner {
    fn new(w: &Workspace) -> Self {
        let adj = w.neighbor_table();
        let n = adj.len();
        Self {
            adj,
            stamp: vec![0; n],
            parent: vec![NONE; n],
            via: vec![0; n],
            epoch: 0,
            queue: VecDeque::new(),
        }
    }

    /// Shortest route from `from` to `to`; neighbors are relaxed in
    /// u, d, r, l order and keep the first parent that reaches them.
    fn route(&mut self, from: u32, to: u32) -> Option<Vec<Move>> {
        if from == to {
            return Some(Vec::new());
        }
        self.epoch += 1;
        let epoch = self.epoch;
        self.queue.clear();
        self.stamp[from as usize] = epoch;
        self.queue.push_back(from);
        'bfs: while let Some(i) = self.queue.pop_front() {
            for (k, &n) in self.adj[i as usize].iter().enumerate() {
                if n == NONE || self.stamp[n as usize] == epoch {
                    continue;
                }
                self.stamp[n as usize] = epoch;
                self.parent[n as usize] = i;
                self.via[n as usize] = k as u8;
                if n == to {
                    break 'bfs;
                }
                self.queue.push_back(n);
            }
        }
        if self.stamp[to as usize] != epoch {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = to;
        while cur != from {
            path.push(Move::SEARCH_ORDER[self.via[cur as usize] as usize]);
            cur = self.parent[cur as usize];
        }
        path.reverse();
        Some(path)
    }
}

/// Distinct occupied free indices, kept sorted (row-major).
struct Swarm<'t> {
    table: &'t MoveTable,
    cells: Vec<u32>,
}

impl Swarm<'_> {
    fn step(&mut self, m: Move) {
        for c in self.cells.iter_mut() {
            *c = self.table.apply(*c, m);
        }
        self.cells.sort_unstable();
        self.cells.dedup();
    }
}

fn to_indices(w: &Workspace, c: &Configuration) -> Vec<u32> {
    c.positions()
        .iter()
        .map(|&p| w.free_index(p).expect("configuration cells are free") as u32)
        .collect()
}

fn to_config(w: &Workspace, cells: &[u32]) -> Configuration {
    let set: BTreeSet<Cell> = cells.iter().map(|&i| w.free_cells()[i as usize]).collect();
    Configuration::from_set(ParticleKind::Small, set)
}

/// A minimum-length sequence moving a lone particle from `from` to `to`.
pub fn shortest_control_sequence(
    w: &Workspace,
    from: Cell,
    to: Cell,
) -> Result<CommandSequence, CollectError> {
    let unreachable = CollectError::Unreachable { from, to };
    let (Some(a), Some(b)) = (w.free_index(from), w.free_index(to)) else {
        return Err(unreachable);
    };
    Planner::new(w)
        .route(a as u32, b as u32)
        .map(CommandSequence::from)
        .ok_or(unreachable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectAbOutcome {
    pub sequence: CommandSequence,
    pub config: Configuration,
    /// Length of each planned route, one per plan-then-execute iteration.
    pub planned_lengths: Vec<u32>,
}

struct PairRun {
    planned_lengths: Vec<u32>,
    commands: u64,
}

#[allow(clippy::too_many_arguments)]
fn run_pair(
    w: &Workspace,
    planner: &mut Planner,
    swarm: &mut Swarm<'_>,
    mut a: u32,
    mut b: u32,
    out: &mut CommandSequence,
    distinct: &mut Vec<usize>,
    budget: u64,
    factor: f64,
) -> Result<PairRun, CollectError> {
    let table = swarm.table;
    let mut run = PairRun {
        planned_lengths: Vec::new(),
        commands: 0,
    };
    while a != b {
        let route = planner.route(a, b).ok_or(CollectError::Unreachable {
            from: w.free_cells()[a as usize],
            to: w.free_cells()[b as usize],
        })?;
        run.planned_lengths.push(route.len() as u32);
        for m in route {
            run.commands += 1;
            if run.commands > budget {
                return Err(CollectError::CommandBudgetExceeded {
                    used: run.commands,
                    budget,
                    factor,
                });
            }
            swarm.step(m);
            a = table.apply(a, m);
            b = table.apply(b, m);
            out.push(m);
            distinct.push(swarm.cells.len());
        }
    }
    Ok(run)
}

fn pair_budget(w: &Workspace, opts: GreedyOptions) -> u64 {
    scaled_budget(opts.bound_factor, (w.n() as u128).pow(3))
}

/// Drives `a` onto `b` by repeatedly executing the shortest route from `a`
/// to `b`'s current cell; every command moves the whole swarm `c`.
pub fn collect_ab(
    w: &Workspace,
    c: &Configuration,
    a: Cell,
    b: Cell,
    opts: GreedyOptions,
) -> Result<CollectAbOutcome, CollectError> {
    require_kind(c.kind(), ParticleKind::Small)?;
    let (ai, bi) = match (w.free_index(a), w.free_index(b)) {
        (Some(ai), Some(bi)) if c.contains(a) && c.contains(b) => (ai as u32, bi as u32),
        _ => return Err(CollectError::Unreachable { from: a, to: b }),
    };
    let table = MoveTable::new(w, MoveMode::Discrete);
    let mut planner = Planner::new(w);
    let mut swarm = Swarm {
        table: &table,
        cells: to_indices(w, c),
    };
    let mut sequence = CommandSequence::new();
    let run = run_pair(
        w,
        &mut planner,
        &mut swarm,
        ai,
        bi,
        &mut sequence,
        &mut Vec::new(),
        pair_budget(w, opts),
        opts.bound_factor,
    )?;
    Ok(CollectAbOutcome {
        sequence,
        config: to_config(w, &swarm.cells),
        planned_lengths: run.planned_lengths,
    })
}

/// Stateful pair chooser; the random strategy keeps its stream across calls.
pub struct PairSelector {
    strategy: Strategy,
    rng: SplitMix64,
    distances: Option<PairDistances>,
}

impl PairSelector {
    pub fn new(w: &Workspace, strategy: Strategy) -> Self {
        let seed = match strategy {
            Strategy::Random { seed } => seed,
            _ => 0,
        };
        Self {
            strategy,
            rng: SplitMix64::new(seed),
            distances: strategy.needs_distances().then(|| PairDistances::new(w)),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn select(&mut self, w: &Workspace, c: &Configuration) -> Result<(Cell, Cell), CollectError> {
        let cells = to_indices(w, c);
        let (i, j) = self.select_indices(&cells)?;
        Ok((w.free_cells()[i as usize], w.free_cells()[j as usize]))
    }

    /// `cells` must be sorted and distinct.
    fn select_indices(&mut self, cells: &[u32]) -> Result<(u32, u32), CollectError> {
        let k = cells.len();
        if k < 2 {
            return Err(CollectError::TooFewPositions(k));
        }
        let pair = match self.strategy {
            Strategy::ConnectToFirst => (cells[0], cells[1]),
            Strategy::FirstToLast => (cells[0], cells[k - 1]),
            Strategy::Random { .. } => {
                let i = self.rng.below(k as u64) as usize;
                let mut j = self.rng.below(k as u64 - 1) as usize;
                if j >= i {
                    j += 1;
                }
                (cells[i.min(j)], cells[i.max(j)])
            }
            Strategy::ClosestPair => self.extreme_pair(cells, |d, best| d < best, Some(1)),
            Strategy::FurthestPair => self.extreme_pair(cells, |d, best| d > best, None),
        };
        Ok(pair)
    }

    /// Scans pairs in row-major order keeping the first strictly better one.
    fn extreme_pair(
        &self,
        cells: &[u32],
        better: impl Fn(u32, u32) -> bool,
        unbeatable: Option<u32>,
    ) -> (u32, u32) {
        let dist = self.distances.as_ref().expect("distance strategies build a table");
        let mut best: Option<(u32, (u32, u32))> = None;
        for (i, &a) in cells.iter().enumerate() {
            let done = dist.with_row(a as usize, |row| {
                for &b in &cells[i + 1..] {
                    let d = row.get(b as usize);
                    if d == NONE {
                        continue;
                    }
                    if best.is_none_or(|(bd, _)| better(d, bd)) {
                        best = Some((d, (a, b)));
                        if Some(d) == unbeatable {
                            return true;
                        }
                    }
                }
                false
            });
            if done {
                break;
            }
        }
        best.map(|(_, p)| p).unwrap_or((cells[0], cells[1]))
    }
}

/// One-shot pair selection (a fresh random stream for [`Strategy::Random`]).
pub fn select_pair(
    w: &Workspace,
    c: &Configuration,
    strategy: Strategy,
) -> Result<(Cell, Cell), CollectError> {
    PairSelector::new(w, strategy).select(w, c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub pair: (Cell, Cell),
    /// Route lengths planned inside this pair's loop (the first is the
    /// pair's distance when selected).
    pub planned_lengths: Vec<u32>,
    pub commands: u64,
    pub commands_total: u64,
    pub distinct_after: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    /// Distinct occupied cells initially and after every command.
    pub distinct_per_command: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub sequence: CommandSequence,
    pub trace: GreedyTrace,
}

/// Merges pairs chosen by `strategy` until one occupied cell remains.
pub fn greedy_collect(
    w: &Workspace,
    c0: &Configuration,
    strategy: Strategy,
    opts: GreedyOptions,
) -> Result<GreedyOutcome, CollectError> {
    require_kind(c0.kind(), ParticleKind::Small)?;
    if c0.is_empty() {
        return Err(CollectError::NoParticles);
    }
    ensure_connected(w)?;

    let m = c0.len() as u128;
    let total_budget = scaled_budget(opts.bound_factor, m * (w.n() as u128).pow(3));
    let pair_budget = pair_budget(w, opts);

    let table = MoveTable::new(w, MoveMode::Discrete);
    let mut planner = Planner::new(w);
    let mut selector = PairSelector::new(w, strategy);
    let mut swarm = Swarm {
        table: &table,
        cells: to_indices(w, c0),
    };
    let mut sequence = CommandSequence::new();
    let mut trace = GreedyTrace {
        steps: Vec::new(),
        distinct_per_command: vec![swarm.cells.len()],
    };

    while swarm.cells.len() > 1 {
        let (a, b) = selector.select_indices(&swarm.cells)?;
        let remaining = total_budget.saturating_sub(sequence.len() as u64);
        let run = run_pair(
            w,
            &mut planner,
            &mut swarm,
            a,
            b,
            &mut sequence,
            &mut trace.distinct_per_command,
            pair_budget.min(remaining),
            opts.bound_factor,
        )
        .map_err(|e| match e {
            CollectError::CommandBudgetExceeded { .. } if remaining < pair_budget => {
                CollectError::CommandBudgetExceeded {
                    used: sequence.len() as u64 + 1,
                    budget: total_budget,
                    factor: opts.bound_factor,
                }
            }
            e => e,
        })?;
        trace.steps.push(GreedyStep {
            pair: (w.free_cells()[a as usize], w.free_cells()[b as usize]),
            planned_lengths: run.planned_lengths,
            commands: run.commands,
            commands_total: sequence.len() as u64,
            distinct_after: swarm.cells.len(),
        });
    }
    Ok(GreedyOutcome { sequence, trace })
}
