//! Shortest collecting sequences by breadth-first search over configurations.
//!
//! The node list mirrors the classic formulation: node `p` holds a
//! configuration, the move that produced it and its parent index. The list
//! doubles as the FIFO queue (`p` is the read pointer, the list end is the
//! write pointer), and configurations already in the list are pruned.

use std::collections::HashSet;

use crate::dynamics::{Configuration, Move, MoveMode, MoveTable, ParticleKind};
use crate::error::{require_kind, CollectError};
use crate::world::{ensure_connected, Workspace};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of nodes in the list before giving up.
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Nodes taken off the queue and tested, the collected one included.
    pub nodes_expanded: u64,
    /// Children produced by applying the four moves.
    pub nodes_generated: u64,
    /// Children dropped because their configuration was already listed.
    pub duplicates_pruned: u64,
    /// Final length of the node list (root included).
    pub nodes_listed: u64,
    /// Largest number of listed-but-unexpanded nodes.
    pub frontier_peak: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalSolution {
    pub sequence: crate::dynamics::CommandSequence,
    pub stats: SearchStats,
}

/// Fixed-width bitset arena holding every listed configuration.
struct NodeList {
    words: usize,
    configs: Vec<u64>,
    moves: Vec<Option<Move>>,
    parents: Vec<u32>,
    depths: Vec<u32>,
}

impl NodeList {
    fn config(&self, p: usize) -> &[u64] {
        &self.configs[p * self.words..(p + 1) * self.words]
    }

    fn push(&mut self, config: &[u64], m: Option<Move>, parent: u32, depth: u32) {
        self.configs.extend_from_slice(config);
        self.moves.push(m);
        self.parents.push(parent);
        self.depths.push(depth);
    }

    fn len(&self) -> usize {
        self.moves.len()
    }

    fn path_to(&self, mut p: usize) -> crate::dynamics::CommandSequence {
        let mut path = Vec::new();
        while let Some(m) = self.moves[p] {
            path.push(m);
            p = self.parents[p] as usize;
        }
        path.reverse();
        path.into()
    }
}

fn apply_bits(table: &MoveTable, src: &[u64], m: Move, dst: &mut [u64]) {
    dst.fill(0);
    for (wi, &word) in src.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let i = wi as u32 * 64 + bits.trailing_zeros();
            bits &= bits - 1;
            let j = table.apply(i, m) as usize;
            dst[j / 64] |= 1 << (j % 64);
        }
    }
}

fn popcount(bits: &[u64]) -> u32 {
    bits.iter().map(|w| w.count_ones()).sum()
}

struct Search {
    list: NodeList,
    stats: SearchStats,
    goal: Option<usize>,
}

fn run_search(
    w: &Workspace,
    c0: &Configuration,
    mode: MoveMode,
    opts: SearchOptions,
) -> Result<Search, CollectError> {
    require_kind(c0.kind(), ParticleKind::Small)?;
    if c0.is_empty() {
        return Err(CollectError::NoParticles);
    }
    ensure_connected(w)?;

    let table = MoveTable::new(w, mode);
    let words = table.len().div_ceil(64);
    let mut root = vec![0u64; words];
    for &p in c0.positions() {
        let i = w.free_index(p).expect("configuration cells are free");
        root[i / 64] |= 1 << (i % 64);
    }

    let mut list = NodeList {
        words,
        configs: Vec::new(),
        moves: Vec::new(),
        parents: Vec::new(),
        depths: Vec::new(),
    };
    let mut seen: HashSet<Box<[u64]>> = HashSet::new();
    seen.insert(root.clone().into_boxed_slice());
    list.push(&root, None, 0, 0);

    let mut stats = SearchStats::default();
    let mut child = vec![0u64; words];
    let mut p = 0;
    while p < list.len() {
        stats.nodes_expanded += 1;
        stats.frontier_peak = stats.frontier_peak.max((list.len() - p) as u64);
        if popcount(list.config(p)) <= 1 {
            stats.nodes_listed = list.len() as u64;
            return Ok(Search {
                list,
                stats,
                goal: Some(p),
            });
        }
        let depth = list.depths[p] + 1;
        for m in Move::SEARCH_ORDER {
            apply_bits(&table, list.config(p), m, &mut child);
            stats.nodes_generated += 1;
            if seen.contains(child.as_slice()) {
                stats.duplicates_pruned += 1;
                continue;
            }
            if list.len() as u64 >= opts.node_budget {
                return Err(CollectError::NodeBudgetExhausted {
                    budget: opts.node_budget,
                });
            }
            seen.insert(child.clone().into_boxed_slice());
            list.push(&child, Some(m), p as u32, depth);
        }
        p += 1;
    }
    stats.nodes_listed = list.len() as u64;
    Ok(Search {
        list,
        stats,
        goal: None,
    })
}

/// Finds a minimum-length command sequence that collects a small-particle
/// swarm. Children are expanded in u, d, r, l order from a FIFO queue, so
/// among equally short answers the first in that order is returned.
pub fn optimal_collect(
    w: &Workspace,
    c0: &Configuration,
    mode: MoveMode,
    opts: SearchOptions,
) -> Result<OptimalSolution, CollectError> {
    let search = run_search(w, c0, mode, opts)?;
    match search.goal {
        Some(p) => Ok(OptimalSolution {
            sequence: search.list.path_to(p),
            stats: search.stats,
        }),
        None => Err(CollectError::Infeasible {
            nodes_expanded: search.stats.nodes_expanded,
        }),
    }
}

/// Independent reference: iterative-deepening search over raw command
/// sequences, using the public configuration dynamics and no visited set.
/// Only moves that leave the configuration unchanged are skipped, since
/// dropping such a move from a collecting sequence still collects.
///
/// Meant for tiny instances; cost grows as `3^depth`.
pub mod oracle {
    use crate::dynamics::{apply_move, is_collected, CommandSequence, Configuration, Move, MoveMode};
    use crate::world::Workspace;

    pub fn oracle_optimal_sequence(
        w: &Workspace,
        c0: &Configuration,
        mode: MoveMode,
        max_depth: usize,
    ) -> Option<CommandSequence> {
        let mut path = Vec::with_capacity(max_depth);
        (0..=max_depth)
            .find(|&limit| dfs(w, c0, mode, limit, &mut path))
            .map(|_| path.into())
    }

    pub fn oracle_optimal_length(
        w: &Workspace,
        c0: &Configuration,
        mode: MoveMode,
        max_depth: usize,
    ) -> Option<usize> {
        oracle_optimal_sequence(w, c0, mode, max_depth).map(|s| s.len())
    }

    fn dfs(w: &Workspace, c: &Configuration, mode: MoveMode, left: usize, path: &mut Vec<Move>) -> bool {
        if left == 0 {
            return is_collected(c);
        }
        for m in Move::SEARCH_ORDER {
            let next = apply_move(w, c, m, mode);
            if next == *c {
                continue;
            }
            path.push(m);
            if dfs(w, &next, mode, left - 1, path) {
                return true;
            }
            path.pop();
        }
        false
    }
}

pub use oracle::oracle_optimal_length;

#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::dynamics::{apply_sequence, is_collected, CommandSequence};
    use crate::world::{parse_world, Cell};

    fn small(w: &Workspace, v: &[(u32, u32)]) -> Configuration {
        Configuration::new(w, ParticleKind::Small, v.iter().map(|&(x, y)| Cell::new(x, y))).unwrap()
    }

    /// Every sequence over {u,r,d,l} of exactly `len` moves.
    fn all_sequences(len: usize) -> Vec<Vec<Move>> {
        (0..len).fold(vec![vec![]], |acc, _| {
            acc.into_iter()
                .flat_map(|s| {
                    Move::SEARCH_ORDER.map(|m| {
                        let mut s = s.clone();
                        s.push(m);
                        s
                    })
                })
                .collect()
        })
    }

    #[test]
    fn already_collected() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let sol = optimal_collect(&w, &small(&w, &[(1, 1)]), MoveMode::Discrete, SearchOptions::default()).unwrap();
        assert!(sol.sequence.is_empty());
        assert_eq!(sol.stats.nodes_expanded, 1);
        assert_eq!(oracle_optimal_length(&w, &small(&w, &[(1, 1)]), MoveMode::Discrete, 3), Some(0));
    }

    #[test]
    fn opposite_corners_of_3x3() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let c = small(&w, &[(0, 0), (2, 2)]);
        for len in 0..4 {
            for s in all_sequences(len) {
                assert!(!is_collected(&apply_sequence(&w, &c, &s, MoveMode::Discrete)));
            }
        }
        let sol = optimal_collect(&w, &c, MoveMode::Discrete, SearchOptions::default()).unwrap();
        assert_eq!(sol.sequence.len(), 4);
        assert!(is_collected(&apply_sequence(&w, &c, &sol.sequence, MoveMode::Discrete)));
        assert_eq!(Some(sol.sequence), oracle_optimal_sequence(&w, &c, MoveMode::Discrete, 6));
    }

    #[test]
    fn oracle_examples() {
        let w = Workspace::rectangle(2, 2).unwrap();
        let c = small(&w, &[(0, 0), (1, 1)]);
        for s in all_sequences(1) {
            assert!(!is_collected(&apply_sequence(&w, &c, &s, MoveMode::Discrete)));
        }
        let rd: CommandSequence = "rd".parse().unwrap();
        assert!(is_collected(&apply_sequence(&w, &c, &rd, MoveMode::Discrete)));
        assert_eq!(oracle_optimal_length(&w, &c, MoveMode::Discrete, 6), Some(2));

        let corridor = Workspace::rectangle(3, 1).unwrap();
        let c = small(&corridor, &[(0, 0), (2, 0)]);
        assert_eq!(oracle_optimal_length(&corridor, &c, MoveMode::Discrete, 6), Some(2));
        assert_eq!(oracle_optimal_length(&corridor, &c, MoveMode::Maximal, 6), Some(1));
    }

    #[test]
    fn errors() {
        let (w, c) = parse_world("o#\n#o", ParticleKind::Small).unwrap();
        assert!(matches!(
            optimal_collect(&w, &c, MoveMode::Discrete, SearchOptions::default()),
            Err(CollectError::World(_))
        ));
        let w = Workspace::rectangle(3, 3).unwrap();
        let c = small(&w, &[(0, 0), (2, 2)]).with_kind(ParticleKind::Large);
        assert!(matches!(
            optimal_collect(&w, &c, MoveMode::Discrete, SearchOptions::default()),
            Err(CollectError::WrongKind { .. })
        ));
        let c = small(&w, &[(0, 0), (2, 2)]);
        assert_eq!(
            optimal_collect(&w, &c, MoveMode::Discrete, SearchOptions { node_budget: 3 }),
            Err(CollectError::NodeBudgetExhausted { budget: 3 })
        );
    }

    #[test]
    fn maximal_moves_can_be_infeasible() {
        // Two cul-de-sacs facing each other across a plus shape: whichever
        // way the swarm slides, the arms keep one particle each.
        let (w, c) = parse_world("#o#\n...\n#o#", ParticleKind::Small).unwrap();
        let res = optimal_collect(&w, &c, MoveMode::Maximal, SearchOptions::default());
        match res {
            Err(CollectError::Infeasible { .. }) => {
                assert_eq!(oracle_optimal_length(&w, &c, MoveMode::Maximal, 10), None)
            }
            Ok(sol) => assert_eq!(
                Some(sol.sequence.len()),
                oracle_optimal_length(&w, &c, MoveMode::Maximal, 10)
            ),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn bfs_layers_and_bookkeeping() {
        let (w, c) = parse_world("o..#\n.#..\n...o\n#..o", ParticleKind::Small).unwrap();
        let s = run_search(&w, &c, MoveMode::Discrete, SearchOptions::default()).unwrap();
        let list = &s.list;
        for p in 1..list.len() {
            let parent = list.parents[p] as usize;
            assert_eq!(list.depths[parent] + 1, list.depths[p]);
            assert!(list.depths[p - 1] <= list.depths[p], "FIFO order is by depth");
        }
        let mut configs: Vec<&[u64]> = (0..list.len()).map(|p| list.config(p)).collect();
        configs.sort();
        configs.dedup();
        assert_eq!(configs.len(), list.len(), "no configuration listed twice");
        let st = s.stats;
        assert_eq!(st.nodes_listed - 1 + st.duplicates_pruned, st.nodes_generated);
        assert_eq!(st.nodes_generated, 4 * (st.nodes_expanded - 1));
        let goal = s.goal.unwrap();
        assert!((0..goal).all(|p| popcount(list.config(p)) > 1));
        assert_eq!(list.path_to(goal).len() as u32, list.depths[goal]);
    }

    #[test]
    fn matches_oracle_sequence_exactly_on_small_worlds() {
        for text in ["o.o\n...\no..", "o.#\n...\n#.o", ".o.\no#o\n...", "oo\noo"] {
            let (w, c) = parse_world(text, ParticleKind::Small).unwrap();
            for mode in [MoveMode::Discrete, MoveMode::Maximal] {
                let bfs = optimal_collect(&w, &c, mode, SearchOptions::default()).ok().map(|s| s.sequence);
                assert_eq!(bfs, oracle_optimal_sequence(&w, &c, mode, 10), "{text:?} {mode}");
            }
        }
    }
}
