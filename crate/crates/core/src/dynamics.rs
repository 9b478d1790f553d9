//! Move semantics for swarms under a shared global input.
//!
//! Four variants: {discrete, maximal} x {small, large}. Small particles merge
//! when they meet, so a small configuration is a set of occupied cells.
//! Large particles occupy a whole cell each and block one another.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use thiserror::Error;

use crate::world::{Cell, WorldError, Workspace};

/// One global command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Up,
    Right,
    Down,
    Left,
}

impl Move {
    /// Child expansion order of the breadth-first searches.
    pub const SEARCH_ORDER: [Move; 4] = [Move::Up, Move::Down, Move::Right, Move::Left];

    /// `(dx, dy)` with `y` growing downward.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Move::Up => (0, -1),
            Move::Right => (1, 0),
            Move::Down => (0, 1),
            Move::Left => (-1, 0),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Move::Up => 'u',
            Move::Right => 'r',
            Move::Down => 'd',
            Move::Left => 'l',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'u' => Some(Move::Up),
            'r' => Some(Move::Right),
            'd' => Some(Move::Down),
            'l' => Some(Move::Left),
            _ => None,
        }
    }

    /// Position of this move in [`Move::SEARCH_ORDER`].
    pub fn search_index(self) -> usize {
        match self {
            Move::Up => 0,
            Move::Down => 1,
            Move::Right => 2,
            Move::Left => 3,
        }
    }

    /// Sort key placing the particles furthest along `self` first.
    fn leading_key(self, c: Cell) -> i64 {
        match self {
            Move::Up => c.y as i64,
            Move::Down => -(c.y as i64),
            Move::Left => c.x as i64,
            Move::Right => -(c.x as i64),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid command {ch:?} at position {pos}; expected one of u, r, d, l")]
pub struct ParseMoveError {
    pub ch: char,
    pub pos: usize,
}

/// An ordered list of moves. Its text form is a string over `urdl`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CommandSequence(Vec<Move>);

impl CommandSequence {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn push(&mut self, m: Move) {
        self.0.push(m);
    }

    pub fn extend_from(&mut self, other: &CommandSequence) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn into_vec(self) -> Vec<Move> {
        self.0
    }
}

impl Deref for CommandSequence {
    type Target = [Move];

    fn deref(&self) -> &[Move] {
        &self.0
    }
}

impl From<Vec<Move>> for CommandSequence {
    fn from(v: Vec<Move>) -> Self {
        Self(v)
    }
}

impl FromIterator<Move> for CommandSequence {
    fn from_iter<I: IntoIterator<Item = Move>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for CommandSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|m| write!(f, "{}", m.as_char()))
    }
}

impl FromStr for CommandSequence {
    type Err = ParseMoveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(pos, ch)| Move::from_char(ch).ok_or(ParseMoveError { ch, pos }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParticleKind {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveMode {
    Discrete,
    Maximal,
}

macro_rules! token_enum {
    ($ty:ident, $what:literal, $($variant:ident => $tok:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $tok),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($tok => Ok($ty::$variant),)+
                    _ => Err(format!(concat!("unknown ", $what, " {:?}"), s)),
                }
            }
        }
    };
}

token_enum!(ParticleKind, "particle kind", Small => "small", Large => "large");
token_enum!(MoveMode, "move mode", Discrete => "discrete", Maximal => "maximal");

/// The swarm state: the set of occupied cells.
///
/// For small particles co-located particles are indistinguishable, so the
/// set is all there is. For large particles each cell holds one particle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    kind: ParticleKind,
    positions: BTreeSet<Cell>,
}

impl Configuration {
    /// Validates that every position is a free cell of `w`.
    pub fn new(
        w: &Workspace,
        kind: ParticleKind,
        positions: impl IntoIterator<Item = Cell>,
    ) -> Result<Self, WorldError> {
        let positions: BTreeSet<Cell> = positions.into_iter().collect();
        for &p in &positions {
            if !w.in_bounds(p) {
                return Err(WorldError::OutOfBounds(p));
            }
            if !w.is_free(p) {
                return Err(WorldError::ParticleOnObstacle(p));
            }
        }
        Ok(Self { kind, positions })
    }

    pub(crate) fn from_set(kind: ParticleKind, positions: BTreeSet<Cell>) -> Self {
        Self { kind, positions }
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    /// The same cells reinterpreted as another particle kind.
    pub fn with_kind(&self, kind: ParticleKind) -> Self {
        Self {
            kind,
            positions: self.positions.clone(),
        }
    }

    /// Occupied cells in row-major order.
    pub fn positions(&self) -> &BTreeSet<Cell> {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.positions.contains(&c)
    }
}

/// One discrete step of a lone particle: it moves unless the destination is
/// an obstacle or off the grid.
pub fn step_cell(w: &Workspace, c: Cell, m: Move) -> Cell {
    w.free_neighbor(c, m).unwrap_or(c)
}

/// A lone particle sliding until it hits an obstacle or the grid edge.
pub fn slide_cell(w: &Workspace, mut c: Cell, m: Move) -> Cell {
    while let Some(n) = w.free_neighbor(c, m) {
        c = n;
    }
    c
}

pub fn apply_discrete(w: &Workspace, c: &Configuration, m: Move) -> Configuration {
    match c.kind {
        ParticleKind::Small => Configuration::from_set(
            ParticleKind::Small,
            c.positions.iter().map(|&p| step_cell(w, p, m)).collect(),
        ),
        ParticleKind::Large => {
            Configuration::from_set(ParticleKind::Large, step_large(w, &c.positions, m, |_| false).0)
        }
    }
}

/// Leading-edge-first resolution for large particles. Each particle moves at
/// most one cell, into a free cell not occupied after the particles ahead of
/// it have settled. Particles stepping onto a cell where `absorbs` holds are
/// removed instead and counted in the second return value.
pub(crate) fn step_large(
    w: &Workspace,
    positions: &BTreeSet<Cell>,
    m: Move,
    absorbs: impl Fn(Cell) -> bool,
) -> (BTreeSet<Cell>, Vec<(Cell, StepOutcome)>) {
    let mut order: Vec<Cell> = positions.iter().copied().collect();
    order.sort_by_key(|&p| (m.leading_key(p), p));
    let mut occupied = positions.clone();
    let mut outcomes = Vec::with_capacity(order.len());
    for p in order {
        let outcome = match w.free_neighbor(p, m) {
            Some(dest) if absorbs(dest) => {
                occupied.remove(&p);
                StepOutcome::Absorbed
            }
            Some(dest) if !occupied.contains(&dest) => {
                occupied.remove(&p);
                occupied.insert(dest);
                StepOutcome::Moved(dest)
            }
            _ => StepOutcome::Stayed,
        };
        outcomes.push((p, outcome));
    }
    (occupied, outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StepOutcome {
    Moved(Cell),
    Stayed,
    Absorbed,
}

/// Fixpoint of [`apply_discrete`] under a repeated move.
pub fn apply_maximal(w: &Workspace, c: &Configuration, m: Move) -> Configuration {
    let limit = w.width().max(w.height());
    let mut cur = c.clone();
    for _ in 0..=limit {
        let next = apply_discrete(w, &cur, m);
        if next == cur {
            return cur;
        }
        cur = next;
    }
    unreachable!("maximal move did not settle within {limit} steps");
}

pub fn apply_move(w: &Workspace, c: &Configuration, m: Move, mode: MoveMode) -> Configuration {
    match mode {
        MoveMode::Discrete => apply_discrete(w, c, m),
        MoveMode::Maximal => apply_maximal(w, c, m),
    }
}

pub fn apply_sequence(
    w: &Workspace,
    c: &Configuration,
    seq: &[Move],
    mode: MoveMode,
) -> Configuration {
    seq.iter().fold(c.clone(), |acc, &m| apply_move(w, &acc, m, mode))
}

/// Small: a single occupied cell. Large: one edge-connected component.
pub fn is_collected(c: &Configuration) -> bool {
    match c.kind {
        ParticleKind::Small => c.positions.len() == 1,
        ParticleKind::Large => {
            let Some(&start) = c.positions.iter().next() else {
                return false;
            };
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(p) = stack.pop() {
                for m in Move::SEARCH_ORDER {
                    let (dx, dy) = m.delta();
                    let (x, y) = (p.x as i64 + dx as i64, p.y as i64 + dy as i64);
                    if x < 0 || y < 0 {
                        continue;
                    }
                    let n = Cell::new(x as u32, y as u32);
                    if c.positions.contains(&n) && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
            seen.len() == c.positions.len()
        }
    }
}

/// Small-particle transitions compiled over free-cell indices.
///
/// Small particles never interact, so a configuration's image under a move
/// is the set of images of its cells; this table holds those images.
#[derive(Debug, Clone)]
pub struct MoveTable {
    mode: MoveMode,
    next: Vec<[u32; 4]>,
}

impl MoveTable {
    pub fn new(w: &Workspace, mode: MoveMode) -> Self {
        let next = w
            .free_cells()
            .iter()
            .map(|&c| {
                Move::SEARCH_ORDER.map(|m| {
                    let dest = match mode {
                        MoveMode::Discrete => step_cell(w, c, m),
                        MoveMode::Maximal => slide_cell(w, c, m),
                    };
                    w.free_index(dest).expect("moves stay on free cells") as u32
                })
            })
            .collect();
        Self { mode, next }
    }

    pub fn mode(&self) -> MoveMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    /// Image of free index `i` under `m`.
    #[inline]
    pub fn apply(&self, i: u32, m: Move) -> u32 {
        self.next[i as usize][m.search_index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::parse_world;
    use proptest::prelude::*;

    fn cells(v: &[(u32, u32)]) -> Vec<Cell> {
        v.iter().map(|&(x, y)| Cell::new(x, y)).collect()
    }

    fn conf(w: &Workspace, kind: ParticleKind, v: &[(u32, u32)]) -> Configuration {
        Configuration::new(w, kind, cells(v)).unwrap()
    }

    fn seq(s: &str) -> CommandSequence {
        s.parse().unwrap()
    }

    #[test]
    fn discrete_small_wall_blocks() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let c = conf(&w, ParticleKind::Small, &[(0, 0), (2, 2)]);
        assert_eq!(
            apply_discrete(&w, &c, Move::Right),
            conf(&w, ParticleKind::Small, &[(1, 0), (2, 2)])
        );
    }

    #[test]
    fn discrete_large_train_and_blocking() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let c = conf(&w, ParticleKind::Large, &[(0, 0), (1, 0)]);
        let once = apply_discrete(&w, &c, Move::Right);
        assert_eq!(once, conf(&w, ParticleKind::Large, &[(1, 0), (2, 0)]));
        assert_eq!(apply_discrete(&w, &once, Move::Right), once);
    }

    #[test]
    fn discrete_small_merge() {
        let w = Workspace::rectangle(2, 2).unwrap();
        let c = conf(&w, ParticleKind::Small, &[(0, 0), (1, 0)]);
        assert_eq!(apply_discrete(&w, &c, Move::Right), conf(&w, ParticleKind::Small, &[(1, 0)]));
    }

    #[test]
    fn maximal_slides() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let c = conf(&w, ParticleKind::Small, &[(0, 0), (1, 1)]);
        assert_eq!(
            apply_maximal(&w, &c, Move::Right),
            conf(&w, ParticleKind::Small, &[(2, 0), (2, 1)])
        );
        let l = conf(&w, ParticleKind::Large, &[(0, 0), (1, 0)]);
        assert_eq!(
            apply_maximal(&w, &l, Move::Right),
            conf(&w, ParticleKind::Large, &[(1, 0), (2, 0)])
        );
    }

    #[test]
    fn sequences() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let c = conf(&w, ParticleKind::Small, &[(0, 0), (2, 2)]);
        assert_eq!(apply_sequence(&w, &c, &[], MoveMode::Discrete), c);
        assert_eq!(
            apply_sequence(&w, &c, &seq("rrdd"), MoveMode::Discrete),
            conf(&w, ParticleKind::Small, &[(2, 2)])
        );
        let corridor = Workspace::rectangle(3, 1).unwrap();
        let c = conf(&corridor, ParticleKind::Small, &[(0, 0), (2, 0)]);
        assert_eq!(
            apply_sequence(&corridor, &c, &seq("l"), MoveMode::Maximal),
            conf(&corridor, ParticleKind::Small, &[(0, 0)])
        );
    }

    /// Replays `rrdd` one command at a time, checking every intermediate
    /// state against a per-particle step written out by hand.
    #[test]
    fn rrdd_trace_matches_single_step_oracle() {
        let w = Workspace::rectangle(3, 3).unwrap();
        let mut state = vec![(0i32, 0i32), (2, 2)];
        let mut c = conf(&w, ParticleKind::Small, &[(0, 0), (2, 2)]);
        for m in seq("rrdd").iter() {
            let (dx, dy) = m.delta();
            for p in state.iter_mut() {
                let (x, y) = (p.0 + dx, p.1 + dy);
                if (0..3).contains(&x) && (0..3).contains(&y) {
                    *p = (x, y);
                }
            }
            state.sort();
            state.dedup();
            c = apply_discrete(&w, &c, *m);
            let expect: Vec<(u32, u32)> = state.iter().map(|&(x, y)| (x as u32, y as u32)).collect();
            assert_eq!(c, conf(&w, ParticleKind::Small, &expect));
        }
        assert_eq!(c.len(), 1);
    }

    #[test]
    fn collected_predicates() {
        let w = Workspace::rectangle(4, 4).unwrap();
        assert!(is_collected(&conf(&w, ParticleKind::Small, &[(3, 3)])));
        assert!(is_collected(&conf(&w, ParticleKind::Large, &[(0, 0), (0, 1), (1, 1)])));
        assert!(!is_collected(&conf(&w, ParticleKind::Large, &[(0, 0), (1, 1)])));
        assert!(!is_collected(&conf(&w, ParticleKind::Small, &[])));
    }

    #[test]
    fn command_text_form() {
        let s = seq("urdldru");
        assert_eq!(s.len(), 7);
        assert_eq!(s.to_string(), "urdldru");
        assert_eq!(
            "urx".parse::<CommandSequence>().unwrap_err(),
            ParseMoveError { ch: 'x', pos: 2 }
        );
        assert_eq!("".parse::<CommandSequence>().unwrap().len(), 0);
    }

    #[test]
    fn large_obstacle_blocks_train() {
        let (w, c) = parse_world("oo.#\n....", ParticleKind::Large).unwrap();
        let r = apply_maximal(&w, &c, Move::Right);
        assert_eq!(r, conf(&w, ParticleKind::Large, &[(1, 0), (2, 0)]));
    }

    fn arb_instance(kind: ParticleKind) -> impl Strategy<Value = (Workspace, Configuration)> {
        (1u32..=6, 1u32..=6)
            .prop_flat_map(|(wd, ht)| {
                let n = (wd * ht) as usize;
                (
                    Just(wd),
                    Just(ht),
                    prop::collection::vec(prop::bool::weighted(0.75), n),
                    prop::collection::vec(prop::bool::weighted(0.35), n),
                )
            })
            .prop_filter_map("needs a free cell", move |(wd, ht, free, occ)| {
                let w = Workspace::new(wd, ht, free.clone(), BTreeSet::new()).ok()?;
                let ps = (0..free.len())
                    .filter(|&i| free[i] && occ[i])
                    .map(|i| Cell::new(i as u32 % wd, i as u32 / wd));
                let c = Configuration::new(&w, kind, ps).ok()?;
                Some((w, c))
            })
    }

    fn any_move() -> impl Strategy<Value = Move> {
        prop::sample::select(Move::SEARCH_ORDER.to_vec())
    }

    proptest! {
        #[test]
        fn small_moves_are_safe_and_monotone((w, c) in arb_instance(ParticleKind::Small), m in any_move()) {
            for next in [apply_discrete(&w, &c, m), apply_maximal(&w, &c, m)] {
                prop_assert!(next.len() <= c.len());
                prop_assert!(next.positions().iter().all(|&p| w.is_free(p)));
            }
        }

        #[test]
        fn large_moves_conserve_particles((w, c) in arb_instance(ParticleKind::Large), m in any_move()) {
            for next in [apply_discrete(&w, &c, m), apply_maximal(&w, &c, m)] {
                prop_assert_eq!(next.len(), c.len());
                prop_assert!(next.positions().iter().all(|&p| w.is_free(p)));
            }
        }

        #[test]
        fn maximal_is_idempotent((w, c) in arb_instance(ParticleKind::Large), m in any_move(), small in any::<bool>()) {
            let c = if small { c.with_kind(ParticleKind::Small) } else { c };
            let once = apply_maximal(&w, &c, m);
            prop_assert_eq!(apply_maximal(&w, &once, m), once);
        }

        #[test]
        fn move_table_matches_configuration_dynamics((w, c) in arb_instance(ParticleKind::Small), m in any_move()) {
            for mode in [MoveMode::Discrete, MoveMode::Maximal] {
                let table = MoveTable::new(&w, mode);
                let via_table: BTreeSet<Cell> = c
                    .positions()
                    .iter()
                    .map(|&p| w.free_cells()[table.apply(w.free_index(p).unwrap() as u32, m) as usize])
                    .collect();
                let moved = apply_move(&w, &c, m, mode);
                prop_assert_eq!(&via_table, moved.positions());
            }
        }

        #[test]
        fn lone_particle_on_open_grid_clamps(wd in 1u32..8, ht in 1u32..8, x in 0u32..8, y in 0u32..8, m in any_move()) {
            let w = Workspace::rectangle(wd, ht).unwrap();
            let p = Cell::new(x % wd, y % ht);
            let c = Configuration::new(&w, ParticleKind::Small, [p]).unwrap();
            let (dx, dy) = m.delta();
            let nx = (p.x as i64 + dx as i64).clamp(0, wd as i64 - 1) as u32;
            let ny = (p.y as i64 + dy as i64).clamp(0, ht as i64 - 1) as u32;
            prop_assert_eq!(apply_discrete(&w, &c, m).positions().iter().next().copied(), Some(Cell::new(nx, ny)));
        }
    }
}
