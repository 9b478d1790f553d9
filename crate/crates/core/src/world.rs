//! Bounded grid workspaces: the map file format, connectivity and
//! free-space distances.
//!
//! Coordinates have their origin at the top-left cell; `x` grows to the
//! right and `y` grows downward, so `u` decrements `y`. The grid edge acts
//! as a wall, which makes every workspace bounded by construction.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::dynamics::{Configuration, Move, ParticleKind};

/// Marker for "no free-cell index" / "unreachable" in dense tables.
pub(crate) const NONE: u32 = u32::MAX;

/// Largest free-cell count for which [`PairDistances`] stores a dense table.
/// 12k cells at two bytes per entry is roughly 288 MiB.
pub const MAX_TABLE_CELLS: usize = 12_000;

/// A grid cell. Ordering is row-major (`y` first, then `x`), which is the
/// "top left to bottom right" scan order used by the pair strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("map text is empty")]
    Empty,
    #[error("workspace dimensions must be nonzero, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("cell flag count {got} does not match {width}x{height}")]
    SizeMismatch { width: u32, height: u32, got: usize },
    #[error("row {row} has length {got}, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("illegal character {ch:?} at row {row}, column {col}")]
    IllegalChar { ch: char, row: usize, col: usize },
    #[error("workspace has no free cells")]
    NoFreeCells,
    #[error("cell {0} is outside the workspace")]
    OutOfBounds(Cell),
    #[error("particle at {0} is on an obstacle")]
    ParticleOnObstacle(Cell),
    #[error("target cell {0} is not free")]
    TargetOnObstacle(Cell),
    #[error("free space has {0} connected components")]
    Disconnected(usize),
}

/// An immutable bounded grid of free and obstacle cells, with an optional
/// sticky target region.
#[derive(Debug, Clone)]
pub struct Workspace {
    width: u32,
    height: u32,
    free: Vec<bool>,
    target: BTreeSet<Cell>,
    /// Per grid cell: dense index among free cells (row-major), or `NONE`.
    free_index: Vec<u32>,
    free_cells: Vec<Cell>,
    diameter: OnceLock<Result<u32, WorldError>>,
}

impl Workspace {
    /// Builds a workspace from row-major free flags.
    pub fn new(
        width: u32,
        height: u32,
        free: Vec<bool>,
        target: BTreeSet<Cell>,
    ) -> Result<Self, WorldError> {
        if width == 0 || height == 0 {
            return Err(WorldError::ZeroDimension { width, height });
        }
        if free.len() != width as usize * height as usize {
            return Err(WorldError::SizeMismatch {
                width,
                height,
                got: free.len(),
            });
        }
        let mut free_index = vec![NONE; free.len()];
        let mut free_cells = Vec::new();
        for (i, &is_free) in free.iter().enumerate() {
            if is_free {
                free_index[i] = free_cells.len() as u32;
                free_cells.push(Cell::new(i as u32 % width, i as u32 / width));
            }
        }
        if free_cells.is_empty() {
            return Err(WorldError::NoFreeCells);
        }
        let ws = Self {
            width,
            height,
            free,
            target,
            free_index,
            free_cells,
            diameter: OnceLock::new(),
        };
        for &t in &ws.target {
            if !ws.in_bounds(t) {
                return Err(WorldError::OutOfBounds(t));
            }
            if !ws.is_free(t) {
                return Err(WorldError::TargetOnObstacle(t));
            }
        }
        Ok(ws)
    }

    /// An obstacle-free `width` x `height` rectangle.
    pub fn rectangle(width: u32, height: u32) -> Result<Self, WorldError> {
        Self::new(
            width,
            height,
            vec![true; width as usize * height as usize],
            BTreeSet::new(),
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Height times width, the size measure in the command-count bounds.
    pub fn n(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn free_count(&self) -> usize {
        self.free_cells.len()
    }

    /// Free cells in row-major order; position `i` has free index `i`.
    pub fn free_cells(&self) -> &[Cell] {
        &self.free_cells
    }

    pub fn target(&self) -> &BTreeSet<Cell> {
        &self.target
    }

    /// A copy of this workspace with a different target region.
    pub fn with_target(&self, target: BTreeSet<Cell>) -> Result<Self, WorldError> {
        Self::new(self.width, self.height, self.free.clone(), target)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.free[self.linear(c)]
    }

    pub fn free_index(&self, c: Cell) -> Option<usize> {
        if !self.in_bounds(c) {
            return None;
        }
        match self.free_index[self.linear(c)] {
            NONE => None,
            i => Some(i as usize),
        }
    }

    fn linear(&self, c: Cell) -> usize {
        c.y as usize * self.width as usize + c.x as usize
    }

    /// The cell adjacent to `c` in direction `m`, if it is inside the grid.
    pub fn offset(&self, c: Cell, m: Move) -> Option<Cell> {
        let (dx, dy) = m.delta();
        let x = c.x as i64 + dx as i64;
        let y = c.y as i64 + dy as i64;
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            None
        } else {
            Some(Cell::new(x as u32, y as u32))
        }
    }

    /// The free cell adjacent to `c` in direction `m`, if any.
    pub fn free_neighbor(&self, c: Cell, m: Move) -> Option<Cell> {
        self.offset(c, m).filter(|&n| self.is_free(n))
    }

    /// Free-space diameter, computed on first use and cached.
    pub fn diameter(&self) -> Result<u32, WorldError> {
        self.diameter.get_or_init(|| compute_diameter(self)).clone()
    }

    /// Adjacency over free indices in u, d, r, l order (`NONE` where blocked).
    pub(crate) fn neighbor_table(&self) -> Vec<[u32; 4]> {
        self.free_cells
            .iter()
            .map(|&c| {
                let mut row = [NONE; 4];
                for (k, m) in Move::SEARCH_ORDER.iter().enumerate() {
                    if let Some(n) = self.free_neighbor(c, *m) {
                        row[k] = self.free_index[self.linear(n)];
                    }
                }
                row
            })
            .collect()
    }
}

/// Parses a map file. `'o'` cells become particles of the requested kind.
pub fn parse_world(text: &str, kind: ParticleKind) -> Result<(Workspace, Configuration), WorldError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Err(WorldError::Empty);
    }
    let rows: Vec<&str> = body.split('\n').collect();
    let width = rows[0].chars().count();
    let mut free = Vec::with_capacity(width * rows.len());
    let mut target = BTreeSet::new();
    let mut particles = Vec::new();
    for (y, row) in rows.iter().enumerate() {
        let len = row.chars().count();
        if len != width {
            return Err(WorldError::RaggedRow {
                row: y,
                expected: width,
                got: len,
            });
        }
        for (x, ch) in row.chars().enumerate() {
            let cell = Cell::new(x as u32, y as u32);
            let is_free = match ch {
                '#' => false,
                '.' => true,
                'o' => {
                    particles.push(cell);
                    true
                }
                'T' => {
                    target.insert(cell);
                    true
                }
                '+' => {
                    particles.push(cell);
                    target.insert(cell);
                    true
                }
                _ => return Err(WorldError::IllegalChar { ch, row: y, col: x }),
            };
            free.push(is_free);
        }
    }
    if width == 0 {
        return Err(WorldError::ZeroDimension {
            width: 0,
            height: rows.len() as u32,
        });
    }
    let ws = Workspace::new(width as u32, rows.len() as u32, free, target)?;
    let config = Configuration::new(&ws, kind, particles)?;
    Ok((ws, config))
}

/// Renders a workspace and configuration as canonical map text
/// (LF-terminated rows).
pub fn serialize_world(w: &Workspace, c: &Configuration) -> String {
    let mut out = String::with_capacity((w.width as usize + 1) * w.height as usize);
    for y in 0..w.height {
        for x in 0..w.width {
            let cell = Cell::new(x, y);
            let ch = if !w.is_free(cell) {
                '#'
            } else {
                match (c.contains(cell), w.target.contains(&cell)) {
                    (true, true) => '+',
                    (true, false) => 'o',
                    (false, true) => 'T',
                    (false, false) => '.',
                }
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

/// Component labelling of the free cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Per grid cell (row-major): component label, `None` for obstacles.
    pub labels: Vec<Option<u32>>,
}

impl Components {
    pub fn label(&self, w: &Workspace, c: Cell) -> Option<u32> {
        if w.in_bounds(c) {
            self.labels[w.linear(c)]
        } else {
            None
        }
    }
}

/// 4-neighbor flood fill over free cells.
pub fn connected_components(w: &Workspace) -> Components {
    let mut labels = vec![None; w.free.len()];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for &start in &w.free_cells {
        if labels[w.linear(start)].is_some() {
            continue;
        }
        labels[w.linear(start)] = Some(count);
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for m in Move::SEARCH_ORDER {
                if let Some(n) = w.free_neighbor(c, m) {
                    let slot = &mut labels[w.linear(n)];
                    if slot.is_none() {
                        *slot = Some(count);
                        queue.push_back(n);
                    }
                }
            }
        }
        count += 1;
    }
    Components {
        count: count as usize,
        labels,
    }
}

/// Fails with [`WorldError::Disconnected`] unless the free space is one
/// component.
pub fn ensure_connected(w: &Workspace) -> Result<(), WorldError> {
    match connected_components(w).count {
        1 => Ok(()),
        k => Err(WorldError::Disconnected(k)),
    }
}

/// BFS distances from one free cell to every free index (`u32::MAX` where
/// unreachable).
pub fn distances_from(w: &Workspace, source: Cell) -> Vec<u32> {
    let adj = w.neighbor_table();
    let src = w.free_index(source).expect("source must be a free cell");
    bfs_indices(&adj, &[src as u32])
}

pub(crate) fn bfs_indices(adj: &[[u32; 4]], sources: &[u32]) -> Vec<u32> {
    let mut dist = vec![NONE; adj.len()];
    let mut queue = VecDeque::with_capacity(adj.len());
    for &s in sources {
        if dist[s as usize] == NONE {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(i) = queue.pop_front() {
        let d = dist[i as usize] + 1;
        for &n in &adj[i as usize] {
            if n != NONE && dist[n as usize] == NONE {
                dist[n as usize] = d;
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Length of a shortest 4-neighbor path between two free cells, or `None`
/// when they lie in different components.
pub fn shortest_distance(w: &Workspace, a: Cell, b: Cell) -> Option<u32> {
    if a == b {
        return Some(0);
    }
    let mut seen = vec![false; w.free.len()];
    let mut queue = VecDeque::new();
    seen[w.linear(a)] = true;
    queue.push_back((a, 0u32));
    while let Some((c, d)) = queue.pop_front() {
        for m in Move::SEARCH_ORDER {
            if let Some(n) = w.free_neighbor(c, m) {
                if n == b {
                    return Some(d + 1);
                }
                let idx = w.linear(n);
                if !seen[idx] {
                    seen[idx] = true;
                    queue.push_back((n, d + 1));
                }
            }
        }
    }
    None
}

/// Maximum shortest-path distance over all pairs of free cells.
pub fn diameter(w: &Workspace) -> Result<u32, WorldError> {
    w.diameter()
}

fn compute_diameter(w: &Workspace) -> Result<u32, WorldError> {
    ensure_connected(w)?;
    let adj = w.neighbor_table();
    let mut best = 0;
    for s in 0..adj.len() as u32 {
        let dist = bfs_indices(&adj, &[s]);
        best = best.max(dist.into_iter().max().unwrap_or(0));
    }
    Ok(best)
}

/// All-pairs free-space distances between free indices. Dense when the world
/// is small enough, otherwise one BFS per query row.
#[derive(Debug, Clone)]
pub enum PairDistances {
    Table { cells: usize, dist: Vec<u16> },
    OnDemand { adj: Vec<[u32; 4]> },
}

impl PairDistances {
    pub fn new(w: &Workspace) -> Self {
        let adj = w.neighbor_table();
        let cells = adj.len();
        if cells > MAX_TABLE_CELLS {
            return PairDistances::OnDemand { adj };
        }
        let mut dist = Vec::with_capacity(cells * cells);
        for s in 0..cells as u32 {
            dist.extend(
                bfs_indices(&adj, &[s])
                    .into_iter()
                    .map(|d| if d == NONE { u16::MAX } else { d as u16 }),
            );
        }
        PairDistances::Table { cells, dist }
    }

    /// Distances from free index `from` to every free index; `u32::MAX`
    /// marks unreachable cells.
    pub fn row(&self, from: usize) -> Vec<u32> {
        match self {
            PairDistances::Table { cells, dist } => dist[from * cells..(from + 1) * cells]
                .iter()
                .map(|&d| if d == u16::MAX { NONE } else { d as u32 })
                .collect(),
            PairDistances::OnDemand { adj } => bfs_indices(adj, &[from as u32]),
        }
    }

    /// Runs `f(row)` with a borrowed or freshly computed distance row.
    pub(crate) fn with_row<R>(&self, from: usize, f: impl FnOnce(RowRef<'_>) -> R) -> R {
        match self {
            PairDistances::Table { cells, dist } => {
                f(RowRef::Dense(&dist[from * cells..(from + 1) * cells]))
            }
            PairDistances::OnDemand { adj } => f(RowRef::Owned(&bfs_indices(adj, &[from as u32]))),
        }
    }
}

pub(crate) enum RowRef<'a> {
    Dense(&'a [u16]),
    Owned(&'a [u32]),
}

impl RowRef<'_> {
    #[inline]
    pub(crate) fn get(&self, to: usize) -> u32 {
        match self {
            RowRef::Dense(r) => match r[to] {
                u16::MAX => NONE,
                d => d as u32,
            },
            RowRef::Owned(r) => r[to],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(text: &str) -> (Workspace, Configuration) {
        parse_world(text, ParticleKind::Small).unwrap()
    }

    fn grid(text: &str) -> Workspace {
        small(text).0
    }

    #[test]
    fn parse_minimal_map() {
        let (w, c) = small("..\n..");
        assert_eq!((w.width(), w.height()), (2, 2));
        assert_eq!(w.free_count(), 4);
        assert!(c.is_empty());
    }

    #[test]
    fn parse_obstacles_and_particles() {
        let (w, c) = small("o#\n.o");
        assert!(!w.is_free(Cell::new(1, 0)));
        let got: Vec<Cell> = c.positions().iter().copied().collect();
        assert_eq!(got, vec![Cell::new(0, 0), Cell::new(1, 1)]);
    }

    #[test]
    fn diagonal_cells_are_disconnected() {
        let (w, _) = small("o#\n#o");
        assert_eq!(connected_components(&w).count, 2);
        assert_eq!(ensure_connected(&w), Err(WorldError::Disconnected(2)));
        assert_eq!(w.diameter(), Err(WorldError::Disconnected(2)));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_world("", ParticleKind::Small).unwrap_err(), WorldError::Empty);
        assert!(matches!(
            parse_world("..\n.", ParticleKind::Small).unwrap_err(),
            WorldError::RaggedRow { row: 1, expected: 2, got: 1 }
        ));
        assert!(matches!(
            parse_world(".x", ParticleKind::Small).unwrap_err(),
            WorldError::IllegalChar { ch: 'x', row: 0, col: 1 }
        ));
        assert_eq!(
            parse_world("##\n##", ParticleKind::Small).unwrap_err(),
            WorldError::NoFreeCells
        );
    }

    #[test]
    fn particle_on_obstacle_is_rejected() {
        let w = Workspace::new(2, 1, vec![true, false], BTreeSet::new()).unwrap();
        let err = Configuration::new(&w, ParticleKind::Small, [Cell::new(1, 0)]).unwrap_err();
        assert_eq!(err, WorldError::ParticleOnObstacle(Cell::new(1, 0)));
    }

    #[test]
    fn targets_round_trip() {
        let text = "T.#\n+o.\n";
        let (w, c) = small(text);
        assert_eq!(w.target().len(), 2);
        assert_eq!(c.len(), 2);
        assert_eq!(serialize_world(&w, &c), text);
    }

    #[test]
    fn components() {
        assert_eq!(connected_components(&grid("...\n...\n...")).count, 1);
        assert_eq!(connected_components(&grid(".#.\n.#.\n.#.")).count, 2);
        assert_eq!(connected_components(&grid(".")).count, 1);
    }

    #[test]
    fn distances() {
        let w = grid("...\n...\n...");
        assert_eq!(shortest_distance(&w, Cell::new(0, 0), Cell::new(2, 2)), Some(4));
        assert_eq!(shortest_distance(&w, Cell::new(1, 1), Cell::new(1, 1)), Some(0));
        let ring = grid("...\n.#.\n...");
        assert_eq!(shortest_distance(&ring, Cell::new(0, 1), Cell::new(2, 1)), Some(4));
        let split = grid(".#.");
        assert_eq!(shortest_distance(&split, Cell::new(0, 0), Cell::new(2, 0)), None);
    }

    /// Enumerates every simple path between two cells; the shortest one is
    /// the reference distance.
    fn brute_force_distance(w: &Workspace, a: Cell, b: Cell) -> Option<u32> {
        fn walk(w: &Workspace, c: Cell, b: Cell, seen: &mut Vec<Cell>, best: &mut Option<u32>) {
            if c == b {
                let len = seen.len() as u32 - 1;
                *best = Some(best.map_or(len, |x| x.min(len)));
                return;
            }
            for m in Move::SEARCH_ORDER {
                if let Some(n) = w.free_neighbor(c, m) {
                    if !seen.contains(&n) {
                        seen.push(n);
                        walk(w, n, b, seen, best);
                        seen.pop();
                    }
                }
            }
        }
        let mut best = None;
        walk(w, a, b, &mut vec![a], &mut best);
        best
    }

    #[test]
    fn ring_distance_matches_path_enumeration() {
        let ring = grid("...\n.#.\n...");
        for &a in ring.free_cells() {
            for &b in ring.free_cells() {
                assert_eq!(shortest_distance(&ring, a, b), brute_force_distance(&ring, a, b));
            }
        }
    }

    #[test]
    fn diameters() {
        assert_eq!(grid("...\n...\n...").diameter(), Ok(4));
        assert_eq!(grid("......").diameter(), Ok(5));
        assert_eq!(grid(".\n.\n.\n.").diameter(), Ok(3));
        assert_eq!(grid("...\n.#.\n...").diameter(), Ok(4));
    }

    #[test]
    fn pair_distance_rows_match_bfs() {
        let w = grid("..#.\n....\n#...\n..#.");
        let pd = PairDistances::new(&w);
        for (i, &a) in w.free_cells().iter().enumerate() {
            let row = pd.row(i);
            for (j, &b) in w.free_cells().iter().enumerate() {
                assert_eq!(Some(row[j]), shortest_distance(&w, a, b));
            }
        }
    }

    fn arb_world(max: u32) -> impl Strategy<Value = Workspace> {
        (1..=max, 1..=max)
            .prop_flat_map(|(wd, ht)| {
                (Just(wd), Just(ht), prop::collection::vec(prop::bool::weighted(0.7), (wd * ht) as usize))
            })
            .prop_filter_map("needs a free cell", |(wd, ht, free)| {
                Workspace::new(wd, ht, free, BTreeSet::new()).ok()
            })
    }

    /// Independent union-find over edge-adjacent free cells.
    fn union_find_count(w: &Workspace) -> usize {
        let n = (w.width() * w.height()) as usize;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let idx = |x: u32, y: u32| (y * w.width() + x) as usize;
        for y in 0..w.height() {
            for x in 0..w.width() {
                if !w.is_free(Cell::new(x, y)) {
                    continue;
                }
                if x + 1 < w.width() && w.is_free(Cell::new(x + 1, y)) {
                    let (a, b) = (find(&mut parent, idx(x, y)), find(&mut parent, idx(x + 1, y)));
                    parent[a] = b;
                }
                if y + 1 < w.height() && w.is_free(Cell::new(x, y + 1)) {
                    let (a, b) = (find(&mut parent, idx(x, y)), find(&mut parent, idx(x, y + 1)));
                    parent[a] = b;
                }
            }
        }
        let mut roots: Vec<usize> = w
            .free_cells()
            .iter()
            .map(|c| find(&mut parent, idx(c.x, c.y)))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    proptest! {
        #[test]
        fn component_count_matches_union_find(w in arb_world(8)) {
            prop_assert_eq!(connected_components(&w).count, union_find_count(&w));
        }

        #[test]
        fn distance_is_a_metric(w in arb_world(6), picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
            let cells = w.free_cells();
            let [a, b, c] = [0, 1, 2].map(|k| cells[picks[k].index(cells.len())]);
            let ab = shortest_distance(&w, a, b);
            prop_assert_eq!(ab, shortest_distance(&w, b, a));
            prop_assert_eq!(ab == Some(0), a == b);
            if let (Some(ab), Some(bc), Some(ac)) =
                (ab, shortest_distance(&w, b, c), shortest_distance(&w, a, c))
            {
                prop_assert!(ac <= ab + bc);
            }
            if let Ok(d) = w.diameter() {
                prop_assert!(ab.unwrap() <= d);
            }
        }

        #[test]
        fn serialize_then_parse_is_identity(w in arb_world(7), bits in prop::collection::vec(any::<bool>(), 49)) {
            let particles: Vec<Cell> = w
                .free_cells()
                .iter()
                .zip(&bits)
                .filter(|(_, &b)| b)
                .map(|(c, _)| *c)
                .collect();
            let c = Configuration::new(&w, ParticleKind::Small, particles).unwrap();
            let text = serialize_world(&w, &c);
            let (w2, c2) = parse_world(&text, ParticleKind::Small).unwrap();
            prop_assert_eq!(serialize_world(&w2, &c2), text);
            prop_assert_eq!(c2, c);
        }
    }
}
