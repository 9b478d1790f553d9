//! Procedural world generators.
//!
//! Every generator carves free cells one at a time, each new cell adjacent
//! to one already carved, and stops at the exact free-cell budget. The
//! result is therefore always connected. Randomness comes from a seeded
//! ChaCha8 stream, so a spec and seed reproduce the same map on any machine.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use gridswarm::{Cell, Configuration, ParticleKind, Workspace, WorldError};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Rectangle,
    RandomPolyomino,
    VascularTree,
}

/// Which free cells start with a particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    EveryFreeCell,
    Random(usize),
    Nothing,
}

/// Branching parameters of the vascular generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VascularParams {
    /// Corridor width of the trunk.
    pub trunk_width: u32,
    /// Length of the trunk before its first split.
    pub trunk_length: u32,
    /// Child segment length relative to the parent.
    pub length_decay: f64,
    /// Probability that a split also continues straight ahead.
    pub straight_prob: f64,
}

impl Default for VascularParams {
    fn default() -> Self {
        Self {
            trunk_width: 3,
            trunk_length: 24,
            length_decay: 0.75,
            straight_prob: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub width: u32,
    pub height: u32,
    pub free_cells: usize,
    pub particles: Placement,
    /// Size of a contiguous target region (0 for none).
    pub target_cells: usize,
    pub vascular: VascularParams,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn rectangle(width: u32, height: u32) -> Self {
        Self {
            kind: GeneratorKind::Rectangle,
            width,
            height,
            free_cells: (width * height) as usize,
            particles: Placement::EveryFreeCell,
            target_cells: 0,
            vascular: VascularParams::default(),
            seed: 0,
        }
    }

    pub fn polyomino(width: u32, height: u32, free_cells: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::RandomPolyomino,
            free_cells,
            seed,
            ..Self::rectangle(width, height)
        }
    }

    /// A vascular tree of `free_cells` cells on a square grid about three
    /// times that area.
    pub fn vascular(free_cells: usize, seed: u64) -> Self {
        let side = ((free_cells as f64 * 3.0).sqrt().ceil() as u32).max(8);
        Self {
            kind: GeneratorKind::VascularTree,
            free_cells,
            seed,
            ..Self::rectangle(side, side)
        }
    }

    pub fn with_particles(mut self, particles: Placement) -> Self {
        self.particles = particles;
        self
    }

    pub fn with_targets(mut self, target_cells: usize) -> Self {
        self.target_cells = target_cells;
        self
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("free-cell budget {budget} does not fit a {width}x{height} grid")]
    ImpossibleBudget { budget: usize, width: u32, height: u32 },
    #[error("a rectangle has exactly {expected} free cells, budget was {budget}")]
    RectangleBudget { expected: usize, budget: usize },
    #[error("cannot place {wanted} {what} on {available} free cells")]
    TooMany {
        what: &'static str,
        wanted: usize,
        available: usize,
    },
    #[error("bad generator spec {0:?}; expected rectangle:WxH, polyomino:WxH:N or vascular:WxH:N")]
    BadSpec(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Rectangle => write!(f, "rectangle:{}x{}", self.width, self.height),
            GeneratorKind::RandomPolyomino => {
                write!(f, "polyomino:{}x{}:{}", self.width, self.height, self.free_cells)
            }
            GeneratorKind::VascularTree => {
                write!(f, "vascular:{}x{}:{}", self.width, self.height, self.free_cells)
            }
        }
    }
}

/// Parses `rectangle:WxH`, `polyomino:WxH:N` or `vascular:WxH:N`. Particle
/// placement, targets and seed keep their defaults.
impl FromStr for GeneratorSpec {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenerateError::BadSpec(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let dims = |d: &str| -> Option<(u32, u32)> {
            let (w, h) = d.split_once('x')?;
            Some((w.parse().ok()?, h.parse().ok()?))
        };
        match parts.as_slice() {
            ["rectangle", d] => {
                let (w, h) = dims(d).ok_or_else(bad)?;
                Ok(Self::rectangle(w, h))
            }
            [kind @ ("polyomino" | "vascular"), d, n] => {
                let (w, h) = dims(d).ok_or_else(bad)?;
                let n: usize = n.parse().map_err(|_| bad())?;
                let mut spec = Self::polyomino(w, h, n, 0);
                if *kind == "vascular" {
                    spec.kind = GeneratorKind::VascularTree;
                }
                Ok(spec)
            }
            _ => Err(bad()),
        }
    }
}

/// A generated workspace plus its particle cells (the caller picks the
/// particle kind).
#[derive(Debug, Clone)]
pub struct GeneratedWorld {
    pub workspace: Workspace,
    pub particles: BTreeSet<Cell>,
}

impl GeneratedWorld {
    pub fn configuration(&self, kind: ParticleKind) -> Configuration {
        Configuration::new(&self.workspace, kind, self.particles.iter().copied())
            .expect("generated particles sit on free cells")
    }

    pub fn to_map(&self) -> String {
        gridswarm::serialize_world(&self.workspace, &self.configuration(ParticleKind::Small))
    }
}

struct Carver {
    width: u32,
    height: u32,
    free: Vec<bool>,
    count: usize,
    budget: usize,
}

impl Carver {
    fn new(width: u32, height: u32, budget: usize) -> Self {
        Self {
            width,
            height,
            free: vec![false; (width * height) as usize],
            count: 0,
            budget,
        }
    }

    fn idx(&self, x: i64, y: i64) -> Option<usize> {
        (x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64)
            .then(|| (y * self.width as i64 + x) as usize)
    }

    fn is_free(&self, x: i64, y: i64) -> bool {
        self.idx(x, y).is_some_and(|i| self.free[i])
    }

    fn full(&self) -> bool {
        self.count >= self.budget
    }

    /// Carves `(x, y)` if it is inside the grid and the budget allows.
    /// Callers guarantee adjacency to an already carved cell (or that this
    /// is the first cell).
    fn carve(&mut self, x: i64, y: i64) -> bool {
        match self.idx(x, y) {
            Some(i) if !self.free[i] && !self.full() => {
                self.free[i] = true;
                self.count += 1;
                true
            }
            _ => false,
        }
    }
}

const DIRS: [(i64, i64); 4] = [(0, -1), (0, 1), (1, 0), (-1, 0)];

fn random_polyomino(c: &mut Carver, rng: &mut ChaCha8Rng) {
    let (sx, sy) = (c.width as i64 / 2, c.height as i64 / 2);
    c.carve(sx, sy);
    let mut frontier: Vec<(i64, i64)> = Vec::new();
    let mut listed = vec![false; c.free.len()];
    listed[c.idx(sx, sy).unwrap()] = true;
    let push_neighbors = |c: &Carver, x: i64, y: i64, frontier: &mut Vec<(i64, i64)>, listed: &mut Vec<bool>| {
        for (dx, dy) in DIRS {
            if let Some(i) = c.idx(x + dx, y + dy) {
                if !listed[i] {
                    listed[i] = true;
                    frontier.push((x + dx, y + dy));
                }
            }
        }
    };
    push_neighbors(c, sx, sy, &mut frontier, &mut listed);
    while !c.full() && !frontier.is_empty() {
        let k = rng.gen_range(0..frontier.len());
        let (x, y) = frontier.swap_remove(k);
        c.carve(x, y);
        push_neighbors(c, x, y, &mut frontier, &mut listed);
    }
}

struct Tip {
    x: i64,
    y: i64,
    dir: usize,
    width: u32,
    remaining: u32,
    length: u32,
}

/// Advances `tip` one cell, carving its cross-section outward from the
/// center so every carved cell touches the previous one. Returns false if
/// the tip is blocked.
fn advance(c: &mut Carver, tip: &mut Tip) -> bool {
    let (dx, dy) = DIRS[tip.dir];
    let (nx, ny) = (tip.x + dx, tip.y + dy);
    if c.idx(nx, ny).is_none() || c.is_free(nx, ny) {
        return false;
    }
    c.carve(nx, ny);
    let (px, py) = (dy.abs(), dx.abs());
    let half = tip.width as i64 / 2;
    for side in [1i64, -1] {
        for k in 1..=half {
            let (x, y) = (nx + side * k * px, ny + side * k * py);
            if !c.is_free(x, y) && !c.carve(x, y) {
                break;
            }
        }
    }
    tip.x = nx;
    tip.y = ny;
    tip.remaining = tip.remaining.saturating_sub(1);
    true
}

fn vascular_tree(c: &mut Carver, p: VascularParams, rng: &mut ChaCha8Rng) {
    let root = (c.width as i64 / 2, c.height as i64 - 1);
    c.carve(root.0, root.1);
    let mut tips = vec![Tip {
        x: root.0,
        y: root.1,
        dir: 0,
        width: p.trunk_width.max(1),
        remaining: p.trunk_length,
        length: p.trunk_length,
    }];
    while !c.full() {
        if tips.is_empty() {
            // Sprout a thin vessel from a random carved cell with room to grow.
            let mut candidates: Vec<(i64, i64, usize)> = Vec::new();
            for y in 0..c.height as i64 {
                for x in 0..c.width as i64 {
                    if !c.is_free(x, y) {
                        continue;
                    }
                    for (d, (dx, dy)) in DIRS.iter().enumerate() {
                        if c.idx(x + dx, y + dy).is_some() && !c.is_free(x + dx, y + dy) {
                            candidates.push((x, y, d));
                        }
                    }
                }
            }
            let Some(&(x, y, dir)) = candidates.choose(rng) else {
                return;
            };
            let length = rng.gen_range(3..=p.trunk_length.max(4));
            tips.push(Tip { x, y, dir, width: 1, remaining: length, length });
        }
        let mut next = Vec::new();
        for mut tip in tips.drain(..) {
            if c.full() {
                break;
            }
            if !advance(c, &mut tip) {
                continue;
            }
            if tip.remaining > 0 {
                next.push(tip);
                continue;
            }
            let length = ((tip.length as f64 * p.length_decay).round() as u32).max(3);
            let width = tip.width.saturating_sub(1).max(1);
            let turns = if tip.dir < 2 { [2, 3] } else { [0, 1] };
            let mut children: Vec<usize> = turns.to_vec();
            if rng.gen_bool(p.straight_prob) {
                children.push(tip.dir);
            }
            for dir in children {
                let jitter = rng.gen_range(0..=length / 2);
                next.push(Tip {
                    x: tip.x,
                    y: tip.y,
                    dir,
                    width,
                    remaining: length - length / 4 + jitter,
                    length,
                });
            }
        }
        tips = next;
    }
}

fn pick_targets(c: &Carver, n: usize, rng: &mut ChaCha8Rng) -> Result<BTreeSet<Cell>, GenerateError> {
    if n > c.count {
        return Err(GenerateError::TooMany {
            what: "target cells",
            wanted: n,
            available: c.count,
        });
    }
    let mut targets = BTreeSet::new();
    if n == 0 {
        return Ok(targets);
    }
    let free: Vec<usize> = (0..c.free.len()).filter(|&i| c.free[i]).collect();
    let start = free[rng.gen_range(0..free.len())];
    let w = c.width as i64;
    let mut region = vec![(start as i64 % w, start as i64 / w)];
    while region.len() < n {
        let mut options: Vec<(i64, i64)> = Vec::new();
        for &(x, y) in &region {
            for (dx, dy) in DIRS {
                let q = (x + dx, y + dy);
                if c.is_free(q.0, q.1) && !region.contains(&q) && !options.contains(&q) {
                    options.push(q);
                }
            }
        }
        options.sort_by_key(|&(x, y)| (y, x));
        match options.choose(rng) {
            Some(&q) => region.push(q),
            None => break,
        }
    }
    targets.extend(region.into_iter().map(|(x, y)| Cell::new(x as u32, y as u32)));
    Ok(targets)
}

/// Builds a connected world with exactly `spec.free_cells` free cells.
pub fn generate_world(spec: &GeneratorSpec) -> Result<GeneratedWorld, GenerateError> {
    let area = spec.width as usize * spec.height as usize;
    if spec.free_cells == 0 || spec.free_cells > area {
        return Err(GenerateError::ImpossibleBudget {
            budget: spec.free_cells,
            width: spec.width,
            height: spec.height,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut carver = Carver::new(spec.width, spec.height, spec.free_cells);
    match spec.kind {
        GeneratorKind::Rectangle => {
            if spec.free_cells != area {
                return Err(GenerateError::RectangleBudget {
                    expected: area,
                    budget: spec.free_cells,
                });
            }
            carver.free.fill(true);
            carver.count = area;
        }
        GeneratorKind::RandomPolyomino => random_polyomino(&mut carver, &mut rng),
        GeneratorKind::VascularTree => vascular_tree(&mut carver, spec.vascular, &mut rng),
    }
    if carver.count != spec.free_cells {
        return Err(GenerateError::ImpossibleBudget {
            budget: spec.free_cells,
            width: spec.width,
            height: spec.height,
        });
    }
    let target = pick_targets(&carver, spec.target_cells, &mut rng)?;
    let workspace = Workspace::new(spec.width, spec.height, carver.free, target)?;
    let cells = workspace.free_cells();
    let particles: BTreeSet<Cell> = match spec.particles {
        Placement::EveryFreeCell => cells.iter().copied().collect(),
        Placement::Nothing => BTreeSet::new(),
        Placement::Random(k) => {
            if k > cells.len() {
                return Err(GenerateError::TooMany {
                    what: "particles",
                    wanted: k,
                    available: cells.len(),
                });
            }
            cells.choose_multiple(&mut rng, k).copied().collect()
        }
    };
    Ok(GeneratedWorld {
        workspace,
        particles,
    })
}
