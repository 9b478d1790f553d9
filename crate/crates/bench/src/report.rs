//! Single collection runs and their self-validating reports.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use gridswarm::greedy::GreedyOptions;
use gridswarm::sticky::StickyState;
use gridswarm::{
    apply_move, greedy_collect, is_collected, optimal_collect, sticky_collect, sticky_step,
    CollectError, CommandSequence, Configuration, MoveMode, ParticleKind, SearchOptions,
    StickyOptions, Strategy, Workspace,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Optimal,
    Greedy(Strategy),
    Sticky,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Optimal => "optimal",
            Algorithm::Greedy(_) => "greedy",
            Algorithm::Sticky => "sticky",
        }
    }

    pub fn strategy(&self) -> Option<Strategy> {
        match self {
            Algorithm::Greedy(s) => Some(*s),
            _ => None,
        }
    }

    /// Particle interpretation each algorithm works with.
    pub fn default_kind(&self) -> ParticleKind {
        match self {
            Algorithm::Sticky => ParticleKind::Large,
            _ => ParticleKind::Small,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Greedy(s) => write!(f, "greedy:{s}"),
            a => f.write_str(a.name()),
        }
    }
}

/// `optimal`, `sticky`, `greedy` (connect-to-first) or `greedy:<strategy>`.
impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "optimal" => Ok(Algorithm::Optimal),
            "sticky" => Ok(Algorithm::Sticky),
            "greedy" => Ok(Algorithm::Greedy(Strategy::ConnectToFirst)),
            _ => match s.strip_prefix("greedy:") {
                Some(strategy) => strategy.parse().map(Algorithm::Greedy),
                None => Err(format!("unknown algorithm {s:?} (optimal, greedy[:strategy], sticky)")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub mode: MoveMode,
    pub node_budget: u64,
    pub bound_factor: f64,
    pub sticky_budget_factor: f64,
    /// Record wall-clock time in reports.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: MoveMode::Discrete,
            node_budget: gridswarm::optimal::DEFAULT_NODE_BUDGET,
            bound_factor: GreedyOptions::default().bound_factor,
            sticky_budget_factor: StickyOptions::default().budget_factor,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Infeasible,
    BudgetExceeded,
    Error,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Infeasible => "infeasible",
            RunStatus::BudgetExceeded => "budget_exceeded",
            RunStatus::Error => "error",
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::Infeasible => 2,
            RunStatus::BudgetExceeded => 3,
            RunStatus::Error => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub world_id: String,
    pub free_cells: usize,
    pub particles: usize,
    pub algorithm: String,
    pub strategy: Option<String>,
    pub mode: String,
    pub kind: String,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Command sequence in `urdl` text form.
    pub commands: String,
    pub move_count: usize,
    pub nodes_expanded: Option<u64>,
    /// Distinct occupied cells (small) or active particles (sticky),
    /// initially and after every command.
    pub distinct_position_trace: Vec<usize>,
    pub wall_time_ms: Option<f64>,
    pub seed: Option<u64>,
}

impl RunReport {
    fn blank(world_id: &str, w: &Workspace, c0: &Configuration, alg: Algorithm, mode: MoveMode) -> Self {
        Self {
            world_id: world_id.to_string(),
            free_cells: w.free_count(),
            particles: c0.len(),
            algorithm: alg.name().to_string(),
            strategy: alg.strategy().map(|s| s.to_string()),
            mode: mode.to_string(),
            kind: c0.kind().to_string(),
            status: RunStatus::Ok,
            error: None,
            commands: String::new(),
            move_count: 0,
            nodes_expanded: None,
            distinct_position_trace: Vec::new(),
            wall_time_ms: None,
            seed: match alg.strategy() {
                Some(Strategy::Random { seed }) => Some(seed),
                _ => None,
            },
        }
    }

    pub fn sequence(&self) -> CommandSequence {
        self.commands.parse().expect("reports hold urdl text")
    }

    /// Replays the commands from `c0` and checks the recorded outcome:
    /// successful runs must end collected (all absorbed for sticky) with the
    /// recorded trace.
    pub fn validate(&self, w: &Workspace, c0: &Configuration) -> Result<(), String> {
        if self.status != RunStatus::Ok {
            return Ok(());
        }
        let mode: MoveMode = self.mode.parse()?;
        let (done, trace) = replay(w, c0, &self.sequence(), mode, self.algorithm == "sticky")
            .map_err(|e| e.to_string())?;
        if !done {
            return Err("replayed sequence does not collect the swarm".into());
        }
        if trace != self.distinct_position_trace {
            return Err("replayed trace differs from the recorded one".into());
        }
        if self.move_count != self.commands.len() {
            return Err("move count differs from the command length".into());
        }
        Ok(())
    }
}

/// Replays a sequence and returns (finished, per-command count trace).
pub fn replay(
    w: &Workspace,
    c0: &Configuration,
    seq: &[gridswarm::Move],
    mode: MoveMode,
    sticky: bool,
) -> Result<(bool, Vec<usize>), CollectError> {
    if sticky {
        let mut s = StickyState::new(c0, w.target().clone())?;
        let mut trace = vec![s.active().len()];
        for &m in seq {
            s = sticky_step(w, &s, m);
            trace.push(s.active().len());
        }
        Ok((s.is_done(), trace))
    } else {
        let mut c = c0.clone();
        let mut trace = vec![c.len()];
        for &m in seq {
            c = apply_move(w, &c, m, mode);
            trace.push(c.len());
        }
        Ok((is_collected(&c), trace))
    }
}

/// Runs one algorithm and returns a validated report. Failures become
/// report statuses rather than errors.
pub fn run_collect(
    world_id: &str,
    w: &Workspace,
    c0: &Configuration,
    alg: Algorithm,
    opts: &RunOptions,
) -> RunReport {
    let mut report = RunReport::blank(world_id, w, c0, alg, opts.mode);
    let started = Instant::now();
    let result = match alg {
        Algorithm::Optimal => optimal_collect(
            w,
            c0,
            opts.mode,
            SearchOptions {
                node_budget: opts.node_budget,
            },
        )
        .map(|sol| (sol.sequence, Some(sol.stats.nodes_expanded))),
        Algorithm::Greedy(strategy) => {
            if opts.mode != MoveMode::Discrete {
                Err(CollectError::UnsupportedMode(opts.mode))
            } else {
                greedy_collect(
                    w,
                    c0,
                    strategy,
                    GreedyOptions {
                        bound_factor: opts.bound_factor,
                    },
                )
                .map(|out| (out.sequence, None))
            }
        }
        Algorithm::Sticky => {
            if opts.mode != MoveMode::Discrete {
                Err(CollectError::UnsupportedMode(opts.mode))
            } else {
                sticky_collect(
                    w,
                    c0,
                    w.target(),
                    StickyOptions {
                        budget_factor: opts.sticky_budget_factor,
                    },
                )
                .map(|out| (out.sequence, None))
            }
        }
    };
    if opts.timing {
        report.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    match result {
        Ok((seq, nodes)) => {
            report.commands = seq.to_string();
            report.move_count = seq.len();
            report.nodes_expanded = nodes;
            match replay(w, c0, &seq, opts.mode, alg == Algorithm::Sticky) {
                Ok((_, trace)) => report.distinct_position_trace = trace,
                Err(e) => fail(&mut report, RunStatus::Error, e.to_string()),
            }
            if let Err(e) = report.validate(w, c0) {
                fail(&mut report, RunStatus::Error, format!("self-check failed: {e}"));
            }
        }
        Err(e) => {
            let status = match e {
                CollectError::Infeasible { .. } => RunStatus::Infeasible,
                ref e if e.is_budget() => RunStatus::BudgetExceeded,
                _ => RunStatus::Error,
            };
            fail(&mut report, status, e.to_string());
        }
    }
    report
}

fn fail(report: &mut RunReport, status: RunStatus, msg: String) {
    report.status = status;
    report.error = Some(msg);
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridswarm::parse_world;

    #[test]
    fn algorithm_tokens() {
        for s in ["optimal", "sticky", "greedy:closest", "greedy:random:5", "greedy:firstlast"] {
            assert_eq!(s.parse::<Algorithm>().unwrap().to_string(), s);
        }
        assert_eq!("greedy".parse::<Algorithm>().unwrap(), Algorithm::Greedy(Strategy::ConnectToFirst));
        assert!("bogus".parse::<Algorithm>().is_err());
    }

    #[test]
    fn reports_validate_and_round_trip() {
        let (w, c) = parse_world("o..\n.#.\n..o\n", ParticleKind::Small).unwrap();
        for alg in [Algorithm::Optimal, Algorithm::Greedy(Strategy::Random { seed: 4 })] {
            let r = run_collect("w", &w, &c, alg, &RunOptions::default());
            assert_eq!(r.status, RunStatus::Ok, "{:?}", r.error);
            r.validate(&w, &c).unwrap();
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(serde_json::from_str::<RunReport>(&json).unwrap(), r);
        }
        let (w, c) = parse_world("T.o\n.o.\n", ParticleKind::Large).unwrap();
        let r = run_collect("s", &w, &c, Algorithm::Sticky, &RunOptions::default());
        assert_eq!(r.status, RunStatus::Ok, "{:?}", r.error);
        assert_eq!(*r.distinct_position_trace.last().unwrap(), 0);
    }

    #[test]
    fn tampered_report_fails_validation() {
        let (w, c) = parse_world("o.o\n", ParticleKind::Small).unwrap();
        let mut r = run_collect("w", &w, &c, Algorithm::Optimal, &RunOptions::default());
        r.commands = "u".into();
        r.move_count = 1;
        assert!(r.validate(&w, &c).is_err());
    }

    #[test]
    fn statuses() {
        let (w, c) = parse_world("#o#\n...\n#o#\n", ParticleKind::Small).unwrap();
        let opts = RunOptions {
            mode: MoveMode::Maximal,
            ..RunOptions::default()
        };
        let r = run_collect("plus", &w, &c, Algorithm::Optimal, &opts);
        assert!(matches!(r.status, RunStatus::Ok | RunStatus::Infeasible));
        let r = run_collect("plus", &w, &c, Algorithm::Greedy(Strategy::ClosestPair), &opts);
        assert_eq!(r.status, RunStatus::Error);

        let (w, c) = parse_world("o...\n...o\n", ParticleKind::Small).unwrap();
        let tight = RunOptions {
            node_budget: 2,
            ..RunOptions::default()
        };
        let r = run_collect("b", &w, &c, Algorithm::Optimal, &tight);
        assert_eq!((r.status, r.status.exit_code()), (RunStatus::BudgetExceeded, 3));
    }
}
