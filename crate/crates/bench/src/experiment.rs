//! Corpus runs: every algorithm on every world, one CSV row per run.
//!
//! CSV columns, in order: `world_id, free_cells, particles, algorithm,
//! strategy, mode, kind, move_count, nodes_expanded, wall_time_ms, status,
//! ratio_to_optimal`. The last column holds the run's move count divided by
//! the optimal move count for the same world, when both succeeded.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use gridswarm::parse_world;
use serde::Serialize;

use crate::report::{run_collect, Algorithm, RunOptions, RunReport, RunStatus};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub text: String,
}

/// All `*.map` files of `dir`, ordered by file name; the id is the stem.
pub fn load_corpus(dir: &Path) -> io::Result<Vec<CorpusEntry>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "map"));
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            Ok(CorpusEntry {
                id: p.file_stem().unwrap().to_string_lossy().into_owned(),
                text: fs::read_to_string(&p)?,
            })
        })
        .collect()
}

/// Runs every algorithm on every world, in corpus order. A world that fails
/// to parse yields one error row per algorithm.
pub fn run_experiment(corpus: &[CorpusEntry], algorithms: &[Algorithm], opts: &RunOptions) -> Vec<RunReport> {
    let mut reports = Vec::with_capacity(corpus.len() * algorithms.len());
    for entry in corpus {
        for &alg in algorithms {
            let report = match parse_world(&entry.text, alg.default_kind()) {
                Ok((w, c)) => run_collect(&entry.id, &w, &c, alg, opts),
                Err(e) => RunReport {
                    world_id: entry.id.clone(),
                    free_cells: 0,
                    particles: 0,
                    algorithm: alg.name().into(),
                    strategy: alg.strategy().map(|s| s.to_string()),
                    mode: opts.mode.to_string(),
                    kind: alg.default_kind().to_string(),
                    status: RunStatus::Error,
                    error: Some(e.to_string()),
                    commands: String::new(),
                    move_count: 0,
                    nodes_expanded: None,
                    distinct_position_trace: Vec::new(),
                    wall_time_ms: None,
                    seed: None,
                },
            };
            reports.push(report);
        }
    }
    reports
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    world_id: &'a str,
    free_cells: usize,
    particles: usize,
    algorithm: &'a str,
    strategy: Option<&'a str>,
    mode: &'a str,
    kind: &'a str,
    move_count: usize,
    nodes_expanded: Option<u64>,
    wall_time_ms: Option<f64>,
    status: &'a str,
    ratio_to_optimal: Option<f64>,
}

fn optimal_lengths(reports: &[RunReport]) -> BTreeMap<&str, usize> {
    reports
        .iter()
        .filter(|r| r.algorithm == "optimal" && r.status == RunStatus::Ok)
        .map(|r| (r.world_id.as_str(), r.move_count))
        .collect()
}

/// Move count over the optimal move count of the same world, for runs of
/// other algorithms where both succeeded.
pub fn ratio_to_optimal(report: &RunReport, optimal: &BTreeMap<&str, usize>) -> Option<f64> {
    if report.algorithm == "optimal" || report.status != RunStatus::Ok {
        return None;
    }
    match optimal.get(report.world_id.as_str()) {
        Some(&0) if report.move_count == 0 => Some(1.0),
        Some(&0) | None => None,
        Some(&opt) => Some(report.move_count as f64 / opt as f64),
    }
}

pub fn write_csv<W: Write>(reports: &[RunReport], out: W) -> csv::Result<()> {
    let optimal = optimal_lengths(reports);
    let mut wtr = csv::Writer::from_writer(out);
    if reports.is_empty() {
        wtr.write_record([
            "world_id",
            "free_cells",
            "particles",
            "algorithm",
            "strategy",
            "mode",
            "kind",
            "move_count",
            "nodes_expanded",
            "wall_time_ms",
            "status",
            "ratio_to_optimal",
        ])?;
    }
    for r in reports {
        wtr.serialize(CsvRow {
            world_id: &r.world_id,
            free_cells: r.free_cells,
            particles: r.particles,
            algorithm: &r.algorithm,
            strategy: r.strategy.as_deref(),
            mode: &r.mode,
            kind: &r.kind,
            move_count: r.move_count,
            nodes_expanded: r.nodes_expanded,
            wall_time_ms: r.wall_time_ms,
            status: r.status.as_str(),
            ratio_to_optimal: ratio_to_optimal(r, &optimal),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Mean ratio to optimal per algorithm label (e.g. `greedy:first`).
pub fn ratio_summary(reports: &[RunReport]) -> BTreeMap<String, (f64, usize)> {
    let optimal = optimal_lengths(reports);
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in reports {
        if let Some(ratio) = ratio_to_optimal(r, &optimal) {
            let label = match &r.strategy {
                Some(s) => format!("{}:{s}", r.algorithm),
                None => r.algorithm.clone(),
            };
            let e = acc.entry(label).or_default();
            e.0 += ratio;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (sum, n))| (k, (sum / n as f64, n))).collect()
}

/// File name used for a report's JSON file.
pub fn report_file_name(r: &RunReport) -> String {
    let mut name = format!("{}__{}", r.world_id, r.algorithm);
    if let Some(s) = &r.strategy {
        name.push('_');
        name.push_str(&s.replace(':', "-"));
    }
    name.push_str(".json");
    name
}

pub fn write_report_json(r: &RunReport, path: &Path) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(r).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

pub fn write_reports(reports: &[RunReport], dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for r in reports {
        write_report_json(r, &dir.join(report_file_name(r)))?;
    }
    Ok(())
}
