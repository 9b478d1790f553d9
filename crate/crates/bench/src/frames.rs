//! Per-step SVG frames of a replayed run.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use gridswarm::{Cell, Configuration, Move, MoveMode, ParticleKind, Workspace};

const CELL: u32 = 16;
const OBSTACLE_FILL: &str = "#3b3b3b";
const FREE_FILL: &str = "#ffffff";
const TARGET_FILL: &str = "#f2c14e";
const PARTICLE_FILL: &str = "#1f6fb4";

/// Renders one configuration. Small particles are drawn as dots, large
/// ones as inset squares.
pub fn render_svg(w: &Workspace, c: &Configuration) -> String {
    let (pw, ph) = (w.width() * CELL, w.height() * CELL);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{pw}\" height=\"{ph}\" viewBox=\"0 0 {pw} {ph}\">\n"
    );
    for y in 0..w.height() {
        for x in 0..w.width() {
            let cell = Cell::new(x, y);
            let fill = if !w.is_free(cell) {
                OBSTACLE_FILL
            } else if w.target().contains(&cell) {
                TARGET_FILL
            } else {
                FREE_FILL
            };
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
                x * CELL,
                y * CELL
            ));
        }
    }
    for p in c.positions() {
        let (x, y) = (p.x * CELL, p.y * CELL);
        match c.kind() {
            ParticleKind::Small => out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{PARTICLE_FILL}\"/>\n",
                x + CELL / 2,
                y + CELL / 2,
                CELL * 3 / 10
            )),
            ParticleKind::Large => out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{PARTICLE_FILL}\"/>\n",
                x + 2,
                y + 2,
                CELL - 4,
                CELL - 4
            )),
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `frame_<k>.svg` for every state, zero-padded to a common width.
pub fn emit_state_frames(w: &Workspace, states: &[Configuration], dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let digits = (states.len().max(1) - 1).to_string().len().max(5);
    states
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let path = dir.join(format!("frame_{k:0digits$}.svg"));
            fs::write(&path, render_svg(w, c))?;
            Ok(path)
        })
        .collect()
}

/// Initial frame plus one frame per command.
pub fn emit_frames(
    w: &Workspace,
    c0: &Configuration,
    seq: &[Move],
    mode: MoveMode,
    dir: &Path,
) -> io::Result<Vec<PathBuf>> {
    let mut states = vec![c0.clone()];
    for &m in seq {
        let next = gridswarm::apply_move(w, states.last().unwrap(), m, mode);
        states.push(next);
    }
    emit_state_frames(w, &states, dir)
}

/// Active particles of a sticky run, initially and after every command.
pub fn sticky_states(w: &Workspace, c0: &Configuration, seq: &[Move]) -> Result<Vec<Configuration>, gridswarm::CollectError> {
    let mut s = gridswarm::StickyState::new(c0, w.target().clone())?;
    let mut states = vec![s.active().clone()];
    for &m in seq {
        s = gridswarm::sticky_step(w, &s, m);
        states.push(s.active().clone());
    }
    Ok(states)
}
