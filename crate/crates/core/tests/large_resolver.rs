//! Large-particle steps against a resolver that visits particles in a random
//! order and keeps sweeping until nothing changes.

use std::collections::BTreeSet;

use gridswarm::{apply_discrete, apply_maximal, parse_world, Cell, Configuration, Move, ParticleKind, Workspace};
use proptest::prelude::*;

/// Moves a particle whenever its destination is free and currently empty,
/// each particle at most once, sweeping in the given order until stable.
fn reference_step(w: &Workspace, start: &BTreeSet<Cell>, m: Move, order: &[usize]) -> BTreeSet<Cell> {
    let (dx, dy) = m.delta();
    let mut cells: Vec<Cell> = start.iter().copied().collect();
    let mut moved = vec![false; cells.len()];
    loop {
        let mut changed = false;
        for &i in order {
            if moved[i] {
                continue;
            }
            let (x, y) = (cells[i].x as i64 + dx as i64, cells[i].y as i64 + dy as i64);
            if x < 0 || y < 0 || x >= w.width() as i64 || y >= w.height() as i64 {
                continue;
            }
            let dest = Cell::new(x as u32, y as u32);
            if w.is_free(dest) && !cells.contains(&dest) {
                cells[i] = dest;
                moved[i] = true;
                changed = true;
            }
        }
        if !changed {
            return cells.into_iter().collect();
        }
    }
}

fn arb_case() -> impl Strategy<Value = (String, Vec<u32>, Vec<Move>)> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(w, h)| {
        let cells = prop::collection::vec(prop::sample::select(vec!['.', '.', 'o', 'o', '#']), w * h);
        let text = cells.prop_map(move |cs| {
            cs.chunks(w).map(|r| r.iter().collect::<String>() + "\n").collect::<String>()
        });
        let keys = prop::collection::vec(any::<u32>(), w * h);
        let moves = prop::collection::vec(prop::sample::select(Move::SEARCH_ORDER.to_vec()), 1..8);
        (text, keys, moves)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn leading_edge_matches_randomized_resolver((text, keys, moves) in arb_case()) {
        let Ok((w, c)) = parse_world(&text, ParticleKind::Large) else { return Ok(()) };
        let mut cur = c.clone();
        for m in moves {
            let mut order: Vec<usize> = (0..cur.len()).collect();
            order.sort_by_key(|&i| (keys[i], i));
            let expected = reference_step(&w, cur.positions(), m, &order);
            let next = apply_discrete(&w, &cur, m);
            prop_assert_eq!(next.positions(), &expected);
            prop_assert_eq!(next.len(), c.len());
            prop_assert!(next.positions().iter().all(|&p| w.is_free(p)));
            cur = next;
        }
    }

    #[test]
    fn maximal_large_is_repeated_reference((text, keys, moves) in arb_case()) {
        let Ok((w, c)) = parse_world(&text, ParticleKind::Large) else { return Ok(()) };
        let order: Vec<usize> = {
            let mut o: Vec<usize> = (0..c.len()).collect();
            o.sort_by_key(|&i| (keys[i], i));
            o
        };
        let m = moves[0];
        let mut expected = c.positions().clone();
        loop {
            let next = reference_step(&w, &expected, m, &order);
            if next == expected {
                break;
            }
            expected = next;
        }
        let got = apply_maximal(&w, &c, m);
        prop_assert_eq!(got.positions(), &expected);
        prop_assert_eq!(apply_maximal(&w, &got, m), got);
    }
}

#[test]
fn trains_move_together() {
    let (w, c) = parse_world("ooo.\n", ParticleKind::Large).unwrap();
    let next = apply_discrete(&w, &c, Move::Right);
    let want: BTreeSet<Cell> = [1, 2, 3].into_iter().map(|x| Cell::new(x, 0)).collect();
    assert_eq!(next.positions(), &want);
    let blocked = apply_discrete(&w, &next, Move::Right);
    assert_eq!(blocked, next);
    let _: &Configuration = &blocked;
}
