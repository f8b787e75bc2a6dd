//! Synchronous one-step evolution of a grid under a rules matrix.
//!
//! All functions are pure: inputs are never mutated and outputs are freshly
//! allocated, so the synchronous-update semantics cannot be violated.

use crate::grid::{Grid, Metastate};
use crate::rules::RulesMatrix;

/// Evolves the grid by one timestep: every output cell is the next state the
/// rule assigns to that cell's metastate, read from the pre-step grid.
///
/// The `RulesMatrix` type guarantees one-hot columns, so rule validity is
/// established at construction time rather than here.
pub fn step(grid: &Grid, rm: &RulesMatrix) -> Grid {
    let width = grid.width();
    let height = grid.height();
    let mut out = Grid::new(width, height).expect("input grid dimensions are valid");
    for row in 0..height {
        for col in 0..width {
            let meta = Metastate::from_parts(grid.at(row, col), grid.live_neighbors(row, col));
            out.set(row, col, rm.next_state(meta))
                .expect("indices are in range and rule output is binary");
        }
    }
    out
}

/// The orbit `[grid, step(grid), step^2(grid), ..., step^n(grid)]` of length
/// `n + 1`.
pub fn orbit(grid: &Grid, rm: &RulesMatrix, n: usize) -> Vec<Grid> {
    let mut states = Vec::with_capacity(n + 1);
    states.push(grid.clone());
    for _ in 0..n {
        let next = step(states.last().expect("orbit is never empty"), rm);
        states.push(next);
    }
    states
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::METASTATE_COUNT;

    fn quiescent_rule() -> RulesMatrix {
        RulesMatrix::from_next_states([0; METASTATE_COUNT]).unwrap()
    }

    #[test]
    fn quiescent_rule_fixes_the_zero_grid() {
        let g = Grid::default_size();
        assert_eq!(step(&g, &quiescent_rule()), g);
    }

    #[test]
    fn exploding_column_one_fills_the_grid() {
        let mut next_states = [0u8; METASTATE_COUNT];
        next_states[0] = 1; // metastate 1 -> 1
        let rm = RulesMatrix::from_next_states(next_states).unwrap();
        let g = Grid::default_size();
        let out = step(&g, &rm);
        assert!(out.cells().iter().all(|&c| c == 1));
    }

    #[test]
    fn step_leaves_input_unchanged_and_is_deterministic() {
        let mut g = Grid::default_size();
        g.set(3, 3, 1).unwrap();
        g.set(3, 4, 1).unwrap();
        let snapshot = g.clone();
        let rm = RulesMatrix::game_of_life();
        let a = step(&g, &rm);
        let b = step(&g, &rm);
        assert_eq!(g, snapshot);
        assert_eq!(a, b);
    }

    #[test]
    fn life_blinker_turns_horizontal() {
        // Vertical blinker centered at (8, 8).
        let mut g = Grid::default_size();
        g.set(7, 8, 1).unwrap();
        g.set(8, 8, 1).unwrap();
        g.set(9, 8, 1).unwrap();

        let mut expected = Grid::default_size();
        expected.set(8, 7, 1).unwrap();
        expected.set(8, 8, 1).unwrap();
        expected.set(8, 9, 1).unwrap();

        assert_eq!(step(&g, &RulesMatrix::game_of_life()), expected);
    }

    #[test]
    fn orbit_includes_the_initial_state() {
        let g = Grid::default_size();
        let rm = quiescent_rule();
        assert_eq!(orbit(&g, &rm, 0), vec![g.clone()]);
        let states = orbit(&g, &rm, 5);
        assert_eq!(states.len(), 6);
        assert!(states.iter().all(|s| *s == g));
    }

    #[test]
    fn life_blinker_has_period_two() {
        let mut g = Grid::default_size();
        g.set(7, 8, 1).unwrap();
        g.set(8, 8, 1).unwrap();
        g.set(9, 8, 1).unwrap();
        let states = orbit(&g, &RulesMatrix::game_of_life(), 2);
        assert_ne!(states[1], states[0]);
        assert_eq!(states[2], states[0]);
    }
}
