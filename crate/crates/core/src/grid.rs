use crate::error::CoreError;

/// Default edge length used throughout the toolkit.
pub const DEFAULT_GRID_SIZE: usize = 16;

/// A binary game state on a toroidal lattice, stored row-major.
///
/// Neighbor lookups wrap modulo the grid dimensions. Values are always 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl Grid {
    /// An all-zero grid. Dimensions below 3x3 are rejected because the 3x3
    /// kernel would overlap itself.
    pub fn new(width: usize, height: usize) -> Result<Self, CoreError> {
        if width < 3 || height < 3 {
            return Err(CoreError::GridTooSmall { width, height });
        }
        Ok(Self {
            width,
            height,
            cells: vec![0; width * height],
        })
    }

    /// The 16x16 all-zero grid.
    pub fn default_size() -> Self {
        Self::new(DEFAULT_GRID_SIZE, DEFAULT_GRID_SIZE).expect("16x16 is valid")
    }

    /// Builds a grid from row-major cells. Every value must be 0 or 1.
    pub fn from_cells(width: usize, height: usize, cells: Vec<u8>) -> Result<Self, CoreError> {
        if width < 3 || height < 3 {
            return Err(CoreError::GridTooSmall { width, height });
        }
        if cells.len() != width * height {
            return Err(CoreError::CellCountMismatch {
                expected: width * height,
                got: cells.len(),
            });
        }
        if let Some(&bad) = cells.iter().find(|&&v| v > 1) {
            return Err(CoreError::NonBinaryCell { value: bad });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major flattening of the cells.
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Result<u8, CoreError> {
        if row >= self.height || col >= self.width {
            return Err(CoreError::OutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.cells[row * self.width + col])
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) -> Result<(), CoreError> {
        if row >= self.height || col >= self.width {
            return Err(CoreError::OutOfBounds {
                row,
                col,
                width: self.width,
                height: self.height,
            });
        }
        if value > 1 {
            return Err(CoreError::NonBinaryCell { value });
        }
        self.cells[row * self.width + col] = value;
        Ok(())
    }

    #[inline]
    pub(crate) fn at(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    /// Number of live cells.
    pub fn live_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    /// Fraction of live cells in [0, 1].
    pub fn density(&self) -> f64 {
        self.live_count() as f64 / self.cells.len() as f64
    }

    /// Count of live cells among the 8 Moore neighbors, wrapping toroidally.
    #[inline]
    pub fn live_neighbors(&self, row: usize, col: usize) -> u8 {
        let up = if row == 0 { self.height - 1 } else { row - 1 };
        let down = if row + 1 == self.height { 0 } else { row + 1 };
        let left = if col == 0 { self.width - 1 } else { col - 1 };
        let right = if col + 1 == self.width { 0 } else { col + 1 };
        self.at(up, left)
            + self.at(up, col)
            + self.at(up, right)
            + self.at(row, left)
            + self.at(row, right)
            + self.at(down, left)
            + self.at(down, col)
            + self.at(down, right)
    }

    /// The grid translated by (`drow`, `dcol`) with toroidal wrapping.
    pub fn shifted(&self, drow: isize, dcol: isize) -> Grid {
        let h = self.height as isize;
        let w = self.width as isize;
        let mut out = vec![0u8; self.cells.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                let nr = ((r as isize + drow).rem_euclid(h)) as usize;
                let nc = ((c as isize + dcol).rem_euclid(w)) as usize;
                out[nr * self.width + nc] = self.at(r, c);
            }
        }
        Grid {
            width: self.width,
            height: self.height,
            cells: out,
        }
    }

    /// Textual form consumed by the data pipeline: `width*height`
    /// space-delimited `0`/`1` characters in row-major order.
    pub fn to_field_string(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() * 2);
        for (i, &c) in self.cells.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push(if c == 0 { '0' } else { '1' });
        }
        s
    }

    /// Inverse of [`Grid::to_field_string`] given already-split binary values.
    pub fn from_field_values(width: usize, height: usize, values: &[u8]) -> Result<Self, CoreError> {
        Self::from_cells(width, height, values.to_vec())
    }
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Grid {}x{}", self.width, self.height)?;
        for r in 0..self.height {
            for c in 0..self.width {
                write!(f, "{}", if self.at(r, c) == 1 { '#' } else { '.' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The paired (cell state, live-neighbor count) observation that indexes a
/// rules-matrix column. Indices run 1..=18: 1..=9 for a dead center cell,
/// 10..=18 for a live one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Metastate(u8);

/// Number of distinct metastates for a binary automaton with 8 neighbors.
pub const METASTATE_COUNT: usize = 18;

impl Metastate {
    pub fn new(index: u8) -> Result<Self, CoreError> {
        if (1..=METASTATE_COUNT as u8).contains(&index) {
            Ok(Self(index))
        } else {
            Err(CoreError::MetastateOutOfRange { index })
        }
    }

    /// index = 1 + 9 * center + live_neighbors
    pub fn from_parts(center: u8, live_neighbors: u8) -> Self {
        debug_assert!(center <= 1 && live_neighbors <= 8);
        Self(1 + 9 * center + live_neighbors)
    }

    /// 1-based index into the rules-matrix columns.
    pub fn index(self) -> u8 {
        self.0
    }

    /// 0-based column offset for array indexing.
    #[inline]
    pub fn column(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn center_state(self) -> u8 {
        u8::from(self.0 > 9)
    }

    pub fn live_neighbors(self) -> u8 {
        (self.0 - 1) % 9
    }
}

/// Metastate of the cell at (`row`, `col`), reading neighbors under toroidal
/// wrapping. Out-of-range indices are a bounds error.
pub fn metastate_of(grid: &Grid, row: usize, col: usize) -> Result<Metastate, CoreError> {
    let center = grid.get(row, col)?;
    Ok(Metastate::from_parts(center, grid.live_neighbors(row, col)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_grid_has_metastate_one_everywhere() {
        let g = Grid::default_size();
        for r in 0..16 {
            for c in 0..16 {
                assert_eq!(metastate_of(&g, r, c).unwrap().index(), 1);
            }
        }
    }

    #[test]
    fn all_one_grid_has_metastate_eighteen_everywhere() {
        let g = Grid::from_cells(16, 16, vec![1; 256]).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                assert_eq!(metastate_of(&g, r, c).unwrap().index(), 18);
            }
        }
    }

    #[test]
    fn dead_center_with_three_live_neighbors_is_metastate_four() {
        let mut g = Grid::default_size();
        g.set(4, 4, 1).unwrap();
        g.set(4, 6, 1).unwrap();
        g.set(6, 5, 1).unwrap();
        assert_eq!(metastate_of(&g, 5, 5).unwrap().index(), 4);
    }

    #[test]
    fn neighbor_count_wraps_toroidally() {
        let mut g = Grid::default_size();
        g.set(15, 15, 1).unwrap();
        g.set(15, 0, 1).unwrap();
        g.set(0, 15, 1).unwrap();
        // (0, 0) sees all three corner cells through the wrap.
        assert_eq!(g.live_neighbors(0, 0), 3);
        assert_eq!(metastate_of(&g, 0, 0).unwrap().index(), 4);
    }

    #[test]
    fn out_of_range_lookup_is_a_bounds_error() {
        let g = Grid::default_size();
        assert!(matches!(
            metastate_of(&g, 16, 0),
            Err(CoreError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn grids_below_3x3_are_rejected() {
        assert!(matches!(
            Grid::new(2, 16),
            Err(CoreError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn field_string_round_trips() {
        let mut g = Grid::default_size();
        g.set(0, 1, 1).unwrap();
        g.set(15, 15, 1).unwrap();
        let s = g.to_field_string();
        let values: Vec<u8> = s.split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(values.len(), 256);
        let back = Grid::from_field_values(16, 16, &values).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn non_binary_cells_are_rejected() {
        assert!(matches!(
            Grid::from_cells(16, 16, vec![2; 256]),
            Err(CoreError::NonBinaryCell { value: 2 })
        ));
    }
}
