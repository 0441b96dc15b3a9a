use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Handcrafted tilings of a `cols × rows` cell lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// Running bond of 2×1 bricks, odd rows shifted by one cell.
    Brick,
    /// 3×2 blocks split into L-trominoes, every third block into straight trominoes.
    Ltromino,
    /// Greedy packing of rectangles cycling through several sizes.
    Mixed,
}

impl PatternKind {
    pub fn name(self) -> &'static str {
        match self {
            PatternKind::Brick => "brick",
            PatternKind::Ltromino => "ltromino",
            PatternKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brick" => Ok(PatternKind::Brick),
            "ltromino" => Ok(PatternKind::Ltromino),
            "mixed" => Ok(PatternKind::Mixed),
            other => Err(Error::Config(format!(
                "unknown pattern '{other}' (expected brick, ltromino or mixed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolygonPattern {
    pub kind: PatternKind,
    pub rows: u32,
    pub cols: u32,
}

impl PolygonPattern {
    pub fn new(kind: PatternKind, rows: u32, cols: u32) -> Result<Self> {
        let p = PolygonPattern { kind, rows, cols };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let ok = match self.kind {
            PatternKind::Brick => self.rows >= 1 && self.cols >= 2,
            PatternKind::Ltromino => self.rows >= 2 && self.rows % 2 == 0 && self.cols >= 3 && self.cols % 3 == 0,
            PatternKind::Mixed => self.rows >= 2 && self.cols >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Puzzle(format!(
                "pattern {} does not fit a {}x{} cell grid",
                self.kind, self.cols, self.rows
            )))
        }
    }

    /// Cell sets of every piece, `(col, row)` with row 0 at the bottom. The sets
    /// partition the lattice.
    pub fn partition(&self) -> Result<Vec<Vec<(i32, i32)>>> {
        self.check()?;
        let (w, h) = (self.cols as i32, self.rows as i32);
        let mut pieces = Vec::new();
        match self.kind {
            PatternKind::Brick => {
                for y in 0..h {
                    let mut x = 0;
                    if y % 2 == 1 {
                        pieces.push(vec![(0, y)]);
                        x = 1;
                    }
                    while x < w {
                        if x + 1 < w {
                            pieces.push(vec![(x, y), (x + 1, y)]);
                            x += 2;
                        } else {
                            pieces.push(vec![(x, y)]);
                            x += 1;
                        }
                    }
                }
            }
            PatternKind::Ltromino => {
                let mut block = 0;
                for by in (0..h).step_by(2) {
                    for bx in (0..w).step_by(3) {
                        let shift = |cells: &[(i32, i32)]| -> Vec<(i32, i32)> {
                            cells.iter().map(|&(x, y)| (x + bx, y + by)).collect()
                        };
                        let (a, b): (&[(i32, i32)], &[(i32, i32)]) = match block % 3 {
                            0 => (&[(0, 0), (1, 0), (0, 1)], &[(2, 0), (1, 1), (2, 1)]),
                            1 => (&[(0, 0), (0, 1), (1, 1)], &[(1, 0), (2, 0), (2, 1)]),
                            _ => (&[(0, 0), (1, 0), (2, 0)], &[(0, 1), (1, 1), (2, 1)]),
                        };
                        pieces.push(shift(a));
                        pieces.push(shift(b));
                        block += 1;
                    }
                }
            }
            PatternKind::Mixed => {
                const SIZES: [(i32, i32); 5] = [(2, 1), (1, 2), (2, 2), (1, 1), (3, 1)];
                let mut taken = vec![false; (w * h) as usize];
                let mut k = 0;
                for y in 0..h {
                    for x in 0..w {
                        if taken[(y * w + x) as usize] {
                            continue;
                        }
                        let fits = |(sw, sh): (i32, i32)| {
                            x + sw <= w
                                && y + sh <= h
                                && (0..sh).all(|dy| (0..sw).all(|dx| !taken[((y + dy) * w + x + dx) as usize]))
                        };
                        let size = (0..SIZES.len())
                            .map(|i| SIZES[(k + i) % SIZES.len()])
                            .find(|&s| fits(s))
                            .unwrap_or((1, 1));
                        k += 1;
                        let mut cells = Vec::new();
                        for dy in 0..size.1 {
                            for dx in 0..size.0 {
                                taken[((y + dy) * w + x + dx) as usize] = true;
                                cells.push((x + dx, y + dy));
                            }
                        }
                        pieces.push(cells);
                    }
                }
            }
        }
        Ok(pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn assert_partition(p: &PolygonPattern) {
        let parts = p.partition().unwrap();
        let mut seen = HashSet::new();
        for cells in &parts {
            for c in cells {
                assert!(seen.insert(*c), "cell {c:?} covered twice");
            }
        }
        assert_eq!(seen.len() as u32, p.rows * p.cols);
    }

    #[test]
    fn all_patterns_partition() {
        for kind in [PatternKind::Brick, PatternKind::Ltromino, PatternKind::Mixed] {
            assert_partition(&PolygonPattern::new(kind, 6, 6).unwrap());
        }
        assert_partition(&PolygonPattern::new(PatternKind::Mixed, 4, 5).unwrap());
        assert_partition(&PolygonPattern::new(PatternKind::Brick, 3, 5).unwrap());
    }

    #[test]
    fn brick_rows() {
        let parts = PolygonPattern::new(PatternKind::Brick, 6, 6).unwrap().partition().unwrap();
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        // Even rows: three bricks. Odd rows: cap, two bricks, cap.
        assert_eq!(sizes.iter().filter(|&&s| s == 2).count(), 3 * 3 + 2 * 3);
        assert_eq!(sizes.iter().filter(|&&s| s == 1).count(), 2 * 3);
    }

    #[test]
    fn ltromino_needs_compatible_grid() {
        assert!(PolygonPattern::new(PatternKind::Ltromino, 5, 6).is_err());
        assert!(PolygonPattern::new(PatternKind::Ltromino, 6, 4).is_err());
        assert!("hexagon".parse::<PatternKind>().is_err());
    }
}
