//! Fixtures shared by the criterion benches.

use linepuzzle_core::puzzle::{cut_square, generate_lines, scramble, Puzzle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scrambled `side × side` square puzzle with line density held per piece.
pub fn square_puzzle(side: u32, lines_per_piece: usize, seed: u64) -> Puzzle {
    let extent = 100.0 * f64::from(side);
    let n = lines_per_piece * (side * side) as usize;
    let ls = generate_lines(extent, extent, n, 1, seed).expect("valid canvas");
    scramble(&cut_square(&ls, side, side).expect("square cells"), seed)
}

pub fn cost_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0.0..100.0)).collect()).collect()
}
