//! Finite zero-sum games solved exactly by linear programming.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::Rational;
use crate::simplex::{maximize, LinearProgram};

/// Optimal strategies of a loss matrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    /// Minimizing row player's mixed strategy.
    pub rows: Vec<Rational>,
    /// Maximizing column player's mixed strategy.
    pub columns: Vec<Rational>,
    pub value: Rational,
}

/// Solves `min_p max_q p^T L q` for the row player paying `loss[r][c]`.
pub fn solve_matrix_game(loss: &[Vec<Rational>]) -> Result<GameSolution> {
    let r = loss.len();
    if r == 0 {
        return Err(Error::EmptyClass);
    }
    let c = loss[0].len();
    if c == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if let Some(row) = loss.iter().find(|row| row.len() != c) {
        return Err(Error::DimensionMismatch { expected: c, found: row.len() });
    }
    let min = loss.iter().flatten().min().cloned().unwrap_or_else(Rational::zero);
    let shift = Rational::one() - &min;

    // with L' = L + shift > 0: max sum x s.t. L'^T x <= 1, x >= 0; v' = 1 / sum x
    let mut lp = LinearProgram::new(vec![Rational::one(); r]);
    for j in 0..c {
        lp.push((0..r).map(|i| &loss[i][j] + &shift).collect(), Rational::one());
    }
    let sol = maximize(&lp)?;
    let v_shifted = Rational::one() / &sol.value;
    let rows = sol.x.iter().map(|x| x * &v_shifted).collect();
    let columns = sol.duals.iter().map(|y| y * &v_shifted).collect();
    Ok(GameSolution { rows, columns, value: v_shifted - shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    fn check_optimal(loss: &[Vec<Rational>], sol: &GameSolution) {
        let sum_p: Rational = sol.rows.iter().sum();
        let sum_q: Rational = sol.columns.iter().sum();
        assert_eq!(sum_p, int(1));
        assert_eq!(sum_q, int(1));
        for j in 0..loss[0].len() {
            let v: Rational = (0..loss.len()).map(|i| &sol.rows[i] * &loss[i][j]).sum();
            assert!(v <= sol.value);
        }
        for i in 0..loss.len() {
            let v: Rational = (0..loss[0].len()).map(|j| &sol.columns[j] * &loss[i][j]).sum();
            assert!(v >= sol.value);
        }
    }

    #[test]
    fn matching_pennies() {
        let loss = m(&[&[1, -1], &[-1, 1]]);
        let s = solve_matrix_game(&loss).unwrap();
        assert_eq!(s.value, int(0));
        assert_eq!(s.rows, vec![ratio(1, 2), ratio(1, 2)]);
        check_optimal(&loss, &s);
    }

    #[test]
    fn dominant_row() {
        let loss = m(&[&[3, 4], &[1, 2]]);
        let s = solve_matrix_game(&loss).unwrap();
        assert_eq!(s.value, int(2));
        assert_eq!(s.rows, vec![int(0), int(1)]);
        check_optimal(&loss, &s);
    }

    #[test]
    fn two_point_k2_restricted_game() {
        // rows f_{+1}, f_{-1}; columns u_1, u_2 gaps at k = 2
        let loss = vec![vec![ratio(1, 26), int(0)], vec![int(0), ratio(1, 13)]];
        let s = solve_matrix_game(&loss).unwrap();
        assert_eq!(s.rows, vec![ratio(2, 3), ratio(1, 3)]);
        assert_eq!(s.value, ratio(1, 39));
        check_optimal(&loss, &s);
    }

    #[test]
    fn rock_paper_scissors() {
        let loss = m(&[&[0, 1, -1], &[-1, 0, 1], &[1, -1, 0]]);
        let s = solve_matrix_game(&loss).unwrap();
        assert_eq!(s.value, int(0));
        assert_eq!(s.rows, vec![ratio(1, 3); 3]);
        check_optimal(&loss, &s);
    }
}
