//! Dense two-phase simplex over exact rationals.
//!
//! Problems are in the form `max c.x` subject to `A x <= b`, `x >= 0`, with
//! `b` of any sign. Bland's rule is used for both the entering and the
//! leaving variable, so the method terminates without cycling.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<Rational>,
    pub value: Rational,
    /// Optimal dual multipliers, one per row (all nonnegative).
    pub duals: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Self {
        Self { objective, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `row . x <= rhs`.
    pub fn push(&mut self, row: Vec<Rational>, rhs: Rational) {
        debug_assert_eq!(row.len(), self.objective.len());
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.rhs.len() != self.rows.len() {
            return Err(Error::DimensionMismatch { expected: self.rows.len(), found: self.rhs.len() });
        }
        match self.rows.iter().find(|r| r.len() != n) {
            Some(r) => Err(Error::DimensionMismatch { expected: n, found: r.len() }),
            None => Ok(()),
        }
    }

    /// `max (-b).y` subject to `-A^T y <= -c`, `y >= 0`.
    pub fn dual(&self) -> LinearProgram {
        let n = self.num_vars();
        let m = self.rows.len();
        let mut d = LinearProgram::new(self.rhs.iter().map(|b| -b).collect());
        for j in 0..n {
            d.push((0..m).map(|i| -&self.rows[i][j]).collect(), -&self.objective[j]);
        }
        d
    }
}

/// Solves the program with a tableau over `A`.
pub fn maximize(lp: &LinearProgram) -> Result<Solution> {
    lp.check()?;
    Tableau::solve(lp)
}

/// Solves the program through its dual and reads the primal solution off the
/// dual's multipliers. Cheaper when there are many more rows than variables.
pub fn maximize_via_dual(lp: &LinearProgram) -> Result<Solution> {
    lp.check()?;
    let dual = lp.dual();
    match Tableau::solve(&dual) {
        Ok(sol) => Ok(Solution { x: sol.duals, value: -sol.value, duals: sol.x }),
        // dual unbounded means the primal is infeasible; dual infeasible
        // means the primal is unbounded or infeasible
        Err(Error::Unbounded) => Err(Error::InfeasiblePolytope),
        Err(Error::InfeasiblePolytope) => match Tableau::solve(&LinearProgram {
            objective: vec![Rational::zero(); lp.num_vars()],
            rows: lp.rows.clone(),
            rhs: lp.rhs.clone(),
        }) {
            Ok(_) => Err(Error::Unbounded),
            Err(e) => Err(e),
        },
        Err(e) => Err(e),
    }
}

struct Tableau {
    /// Constraint rows, each `cols + 1` long with the right-hand side last.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs, with minus the objective value in the last slot.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
}

impl Tableau {
    fn solve(lp: &LinearProgram) -> Result<Solution> {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let flipped: Vec<bool> = lp.rhs.iter().map(|b| b.is_negative()).collect();
        let artificials = flipped.iter().filter(|&&f| f).count();
        let cols = n + m + artificials;
        let first_artificial = n + m;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = first_artificial;
        for i in 0..m {
            let sign = if flipped[i] { -Rational::one() } else { Rational::one() };
            let mut row = vec![Rational::zero(); cols + 1];
            for j in 0..n {
                row[j] = &sign * &lp.rows[i][j];
            }
            row[n + i] = sign.clone();
            row[cols] = &sign * &lp.rhs[i];
            if flipped[i] {
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(n + i);
            }
            rows.push(row);
        }
        let mut t = Tableau { rows, cost: vec![Rational::zero(); cols + 1], basis, n, m, first_artificial };

        if artificials > 0 {
            // phase 1: maximize minus the sum of artificials
            let mut c1 = vec![Rational::zero(); cols];
            for c in c1.iter_mut().skip(first_artificial) {
                *c = -Rational::one();
            }
            t.set_objective(&c1);
            t.run(cols)?;
            if t.cost[cols].is_positive() {
                return Err(Error::InfeasiblePolytope);
            }
            t.drive_out_artificials();
        }

        let mut c2 = vec![Rational::zero(); cols];
        c2[..n].clone_from_slice(&lp.objective);
        t.set_objective(&c2);
        t.run(first_artificial)?;
        Ok(t.solution())
    }

    fn cols(&self) -> usize {
        self.cost.len() - 1
    }

    /// Reduced costs `c_j - c_B B^-1 A_j` for the current basis.
    fn set_objective(&mut self, c: &[Rational]) {
        let cols = self.cols();
        let mut cost: Vec<Rational> = c.to_vec();
        cost.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=cols {
                if !self.rows[i][j].is_zero() {
                    cost[j] -= cb * &self.rows[i][j];
                }
            }
        }
        self.cost = cost;
    }

    /// Iterates until optimal, only letting columns `< allowed` enter.
    fn run(&mut self, allowed: usize) -> Result<()> {
        let cols = self.cols();
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j].is_positive()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.m {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let r = &self.rows[i][cols] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => r < *lr || (r == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, r));
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, enter);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols();
        let p = self.rows[row][col].clone();
        if !p.is_one() {
            for v in self.rows[row].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = core::mem::take(&mut self.rows[row]);
        let nonzero: Vec<usize> = (0..=cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for &j in &nonzero {
                r[j] -= &f * &pivot_row[j];
            }
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for &j in &nonzero {
                self.cost[j] -= &f * &pivot_row[j];
            }
        }
        self.rows[row] = pivot_row;
        self.basis[row] = col;
    }

    /// After phase 1, replaces basic artificials (all at level zero) by
    /// structural or slack columns where the row allows it.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] < self.first_artificial {
                continue;
            }
            if let Some(j) = (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                self.pivot(i, j);
            }
        }
    }

    fn solution(&self) -> Solution {
        let cols = self.cols();
        let mut x = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rows[i][cols].clone();
            }
        }
        let duals = (0..self.m).map(|i| -&self.cost[self.n + i]).collect();
        Solution { x, value: -&self.cost[cols], duals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(c: &[i64], rows: &[&[i64]], b: &[i64]) -> LinearProgram {
        let mut p = LinearProgram::new(c.iter().map(|&v| int(v)).collect());
        for (r, &bi) in rows.iter().zip(b) {
            p.push(r.iter().map(|&v| int(v)).collect(), int(bi));
        }
        p
    }

    #[test]
    fn textbook() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = lp(&[3, 5], &[&[1, 0], &[0, 2], &[3, 2]], &[4, 12, 18]);
        let s = maximize(&p).unwrap();
        assert_eq!(s.x, vec![int(2), int(6)]);
        assert_eq!(s.value, int(36));
        assert_eq!(s.duals, vec![int(0), ratio(3, 2), int(1)]);
        let d = maximize_via_dual(&p).unwrap();
        assert_eq!(d.x, s.x);
        assert_eq!(d.value, s.value);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // max -x - y, x + y >= 2, x <= 3 -> value -2
        let p = lp(&[-1, -1], &[&[-1, -1], &[1, 0]], &[-2, 3]);
        let s = maximize(&p).unwrap();
        assert_eq!(s.value, int(-2));
        assert_eq!(&s.x[0] + &s.x[1], int(2));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(&[1], &[&[1], &[-1]], &[1, -2]);
        assert_eq!(maximize(&p), Err(Error::InfeasiblePolytope));
        assert_eq!(maximize_via_dual(&p), Err(Error::InfeasiblePolytope));
        let p = lp(&[1, 1], &[&[1, -1]], &[1]);
        assert_eq!(maximize(&p), Err(Error::Unbounded));
        assert_eq!(maximize_via_dual(&p), Err(Error::Unbounded));
    }

    #[test]
    fn degenerate_redundant_rows() {
        // duplicate equality-like rows force an artificial to stay basic
        let p = lp(&[1, 2], &[&[1, 1], &[-1, -1], &[1, 1], &[-1, -1]], &[1, -1, 1, -1]);
        let s = maximize(&p).unwrap();
        assert_eq!(s.value, int(2));
        assert_eq!(s.x, vec![int(0), int(1)]);
    }

    #[test]
    fn dual_route_matches_on_random_programs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=7);
            let mut p = LinearProgram::new((0..n).map(|_| int(rng.gen_range(-5..=5))).collect());
            for _ in 0..m {
                p.push((0..n).map(|_| int(rng.gen_range(-4..=6))).collect(), int(rng.gen_range(-3..=10)));
            }
            for j in 0..n {
                let mut row = vec![int(0); n];
                row[j] = int(1);
                p.push(row, int(rng.gen_range(1..=8)));
            }
            let a = maximize(&p);
            let b = maximize_via_dual(&p);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(a.value, b.value);
                    for (row, rhs) in p.rows.iter().zip(&p.rhs) {
                        let lhs = row.iter().zip(&b.x).fold(int(0), |acc, (r, x)| acc + r * x);
                        assert!(lhs <= *rhs);
                    }
                    let dual_value = a.duals.iter().zip(&p.rhs).fold(int(0), |acc, (y, b)| acc + y * b);
                    assert_eq!(dual_value, a.value);
                }
                (Err(ea), Err(eb)) => assert_eq!(ea, eb),
                (a, b) => panic!("routes disagree: {a:?} vs {b:?}"),
            }
        }
    }
}
