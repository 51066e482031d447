//! Minimum-cost assignment.
//!
//! Given an `n × m` cost matrix with `n ≤ m`, find the injection `π` from
//! rows to columns minimizing `Σ_i cost[i, π(i)]`. [`solve_hungarian`] is
//! the production solver (shortest augmenting paths with row/column
//! potentials, `O(n² m)`); [`solve_bruteforce`] enumerates every injection
//! and serves as its oracle.
//!
//! The relaxation over doubly stochastic matrices has the same optimum,
//! because permutation matrices are the vertices of that polytope.
//! [`verify_birkhoff_optimality`] checks the claim by sampling.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};
use crate::permutation::{for_each_injection, Permutation};
use crate::rng::seeded;

/// Row-major matrix of finite assignment costs.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("empty cost matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(CostMatrix { data, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, m, data)
    }

    /// Fills an `rows × cols` matrix from `f(i, j)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Entrywise `scale * c + shift`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.data.iter().map(|c| scale * c + shift).collect())
    }

    /// Sum of the entries selected by `assignment`, accumulated in row order.
    pub fn cost_of(&self, assignment: &Permutation) -> Result<f64> {
        if assignment.len() != self.rows || assignment.codomain() != self.cols {
            return Err(Error::SizeMismatch { left: assignment.len(), right: self.rows });
        }
        Ok(assignment.as_slice().iter().enumerate().map(|(i, &j)| self.get(i, j)).sum())
    }

    /// Plain numeric CSV, one matrix row per line, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&rows)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentSolution {
    pub assignment: Permutation,
    pub total_cost: f64,
}

fn check_shape(cost: &CostMatrix) -> Result<()> {
    if cost.rows > cost.cols {
        return Err(Error::invalid(format!(
            "assignment needs rows <= cols, got {}x{}",
            cost.rows, cost.cols
        )));
    }
    Ok(())
}

/// Hungarian algorithm (Kuhn–Munkres with potentials).
///
/// Handles rectangular `n ≤ m` inputs directly. On inputs with several
/// optimal assignments the returned one is optimal but not necessarily the
/// lexicographically smallest.
pub fn solve_hungarian(cost: &CostMatrix) -> Result<AssignmentSolution> {
    check_shape(cost)?;
    let (n, m) = (cost.rows, cost.cols);
    // 1-based working arrays; index 0 is the virtual root column/row.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = cost.row(i0 - 1);
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = row[j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            debug_assert!(j1 != 0, "no augmenting column found");
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut map = vec![usize::MAX; n];
    for j in 1..=m {
        if owner[j] != 0 {
            map[owner[j] - 1] = j - 1;
        }
    }
    let assignment = Permutation::from_vec_unchecked(map, m);
    let total_cost = cost.cost_of(&assignment)?;
    Ok(AssignmentSolution { assignment, total_cost })
}

pub const BRUTEFORCE_MAX_ROWS: usize = 9;
const BRUTEFORCE_MAX_INJECTIONS: u128 = 20_000_000;

/// Exhaustive minimum over all injections. Among equal-cost optima the
/// lexicographically smallest assignment vector wins.
pub fn solve_bruteforce(cost: &CostMatrix) -> Result<AssignmentSolution> {
    check_shape(cost)?;
    let (n, m) = (cost.rows, cost.cols);
    if n > BRUTEFORCE_MAX_ROWS {
        return Err(Error::TooLarge { what: "brute-force assignment", n, max: BRUTEFORCE_MAX_ROWS });
    }
    let count: u128 = ((m - n + 1)..=m).map(|k| k as u128).product();
    if count > BRUTEFORCE_MAX_INJECTIONS {
        return Err(Error::TooLarge { what: "brute-force assignment columns", n: m, max: n + 3 });
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_injection(n, m, |inj| {
        let total: f64 = inj.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, inj.to_vec()));
        }
        true
    });
    let (total_cost, map) = best.expect("at least one injection exists");
    Ok(AssignmentSolution { assignment: Permutation::from_vec_unchecked(map, m), total_cost })
}

/// Rectangular assignment by padding: `m − n` zero-cost rows are appended,
/// the square problem is solved, and the padded rows are dropped.
pub fn solve_rectangular(cost: &CostMatrix) -> Result<AssignmentSolution> {
    check_shape(cost)?;
    let (n, m) = (cost.rows, cost.cols);
    if n == m {
        return solve_hungarian(cost);
    }
    let mut data = cost.data.clone();
    data.resize(m * m, 0.0);
    let square = CostMatrix::new(m, m, data)?;
    let full = solve_hungarian(&square)?;
    let map = full.assignment.as_slice()[..n].to_vec();
    let assignment = Permutation::injection(map, m)?;
    let total_cost = cost.cost_of(&assignment)?;
    Ok(AssignmentSolution { assignment, total_cost })
}

/// Samples `trials` doubly stochastic matrices (random convex combinations
/// of between 1 and `n + 1` uniform permutation matrices) and checks that
/// none achieves a lower linear cost than `solution`'s permutation matrix,
/// up to an absolute slack of `1e-9 · max(1, |cost|)`.
pub fn verify_birkhoff_optimality(
    cost: &CostMatrix,
    solution: &AssignmentSolution,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    if !cost.is_square() {
        return Err(Error::invalid("Birkhoff check needs a square cost matrix"));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let n = cost.rows;
    let reference = cost.cost_of(&solution.assignment)?;
    let slack = 1e-9 * reference.abs().max(1.0);
    let mut rng = seeded(seed);
    let mut p = vec![0.0f64; n * n];
    for _ in 0..trials {
        p.iter_mut().for_each(|x| *x = 0.0);
        let k = rng.random_range(1..=n + 1);
        let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-12).collect();
        let total: f64 = weights.iter().sum();
        for w in weights {
            let perm = Permutation::random(n, &mut rng);
            for (i, &j) in perm.as_slice().iter().enumerate() {
                p[i * n + j] += w / total;
            }
        }
        let value: f64 = cost.data.iter().zip(&p).map(|(c, w)| c * w).sum();
        if value < reference - slack {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn random_int_matrix(n: usize, cols: usize, seed: u64) -> CostMatrix {
        let mut rng = seeded(seed);
        CostMatrix::from_fn(n, cols, |_, _| rng.random_range(0..100) as f64).unwrap()
    }

    #[test]
    fn two_by_two() {
        let s = solve_hungarian(&m(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(s.assignment, Permutation::identity(2));
        assert_eq!(s.total_cost, 0.0);
        let s = solve_hungarian(&m(&[&[5.0, 1.0], &[1.0, 5.0]])).unwrap();
        assert_eq!(s.assignment.to_one_based(), vec![2, 1]);
        assert_eq!(s.total_cost, 2.0);
        let b = solve_bruteforce(&m(&[&[5.0, 1.0], &[1.0, 5.0]])).unwrap();
        assert_eq!(b, s);
    }

    #[test]
    fn single_entry() {
        let s = solve_bruteforce(&m(&[&[1.0]])).unwrap();
        assert_eq!(s.assignment, Permutation::identity(1));
        assert_eq!(s.total_cost, 1.0);
        assert_eq!(solve_hungarian(&m(&[&[1.0]])).unwrap(), s);
    }

    #[test]
    fn six_by_six_matches_exhaustive_minimum() {
        let c = random_int_matrix(6, 6, 2024);
        let mut best = f64::INFINITY;
        crate::permutation::for_each_permutation(6, |p| {
            let s: f64 = p.iter().enumerate().map(|(i, &j)| c.get(i, j)).sum();
            best = best.min(s);
            true
        });
        assert_eq!(solve_hungarian(&c).unwrap().total_cost, best);
    }

    #[test]
    fn seven_by_seven_self_consistency() {
        for seed in 0..20 {
            let c = random_int_matrix(7, 7, seed);
            assert_eq!(
                solve_hungarian(&c).unwrap().total_cost,
                solve_bruteforce(&c).unwrap().total_cost
            );
        }
    }

    #[test]
    fn bruteforce_tie_break_is_lexicographic() {
        let c = m(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert_eq!(solve_bruteforce(&c).unwrap().assignment, Permutation::identity(3));
        let c = m(&[&[3.0, 1.0, 1.0], &[1.0, 3.0, 1.0], &[1.0, 1.0, 3.0]]);
        // (2 3 1) and (3 1 2) both cost 3; (2 3 1) is smaller.
        assert_eq!(solve_bruteforce(&c).unwrap().assignment.to_one_based(), vec![2, 3, 1]);
    }

    #[test]
    fn rectangular_cases() {
        let s = solve_rectangular(&m(&[&[3.0, 1.0, 2.0]])).unwrap();
        assert_eq!(s.assignment.to_one_based(), vec![2]);
        assert_eq!(s.total_cost, 1.0);
        let s = solve_rectangular(&m(&[&[0.0, 9.0, 9.0], &[9.0, 9.0, 0.0]])).unwrap();
        assert_eq!(s.assignment.to_one_based(), vec![1, 3]);
        assert_eq!(s.total_cost, 0.0);
        for seed in 0..20 {
            let c = random_int_matrix(4, 6, 100 + seed);
            let brute = solve_bruteforce(&c).unwrap();
            assert_eq!(solve_rectangular(&c).unwrap().total_cost, brute.total_cost);
            assert_eq!(solve_hungarian(&c).unwrap().total_cost, brute.total_cost);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(CostMatrix::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        let tall = m(&[&[1.0], &[2.0]]);
        assert!(solve_hungarian(&tall).is_err());
        assert!(solve_bruteforce(&tall).is_err());
        assert!(solve_bruteforce(&random_int_matrix(10, 10, 0)).is_err());
        let rect = m(&[&[1.0, 2.0]]);
        let sol = solve_rectangular(&rect).unwrap();
        assert!(verify_birkhoff_optimality(&rect, &sol, 5, 0).is_err());
    }

    #[test]
    fn birkhoff_check() {
        let c = random_int_matrix(6, 6, 77);
        let sol = solve_hungarian(&c).unwrap();
        assert!(verify_birkhoff_optimality(&c, &sol, 10_000, 1).unwrap());

        let swap = m(&[&[5.0, 1.0], &[1.0, 5.0]]);
        let bad = AssignmentSolution { assignment: Permutation::identity(2), total_cost: 10.0 };
        assert!(!verify_birkhoff_optimality(&swap, &bad, 100, 1).unwrap());

        let one = m(&[&[4.0]]);
        let sol = solve_hungarian(&one).unwrap();
        assert!(verify_birkhoff_optimality(&one, &sol, 10, 3).unwrap());
    }

    #[test]
    fn csv_round_trip() {
        let c = CostMatrix::new(2, 3, vec![0.1, -2.5, 1e-300, 3.0, 4.0, 1.0 / 3.0]).unwrap();
        assert_eq!(CostMatrix::from_csv(&c.to_csv()).unwrap(), c);
    }
}
