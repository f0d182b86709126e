//! Exact linear programming over the rationals: a dense two-phase simplex
//! with Bland's anti-cycling pivot rule. Problems are tiny (a handful of
//! edge-length variables), so a textbook tableau is the right tool.

use crate::Rational;
use num::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

/// Minimize `c·x` subject to `A x = b`, `x >= 0`.
///
/// Rows with negative `b` are negated first. Deterministic (Bland's rule:
/// lowest-index entering column, lowest-index basic leaving variable).
pub fn solve_eq(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpResult {
    let m = a.len();
    let n = c.len();
    assert!(a.iter().all(|row| row.len() == n) && b.len() == m);
    // tableau: columns 0..n structural, n..n+m artificial, last = rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Rational> = Vec::with_capacity(width);
        let flip = b[i].is_negative();
        for j in 0..n {
            row.push(if flip { -&a[i][j] } else { a[i][j].clone() });
        }
        for j in 0..m {
            row.push(if i == j {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        row.push(if flip { -&b[i] } else { b[i].clone() });
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase 1: minimize the sum of artificials
    let mut cost1 = vec![Rational::zero(); width];
    for j in n..n + m {
        cost1[j] = Rational::one();
    }
    let mut z1 = reduce_costs(&t, &basis, &mut cost1);
    simplex_loop(&mut t, &mut basis, &mut cost1, &mut z1, n + m);
    if !z1.is_zero() {
        return LpResult::Infeasible;
    }
    // drive remaining artificials out of the basis
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j, &mut cost1, &mut z1);
            }
            // else: redundant row, artificial stays at value zero
        }
    }

    // phase 2: original objective, artificial columns frozen out
    let mut cost2 = vec![Rational::zero(); width];
    cost2[..n].clone_from_slice(c);
    let mut z2 = reduce_costs(&t, &basis, &mut cost2);
    if !simplex_loop(&mut t, &mut basis, &mut cost2, &mut z2, n) {
        return LpResult::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1].clone();
        }
    }
    LpResult::Optimal { x, value: -z2 }
}

/// Subtract basic-variable costs so reduced costs of basic columns are zero;
/// returns the (negated) objective cell.
fn reduce_costs(t: &[Vec<Rational>], basis: &[usize], cost: &mut [Rational]) -> Rational {
    let width = cost.len();
    let mut z = Rational::zero();
    for (i, &bv) in basis.iter().enumerate() {
        if !cost[bv].is_zero() {
            let f = cost[bv].clone();
            for j in 0..width {
                let d = &f * &t[i][j];
                cost[j] -= d;
            }
            z -= &f * &t[i][width - 1];
            // restore: the loop above also clobbered the rhs slot of cost
        }
    }
    // cost's last entry tracks -z; keep them in sync
    let _ = &z;
    cost[width - 1] = Rational::zero();
    z
}

/// Run Bland pivots until optimal (true) or unbounded (false). Only columns
/// `< allowed` may enter.
fn simplex_loop(
    t: &mut Vec<Vec<Rational>>,
    basis: &mut Vec<usize>,
    cost: &mut [Rational],
    z: &mut Rational,
    allowed: usize,
) -> bool {
    let width = cost.len();
    loop {
        let enter = (0..allowed).find(|&j| cost[j].is_negative());
        let Some(j) = enter else { return true };
        // ratio test with Bland tie-break on the basic variable index
        let mut best: Option<(Rational, usize, usize)> = None; // (ratio, basis var, row)
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][j];
                let cand = (ratio, basis[i], i);
                if best
                    .as_ref()
                    .is_none_or(|b| cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1))
                {
                    best = Some(cand);
                }
            }
        }
        let Some((_, _, row)) = best else { return false };
        pivot(t, basis, row, j, cost, z);
    }
}

fn pivot(
    t: &mut Vec<Vec<Rational>>,
    basis: &mut Vec<usize>,
    row: usize,
    col: usize,
    cost: &mut [Rational],
    z: &mut Rational,
) {
    let width = t[row].len();
    let p = t[row][col].clone();
    for j in 0..width {
        t[row][j] /= &p;
    }
    for i in 0..t.len() {
        if i != row && !t[i][col].is_zero() {
            let f = t[i][col].clone();
            for j in 0..width {
                let d = &f * &t[row][j];
                t[i][j] -= d;
            }
        }
    }
    if !cost[col].is_zero() {
        let f = cost[col].clone();
        for j in 0..width {
            let d = &f * &t[row][j];
            cost[j] -= d;
        }
        *z -= &f * &t[row][width - 1];
    }
    basis[row] = col;
}

/// Minimize `c·x` subject to `A_eq x = b_eq`, `A_ge x >= b_ge`, `x >= 0`,
/// by adding one surplus variable per inequality.
pub fn solve(
    a_eq: &[Vec<Rational>],
    b_eq: &[Rational],
    a_ge: &[Vec<Rational>],
    b_ge: &[Rational],
    c: &[Rational],
) -> LpResult {
    let n = c.len();
    let k = a_ge.len();
    let mut a: Vec<Vec<Rational>> = Vec::new();
    let mut b: Vec<Rational> = Vec::new();
    for (row, rhs) in a_eq.iter().zip(b_eq) {
        let mut r = row.clone();
        r.extend(vec![Rational::zero(); k]);
        a.push(r);
        b.push(rhs.clone());
    }
    for (i, (row, rhs)) in a_ge.iter().zip(b_ge).enumerate() {
        let mut r = row.clone();
        r.extend(vec![Rational::zero(); k]);
        r[n + i] = -Rational::one();
        a.push(r);
        b.push(rhs.clone());
    }
    let mut cc = c.to_vec();
    cc.extend(vec![Rational::zero(); k]);
    match solve_eq(&a, &b, &cc) {
        LpResult::Optimal { x, value } => LpResult::Optimal {
            x: x[..n].to_vec(),
            value,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    fn r(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn one_variable_lengths() {
        // min 2x + y  s.t.  x + y = 1, x >= 1/10, y >= 1/10
        let res = solve(
            &[vec![r(1, 1), r(1, 1)]],
            &[r(1, 1)],
            &[vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]],
            &[r(1, 10), r(1, 10)],
            &[r(2, 1), r(1, 1)],
        );
        assert_eq!(
            res,
            LpResult::Optimal {
                x: vec![r(1, 10), r(9, 10)],
                value: r(11, 10)
            }
        );
    }

    #[test]
    fn constant_objective_on_simplex() {
        // min x + y  s.t.  x + y = 1, x,y >= 1/10: value 1 everywhere
        let res = solve(
            &[vec![r(1, 1), r(1, 1)]],
            &[r(1, 1)],
            &[vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]],
            &[r(1, 10), r(1, 10)],
            &[r(1, 1), r(1, 1)],
        );
        let LpResult::Optimal { value, x } = res else {
            panic!("expected optimum")
        };
        assert_eq!(value, r(1, 1));
        assert_eq!(x.iter().sum::<Rational>(), r(1, 1));
    }

    #[test]
    fn infeasible_thickness() {
        // x + y = 1, x >= 3/5, y >= 3/5
        let res = solve(
            &[vec![r(1, 1), r(1, 1)]],
            &[r(1, 1)],
            &[vec![r(1, 1), r(0, 1)], vec![r(0, 1), r(1, 1)]],
            &[r(3, 5), r(3, 5)],
            &[r(1, 1), r(1, 1)],
        );
        assert_eq!(res, LpResult::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x s.t. x - y = 0 (x = y free to grow)
        let res = solve_eq(
            &[vec![r(1, 1), r(-1, 1)]],
            &[r(0, 1)],
            &[r(-1, 1), r(0, 1)],
        );
        assert_eq!(res, LpResult::Unbounded);
    }

    #[test]
    fn degenerate_and_redundant_rows() {
        // duplicated equality row must not break phase 1
        let res = solve_eq(
            &[
                vec![r(1, 1), r(1, 1)],
                vec![r(1, 1), r(1, 1)],
            ],
            &[r(1, 1), r(1, 1)],
            &[r(1, 1), r(3, 1)],
        );
        assert_eq!(
            res,
            LpResult::Optimal {
                x: vec![r(1, 1), r(0, 1)],
                value: r(1, 1)
            }
        );
    }

    #[test]
    fn optimum_dominates_random_feasible_points() {
        use rand::prelude::*;
        let a_eq = vec![vec![r(1, 1), r(1, 1), r(1, 1)]];
        let b_eq = vec![r(1, 1)];
        let a_ge: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { r(1, 1) } else { r(0, 1) }).collect())
            .collect();
        let b_ge = vec![r(1, 20); 3];
        let c = vec![r(3, 1), r(1, 1), r(2, 1)];
        let LpResult::Optimal { value, x } = solve(&a_eq, &b_eq, &a_ge, &b_ge, &c) else {
            panic!("expected optimum")
        };
        for xi in &x {
            assert!(*xi >= r(1, 20));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            // random feasible point: 1/20 floor plus random split of the slack
            let mut w: Vec<Rational> = (0..3).map(|_| r(rng.random_range(1..100), 1)).collect();
            let tot: Rational = w.iter().sum();
            let slack = r(17, 20);
            for wi in &mut w {
                *wi = r(1, 20) + &*wi / &tot * &slack;
            }
            let obj: Rational = w.iter().zip(&c).map(|(wi, ci)| wi * ci).sum();
            assert!(obj >= value);
        }
    }
}
