//! Dense two-phase simplex and the P_U linear-programming step of the
//! alternating scheme. Problems here have at most a few dozen variables and
//! a handful of rows, so a dense tableau with Bland's anti-cycling rule is
//! the right tool.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2_sq};
use crate::prob::Distribution;
use crate::scalar::{cast, Scalar};

use super::SecrecyProblem;

/// min c^T x  s.t.  A_eq x = b_eq, A_ub x <= b_ub, x >= 0.
#[derive(Debug, Clone)]
pub(crate) struct LpProblem<T> {
    pub objective: Vec<T>,
    pub a_eq: Vec<Vec<T>>,
    pub b_eq: Vec<T>,
    pub a_ub: Vec<Vec<T>>,
    pub b_ub: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

fn pivot_tol<T: Scalar>() -> T {
    cast::<T>(1e-9).max(T::epsilon() * cast::<T>(100.0))
}

/// Two-phase dense simplex with artificial variables on every row and
/// Bland's smallest-index rule for both entering and leaving choices.
pub(crate) fn solve_lp<T: Scalar>(p: &LpProblem<T>) -> LpOutcome<T> {
    let n = p.objective.len();
    let m_ub = p.a_ub.len();
    let m = m_ub + p.a_eq.len();
    let n_slack = m_ub;
    let n_struct = n + n_slack;
    let n_total = n_struct + m; // artificials appended last

    // rows: [A | slack | artificial | rhs], equilibrated and with rhs >= 0
    let mut tab = vec![vec![T::zero(); n_total + 1]; m];
    for (i, (row, &b)) in p.a_ub.iter().zip(&p.b_ub).enumerate() {
        debug_assert_eq!(row.len(), n);
        let scale = row
            .iter()
            .fold(b.abs(), |acc, &v| acc.max(v.abs()))
            .max(T::one());
        for (j, &v) in row.iter().enumerate() {
            tab[i][j] = v / scale;
        }
        tab[i][n + i] = T::one(); // slack
        tab[i][n_total] = b / scale;
    }
    for (k, (row, &b)) in p.a_eq.iter().zip(&p.b_eq).enumerate() {
        debug_assert_eq!(row.len(), n);
        let i = m_ub + k;
        let scale = row
            .iter()
            .fold(b.abs(), |acc, &v| acc.max(v.abs()))
            .max(T::one());
        for (j, &v) in row.iter().enumerate() {
            tab[i][j] = v / scale;
        }
        tab[i][n_total] = b / scale;
    }
    for row in tab.iter_mut() {
        if row[n_total] < T::zero() {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n_struct + i).collect();
    for (i, row) in tab.iter_mut().enumerate() {
        row[n_struct + i] = T::one();
    }

    // phase 1: minimize the sum of artificials
    let mut cost1 = vec![T::zero(); n_total];
    for j in n_struct..n_total {
        cost1[j] = T::one();
    }
    if !run_simplex(&mut tab, &mut basis, &cost1, n_total, None) {
        return LpOutcome::Unbounded; // cannot happen: phase-1 objective is bounded below
    }
    let phase1_value: T = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n_struct)
        .map(|(i, _)| tab[i][n_total])
        .sum();
    if phase1_value > cast::<T>(1e-7) {
        return LpOutcome::Infeasible;
    }

    // drive remaining artificials (stuck at zero) out of the basis
    let mut dropped = vec![false; m];
    for i in 0..m {
        if basis[i] >= n_struct {
            let enter = (0..n_struct).find(|&j| tab[i][j].abs() > pivot_tol::<T>());
            match enter {
                Some(j) => pivot(&mut tab, &mut basis, i, j, n_total),
                None => dropped[i] = true, // redundant row
            }
        }
    }

    // phase 2 on the structural objective; artificial columns are blocked
    let mut cost2 = vec![T::zero(); n_total];
    cost2[..n].copy_from_slice(&p.objective);
    if !run_simplex(&mut tab, &mut basis, &cost2, n_struct, Some(&dropped)) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![T::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n && !dropped[i] {
            x[b] = tab[i][n_total];
        }
    }
    let value = dot(&p.objective, &x);
    LpOutcome::Optimal { x, value }
}

/// Bland-rule simplex iterations on the current tableau. `active_cols`
/// limits the entering candidates (used to block artificials in phase 2).
/// Returns false when the problem is unbounded in the search direction.
fn run_simplex<T: Scalar>(
    tab: &mut [Vec<T>],
    basis: &mut [usize],
    cost: &[T],
    active_cols: usize,
    dropped: Option<&[bool]>,
) -> bool {
    let m = tab.len();
    let n_total = cost.len();
    let tol = pivot_tol::<T>();
    let is_dropped = |i: usize| dropped.map(|d| d[i]).unwrap_or(false);

    for _ in 0..10_000 {
        // reduced costs r_j = c_j - c_B^T B^{-1} A_j, straight off the tableau
        let mut entering = None;
        for j in 0..active_cols {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                if !is_dropped(i) {
                    r = r - cost[basis[i]] * tab[i][j];
                }
            }
            if r < -tol {
                entering = Some(j); // Bland: first (smallest) index wins
                break;
            }
        }
        let enter = match entering {
            Some(j) => j,
            None => return true, // optimal
        };

        // ratio test, ties broken by smallest basic-variable index
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if is_dropped(i) || tab[i][enter] <= tol {
                continue;
            }
            let ratio = tab[i][n_total] / tab[i][enter];
            match leave {
                None => leave = Some((i, ratio)),
                Some((best_i, best_r)) => {
                    if ratio < best_r - tol
                        || (ratio <= best_r + tol && basis[i] < basis[best_i])
                    {
                        leave = Some((i, ratio));
                    }
                }
            }
        }
        let (leave_row, _) = match leave {
            Some(l) => l,
            None => return false, // unbounded
        };
        pivot(tab, basis, leave_row, enter, n_total);
    }
    true // iteration cap; with Bland's rule this is unreachable in practice
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], basis: &mut [usize], row: usize, col: usize, n_total: usize) {
    let p = tab[row][col];
    for v in tab[row].iter_mut() {
        *v = *v / p;
    }
    for i in 0..tab.len() {
        if i == row {
            continue;
        }
        let f = tab[i][col];
        if f == T::zero() {
            continue;
        }
        for j in 0..=n_total {
            let delta = f * tab[row][j];
            tab[i][j] = tab[i][j] - delta;
        }
    }
    basis[row] = col;
}

/// One LP step of the alternating scheme: for fixed spherical vectors,
/// choose P_U maximizing the transmitted-information form subject to the
/// simplex, rate, leakage and coupling constraints.
///
/// The incoming distribution is kept whenever it is feasible and already
/// optimal, which makes the alternation terminate instead of hopping
/// between tied vertices. An all-zero set of vectors short-circuits to the
/// uniform tie-break.
pub fn lp_step<T: Scalar>(
    prob: &SecrecyProblem<T>,
    l: &[Vec<T>],
    incoming: &Distribution<T>,
) -> Result<Distribution<T>> {
    let u_size = prob.u_size();
    if l.len() != u_size {
        return Err(Error::LengthMismatch {
            expected: u_size,
            got: l.len(),
        });
    }
    let n_x = prob.p_x().len();
    for lu in l {
        if lu.len() != n_x {
            return Err(Error::LengthMismatch {
                expected: n_x,
                got: lu.len(),
            });
        }
    }

    let zero_scale = cast::<T>(1e-12);
    if l.iter().all(|lu| lu.iter().all(|&v| v.abs() <= zero_scale)) {
        return Ok(Distribution::uniform(u_size));
    }

    let rate_coeff: Vec<T> = l.iter().map(|lu| norm2_sq(lu)).collect();
    let leak_coeff: Vec<T> = l.iter().map(|lu| prob.lam().quadratic_form(lu)).collect();
    let gain_coeff: Vec<T> = l.iter().map(|lu| prob.v().quadratic_form(lu)).collect();

    let mut a_eq: Vec<Vec<T>> = vec![vec![T::one(); u_size]];
    let mut b_eq: Vec<T> = vec![T::one()];
    for x in 0..n_x {
        a_eq.push(l.iter().map(|lu| lu[x]).collect());
        b_eq.push(T::zero());
    }

    let lp = LpProblem {
        objective: gain_coeff.iter().map(|&c| -c).collect(),
        a_eq,
        b_eq,
        a_ub: vec![rate_coeff, leak_coeff],
        b_ub: vec![prob.rate_budget(), prob.leakage_budget()],
    };

    let (x, lp_value) = match solve_lp(&lp) {
        LpOutcome::Optimal { x, value } => (x, value),
        LpOutcome::Infeasible => {
            return Err(Error::LpInfeasible {
                context: "coupling constraint cannot be met for the given vectors".into(),
            })
        }
        LpOutcome::Unbounded => {
            return Err(Error::LpInfeasible {
                context: "unbounded linear program (malformed problem)".into(),
            })
        }
    };

    // keep the incoming point when it already attains the optimum
    if incoming.len() == u_size {
        let incoming_value = -dot(&gain_coeff, incoming.probs());
        let feas = super::validate_feasibility(prob, incoming, l);
        let slack = cast::<T>(1e-12) * (T::one() + lp_value.abs());
        if feas.max_residual() <= prob.policy().feasibility && incoming_value <= lp_value + slack {
            return Ok(incoming.clone());
        }
    }

    // clean rounding noise off the vertex before constructing a distribution
    let mut probs: Vec<T> = x.iter().map(|&v| v.max(T::zero())).collect();
    let total: T = probs.iter().copied().sum();
    if total <= T::zero() {
        return Err(Error::LpInfeasible {
            context: "simplex returned a degenerate point".into(),
        });
    }
    for v in &mut probs {
        *v = *v / total;
    }
    Distribution::new(probs)
}
