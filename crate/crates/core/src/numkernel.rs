//! Numerical primitives: rank/nullspace with tolerance and a dense
//! simplex linear-program solver with deterministic (Bland) pivoting.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

/// Default relative threshold for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Numerical rank data for a real or complex matrix.
#[derive(Debug, Clone)]
pub struct RankResult<T: ComplexField<RealField = f64>> {
    pub rank: usize,
    pub nullity: usize,
    /// Orthonormal nullspace basis, one column per nullspace direction.
    pub nullspace: DMatrix<T>,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
}

/// Singular values and nullspace of `m` with rank threshold `tol_factor * sigma_max`.
///
/// The matrix is padded with zero rows when wide so the full right factor is
/// available; padding does not change the singular values.
pub fn rank_nullspace<T>(m: &DMatrix<T>, tol_factor: f64) -> Result<RankResult<T>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    if m.iter().any(|x| !x.modulus().is_finite()) {
        return Err(Error::NonFiniteEntry);
    }
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Ok(RankResult {
            rank: 0,
            nullity: 0,
            nullspace: DMatrix::zeros(0, 0),
            singular_values: Vec::new(),
        });
    }
    let work = if rows < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("svd was requested with right vectors");
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let threshold = tol_factor * sigma_max;
    let rank = sigma.iter().filter(|&&s| s > threshold).count();
    let nullity = cols - rank;
    // Nullspace basis: adjoint rows of V^H whose singular value is below threshold.
    let mut nullspace = DMatrix::zeros(cols, nullity);
    for (out, idx) in (rank..cols).enumerate() {
        for c in 0..cols {
            nullspace[(c, out)] = v_t[(idx, c)].conjugate();
        }
    }
    Ok(RankResult {
        rank,
        nullity,
        nullspace,
        singular_values: sigma,
    })
}

/// Smallest singular value of `m` (0 for an empty matrix).
pub fn sigma_min<T>(m: &DMatrix<T>) -> Result<f64>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let r = rank_nullspace(m, 0.0)?;
    Ok(r.singular_values.last().copied().unwrap_or(0.0))
}

/// Outcome status of a linear program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution of a linear program over free variables.
#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub optimum: f64,
    /// Values of the original free variables (empty unless optimal).
    pub witness: Vec<f64>,
    /// Dual values, one per standard-form row (equalities first), for
    /// certifying the optimum.
    pub dual: Vec<f64>,
}

/// maximize `objective . x` subject to `equalities` (a.x = b) and
/// `inequalities` (a.x <= b). Variables are free unless flagged in
/// `nonneg` (an empty mask means all free).
#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub equalities: Vec<(Vec<f64>, f64)>,
    pub inequalities: Vec<(Vec<f64>, f64)>,
    pub nonneg: Vec<bool>,
}

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 2_000_000;
/// Consecutive non-improving pivots before pricing drops to Bland's rule.
const STALL_LIMIT: usize = 50;

/// Dense two-phase simplex. Free variables are split as x = u - v; pricing
/// is largest-reduced-cost with lowest-index tie breaks, falling back to
/// Bland's rule after a degenerate stall, so pivots are deterministic and
/// termination is guaranteed.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome> {
    let n = p.objective.len();
    for (row, _) in p.equalities.iter().chain(p.inequalities.iter()) {
        if row.len() != n {
            return Err(Error::LpDimensionMismatch {
                got: row.len(),
                expected: n,
            });
        }
    }
    if !p.nonneg.is_empty() && p.nonneg.len() != n {
        return Err(Error::LpDimensionMismatch {
            got: p.nonneg.len(),
            expected: n,
        });
    }
    let nonneg = |j: usize| p.nonneg.get(j).copied().unwrap_or(false);
    // column layout: one column per nonnegative variable, a (u, v) pair per
    // free variable, then slacks, then artificials
    let mut pos_col = vec![0usize; n];
    let mut neg_col = vec![None::<usize>; n];
    let mut next = 0;
    for j in 0..n {
        pos_col[j] = next;
        next += 1;
        if !nonneg(j) {
            neg_col[j] = Some(next);
            next += 1;
        }
    }
    let n_eq = p.equalities.len();
    let n_ub = p.inequalities.len();
    let m = n_eq + n_ub;
    let n_struct = next + n_ub;
    let total = n_struct + m;

    let mut a = DMatrix::<f64>::zeros(m, total);
    let mut b = DVector::<f64>::zeros(m);
    for (r, (row, rhs)) in p.equalities.iter().chain(p.inequalities.iter()).enumerate() {
        let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for (j, &coef) in row.iter().enumerate() {
            a[(r, pos_col[j])] = flip * coef;
            if let Some(nc) = neg_col[j] {
                a[(r, nc)] = -flip * coef;
            }
        }
        if r >= n_eq {
            a[(r, next + (r - n_eq))] = flip;
        }
        b[r] = flip * rhs;
        a[(r, n_struct + r)] = 1.0;
    }

    let mut tableau = Tableau::new(a, b, n_struct);
    // Phase 1: drive the artificial variables to zero.
    let mut phase1_cost = vec![0.0; total];
    for slot in phase1_cost.iter_mut().skip(n_struct) {
        *slot = -1.0;
    }
    match tableau.optimize(&phase1_cost, total)? {
        PhaseResult::Optimal => {}
        PhaseResult::Unbounded => return Err(Error::LpNonConvergence),
    }
    if tableau.objective_value(&phase1_cost) < -PHASE1_TOL {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            optimum: f64::NEG_INFINITY,
            witness: Vec::new(),
            dual: Vec::new(),
        });
    }
    tableau.evict_artificials();

    // Phase 2: the real objective over structural columns only.
    let mut cost = vec![0.0; total];
    for j in 0..n {
        cost[pos_col[j]] = p.objective[j];
        if let Some(nc) = neg_col[j] {
            cost[nc] = -p.objective[j];
        }
    }
    match tableau.optimize(&cost, n_struct)? {
        PhaseResult::Optimal => {}
        PhaseResult::Unbounded => {
            return Ok(LpOutcome {
                status: LpStatus::Unbounded,
                optimum: f64::INFINITY,
                witness: Vec::new(),
                dual: Vec::new(),
            });
        }
    }

    let x = tableau.primal_values();
    let witness: Vec<f64> = (0..n)
        .map(|j| x[pos_col[j]] - neg_col[j].map_or(0.0, |nc| x[nc]))
        .collect();
    let optimum: f64 = witness
        .iter()
        .zip(p.objective.iter())
        .map(|(xv, c)| xv * c)
        .sum();
    let dual = tableau.dual_values(&cost);
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        optimum,
        witness,
        dual,
    })
}

enum PhaseResult {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// Current constraint rows, one slot per standard-form column plus rhs.
    rows: DMatrix<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Reduced-cost row for the active phase, updated with each pivot.
    zrow: Vec<f64>,
    /// Copy of the standard-form matrix for dual extraction.
    original: DMatrix<f64>,
    n_struct: usize,
}

impl Tableau {
    fn new(a: DMatrix<f64>, b: DVector<f64>, n_struct: usize) -> Self {
        let m = a.nrows();
        let total = a.ncols();
        let mut rows = DMatrix::zeros(m, total + 1);
        rows.view_mut((0, 0), (m, total)).copy_from(&a);
        for r in 0..m {
            rows[(r, total)] = b[r];
        }
        let basis: Vec<usize> = (n_struct..total).collect();
        let mut in_basis = vec![false; total];
        for &j in &basis {
            in_basis[j] = true;
        }
        Tableau {
            rows,
            basis,
            in_basis,
            zrow: vec![0.0; total + 1],
            original: a,
            n_struct,
        }
    }

    fn total(&self) -> usize {
        self.rows.ncols() - 1
    }

    /// Recompute z_j = c_j - c_B . (B^-1 A)_j for the active cost vector.
    fn reset_zrow(&mut self, cost: &[f64]) {
        let m = self.rows.nrows();
        let width = self.rows.ncols();
        for j in 0..width {
            let mut z = if j < cost.len() { cost[j] } else { 0.0 };
            for r in 0..m {
                let cb = cost[self.basis[r]];
                if cb != 0.0 {
                    z -= cb * self.rows[(r, j)];
                }
            }
            self.zrow[j] = z;
        }
    }

    fn optimize(&mut self, cost: &[f64], col_limit: usize) -> Result<PhaseResult> {
        let m = self.rows.nrows();
        let rhs = self.total();
        self.reset_zrow(cost);
        let mut bland = false;
        let mut stall = 0usize;
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            if bland {
                for j in 0..col_limit {
                    if !self.in_basis[j] && self.zrow[j] > COST_TOL {
                        entering = Some(j);
                        break;
                    }
                }
            } else {
                let mut best = COST_TOL;
                for j in 0..col_limit {
                    if !self.in_basis[j] && self.zrow[j] > best {
                        best = self.zrow[j];
                        entering = Some(j);
                    }
                }
            }
            let Some(enter) = entering else {
                return Ok(PhaseResult::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let coef = self.rows[(r, enter)];
                if coef > PIVOT_TOL {
                    let ratio = self.rows[(r, rhs)] / coef;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio < lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((leave_row, ratio)) = leave else {
                return Ok(PhaseResult::Unbounded);
            };
            if ratio.abs() <= PIVOT_TOL {
                stall += 1;
                if stall >= STALL_LIMIT {
                    bland = true; // anti-cycling: Bland's rule from here on
                }
            } else {
                stall = 0;
            }
            self.pivot(leave_row, enter);
        }
        Err(Error::LpNonConvergence)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let m = self.rows.nrows();
        let width = self.rows.ncols();
        let pivot = self.rows[(r, j)];
        for c in 0..width {
            self.rows[(r, c)] /= pivot;
        }
        for rr in 0..m {
            if rr == r {
                continue;
            }
            let factor = self.rows[(rr, j)];
            if factor != 0.0 {
                for c in 0..width {
                    self.rows[(rr, c)] -= factor * self.rows[(r, c)];
                }
            }
        }
        let zfactor = self.zrow[j];
        if zfactor != 0.0 {
            for c in 0..width {
                self.zrow[c] -= zfactor * self.rows[(r, c)];
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
    }

    /// Pivot remaining basic artificials onto structural columns; rows that
    /// cannot pivot are redundant and are zeroed in place.
    fn evict_artificials(&mut self) {
        let m = self.rows.nrows();
        for r in 0..m {
            if self.basis[r] < self.n_struct {
                continue;
            }
            let mut pivot_col = None;
            for j in 0..self.n_struct {
                if self.rows[(r, j)].abs() > 1e-7 {
                    pivot_col = Some(j);
                    break;
                }
            }
            match pivot_col {
                Some(j) => self.pivot(r, j),
                None => {
                    let width = self.rows.ncols();
                    for c in 0..width {
                        self.rows[(r, c)] = 0.0;
                    }
                }
            }
        }
    }

    fn objective_value(&self, cost: &[f64]) -> f64 {
        let rhs = self.total();
        (0..self.rows.nrows())
            .map(|r| cost[self.basis[r]] * self.rows[(r, rhs)])
            .sum()
    }

    fn primal_values(&self) -> Vec<f64> {
        let rhs = self.total();
        let mut x = vec![0.0; self.total()];
        for (r, &j) in self.basis.iter().enumerate() {
            x[j] = self.rows[(r, rhs)];
        }
        x
    }

    /// Solve B^T y = c_B from the original columns of the current basis.
    fn dual_values(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.rows.nrows();
        let mut bt = DMatrix::<f64>::zeros(m, m);
        let mut cb = DVector::<f64>::zeros(m);
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                bt[(r, i)] = self.original[(i, j)];
            }
            cb[r] = cost[j];
        }
        match bt.lu().solve(&cb) {
            Some(y) => y.iter().copied().collect(),
            None => vec![f64::NAN; m],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_has_full_rank() {
        let m = DMatrix::<f64>::identity(4, 4);
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.rank, 4);
        assert_eq!(r.nullity, 0);
    }

    #[test]
    fn zero_matrix_has_full_nullity() {
        let m = DMatrix::<f64>::zeros(2, 4);
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.rank, 0);
        assert_eq!(r.nullity, 4);
        assert_eq!(r.nullspace.ncols(), 4);
    }

    #[test]
    fn outer_product_has_rank_one() {
        let u = DVector::from_column_slice(&[1.0, -2.0, 0.5]);
        let v = DVector::from_column_slice(&[3.0, 1.0, 2.0]);
        let m = &u * v.transpose();
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.nullity, 2);
        // nullspace columns really are mapped to ~0
        for c in 0..2 {
            let img = &m * r.nullspace.column(c);
            assert!(img.norm() < 1e-12 * r.singular_values[0]);
        }
    }

    #[test]
    fn nullspace_of_wide_complex_matrix() {
        use num_complex::Complex;
        let m = DMatrix::<Complex<f64>>::from_row_slice(
            1,
            3,
            &[
                Complex::new(1.0, 1.0),
                Complex::new(0.0, 2.0),
                Complex::new(-1.0, 0.0),
            ],
        );
        let r = rank_nullspace(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.nullity, 2);
        for c in 0..2 {
            let img = &m * r.nullspace.column(c);
            assert!(img.norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite_entries() {
        let m = DMatrix::<f64>::from_row_slice(1, 2, &[f64::NAN, 1.0]);
        assert!(matches!(
            rank_nullspace(&m, DEFAULT_RANK_TOL),
            Err(Error::NonFiniteEntry)
        ));
    }

    #[test]
    fn lp_simple_bounded_maximum() {
        let p = LpProblem {
            objective: vec![1.0],
            equalities: vec![],
            inequalities: vec![(vec![1.0], 3.0)],
            nonneg: vec![],
        };
        let out = solve_lp(&p).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_relative_eq!(out.optimum, 3.0, epsilon = 1e-9);
        assert_relative_eq!(out.witness[0], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn lp_detects_infeasible_interval() {
        // x >= 1 and x <= 0
        let p = LpProblem {
            objective: vec![0.0],
            equalities: vec![],
            inequalities: vec![(vec![-1.0], -1.0), (vec![1.0], 0.0)],
            nonneg: vec![],
        };
        let out = solve_lp(&p).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
    }

    #[test]
    fn lp_detects_unbounded_ray() {
        let p = LpProblem {
            objective: vec![1.0],
            equalities: vec![],
            inequalities: vec![(vec![-1.0], 0.0)],
            nonneg: vec![],
        };
        let out = solve_lp(&p).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn lp_capped_slacks_of_a_zero_operator_optimize_to_zero() {
        // the one-disk square strut operator has only self-contact rows, so
        // R = 0 and the capped slacks are forced non-positive
        // variables: (p'_x, p'_y, s_1, s_2)
        let p = LpProblem {
            objective: vec![0.0, 0.0, 1.0, 1.0],
            equalities: vec![
                (vec![1.0, 0.0, 0.0, 0.0], 0.0), // sum of p' components is
                (vec![0.0, 1.0, 0.0, 0.0], 0.0), // pinned, one vertex
            ],
            inequalities: vec![
                (vec![0.0, 0.0, 1.0, 0.0], 0.0), // s_k - (R p')_k <= 0
                (vec![0.0, 0.0, 0.0, 1.0], 0.0),
                (vec![0.0, 0.0, 1.0, 0.0], 1.0), // s_k <= 1
                (vec![0.0, 0.0, 0.0, 1.0], 1.0),
            ],
            nonneg: vec![],
        };
        let out = solve_lp(&p).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_relative_eq!(out.optimum, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn lp_respects_equalities_and_negative_rhs() {
        // maximize x + y with x + y = -1, x <= 4  => optimum -1
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            equalities: vec![(vec![1.0, 1.0], -1.0)],
            inequalities: vec![(vec![1.0, 0.0], 4.0)],
            nonneg: vec![],
        };
        let out = solve_lp(&p).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_relative_eq!(out.optimum, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn lp_dual_certifies_optimum_on_random_instances() {
        // deterministic xorshift so the instance set never drifts
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut checked = 0;
        for _ in 0..40 {
            let n = 3;
            let objective: Vec<f64> = (0..n).map(|_| next()).collect();
            let mut inequalities = Vec::new();
            // box constraints keep it bounded
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                inequalities.push((row.clone(), 1.0 + next().abs()));
                row[j] = -1.0;
                inequalities.push((row, 1.0 + next().abs()));
            }
            let mut eq_row: Vec<f64> = (0..n).map(|_| next()).collect();
            eq_row[0] += 2.0; // keep the row well-conditioned
            let equalities = vec![(eq_row, next())];
            let p = LpProblem {
                objective,
                equalities,
                inequalities,
                nonneg: vec![],
            };
            let out = solve_lp(&p).unwrap();
            if out.status != LpStatus::Optimal {
                continue;
            }
            // strong duality: b . y equals the optimum
            let mut dual_obj = 0.0;
            for (r, (_, rhs)) in p
                .equalities
                .iter()
                .chain(p.inequalities.iter())
                .enumerate()
            {
                // rows were sign-flipped when rhs < 0
                let flip = if *rhs < 0.0 { -1.0 } else { 1.0 };
                dual_obj += flip * rhs * out.dual[r];
            }
            assert_relative_eq!(dual_obj, out.optimum, epsilon = 1e-6, max_relative = 1e-6);
            // witness feasibility
            for (row, rhs) in &p.inequalities {
                let lhs: f64 = row.iter().zip(&out.witness).map(|(a, x)| a * x).sum();
                assert!(lhs <= rhs + 1e-8);
            }
            for (row, rhs) in &p.equalities {
                let lhs: f64 = row.iter().zip(&out.witness).map(|(a, x)| a * x).sum();
                assert!((lhs - rhs).abs() <= 1e-8);
            }
            checked += 1;
        }
        assert!(checked >= 20, "want at least 20 optimal instances");
    }
}
