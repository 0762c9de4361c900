//! Period lattices, integer sublattices, quotient groups and their
//! characters. Integer work is exact: every product or sum is checked and
//! overflow is reported instead of wrapping.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_rational::Ratio;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// A full-rank period lattice, columns of `basis` are the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    basis: DMatrix<f64>,
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        assert_eq!(basis.nrows(), basis.ncols(), "basis must be square");
        if basis.determinant().abs() < 1e-12 {
            return Err(Error::SingularBasis);
        }
        Ok(Lattice { basis })
    }

    pub fn standard(dim: usize) -> Self {
        Lattice {
            basis: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    pub fn det(&self) -> f64 {
        self.basis.determinant()
    }

    pub fn cell_volume(&self) -> f64 {
        self.det().abs()
    }

    /// Rows of the inverse basis; row j pairs to 1 with generator j and to 0
    /// with the others.
    pub fn dual_rows(&self) -> Result<DMatrix<f64>> {
        self.basis
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBasis)
    }

    /// Cartesian vector of the lattice point with integer coordinates `coeffs`.
    pub fn vector(&self, coeffs: &[i64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        for (j, &c) in coeffs.iter().enumerate() {
            v += self.basis.column(j) * c as f64;
        }
        v
    }
}

fn checked_mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::IntegerOverflow)
}

fn checked_add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::IntegerOverflow)
}

/// Exact determinant by cofactor expansion; fine at lattice dimensions.
fn int_det(m: &DMatrix<i64>) -> Result<i64> {
    let n = m.nrows();
    match n {
        0 => Ok(1),
        1 => Ok(m[(0, 0)]),
        _ => {
            let mut det = 0i64;
            for j in 0..n {
                let mut minor = DMatrix::zeros(n - 1, n - 1);
                for r in 1..n {
                    let mut cc = 0;
                    for c in 0..n {
                        if c == j {
                            continue;
                        }
                        minor[(r - 1, cc)] = m[(r, c)];
                        cc += 1;
                    }
                }
                let term = checked_mul(m[(0, j)], int_det(&minor)?)?;
                let signed = if j % 2 == 0 { term } else { -term };
                det = checked_add(det, signed)?;
            }
            Ok(det)
        }
    }
}

fn int_mat_mul(a: &DMatrix<i64>, b: &DMatrix<i64>) -> Result<DMatrix<i64>> {
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for r in 0..a.nrows() {
        for c in 0..b.ncols() {
            let mut acc = 0i64;
            for k in 0..a.ncols() {
                acc = checked_add(acc, checked_mul(a[(r, k)], b[(k, c)])?)?;
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Finite-index sublattice, columns of `coeffs` are generators in lattice
/// coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sublattice {
    coeffs: DMatrix<i64>,
}

impl Sublattice {
    pub fn new(coeffs: DMatrix<i64>) -> Result<Self> {
        assert_eq!(coeffs.nrows(), coeffs.ncols(), "coeffs must be square");
        if int_det(&coeffs)? == 0 {
            return Err(Error::SingularSublattice);
        }
        Ok(Sublattice { coeffs })
    }

    pub fn identity(dim: usize) -> Self {
        Sublattice {
            coeffs: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_columns(cols: &[&[i64]]) -> Result<Self> {
        let dim = cols.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), dim);
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Sublattice::new(m)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeffs(&self) -> &DMatrix<i64> {
        &self.coeffs
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.coeffs.column(j).iter().copied().collect()
    }

    /// |det|, the order of the quotient group.
    pub fn index(&self) -> i64 {
        int_det(&self.coeffs).expect("index fits i64 by construction").abs()
    }
}

/// Quotient Z^d / S Z^d in invariant-factor form, with the unimodular
/// transforms that realize `left * S * right = diag(factors)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGroup {
    pub factors: Vec<i64>,
    pub left: DMatrix<i64>,
    pub right: DMatrix<i64>,
}

/// Smith normal form with divisibility chain d_1 | d_2 | ... and positive
/// diagonal. Transforms are built alongside and have determinant +-1.
pub fn smith_normal_form(s: &Sublattice) -> Result<QuotientGroup> {
    let n = s.dim();
    let mut a = s.coeffs.clone();
    let mut left = DMatrix::<i64>::identity(n, n);
    let mut right = DMatrix::<i64>::identity(n, n);

    for k in 0..n {
        loop {
            // move the entry of smallest nonzero magnitude into (k, k)
            let mut best: Option<(usize, usize)> = None;
            for r in k..n {
                for c in k..n {
                    let v = a[(r, c)].abs();
                    if v != 0 && best.is_none_or(|(br, bc)| v < a[(br, bc)].abs()) {
                        best = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = best else {
                break; // trailing block is zero
            };
            if pr != k {
                a.swap_rows(pr, k);
                left.swap_rows(pr, k);
            }
            if pc != k {
                a.swap_columns(pc, k);
                right.swap_columns(pc, k);
            }
            let pivot = a[(k, k)];
            let mut clean = true;
            for r in k + 1..n {
                let q = a[(r, k)].div_euclid(pivot);
                if q != 0 {
                    row_op(&mut a, &mut left, r, k, q)?;
                }
                if a[(r, k)] != 0 {
                    clean = false;
                }
            }
            for c in k + 1..n {
                let q = a[(k, c)].div_euclid(pivot);
                if q != 0 {
                    col_op(&mut a, &mut right, c, k, q)?;
                }
                if a[(k, c)] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue; // remainders became new, smaller pivot candidates
            }
            // force divisibility: pivot must divide the trailing block
            let mut offender = None;
            'scan: for r in k + 1..n {
                for c in k + 1..n {
                    if a[(r, c)] % pivot != 0 {
                        offender = Some(r);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(r) => {
                    // add the offending row to row k and restart the pivot
                    for c in 0..n {
                        a[(k, c)] = checked_add(a[(k, c)], a[(r, c)])?;
                        left[(k, c)] = checked_add(left[(k, c)], left[(r, c)])?;
                    }
                }
                None => break,
            }
        }
    }

    // normalize diagonal signs by flipping rows
    for k in 0..n {
        if a[(k, k)] < 0 {
            for c in 0..n {
                a[(k, c)] = -a[(k, c)];
                left[(k, c)] = -left[(k, c)];
            }
        }
    }
    let factors: Vec<i64> = (0..n).map(|k| a[(k, k)]).collect();
    debug_assert!(factors.windows(2).all(|w| w[1] % w[0] == 0));

    let q = QuotientGroup {
        factors,
        left,
        right,
    };
    debug_assert_eq!(
        int_mat_mul(&int_mat_mul(&q.left, s.coeffs())?, &q.right)?,
        DMatrix::from_diagonal(&DVector::from_vec(q.factors.clone()))
    );
    Ok(q)
}

fn row_op(a: &mut DMatrix<i64>, track: &mut DMatrix<i64>, r: usize, k: usize, q: i64) -> Result<()> {
    for c in 0..a.ncols() {
        a[(r, c)] = checked_add(a[(r, c)], -checked_mul(q, a[(k, c)])?)?;
        track[(r, c)] = checked_add(track[(r, c)], -checked_mul(q, track[(k, c)])?)?;
    }
    Ok(())
}

fn col_op(a: &mut DMatrix<i64>, track: &mut DMatrix<i64>, c: usize, k: usize, q: i64) -> Result<()> {
    for r in 0..a.nrows() {
        a[(r, c)] = checked_add(a[(r, c)], -checked_mul(q, a[(r, k)])?)?;
        track[(r, c)] = checked_add(track[(r, c)], -checked_mul(q, track[(r, k)])?)?;
    }
    Ok(())
}

/// Column-style Hermite normal form H = S * V with V unimodular: H is lower
/// triangular with positive diagonal and 0 <= H[i][j] < H[i][i] for j < i.
pub fn hermite_normal_form(s: &Sublattice) -> Result<DMatrix<i64>> {
    let n = s.dim();
    let mut h = s.coeffs.clone();
    for i in 0..n {
        // clear row i to the right of the pivot with column gcd steps
        loop {
            let mut smallest: Option<usize> = None;
            for j in i..n {
                if h[(i, j)] != 0
                    && smallest.is_none_or(|sj| h[(i, j)].abs() < h[(i, sj)].abs())
                {
                    smallest = Some(j);
                }
            }
            let pivot_col = smallest.ok_or(Error::SingularSublattice)?;
            if pivot_col != i {
                h.swap_columns(pivot_col, i);
            }
            let pivot = h[(i, i)];
            let mut done = true;
            for j in i + 1..n {
                let q = h[(i, j)].div_euclid(pivot);
                if q != 0 {
                    for r in 0..n {
                        h[(r, j)] = checked_add(h[(r, j)], -checked_mul(q, h[(r, i)])?)?;
                    }
                }
                if h[(i, j)] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(i, i)] < 0 {
            for r in 0..n {
                h[(r, i)] = -h[(r, i)];
            }
        }
        // reduce entries left of the pivot into [0, pivot)
        let pivot = h[(i, i)];
        for j in 0..i {
            let q = h[(i, j)].div_euclid(pivot);
            if q != 0 {
                for r in 0..n {
                    h[(r, j)] = checked_add(h[(r, j)], -checked_mul(q, h[(r, i)])?)?;
                }
            }
        }
    }
    Ok(h)
}

/// All Hermite-form sublattices of the given index, each lattice exactly once.
/// For dim 2 the count is the divisor sum sigma(index).
pub fn enumerate_sublattices(dim: usize, index: i64) -> Result<Vec<Sublattice>> {
    if index <= 0 {
        return Err(Error::NonPositiveIndex(index));
    }
    let mut diagonals = Vec::new();
    fill_diagonals(dim, index, &mut Vec::new(), &mut diagonals);
    let mut out = Vec::new();
    for diag in diagonals {
        let mut h = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            h[(i, i)] = diag[i];
        }
        fill_off_diagonals(&mut h, &diag, 1, 0, &mut out)?;
    }
    Ok(out)
}

fn fill_diagonals(dim: usize, remaining: i64, acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if acc.len() == dim {
        if remaining == 1 {
            out.push(acc.clone());
        }
        return;
    }
    let mut d = 1;
    while d <= remaining {
        if remaining % d == 0 {
            acc.push(d);
            fill_diagonals(dim, remaining / d, acc, out);
            acc.pop();
        }
        d += 1;
    }
}

/// Walk the below-diagonal digit positions (row i, col j < i) in order,
/// emitting one matrix per digit assignment 0 <= h_ij < h_ii.
fn fill_off_diagonals(
    h: &mut DMatrix<i64>,
    diag: &[i64],
    row: usize,
    col: usize,
    out: &mut Vec<Sublattice>,
) -> Result<()> {
    let n = diag.len();
    if row == n {
        out.push(Sublattice::new(h.clone())?);
        return Ok(());
    }
    let (next_row, next_col) = if col + 1 < row {
        (row, col + 1)
    } else {
        (row + 1, 0)
    };
    for v in 0..diag[row] {
        h[(row, col)] = v;
        fill_off_diagonals(h, diag, next_row, next_col, out)?;
    }
    h[(row, col)] = 0;
    Ok(())
}

/// Coset representatives of Z^d / S Z^d: the Hermite digit set
/// 0 <= x_i < H[i][i].
pub fn transversal(s: &Sublattice) -> Result<Vec<Vec<i64>>> {
    let h = hermite_normal_form(s)?;
    let n = s.dim();
    let mut reps = vec![vec![0i64; n]];
    for i in 0..n {
        let mut next = Vec::with_capacity(reps.len() * h[(i, i)] as usize);
        for rep in &reps {
            for digit in 0..h[(i, i)] {
                let mut r = rep.clone();
                r[i] = digit;
                next.push(r);
            }
        }
        reps = next;
    }
    debug_assert_eq!(reps.len() as i64, s.index());
    Ok(reps)
}

/// Reduce a lattice vector to its transversal representative and the
/// sublattice coordinates of the difference: x = rep + S * quot.
pub fn reduce_mod_sublattice(s: &Sublattice, x: &[i64]) -> Result<(Vec<i64>, Vec<i64>)> {
    let h = hermite_normal_form(s)?;
    let n = s.dim();
    let mut rep: Vec<i64> = x.to_vec();
    let mut h_quot = vec![0i64; n];
    // H is lower triangular, so reduce coordinates top-down
    for i in 0..n {
        let q = rep[i].div_euclid(h[(i, i)]);
        h_quot[i] = q;
        if q != 0 {
            for r in 0..n {
                rep[r] = checked_add(rep[r], -checked_mul(q, h[(r, i)])?)?;
            }
        }
    }
    // translate H-coordinates of the shift into S-coordinates: S q_s = H q_h
    let hv = {
        let mut v = vec![0i64; n];
        for r in 0..n {
            for c in 0..n {
                v[r] = checked_add(v[r], checked_mul(h[(r, c)], h_quot[c])?)?;
            }
        }
        v
    };
    let quot = solve_integer_system(s.coeffs(), &hv)?;
    Ok((rep, quot))
}

/// Solve S q = v exactly over the integers via Cramer's rule.
fn solve_integer_system(s: &DMatrix<i64>, v: &[i64]) -> Result<Vec<i64>> {
    let n = s.nrows();
    let det = int_det(s)?;
    let mut q = vec![0i64; n];
    for (j, slot) in q.iter_mut().enumerate() {
        let mut m = s.clone();
        for r in 0..n {
            m[(r, j)] = v[r];
        }
        let num = int_det(&m)?;
        debug_assert_eq!(num % det, 0, "rhs must lie in the sublattice");
        *slot = num / det;
    }
    Ok(q)
}

/// A character of the quotient group, stored as exact rational turns per
/// lattice generator so root-of-unity identities hold exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientCharacter {
    turns: Vec<Ratio<i64>>,
}

impl QuotientCharacter {
    pub fn trivial(dim: usize) -> Self {
        QuotientCharacter {
            turns: vec![Ratio::new(0, 1); dim],
        }
    }

    /// Build directly from turn fractions (used by the spectrum grid).
    pub fn from_turns(turns: Vec<Ratio<i64>>) -> Self {
        QuotientCharacter {
            turns: turns.into_iter().map(reduce_turn).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.turns.len()
    }

    pub fn turns(&self) -> &[Ratio<i64>] {
        &self.turns
    }

    pub fn is_trivial(&self) -> bool {
        self.turns.iter().all(|t| *t == Ratio::new(0, 1))
    }

    /// Unit-modulus phase of each lattice generator.
    pub fn generator_phases(&self) -> Vec<Complex<f64>> {
        self.turns.iter().map(|t| turn_to_phase(*t)).collect()
    }

    /// Exact turn fraction of rho at an integer lattice vector.
    pub fn eval_turns(&self, offset: &[i64]) -> Ratio<i64> {
        let mut acc = Ratio::new(0, 1);
        for (t, &o) in self.turns.iter().zip(offset) {
            acc += *t * Ratio::from_integer(o);
        }
        reduce_turn(acc)
    }

    /// rho(lambda) as a complex number.
    pub fn eval(&self, offset: &[i64]) -> Complex<f64> {
        turn_to_phase(self.eval_turns(offset))
    }
}

fn reduce_turn(t: Ratio<i64>) -> Ratio<i64> {
    let one = Ratio::from_integer(1);
    let mut r = t - (t.floor());
    if r >= one {
        r -= one;
    }
    r
}

fn turn_to_phase(t: Ratio<i64>) -> Complex<f64> {
    let angle = TAU * (*t.numer() as f64) / (*t.denom() as f64);
    Complex::new(angle.cos(), angle.sin())
}

/// All characters of Z^d / S Z^d, trivial character first, deterministic
/// order. If `left * S * right = diag(d_1..d_n)`, the character indexed by
/// digits (j_1..j_n) sends generator m to exp(2 pi i sum_l j_l L[l][m] / d_l).
pub fn enumerate_characters(q: &QuotientGroup, s: &Sublattice) -> Vec<QuotientCharacter> {
    let n = s.dim();
    let mut digit_sets: Vec<Vec<i64>> = vec![vec![0; n]];
    for l in 0..n {
        let mut next = Vec::new();
        for digits in &digit_sets {
            for j in 0..q.factors[l] {
                let mut d = digits.clone();
                d[l] = j;
                next.push(d);
            }
        }
        digit_sets = next;
    }
    let mut chars = Vec::with_capacity(digit_sets.len());
    for digits in digit_sets {
        let mut turns = Vec::with_capacity(n);
        for m in 0..n {
            let mut t = Ratio::new(0, 1);
            for (l, &digit) in digits.iter().enumerate() {
                t += Ratio::new(digit * q.left[(l, m)], q.factors[l]);
            }
            turns.push(reduce_turn(t));
        }
        chars.push(QuotientCharacter { turns });
    }
    // trivial character first, then lexicographic by turns
    chars.sort_by(|a, b| {
        b.is_trivial()
            .cmp(&a.is_trivial())
            .then_with(|| a.turns.cmp(&b.turns))
    });
    chars.dedup();
    debug_assert_eq!(chars.len() as i64, s.index());
    chars
}

/// Divisor sum, the expected sublattice count in dimension 2.
pub fn divisor_sum(m: i64) -> i64 {
    (1..=m).filter(|d| m % d == 0).sum()
}
