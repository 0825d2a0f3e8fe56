//! Dense matrices over the field of rational functions, plus a small exact
//! rational-number kernel used for sampled ranks and coefficient ansätze.

use std::fmt;

use num_traits::{One, Zero};

use super::poly::Q;
use super::ratfun::Expr;
use super::sample::Sampler;
use super::symbol::Symbol;
use crate::error::ExprError;

#[derive(Clone, PartialEq, Eq)]
pub struct SymbolicMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: SymbolicMatrix,
    /// `pivots[k]` is the pivot column of row `k`.
    pub pivots: Vec<usize>,
}

impl SymbolicMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SymbolicMatrix {
            rows,
            cols,
            data: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymbolicMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    /// Builds from row vectors; an empty row list gives a `0 x cols` matrix.
    pub fn from_rows(rows: Vec<Vec<Expr>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend(row);
        }
        SymbolicMatrix { rows: r, cols, data }
    }

    /// `jac[i][j] = ∂funcs[i]/∂vars[j]`.
    pub fn jacobian(funcs: &[Expr], vars: &[Symbol]) -> Self {
        SymbolicMatrix::from_rows(
            funcs
                .iter()
                .map(|f| vars.iter().map(|v| f.diff(v)).collect())
                .collect(),
            vars.len(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, e: Expr) {
        self.data[r * self.cols + c] = e;
    }

    pub fn row(&self, r: usize) -> &[Expr] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Expr> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Expr>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> SymbolicMatrix {
        let mut t = SymbolicMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn select_rows(&self, idx: &[usize]) -> SymbolicMatrix {
        SymbolicMatrix::from_rows(idx.iter().map(|&i| self.row(i).to_vec()).collect(), self.cols)
    }

    pub fn select_cols(&self, idx: &[usize]) -> SymbolicMatrix {
        SymbolicMatrix::from_rows(
            (0..self.rows)
                .map(|r| idx.iter().map(|&c| self.get(r, c).clone()).collect())
                .collect(),
            idx.len(),
        )
    }

    pub fn mul(&self, other: &SymbolicMatrix) -> SymbolicMatrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = SymbolicMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Expr::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Expr::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if !a.is_zero() && !x.is_zero() {
                        acc = &acc + &(a * x);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    /// Reduced row echelon form. Pivot columns are taken left to right;
    /// among candidate rows the simplest entry is used as pivot.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let best = (r..m.rows)
                .filter(|&i| !m.get(i, c).is_zero())
                .min_by_key(|&i| (m.get(i, c).complexity(), i));
            let Some(p) = best else { continue };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip().expect("nonzero pivot");
            for j in c..m.cols {
                let e = m.get(r, j);
                if !e.is_zero() {
                    let v = e * &inv;
                    m.set(r, j, v);
                }
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in c..m.cols {
                    let prj = m.get(r, j);
                    if prj.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) - &(&factor * prj);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, pivots }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Exact generic rank by symbolic elimination.
    pub fn generic_rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Largest rank seen over the sampler's random evaluations.
    pub fn sampled_rank(&self, sampler: &mut Sampler) -> Result<usize, ExprError> {
        let refs: Vec<&Expr> = self.data.iter().collect();
        let mut best = 0;
        for _ in 0..sampler.trials {
            let vals = sampler.eval_all(&refs)?;
            let rows: Vec<Vec<Q>> = vals.chunks(self.cols.max(1)).map(|c| c.to_vec()).collect();
            best = best.max(q_rank(if self.cols == 0 { Vec::new() } else { rows }));
            if best == self.rows.min(self.cols) {
                break;
            }
        }
        Ok(best)
    }

    /// Basis of `{λ : A λ = 0}`, each vector scaled so that its first
    /// nonzero entry is one.
    pub fn null_space(&self) -> Vec<Vec<Expr>> {
        let Rref { matrix, pivots } = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Expr::zero(); self.cols];
            v[free] = Expr::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -matrix.get(row, free);
            }
            basis.push(normalize_first_nonzero(v));
        }
        basis
    }

    /// A particular solution of `A x = b` with free unknowns set to zero.
    pub fn solve(&self, b: &[Expr]) -> Option<Vec<Expr>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = SymbolicMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let Rref { matrix, pivots } = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![Expr::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = matrix.get(row, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<SymbolicMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = SymbolicMatrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, n + r, Expr::one());
        }
        let Rref { matrix, pivots } = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = SymbolicMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, matrix.get(r, n + c).clone());
            }
        }
        Some(inv)
    }
}

impl fmt::Debug for SymbolicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn normalize_first_nonzero(v: Vec<Expr>) -> Vec<Expr> {
    match v.iter().find(|e| !e.is_zero()) {
        None => v,
        Some(lead) if lead.is_one() => v,
        Some(lead) => {
            let inv = lead.recip().expect("nonzero");
            v.iter().map(|e| e * &inv).collect()
        }
    }
}

/// Null-space basis of `A λ = 0` over the expression field.
///
/// `unknowns` names the components of `λ`; they must not occur in `A`.
pub fn solve_linear_over_field(
    a: &SymbolicMatrix,
    unknowns: &[Symbol],
) -> Result<Vec<Vec<Expr>>, ExprError> {
    if unknowns.len() != a.cols() {
        return Err(ExprError::DimensionMismatch(format!(
            "{} unknowns for {} columns",
            unknowns.len(),
            a.cols()
        )));
    }
    for e in &a.data {
        if let Some(u) = unknowns.iter().find(|u| e.depends_on(u)) {
            return Err(ExprError::DimensionMismatch(format!(
                "unknown `{u}` occurs in the coefficient matrix"
            )));
        }
    }
    Ok(a.null_space())
}

/// Generic rank of a matrix: exact symbolic rank, cross-checked against a
/// sampled rank (which can only under-estimate).
pub fn generic_rank(m: &SymbolicMatrix, sampler: &mut Sampler) -> Result<usize, ExprError> {
    let exact = m.generic_rank();
    let sampled = m.sampled_rank(sampler)?;
    debug_assert!(sampled <= exact, "sampled rank exceeds symbolic rank");
    Ok(exact.max(sampled))
}

// ---- exact rational kernel ----

pub fn q_rref(mut m: Vec<Vec<Q>>) -> (Vec<Vec<Q>>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            let v = &m[r][j] * &inv;
            m[r][j] = v;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let v = &m[i][j] - &f * &m[r][j];
                    m[i][j] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn q_rank(m: Vec<Vec<Q>>) -> usize {
    q_rref(m).1.len()
}

/// Null space over ℚ; each basis vector has a one in its free column.
pub fn q_null_space(m: Vec<Vec<Q>>, cols: usize) -> Vec<Vec<Q>> {
    let (r, pivots) = q_rref(m);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); cols];
            v[free] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][free].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, symbols};

    fn e(s: &str) -> Expr {
        parse(&s.replace(' ', ""), &symbols(&["x1", "x2", "x3", "x4", "x5", "u1", "u2"])).unwrap()
    }

    #[test]
    fn null_space_trivial_cases() {
        let z = SymbolicMatrix::zeros(1, 2);
        let b = solve_linear_over_field(&z, &symbols(&["l1", "l2"])).unwrap();
        assert_eq!(b, vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]]);
        let id = SymbolicMatrix::identity(2);
        assert!(solve_linear_over_field(&id, &symbols(&["l1", "l2"])).unwrap().is_empty());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = SymbolicMatrix::from_rows(
            vec![vec![e("x1"), e("x2+1")], vec![e("u1"), e("x1*x2")]],
            2,
        );
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), SymbolicMatrix::identity(2));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = SymbolicMatrix::from_rows(
            vec![vec![e("x1"), e("x2")], vec![e("x1*u1"), e("x2*u1")]],
            2,
        );
        assert_eq!(m.generic_rank(), 1);
        let mut s = Sampler::new(3);
        assert_eq!(m.sampled_rank(&mut s).unwrap(), 1);
    }

    #[test]
    fn unknowns_must_not_occur() {
        let m = SymbolicMatrix::from_rows(vec![vec![e("x1")]], 1);
        assert!(solve_linear_over_field(&m, &symbols(&["x1"])).is_err());
    }
}
