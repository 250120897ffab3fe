//! Exact linear algebra over the rationals.
//!
//! [`RationalMatrix`] is a plain dense grid. Elimination goes through
//! [`Echelon`], which keeps rows sparse and reduces each row as it is inserted,
//! so that large, highly redundant systems (the symmetry solver produces
//! thousands of mostly-zero rows) never have to be stored densely.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Rational;

pub type Vector = Vec<Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have `cols` entries.
    pub fn from_rows(cols: usize, rows: Vec<Vector>) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        let nrows = rows.len();
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            entries.extend(r);
        }
        Ok(RationalMatrix {
            rows: nrows,
            cols,
            entries,
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect())
            .collect();
        Self::from_rows(cols, data).expect("rectangular input")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if other.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.cols);
        for r in 0..self.rows {
            e.push_dense(self.row(r));
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn determinant(&self) -> Result<Rational> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut a: Vec<Vec<Rational>> = (0..n).map(|r| self.row(r).to_vec()).collect();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            let pivot = a[c][c].clone();
            det *= &pivot;
            for r in c + 1..n {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] / &pivot;
                for k in c..n {
                    let delta = &f * &a[c][k];
                    a[r][k] -= delta;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<RationalMatrix> {
        let n = self.rows;
        if n != self.cols {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.cols,
            });
        }
        let mut out = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = Rational::one();
            let (x, kernel) = solve_inhomogeneous(self, &e)?.ok_or(Error::Singular)?;
            if !kernel.is_empty() {
                return Err(Error::Singular);
            }
            for (i, v) in x.into_iter().enumerate() {
                out.set(i, j, v);
            }
        }
        Ok(out)
    }
}

pub type SparseRow = BTreeMap<usize, Rational>;

/// Incremental row-echelon form over sparse rows.
///
/// Every inserted row is reduced against the current pivots; rows that reduce
/// to zero are discarded. [`Echelon::reduce`] back-substitutes to the unique
/// reduced row-echelon form.
#[derive(Debug, Clone)]
pub struct Echelon {
    cols: usize,
    /// pivot column -> row with leading 1 at that column
    pivots: BTreeMap<usize, SparseRow>,
    reduced: bool,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon {
            cols,
            pivots: BTreeMap::new(),
            reduced: true,
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn push_dense(&mut self, row: &[Rational]) -> bool {
        let sparse = row
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i, v.clone()))
            .collect();
        self.push(sparse)
    }

    /// Inserts a sparse row. Returns true when it increased the rank.
    pub fn push(&mut self, mut row: SparseRow) -> bool {
        row.retain(|_, v| !v.is_zero());
        debug_assert!(row.keys().all(|&c| c < self.cols));
        loop {
            let Some((&lead, _)) = row.iter().next() else {
                return false;
            };
            match self.pivots.get(&lead) {
                Some(prow) => {
                    let factor = row.remove(&lead).unwrap();
                    for (&c, v) in prow.iter().skip(1) {
                        let delta = &factor * v;
                        let entry = row.entry(c).or_insert_with(Rational::zero);
                        *entry -= delta;
                        if entry.is_zero() {
                            row.remove(&c);
                        }
                    }
                }
                None => {
                    let inv = Rational::one() / &row[&lead];
                    for v in row.values_mut() {
                        *v *= &inv;
                    }
                    self.pivots.insert(lead, row);
                    self.reduced = false;
                    return true;
                }
            }
        }
    }

    /// Back-substitutes so every pivot column is zero outside its pivot row.
    pub fn reduce(&mut self) {
        if self.reduced {
            return;
        }
        let cols: Vec<usize> = self.pivots.keys().rev().copied().collect();
        for &c in &cols {
            let prow = self.pivots[&c].clone();
            for (_, row) in self.pivots.range_mut(..c) {
                let Some(factor) = row.remove(&c) else { continue };
                for (&k, v) in prow.iter().skip(1) {
                    let delta = &factor * v;
                    let entry = row.entry(k).or_insert_with(Rational::zero);
                    *entry -= delta;
                    if entry.is_zero() {
                        row.remove(&k);
                    }
                }
            }
        }
        self.reduced = true;
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Reduced rows in ascending pivot order.
    pub fn reduced_rows(&mut self) -> Vec<(usize, SparseRow)> {
        self.reduce();
        self.pivots.iter().map(|(c, r)| (*c, r.clone())).collect()
    }

    /// Kernel basis in reduced echelon normal form: the basis vectors, taken as
    /// rows, form the unique reduced row-echelon matrix of the kernel.
    pub fn kernel(&mut self) -> Vec<Vector> {
        self.kernel_of_first(self.cols)
    }

    /// Kernel restricted to the first `ncols` columns (an augmented column, if
    /// any, sits after them and is ignored).
    fn kernel_of_first(&mut self, ncols: usize) -> Vec<Vector> {
        self.reduce();
        let mut out = Vec::new();
        for free in (0..ncols).filter(|c| !self.pivots.contains_key(c)) {
            let mut v = vec![Rational::zero(); ncols];
            v[free] = Rational::one();
            for (&pc, row) in &self.pivots {
                if pc >= ncols {
                    break;
                }
                if let Some(x) = row.get(&free) {
                    v[pc] = -x.clone();
                }
            }
            out.push(v);
        }
        canonical_basis(ncols, out)
    }

    /// Reduced rows densified, in ascending pivot order.
    pub fn dense_rows(&mut self) -> Vec<Vector> {
        self.reduce();
        self.pivots
            .values()
            .map(|row| {
                let mut v = vec![Rational::zero(); self.cols];
                for (&c, x) in row {
                    v[c] = x.clone();
                }
                v
            })
            .collect()
    }
}

/// Reduced row-echelon form of the span of `vectors`.
pub fn canonical_basis(ncols: usize, vectors: Vec<Vector>) -> Vec<Vector> {
    let mut e = Echelon::new(ncols);
    for v in &vectors {
        e.push_dense(v);
    }
    e.dense_rows()
}

/// Exact basis of `{v : M v = 0}` in reduced echelon normal form.
pub fn nullspace(m: &RationalMatrix) -> Vec<Vector> {
    m.echelon().kernel()
}

/// Solves `M x = b`. Returns `None` when the system is inconsistent; otherwise a
/// particular solution (free variables set to zero) and a kernel basis.
pub fn solve_inhomogeneous(m: &RationalMatrix, b: &[Rational]) -> Result<Option<(Vector, Vec<Vector>)>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: b.len(),
        });
    }
    let n = m.cols();
    let mut e = Echelon::new(n + 1);
    for r in 0..m.rows() {
        let mut row: SparseRow = m
            .row(r)
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i, v.clone()))
            .collect();
        if !b[r].is_zero() {
            row.insert(n, b[r].clone());
        }
        e.push(row);
    }
    Ok(solve_augmented(&mut e, n))
}

/// Reads off a solution from an echelon form whose column `n` is the right-hand side.
pub(crate) fn solve_augmented(e: &mut Echelon, n: usize) -> Option<(Vector, Vec<Vector>)> {
    if e.pivots.contains_key(&n) {
        return None;
    }
    e.reduce();
    let mut x = vec![Rational::zero(); n];
    for (&pc, row) in &e.pivots {
        if let Some(v) = row.get(&n) {
            x[pc] = v.clone();
        }
    }
    let kernel = e.kernel_of_first(n);
    Some((x, kernel))
}

/// A certificate of inconsistency for `M x = b`: a vector `y` with `yᵀM = 0` and
/// `yᵀb ≠ 0`, or `None` when the system is consistent.
pub fn inconsistency_certificate(m: &RationalMatrix, b: &[Rational]) -> Result<Option<Vector>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: b.len(),
        });
    }
    let left = nullspace(&m.transpose());
    Ok(left
        .into_iter()
        .find(|y| y.iter().zip(b).fold(Rational::zero(), |acc, (a, c)| acc + a * c) != Rational::zero()))
}
