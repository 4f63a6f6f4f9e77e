//! Exact linear algebra over the rationals.
//!
//! Everything here works with [`Rational`] entries and never rounds. Matrices
//! are stored row-sparse; elimination switches to a dense kernel for narrow
//! matrices, where small algebra degrees produce mostly dense blocks.
//!
//! The [`Subspace`] type carries a basis in reduced form: every basis vector
//! has a distinguished *pivot* coordinate where it is 1 and all other basis
//! vectors are 0. Coordinates of a member vector are then read off directly
//! at the pivots, which is what makes repeated re-expression of products and
//! differentials cheap further up the stack.

use std::fmt;

use num::{BigInt, One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num::BigRational;
pub type QVector = Vec<Rational>;

/// Width below which [`rref`] eliminates on a dense copy.
pub const DENSE_THRESHOLD: usize = 64;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero_vec(n: usize) -> QVector {
    vec![Rational::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> QVector {
    let mut v = zero_vec(n);
    v[i] = Rational::one();
    v
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// `y += c * x`
pub fn axpy(y: &mut [Rational], c: &Rational, x: &[Rational]) {
    debug_assert_eq!(y.len(), x.len());
    if c.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi += c * xi;
        }
    }
}

pub fn scaled(v: &[Rational], c: &Rational) -> QVector {
    v.iter().map(|x| x * c).collect()
}

pub fn add_vec(a: &[Rational], b: &[Rational]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rational], b: &[Rational]) -> QVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Parses `"p"` or `"p/q"` (optionally signed). Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("invalid rational literal {s:?}"));
    if t.is_empty() || t.contains('.') || t.contains('e') || t.contains('E') {
        return Err(bad());
    }
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn bit_cost(r: &Rational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

/// Sparse rational matrix; rows hold `(column, value)` pairs sorted by column
/// with no stored zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, Rational)>>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row_dense(r).iter().map(format_rational).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Vec::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let data = (0..n).map(|i| vec![(i, Rational::one())]).collect();
        QMatrix { rows: n, cols: n, data }
    }

    pub fn from_dense(rows: usize, cols: usize, entries: &[QVector]) -> Self {
        assert_eq!(entries.len(), rows, "row count mismatch");
        let data = entries
            .iter()
            .map(|row| {
                assert_eq!(row.len(), cols, "column count mismatch");
                row.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, x)| (j, x.clone()))
                    .collect()
            })
            .collect();
        QMatrix { rows, cols, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let dense: Vec<QVector> = rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        Self::from_dense(rows.len(), cols, &dense)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[QVector]) -> Self {
        let mut data = vec![Vec::new(); rows];
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                if !x.is_zero() {
                    data[i].push((j, x.clone()));
                }
            }
        }
        QMatrix { rows, cols: columns.len(), data }
    }

    pub fn from_rows(cols: usize, rows: &[QVector]) -> Self {
        Self::from_dense(rows.len(), cols, rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Vec::is_empty)
    }

    pub fn sparse_row(&self, i: usize) -> &[(usize, Rational)] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        match self.data[i].binary_search_by_key(&j, |e| e.0) {
            Ok(pos) => self.data[i][pos].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        let row = &mut self.data[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(pos) => {
                if value.is_zero() {
                    row.remove(pos);
                } else {
                    row[pos].1 = value;
                }
            }
            Err(pos) => {
                if !value.is_zero() {
                    row.insert(pos, (j, value));
                }
            }
        }
    }

    pub fn row_dense(&self, i: usize) -> QVector {
        let mut v = zero_vec(self.cols);
        for (j, x) in &self.data[i] {
            v[*j] = x.clone();
        }
        v
    }

    pub fn column(&self, j: usize) -> QVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_dense(&self) -> Vec<QVector> {
        (0..self.rows).map(|i| self.row_dense(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![Vec::new(); self.cols];
        for (i, row) in self.data.iter().enumerate() {
            for (j, x) in row {
                data[*j].push((i, x.clone()));
            }
        }
        QMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul_vec(&self, v: &[Rational]) -> QVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch in matrix-vector product");
        self.data
            .iter()
            .map(|row| {
                let mut acc = Rational::zero();
                for (j, x) in row {
                    if !v[*j].is_zero() {
                        acc += x * &v[*j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut acc = zero_vec(other.cols);
                for (k, x) in row {
                    for (j, y) in &other.data[*k] {
                        acc[*j] += x * y;
                    }
                }
                acc.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()
            })
            .collect();
        QMatrix { rows: self.rows, cols: other.cols, data }
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| merge_rows(a, b, &Rational::one()))
            .collect();
        QMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        if c.is_zero() {
            return QMatrix::zeros(self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|row| row.iter().map(|(j, x)| (*j, x * c)).collect())
            .collect();
        QMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        self.add(&other.scale(&q(-1)))
    }

    /// `[self | other]`
    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut r = a.clone();
                r.extend(b.iter().map(|(j, x)| (j + self.cols, x.clone())));
                r
            })
            .collect();
        QMatrix { rows: self.rows, cols: self.cols + other.cols, data }
    }

    pub fn vstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Restricts to the given column indices, in that order.
    pub fn select_columns(&self, cols: &[usize]) -> QMatrix {
        let mut pos = vec![usize::MAX; self.cols];
        for (new, &old) in cols.iter().enumerate() {
            pos[old] = new;
        }
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut r: Vec<(usize, Rational)> = row
                    .iter()
                    .filter(|(j, _)| pos[*j] != usize::MAX)
                    .map(|(j, x)| (pos[*j], x.clone()))
                    .collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        QMatrix { rows: self.rows, cols: cols.len(), data }
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }
}

fn merge_rows(a: &[(usize, Rational)], b: &[(usize, Rational)], c: &Rational) -> Vec<(usize, Rational)> {
    // a + c*b
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Result of [`rref`].
#[derive(Clone, Debug)]
pub struct Rref {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub reduced: QMatrix,
}

/// Reduced row-echelon form. Pivot rows are chosen by smallest column, then
/// by smallest entry bit length.
pub fn rref(m: &QMatrix) -> Rref {
    if m.cols < DENSE_THRESHOLD {
        rref_dense(m)
    } else {
        rref_sparse(m)
    }
}

pub(crate) fn rref_dense(m: &QMatrix) -> Rref {
    let mut a = m.to_dense();
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .filter(|&i| !a[i][c].is_zero())
            .min_by_key(|&i| (bit_cost(&a[i][c]), i));
        let Some(p) = best else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut().skip(c) {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = -row[c].clone();
            for j in c..cols {
                if !pivot_row[j].is_zero() {
                    row[j] += &f * &pivot_row[j];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let reduced = QMatrix::from_dense(rows, cols, &a);
    Rref { rank: pivots.len(), pivots, reduced }
}

pub(crate) fn rref_sparse(m: &QMatrix) -> Rref {
    let mut pending: Vec<Vec<(usize, Rational)>> =
        m.data.iter().filter(|r| !r.is_empty()).cloned().collect();
    let mut done: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut pivots = Vec::new();
    loop {
        pending.retain(|r| !r.is_empty());
        let Some(c) = pending.iter().map(|r| r[0].0).min() else { break };
        let p = pending
            .iter()
            .enumerate()
            .filter(|(_, r)| r[0].0 == c)
            .min_by_key(|(i, r)| (bit_cost(&r[0].1), *i))
            .map(|(i, _)| i)
            .expect("pivot candidate");
        let mut prow = pending.swap_remove(p);
        let inv = prow[0].1.recip();
        for e in prow.iter_mut() {
            e.1 *= &inv;
        }
        for row in pending.iter_mut().chain(done.iter_mut()) {
            if let Ok(pos) = row.binary_search_by_key(&c, |e| e.0) {
                let f = -row[pos].1.clone();
                *row = merge_rows(row, &prow, &f);
            }
        }
        done.push(prow);
        pivots.push(c);
    }
    let rank = done.len();
    done.resize(m.rows, Vec::new());
    Rref { rank, pivots, reduced: QMatrix { rows: m.rows, cols: m.cols, data: done } }
}

fn first_nonzero(v: &[Rational]) -> usize {
    v.iter().position(|x| !x.is_zero()).unwrap_or(v.len())
}

/// Basis of the null space, one vector per free column, ordered by first
/// nonzero coordinate.
pub fn kernel_basis(m: &QMatrix) -> Vec<QVector> {
    kernel_with_pivots(m).0
}

/// Kernel basis together with the free column that carries a 1 in each
/// vector (and 0 in every other kernel vector).
fn kernel_with_pivots(m: &QMatrix) -> (Vec<QVector>, Vec<usize>) {
    let rr = rref(m);
    let mut is_pivot = vec![false; m.cols];
    for &p in &rr.pivots {
        is_pivot[p] = true;
    }
    let mut out: Vec<(QVector, usize)> = Vec::new();
    for f in (0..m.cols).filter(|&j| !is_pivot[j]) {
        let mut v = zero_vec(m.cols);
        v[f] = Rational::one();
        for (i, &pc) in rr.pivots.iter().enumerate() {
            let x = rr.reduced.get(i, f);
            if !x.is_zero() {
                v[pc] = -x;
            }
        }
        out.push((v, f));
    }
    out.sort_by_key(|(v, _)| first_nonzero(v));
    out.into_iter().unzip()
}

/// Solves `m x = b`; `Ok(None)` when the system is inconsistent.
pub fn solve(m: &QMatrix, b: &[Rational]) -> Result<Option<QVector>> {
    if b.len() != m.rows {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            m.rows
        )));
    }
    let aug = m.hstack(&QMatrix::from_columns(m.rows, &[b.to_vec()]));
    let rr = rref(&aug);
    if rr.pivots.last() == Some(&m.cols) {
        return Ok(None);
    }
    let mut x = zero_vec(m.cols);
    for (i, &pc) in rr.pivots.iter().enumerate() {
        x[pc] = rr.reduced.get(i, m.cols);
    }
    Ok(Some(x))
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &QMatrix) -> Result<Option<QMatrix>> {
    if m.rows != m.cols {
        return Err(Error::Dimension(format!("cannot invert a {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let rr = rref(&m.hstack(&QMatrix::identity(n)));
    if rr.pivots.iter().any(|&c| c >= n) {
        return Ok(None);
    }
    let cols: Vec<usize> = (n..2 * n).collect();
    let right = rr.reduced.select_columns(&cols);
    let rows: Vec<QVector> = (0..n).map(|i| right.row_dense(i)).collect();
    Ok(Some(QMatrix::from_rows(n, &rows)))
}

/// Standard basis vectors completing `span(sub)` to the ambient space.
pub fn complement_basis(sub: &[QVector], ambient_dim: usize) -> Vec<QVector> {
    let m = QMatrix::from_rows(ambient_dim, sub);
    let rr = rref(&m);
    let mut is_pivot = vec![false; ambient_dim];
    for &p in &rr.pivots {
        is_pivot[p] = true;
    }
    (0..ambient_dim).filter(|&j| !is_pivot[j]).map(|j| unit_vec(ambient_dim, j)).collect()
}

/// A linear subspace of `Q^n` with a pivot-normalized basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<QVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient).map(|i| unit_vec(ambient, i)).collect(),
            pivots: (0..ambient).collect(),
        }
    }

    pub fn span(ambient: usize, vectors: &[QVector]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient);
        }
        let rr = rref(&QMatrix::from_rows(ambient, vectors));
        let basis = (0..rr.rank).map(|i| rr.reduced.row_dense(i)).collect();
        Subspace { ambient, basis, pivots: rr.pivots }
    }

    pub fn kernel(m: &QMatrix) -> Self {
        let (basis, pivots) = kernel_with_pivots(m);
        Subspace { ambient: m.cols, basis, pivots }
    }

    /// Column space of `m`.
    pub fn image(m: &QMatrix) -> Self {
        let t = m.transpose();
        let rows: Vec<QVector> = (0..t.rows()).map(|i| t.row_dense(i)).collect();
        Self::span(m.rows(), &rows)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Ambient-by-dim matrix whose columns are the basis.
    pub fn basis_matrix(&self) -> QMatrix {
        QMatrix::from_columns(self.ambient, &self.basis)
    }

    /// `x` minus its projection along the pivot coordinates; zero iff `x`
    /// lies in the subspace.
    pub fn residual(&self, x: &[Rational]) -> QVector {
        let mut r = x.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            let c = x[p].clone();
            if !c.is_zero() {
                axpy(&mut r, &-c, b);
            }
        }
        r
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        is_zero_vec(&self.residual(x))
    }

    /// Coordinates in the subspace basis, or `None` if `x` is not a member.
    pub fn coords(&self, x: &[Rational]) -> Option<QVector> {
        assert_eq!(x.len(), self.ambient, "ambient dimension mismatch");
        let c: QVector = self.pivots.iter().map(|&p| x[p].clone()).collect();
        let mut r = x.to_vec();
        for (b, ci) in self.basis.iter().zip(&c) {
            if !ci.is_zero() {
                axpy(&mut r, &-ci.clone(), b);
            }
        }
        is_zero_vec(&r).then_some(c)
    }

    pub fn vector(&self, coords: &[Rational]) -> QVector {
        let mut v = zero_vec(self.ambient);
        for (b, c) in self.basis.iter().zip(coords) {
            axpy(&mut v, c, b);
        }
        v
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, &all)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        // a in self with residual_other(a) = 0
        let cols: Vec<QVector> = self.basis.iter().map(|b| other.residual(b)).collect();
        let m = QMatrix::from_columns(self.ambient, &cols);
        let ker = kernel_basis(&m);
        let vecs: Vec<QVector> = ker.iter().map(|c| self.vector(c)).collect();
        Subspace::span(self.ambient, &vecs)
    }

    /// `{x in self : m x in target}`
    pub fn preimage_within(&self, m: &QMatrix, target: &Subspace) -> Subspace {
        let cols: Vec<QVector> = self.basis.iter().map(|b| target.residual(&m.mul_vec(b))).collect();
        let mm = QMatrix::from_columns(m.rows(), &cols);
        let ker = kernel_basis(&mm);
        let vecs: Vec<QVector> = ker.iter().map(|c| self.vector(c)).collect();
        Subspace::span(self.ambient, &vecs)
    }

    pub fn map(&self, m: &QMatrix) -> Subspace {
        let vecs: Vec<QVector> = self.basis.iter().map(|b| m.mul_vec(b)).collect();
        Subspace::span(m.rows(), &vecs)
    }
}

/// The quotient `top / bottom` of nested subspaces, with canonical
/// representatives: basis vectors of `top` outside the reduced span of
/// `bottom`.
#[derive(Clone, Debug)]
pub struct Quotient {
    top: Subspace,
    bottom_in_top: Subspace,
    rep_index: Vec<usize>,
    reps: Vec<QVector>,
}

impl Quotient {
    pub fn new(top: Subspace, bottom: &Subspace) -> Result<Self> {
        let mut inner = Vec::with_capacity(bottom.dim());
        for b in bottom.basis() {
            let c = top.coords(b).ok_or_else(|| {
                Error::Dimension("quotient denominator is not contained in numerator".into())
            })?;
            inner.push(c);
        }
        let bottom_in_top = Subspace::span(top.dim(), &inner);
        let mut used = vec![false; top.dim()];
        for &p in bottom_in_top.pivots() {
            used[p] = true;
        }
        let rep_index: Vec<usize> = (0..top.dim()).filter(|&j| !used[j]).collect();
        let reps = rep_index.iter().map(|&j| top.basis()[j].clone()).collect();
        Ok(Quotient { top, bottom_in_top, rep_index, reps })
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn top(&self) -> &Subspace {
        &self.top
    }

    pub fn reps(&self) -> &[QVector] {
        &self.reps
    }

    /// Class coordinates of `x`, or `None` if `x` is not in the numerator.
    pub fn class_of(&self, x: &[Rational]) -> Option<QVector> {
        let c = self.top.coords(x)?;
        let r = self.bottom_in_top.residual(&c);
        Some(self.rep_index.iter().map(|&j| r[j].clone()).collect())
    }

    pub fn is_trivial_class(&self, x: &[Rational]) -> bool {
        self.class_of(x).map_or(false, |c| is_zero_vec(&c))
    }

    pub fn rep_combination(&self, coords: &[Rational]) -> QVector {
        let mut v = zero_vec(self.top.ambient());
        for (r, c) in self.reps.iter().zip(coords) {
            axpy(&mut v, c, r);
        }
        v
    }
}

/// Checks if a rational has an integer value fitting in `i64`.
pub fn as_small_integer(r: &Rational) -> Option<i64> {
    use num::ToPrimitive;
    r.is_integer().then(|| r.numer().to_i64()).flatten()
}

pub fn abs_max_bits(v: &[Rational]) -> u64 {
    v.iter().map(|x| x.abs().numer().bits()).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_i64(rows)
    }

    #[test]
    fn rref_identity_and_proportional() {
        let r = rref(&QMatrix::identity(2));
        assert_eq!(r.rank, 2);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(rref(&m(&[&[1, 2], &[2, 4]])).rank, 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&QMatrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(&QMatrix::zeros(3, 3)).len(), 3);
        let k = kernel_basis(&m(&[&[1, 1]]));
        assert_eq!(k, vec![vec![q(-1), q(1)]]);
    }

    #[test]
    fn solve_examples() {
        let b = vec![q(3), q(-2)];
        assert_eq!(solve(&QMatrix::identity(2), &b).unwrap(), Some(b.clone()));
        assert_eq!(solve(&m(&[&[1, 2], &[2, 4]]), &[q(1), q(3)]).unwrap(), None);
        assert_eq!(solve(&m(&[&[2]]), &[q(1)]).unwrap(), Some(vec![qf(1, 2)]));
        assert!(matches!(solve(&m(&[&[2]]), &[q(1), q(1)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn complement_examples() {
        let full: Vec<QVector> = (0..3).map(|i| unit_vec(3, i)).collect();
        assert!(complement_basis(&full, 3).is_empty());
        assert_eq!(complement_basis(&[], 2).len(), 2);
        let sub = vec![vec![q(1), q(1), q(0)]];
        let c = complement_basis(&sub, 3);
        assert_eq!(c.len(), 2);
        let mut all = sub.clone();
        all.extend(c);
        assert_eq!(QMatrix::from_rows(3, &all).rank(), 3);
    }

    #[test]
    fn sparse_and_dense_agree_on_wide_matrix() {
        let mut a = QMatrix::zeros(5, 70);
        for i in 0..5 {
            for j in 0..70 {
                if (i * 7 + j * 3) % 5 == 0 {
                    a.set(i, j, qf((i + j) as i64 - 20, (j % 4 + 1) as i64));
                }
            }
        }
        let s = rref_sparse(&a);
        let d = rref_dense(&a);
        assert_eq!(s.pivots, d.pivots);
        assert_eq!(s.reduced, d.reduced);
    }

    #[test]
    fn quotient_reps_and_classes() {
        // top = Q^3, bottom = span(e0 + e1)
        let top = Subspace::full(3);
        let bottom = Subspace::span(3, &[vec![q(1), q(1), q(0)]]);
        let quo = Quotient::new(top, &bottom).unwrap();
        assert_eq!(quo.dim(), 2);
        let c = quo.class_of(&[q(1), q(1), q(0)]).unwrap();
        assert!(is_zero_vec(&c));
        let c = quo.class_of(&[q(0), q(2), q(5)]).unwrap();
        assert!(!is_zero_vec(&c));
    }

    #[test]
    fn parse_literals() {
        assert_eq!(parse_rational("-3/6").unwrap(), qf(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), q(7));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(format_rational(&qf(4, -6)), "-2/3");
    }
}
