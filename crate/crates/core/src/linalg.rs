//! Dense exact linear algebra over a finite field.
//!
//! Pivoting is deterministic (first nonzero entry, scanning columns left to
//! right), so reduced row echelon forms are canonical and subspaces compare by
//! their basis matrices.

use std::sync::atomic::{AtomicUsize, Ordering};
use rayon::prelude::*;
use thiserror::Error;

use crate::gf::{Fe, Field};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("system has no solution")]
    NoSolution,
    #[error("first subspace is not contained in the second")]
    NotSubspace,
    #[error("operands belong to different fields")]
    MixedFields,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|&x| self.field.format(x)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Multiplication algorithm selector for [`Matrix::matmul`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MulStrategy {
    Naive,
    /// Strassen recursion with the given crossover; blocks at or below it use the naive product.
    Strassen { crossover: usize },
    /// Strassen only when every dimension exceeds the crossover.
    Auto { crossover: usize },
}

pub const DEFAULT_CROSSOVER: usize = 64;

static CROSSOVER: AtomicUsize = AtomicUsize::new(DEFAULT_CROSSOVER);

/// Sets the crossover used by `MulStrategy::default()` process-wide.
pub fn set_default_crossover(n: usize) {
    CROSSOVER.store(n.max(1), Ordering::Relaxed);
}

pub fn default_crossover() -> usize {
    CROSSOVER.load(Ordering::Relaxed)
}

impl Default for MulStrategy {
    fn default() -> Self {
        MulStrategy::Auto {
            crossover: default_crossover(),
        }
    }
}

impl Matrix {
    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_vec(field: &Field, rows: usize, cols: usize, data: Vec<Fe>) -> Matrix {
        assert_eq!(rows * cols, data.len(), "matrix data length");
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data,
        }
    }

    /// Stacks equal-length rows; `cols` is needed when `rows` is empty.
    pub fn from_rows(field: &Field, cols: usize, rows: &[Vec<Fe>]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length");
            data.extend_from_slice(r);
        }
        Matrix::from_vec(field, rows.len(), cols, data)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Fe] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Rows `self` followed by rows of `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_field(other)?;
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "vstack {} vs {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix::from_vec(&self.field, self.rows + other.rows, self.cols, data))
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_field(other)?;
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "hstack {} vs {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Ok(Matrix::from_vec(&self.field, self.rows, cols, data))
    }

    pub fn select_cols(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(&self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let data = rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect();
        Matrix::from_vec(&self.field, rows.len(), self.cols, data)
    }

    fn same_field(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.field.same(&other.field) {
            Ok(())
        } else {
            Err(LinalgError::MixedFields)
        }
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let f = &self.field;
        Ok((0..self.rows).map(|r| dot(f, self.row(r), v)).collect())
    }

    /// `v · self` for a row vector `v`.
    pub fn vec_mul(&self, v: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
        if v.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector of length {} times {}x{}",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.cols];
        for (r, &c) in v.iter().enumerate() {
            if !c.is_zero() {
                axpy(f, &mut out, c, self.row(r));
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form, pivot columns and rank.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..cols {
                    self.data.swap(pr * cols + j, r * cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("pivot is nonzero");
            if inv != Fe::ONE {
                for x in self.row_mut(r)[c..].iter_mut() {
                    *x = f.mul(*x, inv);
                }
            }
            let pivot_row: Vec<Fe> = self.row(r)[c..].to_vec();
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                let neg = f.neg(factor);
                let row = &mut self.data[i * cols + c..(i + 1) * cols];
                axpy(&f, row, neg, &pivot_row);
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Basis of `{x : self · x = 0}`.
    pub fn kernel(&self) -> Subspace {
        let (red, pivots) = self.rref();
        let f = &self.field;
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Fe::ZERO; self.cols];
            v[free] = Fe::ONE;
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = f.neg(red.get(i, free));
            }
            basis.push(v);
        }
        Subspace::from_rows(f, self.cols, &basis)
    }

    /// Left kernel `{x : x · self = 0}`.
    pub fn left_kernel(&self) -> Subspace {
        self.transpose().kernel()
    }

    /// A solution of `self · x = b` with zeros in all non-pivot coordinates.
    pub fn solve_particular(&self, b: &[Fe]) -> Result<Vec<Fe>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let col = Matrix::from_vec(&self.field, self.rows, 1, b.to_vec());
        let aug = self.hstack(&col)?;
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Err(LinalgError::NoSolution);
        }
        let mut x = vec![Fe::ZERO; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = red.get(i, self.cols);
        }
        Ok(x)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::DimensionMismatch("matrix sum".into()));
        }
        let f = &self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix::from_vec(f, self.rows, self.cols, data))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::DimensionMismatch("matrix difference".into()));
        }
        let f = &self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.sub(a, b))
            .collect();
        Ok(Matrix::from_vec(f, self.rows, self.cols, data))
    }

    pub fn matmul(&self, other: &Matrix, strategy: MulStrategy) -> Result<Matrix, LinalgError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(match strategy {
            MulStrategy::Naive => naive_mul(self, other),
            MulStrategy::Strassen { crossover } => strassen_mul(self, other, crossover.max(1)),
            MulStrategy::Auto { crossover } => {
                let c = crossover.max(1);
                if self.rows > c && self.cols > c && other.cols > c {
                    strassen_mul(self, other, c)
                } else {
                    naive_mul(self, other)
                }
            }
        })
    }

    /// Copy of rows `r0..r0+h`, cols `c0..c0+w`, zero-padded past the edges.
    fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        let mut out = Matrix::zeros(&self.field, h, w);
        for i in 0..h.min(self.rows.saturating_sub(r0)) {
            let src_w = w.min(self.cols.saturating_sub(c0));
            let src = &self.data[(r0 + i) * self.cols + c0..(r0 + i) * self.cols + c0 + src_w];
            out.data[i * w..i * w + src_w].copy_from_slice(src);
        }
        out
    }
}

#[inline]
pub(crate) fn dot(f: &Field, a: &[Fe], b: &[Fe]) -> Fe {
    let mut acc = Fe::ZERO;
    for (&x, &y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = f.add(acc, f.mul(x, y));
        }
    }
    acc
}

/// `y += c · x`.
#[inline]
pub(crate) fn axpy(f: &Field, y: &mut [Fe], c: Fe, x: &[Fe]) {
    if c.is_zero() {
        return;
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = f.add(*yi, f.mul(c, xi));
        }
    }
}

fn naive_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let f = &a.field;
    let mut out = Matrix::zeros(f, a.rows, b.cols);
    let cols = b.cols;
    out.data
        .par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(r, out_row)| {
            if cols == 0 {
                return;
            }
            for (k, &c) in a.row(r).iter().enumerate() {
                axpy(f, out_row, c, b.row(k));
            }
        });
    out
}

fn strassen_mul(a: &Matrix, b: &Matrix, crossover: usize) -> Matrix {
    let dim = a.rows.max(a.cols).max(b.cols).max(1);
    let size = dim.next_power_of_two();
    let ap = a.block(0, 0, size, size);
    let bp = b.block(0, 0, size, size);
    let full = strassen_square(&ap, &bp, crossover);
    full.block(0, 0, a.rows, b.cols)
}

fn strassen_square(a: &Matrix, b: &Matrix, crossover: usize) -> Matrix {
    let n = a.rows;
    if n <= crossover || n % 2 == 1 {
        return naive_mul(a, b);
    }
    let h = n / 2;
    let (a11, a12, a21, a22) = (a.block(0, 0, h, h), a.block(0, h, h, h), a.block(h, 0, h, h), a.block(h, h, h, h));
    let (b11, b12, b21, b22) = (b.block(0, 0, h, h), b.block(0, h, h, h), b.block(h, 0, h, h), b.block(h, h, h, h));
    let s = |x: &Matrix, y: &Matrix| x.add(y).expect("same shape");
    let d = |x: &Matrix, y: &Matrix| x.sub(y).expect("same shape");
    let operands = [
        (s(&a11, &a22), s(&b11, &b22)),
        (s(&a21, &a22), b11.clone()),
        (a11.clone(), d(&b12, &b22)),
        (a22.clone(), d(&b21, &b11)),
        (s(&a11, &a12), b22.clone()),
        (d(&a21, &a11), s(&b11, &b12)),
        (d(&a12, &a22), s(&b21, &b22)),
    ];
    let m: Vec<Matrix> = operands
        .par_iter()
        .map(|(x, y)| strassen_square(x, y, crossover))
        .collect();
    let c11 = s(&d(&s(&m[0], &m[3]), &m[4]), &m[6]);
    let c12 = s(&m[2], &m[4]);
    let c21 = s(&m[1], &m[3]);
    let c22 = s(&s(&d(&m[0], &m[1]), &m[2]), &m[5]);
    let mut out = Matrix::zeros(&a.field, n, n);
    for i in 0..h {
        out.data[i * n..i * n + h].copy_from_slice(c11.row(i));
        out.data[i * n + h..(i + 1) * n].copy_from_slice(c12.row(i));
        out.data[(i + h) * n..(i + h) * n + h].copy_from_slice(c21.row(i));
        out.data[(i + h) * n + h..(i + h + 1) * n].copy_from_slice(c22.row(i));
    }
    out
}

/// A linear subspace of `field^ambient`, stored by its canonical RREF basis.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
    pivots: Vec<usize>,
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subspace(dim {} in {}) {:?}", self.dim(), self.ambient, self.basis)
    }
}

impl Subspace {
    pub fn zero(field: &Field, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::zeros(field, 0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: &Field, ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: Matrix::identity(field, ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Row space of the given vectors.
    pub fn from_rows(field: &Field, ambient: usize, rows: &[Vec<Fe>]) -> Subspace {
        Subspace::row_space(&Matrix::from_rows(field, ambient, rows))
    }

    pub fn row_space(m: &Matrix) -> Subspace {
        let (red, pivots) = m.rref();
        let keep: Vec<usize> = (0..pivots.len()).collect();
        Subspace {
            ambient: m.cols,
            basis: red.select_rows(&keep),
            pivots,
        }
    }

    pub fn field(&self) -> &Field {
        &self.basis.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_zero(&self) -> bool {
        self.pivots.is_empty()
    }

    /// Basis rows in reduced row echelon form.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Fe> {
        self.basis.row(i).to_vec()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check(&self, other: &Subspace) -> Result<(), LinalgError> {
        if !self.field().same(other.field()) {
            return Err(LinalgError::MixedFields);
        }
        if self.ambient != other.ambient {
            return Err(LinalgError::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Coordinates of `v` in the RREF basis, or `None` if `v` is outside.
    pub fn coordinates(&self, v: &[Fe]) -> Option<Vec<Fe>> {
        if v.len() != self.ambient {
            return None;
        }
        let coords: Vec<Fe> = self.pivots.iter().map(|&p| v[p]).collect();
        let back = self.combine(&coords);
        (back == v).then_some(coords)
    }

    /// `Σ coords[i] · basis[i]`.
    pub fn combine(&self, coords: &[Fe]) -> Vec<Fe> {
        self.basis.vec_mul(coords).expect("coordinate length equals dimension")
    }

    pub fn contains(&self, v: &[Fe]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient
            && (0..other.dim()).all(|i| self.contains(other.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check(other)?;
        Ok(Subspace::row_space(&self.basis.vstack(&other.basis)?))
    }

    /// `S ∩ T = (S⊥ + T⊥)⊥` with respect to the standard bilinear form.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check(other)?;
        let a = self.basis.kernel();
        let b = other.basis.kernel();
        let stacked = a.basis.vstack(&b.basis)?;
        Ok(stacked.kernel())
    }

    /// The canonical complement of `self` inside `outer`: the vectors of
    /// `outer` that vanish on every pivot column of `self`.
    pub fn complement_in(&self, outer: &Subspace) -> Result<Subspace, LinalgError> {
        self.check(outer)?;
        if !outer.contains_space(self) {
            return Err(LinalgError::NotSubspace);
        }
        let f = self.field().clone();
        let mut reduced = Vec::with_capacity(outer.dim());
        for i in 0..outer.dim() {
            let mut v = outer.basis.row(i).to_vec();
            for (k, &p) in self.pivots.iter().enumerate() {
                let c = v[p];
                if !c.is_zero() {
                    axpy(&f, &mut v, f.neg(c), self.basis.row(k));
                }
            }
            reduced.push(v);
        }
        Ok(Subspace::from_rows(&f, self.ambient, &reduced))
    }
}

/// Coordinates with respect to a fixed, linearly independent list of vectors
/// (not necessarily in echelon form).
#[derive(Clone, Debug)]
pub struct RowSolver {
    field: Field,
    vectors: Matrix,
    cols: Vec<usize>,
    /// Inverse of `vectors` restricted to `cols`.
    inv: Matrix,
}

impl RowSolver {
    /// Fails with `NoSolution` when the rows are dependent.
    pub fn new(vectors: &Matrix) -> Result<RowSolver, LinalgError> {
        let f = vectors.field().clone();
        let k = vectors.rows();
        let (_, cols) = vectors.rref();
        if cols.len() != k {
            return Err(LinalgError::NoSolution);
        }
        let square = vectors.select_cols(&cols);
        let aug = square.hstack(&Matrix::identity(&f, k))?;
        let (red, _) = aug.rref();
        let mut inv = Matrix::zeros(&f, k, k);
        for i in 0..k {
            for j in 0..k {
                inv.set(i, j, red.get(i, k + j));
            }
        }
        Ok(RowSolver {
            field: f,
            vectors: vectors.clone(),
            cols,
            inv,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `x` with `x · vectors = v`, or `None` if `v` lies outside their span.
    pub fn solve(&self, v: &[Fe]) -> Option<Vec<Fe>> {
        if v.len() != self.vectors.cols() {
            return None;
        }
        let rhs: Vec<Fe> = self.cols.iter().map(|&c| v[c]).collect();
        // x · square = rhs  ⇒  x = rhs · square⁻¹, and inv here is square⁻¹.
        let x = self.inv.vec_mul(&rhs).ok()?;
        let back = self.vectors.vec_mul(&x).ok()?;
        (back == v).then_some(x)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f8() -> Field {
        Field::new(FieldSpec::new(2, &[1, 1, 0, 1])).unwrap()
    }

    fn f16() -> Field {
        Field::new(FieldSpec::new(2, &[1, 1, 0, 0, 1])).unwrap()
    }

    fn random(f: &Field, rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        let data = (0..r * c).map(|_| f.from_raw(rng.gen_range(0..f.q())).unwrap()).collect();
        Matrix::from_vec(f, r, c, data)
    }

    fn low_rank(f: &Field, rng: &mut ChaCha8Rng, r: usize, c: usize, k: usize) -> Matrix {
        let a = random(f, rng, r, k);
        let b = random(f, rng, k, c);
        a.matmul(&b, MulStrategy::Naive).unwrap()
    }

    #[test]
    fn rref_identity_and_zero() {
        let f = f8();
        let (m, p) = Matrix::identity(&f, 3).rref();
        assert_eq!(m, Matrix::identity(&f, 3));
        assert_eq!(p.len(), 3);
        let z = Matrix::zeros(&f, 3, 4);
        let (m, p) = z.rref();
        assert_eq!(m, z);
        assert!(p.is_empty());
    }

    #[test]
    fn rref_idempotent() {
        let f = f8();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let m = low_rank(&f, &mut rng, 20, 30, 12);
            let (r1, p1) = m.rref();
            let (r2, p2) = r1.rref();
            assert_eq!(r1, r2);
            assert_eq!(p1, p2);
            assert_eq!(p1.len(), 12);
        }
    }

    #[test]
    fn kernel_cases() {
        let f2 = Field::gf2();
        let m = Matrix::from_rows(&f2, 2, &[vec![Fe::ONE, Fe::ONE]]);
        let k = m.kernel();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis_vec(0), vec![Fe::ONE, Fe::ONE]);
        let f = f16();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inv = loop {
            let m = random(&f, &mut rng, 5, 5);
            if m.rank() == 5 {
                break m;
            }
        };
        assert!(inv.kernel().is_zero());
        for _ in 0..20 {
            let m = low_rank(&f, &mut rng, 7, 11, 4);
            let k = m.kernel();
            assert_eq!(k.dim() + m.rank(), 11);
            for i in 0..k.dim() {
                assert!(m.mul_vec(k.basis().row(i)).unwrap().iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn solve_particular_cases() {
        let f = f8();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<Fe> = (0..4).map(|_| f.from_raw(rng.gen_range(0..8)).unwrap()).collect();
        assert_eq!(Matrix::identity(&f, 4).solve_particular(&b).unwrap(), b);
        let m = low_rank(&f, &mut rng, 6, 9, 3);
        assert_eq!(m.solve_particular(&[Fe::ZERO; 6]).unwrap(), vec![Fe::ZERO; 9]);
        for _ in 0..20 {
            let x0: Vec<Fe> = (0..9).map(|_| f.from_raw(rng.gen_range(0..8)).unwrap()).collect();
            let rhs = m.mul_vec(&x0).unwrap();
            let x = m.solve_particular(&rhs).unwrap();
            assert_eq!(m.mul_vec(&x).unwrap(), rhs);
            let (_, piv) = m.rref();
            for (c, v) in x.iter().enumerate() {
                if !piv.contains(&c) {
                    assert!(v.is_zero());
                }
            }
        }
        let m = Matrix::from_rows(&f, 1, &[vec![Fe::ZERO]]);
        assert_eq!(m.solve_particular(&[Fe::ONE]), Err(LinalgError::NoSolution));
    }

    #[test]
    fn matmul_identity_scalar_and_strassen() {
        let f = f16();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(&f, &mut rng, 13, 13);
        assert_eq!(a.matmul(&Matrix::identity(&f, 13), MulStrategy::Naive).unwrap(), a);
        let x = random(&f, &mut rng, 1, 1);
        let y = random(&f, &mut rng, 1, 1);
        assert_eq!(
            x.matmul(&y, MulStrategy::Strassen { crossover: 1 }).unwrap().get(0, 0),
            f.mul(x.get(0, 0), y.get(0, 0))
        );
        let a = random(&f, &mut rng, 64, 64);
        let b = random(&f, &mut rng, 64, 64);
        assert_eq!(
            a.matmul(&b, MulStrategy::Strassen { crossover: 8 }).unwrap(),
            a.matmul(&b, MulStrategy::Naive).unwrap()
        );
        let a = random(&f, &mut rng, 17, 33);
        let b = random(&f, &mut rng, 33, 9);
        assert_eq!(
            a.matmul(&b, MulStrategy::Strassen { crossover: 2 }).unwrap(),
            a.matmul(&b, MulStrategy::Naive).unwrap()
        );
        assert!(matches!(
            a.matmul(&a, MulStrategy::Naive),
            Err(LinalgError::DimensionMismatch(_))
        ));
        let g = f8();
        let other = Matrix::identity(&g, 33);
        assert_eq!(a.matmul(&other, MulStrategy::Naive), Err(LinalgError::MixedFields));
    }

    #[test]
    fn subspace_operations() {
        let f = f8();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = Subspace::row_space(&low_rank(&f, &mut rng, 5, 10, 4));
            let t = Subspace::row_space(&low_rank(&f, &mut rng, 6, 10, 5));
            assert_eq!(s.intersect(&s).unwrap(), s);
            let sum = s.sum(&t).unwrap();
            let cap = s.intersect(&t).unwrap();
            assert_eq!(sum.dim() + cap.dim(), s.dim() + t.dim());
            assert!(sum.contains_space(&s) && sum.contains_space(&t));
            assert!(s.contains_space(&cap) && t.contains_space(&cap));
            let comp = s.complement_in(&sum).unwrap();
            assert_eq!(comp.dim() + s.dim(), sum.dim());
            assert!(comp.intersect(&s).unwrap().is_zero());
            assert_eq!(comp.sum(&s).unwrap(), sum);
        }
        let t = Subspace::row_space(&low_rank(&f, &mut rng, 4, 7, 3));
        assert_eq!(Subspace::zero(&f, 7).complement_in(&t).unwrap(), t);
        let s = Subspace::row_space(&low_rank(&f, &mut rng, 4, 7, 3));
        if !t.contains_space(&s) {
            assert_eq!(s.complement_in(&t), Err(LinalgError::NotSubspace));
        }
    }

    #[test]
    fn row_solver_recovers_coordinates() {
        let f = f16();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let vecs = random(&f, &mut rng, 5, 12);
        let solver = RowSolver::new(&vecs).unwrap();
        let x: Vec<Fe> = (0..5).map(|_| f.from_raw(rng.gen_range(0..16)).unwrap()).collect();
        let v = vecs.vec_mul(&x).unwrap();
        assert_eq!(solver.solve(&v).unwrap(), x);
        let outside = random(&f, &mut rng, 1, 12);
        let rank_with = vecs.vstack(&outside).unwrap().rank();
        if rank_with == 6 {
            assert!(solver.solve(outside.row(0)).is_none());
        }
    }
}
