//! Exact dense and sparse linear algebra over the scalar tower, plus the
//! integer lattice routines (Hermite form, saturation, skew normal form).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{common_denominator, Field, Scalar, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("alternating form is degenerate (determinant zero)")]
    Degenerate,
    #[error("matrix is not alternating")]
    NotAlternating,
    #[error("matrix has non-integral entries")]
    NotIntegral,
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.data[i * self.cols + j].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix rows");
        Matrix { rows: nrows, cols: ncols, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        Matrix::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl<T: Field> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_rational(m: &Matrix<Q>) -> Self {
        m.map(|x| T::from_rational(x.clone()))
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] += &a.mul_ref(b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &a.mul_ref(b);
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, s: &T) -> Matrix<T> {
        self.map(|x| x.mul_ref(s))
    }

    pub fn neg(&self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i..self.cols).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// `Mᵀ = −M`.
    pub fn is_alternating(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                self.get(i, i).is_zero() && (i + 1..self.cols).all(|j| *self.get(i, j) == -self.get(j, i).clone())
            })
    }

    /// Bilinear form `xᵀ M y`.
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let my = self.mul_vec(y);
        dot(x, &my)
    }

    /// Sparse rows, zero entries dropped.
    pub fn sparse_rows(&self) -> Vec<SparseVec<T>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(j, x)| (j, x.clone()))
                    .collect()
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(self.sparse_rows())
    }

    /// Basis of `{x : Mx = 0}`; one vector per free column, free entry 1.
    pub fn kernel_basis(&self) -> Vec<Vec<T>> {
        sparse_kernel(self.sparse_rows(), self.cols)
            .into_iter()
            .map(|v| densify(&v, self.cols))
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut a = self.clone();
        let mut sign_flip = false;
        let mut prev = T::one();
        for k in 0..n {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign_flip = !sign_flip;
                    }
                    None => return T::zero(),
                }
            }
            let pivot = a.get(k, k).clone();
            for i in k + 1..n {
                for j in k + 1..n {
                    let mut v = a.get(i, j).mul_ref(&pivot);
                    v -= &a.get(i, k).mul_ref(a.get(k, j));
                    a.set(i, j, v / prev.clone());
                }
                a.set(i, k, T::zero());
            }
            prev = pivot;
        }
        let det = a.get(n - 1, n - 1).clone();
        if sign_flip {
            -det
        } else {
            det
        }
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Matrix<T>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv: Matrix<T> = Matrix::identity(n);
        for k in 0..n {
            let p = (k..n).find(|&i| !a.get(i, k).is_zero()).ok_or(LinalgError::Singular)?;
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let pinv = a.get(k, k).inv();
            for j in 0..n {
                let x = a.get(k, j).mul_ref(&pinv);
                a.set(k, j, x);
                let y = inv.get(k, j).mul_ref(&pinv);
                inv.set(k, j, y);
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let x = a.get(i, j).clone() - f.mul_ref(a.get(k, j));
                    a.set(i, j, x);
                    let y = inv.get(i, j).clone() - f.mul_ref(inv.get(k, j));
                    inv.set(i, j, y);
                }
            }
        }
        Ok(inv)
    }

    /// One solution of `Mx = b` (free variables zero), or `None` if inconsistent.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(b.len(), self.rows);
        let augmented = Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let rref = reduced_echelon(augmented.sparse_rows());
        let mut x = vec![T::zero(); self.cols];
        for row in rref {
            let pivot = row[0].0;
            if pivot == self.cols {
                return None;
            }
            if let Some((_, v)) = row.iter().find(|(j, _)| *j == self.cols) {
                x[pivot] = v.clone();
            }
        }
        Some(x)
    }

    /// Pfaffian of an alternating matrix by congruence elimination.
    pub fn pfaffian(&self) -> T {
        assert!(self.is_alternating(), "pfaffian of a non-alternating matrix");
        let n = self.rows;
        if n % 2 == 1 {
            return T::zero();
        }
        let mut a = self.clone();
        let mut acc = T::one();
        let mut k = 0;
        while k < n {
            let Some(piv) = (k + 1..n).find(|&j| !a.get(k, j).is_zero()) else {
                return T::zero();
            };
            if piv != k + 1 {
                a.swap_rows(piv, k + 1);
                a.swap_cols(piv, k + 1);
                acc = -acc;
            }
            let pivot = a.get(k, k + 1).clone();
            acc *= &pivot;
            let pinv = pivot.inv();
            // A'_ij = A_ij + (A_kj A_{k+1,i} − A_ki A_{k+1,j}) / A_{k,k+1}
            for i in k + 2..n {
                for j in i + 1..n {
                    let mut corr = a.get(k, j).mul_ref(a.get(k + 1, i));
                    corr -= &a.get(k, i).mul_ref(a.get(k + 1, j));
                    if corr.is_zero() {
                        continue;
                    }
                    let v = a.get(i, j).clone() + corr.mul_ref(&pinv);
                    a.set(j, i, -v.clone());
                    a.set(i, j, v);
                }
            }
            k += 2;
        }
        acc
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// Leading principal minors, `D₁ … D_n`.
    pub fn leading_principal_minors(&self) -> Vec<T> {
        assert!(self.is_square());
        // pivots of elimination without row exchanges; D_k = Π pivots
        let n = self.rows;
        let mut a = self.clone();
        let mut out = Vec::with_capacity(n);
        let mut running = T::one();
        for k in 0..n {
            let pivot = a.get(k, k).clone();
            if pivot.is_zero() {
                // remaining minors need an honest determinant
                for m in k..n {
                    let idx: Vec<usize> = (0..=m).collect();
                    out.push(self.submatrix(&idx, &idx).determinant());
                }
                return out;
            }
            running *= &pivot;
            out.push(running.clone());
            let pinv = pivot.inv();
            for i in k + 1..n {
                if a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).mul_ref(&pinv);
                for j in k..n {
                    let v = a.get(i, j).clone() - f.mul_ref(a.get(k, j));
                    a.set(i, j, v);
                }
            }
        }
        out
    }
}

impl Matrix<Q> {
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    /// Integer matrix, or `NotIntegral`.
    pub fn to_integer(&self) -> Result<Matrix<BigInt>, LinalgError> {
        if !self.is_integral() {
            return Err(LinalgError::NotIntegral);
        }
        Ok(self.map(|x| x.to_integer()))
    }

    pub fn to_scalar(&self) -> Matrix<Scalar> {
        self.map(|x| Scalar::rational(x.clone()))
    }

    pub fn from_integer(m: &Matrix<BigInt>) -> Matrix<Q> {
        m.map(|x| Q::from_integer(x.clone()))
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| crate::scalar::q(x)).collect()).collect())
    }
}

impl Matrix<Scalar> {
    /// `Some` when every entry is rational.
    pub fn to_rational(&self) -> Option<Matrix<Q>> {
        let data: Option<Vec<Q>> = self.data.iter().map(Field::to_rational).collect();
        Some(Matrix { rows: self.rows, cols: self.cols, data: data? })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix<Scalar> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }
}

pub fn dot<T: Field>(x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for (a, b) in x.iter().zip(y) {
        if !a.is_zero() && !b.is_zero() {
            acc += &a.mul_ref(b);
        }
    }
    acc
}

/// Sparse vector: strictly increasing `(index, nonzero value)` pairs.
pub type SparseVec<T> = Vec<(usize, T)>;

pub fn densify<T: Field>(v: &[(usize, T)], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (j, x) in v {
        out[*j] = x.clone();
    }
    out
}

pub fn sparsify<T: Field>(v: &[T]) -> SparseVec<T> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect()
}

/// `a − f·b` on sparse vectors.
fn axpy<T: Field>(a: &[(usize, T)], f: &T, b: &[(usize, T)]) -> SparseVec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, -f.mul_ref(&b[j].1)));
            j += 1;
        } else {
            let v = a[i].1.clone() - f.mul_ref(&b[j].1);
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incrementally built echelon basis; every stored row has pivot entry 1.
///
/// Rows are reduced against stored pivots in ascending pivot order, which is
/// enough for membership and rank. Deterministic for a fixed insertion order.
#[derive(Debug, Clone)]
pub struct EchelonBasis<T> {
    width: usize,
    rows: BTreeMap<usize, SparseVec<T>>,
}

impl<T: Field> EchelonBasis<T> {
    pub fn new(width: usize) -> Self {
        EchelonBasis { width, rows: BTreeMap::new() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Residual of `v` after reduction; empty iff `v` lies in the span.
    pub fn reduce(&self, v: SparseVec<T>) -> SparseVec<T> {
        let mut v = v;
        let mut cursor = 0;
        loop {
            let next = v.iter().find(|(j, _)| *j >= cursor && self.rows.contains_key(j)).map(|(j, x)| (*j, x.clone()));
            match next {
                Some((p, f)) => {
                    v = axpy(&v, &f, &self.rows[&p]);
                    cursor = p + 1;
                }
                None => return v,
            }
        }
    }

    /// Insert; returns whether the vector was independent of the current span.
    pub fn insert(&mut self, v: SparseVec<T>) -> bool {
        debug_assert!(v.iter().all(|(j, _)| *j < self.width));
        let r = self.reduce(v);
        match r.first() {
            None => false,
            Some((p, lead)) => {
                let p = *p;
                let inv = lead.inv();
                let row: SparseVec<T> = r.into_iter().map(|(j, x)| (j, x.mul_ref(&inv))).collect();
                self.rows.insert(p, row);
                true
            }
        }
    }

    pub fn insert_dense(&mut self, v: &[T]) -> bool {
        self.insert(sparsify(v))
    }

    pub fn contains(&self, v: SparseVec<T>) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn contains_dense(&self, v: &[T]) -> bool {
        self.contains(sparsify(v))
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }

    /// Fully reduced rows (reduced row echelon form), ascending pivots.
    pub fn reduced_rows(&self) -> Vec<SparseVec<T>> {
        let mut rows: Vec<(usize, SparseVec<T>)> = self.rows.iter().map(|(p, r)| (*p, r.clone())).collect();
        for k in (0..rows.len()).rev() {
            let (p, pivot_row) = (rows[k].0, rows[k].1.clone());
            for row in rows.iter_mut().take(k) {
                if let Ok(pos) = row.1.binary_search_by_key(&p, |(j, _)| *j) {
                    let f = row.1[pos].1.clone();
                    row.1 = axpy(&row.1, &f, &pivot_row);
                }
            }
        }
        rows.into_iter().map(|(_, r)| r).collect()
    }

    pub fn basis_dense(&self) -> Vec<Vec<T>> {
        self.reduced_rows().iter().map(|r| densify(r, self.width)).collect()
    }
}

pub fn rank_of_rows<T: Field>(rows: Vec<SparseVec<T>>) -> usize {
    let width = rows.iter().flat_map(|r| r.last().map(|(j, _)| j + 1)).max().unwrap_or(0);
    let mut e = EchelonBasis::new(width);
    rows.into_iter().filter(|r| e.insert(r.clone())).count()
}

/// Reduced row echelon form of a sparse row set (zero rows dropped).
pub fn reduced_echelon<T: Field>(rows: Vec<SparseVec<T>>) -> Vec<SparseVec<T>> {
    let width = rows.iter().flat_map(|r| r.last().map(|(j, _)| j + 1)).max().unwrap_or(0);
    let mut e = EchelonBasis::new(width);
    for r in rows {
        e.insert(r);
    }
    e.reduced_rows()
}

/// Kernel of the sparse system `rows · x = 0` in `width` unknowns.
pub fn sparse_kernel<T: Field>(rows: Vec<SparseVec<T>>, width: usize) -> Vec<SparseVec<T>> {
    let rref = reduced_echelon(rows);
    let pivots: Vec<usize> = rref.iter().map(|r| r[0].0).collect();
    let mut is_pivot = vec![false; width];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    // column f of the rref, as (pivot, coefficient) pairs
    let mut by_free: BTreeMap<usize, Vec<(usize, T)>> = BTreeMap::new();
    for row in &rref {
        let p = row[0].0;
        for (j, x) in &row[1..] {
            by_free.entry(*j).or_default().push((p, x.clone()));
        }
    }
    (0..width)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v: SparseVec<T> = by_free.get(&f).map_or_else(Vec::new, |entries| {
                entries.iter().map(|(p, x)| (*p, -x.clone())).collect()
            });
            v.push((f, T::one()));
            v.sort_by_key(|(j, _)| *j);
            v
        })
        .collect()
}

/// Sign oracle for the ordered fields used in definiteness tests.
pub trait RealSign {
    fn real_sign(&self) -> Option<Ordering>;
}

impl RealSign for Q {
    fn real_sign(&self) -> Option<Ordering> {
        Some(self.cmp(&Q::zero()))
    }
}

impl RealSign for Scalar {
    fn real_sign(&self) -> Option<Ordering> {
        self.sign()
    }
}

/// Sylvester's criterion: every leading principal minor is positive under `√d > 0`.
pub fn is_positive_definite<T: Field + RealSign>(s: &Matrix<T>) -> Result<bool, LinalgError> {
    if !s.is_symmetric() {
        return Err(LinalgError::NotSymmetric);
    }
    Ok(s
        .leading_principal_minors()
        .iter()
        .all(|m| m.real_sign() == Some(Ordering::Greater)))
}

/// Hermitian positive definiteness: `H = H*` and all leading minors real positive.
pub fn is_hermitian_positive_definite(h: &Matrix<Scalar>) -> bool {
    *h == h.adjoint() && h.leading_principal_minors().iter().all(Scalar::is_positive)
}

/// Rational vectors in the span of `basis` over the real field `F = ℚ(√d)`.
///
/// Unknowns are `x ∈ ℚ^m` and the coefficients `λ_k = λ_k' + λ_k''√d`; every
/// equation `x_j = Σ λ_k s_kj` is split along `1, √d, i, i√d` and the rational
/// system is solved, then projected to `x`. For subspaces stable under complex
/// conjugation (all uses in this crate) this equals `span_{F(i)} ∩ ℚ^m`.
pub fn rational_points(basis: &[Vec<Scalar>], ambient: usize) -> Vec<Vec<Q>> {
    let d = basis.iter().flatten().find_map(Scalar::radicand);
    let parts = if d.is_some() { 2 } else { 1 };
    let dq = Q::from_integer(BigInt::from(d.unwrap_or(0)));
    let width = ambient + parts * basis.len();
    let mut rows: Vec<SparseVec<Q>> = Vec::new();
    for j in 0..ambient {
        // components 1, √d, i, i√d of x_j − Σ λ_k s_kj
        let mut eq: [SparseVec<Q>; 4] = Default::default();
        eq[0].push((j, Q::one()));
        for (k, s) in basis.iter().enumerate() {
            let (a, b, c, e) = s[j].components();
            let l0 = ambient + parts * k;
            let mut push = |slot: usize, col: usize, x: Q| {
                if !x.is_zero() {
                    eq[slot].push((col, -x));
                }
            };
            push(0, l0, a.clone());
            push(1, l0, b.clone());
            push(2, l0, c.clone());
            push(3, l0, e.clone());
            if parts == 2 {
                push(0, l0 + 1, b * &dq);
                push(1, l0 + 1, a.clone());
                push(2, l0 + 1, e * &dq);
                push(3, l0 + 1, c.clone());
            }
        }
        rows.extend(eq.into_iter().filter(|r| !r.is_empty()));
    }
    let solutions = sparse_kernel(rows, width);
    let projected: Vec<SparseVec<Q>> = solutions
        .into_iter()
        .map(|v| v.into_iter().filter(|(j, _)| *j < ambient).collect::<SparseVec<Q>>())
        .filter(|v| !v.is_empty())
        .collect();
    let mut echelon = EchelonBasis::new(ambient);
    for v in projected {
        echelon.insert(v);
    }
    echelon.basis_dense()
}

/// Rational solutions of a system with coefficients in `F(i)`.
pub fn rational_kernel_of_scalar_rows(rows: &[SparseVec<Scalar>], ambient: usize) -> Vec<Vec<Q>> {
    let mut split: Vec<SparseVec<Q>> = Vec::with_capacity(rows.len() * 4);
    for row in rows {
        let mut parts: [SparseVec<Q>; 4] = Default::default();
        for (j, x) in row {
            let (a, b, c, e) = x.components();
            for (slot, comp) in parts.iter_mut().zip([a, b, c, e]) {
                if !comp.is_zero() {
                    slot.push((*j, comp.clone()));
                }
            }
        }
        split.extend(parts.into_iter().filter(|p| !p.is_empty()));
    }
    sparse_kernel(split, ambient).iter().map(|v| densify(v, ambient)).collect()
}

/// Integral lattice given by independent generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    pub ambient: usize,
    pub vectors: Vec<Vec<BigInt>>,
}

impl LatticeBasis {
    pub fn new(ambient: usize, vectors: Vec<Vec<BigInt>>) -> Self {
        assert!(vectors.iter().all(|v| v.len() == ambient));
        LatticeBasis { ambient, vectors }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn as_rational(&self) -> Vec<Vec<Q>> {
        self.vectors.iter().map(|v| v.iter().map(|x| Q::from_integer(x.clone())).collect()).collect()
    }

    /// Row-style Hermite normal form of the generators (canonical for the lattice).
    pub fn hermite(&self) -> Vec<Vec<BigInt>> {
        if self.vectors.is_empty() {
            return Vec::new();
        }
        let (h, _) = hermite_normal_form(&Matrix::from_rows(self.vectors.clone()));
        h.row_vecs().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect()
    }

    /// Whether two bases span the same lattice.
    pub fn same_lattice(&self, other: &LatticeBasis) -> bool {
        self.ambient == other.ambient && self.hermite() == other.hermite()
    }
}

fn row_combine(m: &mut Matrix<BigInt>, target: usize, f: &BigInt, source: usize) {
    // row[target] -= f * row[source]
    for c in 0..m.cols() {
        let s = m.get(source, c).clone();
        if s.is_zero() {
            continue;
        }
        let v = m.get(target, c) - f * s;
        m.set(target, c, v);
    }
}

fn negate_row(m: &mut Matrix<BigInt>, r: usize) {
    for c in 0..m.cols() {
        let v = -m.get(r, c).clone();
        m.set(r, c, v);
    }
}

fn swap_int_rows(m: &mut Matrix<BigInt>, i: usize, j: usize) {
    if i == j {
        return;
    }
    for c in 0..m.cols() {
        let a = m.get(i, c).clone();
        let b = m.get(j, c).clone();
        m.set(i, c, b);
        m.set(j, c, a);
    }
}

/// Row-style Hermite normal form: returns `(H, U)` with `U·A = H`, `U` unimodular,
/// `H` in echelon form with positive pivots and entries above pivots in `[0, pivot)`.
pub fn hermite_normal_form(a: &Matrix<BigInt>) -> (Matrix<BigInt>, Matrix<BigInt>) {
    let r = a.rows();
    let mut h = a.clone();
    let mut u = Matrix::from_fn(r, r, |i, j| if i == j { BigInt::one() } else { BigInt::zero() });
    let mut row = 0;
    for col in 0..a.cols() {
        if row == r {
            break;
        }
        loop {
            let best = (row..r)
                .filter(|&i| !h.get(i, col).is_zero())
                .min_by(|&i, &j| h.get(i, col).abs().cmp(&h.get(j, col).abs()).then(i.cmp(&j)));
            let Some(best) = best else { break };
            swap_int_rows(&mut h, best, row);
            swap_int_rows(&mut u, best, row);
            let mut clean = true;
            for i in row + 1..r {
                if h.get(i, col).is_zero() {
                    continue;
                }
                let f = h.get(i, col).div_floor(h.get(row, col));
                row_combine(&mut h, i, &f, row);
                row_combine(&mut u, i, &f, row);
                if !h.get(i, col).is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if h.get(row, col).is_zero() {
            continue;
        }
        if h.get(row, col).is_negative() {
            negate_row(&mut h, row);
            negate_row(&mut u, row);
        }
        for i in 0..row {
            let f = h.get(i, col).div_floor(h.get(row, col));
            if !f.is_zero() {
                row_combine(&mut h, i, &f, row);
                row_combine(&mut u, i, &f, row);
            }
        }
        row += 1;
    }
    (h, u)
}

/// ℤ-basis of `{x ∈ ℤ^m : A x = 0}`; automatically saturated.
pub fn integer_kernel(a: &Matrix<BigInt>) -> Vec<Vec<BigInt>> {
    let m = a.cols();
    if a.rows() == 0 {
        return (0..m)
            .map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
    }
    let (h, u) = hermite_normal_form(&a.transpose());
    (0..m)
        .filter(|&i| h.row(i).iter().all(Zero::is_zero))
        .map(|i| u.row(i).to_vec())
        .collect()
}

/// Clear denominators of a rational vector, then divide by the content.
pub fn primitive_integer_vector(v: &[Q]) -> Vec<BigInt> {
    let den = common_denominator(v.iter());
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Saturation `span_ℚ(L) ∩ ℤ^m`, returned in Hermite normal form.
pub fn saturate(lattice: &LatticeBasis) -> LatticeBasis {
    let m = lattice.ambient;
    if lattice.vectors.is_empty() {
        return LatticeBasis::new(m, Vec::new());
    }
    let gens = Matrix::from_rows(lattice.vectors.clone());
    let complement = integer_kernel(&gens);
    let sat = if complement.is_empty() {
        integer_kernel(&Matrix::from_fn(0, m, |_, _| BigInt::zero()))
    } else {
        integer_kernel(&Matrix::from_rows(complement))
    };
    let basis = LatticeBasis::new(m, sat);
    let h = basis.hermite();
    LatticeBasis::new(m, h)
}

/// Index `[sat : L]` of `L` inside a lattice `sat` of the same rank containing it.
pub fn sublattice_index(sub: &LatticeBasis, sup: &LatticeBasis) -> Option<BigInt> {
    if sub.rank() != sup.rank() {
        return None;
    }
    let k = sup.rank();
    let sup_cols = Matrix::from_columns(sup.ambient, &sup.as_rational());
    let mut coeffs = Vec::with_capacity(k);
    for v in sub.as_rational() {
        let c = sup_cols.solve(&v)?;
        if !c.iter().all(|x| x.is_integer()) || sup_cols.mul_vec(&c) != v {
            return None;
        }
        coeffs.push(c);
    }
    let det = Matrix::from_rows(coeffs).determinant();
    Some(det.abs().to_integer())
}

/// Quasi-symplectic (Frobenius) normal form of an integral alternating matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewNormalForm {
    /// Columns are the new basis: `Uᵀ E U = [[0, D], [−D, 0]]`.
    pub transform: Matrix<BigInt>,
    pub divisors: Vec<BigInt>,
}

/// `Uᵀ E U = [[0, D], [−D, 0]]` with `D = diag(d₁ | d₂ | …)`, `dᵢ > 0`.
pub fn skew_normal_form(e: &Matrix<BigInt>) -> Result<SkewNormalForm, LinalgError> {
    let n2 = e.rows();
    let eq = Matrix::<Q>::from_integer(e);
    if !eq.is_alternating() {
        return Err(LinalgError::NotAlternating);
    }
    if n2 % 2 == 1 || eq.determinant().is_zero() {
        return Err(LinalgError::Degenerate);
    }
    let form = |x: &[BigInt], y: &[BigInt]| -> BigInt {
        let mut acc = BigInt::zero();
        for i in 0..n2 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n2 {
                if !y[j].is_zero() {
                    acc += &x[i] * e.get(i, j) * &y[j];
                }
            }
        }
        acc
    };
    let sub = |x: &[BigInt], f: &BigInt, y: &[BigInt]| -> Vec<BigInt> {
        x.iter().zip(y).map(|(a, b)| a - f * b).collect()
    };

    let mut remaining: Vec<Vec<BigInt>> = (0..n2)
        .map(|i| (0..n2).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut firsts = Vec::new();
    let mut seconds = Vec::new();
    let mut divisors = Vec::new();

    while !remaining.is_empty() {
        'restart: loop {
            // pair with the smallest nonzero |E(b_i, b_j)|, first in (i, j) order
            let mut best: Option<(usize, usize, BigInt)> = None;
            for i in 0..remaining.len() {
                for j in i + 1..remaining.len() {
                    let v = form(&remaining[i], &remaining[j]);
                    if v.is_zero() {
                        continue;
                    }
                    if best.as_ref().map_or(true, |(_, _, b)| v.abs() < b.abs()) {
                        best = Some((i, j, v));
                    }
                }
            }
            let (i, j, d) = best.ok_or(LinalgError::Degenerate)?;
            let (i, j, d) = if d.is_negative() { (j, i, -d) } else { (i, j, d) };
            let bi = remaining[i].clone();
            let bj = remaining[j].clone();
            for l in 0..remaining.len() {
                if l == i || l == j {
                    continue;
                }
                let x = form(&bi, &remaining[l]);
                // b_l + t b_j changes E(b_i, ·) by t·d
                let t = -x.div_floor(&d);
                remaining[l] = sub(&remaining[l], &-t.clone(), &bj);
                if !form(&bi, &remaining[l]).is_zero() {
                    continue 'restart;
                }
                let y = form(&bj, &remaining[l]);
                // b_l + s b_i changes E(b_j, ·) by −s·d
                let s = y.div_floor(&d);
                remaining[l] = sub(&remaining[l], &-s.clone(), &bi);
                if !form(&bj, &remaining[l]).is_zero() {
                    continue 'restart;
                }
            }
            let others: Vec<usize> = (0..remaining.len()).filter(|&l| l != i && l != j).collect();
            for (a, &l) in others.iter().enumerate() {
                for &m in &others[a + 1..] {
                    if !form(&remaining[l], &remaining[m]).is_multiple_of(&d) {
                        let bl = remaining[l].clone();
                        remaining[i] = sub(&remaining[i], &-BigInt::one(), &bl);
                        continue 'restart;
                    }
                }
            }
            firsts.push(bi);
            seconds.push(bj);
            divisors.push(d);
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            remaining.remove(hi);
            remaining.remove(lo);
            break;
        }
    }
    let columns: Vec<Vec<BigInt>> = firsts.into_iter().chain(seconds).collect();
    let transform = Matrix::from_columns(n2, &columns);
    Ok(SkewNormalForm { transform, divisors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qf};

    fn qm(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_i64_rows(rows)
    }

    fn im(rows: &[&[i64]]) -> Matrix<BigInt> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    fn ivec(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let k = qm(&[&[1, 2], &[2, 4]]).kernel_basis();
        assert_eq!(k, vec![vec![q(-2), q(1)]]);
        assert!(qm(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).kernel_basis().is_empty());
    }

    #[test]
    fn kernel_over_gaussian_rationals() {
        let m = Matrix::from_rows(vec![vec![Scalar::one(), -Scalar::i()]]);
        let k = m.kernel_basis();
        assert_eq!(k, vec![vec![Scalar::i(), Scalar::one()]]);
    }

    #[test]
    fn rational_points_examples() {
        let i = Scalar::i;
        let one = Scalar::one;
        assert!(rational_points(&[vec![i(), one()]], 2).is_empty());
        assert_eq!(rational_points(&[vec![one(), one()]], 2), vec![vec![q(1), q(1)]]);
        let pts = rational_points(&[vec![one(), Scalar::zero()], vec![Scalar::zero(), i()]], 2);
        assert_eq!(pts, vec![vec![q(1), q(0)]]);
        let s2 = Scalar::sqrt(2);
        let pts = rational_points(&[vec![one(), s2.clone()], vec![s2.clone(), Scalar::int(2)]], 2);
        assert!(pts.is_empty());
        let pts = rational_points(&[vec![s2.clone(), s2.clone()]], 2);
        assert_eq!(pts, vec![vec![q(1), q(1)]]);
        let pts = rational_points(&[vec![one(), i(), Scalar::zero()], vec![Scalar::zero(), Scalar::zero(), one()]], 3);
        assert_eq!(pts, vec![vec![q(0), q(0), q(1)]]);
    }

    #[test]
    fn positive_definite_examples() {
        assert!(is_positive_definite(&qm(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(!is_positive_definite(&qm(&[&[1, 2], &[2, 1]])).unwrap());
        let s: Matrix<Scalar> = Matrix::from_rows(vec![
            vec!["1+1*sqrt(2)".parse().unwrap(), Scalar::one()],
            vec![Scalar::one(), Scalar::one()],
        ]);
        assert!(is_positive_definite(&s).unwrap());
        assert_eq!(is_positive_definite(&qm(&[&[1, 2], &[0, 1]])), Err(LinalgError::NotSymmetric));
        // zero leading minor, positive later minor: still not definite
        assert!(!is_positive_definite(&qm(&[&[0, 1], &[1, 0]])).unwrap());
    }

    #[test]
    fn saturation_examples() {
        let sat = saturate(&LatticeBasis::new(2, vec![ivec(&[2, 0])]));
        assert_eq!(sat.vectors, vec![ivec(&[1, 0])]);
        let sat = saturate(&LatticeBasis::new(2, vec![ivec(&[2, 4])]));
        assert_eq!(sat.vectors, vec![ivec(&[1, 2])]);
        let input = LatticeBasis::new(3, vec![ivec(&[1, 1, 0]), ivec(&[0, 2, 2])]);
        let sat = saturate(&input);
        let expected = LatticeBasis::new(3, vec![ivec(&[1, 1, 0]), ivec(&[0, 1, 1])]);
        assert!(sat.same_lattice(&expected));
        assert_eq!(sublattice_index(&input, &sat), Some(BigInt::from(2)));
        assert_eq!(saturate(&sat), sat);
    }

    #[test]
    fn skew_normal_form_examples() {
        let std4 = im(&[&[0, 0, 1, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, -1, 0, 0]]);
        let snf = skew_normal_form(&std4).unwrap();
        assert_eq!(snf.divisors, ivec(&[1, 1]));
        assert_eq!(snf.transform, im(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]));

        let snf = skew_normal_form(&im(&[&[0, 2], &[-2, 0]])).unwrap();
        assert_eq!(snf.divisors, ivec(&[2]));

        assert_eq!(skew_normal_form(&im(&[&[0, 0], &[0, 0]])), Err(LinalgError::Degenerate));
    }

    #[test]
    fn determinant_inverse_and_solve() {
        let m = qm(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.determinant(), q(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Matrix::identity(3));
        let x = m.solve(&[q(1), q(2), q(3)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(1), q(2), q(3)]);
        assert_eq!(qm(&[&[1, 1], &[1, 1]]).solve(&[q(1), q(2)]), None);
        assert_eq!(qm(&[&[0, 1], &[1, 0]]).determinant(), q(-1));
        assert_eq!(Matrix::<Q>::from_rows(vec![vec![qf(1, 2)]]).inverse().unwrap().get(0, 0), &q(2));
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let a = qm(&[&[0, 1, 2, 3], &[-1, 0, 4, 5], &[-2, -4, 0, 6], &[-3, -5, -6, 0]]);
        // Pf = a01 a23 − a02 a13 + a03 a12
        assert_eq!(a.pfaffian(), q(6 - 10 + 12));
        let p = a.pfaffian();
        assert_eq!(&p * &p, a.determinant());
        let swapped = qm(&[&[0, 0, 1, 0], &[0, 0, 0, 1], &[-1, 0, 0, 0], &[0, -1, 0, 0]]);
        assert_eq!(swapped.pfaffian(), q(-1));
    }

    #[test]
    fn hermite_and_integer_kernel() {
        let a = im(&[&[2, 4, 6], &[1, 3, 5]]);
        let k = integer_kernel(&a);
        assert_eq!(k.len(), 1);
        let v: Vec<BigInt> = k[0].clone();
        assert!(v == ivec(&[1, -2, 1]) || v == ivec(&[-1, 2, -1]));
        let (h, u) = hermite_normal_form(&a);
        let uq = Matrix::<Q>::from_integer(&u);
        assert_eq!(uq.determinant().abs(), q(1));
        let prod = Matrix::<Q>::from_integer(&u).mul(&Matrix::<Q>::from_integer(&a));
        assert_eq!(prod, Matrix::<Q>::from_integer(&h));
    }
}
