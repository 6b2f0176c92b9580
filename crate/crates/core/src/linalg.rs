//! Dense and sparse linear-algebra kernels.
//!
//! Dense matrices are column-major. Sparse matrices use compressed sparse
//! row storage with sorted column indices and no duplicate entries.

use crate::error::{Error, Result};

/// Relative tolerance on `R[i,i] / R[0,0]` below which a column is treated
/// as dependent during QR factorisation.
pub const RANK_TOL: f64 = 1e-13;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from equally long columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.len() });
            }
            data.extend_from_slice(c);
        }
        Ok(Self { rows, cols: columns.len(), data })
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_slice(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols, "row slice has the wrong length");
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, values[i * cols + j]);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] += v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            axpy(xj, self.column(j), &mut y);
        }
        y
    }

    /// `Aᵀ x`
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols).map(|j| dot(self.column(j), x)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let col = self.matvec(other.column(j));
            out.column_mut(j).copy_from_slice(&col);
        }
        out
    }

    /// Leading `rows x cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for j in 0..cols {
            out.column_mut(j).copy_from_slice(&self.column(j)[..rows]);
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Thin QR factors `M = Q R` with orthonormal `Q` (m x n) and upper
/// triangular `R` (n x n).
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Modified Gram–Schmidt QR that grows one column at a time.
///
/// Every column is orthogonalised twice, which keeps `Q` orthonormal to
/// working precision even for badly conditioned inputs.
#[derive(Debug, Clone, Default)]
pub struct IncrementalQr {
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

/// Result of projecting a vector onto the span of the current `Q`.
#[derive(Debug, Clone)]
pub struct Projection {
    /// `Qᵀ v` (the entries above the diagonal in the new `R` column).
    pub coefficients: Vec<f64>,
    /// Component of `v` orthogonal to the span.
    pub remainder: Vec<f64>,
    /// Norm of the remainder (the would-be diagonal entry).
    pub remainder_norm: f64,
}

impl IncrementalQr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ncols(&self) -> usize {
        self.q.len()
    }

    /// `R[0,0]`, the reference scale for the rank test.
    pub fn scale(&self) -> f64 {
        self.r.first().map_or(0.0, |c| c[0])
    }

    pub fn project(&self, v: &[f64]) -> Projection {
        let mut w = v.to_vec();
        let mut coefficients = vec![0.0; self.q.len()];
        for _pass in 0..2 {
            for (i, qi) in self.q.iter().enumerate() {
                let c = dot(qi, &w);
                coefficients[i] += c;
                axpy(-c, qi, &mut w);
            }
        }
        let remainder_norm = norm2(&w);
        Projection { coefficients, remainder: w, remainder_norm }
    }

    /// Whether a projection remainder counts as numerically zero.
    pub fn is_dependent(&self, p: &Projection) -> bool {
        let n = p.remainder_norm;
        if !n.is_finite() || n == 0.0 {
            return true;
        }
        match self.q.len() {
            0 => false,
            _ => n <= RANK_TOL * self.scale(),
        }
    }

    /// Appends a column; fails with `RankDeficient` when it is dependent.
    pub fn push_column(&mut self, v: &[f64]) -> Result<()> {
        if let Some(q0) = self.q.first() {
            if q0.len() != v.len() {
                return Err(Error::DimensionMismatch { expected: q0.len(), found: v.len() });
            }
        }
        let p = self.project(v);
        if self.is_dependent(&p) {
            return Err(Error::RankDeficient { column: self.q.len() });
        }
        let inv = 1.0 / p.remainder_norm;
        self.q.push(p.remainder.iter().map(|x| x * inv).collect());
        let mut col = p.coefficients;
        col.push(p.remainder_norm);
        self.r.push(col);
        Ok(())
    }

    pub fn q_column(&self, j: usize) -> &[f64] {
        &self.q[j]
    }

    /// `R[i,j]` for `i <= j`.
    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        if i <= j {
            self.r[j][i]
        } else {
            0.0
        }
    }

    pub fn r_matrix(&self) -> DenseMatrix {
        let n = self.r.len();
        let mut r = DenseMatrix::zeros(n, n);
        for (j, col) in self.r.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                r.set(i, j, v);
            }
        }
        r
    }

    /// `Q y` for a coefficient vector `y` of length `ncols`.
    pub fn q_times(&self, y: &[f64]) -> Vec<f64> {
        let m = self.q.first().map_or(0, |c| c.len());
        let mut out = vec![0.0; m];
        for (qj, &yj) in self.q.iter().zip(y) {
            axpy(yj, qj, &mut out);
        }
        out
    }

    pub fn into_factors(self) -> QrFactors {
        let r = self.r_matrix();
        let q = DenseMatrix::from_columns(&self.q).expect("columns of equal length");
        QrFactors { q, r }
    }
}

/// Thin QR of an `m x n` matrix with `m >= n`.
pub fn qr_factor(m: &DenseMatrix) -> Result<QrFactors> {
    if m.rows() < m.cols() {
        return Err(Error::RankDeficient { column: m.rows() });
    }
    let mut qr = IncrementalQr::new();
    for j in 0..m.cols() {
        qr.push_column(m.column(j))?;
    }
    Ok(qr.into_factors())
}

fn diag_threshold(r: &DenseMatrix) -> f64 {
    let n = r.cols().min(r.rows());
    let max = (0..n).map(|i| r.get(i, i).abs()).fold(0.0, f64::max);
    RANK_TOL * max
}

/// Solves `R x = b` by back substitution.
pub fn solve_upper_triangular(r: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = r.cols();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let tol = diag_threshold(r);
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let d = r.get(i, i);
        if d == 0.0 || d.abs() <= tol || !d.is_finite() {
            return Err(Error::SingularTriangular { index: i });
        }
        let mut s = x[i];
        for j in i + 1..n {
            s -= r.get(i, j) * x[j];
        }
        x[i] = s / d;
    }
    Ok(x)
}

/// Solves `Rᵀ y = b` by forward substitution, `R` upper triangular.
pub fn solve_upper_transposed(r: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = r.cols();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let tol = diag_threshold(r);
    let mut y = b.to_vec();
    for i in 0..n {
        let d = r.get(i, i);
        if d == 0.0 || d.abs() <= tol || !d.is_finite() {
            return Err(Error::SingularTriangular { index: i });
        }
        let mut s = y[i];
        for j in 0..i {
            s -= r.get(j, i) * y[j];
        }
        y[i] = s / d;
    }
    Ok(y)
}

/// Solves `RᵀR x = b` with two triangular solves.
pub fn solve_normal_equations(r: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let y = solve_upper_transposed(r, b)?;
    solve_upper_triangular(r, &y)
}

/// Least-squares solution of `min ||A x - b||` via QR.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let f = qr_factor(a)?;
    solve_upper_triangular(&f.r, &f.q.tr_matvec(b))
}

/// LU factorisation with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.cols() });
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let (mut piv, mut best) = (k, lu.get(k, k).abs());
            for i in k + 1..n {
                let v = lu.get(i, k).abs();
                if v > best {
                    piv = i;
                    best = v;
                }
            }
            if best == 0.0 || best <= f64::EPSILON * scale * 1e-3 || !best.is_finite() {
                return Err(Error::SingularMatrix { column: k });
            }
            if piv != k {
                perm.swap(piv, k);
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(piv, j));
                    lu.set(piv, j, t);
                }
            }
            let d = lu.get(k, k);
            for i in k + 1..n {
                let l = lu.get(i, k) / d;
                lu.set(i, k, l);
            }
            for j in k + 1..n {
                let ukj = lu.get(k, j);
                if ukj != 0.0 {
                    for i in k + 1..n {
                        let l = lu.get(i, k);
                        lu.add(i, j, -l * ukj);
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }
}

pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(LuFactors::factor(a)?.solve(b))
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator; duplicates are summed on `build`.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> SparseMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { rows: self.rows, cols: self.cols, row_ptr, col_idx, values }
    }
}

impl SparseMatrix {
    /// Matrix with a fixed pattern and all stored values zero.
    /// `pattern[i]` must be sorted and free of duplicates.
    pub fn from_pattern(cols: usize, pattern: Vec<Vec<usize>>) -> Self {
        let rows = pattern.len();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for r in pattern {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self { rows, cols, row_ptr, col_idx, values }
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut b = TripletBuilder::new(a.rows(), a.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let v = a.get(i, j);
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 1.0);
        }
        b.build()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[s..e], &self.values[s..e])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let s = self.row_ptr[i];
        let e = self.row_ptr[i + 1];
        self.col_idx[s..e].binary_search(&j).ok().map(|k| s + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    /// Adds to a stored entry. Panics if `(i, j)` is outside the pattern.
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is not in the sparsity pattern"));
        self.values[k] += v;
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `b - A x`
    pub fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = self.matvec(x);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        r
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.cols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let k = next[j];
                col_idx[k] = i;
                values[k] = v;
                next[j] += 1;
            }
        }
        Self { rows: self.cols, cols: self.rows, row_ptr, col_idx, values }
    }

    /// Sparse product `A B` (row-by-row accumulation).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut acc = vec![0.0; other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.rows {
            touched.clear();
            let (ac, av) = self.row(i);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k);
                for (&j, &b) in bc.iter().zip(bv) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows: self.rows, cols: other.cols, row_ptr, col_idx, values }
    }

    /// Kronecker product `A ⊗ B`.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let mut t = TripletBuilder::new(a.rows * b.rows, a.cols * b.cols);
        for ia in 0..a.rows {
            let (ac, av) = a.row(ia);
            for ib in 0..b.rows {
                let (bc, bv) = b.row(ib);
                for (&ja, &va) in ac.iter().zip(av) {
                    for (&jb, &vb) in bc.iter().zip(bv) {
                        t.push(ia * b.rows + ib, ja * b.cols + jb, va * vb);
                    }
                }
            }
        }
        t.build()
    }

    /// Entry-wise sum of two matrices of equal shape.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut t = TripletBuilder::new(self.rows, self.cols);
        for m in [self, other] {
            for i in 0..m.rows {
                let (c, v) = m.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    t.push(i, j, x);
                }
            }
        }
        t.build()
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.cols];
        for (new, &old) in cols.iter().enumerate() {
            map[old] = new;
        }
        let mut t = TripletBuilder::new(rows.len(), cols.len());
        for (ni, &i) in rows.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    t.push(ni, map[j], x);
                }
            }
        }
        t.build()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d.add(i, j, x);
            }
        }
        d
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    /// Largest half-bandwidth `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.rows {
            for &j in self.row(i).0 {
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_dense().max_abs_diff(&other.to_dense())
    }
}

/// Cholesky factor of a symmetric positive definite banded matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // l[i * (bw + 1) + (i - j)] = L[i, j] for i - bw <= j <= i
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.cols() });
        }
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let (c, v) = a.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if j <= i {
                    l[i * w + (i - j)] = x;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = l[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if j == i {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let w = self.bw + 1;
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + w).min(self.n) {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DenseMatrix {
        DenseMatrix::from_row_slice(4, 3, &[
            2.0, -1.0, 0.5, //
            1.0, 3.0, -2.0, //
            0.0, 1.0, 4.0, //
            1.5, 0.0, 1.0,
        ])
    }

    #[test]
    fn qr_reproduces_matrix_and_is_orthonormal() {
        let a = sample();
        let f = qr_factor(&a).unwrap();
        assert!(f.q.matmul(&f.r).max_abs_diff(&a) < 1e-14);
        let qtq = f.q.transpose().matmul(&f.q);
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(3)) < 1e-14);
        for i in 0..3 {
            assert!(f.r.get(i, i) > 0.0);
            for j in 0..i {
                assert_eq!(f.r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn qr_detects_dependent_column() {
        let a = DenseMatrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]).unwrap();
        assert_eq!(qr_factor(&a).unwrap_err(), Error::RankDeficient { column: 1 });
        let z = DenseMatrix::from_columns(&[vec![0.0; 3]]).unwrap();
        assert_eq!(qr_factor(&z).unwrap_err(), Error::RankDeficient { column: 0 });
    }

    #[test]
    fn triangular_solves() {
        let r = DenseMatrix::from_row_slice(3, 3, &[2.0, 1.0, -1.0, 0.0, 3.0, 0.5, 0.0, 0.0, 4.0]);
        let x = [1.0, -2.0, 0.25];
        let b = r.matvec(&x);
        let got = solve_upper_triangular(&r, &b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-15);
        }
        let bt = r.tr_matvec(&x);
        let got = solve_upper_transposed(&r, &bt).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-15);
        }
        let s = DenseMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            solve_upper_triangular(&s, &[1.0, 1.0]).unwrap_err(),
            Error::SingularTriangular { index: 1 }
        );
    }

    #[test]
    fn normal_equations_match_least_squares() {
        let a = sample();
        let b = [1.0, 0.0, -1.0, 2.0];
        let f = qr_factor(&a).unwrap();
        let x = solve_normal_equations(&f.r, &a.tr_matvec(&b)).unwrap();
        let y = least_squares(&a, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
        // residual orthogonal to the column space
        let r = sub(&b, &a.matvec(&y));
        for v in a.tr_matvec(&r) {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn lu_solves_and_flags_singular() {
        let a = DenseMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 4.0, -1.0, 3.0]);
        let x = [0.5, -1.0, 2.0];
        let got = lu_solve(&a, &a.matvec(&x)).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
        let s = DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(lu_solve(&s, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i > 0 {
                t.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn sparse_ops_agree_with_dense() {
        let a = SparseMatrix::from_dense(&sample());
        let ad = a.to_dense();
        assert_eq!(ad, sample());
        let at = a.transpose();
        assert_eq!(at.to_dense(), sample().transpose());
        let ata = at.matmul(&a);
        assert!(ata.to_dense().max_abs_diff(&sample().transpose().matmul(&sample())) < 1e-14);
        let x = [1.0, 2.0, 3.0];
        assert_eq!(a.matvec(&x), sample().matvec(&x));
        let sub = a.submatrix(&[3, 1], &[2, 0]);
        assert_eq!(sub.to_dense(), DenseMatrix::from_row_slice(2, 2, &[1.0, 1.5, -2.0, 1.0]));
    }

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(1, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 0.5);
        let m = t.build();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 0), 1.5);
    }

    #[test]
    fn kron_matches_dense_definition() {
        let a = tridiag(3);
        let b = SparseMatrix::from_dense(&DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let k = SparseMatrix::kron(&a, &b);
        for i in 0..6 {
            for j in 0..6 {
                let e = a.get(i / 2, j / 2) * b.get(i % 2, j % 2);
                assert_eq!(k.get(i, j), e);
            }
        }
    }

    #[test]
    fn band_cholesky_solves_spd() {
        let a = tridiag(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let c = BandCholesky::factor(&a).unwrap();
        let got = c.solve(&a.matvec(&x));
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-11);
        }
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 2.0);
        t.push(1, 0, 2.0);
        t.push(1, 1, 1.0);
        assert!(matches!(BandCholesky::factor(&t.build()), Err(Error::NotPositiveDefinite { row: 1 })));
    }
}
