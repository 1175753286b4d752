//! Dense arbitrary-precision integer matrices, Smith normal form with
//! transform accumulation, and the lattice solvers built on it (kernels,
//! membership, quotient invariants).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

/// Row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

/// U * m * V = D with U, V unimodular and D diagonal, d1 | d2 | ...
pub struct SmithForm {
    pub u: Option<IntMatrix>,
    pub d: IntMatrix,
    pub v: Option<IntMatrix>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        let n = self.d.rows.min(self.d.cols);
        (0..n).take_while(|&i| !self.d.get(i, i).is_zero()).count()
    }

    /// Positive diagonal entries in chain order.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let n = self.d.rows.min(self.d.cols);
        (0..n)
            .map(|i| self.d.get(i, i).clone())
            .filter(|d| !d.is_zero())
            .collect()
    }
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            entries: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
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

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.get(i, j).is_one()
                    } else {
                        self.get(i, j).is_zero()
                    }
                })
            })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
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
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    /// Vertical concatenation.
    pub fn stack(blocks: &[&IntMatrix]) -> IntMatrix {
        assert!(!blocks.is_empty());
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols));
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut entries = Vec::with_capacity(rows * cols);
        for b in blocks {
            entries.extend_from_slice(&b.entries);
        }
        IntMatrix { rows, cols, entries }
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<BigInt>], rows: usize) -> IntMatrix {
        let mut m = IntMatrix::zero(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| self.row_vec(i)).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    fn row_vec(&self, i: usize) -> Vec<BigInt> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    /// Smith normal form. Transforms are only accumulated when requested,
    /// which matters for the tall cocycle systems.
    pub fn smith_normal_form(&self, want_u: bool, want_v: bool) -> SmithForm {
        let mut d = self.clone();
        let mut u = want_u.then(|| IntMatrix::identity(self.rows));
        let mut v = want_v.then(|| IntMatrix::identity(self.cols));
        let steps = self.rows.min(self.cols);

        for k in 0..steps {
            'pivot: loop {
                // Smallest-magnitude nonzero pivot keeps entry growth down.
                let mut best: Option<(usize, usize)> = None;
                for i in k..d.rows {
                    for j in k..d.cols {
                        let e = d.get(i, j);
                        if e.is_zero() {
                            continue;
                        }
                        if best.map_or(true, |(bi, bj)| e.abs() < d.get(bi, bj).abs()) {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((pi, pj)) = best else {
                    return finish(d, u, v, k);
                };
                d.swap_rows(k, pi, u.as_mut());
                d.swap_cols(k, pj, v.as_mut());

                let mut clean = true;
                for i in k + 1..d.rows {
                    if !d.get(i, k).is_zero() {
                        let q = rounded_div(d.get(i, k), d.get(k, k));
                        if !q.is_zero() {
                            d.row_axpy(i, k, &-q, u.as_mut());
                        }
                        if !d.get(i, k).is_zero() {
                            clean = false;
                        }
                    }
                }
                for j in k + 1..d.cols {
                    if !d.get(k, j).is_zero() {
                        let q = rounded_div(d.get(k, j), d.get(k, k));
                        if !q.is_zero() {
                            d.col_axpy(j, k, &-q, v.as_mut());
                        }
                        if !d.get(k, j).is_zero() {
                            clean = false;
                        }
                    }
                }
                if !clean {
                    continue 'pivot;
                }
                // Pivot must divide the rest of the submatrix so that the
                // diagonal forms a divisibility chain.
                for i in k + 1..d.rows {
                    for j in k + 1..d.cols {
                        if !d.get(i, j).mod_floor(d.get(k, k)).is_zero() {
                            d.row_axpy(k, i, &BigInt::one(), u.as_mut());
                            continue 'pivot;
                        }
                    }
                }
                break;
            }
            if d.get(k, k).is_negative() {
                d.scale_row(k, u.as_mut());
            }
        }
        finish(d, u, v, steps)
    }

    fn swap_rows(&mut self, a: usize, b: usize, u: Option<&mut IntMatrix>) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let x = self.get(a, j).clone();
            let y = self.get(b, j).clone();
            self.set(a, j, y);
            self.set(b, j, x);
        }
        if let Some(u) = u {
            for j in 0..u.cols {
                let x = u.get(a, j).clone();
                let y = u.get(b, j).clone();
                u.set(a, j, y);
                u.set(b, j, x);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize, v: Option<&mut IntMatrix>) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let x = self.get(i, a).clone();
            let y = self.get(i, b).clone();
            self.set(i, a, y);
            self.set(i, b, x);
        }
        if let Some(v) = v {
            for i in 0..v.rows {
                let x = v.get(i, a).clone();
                let y = v.get(i, b).clone();
                v.set(i, a, y);
                v.set(i, b, x);
            }
        }
    }

    /// row a += q * row b
    fn row_axpy(&mut self, a: usize, b: usize, q: &BigInt, u: Option<&mut IntMatrix>) {
        for j in 0..self.cols {
            let add = q * self.get(b, j);
            let cur = self.get(a, j) + add;
            self.set(a, j, cur);
        }
        if let Some(u) = u {
            for j in 0..u.cols {
                let add = q * u.get(b, j);
                let cur = u.get(a, j) + add;
                u.set(a, j, cur);
            }
        }
    }

    /// col a += q * col b
    fn col_axpy(&mut self, a: usize, b: usize, q: &BigInt, v: Option<&mut IntMatrix>) {
        for i in 0..self.rows {
            let add = q * self.get(i, b);
            let cur = self.get(i, a) + add;
            self.set(i, a, cur);
        }
        if let Some(v) = v {
            for i in 0..v.rows {
                let add = q * v.get(i, b);
                let cur = v.get(i, a) + add;
                v.set(i, a, cur);
            }
        }
    }

    fn scale_row(&mut self, i: usize, u: Option<&mut IntMatrix>) {
        for j in 0..self.cols {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
        if let Some(u) = u {
            for j in 0..u.cols {
                let v = -u.get(i, j).clone();
                u.set(i, j, v);
            }
        }
    }

    /// A primitive basis of the integer kernel { x : m x = 0 }, as matrix
    /// columns. Kernels of integer matrices are saturated, and the columns of
    /// the unimodular V past the rank provide a basis directly.
    pub fn kernel_basis(&self) -> IntMatrix {
        let snf = self.smith_normal_form(false, true);
        let rank = snf.rank();
        let v = snf.v.expect("v requested");
        let cols: Vec<Vec<BigInt>> = (rank..self.cols).map(|j| v.column(j)).collect();
        IntMatrix::from_columns(&cols, self.cols)
    }

    /// Solves basis * y = targets over the integers, all columns at once.
    /// Returns None when some target column is outside the spanned lattice.
    pub fn solve_exact(basis: &IntMatrix, targets: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(basis.rows, targets.rows);
        let snf = basis.smith_normal_form(true, true);
        let u = snf.u.as_ref().expect("u requested");
        let v = snf.v.as_ref().expect("v requested");
        let up = u.mul(targets);
        let mut z = IntMatrix::zero(basis.cols, targets.cols);
        let n = basis.rows.min(basis.cols);
        for i in 0..basis.rows {
            for j in 0..targets.cols {
                let rhs = up.get(i, j);
                if i < n && !snf.d.get(i, i).is_zero() {
                    let (q, r) = rhs.div_rem(snf.d.get(i, i));
                    if !r.is_zero() {
                        return None;
                    }
                    z.set(i, j, q);
                } else if !rhs.is_zero() {
                    return None;
                }
            }
        }
        Some(v.mul(&z))
    }
}

fn finish(d: IntMatrix, u: Option<IntMatrix>, v: Option<IntMatrix>, _rank: usize) -> SmithForm {
    SmithForm { u, d, v }
}

/// Division rounded to nearest, which halves entries instead of merely
/// reducing them below the pivot.
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = a.div_mod_floor(b);
    if r.abs() * two > b.abs() {
        q + b.signum() * r.signum()
    } else {
        q
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}
