// Copyright 2026 The covtrade Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense complex linear algebra with tensor-factor bookkeeping.
//!
//! Storage is row-major. Multi-index layouts follow the Kronecker convention: for factors
//! `(f_0, f_1, ..., f_{k-1})` the flat index of digits `(i_0, ..., i_{k-1})` is
//! `((i_0 * f_1 + i_1) * f_2 + ...)`, so factor 0 is the most significant digit.
//!
//! Choi vectorization is frozen as `vec(A) = (I ⊗ A)|Φ⟩` with `|Φ⟩ = Σ_i |i⟩ ⊗ |i⟩`; the
//! component at `i * n_out + o` equals `A[o, i]`. Kraus extraction and the channel identity
//! `E(ρ) = Tr_in[(ρᵀ ⊗ I) R]` both rely on this layout.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance on |M - M†| accepted by [`HermitianOperator::new`], relative to `1 + max|M|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Self::from_fn(n, m, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    /// Column vector from amplitudes.
    pub fn column(values: &[C64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// Standard basis vector `|k⟩` of dimension `n`.
    pub fn basis_vector(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n, 1);
        v[(k, 0)] = ONE;
        v
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, a) in row.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * v * self†` for a square `v`.
    pub fn conjugate(&self, v: &Self) -> Self {
        self.matmul(v).matmul(&self.adjoint())
    }

    /// Outer product `|a⟩⟨b|` of two column vectors.
    pub fn outer(a: &Self, b: &Self) -> Self {
        assert!(a.cols == 1 && b.cols == 1);
        Self::from_fn(a.rows, b.rows, |r, c| a.data[r] * b.data[c].conj())
    }

    /// Inner product `⟨a|b⟩` of two column vectors.
    pub fn inner(a: &Self, b: &Self) -> C64 {
        assert!(a.cols == 1 && b.cols == 1 && a.rows == b.rows);
        a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum()
    }

    /// Kronecker product: `(a ⊗ b)[i*rb + k, j*cb + l] = a[i,j] * b[k,l]`.
    pub fn kron(&self, b: &Self) -> Self {
        let (rb, cb) = (b.rows, b.cols);
        let mut out = Self::zeros(self.rows * rb, self.cols * cb);
        let oc = out.cols;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..rb {
                    for l in 0..cb {
                        out.data[(i * rb + k) * oc + j * cb + l] = a * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Choi vectorization `(I ⊗ A)|Φ⟩` of an `n_out × n_in` map.
    pub fn vec(&self) -> Self {
        let (n_out, n_in) = (self.rows, self.cols);
        let mut v = Self::zeros(n_in * n_out, 1);
        for i in 0..n_in {
            for o in 0..n_out {
                v.data[i * n_out + o] = self[(o, i)];
            }
        }
        v
    }

    /// Inverse of [`ComplexMatrix::vec`].
    pub fn unvec(v: &Self, n_in: usize, n_out: usize) -> Result<Self> {
        if v.cols != 1 || v.rows != n_in * n_out {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x1 column", n_in * n_out),
                found: format!("{}x{}", v.rows, v.cols),
            });
        }
        Ok(Self::from_fn(n_out, n_in, |o, i| v.data[i * n_out + o]))
    }

    /// Unnormalized maximally entangled vector `Σ_i |i⟩ ⊗ |i⟩` on `d ⊗ d`.
    pub fn max_entangled(d: usize) -> Self {
        Self::identity(d).vec()
    }

    /// Lifts `op` acting on the listed factor positions to the full tensor product, with
    /// identity on every other factor. `positions` may be in any order; the k-th digit of
    /// `op`'s own index corresponds to `positions[k]`.
    pub fn embed(op: &Self, positions: &[usize], factors: &[usize]) -> Result<Self> {
        let sub: Vec<usize> = positions
            .iter()
            .map(|&p| {
                factors.get(p).copied().ok_or(Error::FactorOutOfRange {
                    index: p,
                    count: factors.len(),
                })
            })
            .collect::<Result<_>>()?;
        let sub_dim: usize = sub.iter().product();
        if op.rows != sub_dim || op.cols != sub_dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{sub_dim}x{sub_dim}"),
                found: format!("{}x{}", op.rows, op.cols),
            });
        }
        let dim: usize = factors.iter().product();
        let digits: Vec<Vec<usize>> = (0..dim).map(|x| split_index(x, factors)).collect();
        let sub_index = |d: &[usize]| {
            positions
                .iter()
                .zip(&sub)
                .fold(0, |acc, (&p, &f)| acc * f + d[p])
        };
        let rest_equal = |a: &[usize], b: &[usize]| {
            (0..factors.len()).all(|k| positions.contains(&k) || a[k] == b[k])
        };
        Ok(Self::from_fn(dim, dim, |r, c| {
            let (dr, dc) = (&digits[r], &digits[c]);
            if rest_equal(dr, dc) {
                op[(sub_index(dr), sub_index(dc))]
            } else {
                ZERO
            }
        }))
    }
}

/// Splits a flat index into mixed-radix digits (factor 0 most significant).
pub fn split_index(mut index: usize, factors: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; factors.len()];
    for k in (0..factors.len()).rev() {
        digits[k] = index % factors[k];
        index /= factors[k];
    }
    digits
}

pub fn join_index(digits: &[usize], factors: &[usize]) -> usize {
    digits
        .iter()
        .zip(factors)
        .fold(0, |acc, (d, f)| acc * f + d)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Ordered tensor factor dimensions; the first `in_count` factors form the input space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TensorShape {
    factors: Vec<usize>,
    in_count: usize,
}

impl TensorShape {
    pub fn new(factors: Vec<usize>, in_count: usize) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::InvalidArgument(
                "tensor factors must be positive".into(),
            ));
        }
        if in_count > factors.len() {
            return Err(Error::FactorOutOfRange {
                index: in_count,
                count: factors.len(),
            });
        }
        Ok(Self { factors, in_count })
    }

    /// A single factor of dimension `d`.
    pub fn flat(d: usize) -> Self {
        Self {
            factors: vec![d],
            in_count: 0,
        }
    }

    /// Input/output bipartition `n_in ⊗ n_out`.
    pub fn bipartite(n_in: usize, n_out: usize) -> Self {
        Self {
            factors: vec![n_in, n_out],
            in_count: 1,
        }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn in_count(&self) -> usize {
        self.in_count
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn in_dim(&self) -> usize {
        self.factors[..self.in_count].iter().product()
    }

    pub fn out_dim(&self) -> usize {
        self.factors[self.in_count..].iter().product()
    }

    fn check_factors(&self, set: &[usize]) -> Result<()> {
        for &k in set {
            if k >= self.factors.len() {
                return Err(Error::FactorOutOfRange {
                    index: k,
                    count: self.factors.len(),
                });
            }
        }
        Ok(())
    }
}

/// Hermitian operator together with its tensor-factor layout.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    shape: TensorShape,
}

impl HermitianOperator {
    /// Validates Hermiticity and symmetrizes `(M + M†)/2` to strip accumulated roundoff.
    pub fn new(matrix: ComplexMatrix, shape: TensorShape) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", matrix.rows, matrix.cols),
            });
        }
        if shape.dim() != matrix.rows {
            return Err(Error::ShapeMismatch {
                factors: shape.factors.clone(),
                dim: matrix.rows,
            });
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let adj = matrix.adjoint();
        let deviation = matrix.max_abs_diff(&adj);
        if deviation > HERMITIAN_TOL * (1.0 + matrix.max_abs()) {
            return Err(Error::NotHermitian { deviation });
        }
        let matrix = (&matrix + &adj).scale_real(0.5);
        Ok(Self { matrix, shape })
    }

    /// Single-factor operator.
    pub fn flat(matrix: ComplexMatrix) -> Result<Self> {
        let d = matrix.rows;
        Self::new(matrix, TensorShape::flat(d))
    }

    pub fn identity(shape: TensorShape) -> Self {
        Self {
            matrix: ComplexMatrix::identity(shape.dim()),
            shape,
        }
    }

    pub fn zeros(shape: TensorShape) -> Self {
        let d = shape.dim();
        Self {
            matrix: ComplexMatrix::zeros(d, d),
            shape,
        }
    }

    /// Rank-one projector-like operator `|v⟩⟨v|`.
    pub fn from_vector(v: &ComplexMatrix, shape: TensorShape) -> Result<Self> {
        Self::new(ComplexMatrix::outer(v, v), shape)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn with_shape(self, shape: TensorShape) -> Result<Self> {
        if shape.dim() != self.dim() {
            return Err(Error::ShapeMismatch {
                factors: shape.factors.clone(),
                dim: self.dim(),
            });
        }
        Ok(Self { shape, ..self })
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
            shape: self.shape.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            shape: self.shape.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
            shape: self.shape.clone(),
        })
    }

    /// `a ⊗ b` with concatenated shapes; the input partition is taken from `a` unless `a` has
    /// none, in which case it spans all of `a`'s factors.
    pub fn kron(&self, other: &Self) -> Self {
        let mut factors = self.shape.factors.clone();
        factors.extend_from_slice(&other.shape.factors);
        let in_count = if self.shape.in_count == 0 {
            self.shape.factors.len()
        } else {
            self.shape.in_count
        };
        Self {
            matrix: self.matrix.kron(&other.matrix),
            shape: TensorShape { factors, in_count },
        }
    }

    /// `U · self · U†`; the result is re-symmetrized.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        let m = u.conjugate(&self.matrix);
        let adj = m.adjoint();
        Self {
            matrix: (&m + &adj).scale_real(0.5),
            shape: self.shape.clone(),
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.dim(), self.dim()),
                found: format!("{}x{}", other.dim(), other.dim()),
            });
        }
        Ok(())
    }

    /// Traces out the listed factors. The input partition counts the surviving input factors.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<Self> {
        self.shape.check_factors(traced)?;
        let factors = &self.shape.factors;
        let kept: Vec<usize> = (0..factors.len()).filter(|k| !traced.contains(k)).collect();
        let gone: Vec<usize> = (0..factors.len()).filter(|k| traced.contains(k)).collect();
        let kept_f: Vec<usize> = kept.iter().map(|&k| factors[k]).collect();
        let gone_f: Vec<usize> = gone.iter().map(|&k| factors[k]).collect();
        let kept_dim: usize = kept_f.iter().product();
        let gone_dim: usize = gone_f.iter().product();

        let compose = |kd: &[usize], gd: &[usize]| {
            let mut digits = vec![0; factors.len()];
            for (&k, &v) in kept.iter().zip(kd) {
                digits[k] = v;
            }
            for (&k, &v) in gone.iter().zip(gd) {
                digits[k] = v;
            }
            join_index(&digits, factors)
        };
        let kept_digits: Vec<Vec<usize>> = (0..kept_dim).map(|x| split_index(x, &kept_f)).collect();
        let gone_digits: Vec<Vec<usize>> = (0..gone_dim).map(|x| split_index(x, &gone_f)).collect();

        let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
        for r in 0..kept_dim {
            for c in 0..kept_dim {
                let mut acc = ZERO;
                for t in &gone_digits {
                    acc += self.matrix[(compose(&kept_digits[r], t), compose(&kept_digits[c], t))];
                }
                out[(r, c)] = acc;
            }
        }
        let in_count = kept.iter().filter(|&&k| k < self.shape.in_count).count();
        let shape = if kept_f.is_empty() {
            TensorShape::flat(1)
        } else {
            TensorShape::new(kept_f, in_count)?
        };
        Ok(Self { matrix: out, shape })
    }

    /// Transposes the listed factors in the product basis.
    pub fn partial_transpose(&self, transposed: &[usize]) -> Result<Self> {
        self.shape.check_factors(transposed)?;
        let factors = &self.shape.factors;
        let n = self.dim();
        let digits: Vec<Vec<usize>> = (0..n).map(|x| split_index(x, factors)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut dr = digits[r].clone();
                let mut dc = digits[c].clone();
                for &k in transposed {
                    std::mem::swap(&mut dr[k], &mut dc[k]);
                }
                out[(join_index(&dr, factors), join_index(&dc, factors))] = self.matrix[(r, c)];
            }
        }
        Ok(Self {
            matrix: out,
            shape: self.shape.clone(),
        })
    }

    /// Hilbert-Schmidt pairing `Tr[a b]`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        frobenius_inner(self, other)
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.values[0])
    }
}

/// `Tr[a · b]` for Hermitian operators of equal dimension.
pub fn frobenius_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    a.check_same_dim(b)?;
    let n = a.dim();
    let (am, bm) = (a.matrix.as_slice(), b.matrix.as_slice());
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += am[i * n + j] * bm[j * n + i];
        }
    }
    debug_assert!(
        acc.im.abs() <= 1e-12 * (1.0 + a.matrix.frobenius_norm() * b.matrix.frobenius_norm()),
        "Tr[ab] of Hermitian operators has imaginary part {}",
        acc.im
    );
    Ok(acc.re)
}

/// Spectral decomposition of a Hermitian operator; eigenvalues ascending, eigenvectors in
/// columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// `V f(Λ) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * fv[k] * v[(c, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|x| C64::new(x, 0.0))
    }

    pub fn vector(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::column(&self.vectors.col(k))
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies a real plane
/// rotation, so the 2×2 pivot block is diagonalized exactly. Sweeps continue until the
/// off-diagonal mass is below machine precision relative to the Frobenius norm.
pub fn eigh(op: &HermitianOperator) -> Result<Eigh> {
    let n = op.dim();
    let mut a = op.matrix.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let scale = a.max_abs();
    if n <= 1 || norm == 0.0 {
        return Ok(finish(a, v));
    }
    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += a[(r, c)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let target = f64::EPSILON * norm;
    let mut sweeps = 0;
    while off(&a) > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                norm: scale,
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= f64::MIN_POSITIVE || g < 1e-3 * target / (n as f64) {
                    continue;
                }
                let phase = apq / g;
                let (alpha, beta) = (a[(p, p)].re, a[(q, q)].re);
                let theta = (beta - alpha) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(alpha - t * g, 0.0);
                a[(q, q)] = C64::new(beta + t * g, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }
    Ok(finish(a, v))
}

fn finish(a: ComplexMatrix, v: ComplexMatrix) -> Eigh {
    let n = a.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigh { values, vectors }
}

/// Orthogonal basis of `d × d` Hermitian matrices under `Tr[AB]`: the identity followed by
/// the generalized Gell-Mann matrices (symmetric, antisymmetric, then diagonal).
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let shape = TensorShape::flat(d);
    let mut basis = vec![HermitianOperator::identity(shape.clone())];
    let mut push = |m: ComplexMatrix| {
        basis.push(HermitianOperator {
            matrix: m,
            shape: shape.clone(),
        })
    };
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = ONE;
            sym[(k, j)] = ONE;
            push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = -I;
            anti[(k, j)] = I;
            push(anti);
        }
    }
    for l in 1..d {
        let mut diag = ComplexMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = ONE;
        }
        diag[(l, l)] = C64::new(-(l as f64), 0.0);
        push(diag);
    }
    basis
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities_and_scalars() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
        let b = random_matrix(3, 2, &mut rng(1));
        let two = ComplexMatrix::diagonal(&[c(2.0)]);
        assert!(two.kron(&b).max_abs_diff(&b.scale_real(2.0)) == 0.0);
    }

    #[test]
    fn kron_matches_four_index_formula() {
        let mut r = rng(2);
        let a = random_matrix(2, 2, &mut r);
        let b = random_matrix(2, 2, &mut r);
        let k = a.kron(&b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 2 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut r = rng(3);
        let a = random_hermitian(TensorShape::flat(2), &mut r);
        let b = random_hermitian(TensorShape::flat(3), &mut r);
        let ab = a
            .kron(&b)
            .with_shape(TensorShape::new(vec![2, 3], 1).unwrap())
            .unwrap();
        let t = ab.partial_trace(&[1]).unwrap();
        assert!(t.matrix().max_abs_diff(&a.matrix().scale_real(b.trace())) < 1e-12);
        assert_eq!(t.shape().factors(), &[2]);
        let all = ab.partial_trace(&[0, 1]).unwrap();
        assert_eq!(all.dim(), 1);
        assert!((all.matrix()[(0, 0)].re - ab.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let op = random_hermitian(TensorShape::new(vec![2, 2], 1).unwrap(), &mut rng(4));
        let m = op.matrix();
        let t1 = op.partial_trace(&[1]).unwrap();
        let t0 = op.partial_trace(&[0]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let s1: C64 = (0..2).map(|k| m[(a * 2 + k, b * 2 + k)]).sum();
                let s0: C64 = (0..2).map(|k| m[(k * 2 + a, k * 2 + b)]).sum();
                assert!((t1.matrix()[(a, b)] - s1).norm() < 1e-15);
                assert!((t0.matrix()[(a, b)] - s0).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_factor() {
        let op = HermitianOperator::identity(TensorShape::bipartite(2, 2));
        assert_eq!(
            op.partial_trace(&[2]).unwrap_err(),
            Error::FactorOutOfRange { index: 2, count: 2 }
        );
        assert!(op.partial_transpose(&[5]).is_err());
    }

    #[test]
    fn partial_transpose_of_product_and_involution() {
        let mut r = rng(5);
        let a = random_hermitian(TensorShape::flat(2), &mut r);
        let b = random_hermitian(TensorShape::flat(3), &mut r);
        let ab = a.kron(&b);
        let pt = ab.partial_transpose(&[0]).unwrap();
        let expected = a.matrix().transpose().kron(b.matrix());
        assert_eq!(pt.matrix().max_abs_diff(&expected), 0.0);
        let x = random_hermitian(TensorShape::new(vec![3, 2, 2], 1).unwrap(), &mut r);
        let back = x
            .partial_transpose(&[0, 2])
            .unwrap()
            .partial_transpose(&[0, 2])
            .unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn partial_transpose_of_max_entangled_is_swap() {
        for d in [2, 3] {
            let phi = ComplexMatrix::max_entangled(d);
            let p = HermitianOperator::from_vector(&phi, TensorShape::bipartite(d, d)).unwrap();
            let swap = p.partial_transpose(&[0]).unwrap();
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let expected = if i == l && j == k { 1.0 } else { 0.0 };
                            assert_eq!(swap.matrix()[(i * d + j, k * d + l)], c(expected));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eigh_diagonal_and_identity() {
        let d = HermitianOperator::flat(ComplexMatrix::real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.eigh().unwrap().values, vec![1.0, 2.0, 3.0]);
        let id = HermitianOperator::identity(TensorShape::flat(4));
        assert!(id.eigh().unwrap().values.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut r = rng(6);
        for n in [2, 5, 8, 16] {
            let h = random_hermitian(TensorShape::flat(n), &mut r);
            let e = h.eigh().unwrap();
            let m = h.matrix();
            assert!(e.reconstruct().max_abs_diff(m) <= 1e-10 * (1.0 + m.max_abs()));
            let vv = e.vectors.adjoint().matmul(&e.vectors);
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigh_psd_has_nonnegative_spectrum() {
        let mut r = rng(7);
        for _ in 0..10 {
            let p = random_psd(TensorShape::flat(6), &mut r);
            assert!(p.min_eigenvalue().unwrap() >= -1e-10);
        }
        // rank-deficient
        let v = random_matrix(6, 1, &mut r);
        let p = HermitianOperator::from_vector(&v, TensorShape::flat(6)).unwrap();
        assert!(p.min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn vec_of_identity_is_max_entangled() {
        let phi = ComplexMatrix::identity(3).vec();
        for i in 0..9 {
            let expected = if i % 4 == 0 { ONE } else { ZERO };
            assert_eq!(phi[(i, 0)], expected);
        }
    }

    #[test]
    fn vec_satisfies_channel_identity() {
        // Tr_in[(ρᵀ ⊗ I) vec(a) vec(a)†] = a ρ a†
        let mut r = rng(8);
        let (n_in, n_out) = (3, 2);
        let a = random_matrix(n_out, n_in, &mut r);
        let rho = random_psd(TensorShape::flat(n_in), &mut r);
        let va = a.vec();
        let choi = ComplexMatrix::outer(&va, &va);
        let lhs = rho
            .matrix()
            .transpose()
            .kron(&ComplexMatrix::identity(n_out))
            .matmul(&choi);
        let lhs = HermitianOperator::new(
            (&lhs + &lhs.adjoint()).scale_real(0.5),
            TensorShape::bipartite(n_in, n_out),
        )
        .unwrap();
        let out = lhs.partial_trace(&[0]).unwrap();
        let expected = a.conjugate(rho.matrix());
        assert!(out.matrix().max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn hermitian_basis_small_cases() {
        let b1 = hermitian_basis(1);
        assert_eq!(b1.len(), 1);
        assert_eq!(b1[0].matrix()[(0, 0)], ONE);
        let b2 = hermitian_basis(2);
        assert_eq!(b2.len(), 4);
        for (j, x) in b2.iter().enumerate() {
            for (k, y) in b2.iter().enumerate() {
                let ip = x.inner(y).unwrap();
                if j == k {
                    assert_eq!(ip, 2.0);
                } else {
                    assert_eq!(ip, 0.0);
                }
            }
        }
    }

    #[test]
    fn hermitian_basis_is_complete() {
        let d = 3;
        let basis = hermitian_basis(d);
        assert_eq!(basis.len(), 9);
        let y = random_hermitian(TensorShape::flat(d), &mut rng(9));
        let mut acc = HermitianOperator::zeros(TensorShape::flat(d));
        for e in &basis {
            let coeff = y.inner(e).unwrap() / e.inner(e).unwrap();
            acc = acc.add(&e.scale(coeff)).unwrap();
        }
        assert!(acc.matrix().max_abs_diff(y.matrix()) <= 1e-12);
    }

    #[test]
    fn frobenius_inner_cases() {
        let id = HermitianOperator::identity(TensorShape::flat(5));
        assert_eq!(id.inner(&id).unwrap(), 5.0);
        let z = HermitianOperator::zeros(TensorShape::flat(5));
        let mut r = rng(10);
        let a = random_hermitian(TensorShape::flat(5), &mut r);
        assert_eq!(a.inner(&z).unwrap(), 0.0);
        let b = random_hermitian(TensorShape::flat(5), &mut r);
        let mut s = ZERO;
        for i in 0..5 {
            for j in 0..5 {
                s += a.matrix()[(i, j)] * b.matrix()[(j, i)];
            }
        }
        assert!((a.inner(&b).unwrap() - s.re).abs() < 1e-12);
        let small = HermitianOperator::identity(TensorShape::flat(2));
        assert!(matches!(
            a.inner(&small),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hermitian_construction_validates() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(
            HermitianOperator::flat(m),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            HermitianOperator::new(ComplexMatrix::identity(4), TensorShape::bipartite(2, 3)),
            Err(Error::ShapeMismatch { .. })
        ));
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(0.5, 1e-14);
        m[(1, 0)] = C64::new(0.5, 0.0);
        let h = HermitianOperator::flat(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
        assert!(ComplexMatrix::from_vec(1, 1, vec![C64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn embed_places_operator_on_factors() {
        let mut r = rng(11);
        let a = random_matrix(2, 2, &mut r);
        let b = random_matrix(3, 3, &mut r);
        let ab = a.kron(&b);
        // (a on factor 0, b on factor 2) with a 2-dim factor between them
        let lifted = ComplexMatrix::embed(&ab, &[0, 2], &[2, 2, 3]).unwrap();
        let expected = a.kron(&ComplexMatrix::identity(2)).kron(&b);
        assert!(lifted.max_abs_diff(&expected) < 1e-15);
        let swapped = ComplexMatrix::embed(&b.kron(&a), &[2, 0], &[2, 2, 3]).unwrap();
        assert!(swapped.max_abs_diff(&expected) < 1e-15);
    }

    proptest! {
        #[test]
        fn partial_traces_commute(seed in any::<u64>()) {
            let op = random_hermitian(TensorShape::new(vec![2, 3, 2], 1).unwrap(), &mut rng(seed));
            let step = op.partial_trace(&[0]).unwrap().partial_trace(&[0]).unwrap();
            let once = op.partial_trace(&[0, 1]).unwrap();
            prop_assert!(step.matrix().max_abs_diff(once.matrix()) <= 1e-12);
            prop_assert!((once.trace() - op.trace()).abs() <= 1e-12);
        }

        #[test]
        fn partial_transpose_preserves_trace_and_norm(seed in any::<u64>()) {
            let op = random_hermitian(TensorShape::new(vec![2, 3], 1).unwrap(), &mut rng(seed));
            let pt = op.partial_transpose(&[1]).unwrap();
            prop_assert!((pt.trace() - op.trace()).abs() <= 1e-12);
            prop_assert!((pt.matrix().frobenius_norm() - op.matrix().frobenius_norm()).abs() <= 1e-12);
        }

        #[test]
        fn vec_round_trip(seed in any::<u64>(), n_in in 1usize..5, n_out in 1usize..5) {
            let a = random_matrix(n_out, n_in, &mut rng(seed));
            prop_assert_eq!(ComplexMatrix::unvec(&a.vec(), n_in, n_out).unwrap(), a);
        }

        #[test]
        fn kron_is_associative(seed in any::<u64>()) {
            let mut r = rng(seed);
            let a = random_matrix(2, 3, &mut r);
            let b = random_matrix(2, 2, &mut r);
            let cm = random_matrix(3, 1, &mut r);
            prop_assert!(a.kron(&b).kron(&cm).max_abs_diff(&a.kron(&b.kron(&cm))) <= 1e-14);
        }
    }
}
