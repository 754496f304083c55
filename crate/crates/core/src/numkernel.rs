//! Dense complex matrices and the Stiefel / chordal-distance primitives.
//!
//! Every matrix stores complex entries; a real-field object is one whose
//! imaginary parts are all zero. Points of `St_F(d, r)` are `d x r`
//! matrices `X` with `X* X = I_r`.

use std::fmt;

use num_complex::Complex;
use num_traits::{NumCast, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Stiefel tolerance for codes produced by the constructions.
pub const DEFAULT_STIEFEL_TOL: f64 = 1e-10;
/// Stiefel tolerance for codes read from external files.
pub const INGEST_STIEFEL_TOL: f64 = 1e-8;

/// The ground field, `R` or `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldTag {
    R,
    C,
}

impl FieldTag {
    /// Degree of the field over the reals.
    pub fn m(self) -> usize {
        match self {
            FieldTag::R => 1,
            FieldTag::C => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FieldTag::R => "R",
            FieldTag::C => "C",
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for FieldTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R" | "r" => Ok(FieldTag::R),
            "C" | "c" => Ok(FieldTag::C),
            other => Err(Error::InvalidParameter(format!("unknown field {other:?}"))),
        }
    }
}

/// Row-major dense matrix with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    /// The `rows x cols` matrix whose first `min(rows, cols)` diagonal entries are one.
    pub fn eye(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| if i == j { Complex::one() } else { Complex::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_complex(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        Self::from_complex(rows, cols, data.into_iter().map(|x| Complex::new(x, T::zero())).collect())
    }

    /// Column vector from real entries.
    pub fn column(entries: &[T]) -> Self {
        Self::from_fn(entries.len(), 1, |i, _| Complex::new(entries[i], T::zero()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex<T>) {
        self.data[i * self.cols + j] = z;
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    pub fn set_block(&mut self, row: usize, col: usize, block: &Matrix<T>) {
        assert!(row + block.rows <= self.rows && col + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(row + i, col + j, block.get(i, j));
            }
        }
    }

    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Matrix<T> {
        assert!(row + rows <= self.rows && col + cols <= self.cols);
        Matrix::from_fn(rows, cols, |i, j| self.get(row + i, col + j))
    }

    /// `true` when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == T::zero())
    }

    pub fn conj(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in dst.iter_mut().zip(row) {
                    *o = *o + a * *b;
                }
            }
        }
        Ok(out)
    }

    /// `self* rhs` without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        if self.rows != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot form A*B for {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.get(k, i).conj();
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let z = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, z);
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, rhs: &Matrix<T>) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_same_shape(rhs)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        })
    }

    pub fn sub(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_same_shape(rhs)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        })
    }

    pub fn scale(&self, s: Complex<T>) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| *z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Matrix<T> {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn neg(&self) -> Matrix<T> {
        self.scale_real(-T::one())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self.get(i / rhs.rows, j / rhs.cols) * rhs.get(i % rhs.rows, j % rhs.cols)
        })
    }

    /// `Re Tr(self* rhs)`, the real Frobenius inner product.
    pub fn re_trace_inner(&self, rhs: &Matrix<T>) -> Result<T> {
        self.check_same_shape(rhs)?;
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .fold(T::zero(), |acc, (a, b)| acc + a.re * b.re + a.im * b.im))
    }

    /// `Tr(self* rhs)`.
    pub fn trace_inner(&self, rhs: &Matrix<T>) -> Result<Complex<T>> {
        self.check_same_shape(rhs)?;
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn fro_norm_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Appends zero rows at the bottom.
    pub fn pad_rows(&self, extra: usize) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows + extra, self.cols);
        out.set_block(0, 0, self);
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(Complex<T>) -> Complex<U>) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| f(*z)).collect(),
        }
    }

    /// Entrywise numeric conversion; panics only if a value is unrepresentable.
    pub fn cast<U: Scalar + NumCast>(&self) -> Matrix<U>
    where
        T: NumCast,
    {
        self.map(|z| {
            Complex::new(
                U::from(z.re).expect("representable entry"),
                U::from(z.im).expect("representable entry"),
            )
        })
    }
}

impl<T: Real> Matrix<T> {
    pub fn fro_norm(&self) -> T {
        self.fro_norm_sq().sqrt()
    }

    /// `max |(A* A - I)_{ij}|` over all entries.
    pub fn gram_deviation(&self) -> T {
        let gram = self.adjoint_mul(self).expect("square Gram");
        let mut worst = T::zero();
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { T::one() } else { T::zero() };
                let z = gram.get(i, j) - Complex::new(target, T::zero());
                worst = worst.max(z.re.abs()).max(z.im.abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.re.abs()).max(z.im.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Q factor of the thin QR factorization with positive real diagonal in R.
    ///
    /// Modified Gram-Schmidt with one re-orthogonalization pass.
    pub fn orthonormalize_columns(&self) -> Result<Matrix<T>> {
        if self.cols > self.rows {
            return Err(Error::InvalidParameter(format!(
                "cannot orthonormalize {} columns in dimension {}",
                self.cols, self.rows
            )));
        }
        let (m, n) = self.shape();
        let mut cols: Vec<Vec<Complex<T>>> =
            (0..n).map(|j| (0..m).map(|i| self.get(i, j)).collect()).collect();
        let scale = self.max_abs().max(T::min_positive_value());
        let floor = T::epsilon() * T::of(64.0) * scale;
        for j in 0..n {
            let (done, rest) = cols.split_at_mut(j);
            let v = &mut rest[0];
            for _pass in 0..2 {
                for q in done.iter() {
                    let proj = q
                        .iter()
                        .zip(v.iter())
                        .fold(Complex::zero(), |acc: Complex<T>, (a, b)| acc + a.conj() * *b);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi = *vi - *qi * proj;
                    }
                }
            }
            let norm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
            if !(norm > floor) {
                return Err(Error::InvalidParameter("columns are linearly dependent".into()));
            }
            for vi in v.iter_mut() {
                *vi = *vi / norm;
            }
        }
        Ok(Matrix::from_fn(m, n, |i, j| cols[j][i]))
    }
}

/// Predicate `‖M* M - I‖_max <= tol` (plus realness when `field` is `R`).
pub fn is_stiefel<T: Real>(m: &Matrix<T>, field: FieldTag, tol: T) -> bool {
    if m.cols() > m.rows() {
        return false;
    }
    if field == FieldTag::R && !m.is_real() {
        return false;
    }
    m.gram_deviation() <= tol
}

/// A point of `St_F(d, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelPoint<T> {
    field: FieldTag,
    mat: Matrix<T>,
}

impl<T: Scalar> StiefelPoint<T> {
    /// Wraps a matrix after checking only its shape and field.
    pub fn new_unchecked(field: FieldTag, mat: Matrix<T>) -> Result<Self> {
        if mat.cols() > mat.rows() {
            return Err(Error::InvalidParameter(format!(
                "a {}x{} matrix cannot have orthonormal columns",
                mat.rows(),
                mat.cols()
            )));
        }
        if field == FieldTag::R && !mat.is_real() {
            return Err(Error::WrongField("real point with nonzero imaginary part".into()));
        }
        Ok(StiefelPoint { field, mat })
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn d(&self) -> usize {
        self.mat.rows()
    }

    pub fn r(&self) -> usize {
        self.mat.cols()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.mat
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field || self.mat.shape() != other.mat.shape() {
            return Err(Error::DimensionMismatch(format!(
                "St_{}({},{}) vs St_{}({},{})",
                self.field,
                self.d(),
                self.r(),
                other.field,
                other.d(),
                other.r()
            )));
        }
        Ok(())
    }
}

impl<T: Real> StiefelPoint<T> {
    pub fn new(field: FieldTag, mat: Matrix<T>, tol: T) -> Result<Self> {
        let p = Self::new_unchecked(field, mat)?;
        let dev = p.mat.gram_deviation();
        if !(dev <= tol) {
            return Err(Error::NotStiefel(format!("‖X*X - I‖_max = {dev:e} > {tol:e}")));
        }
        Ok(p)
    }
}

/// `‖X - Y‖_Fro`.
pub fn frobenius_distance<T: Real>(x: &StiefelPoint<T>, y: &StiefelPoint<T>) -> Result<T> {
    x.check_compatible(y)?;
    Ok(x.mat.sub(&y.mat)?.fro_norm())
}

/// Squared chordal distance, computed entrywise.
pub fn frobenius_distance_sq<T: Scalar>(x: &StiefelPoint<T>, y: &StiefelPoint<T>) -> Result<T> {
    x.check_compatible(y)?;
    Ok(x.mat.sub(&y.mat)?.fro_norm_sq())
}

/// `Re Tr(X* Y)`.
pub fn real_trace_inner<T: Scalar>(x: &StiefelPoint<T>, y: &StiefelPoint<T>) -> Result<T> {
    x.check_compatible(y)?;
    x.mat.re_trace_inner(&y.mat)
}

/// An ordered list of `n >= 2` points sharing `(field, d, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StiefelCode<T> {
    field: FieldTag,
    d: usize,
    r: usize,
    points: Vec<StiefelPoint<T>>,
}

impl<T: Scalar> StiefelCode<T> {
    /// Structural checks only: shapes, field, `n >= 2`.
    ///
    /// Used for ingesting external codes whose Stiefel membership is left to
    /// the certifier.
    pub fn from_matrices_unchecked(field: FieldTag, mats: Vec<Matrix<T>>) -> Result<Self> {
        if mats.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a code needs at least 2 points, got {}",
                mats.len()
            )));
        }
        let (d, r) = mats[0].shape();
        let mut points = Vec::with_capacity(mats.len());
        for (i, m) in mats.into_iter().enumerate() {
            if m.shape() != (d, r) {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} is {}x{}, expected {d}x{r}",
                    m.rows(),
                    m.cols()
                )));
            }
            points.push(StiefelPoint::new_unchecked(field, m)?);
        }
        Ok(StiefelCode { field, d, r, points })
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[StiefelPoint<T>] {
        &self.points
    }

    pub fn matrices(&self) -> impl Iterator<Item = &Matrix<T>> + '_ {
        self.points.iter().map(|p| p.matrix())
    }

    /// Same matrices, relabelled over another field. Only `R -> C` keeps the
    /// invariants without inspection.
    pub(crate) fn retag(mut self, field: FieldTag) -> Self {
        self.field = field;
        for p in &mut self.points {
            p.field = field;
        }
        self
    }

    /// `Σ X_i`.
    pub fn sum(&self) -> Matrix<T> {
        let mut acc = Matrix::zeros(self.d, self.r);
        for p in &self.points {
            acc = acc.add(p.matrix()).expect("shared shape");
        }
        acc
    }

    /// Keeps the first `n` points.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n < 2 || n > self.n() {
            return Err(Error::InvalidParameter(format!(
                "prefix of length {n} from a code of {} points",
                self.n()
            )));
        }
        Ok(StiefelCode {
            field: self.field,
            d: self.d,
            r: self.r,
            points: self.points[..n].to_vec(),
        })
    }

    pub fn cast<U: Real>(&self) -> StiefelCode<U>
    where
        T: NumCast,
    {
        StiefelCode {
            field: self.field,
            d: self.d,
            r: self.r,
            points: self
                .points
                .iter()
                .map(|p| StiefelPoint {
                    field: p.field,
                    mat: p.mat.cast(),
                })
                .collect(),
        }
    }
}

impl<T: Real> StiefelCode<T> {
    pub fn from_matrices(field: FieldTag, mats: Vec<Matrix<T>>, tol: T) -> Result<Self> {
        let code = Self::from_matrices_unchecked(field, mats)?;
        for (i, p) in code.points.iter().enumerate() {
            let dev = p.matrix().gram_deviation();
            if !(dev <= tol) {
                return Err(Error::NotStiefel(format!(
                    "point {i}: ‖X*X - I‖_max = {dev:e} > {tol:e}"
                )));
            }
        }
        Ok(code)
    }

    /// Constructor used by the built-in constructions.
    pub(crate) fn constructed(field: FieldTag, mats: Vec<Matrix<T>>) -> Result<Self> {
        Self::from_matrices(field, mats, T::of(DEFAULT_STIEFEL_TOL).max(T::epsilon() * T::of(1e4)))
    }

    pub fn all_stiefel(&self, tol: T) -> bool {
        self.points.iter().all(|p| is_stiefel(p.matrix(), self.field, tol))
    }
}
