//! Dense complex matrices and the tensor-index machinery the rest of the
//! crate is built on.
//!
//! Storage is a [`nalgebra::DMatrix`]; the column-stacking convention used by
//! [`vec`] and [`unvec`] is fixed regardless of storage layout: column `j` of
//! an `s x s` matrix occupies entries `j*s .. (j+1)*s` of the stacked vector.
//!
//! Multi-factor index arithmetic treats factor 0 as the leftmost tensor
//! factor (slowest varying index).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative Frobenius tolerance for Hermiticity checks.
pub const TOL_HERM: f64 = 1e-10;
/// Relative Frobenius tolerance for unitarity checks.
pub const TOL_UNIT: f64 = 1e-10;
/// Absolute tolerance on negative eigenvalues for positivity checks.
pub const TOL_PSD: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A dense complex matrix with at least one row and one column and finite
/// entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                rows,
                cols,
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        for j in 0..data.ncols() {
            for i in 0..data.nrows() {
                let z = data[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { data })
    }

    /// Wraps a matrix produced by internal arithmetic on finite inputs.
    pub(crate) fn wrap(data: DMatrix<C64>) -> Self {
        debug_assert!(data.nrows() > 0 && data.ncols() > 0);
        Self { data }
    }

    /// Real-valued matrix from rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| c(x, 0.0)))
            .collect();
        Self::new(r, cols, entries).expect("finite real rows")
    }

    /// Complex matrix from rows; panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let cols = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == cols), "ragged rows");
        let entries = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::new(r, cols, entries).expect("finite rows")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self::wrap(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Column vector from its entries.
    pub fn column(entries: &[C64]) -> Self {
        Self::wrap(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    /// Projector `|v><v|` for a column vector `v`.
    pub fn projector(v: &ComplexMatrix) -> Self {
        v * &v.adjoint()
    }

    /// Matrix unit `|row><col|` of the given square dimension.
    pub fn unit(n: usize, row: usize, col: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(row, col)] = ONE;
        Self::wrap(m)
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[(row, col)] = value;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.data
    }

    /// Row-major copy of the entries.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.data.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.data.transpose())
    }

    pub fn conj(&self) -> Self {
        Self::wrap(self.data.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.data.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::wrap(&self.data * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c(factor, 0.0))
    }

    /// Largest entrywise modulus of `self - other`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(
            (self.rows(), self.cols()),
            (other.rows(), other.cols()),
            "shape mismatch"
        );
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Product that reports a shape mismatch instead of panicking.
    pub fn try_mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(self * rhs)
    }

    /// Hermitian part `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.data + self.data.adjoint()) * c(0.5, 0.0))
    }

    /// Submatrix keeping the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let m = DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.data[(rows[i], cols[j])]);
        Self::wrap(m)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.data[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.data * &rhs.data)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.data + &rhs.data)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.data - &rhs.data)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let entries = repr.entries.iter().map(|&[re, im]| c(re, im)).collect();
        ComplexMatrix::new(repr.rows, repr.cols, entries).map_err(serde::de::Error::custom)
    }
}

/// Ordered subsystem dimensions of a composite space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DimensionProfile {
    factors: Vec<usize>,
}

impl DimensionProfile {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDimensions("no factors".into()));
        }
        if let Some(&d) = factors.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimensions(format!(
                "factor dimension {d} is below 2"
            )));
        }
        Ok(Self { factors })
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("n >= 1 qubits")
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().product()
    }

    /// Concatenation `self (x) other`.
    pub fn concat(&self, other: &DimensionProfile) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self { factors }
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factors[i + 1];
        }
        strides
    }

    fn check_matrix(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() != self.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimension {} does not match profile {:?} (product {})",
                m.rows(),
                self.factors,
                self.total_dim()
            )));
        }
        Ok(())
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.factors.len()];
        for &k in subset {
            if k >= self.factors.len() {
                return Err(Error::InvalidDimensions(format!(
                    "subsystem index {k} out of range for {} factors",
                    self.factors.len()
                )));
            }
            if seen[k] {
                return Err(Error::InvalidDimensions(format!(
                    "subsystem index {k} repeated"
                )));
            }
            seen[k] = true;
        }
        Ok(())
    }

    /// For each flat index, the part of its offset carried by the factors in
    /// `subset`.
    fn subset_offsets(&self, subset: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let n = self.total_dim();
        (0..n)
            .map(|idx| {
                subset
                    .iter()
                    .map(|&k| ((idx / strides[k]) % self.factors[k]) * strides[k])
                    .sum()
            })
            .collect()
    }

    /// Flat offsets of every multi-index over `subset` (first listed factor
    /// slowest).
    fn enumerate_offsets(&self, subset: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &k in subset {
            let mut next = Vec::with_capacity(offsets.len() * self.factors[k]);
            for &o in &offsets {
                for digit in 0..self.factors[k] {
                    next.push(o + digit * strides[k]);
                }
            }
            offsets = next;
        }
        offsets
    }
}

impl TryFrom<Vec<usize>> for DimensionProfile {
    type Error = Error;
    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<DimensionProfile> for Vec<usize> {
    fn from(value: DimensionProfile) -> Self {
        value.factors
    }
}

/// Kronecker product; the left factor carries the slowest index.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::wrap(a.data.kronecker(&b.data))
}

/// Kronecker product of a non-empty list of factors, left to right.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let (first, rest) = factors.split_first().expect("at least one factor");
    rest.iter()
        .fold((*first).clone(), |acc, m| tensor_product(&acc, m))
}

/// Column-stacks a square matrix.
pub fn vec(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    // nalgebra storage is column-major, which is exactly the stacking order.
    Ok(ComplexMatrix::column(a.data.as_slice()))
}

/// Inverse of [`vec`]: rebuilds the `s x s` matrix from a length-`s^2` column.
pub fn unvec(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    if v.cols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected a column vector, got {}x{}",
            v.rows(),
            v.cols()
        )));
    }
    let s = (v.rows() as f64).sqrt().round() as usize;
    if s * s != v.rows() {
        return Err(Error::DimensionMismatch(format!(
            "length {} is not a perfect square",
            v.rows()
        )));
    }
    Ok(ComplexMatrix::wrap(DMatrix::from_column_slice(
        s,
        s,
        v.data.as_slice(),
    )))
}

/// Traces out every factor not listed in `keep`. Kept factors appear in
/// ascending factor order in the result.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: &DimensionProfile,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    dims.check_subset(keep)?;
    if keep.is_empty() {
        return Err(Error::InvalidDimensions("nothing to keep".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();

    let kept_offsets = dims.enumerate_offsets(&kept);
    let traced_offsets = dims.enumerate_offsets(&traced);
    let n = kept_offsets.len();
    let out = DMatrix::from_fn(n, n, |i, j| {
        let (ri, cj) = (kept_offsets[i], kept_offsets[j]);
        traced_offsets
            .iter()
            .map(|&t| m.data[(ri + t, cj + t)])
            .sum()
    });
    Ok(ComplexMatrix::wrap(out))
}

/// Transposes the listed factors, leaving the rest untouched. Pure index
/// permutation, so applying it twice is the identity.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: &DimensionProfile,
    transposed: &[usize],
) -> Result<ComplexMatrix> {
    dims.check_matrix(m)?;
    dims.check_subset(transposed)?;
    let t = dims.subset_offsets(transposed);
    let n = m.rows();
    let mut out = DMatrix::zeros(n, n);
    for col in 0..n {
        for row in 0..n {
            let new_row = row - t[row] + t[col];
            let new_col = col - t[col] + t[row];
            out[(new_row, new_col)] = m.data[(row, col)];
        }
    }
    Ok(ComplexMatrix::wrap(out))
}

/// Lifts `op`, acting on the ordered factors `targets`, to the full space
/// described by `dims` (identity on the remaining factors).
pub fn embed(
    op: &ComplexMatrix,
    dims: &DimensionProfile,
    targets: &[usize],
) -> Result<ComplexMatrix> {
    dims.check_subset(targets)?;
    if targets.is_empty() {
        return Err(Error::InvalidDimensions("no target factors".into()));
    }
    let sub_dim: usize = targets.iter().map(|&k| dims.factors[k]).product();
    if !op.is_square() || op.rows() != sub_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, target factors need {sub_dim}",
            op.rows(),
            op.cols()
        )));
    }
    let n = dims.total_dim();
    let sub_offsets = dims.enumerate_offsets(targets);
    let strides = dims.strides();
    let mut out = DMatrix::zeros(n, n);
    for row in 0..n {
        let mut sub_row = 0;
        let mut rest = row;
        for &k in targets {
            let digit = (row / strides[k]) % dims.factors[k];
            sub_row = sub_row * dims.factors[k] + digit;
            rest -= digit * strides[k];
        }
        for (sub_col, &offset) in sub_offsets.iter().enumerate() {
            let v = op.data[(sub_row, sub_col)];
            if v != ZERO {
                out[(row, rest + offset)] = v;
            }
        }
    }
    Ok(ComplexMatrix::wrap(out))
}

fn relative_deviation(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let diff = (&m.data - m.data.adjoint())
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    relative_deviation(diff, m.frobenius_norm())
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && hermitian_deviation(m) <= tol
}

pub fn unitary_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let prod = m.data.adjoint() * &m.data;
    let diff = (prod - DMatrix::<C64>::identity(n, n))
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff / (n as f64).sqrt()
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && unitary_deviation(m) <= tol
}

/// Hermitian and smallest eigenvalue `>= -tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    match herm_eig(m) {
        Ok(eig) => eig.values.last().is_none_or(|&v| v >= -tol),
        Err(_) => false,
    }
}

fn require_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermEig {
    /// Eigenvalues in non-increasing order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    /// `V f(D) V^dagger` for a real function of the eigenvalues.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let v = &self.vectors.data;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        ComplexMatrix::wrap(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| c(x, 0.0))
    }
}

/// Hermitian eigendecomposition `M = V D V^dagger` with eigenvalues sorted
/// non-increasing.
pub fn herm_eig(m: &ComplexMatrix) -> Result<HermEig> {
    require_hermitian(m)?;
    let sym = m.hermitian_part().data;
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig {
        values,
        vectors: ComplexMatrix::wrap(vectors),
    })
}

/// Eigenvalues only, non-increasing.
pub fn herm_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(m)?;
    let mut values: Vec<f64> = m
        .hermitian_part()
        .data
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `exp(-i H t)` for Hermitian `H`, through the eigendecomposition.
pub fn matrix_exp_unitary(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    require_hermitian(h)?;
    if t == 0.0 || h.data.iter().all(|z| *z == ZERO) {
        return Ok(ComplexMatrix::identity(h.rows()));
    }
    let eig = herm_eig(h)?;
    Ok(eig.reconstruct_with(|lambda| C64::from_polar(1.0, -lambda * t)))
}

/// Eigenvalues below this fraction of the spectral radius are treated as
/// exact zeros when taking square roots.
const SQRT_ZERO_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Positive semidefinite square root. Negative eigenvalues within
/// [`TOL_PSD`] are clamped to zero.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(m)?;
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -TOL_PSD {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let radius = eig.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let floor = SQRT_ZERO_FLOOR * radius;
    Ok(eig.reconstruct_with(|lambda| {
        if lambda <= floor {
            ZERO
        } else {
            c(lambda.sqrt(), 0.0)
        }
    }))
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    m.data.clone().singular_values().iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn bell_density() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[0.5, 0.0, 0.0, 0.5],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[0.5, 0.0, 0.0, 0.5],
        ])
    }

    #[test]
    fn constructor_rejects_bad_shapes_and_nan() {
        assert!(matches!(
            ComplexMatrix::new(0, 2, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ONE; 3]),
            Err(Error::EntryCount { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ONE, c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn normalized_x_tensor_x_is_half_antidiagonal() {
        let x = sigma_x().scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let xx = tensor_product(&x, &x);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i + j == 3 { 0.5 } else { 0.0 };
                assert!((xx.get(i, j) - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ladder_combination_has_block_form() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let ad = a.adjoint();
        let (b, bd) = (a.clone(), ad.clone());
        let m = &tensor_product(&bd, &a) - &tensor_product(&b, &ad);
        let neg_ad = ad.scale_real(-1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m.get(i, j), ZERO);
                assert_eq!(m.get(i, j + 2), neg_ad.get(i, j));
                assert_eq!(m.get(i + 2, j), a.get(i, j));
                assert_eq!(m.get(i + 2, j + 2), ZERO);
            }
        }
    }

    #[test]
    fn vec_stacks_columns() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let v = vec(&a).unwrap();
        let got: Vec<f64> = (0..4).map(|i| v.get(i, 0).re).collect();
        assert_eq!(got, vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&v).unwrap(), a);

        let vi = vec(&ComplexMatrix::identity(2)).unwrap();
        let got: Vec<f64> = (0..4).map(|i| vi.get(i, 0).re).collect();
        assert_eq!(got, vec![1.0, 0.0, 0.0, 1.0]);
        let bell = ComplexMatrix::projector(&vi.scale_real(std::f64::consts::FRAC_1_SQRT_2));
        assert!(bell.max_abs_diff(&bell_density()) < 1e-15);
    }

    #[test]
    fn vec_rejects_rectangular() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(vec(&m), Err(Error::NotSquare { .. })));
        assert!(unvec(&ComplexMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let dims = DimensionProfile::qubits(2);
        let rho_a = partial_trace(&bell_density(), &dims, &[0]).unwrap();
        assert!(rho_a.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let ra =
            ComplexMatrix::from_rows(&[&[c(0.7, 0.0), c(0.1, 0.2)], &[c(0.1, -0.2), c(0.3, 0.0)]]);
        let rb = ComplexMatrix::from_real_diagonal(&[0.2, 0.5, 0.3]);
        let dims = DimensionProfile::new(vec![2, 3]).unwrap();
        let prod = tensor_product(&ra, &rb);
        assert!(partial_trace(&prod, &dims, &[0]).unwrap().max_abs_diff(&ra) < 1e-15);
        assert!(partial_trace(&prod, &dims, &[1]).unwrap().max_abs_diff(&rb) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_profile() {
        let dims = DimensionProfile::qubits(3);
        assert!(partial_trace(&bell_density(), &dims, &[0]).is_err());
        let dims = DimensionProfile::qubits(2);
        assert!(partial_trace(&bell_density(), &dims, &[2]).is_err());
        assert!(partial_trace(&bell_density(), &dims, &[]).is_err());
        assert!(DimensionProfile::new(vec![2, 1]).is_err());
    }

    #[test]
    fn bell_partial_transpose_swaps_off_diagonal_blocks() {
        let dims = DimensionProfile::qubits(2);
        let pt = partial_transpose(&bell_density(), &dims, &[0]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.5, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.5, 0.0],
            &[0.0, 0.5, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.5],
        ]);
        assert_eq!(pt, expected);
        assert!(!is_psd(&pt, TOL_PSD));
        let values = herm_eigenvalues(&pt).unwrap();
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn transposing_everything_is_full_transpose() {
        let m = ComplexMatrix::new(
            6,
            6,
            (0..36).map(|k| c(k as f64, (k * k % 7) as f64)).collect(),
        )
        .unwrap();
        let dims = DimensionProfile::new(vec![2, 3]).unwrap();
        assert_eq!(
            partial_transpose(&m, &dims, &[0, 1]).unwrap(),
            m.transpose()
        );
        let once = partial_transpose(&m, &dims, &[1]).unwrap();
        assert_eq!(partial_transpose(&once, &dims, &[1]).unwrap(), m);
    }

    #[test]
    fn embed_matches_kronecker_placement() {
        let x = sigma_x();
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let i2 = ComplexMatrix::identity(2);
        let dims = DimensionProfile::qubits(3);
        let xz = tensor_product(&x, &z);
        let lifted = embed(&xz, &dims, &[0, 2]).unwrap();
        assert_eq!(lifted, tensor_all(&[&x, &i2, &z]));
        // reversed target order swaps the roles
        let lifted = embed(&xz, &dims, &[2, 0]).unwrap();
        assert_eq!(lifted, tensor_all(&[&z, &i2, &x]));
        assert!(embed(&xz, &dims, &[0]).is_err());
    }

    #[test]
    fn eigen_of_pauli_and_identity() {
        assert_eq!(
            herm_eigenvalues(&ComplexMatrix::identity(4)).unwrap(),
            vec![1.0; 4]
        );
        let v = herm_eigenvalues(&sigma_x()).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] + 1.0).abs() < 1e-15);
        assert!(is_hermitian(&sigma_x(), TOL_HERM));
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            matrix_exp_unitary(&m, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let h = ComplexMatrix::zeros(3, 3);
        assert_eq!(
            matrix_exp_unitary(&h, 2.5).unwrap(),
            ComplexMatrix::identity(3)
        );
        assert_eq!(
            matrix_exp_unitary(&sigma_x(), 0.0).unwrap(),
            ComplexMatrix::identity(2)
        );
    }

    #[test]
    fn sqrt_of_diagonal_and_projector() {
        let s = matrix_sqrt_psd(&ComplexMatrix::from_real_diagonal(&[4.0, 1.0])).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 1.0])) < 1e-14);
        let s = matrix_sqrt_psd(&ComplexMatrix::identity(3)).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);
        let p = bell_density();
        assert!((&p * &p).max_abs_diff(&p) < 1e-15);
        assert!(matrix_sqrt_psd(&p).unwrap().max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_negative_spectrum() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(
            matrix_sqrt_psd(&m),
            Err(Error::NotPositive { .. })
        ));
        // tiny negative eigenvalues are clamped
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1e-13]);
        assert!(matrix_sqrt_psd(&m).is_ok());
    }

    #[test]
    fn json_round_trip_uses_row_major_pairs() {
        let m =
            ComplexMatrix::from_rows(&[&[c(1.0, 0.5), c(2.0, 0.0)], &[c(0.0, -1.0), c(4.0, 0.0)]]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"rows":2,"cols":2,"entries":[[1.0,0.5],[2.0,0.0],[0.0,-1.0],[4.0,0.0]]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"rows":2,"cols":2,"entries":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
    }
}
