//! The four representations of a quantum operation (operator sum, chi
//! matrix, evolution matrix, unitary dilation) and the conversions between
//! them.
//!
//! Index conventions:
//!
//! * `vec` is column stacking, so the chi matrix `e e^dagger` built from
//!   stacked Kraus operators has the *input* index as its first (slow) tensor
//!   factor and the *output* index as its second factor. This is the same
//!   layout as the Choi state `(I (x) E)(|Phi><Phi|)`, where the untouched
//!   ancilla is the first factor. Tracing out the second factor of a
//!   canonical chi of a trace-preserving map gives the identity.
//! * Evolution matrices act on column-stacked density matrices:
//!   `G[m + s*n, j + s*k] = chi[j*s + m, k*s + n]` (zero based).
//! * Dilations act on `environment (x) system`, so block row `k` of the first
//!   block column is the Kraus operator `<k|U|0>`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    c, herm_eig, herm_eigenvalues, hermitian_deviation, tensor_product, unitary_deviation, unvec,
    vec, ComplexMatrix, DimensionProfile, C64, ONE, TOL_HERM, TOL_PSD, TOL_UNIT, ZERO,
};

/// Tolerance on `sum_k E_k^dagger E_k = I`, relative to `||I||_F`.
pub const TOL_TP: f64 = 1e-10;
/// Chi eigenvalues above this count towards the channel rank.
pub const TOL_RANK: f64 = 1e-10;
/// Projection residual below which a Gram-Schmidt candidate is dropped.
const COMPLETION_DROP: f64 = 1e-8;

/// Operator-sum representation `rho -> sum_k E_k rho E_k^dagger`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    input_dim: usize,
    output_dim: usize,
    operators: Vec<ComplexMatrix>,
    trace_preserving: bool,
}

impl KrausSet {
    /// Trace-preserving Kraus set; fails if `sum E^dagger E != I`.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let set = Self::relaxed(operators)?;
        let deviation = set.completeness_deviation();
        if deviation > TOL_TP {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(set)
    }

    /// Kraus set without the trace-preservation requirement, for intermediate
    /// algebra. Shapes must still agree.
    pub fn relaxed(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if let Some(op) = operators
            .iter()
            .find(|op| op.rows() != rows || op.cols() != cols)
        {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operators of shape {rows}x{cols} and {}x{}",
                op.rows(),
                op.cols()
            )));
        }
        let mut set = Self {
            input_dim: cols,
            output_dim: rows,
            operators,
            trace_preserving: false,
        };
        set.trace_preserving = set.completeness_deviation() <= TOL_TP;
        Ok(set)
    }

    /// Single-operator channel `rho -> U rho U^dagger`.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        let deviation = unitary_deviation(u);
        if !u.is_square() || deviation > TOL_UNIT {
            return Err(Error::NotUnitary { deviation });
        }
        Self::new(vec![u.clone()])
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim)]).expect("identity is trace preserving")
    }

    /// `|| sum E^dagger E - I ||_F / ||I||_F`.
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.input_dim;
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for op in &self.operators {
            sum += op.as_dmatrix().adjoint() * op.as_dmatrix();
        }
        let diff = (sum - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff / (n as f64).sqrt()
    }

    /// Input dimension `s` (equal to the output dimension for square sets).
    pub fn dim(&self) -> usize {
        self.input_dim
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn is_square(&self) -> bool {
        self.input_dim == self.output_dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `after o self`: apply `self` first, then `after`.
    pub fn then(&self, after: &KrausSet) -> Result<KrausSet> {
        if after.input_dim != self.output_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose a {}-dim output with a {}-dim input",
                self.output_dim, after.input_dim
            )));
        }
        let ops = after
            .operators
            .iter()
            .flat_map(|a| self.operators.iter().map(move |b| a * b))
            .collect();
        KrausSet::relaxed(ops)
    }

    /// Independent action on two subsystems, `self (x) other`.
    pub fn tensor(&self, other: &KrausSet) -> KrausSet {
        let ops = self
            .operators
            .iter()
            .flat_map(|a| other.operators.iter().map(move |b| tensor_product(a, b)))
            .collect();
        KrausSet::relaxed(ops).expect("tensor of consistent sets")
    }

    /// `I_n (x) self`.
    pub fn extend_left(&self, n: usize) -> KrausSet {
        KrausSet::identity(n).tensor(self)
    }
}

/// Which trace a chi matrix is normalized to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceConvention {
    /// `chi = e e^dagger`, trace `s` for trace-preserving maps.
    Canonical,
    /// `chi / s`, the Choi state, trace 1.
    Normalized,
}

/// `s^2 x s^2` process matrix with an explicit trace convention.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
    convention: TraceConvention,
}

impl ChiMatrix {
    /// Checks shape and Hermiticity. Positivity is checked where it matters
    /// (see [`ChiMatrix::check_completely_positive`]).
    pub fn new(dim: usize, matrix: ComplexMatrix, convention: TraceConvention) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "chi for s = {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.rows(),
                matrix.cols()
            )));
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > TOL_HERM {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            dim,
            matrix,
            convention,
        })
    }

    /// Infers the convention from the trace: 1 means normalized, `s` means
    /// canonical. Anything farther than `1e-6` from both is rejected.
    pub fn infer(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.rows();
        let dim = (n as f64).sqrt().round() as usize;
        if dim * dim != n || !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} is not an s^2 x s^2 chi matrix",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let trace = matrix.trace().re;
        let convention = if (trace - 1.0).abs() <= 1e-6 {
            TraceConvention::Normalized
        } else if (trace - dim as f64).abs() <= 1e-6 {
            TraceConvention::Canonical
        } else {
            return Err(Error::AmbiguousTrace { trace, dim });
        };
        Self::new(dim, matrix, convention)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn convention(&self) -> TraceConvention {
        self.convention
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn canonical(&self) -> ChiMatrix {
        match self.convention {
            TraceConvention::Canonical => self.clone(),
            TraceConvention::Normalized => ChiMatrix {
                dim: self.dim,
                matrix: self.matrix.scale_real(self.dim as f64),
                convention: TraceConvention::Canonical,
            },
        }
    }

    pub fn normalized(&self) -> ChiMatrix {
        match self.convention {
            TraceConvention::Normalized => self.clone(),
            TraceConvention::Canonical => ChiMatrix {
                dim: self.dim,
                matrix: self.matrix.scale_real(1.0 / self.dim as f64),
                convention: TraceConvention::Normalized,
            },
        }
    }

    /// Fails with the offending eigenvalue if chi has a negative eigenvalue
    /// beyond [`TOL_PSD`].
    pub fn check_completely_positive(&self) -> Result<()> {
        let values = herm_eigenvalues(&self.matrix)?;
        let min = *values.last().expect("non-empty spectrum");
        if min < -TOL_PSD {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Entrywise distance after bringing both to the canonical convention.
    pub fn max_abs_diff(&self, other: &ChiMatrix) -> f64 {
        self.canonical()
            .matrix
            .max_abs_diff(&other.canonical().matrix)
    }
}

/// `s^2 x s^2` matrix acting on column-stacked density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl EvolutionMatrix {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "evolution matrix for s = {dim} must be {0}x{0}, got {1}x{2}",
                dim * dim,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `self` followed by `after`.
    pub fn then(&self, after: &EvolutionMatrix) -> Result<EvolutionMatrix> {
        if self.dim != after.dim {
            return Err(Error::DimensionMismatch(format!(
                "evolution matrices for s = {} and s = {}",
                self.dim, after.dim
            )));
        }
        Ok(EvolutionMatrix {
            dim: self.dim,
            matrix: &after.matrix * &self.matrix,
        })
    }
}

/// Unitary on `environment (x) system` whose first block column carries the
/// Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryDilation {
    sys_dim: usize,
    env_dim: usize,
    matrix: ComplexMatrix,
    env_initial: usize,
}

impl UnitaryDilation {
    pub fn new(
        sys_dim: usize,
        env_dim: usize,
        matrix: ComplexMatrix,
        env_initial: usize,
    ) -> Result<Self> {
        let n = sys_dim * env_dim;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "dilation with s = {sys_dim}, m = {env_dim} must be {n}x{n}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if env_initial >= env_dim {
            return Err(Error::InvalidInput(format!(
                "environment initial state {env_initial} out of range for m = {env_dim}"
            )));
        }
        let deviation = unitary_deviation(&matrix);
        if deviation > TOL_UNIT {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            sys_dim,
            env_dim,
            matrix,
            env_initial,
        })
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn env_initial(&self) -> usize {
        self.env_initial
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Block `<row|U|col>` as an `s x s` matrix.
    pub fn block(&self, row: usize, col: usize) -> ComplexMatrix {
        let s = self.sys_dim;
        let rows: Vec<usize> = (row * s..(row + 1) * s).collect();
        let cols: Vec<usize> = (col * s..(col + 1) * s).collect();
        self.matrix.select(&rows, &cols)
    }
}

/// Checks that `rho` is a density matrix: square, Hermitian, unit trace and
/// positive semidefinite.
pub fn check_density(rho: &ComplexMatrix) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    let deviation = hermitian_deviation(rho);
    if deviation > TOL_HERM {
        return Err(Error::NotDensityMatrix(format!(
            "not Hermitian (deviation {deviation:.3e})"
        )));
    }
    let trace = rho.trace();
    if (trace - ONE).norm() > 1e-9 {
        return Err(Error::NotDensityMatrix(format!(
            "trace {} + {}i is not 1",
            trace.re, trace.im
        )));
    }
    let values = herm_eigenvalues(rho)?;
    let min = *values.last().expect("non-empty");
    if min < -TOL_PSD {
        return Err(Error::NotDensityMatrix(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// `sum_k E_k rho E_k^dagger` for a density matrix `rho`.
pub fn apply_channel(kraus: &KrausSet, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_density(rho)?;
    apply_channel_unchecked(kraus, rho)
}

/// [`apply_channel`] without the density-matrix check, for arbitrary
/// (e.g. matrix-unit) inputs.
pub fn apply_channel_unchecked(kraus: &KrausSet, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows() != kraus.input_dim || rho.cols() != kraus.input_dim {
        return Err(Error::DimensionMismatch(format!(
            "channel on {}-dim input applied to a {}x{} matrix",
            kraus.input_dim,
            rho.rows(),
            rho.cols()
        )));
    }
    let n = kraus.output_dim;
    let mut out = DMatrix::<C64>::zeros(n, n);
    for op in &kraus.operators {
        let e = op.as_dmatrix();
        out += e * rho.as_dmatrix() * e.adjoint();
    }
    ComplexMatrix::from_dmatrix(out)
}

/// Stacks `vec(E_k)` as the columns of `e`.
fn stacked_columns(kraus: &KrausSet) -> Result<DMatrix<C64>> {
    if !kraus.is_square() {
        return Err(Error::NotSquare {
            rows: kraus.output_dim,
            cols: kraus.input_dim,
        });
    }
    let s2 = kraus.input_dim * kraus.input_dim;
    let mut e = DMatrix::<C64>::zeros(s2, kraus.len());
    for (k, op) in kraus.operators.iter().enumerate() {
        let v = vec(op)?;
        e.set_column(k, &v.as_dmatrix().column(0));
    }
    Ok(e)
}

/// `chi = e e^dagger` in the canonical convention.
pub fn kraus_to_chi(kraus: &KrausSet) -> Result<ChiMatrix> {
    let e = stacked_columns(kraus)?;
    let chi = ComplexMatrix::from_dmatrix(&e * e.adjoint())?;
    ChiMatrix::new(kraus.input_dim, chi, TraceConvention::Canonical)
}

/// Minimal Kraus set from the eigendecomposition of chi; one operator per
/// eigenvalue above [`TOL_RANK`], ordered by non-increasing eigenvalue.
pub fn chi_to_kraus(chi: &ChiMatrix) -> Result<KrausSet> {
    let canonical = chi.canonical();
    let eig = herm_eig(canonical.matrix())?;
    let min = *eig.values.last().expect("non-empty spectrum");
    if min < -TOL_PSD {
        return Err(Error::NotCompletelyPositive {
            min_eigenvalue: min,
        });
    }
    let n = eig.values.len();
    let ops: Vec<ComplexMatrix> = eig
        .values
        .iter()
        .enumerate()
        .take_while(|(_, &lambda)| lambda > TOL_RANK)
        .map(|(k, &lambda)| {
            let col: Vec<C64> = (0..n)
                .map(|i| eig.vectors.get(i, k) * lambda.sqrt())
                .collect();
            unvec(&ComplexMatrix::column(&col)).expect("s^2 column")
        })
        .collect();
    if ops.is_empty() {
        return Err(Error::InvalidInput(
            "chi matrix has no positive eigenvalue".into(),
        ));
    }
    KrausSet::new(ops)
}

/// Entry permutation from chi (canonical) to the evolution matrix.
pub fn chi_to_evolution(chi: &ChiMatrix) -> EvolutionMatrix {
    let canonical = chi.canonical();
    let s = chi.dim;
    let src = canonical.matrix.as_dmatrix();
    let mut g = DMatrix::<C64>::zeros(s * s, s * s);
    for j in 0..s {
        for k in 0..s {
            for m in 0..s {
                for n in 0..s {
                    g[(m + s * n, j + s * k)] = src[(j * s + m, k * s + n)];
                }
            }
        }
    }
    EvolutionMatrix {
        dim: s,
        matrix: ComplexMatrix::wrap(g),
    }
}

/// Inverse of [`chi_to_evolution`]; returns the canonical chi.
pub fn evolution_to_chi(g: &EvolutionMatrix) -> Result<ChiMatrix> {
    let s = g.dim;
    let src = g.matrix.as_dmatrix();
    let mut chi = DMatrix::<C64>::zeros(s * s, s * s);
    for j in 0..s {
        for k in 0..s {
            for m in 0..s {
                for n in 0..s {
                    chi[(j * s + m, k * s + n)] = src[(m + s * n, j + s * k)];
                }
            }
        }
    }
    ChiMatrix::new(s, ComplexMatrix::wrap(chi), TraceConvention::Canonical)
}

/// `unvec(G vec(rho))`.
pub fn evolve_density(g: &EvolutionMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows() != g.dim || rho.cols() != g.dim {
        return Err(Error::DimensionMismatch(format!(
            "evolution for s = {} applied to a {}x{} matrix",
            g.dim,
            rho.rows(),
            rho.cols()
        )));
    }
    unvec(&(&g.matrix * &vec(rho)?))
}

/// `G^steps` by repeated squaring; `G^0` is the identity.
pub fn evolution_power(g: &EvolutionMatrix, steps: u64) -> EvolutionMatrix {
    let mut result = DMatrix::<C64>::identity(g.dim * g.dim, g.dim * g.dim);
    let mut base = g.matrix.as_dmatrix().clone();
    let mut n = steps;
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    EvolutionMatrix {
        dim: g.dim,
        matrix: ComplexMatrix::wrap(result),
    }
}

/// Evolution matrix of `rho -> U rho U^dagger`, i.e. `conj(U) (x) U`.
pub fn unitary_evolution(u: &ComplexMatrix) -> Result<EvolutionMatrix> {
    let deviation = unitary_deviation(u);
    if !u.is_square() || deviation > TOL_UNIT {
        return Err(Error::NotUnitary { deviation });
    }
    EvolutionMatrix::new(u.rows(), tensor_product(&u.conj(), u))
}

/// Completes the stacked Kraus operators to a unitary on
/// `environment (x) system`. The completion is Gram-Schmidt over the
/// canonical basis vectors in ascending order, so the result is
/// deterministic.
pub fn kraus_to_dilation(kraus: &KrausSet) -> Result<UnitaryDilation> {
    if !kraus.is_square() {
        return Err(Error::NotSquare {
            rows: kraus.output_dim,
            cols: kraus.input_dim,
        });
    }
    let deviation = kraus.completeness_deviation();
    if deviation > TOL_TP {
        return Err(Error::NotTracePreserving { deviation });
    }
    let s = kraus.input_dim;
    let m = kraus.len();
    let n = s * m;
    let mut u = DMatrix::<C64>::zeros(n, n);
    for (k, op) in kraus.operators.iter().enumerate() {
        for i in 0..s {
            for j in 0..s {
                u[(k * s + i, j)] = op.get(i, j);
            }
        }
    }
    let mut filled = s;
    for candidate in 0..n {
        if filled == n {
            break;
        }
        let mut v = nalgebra::DVector::<C64>::zeros(n);
        v[candidate] = ONE;
        // two passes of classical Gram-Schmidt keep the basis orthonormal to
        // working precision
        for _ in 0..2 {
            for q in 0..filled {
                let col = u.column(q);
                let overlap = col.dotc(&v);
                v -= col * overlap;
            }
        }
        let norm = v.norm();
        if norm < COMPLETION_DROP {
            continue;
        }
        u.set_column(filled, &(v / c(norm, 0.0)));
        filled += 1;
    }
    if filled != n {
        return Err(Error::NotUnitary {
            deviation: (n - filled) as f64,
        });
    }
    // the first block column is copied verbatim so extraction is exact
    for (k, op) in kraus.operators.iter().enumerate() {
        for i in 0..s {
            for j in 0..s {
                u[(k * s + i, j)] = op.get(i, j);
            }
        }
    }
    UnitaryDilation::new(s, m, ComplexMatrix::wrap(u), 0)
}

/// `E_k = <k|U|env_initial>` for every environment basis state `k`.
pub fn dilation_to_kraus(dilation: &UnitaryDilation) -> Result<KrausSet> {
    let deviation = unitary_deviation(&dilation.matrix);
    if deviation > TOL_UNIT {
        return Err(Error::NotUnitary { deviation });
    }
    let ops = (0..dilation.env_dim)
        .map(|k| dilation.block(k, dilation.env_initial))
        .collect();
    KrausSet::new(ops)
}

/// Maximally entangled vector `(1/sqrt s) sum_j |j> (x) |j>`.
pub fn maximally_entangled(dim: usize) -> ComplexMatrix {
    let amp = c(1.0 / (dim as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; dim * dim];
    for j in 0..dim {
        v[j * dim + j] = amp;
    }
    ComplexMatrix::column(&v)
}

/// Choi state `(I (x) E)(|Phi><Phi|)`; the channel acts on the second factor.
pub fn choi_state(kraus: &KrausSet) -> Result<ComplexMatrix> {
    let s = kraus.input_dim;
    let phi = ComplexMatrix::projector(&maximally_entangled(s));
    apply_channel_unchecked(&kraus.extend_left(s), &phi)
}

/// `U0^dagger chi U0`, where the columns of `U0` are the stacked basis
/// matrices. The basis must be orthonormal under `Tr(a_j a_k^dagger)`.
pub fn chi_change_basis(chi: &ChiMatrix, basis: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let s = chi.dim;
    if basis.len() != s * s {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} elements, s^2 = {}",
            basis.len(),
            s * s
        )));
    }
    if let Some(a) = basis.iter().find(|a| a.rows() != s || a.cols() != s) {
        return Err(Error::DimensionMismatch(format!(
            "basis matrix is {}x{}, expected {s}x{s}",
            a.rows(),
            a.cols()
        )));
    }
    let mut u0 = DMatrix::<C64>::zeros(s * s, s * s);
    for (k, a) in basis.iter().enumerate() {
        u0.set_column(k, &vec(a)?.as_dmatrix().column(0));
    }
    // Tr(a_j a_k^dagger) = conj(vec(a_k)^dagger vec(a_j)), so the Gram matrix
    // is U0^dagger U0 up to conjugation.
    let gram = u0.adjoint() * &u0;
    let deviation = (gram - DMatrix::<C64>::identity(s * s, s * s))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if deviation > 1e-10 {
        return Err(Error::NonOrthonormalBasis { deviation });
    }
    ComplexMatrix::from_dmatrix(u0.adjoint() * chi.matrix.as_dmatrix() * &u0)
}

/// Normalized Pauli basis `{E, sigma_x, -i sigma_y, sigma_z} / sqrt 2` and
/// its tensor powers, left factor slowest (`II, IX, IY, IZ, XI, ...`).
pub fn pauli_basis(qubits: usize) -> Vec<ComplexMatrix> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let single = [
        ComplexMatrix::from_real_rows(&[&[h, 0.0], &[0.0, h]]),
        ComplexMatrix::from_real_rows(&[&[0.0, h], &[h, 0.0]]),
        ComplexMatrix::from_real_rows(&[&[0.0, -h], &[h, 0.0]]),
        ComplexMatrix::from_real_rows(&[&[h, 0.0], &[0.0, -h]]),
    ];
    let mut basis = vec![ComplexMatrix::identity(1)];
    for _ in 0..qubits {
        basis = basis
            .iter()
            .flat_map(|b| single.iter().map(move |p| tensor_product(b, p)))
            .collect();
    }
    basis
}

/// Number of chi eigenvalues above [`TOL_RANK`] (canonical convention).
pub fn channel_rank(chi: &ChiMatrix) -> Result<usize> {
    let values = herm_eigenvalues(chi.canonical().matrix())?;
    Ok(values.iter().filter(|&&v| v > TOL_RANK).count())
}

fn check_unit_norm(v: &ComplexMatrix) -> Result<()> {
    if v.cols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected a state vector, got {}x{}",
            v.rows(),
            v.cols()
        )));
    }
    let norm = v.frobenius_norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Outcome probability of measuring `c_m` after sending `c_in` through the
/// channel, computed twice: directly on the output state, and as an
/// effective measurement of `|c_in^*> (x) |c_m>` on the canonical chi.
pub fn effective_measurement_check(
    kraus: &KrausSet,
    c_in: &ComplexMatrix,
    c_m: &ComplexMatrix,
) -> Result<(f64, f64)> {
    check_unit_norm(c_in)?;
    check_unit_norm(c_m)?;
    let s = kraus.dim();
    if c_in.rows() != s || c_m.rows() != s {
        return Err(Error::DimensionMismatch(format!(
            "states of length {} and {} for a {s}-dim channel",
            c_in.rows(),
            c_m.rows()
        )));
    }
    let rho_in = ComplexMatrix::projector(c_in);
    let rho_out = apply_channel_unchecked(kraus, &rho_in)?;
    let direct = (&c_m.adjoint() * &(&rho_out * c_m)).get(0, 0).re;

    let chi = kraus_to_chi(kraus)?.normalized();
    let effective = tensor_product(&c_in.conj(), c_m);
    let scaled = chi.matrix().scale_real(s as f64);
    let via_chi = (&effective.adjoint() * &(&scaled * &effective))
        .get(0, 0)
        .re;
    Ok((direct, via_chi))
}

/// Chi of `E o E0^{-1}`, where `E0` is the ideal unitary. The inverse of the
/// unitary channel is the channel of `U^dagger`, so no numerical inversion
/// is needed.
pub fn pure_noise_channel(
    actual: &EvolutionMatrix,
    ideal_unitary: &ComplexMatrix,
) -> Result<ChiMatrix> {
    let inverse = unitary_evolution(&ideal_unitary.adjoint())?;
    if inverse.dim != actual.dim {
        return Err(Error::DimensionMismatch(format!(
            "ideal gate on {} dims, actual channel on {}",
            inverse.dim, actual.dim
        )));
    }
    evolution_to_chi(&inverse.then(actual)?)
}

/// A channel in any of the four representations.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Kraus(KrausSet),
    Chi(ChiMatrix),
    Evolution(EvolutionMatrix),
    Dilation(UnitaryDilation),
}

/// Representation tag used in channel files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Kraus,
    Chi,
    Evolution,
    Dilation,
}

impl std::str::FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kraus" => Ok(Self::Kraus),
            "chi" => Ok(Self::Chi),
            "evolution" => Ok(Self::Evolution),
            "dilation" => Ok(Self::Dilation),
            other => Err(Error::InvalidInput(format!(
                "unknown representation {other:?}"
            ))),
        }
    }
}

impl Channel {
    pub fn representation(&self) -> Representation {
        match self {
            Channel::Kraus(_) => Representation::Kraus,
            Channel::Chi(_) => Representation::Chi,
            Channel::Evolution(_) => Representation::Evolution,
            Channel::Dilation(_) => Representation::Dilation,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Channel::Kraus(k) => k.dim(),
            Channel::Chi(c) => c.dim(),
            Channel::Evolution(g) => g.dim(),
            Channel::Dilation(d) => d.sys_dim(),
        }
    }

    /// Canonical chi of the channel; fails for non-completely-positive
    /// chi or evolution input.
    pub fn to_chi(&self) -> Result<ChiMatrix> {
        let chi = match self {
            Channel::Kraus(k) => kraus_to_chi(k)?,
            Channel::Chi(c) => c.canonical(),
            Channel::Evolution(g) => evolution_to_chi(g)?,
            Channel::Dilation(d) => kraus_to_chi(&dilation_to_kraus(d)?)?,
        };
        chi.check_completely_positive()?;
        Ok(chi)
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        match self {
            Channel::Kraus(k) => Ok(k.clone()),
            Channel::Dilation(d) => dilation_to_kraus(d),
            _ => chi_to_kraus(&self.to_chi()?),
        }
    }

    pub fn convert(&self, target: Representation) -> Result<Channel> {
        Ok(match target {
            Representation::Kraus => Channel::Kraus(self.to_kraus()?),
            Representation::Chi => Channel::Chi(self.to_chi()?),
            Representation::Evolution => Channel::Evolution(chi_to_evolution(&self.to_chi()?)),
            Representation::Dilation => Channel::Dilation(match self {
                Channel::Dilation(d) => d.clone(),
                _ => kraus_to_dilation(&self.to_kraus()?)?,
            }),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case", deny_unknown_fields)]
enum ChannelRepr {
    Kraus {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output_dim: Option<usize>,
        operators: Vec<ComplexMatrix>,
    },
    Chi {
        dim: usize,
        trace_convention: TraceConvention,
        matrix: ComplexMatrix,
    },
    Evolution {
        dim: usize,
        matrix: ComplexMatrix,
    },
    Dilation {
        dim: usize,
        env_dim: usize,
        #[serde(default)]
        env_initial: usize,
        matrix: ComplexMatrix,
    },
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;
    fn try_from(repr: ChannelRepr) -> Result<Self> {
        Ok(match repr {
            ChannelRepr::Kraus {
                dim,
                output_dim,
                operators,
            } => {
                let set = KrausSet::new(operators)?;
                if set.input_dim() != dim || set.output_dim() != output_dim.unwrap_or(dim) {
                    return Err(Error::DimensionMismatch(format!(
                        "declared dim {dim} does not match {}x{} operators",
                        set.output_dim(),
                        set.input_dim()
                    )));
                }
                Channel::Kraus(set)
            }
            ChannelRepr::Chi {
                dim,
                trace_convention,
                matrix,
            } => Channel::Chi(ChiMatrix::new(dim, matrix, trace_convention)?),
            ChannelRepr::Evolution { dim, matrix } => {
                Channel::Evolution(EvolutionMatrix::new(dim, matrix)?)
            }
            ChannelRepr::Dilation {
                dim,
                env_dim,
                env_initial,
                matrix,
            } => Channel::Dilation(UnitaryDilation::new(dim, env_dim, matrix, env_initial)?),
        })
    }
}

impl From<&Channel> for ChannelRepr {
    fn from(channel: &Channel) -> Self {
        match channel {
            Channel::Kraus(k) => ChannelRepr::Kraus {
                dim: k.input_dim(),
                output_dim: (!k.is_square()).then_some(k.output_dim()),
                operators: k.operators().to_vec(),
            },
            Channel::Chi(c) => ChannelRepr::Chi {
                dim: c.dim(),
                trace_convention: c.convention(),
                matrix: c.matrix().clone(),
            },
            Channel::Evolution(g) => ChannelRepr::Evolution {
                dim: g.dim(),
                matrix: g.matrix().clone(),
            },
            Channel::Dilation(d) => ChannelRepr::Dilation {
                dim: d.sys_dim(),
                env_dim: d.env_dim(),
                env_initial: d.env_initial(),
                matrix: d.matrix().clone(),
            },
        }
    }
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ChannelRepr::deserialize(d)?;
        Channel::try_from(repr).map_err(serde::de::Error::custom)
    }
}

/// Partial trace of a canonical chi over its output factor (the identity
/// for trace-preserving maps).
pub fn chi_input_marginal(chi: &ChiMatrix) -> Result<ComplexMatrix> {
    let s = chi.dim();
    let dims = DimensionProfile::new(vec![s, s])?;
    crate::matrix::partial_trace(chi.canonical().matrix(), &dims, &[0])
}
