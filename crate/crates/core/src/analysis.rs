//! Gate quality and entanglement analytics on chi matrices.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{choi_state, ChiMatrix, KrausSet, TraceConvention};
use crate::error::{Error, Result};
use crate::gate_sim::SimulationRun;
use crate::matrix::{
    c, hermitian_deviation, herm_eigenvalues, matrix_sqrt_psd, partial_transpose,
    tensor_all, trace_norm, ComplexMatrix, DimensionProfile, ONE, ZERO,
};
use crate::noise::{depolarizing_channel, phase_flip_kraus};

/// Negativity values below this are reported as exact zeros.
pub const NEGATIVITY_ZERO: f64 = 1e-10;

/// Fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2` between two chi matrices,
/// computed on their normalized (trace one) forms.
pub fn fidelity(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "chi matrices for s = {} and s = {}",
            a.dim(),
            b.dim()
        )));
    }
    state_fidelity(a.normalized().matrix(), b.normalized().matrix())
}

/// Fidelity of two unit-trace positive matrices.
///
/// Uses `Tr sqrt(sqrt(a) b sqrt(a)) = || sqrt(a) sqrt(b) ||_1`, which avoids a
/// third square root and is symmetric by construction.
pub fn state_fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.rows() || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    for m in [a, b] {
        let trace = m.trace().re;
        if (trace - 1.0).abs() > 1e-8 {
            return Err(Error::NotDensityMatrix(format!(
                "fidelity needs unit trace, got {trace}"
            )));
        }
    }
    let root = trace_norm(&(&matrix_sqrt_psd(a)? * &matrix_sqrt_psd(b)?));
    Ok((root * root).clamp(0.0, 1.0))
}

/// Fidelity of raw chi matrices whose convention is inferred from the trace.
pub fn fidelity_inferred(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    fidelity(&ChiMatrix::infer(a.clone())?, &ChiMatrix::infer(b.clone())?)
}

fn bell_chi(diag: [f64; 4], off: [(usize, usize, f64); 2]) -> ChiMatrix {
    let mut m = ComplexMatrix::from_real_diagonal(&diag);
    for (i, j, v) in off {
        m.set(i, j, c(v, 0.0));
        m.set(j, i, c(v, 0.0));
    }
    ChiMatrix::new(2, m, TraceConvention::Normalized).expect("Hermitian by construction")
}

/// Normalized chi of the identity on a qubit, `|Phi+><Phi+|`.
pub fn chi_ideal() -> ChiMatrix {
    bell_chi([0.5, 0.0, 0.0, 0.5], [(0, 3, 0.5), (1, 2, 0.0)])
}

/// Normalized chi of an unprotected phase flip with probability `p`.
pub fn chi_noise(p: f64) -> Result<ChiMatrix> {
    check_probability(p)?;
    Ok(bell_chi(
        [0.5, 0.0, 0.0, 0.5],
        [(0, 3, 0.5 * (1.0 - 2.0 * p)), (1, 2, 0.0)],
    ))
}

/// Normalized chi of the three-qubit phase-flip code with independent flips
/// of probability `p`: `(1 - q)|Phi+><Phi+| + q |Psi+><Psi+|` with
/// `q = 3p^2 - 2p^3`.
pub fn chi_code(p: f64) -> Result<ChiMatrix> {
    check_probability(p)?;
    let q = 3.0 * p * p - 2.0 * p * p * p;
    let (keep, flip) = (0.5 * (1.0 - q), 0.5 * q);
    Ok(bell_chi([keep, flip, flip, keep], [(0, 3, keep), (1, 2, flip)]))
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

fn hadamard() -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]])
}

/// Permutation unitary on `n` qubits flipping `target` when every control
/// is `|1>`. Qubit 0 is the most significant bit.
fn controlled_x(n: usize, controls: &[usize], target: usize) -> ComplexMatrix {
    let dim = 1 << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut u = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let fire = controls.iter().all(|&q| col & bit(q) != 0);
        let row = if fire { col ^ bit(target) } else { col };
        u.set(row, col, ONE);
    }
    u
}

/// Kraus set of the one-qubit channel realized by the three-qubit phase-flip
/// code: encode with two CNOTs and Hadamards, independent phase flips,
/// decode, Toffoli correction, discard the ancillas.
pub fn phase_flip_code_kraus(p: f64) -> Result<KrausSet> {
    check_probability(p)?;
    let h3 = tensor_all(&[&hadamard(), &hadamard(), &hadamard()]);
    let encode = &h3 * &(&controlled_x(3, &[0], 2) * &controlled_x(3, &[0], 1));
    let decode = &controlled_x(3, &[1, 2], 0)
        * &(&controlled_x(3, &[0], 2) * &(&controlled_x(3, &[0], 1) * &h3));
    let flip = phase_flip_kraus(p)?;
    let noise = flip.tensor(&flip).tensor(&flip);

    // |psi> -> |psi>|00> and <ab| on the ancillas
    let mut attach = ComplexMatrix::zeros(8, 2);
    attach.set(0, 0, ONE);
    attach.set(4, 1, ONE);
    let mut ops = Vec::with_capacity(4 * noise.len());
    for k in noise.operators() {
        let full = &(&decode * &(k * &encode)) * &attach;
        for ancilla in 0..4 {
            let rows = [ancilla, 4 + ancilla];
            ops.push(full.select(&rows, &[0, 1]));
        }
    }
    KrausSet::new(ops)
}

/// Analytic and circuit-simulated chi of the phase-flip code, both
/// normalized.
pub fn phase_flip_code(p: f64) -> Result<(ChiMatrix, ChiMatrix)> {
    let analytic = chi_code(p)?;
    let rho = choi_state(&phase_flip_code_kraus(p)?)?;
    let simulated = ChiMatrix::new(2, rho.hermitian_part(), TraceConvention::Normalized)?;
    Ok((analytic, simulated))
}

/// Bipartition of a Choi state's factors for the negativity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SplitSpec {
    /// Ancilla copy against the physical system.
    AncillaVsPhysical,
    /// Each carrier together with its own ancilla copy: factors `{k, n + k}`
    /// for every `k` in the first half of the carriers form one side.
    ChannelVsChannel,
    /// Explicit factor layout and the factors on one side.
    General {
        dims: DimensionProfile,
        subset: Vec<usize>,
    },
}

impl SplitSpec {
    pub fn label(&self) -> String {
        match self {
            SplitSpec::AncillaVsPhysical => "ancilla_vs_physical".into(),
            SplitSpec::ChannelVsChannel => "channel_vs_channel".into(),
            SplitSpec::General { subset, .. } => {
                let parts: Vec<String> = subset.iter().map(|k| k.to_string()).collect();
                format!("general[{}]", parts.join(" "))
            }
        }
    }

    /// Factor layout and the side to transpose, for a matrix with layout
    /// `dims` (ancilla factors first, then the same factors for the system).
    pub fn resolve(&self, dims: &DimensionProfile) -> Result<(DimensionProfile, Vec<usize>)> {
        match self {
            SplitSpec::General { dims: own, subset } => {
                if own.total_dim() != dims.total_dim() {
                    return Err(Error::DimensionMismatch(format!(
                        "split layout has dimension {}, matrix has {}",
                        own.total_dim(),
                        dims.total_dim()
                    )));
                }
                if subset.is_empty() || subset.len() >= own.len() {
                    return Err(Error::InvalidDimensions(
                        "a split needs a non-empty proper subset".into(),
                    ));
                }
                Ok((own.clone(), subset.clone()))
            }
            _ => {
                let n = dims.len();
                let half = n / 2;
                if !n.is_multiple_of(2) || dims.factors()[..half] != dims.factors()[half..] {
                    return Err(Error::InvalidDimensions(format!(
                        "{:?} is not an ancilla/system mirrored layout",
                        dims.factors()
                    )));
                }
                let subset = match self {
                    SplitSpec::AncillaVsPhysical => (0..half).collect(),
                    _ => {
                        if half < 2 {
                            return Err(Error::InvalidDimensions(
                                "channel split needs at least two carriers".into(),
                            ));
                        }
                        (0..half / 2).flat_map(|k| [k, half + k]).collect()
                    }
                };
                Ok((dims.clone(), subset))
            }
        }
    }
}

/// Sum of the magnitudes of the negative eigenvalues of the partial
/// transpose, i.e. `(sum |l| - sum l) / 2`.
pub fn negativity(rho: &ComplexMatrix, dims: &DimensionProfile, split: &SplitSpec) -> Result<f64> {
    let deviation = hermitian_deviation(rho);
    if deviation > crate::matrix::TOL_HERM {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > 1e-8 {
        return Err(Error::NotDensityMatrix(format!(
            "negativity needs unit trace, got {trace}"
        )));
    }
    let (dims, subset) = split.resolve(dims)?;
    let pt = partial_transpose(rho, &dims, &subset)?;
    let values = herm_eigenvalues(&pt)?;
    let neg: f64 = values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok(if neg < NEGATIVITY_ZERO { 0.0 } else { neg })
}

/// Negativity of a chi matrix (normalized first) whose ancilla and system
/// each consist of `carriers`.
pub fn chi_negativity(
    chi: &ChiMatrix,
    carriers: &DimensionProfile,
    split: &SplitSpec,
) -> Result<f64> {
    if carriers.total_dim() != chi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "carriers {:?} do not multiply to s = {}",
            carriers.factors(),
            chi.dim()
        )));
    }
    negativity(chi.normalized().matrix(), &carriers.concat(carriers), split)
}

/// A curve: metric values over a strictly increasing parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub metric: String,
    pub gate: String,
    pub split: String,
}

impl SweepResult {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        metric: impl Into<String>,
        gate: impl Into<String>,
        split: impl Into<String>,
    ) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} grid points, {} values",
                grid.len(),
                values.len()
            )));
        }
        check_grid(&grid)?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite metric value {v}")));
        }
        Ok(Self {
            grid,
            values,
            metric: metric.into(),
            gate: gate.into(),
            split: split.into(),
        })
    }

    /// Parameter at which the curve first reaches zero, see
    /// [`zero_crossing`].
    pub fn zero_crossing(&self) -> Option<f64> {
        zero_crossing(&self.grid, &self.values)
    }
}

/// Non-empty, finite and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty parameter grid".into()));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidInput("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    Ok(())
}

pub const CSV_HEADER: &str = "param,value,metric,gate,split";

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Long-format CSV of one or more curves.
pub fn sweeps_to_csv(results: &[SweepResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        for (g, v) in r.grid.iter().zip(&r.values) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                format_float(*g),
                format_float(*v),
                r.metric,
                r.gate,
                r.split
            );
        }
    }
    out
}

/// Normalized chi of the depolarizing channel around the identity.
pub fn depolarized_choi(s: usize, p: f64) -> Result<ChiMatrix> {
    Ok(depolarizing_channel(&ComplexMatrix::identity(s), p)?
        .1
        .normalized())
}

/// Ancilla-split negativity of the depolarized Choi state over `grid`, for
/// one dimension `s`. Grid points are evaluated in parallel; the output
/// order follows the grid.
pub fn depolarizing_negativity_sweep(s: usize, grid: &[f64]) -> Result<SweepResult> {
    if !(2..=10).contains(&s) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s as f64,
            reason: "depolarizing sweeps cover s = 2..10",
        });
    }
    check_grid(grid)?;
    let dims = DimensionProfile::new(vec![s, s])?;
    let values = grid
        .par_iter()
        .map(|&p| {
            let chi = depolarized_choi(s, p)?;
            negativity(chi.matrix(), &dims, &SplitSpec::AncillaVsPhysical)
        })
        .collect::<Result<Vec<f64>>>()?;
    SweepResult::new(
        grid.to_vec(),
        values,
        "negativity",
        format!("depolarizing_s{s}"),
        SplitSpec::AncillaVsPhysical.label(),
    )
}

/// First parameter at which a decreasing, piecewise-linear curve hits zero.
///
/// Takes the last strictly positive point before the first zero (values
/// below [`NEGATIVITY_ZERO`] count as zero). When a second positive point
/// precedes it, the line through the two is extended to zero, which is exact
/// for a linear segment; otherwise the crossing is interpolated between the
/// last positive and the first zero point. Returns `None` if the curve never
/// reaches zero or starts at zero.
pub fn zero_crossing(grid: &[f64], values: &[f64]) -> Option<f64> {
    let first_zero = values.iter().position(|&v| v < NEGATIVITY_ZERO)?;
    if first_zero == 0 {
        return None;
    }
    let last = first_zero - 1;
    let (x1, y1) = (grid[last], values[last]);
    let (xz, yz) = (grid[first_zero], values[first_zero]);
    let interpolated = x1 + (xz - x1) * y1 / (y1 - yz);
    if last == 0 {
        return Some(interpolated);
    }
    let (x0, y0) = (grid[last - 1], values[last - 1]);
    if y0 <= y1 {
        return Some(interpolated);
    }
    let extrapolated = x1 + (x1 - x0) * y1 / (y0 - y1);
    if extrapolated >= x1 && extrapolated <= xz {
        Some(extrapolated)
    } else {
        Some(interpolated)
    }
}

/// Which chi trajectory of a run to analyze.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiSource {
    Chi,
    ChiTilde,
}

impl ChiSource {
    pub fn label(&self) -> &'static str {
        match self {
            ChiSource::Chi => "chi",
            ChiSource::ChiTilde => "chi_tilde",
        }
    }
}

/// Negativity of the run's chi (or pure-noise chi) at every sample time.
/// Samples without a pure-noise chi are skipped.
pub fn entanglement_dynamics(
    run: &SimulationRun,
    split: &SplitSpec,
    source: ChiSource,
) -> Result<SweepResult> {
    let carriers = run.gate.logical_dims();
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (k, &t) in run.grid.iter().enumerate() {
        let chi = match source {
            ChiSource::Chi => Some(&run.chi_trajectory[k]),
            ChiSource::ChiTilde => run.chi_tilde_trajectory[k].as_ref(),
        };
        if let Some(chi) = chi {
            grid.push(t);
            values.push(chi_negativity(chi, carriers, split)?);
        }
    }
    SweepResult::new(
        grid,
        values,
        format!("negativity_{}", source.label()),
        run.gate.name().as_str(),
        split.label(),
    )
}

/// Fidelity of every chi in the run against `reference`.
pub fn fidelity_trajectory(
    run: &SimulationRun,
    reference: &ChiMatrix,
    source: ChiSource,
) -> Result<SweepResult> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (k, &t) in run.grid.iter().enumerate() {
        let chi = match source {
            ChiSource::Chi => Some(&run.chi_trajectory[k]),
            ChiSource::ChiTilde => run.chi_tilde_trajectory[k].as_ref(),
        };
        if let Some(chi) = chi {
            grid.push(t);
            values.push(fidelity(reference, chi)?);
        }
    }
    SweepResult::new(
        grid,
        values,
        format!("fidelity_{}", source.label()),
        run.gate.name().as_str(),
        "none",
    )
}

/// Bell vector `(|00> + sign |11>)/sqrt 2` or `(|01> + sign |10>)/sqrt 2`.
pub fn bell_vector(odd: bool, sign: f64) -> ComplexMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = [ZERO; 4];
    if odd {
        v[1] = c(h, 0.0);
        v[2] = c(sign * h, 0.0);
    } else {
        v[0] = c(h, 0.0);
        v[3] = c(sign * h, 0.0);
    }
    ComplexMatrix::column(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_basics() {
        let ideal = chi_ideal();
        assert!((fidelity(&ideal, &ideal).unwrap() - 1.0).abs() < 1e-12);
        let noisy = chi_noise(0.3).unwrap();
        assert!((fidelity(&ideal, &noisy).unwrap() - 0.7).abs() < 1e-12);
        let code = chi_code(0.1).unwrap();
        assert!((fidelity(&ideal, &code).unwrap() - 0.972).abs() < 1e-12);
        let canonical = ideal.canonical();
        assert!((fidelity(&canonical, &noisy).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_bad_input() {
        let bad = ComplexMatrix::identity(4).scale_real(0.7);
        assert!(matches!(
            fidelity_inferred(&bad, &bad),
            Err(Error::AmbiguousTrace { .. })
        ));
        assert!(state_fidelity(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).is_err());
        let three = ComplexMatrix::identity(9).scale_real(1.0 / 9.0);
        let three = ChiMatrix::new(3, three, TraceConvention::Normalized).unwrap();
        assert!(fidelity(&chi_ideal(), &three).is_err());
    }

    #[test]
    fn code_at_half_is_even_mixture() {
        let (analytic, simulated) = phase_flip_code(0.5).unwrap();
        let phi = ComplexMatrix::projector(&bell_vector(false, 1.0));
        let psi = ComplexMatrix::projector(&bell_vector(true, 1.0));
        let expected = (&phi + &psi).scale_real(0.5);
        assert!(analytic.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(simulated.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn code_without_noise_is_identity() {
        let (_, simulated) = phase_flip_code(0.0).unwrap();
        assert!(simulated.max_abs_diff(&chi_ideal()) < 1e-12);
    }

    #[test]
    fn bell_negativity() {
        let rho = ComplexMatrix::projector(&bell_vector(false, 1.0));
        let dims = DimensionProfile::qubits(2);
        let n = negativity(&rho, &dims, &SplitSpec::AncillaVsPhysical).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
        let product = ComplexMatrix::from_real_diagonal(&[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(negativity(&product, &dims, &SplitSpec::AncillaVsPhysical).unwrap(), 0.0);
        assert!(negativity(&ComplexMatrix::identity(4), &dims, &SplitSpec::AncillaVsPhysical).is_err());
    }

    #[test]
    fn split_resolution() {
        let dims = DimensionProfile::qubits(4);
        let (_, a) = SplitSpec::AncillaVsPhysical.resolve(&dims).unwrap();
        assert_eq!(a, vec![0, 1]);
        let (_, b) = SplitSpec::ChannelVsChannel.resolve(&dims).unwrap();
        assert_eq!(b, vec![0, 2]);
        assert!(SplitSpec::ChannelVsChannel.resolve(&DimensionProfile::qubits(2)).is_err());
        let general = SplitSpec::General {
            dims: DimensionProfile::new(vec![4, 4]).unwrap(),
            subset: vec![1],
        };
        assert_eq!(general.resolve(&dims).unwrap().1, vec![1]);
        assert!(SplitSpec::AncillaVsPhysical
            .resolve(&DimensionProfile::new(vec![2, 3]).unwrap())
            .is_err());
    }

    #[test]
    fn depolarized_negativity_at_critical_point() {
        let dims = DimensionProfile::qubits(2);
        let chi = depolarized_choi(2, 2.0 / 3.0).unwrap();
        let n = negativity(chi.matrix(), &dims, &SplitSpec::AncillaVsPhysical).unwrap();
        assert!(n < 1e-10);
        let chi = depolarized_choi(2, 0.0).unwrap();
        let n = negativity(chi.matrix(), &dims, &SplitSpec::AncillaVsPhysical).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_crossing_cases() {
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let line: Vec<f64> = grid.iter().map(|&x: &f64| (0.6 - x).max(0.0)).collect();
        assert!((zero_crossing(&grid, &line).unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(zero_crossing(&grid, &[1.0; 5]), None);
        assert_eq!(zero_crossing(&grid, &[0.0; 5]), None);
        let two = zero_crossing(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((two - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_validation_and_csv() {
        assert!(SweepResult::new(vec![], vec![], "m", "g", "s").is_err());
        assert!(SweepResult::new(vec![0.0, 0.0], vec![1.0, 1.0], "m", "g", "s").is_err());
        assert!(SweepResult::new(vec![0.0], vec![f64::NAN], "m", "g", "s").is_err());
        let r = SweepResult::new(vec![0.0, 0.5], vec![1.0, 0.1], "negativity", "g", "s").unwrap();
        let csv = sweeps_to_csv(&[r]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row = lines.next().unwrap();
        assert_eq!(row, "0.0000000000000000e0,1.0000000000000000e0,negativity,g,s");
        let second: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(second[1].parse::<f64>().unwrap(), 0.1);
    }
}
