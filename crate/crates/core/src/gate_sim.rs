//! Markovian simulation of noisy gates on the extended
//! `ancilla (x) physical (x) environment` system.
//!
//! Every physical carrier couples to two environment qubits, one for
//! amplitude relaxation and one for pure dephasing, ordered
//! `[amp_0, phase_0, amp_1, phase_1, ...]`. A step applies
//! `exp(-i H_total dt)`, traces the environment out and resets it to `|0>`.
//!
//! The ancilla copy is never acted on, so one step is a fixed channel on the
//! physical system alone. [`simulate`] uses that: it builds the per-step
//! Kraus set once and accumulates its evolution matrix, which is equivalent
//! to stepping the full state with [`markovian_step`] but much cheaper.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{
    evolution_to_chi, kraus_to_chi, pure_noise_channel, ChiMatrix, EvolutionMatrix, KrausSet,
    TraceConvention,
};
use crate::error::{Error, Result};
use crate::matrix::{
    c, embed, matrix_exp_unitary, partial_trace, tensor_product, unitary_deviation, ComplexMatrix,
    DimensionProfile, C64, ZERO,
};
use crate::noise::{
    fictitious_time, qutrit_reduction, relaxation_hamiltonians, CouplingKind, RelaxationParams,
};

/// Allowed range of `dt / t_oper`.
pub const DT_RANGE: (f64, f64) = (1e-4, 1e-2);
/// Default `dt / t_oper`.
pub const DEFAULT_DT_FRACTION: f64 = 1e-3;
/// Largest tolerated deviation of the extended-state trace from 1.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Built-in gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateName {
    #[serde(rename = "SQiSW")]
    Sqisw,
    #[serde(rename = "iSWAP")]
    Iswap,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "CZ_qutrit")]
    CzQutrit,
    #[serde(rename = "custom")]
    Custom,
}

impl GateName {
    pub fn as_str(&self) -> &'static str {
        match self {
            GateName::Sqisw => "SQiSW",
            GateName::Iswap => "iSWAP",
            GateName::Cnot => "CNOT",
            GateName::CzQutrit => "CZ_qutrit",
            GateName::Custom => "custom",
        }
    }
}

impl std::fmt::Display for GateName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GateName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SQiSW" | "sqisw" => Ok(GateName::Sqisw),
            "iSWAP" | "iswap" => Ok(GateName::Iswap),
            "CNOT" | "cnot" => Ok(GateName::Cnot),
            "CZ_qutrit" | "cz_qutrit" => Ok(GateName::CzQutrit),
            "custom" => Ok(GateName::Custom),
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }
}

/// A gate: generator on the physical system, operation time and the ideal
/// operation on the logical (ancilla-mirrored) space.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    name: GateName,
    sys_dims: DimensionProfile,
    hamiltonian: ComplexMatrix,
    t_oper: f64,
    target_unitary: ComplexMatrix,
    /// Physical basis index of each logical basis state.
    logical: Vec<usize>,
    /// Carrier dimensions of the logical space.
    logical_dims: DimensionProfile,
    /// Map from the physical system back onto the logical space, applied
    /// before chi extraction.
    reduction: Option<KrausSet>,
}

impl GateSpec {
    /// Gate with an arbitrary Hermitian generator; the target is
    /// `exp(-i H t_oper)` and the logical space is the whole system.
    pub fn custom(
        sys_dims: DimensionProfile,
        hamiltonian: ComplexMatrix,
        t_oper: f64,
    ) -> Result<Self> {
        check_t_oper(t_oper)?;
        let n = sys_dims.total_dim();
        if hamiltonian.rows() != n || hamiltonian.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian is {}x{}, system dimension is {n}",
                hamiltonian.rows(),
                hamiltonian.cols()
            )));
        }
        if sys_dims.factors().iter().any(|&d| d > 3) {
            return Err(Error::InvalidDimensions(
                "physical carriers must be qubits or qutrits".into(),
            ));
        }
        let target_unitary = matrix_exp_unitary(&hamiltonian, t_oper)?;
        Ok(Self {
            name: GateName::Custom,
            logical_dims: sys_dims.clone(),
            sys_dims,
            hamiltonian,
            t_oper,
            target_unitary,
            logical: (0..n).collect(),
            reduction: None,
        })
    }

    pub fn name(&self) -> GateName {
        self.name
    }

    pub fn sys_dims(&self) -> &DimensionProfile {
        &self.sys_dims
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn t_oper(&self) -> f64 {
        self.t_oper
    }

    pub fn target_unitary(&self) -> &ComplexMatrix {
        &self.target_unitary
    }

    /// Dimension `s` of the logical space (and of the ancilla copy).
    pub fn logical_dim(&self) -> usize {
        self.logical.len()
    }

    /// Carrier dimensions after the reduction (qubits for `CZ_qutrit`).
    pub fn logical_dims(&self) -> &DimensionProfile {
        &self.logical_dims
    }

    pub fn logical_indices(&self) -> &[usize] {
        &self.logical
    }

    pub fn reduction(&self) -> Option<&KrausSet> {
        self.reduction.as_ref()
    }

    /// Number of physical carriers, each with its own pair of environments.
    pub fn carriers(&self) -> usize {
        self.sys_dims.len()
    }

    /// `exp(-i H t)` on the physical system.
    pub fn unitary_at(&self, t: f64) -> Result<ComplexMatrix> {
        matrix_exp_unitary(&self.hamiltonian, t)
    }

    /// `exp(-i H t)` restricted to the logical basis states.
    pub fn logical_unitary_at(&self, t: f64) -> Result<ComplexMatrix> {
        Ok(self.unitary_at(t)?.select(&self.logical, &self.logical))
    }

    /// Isometry from the logical space into the physical system.
    fn embedding(&self) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(self.sys_dims.total_dim(), self.logical.len());
        for (j, &phys) in self.logical.iter().enumerate() {
            v.set(phys, j, c(1.0, 0.0));
        }
        v
    }
}

fn check_t_oper(t_oper: f64) -> Result<()> {
    if !(t_oper > 0.0) || !t_oper.is_finite() {
        return Err(Error::OutOfRange {
            name: "t_oper",
            value: t_oper,
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

fn two_level_coupling(dim: usize, a: usize, b: usize, strength: f64) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    h.set(a, b, c(strength, 0.0));
    h.set(b, a, c(strength, 0.0));
    h
}

/// Built-in gates with `H` scaled so that the gate completes at `t_oper`.
///
/// * `SQiSW`: `(g/2)(|01><10| + |10><01|)` with `g t_oper = pi/2`.
/// * `iSWAP`: the same interaction with `g t_oper = pi`.
/// * `CNOT`: `(pi/t_oper) |1><1| (x) (I - X)/2`.
/// * `CZ_qutrit`: qubit (x) qutrit with `(g/2)(|11><02| + |02><11|)` and
///   `g t_oper = 2 pi`; the logical space is `{|00>,|01>,|10>,|11>}` and the
///   qutrit is reduced with `|2> -> |1>` before chi extraction.
pub fn gate_library(name: GateName, t_oper: f64) -> Result<GateSpec> {
    check_t_oper(t_oper)?;
    let qubits = DimensionProfile::qubits(2);
    let (sys_dims, hamiltonian, logical, reduction) = match name {
        GateName::Sqisw | GateName::Iswap => {
            let gt = if name == GateName::Sqisw {
                PI / 2.0
            } else {
                PI
            };
            let g = gt / t_oper;
            (
                qubits,
                two_level_coupling(4, 1, 2, g / 2.0),
                (0..4).collect(),
                None,
            )
        }
        GateName::Cnot => {
            let p1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
            let flip = ComplexMatrix::from_real_rows(&[&[0.5, -0.5], &[-0.5, 0.5]]);
            let h = tensor_product(&p1, &flip).scale_real(PI / t_oper);
            (qubits, h, (0..4).collect(), None)
        }
        GateName::CzQutrit => {
            let dims = DimensionProfile::new(vec![2, 3])?;
            let g = 2.0 * PI / t_oper;
            let h = two_level_coupling(6, 4, 2, g / 2.0);
            let reduction = KrausSet::identity(2).tensor(&qutrit_reduction());
            (dims, h, vec![0, 1, 3, 4], Some(reduction))
        }
        GateName::Custom => {
            return Err(Error::UnknownGate(
                "custom gates need a Hamiltonian; use GateSpec::custom".into(),
            ))
        }
    };
    let full = matrix_exp_unitary(&hamiltonian, t_oper)?;
    let target_unitary = full.select(&logical, &logical);
    Ok(GateSpec {
        name,
        logical_dims: DimensionProfile::qubits(2),
        sys_dims,
        hamiltonian,
        t_oper,
        target_unitary,
        logical,
        reduction,
    })
}

/// Factor layout of the extended state: one ancilla factor of the logical
/// dimension, the physical carriers, then two environment qubits per
/// carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedLayout {
    ancilla_dim: usize,
    physical: Vec<usize>,
}

impl ExtendedLayout {
    pub fn for_gate(gate: &GateSpec) -> Self {
        Self {
            ancilla_dim: gate.logical_dim(),
            physical: gate.sys_dims.factors().to_vec(),
        }
    }

    pub fn env_count(&self) -> usize {
        2 * self.physical.len()
    }

    pub fn env_dim(&self) -> usize {
        1 << self.env_count()
    }

    pub fn physical_dim(&self) -> usize {
        self.physical.iter().product()
    }

    /// `[ancilla, physical..., env...]`.
    pub fn profile(&self) -> DimensionProfile {
        let mut factors = vec![self.ancilla_dim];
        factors.extend(&self.physical);
        factors.extend(std::iter::repeat_n(2, self.env_count()));
        DimensionProfile::new(factors).expect("valid layout")
    }

    /// `[physical..., env...]`, the space the step unitary acts on.
    pub fn system_env_profile(&self) -> DimensionProfile {
        let mut factors = self.physical.clone();
        factors.extend(std::iter::repeat_n(2, self.env_count()));
        DimensionProfile::new(factors).expect("valid layout")
    }
}

/// `|Phi><Phi| (x) |0...0><0...0|`, where `|Phi>` maximally entangles the
/// ancilla with the logical subspace of the physical system.
pub fn build_initial_state(gate: &GateSpec) -> ComplexMatrix {
    let layout = ExtendedLayout::for_gate(gate);
    let s = gate.logical_dim();
    let phys = layout.physical_dim();
    let amp = c(1.0 / (s as f64).sqrt(), 0.0);
    let mut phi = vec![ZERO; s * phys];
    for (j, &p) in gate.logical.iter().enumerate() {
        phi[j * phys + p] = amp;
    }
    let phi = ComplexMatrix::projector(&ComplexMatrix::column(&phi));
    let env = ComplexMatrix::unit(layout.env_dim(), 0, 0);
    tensor_product(&phi, &env)
}

/// Coupling angles for one step of length `dt` on carrier `params`.
fn step_angles(dt: f64, params: &RelaxationParams) -> Result<(f64, f64)> {
    Ok((
        fictitious_time(CouplingKind::Amplitude, dt, params)?,
        fictitious_time(CouplingKind::Phase, dt, params)?,
    ))
}

/// `H_gate (x) I_env` plus the environment couplings, on
/// `physical (x) environment`. The coupling strengths are `theta(dt)/dt`, so
/// one step of length `dt` relaxes every carrier exactly as the closed-form
/// channel of duration `dt` would in the absence of the gate.
pub fn total_hamiltonian(
    gate: &GateSpec,
    noise: &[RelaxationParams],
    dt: f64,
) -> Result<ComplexMatrix> {
    if noise.len() != gate.carriers() {
        return Err(Error::DimensionMismatch(format!(
            "{} relaxation entries for {} carriers",
            noise.len(),
            gate.carriers()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: dt,
            reason: "must be positive",
        });
    }
    let layout = ExtendedLayout::for_gate(gate);
    let dims = layout.system_env_profile();
    let carriers = gate.carriers();
    let phys_targets: Vec<usize> = (0..carriers).collect();
    let mut h = embed(&gate.hamiltonian, &dims, &phys_targets)?;
    for (q, params) in noise.iter().enumerate() {
        let (h_amp, h_phase) = relaxation_hamiltonians(gate.sys_dims.factors()[q])?;
        let (theta_amp, theta_phase) = step_angles(dt, params)?;
        let env_amp = carriers + 2 * q;
        if theta_amp > 0.0 {
            h = &h + &embed(&h_amp, &dims, &[env_amp, q])?.scale_real(theta_amp / dt);
        }
        if theta_phase > 0.0 {
            h = &h + &embed(&h_phase, &dims, &[env_amp + 1, q])?.scale_real(theta_phase / dt);
        }
    }
    Ok(h)
}

/// One literal step on the full extended state: apply
/// `exp(-i H_total dt)` (identity on the ancilla), trace out every
/// environment factor and re-attach fresh `|0>` environments.
///
/// `total_hamiltonian` acts on `physical (x) environment` as produced by
/// [`total_hamiltonian`].
pub fn markovian_step(
    state: &ComplexMatrix,
    layout: &ExtendedLayout,
    total_hamiltonian: &ComplexMatrix,
    dt: f64,
) -> Result<ComplexMatrix> {
    let dims = layout.profile();
    let n = dims.total_dim();
    if state.rows() != n || state.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, layout needs {n}x{n}",
            state.rows(),
            state.cols()
        )));
    }
    let u_sys_env = matrix_exp_unitary(total_hamiltonian, dt)?;
    if u_sys_env.rows() * layout.ancilla_dim != n {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian of dimension {} does not fit the layout",
            u_sys_env.rows()
        )));
    }
    let u = tensor_product(&ComplexMatrix::identity(layout.ancilla_dim), &u_sys_env);
    let evolved = &(&u * state) * &u.adjoint();
    let keep: Vec<usize> = (0..1 + layout.physical.len()).collect();
    let reduced = partial_trace(&evolved, &dims, &keep)?;
    let env = ComplexMatrix::unit(layout.env_dim(), 0, 0);
    Ok(tensor_product(&reduced, &env))
}

/// Kraus operators `<k|_env exp(-i H_total dt) |0>_env` of one step on the
/// physical system.
pub fn step_kraus(gate: &GateSpec, noise: &[RelaxationParams], dt: f64) -> Result<KrausSet> {
    let h = total_hamiltonian(gate, noise, dt)?;
    let u = matrix_exp_unitary(&h, dt)?;
    let layout = ExtendedLayout::for_gate(gate);
    let d = layout.physical_dim();
    let m = layout.env_dim();
    let ops: Vec<ComplexMatrix> = (0..m)
        .map(|k| {
            let rows: Vec<usize> = (0..d).map(|i| i * m + k).collect();
            let cols: Vec<usize> = (0..d).map(|j| j * m).collect();
            u.select(&rows, &cols)
        })
        .filter(|op| op.frobenius_norm() > 0.0)
        .collect();
    KrausSet::new(ops)
}

/// Evolution matrix `sum_k conj(E_k) (x) E_k` of a (possibly rectangular)
/// Kraus set, mapping `vec(rho_in)` to `vec(rho_out)`.
fn superoperator(kraus: &KrausSet) -> DMatrix<C64> {
    let (out, inp) = (kraus.output_dim(), kraus.input_dim());
    let mut g = DMatrix::<C64>::zeros(out * out, inp * inp);
    for op in kraus.operators() {
        g += tensor_product(&op.conj(), op).as_dmatrix();
    }
    g
}

/// Result of [`simulate`]. Chi matrices are in the normalized convention
/// (the Choi state `rho_chi`).
#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub gate: GateSpec,
    pub noise: Vec<RelaxationParams>,
    pub dt: f64,
    pub grid: Vec<f64>,
    pub steps: Vec<u64>,
    pub chi_trajectory: Vec<ChiMatrix>,
    /// Pure-noise chi, present wherever the ideal logical operation at that
    /// time is unitary (always for qubit gates).
    pub chi_tilde_trajectory: Vec<Option<ChiMatrix>>,
}

impl SimulationRun {
    /// Chi at the sample closest to `t`.
    pub fn chi_at(&self, t: f64) -> &ChiMatrix {
        let idx = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .expect("non-empty grid");
        &self.chi_trajectory[idx]
    }
}

/// Checks `dt` against the sanctioned range and converts sample times to
/// step counts. Sample times must be non-negative, strictly increasing
/// integer multiples of `dt`.
pub fn plan_steps(t_oper: f64, dt: f64, sample_times: &[f64]) -> Result<Vec<u64>> {
    let ratio = dt / t_oper;
    let (lo, hi) = DT_RANGE;
    if !(ratio >= lo * (1.0 - 1e-9) && ratio <= hi * (1.0 + 1e-9)) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: dt,
            reason: "dt / t_oper must lie in [1e-4, 1e-2]",
        });
    }
    if sample_times.is_empty() {
        return Err(Error::InvalidInput("no sample times".into()));
    }
    let mut steps = Vec::with_capacity(sample_times.len());
    for &t in sample_times {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::OutOfRange {
                name: "sample time",
                value: t,
                reason: "must be finite and non-negative",
            });
        }
        let n = (t / dt).round();
        if (n * dt - t).abs() > 1e-9 * t.max(dt) {
            return Err(Error::InvalidInput(format!(
                "sample time {t} is not a multiple of dt = {dt}"
            )));
        }
        let n = n as u64;
        if steps.last().is_some_and(|&prev| n <= prev) {
            return Err(Error::InvalidInput(
                "sample times must be strictly increasing".into(),
            ));
        }
        steps.push(n);
    }
    Ok(steps)
}

/// Evenly spaced sample times `0, t_end/count, ..., t_end` snapped to the
/// step grid.
pub fn uniform_samples(t_end: f64, count: usize, dt: f64) -> Vec<f64> {
    let total = (t_end / dt).round() as u64;
    let count = count.max(1) as u64;
    let mut times: Vec<f64> = (0..=count)
        .map(|k| (total * k / count) as f64 * dt)
        .collect();
    times.dedup();
    times
}

/// Runs the Markovian stepper and records chi and the pure-noise chi at
/// every sample time.
pub fn simulate(
    gate: &GateSpec,
    noise: &[RelaxationParams],
    dt: f64,
    sample_times: &[f64],
) -> Result<SimulationRun> {
    let steps = plan_steps(gate.t_oper, dt, sample_times)?;
    let step = step_kraus(gate, noise, dt)?;
    let g_step = EvolutionMatrix::new(
        gate.sys_dims.total_dim(),
        ComplexMatrix::from_dmatrix(superoperator(&step))?,
    )?;
    let s = gate.logical_dim();
    let embedding = superoperator(&KrausSet::relaxed(vec![gate.embedding()])?);
    let reduction = gate.reduction.as_ref().map(superoperator);
    log::debug!(
        "{}: {} Kraus operators per step, dt = {dt}, {} samples up to step {}",
        gate.name,
        step.len(),
        steps.len(),
        steps.last().copied().unwrap_or(0)
    );

    let mut g_phys = EvolutionMatrix::identity(gate.sys_dims.total_dim());
    let mut done = 0u64;
    let mut chi_trajectory = Vec::with_capacity(steps.len());
    let mut chi_tilde_trajectory = Vec::with_capacity(steps.len());
    for (&n, &t) in steps.iter().zip(sample_times) {
        g_phys = g_phys.then(&crate::channel::evolution_power(&g_step, n - done))?;
        done = n;
        let mut g = g_phys.matrix().as_dmatrix() * &embedding;
        if let Some(r) = &reduction {
            g = r * g;
        }
        let g = EvolutionMatrix::new(s, ComplexMatrix::from_dmatrix(g)?)?;
        let chi = hermitized_chi(&g)?;
        let trace = chi.trace() / s as f64;
        if (trace - 1.0).abs() > TRACE_DRIFT_TOL {
            return Err(Error::TraceDrift {
                step: n as usize,
                trace,
            });
        }
        let ideal = gate.logical_unitary_at(t)?;
        let tilde = if unitary_deviation(&ideal) <= 1e-9 {
            Some(hermitize(&pure_noise_channel(&g, &ideal)?)?.normalized())
        } else {
            None
        };
        log::trace!("t = {t}: trace {trace}");
        chi_trajectory.push(chi.normalized());
        chi_tilde_trajectory.push(tilde);
    }
    Ok(SimulationRun {
        gate: gate.clone(),
        noise: noise.to_vec(),
        dt,
        grid: sample_times.to_vec(),
        steps,
        chi_trajectory,
        chi_tilde_trajectory,
    })
}

/// Removes the anti-Hermitian round-off that accumulates over many steps.
fn hermitize(chi: &ChiMatrix) -> Result<ChiMatrix> {
    ChiMatrix::new(chi.dim(), chi.matrix().hermitian_part(), chi.convention())
}

fn hermitized_chi(g: &EvolutionMatrix) -> Result<ChiMatrix> {
    hermitize(&evolution_to_chi(g)?)
}

/// Chi of the noiseless gate at time `t` on the logical space, in the
/// canonical convention. For gates with a reduction the reduced map is used.
pub fn ideal_chi(gate: &GateSpec, t: f64) -> Result<ChiMatrix> {
    let u = gate.unitary_at(t)?;
    let v = gate.embedding();
    let mut ops = vec![&u * &v];
    if let Some(r) = &gate.reduction {
        ops = r.operators().iter().map(|e| e * &ops[0]).collect();
    }
    kraus_to_chi(&KrausSet::relaxed(ops)?)
}

/// Density matrix of the ancilla and physical factors of an extended state,
/// after the reduction (if any) has been applied to the physical part. This
/// is the Choi state the stepper reports.
pub fn extract_choi_state(state: &ComplexMatrix, gate: &GateSpec) -> Result<ChiMatrix> {
    let layout = ExtendedLayout::for_gate(gate);
    let keep: Vec<usize> = (0..1 + layout.physical.len()).collect();
    let mut rho = partial_trace(state, &layout.profile(), &keep)?;
    if let Some(r) = &gate.reduction {
        let lifted = KrausSet::identity(layout.ancilla_dim).tensor(r);
        rho = crate::channel::apply_channel_unchecked(&lifted, &rho)?;
    }
    ChiMatrix::new(
        gate.logical_dim(),
        rho.hermitian_part(),
        TraceConvention::Normalized,
    )
}

/// Chi of the identity channel on `s` levels, normalized.
pub fn identity_chi(s: usize) -> ChiMatrix {
    kraus_to_chi(&KrausSet::identity(s))
        .expect("identity chi")
        .normalized()
}

/// Chi of a unitary on the logical space in the normalized convention.
pub fn unitary_chi(u: &ComplexMatrix) -> Result<ChiMatrix> {
    Ok(kraus_to_chi(&KrausSet::unitary(u)?)?.normalized())
}
