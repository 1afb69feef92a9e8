//! Single-carrier noise constructors: dephasing, phase flip, amplitude
//! damping, combined T1/T2 relaxation, depolarizing, the environment
//! interaction Hamiltonians behind them and the qutrit-to-qubit reduction.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::channel::{kraus_to_chi, ChiMatrix, KrausSet, TraceConvention};
use crate::error::{Error, Result};
use crate::matrix::{
    c, herm_eig, tensor_product, unitary_deviation, unvec, vec, ComplexMatrix, C64, ONE, TOL_UNIT,
    ZERO,
};

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

fn check_time(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) {
        return Err(Error::OutOfRange {
            name,
            value,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

/// Amplitude (`T1`) and total dephasing (`T2`) time constants of one carrier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RelaxationRepr", into = "RelaxationRepr")]
pub struct RelaxationParams {
    t1: f64,
    t2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelaxationRepr {
    #[serde(rename = "T1")]
    t1: f64,
    #[serde(rename = "T2")]
    t2: f64,
}

impl TryFrom<RelaxationRepr> for RelaxationParams {
    type Error = Error;
    fn try_from(r: RelaxationRepr) -> Result<Self> {
        Self::new(r.t1, r.t2)
    }
}

impl From<RelaxationParams> for RelaxationRepr {
    fn from(p: RelaxationParams) -> Self {
        Self { t1: p.t1, t2: p.t2 }
    }
}

impl RelaxationParams {
    /// Requires `0 < T2 <= 2 T1`. Infinite values are allowed and mean "no
    /// relaxation of that kind".
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t1 > 0.0) || !(t2 > 0.0) {
            return Err(Error::InvalidRelaxation(format!(
                "T1 = {t1} and T2 = {t2} must both be positive"
            )));
        }
        if t1.is_finite() && t2 > 2.0 * t1 {
            return Err(Error::InvalidRelaxation(format!(
                "T2 = {t2} exceeds 2 T1 = {}",
                2.0 * t1
            )));
        }
        Ok(Self { t1, t2 })
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// `2 T1 T2 / (2 T1 - T2)`; infinite when `T2 = 2 T1`.
    pub fn t2_pure(&self) -> f64 {
        if self.t1.is_infinite() {
            return self.t2;
        }
        let denom = 2.0 * self.t1 - self.t2;
        if denom <= 0.0 {
            f64::INFINITY
        } else {
            2.0 * self.t1 * self.t2 / denom
        }
    }
}

/// Noise description as it appears in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Dephasing {
        gamma: f64,
    },
    PhaseFlip {
        p: f64,
    },
    Amplitude {
        gamma: f64,
    },
    Relaxation {
        #[serde(rename = "T1", default, skip_serializing_if = "Option::is_none")]
        t1: Option<f64>,
        #[serde(rename = "T2", default, skip_serializing_if = "Option::is_none")]
        t2: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_qubit: Option<Vec<RelaxationParams>>,
    },
    Depolarizing {
        p: f64,
    },
}

impl NoiseSpec {
    pub fn uniform_relaxation(params: RelaxationParams) -> Self {
        NoiseSpec::Relaxation {
            t1: Some(params.t1),
            t2: Some(params.t2),
            per_qubit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Dephasing { gamma } | NoiseSpec::Amplitude { gamma } => {
                check_unit_interval("gamma", *gamma)
            }
            NoiseSpec::PhaseFlip { p } | NoiseSpec::Depolarizing { p } => {
                check_unit_interval("p", *p)
            }
            NoiseSpec::Relaxation { .. } => self.relaxation(1).map(|_| ()),
        }
    }

    /// Per-carrier relaxation parameters for `carriers` physical carriers.
    /// A uniform `T1`/`T2` pair is copied to every carrier; a `per_qubit` list
    /// must have exactly one entry per carrier.
    pub fn relaxation(&self, carriers: usize) -> Result<Vec<RelaxationParams>> {
        let NoiseSpec::Relaxation { t1, t2, per_qubit } = self else {
            return Err(Error::InvalidInput(
                "gate simulation needs relaxation noise (T1/T2)".into(),
            ));
        };
        match (t1, t2, per_qubit) {
            (Some(t1), Some(t2), None) => Ok(vec![RelaxationParams::new(*t1, *t2)?; carriers]),
            (None, None, Some(list)) => {
                if list.len() != carriers && carriers != 1 {
                    return Err(Error::InvalidInput(format!(
                        "per_qubit lists {} entries for {carriers} carriers",
                        list.len()
                    )));
                }
                Ok(list.clone())
            }
            _ => Err(Error::InvalidInput(
                "relaxation noise needs either T1 and T2 or a per_qubit list".into(),
            )),
        }
    }

    /// Kraus set of the non-time-dependent kinds (depolarizing uses `U = I`
    /// on a qubit).
    pub fn kraus(&self) -> Result<KrausSet> {
        match self {
            NoiseSpec::Dephasing { gamma } => dephasing_kraus(*gamma),
            NoiseSpec::PhaseFlip { p } => phase_flip_kraus(*p),
            NoiseSpec::Amplitude { gamma } => amplitude_kraus(*gamma),
            NoiseSpec::Depolarizing { p } => {
                Ok(depolarizing_channel(&ComplexMatrix::identity(2), *p)?.0)
            }
            NoiseSpec::Relaxation { .. } => Err(Error::InvalidInput(
                "relaxation noise needs a duration; use relaxation_kraus".into(),
            )),
        }
    }
}

/// `E0 = diag(1, sqrt(1 - gamma))`, `E1 = diag(0, sqrt(gamma))`.
pub fn dephasing_kraus(gamma: f64) -> Result<KrausSet> {
    check_unit_interval("gamma", gamma)?;
    KrausSet::new(vec![
        ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - gamma).sqrt()]),
        ComplexMatrix::from_real_diagonal(&[0.0, gamma.sqrt()]),
    ])
}

/// `E0 = sqrt(1 - p) I`, `E1 = sqrt(p) Z`.
pub fn phase_flip_kraus(p: f64) -> Result<KrausSet> {
    check_unit_interval("p", p)?;
    KrausSet::new(vec![
        ComplexMatrix::identity(2).scale_real((1.0 - p).sqrt()),
        ComplexMatrix::from_real_diagonal(&[p.sqrt(), -p.sqrt()]),
    ])
}

/// `E0 = diag(1, sqrt(1 - gamma))`, `E1 = sqrt(gamma) |0><1|`.
pub fn amplitude_kraus(gamma: f64) -> Result<KrausSet> {
    check_unit_interval("gamma", gamma)?;
    KrausSet::new(vec![
        ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - gamma).sqrt()]),
        ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]),
    ])
}

/// Dephasing strength with the same chi as a phase flip of probability `p`:
/// `1 - 2p = sqrt(1 - gamma)`.
pub fn gamma_from_phase_flip(p: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            reason: "the dephasing correspondence needs p in [0, 1/2]",
        });
    }
    Ok(1.0 - (1.0 - 2.0 * p).powi(2))
}

pub fn phase_flip_from_gamma(gamma: f64) -> Result<f64> {
    check_unit_interval("gamma", gamma)?;
    Ok((1.0 - (1.0 - gamma).sqrt()) / 2.0)
}

/// `p = (1 - exp(-t / T2_pure)) / 2`.
pub fn phase_flip_probability(t: f64, t2_pure: f64) -> Result<f64> {
    check_time("t", t)?;
    Ok((1.0 - (-t / t2_pure).exp()) / 2.0)
}

/// `T2_pure = -t / ln(1 - 2p)`; infinite for `p = 0`.
pub fn t2_pure_from_phase_flip(p: f64, t: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            reason: "must lie in [0, 1/2)",
        });
    }
    check_time("t", t)?;
    if p == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-t / (1.0 - 2.0 * p).ln())
}

/// `gamma = 1 - exp(-2t / T2_pure)` for pure dephasing, so that coherences
/// decay as `exp(-t / T2_pure)`.
pub fn dephasing_gamma(t: f64, t2_pure: f64) -> Result<f64> {
    check_time("t", t)?;
    Ok(-(-2.0 * t / t2_pure).exp_m1())
}

/// `gamma = 1 - exp(-t / T1)` for amplitude damping.
pub fn amplitude_gamma(t: f64, t1: f64) -> Result<f64> {
    check_time("t", t)?;
    Ok(-(-t / t1).exp_m1())
}

/// Amplitude damping followed by pure dephasing over duration `t`. The two
/// qubit channels commute, so the order does not matter.
pub fn relaxation_kraus(t: f64, params: &RelaxationParams) -> Result<KrausSet> {
    let amp = amplitude_kraus(amplitude_gamma(t, params.t1)?)?;
    let deph = dephasing_kraus(dephasing_gamma(t, params.t2_pure())?)?;
    amp.then(&deph)
}

/// Closed-form qubit relaxation: populations relax towards `|0>` with `T1`,
/// coherences decay with `T2`.
pub fn relaxation_analytic(
    rho: &ComplexMatrix,
    t: f64,
    params: &RelaxationParams,
) -> Result<ComplexMatrix> {
    if rho.rows() != 2 || rho.cols() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "relaxation acts on qubits, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    crate::channel::check_density(rho)?;
    check_time("t", t)?;
    let pop = (-t / params.t1).exp();
    let coh = (-t / params.t2).exp();
    let excited = rho.get(1, 1).re;
    let b = rho.get(0, 1);
    Ok(ComplexMatrix::from_rows(&[
        &[c(1.0 - excited * pop, 0.0), b * coh],
        &[b.conj() * coh, c(excited * pop, 0.0)],
    ]))
}

/// Which environment coupling a fictitious time refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    Amplitude,
    Phase,
}

/// Coupling angle producing the relaxation of duration `t`:
/// `theta = asin(sqrt(1 - exp(-t/T1)))` for amplitude,
/// `theta = asin(sqrt(1 - exp(-2t/T2_pure)))` for phase.
pub fn fictitious_time(kind: CouplingKind, t: f64, params: &RelaxationParams) -> Result<f64> {
    check_time("t", t)?;
    let exponent = match kind {
        CouplingKind::Amplitude => t / params.t1,
        CouplingKind::Phase => 2.0 * t / params.t2_pure(),
    };
    Ok((-(-exponent).exp_m1()).sqrt().min(1.0).asin())
}

/// Inverse of [`fictitious_time`]; `theta = pi/2` maps to `+inf`.
pub fn real_time(kind: CouplingKind, theta: f64, params: &RelaxationParams) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            reason: "must lie in [0, pi/2]",
        });
    }
    let cos2 = theta.cos().powi(2);
    if theta == FRAC_PI_2 || cos2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let scale = match kind {
        CouplingKind::Amplitude => params.t1,
        CouplingKind::Phase => params.t2_pure() / 2.0,
    };
    Ok(-scale * cos2.ln())
}

/// `gamma = sin^2 theta`.
pub fn gamma_from_theta(theta: f64) -> f64 {
    theta.sin().powi(2)
}

/// `theta = asin(sqrt gamma)` in `[0, pi/2]`.
pub fn theta_from_gamma(gamma: f64) -> Result<f64> {
    check_unit_interval("gamma", gamma)?;
    Ok(gamma.sqrt().asin())
}

/// Truncated annihilation operator on `dim` levels (`dim` = 2 or 3).
pub fn ladder(dim: usize) -> Result<ComplexMatrix> {
    match dim {
        2 => Ok(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
        3 => Ok(ComplexMatrix::from_real_rows(&[
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 2f64.sqrt()],
            &[0.0, 0.0, 0.0],
        ])),
        _ => Err(Error::InvalidDimensions(format!(
            "ladder operators are defined for 2 or 3 levels, not {dim}"
        ))),
    }
}

/// `H_amp = i (b^dagger (x) a - b (x) a^dagger)` and
/// `H_phase = (b + b^dagger) (x) a^dagger a` on `environment (x) system`,
/// where `b` is the environment-qubit ladder.
pub fn relaxation_hamiltonians(sys_dim: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let a = ladder(sys_dim)?;
    let b = ladder(2)?;
    let forward = tensor_product(&b.adjoint(), &a);
    let backward = tensor_product(&b, &a.adjoint());
    let h_amp = (&forward - &backward).scale(crate::matrix::I);
    let number = &a.adjoint() * &a;
    let h_phase = tensor_product(&(&b + &b.adjoint()), &number);
    Ok((h_amp, h_phase))
}

/// Depolarizing channel `rho -> (1 - p) U rho U^dagger + p I / s`.
///
/// Built from `e = [sqrt(1 - (s^2-1) p / s^2) e_U, sqrt(p / s^2) U_P]`,
/// where `e_U = vec(U)/sqrt(s)` and `U_P` spans the orthogonal complement of
/// `e_U`. `e e^dagger` is the Choi state (trace 1), so the Kraus operators
/// are `sqrt(s) unvec` of its columns. Returns the Kraus set and the
/// canonical chi.
pub fn depolarizing_channel(u: &ComplexMatrix, p: f64) -> Result<(KrausSet, ChiMatrix)> {
    check_unit_interval("p", p)?;
    let deviation = unitary_deviation(u);
    if !u.is_square() || deviation > TOL_UNIT {
        return Err(Error::NotUnitary { deviation });
    }
    let s = u.rows();
    let s2 = s * s;
    let sf = s as f64;
    let e_u = vec(u)?.scale_real(1.0 / sf.sqrt());
    let projector = &ComplexMatrix::identity(s2) - &ComplexMatrix::projector(&e_u);
    let eig = herm_eig(&projector)?;

    let lead = (1.0 - (s2 as f64 - 1.0) * p / s2 as f64).max(0.0).sqrt();
    let rest = (p / s2 as f64).sqrt();
    let root_s = sf.sqrt();
    let mut ops = vec![unvec(&e_u.scale_real(lead * root_s))?];
    if rest > 0.0 {
        // eigenvalues are sorted descending: the first s^2 - 1 are the unit ones
        for k in 0..s2 - 1 {
            let column: Vec<C64> = (0..s2)
                .map(|i| eig.vectors.get(i, k) * (rest * root_s))
                .collect();
            ops.push(unvec(&ComplexMatrix::column(&column))?);
        }
    }
    let kraus = KrausSet::new(ops)?;
    let chi = kraus_to_chi(&kraus)?;
    debug_assert_eq!(chi.convention(), TraceConvention::Canonical);
    Ok((kraus, chi))
}

/// Maps a qutrit onto a qubit by identifying `|2>` with `|1>`:
/// `E0 = [[1,0,0],[0,1,0]]`, `E1 = [[0,0,0],[0,0,1]]`.
pub fn qutrit_reduction() -> KrausSet {
    let e0 = ComplexMatrix::new(2, 3, vec![ONE, ZERO, ZERO, ZERO, ONE, ZERO]).expect("2x3 entries");
    let e1 =
        ComplexMatrix::new(2, 3, vec![ZERO, ZERO, ZERO, ZERO, ZERO, ONE]).expect("2x3 entries");
    KrausSet::new(vec![e0, e1]).expect("reduction is trace preserving")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::apply_channel;

    fn general_qubit() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[c(0.3, 0.0), c(0.2, 0.1)], &[c(0.2, -0.1), c(0.7, 0.0)]])
    }

    #[test]
    fn relaxation_params_bounds() {
        let p = RelaxationParams::new(5.0, 3.0).unwrap();
        assert!((p.t2_pure() - 30.0 / 7.0).abs() < 1e-12);
        let lhs = 1.0 / p.t2();
        let rhs = 1.0 / p.t2_pure() + 1.0 / (2.0 * p.t1());
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(matches!(
            RelaxationParams::new(1.0, 2.5),
            Err(Error::InvalidRelaxation(_))
        ));
        assert!(RelaxationParams::new(0.0, 1.0).is_err());
        assert!(RelaxationParams::new(1.0, 2.0)
            .unwrap()
            .t2_pure()
            .is_infinite());
    }

    #[test]
    fn relaxation_params_json() {
        let p: RelaxationParams = serde_json::from_str(r#"{"T1":5.0,"T2":3.0}"#).unwrap();
        assert_eq!(p, RelaxationParams::new(5.0, 3.0).unwrap());
        assert!(serde_json::from_str::<RelaxationParams>(r#"{"T1":1.0,"T2":3.0}"#).is_err());
        assert!(serde_json::from_str::<RelaxationParams>(r#"{"T1":5,"T2":3,"x":1}"#).is_err());
    }

    #[test]
    fn noise_spec_json() {
        let spec: NoiseSpec =
            serde_json::from_str(r#"{"kind":"relaxation","T1":5,"T2":3}"#).unwrap();
        let params = spec.relaxation(2).unwrap();
        assert_eq!(params.len(), 2);
        assert_eq!(params[1].t1(), 5.0);
        let per: NoiseSpec = serde_json::from_str(
            r#"{"kind":"relaxation","per_qubit":[{"T1":3,"T2":2.4},{"T1":4,"T2":3.2}]}"#,
        )
        .unwrap();
        assert_eq!(per.relaxation(2).unwrap()[1].t2(), 3.2);
        assert!(per.relaxation(3).is_err());
        let flip: NoiseSpec = serde_json::from_str(r#"{"kind":"phase_flip","p":0.1}"#).unwrap();
        assert_eq!(flip, NoiseSpec::PhaseFlip { p: 0.1 });
        assert!(
            serde_json::from_str::<NoiseSpec>(r#"{"kind":"phase_flip","p":0.1,"q":1}"#).is_err()
        );
        assert!(NoiseSpec::Amplitude { gamma: 1.5 }.validate().is_err());
        assert!(flip.relaxation(2).is_err());
    }

    #[test]
    fn dephasing_endpoints() {
        let rho = general_qubit();
        let out = apply_channel(&dephasing_kraus(0.0).unwrap(), &rho).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-15);
        let out = apply_channel(&dephasing_kraus(1.0).unwrap(), &rho).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.3, 0.7])) < 1e-15);
        assert!(dephasing_kraus(-0.1).is_err());
    }

    #[test]
    fn dephasing_off_diagonal_decays_exponentially() {
        let (t, t2p) = (0.7, 2.0);
        let gamma = dephasing_gamma(t, t2p).unwrap();
        let out = apply_channel(&dephasing_kraus(gamma).unwrap(), &general_qubit()).unwrap();
        let expected = c(0.2, 0.1) * (-t / t2p).exp();
        assert!((out.get(0, 1) - expected).norm() < 1e-15);
        assert!((out.get(1, 1).re - 0.7).abs() < 1e-15);
    }

    #[test]
    fn phase_flip_matches_dephasing() {
        assert_eq!(gamma_from_phase_flip(0.5).unwrap(), 1.0);
        let gamma = gamma_from_phase_flip(0.1).unwrap();
        assert!((gamma - 0.36).abs() < 1e-15);
        let a = kraus_to_chi(&phase_flip_kraus(0.1).unwrap()).unwrap();
        let b = kraus_to_chi(&dephasing_kraus(gamma).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!((phase_flip_from_gamma(0.36).unwrap() - 0.1).abs() < 1e-15);
        assert!(gamma_from_phase_flip(0.6).is_err());
        let p = phase_flip_probability(1.3, 2.0).unwrap();
        assert!((t2_pure_from_phase_flip(p, 1.3).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping() {
        let rho = general_qubit();
        let out = apply_channel(&amplitude_kraus(1.0).unwrap(), &rho).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
        let (t, t1) = (0.4, 1.5);
        let gamma = amplitude_gamma(t, t1).unwrap();
        let out = apply_channel(&amplitude_kraus(gamma).unwrap(), &rho).unwrap();
        assert!((out.get(1, 1).re - 0.7 * (-t / t1).exp()).abs() < 1e-15);
        assert!((out.get(0, 1) - c(0.2, 0.1) * (-t / (2.0 * t1)).exp()).norm() < 1e-15);
    }

    #[test]
    fn relaxation_analytic_values() {
        let params = RelaxationParams::new(1.0, 1.0).unwrap();
        let rho = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let out = relaxation_analytic(&rho, 1.0, &params).unwrap();
        let e = (-1.0f64).exp();
        assert!((out.get(0, 0).re - (1.0 - 0.5 * e)).abs() < 1e-15);
        assert!((out.get(0, 0).re - 0.8161).abs() < 1e-4);
        assert!((out.get(0, 1).re - 0.5 * e).abs() < 1e-15);
        let at_zero = relaxation_analytic(&rho, 0.0, &params).unwrap();
        assert!(at_zero.max_abs_diff(&rho) < 1e-15);
        let late = relaxation_analytic(&rho, 1e3, &params).unwrap();
        assert!(late.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn composed_relaxation_matches_closed_form_in_either_order() {
        let params = RelaxationParams::new(5.0, 3.0).unwrap();
        let t = 2.2;
        let amp = amplitude_kraus(amplitude_gamma(t, 5.0).unwrap()).unwrap();
        let deph = dephasing_kraus(dephasing_gamma(t, params.t2_pure()).unwrap()).unwrap();
        let rho = general_qubit();
        let expected = relaxation_analytic(&rho, t, &params).unwrap();
        for k in [amp.then(&deph).unwrap(), deph.then(&amp).unwrap()] {
            let out = apply_channel(&k, &rho).unwrap();
            assert!(out.max_abs_diff(&expected) < 1e-10);
        }
        let direct = apply_channel(&relaxation_kraus(t, &params).unwrap(), &rho).unwrap();
        assert!(direct.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn fictitious_time_maps() {
        let params = RelaxationParams::new(2.0, 2.0).unwrap();
        assert_eq!(
            fictitious_time(CouplingKind::Amplitude, 0.0, &params).unwrap(),
            0.0
        );
        let theta = fictitious_time(CouplingKind::Amplitude, 2.0 * 2f64.ln(), &params).unwrap();
        assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((gamma_from_theta(theta) - 0.5).abs() < 1e-12);
        assert_eq!(
            real_time(CouplingKind::Amplitude, FRAC_PI_2, &params).unwrap(),
            f64::INFINITY
        );
        let t = real_time(CouplingKind::Amplitude, theta, &params).unwrap();
        assert!((t - 2.0 * 2f64.ln()).abs() < 1e-12);
        let params = RelaxationParams::new(5.0, 3.0).unwrap();
        let theta = fictitious_time(CouplingKind::Phase, 0.8, &params).unwrap();
        assert!((real_time(CouplingKind::Phase, theta, &params).unwrap() - 0.8).abs() < 1e-12);
        assert!(real_time(CouplingKind::Phase, 2.0, &params).is_err());
    }

    #[test]
    fn qutrit_number_operator() {
        let a = ladder(3).unwrap();
        let n = &a.adjoint() * &a;
        assert!(n.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 2.0])) < 1e-15);
        assert!(ladder(4).is_err());
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        for dim in [2, 3] {
            let (h_amp, h_phase) = relaxation_hamiltonians(dim).unwrap();
            assert!(crate::matrix::is_hermitian(&h_amp, 1e-15));
            assert!(crate::matrix::is_hermitian(&h_phase, 1e-15));
            assert_eq!(h_amp.rows(), 2 * dim);
        }
    }

    #[test]
    fn depolarizing_endpoints() {
        let (k, chi) = depolarizing_channel(&ComplexMatrix::identity(2), 0.0).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(crate::channel::channel_rank(&chi).unwrap(), 1);
        let (k, _) = depolarizing_channel(&ComplexMatrix::identity(2), 1.0).unwrap();
        let out = apply_channel(&k, &general_qubit()).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-12);
        let not_unitary = ComplexMatrix::identity(2).scale_real(2.0);
        assert!(depolarizing_channel(&not_unitary, 0.1).is_err());
    }

    #[test]
    fn qutrit_reduction_action() {
        let red = qutrit_reduction();
        assert!(red.is_trace_preserving());
        let ket2 = ComplexMatrix::unit(3, 2, 2);
        let out = apply_channel(&red, &ket2).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0])) < 1e-15);
        let mixed = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        let out = apply_channel(&red, &mixed).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[1.0 / 3.0, 2.0 / 3.0]);
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }
}
