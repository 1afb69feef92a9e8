use std::path::{Path, PathBuf};

use qnoise_core::analysis::*;
use qnoise_core::channel::{
    channel_rank, chi_to_evolution, kraus_to_chi, pure_noise_channel, Channel, ChiMatrix,
    Representation,
};
use qnoise_core::gate_sim::*;
use qnoise_core::noise::*;
use qnoise_core::DimensionProfile;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::error::{CliError, Result};
use crate::plot::{line_plot, Series};

/// Where inputs are resolved from and outputs go.
pub struct Context {
    pub config_dir: PathBuf,
    pub out: PathBuf,
    pub plot: bool,
    /// `--dt` override for the simulating commands.
    pub dt: Option<f64>,
}

impl Context {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let write_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Write { path, source }
        };
        std::fs::create_dir_all(&self.out).map_err(write_err(&self.out))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(write_err(&path))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, &text)
    }

    fn write_plot(&self, name: &str, title: &str, x: &str, y: &str, series: &[Series]) -> Result<()> {
        if self.plot {
            self.write(name, &line_plot(title, x, y, series))?;
        }
        Ok(())
    }

    fn dt(&self, configured: Option<f64>, t_oper: f64) -> f64 {
        self.dt.or(configured).unwrap_or(DEFAULT_DT_FRACTION * t_oper)
    }
}

fn curve_series(curves: &[SweepResult]) -> Vec<Series> {
    curves
        .iter()
        .map(|c| Series {
            label: format!("{} {} {}", c.gate, c.metric, c.split),
            x: c.grid.clone(),
            y: c.values.clone(),
        })
        .collect()
}

fn representation_label(r: Representation) -> &'static str {
    match r {
        Representation::Kraus => "kraus",
        Representation::Chi => "chi",
        Representation::Evolution => "evolution",
        Representation::Dilation => "dilation",
    }
}

pub fn convert(cfg: ConvertConfig, ctx: &Context) -> Result<()> {
    let name = cfg
        .output
        .clone()
        .unwrap_or_else(|| format!("channel.{}.json", representation_label(cfg.to)));
    if name.is_empty() || Path::new(&name).file_name() != Some(name.as_ref()) {
        return Err(CliError::Config(format!("output {name:?} must be a plain file name")));
    }
    let path = ctx.config_dir.join(&cfg.input);
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })?;
    let channel: Channel = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.clone(),
        source,
    })?;
    // rejects non-CP input before anything is written
    let source_chi = channel.to_chi()?;
    let converted = channel.convert(cfg.to)?;
    let deviation = source_chi.max_abs_diff(&converted.to_chi()?);
    ctx.write_json(&name, &converted)?;
    ctx.write_json(
        "convert.json",
        &json!({
            "input": path,
            "output": name,
            "from": representation_label(channel.representation()),
            "to": representation_label(cfg.to),
            "dim": channel.dim(),
            "rank": channel_rank(&source_chi)?,
            "round_trip_chi_deviation": deviation,
        }),
    )
}

fn family_chi(cfg: &NoiseSweepConfig, x: f64, carriers: usize) -> Result<ChiMatrix> {
    let single = match cfg.family {
        Family::Dephasing => dephasing_kraus(x)?,
        Family::PhaseFlip => phase_flip_kraus(x)?,
        Family::Amplitude => amplitude_kraus(x)?,
        Family::Relaxation => {
            let params = RelaxationParams::new(cfg.t1.unwrap_or(0.0), cfg.t2.unwrap_or(0.0))?;
            relaxation_kraus(x, &params)?
        }
        Family::Depolarizing => unreachable!("depolarizing sweeps are built per dimension"),
    };
    let kraus = (1..carriers).fold(single.clone(), |acc, _| acc.tensor(&single));
    Ok(kraus_to_chi(&kraus)?.normalized())
}

pub fn noise_sweep(cfg: NoiseSweepConfig, ctx: &Context) -> Result<()> {
    cfg.validate()?;
    let grid = cfg.grid.points()?;
    let wants = |m| cfg.metrics.contains(&m);
    let mut curves = Vec::new();
    if cfg.family == Family::Depolarizing {
        for &s in cfg.dims.as_deref().unwrap_or(&[2]) {
            if wants(Metric::Fidelity) {
                let reference = identity_chi(s);
                let values = grid
                    .par_iter()
                    .map(|&p| Ok(fidelity(&reference, &depolarized_choi(s, p)?)?))
                    .collect::<Result<Vec<f64>>>()?;
                let label = format!("depolarizing_s{s}");
                curves.push(SweepResult::new(grid.clone(), values, "fidelity", label, "none")?);
            }
            if wants(Metric::Negativity) {
                curves.push(depolarizing_negativity_sweep(s, &grid)?);
            }
        }
    } else {
        for &n in cfg.carriers.as_deref().unwrap_or(&[1]) {
            let chis = grid
                .par_iter()
                .map(|&x| family_chi(&cfg, x, n))
                .collect::<Result<Vec<_>>>()?;
            let label = format!("{}_n{n}", cfg.family.label());
            if wants(Metric::Fidelity) {
                let reference = identity_chi(1 << n);
                let values = chis
                    .iter()
                    .map(|chi| fidelity(&reference, chi))
                    .collect::<qnoise_core::Result<Vec<_>>>()?;
                curves.push(SweepResult::new(grid.clone(), values, "fidelity", &label, "none")?);
            }
            if wants(Metric::Negativity) {
                let qubits = DimensionProfile::qubits(n);
                let split = SplitSpec::AncillaVsPhysical;
                let values = chis
                    .iter()
                    .map(|chi| chi_negativity(chi, &qubits, &split))
                    .collect::<qnoise_core::Result<Vec<_>>>()?;
                curves.push(SweepResult::new(grid.clone(), values, "negativity", &label, split.label())?);
            }
        }
    }
    ctx.write("sweep.csv", &sweeps_to_csv(&curves))?;
    let summary: Vec<_> = curves
        .iter()
        .map(|c| {
            json!({
                "gate": c.gate,
                "metric": c.metric,
                "split": c.split,
                "zero_crossing": if c.metric == "negativity" { c.zero_crossing() } else { None },
            })
        })
        .collect();
    ctx.write_json(
        "summary.json",
        &json!({ "family": cfg.family.label(), "parameter": cfg.family.parameter(), "curves": summary }),
    )?;
    for metric in ["fidelity", "negativity"] {
        let selected: Vec<SweepResult> = curves.iter().filter(|c| c.metric == metric).cloned().collect();
        if !selected.is_empty() {
            ctx.write_plot(
                &format!("sweep_{metric}.svg"),
                &format!("{} noise", cfg.family.label()),
                cfg.family.parameter(),
                metric,
                &curve_series(&selected),
            )?;
        }
    }
    Ok(())
}

pub fn ecc(cfg: EccConfig, ctx: &Context) -> Result<()> {
    let grid = cfg.grid.points()?;
    let ideal = chi_ideal();
    let rows = grid
        .par_iter()
        .map(|&p| {
            let (analytic, simulated) = phase_flip_code(p)?;
            Ok([
                p,
                fidelity(&ideal, &chi_noise(p)?)?,
                fidelity(&ideal, &analytic)?,
                fidelity(&ideal, &simulated)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("p,F_noise,F_code,F_code_simulated\n");
    for row in &rows {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    ctx.write("ecc.csv", &csv)?;
    let column = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    ctx.write_plot(
        "ecc.svg",
        "phase-flip code",
        "p",
        "fidelity",
        &[
            Series {
                label: "without code".into(),
                x: grid.clone(),
                y: column(1),
            },
            Series {
                label: "with code".into(),
                x: grid.clone(),
                y: column(2),
            },
        ],
    )
}

/// Per-carrier relaxation for a simulation; no noise means infinite times.
fn relaxation_params(noise: Option<&NoiseSpec>, carriers: usize) -> Result<Vec<RelaxationParams>> {
    match noise {
        None => Ok(vec![RelaxationParams::new(f64::INFINITY, f64::INFINITY)?; carriers]),
        Some(spec @ NoiseSpec::Relaxation { .. }) => Ok(spec.relaxation(carriers)?),
        Some(_) => Err(CliError::Config(
            "simulations take relaxation noise (gate-sim also accepts depolarizing)".into(),
        )),
    }
}

fn build_gate(cfg: &GateSimConfig) -> Result<GateSpec> {
    match (cfg.gate, &cfg.hamiltonian, &cfg.sys_dims) {
        (GateName::Custom, Some(h), Some(dims)) => Ok(GateSpec::custom(
            DimensionProfile::new(dims.clone())?,
            h.clone(),
            cfg.t_oper,
        )?),
        (GateName::Custom, _, _) => Err(CliError::Config(
            "custom gates need hamiltonian and sys_dims".into(),
        )),
        (name, None, None) => Ok(gate_library(name, cfg.t_oper)?),
        _ => Err(CliError::Config(
            "hamiltonian and sys_dims are only allowed for custom gates".into(),
        )),
    }
}

/// The depolarized gate as a single-sample run at `t_oper`.
fn depolarized_run(gate: &GateSpec, p: f64) -> Result<SimulationRun> {
    let u = gate.target_unitary();
    let (_, chi) = depolarizing_channel(u, p)?;
    let tilde = pure_noise_channel(&chi_to_evolution(&chi), u)?;
    Ok(SimulationRun {
        gate: gate.clone(),
        noise: Vec::new(),
        dt: 0.0,
        grid: vec![gate.t_oper()],
        steps: vec![0],
        chi_trajectory: vec![chi.normalized()],
        chi_tilde_trajectory: vec![Some(tilde.normalized())],
    })
}

fn run_metrics(run: &SimulationRun) -> Result<Vec<SweepResult>> {
    let gate = &run.gate;
    let values = run
        .grid
        .iter()
        .zip(&run.chi_trajectory)
        .map(|(&t, chi)| fidelity(&ideal_chi(gate, t)?, chi))
        .collect::<qnoise_core::Result<Vec<_>>>()?;
    let mut curves = vec![SweepResult::new(
        run.grid.clone(),
        values,
        "fidelity_chi",
        gate.name().as_str(),
        "none",
    )?];
    let has_tilde = run.chi_tilde_trajectory.iter().any(Option::is_some);
    if has_tilde {
        let identity = identity_chi(gate.logical_dim());
        curves.push(fidelity_trajectory(run, &identity, ChiSource::ChiTilde)?);
    }
    let mut splits = vec![SplitSpec::AncillaVsPhysical];
    if gate.logical_dims().len() >= 2 {
        splits.push(SplitSpec::ChannelVsChannel);
    }
    for source in [ChiSource::Chi, ChiSource::ChiTilde] {
        if source == ChiSource::ChiTilde && !has_tilde {
            continue;
        }
        for split in &splits {
            curves.push(entanglement_dynamics(run, split, source)?);
        }
    }
    Ok(curves)
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    chi: Channel,
    chi_tilde: Option<Channel>,
}

pub fn gate_sim(cfg: GateSimConfig, ctx: &Context) -> Result<()> {
    let gate = build_gate(&cfg)?;
    let (run, dt) = match &cfg.noise {
        Some(NoiseSpec::Depolarizing { p }) => {
            if cfg.sample_times.is_some() || cfg.dt.is_some() || ctx.dt.is_some() {
                return Err(CliError::Config(
                    "depolarizing noise is applied to the finished gate; sample_times and dt do not apply".into(),
                ));
            }
            (depolarized_run(&gate, *p)?, None)
        }
        noise => {
            let params = relaxation_params(noise.as_ref(), gate.carriers())?;
            let dt = ctx.dt(cfg.dt, cfg.t_oper);
            let times = match &cfg.sample_times {
                Some(grid) => grid.points()?,
                None => vec![gate.t_oper()],
            };
            (simulate(&gate, &params, dt, &times)?, Some(dt))
        }
    };
    let curves = run_metrics(&run)?;

    let samples: Vec<Sample> = run
        .grid
        .iter()
        .zip(&run.chi_trajectory)
        .zip(&run.chi_tilde_trajectory)
        .map(|((&t, chi), tilde)| Sample {
            t,
            chi: Channel::Chi(chi.clone()),
            chi_tilde: tilde.clone().map(Channel::Chi),
        })
        .collect();
    ctx.write_json("chi.json", &samples)?;
    ctx.write("metrics.csv", &sweeps_to_csv(&curves))?;

    let last = |metric: &str| {
        curves
            .iter()
            .find(|c| c.metric == metric)
            .and_then(|c| c.values.last().copied())
    };
    ctx.write_json(
        "summary.json",
        &json!({
            "gate": gate.name().as_str(),
            "t_oper": gate.t_oper(),
            "dt": dt,
            "noise": cfg.noise,
            "samples": run.grid.len(),
            "final_time": run.grid.last(),
            "fidelity": last("fidelity_chi"),
            "fidelity_pure_noise": last("fidelity_chi_tilde"),
        }),
    )?;
    ctx.write_plot(
        "metrics.svg",
        gate.name().as_str(),
        "t",
        "value",
        &curve_series(&curves),
    )
}

pub fn negativity(cfg: NegativityConfig, ctx: &Context) -> Result<()> {
    cfg.validate()?;
    let times = cfg.sample_times.points()?;
    let dt = ctx.dt(cfg.dt, cfg.t_oper);
    plan_steps(cfg.t_oper, dt, &times)?;
    let runs = cfg
        .runs
        .iter()
        .map(|r| {
            let gate = gate_library(r.gate, cfg.t_oper)?;
            let params = relaxation_params(r.noise.as_ref(), gate.carriers())?;
            let label = r.label.clone().unwrap_or_else(|| r.gate.as_str().to_string());
            Ok((label, gate, params))
        })
        .collect::<Result<Vec<_>>>()?;
    let curves = runs
        .par_iter()
        .map(|(label, gate, params)| {
            let run = simulate(gate, params, dt, &times)?;
            let mut curves = Vec::new();
            for &source in &cfg.sources {
                for split in &cfg.splits {
                    let mut curve = entanglement_dynamics(&run, split, source)?;
                    curve.gate = label.clone();
                    curves.push(curve);
                }
            }
            Ok(curves)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    ctx.write("negativity.csv", &sweeps_to_csv(&curves))?;
    ctx.write_plot(
        "negativity.svg",
        "entanglement dynamics",
        "t",
        "negativity",
        &curve_series(&curves),
    )
}
