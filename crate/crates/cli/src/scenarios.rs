//! One function per scenario. Each returns its output files, the resolved
//! parameters, and, in check mode, its acceptance assertions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use els_core::continuum::{
    extract_coupling_l0, extract_couplings_l1, grid_phase_sweep, l1_bond_grid, two_well_grid, two_well_sites,
    two_well_splitting, GridConfig, GridPreset,
};
use els_core::darkstates::{fmt12, projection_residual};
use els_core::dynamics::{defect_state, rabi_loading, switching_sequence, PulseEvent};
use els_core::synthetic::layer_graph;
use els_core::{
    build_h0, build_h1, build_ribbon, build_tilted_square, dark_edge_subspace, els_l0, enumerate_els_l0,
    trial_state_l0, trial_state_l1, CouplingSet, ElsL0, Error, EvolutionPlan, Execution, Lattice, Manifold, Propagator,
    RibbonSpec, StateVector,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, phase_grid, ExperimentConfig, Scenario};

/// Survival floor of the defect state recorded for n = 100, T = 1000.
const DEFECT_FLOOR: f64 = 0.95;

pub enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidLattice(_)
            | Error::InvalidCoupling(_)
            | Error::Unsupported(_)
            | Error::SiteOutOfRange { .. }
            | Error::OutOfRange(_)
            | Error::InvalidTimes(_)
            | Error::InvalidGrid(_) => Failure::Config(e.into()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow::anyhow!(msg.into()))
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    /// `"<="`, `"<"`, `">="`, `"=="`.
    pub relation: &'static str,
    pub pass: bool,
}

impl Assertion {
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, "<=", measured <= threshold)
    }

    fn below(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, "<", measured < threshold)
    }

    fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, ">=", measured >= threshold)
    }

    fn equals(name: &str, measured: f64, expected: f64) -> Self {
        Self::new(name, measured, expected, "==", measured == expected)
    }

    fn new(name: &str, measured: f64, threshold: f64, relation: &'static str, pass: bool) -> Self {
        Assertion { name: name.into(), measured, threshold, relation, pass }
    }
}

pub struct Run {
    pub resolved: Value,
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, String)>,
    pub checks: Vec<Assertion>,
}

pub struct Context {
    pub preset: GridPreset,
    pub check: bool,
}

fn params<T: for<'de> serde::Deserialize<'de>>(cfg: &ExperimentConfig) -> Outcome<T> {
    cfg.params().map_err(Failure::Config)
}

pub fn run(cfg: &ExperimentConfig, ctx: &Context) -> Outcome<Run> {
    if ctx.check && !cfg.scenario.supports_check() {
        return Err(config_error("this scenario has no acceptance checks"));
    }
    match cfg.scenario {
        Scenario::PhaseSweepL0 => phase_sweep_l0(params(cfg)?, ctx),
        Scenario::PhaseSweepL1 => phase_sweep_l1(params(cfg)?, ctx),
        Scenario::DefectRobustness => defect_robustness(params(cfg)?, ctx),
        Scenario::RabiLoading => rabi(params(cfg)?, ctx),
        Scenario::ElsSwitching => switching(params(cfg)?, ctx),
        Scenario::ContinuumValidate => continuum_validate(params(cfg)?, ctx),
        Scenario::ExtractCouplings => extract(params(cfg)?, ctx),
        Scenario::DarkSubspace => {
            let empty = cfg.parameters.as_object().is_some_and(|m| m.is_empty());
            let p = if empty { config::DarkSubspace::Ribbon { n: (1..=10).collect() } } else { params(cfg)? };
            dark_subspace(p, ctx)
        }
        Scenario::SyntheticExport => synthetic(params(cfg)?, ctx),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn ribbon(n: usize, d: f64) -> Outcome<Lattice> {
    Ok(build_ribbon(RibbonSpec::new(n, d))?)
}

fn plan(t_final: f64, samples: usize) -> Outcome<EvolutionPlan> {
    Ok(EvolutionPlan::new(t_final, samples)?)
}

fn coupling_l0(d: f64, j: Option<f64>, preset: GridPreset) -> Outcome<f64> {
    match j {
        Some(j) if j > 0.0 && j.is_finite() => Ok(j),
        Some(j) => Err(config_error(format!("j must be positive, got {j}"))),
        None => Ok(extract_coupling_l0(d, &two_well_grid(d, preset)?)?),
    }
}

fn couplings_l1(d: f64, phi0: f64, js: [Option<f64>; 3], preset: GridPreset) -> Outcome<CouplingSet> {
    match js {
        [Some(j1), Some(j2), Some(j3)] => {
            let c = CouplingSet { phi0, ..CouplingSet::l1(j1, j2, j3) };
            c.validate()?;
            Ok(c)
        }
        [None, None, None] => Ok(extract_couplings_l1(d, phi0, &l1_bond_grid(d, preset)?)?.couplings),
        _ => Err(config_error("give all of j1, j2, j3 or none of them")),
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt12).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn window_max(phis: &[f64], values: &[f64], half_width: f64) -> f64 {
    phis.iter()
        .zip(values)
        .filter(|(phi, _)| (**phi - PI).abs() <= half_width + 1e-12)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max)
}

fn phase_sweep_l0(p: config::PhaseSweepL0, ctx: &Context) -> Outcome<Run> {
    let lat = ribbon(p.n, p.d)?;
    let j = coupling_l0(p.d, p.j, ctx.preset)?;
    let plan = plan(p.t_final, p.samples)?;
    let phis = phase_grid(p.phi_points).map_err(Failure::Config)?;
    let prop = Propagator::new(&build_h0(&lat, j)?)?;
    let rho = |phi: f64| -> els_core::Result<f64> { prop.avg_central_population(&lat, &trial_state_l0(p.n, phi)?, &plan) };
    let values = Execution::default().map(&phis, |&phi| rho(phi)).into_iter().collect::<els_core::Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    if ctx.check {
        let window: Vec<f64> = (0..=40).map(|k| PI + (k as f64 / 20.0 - 1.0) * 0.2 * PI).collect();
        let w = Execution::default().map(&window, |&phi| rho(phi)).into_iter().collect::<els_core::Result<Vec<_>>>()?;
        checks.push(Assertion::at_most("rho_bar(pi)", rho(PI)?, 1e-8));
        checks.push(Assertion::below("max rho_bar, |phi - pi| <= 0.2 pi", window_max(&window, &w, 0.2 * PI), 0.05));
    }
    Ok(Run {
        resolved: json!({ "n": p.n, "d": p.d, "j": j, "phi_points": p.phi_points, "t_final": p.t_final, "samples": p.samples }),
        files: vec![("rho_bar.csv".into(), csv("phi,rho_bar", phis.iter().zip(&values).map(|(a, b)| vec![*a, *b])))],
        checks,
    })
}

fn phase_sweep_l1(p: config::PhaseSweepL1, ctx: &Context) -> Outcome<Run> {
    let lat = ribbon(p.n, p.d)?;
    let c = couplings_l1(p.d, p.phi0, [p.j1, p.j2, p.j3], ctx.preset)?;
    let plan = plan(p.t_final, p.samples)?;
    let phis = phase_grid(p.phi_points).map_err(Failure::Config)?;
    let prop = Propagator::new(&build_h1(&lat, &c)?)?;
    let sweep = |prop: &Propagator, phis: &[f64]| -> els_core::Result<Vec<f64>> {
        Execution::default()
            .map(phis, |&phi| prop.avg_central_population(&lat, &trial_state_l1(p.n, phi)?, &plan))
            .into_iter()
            .collect()
    };
    let values = sweep(&prop, &phis)?;
    let mut checks = Vec::new();
    if ctx.check {
        let bare = Propagator::new(&build_h1(&lat, &CouplingSet { j1: 0.0, ..c })?)?;
        checks.push(Assertion::at_most("rho_bar(pi), J1 = 0", sweep(&bare, &[PI])?[0], 1e-8));
        let window: Vec<f64> = (0..=40).map(|k| PI + (k as f64 / 20.0 - 1.0) * 0.25 * PI).collect();
        let w = sweep(&prop, &window)?;
        checks.push(Assertion::below("max rho_bar, |phi - pi| <= 0.25 pi", window_max(&window, &w, 0.25 * PI), 0.05));
    }
    Ok(Run {
        resolved: json!({
            "n": p.n, "d": p.d, "phi0": c.phi0, "j1": c.j1, "j2": c.j2, "j3": c.j3,
            "phi_points": p.phi_points, "t_final": p.t_final, "samples": p.samples,
        }),
        files: vec![("rho_bar.csv".into(), csv("phi,rho_bar", phis.iter().zip(&values).map(|(a, b)| vec![*a, *b])))],
        checks,
    })
}

fn defect_robustness(p: config::DefectRobustness, ctx: &Context) -> Outcome<Run> {
    let lat = ribbon(p.n, p.d)?;
    let j = coupling_l0(p.d, p.j, ctx.preset)?;
    let h = build_h0(&lat, j)?;
    let prop = Propagator::new(&h)?;
    let times = plan(p.t_final, p.samples)?.times();
    let d0 = els_l0(p.n, ElsL0::Binary(0))?;
    let states = [StateVector::basis_state(h.basis(), 1, None)?, d0.clone(), defect_state(&d0, p.defect_site)?];
    let series = Execution::default()
        .map(&states, |s| prop.survival(s, &times))
        .into_iter()
        .collect::<els_core::Result<Vec<_>>>()?;
    let min = |v: &[f64]| v.iter().copied().fold(1.0, f64::min);
    let mut checks = Vec::new();
    if ctx.check {
        checks.push(Assertion::at_least("min survival |D0>", min(&series[1]), 1.0 - 1e-10));
        checks.push(Assertion::at_least("min survival defect state", min(&series[2]), DEFECT_FLOOR));
        checks.push(Assertion::below("min survival |1>", min(&series[0]), 0.5));
    }
    let rows = (0..times.len()).map(|k| vec![times[k], series[0][k], series[1][k], series[2][k]]);
    Ok(Run {
        resolved: json!({ "n": p.n, "d": p.d, "j": j, "defect_site": p.defect_site, "t_final": p.t_final, "samples": p.samples }),
        files: vec![("survival.csv".into(), csv("t,single_site,d0,d0_defect", rows))],
        checks,
    })
}

fn rabi(p: config::RabiLoading, ctx: &Context) -> Outcome<Run> {
    if !(p.horizon > 1.0) {
        return Err(config_error("horizon must exceed one transfer time"));
    }
    let lat = ribbon(1, p.d)?;
    let j = coupling_l0(p.d, p.j, ctx.preset)?;
    let h = build_h0(&lat, j)?;
    let expected = PI / (4.0 * j);
    let load = rabi_loading(&h, &lat, &plan(p.horizon * expected, p.samples)?)?;
    let mut files = vec![(
        "populations.csv".into(),
        csv("t,central,outer", (0..load.times.len()).map(|k| vec![load.times[k], load.central[k], load.outer[k]])),
    )];
    if let Some(psi) = &load.loaded {
        files.push(("loaded_state.csv".into(), psi.to_csv()));
    }
    let mut checks = Vec::new();
    if ctx.check {
        match (&load.t_star, &load.loaded) {
            (Some(t), Some(psi)) => {
                checks.push(Assertion::below("|t* - pi/4J| / (pi/4J)", (t - expected).abs() / expected, 0.01));
                checks.push(Assertion::below("central population at t*", psi.site_population(3), 1e-6));
                let outer: Vec<_> = lat.boundary_sites().map(|s| psi.amplitudes()[s - 1]).collect();
                let spread = outer.iter().map(|a| (a - outer[0]).norm()).fold(0.0, f64::max);
                checks.push(Assertion::at_most("outer amplitude spread", spread, 1e-8));
            }
            _ => checks.push(Assertion::equals("complete transfer found", 0.0, 1.0)),
        }
    }
    Ok(Run {
        resolved: json!({ "d": p.d, "j": j, "horizon": p.horizon, "samples": p.samples, "t_star": load.t_star }),
        files,
        checks,
    })
}

fn switching(p: config::ElsSwitching, ctx: &Context) -> Outcome<Run> {
    let lat = ribbon(p.n, p.d)?;
    let j = coupling_l0(p.d, p.j, ctx.preset)?;
    let h = build_h0(&lat, j)?;
    if p.n >= 64 || p.initial > 1 << p.n {
        return Err(config_error(format!("initial must lie in 0..=2^n, got {}", p.initial)));
    }
    let start = if p.initial == 1 << p.n { els_l0(p.n, ElsL0::Alternating)? } else { els_l0(p.n, ElsL0::Binary(p.initial))? };
    let pulses: Vec<PulseEvent> =
        p.pulses.iter().map(|q| PulseEvent { sites: q.sites.iter().copied().collect(), phase: q.phase, time: q.time }).collect();
    let traj = switching_sequence(&start, &h, &lat, &pulses, &plan(p.t_final, p.samples)?)?;
    let family = if p.n <= 16 { enumerate_els_l0(p.n)? } else { Vec::new() };
    let mut segments = String::from("t,closest_member,overlap\n");
    let mut worst: f64 = 1.0;
    for (t, psi) in &traj.boundaries {
        let (k, o) = family.iter().map(|f| f.overlap(psi)).enumerate().fold((0, 0.0), |b, (k, o)| if o > b.1 { (k, o) } else { b });
        worst = worst.min(o);
        let _ = writeln!(segments, "{},{k},{}", fmt12(*t), fmt12(o));
    }
    let mut checks = Vec::new();
    if ctx.check {
        if family.is_empty() {
            return Err(config_error("checks enumerate the family and need n <= 16"));
        }
        checks.push(Assertion::at_least("min overlap with the family", worst, 1.0 - 1e-10));
        let central = traj.central_population.iter().copied().fold(0.0, f64::max);
        checks.push(Assertion::at_most("max central population", central, 1e-10));
    }
    let rows = traj.times.iter().zip(&traj.central_population).map(|(a, b)| vec![*a, *b]);
    Ok(Run {
        resolved: json!({
            "n": p.n, "d": p.d, "j": j, "initial": p.initial, "pulses": to_value(&p.pulses),
            "t_final": p.t_final, "samples": p.samples,
        }),
        files: vec![("central.csv".into(), csv("t,central", rows)), ("segments.csv".into(), segments)],
        checks,
    })
}

fn continuum_validate(p: config::ContinuumValidate, ctx: &Context) -> Outcome<Run> {
    let lat = ribbon(p.n, p.d)?;
    let j = coupling_l0(p.d, p.j, ctx.preset)?;
    let positions: Vec<[f64; 2]> = lat.sites().iter().map(|s| s.position).collect();
    let grid = GridConfig::enclosing(&positions, p.margin, ctx.preset)?;
    let plan = plan(p.t_final, p.samples)?;
    let phis = phase_grid(p.phi_points).map_err(Failure::Config)?;
    let sweep = grid_phase_sweep(&lat, Manifold::L0, 0.0, &phis, &plan, &grid)?;
    let prop = Propagator::new(&build_h0(&lat, j)?)?;
    let model = phis
        .iter()
        .map(|&phi| prop.avg_central_population(&lat, &trial_state_l0(p.n, phi)?, &plan))
        .collect::<els_core::Result<Vec<_>>>()?;
    let tolerance = p.tolerance.unwrap_or(if ctx.preset == GridPreset::Paper { 0.02 } else { 0.04 });
    let mut checks = Vec::new();
    if ctx.check {
        let diff = sweep.rho_bar.iter().zip(&model).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Assertion::at_most("max |rho_grid - rho_model|", diff, tolerance));
        match phis.iter().position(|phi| (phi - PI).abs() < 1e-12) {
            Some(k) => checks.push(Assertion::at_most("grid rho_bar(pi)", sweep.rho_bar[k], 0.01)),
            None => return Err(config_error("checks need an odd phi_points so that pi is sampled")),
        }
    }
    let rows = (0..phis.len()).map(|k| vec![phis[k], sweep.rho_bar[k], model[k]]);
    Ok(Run {
        resolved: json!({
            "n": p.n, "d": p.d, "j": j, "phi_points": p.phi_points, "margin": p.margin, "tolerance": tolerance,
            "t_final": p.t_final, "samples": p.samples, "grid": to_value(&grid),
        }),
        files: vec![("rho_bar.csv".into(), csv("phi,rho_grid,rho_model", rows))],
        checks,
    })
}

fn extract(p: config::ExtractCouplings, ctx: &Context) -> Outcome<Run> {
    let mut checks = Vec::new();
    let (grid, result) = match p.l {
        0 => {
            let grid = two_well_grid(p.d, ctx.preset)?;
            let s = two_well_splitting(&two_well_sites(p.d, 0.0), &grid)?;
            if ctx.check {
                checks.push(Assertion::new("J > 0", s.coupling, 0.0, ">", s.coupling > 0.0));
            }
            (grid, to_value(&s))
        }
        1 => {
            let grid = l1_bond_grid(p.d, ctx.preset)?;
            let x = extract_couplings_l1(p.d, p.phi0, &grid)?;
            if ctx.check {
                let c = x.couplings;
                checks.push(Assertion::below("|J1| / |J2|", c.j1 / c.j2, 0.1));
                checks.push(Assertion::at_least("|J3| / |J2|", c.j3 / c.j2, 0.8));
                checks.push(Assertion::at_most("|J3| / |J2|", c.j3 / c.j2, 1.25));
                let vertical = (x.phased_bond.relative_phase.abs() - PI).abs();
                checks.push(Assertion::below("vertical phase offset from pi", vertical, 0.05));
                checks.push(Assertion::below("horizontal phase offset", x.real_bond.relative_phase.abs(), 0.05));
            }
            (grid, to_value(&x))
        }
        l => return Err(config_error(format!("l must be 0 or 1, got {l}"))),
    };
    Ok(Run {
        resolved: json!({ "l": p.l, "d": p.d, "phi0": p.phi0, "grid": to_value(&grid) }),
        files: vec![("couplings.json".into(), crate::output::json_text(&result))],
        checks,
    })
}

fn dark_subspace(p: config::DarkSubspace, ctx: &Context) -> Outcome<Run> {
    let mut checks = Vec::new();
    match p {
        config::DarkSubspace::Ribbon { n } => {
            if n.is_empty() {
                return Err(config_error("n must list at least one ribbon size"));
            }
            let mut rows = Vec::new();
            for &n in &n {
                let lat = ribbon(n, 5.0)?;
                let h = build_h0(&lat, 1.0)?;
                let dark = dark_edge_subspace(&h, &lat)?;
                let residual = dark.iter().map(|s| (h.matrix() * s.amplitudes()).norm()).fold(0.0, f64::max);
                let family = if n <= 16 { enumerate_els_l0(n)? } else { vec![els_l0(n, ElsL0::Binary(0))?] };
                let outside = family.iter().map(|s| projection_residual(s, &dark)).fold(0.0, f64::max);
                if ctx.check {
                    checks.push(Assertion::equals(&format!("n = {n}: dimension"), dark.len() as f64, (n + 2) as f64));
                    checks.push(Assertion::at_most(&format!("n = {n}: family outside span"), outside, 1e-10));
                }
                rows.push(vec![n as f64, dark.len() as f64, residual, outside]);
            }
            Ok(Run {
                resolved: json!({ "geometry": "ribbon", "n": n, "j": 1.0 }),
                files: vec![("dimensions.csv".into(), csv("n,dimension,max_residual,family_residual", rows))],
                checks,
            })
        }
        config::DarkSubspace::TiltedSquare { rows, cols } => {
            let lat = build_tilted_square(rows, cols, 5.0)?;
            let h = build_h0(&lat, 1.0)?;
            let dark = dark_edge_subspace(&h, &lat)?;
            let mut files = Vec::new();
            for (k, s) in dark.iter().enumerate() {
                files.push((format!("state_{k:03}.csv"), s.to_csv()));
            }
            if ctx.check {
                let residual = dark.iter().map(|s| (h.matrix() * s.amplitudes()).norm()).fold(0.0, f64::max);
                let interior = dark.iter().map(|s| s.max_amplitude_on(lat.central_sites())).fold(0.0, f64::max);
                checks.push(Assertion::at_least("dimension", dark.len() as f64, 1.0));
                checks.push(Assertion::equals("max interior amplitude", interior, 0.0));
                checks.push(Assertion::at_most("max |H psi|", residual, 1e-10));
            }
            Ok(Run {
                resolved: json!({ "geometry": "tilted-square", "rows": rows, "cols": cols, "j": 1.0, "dimension": dark.len() }),
                files,
                checks,
            })
        }
    }
}

fn synthetic(p: config::SyntheticExport, ctx: &Context) -> Outcome<Run> {
    let lat = ribbon(p.n, p.d)?;
    let c = couplings_l1(p.d, p.phi0, [p.j1, p.j2, p.j3], ctx.preset)?;
    let graph = layer_graph(&build_h1(&lat, &c)?)?;
    Ok(Run {
        resolved: json!({ "n": p.n, "d": p.d, "phi0": c.phi0, "j1": c.j1, "j2": c.j2, "j3": c.j3 }),
        files: vec![("graph.json".into(), crate::output::json_text(&graph.to_json()))],
        checks: Vec::new(),
    })
}
