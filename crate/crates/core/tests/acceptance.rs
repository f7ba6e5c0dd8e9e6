//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! `ELS_ACCEPTANCE_PRESET=paper` runs the continuum agreement check on the
//! 512² grid with the tight tolerance (roughly an hour on one core).

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use els_core::continuum::{
    angular_momentum, extract_coupling_l0, extract_couplings_l1, grid_phase_sweep, l1_bond_grid, local_state_at,
    potential_from_sites, two_well_grid, two_well_sites, GridConfig, GridHamiltonian, GridPreset, LocalOrbital, SplitStep,
};
use els_core::dynamics::{defect_state, rabi_loading, switching_sequence, EvolutionPlan, Propagator, PulseEvent};
use els_core::{
    build_h0, build_h1, build_ribbon, build_tilted_square, dark_edge_subspace, els_l0, els_l1, enumerate_els_l0,
    trial_state_l0, trial_state_l1, CouplingSet, ElsL0, Manifold, RibbonSpec, StateVector, Winding,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Golden values recorded at first derivation.
mod golden {
    /// J at d = 5σ on the fast two-well grid.
    pub const J_D5: f64 = 2.7517e-3;
    /// Minimum survival of the defect state over T = 1000 for n = 100.
    pub const DEFECT_FLOOR: f64 = 0.994375;
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn ribbon(n: usize, d: f64) -> els_core::Lattice {
    build_ribbon(RibbonSpec::new(n, d)).expect("valid ribbon")
}

fn j_d5() -> f64 {
    extract_coupling_l0(5.0, &two_well_grid(5.0, GridPreset::Fast).unwrap()).unwrap()
}

fn l1_couplings() -> CouplingSet {
    extract_couplings_l1(6.0, -FRAC_PI_4, &l1_bond_grid(6.0, GridPreset::Fast).unwrap()).unwrap().couplings
}

/// Rank of real row vectors by Gaussian elimination with partial pivoting.
fn rank_oracle(mut rows: Vec<Vec<f64>>, tol: f64) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else { break };
        if rows[p][c].abs() <= tol {
            continue;
        }
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank {
                let f = rows[r][c] / rows[rank][c];
                for k in c..cols {
                    rows[r][k] -= f * rows[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `exp(-iHt)` by scaled Taylor series and repeated squaring.
fn expm_oracle(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    let n = h.nrows();
    let norm: f64 = h.iter().map(|z| z.norm()).sum::<f64>() * t;
    let squarings = norm.max(1.0).log2().ceil() as i32 + 6;
    let a = h * Complex64::new(0.0, -t / 2f64.powi(squarings));
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..25 {
        term = &term * &a / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Classical RK4 on `i dψ/dt = Hψ`.
fn rk4_oracle(h: &DMatrix<Complex64>, psi: &DVector<Complex64>, t: f64, steps: usize) -> DVector<Complex64> {
    let dt = t / steps as f64;
    let f = |v: &DVector<Complex64>| (h * v) * Complex64::new(0.0, -1.0);
    let mut v = psi.clone();
    for _ in 0..steps {
        let k1 = f(&v);
        let k2 = f(&(&v + &k1 * Complex64::new(dt / 2.0, 0.0)));
        let k3 = f(&(&v + &k2 * Complex64::new(dt / 2.0, 0.0)));
        let k4 = f(&(&v + &k3 * Complex64::new(dt, 0.0)));
        v += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
    }
    v
}

fn c1_dark_state_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut central_nonzero = 0;
    for n in 1..=10 {
        let lat = ribbon(n, 5.0);
        let h = build_h0(&lat, 1.0).unwrap();
        for s in enumerate_els_l0(n).unwrap() {
            worst = worst.max((h.matrix() * s.amplitudes()).norm());
            central_nonzero += lat.central_sites().filter(|&c| s.site_population(c) != 0.0).count();
        }
    }
    outcome(worst <= 1e-12 && central_nonzero == 0, format!("max |H0 psi| = {worst:.2e} (<= 1e-12 J), nonzero central amplitudes: {central_nonzero}"))
}

fn c2_counting() -> Outcome {
    let mut ok = true;
    let mut summary = Vec::new();
    for n in 1..=10 {
        let family = enumerate_els_l0(n).unwrap();
        let rows: Vec<Vec<f64>> = family.iter().map(|s| s.amplitudes().iter().map(|z| z.re).collect()).collect();
        let rank = rank_oracle(rows, 1e-9);
        ok &= family.len() == (1 << n) + 1 && rank == n + 2;
        if n == 1 || n == 10 {
            summary.push(format!("n={n}: {} states, span {rank}", family.len()));
        }
    }
    outcome(ok, format!("{} (expect 2^n+1 states, span n+2, n <= 10)", summary.join("; ")))
}

fn rho_bar_l0(prop: &Propagator, lat: &els_core::Lattice, phi: f64, plan: &EvolutionPlan) -> f64 {
    prop.avg_central_population(lat, &trial_state_l0(2, phi).unwrap(), plan).unwrap()
}

fn c3_resonance_l0(j: f64) -> Outcome {
    let lat = ribbon(2, 5.0);
    let prop = Propagator::new(&build_h0(&lat, j).unwrap()).unwrap();
    let plan = EvolutionPlan::new(1000.0, 2001).unwrap();
    let at_pi = rho_bar_l0(&prop, &lat, PI, &plan);
    let window: Vec<f64> = (0..=40).map(|k| rho_bar_l0(&prop, &lat, PI + (k as f64 / 20.0 - 1.0) * 0.2 * PI, &plan)).collect();
    let max = window.iter().copied().fold(0.0, f64::max);
    outcome(at_pi <= 1e-8 && max < 0.05, format!("J = {j:.5e}; rho(pi) = {at_pi:.2e} (<= 1e-8), max over |phi-pi| <= 0.2pi = {max:.4} (< 0.05)"))
}

fn c4_resonance_l1(c: &CouplingSet) -> Outcome {
    let lat = ribbon(2, 6.0);
    let plan = EvolutionPlan::new(1000.0, 2001).unwrap();
    let no_corner = CouplingSet { j1: 0.0, ..*c };
    let p0 = Propagator::new(&build_h1(&lat, &no_corner).unwrap()).unwrap();
    let at_pi = p0.avg_central_population(&lat, &trial_state_l1(2, PI).unwrap(), &plan).unwrap();
    let p = Propagator::new(&build_h1(&lat, c).unwrap()).unwrap();
    let max = (0..=40)
        .map(|k| {
            let phi = PI + (k as f64 / 20.0 - 1.0) * 0.25 * PI;
            p.avg_central_population(&lat, &trial_state_l1(2, phi).unwrap(), &plan).unwrap()
        })
        .fold(0.0, f64::max);
    outcome(
        at_pi <= 1e-8 && max < 0.05,
        format!("rho(pi; J1=0) = {at_pi:.2e} (<= 1e-8), max over |phi-pi| <= 0.25pi = {max:.4} (< 0.05)"),
    )
}

fn c5_defect_robustness(j: f64) -> Outcome {
    let n = 100;
    let lat = ribbon(n, 5.0);
    let h = build_h0(&lat, j).unwrap();
    let prop = Propagator::new(&h).unwrap();
    let times = EvolutionPlan::new(1000.0, 2001).unwrap().times();
    let d0 = els_l0(n, ElsL0::Binary(0)).unwrap();
    let tilde = defect_state(&d0, 1).unwrap();
    let single = StateVector::basis_state(h.basis(), 1, None).unwrap();
    let s_d0 = prop.survival(&d0, &times).unwrap();
    let s_tilde = prop.survival(&tilde, &times).unwrap();
    let s_one = prop.survival(&single, &times).unwrap();
    let min_d0 = s_d0.iter().copied().fold(1.0, f64::min);
    let floor = s_tilde.iter().copied().fold(1.0, f64::min);
    let min_one = s_one.iter().copied().fold(1.0, f64::min);
    // independent propagation of the defect state
    let mut oracle_gap: f64 = 0.0;
    for &k in &[500usize, 1000, 2000] {
        let v = rk4_oracle(h.matrix(), tilde.amplitudes(), times[k], 2000);
        let s = tilde.amplitudes().dotc(&v).norm_sqr();
        oracle_gap = oracle_gap.max((s - s_tilde[k]).abs());
    }
    let pass = min_d0 >= 1.0 - 1e-10 && floor >= golden::DEFECT_FLOOR - 1e-6 && floor >= 0.95 && min_one < 0.5 && oracle_gap < 1e-8;
    outcome(
        pass,
        format!(
            "min survival D0 = {:.3e} below 1, defect floor = {floor:.9} (golden {}), |1> min = {min_one:.3}, oracle gap {oracle_gap:.1e}",
            1.0 - min_d0,
            golden::DEFECT_FLOOR
        ),
    )
}

fn c6_switching(j: f64) -> Outcome {
    let n = 2;
    let lat = ribbon(n, 5.0);
    let h = build_h0(&lat, j).unwrap();
    let family = enumerate_els_l0(n).unwrap();
    let plan = EvolutionPlan::new(400.0, 81).unwrap();
    let best_overlap = |s: &StateVector| family.iter().map(|f| f.overlap(s)).fold(0.0, f64::max);
    let mut worst_overlap: f64 = 1.0;
    let mut worst_central: f64 = 0.0;
    let mut worst_restore: f64 = 1.0;
    let mut cases = 0;
    let mut check = |start: &StateVector, sites: BTreeSet<usize>| {
        let once = [PulseEvent { sites: sites.clone(), phase: PI, time: 100.0 }];
        let twice = [once[0].clone(), PulseEvent { sites, phase: PI, time: 250.0 }];
        let a = switching_sequence(start, &h, &lat, &once, &plan).unwrap();
        let b = switching_sequence(start, &h, &lat, &twice, &plan).unwrap();
        worst_overlap = worst_overlap.min(best_overlap(a.final_state()));
        let central = a.central_population.iter().chain(&b.central_population).copied().fold(0.0, f64::max);
        worst_central = worst_central.max(central);
        worst_restore = worst_restore.min(b.final_state().overlap(start));
        cases += 1;
    };
    let d0 = els_l0(n, ElsL0::Binary(0)).unwrap();
    for col in 0..=n {
        check(&d0, [3 * col + 1, 3 * col + 2].into());
    }
    // a full-row pulse maps π-in-column states onto equal-in-column ones,
    // so it connects the alternating member to the binary family
    let alternating = els_l0(n, ElsL0::Alternating).unwrap();
    for offset in [1, 2] {
        check(&alternating, (0..=n).map(|c| 3 * c + offset).collect());
    }
    let pass = worst_overlap >= 1.0 - 1e-10 && worst_central <= 1e-10 && worst_restore >= 1.0 - 1e-10;
    outcome(
        pass,
        format!(
            "{cases} pulses: min overlap with family = 1 - {:.1e}, max central = {worst_central:.1e}, double-pulse return = 1 - {:.1e}",
            1.0 - worst_overlap,
            1.0 - worst_restore
        ),
    )
}

fn c7_rabi_loading(j: f64) -> Outcome {
    let lat = ribbon(1, 5.0);
    let h = build_h0(&lat, j).unwrap();
    let expected = PI / (4.0 * j);
    let load = rabi_loading(&h, &lat, &EvolutionPlan::new(2.0 * expected, 2001).unwrap()).unwrap();
    let Some(t_star) = load.t_star else { return outcome(false, "no complete transfer found") };
    let psi = load.loaded.unwrap();
    let oracle = expm_oracle(h.matrix(), t_star) * StateVector::basis_state(h.basis(), 3, None).unwrap().amplitudes();
    let oracle_central = oracle[2].norm_sqr();
    let outer: Vec<Complex64> = [1, 2, 4, 5].iter().map(|&s| psi.amplitudes()[s - 1]).collect();
    let spread = outer.iter().map(|a| (a - outer[0]).norm()).fold(0.0, f64::max);
    let rel = (t_star - expected).abs() / expected;
    let central = psi.site_population(3);
    let pass = rel < 0.01 && central < 1e-6 && oracle_central < 1e-6 && spread < 1e-8;
    outcome(pass, format!("t* = {t_star:.4} vs pi/4J = {expected:.4} ({rel:.1e}); central {central:.1e} (oracle {oracle_central:.1e}); outer spread {spread:.1e}"))
}

fn c8_continuum_agreement(j: f64) -> Outcome {
    let preset = match std::env::var("ELS_ACCEPTANCE_PRESET").as_deref() {
        Ok("paper") => GridPreset::Paper,
        _ => GridPreset::Fast,
    };
    let tolerance = if preset == GridPreset::Paper { 0.02 } else { 0.04 };
    let j = if preset == GridPreset::Paper { extract_coupling_l0(5.0, &two_well_grid(5.0, preset).unwrap()).unwrap() } else { j };
    let lat = ribbon(2, 5.0);
    let pos: Vec<[f64; 2]> = lat.sites().iter().map(|s| s.position).collect();
    let config = GridConfig::enclosing(&pos, 6.0, preset).unwrap();
    let plan = EvolutionPlan::new(1000.0, 2001).unwrap();
    let phis: Vec<f64> = (0..9).map(|k| k as f64 * PI / 4.0).collect();
    let sweep = match grid_phase_sweep(&lat, Manifold::L0, 0.0, &phis, &plan, &config) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("grid propagation failed: {e}")),
    };
    let prop = Propagator::new(&build_h0(&lat, j).unwrap()).unwrap();
    let diff = phis
        .iter()
        .zip(&sweep.rho_bar)
        .map(|(phi, g)| (g - rho_bar_l0(&prop, &lat, *phi, &plan)).abs())
        .fold(0.0, f64::max);
    let at_pi = sweep.rho_bar[4];
    outcome(
        diff <= tolerance && at_pi <= 0.01,
        format!("{preset:?} grid: max |rho_grid - rho_model| = {diff:.2e} (<= {tolerance}), grid rho(pi) = {at_pi:.2e} (<= 0.01)"),
    )
}

fn c9_coupling_hierarchy() -> Outcome {
    let x = extract_couplings_l1(6.0, -FRAC_PI_4, &l1_bond_grid(6.0, GridPreset::Fast).unwrap()).unwrap();
    let c = x.couplings;
    let (r1, r3) = (c.j1 / c.j2, c.j3 / c.j2);
    let vertical = (x.phased_bond.relative_phase.abs() - PI).abs();
    let horizontal = [x.real_bond.same(), x.real_bond.change()]
        .iter()
        .map(|z| {
            let a = z.arg().abs();
            a.min(PI - a)
        })
        .fold(x.real_bond.relative_phase.abs(), f64::max);
    let pass = r1 < 0.1 && (0.8..=1.25).contains(&r3) && vertical < 0.05 && horizontal < 0.05;
    outcome(
        pass,
        format!(
            "J1 = {:.4e}, J2 = {:.4e}, J3 = {:.4e}; J1/J2 = {r1:.4}, J3/J2 = {r3:.4}; phase offsets {vertical:.1e} / {horizontal:.1e} rad",
            c.j1, c.j2, c.j3
        ),
    )
}

fn c10_oscillation_decay(c: &CouplingSet) -> Outcome {
    let horizon = 2.0 * PI / c.j1;
    let times = EvolutionPlan::new(horizon, 20001).unwrap().times();
    let mut amplitudes = Vec::new();
    for n in [2, 4, 8, 16] {
        let lat = ribbon(n, 6.0);
        let prop = Propagator::new(&build_h1(&lat, c).unwrap()).unwrap();
        let psi = els_l1(n, 1).unwrap();
        let series = prop.site_population_series(&psi, &times).unwrap();
        let p2p = lat
            .boundary_sites()
            .filter(|&s| psi.site_population(s) > 0.0)
            .map(|s| {
                let v = &series[s - 1];
                v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min)
            })
            .fold(0.0, f64::max);
        amplitudes.push(p2p);
    }
    let monotone = amplitudes.windows(2).all(|w| w[1] < w[0]);
    outcome(monotone, format!("peak-to-peak over t <= {horizon:.0}: {}", amplitudes.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(" > ")))
}

fn c11_tilted_square() -> Outcome {
    let lat = build_tilted_square(3, 3, 5.0).unwrap();
    let h = build_h0(&lat, 1.0).unwrap();
    let dark = dark_edge_subspace(&h, &lat).unwrap();
    let residual = dark.iter().map(|s| (h.matrix() * s.amplitudes()).norm()).fold(0.0, f64::max);
    let interior = dark.iter().map(|s| s.max_amplitude_on(lat.central_sites())).fold(0.0, f64::max);
    outcome(
        !dark.is_empty() && residual <= 1e-10 && interior == 0.0,
        format!("dimension {}, max |H psi| = {residual:.1e} (<= 1e-10 J), max interior amplitude {interior:.1e}", dark.len()),
    )
}

fn c12_continuum_self_checks() -> Outcome {
    let c = GridConfig::new(128, 128, [8.0, 8.0], 0.01).unwrap();
    let v = potential_from_sites(&[[0.0, 0.0]], &c).unwrap();
    let mut h = GridHamiltonian::new(&v).unwrap();
    let e0 = h.energy(&local_state_at([0.0, 0.0], LocalOrbital::S, 0.0, &c).unwrap()).unwrap();
    let plus = local_state_at([0.0, 0.0], LocalOrbital::P(Winding::Plus), -FRAC_PI_4, &c).unwrap();
    let minus = local_state_at([0.0, 0.0], LocalOrbital::P(Winding::Minus), -FRAC_PI_4, &c).unwrap();
    let e1 = h.energy(&plus).unwrap();
    let lz = [angular_momentum(&plus, [0.0, 0.0]) - 1.0, angular_momentum(&minus, [0.0, 0.0]) + 1.0];
    let lz_err = lz[0].abs().max(lz[1].abs());

    let sites = two_well_sites(5.0, 0.0);
    let pair = GridConfig::enclosing_with(&sites, 6.0, 128, 0.01).unwrap();
    let vp = potential_from_sites(&sites, &pair).unwrap();
    let mut hp = GridHamiltonian::new(&vp).unwrap();
    let mut psi = local_state_at(sites[0], LocalOrbital::S, 0.0, &pair).unwrap();
    let energy0 = hp.energy(&psi).unwrap();
    let mut stepper = SplitStep::new(&vp).unwrap();
    let steps = stepper.steps_for(1000.0).unwrap();
    if let Err(e) = stepper.advance_checked(&mut psi.values, steps, 0.0) {
        return outcome(false, format!("two-well run failed: {e}"));
    }
    let drift = (psi.norm_sqr() - 1.0).abs();
    let e_drift = ((hp.energy(&psi).unwrap() - energy0) / energy0).abs();
    let pass = (e0 - 1.0).abs() <= 1e-4 && (e1 - 2.0).abs() <= 1e-4 && lz_err <= 1e-6 && drift <= 1e-10 && e_drift <= 1e-6;
    outcome(
        pass,
        format!(
            "E0 = {e0:.7}, E1 = {e1:.7}, |Lz -+ 1| = {lz_err:.1e}, norm drift {drift:.1e} and energy drift {e_drift:.1e} over T = 1000"
        ),
    )
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--list`; there is nothing
    // to list or filter here.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let j = j_d5();
    let l1 = l1_couplings();
    let golden_j = (j - golden::J_D5).abs() < 2e-6;
    if !golden_j {
        println!("note: J(5) = {j:.6e} differs from the recorded {:.6e}", golden::J_D5);
    }
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("dark-state exactness", Box::new(c1_dark_state_exactness)),
        ("edge-state counting", Box::new(c2_counting)),
        ("phase resonance l=0", Box::new(move || c3_resonance_l0(j))),
        ("phase resonance l=1", Box::new(move || c4_resonance_l1(&l1))),
        ("defect robustness", Box::new(move || c5_defect_robustness(j))),
        ("pulse switching closure", Box::new(move || c6_switching(j))),
        ("Rabi loading", Box::new(move || c7_rabi_loading(j))),
        ("continuum agreement", Box::new(move || c8_continuum_agreement(j))),
        ("coupling hierarchy l=1", Box::new(c9_coupling_hierarchy)),
        ("finite-size decay l=1", Box::new(move || c10_oscillation_decay(&l1))),
        ("tilted-square edge states", Box::new(c11_tilted_square)),
        ("continuum self-checks", Box::new(c12_continuum_self_checks)),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failures += usize::from(!o.pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.1}s]",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 && golden_j {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
