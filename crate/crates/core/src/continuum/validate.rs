//! Grid propagation of few-state initial conditions and comparison with the
//! tight-binding model.

use num_complex::Complex64;
use serde::Serialize;

use super::grid::{inner, GridConfig, GridWavefunction};
use super::local::{local_state_at, LocalOrbital};
use super::potential::{build_potential, VoronoiMap};
use super::split_step::SplitStep;
use crate::darkstates::StateVector;
use crate::dynamics::{EvolutionPlan, Propagator};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fewstate::{build_h0, build_h1, CouplingSet, Manifold, ManifoldBasis};
use crate::lattice::Lattice;

/// Grid images of every basis state of `basis`, in basis order.
pub fn local_basis(
    lattice: &Lattice,
    basis: ManifoldBasis,
    phi0: f64,
    config: &GridConfig,
) -> Result<Vec<GridWavefunction>> {
    if basis.n_sites() != lattice.n_sites() {
        return Err(Error::BasisMismatch { expected: lattice.n_sites(), found: basis.n_sites() });
    }
    basis
        .labels()
        .map(|label| {
            let orbital = match label.winding {
                None => LocalOrbital::S,
                Some(w) => LocalOrbital::P(w),
            };
            local_state_at(lattice.position(label.site), orbital, phi0, config)
        })
        .collect()
}

/// `Σ_i c_i φ_i`, not normalized.
pub fn superpose(states: &[GridWavefunction], coefficients: &[Complex64]) -> Result<GridWavefunction> {
    let first = states.first().ok_or_else(|| Error::NullState("no basis states".into()))?;
    let mut out = GridWavefunction::zeros(first.config);
    for (s, &c) in states.iter().zip(coefficients) {
        if c != Complex64::new(0.0, 0.0) {
            out.values.iter_mut().zip(&s.values).for_each(|(o, v)| *o += c * v);
        }
    }
    Ok(out)
}

/// Few-state model for `manifold` with `couplings`.
pub fn model_hamiltonian(lattice: &Lattice, manifold: Manifold, couplings: &CouplingSet) -> Result<crate::fewstate::Hamiltonian> {
    match manifold {
        Manifold::L0 => build_h0(lattice, couplings.j),
        Manifold::L1 => build_h1(lattice, couplings),
    }
}

fn sample_steps(stepper: &SplitStep, plan: &EvolutionPlan) -> Result<usize> {
    plan.validate()?;
    stepper.steps_for(plan.step())
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub times: Vec<f64>,
    /// `[checkpoint][site]`, Voronoi-cell populations of the grid field.
    pub grid_populations: Vec<Vec<f64>>,
    /// `[checkpoint][site]`, the model state mapped onto the grid through the
    /// local states and measured with the same Voronoi cells.
    pub model_populations: Vec<Vec<f64>>,
    pub max_abs_diff: f64,
    pub mean_abs_diff: f64,
    pub rho_bar_grid: f64,
    pub rho_bar_model: f64,
}

/// Propagates `psi0` both with the few-state model and on the grid, and
/// compares per-site populations at `n_compare` uniformly spaced checkpoints
/// in `[0, t_final]`.
pub fn validate_fewstate(
    lattice: &Lattice,
    psi0: &StateVector,
    couplings: &CouplingSet,
    t_final: f64,
    n_compare: usize,
    config: &GridConfig,
) -> Result<ValidationReport> {
    let basis = psi0.basis();
    let plan = EvolutionPlan::new(t_final, n_compare)?;
    let potential = build_potential(lattice, config)?;
    let mut stepper = SplitStep::new(&potential)?;
    let per_sample = sample_steps(&stepper, &plan)?;

    let locals = local_basis(lattice, basis, couplings.phi0, config)?;
    let coeffs: Vec<Complex64> = psi0.amplitudes().iter().copied().collect();
    let mut field = superpose(&locals, &coeffs)?;
    let norm = field.norm_sqr();
    field.normalize()?;

    let voronoi = VoronoiMap::for_lattice(lattice, config);
    let n_sites = lattice.n_sites();
    let dim = basis.len();
    // overlap[s][i][j] = ∫_cell s φ_i* φ_j
    let mut overlap = vec![vec![vec![Complex64::new(0.0, 0.0); dim]; dim]; n_sites];
    for i in 0..dim {
        for j in i..dim {
            let cells = voronoi.cross(&locals[i].values, &locals[j].values);
            for (s, v) in cells.into_iter().enumerate() {
                overlap[s][i][j] = v;
                overlap[s][j][i] = v.conj();
            }
        }
    }

    let h = model_hamiltonian(lattice, basis.manifold(), couplings)?;
    let prop = Propagator::new(&h)?;
    let times = plan.times();
    let mut grid_populations = Vec::with_capacity(times.len());
    let mut model_populations = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            stepper.advance_checked(&mut field.values, per_sample, times[k - 1])?;
        }
        grid_populations.push(voronoi.populations(&field.values));
        let c = prop.evolve(psi0, t)?;
        let c = c.amplitudes();
        let pops: Vec<f64> = (0..n_sites)
            .map(|s| {
                let m = &overlap[s];
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..dim {
                    for j in 0..dim {
                        acc += c[i].conj() * m[i][j] * c[j];
                    }
                }
                acc.re / norm
            })
            .collect();
        model_populations.push(pops);
    }

    let diffs: Vec<f64> = grid_populations
        .iter()
        .zip(&model_populations)
        .flat_map(|(g, m)| g.iter().zip(m).map(|(a, b)| (a - b).abs()))
        .collect();
    let max_abs_diff = diffs.iter().copied().fold(0.0, f64::max);
    let mean_abs_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let central: Vec<usize> = lattice.central_sites().map(|s| s - 1).collect();
    let central_of = |rows: &[Vec<f64>]| -> Vec<f64> { rows.iter().map(|r| central.iter().map(|&s| r[s]).sum()).collect() };
    let rho_bar_grid = plan.average(&central_of(&grid_populations));
    let rho_bar_model = plan.average(&central_of(&model_populations));
    Ok(ValidationReport {
        times,
        grid_populations,
        model_populations,
        max_abs_diff,
        mean_abs_diff,
        rho_bar_grid,
        rho_bar_model,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSweep {
    pub phis: Vec<f64>,
    pub rho_bar: Vec<f64>,
}

/// Grid ρ̄(φ) for the trial state on a ribbon, for many φ at the cost of
/// two propagations. The trial state is `A + e^{iφ} B`, where `A` (`B`)
/// puts every local state of the manifold on the upper (lower) outer
/// sites, so the central-cell density is a quadratic form in `(1, e^{iφ})`.
pub fn grid_phase_sweep(
    lattice: &Lattice,
    manifold: Manifold,
    phi0: f64,
    phis: &[f64],
    plan: &EvolutionPlan,
    config: &GridConfig,
) -> Result<GridSweep> {
    if !lattice.is_ribbon() {
        return Err(Error::Unsupported("phase sweeps need a ribbon".into()));
    }
    let potential = build_potential(lattice, config)?;
    let mut stepper_a = SplitStep::new(&potential)?;
    let mut stepper_b = stepper_a.clone();
    let per_sample = sample_steps(&stepper_a, plan)?;

    let basis = ManifoldBasis::new(manifold, lattice.n_sites());
    let locals = local_basis(lattice, basis, phi0, config)?;
    let row = |offset: usize| -> Vec<Complex64> {
        basis
            .labels()
            .map(|l| if l.site % 3 == offset { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
            .collect()
    };
    let mut a = superpose(&locals, &row(1))?;
    let mut b = superpose(&locals, &row(2))?;
    let da = config.cell_area();
    let (naa, nbb, nab) =
        (a.norm_sqr(), b.norm_sqr(), inner(&a.values, &b.values) * da);

    let voronoi = VoronoiMap::for_lattice(lattice, config);
    let central: Vec<usize> = lattice.central_sites().map(|s| s - 1).collect();
    let weights = plan.average_weights();
    let (mut paa, mut pbb, mut cab) = (0.0, 0.0, Complex64::new(0.0, 0.0));
    for (k, w) in weights.iter().enumerate() {
        if k > 0 {
            let t0 = (k - 1) as f64 * plan.step();
            let (ra, rb) = Execution::default().join(
                || stepper_a.advance_checked(&mut a.values, per_sample, t0),
                || stepper_b.advance_checked(&mut b.values, per_sample, t0),
            );
            ra?;
            rb?;
        }
        let (pa, pb, c) = (voronoi.populations(&a.values), voronoi.populations(&b.values), voronoi.cross(&a.values, &b.values));
        for &s in &central {
            paa += w * pa[s];
            pbb += w * pb[s];
            cab += c[s] * *w;
        }
    }
    let rho_bar = phis
        .iter()
        .map(|&phi| {
            let e = Complex64::from_polar(1.0, phi);
            let num = paa + pbb + 2.0 * (e * cab).re;
            let den = naa + nbb + 2.0 * (e * nab).re;
            num / den
        })
        .collect();
    Ok(GridSweep { phis: phis.to_vec(), rho_bar })
}
