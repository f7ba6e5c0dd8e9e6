//! Unitary dynamics under the few-state Hamiltonians, the population
//! observables built on it, and the instantaneous phase-pulse protocol.
//!
//! Propagation is spectral: `ψ(t) = V e^{-iEt} V† ψ₀`, so a single
//! decomposition serves every sample time.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::darkstates::StateVector;
use crate::error::{Error, Result};
use crate::fewstate::{spectrum, Hamiltonian, ManifoldBasis};
use crate::lattice::Lattice;

/// Uniform sampling of `[0, t_final]` with `n_samples` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPlan {
    pub t_final: f64,
    pub n_samples: usize,
}

impl EvolutionPlan {
    pub const DEFAULT_SAMPLES: usize = 2001;

    pub fn new(t_final: f64, n_samples: usize) -> Result<Self> {
        let plan = EvolutionPlan { t_final, n_samples };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidTimes(format!("t_final must be positive, got {}", self.t_final)));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidTimes("need at least two samples".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.t_final / (self.n_samples - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.step();
        (0..self.n_samples).map(|k| k as f64 * dt).collect()
    }

    /// Trapezoid weights normalized so that they sum to 1 (time average).
    pub fn average_weights(&self) -> Vec<f64> {
        let m = (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|k| if k == 0 || k == self.n_samples - 1 { 0.5 / m } else { 1.0 / m })
            .collect()
    }

    /// Trapezoid time average of uniformly sampled values.
    pub fn average(&self, values: &[f64]) -> f64 {
        self.average_weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Cached spectral decomposition of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: ManifoldBasis,
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
    matrix: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let s = spectrum(h)?;
        Ok(Propagator { basis: h.basis(), values: s.values, vectors: s.vectors, matrix: h.matrix().clone() })
    }

    pub fn basis(&self) -> ManifoldBasis {
        self.basis
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    fn check(&self, psi: &StateVector) -> Result<()> {
        if psi.basis() != self.basis {
            return Err(Error::BasisMismatch { expected: self.basis.len(), found: psi.basis().len() });
        }
        Ok(())
    }

    /// Expansion coefficients `V† ψ` in the eigenbasis.
    fn coefficients(&self, psi: &StateVector) -> DVector<Complex64> {
        self.vectors.ad_mul(psi.amplitudes())
    }

    fn phases(&self, t: f64) -> impl Iterator<Item = Complex64> + '_ {
        self.values.iter().map(move |&e| Complex64::from_polar(1.0, -e * t))
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.check(psi)?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTimes(format!("time must be nonnegative, got {t}")));
        }
        let mut c = self.coefficients(psi);
        for (ck, ph) in c.iter_mut().zip(self.phases(t)) {
            *ck *= ph;
        }
        Ok(StateVector::from_parts_unchecked(self.basis, &self.vectors * c))
    }

    pub fn energy(&self, psi: &StateVector) -> f64 {
        psi.amplitudes().dotc(&(&self.matrix * psi.amplitudes())).re
    }

    /// Summed populations of groups of basis positions at each time.
    /// Returns `out[group][time]`.
    pub fn population_series(
        &self,
        psi: &StateVector,
        groups: &[Vec<usize>],
        times: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        self.check(psi)?;
        let c = self.coefficients(psi);
        let rows: Vec<usize> = groups.iter().flatten().copied().collect();
        // w[r][k] = V[row_r, k] · c_k
        let w: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|&r| (0..self.values.len()).map(|k| self.vectors[(r, k)] * c[k]).collect())
            .collect();
        let mut out = vec![Vec::with_capacity(times.len()); groups.len()];
        let mut phase = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for &t in times {
            for (p, e) in phase.iter_mut().zip(&self.values) {
                *p = Complex64::from_polar(1.0, -e * t);
            }
            let mut cursor = 0;
            for (g, group) in groups.iter().enumerate() {
                let mut total = 0.0;
                for _ in group {
                    let amp: Complex64 = w[cursor].iter().zip(&phase).map(|(a, b)| a * b).sum();
                    total += amp.norm_sqr();
                    cursor += 1;
                }
                out[g].push(total);
            }
        }
        Ok(out)
    }

    /// Per-site populations, `out[site - 1][time]`.
    pub fn site_population_series(&self, psi: &StateVector, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        let groups: Vec<Vec<usize>> =
            (1..=self.basis.n_sites()).map(|s| self.basis.site_indices(s).collect()).collect();
        self.population_series(psi, &groups, times)
    }

    /// Total population of the given sites at each time.
    pub fn sites_population_series(
        &self,
        psi: &StateVector,
        sites: &[usize],
        times: &[f64],
    ) -> Result<Vec<f64>> {
        let group: Vec<usize> = sites.iter().flat_map(|&s| self.basis.site_indices(s)).collect();
        Ok(self.population_series(psi, &[group], times)?.pop().unwrap_or_default())
    }

    /// `|⟨ψ₀|ψ(t)⟩|²` at each time.
    pub fn survival(&self, psi: &StateVector, times: &[f64]) -> Result<Vec<f64>> {
        self.check(psi)?;
        let weights: Vec<f64> = self.coefficients(psi).iter().map(|c| c.norm_sqr()).collect();
        Ok(times
            .iter()
            .map(|&t| {
                let a: Complex64 = weights.iter().zip(self.phases(t)).map(|(w, p)| p * *w).sum();
                a.norm_sqr()
            })
            .collect())
    }

    /// Time-averaged total population of the lattice's central sites.
    pub fn avg_central_population(
        &self,
        lattice: &Lattice,
        psi: &StateVector,
        plan: &EvolutionPlan,
    ) -> Result<f64> {
        plan.validate()?;
        let central: Vec<usize> = lattice.central_sites().collect();
        let series = self.sites_population_series(psi, &central, &plan.times())?;
        Ok(plan.average(&series))
    }
}

/// `exp(-iHt) ψ₀`.
pub fn propagate(h: &Hamiltonian, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h)?.evolve(psi0, t)
}

/// Trapezoid average over `plan` of the central-site population (both
/// windings for l = 1).
pub fn avg_central_population(
    h: &Hamiltonian,
    lattice: &Lattice,
    psi0: &StateVector,
    plan: &EvolutionPlan,
) -> Result<f64> {
    Propagator::new(h)?.avg_central_population(lattice, psi0, plan)
}

pub fn survival_probability(h: &Hamiltonian, psi0: &StateVector, times: &[f64]) -> Result<Vec<f64>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidTimes("times must be ascending and nonnegative".into()));
    }
    Propagator::new(h)?.survival(psi0, times)
}

/// Empties `site` and renormalizes.
pub fn defect_state(psi: &StateVector, site: usize) -> Result<StateVector> {
    let basis = psi.basis();
    if site == 0 || site > basis.n_sites() {
        return Err(Error::SiteOutOfRange { site, n_sites: basis.n_sites() });
    }
    if psi.site_population(site) == 0.0 {
        return Err(Error::OutOfRange(format!("site {site} is already empty")));
    }
    let mut amps = psi.amplitudes().clone();
    for k in basis.site_indices(site) {
        amps[k] = Complex64::new(0.0, 0.0);
    }
    StateVector::normalized(basis, amps)
        .map_err(|_| Error::NullState(format!("emptying site {site} leaves nothing")))
}

/// A 2π-area pulse on a set of sites, modelled as the instantaneous phase
/// `e^{i·phase}` on every local state of those sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseEvent {
    pub sites: BTreeSet<usize>,
    pub phase: f64,
    pub time: f64,
}

impl PulseEvent {
    pub fn pi(sites: impl IntoIterator<Item = usize>, time: f64) -> Self {
        PulseEvent { sites: sites.into_iter().collect(), phase: std::f64::consts::PI, time }
    }
}

pub fn apply_phase_pulse(psi: &StateVector, pulse: &PulseEvent) -> Result<StateVector> {
    let basis = psi.basis();
    if pulse.sites.is_empty() {
        return Err(Error::OutOfRange("pulse addresses no sites".into()));
    }
    let phase = Complex64::from_polar(1.0, pulse.phase);
    let mut amps = psi.amplitudes().clone();
    for &site in &pulse.sites {
        if site == 0 || site > basis.n_sites() {
            return Err(Error::SiteOutOfRange { site, n_sites: basis.n_sites() });
        }
        for k in basis.site_indices(site) {
            amps[k] *= phase;
        }
    }
    Ok(StateVector::from_parts_unchecked(basis, amps))
}

#[derive(Debug, Clone)]
pub struct RabiLoading {
    pub times: Vec<f64>,
    pub central: Vec<f64>,
    pub outer: Vec<f64>,
    /// First instant at which the central population drops below 1e-6.
    pub t_star: Option<f64>,
    /// State at `t_star`.
    pub loaded: Option<StateVector>,
}

/// Starts from the (single) central site of `lattice` and records the
/// central/outer population exchange.
pub fn rabi_loading(h: &Hamiltonian, lattice: &Lattice, plan: &EvolutionPlan) -> Result<RabiLoading> {
    plan.validate()?;
    let central: Vec<usize> = lattice.central_sites().collect();
    if central.len() != 1 {
        return Err(Error::Unsupported("Rabi loading expects a single cell".into()));
    }
    let outer: Vec<usize> = lattice.boundary_sites().collect();
    let prop = Propagator::new(h)?;
    let psi0 = StateVector::basis_state(h.basis(), central[0], h.basis().label(h.basis().site_indices(central[0]).start).winding)?;
    let times = plan.times();
    let central_pop = prop.sites_population_series(&psi0, &central, &times)?;
    let outer_pop = prop.sites_population_series(&psi0, &outer, &times)?;

    let pop_at = |t: f64| -> f64 {
        prop.sites_population_series(&psi0, &central, &[t]).map(|v| v[0]).unwrap_or(f64::NAN)
    };
    let mut t_star = None;
    for k in 1..times.len().saturating_sub(1) {
        let (a, b, c) = (central_pop[k - 1], central_pop[k], central_pop[k + 1]);
        if b <= a && b <= c {
            let t = golden_min(&pop_at, times[k - 1], times[k + 1]);
            if pop_at(t) < 1e-6 {
                t_star = Some(t);
                break;
            }
        }
    }
    let loaded = match t_star {
        Some(t) => Some(prop.evolve(&psi0, t)?),
        None => None,
    };
    Ok(RabiLoading { times, central: central_pop, outer: outer_pop, t_star, loaded })
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-14 * b.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

#[derive(Debug, Clone)]
pub struct SwitchingTrajectory {
    /// `(t, state)` at t = 0, right after every pulse, and at `plan.t_final`.
    pub boundaries: Vec<(f64, StateVector)>,
    pub times: Vec<f64>,
    pub central_population: Vec<f64>,
}

impl SwitchingTrajectory {
    pub fn final_state(&self) -> &StateVector {
        &self.boundaries.last().expect("trajectory has an initial state").1
    }
}

/// Free evolution under `h` interrupted by instantaneous pulses.
pub fn switching_sequence(
    psi0: &StateVector,
    h: &Hamiltonian,
    lattice: &Lattice,
    pulses: &[PulseEvent],
    plan: &EvolutionPlan,
) -> Result<SwitchingTrajectory> {
    plan.validate()?;
    if pulses.windows(2).any(|w| w[1].time < w[0].time) {
        return Err(Error::InvalidTimes("pulses must be sorted by time".into()));
    }
    if let Some(p) = pulses.iter().find(|p| !(p.time >= 0.0) || p.time > plan.t_final) {
        return Err(Error::InvalidTimes(format!("pulse at t = {} is outside the plan", p.time)));
    }
    let prop = Propagator::new(h)?;
    let mut boundaries = vec![(0.0, psi0.clone())];
    for pulse in pulses {
        let (t0, start) = boundaries.last().expect("nonempty");
        let before = prop.evolve(start, pulse.time - t0)?;
        boundaries.push((pulse.time, apply_phase_pulse(&before, pulse)?));
    }
    let times = plan.times();
    let central: Vec<usize> = lattice.central_sites().collect();
    let mut central_population = Vec::with_capacity(times.len());
    for &t in &times {
        let segment = boundaries.iter().rev().find(|(tb, _)| *tb <= t).expect("t >= 0");
        let psi = prop.evolve(&segment.1, t - segment.0)?;
        central_population.push(psi.population_on(central.iter().copied()));
    }
    let (t_last, last) = boundaries.last().expect("nonempty").clone();
    let fin = prop.evolve(&last, plan.t_final - t_last)?;
    boundaries.push((plan.t_final, fin));
    Ok(SwitchingTrajectory { boundaries, times, central_population })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darkstates::{els_l0, enumerate_els_l0, trial_state_l0, ElsL0};
    use crate::fewstate::build_h0;
    use crate::lattice::{build_ribbon, RibbonSpec};
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn ribbon(n: usize) -> Lattice {
        build_ribbon(RibbonSpec::new(n, 5.0)).unwrap()
    }

    /// Taylor series of exp(-iHt) with scaling and squaring.
    fn expm_oracle(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
        let n = h.nrows();
        let norm = h.iter().map(|z| z.norm()).sum::<f64>() * t.abs();
        let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
        let a = h * Complex64::new(0.0, -t / f64::from(2u32.pow(squarings)));
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn dark_state_is_stationary() {
        let lat = ribbon(2);
        let h = build_h0(&lat, 1.0).unwrap();
        let d0 = els_l0(2, ElsL0::Binary(0)).unwrap();
        for t in [0.0, 1.0, 37.5, 1000.0] {
            let psi = propagate(&h, &d0, t).unwrap();
            assert!((psi.amplitudes() - d0.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let lat = ribbon(2);
        let h = build_h0(&lat, 0.4).unwrap();
        let psi = trial_state_l0(2, 0.3).unwrap();
        let out = propagate(&h, &psi, 0.0).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn central_population_follows_cos_squared() {
        let lat = ribbon(1);
        let h = build_h0(&lat, 1.0).unwrap();
        let psi0 = StateVector::basis_state(h.basis(), 3, None).unwrap();
        let prop = Propagator::new(&h).unwrap();
        for t in [0.1, 0.5, PI / 4.0, 1.3, 2.0] {
            let psi = prop.evolve(&psi0, t).unwrap();
            assert!((psi.site_population(3) - (2.0 * t).cos().powi(2)).abs() < 1e-12);
            let exact = expm_oracle(h.matrix(), t) * psi0.amplitudes();
            assert!((exact - psi.amplitudes()).norm() < 1e-11);
        }
    }

    #[test]
    fn unitarity_and_energy_conservation() {
        let lat = ribbon(3);
        let h = build_h0(&lat, 0.8).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let psi0 = trial_state_l0(3, 1.1).unwrap();
        let e0 = prop.energy(&psi0);
        for t in [0.3, 10.0, 250.0, 1000.0] {
            let psi = prop.evolve(&psi0, t).unwrap();
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            assert!((prop.energy(&psi) - e0).abs() < 1e-10 * h.max_abs());
        }
    }

    #[test]
    fn resonance_is_symmetric_about_pi() {
        let lat = ribbon(2);
        let prop = Propagator::new(&build_h0(&lat, 2.75e-3).unwrap()).unwrap();
        let plan = EvolutionPlan::new(1000.0, 2001).unwrap();
        for delta in [0.1, 0.37, 1.0, 2.2] {
            let a = prop.avg_central_population(&lat, &trial_state_l0(2, PI + delta).unwrap(), &plan).unwrap();
            let b = prop.avg_central_population(&lat, &trial_state_l0(2, PI - delta).unwrap(), &plan).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn plan_rejects_degenerate_sampling() {
        assert!(EvolutionPlan::new(0.0, 10).is_err());
        assert!(EvolutionPlan::new(10.0, 1).is_err());
        let p = EvolutionPlan::new(2.0, 3).unwrap();
        assert_eq!(p.times(), vec![0.0, 1.0, 2.0]);
        assert!((p.average(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn defect_construction() {
        let d0 = els_l0(100, ElsL0::Binary(0)).unwrap();
        let tilde = defect_state(&d0, 1).unwrap();
        assert!((tilde.norm() - 1.0).abs() < 1e-12);
        assert_eq!(tilde.site_population(1), 0.0);
        let scale = (202.0_f64 / 201.0).sqrt();
        for k in 1..tilde.amplitudes().len() {
            let expect = d0.amplitudes()[k] * scale;
            assert!((tilde.amplitudes()[k] - expect).norm() < 1e-14);
        }
        let single = els_l0(1, ElsL0::Binary(0)).unwrap();
        assert!(defect_state(&single, 3).is_err());
        let basis_state = StateVector::basis_state(single.basis(), 2, None).unwrap();
        assert!(matches!(defect_state(&basis_state, 2), Err(Error::NullState(_))));
    }

    #[test]
    fn pulses() {
        let d0 = els_l0(2, ElsL0::Binary(0)).unwrap();
        let same = apply_phase_pulse(&d0, &PulseEvent { sites: [4, 5].into(), phase: 2.0 * PI, time: 0.0 }).unwrap();
        assert!((same.amplitudes() - d0.amplitudes()).norm() < 1e-14);
        let flipped = apply_phase_pulse(&d0, &PulseEvent::pi([4, 5], 0.0)).unwrap();
        assert!((flipped.norm() - 1.0).abs() < 1e-14);
        // column 1 is digit 1 (leftmost) of k: D_0 → D_2 for n = 2
        let d2 = els_l0(2, ElsL0::Binary(0b10)).unwrap();
        assert!((d2.overlap(&flipped) - 1.0).abs() < 1e-12);
        let family = enumerate_els_l0(2).unwrap();
        assert_eq!(family.iter().filter(|s| (s.overlap(&flipped) - 1.0).abs() < 1e-12).count(), 1);
        assert!(apply_phase_pulse(&d0, &PulseEvent::pi([9], 0.0)).is_err());
    }

    #[test]
    fn loading_then_row_pulse_gives_an_edge_state() {
        let lat = ribbon(1);
        let h = build_h0(&lat, 1.0).unwrap();
        let load = rabi_loading(&h, &lat, &EvolutionPlan::new(2.0, 201).unwrap()).unwrap();
        let t_star = load.t_star.unwrap();
        assert!((t_star - PI / 4.0).abs() < 1e-9);
        let c = load.loaded.unwrap();
        let switched = apply_phase_pulse(&c, &PulseEvent::pi([1, 4], 0.0)).unwrap();
        let dark = crate::darkstates::dark_edge_subspace(&h, &lat).unwrap();
        assert!(crate::darkstates::projection_residual(&switched, &dark) < 1e-6);
        for (a, b) in load.central.iter().zip(&load.outer) {
            assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn switching_closure() {
        let lat = ribbon(2);
        let h = build_h0(&lat, 2.75e-3).unwrap();
        let d0 = els_l0(2, ElsL0::Binary(0)).unwrap();
        let plan = EvolutionPlan::new(600.0, 61).unwrap();
        let pulses = [PulseEvent::pi([4, 5], 150.0), PulseEvent::pi([4, 5], 400.0)];
        let traj = switching_sequence(&d0, &h, &lat, &pulses, &plan).unwrap();
        assert_eq!(traj.boundaries.len(), 4);
        assert!(traj.central_population.iter().all(|&p| p < 1e-20));
        assert!((traj.final_state().overlap(&d0) - 1.0).abs() < 1e-12);
        let unsorted = [pulses[1].clone(), pulses[0].clone()];
        assert!(switching_sequence(&d0, &h, &lat, &unsorted, &plan).is_err());
        let plain = switching_sequence(&d0, &h, &lat, &[], &plan).unwrap();
        assert_eq!(plain.boundaries.len(), 2);
    }

    #[test]
    fn survival_checks_time_order() {
        let lat = ribbon(1);
        let h = build_h0(&lat, 1.0).unwrap();
        let psi = StateVector::basis_state(h.basis(), 1, None).unwrap();
        assert!(survival_probability(&h, &psi, &[1.0, 0.5]).is_err());
        let s = survival_probability(&h, &psi, &[0.0, PI / 2.0]).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14);
        // leaf of K_{1,4}: amplitude 3/4 + cos(2t)/4 → 1/2 at t = π/2
        assert!((s[1] - 0.25).abs() < 1e-12);
    }
}
