//! Tunneling rates from two-site continuum problems.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::grid::{default_margin, GridConfig, GridPreset, GridWavefunction};
use super::local::{local_state_at, LocalOrbital};
use super::operators::GridHamiltonian;
use super::potential::potential_from_sites;
use super::split_step::SplitStep;
use crate::error::{Error, Result};
use crate::fewstate::{hermitian_eigen, CouplingSet, Winding};

/// Imaginary-time schedule: (step, number of steps).
const SCHEDULE: [(f64, usize); 3] = [(0.05, 400), (0.01, 300), (0.002, 250)];
const SETTLE_BLOCK: usize = 50;
const SETTLE_BLOCKS: usize = 60;
const SETTLE_TOL: f64 = 1e-12;

/// Smallest overlap eigenvalue accepted before orthogonalization.
pub const MIN_OVERLAP_EIGENVALUE: f64 = 0.5;

/// Two wells at `±d/2` along x, sized from `preset`.
pub fn two_well_grid(d: f64, preset: GridPreset) -> Result<GridConfig> {
    GridConfig::enclosing(&two_well_sites(d, 0.0), default_margin(0), preset)
}

/// Two sites at distance `d` along the direction at angle `theta`.
pub fn two_well_sites(d: f64, theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let h = d / 2.0;
    [[-h * c, -h * s], [h * c, h * s]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoWellSplitting {
    pub symmetric: f64,
    pub antisymmetric: f64,
    pub coupling: f64,
}

/// `J = (E_a − E_s)/2` for two wells at distance `d` centred on the grid.
pub fn extract_coupling_l0(d: f64, config: &GridConfig) -> Result<f64> {
    Ok(two_well_splitting(&two_well_sites(d, 0.0), config)?.coupling)
}

/// Two lowest eigenvalues of the two-well problem by imaginary-time
/// relaxation, starting from the sum and difference of the local ground
/// states; the odd branch is kept orthogonal to the even one.
pub fn two_well_splitting(sites: &[[f64; 2]; 2], config: &GridConfig) -> Result<TwoWellSplitting> {
    let d = ((sites[0][0] - sites[1][0]).powi(2) + (sites[0][1] - sites[1][1]).powi(2)).sqrt();
    if !(d >= 3.0) {
        return Err(Error::OutOfRange(format!("well separation {d} below 3σ")));
    }
    let potential = potential_from_sites(sites, config)?;
    let left = local_state_at(sites[0], LocalOrbital::S, 0.0, config)?;
    let right = local_state_at(sites[1], LocalOrbital::S, 0.0, config)?;
    let combine = |sign: f64| -> Result<GridWavefunction> {
        let mut psi = left.clone();
        psi.values.iter_mut().zip(&right.values).for_each(|(a, b)| *a += b * sign);
        psi.normalize()?;
        Ok(psi)
    };
    let mut even = combine(1.0)?;
    let mut odd = combine(-1.0)?;
    let mut h = GridHamiltonian::new(&potential)?;

    let relax = |stepper: &mut SplitStep, even: &mut GridWavefunction, odd: &mut GridWavefunction, n: usize| -> Result<()> {
        stepper.advance(&mut even.values, n);
        even.normalize()?;
        stepper.advance(&mut odd.values, n);
        let proj = even.inner(odd);
        odd.values.iter_mut().zip(&even.values).for_each(|(o, e)| *o -= proj * e);
        odd.normalize()
    };
    for (dtau, steps) in SCHEDULE {
        let mut stepper = SplitStep::imaginary(&potential, dtau)?;
        for _ in 0..steps / SETTLE_BLOCK {
            relax(&mut stepper, &mut even, &mut odd, SETTLE_BLOCK)?;
        }
    }
    let (last_dtau, _) = SCHEDULE[SCHEDULE.len() - 1];
    let mut stepper = SplitStep::imaginary(&potential, last_dtau)?;
    let mut prev = (h.energy(&even)?, h.energy(&odd)?);
    for _ in 0..SETTLE_BLOCKS {
        relax(&mut stepper, &mut even, &mut odd, SETTLE_BLOCK)?;
        let now = (h.energy(&even)?, h.energy(&odd)?);
        let change = (now.0 - prev.0).abs().max((now.1 - prev.1).abs());
        prev = now;
        if change <= SETTLE_TOL {
            let (symmetric, antisymmetric) = rayleigh_ritz(&mut h, &even, &odd)?;
            let coupling = (antisymmetric - symmetric) / 2.0;
            if !(coupling > 0.0) {
                return Err(Error::NoConvergence(format!("nonpositive splitting {coupling:e}")));
            }
            return Ok(TwoWellSplitting { symmetric, antisymmetric, coupling });
        }
    }
    Err(Error::NoConvergence("two-well energies did not settle".into()))
}

fn rayleigh_ritz(h: &mut GridHamiltonian, a: &GridWavefunction, b: &GridWavefunction) -> Result<(f64, f64)> {
    let basis = [a, b];
    let mut hm = DMatrix::<Complex64>::zeros(2, 2);
    let mut sm = DMatrix::<Complex64>::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            hm[(i, j)] = h.element(basis[i], basis[j])?;
            sm[(i, j)] = basis[i].inner(basis[j]);
        }
    }
    let hp = lowdin(&hm, &sm)?;
    let values = hermitian_eigen(&hp)?.values;
    Ok((values[0], values[1]))
}

/// `S^{-1/2} H S^{-1/2}`.
fn lowdin(h: &DMatrix<Complex64>, s: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let hs = (s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = hermitian_eigen(&hs)?;
    let min = eig.values[0];
    if !(min >= MIN_OVERLAP_EIGENVALUE) {
        return Err(Error::IllConditioned(min));
    }
    let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|v| Complex64::new(1.0 / v.sqrt(), 0.0)),
    ));
    let x = &eig.vectors * inv_sqrt * eig.vectors.adjoint();
    let hh = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(&x * hh * &x)
}

/// Orthogonalized two-site l = 1 Hamiltonian on one bond, in the basis
/// `(j+, j−, k+, k−)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BondProjection {
    /// Bond direction from the first site to the second.
    pub theta: f64,
    /// `⟨j,+|H|k,+⟩` as `[re, im]`.
    pub same: [f64; 2],
    /// `⟨j,+|H|k,−⟩`.
    pub change: [f64; 2],
    /// `⟨j,+|H|j,−⟩`.
    pub self_coupling: [f64; 2],
    /// `arg(change / same)`, in (−π, π].
    pub relative_phase: f64,
    /// Smallest eigenvalue of the overlap matrix.
    pub min_overlap_eigenvalue: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn as_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

impl BondProjection {
    pub fn same(&self) -> Complex64 {
        as_complex(self.same)
    }

    pub fn change(&self) -> Complex64 {
        as_complex(self.change)
    }

    pub fn self_coupling(&self) -> Complex64 {
        as_complex(self.self_coupling)
    }
}

/// Projects the two-site Hamiltonian onto the four local l = 1 states and
/// orthogonalizes symmetrically.
pub fn project_two_site_l1(sites: &[[f64; 2]; 2], phi0: f64, config: &GridConfig) -> Result<BondProjection> {
    let potential = potential_from_sites(sites, config)?;
    let mut h = GridHamiltonian::new(&potential)?;
    let mut states = Vec::with_capacity(4);
    for site in sites {
        for w in [Winding::Plus, Winding::Minus] {
            states.push(local_state_at(*site, LocalOrbital::P(w), phi0, config)?);
        }
    }
    let mut hm = DMatrix::<Complex64>::zeros(4, 4);
    let mut sm = DMatrix::<Complex64>::zeros(4, 4);
    for j in 0..4 {
        let hj = h.apply(&states[j])?;
        for i in 0..4 {
            hm[(i, j)] = states[i].inner(&hj);
            sm[(i, j)] = states[i].inner(&states[j]);
        }
    }
    let min = hermitian_eigen(&((&sm + sm.adjoint()) * Complex64::new(0.5, 0.0)))?.values[0];
    let hp = lowdin(&hm, &sm)?;
    let (same, change, selfc) = (hp[(0, 2)], hp[(0, 3)], hp[(0, 1)]);
    let d = sites[1];
    let o = sites[0];
    Ok(BondProjection {
        theta: (d[1] - o[1]).atan2(d[0] - o[0]),
        same: pair(same),
        change: pair(change),
        self_coupling: pair(selfc),
        relative_phase: (change / same).arg(),
        min_overlap_eigenvalue: min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Couplings {
    pub couplings: CouplingSet,
    /// Bond along −π/4: carries the real block.
    pub real_bond: BondProjection,
    /// Bond along +π/4: carries the π-phased block.
    pub phased_bond: BondProjection,
}

/// Grid for one l = 1 bond of length `d` at either diagonal orientation.
pub fn l1_bond_grid(d: f64, preset: GridPreset) -> Result<GridConfig> {
    let mut pts: Vec<[f64; 2]> = two_well_sites(d, FRAC_PI_4).to_vec();
    pts.extend(two_well_sites(d, -FRAC_PI_4));
    GridConfig::enclosing(&pts, default_margin(1), preset)
}

/// `J1`, `J2`, `J3` as magnitudes of the orthogonalized projected elements,
/// averaged over the two bond orientations of the ribbon.
pub fn extract_couplings_l1(d: f64, phi0: f64, config: &GridConfig) -> Result<L1Couplings> {
    if !(d >= 4.0) {
        return Err(Error::OutOfRange(format!("site distance {d} below 4σ")));
    }
    let real_bond = project_two_site_l1(&two_well_sites(d, -FRAC_PI_4), phi0, config)?;
    let phased_bond = project_two_site_l1(&two_well_sites(d, FRAC_PI_4), phi0, config)?;
    let avg = |f: fn(&BondProjection) -> Complex64| (f(&real_bond).norm() + f(&phased_bond).norm()) / 2.0;
    let couplings = CouplingSet {
        j1: avg(BondProjection::self_coupling),
        j2: avg(BondProjection::same),
        j3: avg(BondProjection::change),
        phi0,
        ..CouplingSet::default()
    };
    Ok(L1Couplings { couplings, real_bond, phased_bond })
}
