use num_complex::Complex64;

use super::grid::{GridConfig, GridWavefunction, PotentialField};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Minimum clearance between any site and the grid edge.
pub const MIN_MARGIN: f64 = 3.0;

pub fn build_potential(lattice: &Lattice, config: &GridConfig) -> Result<PotentialField> {
    let positions: Vec<[f64; 2]> = lattice.sites().iter().map(|s| s.position).collect();
    potential_from_sites(&positions, config)
}

/// `V(r) = min_j ½|r - r_j|²`.
pub fn potential_from_sites(positions: &[[f64; 2]], config: &GridConfig) -> Result<PotentialField> {
    config.validate()?;
    if positions.is_empty() {
        return Err(Error::InvalidLattice("no sites".into()));
    }
    let clearance = config.clearance(positions);
    if clearance < MIN_MARGIN {
        return Err(Error::InvalidGrid(format!(
            "sites are only {clearance:.3} from the grid edge; need {MIN_MARGIN}"
        )));
    }
    let (xs, ys) = (config.xs(), config.ys());
    let mut values = Vec::with_capacity(config.len());
    for &x in &xs {
        for &y in &ys {
            let v = positions
                .iter()
                .map(|p| 0.5 * ((x - p[0]).powi(2) + (y - p[1]).powi(2)))
                .fold(f64::INFINITY, f64::min);
            values.push(v);
        }
    }
    Ok(PotentialField { config: *config, values })
}

/// Assignment of every grid point to its nearest site (lowest index on ties).
#[derive(Debug, Clone)]
pub struct VoronoiMap {
    config: GridConfig,
    owners: Vec<u32>,
    n_sites: usize,
}

impl VoronoiMap {
    pub fn new(positions: &[[f64; 2]], config: &GridConfig) -> Self {
        let (xs, ys) = (config.xs(), config.ys());
        let mut owners = Vec::with_capacity(config.len());
        for &x in &xs {
            for &y in &ys {
                let mut best = (f64::INFINITY, 0u32);
                for (j, p) in positions.iter().enumerate() {
                    let r2 = (x - p[0]).powi(2) + (y - p[1]).powi(2);
                    if r2 < best.0 {
                        best = (r2, j as u32);
                    }
                }
                owners.push(best.1);
            }
        }
        VoronoiMap { config: *config, owners, n_sites: positions.len() }
    }

    pub fn for_lattice(lattice: &Lattice, config: &GridConfig) -> Self {
        let positions: Vec<[f64; 2]> = lattice.sites().iter().map(|s| s.position).collect();
        Self::new(&positions, config)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `∫_cell |ψ|²` per site (0-based).
    pub fn populations(&self, values: &[Complex64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_sites];
        for (v, &o) in values.iter().zip(&self.owners) {
            out[o as usize] += v.norm_sqr();
        }
        let da = self.config.cell_area();
        out.iter_mut().for_each(|p| *p *= da);
        out
    }

    /// `∫_cell a* b` per site (0-based).
    pub fn cross(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n_sites];
        for ((x, y), &o) in a.iter().zip(b).zip(&self.owners) {
            out[o as usize] += x.conj() * y;
        }
        let da = self.config.cell_area();
        out.iter_mut().for_each(|p| *p *= da);
        out
    }
}

/// Voronoi-cell population of `site` (1-based).
pub fn site_population(psi: &GridWavefunction, lattice: &Lattice, site: usize) -> Result<f64> {
    lattice.site(site)?;
    Ok(VoronoiMap::for_lattice(lattice, &psi.config).populations(&psi.values)[site - 1])
}
