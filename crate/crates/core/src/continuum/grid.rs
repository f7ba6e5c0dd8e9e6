use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid. Points along x are `center[0] - extent[0] + i·dx`
/// for `i in 0..nx`, with `dx = 2·extent[0] / nx`; likewise along y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    /// Half-width per axis, in σ.
    pub extent: [f64; 2],
    #[serde(default)]
    pub center: [f64; 2],
    /// Time step, in ω⁻¹.
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridPreset {
    #[default]
    Fast,
    Paper,
}

impl GridPreset {
    pub fn points(self) -> usize {
        match self {
            GridPreset::Fast => 256,
            GridPreset::Paper => 512,
        }
    }

    pub fn dt(self) -> f64 {
        match self {
            GridPreset::Fast => 0.01,
            GridPreset::Paper => 0.005,
        }
    }
}

impl std::str::FromStr for GridPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(GridPreset::Fast),
            "paper" => Ok(GridPreset::Paper),
            other => Err(Error::InvalidGrid(format!("unknown grid preset '{other}'"))),
        }
    }
}

/// Distance from the outermost sites to the nearest grid point, per manifold.
pub fn default_margin(l: u8) -> f64 {
    if l == 0 {
        6.0
    } else {
        7.0
    }
}

impl GridConfig {
    pub const MAX_DT: f64 = 0.01;

    pub fn new(nx: usize, ny: usize, extent: [f64; 2], dt: f64) -> Result<Self> {
        let c = GridConfig { nx, ny, extent, center: [0.0, 0.0], dt };
        c.validate()?;
        Ok(c)
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for n in [self.nx, self.ny] {
            if n < 128 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!("{n} points per axis; need a power of two >= 128")));
            }
        }
        if self.extent.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidGrid("extent must be positive".into()));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("center must be finite".into()));
        }
        if !(self.dt > 0.0) || self.dt > Self::MAX_DT {
            return Err(Error::InvalidGrid(format!("dt = {} outside (0, {}]", self.dt, Self::MAX_DT)));
        }
        Ok(())
    }

    /// Smallest square-count grid from `preset` whose nearest grid points lie
    /// at least `margin` beyond the bounding box of `positions`.
    pub fn enclosing(positions: &[[f64; 2]], margin: f64, preset: GridPreset) -> Result<Self> {
        Self::enclosing_with(positions, margin, preset.points(), preset.dt())
    }

    pub fn enclosing_with(positions: &[[f64; 2]], margin: f64, n: usize, dt: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidGrid("no sites to enclose".into()));
        }
        let (lo, hi) = bbox(positions);
        let scale = n as f64 / (n as f64 - 2.0);
        let extent = [0, 1].map(|a| ((hi[a] - lo[a]) / 2.0 + margin) * scale);
        let center = [0, 1].map(|a| (hi[a] + lo[a]) / 2.0);
        Ok(GridConfig::new(n, n, extent, dt)?.with_center(center))
    }

    pub fn spacing(&self) -> [f64; 2] {
        [2.0 * self.extent[0] / self.nx as f64, 2.0 * self.extent[1] / self.ny as f64]
    }

    pub fn cell_area(&self) -> f64 {
        let [dx, dy] = self.spacing();
        dx * dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.center[0] - self.extent[0] + ix as f64 * self.spacing()[0]
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.center[1] - self.extent[1] + iy as f64 * self.spacing()[1]
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|i| self.y(i)).collect()
    }

    /// Smallest distance from any position to the outermost grid lines.
    pub fn clearance(&self, positions: &[[f64; 2]]) -> f64 {
        let lo = [self.x(0), self.y(0)];
        let hi = [self.x(self.nx - 1), self.y(self.ny - 1)];
        positions
            .iter()
            .flat_map(|p| [p[0] - lo[0], hi[0] - p[0], p[1] - lo[1], hi[1] - p[1]])
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether flat index `k` lies on the outermost ring of the grid.
    pub(crate) fn boundary_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let (nx, ny) = (self.nx, self.ny);
        let columns = (0..ny).flat_map(move |iy| [iy, (nx - 1) * ny + iy]);
        let rows = (1..nx - 1).flat_map(move |ix| [ix * ny, ix * ny + ny - 1]);
        columns.chain(rows)
    }
}

fn bbox(positions: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in positions {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// Complex field sampled on a grid, stored as `values[ix * ny + iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub config: GridConfig,
    pub values: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn zeros(config: GridConfig) -> Self {
        GridWavefunction { config, values: vec![Complex64::new(0.0, 0.0); config.len()] }
    }

    pub fn from_fn(config: GridConfig, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let xs = config.xs();
        let ys = config.ys();
        let values = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).map(|(x, y)| f(x, y)).collect();
        GridWavefunction { config, values }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.config.cell_area()
    }

    pub fn inner(&self, other: &GridWavefunction) -> Complex64 {
        inner(&self.values, &other.values) * self.config.cell_area()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NullState("grid field has zero norm".into()));
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    /// Largest modulus on the outermost ring of grid points.
    pub fn boundary_max(&self) -> f64 {
        boundary_max(&self.config, &self.values)
    }

    pub fn mean_position(&self) -> [f64; 2] {
        let (xs, ys) = (self.config.xs(), self.config.ys());
        let ny = self.config.ny;
        let mut m = [0.0; 2];
        for (k, v) in self.values.iter().enumerate() {
            let p = v.norm_sqr();
            m[0] += xs[k / ny] * p;
            m[1] += ys[k % ny] * p;
        }
        let n: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        [m[0] / n, m[1] / n]
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn boundary_max(config: &GridConfig, values: &[Complex64]) -> f64 {
    config.boundary_indices().map(|k| values[k].norm()).fold(0.0, f64::max)
}

/// Real field on a grid, in units of ħω.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub config: GridConfig,
    pub values: Vec<f64>,
}
