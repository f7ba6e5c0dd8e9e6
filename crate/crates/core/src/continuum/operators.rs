use num_complex::Complex64;

use super::fft::{derivative_wavenumbers, kinetic_symbol, Spectral};
use super::grid::{inner, GridWavefunction, PotentialField};
use crate::error::{Error, Result};

/// `H = -½∇² + V` with a spectral Laplacian.
#[derive(Clone)]
pub struct GridHamiltonian {
    potential: PotentialField,
    spectral: Spectral,
    kinetic: Vec<f64>,
}

impl GridHamiltonian {
    pub fn new(potential: &PotentialField) -> Result<Self> {
        potential.config.validate()?;
        Ok(GridHamiltonian {
            potential: potential.clone(),
            spectral: Spectral::new(&potential.config),
            kinetic: kinetic_symbol(&potential.config),
        })
    }

    pub fn potential(&self) -> &PotentialField {
        &self.potential
    }

    pub fn apply_values(&mut self, values: &[Complex64]) -> Vec<Complex64> {
        let mut t = values.to_vec();
        self.spectral.forward(&mut t);
        t.iter_mut().zip(&self.kinetic).for_each(|(v, k)| *v *= k);
        self.spectral.inverse(&mut t);
        for ((out, v), p) in t.iter_mut().zip(values).zip(&self.potential.values) {
            *out += v * p;
        }
        t
    }

    pub fn apply(&mut self, psi: &GridWavefunction) -> Result<GridWavefunction> {
        self.check(psi)?;
        Ok(GridWavefunction { config: psi.config, values: self.apply_values(&psi.values) })
    }

    /// `⟨a|H|b⟩`.
    pub fn element(&mut self, a: &GridWavefunction, b: &GridWavefunction) -> Result<Complex64> {
        self.check(a)?;
        self.check(b)?;
        let hb = self.apply_values(&b.values);
        Ok(inner(&a.values, &hb) * a.config.cell_area())
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn energy(&mut self, psi: &GridWavefunction) -> Result<f64> {
        Ok(self.element(psi, psi)?.re / psi.norm_sqr())
    }

    fn check(&self, psi: &GridWavefunction) -> Result<()> {
        if psi.config != self.potential.config {
            return Err(Error::InvalidGrid("field and potential live on different grids".into()));
        }
        Ok(())
    }
}

/// `⟨L_z⟩ / ⟨ψ|ψ⟩` about `origin`, with spectral derivatives.
pub fn angular_momentum(psi: &GridWavefunction, origin: [f64; 2]) -> f64 {
    let c = psi.config;
    let mut spectral = Spectral::new(&c);
    let kx = derivative_wavenumbers(c.nx, 2.0 * c.extent[0]);
    let ky = derivative_wavenumbers(c.ny, 2.0 * c.extent[1]);
    let mut hat = psi.values.clone();
    spectral.forward(&mut hat);
    let derivative = |spectral: &mut Spectral, k_of: &dyn Fn(usize) -> f64| {
        let mut d: Vec<Complex64> = hat.iter().enumerate().map(|(idx, v)| v * Complex64::new(0.0, k_of(idx))).collect();
        spectral.inverse(&mut d);
        d
    };
    // transposed layout: idx = iy·nx + ix
    let dx = derivative(&mut spectral, &|idx| kx[idx % c.nx]);
    let dy = derivative(&mut spectral, &|idx| ky[idx / c.nx]);
    let (xs, ys) = (c.xs(), c.ys());
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in psi.values.iter().enumerate() {
        let (x, y) = (xs[k / c.ny] - origin[0], ys[k % c.ny] - origin[1]);
        acc += v.conj() * (x * dy[k] - y * dx[k]);
    }
    let norm: f64 = psi.values.iter().map(|v| v.norm_sqr()).sum();
    (acc * Complex64::new(0.0, -1.0)).re / norm
}
