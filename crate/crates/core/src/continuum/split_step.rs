//! Strang splitting `e^{-iVdt/2} e^{-iTdt} e^{-iVdt/2}`; consecutive potential
//! half steps are fused.

use num_complex::Complex64;

use super::fft::{kinetic_symbol, Spectral};
use super::grid::{GridConfig, GridWavefunction, PotentialField};
use crate::error::{Error, Result};

/// Abort threshold for the probability inside the outer band of the grid.
pub const LEAK_THRESHOLD: f64 = 1e-6;

/// Width of that band, in σ.
pub const LEAK_BAND: f64 = 1.0;

/// How often, in steps, the boundary is inspected.
const LEAK_CHECK_EVERY: usize = 500;

#[derive(Clone)]
pub struct SplitStep {
    config: GridConfig,
    spectral: Spectral,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    step: f64,
    band: Vec<usize>,
}

impl SplitStep {
    /// Real-time stepper with the grid's `dt`.
    pub fn new(potential: &PotentialField) -> Result<Self> {
        potential.config.validate()?;
        let dt = potential.config.dt;
        Ok(Self::build(potential, |x| Complex64::from_polar(1.0, -x * dt)))
    }

    /// Imaginary-time stepper `e^{-Hτ}` with step `dtau`.
    pub fn imaginary(potential: &PotentialField, dtau: f64) -> Result<Self> {
        potential.config.validate()?;
        if !(dtau > 0.0) {
            return Err(Error::InvalidTimes(format!("imaginary step must be positive, got {dtau}")));
        }
        let mut s = Self::build(potential, |x| Complex64::new((-x * dtau).exp(), 0.0));
        s.step = dtau;
        Ok(s)
    }

    fn build(potential: &PotentialField, exp: impl Fn(f64) -> Complex64) -> Self {
        let config = potential.config;
        SplitStep {
            config,
            spectral: Spectral::new(&config),
            half: potential.values.iter().map(|v| exp(0.5 * v)).collect(),
            full: potential.values.iter().map(|v| exp(*v)).collect(),
            kinetic: kinetic_symbol(&config).into_iter().map(&exp).collect(),
            step: config.dt,
            band: edge_band(&config, LEAK_BAND),
        }
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of steps covering `t`; `t` must be a multiple of the step to
    /// within a small fraction of it.
    pub fn steps_for(&self, t: f64) -> Result<usize> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTimes(format!("time must be nonnegative, got {t}")));
        }
        let n = (t / self.step).round();
        if (n * self.step - t).abs() > 1e-6 * self.step {
            return Err(Error::InvalidTimes(format!("dt = {} does not divide t = {t}", self.step)));
        }
        Ok(n as usize)
    }

    /// Advances raw grid values by `n` steps.
    pub fn advance(&mut self, values: &mut Vec<Complex64>, n: usize) {
        if n == 0 {
            return;
        }
        mul(values, &self.half);
        for s in 0..n {
            self.spectral.forward(values);
            mul(values, &self.kinetic);
            self.spectral.inverse(values);
            mul(values, if s + 1 == n { &self.half } else { &self.full });
        }
    }

    /// Advances `n` steps, checking the grid edge periodically.
    /// `t0` only labels the error.
    pub fn advance_checked(&mut self, values: &mut Vec<Complex64>, n: usize, t0: f64) -> Result<()> {
        let mut done = 0;
        while done < n {
            let chunk = LEAK_CHECK_EVERY.min(n - done);
            self.advance(values, chunk);
            done += chunk;
            let mass = self.edge_mass(values);
            if mass > LEAK_THRESHOLD {
                return Err(Error::BoundaryLeak { mass, time: t0 + done as f64 * self.step });
            }
        }
        Ok(())
    }

    /// Probability within the outer band of the grid.
    pub fn edge_mass(&self, values: &[Complex64]) -> f64 {
        self.band.iter().map(|&k| values[k].norm_sqr()).sum::<f64>() * self.config.cell_area()
    }
}

fn edge_band(config: &GridConfig, width: f64) -> Vec<usize> {
    let [dx, dy] = config.spacing();
    let bx = ((width / dx).ceil() as usize).clamp(1, config.nx / 2);
    let by = ((width / dy).ceil() as usize).clamp(1, config.ny / 2);
    let mut out = Vec::new();
    for ix in 0..config.nx {
        let outer_x = ix < bx || ix >= config.nx - bx;
        for iy in 0..config.ny {
            if outer_x || iy < by || iy >= config.ny - by {
                out.push(ix * config.ny + iy);
            }
        }
    }
    out
}

fn mul(values: &mut [Complex64], factors: &[Complex64]) {
    values.iter_mut().zip(factors).for_each(|(v, f)| *v *= f);
}

/// `exp(-iHt) ψ` on the grid.
pub fn split_step_propagate(psi: &GridWavefunction, potential: &PotentialField, t: f64) -> Result<GridWavefunction> {
    if psi.config != potential.config {
        return Err(Error::InvalidGrid("field and potential live on different grids".into()));
    }
    let mut stepper = SplitStep::new(potential)?;
    let n = stepper.steps_for(t)?;
    let mut values = psi.values.clone();
    stepper.advance_checked(&mut values, n, 0.0)?;
    Ok(GridWavefunction { config: psi.config, values })
}
