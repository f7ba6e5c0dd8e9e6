//! 2D FFT over the `[ix][iy]` layout. The forward transform leaves the
//! spectrum transposed (`[iy][ix]`), which is where k-space factors live.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::GridConfig;

const BLOCK: usize = 32;

#[derive(Clone)]
pub(crate) struct Spectral {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(config: &GridConfig) -> Self {
        let mut planner = FftPlanner::new();
        let (nx, ny) = (config.nx, config.ny);
        let fwd_x = planner.plan_fft_forward(nx);
        let fwd_y = planner.plan_fft_forward(ny);
        let inv_x = planner.plan_fft_inverse(nx);
        let inv_y = planner.plan_fft_inverse(ny);
        let scratch_len = [&fwd_x, &fwd_y, &inv_x, &inv_y].iter().map(|f| f.get_inplace_scratch_len()).max().unwrap_or(0);
        Spectral {
            nx,
            ny,
            fwd_x,
            fwd_y,
            inv_x,
            inv_y,
            buf: vec![Complex64::new(0.0, 0.0); nx * ny],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// `[ix][iy]` field → transposed unnormalized spectrum, in place.
    pub fn forward(&mut self, data: &mut Vec<Complex64>) {
        run(&self.fwd_y, data, &mut self.scratch);
        transpose(data, &mut self.buf, self.nx, self.ny);
        run(&self.fwd_x, &mut self.buf, &mut self.scratch);
        std::mem::swap(data, &mut self.buf);
    }

    /// Inverse of [`Spectral::forward`], including the 1/(nx·ny) factor.
    pub fn inverse(&mut self, data: &mut Vec<Complex64>) {
        run(&self.inv_x, data, &mut self.scratch);
        transpose(data, &mut self.buf, self.ny, self.nx);
        run(&self.inv_y, &mut self.buf, &mut self.scratch);
        std::mem::swap(data, &mut self.buf);
        let s = 1.0 / (self.nx * self.ny) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

#[cfg(feature = "parallel")]
fn run(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
    use rayon::prelude::*;
    let n = fft.len();
    if rayon::current_num_threads() <= 1 {
        fft.process_with_scratch(data, scratch);
        return;
    }
    let len = scratch.len();
    // row-independent, so the result does not depend on the chunking
    data.par_chunks_mut(n * 16).for_each_init(
        || vec![Complex64::new(0.0, 0.0); len],
        |s, chunk| fft.process_with_scratch(chunk, s),
    );
}

#[cfg(not(feature = "parallel"))]
fn run(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
    fft.process_with_scratch(data, scratch);
}

/// `src` is `rows × cols` row-major; `dst` becomes `cols × rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r0 in (0..rows).step_by(BLOCK) {
        for c0 in (0..cols).step_by(BLOCK) {
            for r in r0..(r0 + BLOCK).min(rows) {
                for c in c0..(c0 + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Angular wavenumbers in FFT order for `n` points over period `length`.
pub(crate) fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let dk = 2.0 * PI / length;
    (0..n).map(|i| if i < n / 2 { i as f64 } else { i as f64 - n as f64 } * dk).collect()
}

/// Wavenumbers for first derivatives: the Nyquist mode is dropped.
pub(crate) fn derivative_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let mut k = wavenumbers(n, length);
    k[n / 2] = 0.0;
    k
}

/// `½|k|²` in the transposed spectral layout.
pub(crate) fn kinetic_symbol(config: &GridConfig) -> Vec<f64> {
    let kx = wavenumbers(config.nx, 2.0 * config.extent[0]);
    let ky = wavenumbers(config.ny, 2.0 * config.extent[1]);
    ky.iter().flat_map(|&b| kx.iter().map(move |&a| 0.5 * (a * a + b * b))).collect()
}
