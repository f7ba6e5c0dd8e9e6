//! Local trap eigenstates: radial profiles from imaginary-time relaxation,
//! dressed with the angular factor and sampled on the grid.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::grid::{GridConfig, GridWavefunction};
use crate::error::{Error, Result};
use crate::fewstate::Winding;
use crate::lattice::Lattice;

/// Largest modulus a prepared state may keep on the grid edge.
pub const EDGE_TOLERANCE: f64 = 1e-8;

const RADIAL_STEP: f64 = 0.005;
const RADIAL_MAX: f64 = 12.0;
const RADIAL_TOL: f64 = 1e-10;
const RELAX_DTAU: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalOrbital {
    /// l = 0 ground state.
    S,
    /// l = 1 state with winding `e^{±i(φ-φ₀)}`.
    P(Winding),
}

impl LocalOrbital {
    pub fn from_lm(l: u8, m: i8) -> Result<Self> {
        match (l, m) {
            (0, 0) => Ok(LocalOrbital::S),
            (1, 1) => Ok(LocalOrbital::P(Winding::Plus)),
            (1, -1) => Ok(LocalOrbital::P(Winding::Minus)),
            _ => Err(Error::OutOfRange(format!("no local state with l = {l}, m = {m}"))),
        }
    }

    pub fn l(self) -> u8 {
        match self {
            LocalOrbital::S => 0,
            LocalOrbital::P(_) => 1,
        }
    }

    pub fn m(self) -> i8 {
        match self {
            LocalOrbital::S => 0,
            LocalOrbital::P(w) => w.sign(),
        }
    }
}

/// `u(r)` on the cell-centred nodes `r_i = (i + ½)h`, normalized so that
/// `2π ∫ u² r dr = 1`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub l: u8,
    pub step: f64,
    pub values: Vec<f64>,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
}

struct Tridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
}

impl Tridiagonal {
    /// Radial Hamiltonian `-(1/2r)(r u')' + (l²/2r² + r²/2) u`, Dirichlet at
    /// the outer end.
    fn radial(l: u8, h: f64, m: usize) -> Self {
        let l2 = f64::from(l * l);
        let mut t = Tridiagonal { sub: vec![0.0; m], diag: vec![0.0; m], sup: vec![0.0; m] };
        for i in 0..m {
            let r = (i as f64 + 0.5) * h;
            let (rm, rp) = (i as f64 * h, (i as f64 + 1.0) * h);
            let w = 1.0 / (2.0 * r * h * h);
            t.sub[i] = -rm * w;
            t.sup[i] = -rp * w;
            t.diag[i] = (rm + rp) * w + l2 / (2.0 * r * r) + 0.5 * r * r;
        }
        t
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        (0..m)
            .map(|i| {
                let mut v = self.diag[i] * u[i];
                if i > 0 {
                    v += self.sub[i] * u[i - 1];
                }
                if i + 1 < m {
                    v += self.sup[i] * u[i + 1];
                }
                v
            })
            .collect()
    }

    /// Solves `(I + s·H) x = b` (Thomas algorithm).
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let m = b.len();
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let diag = |i: usize| 1.0 + s * self.diag[i];
        c[0] = s * self.sup[0] / diag(0);
        d[0] = b[0] / diag(0);
        for i in 1..m {
            let den = diag(i) - s * self.sub[i] * c[i - 1];
            c[i] = s * self.sup[i] / den;
            d[i] = (b[i] - s * self.sub[i] * d[i - 1]) / den;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }
}

fn weighted_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    a.iter().zip(b).enumerate().map(|(i, (x, y))| x * y * (i as f64 + 0.5) * h).sum::<f64>() * 2.0 * PI * h
}

/// Backward-Euler imaginary-time relaxation of the radial equation.
pub fn relax_radial(l: u8, step: f64, r_max: f64, tol: f64) -> Result<RadialProfile> {
    if l > 1 {
        return Err(Error::Unsupported(format!("radial relaxation for l = {l}")));
    }
    let m = (r_max / step).round() as usize;
    if m < 16 {
        return Err(Error::InvalidGrid("radial grid too short".into()));
    }
    let h_op = Tridiagonal::radial(l, step, m);
    let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * step).collect();
    // deliberately off from the answer so the relaxation has work to do
    let mut u: Vec<f64> = nodes.iter().map(|&r| r.powi(i32::from(l)) * (-r * r / 3.0).exp() * (1.0 + 0.2 * r)).collect();
    for it in 1..=500 {
        u = h_op.solve_shifted(RELAX_DTAU, &u);
        let n = weighted_dot(&u, &u, step).sqrt();
        u.iter_mut().for_each(|v| *v /= n);
        let hu = h_op.apply(&u);
        let e = weighted_dot(&u, &hu, step);
        let r: Vec<f64> = hu.iter().zip(&u).map(|(a, b)| a - e * b).collect();
        let residual = weighted_dot(&r, &r, step).sqrt();
        if residual <= tol {
            return Ok(RadialProfile { l, step, values: u, energy: e, residual, iterations: it });
        }
    }
    Err(Error::NoConvergence(format!("radial l = {l} relaxation")))
}

fn cached(l: u8) -> Result<&'static RadialProfile> {
    static S: OnceLock<std::result::Result<RadialProfile, String>> = OnceLock::new();
    static P: OnceLock<std::result::Result<RadialProfile, String>> = OnceLock::new();
    let cell = if l == 0 { &S } else { &P };
    cell.get_or_init(|| relax_radial(l, RADIAL_STEP, RADIAL_MAX, RADIAL_TOL).map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::NoConvergence(e.clone()))
}

/// The cached profile used for grid states.
pub fn radial_profile(l: u8) -> Result<&'static RadialProfile> {
    if l > 1 {
        return Err(Error::Unsupported(format!("l = {l}")));
    }
    cached(l)
}

impl RadialProfile {
    /// Four-point Lagrange interpolation, with the nodes mirrored through
    /// r = 0 using the parity `(-1)^l`.
    pub fn eval(&self, r: f64) -> f64 {
        let m = self.values.len() as isize;
        let parity = if self.l % 2 == 0 { 1.0 } else { -1.0 };
        let node = |i: isize| -> (f64, f64) {
            let r_i = (i as f64 + 0.5) * self.step;
            if i < 0 {
                let j = -1 - i;
                (r_i, parity * self.values[j as usize])
            } else if i >= m {
                (r_i, 0.0)
            } else {
                (r_i, self.values[i as usize])
            }
        };
        let s = r / self.step - 0.5;
        let i0 = s.floor() as isize;
        if i0 >= m {
            return 0.0;
        }
        let pts = [node(i0 - 1), node(i0), node(i0 + 1), node(i0 + 2)];
        let mut out = 0.0;
        for (a, &(ra, ua)) in pts.iter().enumerate() {
            let mut w = 1.0;
            for (b, &(rb, _)) in pts.iter().enumerate() {
                if a != b {
                    w *= (r - rb) / (ra - rb);
                }
            }
            out += w * ua;
        }
        out
    }
}

/// Local state centred at `center`, normalized on the grid.
pub fn local_state_at(
    center: [f64; 2],
    orbital: LocalOrbital,
    phi0: f64,
    config: &GridConfig,
) -> Result<GridWavefunction> {
    config.validate()?;
    let profile = radial_profile(orbital.l())?;
    let m = f64::from(orbital.m());
    let mut psi = GridWavefunction::from_fn(*config, |x, y| {
        let (dx, dy) = (x - center[0], y - center[1]);
        let r = dx.hypot(dy);
        let u = profile.eval(r);
        if m == 0.0 {
            Complex64::new(u, 0.0)
        } else {
            Complex64::from_polar(u, m * (dy.atan2(dx) - phi0))
        }
    });
    psi.normalize()?;
    let edge = psi.boundary_max();
    if edge > EDGE_TOLERANCE {
        return Err(Error::InvalidGrid(format!("local state reaches the grid edge (|psi| = {edge:.2e})")));
    }
    Ok(psi)
}

/// Local state of `lattice` site `site` (1-based).
pub fn prepare_local_state(
    lattice: &Lattice,
    site: usize,
    orbital: LocalOrbital,
    phi0: f64,
    config: &GridConfig,
) -> Result<GridWavefunction> {
    local_state_at(lattice.site(site)?.position, orbital, phi0, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_profiles_match_oscillator() {
        let s = radial_profile(0).unwrap();
        let p = radial_profile(1).unwrap();
        assert!(s.residual <= RADIAL_TOL && p.residual <= RADIAL_TOL);
        assert!((s.energy - 1.0).abs() < 1e-4, "{}", s.energy);
        assert!((p.energy - 2.0).abs() < 1e-4, "{}", p.energy);
        // analytic: e^{-r²/2}/√π and r e^{-r²/2}/√π
        for r in [0.0_f64, 0.013, 0.5, 1.0, 2.2, 4.0] {
            let g = (-r * r / 2.0).exp() / PI.sqrt();
            assert!((s.eval(r) - g).abs() < 1e-4, "r = {r}");
            assert!((p.eval(r) - r * g).abs() < 1e-4, "r = {r}");
        }
        assert_eq!(s.eval(20.0), 0.0);
    }

    #[test]
    fn orbital_labels() {
        assert_eq!(LocalOrbital::from_lm(0, 0).unwrap(), LocalOrbital::S);
        assert_eq!(LocalOrbital::from_lm(1, -1).unwrap().m(), -1);
        assert!(LocalOrbital::from_lm(0, 1).is_err());
        assert!(LocalOrbital::from_lm(1, 0).is_err());
        assert!(LocalOrbital::from_lm(2, 1).is_err());
    }

    #[test]
    fn small_grids_are_rejected() {
        let c = GridConfig::new(128, 128, [3.0, 3.0], 0.01).unwrap();
        assert!(local_state_at([0.0, 0.0], LocalOrbital::S, 0.0, &c).is_err());
    }
}
