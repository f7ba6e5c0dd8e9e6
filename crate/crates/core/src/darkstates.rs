//! Edge-like dark states: the analytic families for both manifolds, the
//! phase-parameterised trial states, and a null-space search for dark states
//! on arbitrary lattices.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fewstate::{Hamiltonian, Manifold, ManifoldBasis, Winding};
use crate::lattice::Lattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: ManifoldBasis,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails on the null vector.
    pub fn normalized(basis: ManifoldBasis, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::BasisMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NullState("cannot normalize a zero vector".into()));
        }
        Ok(StateVector { basis, amplitudes: amplitudes / Complex64::new(norm, 0.0) })
    }

    /// Wraps amplitudes that are already normalized to 1e-12.
    pub fn from_normalized(basis: ManifoldBasis, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::BasisMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("state norm is {norm}, expected 1")));
        }
        Ok(StateVector { basis, amplitudes })
    }

    /// `|site⟩` (l = 0) or `|site, winding⟩` (l = 1).
    pub fn basis_state(basis: ManifoldBasis, site: usize, winding: Option<Winding>) -> Result<Self> {
        let k = basis
            .index(site, winding)
            .ok_or(Error::SiteOutOfRange { site, n_sites: basis.n_sites() })?;
        let mut a = DVector::from_element(basis.len(), ZERO);
        a[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { basis, amplitudes: a })
    }

    pub(crate) fn from_parts_unchecked(basis: ManifoldBasis, amplitudes: DVector<Complex64>) -> Self {
        StateVector { basis, amplitudes }
    }

    pub fn basis(&self) -> ManifoldBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Population of `site`, summed over its winding states.
    pub fn site_population(&self, site: usize) -> f64 {
        self.basis.site_indices(site).map(|k| self.amplitudes[k].norm_sqr()).sum()
    }

    pub fn population_on(&self, sites: impl IntoIterator<Item = usize>) -> f64 {
        sites.into_iter().map(|s| self.site_population(s)).sum()
    }

    /// Largest amplitude modulus over the given sites.
    pub fn max_amplitude_on(&self, sites: impl IntoIterator<Item = usize>) -> f64 {
        sites
            .into_iter()
            .flat_map(|s| self.basis.site_indices(s))
            .fold(0.0_f64, |m, k| m.max(self.amplitudes[k].norm()))
    }

    /// Multiplies by a global phase so that the first nonzero amplitude is
    /// real and positive.
    pub fn with_canonical_phase(mut self) -> Self {
        if let Some(first) = self.amplitudes.iter().find(|z| z.norm() > 0.0) {
            let phase = first.conj() / first.norm();
            self.amplitudes *= phase;
        }
        self
    }

    /// `|⟨self|other⟩|` equals 1 within `tol`.
    pub fn equals_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.basis == other.basis && (1.0 - self.inner(other).norm()).abs() <= tol
    }

    /// Swaps the two winding components on every site (l = 1 only).
    pub fn exchange_windings(&self) -> Result<StateVector> {
        if self.basis.manifold() != Manifold::L1 {
            return Err(Error::Unsupported("winding exchange needs the l = 1 manifold".into()));
        }
        let a = DVector::from_fn(self.amplitudes.len(), |k, _| self.amplitudes[k ^ 1]);
        Ok(StateVector { basis: self.basis, amplitudes: a })
    }

    /// CSV with columns `site,winding,re,im` (winding 0 for l = 0).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("site,winding,re,im\n");
        for (k, label) in self.basis.labels().enumerate() {
            let z = self.amplitudes[k];
            let w = label.winding.map_or(0, Winding::sign);
            let _ = writeln!(out, "{},{},{},{}", label.site, w, fmt12(z.re), fmt12(z.im));
        }
        out
    }
}

/// Fixed 12-significant-digit rendering used by all CSV outputs.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.11e}")
}

/// `B_k^j(n)`: the `j`-th binary digit, counted from the left, of `k`
/// written with `n` digits.
pub fn binary_digit(k: u64, j: usize, n: usize) -> Result<u8> {
    if j < 1 || j > n {
        return Err(Error::OutOfRange(format!("digit position {j} outside 1..={n}")));
    }
    if n < 64 && k >> n != 0 {
        return Err(Error::OutOfRange(format!("{k} does not fit in {n} binary digits")));
    }
    let shift = n - j;
    Ok(if shift >= 64 { 0 } else { ((k >> shift) & 1) as u8 })
}

/// Members of the l = 0 family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElsL0 {
    /// `|D_k⟩`, k = 0..2ⁿ-1: a π phase inside every column, with the sign of
    /// column j set by the binary digit `B_k^j(n)`.
    Binary(u64),
    /// `|D_{2ⁿ}⟩`: equal phase inside each column, alternating sign between
    /// columns.
    Alternating,
}

fn l0_norm(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 + 1.0)).sqrt()
}

pub fn els_l0(n: usize, which: ElsL0) -> Result<StateVector> {
    if n < 1 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let basis = ManifoldBasis::new(Manifold::L0, 3 * n + 2);
    let a = l0_norm(n);
    let mut amps = DVector::from_element(basis.len(), ZERO);
    for column in 0..=n {
        let (upper, lower) = match which {
            ElsL0::Binary(k) => {
                let sign = if column == 0 || binary_digit(k, column, n)? == 0 { 1.0 } else { -1.0 };
                (sign, -sign)
            }
            ElsL0::Alternating => {
                let sign = if column % 2 == 0 { 1.0 } else { -1.0 };
                (sign, sign)
            }
        };
        amps[3 * column] = Complex64::new(a * upper, 0.0);
        amps[3 * column + 1] = Complex64::new(a * lower, 0.0);
    }
    Ok(StateVector::from_parts_unchecked(basis, amps))
}

/// The full l = 0 family `|D_0⟩ … |D_{2ⁿ}⟩` (2ⁿ + 1 states).
pub fn enumerate_els_l0(n: usize) -> Result<Vec<StateVector>> {
    if n < 1 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    if n > 24 {
        return Err(Error::OutOfRange(format!("2^{n} + 1 states is too many to enumerate")));
    }
    let mut out: Vec<_> = (0..1u64 << n).map(|k| els_l0(n, ElsL0::Binary(k))).collect::<Result<_>>()?;
    out.push(els_l0(n, ElsL0::Alternating)?);
    Ok(out)
}

/// The two chiral l = 1 edge states: variant 1 puts `|+⟩ + |−⟩` on every
/// occupied site, variant 2 puts `|+⟩ − |−⟩`; columns 3j+2 carry an extra π.
pub fn els_l1(n: usize, variant: u8) -> Result<StateVector> {
    if n < 1 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let minus_sign = match variant {
        1 => 1.0,
        2 => -1.0,
        v => return Err(Error::OutOfRange(format!("l = 1 edge state variant must be 1 or 2, got {v}"))),
    };
    let basis = ManifoldBasis::new(Manifold::L1, 3 * n + 2);
    let a = 1.0 / (4.0 * (n as f64 + 1.0)).sqrt();
    let mut amps = DVector::from_element(basis.len(), ZERO);
    for column in 0..=n {
        for (site, sign) in [(3 * column + 1, 1.0), (3 * column + 2, -1.0)] {
            amps[2 * (site - 1)] = Complex64::new(sign * a, 0.0);
            amps[2 * (site - 1) + 1] = Complex64::new(sign * minus_sign * a, 0.0);
        }
    }
    Ok(StateVector::from_parts_unchecked(basis, amps))
}

/// An l = 1 edge state together with whether it is an exact eigenstate of the
/// model it is used with. The chiral states are exact only without corner
/// self-coupling.
#[derive(Debug, Clone)]
pub struct FlaggedEdgeState {
    pub state: StateVector,
    pub approximate: bool,
}

pub fn els_l1_for(n: usize, variant: u8, j1: f64) -> Result<FlaggedEdgeState> {
    Ok(FlaggedEdgeState { state: els_l1(n, variant)?, approximate: j1 != 0.0 })
}

/// `(|3j+1⟩ + e^{iφ}|3j+2⟩)` summed over all columns, normalized.
pub fn trial_state_l0(n: usize, phi: f64) -> Result<StateVector> {
    if n < 1 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let basis = ManifoldBasis::new(Manifold::L0, 3 * n + 2);
    let a = l0_norm(n);
    let mut amps = DVector::from_element(basis.len(), ZERO);
    let phase = Complex64::from_polar(a, phi);
    for column in 0..=n {
        amps[3 * column] = Complex64::new(a, 0.0);
        amps[3 * column + 1] = phase;
    }
    Ok(StateVector::from_parts_unchecked(basis, amps))
}

/// Both windings of sites 3j+1 with weight 1 and of sites 3j+2 with `e^{iφ}`,
/// normalized.
pub fn trial_state_l1(n: usize, phi: f64) -> Result<StateVector> {
    if n < 1 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    let basis = ManifoldBasis::new(Manifold::L1, 3 * n + 2);
    let a = 1.0 / (4.0 * (n as f64 + 1.0)).sqrt();
    let mut amps = DVector::from_element(basis.len(), ZERO);
    let phase = Complex64::from_polar(a, phi);
    for column in 0..=n {
        let (up, low) = (3 * column, 3 * column + 1);
        amps[2 * up] = Complex64::new(a, 0.0);
        amps[2 * up + 1] = Complex64::new(a, 0.0);
        amps[2 * low] = phase;
        amps[2 * low + 1] = phase;
    }
    Ok(StateVector::from_parts_unchecked(basis, amps))
}

/// Orientation, modulo π, of the nodal line of the local l = 1 wavefunction
/// `a₊ e^{i(φ-φ₀)} + a₋ e^{-i(φ-φ₀)}` at `site`, measured from the x axis.
/// Only defined when `|a₊| = |a₋| ≠ 0`.
pub fn nodal_line_angle(psi: &StateVector, site: usize, phi0: f64) -> Option<f64> {
    if psi.basis().manifold() != Manifold::L1 {
        return None;
    }
    let r = psi.basis().site_indices(site);
    let (ap, am) = (psi.amplitudes()[r.start], psi.amplitudes()[r.start + 1]);
    if ap.norm() == 0.0 || (ap.norm() - am.norm()).abs() > 1e-12 * ap.norm() {
        return None;
    }
    // zero when e^{2i(φ-φ₀)} = -a₋/a₊
    let theta = (-am / ap).arg() / 2.0 + phi0;
    Some(theta.rem_euclid(2.0 * FRAC_PI_2))
}

/// Orthonormal basis of the states supported on boundary (edge and corner)
/// sites that `H` annihilates.
///
/// The subspace is the null space of the column block `H[:, boundary]`. For
/// lattices without couplings between boundary sites only the central rows of
/// that block are nonzero. Singular values below `1e-10 · σ_max` count as
/// zero.
pub fn dark_edge_subspace(h: &Hamiltonian, lattice: &Lattice) -> Result<Vec<StateVector>> {
    let basis = h.basis();
    if basis.n_sites() != lattice.n_sites() {
        return Err(Error::BasisMismatch { expected: lattice.n_sites(), found: basis.n_sites() });
    }
    let columns: Vec<usize> = lattice.boundary_sites().flat_map(|s| basis.site_indices(s)).collect();
    if columns.is_empty() {
        return Ok(Vec::new());
    }
    let block = DMatrix::from_fn(h.dim(), columns.len(), |r, c| h.matrix()[(r, columns[c])]);
    let null = null_space(&block, 1e-10);

    let scale = h.max_abs();
    let mut states = Vec::with_capacity(null.ncols());
    for v in null.column_iter() {
        let mut amps = DVector::from_element(basis.len(), ZERO);
        for (c, &k) in columns.iter().enumerate() {
            amps[k] = v[c];
        }
        let psi = StateVector::normalized(basis, amps)?.with_canonical_phase();
        let res = (h.matrix() * psi.amplitudes()).norm();
        if res > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NoConvergence(format!(
                "null-space vector leaves residual {res:.3e}"
            )));
        }
        states.push(psi);
    }
    Ok(states)
}

/// Columns spanning the right null space of `m`, from an SVD with relative
/// singular-value cut `rel_tol`.
pub(crate) fn null_space(m: &DMatrix<Complex64>, rel_tol: f64) -> DMatrix<Complex64> {
    let (rows, cols) = m.shape();
    // pad so that the SVD returns a full right basis
    let padded = if rows < cols {
        let mut p = DMatrix::from_element(cols, cols, ZERO);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * sigma_max;
    let keep: Vec<usize> = (0..cols)
        .filter(|&k| sigma_max == 0.0 || svd.singular_values[k] <= cut)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| v_t[(keep[c], r)].conj())
}

/// Residual of projecting `psi` onto the span of the orthonormal `basis`.
pub fn projection_residual(psi: &StateVector, basis: &[StateVector]) -> f64 {
    let mut rest = psi.amplitudes().clone();
    for b in basis {
        let c = b.inner(psi);
        rest -= b.amplitudes() * c;
    }
    rest.norm()
}
