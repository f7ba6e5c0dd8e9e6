//! Few-state tunnelling Hamiltonians for the l = 0 and l = 1 manifolds.
//!
//! Energies are in units of ħω and times in ω⁻¹ (ħ = ω = 1). The on-site
//! energy of each manifold is dropped: only tunnelling terms are kept.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manifold {
    /// Local ground states, one per site.
    L0,
    /// First excited states with winding m = ±1, two per site.
    L1,
}

impl Manifold {
    pub fn l(self) -> u8 {
        match self {
            Manifold::L0 => 0,
            Manifold::L1 => 1,
        }
    }

    pub fn states_per_site(self) -> usize {
        self.l() as usize + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Winding {
    Plus,
    Minus,
}

impl Winding {
    pub fn sign(self) -> i8 {
        match self {
            Winding::Plus => 1,
            Winding::Minus => -1,
        }
    }

    pub fn flipped(self) -> Winding {
        match self {
            Winding::Plus => Winding::Minus,
            Winding::Minus => Winding::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub site: usize,
    pub winding: Option<Winding>,
}

/// Canonically ordered basis of one manifold: ascending site index, then
/// winding `+` before `-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ManifoldBasis {
    manifold: Manifold,
    n_sites: usize,
}

impl ManifoldBasis {
    pub fn new(manifold: Manifold, n_sites: usize) -> Self {
        ManifoldBasis { manifold, n_sites }
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.n_sites * self.manifold.states_per_site()
    }

    pub fn is_empty(&self) -> bool {
        self.n_sites == 0
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        match self.manifold {
            Manifold::L0 => BasisLabel { site: index + 1, winding: None },
            Manifold::L1 => BasisLabel {
                site: index / 2 + 1,
                winding: Some(if index % 2 == 0 { Winding::Plus } else { Winding::Minus }),
            },
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.len()).map(move |i| self.label(i))
    }

    pub fn index(&self, site: usize, winding: Option<Winding>) -> Option<usize> {
        if site == 0 || site > self.n_sites {
            return None;
        }
        match (self.manifold, winding) {
            (Manifold::L0, None) => Some(site - 1),
            (Manifold::L1, Some(Winding::Plus)) => Some(2 * (site - 1)),
            (Manifold::L1, Some(Winding::Minus)) => Some(2 * (site - 1) + 1),
            _ => None,
        }
    }

    /// All basis positions that belong to `site`.
    pub fn site_indices(&self, site: usize) -> std::ops::Range<usize> {
        let k = self.manifold.states_per_site();
        (site - 1) * k..site * k
    }

    pub fn to_json(&self) -> serde_json::Value {
        let labels: Vec<_> = self
            .labels()
            .map(|l| serde_json::json!({ "site": l.site, "winding": l.winding.map(Winding::sign) }))
            .collect();
        serde_json::Value::Array(labels)
    }
}

/// Tunnelling rates in units of ω. `j` parameterises the l = 0 manifold;
/// `j1` (self-coupling), `j2` (same winding) and `j3` (winding changing)
/// parameterise l = 1. All rates are nonnegative magnitudes; the phases live
/// in the coupling blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub j: f64,
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
    pub phi0: f64,
}

pub const DEFAULT_PHI0: f64 = -FRAC_PI_4;

impl Default for CouplingSet {
    fn default() -> Self {
        CouplingSet { j: 0.0, j1: 0.0, j2: 0.0, j3: 0.0, phi0: DEFAULT_PHI0 }
    }
}

impl CouplingSet {
    pub fn l0(j: f64) -> Self {
        CouplingSet { j, ..Default::default() }
    }

    pub fn l1(j1: f64, j2: f64, j3: f64) -> Self {
        CouplingSet { j1, j2, j3, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("J", self.j), ("J1", self.j1), ("J2", self.j2), ("J3", self.j3)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidCoupling(format!("{name} must be a nonnegative rate, got {v}")));
            }
        }
        if !self.phi0.is_finite() {
            return Err(Error::InvalidCoupling("phi0 must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    basis: ManifoldBasis,
    matrix: DMatrix<Complex64>,
}

impl Hamiltonian {
    pub fn from_matrix(basis: ManifoldBasis, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::BasisMismatch { expected: basis.len(), found: matrix.nrows() });
        }
        Ok(Hamiltonian { basis, matrix })
    }

    pub fn basis(&self) -> ManifoldBasis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Largest entry modulus, the scale used by the relative tolerances.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `{basis: [...], entries: [[row, col, re, im]]}`: nonzero entries of the
    /// upper triangle, 1-based basis positions.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.dim();
        let mut entries = Vec::new();
        for r in 0..n {
            for c in r..n {
                let z = self.matrix[(r, c)];
                if z != ZERO {
                    entries.push(serde_json::json!([r + 1, c + 1, z.re, z.im]));
                }
            }
        }
        serde_json::json!({
            "manifold": self.basis.manifold().l(),
            "basis": self.basis.to_json(),
            "entries": entries,
        })
    }
}

/// `H0 = -J Σ (a†_outer a_central + h.c.)` over the lattice edges.
pub fn build_h0(lattice: &Lattice, j: f64) -> Result<Hamiltonian> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::InvalidCoupling(format!("J must be positive, got {j}")));
    }
    let basis = ManifoldBasis::new(Manifold::L0, lattice.n_sites());
    let mut m = DMatrix::from_element(basis.len(), basis.len(), ZERO);
    for &(a, b) in lattice.edges() {
        m[(a - 1, b - 1)] = Complex64::new(-j, 0.0);
        m[(b - 1, a - 1)] = Complex64::new(-j, 0.0);
    }
    Hamiltonian::from_matrix(basis, m)
}

/// The four 2×2 coupling blocks of the l = 1 ribbon at φ₀ = −π/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingBlocks {
    /// Bonds 3i-1 ↔ 3i and 3i ↔ 3i+1: winding-changing terms carry a π phase.
    pub u1: Matrix2<Complex64>,
    /// Bonds 3i-2 ↔ 3i and 3i ↔ 3i+2: all terms real.
    pub u2: Matrix2<Complex64>,
    /// Self-coupling at sites 1 and N-1.
    pub s1: Matrix2<Complex64>,
    /// Self-coupling at sites 2 and N.
    pub s2: Matrix2<Complex64>,
}

impl CouplingBlocks {
    pub fn new(c: &CouplingSet) -> Self {
        let r = |x: f64| Complex64::new(x, 0.0);
        // e^{±iπ} = -1 exactly
        let pi_phase = Complex64::new(-1.0, 0.0);
        CouplingBlocks {
            u1: Matrix2::new(r(c.j2), r(c.j3) * pi_phase.conj(), r(c.j3) * pi_phase, r(c.j2)),
            u2: Matrix2::new(r(c.j2), r(c.j3), r(c.j3), r(c.j2)),
            s1: Matrix2::new(ZERO, r(c.j1), r(c.j1), ZERO),
            s2: Matrix2::new(ZERO, r(c.j1) * pi_phase.conj(), r(c.j1) * pi_phase, ZERO),
        }
    }
}

/// l = 1 ribbon Hamiltonian. Each term `-U_{αα'} a†_{3i,α} a_{s,α'}` is added
/// with its Hermitian conjugate; the corner self-coupling blocks are Hermitian
/// already and enter once.
pub fn build_h1(lattice: &Lattice, c: &CouplingSet) -> Result<Hamiltonian> {
    c.validate()?;
    let n = lattice
        .ribbon_cells()
        .ok_or_else(|| Error::Unsupported("the l = 1 Hamiltonian is defined for ribbons only".into()))?;
    if (c.phi0 - DEFAULT_PHI0).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "only phi0 = -pi/4 is supported (got {})",
            c.phi0
        )));
    }
    let blocks = CouplingBlocks::new(c);
    let basis = ManifoldBasis::new(Manifold::L1, lattice.n_sites());
    let mut m = DMatrix::from_element(basis.len(), basis.len(), ZERO);
    let mut add = |row_site: usize, col_site: usize, block: &Matrix2<Complex64>| {
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * (row_site - 1) + a, 2 * (col_site - 1) + b)] -= block[(a, b)];
            }
        }
    };
    for i in 1..=n {
        let central = 3 * i;
        for (outer, block) in [
            (central - 1, &blocks.u1),
            (central + 1, &blocks.u1),
            (central - 2, &blocks.u2),
            (central + 2, &blocks.u2),
        ] {
            add(central, outer, block);
            add(outer, central, &block.adjoint());
        }
    }
    let n_sites = lattice.n_sites();
    for site in [1, n_sites - 1] {
        add(site, site, &blocks.s1);
    }
    for site in [2, n_sites] {
        add(site, site, &blocks.s2);
    }
    Hamiltonian::from_matrix(basis, m)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
}

pub fn spectrum(h: &Hamiltonian) -> Result<Spectrum> {
    hermitian_eigen(h.matrix())
}

pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<Spectrum> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Spectrum { values: Vec::new(), vectors: DMatrix::zeros(0, 0) });
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100 * n.max(10))
        .ok_or(Error::EigenNoConvergence(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum { values, vectors })
}
