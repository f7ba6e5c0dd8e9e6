//! Site geometries: the five-site-cell ribbon and the tilted square lattice.
//!
//! Sites carry 1-based indices `j`. In the ribbon, cell `i` (1-based) owns the
//! central site `3i`; the outer sites `3i-2, 3i-1` sit on its left column and
//! `3i+1, 3i+2` on its right column, shared with cell `i+1`. Within a column
//! the lower index is the upper site. Lengths are in units of the oscillator
//! length σ.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteClass {
    Central,
    Edge,
    Corner,
}

impl SiteClass {
    /// Edge and corner sites are the ones an edge-like state may populate.
    pub fn is_boundary(self) -> bool {
        !matches!(self, SiteClass::Central)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RibbonSpec {
    pub n_cells: usize,
    pub spacing: f64,
}

impl RibbonSpec {
    pub fn new(n_cells: usize, spacing: f64) -> Self {
        RibbonSpec { n_cells, spacing }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 1 {
            return Err(Error::InvalidLattice("a ribbon needs at least one cell".into()));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    Ribbon { n_cells: usize, spacing: f64 },
    TiltedSquare { rows: usize, cols: usize, spacing: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    /// 1-based site index.
    pub index: usize,
    pub position: [f64; 2],
    pub class: SiteClass,
    /// 1-based owning cell. Ribbon outer sites shared by cells `i` and `i+1`
    /// report `i`.
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    geometry: Geometry,
    sites: Vec<Site>,
    /// Sorted unordered pairs `(j, k)` with `j < k`, 1-based.
    edges: Vec<(usize, usize)>,
}

impl Lattice {
    fn from_parts(geometry: Geometry, sites: Vec<Site>, mut edges: Vec<(usize, usize)>) -> Self {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Lattice { geometry, sites, edges }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn is_ribbon(&self) -> bool {
        matches!(self.geometry, Geometry::Ribbon { .. })
    }

    /// Number of cells for a ribbon, `None` otherwise.
    pub fn ribbon_cells(&self) -> Option<usize> {
        match self.geometry {
            Geometry::Ribbon { n_cells, .. } => Some(n_cells),
            _ => None,
        }
    }

    pub fn spacing(&self) -> f64 {
        match self.geometry {
            Geometry::Ribbon { spacing, .. } | Geometry::TiltedSquare { spacing, .. } => spacing,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, j: usize) -> Result<&Site> {
        if j == 0 || j > self.sites.len() {
            return Err(Error::SiteOutOfRange { site: j, n_sites: self.sites.len() });
        }
        Ok(&self.sites[j - 1])
    }

    pub fn position(&self, j: usize) -> [f64; 2] {
        self.sites[j - 1].position
    }

    pub fn class(&self, j: usize) -> SiteClass {
        self.sites[j - 1].class
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn central_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites.iter().filter(|s| s.class == SiteClass::Central).map(|s| s.index)
    }

    pub fn boundary_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites.iter().filter(|s| s.class.is_boundary()).map(|s| s.index)
    }

    pub fn corner_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.sites.iter().filter(|s| s.class == SiteClass::Corner).map(|s| s.index)
    }

    pub fn degree(&self, j: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == j || b == j).count()
    }

    pub fn neighbours(&self, j: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == j {
                    Some(b)
                } else if b == j {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Axis-aligned bounding box `([xmin, ymin], [xmax, ymax])` of the site centres.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for s in &self.sites {
            for a in 0..2 {
                lo[a] = lo[a].min(s.position[a]);
                hi[a] = hi[a].max(s.position[a]);
            }
        }
        (lo, hi)
    }

    /// JSON document `{sites: [{j, x, y, class, cell}], edges: [[j, k]]}`,
    /// coordinates rounded to 15 significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        let sites: Vec<_> = self
            .sites
            .iter()
            .map(|s| {
                serde_json::json!({
                    "j": s.index,
                    "x": round_sig(s.position[0], 15),
                    "y": round_sig(s.position[1], 15),
                    "class": s.class,
                    "cell": s.cell,
                })
            })
            .collect();
        let edges: Vec<[usize; 2]> = self.edges.iter().map(|&(a, b)| [a, b]).collect();
        serde_json::json!({ "sites": sites, "edges": edges })
    }
}

pub(crate) fn round_sig(value: f64, digits: usize) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    format!("{:.*e}", digits - 1, value).parse().unwrap_or(value)
}

/// Ribbon of `n` five-site cells. Cell `i` has its central site at
/// `((2i-1) d/√2, 0)` and its outer sites at the corners of the square of
/// half-diagonal `d` around it.
pub fn build_ribbon(spec: RibbonSpec) -> Result<Lattice> {
    spec.validate()?;
    let n = spec.n_cells;
    let d = spec.spacing;
    let half = d / SQRT_2;
    let n_sites = 3 * n + 2;

    let mut sites = Vec::with_capacity(n_sites);
    for j in 1..=n_sites {
        let (position, class, cell) = if j % 3 == 0 {
            let i = j / 3;
            ([(2 * i - 1) as f64 * half, 0.0], SiteClass::Central, i)
        } else {
            // column c = 0..=n holds sites 3c+1 (upper) and 3c+2 (lower)
            let column = (j - 1) / 3;
            let upper = (j - 1) % 3 == 0;
            let y = if upper { half } else { -half };
            let class = if column == 0 || column == n {
                SiteClass::Corner
            } else {
                SiteClass::Edge
            };
            ([2.0 * column as f64 * half, y], class, column.max(1))
        };
        sites.push(Site { index: j, position, class, cell });
    }

    let mut edges = Vec::with_capacity(4 * n);
    for i in 1..=n {
        let c = 3 * i;
        for outer in [c - 2, c - 1, c + 1, c + 2] {
            edges.push((outer, c));
        }
    }
    Ok(Lattice::from_parts(Geometry::Ribbon { n_cells: n, spacing: d }, sites, edges))
}

/// Square lattice of spacing `d` rotated by 45°, built from a `rows × cols`
/// array of outer sites (pitch `√2 d`) plus one site at the centre of every
/// plaquette. Sites are numbered column by column, each outer column top to
/// bottom followed by the plaquette centres to its right, so that
/// `build_tilted_square(2, n + 1, d)` reproduces `build_ribbon(n, d)`.
///
/// Outer sites on the perimeter are `Edge`, the four extreme ones `Corner`,
/// everything else is `Central`. Only nearest neighbours (distance `d`) are
/// coupled.
pub fn build_tilted_square(rows: usize, cols: usize, spacing: f64) -> Result<Lattice> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidLattice(format!(
            "tilted square needs rows, cols >= 2 (got {rows}x{cols})"
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidLattice(format!("spacing must be positive, got {spacing}")));
    }
    let pitch = SQRT_2 * spacing;
    let top = (rows - 1) as f64 * pitch / 2.0;
    let stride = 2 * rows - 1;
    let outer_index = |r: usize, c: usize| c * stride + r + 1;
    let centre_index = |r: usize, c: usize| c * stride + rows + r + 1;
    let cell_index = |r: usize, c: usize| c * (rows - 1) + r + 1;

    let mut sites = Vec::new();
    let mut edges = Vec::new();
    for c in 0..cols {
        for r in 0..rows {
            let on_row_edge = r == 0 || r == rows - 1;
            let on_col_edge = c == 0 || c == cols - 1;
            let class = match (on_row_edge, on_col_edge) {
                (true, true) => SiteClass::Corner,
                (true, false) | (false, true) => SiteClass::Edge,
                (false, false) => SiteClass::Central,
            };
            sites.push(Site {
                index: outer_index(r, c),
                position: [c as f64 * pitch, top - r as f64 * pitch],
                class,
                cell: cell_index(r.min(rows - 2), c.min(cols - 2)),
            });
        }
        if c + 1 < cols {
            for r in 0..rows - 1 {
                let j = centre_index(r, c);
                sites.push(Site {
                    index: j,
                    position: [(c as f64 + 0.5) * pitch, top - (r as f64 + 0.5) * pitch],
                    class: SiteClass::Central,
                    cell: cell_index(r, c),
                });
                for (dr, dc) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    edges.push((outer_index(r + dr, c + dc), j));
                }
            }
        }
    }
    debug_assert!(sites.iter().enumerate().all(|(k, s)| s.index == k + 1));
    Ok(Lattice::from_parts(Geometry::TiltedSquare { rows, cols, spacing }, sites, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    #[test]
    fn single_cell_ribbon() {
        let lat = build_ribbon(RibbonSpec::new(1, 5.0)).unwrap();
        assert_eq!(lat.n_sites(), 5);
        assert_eq!(lat.degree(3), 4);
        assert_eq!(lat.corner_sites().collect::<Vec<_>>(), vec![1, 2, 4, 5]);
    }

    #[test]
    fn hundred_cell_ribbon_counts() {
        let lat = build_ribbon(RibbonSpec::new(100, 5.0)).unwrap();
        assert_eq!(lat.n_sites(), 302);
        assert_eq!(lat.edges().len(), 400);
    }

    #[test]
    fn two_cell_sharing_and_corners() {
        let lat = build_ribbon(RibbonSpec::new(2, 5.0)).unwrap();
        assert_eq!(lat.corner_sites().collect::<Vec<_>>(), vec![1, 2, 7, 8]);
        for shared in [4, 5] {
            let mut nb = lat.neighbours(shared);
            nb.sort_unstable();
            assert_eq!(nb, vec![3, 6]);
        }
    }

    #[test]
    fn ribbon_edge_set_is_exact() {
        for n in 1..=12 {
            let lat = build_ribbon(RibbonSpec::new(n, 4.0)).unwrap();
            let mut expected = Vec::new();
            for i in 1..=n {
                for o in [3 * i - 2, 3 * i - 1, 3 * i + 1, 3 * i + 2] {
                    expected.push((o.min(3 * i), o.max(3 * i)));
                }
            }
            expected.sort_unstable();
            assert_eq!(lat.edges(), expected.as_slice());
            for &(a, b) in lat.edges() {
                let c = lat.class(a).is_boundary() as u8 + lat.class(b).is_boundary() as u8;
                assert_eq!(c, 1, "edge ({a},{b}) must join a central to an outer site");
                let len = dist(lat.position(a), lat.position(b));
                assert!((len - 4.0).abs() <= 1e-12 * 4.0);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_ribbon(RibbonSpec::new(0, 5.0)).is_err());
        assert!(build_ribbon(RibbonSpec::new(2, 0.0)).is_err());
        assert!(build_ribbon(RibbonSpec::new(2, -1.0)).is_err());
        assert!(build_tilted_square(1, 3, 5.0).is_err());
        assert!(build_tilted_square(3, 3, 0.0).is_err());
    }

    #[test]
    fn tilted_two_by_two_is_the_single_cell() {
        let t = build_tilted_square(2, 2, 5.0).unwrap();
        let r = build_ribbon(RibbonSpec::new(1, 5.0)).unwrap();
        assert_eq!(t.edges(), r.edges());
        for (a, b) in t.sites().iter().zip(r.sites()) {
            assert_eq!(a.class, b.class);
            assert!(dist(a.position, b.position) < 1e-12);
        }
    }

    #[test]
    fn tilted_interior_degree() {
        let t = build_tilted_square(3, 3, 5.0).unwrap();
        assert_eq!(t.n_sites(), 13);
        for j in t.central_sites() {
            assert_eq!(t.degree(j), 4, "site {j}");
        }
    }

    #[test]
    fn tilted_matches_brute_force_neighbour_search() {
        let d = 5.0;
        let t = build_tilted_square(3, 4, d).unwrap();
        let mut brute = Vec::new();
        for a in t.sites() {
            for b in t.sites() {
                if a.index < b.index && (dist(a.position, b.position) - d).abs() < 1e-9 {
                    brute.push((a.index, b.index));
                }
            }
        }
        brute.sort_unstable();
        assert_eq!(t.edges(), brute.as_slice());
        // perimeter of a 3x4 outer array: 2(3+4)-4 = 10 sites, 4 of them corners
        assert_eq!(t.boundary_sites().count(), 10);
        let corners: Vec<_> = t.corner_sites().collect();
        assert_eq!(corners.len(), 4);
        let (lo, hi) = t.bounding_box();
        for j in corners {
            let p = t.position(j);
            assert!((p[0] - lo[0]).abs() < 1e-12 || (p[0] - hi[0]).abs() < 1e-12);
            assert!((p[1] - lo[1]).abs() < 1e-12 || (p[1] - hi[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn json_layout() {
        let lat = build_ribbon(RibbonSpec::new(1, 5.0)).unwrap();
        let v = lat.to_json();
        assert_eq!(v["sites"].as_array().unwrap().len(), 5);
        assert_eq!(v["sites"][2]["class"], "central");
        assert_eq!(v["edges"][0], serde_json::json!([1, 3]));
        let x = v["sites"][2]["x"].as_f64().unwrap();
        assert_eq!(x, round_sig(5.0 / SQRT_2, 15));
    }
}
