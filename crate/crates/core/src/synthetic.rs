//! The l = 1 ribbon viewed as a two-layer graph: one layer per winding,
//! J2 links inside a layer, J3 links across layers, J1 rungs at the corners.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fewstate::{Hamiltonian, Manifold, Winding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    IntraLayer,
    InterLayer,
    CornerRung,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerNode {
    pub site: usize,
    pub layer: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerLink {
    pub source: usize,
    pub target: usize,
    pub kind: LinkKind,
    /// Matrix element `H[source, target]` as `[re, im]`.
    pub weight: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerGraph {
    pub nodes: Vec<LayerNode>,
    pub links: Vec<LayerLink>,
}

impl LayerGraph {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }

    pub fn count(&self, kind: LinkKind) -> usize {
        self.links.iter().filter(|l| l.kind == kind).count()
    }
}

fn layer(w: Option<Winding>) -> i8 {
    w.map_or(0, Winding::sign)
}

/// Nodes are indexed like the Hamiltonian's basis (0-based).
pub fn layer_graph(h: &Hamiltonian) -> Result<LayerGraph> {
    let basis = h.basis();
    if basis.manifold() != Manifold::L1 {
        return Err(Error::Unsupported("the layer graph needs the l = 1 manifold".into()));
    }
    let nodes = basis.labels().map(|l| LayerNode { site: l.site, layer: layer(l.winding) }).collect();
    let m = h.matrix();
    let mut links = Vec::new();
    for r in 0..m.nrows() {
        for c in r + 1..m.ncols() {
            let z = m[(r, c)];
            if z.norm() == 0.0 {
                continue;
            }
            let (a, b) = (basis.label(r), basis.label(c));
            let kind = match (a.site == b.site, a.winding == b.winding) {
                (true, _) => LinkKind::CornerRung,
                (false, true) => LinkKind::IntraLayer,
                (false, false) => LinkKind::InterLayer,
            };
            links.push(LayerLink { source: r, target: c, kind, weight: [z.re, z.im] });
        }
    }
    Ok(LayerGraph { nodes, links })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fewstate::{build_h0, build_h1, CouplingSet};
    use crate::lattice::{build_ribbon, RibbonSpec};

    #[test]
    fn link_census() {
        let n = 3;
        let lat = build_ribbon(RibbonSpec::new(n, 6.0)).unwrap();
        let h = build_h1(&lat, &CouplingSet::l1(0.1, 1.0, 0.7)).unwrap();
        let g = layer_graph(&h).unwrap();
        assert_eq!(g.nodes.len(), 2 * lat.n_sites());
        let bonds = lat.edges().len();
        assert_eq!(g.count(LinkKind::IntraLayer), 2 * bonds);
        assert_eq!(g.count(LinkKind::InterLayer), 2 * bonds);
        assert_eq!(g.count(LinkKind::CornerRung), 4);
        for l in g.links.iter().filter(|l| l.kind == LinkKind::IntraLayer) {
            assert!((l.weight[0] + 1.0).abs() < 1e-15);
        }
        let json = g.to_json();
        assert_eq!(json["links"][0]["kind"].as_str().is_some(), true);
    }

    #[test]
    fn rungs_vanish_without_corner_coupling() {
        let lat = build_ribbon(RibbonSpec::new(2, 6.0)).unwrap();
        let h = build_h1(&lat, &CouplingSet::l1(0.0, 1.0, 0.5)).unwrap();
        assert_eq!(layer_graph(&h).unwrap().count(LinkKind::CornerRung), 0);
        assert!(layer_graph(&build_h0(&lat, 1.0).unwrap()).is_err());
    }
}
