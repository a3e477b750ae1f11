//! Unit-cell geometry.
//!
//! A cell is a 12-edge patch anchored at `(stride * I, stride * J)`. Edges
//! are given relative to the anchor; translating by the stride produces the
//! overlapping tiling. Slot `k` of a cell is the `k`-th entry of
//! [`CellGeometry::edges`].

mod basis;
mod tiling;

pub use basis::{derive_cell_basis, CellBasis};
pub use tiling::{
    renormalized_qubit_map, validate_tiling, CoarseSources, LevelLayout, RenormalizedMap,
    TilingReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toric::Orientation;

pub const CELL_QUBITS: usize = 12;
pub const CELL_STABILIZERS: usize = 6;
pub const SHARED_SLOTS: usize = 8;
pub const OWN_EDGES: usize = 4;

/// Edge position relative to a cell anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelEdge {
    pub orientation: Orientation,
    pub dx: i64,
    pub dy: i64,
}

impl RelEdge {
    pub const fn h(dx: i64, dy: i64) -> Self {
        Self {
            orientation: Orientation::Horizontal,
            dx,
            dy,
        }
    }

    pub const fn v(dx: i64, dy: i64) -> Self {
        Self {
            orientation: Orientation::Vertical,
            dx,
            dy,
        }
    }

    pub fn shifted(self, dx: i64, dy: i64) -> Self {
        Self {
            dx: self.dx + dx,
            dy: self.dy + dy,
            ..self
        }
    }
}

/// Support of a cell logical pair: X on `x`, Z on `z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalSupport {
    pub x: Vec<RelEdge>,
    pub z: Vec<RelEdge>,
}

/// A shared slot and the neighbor that holds the same physical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedSlot {
    pub slot: usize,
    pub neighbor: (i64, i64),
    pub neighbor_slot: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub stride: i64,
    pub edges: Vec<RelEdge>,
    /// Enclosed sites, in stabilizer order `A1, A2, A3`.
    pub sites: Vec<(i64, i64)>,
    /// Enclosed plaquettes, in stabilizer order `B1, B2, B3`.
    pub plaquettes: Vec<(i64, i64)>,
    /// Shared edges owned by this cell, one per neighbor.
    pub own_edges: Vec<RelEdge>,
    pub logicals: Vec<LogicalSupport>,
    /// Coarse edge, relative to the coarse coordinate of the cell, that
    /// logical `j` becomes after renormalization.
    pub logical_targets: Vec<RelEdge>,
    /// Lower-left corner of the 2x2 block of fine plaquettes forming the
    /// coarse plaquette at the cell's coarse coordinate, relative to its anchor.
    pub coarse_plaquette_offset: (i64, i64),
    /// Same for fine sites forming the coarse site.
    pub coarse_site_offset: (i64, i64),
}

fn site_rel_edges(x: i64, y: i64) -> [RelEdge; 4] {
    [
        RelEdge::h(x, y),
        RelEdge::h(x - 1, y),
        RelEdge::v(x, y),
        RelEdge::v(x, y - 1),
    ]
}

fn plaquette_rel_edges(x: i64, y: i64) -> [RelEdge; 4] {
    [
        RelEdge::h(x, y),
        RelEdge::h(x, y + 1),
        RelEdge::v(x, y),
        RelEdge::v(x + 1, y),
    ]
}

impl CellGeometry {
    /// The staircase cell.
    ///
    /// Slots: `h(0,0) h(0,1) h(1,0) h(1,1) h(1,2) h(2,1) v(0,0) v(1,-1)
    /// v(1,0) v(1,1) v(2,0) v(2,1)`. Shared pairs are `{h(0,1), v(0,0)}`
    /// west, `{h(2,1), v(2,0)}` east, `{h(1,0), v(1,-1)}` south and
    /// `{h(1,2), v(1,1)}` north.
    pub fn default_geometry() -> Self {
        Self {
            stride: 2,
            edges: vec![
                RelEdge::h(0, 0),
                RelEdge::h(0, 1),
                RelEdge::h(1, 0),
                RelEdge::h(1, 1),
                RelEdge::h(1, 2),
                RelEdge::h(2, 1),
                RelEdge::v(0, 0),
                RelEdge::v(1, -1),
                RelEdge::v(1, 0),
                RelEdge::v(1, 1),
                RelEdge::v(2, 0),
                RelEdge::v(2, 1),
            ],
            sites: vec![(1, 0), (1, 1), (2, 1)],
            plaquettes: vec![(0, 0), (1, 0), (1, 1)],
            own_edges: vec![
                RelEdge::v(1, -1),
                RelEdge::h(2, 1),
                RelEdge::h(1, 2),
                RelEdge::v(0, 0),
            ],
            logicals: vec![
                LogicalSupport {
                    x: vec![RelEdge::h(0, 0), RelEdge::h(0, 1)],
                    z: vec![RelEdge::h(0, 0), RelEdge::h(1, 0)],
                },
                LogicalSupport {
                    x: vec![RelEdge::v(1, 1), RelEdge::v(2, 1)],
                    z: vec![RelEdge::v(2, 0), RelEdge::v(2, 1)],
                },
            ],
            logical_targets: vec![RelEdge::h(0, 0), RelEdge::v(1, 0)],
            coarse_plaquette_offset: (0, 0),
            coarse_site_offset: (-1, 0),
        }
    }

    pub fn slot_of(&self, e: RelEdge) -> Option<usize> {
        self.edges.iter().position(|&x| x == e)
    }

    pub fn site_edges(&self, i: usize) -> [RelEdge; 4] {
        let (x, y) = self.sites[i];
        site_rel_edges(x, y)
    }

    pub fn plaquette_edges(&self, i: usize) -> [RelEdge; 4] {
        let (x, y) = self.plaquettes[i];
        plaquette_rel_edges(x, y)
    }

    /// Relative edge lists of the enclosed stabilizers, sites first.
    pub fn stabilizer_edges(&self) -> Vec<(bool, [RelEdge; 4])> {
        let sites = (0..self.sites.len()).map(|i| (true, self.site_edges(i)));
        let plaqs = (0..self.plaquettes.len()).map(|i| (false, self.plaquette_edges(i)));
        sites.chain(plaqs).collect()
    }

    /// Shared slots in slot order, each paired with the neighbor holding the
    /// same edge.
    pub fn shared_slots(&self) -> Vec<SharedSlot> {
        let mut out = Vec::new();
        for (slot, &e) in self.edges.iter().enumerate() {
            for dj in -1..=1 {
                for di in -1..=1 {
                    if (di, dj) == (0, 0) {
                        continue;
                    }
                    let moved = e.shifted(-self.stride * di, -self.stride * dj);
                    if let Some(neighbor_slot) = self.slot_of(moved) {
                        out.push(SharedSlot {
                            slot,
                            neighbor: (di, dj),
                            neighbor_slot,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn own_slots(&self) -> Vec<usize> {
        self.own_edges
            .iter()
            .filter_map(|&e| self.slot_of(e))
            .collect()
    }

    /// Slots not shared with any neighbor.
    pub fn interior_slots(&self) -> Vec<usize> {
        let shared: Vec<usize> = self.shared_slots().iter().map(|s| s.slot).collect();
        (0..self.edges.len())
            .filter(|s| !shared.contains(s))
            .collect()
    }

    /// Structural problems with the geometry; empty when it is usable.
    pub fn check(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.stride < 1 {
            v.push(format!("stride {} must be positive", self.stride));
            return v;
        }
        if self.edges.len() != CELL_QUBITS {
            v.push(format!("cell has {} edges, expected {CELL_QUBITS}", self.edges.len()));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if self.edges[..i].contains(e) {
                v.push(format!("edge {e:?} listed twice"));
            }
        }
        if self.sites.len() != 3 || self.plaquettes.len() != 3 {
            v.push(format!(
                "cell encloses {} sites and {} plaquettes, expected 3 and 3",
                self.sites.len(),
                self.plaquettes.len()
            ));
        }
        for (is_site, edges) in self.stabilizer_edges() {
            for e in edges {
                if self.slot_of(e).is_none() {
                    let kind = if is_site { "site" } else { "plaquette" };
                    v.push(format!("{kind} edge {e:?} lies outside the cell"));
                }
            }
        }
        let shared = self.shared_slots();
        if shared.len() != SHARED_SLOTS {
            v.push(format!(
                "cell has {} shared slots, expected {SHARED_SLOTS}",
                shared.len()
            ));
        }
        for (i, s) in shared.iter().enumerate() {
            if shared[..i].iter().any(|t| t.slot == s.slot) {
                v.push(format!("slot {} is shared with more than one neighbor", s.slot));
            }
        }
        if self.own_edges.len() != OWN_EDGES {
            v.push(format!(
                "cell owns {} shared edges, expected {OWN_EDGES}",
                self.own_edges.len()
            ));
        }
        let own = self.own_slots();
        if own.len() != self.own_edges.len() {
            v.push("an owned edge lies outside the cell".into());
        }
        for s in &shared {
            let mine = own.contains(&s.slot);
            let theirs = own.contains(&s.neighbor_slot);
            if mine == theirs {
                v.push(format!(
                    "shared slot {} must be owned by exactly one of the two cells",
                    s.slot
                ));
            }
        }
        if self.logicals.len() != 2 || self.logical_targets.len() != 2 {
            v.push("cell must define exactly 2 logical qubits".into());
        }
        for l in &self.logicals {
            for e in l.x.iter().chain(&l.z) {
                if self.slot_of(*e).is_none() {
                    v.push(format!("logical edge {e:?} lies outside the cell"));
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.check();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Geometry(v.join("; ")))
        }
    }

    /// Copy of the geometry with one edge removed, for negative tests.
    pub fn without_edge(&self, slot: usize) -> Self {
        let mut g = self.clone();
        g.edges.remove(slot);
        g
    }
}

pub fn default_geometry() -> CellGeometry {
    CellGeometry::default_geometry()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_counts() {
        let g = default_geometry();
        assert!(g.check().is_empty(), "{:?}", g.check());
        assert_eq!(g.edges.len(), 12);
        assert_eq!(g.sites.len() + g.plaquettes.len(), 6);
        assert_eq!(g.shared_slots().len(), 8);
        assert_eq!(g.interior_slots(), vec![0, 3, 8, 11]);
        assert_eq!(g.own_slots(), vec![7, 5, 4, 6]);
    }

    #[test]
    fn two_shared_slots_per_neighbor() {
        let g = default_geometry();
        for n in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            assert_eq!(g.shared_slots().iter().filter(|s| s.neighbor == n).count(), 2);
        }
    }

    #[test]
    fn shared_map_is_symmetric() {
        let g = default_geometry();
        let shared = g.shared_slots();
        for s in &shared {
            let back = shared
                .iter()
                .find(|t| t.slot == s.neighbor_slot)
                .expect("partner slot must be shared");
            assert_eq!(back.neighbor, (-s.neighbor.0, -s.neighbor.1));
            assert_eq!(back.neighbor_slot, s.slot);
        }
    }

    #[test]
    fn removing_an_edge_is_reported() {
        let g = default_geometry().without_edge(3);
        assert!(!g.check().is_empty());
        assert!(g.validate().is_err());
    }

    #[test]
    fn geometry_serde_round_trip() {
        let g = default_geometry();
        let text = serde_json::to_string(&g).unwrap();
        let back: CellGeometry = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
