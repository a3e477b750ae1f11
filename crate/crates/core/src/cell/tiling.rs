//! Placement of cells on a lattice, tiling checks and the renormalized map.

use std::collections::HashMap;

use crate::cell::{CellGeometry, SharedSlot, CELL_QUBITS, CELL_STABILIZERS, SHARED_SLOTS};
use crate::error::{Error, Result};
use crate::pauli::PauliOp;
use crate::toric::{Syndrome, TorusLattice};

/// Result of [`validate_tiling`]. Violations are data, not errors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TilingReport {
    pub ell: usize,
    pub cells: usize,
    pub qubits_covered: usize,
    pub violations: Vec<String>,
}

impl TilingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn lattice_edge(lat: &TorusLattice, geom: &CellGeometry, ci: i64, cj: i64, slot: usize) -> usize {
    let e = geom.edges[slot];
    lat.edge(e.orientation, geom.stride * ci + e.dx, geom.stride * cj + e.dy)
}

/// Checks that translates of the cell cover the `ell` lattice with the
/// expected ownership and sharing structure.
pub fn validate_tiling(ell: usize, geom: &CellGeometry) -> TilingReport {
    let mut report = TilingReport {
        ell,
        ..Default::default()
    };
    let lat = match TorusLattice::new(ell) {
        Ok(l) if ell >= 4 => l,
        _ => {
            report
                .violations
                .push(format!("ell={ell} is not a power of two >= 4"));
            return report;
        }
    };
    if geom.stride < 1 || ell as i64 % geom.stride != 0 {
        report
            .violations
            .push(format!("stride {} does not divide ell={ell}", geom.stride));
        return report;
    }
    report.violations.extend(geom.check());

    let side = ell as i64 / geom.stride;
    report.cells = (side * side) as usize;
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); lat.n()];
    for cj in 0..side {
        for ci in 0..side {
            let c = (cj * side + ci) as usize;
            let mut mine: Vec<usize> = Vec::with_capacity(geom.edges.len());
            for slot in 0..geom.edges.len() {
                let e = lattice_edge(&lat, geom, ci, cj, slot);
                if mine.contains(&e) {
                    report
                        .violations
                        .push(format!("cell {c} holds lattice edge {e} twice"));
                } else {
                    mine.push(e);
                    holders[e].push(c);
                }
            }
        }
    }

    let mut owned = vec![0usize; report.cells];
    let mut shared = vec![0usize; report.cells];
    for (e, hs) in holders.iter().enumerate() {
        match hs.len() {
            0 => report.violations.push(format!("lattice edge {e} is not covered")),
            1 => owned[hs[0]] += 1,
            2 => {
                shared[hs[0]] += 1;
                shared[hs[1]] += 1;
                let owners: Vec<usize> = hs
                    .iter()
                    .copied()
                    .filter(|&c| {
                        let (ci, cj) = (c as i64 % side, c as i64 / side);
                        geom.own_edges.iter().any(|&oe| {
                            lat.edge(oe.orientation, geom.stride * ci + oe.dx, geom.stride * cj + oe.dy)
                                == e
                        })
                    })
                    .collect();
                if owners.len() == 1 {
                    owned[owners[0]] += 1;
                } else {
                    report.violations.push(format!(
                        "shared lattice edge {e} has {} owners, expected 1",
                        owners.len()
                    ));
                }
            }
            k => report
                .violations
                .push(format!("lattice edge {e} lies in {k} cells")),
        }
    }
    report.qubits_covered = holders.iter().filter(|h| !h.is_empty()).count();
    for c in 0..report.cells {
        if owned[c] != CELL_QUBITS - SHARED_SLOTS / 2 {
            report.violations.push(format!(
                "cell {c} owns {} qubits, expected {}",
                owned[c],
                CELL_QUBITS - SHARED_SLOTS / 2
            ));
        }
        if shared[c] != SHARED_SLOTS {
            report.violations.push(format!(
                "cell {c} shares {} qubits, expected {SHARED_SLOTS}",
                shared[c]
            ));
        }
    }

    for s in geom.shared_slots() {
        if s.slot >= geom.edges.len() || s.neighbor_slot >= geom.edges.len() {
            continue;
        }
        for cj in 0..side {
            for ci in 0..side {
                let a = lattice_edge(&lat, geom, ci, cj, s.slot);
                let b = lattice_edge(&lat, geom, ci + s.neighbor.0, cj + s.neighbor.1, s.neighbor_slot);
                if a != b {
                    report.violations.push(format!(
                        "neighbor map of slot {} is inconsistent at cell ({ci},{cj})",
                        s.slot
                    ));
                }
            }
        }
    }
    report
}

/// Cells of one lattice level with everything needed to run them.
#[derive(Clone, Debug)]
pub struct LevelLayout {
    pub lattice: TorusLattice,
    /// Cells per lattice side.
    pub side: usize,
    /// Lattice edge of each slot, per cell.
    pub qubits: Vec<[usize; CELL_QUBITS]>,
    /// Syndrome index of each enclosed stabilizer per cell: sites for the
    /// first three, plaquettes for the last three.
    pub stabilizers: Vec<[usize; CELL_STABILIZERS]>,
    /// Shared slots of the geometry, in message order.
    pub shared: Vec<SharedSlot>,
    /// For each cell and shared index, the receiving `(cell, shared index)`.
    pub routes: Vec<[(usize, usize); SHARED_SLOTS]>,
}

impl LevelLayout {
    pub fn new(lattice: TorusLattice, geom: &CellGeometry) -> Result<Self> {
        let report = validate_tiling(lattice.ell(), geom);
        if !report.is_ok() {
            return Err(Error::Geometry(report.violations.join("; ")));
        }
        let side = lattice.ell() / geom.stride as usize;
        let shared = geom.shared_slots();
        let n_cells = side * side;
        let s = side as i64;
        let mut qubits = Vec::with_capacity(n_cells);
        let mut stabilizers = Vec::with_capacity(n_cells);
        let mut routes = Vec::with_capacity(n_cells);
        for c in 0..n_cells {
            let (ci, cj) = ((c % side) as i64, (c / side) as i64);
            let (ax, ay) = (geom.stride * ci, geom.stride * cj);
            let mut q = [0usize; CELL_QUBITS];
            for (slot, qq) in q.iter_mut().enumerate() {
                *qq = lattice_edge(&lattice, geom, ci, cj, slot);
            }
            qubits.push(q);
            let mut st = [0usize; CELL_STABILIZERS];
            for (i, &(x, y)) in geom.sites.iter().chain(&geom.plaquettes).enumerate() {
                st[i] = lattice.cell_index(ax + x, ay + y);
            }
            stabilizers.push(st);
            let mut r = [(0usize, 0usize); SHARED_SLOTS];
            for (k, sh) in shared.iter().enumerate() {
                let ni = (ci + sh.neighbor.0).rem_euclid(s);
                let nj = (cj + sh.neighbor.1).rem_euclid(s);
                let nc = (nj * s + ni) as usize;
                let nk = shared
                    .iter()
                    .position(|t| t.slot == sh.neighbor_slot)
                    .ok_or_else(|| Error::Geometry("unmatched shared slot".into()))?;
                r[k] = (nc, nk);
            }
            routes.push(r);
        }
        Ok(Self {
            lattice,
            side,
            qubits,
            stabilizers,
            shared,
            routes,
        })
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.qubits.len()
    }

    pub fn cell_at(&self, ci: i64, cj: i64) -> usize {
        let s = self.side as i64;
        (cj.rem_euclid(s) * s + ci.rem_euclid(s)) as usize
    }

    pub fn cell_coords(&self, c: usize) -> (usize, usize) {
        (c % self.side, c / self.side)
    }

    /// The 6 enclosed syndrome bits of a cell, bit `i` for stabilizer `i`.
    pub fn cell_syndrome(&self, c: usize, syndrome: &Syndrome) -> u8 {
        let st = &self.stabilizers[c];
        let mut bits = 0u8;
        for i in 0..3 {
            bits |= syndrome.sites[st[i]] << i;
            bits |= syndrome.plaquettes[st[3 + i]] << (3 + i);
        }
        bits
    }

    /// Multiplies a 12-qubit cell operator into a lattice operator.
    pub fn place(&self, c: usize, op: &PauliOp, target: &mut PauliOp) {
        for (slot, &q) in self.qubits[c].iter().enumerate() {
            target.apply(q, op.letter(slot));
        }
    }

    /// Lattice operator of a 12-qubit cell operator.
    pub fn lift(&self, c: usize, op: &PauliOp) -> PauliOp {
        let mut out = PauliOp::identity(self.lattice.n());
        self.place(c, op, &mut out);
        out
    }
}

/// Where each bare cell's logical qubits land on the coarse lattice.
#[derive(Clone, Debug)]
pub struct RenormalizedMap {
    pub coarse: TorusLattice,
    /// Coarse edge of logicals 1 and 2, per bare cell.
    pub targets: Vec<[usize; 2]>,
    /// Bare cell and logical index feeding each coarse edge.
    pub sources: Vec<(usize, usize)>,
}

/// Maps the two logical qubits of every cell of the `ell` lattice onto
/// edges of the `ell / 2` lattice. With the default geometry, cell `(I, J)`
/// sends logical 1 to `h(I, J)` and logical 2 to `v(I + 1, J)`.
pub fn renormalized_qubit_map(ell: usize, geom: &CellGeometry) -> Result<RenormalizedMap> {
    let fine = TorusLattice::new(ell)?;
    let coarse = fine.coarse()?;
    if geom.stride != 2 {
        return Err(Error::Geometry("renormalization requires stride 2".into()));
    }
    let side = ell / 2;
    let mut targets = Vec::with_capacity(side * side);
    let mut sources = vec![None; coarse.n()];
    for c in 0..side * side {
        let (ci, cj) = ((c % side) as i64, (c / side) as i64);
        let mut t = [0usize; 2];
        for (j, tgt) in geom.logical_targets.iter().enumerate() {
            let e = coarse.edge(tgt.orientation, ci + tgt.dx, cj + tgt.dy);
            if sources[e].is_some() {
                return Err(Error::Geometry(format!("coarse edge {e} assigned twice")));
            }
            sources[e] = Some((c, j));
            t[j] = e;
        }
        targets.push(t);
    }
    let sources = sources
        .into_iter()
        .enumerate()
        .map(|(e, s)| s.ok_or_else(|| Error::Geometry(format!("coarse edge {e} unassigned"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(RenormalizedMap {
        coarse,
        targets,
        sources,
    })
}

/// For each coarse cell, the bare cell and logical feeding every slot, and
/// the slot pairs fed by both logicals of one bare cell.
#[derive(Clone, Debug)]
pub struct CoarseSources {
    pub slots: Vec<[(usize, usize); CELL_QUBITS]>,
    /// `(slot of logical 1, slot of logical 2)` per correlated pair.
    pub pairs: Vec<Vec<(usize, usize)>>,
}

impl RenormalizedMap {
    pub fn coarse_sources(&self, coarse_layout: &LevelLayout) -> CoarseSources {
        let mut slots = Vec::with_capacity(coarse_layout.num_cells());
        let mut pairs = Vec::with_capacity(coarse_layout.num_cells());
        for q in &coarse_layout.qubits {
            let mut s = [(0usize, 0usize); CELL_QUBITS];
            let mut by_cell: HashMap<usize, [Option<usize>; 2]> = HashMap::new();
            for (slot, &e) in q.iter().enumerate() {
                s[slot] = self.sources[e];
                by_cell.entry(s[slot].0).or_default()[s[slot].1] = Some(slot);
            }
            let mut p: Vec<(usize, usize)> = by_cell
                .values()
                .filter_map(|v| match v {
                    [Some(a), Some(b)] => Some((*a, *b)),
                    _ => None,
                })
                .collect();
            p.sort_unstable();
            slots.push(s);
            pairs.push(p);
        }
        CoarseSources { slots, pairs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::default_geometry;

    #[test]
    fn default_tiling_is_valid() {
        let g = default_geometry();
        for ell in [4, 8, 16, 32, 64, 128] {
            let r = validate_tiling(ell, &g);
            assert!(r.is_ok(), "ell={ell}: {:?}", r.violations);
            assert_eq!(r.cells, ell * ell / 4);
            assert_eq!(r.qubits_covered, 2 * ell * ell);
        }
    }

    #[test]
    fn removed_edge_breaks_coverage() {
        let g = default_geometry().without_edge(0);
        let r = validate_tiling(8, &g);
        assert!(r.violations.iter().any(|v| v.contains("not covered")));
    }

    #[test]
    fn routes_are_an_involution() {
        let lay = LevelLayout::new(TorusLattice::new(8).unwrap(), &default_geometry()).unwrap();
        for c in 0..lay.num_cells() {
            for k in 0..SHARED_SLOTS {
                let (nc, nk) = lay.routes[c][k];
                assert_eq!(lay.routes[nc][nk], (c, k));
                assert_eq!(lay.qubits[c][lay.shared[k].slot], lay.qubits[nc][lay.shared[nk].slot]);
            }
        }
    }

    #[test]
    fn map_is_bijective_and_draws_from_eight_cells() {
        let g = default_geometry();
        for ell in [4, 8, 16] {
            let m = renormalized_qubit_map(ell, &g).unwrap();
            assert_eq!(m.targets.len() * 2, m.coarse.n());
        }
        let m = renormalized_qubit_map(16, &g).unwrap();
        let coarse = LevelLayout::new(m.coarse, &g).unwrap();
        let src = m.coarse_sources(&coarse);
        for (slots, pairs) in src.slots.iter().zip(&src.pairs) {
            let mut cells: Vec<usize> = slots.iter().map(|s| s.0).collect();
            cells.sort_unstable();
            cells.dedup();
            assert_eq!(cells.len(), 8);
            assert_eq!(pairs.len(), 4);
        }
        assert!(renormalized_qubit_map(2, &g).is_err());
    }
}
