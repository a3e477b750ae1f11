//! Canonical operator basis of a unit cell.

use std::fmt::Write as _;

use crate::cell::{CellGeometry, RelEdge, CELL_QUBITS};
use crate::error::{Error, Result};
use crate::pauli::{project_out, Pauli, PauliOp};

/// The 24-generator canonical basis of a 12-qubit cell.
///
/// Stabilizers are ordered `A1, A2, A3, B1, B2, B3` (sites, then
/// plaquettes) and `pure_errors[i]` is the partner of `stabilizers[i]`.
/// Logical and edge pairs are stored as `(X, Z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBasis {
    pub stabilizers: Vec<PauliOp>,
    pub pure_errors: Vec<PauliOp>,
    pub logicals: Vec<(PauliOp, PauliOp)>,
    pub edges: Vec<(PauliOp, PauliOp)>,
}

const STAB_LABELS: [&str; 6] = ["A1", "A2", "A3", "B1", "B2", "B3"];

impl CellBasis {
    /// All 24 generators as conjugate pairs, in dump order.
    pub fn pairs(&self) -> Vec<(PauliOp, PauliOp)> {
        let mut v: Vec<(PauliOp, PauliOp)> = self
            .stabilizers
            .iter()
            .cloned()
            .zip(self.pure_errors.iter().cloned())
            .collect();
        v.extend(self.logicals.iter().cloned());
        v.extend(self.edges.iter().cloned());
        v
    }

    /// Role label and operator for each generator.
    pub fn labeled(&self) -> Vec<(String, PauliOp)> {
        let mut out = Vec::with_capacity(24);
        for (l, op) in STAB_LABELS.iter().zip(&self.stabilizers) {
            out.push((format!("stabilizer {l}"), op.clone()));
        }
        for (l, op) in STAB_LABELS.iter().zip(&self.pure_errors) {
            out.push((format!("pure_error {l}"), op.clone()));
        }
        for (j, (x, z)) in self.logicals.iter().enumerate() {
            out.push((format!("logical X{}", j + 1), x.clone()));
            out.push((format!("logical Z{}", j + 1), z.clone()));
        }
        for (j, (x, z)) in self.edges.iter().enumerate() {
            out.push((format!("edge X{}", j + 1), x.clone()));
            out.push((format!("edge Z{}", j + 1), z.clone()));
        }
        out
    }

    /// Text dump: one `role label PAULI` line per generator.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (label, op) in self.labeled() {
            writeln!(s, "{label} {op}").unwrap();
        }
        s
    }

    /// Reference error for 6 syndrome bits (bit `i` is stabilizer `i`).
    pub fn reference_error(&self, syndrome: u8) -> PauliOp {
        let mut t = PauliOp::identity(CELL_QUBITS);
        for (i, pe) in self.pure_errors.iter().enumerate() {
            if (syndrome >> i) & 1 == 1 {
                t *= pe;
            }
        }
        t
    }
}

fn op_on(geom: &CellGeometry, edges: &[RelEdge], letter: Pauli) -> Result<PauliOp> {
    let mut op = PauliOp::identity(CELL_QUBITS);
    for &e in edges {
        let slot = geom
            .slot_of(e)
            .ok_or_else(|| Error::Geometry(format!("edge {e:?} lies outside the cell")))?;
        op.apply(slot, letter);
    }
    Ok(op)
}

/// Restrictions to this cell of the enclosed stabilizers of every other cell
/// that overlaps it.
fn neighbor_stabilizers(geom: &CellGeometry) -> Vec<PauliOp> {
    let mut out = Vec::new();
    for dj in -2..=2i64 {
        for di in -2..=2i64 {
            if (di, dj) == (0, 0) {
                continue;
            }
            let (sx, sy) = (geom.stride * di, geom.stride * dj);
            for (is_site, edges) in geom.stabilizer_edges() {
                let letter = if is_site { Pauli::X } else { Pauli::Z };
                let mut op = PauliOp::identity(CELL_QUBITS);
                for e in edges {
                    if let Some(slot) = geom.slot_of(e.shifted(sx, sy)) {
                        op.apply(slot, letter);
                    }
                }
                if !op.is_identity() {
                    out.push(op);
                }
            }
        }
    }
    out
}

fn check_canonical(pairs: &[(PauliOp, PauliOp)]) -> Result<()> {
    let flat: Vec<&PauliOp> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
    for (i, a) in flat.iter().enumerate() {
        for (j, b) in flat.iter().enumerate().skip(i + 1) {
            let expect = (i / 2 == j / 2) as u8;
            if a.symplectic(b) != expect {
                return Err(Error::Geometry(format!(
                    "generators {i} ({a}) and {j} ({b}) violate canonical commutation"
                )));
            }
        }
    }
    Ok(())
}

fn pack(op: &PauliOp) -> u32 {
    let mut w = 0u32;
    for q in 0..CELL_QUBITS {
        w |= (op.x_bit(q) as u32) << q;
        w |= (op.z_bit(q) as u32) << (q + CELL_QUBITS);
    }
    w
}

fn unpack(w: u32) -> PauliOp {
    let mut op = PauliOp::identity(CELL_QUBITS);
    for q in 0..CELL_QUBITS {
        op.set_letter(q, Pauli::from_bits((w >> q) & 1 == 1, (w >> (q + CELL_QUBITS)) & 1 == 1));
    }
    op
}

#[inline]
fn omega(a: u32, b: u32) -> u32 {
    let m = (1u32 << CELL_QUBITS) - 1;
    (((a & m) & (b >> CELL_QUBITS)) ^ ((a >> CELL_QUBITS) & (b & m))).count_ones() & 1
}

#[inline]
fn weight(a: u32) -> u32 {
    let m = (1u32 << CELL_QUBITS) - 1;
    ((a & m) | (a >> CELL_QUBITS)).count_ones()
}

/// Chooses mutually commuting partners of `stabilizers` supported on the
/// `free` slots and commuting with `orthogonal`.
///
/// Every operator on the free slots is screened against the linear
/// constraints; the surviving candidates of each stabilizer are ordered by
/// weight and then by bit pattern, and a depth-first search picks the first
/// mutually commuting combination.
fn search_pure_errors(
    stabilizers: &[PauliOp],
    free: &[usize],
    orthogonal: &[PauliOp],
) -> Result<Vec<PauliOp>> {
    let stabs: Vec<u32> = stabilizers.iter().map(pack).collect();
    let orth: Vec<u32> = orthogonal.iter().map(pack).collect();
    let mut support = 0u32;
    for &q in free {
        support |= (1 << q) | (1 << (q + CELL_QUBITS));
    }
    let mut candidates: Vec<Vec<u32>> = vec![Vec::new(); stabs.len()];
    // Enumerate all submasks of the free support.
    let mut w = 0u32;
    loop {
        if orth.iter().all(|&o| omega(w, o) == 0) {
            let pattern: Vec<u32> = stabs.iter().map(|&s| omega(w, s)).collect();
            if pattern.iter().sum::<u32>() == 1 {
                let i = pattern.iter().position(|&b| b == 1).unwrap();
                candidates[i].push(w);
            }
        }
        if w == support {
            break;
        }
        w = (w.wrapping_sub(support)) & support;
    }
    for c in candidates.iter_mut() {
        c.sort_by_key(|&w| (weight(w), w));
    }

    fn dfs(i: usize, candidates: &[Vec<u32>], chosen: &mut Vec<u32>) -> bool {
        if i == candidates.len() {
            return true;
        }
        for &c in &candidates[i] {
            if chosen.iter().all(|&p| omega(p, c) == 0) {
                chosen.push(c);
                if dfs(i + 1, candidates, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = Vec::with_capacity(stabs.len());
    if !dfs(0, &candidates, &mut chosen) {
        return Err(Error::Geometry(
            "no mutually commuting pure errors avoid the owned edges".into(),
        ));
    }
    Ok(chosen.into_iter().map(unpack).collect())
}

/// Derives the cell basis from the geometry.
///
/// Logical strings come from the geometry. Pure errors are supported on the
/// non-owned slots and commute with the logicals and with every overlapping
/// neighbor stabilizer, so the union of all cell bases stays canonical on the
/// whole lattice. Edge pairs are X and Z on each owned
/// shared slot, projected off the stabilizer and logical pairs.
pub fn derive_cell_basis(geom: &CellGeometry) -> Result<CellBasis> {
    geom.validate()?;
    let stabilizers = geom
        .stabilizer_edges()
        .into_iter()
        .map(|(is_site, edges)| op_on(geom, &edges, if is_site { Pauli::X } else { Pauli::Z }))
        .collect::<Result<Vec<_>>>()?;
    let logicals = geom
        .logicals
        .iter()
        .map(|l| Ok((op_on(geom, &l.x, Pauli::X)?, op_on(geom, &l.z, Pauli::Z)?)))
        .collect::<Result<Vec<_>>>()?;

    let neighbors = neighbor_stabilizers(geom);
    for (x, z) in &logicals {
        for s in stabilizers.iter().chain(&neighbors) {
            if x.symplectic(s) == 1 || z.symplectic(s) == 1 {
                return Err(Error::Geometry(format!(
                    "logical pair ({x}, {z}) does not commute with stabilizer {s}"
                )));
            }
        }
    }

    let own = geom.own_slots();
    let free: Vec<usize> = (0..CELL_QUBITS).filter(|q| !own.contains(q)).collect();
    let mut orthogonal: Vec<PauliOp> = logicals
        .iter()
        .flat_map(|(x, z)| [x.clone(), z.clone()])
        .collect();
    orthogonal.extend(neighbors);
    let pure_errors = search_pure_errors(&stabilizers, &free, &orthogonal)?;

    let mut fixed: Vec<(PauliOp, PauliOp)> = stabilizers
        .iter()
        .cloned()
        .zip(pure_errors.iter().cloned())
        .collect();
    fixed.extend(logicals.iter().cloned());
    let edges: Vec<(PauliOp, PauliOp)> = own
        .iter()
        .map(|&q| {
            let x = project_out(&PauliOp::single(CELL_QUBITS, q, Pauli::X), &fixed);
            let z = project_out(&PauliOp::single(CELL_QUBITS, q, Pauli::Z), &fixed);
            (x, z)
        })
        .collect();

    let basis = CellBasis {
        stabilizers,
        pure_errors,
        logicals,
        edges,
    };
    check_canonical(&basis.pairs())?;
    Ok(basis)
}
