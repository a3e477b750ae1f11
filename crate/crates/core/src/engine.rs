//! Cell-level sums over the 4^12 error configurations.
//!
//! Every single-qubit letter contributes a fixed bit signature: its
//! anti-commutation with the 6 cell stabilizers (bits 0..6) and with the
//! logical operators (bits 6..10; bit `6 + 2j` is the coefficient of the X
//! logical of qubit `j`, bit `7 + 2j` that of its Z logical). Signatures add
//! over GF(2), so conditioning on a syndrome and resolving the logical class
//! is a transfer sum over factors whose state is the XOR of signatures seen
//! so far. Syndrome bits are dropped from the state as soon as every factor
//! touching them has been absorbed.

use crate::cell::{CellBasis, CELL_QUBITS, CELL_STABILIZERS};
use crate::noise::ErrorModel;
use crate::pauli::{Pauli, PauliOp};

const SYN_MASK: u16 = (1 << CELL_STABILIZERS) - 1;
const N_FUNCTIONALS: usize = CELL_STABILIZERS + 4;
const STATES: usize = 1 << N_FUNCTIONALS;

/// 12-qubit operator packed as X bits 0..12 and Z bits 12..24.
pub type Packed = u32;

pub fn pack(op: &PauliOp) -> Packed {
    debug_assert_eq!(op.num_qubits(), CELL_QUBITS);
    let mut w = 0;
    for q in 0..CELL_QUBITS {
        w |= (op.x_bit(q) as u32) << q;
        w |= (op.z_bit(q) as u32) << (q + CELL_QUBITS);
    }
    w
}

pub fn unpack(w: Packed) -> PauliOp {
    let mut op = PauliOp::identity(CELL_QUBITS);
    for q in 0..CELL_QUBITS {
        op.set_letter(q, letter_at(w, q));
    }
    op
}

#[inline]
pub fn letter_at(w: Packed, q: usize) -> Pauli {
    Pauli::from_code((((w >> q) & 1) | (((w >> (q + CELL_QUBITS)) & 1) << 1)) as u8)
}

#[inline]
pub fn omega(a: Packed, b: Packed) -> u32 {
    let m = (1u32 << CELL_QUBITS) - 1;
    (((a & m) & (b >> CELL_QUBITS)) ^ ((a >> CELL_QUBITS) & (b & m))).count_ones() & 1
}

/// Packed cell basis and per-letter signatures.
#[derive(Clone, Debug)]
pub struct CellCode {
    /// Stabilizer and logical signature of each letter at each slot.
    pub sig: [[u16; 4]; CELL_QUBITS],
    /// Edge signature: bit `2j` is the coefficient of edge X_j, `2j + 1` of edge Z_j.
    pub edge_sig: [[u8; 4]; CELL_QUBITS],
    /// Group generators in table order: 6 stabilizers, X1, Z1, X2, Z2, then
    /// the 8 edge operators `XE1, ZE1, ..., XE4, ZE4`.
    pub generators: [Packed; 18],
    pub pure_errors: [Packed; CELL_STABILIZERS],
}

impl CellCode {
    pub fn new(basis: &CellBasis) -> Self {
        let stabs: Vec<Packed> = basis.stabilizers.iter().map(pack).collect();
        let logs: Vec<(Packed, Packed)> = basis.logicals.iter().map(|(x, z)| (pack(x), pack(z))).collect();
        let edges: Vec<(Packed, Packed)> = basis.edges.iter().map(|(x, z)| (pack(x), pack(z))).collect();
        let mut sig = [[0u16; 4]; CELL_QUBITS];
        let mut edge_sig = [[0u8; 4]; CELL_QUBITS];
        for q in 0..CELL_QUBITS {
            for a in Pauli::ALL {
                let f = pack(&PauliOp::single(CELL_QUBITS, q, a));
                let mut s = 0u16;
                for (i, &st) in stabs.iter().enumerate() {
                    s |= (omega(f, st) as u16) << i;
                }
                for (j, &(x, z)) in logs.iter().enumerate() {
                    s |= (omega(f, z) as u16) << (CELL_STABILIZERS + 2 * j);
                    s |= (omega(f, x) as u16) << (CELL_STABILIZERS + 2 * j + 1);
                }
                let mut e = 0u8;
                for (j, &(x, z)) in edges.iter().enumerate() {
                    e |= (omega(f, z) as u8) << (2 * j);
                    e |= (omega(f, x) as u8) << (2 * j + 1);
                }
                sig[q][a.code()] = s;
                edge_sig[q][a.code()] = e;
            }
        }
        let mut generators = [0; 18];
        generators[..6].copy_from_slice(&stabs);
        for (j, &(x, z)) in logs.iter().enumerate() {
            generators[6 + 2 * j] = x;
            generators[7 + 2 * j] = z;
        }
        for (j, &(x, z)) in edges.iter().enumerate() {
            generators[10 + 2 * j] = x;
            generators[11 + 2 * j] = z;
        }
        let mut pure_errors = [0; CELL_STABILIZERS];
        for (i, pe) in basis.pure_errors.iter().enumerate() {
            pure_errors[i] = pack(pe);
        }
        Self {
            sig,
            edge_sig,
            generators,
            pure_errors,
        }
    }

    pub fn reference_error(&self, syndrome: u8) -> Packed {
        let mut t = 0;
        for (i, &pe) in self.pure_errors.iter().enumerate() {
            if (syndrome >> i) & 1 == 1 {
                t ^= pe;
            }
        }
        t
    }

    /// Full signature (stabilizer and logical bits) of a packed operator.
    pub fn signature(&self, w: Packed) -> u16 {
        (0..CELL_QUBITS).fold(0, |s, q| s ^ self.sig[q][letter_at(w, q).code()])
    }
}

/// One factor of the cell distribution: a single slot, or two paired slots
/// with combined letter index `a + 4 * b`.
#[derive(Clone, Debug)]
pub struct PlanFactor {
    pub slots: [usize; 2],
    pub paired: bool,
    pub masks: [u16; 16],
}

impl PlanFactor {
    #[inline]
    pub fn combos(&self) -> usize {
        if self.paired {
            16
        } else {
            4
        }
    }

    fn support(&self) -> u16 {
        self.masks[..self.combos()].iter().fold(0, |a, &m| a | m)
    }
}

#[derive(Clone, Debug)]
struct Step {
    before: u16,
    after: u16,
    /// Syndrome bits retired after this step, in order.
    retire: Vec<u16>,
}

/// Factor layout of a cell together with the elimination order of the
/// transfer sum.
#[derive(Clone, Debug)]
pub struct Plan {
    pub factors: Vec<PlanFactor>,
    /// Factor index of each slot.
    pub factor_of: [usize; CELL_QUBITS],
    steps: Vec<Step>,
    untouched: u16,
}

/// Per-factor weights in plan order.
pub type FactorWeights = [[f64; 16]; CELL_QUBITS];

#[inline]
fn submasks(mask: u16) -> impl Iterator<Item = u16> {
    let mut s: u16 = 0;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = s;
        if s == mask {
            done = true;
        } else {
            s = s.wrapping_sub(mask) & mask;
        }
        Some(cur)
    })
}

impl Plan {
    /// Builds the factor list for the given slot pairs and the cheapest
    /// elimination order of the transfer sum.
    pub fn new(code: &CellCode, pairs: &[(usize, usize)]) -> Self {
        let mut factors = Vec::new();
        let mut factor_of = [usize::MAX; CELL_QUBITS];
        for q in 0..CELL_QUBITS {
            if factor_of[q] != usize::MAX {
                continue;
            }
            let partner = pairs
                .iter()
                .find_map(|&(a, b)| if a == q { Some(b) } else if b == q { Some(a) } else { None });
            let mut masks = [0u16; 16];
            let f = match partner {
                None => {
                    masks[..4].copy_from_slice(&code.sig[q]);
                    PlanFactor {
                        slots: [q, q],
                        paired: false,
                        masks,
                    }
                }
                Some(r) => {
                    for b in 0..4 {
                        for a in 0..4 {
                            masks[a + 4 * b] = code.sig[q][a] ^ code.sig[r][b];
                        }
                    }
                    factor_of[r] = factors.len();
                    PlanFactor {
                        slots: [q, r],
                        paired: true,
                        masks,
                    }
                }
            };
            factor_of[q] = factors.len();
            factors.push(f);
        }

        let supports: Vec<u16> = factors.iter().map(|f| f.support()).collect();
        let untouched = SYN_MASK & !supports.iter().fold(0u16, |a, &s| a | s);

        // Exact order search over subsets of absorbed factors. The live state
        // after absorbing a subset is fixed by the subset, so the cheapest
        // total work is a shortest path over the subset lattice.
        let nf = factors.len();
        let live_of = |set: usize| -> u16 {
            let mut touched = 0u16;
            let mut pending = 0u16;
            for (k, &s) in supports.iter().enumerate() {
                if set >> k & 1 == 1 {
                    touched |= s;
                } else {
                    pending |= s;
                }
            }
            touched & (pending | !SYN_MASK)
        };
        let full = (1usize << nf) - 1;
        let mut best = vec![f64::INFINITY; 1 << nf];
        let mut choice = vec![usize::MAX; 1 << nf];
        best[0] = 0.0;
        for set in 0..full {
            if !best[set].is_finite() {
                continue;
            }
            let live = live_of(set);
            for k in (0..nf).filter(|&k| set >> k & 1 == 0) {
                let after = live | supports[k];
                let cost = best[set]
                    + (1u64 << live.count_ones()) as f64 * factors[k].combos() as f64
                    + (1u64 << after.count_ones()) as f64;
                let next = set | 1 << k;
                if cost < best[next] {
                    best[next] = cost;
                    choice[next] = k;
                }
            }
        }
        let mut order = Vec::with_capacity(nf);
        let mut set = full;
        while set != 0 {
            let k = choice[set];
            order.push(k);
            set &= !(1 << k);
        }
        order.reverse();
        let mut steps = Vec::with_capacity(nf);
        let mut set = 0usize;
        for &k in &order {
            let before = live_of(set);
            let after = before | supports[k];
            set |= 1 << k;
            let live = live_of(set);
            let retire: Vec<u16> = (0..CELL_STABILIZERS as u16)
                .filter(|&b| (after >> b) & 1 == 1 && (live >> b) & 1 == 0)
                .collect();
            steps.push(Step {
                before,
                after,
                retire,
            });
        }

        // Reorder factors to elimination order so all sweeps share it.
        let factors: Vec<PlanFactor> = order.iter().map(|&k| factors[k].clone()).collect();
        let mut factor_of = [0usize; CELL_QUBITS];
        for (k, f) in factors.iter().enumerate() {
            factor_of[f.slots[0]] = k;
            factor_of[f.slots[1]] = k;
        }
        Self {
            factors,
            factor_of,
            steps,
            untouched,
        }
    }

    /// Largest live state of the transfer sum, in bits.
    pub fn width(&self) -> u32 {
        self.steps
            .iter()
            .map(|s| s.after.count_ones())
            .max()
            .unwrap_or(0)
    }

    /// Factor weights from a model whose pair structure matches the plan,
    /// with each slot's letter weight multiplied by `slot_weights[slot]`.
    pub fn weights(&self, model: &ErrorModel, slot_weights: Option<&[[f64; 4]; CELL_QUBITS]>) -> FactorWeights {
        let mut out = [[0.0; 16]; CELL_QUBITS];
        for (k, f) in self.factors.iter().enumerate() {
            let q = f.slots[0];
            if f.paired {
                let r = f.slots[1];
                let (pi, pos) = model
                    .pair_of(q)
                    .expect("plan pairs must match the model's pair factors");
                let pf = &model.pairs()[pi];
                debug_assert_eq!(pf.qubits[1 - pos], r);
                for b in 0..4 {
                    for a in 0..4 {
                        let (ia, ib) = if pos == 0 { (a, b) } else { (b, a) };
                        let mut w = pf.joint[ia + 4 * ib];
                        if let Some(sw) = slot_weights {
                            w *= sw[q][a] * sw[r][b];
                        }
                        out[k][a + 4 * b] = w;
                    }
                }
            } else {
                debug_assert!(model.pair_of(q).is_none());
                for a in 0..4 {
                    out[k][a] = model.prior(q).0[a] * slot_weights.map_or(1.0, |sw| sw[q][a]);
                }
            }
        }
        out
    }

    /// Unnormalized `P(L, c)` for the 16 logical classes.
    pub fn logical_weights(&self, w: &FactorWeights, syndrome: u8) -> [f64; 16] {
        let mut out = [0.0; 16];
        if self.untouched & syndrome as u16 != 0 {
            return out;
        }
        let mut cur = [0.0f64; STATES];
        let mut next = [0.0f64; STATES];
        cur[0] = 1.0;
        for (k, step) in self.steps.iter().enumerate() {
            let f = &self.factors[k];
            let wk = &w[k];
            for s in submasks(step.after) {
                next[s as usize] = 0.0;
            }
            for s in submasks(step.before) {
                let x = cur[s as usize];
                if x == 0.0 {
                    continue;
                }
                for c in 0..f.combos() {
                    let wc = wk[c];
                    if wc != 0.0 {
                        next[(s ^ f.masks[c]) as usize] += x * wc;
                    }
                }
            }
            let mut live = step.after;
            for &b in &step.retire {
                let bit = 1u16 << b;
                live &= !bit;
                if (syndrome >> b) & 1 == 1 {
                    for s in submasks(live) {
                        next[s as usize] = next[(s | bit) as usize];
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        for (l, o) in out.iter_mut().enumerate() {
            *o = cur[l << CELL_STABILIZERS];
        }
        out
    }

    /// Forward and backward syndrome sweeps for a fixed cell syndrome.
    pub fn sweep(&self, w: &FactorWeights, syndrome: u8) -> Sweep {
        let nf = self.factors.len();
        let mut alpha = [[0.0f64; 64]; CELL_QUBITS + 1];
        let mut beta = [[0.0f64; 64]; CELL_QUBITS + 1];
        alpha[0][0] = 1.0;
        for k in 0..nf {
            let f = &self.factors[k];
            let (head, tail) = alpha.split_at_mut(k + 1);
            let (a, next) = (&head[k], &mut tail[0]);
            for s in 0..64usize {
                let x = a[s];
                if x == 0.0 {
                    continue;
                }
                for c in 0..f.combos() {
                    next[s ^ (f.masks[c] & SYN_MASK) as usize] += x * w[k][c];
                }
            }
        }
        beta[nf][0] = 1.0;
        for k in (0..nf).rev() {
            let f = &self.factors[k];
            let (head, tail) = beta.split_at_mut(k + 1);
            let (b, prev) = (&tail[0], &mut head[k]);
            for t in 0..64usize {
                let x = b[t];
                if x == 0.0 {
                    continue;
                }
                for c in 0..f.combos() {
                    prev[t ^ (f.masks[c] & SYN_MASK) as usize] += x * w[k][c];
                }
            }
        }
        Sweep {
            alpha,
            beta,
            syndrome: syndrome as usize,
            nf,
        }
    }
}

/// Forward/backward messages of [`Plan::sweep`].
pub struct Sweep {
    alpha: [[f64; 64]; CELL_QUBITS + 1],
    beta: [[f64; 64]; CELL_QUBITS + 1],
    syndrome: usize,
    nf: usize,
}

impl Sweep {
    /// Total weight of configurations with the cell syndrome.
    pub fn total(&self) -> f64 {
        self.alpha[self.nf][self.syndrome]
    }

    /// Weight of all configurations with the cell syndrome and factor `k`
    /// fixed to each of its letter combinations, excluding factor `k`'s own
    /// weight.
    pub fn cavity(&self, plan: &Plan, k: usize) -> [f64; 16] {
        let f = &plan.factors[k];
        let mut out = [0.0; 16];
        for (c, o) in out.iter_mut().enumerate().take(f.combos()) {
            let m = (f.masks[c] & SYN_MASK) as usize;
            let mut acc = 0.0;
            for s in 0..64usize {
                acc += self.alpha[k][s] * self.beta[k + 1][self.syndrome ^ s ^ m];
            }
            *o = acc;
        }
        out
    }
}

/// Unnormalized `P(L, E, c)` table indexed `L * 256 + E`, by enumerating
/// all `2^18` products of logical, edge and stabilizer generators in Gray
/// code order.
pub fn gray_code_table(code: &CellCode, model: &ErrorModel, syndrome: u8) -> Vec<f64> {
    let mut table = vec![0.0; 16 * 256];
    let singles: Vec<usize> = (0..CELL_QUBITS).filter(|&q| model.pair_of(q).is_none()).collect();
    let eval = |f: Packed| -> f64 {
        let mut p = 1.0;
        for &q in &singles {
            p *= model.prior(q).0[letter_at(f, q).code()];
        }
        for pf in model.pairs() {
            let (a, b) = (letter_at(f, pf.qubits[0]), letter_at(f, pf.qubits[1]));
            p *= pf.joint[a.code() + 4 * b.code()];
        }
        p
    };
    let mut f = code.reference_error(syndrome);
    let mut gray = 0u32;
    for g in 0u32..(1 << 18) {
        if g > 0 {
            let bit = g.trailing_zeros();
            gray ^= 1 << bit;
            f ^= code.generators[bit as usize];
        }
        let l = (gray >> 6) & 15;
        let e = gray >> 10;
        table[(l * 256 + e) as usize] += eval(f);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{default_geometry, derive_cell_basis};
    use crate::noise::{depolarizing_prior, ErrorModel, PairFactor, QubitPrior};

    fn code() -> CellCode {
        CellCode::new(&derive_cell_basis(&default_geometry()).unwrap())
    }

    #[test]
    fn pack_round_trip() {
        let op: PauliOp = "XYZIIXZYYIZX".parse().unwrap();
        assert_eq!(unpack(pack(&op)), op);
        let other: PauliOp = "ZZZIXIIYYXZI".parse().unwrap();
        assert_eq!(omega(pack(&op), pack(&other)), op.symplectic(&other) as u32);
    }

    #[test]
    fn generator_signatures_are_canonical() {
        let c = code();
        for (i, &g) in c.generators.iter().enumerate() {
            let s = c.signature(g);
            if i < 6 {
                assert_eq!(s, 0);
            } else if i < 10 {
                // X_j has signature bit 6 + 2j, Z_j bit 7 + 2j.
                assert_eq!(s, 1 << i);
            } else {
                assert_eq!(s, 0);
            }
        }
        for i in 0..6 {
            assert_eq!(c.signature(c.pure_errors[i]), 1 << i);
        }
    }

    #[test]
    fn plan_width_is_small() {
        let c = code();
        assert!(Plan::new(&c, &[]).width() <= 8);
        assert!(Plan::new(&c, &[(0, 8), (1, 9), (2, 10), (3, 11)]).width() <= 9);
    }

    fn table_logicals(t: &[f64]) -> [f64; 16] {
        let mut out = [0.0; 16];
        for l in 0..16 {
            out[l] = t[l * 256..(l + 1) * 256].iter().sum();
        }
        out
    }

    #[test]
    fn transfer_sum_matches_gray_code() {
        let c = code();
        let m = ErrorModel::iid(12, depolarizing_prior(0.13).unwrap());
        let plan = Plan::new(&c, &[]);
        let w = plan.weights(&m, None);
        for syn in [0u8, 5, 17, 42, 63] {
            let a = plan.logical_weights(&w, syn);
            let b = table_logicals(&gray_code_table(&c, &m, syn));
            for l in 0..16 {
                assert!((a[l] - b[l]).abs() < 1e-14, "syn {syn} L {l}: {} vs {}", a[l], b[l]);
            }
            let sw = plan.sweep(&w, syn);
            assert!((sw.total() - a.iter().sum::<f64>()).abs() < 1e-14);
        }
    }

    #[test]
    fn transfer_sum_with_pairs_matches_gray_code() {
        let c = code();
        let pairs = [(0usize, 8usize), (1, 9), (2, 10), (3, 11)];
        let mut joints = Vec::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let mut j = [0.0; 16];
            for k in 0..16 {
                j[k] = 1.0 + ((k * 7 + i * 3) % 11) as f64;
            }
            let s: f64 = j.iter().sum();
            joints.push(PairFactor::new([a, b], j.map(|v| v / s)).unwrap());
        }
        let priors = vec![QubitPrior::new(0.7, 0.1, 0.05, 0.15).unwrap(); 12];
        let m = ErrorModel::new(priors, joints).unwrap();
        let plan = Plan::new(&c, &pairs);
        let w = plan.weights(&m, None);
        for syn in [0u8, 9, 33, 63] {
            let a = plan.logical_weights(&w, syn);
            let b = table_logicals(&gray_code_table(&c, &m, syn));
            for l in 0..16 {
                assert!((a[l] - b[l]).abs() < 1e-14);
            }
        }
    }
}
