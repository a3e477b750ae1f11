//! Phaseless Pauli operators over GF(2) symplectic vectors.
//!
//! An `n`-qubit Pauli operator is stored as two bit-packed vectors: the
//! X-part (set where the operator acts as X or Y) and the Z-part (set where
//! it acts as Z or Y). Global phases are never tracked, so multiplication is
//! a componentwise XOR and two operators commute exactly when their
//! symplectic inner product vanishes.

use std::fmt;
use std::ops::{Mul, MulAssign};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Single-qubit Pauli letter.
///
/// The discriminant is the two-bit code `x | (z << 1)`, so `I = 0`,
/// `X = 1`, `Z = 2` and `Y = 3`. Probability tables throughout the crate are
/// indexed by this code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Pauli {
    I = 0,
    X = 1,
    Z = 2,
    Y = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::Y];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        Self::from_code((x as u8) | ((z as u8) << 1))
    }

    #[inline]
    pub fn from_code(code: u8) -> Self {
        match code & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Z,
            _ => Pauli::Y,
        }
    }

    #[inline]
    pub fn code(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn x(self) -> bool {
        (self as u8) & 1 == 1
    }

    #[inline]
    pub fn z(self) -> bool {
        (self as u8) & 2 == 2
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::ParsePauli(other)),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// A phaseless `n`-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOp {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words_for(n)],
            z: vec![0; words_for(n)],
        }
    }

    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set_letter(qubit, letter);
        op
    }

    /// X on every listed qubit.
    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let mut op = Self::identity(n);
        for &q in qubits {
            op.toggle_x(q);
        }
        op
    }

    /// Z on every listed qubit.
    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut op = Self::identity(n);
        for &q in qubits {
            op.toggle_z(q);
        }
        op
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut op = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            op.set_letter(q, l);
        }
        op
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set_letter(&mut self, q: usize, letter: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q >> 6, q & 63);
        self.x[w] = (self.x[w] & !(1 << b)) | ((letter.x() as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((letter.z() as u64) << b);
    }

    #[inline]
    pub fn toggle_x(&mut self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        self.x[q >> 6] ^= 1 << (q & 63);
    }

    #[inline]
    pub fn toggle_z(&mut self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        self.z[q >> 6] ^= 1 << (q & 63);
    }

    /// Multiplies a single-qubit letter into position `q`.
    #[inline]
    pub fn apply(&mut self, q: usize, letter: Pauli) {
        if letter.x() {
            self.toggle_x(q);
        }
        if letter.z() {
            self.toggle_z(q);
        }
    }

    fn check_dim(&self, other: &PauliOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    /// Group product modulo phase.
    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out *= other;
        Ok(out)
    }

    /// True iff the symplectic inner product with `other` vanishes.
    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        self.check_dim(other)?;
        Ok(self.symplectic(other) == 0)
    }

    /// Symplectic inner product over GF(2). Panics on a dimension mismatch.
    #[inline]
    pub fn symplectic(&self, other: &PauliOp) -> u8 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        (acc & 1) as u8
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Qubits on which the operator differs from the identity.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    /// Operator on `qubits.len()` qubits holding the letters found at `qubits`.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOp {
        let mut out = PauliOp::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set_letter(i, self.letter(q));
        }
        out
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(move |q| self.letter(q))
    }
}

impl MulAssign<&PauliOp> for PauliOp {
    fn mul_assign(&mut self, rhs: &PauliOp) {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        for (a, b) in self.x.iter_mut().zip(&rhs.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&rhs.z) {
            *a ^= b;
        }
    }
}

impl Mul<&PauliOp> for &PauliOp {
    type Output = PauliOp;

    fn mul(self, rhs: &PauliOp) -> PauliOp {
        let mut out = self.clone();
        out *= rhs;
        out
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOp({self})")
    }
}

impl FromStr for PauliOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliOp::from_letters(&letters))
    }
}

// ---------------------------------------------------------------------------
// GF(2) linear algebra on small systems

/// Dense GF(2) row with a right-hand side bit.
#[derive(Clone)]
struct Row {
    bits: Vec<u64>,
    rhs: bool,
}

impl Row {
    fn get(&self, c: usize) -> bool {
        (self.bits[c >> 6] >> (c & 63)) & 1 == 1
    }

    fn xor(&mut self, other: &Row) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
        self.rhs ^= other.rhs;
    }
}

/// Solves `A y = b` over GF(2), pivoting on columns in ascending order and
/// setting free variables to zero. Returns `None` when inconsistent.
fn solve_gf2(mut rows: Vec<Row>, ncols: usize) -> Option<Vec<bool>> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(r) = (rank..rows.len()).find(|&r| rows[r].get(c)) else {
            continue;
        };
        rows.swap(rank, r);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row.get(c) {
                row.xor(&pivot);
            }
        }
        pivots.push(c);
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r.rhs) {
        return None;
    }
    let mut y = vec![false; ncols];
    for (i, &c) in pivots.iter().enumerate() {
        y[c] = rows[i].rhs;
    }
    Some(y)
}

/// GF(2) rank of a list of operators viewed as 2n-bit vectors.
pub fn rank(ops: &[PauliOp]) -> usize {
    let Some(first) = ops.first() else {
        return 0;
    };
    let n = first.n;
    let mut rows: Vec<Vec<u64>> = ops
        .iter()
        .map(|op| op.x.iter().chain(op.z.iter()).copied().collect())
        .collect();
    let ncols = 2 * words_for(n) * 64;
    let mut rank = 0;
    for c in 0..ncols {
        let get = |r: &Vec<u64>| (r[c >> 6] >> (c & 63)) & 1 == 1;
        let Some(r) = (rank..rows.len()).find(|&r| get(&rows[r])) else {
            continue;
        };
        rows.swap(rank, r);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && get(row) {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Single-qubit operators in the fixed pivot order: qubit 0 X, qubit 0 Z,
/// qubit 1 X, and so on.
pub fn single_qubit_pool(n: usize) -> Vec<PauliOp> {
    (0..n)
        .flat_map(|q| [PauliOp::single(n, q, Pauli::X), PauliOp::single(n, q, Pauli::Z)])
        .collect()
}

/// Finds conjugate partners for an isotropic set inside `span(pool)`.
///
/// Partner `i` anti-commutes with `isotropic[i]` only, commutes with every
/// previously found partner and with every operator in `orthogonal_to`.
/// Each partner is the particular solution of a GF(2) system whose unknowns
/// are pool coefficients, pivoting in pool order with free coefficients zero.
pub fn find_partners(
    isotropic: &[PauliOp],
    pool: &[PauliOp],
    orthogonal_to: &[PauliOp],
) -> Result<Vec<PauliOp>> {
    let Some(first) = isotropic.first().or(pool.first()) else {
        return Ok(Vec::new());
    };
    let n = first.n;
    let ncols = pool.len();
    let nwords = ncols.div_ceil(64).max(1);
    let row_for = |c: &PauliOp, rhs: bool| {
        let mut bits = vec![0u64; nwords];
        for (t, p) in pool.iter().enumerate() {
            if c.symplectic(p) == 1 {
                bits[t >> 6] |= 1 << (t & 63);
            }
        }
        Row { bits, rhs }
    };
    let mut partners: Vec<PauliOp> = Vec::with_capacity(isotropic.len());
    for i in 0..isotropic.len() {
        let mut rows = Vec::new();
        for (j, a) in isotropic.iter().enumerate() {
            rows.push(row_for(a, i == j));
        }
        for b in &partners {
            rows.push(row_for(b, false));
        }
        for c in orthogonal_to {
            rows.push(row_for(c, false));
        }
        let y = solve_gf2(rows, ncols).ok_or_else(|| {
            Error::Structure(format!("no conjugate partner for generator {i} in the given pool"))
        })?;
        let mut b = PauliOp::identity(n);
        for (t, &on) in y.iter().enumerate() {
            if on {
                b *= &pool[t];
            }
        }
        partners.push(b);
    }
    Ok(partners)
}

/// Projects `v` onto the symplectic complement of the given canonical pairs.
pub fn project_out(v: &PauliOp, pairs: &[(PauliOp, PauliOp)]) -> PauliOp {
    let mut out = v.clone();
    for (a, b) in pairs {
        let with_b = out.symplectic(b);
        let with_a = out.symplectic(a);
        if with_b == 1 {
            out *= a;
        }
        if with_a == 1 {
            out *= b;
        }
    }
    out
}

/// Symplectic Gram-Schmidt: builds canonical pairs from `candidates` after
/// projecting them off `existing`. The first surviving candidate is paired
/// with the first later candidate it anti-commutes with.
pub fn symplectic_gram_schmidt(
    candidates: &[PauliOp],
    existing: &[(PauliOp, PauliOp)],
) -> Vec<(PauliOp, PauliOp)> {
    let mut rest: Vec<PauliOp> = candidates
        .iter()
        .map(|c| project_out(c, existing))
        .collect();
    let mut pairs = Vec::new();
    while let Some(pos) = rest.iter().position(|v| !v.is_identity()) {
        let u = rest.remove(pos);
        let Some(wpos) = rest.iter().position(|w| u.symplectic(w) == 1) else {
            continue;
        };
        let w = rest.remove(wpos);
        let pair = (u, w);
        for v in rest.iter_mut() {
            *v = project_out(v, std::slice::from_ref(&pair));
        }
        pairs.push(pair);
    }
    pairs
}

fn check_isotropic(set: &[PauliOp], n: usize) -> Result<()> {
    for op in set {
        if op.n != n {
            return Err(Error::Dimension {
                expected: n,
                found: op.n,
            });
        }
    }
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            if a.symplectic(b) == 1 {
                return Err(Error::Structure(format!(
                    "input operators {a} and {b} do not commute"
                )));
            }
        }
    }
    if rank(set) != set.len() {
        return Err(Error::Structure("input operators are not independent".into()));
    }
    Ok(())
}

/// Extends independent, mutually commuting operators to a full canonical
/// basis of `n` conjugate pairs.
///
/// The first `set.len()` pairs carry the inputs as first members. Completion
/// pivots on the lowest qubit index, X-part before Z-part, so the output is
/// deterministic.
pub fn symplectic_complete(set: &[PauliOp], n: usize) -> Result<Vec<(PauliOp, PauliOp)>> {
    if set.len() > n {
        return Err(Error::Structure(format!(
            "{} commuting operators cannot be independent on {n} qubits",
            set.len()
        )));
    }
    check_isotropic(set, n)?;
    let pool = single_qubit_pool(n);
    let partners = find_partners(set, &pool, &[])?;
    let mut pairs: Vec<(PauliOp, PauliOp)> = set.iter().cloned().zip(partners).collect();
    let extra = symplectic_gram_schmidt(&pool, &pairs);
    pairs.extend(extra);
    debug_assert_eq!(pairs.len(), n);
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOp {
        s.parse().unwrap()
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(p("XI").multiply(&p("ZI")).unwrap(), p("YI"));
        assert_eq!(p("XZ").multiply(&p("ZZ")).unwrap(), p("YI"));
        let a = p("XYZI");
        assert!(a.multiply(&a).unwrap().is_identity());
        assert!(matches!(
            p("X").multiply(&p("XX")),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn commutes_examples() {
        assert!(!p("XI").commutes(&p("ZI")).unwrap());
        assert!(p("XX").commutes(&p("ZZ")).unwrap());
        assert!(p("XYZ").commutes(&PauliOp::identity(3)).unwrap());
        assert!(p("X").commutes(&p("ZZ")).is_err());
    }

    #[test]
    fn weight_examples() {
        assert_eq!(PauliOp::identity(5).weight(), 0);
        assert_eq!(p("YIX").weight(), 2);
        assert_eq!(p(&"Y".repeat(12)).weight(), 12);
    }

    #[test]
    fn weight_across_word_boundary() {
        let mut op = PauliOp::identity(130);
        op.set_letter(0, Pauli::X);
        op.set_letter(64, Pauli::Y);
        op.set_letter(129, Pauli::Z);
        assert_eq!(op.weight(), 3);
        assert_eq!(op.letter(64), Pauli::Y);
        assert_eq!(op.to_string().parse::<PauliOp>().unwrap(), op);
    }

    #[test]
    fn parse_rejects_bad_char() {
        assert!(matches!("XQ".parse::<PauliOp>(), Err(Error::ParsePauli('Q'))));
    }

    #[test]
    fn complete_single_z() {
        let pairs = symplectic_complete(&[p("Z")], 1).unwrap();
        assert_eq!(pairs, vec![(p("Z"), p("X"))]);
    }

    #[test]
    fn complete_empty_two_qubits() {
        let pairs = symplectic_complete(&[], 2).unwrap();
        assert_eq!(pairs, vec![(p("XI"), p("ZI")), (p("IX"), p("IZ"))]);
    }

    #[test]
    fn complete_rejects_bad_inputs() {
        assert!(matches!(
            symplectic_complete(&[p("XI"), p("ZI")], 2),
            Err(Error::Structure(_))
        ));
        assert!(matches!(
            symplectic_complete(&[p("ZZ"), p("ZZ")], 2),
            Err(Error::Structure(_))
        ));
        assert!(symplectic_complete(&[p("Z"), p("X"), p("Y")], 1).is_err());
    }

    #[test]
    fn complete_is_deterministic() {
        let set = [p("ZZII"), p("IZZI"), p("XXXX")];
        assert_eq!(
            symplectic_complete(&set, 4).unwrap(),
            symplectic_complete(&set, 4).unwrap()
        );
    }

    pub(crate) fn assert_canonical(pairs: &[(PauliOp, PauliOp)]) {
        let flat: Vec<&PauliOp> = pairs.iter().flat_map(|(a, b)| [a, b]).collect();
        for (i, a) in flat.iter().enumerate() {
            for (j, b) in flat.iter().enumerate() {
                let expect = (i / 2 == j / 2 && i != j) as u8;
                assert_eq!(a.symplectic(b), expect, "pair ({i},{j}): {a} vs {b}");
            }
        }
    }

    fn arb_op(n: usize) -> impl Strategy<Value = PauliOp> {
        proptest::collection::vec(0u8..4, n)
            .prop_map(|v| PauliOp::from_letters(&v.into_iter().map(Pauli::from_code).collect::<Vec<_>>()))
    }

    /// Greedily keeps candidates that commute with, and are independent of,
    /// those already kept.
    fn isotropic_subset(cands: Vec<PauliOp>) -> Vec<PauliOp> {
        let mut kept: Vec<PauliOp> = Vec::new();
        for c in cands {
            if kept.iter().all(|k| k.symplectic(&c) == 0) {
                kept.push(c);
                if rank(&kept) < kept.len() {
                    kept.pop();
                }
            }
        }
        kept
    }

    proptest! {
        #[test]
        fn product_laws(a in arb_op(9), b in arb_op(9), c in arb_op(9)) {
            let ab = &a * &b;
            prop_assert_eq!(&ab, &(&b * &a));
            prop_assert_eq!(&(&ab * &c), &(&a * &(&b * &c)));
            prop_assert_eq!(&(&a * &PauliOp::identity(9)), &a);
            prop_assert!((&a * &a).is_identity());
            prop_assert!(ab.weight() <= a.weight() + b.weight());
            prop_assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
        }

        #[test]
        fn text_round_trip(a in arb_op(37)) {
            prop_assert_eq!(a.to_string().parse::<PauliOp>().unwrap(), a);
        }

        #[test]
        fn completion_is_canonical(
            n in 1usize..=16,
            seeds in proptest::collection::vec(proptest::collection::vec(0u8..4, 16), 0..20),
        ) {
            let cands: Vec<PauliOp> = seeds
                .into_iter()
                .map(|v| PauliOp::from_letters(&v[..n].iter().map(|&c| Pauli::from_code(c)).collect::<Vec<_>>()))
                .filter(|op| !op.is_identity())
                .collect();
            let set = isotropic_subset(cands);
            let pairs = symplectic_complete(&set, n).unwrap();
            prop_assert_eq!(pairs.len(), n);
            for (i, s) in set.iter().enumerate() {
                prop_assert_eq!(&pairs[i].0, s);
            }
            assert_canonical(&pairs);
        }
    }
}
