//! Toric-lattice geometry, stabilizers, syndromes and homology classes.
//!
//! Qubits live on the edges of an `ell x ell` periodic square lattice.
//! The horizontal edge `h(x, y)` joins vertices `(x, y)` and `(x + 1, y)`;
//! the vertical edge `v(x, y)` joins `(x, y)` and `(x, y + 1)`. Edge indices
//! are `h(x, y) = y * ell + x` and `v(x, y) = ell^2 + y * ell + x`.
//!
//! The plaquette `p(x, y)` is the face with lower-left corner `(x, y)` and the
//! site `s(x, y)` is the vertex `(x, y)`. Both are indexed `y * ell + x`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Periodic square lattice of linear size `ell` (a power of two, at least 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusLattice {
    ell: usize,
}

impl TorusLattice {
    pub fn new(ell: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::LatticeSize(ell, "must be at least 2"));
        }
        if !ell.is_power_of_two() {
            return Err(Error::LatticeSize(ell, "must be a power of two"));
        }
        Ok(Self { ell })
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Number of qubits, `2 * ell^2`.
    #[inline]
    pub fn n(&self) -> usize {
        2 * self.ell * self.ell
    }

    /// Number of plaquettes, which equals the number of sites.
    #[inline]
    pub fn faces(&self) -> usize {
        self.ell * self.ell
    }

    #[inline]
    fn wrap(&self, c: i64) -> usize {
        c.rem_euclid(self.ell as i64) as usize
    }

    #[inline]
    pub fn cell_index(&self, x: i64, y: i64) -> usize {
        self.wrap(y) * self.ell + self.wrap(x)
    }

    #[inline]
    pub fn h(&self, x: i64, y: i64) -> usize {
        self.cell_index(x, y)
    }

    #[inline]
    pub fn v(&self, x: i64, y: i64) -> usize {
        self.faces() + self.cell_index(x, y)
    }

    pub fn edge(&self, orientation: Orientation, x: i64, y: i64) -> usize {
        match orientation {
            Orientation::Horizontal => self.h(x, y),
            Orientation::Vertical => self.v(x, y),
        }
    }

    /// Inverse of the edge indexing.
    pub fn edge_coords(&self, e: usize) -> (Orientation, usize, usize) {
        assert!(e < self.n(), "edge {e} out of range");
        let f = self.faces();
        let (o, r) = if e < f {
            (Orientation::Horizontal, e)
        } else {
            (Orientation::Vertical, e - f)
        };
        (o, r % self.ell, r / self.ell)
    }

    /// Boundary edges of `p(x, y)`: `h(x,y), h(x,y+1), v(x,y), v(x+1,y)`.
    pub fn plaquette_edges(&self, x: i64, y: i64) -> [usize; 4] {
        [self.h(x, y), self.h(x, y + 1), self.v(x, y), self.v(x + 1, y)]
    }

    /// Edges adjacent to `s(x, y)`: `h(x,y), h(x-1,y), v(x,y), v(x,y-1)`.
    pub fn site_edges(&self, x: i64, y: i64) -> [usize; 4] {
        [self.h(x, y), self.h(x - 1, y), self.v(x, y), self.v(x, y - 1)]
    }

    pub fn plaquette_op(&self, x: i64, y: i64) -> PauliOp {
        PauliOp::z_on(self.n(), &self.plaquette_edges(x, y))
    }

    pub fn site_op(&self, x: i64, y: i64) -> PauliOp {
        PauliOp::x_on(self.n(), &self.site_edges(x, y))
    }

    /// Star operators `A_s` and plaquette operators `B_p`, both row-major.
    pub fn stabilizer_generators(&self) -> (Vec<PauliOp>, Vec<PauliOp>) {
        let l = self.ell as i64;
        let coords = || (0..l).flat_map(move |y| (0..l).map(move |x| (x, y)));
        let sites = coords().map(|(x, y)| self.site_op(x, y)).collect();
        let plaqs = coords().map(|(x, y)| self.plaquette_op(x, y)).collect();
        (sites, plaqs)
    }

    /// Canonical logical operators `[X1, Z1, X2, Z2]`.
    ///
    /// `X1` is X on `v(x, 0)` for all `x` (a horizontal dual loop) and `Z1`
    /// is Z on `v(0, y)` for all `y`. `X2` is X on `h(0, y)` and `Z2` is Z on
    /// `h(x, 0)`.
    pub fn logical_generators(&self) -> [PauliOp; 4] {
        let l = self.ell as i64;
        let n = self.n();
        let row_v: Vec<usize> = (0..l).map(|x| self.v(x, 0)).collect();
        let col_v: Vec<usize> = (0..l).map(|y| self.v(0, y)).collect();
        let col_h: Vec<usize> = (0..l).map(|y| self.h(0, y)).collect();
        let row_h: Vec<usize> = (0..l).map(|x| self.h(x, 0)).collect();
        [
            PauliOp::x_on(n, &row_v),
            PauliOp::z_on(n, &col_v),
            PauliOp::x_on(n, &col_h),
            PauliOp::z_on(n, &row_h),
        ]
    }

    /// Representative of a homology class built from the canonical logicals.
    pub fn class_representative(&self, class: u8) -> PauliOp {
        let mut op = PauliOp::identity(self.n());
        for (bit, l) in self.logical_generators().iter().enumerate() {
            if (class >> bit) & 1 == 1 {
                op *= l;
            }
        }
        op
    }

    fn check_op(&self, op: &PauliOp) -> Result<()> {
        if op.num_qubits() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: op.num_qubits(),
            });
        }
        Ok(())
    }

    /// Syndrome of `error`: a plaquette flips when it sees an odd number of
    /// X-parts, a site when it sees an odd number of Z-parts.
    pub fn syndrome_of(&self, error: &PauliOp) -> Result<Syndrome> {
        self.check_op(error)?;
        let l = self.ell as i64;
        let mut s = Syndrome::trivial(self.ell);
        for y in 0..l {
            for x in 0..l {
                let i = self.cell_index(x, y);
                let px = self
                    .plaquette_edges(x, y)
                    .iter()
                    .fold(false, |acc, &e| acc ^ error.x_bit(e));
                let sz = self
                    .site_edges(x, y)
                    .iter()
                    .fold(false, |acc, &e| acc ^ error.z_bit(e));
                s.plaquettes[i] = px as u8;
                s.sites[i] = sz as u8;
            }
        }
        Ok(s)
    }

    /// Class bits of an operator without checking that it is syndrome-free.
    ///
    /// Bit 0 (1) is anti-commutation with `Z1` (`X1`), bit 2 (3) with `Z2`
    /// (`X2`). So bit `2j` is the X-coefficient and bit `2j + 1` the
    /// Z-coefficient of logical qubit `j`.
    pub fn class_bits(&self, op: &PauliOp) -> u8 {
        let l = self.ell as i64;
        let mut c = 0u8;
        for t in 0..l {
            c ^= op.x_bit(self.v(0, t)) as u8;
            c ^= (op.z_bit(self.v(t, 0)) as u8) << 1;
            c ^= (op.x_bit(self.h(t, 0)) as u8) << 2;
            c ^= (op.z_bit(self.h(0, t)) as u8) << 3;
        }
        c
    }

    /// Homology class in `[0, 16)` of a syndrome-free operator.
    pub fn homology_class(&self, residual: &PauliOp) -> Result<u8> {
        if !self.syndrome_of(residual)?.is_trivial() {
            return Err(Error::NotSyndromeFree);
        }
        Ok(self.class_bits(residual))
    }

    /// Lattice of half the linear size.
    pub fn coarse(&self) -> Result<TorusLattice> {
        if self.ell < 4 {
            return Err(Error::LatticeSize(self.ell, "cannot coarse-grain below 4"));
        }
        TorusLattice::new(self.ell / 2)
    }

    /// Coarse-grains a syndrome onto the lattice of size `ell / 2`.
    ///
    /// Coarse plaquette `(I, J)` multiplies fine plaquettes
    /// `{2I, 2I+1} x {2J, 2J+1}`. Coarse site `(I, J)` multiplies fine sites
    /// `{2I-1, 2I} x {2J, 2J+1}`; this block is the one whose star product
    /// equals the coarse star assembled from the default cell's logicals.
    pub fn coarse_grain_syndrome(&self, fine: &Syndrome) -> Result<Syndrome> {
        self.coarse_grain_syndrome_with(fine, (0, 0), (-1, 0))
    }

    /// Coarse-graining with explicit lower-left offsets of the 2x2 blocks.
    pub fn coarse_grain_syndrome_with(
        &self,
        fine: &Syndrome,
        plaquette_offset: (i64, i64),
        site_offset: (i64, i64),
    ) -> Result<Syndrome> {
        if fine.ell != self.ell {
            return Err(Error::Syndrome(format!(
                "syndrome for ell={} used on ell={}",
                fine.ell, self.ell
            )));
        }
        let coarse = self.coarse()?;
        let cl = coarse.ell as i64;
        let (px, py) = plaquette_offset;
        let (sx, sy) = site_offset;
        let mut out = Syndrome::trivial(coarse.ell);
        for jj in 0..cl {
            for ii in 0..cl {
                let mut p = 0u8;
                let mut s = 0u8;
                for b in 0..2 {
                    for a in 0..2 {
                        p ^= fine.plaquettes[self.cell_index(2 * ii + px + a, 2 * jj + py + b)];
                        s ^= fine.sites[self.cell_index(2 * ii + sx + a, 2 * jj + sy + b)];
                    }
                }
                let i = coarse.cell_index(ii, jj);
                out.plaquettes[i] = p;
                out.sites[i] = s;
            }
        }
        Ok(out)
    }
}

/// Syndrome bits, `0` for outcome +1 and `1` for outcome -1.
///
/// Text form: one character per bit, all plaquettes row-major followed by
/// all sites row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Syndrome {
    ell: usize,
    pub plaquettes: Vec<u8>,
    pub sites: Vec<u8>,
}

impl Syndrome {
    pub fn trivial(ell: usize) -> Self {
        Self {
            ell,
            plaquettes: vec![0; ell * ell],
            sites: vec![0; ell * ell],
        }
    }

    pub fn from_bits(ell: usize, plaquettes: Vec<u8>, sites: Vec<u8>) -> Result<Self> {
        let m = ell * ell;
        if plaquettes.len() != m || sites.len() != m {
            return Err(Error::Syndrome(format!(
                "expected {m} plaquette and {m} site bits, got {} and {}",
                plaquettes.len(),
                sites.len()
            )));
        }
        if plaquettes.iter().chain(&sites).any(|&b| b > 1) {
            return Err(Error::Syndrome("bits must be 0 or 1".into()));
        }
        Ok(Self {
            ell,
            plaquettes,
            sites,
        })
    }

    /// Builds a syndrome from +1/-1 outcomes.
    pub fn from_pm1(ell: usize, plaquettes: &[i8], sites: &[i8]) -> Result<Self> {
        let conv = |v: &[i8]| -> Result<Vec<u8>> {
            v.iter()
                .map(|&s| match s {
                    1 => Ok(0),
                    -1 => Ok(1),
                    other => Err(Error::Syndrome(format!("outcome {other} is not +1 or -1"))),
                })
                .collect()
        };
        Self::from_bits(ell, conv(plaquettes)?, conv(sites)?)
    }

    pub fn plaquettes_pm1(&self) -> Vec<i8> {
        self.plaquettes.iter().map(|&b| 1 - 2 * b as i8).collect()
    }

    pub fn sites_pm1(&self) -> Vec<i8> {
        self.sites.iter().map(|&b| 1 - 2 * b as i8).collect()
    }

    #[inline]
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn is_trivial(&self) -> bool {
        self.plaquettes.iter().chain(&self.sites).all(|&b| b == 0)
    }

    /// Both sectors have even parity, as for any syndrome of a Pauli error.
    pub fn has_valid_parity(&self) -> bool {
        let par = |v: &[u8]| v.iter().fold(0u8, |a, &b| a ^ b);
        par(&self.plaquettes) == 0 && par(&self.sites) == 0
    }

    pub fn weight(&self) -> usize {
        self.plaquettes
            .iter()
            .chain(&self.sites)
            .filter(|&&b| b == 1)
            .count()
    }

    pub fn parse(ell: usize, text: &str) -> Result<Self> {
        let bits: Vec<u8> = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Syndrome(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<_>>()?;
        let m = ell * ell;
        if bits.len() != 2 * m {
            return Err(Error::Syndrome(format!(
                "expected {} bits for ell={ell}, got {}",
                2 * m,
                bits.len()
            )));
        }
        let sites = bits[m..].to_vec();
        let mut plaquettes = bits;
        plaquettes.truncate(m);
        Self::from_bits(ell, plaquettes, sites)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.plaquettes.iter().chain(&self.sites) {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}
