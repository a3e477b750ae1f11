//! Channel priors, error sampling and factorized error models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOp};
use crate::toric::TorusLattice;

const NORM_TOL: f64 = 1e-12;

/// Distribution over the four single-qubit letters, indexed by letter code
/// (`I, X, Z, Y`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitPrior(pub [f64; 4]);

impl QubitPrior {
    /// Prior from probabilities given in `I, X, Y, Z` order.
    pub fn new(i: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_codes([i, x, z, y])
    }

    /// Prior from probabilities indexed by letter code.
    pub fn from_codes(p: [f64; 4]) -> Result<Self> {
        if let Some(&bad) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Distribution(format!("entry {bad} is negative or not finite")));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > NORM_TOL {
            return Err(Error::Distribution(format!("entries sum to {s}")));
        }
        Ok(Self(p))
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    /// Normalizes nonnegative weights; `None` when they sum to zero.
    pub fn normalize(w: [f64; 4]) -> Option<Self> {
        let s: f64 = w.iter().sum();
        (s > 0.0).then(|| Self(w.map(|v| v / s)))
    }

    #[inline]
    pub fn get(&self, letter: Pauli) -> f64 {
        self.0[letter.code()]
    }

    /// Letter with the largest probability; ties go to the lowest code.
    pub fn argmax(&self) -> Pauli {
        let mut best = 0;
        for k in 1..4 {
            if self.0[k] > self.0[best] {
                best = k;
            }
        }
        Pauli::from_code(best as u8)
    }
}

/// The depolarizing prior `(1 - p, p/3, p/3, p/3)`.
pub fn depolarizing_prior(p: f64) -> Result<QubitPrior> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability(p));
    }
    Ok(QubitPrior([1.0 - p, p / 3.0, p / 3.0, p / 3.0]))
}

/// Joint distribution of two qubits, `joint[a + 4 * b]` for letter codes
/// `a` on `qubits[0]` and `b` on `qubits[1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairFactor {
    pub qubits: [usize; 2],
    pub joint: [f64; 16],
}

impl PairFactor {
    pub fn new(qubits: [usize; 2], joint: [f64; 16]) -> Result<Self> {
        if qubits[0] == qubits[1] {
            return Err(Error::Distribution("pair factor on a single qubit".into()));
        }
        if joint.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Distribution("pair factor has a negative entry".into()));
        }
        let s: f64 = joint.iter().sum();
        if (s - 1.0).abs() > NORM_TOL {
            return Err(Error::Distribution(format!("pair factor sums to {s}")));
        }
        Ok(Self { qubits, joint })
    }

    pub fn product(qubits: [usize; 2], a: &QubitPrior, b: &QubitPrior) -> Self {
        let mut joint = [0.0; 16];
        for j in 0..4 {
            for i in 0..4 {
                joint[i + 4 * j] = a.0[i] * b.0[j];
            }
        }
        Self { qubits, joint }
    }

    #[inline]
    pub fn get(&self, a: Pauli, b: Pauli) -> f64 {
        self.joint[a.code() + 4 * b.code()]
    }

    /// Marginal of `qubits[k]`, summed in the row or column order that
    /// matches `k`.
    pub fn marginal(&self, k: usize) -> QubitPrior {
        let mut m = [0.0; 4];
        for j in 0..4 {
            for i in 0..4 {
                let v = self.joint[i + 4 * j];
                if k == 0 {
                    m[i] += v;
                } else {
                    m[j] += v;
                }
            }
        }
        QubitPrior(m)
    }
}

/// Per-qubit priors plus optional two-qubit joint factors. Every qubit is
/// covered by exactly one factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel {
    priors: Vec<QubitPrior>,
    pairs: Vec<PairFactor>,
    pair_of: Vec<Option<(usize, usize)>>,
}

/// The error model of a 12-qubit cell.
pub type CellErrorModel = ErrorModel;

impl ErrorModel {
    /// Independent identical priors on `n` qubits.
    pub fn iid(n: usize, prior: QubitPrior) -> Self {
        Self {
            priors: vec![prior; n],
            pairs: Vec::new(),
            pair_of: vec![None; n],
        }
    }

    /// Model from single-qubit priors and pair factors. Qubits in a pair take
    /// their entry of `priors` from the pair's marginal.
    pub fn new(mut priors: Vec<QubitPrior>, pairs: Vec<PairFactor>) -> Result<Self> {
        let n = priors.len();
        let mut pair_of = vec![None; n];
        for (f, pf) in pairs.iter().enumerate() {
            for (k, &q) in pf.qubits.iter().enumerate() {
                if q >= n {
                    return Err(Error::Distribution(format!("pair factor on qubit {q} >= {n}")));
                }
                if pair_of[q].is_some() {
                    return Err(Error::Distribution(format!("qubit {q} is in two pair factors")));
                }
                pair_of[q] = Some((f, k));
                priors[q] = pf.marginal(k);
            }
        }
        Ok(Self {
            priors,
            pairs,
            pair_of,
        })
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.priors.len()
    }

    /// Marginal prior of qubit `q`.
    #[inline]
    pub fn prior(&self, q: usize) -> &QubitPrior {
        &self.priors[q]
    }

    pub fn priors(&self) -> &[QubitPrior] {
        &self.priors
    }

    pub fn pairs(&self) -> &[PairFactor] {
        &self.pairs
    }

    /// Pair factor index and position of `q`, if it is paired.
    #[inline]
    pub fn pair_of(&self, q: usize) -> Option<(usize, usize)> {
        self.pair_of[q]
    }

    /// Probability of `f`: the product of the factor entries it selects.
    pub fn evaluate(&self, f: &PauliOp) -> f64 {
        assert_eq!(f.num_qubits(), self.num_qubits(), "dimension mismatch");
        let mut p = 1.0;
        for q in 0..self.num_qubits() {
            if self.pair_of[q].is_none() {
                p *= self.priors[q].get(f.letter(q));
            }
        }
        for pf in &self.pairs {
            p *= pf.get(f.letter(pf.qubits[0]), f.letter(pf.qubits[1]));
        }
        p
    }

    /// Multiplies the factor of each listed qubit by a weight vector over its
    /// letter and renormalizes that factor. A factor whose weights vanish is
    /// left as all zeros.
    pub fn reweighted(&self, weights: &[(usize, [f64; 4])]) -> ErrorModel {
        let mut out = self.clone();
        let mut touched = vec![false; self.pairs.len()];
        for &(q, w) in weights {
            match self.pair_of[q] {
                None => {
                    let r = out.priors[q].0;
                    let mut v = [0.0; 4];
                    for k in 0..4 {
                        v[k] = r[k] * w[k];
                    }
                    out.priors[q] = QubitPrior::normalize(v).unwrap_or(QubitPrior([0.0; 4]));
                }
                Some((f, pos)) => {
                    touched[f] = true;
                    let j = &mut out.pairs[f].joint;
                    for b in 0..4 {
                        for a in 0..4 {
                            j[a + 4 * b] *= if pos == 0 { w[a] } else { w[b] };
                        }
                    }
                }
            }
        }
        for (f, t) in touched.into_iter().enumerate() {
            if t {
                let pf = &mut out.pairs[f];
                let s: f64 = pf.joint.iter().sum();
                if s > 0.0 {
                    pf.joint.iter_mut().for_each(|v| *v /= s);
                }
                let q = pf.qubits;
                out.priors[q[0]] = pf.marginal(0);
                out.priors[q[1]] = pf.marginal(1);
            }
        }
        out
    }
}

/// Generator for trial `stream` under the master `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws one letter per qubit independently from `prior`.
pub fn sample_iid<R: Rng>(n: usize, prior: &QubitPrior, rng: &mut R) -> PauliOp {
    let c = prior.0;
    let (t0, t1, t2) = (c[0], c[0] + c[1], c[0] + c[1] + c[2]);
    let mut op = PauliOp::identity(n);
    for q in 0..n {
        let u: f64 = rng.gen();
        let letter = if u < t0 {
            continue;
        } else if u < t1 {
            Pauli::X
        } else if u < t2 {
            Pauli::Z
        } else {
            Pauli::Y
        };
        op.set_letter(q, letter);
    }
    op
}

/// Depolarizing error on the lattice for trial `stream` of master `seed`.
pub fn sample_error(lat: &TorusLattice, p: f64, seed: u64, stream: u64) -> Result<PauliOp> {
    let prior = depolarizing_prior(p)?;
    let mut rng = trial_rng(seed, stream);
    Ok(sample_iid(lat.n(), &prior, &mut rng))
}
