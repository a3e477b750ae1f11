//! Renormalization decoder.
//!
//! Each level partitions the lattice into overlapping 12-qubit cells, runs
//! belief propagation between them, and computes every cell's posterior over
//! its two logical qubits given its 6 syndrome bits. Those posteriors become
//! the error model of the half-size lattice, whose qubits are the cells'
//! logical qubits. At `ell = 2` the class distribution is computed exactly.

use rayon::prelude::*;

use crate::bp::{self, RoundStats};
use crate::cell::{
    derive_cell_basis, renormalized_qubit_map, CellBasis, CellGeometry, CoarseSources, LevelLayout,
    RenormalizedMap, CELL_QUBITS,
};
use crate::config::DecoderConfig;
use crate::engine::{gray_code_table, CellCode, Plan};
use crate::error::{Error, Result};
use crate::noise::{depolarizing_prior, CellErrorModel, ErrorModel, PairFactor, QubitPrior};
use crate::pauli::{find_partners, single_qubit_pool, PauliOp};
use crate::toric::{Syndrome, TorusLattice};

pub const LOGICAL_CLASSES: usize = 16;
pub const EDGE_CLASSES: usize = 256;

/// Normalized `P(L, E | c)` over one cell, indexed `L * 256 + E`.
///
/// Within `L` and `E`, bits `2j` and `2j + 1` are the X and Z coefficients
/// of logical (edge) pair `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalTable {
    values: Vec<f64>,
    normalization: f64,
    degenerate: bool,
}

impl ConditionalTable {
    /// Normalizes raw weights. An all-zero input gives the uniform table
    /// flagged as degenerate.
    pub fn from_weights(mut values: Vec<f64>) -> Self {
        assert_eq!(values.len(), LOGICAL_CLASSES * EDGE_CLASSES);
        let z: f64 = values.iter().sum();
        if z > 0.0 && z.is_finite() {
            values.iter_mut().for_each(|v| *v /= z);
            Self {
                values,
                normalization: z,
                degenerate: false,
            }
        } else {
            Self::uniform_degenerate()
        }
    }

    pub fn uniform() -> Self {
        Self {
            values: vec![1.0 / (LOGICAL_CLASSES * EDGE_CLASSES) as f64; LOGICAL_CLASSES * EDGE_CLASSES],
            normalization: 1.0,
            degenerate: false,
        }
    }

    fn uniform_degenerate() -> Self {
        Self {
            normalization: 0.0,
            degenerate: true,
            ..Self::uniform()
        }
    }

    pub fn get(&self, l: u8, e: u8) -> f64 {
        self.values[l as usize * EDGE_CLASSES + e as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of the raw weights, `P(c)` for a normalized model.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// Marginals of a [`ConditionalTable`].
#[derive(Clone, Debug, PartialEq)]
pub struct Marginals {
    pub logical: [f64; LOGICAL_CLASSES],
    pub logical1: [f64; 4],
    pub logical2: [f64; 4],
    /// Whether `P(L1) P(L2)` reproduces `P(L)` to within `1e-12`.
    pub factorizes: bool,
    pub edges: [[f64; 4]; 4],
}

pub fn marginals(table: &ConditionalTable) -> Marginals {
    let mut logical = [0.0; LOGICAL_CLASSES];
    let mut edges = [[0.0; 4]; 4];
    for l in 0..LOGICAL_CLASSES {
        for e in 0..EDGE_CLASSES {
            let v = table.values[l * EDGE_CLASSES + e];
            logical[l] += v;
            for (j, m) in edges.iter_mut().enumerate() {
                m[(e >> (2 * j)) & 3] += v;
            }
        }
    }
    let (logical1, logical2) = split_logical(&logical);
    let factorizes = (0..LOGICAL_CLASSES).all(|l| (logical1[l & 3] * logical2[l >> 2] - logical[l]).abs() <= 1e-12);
    Marginals {
        logical,
        logical1,
        logical2,
        factorizes,
        edges,
    }
}

fn split_logical(joint: &[f64; LOGICAL_CLASSES]) -> ([f64; 4], [f64; 4]) {
    let mut m1 = [0.0; 4];
    let mut m2 = [0.0; 4];
    for (l, &v) in joint.iter().enumerate() {
        m1[l & 3] += v;
        m2[l >> 2] += v;
    }
    (m1, m2)
}

/// Product of the pure errors of the `-1` bits of a 6-bit cell syndrome.
pub fn reference_error(basis: &CellBasis, c: u8) -> PauliOp {
    basis.reference_error(c)
}

/// `P(L, E | c)` for one cell by coset enumeration. Each `(slot, message)`
/// in `reweight` multiplies that slot's prior, which is then renormalized.
pub fn cell_conditional(
    model: &CellErrorModel,
    basis: &CellBasis,
    c: u8,
    reweight: &[(usize, [f64; 4])],
) -> Result<ConditionalTable> {
    if model.num_qubits() != CELL_QUBITS {
        return Err(Error::Dimension {
            expected: CELL_QUBITS,
            found: model.num_qubits(),
        });
    }
    if c >= 64 {
        return Err(Error::Syndrome(format!("cell syndrome {c} has more than 6 bits")));
    }
    let code = CellCode::new(basis);
    let m = if reweight.is_empty() {
        model.clone()
    } else {
        model.reweighted(reweight)
    };
    Ok(ConditionalTable::from_weights(gray_code_table(&code, &m, c)))
}

/// Exact class distribution of a 12-qubit cell.
pub fn exact_cell_ml(model: &CellErrorModel, basis: &CellBasis, c: u8) -> Result<[f64; LOGICAL_CLASSES]> {
    Ok(marginals(&cell_conditional(model, basis, c, &[])?).logical)
}

/// Largest number of independent stabilizers enumerated by the exact stage.
const MAX_EXACT_GENERATORS: usize = 20;

/// A torus small enough to sum over its whole stabilizer group.
#[derive(Clone, Debug)]
pub struct SmallTorus {
    lattice: TorusLattice,
    /// Independent generators: all sites but the last, then all plaquettes
    /// but the last.
    generators: Vec<PauliOp>,
    pure_errors: Vec<PauliOp>,
    logicals: Vec<PauliOp>,
}

impl SmallTorus {
    pub fn new(lattice: TorusLattice) -> Result<Self> {
        let m = lattice.faces();
        if 2 * m - 2 > MAX_EXACT_GENERATORS {
            return Err(Error::TooLarge(format!(
                "ell={} has {} independent stabilizers",
                lattice.ell(),
                2 * m - 2
            )));
        }
        let (sites, plaqs) = lattice.stabilizer_generators();
        let generators: Vec<PauliOp> = sites[..m - 1].iter().chain(&plaqs[..m - 1]).cloned().collect();
        let logicals = lattice.logical_generators().to_vec();
        let pure_errors = find_partners(&generators, &single_qubit_pool(lattice.n()), &logicals)?;
        let logicals = (0..LOGICAL_CLASSES as u8)
            .map(|l| lattice.class_representative(l))
            .collect();
        Ok(Self {
            lattice,
            generators,
            pure_errors,
            logicals,
        })
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    fn check(&self, syndrome: &Syndrome) -> Result<()> {
        if syndrome.ell() != self.lattice.ell() {
            return Err(Error::Syndrome(format!(
                "syndrome for ell={} used on ell={}",
                syndrome.ell(),
                self.lattice.ell()
            )));
        }
        if !syndrome.has_valid_parity() {
            return Err(Error::Syndrome("odd number of -1 plaquettes or sites".into()));
        }
        Ok(())
    }

    /// An error with the given syndrome, built from pure errors.
    pub fn reference_error(&self, syndrome: &Syndrome) -> Result<PauliOp> {
        self.check(syndrome)?;
        let m = self.lattice.faces();
        let mut t = PauliOp::identity(self.lattice.n());
        for i in 0..m - 1 {
            if syndrome.sites[i] == 1 {
                t *= &self.pure_errors[i];
            }
            if syndrome.plaquettes[i] == 1 {
                t *= &self.pure_errors[m - 1 + i];
            }
        }
        Ok(t)
    }

    /// Unnormalized `P(class, syndrome)`: the model summed over every coset
    /// element `rep(class) T S`.
    pub fn class_weights(&self, syndrome: &Syndrome, model: &ErrorModel) -> Result<[f64; LOGICAL_CLASSES]> {
        if model.num_qubits() != self.lattice.n() {
            return Err(Error::Dimension {
                expected: self.lattice.n(),
                found: model.num_qubits(),
            });
        }
        let t = self.reference_error(syndrome)?;
        let g = self.generators.len();
        let mut out = [0.0; LOGICAL_CLASSES];
        for (l, o) in out.iter_mut().enumerate() {
            let mut op = &self.logicals[l] * &t;
            let mut acc = model.evaluate(&op);
            for i in 1u64..(1 << g) {
                op *= &self.generators[i.trailing_zeros() as usize];
                acc += model.evaluate(&op);
            }
            *o = acc;
        }
        Ok(out)
    }
}

/// Exact normalized class distribution on a torus with at most
/// `2^20` stabilizer elements (in practice `ell = 2`).
pub fn exact_ml(lat: &TorusLattice, syndrome: &Syndrome, model: &ErrorModel) -> Result<[f64; LOGICAL_CLASSES]> {
    let w = SmallTorus::new(lat.clone())?.class_weights(syndrome, model)?;
    normalize16(w).ok_or_else(|| Error::Distribution("syndrome has zero probability".into()))
}

fn normalize16(w: [f64; LOGICAL_CLASSES]) -> Option<[f64; LOGICAL_CLASSES]> {
    let s: f64 = w.iter().sum();
    (s > 0.0 && s.is_finite()).then(|| w.map(|v| v / s))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in dist.iter().enumerate().skip(1) {
        if v > dist[best] {
            best = i;
        }
    }
    best
}

/// Statistics of one renormalization step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LevelDiagnostics {
    pub ell: usize,
    pub bp: Vec<RoundStats>,
    /// Cells whose logical posterior vanished and was replaced by uniform.
    pub degenerate_cells: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub levels: Vec<LevelDiagnostics>,
    /// The final exact stage saw a zero-probability syndrome.
    pub degenerate_top: bool,
}

impl Diagnostics {
    pub fn degenerate_cells(&self) -> usize {
        self.levels.iter().map(|l| l.degenerate_cells).sum()
    }

    /// Per-round message changes as CSV.
    pub fn bp_csv(&self) -> String {
        let rows: Vec<(usize, Vec<RoundStats>)> = self.levels.iter().map(|l| (l.ell, l.bp.clone())).collect();
        bp::stats_csv(&rows)
    }
}

#[derive(Clone, Debug)]
pub struct DecodeResult {
    /// Posterior over the 16 homology classes of the error.
    pub distribution: [f64; LOGICAL_CLASSES],
    /// Most likely class; ties go to the lowest index.
    pub class: u8,
    /// An operator with the input syndrome in the chosen class.
    pub correction: PauliOp,
    pub diagnostics: Option<Diagnostics>,
}

/// Error model of the next lattice.
#[derive(Clone, Debug)]
pub enum CoarseModel {
    /// One model per cell of the next level.
    Cells(Vec<CellErrorModel>),
    /// The whole `ell = 2` torus.
    Torus(ErrorModel),
}

/// Output of one renormalization step.
#[derive(Clone, Debug)]
pub struct RenormalizedLevel {
    pub coarse: TorusLattice,
    pub model: CoarseModel,
    pub syndrome: Syndrome,
    /// 6-bit syndromes of the cells of the fine level.
    pub cell_syndromes: Vec<u8>,
    /// Normalized `P(L1, L2 | c)` per fine cell, indexed `L1 + 4 L2`.
    pub posteriors: Vec<[f64; LOGICAL_CLASSES]>,
    pub diagnostics: LevelDiagnostics,
}

#[derive(Clone, Debug)]
struct Level {
    layout: LevelLayout,
    map: RenormalizedMap,
    plan: Plan,
    /// Present when the next lattice is still cell-decoded.
    sources: Option<CoarseSources>,
}

/// Decoder for one lattice size, with all geometry precomputed.
#[derive(Clone, Debug)]
pub struct Decoder {
    config: DecoderConfig,
    geometry: CellGeometry,
    basis: CellBasis,
    levels: Vec<Level>,
    top: SmallTorus,
}

impl Decoder {
    pub fn new(ell: usize, config: DecoderConfig) -> Result<Self> {
        let geometry = config.geometry()?;
        Self::with_geometry(ell, config, geometry)
    }

    pub fn with_geometry(ell: usize, config: DecoderConfig, geometry: CellGeometry) -> Result<Self> {
        config.validate()?;
        if ell < 4 || !ell.is_power_of_two() {
            return Err(Error::LatticeSize(ell, "power of two >= 4"));
        }
        let basis = derive_cell_basis(&geometry)?;
        let code = CellCode::new(&basis);
        let mut levels: Vec<Level> = Vec::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut l = ell;
        while l >= 4 {
            let layout = LevelLayout::new(TorusLattice::new(l)?, &geometry)?;
            let map = renormalized_qubit_map(l, &geometry)?;
            let sources = if l >= 8 {
                let next = LevelLayout::new(map.coarse.clone(), &geometry)?;
                let s = map.coarse_sources(&next);
                if s.pairs.iter().any(|p| *p != s.pairs[0]) {
                    return Err(Error::Geometry("coarse cells disagree on their pair structure".into()));
                }
                Some(s)
            } else {
                None
            };
            let plan = Plan::new(&code, &pairs);
            if let Some(s) = &sources {
                pairs = s.pairs[0].clone();
            }
            levels.push(Level {
                layout,
                map,
                plan,
                sources,
            });
            l /= 2;
        }
        let top = SmallTorus::new(TorusLattice::new(2)?)?;
        Ok(Self {
            config,
            geometry,
            basis,
            levels,
            top,
        })
    }

    pub fn ell(&self) -> usize {
        self.levels[0].layout.lattice.ell()
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.levels[0].layout.lattice
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn geometry(&self) -> &CellGeometry {
        &self.geometry
    }

    pub fn basis(&self) -> &CellBasis {
        &self.basis
    }

    /// Number of renormalization steps before the exact stage.
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn layout(&self, level: usize) -> &LevelLayout {
        &self.levels[level].layout
    }

    pub fn plan(&self, level: usize) -> &Plan {
        &self.levels[level].plan
    }

    /// Cell models of the finest level under an i.i.d. prior.
    pub fn initial_models(&self, prior: QubitPrior) -> Vec<CellErrorModel> {
        vec![ErrorModel::iid(CELL_QUBITS, prior); self.levels[0].layout.num_cells()]
    }

    fn map_cells<T: Send, F: Fn(usize) -> T + Sync + Send>(&self, n: usize, f: F) -> Vec<T> {
        if self.config.parallel_cells {
            (0..n).into_par_iter().map(f).collect()
        } else {
            (0..n).map(f).collect()
        }
    }

    /// Runs BP on level `k`, computes every cell's logical posterior and
    /// assembles the error model and syndrome of the next lattice.
    pub fn renormalize_level(&self, k: usize, models: &[CellErrorModel], syndrome: &Syndrome) -> Result<RenormalizedLevel> {
        let level = &self.levels[k];
        let layout = &level.layout;
        let cells = layout.num_cells();
        if models.len() != cells {
            return Err(Error::Dimension {
                expected: cells,
                found: models.len(),
            });
        }
        if syndrome.ell() != layout.lattice.ell() {
            return Err(Error::Syndrome(format!(
                "syndrome for ell={} used on ell={}",
                syndrome.ell(),
                layout.lattice.ell()
            )));
        }
        let cell_syndromes: Vec<u8> = (0..cells).map(|c| layout.cell_syndrome(c, syndrome)).collect();
        let (msgs, bp_stats) = bp::run_bp(
            layout,
            &level.plan,
            models,
            &cell_syndromes,
            self.config.bp_rounds,
            self.config.damping,
            self.config.parallel_cells,
        );
        let raw = self.map_cells(cells, |c| {
            let sw = bp::slot_weights(layout, &msgs.incoming[c]);
            let w = level.plan.weights(&models[c], Some(&sw));
            normalize16(level.plan.logical_weights(&w, cell_syndromes[c]))
        });
        let degenerate_cells = raw.iter().filter(|r| r.is_none()).count();
        let posteriors: Vec<[f64; LOGICAL_CLASSES]> = raw
            .into_iter()
            .map(|r| r.unwrap_or([1.0 / LOGICAL_CLASSES as f64; LOGICAL_CLASSES]))
            .collect();

        let coarse = level.map.coarse.clone();
        let model = match &level.sources {
            Some(src) => CoarseModel::Cells(
                src.slots
                    .iter()
                    .zip(&src.pairs)
                    .map(|(slots, pairs)| coarse_cell_model(slots, pairs, &posteriors))
                    .collect::<Result<_>>()?,
            ),
            None => {
                let pairs = level
                    .map
                    .targets
                    .iter()
                    .zip(&posteriors)
                    .map(|(t, j)| PairFactor::new(*t, *j))
                    .collect::<Result<Vec<_>>>()?;
                CoarseModel::Torus(ErrorModel::new(vec![QubitPrior::uniform(); coarse.n()], pairs)?)
            }
        };
        let coarse_syndrome = layout.lattice.coarse_grain_syndrome_with(
            syndrome,
            self.geometry.coarse_plaquette_offset,
            self.geometry.coarse_site_offset,
        )?;
        Ok(RenormalizedLevel {
            coarse,
            model,
            syndrome: coarse_syndrome,
            cell_syndromes,
            posteriors,
            diagnostics: LevelDiagnostics {
                ell: layout.lattice.ell(),
                bp: bp_stats,
                degenerate_cells,
            },
        })
    }

    /// Decodes under i.i.d. depolarizing noise of strength `p`.
    pub fn decode(&self, syndrome: &Syndrome, p: f64) -> Result<DecodeResult> {
        self.decode_with_prior(syndrome, depolarizing_prior(p)?)
    }

    pub fn decode_with_prior(&self, syndrome: &Syndrome, prior: QubitPrior) -> Result<DecodeResult> {
        self.decode_with_models(syndrome, self.initial_models(prior))
    }

    /// Decodes with explicit cell models for the finest level.
    pub fn decode_with_models(&self, syndrome: &Syndrome, models: Vec<CellErrorModel>) -> Result<DecodeResult> {
        if syndrome.ell() != self.ell() {
            return Err(Error::Syndrome(format!(
                "syndrome for ell={} used on ell={}",
                syndrome.ell(),
                self.ell()
            )));
        }
        if !syndrome.has_valid_parity() {
            return Err(Error::Syndrome("odd number of -1 plaquettes or sites".into()));
        }
        let mut models = models;
        let mut syn = syndrome.clone();
        let mut cell_syndromes = Vec::with_capacity(self.levels.len());
        let mut diag = Diagnostics::default();
        let mut top_model = None;
        for k in 0..self.levels.len() {
            let r = self.renormalize_level(k, &models, &syn)?;
            cell_syndromes.push(r.cell_syndromes);
            if self.config.diagnostics {
                diag.levels.push(r.diagnostics);
            } else {
                diag.levels.push(LevelDiagnostics {
                    degenerate_cells: r.diagnostics.degenerate_cells,
                    ell: r.diagnostics.ell,
                    bp: Vec::new(),
                });
            }
            syn = r.syndrome;
            match r.model {
                CoarseModel::Cells(m) => models = m,
                CoarseModel::Torus(m) => top_model = Some(m),
            }
        }
        let top_model = top_model.expect("last level feeds the exact stage");
        let weights = self.top.class_weights(&syn, &top_model)?;
        let distribution = normalize16(weights).unwrap_or_else(|| {
            diag.degenerate_top = true;
            [1.0 / LOGICAL_CLASSES as f64; LOGICAL_CLASSES]
        });
        let class = argmax(&distribution) as u8;

        let mut correction = self.top.reference_error(&syn)?;
        correction *= &self.top.lattice().class_representative(class);
        for (k, level) in self.levels.iter().enumerate().rev() {
            correction = self.lift_correction(level, &cell_syndromes[k], &correction);
        }
        Ok(DecodeResult {
            distribution,
            class,
            correction,
            diagnostics: self.config.diagnostics.then_some(diag),
        })
    }

    /// `T_k` times the coarse correction mapped onto cell logicals.
    fn lift_correction(&self, level: &Level, cell_syndromes: &[u8], coarse: &PauliOp) -> PauliOp {
        let layout = &level.layout;
        let mut out = PauliOp::identity(layout.lattice.n());
        for (c, &s) in cell_syndromes.iter().enumerate() {
            if s != 0 {
                layout.place(c, &self.basis.reference_error(s), &mut out);
            }
        }
        for e in coarse.support() {
            let a = coarse.letter(e);
            let (c, j) = level.map.sources[e];
            let (x, z) = &self.basis.logicals[j];
            if a.x() {
                layout.place(c, x, &mut out);
            }
            if a.z() {
                layout.place(c, z, &mut out);
            }
        }
        out
    }
}

/// Builds a coarse cell's model: slots fed by both logicals of one bare cell
/// keep the joint posterior, the rest get the matching marginal.
fn coarse_cell_model(
    slots: &[(usize, usize); CELL_QUBITS],
    pairs: &[(usize, usize)],
    posteriors: &[[f64; LOGICAL_CLASSES]],
) -> Result<CellErrorModel> {
    let priors = slots
        .iter()
        .map(|&(c, j)| {
            let (m1, m2) = split_logical(&posteriors[c]);
            QubitPrior([m1, m2][j])
        })
        .collect();
    let factors = pairs
        .iter()
        .map(|&(a, b)| PairFactor::new([a, b], posteriors[slots[a].0]))
        .collect::<Result<Vec<_>>>()?;
    ErrorModel::new(priors, factors)
}

/// Decodes one syndrome under depolarizing noise `p`.
pub fn decode(lat: &TorusLattice, syndrome: &Syndrome, p: f64, config: &DecoderConfig) -> Result<DecodeResult> {
    Decoder::new(lat.ell(), config.clone())?.decode(syndrome, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::default_geometry;
    use crate::noise::sample_error;

    fn decoder(ell: usize, rounds: usize) -> Decoder {
        Decoder::new(
            ell,
            DecoderConfig {
                bp_rounds: rounds,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn conditional_table_normalizes() {
        let basis = derive_cell_basis(&default_geometry()).unwrap();
        let model = ErrorModel::iid(12, depolarizing_prior(0.15).unwrap());
        let t = cell_conditional(&model, &basis, 0b100110, &[]).unwrap();
        assert!(!t.is_degenerate());
        assert!((t.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(t.values().iter().all(|&v| v > 0.0));
        let m = marginals(&t);
        assert!((m.logical1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for e in &m.edges {
            assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_table_is_uniform() {
        let basis = derive_cell_basis(&default_geometry()).unwrap();
        let model = ErrorModel::iid(12, QubitPrior::new(1.0, 0.0, 0.0, 0.0).unwrap());
        let t = cell_conditional(&model, &basis, 1, &[]).unwrap();
        assert!(t.is_degenerate());
        assert_eq!(t.get(0, 0), 1.0 / 4096.0);
    }

    #[test]
    fn marginals_of_product_table_factorize() {
        let p1 = [0.4, 0.3, 0.2, 0.1];
        let p2 = [0.7, 0.1, 0.1, 0.1];
        let mut v = vec![0.0; 4096];
        for l in 0..16 {
            for e in 0..256 {
                v[l * 256 + e] = p1[l & 3] * p2[l >> 2] / 256.0;
            }
        }
        let m = marginals(&ConditionalTable::from_weights(v));
        assert!(m.factorizes);
        for a in 0..4 {
            assert!((m.logical1[a] - p1[a]).abs() < 1e-12);
            assert!((m.logical2[a] - p2[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_table_has_uniform_marginals() {
        let m = marginals(&ConditionalTable::uniform());
        assert!(m.logical.iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-15));
        assert!(m.logical1.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        assert!(m.factorizes);
    }

    #[test]
    fn small_torus_reference_error_has_syndrome() {
        let t = SmallTorus::new(TorusLattice::new(2).unwrap()).unwrap();
        let lat = t.lattice().clone();
        for k in 0..200 {
            let e = sample_error(&lat, 0.5, 1, k).unwrap();
            let s = lat.syndrome_of(&e).unwrap();
            let r = t.reference_error(&s).unwrap();
            assert_eq!(lat.syndrome_of(&r).unwrap(), s);
        }
    }

    #[test]
    fn exact_stage_rejects_large_lattices() {
        assert!(matches!(SmallTorus::new(TorusLattice::new(4).unwrap()), Err(Error::TooLarge(_))));
    }

    #[test]
    fn exact_ml_uniform_model() {
        let lat = TorusLattice::new(2).unwrap();
        let d = exact_ml(&lat, &Syndrome::trivial(2), &ErrorModel::iid(8, QubitPrior::uniform())).unwrap();
        assert!(d.iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-12));
    }

    #[test]
    fn level_structure() {
        let d = decoder(16, 3);
        assert_eq!(d.num_levels(), 3);
        assert!(d.levels[0].plan.factors.len() == 12);
        assert!(d.levels[1].plan.factors.len() < 12);
        assert!(Decoder::new(2, DecoderConfig::default()).is_err());
        assert!(Decoder::new(12, DecoderConfig::default()).is_err());
    }

    #[test]
    fn trivial_syndrome_decodes_to_identity() {
        for ell in [4, 8, 16] {
            let d = decoder(ell, 3);
            let r = d.decode(&Syndrome::trivial(ell), 0.05).unwrap();
            assert_eq!(r.class, 0);
            assert!(r.distribution[0] > 0.9);
            assert_eq!(d.lattice().homology_class(&r.correction).unwrap(), 0);
        }
    }

    #[test]
    fn p_zero_trivial_syndrome_is_certain() {
        let d = decoder(8, 3);
        let r = d.decode(&Syndrome::trivial(8), 0.0).unwrap();
        assert_eq!(r.class, 0);
        assert_eq!(r.distribution[0], 1.0);
    }

    #[test]
    fn correction_reproduces_syndrome() {
        for ell in [4, 8, 16] {
            let d = decoder(ell, 2);
            let lat = d.lattice().clone();
            for t in 0..20 {
                let e = sample_error(&lat, 0.1, 11, t).unwrap();
                let s = lat.syndrome_of(&e).unwrap();
                let r = d.decode(&s, 0.1).unwrap();
                assert_eq!(lat.syndrome_of(&r.correction).unwrap(), s, "ell={ell} trial={t}");
            }
        }
    }

    #[test]
    fn single_qubit_errors_are_corrected() {
        let d = decoder(8, 3);
        let lat = d.lattice().clone();
        for q in 0..lat.n() {
            for letter in [crate::Pauli::X, crate::Pauli::Y, crate::Pauli::Z] {
                let e = PauliOp::single(lat.n(), q, letter);
                let r = d.decode(&lat.syndrome_of(&e).unwrap(), 0.05).unwrap();
                let residual = &e * &r.correction;
                assert_eq!(lat.homology_class(&residual).unwrap(), 0, "q={q} {letter:?}");
            }
        }
    }

    #[test]
    fn diagnostics_are_collected_on_request() {
        let d = Decoder::new(
            8,
            DecoderConfig {
                diagnostics: true,
                ..Default::default()
            },
        )
        .unwrap();
        let lat = d.lattice().clone();
        let e = sample_error(&lat, 0.1, 3, 0).unwrap();
        let r = d.decode(&lat.syndrome_of(&e).unwrap(), 0.1).unwrap();
        let diag = r.diagnostics.unwrap();
        assert_eq!(diag.levels.len(), 2);
        assert_eq!(diag.levels[0].bp.len(), 3);
        assert_eq!(diag.bp_csv().lines().count(), 7);
    }

    #[test]
    fn parallel_cells_match_serial() {
        let serial = decoder(16, 3);
        let parallel = Decoder::new(
            16,
            DecoderConfig {
                parallel_cells: true,
                ..Default::default()
            },
        )
        .unwrap();
        let lat = serial.lattice().clone();
        for t in 0..5 {
            let s = lat.syndrome_of(&sample_error(&lat, 0.12, 5, t).unwrap()).unwrap();
            let a = serial.decode(&s, 0.12).unwrap();
            let b = parallel.decode(&s, 0.12).unwrap();
            assert_eq!(a.distribution, b.distribution);
            assert_eq!(a.correction, b.correction);
        }
    }
}
