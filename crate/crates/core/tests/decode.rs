use toric_rg::config::{DecoderConfig, ExperimentSpec};
use toric_rg::decoder::{CoarseModel, Decoder};
use toric_rg::harness::{point_seed, run_experiment, run_point, run_trial, to_csv};
use toric_rg::noise::{depolarizing_prior, sample_error};
use toric_rg::{decode, Pauli, PauliOp, Syndrome, TorusLattice};

fn decoder(ell: usize) -> Decoder {
    Decoder::new(ell, DecoderConfig::default()).unwrap()
}

/// Product of a pseudo-random subset of stabilizer generators.
fn random_stabilizer(lat: &TorusLattice, seed: u64) -> PauliOp {
    let (sites, plaqs) = lat.stabilizer_generators();
    let mut op = PauliOp::identity(lat.n());
    let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    for g in sites.iter().chain(&plaqs) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        if x & 1 == 1 {
            op *= g;
        }
    }
    op
}

#[test]
fn zero_noise_always_succeeds() {
    let d = decoder(8);
    for t in 0..50 {
        assert!(run_trial(&d, 0.0, 9, t).unwrap().success);
    }
    let r = d.decode(&Syndrome::trivial(8), 0.0).unwrap();
    assert_eq!(r.class, 0);
    assert_eq!(r.distribution[0], 1.0);
}

#[test]
fn injected_stabilizers_are_corrected() {
    for ell in [4, 8, 16] {
        let d = decoder(ell);
        let lat = d.lattice().clone();
        for s in 0..10 {
            let e = random_stabilizer(&lat, s);
            let syn = lat.syndrome_of(&e).unwrap();
            assert!(syn.is_trivial());
            let r = d.decode(&syn, 0.1).unwrap();
            assert_eq!(lat.homology_class(&(&e * &r.correction)).unwrap(), 0);
        }
    }
}

#[test]
fn success_is_invariant_under_stabilizers() {
    let d = decoder(16);
    let lat = d.lattice().clone();
    for t in 0..20 {
        let e = sample_error(&lat, 0.13, 21, t).unwrap();
        let e2 = &e * &random_stabilizer(&lat, t + 100);
        let syn = lat.syndrome_of(&e).unwrap();
        assert_eq!(syn, lat.syndrome_of(&e2).unwrap());
        let r = d.decode(&syn, 0.13).unwrap();
        let ok1 = lat.homology_class(&(&e * &r.correction)).unwrap() == 0;
        let ok2 = lat.homology_class(&(&e2 * &r.correction)).unwrap() == 0;
        assert_eq!(ok1, ok2);
    }
}

#[test]
fn trials_are_reproducible() {
    let d = decoder(8);
    for t in 0..10 {
        assert_eq!(run_trial(&d, 0.14, 5, t).unwrap(), run_trial(&d, 0.14, 5, t).unwrap());
    }
}

#[test]
fn weight_one_error_is_corrected() {
    let lat = TorusLattice::new(8).unwrap();
    let e = PauliOp::single(lat.n(), lat.h(3, 5), Pauli::X);
    let r = decode(&lat, &lat.syndrome_of(&e).unwrap(), 0.05, &DecoderConfig::default()).unwrap();
    assert_eq!(lat.homology_class(&(&e * &r.correction)).unwrap(), 0);
}

#[test]
fn decode_rejects_bad_input() {
    let lat = TorusLattice::new(8).unwrap();
    let mut s = Syndrome::trivial(8);
    s.plaquettes[3] = 1;
    assert!(decode(&lat, &s, 0.1, &DecoderConfig::default()).is_err());
    assert!(decode(&lat, &Syndrome::trivial(4), 0.1, &DecoderConfig::default()).is_err());
    let small = TorusLattice::new(2).unwrap();
    assert!(decode(&small, &Syndrome::trivial(2), 0.1, &DecoderConfig::default()).is_err());
}

#[test]
fn renormalize_level_examples() {
    let d = decoder(8);
    let models = d.initial_models(depolarizing_prior(0.1).unwrap());
    let r = d.renormalize_level(0, &models, &Syndrome::trivial(8)).unwrap();
    assert_eq!(r.coarse.ell(), 4);
    assert!(r.syndrome.is_trivial());
    let CoarseModel::Cells(cells) = &r.model else {
        panic!("ell=4 is still cell-decoded")
    };
    assert_eq!(cells.len(), 4);
    for m in cells {
        for q in 0..12 {
            assert_eq!(m.prior(q).argmax(), Pauli::I);
        }
    }
    // Every coarse qubit appears in exactly one place per covering cell;
    // the coarse lattice has 2 (ell/2)^2 of them.
    assert_eq!(r.posteriors.len() * 2, r.coarse.n());

    // Stabilizer-only errors leave every coarse syndrome trivial.
    let lat = d.lattice().clone();
    let syn = lat.syndrome_of(&random_stabilizer(&lat, 3)).unwrap();
    let r = d.renormalize_level(0, &models, &syn).unwrap();
    assert!(r.syndrome.is_trivial());

    let r1 = d.renormalize_level(1, cells, &r.syndrome).unwrap();
    let CoarseModel::Torus(top) = &r1.model else {
        panic!("ell=4 feeds the exact stage")
    };
    assert_eq!(top.num_qubits(), 8);
    assert_eq!(top.pairs().len(), 4);
}

#[test]
fn small_lattice_rate_grows_with_noise() {
    let d = decoder(4);
    let low = run_point(&d, 0.08, 10_000, point_seed(1, 4, 0.08));
    let high = run_point(&d, 0.20, 10_000, point_seed(1, 4, 0.20));
    assert!(low.rate < high.rate, "{} vs {}", low.rate, high.rate);
    assert!(low.ci_high < high.ci_low);
}

#[test]
fn experiment_at_zero_noise() {
    let spec = ExperimentSpec {
        ells: vec![8],
        ps: vec![0.0],
        trials: 100,
        seed: 0,
        decoder: DecoderConfig::default(),
        output: None,
    };
    let pts = run_experiment(&spec).unwrap();
    assert_eq!(pts[0].failures, 0);
    assert_eq!(pts[0].rate, 0.0);
}

fn strip_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').unwrap().0.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn experiment_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        ells: vec![4, 8],
        ps: vec![0.1, 0.15],
        trials: 200,
        seed: 42,
        decoder: DecoderConfig::default(),
        output: Some(dir.path().join("run")),
    };
    let a = run_experiment(&spec).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv, to_csv(&a));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 4);
    let b = run_experiment(&ExperimentSpec { output: None, ..spec }).unwrap();
    assert_eq!(strip_seconds(&to_csv(&a)), strip_seconds(&to_csv(&b)));
}

#[test]
fn larger_lattice_wins_below_threshold_and_loses_above() {
    let d8 = decoder(8);
    let d16 = decoder(16);
    let r8 = run_point(&d8, 0.10, 10_000, point_seed(3, 8, 0.10));
    let r16 = run_point(&d16, 0.10, 10_000, point_seed(3, 16, 0.10));
    assert!(r16.rate < r8.rate, "p=0.10: {} vs {}", r16.rate, r8.rate);
    let r8 = run_point(&d8, 0.18, 10_000, point_seed(3, 8, 0.18));
    let r16 = run_point(&d16, 0.18, 10_000, point_seed(3, 16, 0.18));
    assert!(r16.rate > r8.rate, "p=0.18: {} vs {}", r16.rate, r8.rate);
}
