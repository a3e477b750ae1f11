//! Monte Carlo estimation of logical error rates.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DecoderConfig, ExperimentSpec};
use crate::decoder::Decoder;
use crate::error::Result;
use crate::noise::sample_error;

pub const CSV_HEADER: &str = "ell,p,trials,failures,rate,ci_low,ci_high,seconds";

/// Result of decoding one sampled error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    /// Homology class of error times correction.
    pub residual_class: u8,
}

/// Samples trial `index` under `seed`, decodes it and checks the residual.
pub fn run_trial(decoder: &Decoder, p: f64, seed: u64, index: u64) -> Result<TrialOutcome> {
    let lat = decoder.lattice();
    let error = sample_error(lat, p, seed, index)?;
    let syndrome = lat.syndrome_of(&error)?;
    let result = decoder.decode(&syndrome, p)?;
    let residual = &error * &result.correction;
    let residual_class = lat.homology_class(&residual)?;
    Ok(TrialOutcome {
        success: residual_class == 0,
        residual_class,
    })
}

/// Statistics of one `(ell, p)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub ell: usize,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seconds: f64,
    /// Trials where the decoder returned an error; counted as failures.
    pub decoder_errors: u64,
}

impl PointSummary {
    pub fn from_counts(ell: usize, p: f64, trials: u64, failures: u64, seconds: f64) -> Self {
        let (ci_low, ci_high) = wilson(failures, trials, 1.96);
        Self {
            ell,
            p,
            trials,
            failures,
            rate: failures as f64 / trials as f64,
            ci_low,
            ci_high,
            seconds,
            decoder_errors: 0,
        }
    }

    /// Whether the two 95% intervals are disjoint.
    pub fn separated_from(&self, other: &PointSummary) -> bool {
        self.ci_high < other.ci_low || other.ci_high < self.ci_low
    }
}

/// Wilson score interval for `failures` out of `trials` at normal quantile `z`.
pub fn wilson(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Seed of one sweep point, so points do not share error samples.
pub fn point_seed(master: u64, ell: usize, p: f64) -> u64 {
    let mut x = master ^ (ell as u64).rotate_left(32) ^ p.to_bits().rotate_left(7);
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Runs `trials` trials at one point, in parallel across trials.
pub fn run_point(decoder: &Decoder, p: f64, trials: u64, seed: u64) -> PointSummary {
    let start = Instant::now();
    let outcomes: Vec<Option<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(decoder, p, seed, i).ok().map(|o| o.success))
        .collect();
    let decoder_errors = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    let failures = outcomes.iter().filter(|o| **o != Some(true)).count() as u64;
    let mut s = PointSummary::from_counts(decoder.ell(), p, trials, failures, start.elapsed().as_secs_f64());
    s.decoder_errors = decoder_errors;
    s
}

/// Runs every point of the sweep and writes `<output>.csv` and
/// `<output>.json` when an output prefix is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<PointSummary>> {
    spec.validate()?;
    let mut out = Vec::new();
    for &ell in &spec.ells {
        let decoder = Decoder::new(ell, spec.decoder.clone())?;
        for &p in &spec.ps {
            out.push(run_point(&decoder, p, spec.trials, point_seed(spec.seed, ell, p)));
        }
    }
    if let Some(prefix) = &spec.output {
        write_outputs(prefix, &out)?;
    }
    Ok(out)
}

pub fn to_csv(points: &[PointSummary]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in points {
        writeln!(
            s,
            "{},{},{},{},{:.8},{:.8},{:.8},{:.3}",
            r.ell, r.p, r.trials, r.failures, r.rate, r.ci_low, r.ci_high, r.seconds
        )
        .unwrap();
    }
    s
}

pub fn write_outputs(prefix: &Path, points: &[PointSummary]) -> Result<()> {
    let with_ext = |ext: &str| {
        let mut p = prefix.as_os_str().to_owned();
        p.push(ext);
        std::path::PathBuf::from(p)
    };
    std::fs::write(with_ext(".csv"), to_csv(points))?;
    let json = serde_json::to_string_pretty(points).expect("summaries serialize");
    std::fs::write(with_ext(".json"), json)?;
    Ok(())
}

/// Crossing point of the rate curves of two lattice sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub ell_small: usize,
    pub ell_large: usize,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdEstimate {
    Crossing {
        mean: f64,
        /// Half the range of the pairwise crossings.
        spread: f64,
        crossings: Vec<Crossing>,
    },
    NoCrossing,
}

/// Linear-interpolated crossings of the rate-vs-p curves of consecutive
/// lattice sizes: the first p where the larger lattice stops doing better.
pub fn estimate_threshold(points: &[PointSummary]) -> ThresholdEstimate {
    let mut ells: Vec<usize> = points.iter().map(|s| s.ell).collect();
    ells.sort_unstable();
    ells.dedup();
    let curve = |ell: usize| {
        let mut c: Vec<(f64, f64)> = points.iter().filter(|s| s.ell == ell).map(|s| (s.p, s.rate)).collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        c
    };
    let mut crossings = Vec::new();
    for w in ells.windows(2) {
        let (small, large) = (curve(w[0]), curve(w[1]));
        let diffs: Vec<(f64, f64)> = small
            .iter()
            .filter_map(|&(p, r)| large.iter().find(|(q, _)| *q == p).map(|&(_, rl)| (p, rl - r)))
            .collect();
        for pair in diffs.windows(2) {
            let ((p0, d0), (p1, d1)) = (pair[0], pair[1]);
            if d0 < 0.0 && d1 >= 0.0 {
                let p = if d1 == d0 { p1 } else { p0 + (p1 - p0) * (-d0) / (d1 - d0) };
                crossings.push(Crossing {
                    ell_small: w[0],
                    ell_large: w[1],
                    p,
                });
                break;
            }
        }
    }
    if crossings.is_empty() {
        return ThresholdEstimate::NoCrossing;
    }
    let ps: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    let mean = ps.iter().sum::<f64>() / ps.len() as f64;
    let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ThresholdEstimate::Crossing {
        mean,
        spread: (hi - lo) / 2.0,
        crossings,
    }
}

/// Mean decode time at one lattice size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPoint {
    pub ell: usize,
    pub decodes: u64,
    pub seconds_per_decode: f64,
}

/// Times `decodes` sequential decodes of sampled syndromes per lattice size.
/// Sampling and syndrome extraction are excluded from the timing.
pub fn bench(ells: &[usize], p: f64, decodes: u64, seed: u64, config: &DecoderConfig) -> Result<Vec<BenchPoint>> {
    let mut out = Vec::new();
    for &ell in ells {
        let decoder = Decoder::new(ell, config.clone())?;
        let lat = decoder.lattice().clone();
        let syndromes = (0..decodes)
            .map(|i| lat.syndrome_of(&sample_error(&lat, p, seed, i)?))
            .collect::<Result<Vec<_>>>()?;
        // warm-up
        decoder.decode(&syndromes[0], p)?;
        let start = Instant::now();
        for s in &syndromes {
            decoder.decode(s, p)?;
        }
        out.push(BenchPoint {
            ell,
            decodes,
            seconds_per_decode: start.elapsed().as_secs_f64() / decodes as f64,
        });
    }
    Ok(out)
}

/// Least-squares slope of `log(t / log ell)` against `log ell`.
pub fn scaling_exponent(points: &[BenchPoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|b| {
            let l = b.ell as f64;
            (l.ln(), (b.seconds_per_decode / l.ln()).ln())
        })
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|v| v.0).sum::<f64>() / n;
    let my = xy.iter().map(|v| v.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.037).abs() < 1e-3);
        let (lo, hi) = wilson(50, 100, 1.96);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn wilson_shrinks_as_inverse_sqrt() {
        let (a, b) = wilson(100, 1000, 1.96);
        let (c, d) = wilson(10_000, 100_000, 1.96);
        let ratio = (b - a) / (d - c);
        assert!((ratio - 10.0).abs() < 0.1, "{ratio}");
    }

    fn synthetic(ell: usize, f: impl Fn(f64) -> f64) -> Vec<PointSummary> {
        (0..7)
            .map(|i| {
                let p = 0.12 + 0.01 * i as f64;
                let mut s = PointSummary::from_counts(ell, p, 1000, 0, 0.0);
                s.rate = f(p);
                s
            })
            .collect()
    }

    #[test]
    fn threshold_of_synthetic_curves() {
        let mut pts = synthetic(8, |p| 0.5 + (p - 0.15));
        pts.extend(synthetic(16, |p| 0.5 + 2.0 * (p - 0.15)));
        match estimate_threshold(&pts) {
            ThresholdEstimate::Crossing { mean, .. } => assert!((mean - 0.15).abs() < 1e-9),
            ThresholdEstimate::NoCrossing => panic!("expected a crossing"),
        }
    }

    #[test]
    fn monotone_curves_have_no_crossing() {
        let mut pts = synthetic(8, |p| p);
        pts.extend(synthetic(16, |p| p / 2.0));
        assert_eq!(estimate_threshold(&pts), ThresholdEstimate::NoCrossing);
    }

    #[test]
    fn exponent_of_exact_power_law() {
        let pts: Vec<BenchPoint> = [16usize, 32, 64, 128]
            .iter()
            .map(|&l| BenchPoint {
                ell: l,
                decodes: 1,
                seconds_per_decode: 1e-6 * (l as f64).powi(2) * (l as f64).ln(),
            })
            .collect();
        assert!((scaling_exponent(&pts) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn csv_schema() {
        let csv = to_csv(&[PointSummary::from_counts(8, 0.1, 10, 1, 0.5)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap().split(',').count(), 8);
    }
}
