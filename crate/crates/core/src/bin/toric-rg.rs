use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use toric_rg::cell::{derive_cell_basis, validate_tiling};
use toric_rg::config::{DecoderConfig, ExperimentSpec};
use toric_rg::harness::{self, ThresholdEstimate};
use toric_rg::{Decoder, Error, Syndrome};

#[derive(Parser)]
#[command(name = "toric-rg", version, about = "Renormalization-group decoder for the toric code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DecoderArgs {
    /// Flat TOML file with decoder keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bp_rounds: Option<usize>,
    #[arg(long)]
    damping: Option<f64>,
    /// "staircase" or a JSON geometry file.
    #[arg(long)]
    geometry: Option<String>,
    /// Use the thread pool inside each decode.
    #[arg(long)]
    parallel_cells: bool,
}

impl DecoderArgs {
    fn resolve(&self, base: DecoderConfig) -> toric_rg::Result<DecoderConfig> {
        let mut c = match &self.config {
            Some(path) => DecoderConfig::from_toml(&std::fs::read_to_string(path)?)?,
            None => base,
        };
        if let Some(r) = self.bp_rounds {
            c.bp_rounds = r;
        }
        if let Some(d) = self.damping {
            c.damping = d;
        }
        if let Some(g) = &self.geometry {
            c.geometry = g.clone();
        }
        c.parallel_cells |= self.parallel_cells;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decode one syndrome read from a file and print the class distribution.
    Decode {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        p: f64,
        /// Syndrome text: plaquette bits row-major, then site bits.
        #[arg(long)]
        syndrome: PathBuf,
        /// Print per-round BP changes as CSV to stderr.
        #[arg(long)]
        diagnostics: bool,
        #[command(flatten)]
        decoder: DecoderArgs,
    },
    /// Monte Carlo sweep over lattice sizes and error rates.
    Sweep {
        /// Flat TOML experiment file; flags below override it.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        ells: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        ps: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix for the CSV and JSON files.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        decoder: DecoderArgs,
    },
    /// Check the cell geometry, its derived basis and the tiling.
    Validate {
        #[arg(long, default_value_t = 128)]
        max_ell: usize,
        /// Print the derived cell basis.
        #[arg(long)]
        dump_basis: bool,
        #[arg(long)]
        geometry: Option<String>,
    },
    /// Time decodes against lattice size.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        ells: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        decodes: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        decoder: DecoderArgs,
    },
}

fn run(cli: Cli) -> toric_rg::Result<bool> {
    match cli.command {
        Command::Decode {
            ell,
            p,
            syndrome,
            diagnostics,
            decoder,
        } => {
            let mut config = decoder.resolve(DecoderConfig::default())?;
            config.diagnostics = diagnostics;
            let text = std::fs::read_to_string(&syndrome)?;
            let s = Syndrome::parse(ell, &text)?;
            let d = Decoder::new(ell, config)?;
            let r = d.decode(&s, p)?;
            if let Some(diag) = &r.diagnostics {
                eprint!("{}", diag.bp_csv());
            }
            let out = json!({
                "ell": ell,
                "p": p,
                "class": r.class,
                "distribution": r.distribution,
                "correction": r.correction.to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(true)
        }
        Command::Sweep {
            spec,
            ells,
            ps,
            trials,
            seed,
            output,
            decoder,
        } => {
            let mut s = match &spec {
                Some(path) => ExperimentSpec::load(path)?,
                None => ExperimentSpec {
                    ells: vec![8, 16],
                    ps: vec![0.1],
                    trials: 1000,
                    seed: 0,
                    decoder: DecoderConfig::default(),
                    output: None,
                },
            };
            if let Some(v) = ells {
                s.ells = v;
            }
            if let Some(v) = ps {
                s.ps = v;
            }
            if let Some(v) = trials {
                s.trials = v;
            }
            if let Some(v) = seed {
                s.seed = v;
            }
            if output.is_some() {
                s.output = output;
            }
            s.decoder = decoder.resolve(s.decoder.clone())?;
            let points = harness::run_experiment(&s)?;
            print!("{}", harness::to_csv(&points));
            if s.ells.len() >= 2 {
                match harness::estimate_threshold(&points) {
                    ThresholdEstimate::Crossing { mean, spread, .. } => {
                        eprintln!("threshold estimate {mean:.4} +/- {spread:.4}")
                    }
                    ThresholdEstimate::NoCrossing => eprintln!("no crossing"),
                }
            }
            Ok(true)
        }
        Command::Validate {
            max_ell,
            dump_basis,
            geometry,
        } => {
            let config = DecoderConfig {
                geometry: geometry.unwrap_or_else(|| DecoderConfig::default().geometry),
                ..Default::default()
            };
            let geom = config.geometry()?;
            let mut ok = true;
            match derive_cell_basis(&geom) {
                Ok(b) => {
                    println!("basis ok");
                    if dump_basis {
                        print!("{}", b.dump());
                    }
                }
                Err(e) => {
                    println!("basis FAILED: {e}");
                    ok = false;
                }
            }
            let mut ell = 4;
            while ell <= max_ell {
                let r = validate_tiling(ell, &geom);
                if r.is_ok() {
                    println!("tiling ell={ell}: ok ({} cells, {} qubits)", r.cells, r.qubits_covered);
                } else {
                    ok = false;
                    println!("tiling ell={ell}: {} violations", r.violations.len());
                    for v in r.violations.iter().take(10) {
                        println!("  {v}");
                    }
                }
                ell *= 2;
            }
            Ok(ok)
        }
        Command::Bench {
            ells,
            p,
            decodes,
            seed,
            decoder,
        } => {
            let config = decoder.resolve(DecoderConfig::default())?;
            let points = harness::bench(&ells, p, decodes, seed, &config)?;
            println!("ell,decodes,seconds_per_decode");
            for b in &points {
                println!("{},{},{:.6e}", b.ell, b.decodes, b.seconds_per_decode);
            }
            if points.len() >= 2 {
                println!("exponent {:.3}", harness::scaling_exponent(&points));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
