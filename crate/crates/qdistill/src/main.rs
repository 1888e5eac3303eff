//! Command-line front end: code construction, one-off decoding, and the
//! yield experiments.

use clap::{Args, Parser, Subcommand};
use qdistill::codes::StabilizerCode;
use qdistill::error::Error;
use qdistill::report::{
    run_construct, run_decode, run_fit, run_yield, RunConfig, FIT_E_IN_GRID,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qdistill", about = "Recurrence-method entanglement distillation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonOpts {
    /// Master seed for all randomness in the run
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo samples per measured point
    #[arg(long)]
    samples: Option<u64>,
    /// Single p0 value or comma list
    #[arg(long)]
    p0: Option<String>,
    /// Grid spec a:b:step
    #[arg(long = "p0-grid")]
    p0_grid: Option<String>,
    /// Maximum number of recurrence rounds explored
    #[arg(long)]
    rmax: Option<usize>,
    /// Comma list of final-step models
    #[arg(long)]
    model: Option<String>,
    /// Distilled-pair error threshold
    #[arg(long)]
    pth: Option<f64>,
    /// Output path (directory for experiments)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = default pool)
    #[arg(long)]
    workers: Option<usize>,
    /// Plain-text key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonOpts {
    fn resolve(&self, command: &str) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig { command: command.to_string(), ..RunConfig::default() };
        if let Some(path) = &self.config {
            let body = std::fs::read_to_string(path)?;
            cfg.apply_file(&body)?;
            cfg.command = command.to_string();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(samples) = self.samples {
            cfg.samples = samples;
        }
        if let Some(grid) = &self.p0_grid {
            cfg.set("p0_grid", grid)?;
        }
        if let Some(p0) = &self.p0 {
            cfg.set("p0_grid", p0)?;
        }
        if let Some(rmax) = self.rmax {
            cfg.r_max = rmax;
        }
        if let Some(model) = &self.model {
            cfg.set("models", model)?;
        }
        if let Some(pth) = self.pth {
            cfg.p_th = pth;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct a generalized bicycle code and write its serialized form
    Construct {
        #[command(flatten)]
        common: CommonOpts,
        /// Codeword length n (even)
        #[arg(long)]
        n: Option<usize>,
        /// Residue modulus n' (divides n/2)
        #[arg(long)]
        nprime: Option<usize>,
        /// Nonzero entries per residue class
        #[arg(short, long)]
        u: Option<usize>,
        /// Deleted row residues, comma list
        #[arg(long)]
        jdel: Option<String>,
        /// Explicit comma list of α element indices (length n/2)
        #[arg(long)]
        alpha: Option<String>,
        /// paper-4x12 | adaptive-960
        #[arg(long)]
        preset: Option<String>,
    },
    /// Belief-propagation decode a file of error or syndrome lines
    Decode {
        #[command(flatten)]
        common: CommonOpts,
        /// Serialized code file
        #[arg(long)]
        code: PathBuf,
        /// File with one IXZY error line per sample
        #[arg(long)]
        errors: Option<PathBuf>,
        /// File with one 0/1 syndrome line per sample
        #[arg(long)]
        syndromes: Option<PathBuf>,
        /// Channel prior error rate fed to the decoder
        #[arg(long, default_value_t = 0.01)]
        prior: f64,
        /// Message-passing round cap
        #[arg(long, default_value_t = 5)]
        mmax: u32,
    },
    /// Optimize yields over recurrence schedules and emit tables + charts
    Yield {
        #[command(flatten)]
        common: CommonOpts,
        /// paper-fig2 (comparison curves) | paper-fit (fit report)
        #[arg(long)]
        preset: Option<String>,
    },
}

/// Exit codes: 0 success, 2 validation failure, 3 I/O, 4 config error.
fn code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 3,
        Error::Config(_) | Error::Parse(_) | Error::UnsupportedFamily { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(code_for(&err))
        }
    }
}

fn run() -> Result<ExitCode, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Construct { common, n, nprime, u, jdel, alpha, preset } => {
            let mut cfg = common.resolve("construct")?;
            if let Some(n) = n {
                cfg.n = n;
            }
            if let Some(nprime) = nprime {
                cfg.n_prime = nprime;
            }
            if let Some(u) = u {
                cfg.u = u;
            }
            if let Some(jdel) = &jdel {
                cfg.set("jdel", jdel)?;
            }
            let alpha = alpha
                .map(|text| {
                    text.split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<u16>()
                                .map_err(|_| Error::Config(format!("bad alpha entry: {s}")))
                        })
                        .collect::<Result<Vec<u16>, Error>>()
                })
                .transpose()?;
            let artifacts = run_construct(&cfg, preset.as_deref(), alpha)?;
            println!("{}", serde_json::to_string_pretty(&artifacts.report)?);
            Ok(if artifacts.ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Decode { common, code, errors, syndromes, prior, mmax } => {
            let cfg = common.resolve("decode")?;
            let code_text = std::fs::read_to_string(&code)?;
            let code = StabilizerCode::from_text(&code_text)?;
            let report = code.validate();
            if !report.is_ok() {
                return Err(Error::Validation(report.failures.join("; ")));
            }
            let (path, are_errors) = match (&errors, &syndromes) {
                (Some(p), None) => (p, true),
                (None, Some(p)) => (p, false),
                _ => {
                    return Err(Error::Config(
                        "exactly one of --errors / --syndromes is required".into(),
                    ))
                }
            };
            let lines: Vec<String> = std::fs::read_to_string(path)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_string)
                .collect();
            let echo = cfg.echo();
            let body = run_decode(&code, &lines, are_errors, prior, mmax, &echo)?;
            match &common.out {
                Some(out) => std::fs::write(out, body)?,
                None => print!("{body}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Yield { common, preset } => {
            let mut cfg = common.resolve("yield")?;
            match preset.as_deref() {
                Some("paper-fit") => {
                    cfg.command = "fit".into();
                    cfg.models = vec!["qldpc".into()];
                    let artifacts = run_fit(&cfg)?;
                    println!(
                        "log10(e_out) = {:.3} + {:.2}·e_in  (reference -5.01 + 93.70·e_in)",
                        artifacts.log_fit.intercept, artifacts.log_fit.slope
                    );
                    println!(
                        "D_partial = {:.4} - {:.5}·exp({:.1}·e_in)  (reference 0.628 - 0.0032·exp(205.3·e_in))",
                        artifacts.d_fit.c, artifacts.d_fit.d, artifacts.d_fit.e
                    );
                    println!("wrote {}", artifacts.fit_csv.display());
                    println!("wrote {}", artifacts.fit_json.display());
                    Ok(ExitCode::SUCCESS)
                }
                Some("paper-fig2") => {
                    if cfg.p0_grid.is_empty() {
                        // 50-point geometric grid over [0.001, 0.3]
                        let ratio = (0.3f64 / 0.001).powf(1.0 / 49.0);
                        cfg.p0_grid =
                            (0..50).map(|i| 0.001 * ratio.powi(i)).collect();
                    }
                    if cfg.models.is_empty() {
                        cfg.models = [
                            "hashing",
                            "qldpc",
                            "hamming_q4:3",
                            "hamming_q4:4",
                            "css_hamming:5",
                            "classical_hamming:3",
                            "classical_hamming:4",
                            "bch:4",
                            "majority:1",
                            "majority:2",
                            "majority:3",
                        ]
                        .map(String::from)
                        .to_vec();
                    }
                    run_yield_and_report(&cfg)
                }
                Some(other) => Err(Error::Config(format!("unknown preset: {other}"))),
                None => run_yield_and_report(&cfg),
            }
        }
    }
}

fn run_yield_and_report(cfg: &RunConfig) -> Result<ExitCode, Error> {
    let artifacts = run_yield(cfg)?;
    if !artifacts.curve_points.is_empty() {
        println!("adaptive curve (Werner-shaped inputs, {} samples/point):", cfg.samples);
        for p in &artifacts.curve_points {
            println!(
                "  e_in={:<7} e_out={:.3e} (±{:.1e})  D_partial={:.4}",
                p.e_in, p.e_out, p.e_out_ci, p.d_partial
            );
        }
        debug_assert_eq!(artifacts.curve_points.len(), FIT_E_IN_GRID.len());
    }
    println!("wrote {}", artifacts.yield_csv.display());
    println!("wrote {}", artifacts.ratio_csv.display());
    println!("wrote {}", artifacts.yield_svg.display());
    println!("wrote {}", artifacts.ratio_svg.display());
    Ok(ExitCode::SUCCESS)
}
