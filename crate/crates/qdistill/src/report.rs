//! Experiment orchestration and plain-text artifact emission: resolved run
//! configs, CSV tables, JSON-lines decode reports, and SVG charts.  Every
//! experiment artifact embeds the resolved configuration so a run can be
//! reproduced byte-for-byte from its own output (modulo the timestamp
//! line); worker count and output paths are deliberately not part of the
//! embedded config since they cannot affect results.

use crate::adaptive::{build_pair, AdaptiveParams};
use crate::bp::{broadcast_priors, decode, TannerGraph};
use crate::codes::{bicycle_construct, BicycleSeed, CodeFamily, StabilizerCode};
use crate::error::{Error, Result};
use crate::experiments::{
    fit_d_partial, fit_log_e_out, measure_final_step, yield_curve, yield_ratio, BlockModel,
    FinalModel, ModelEval, PerfCurve, PerformancePoint, RatioPoint, YieldPoint, DEFAULT_M_MAX,
};
use crate::recurrence::DEFAULT_R_MAX;
use crate::rng::{sample_rng, subseed};
use crate::states::{entropy4, BellDiagonalState, ChannelPrior};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// The e_in grid of the final-step performance measurement.
pub const FIT_E_IN_GRID: [f64; 6] = [0.0025, 0.005, 0.0075, 0.01, 0.0125, 0.015];

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub samples: u64,
    pub p0_grid: Vec<f64>,
    pub r_max: usize,
    pub p_th: f64,
    pub m_max: u32,
    pub models: Vec<String>,
    pub n: usize,
    pub n_prime: usize,
    pub u: usize,
    pub j_del: Vec<usize>,
    pub workers: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            seed: 1,
            samples: 200_000,
            p0_grid: Vec::new(),
            r_max: DEFAULT_R_MAX,
            p_th: 2.0e-5,
            m_max: DEFAULT_M_MAX,
            models: Vec::new(),
            n: 960,
            n_prime: 4,
            u: 2,
            j_del: vec![4],
            workers: 0,
            out: PathBuf::from("."),
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    // either "a:b:step" or a comma list
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("bad grid spec: {text}")));
        }
        let a: f64 = parts[0].parse().map_err(|_| Error::Config("bad grid start".into()))?;
        let b: f64 = parts[1].parse().map_err(|_| Error::Config("bad grid end".into()))?;
        let step: f64 = parts[2].parse().map_err(|_| Error::Config("bad grid step".into()))?;
        if step <= 0.0 || b < a {
            return Err(Error::Config(format!("bad grid range: {text}")));
        }
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let x = a + step * i as f64;
            if x > b + 1e-12 {
                break;
            }
            out.push(x);
            i += 1;
        }
        Ok(out)
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad p0: {s}"))))
            .collect()
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "command" => self.command = v.to_string(),
            "seed" => self.seed = v.parse().map_err(|_| Error::Config("bad seed".into()))?,
            "samples" => {
                self.samples = v.parse().map_err(|_| Error::Config("bad samples".into()))?
            }
            "p0_grid" => self.p0_grid = parse_grid(v)?,
            "rmax" => self.r_max = v.parse().map_err(|_| Error::Config("bad rmax".into()))?,
            "pth" => self.p_th = v.parse().map_err(|_| Error::Config("bad pth".into()))?,
            "mmax" => self.m_max = v.parse().map_err(|_| Error::Config("bad mmax".into()))?,
            "models" => {
                self.models =
                    v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }
            "n" => self.n = v.parse().map_err(|_| Error::Config("bad n".into()))?,
            "nprime" => self.n_prime = v.parse().map_err(|_| Error::Config("bad nprime".into()))?,
            "u" => self.u = v.parse().map_err(|_| Error::Config("bad u".into()))?,
            "jdel" => {
                self.j_del = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse().map_err(|_| Error::Config("bad jdel".into())))
                    .collect::<Result<_>>()?
            }
            "generated_unix" => {} // timestamp of a previous run; ignored
            other => return Err(Error::Config(format!("unknown config key: {other}"))),
        }
        Ok(())
    }

    /// Parse a plain-text `key = value` config file body (# comments).
    pub fn apply_file(&mut self, body: &str) -> Result<()> {
        for raw in body.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("expected key = value, got: {raw}")));
            };
            self.set(key, value)?;
        }
        Ok(())
    }

    /// The embedded-config block: `# key = value` lines plus a timestamp.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let grid =
            self.p0_grid.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let jdel = self.j_del.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "# command = {}", self.command);
        let _ = writeln!(out, "# jdel = {jdel}");
        let _ = writeln!(out, "# mmax = {}", self.m_max);
        let _ = writeln!(out, "# models = {}", self.models.join(","));
        let _ = writeln!(out, "# n = {}", self.n);
        let _ = writeln!(out, "# nprime = {}", self.n_prime);
        let _ = writeln!(out, "# p0_grid = {grid}");
        let _ = writeln!(out, "# pth = {}", self.p_th);
        let _ = writeln!(out, "# rmax = {}", self.r_max);
        let _ = writeln!(out, "# samples = {}", self.samples);
        let _ = writeln!(out, "# seed = {}", self.seed);
        let _ = writeln!(out, "# u = {}", self.u);
        let _ = writeln!(
            out,
            "# generated_unix = {}",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        );
        out
    }

    /// Rebuild a config from an artifact's embedded `# key = value` block.
    pub fn from_echo(body: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for line in body.lines() {
            let Some(rest) = line.strip_prefix("# ") else { continue };
            if let Some((key, value)) = rest.split_once('=') {
                cfg.set(key, value)?;
            }
        }
        Ok(cfg)
    }

    fn run_in_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        if self.workers == 0 {
            f()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool");
            pool.install(f)
        }
    }
}

/// Resolve a model label into an optimizer-facing model.  `qldpc` needs a
/// measured performance curve and is handled by the caller.
pub fn parse_block_model(label: &str) -> Result<Option<BlockModel>> {
    if label == "hashing" || label == "qldpc" {
        return Ok(None);
    }
    let (family, t) = label
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("bad model label: {label}")))?;
    let family =
        CodeFamily::parse(family).ok_or_else(|| Error::Config(format!("unknown family: {family}")))?;
    let t: u32 = t.parse().map_err(|_| Error::Config(format!("bad family index in {label}")))?;
    Ok(Some(BlockModel::new(family, t)?))
}

/// Measure the adaptive pair over the standard e_in grid.
pub fn measure_adaptive_curve(
    cfg: &RunConfig,
    pair: &Arc<crate::adaptive::AdaptiveCodePair>,
) -> Result<Vec<PerformancePoint>> {
    FIT_E_IN_GRID
        .iter()
        .enumerate()
        .map(|(i, &e_in)| {
            let state = BellDiagonalState::werner(e_in)?;
            measure_final_step(
                &FinalModel::Adaptive(pair.clone()),
                &state,
                cfg.samples,
                subseed(cfg.seed, 100 + i as u64),
            )
        })
        .collect()
}

/// Everything `yield` produces.
pub struct YieldArtifacts {
    pub points: Vec<YieldPoint>,
    pub ratios: Vec<RatioPoint>,
    pub curve_points: Vec<PerformancePoint>,
    pub yield_csv: PathBuf,
    pub ratio_csv: PathBuf,
    pub yield_svg: PathBuf,
    pub ratio_svg: PathBuf,
}

/// Run the yield-curve experiment described by `cfg` and write its
/// artifacts under `cfg.out`.
pub fn run_yield(cfg: &RunConfig) -> Result<YieldArtifacts> {
    if cfg.p0_grid.is_empty() {
        return Err(Error::Config("empty p0 grid".into()));
    }
    if cfg.models.is_empty() {
        return Err(Error::Config("no models selected".into()));
    }
    cfg.run_in_pool(|| run_yield_inner(cfg))
}

fn run_yield_inner(cfg: &RunConfig) -> Result<YieldArtifacts> {
    let mut evals = Vec::new();
    let mut curve_points = Vec::new();
    for label in &cfg.models {
        let eval = match label.as_str() {
            "hashing" => ModelEval::Hashing,
            "qldpc" => {
                let mut rng = sample_rng(cfg.seed, 2, 0);
                let params = AdaptiveParams {
                    n: cfg.n,
                    n_prime: cfg.n_prime,
                    u: cfg.u,
                    deleted_residue: *cfg.j_del.first().unwrap_or(&cfg.n_prime),
                };
                let pair = Arc::new(build_pair(params, &mut rng)?);
                let points = measure_adaptive_curve(cfg, &pair)?;
                let d_cap = pair.frame1().k() as f64 / pair.h1().n() as f64;
                let curve = PerfCurve::from_points(&points, d_cap)?;
                curve_points = points;
                ModelEval::Adaptive { curve, samples: cfg.samples }
            }
            other => match parse_block_model(other)? {
                Some(block) => ModelEval::Block(Box::new(block)),
                None => unreachable!(),
            },
        };
        evals.push(eval);
    }
    let points = yield_curve(&cfg.p0_grid, &evals, cfg.r_max, cfg.p_th)?;
    let ratios = yield_ratio(&points);

    std::fs::create_dir_all(&cfg.out)?;
    let echo = cfg.echo();
    let yield_csv = cfg.out.join("yield.csv");
    std::fs::write(&yield_csv, yield_csv_text(&echo, cfg.seed, &points))?;
    let ratio_csv = cfg.out.join("ratio.csv");
    std::fs::write(&ratio_csv, ratio_csv_text(&echo, &ratios))?;
    let yield_svg = cfg.out.join("yield.svg");
    std::fs::write(&yield_svg, yield_svg_text(&echo, cfg, &points))?;
    let ratio_svg = cfg.out.join("ratio.svg");
    std::fs::write(&ratio_svg, ratio_svg_text(&echo, &ratios))?;
    Ok(YieldArtifacts { points, ratios, curve_points, yield_csv, ratio_csv, yield_svg, ratio_svg })
}

fn yield_csv_text(echo: &str, seed: u64, points: &[YieldPoint]) -> String {
    let mut out = String::from(echo);
    out.push_str("p0,model,r,schedule,ps_product,e_out,e_out_ci,D,samples,seed\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.p0,
            p.model,
            p.schedule.len(),
            p.schedule.label(),
            p.ps_product,
            p.e_out,
            p.e_out_ci,
            p.d,
            p.samples,
            seed
        );
    }
    out
}

fn ratio_csv_text(echo: &str, ratios: &[RatioPoint]) -> String {
    let mut out = String::from(echo);
    out.push_str("p0,d_qldpc,d_best_other,best_other,ratio\n");
    for r in ratios {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.p0, r.d_qldpc, r.d_best_other, r.best_other, r.ratio
        );
    }
    out
}

/// Artifacts of the final-step measurement + fit run.
pub struct FitArtifacts {
    pub points: Vec<PerformancePoint>,
    pub log_fit: crate::experiments::LogLinearFit,
    pub d_fit: crate::experiments::DPartialFit,
    pub d_fit_free: crate::experiments::DPartialFit,
    pub fit_csv: PathBuf,
    pub fit_json: PathBuf,
}

pub fn run_fit(cfg: &RunConfig) -> Result<FitArtifacts> {
    cfg.run_in_pool(|| run_fit_inner(cfg))
}

fn run_fit_inner(cfg: &RunConfig) -> Result<FitArtifacts> {
    let mut rng = sample_rng(cfg.seed, 2, 0);
    let params = AdaptiveParams {
        n: cfg.n,
        n_prime: cfg.n_prime,
        u: cfg.u,
        deleted_residue: *cfg.j_del.first().unwrap_or(&cfg.n_prime),
    };
    let pair = Arc::new(build_pair(params, &mut rng)?);
    let points = measure_adaptive_curve(cfg, &pair)?;
    let e_points: Vec<(f64, f64)> = points.iter().map(|p| (p.e_in, p.e_out)).collect();
    let d_points: Vec<(f64, f64)> = points.iter().map(|p| (p.e_in, p.d_partial)).collect();
    let log_fit = fit_log_e_out(&e_points)?;
    let d_fit = fit_d_partial(&d_points, Some(205.3))?;
    let d_fit_free = fit_d_partial(&d_points, None)?;

    std::fs::create_dir_all(&cfg.out)?;
    let echo = cfg.echo();
    let mut csv = String::from(&echo);
    csv.push_str("e_in,e_out,e_out_ci,d_partial,samples,h1,h2,discard,seed\n");
    for p in &points {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            p.e_in,
            p.e_out,
            p.e_out_ci,
            p.d_partial,
            p.samples,
            p.path_counts[0],
            p.path_counts[1],
            p.path_counts[2],
            cfg.seed
        );
    }
    let fit_csv = cfg.out.join("fit.csv");
    std::fs::write(&fit_csv, csv)?;

    let json = serde_json::json!({
        "config": echo.lines().filter_map(|l| l.strip_prefix("# ").map(str::to_string)).collect::<Vec<_>>(),
        "log_e_out_fit": {
            "intercept": log_fit.intercept,
            "slope": log_fit.slope,
            "residual_rms": log_fit.residual_rms,
            "reference": { "intercept": -5.01, "slope": 93.70 },
        },
        "d_partial_fit_e_fixed": { "c": d_fit.c, "d": d_fit.d, "e": d_fit.e,
            "residual_rms": d_fit.residual_rms,
            "reference": { "c": 0.628, "d": 0.0032, "e": 205.3 } },
        "d_partial_fit_e_free": { "c": d_fit_free.c, "d": d_fit_free.d, "e": d_fit_free.e,
            "residual_rms": d_fit_free.residual_rms },
    });
    let fit_json = cfg.out.join("fit.json");
    std::fs::write(&fit_json, serde_json::to_string_pretty(&json)? + "\n")?;
    Ok(FitArtifacts { points, log_fit, d_fit, d_fit_free, fit_csv, fit_json })
}

/// Output of `construct`.
pub struct ConstructArtifacts {
    pub files: Vec<PathBuf>,
    pub report: serde_json::Value,
    pub ok: bool,
}

/// Build (or rebuild from explicit α) a bicycle code and write it with a
/// validation report.  `paper_4x12` emits the fixed worked example.
pub fn run_construct(cfg: &RunConfig, preset: Option<&str>, alpha: Option<Vec<u16>>) -> Result<ConstructArtifacts> {
    let field = Arc::new(crate::ffield::FieldSpec::gf4());
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let mut ok = true;

    let mut emit = |code: &StabilizerCode, seed: &BicycleSeed, path: PathBuf| -> Result<()> {
        let report = code.validate();
        ok &= report.is_ok();
        std::fs::create_dir_all(path.parent().unwrap_or(Path::new(".")))?;
        std::fs::write(&path, code.to_text())?;
        reports.push(serde_json::json!({
            "file": path.display().to_string(),
            "n": code.n(),
            "rows": code.num_rows(),
            "rank": report.rank,
            "orthogonal": report.orthogonal,
            "full_rank": report.full_rank,
            "d_v": report.d_v,
            "d_c": report.d_c,
            "rate": report.rate,
            "failures": report.failures,
            "alpha": seed.alpha,
            "deleted": seed.deleted.iter().collect::<Vec<_>>(),
        }));
        files.push(path);
        Ok(())
    };

    match preset {
        Some("paper-4x12") => {
            let seed = BicycleSeed {
                n: 12,
                n_prime: 3,
                u: 1,
                alpha: vec![1, 2, 3, 0, 0, 0],
                deleted: BTreeSet::from([3]),
            };
            let code = bicycle_construct(&field, &seed)?;
            emit(&code, &seed, cfg.out.clone())?;
        }
        Some("adaptive-960") => {
            let mut rng = sample_rng(cfg.seed, 2, 0);
            let pair = build_pair(AdaptiveParams::paper_960(), &mut rng)?;
            std::fs::create_dir_all(&cfg.out)?;
            emit(pair.h2(), pair.seed(), cfg.out.join("h2.txt"))?;
            let seed_h1 = BicycleSeed {
                deleted: BTreeSet::from([pair.params().deleted_residue]),
                ..pair.seed().clone()
            };
            emit(pair.h1(), &seed_h1, cfg.out.join("h1.txt"))?;
        }
        Some(other) => return Err(Error::Config(format!("unknown preset: {other}"))),
        None => {
            let deleted: BTreeSet<usize> = cfg.j_del.iter().copied().collect();
            let seed = match alpha {
                Some(alpha) => {
                    BicycleSeed { n: cfg.n, n_prime: cfg.n_prime, u: cfg.u, alpha, deleted }
                }
                None => {
                    let mut rng = sample_rng(cfg.seed, 2, 0);
                    BicycleSeed::sample(cfg.n, cfg.n_prime, cfg.u, deleted, &field, &mut rng)?
                }
            };
            let code = bicycle_construct(&field, &seed)?;
            emit(&code, &seed, cfg.out.clone())?;
        }
    }
    let report = serde_json::json!({
        "command": "construct",
        "seed": cfg.seed,
        "ok": ok,
        "codes": reports,
    });
    Ok(ConstructArtifacts { files, report, ok })
}

/// One line of a decode report.
#[derive(Debug, serde::Serialize)]
pub struct DecodeRecord {
    pub index: usize,
    pub converged: bool,
    pub rounds: u32,
    pub xtilde: String,
    pub mean_marginal_entropy: f64,
    pub max_marginal_entropy: f64,
}

const SYMBOLS: [char; 4] = ['I', 'X', 'Z', 'Y'];

pub fn parse_error_line(line: &str, n: usize) -> Result<Vec<u16>> {
    if line.chars().count() != n {
        return Err(Error::Parse(format!("error line has {} symbols, expected {n}", line.len())));
    }
    line.chars()
        .map(|c| {
            SYMBOLS
                .iter()
                .position(|&s| s == c.to_ascii_uppercase())
                .map(|i| i as u16)
                .ok_or_else(|| Error::Parse(format!("bad error symbol: {c}")))
        })
        .collect()
}

pub fn format_error_line(symbols: &[u16]) -> String {
    symbols.iter().map(|&s| SYMBOLS[s as usize]).collect()
}

/// Decode one file of error or syndrome lines against a serialized code;
/// returns the JSON-lines report body.
pub fn run_decode(
    code: &StabilizerCode,
    lines: &[String],
    lines_are_errors: bool,
    p0: f64,
    m_max: u32,
    echo: &str,
) -> Result<String> {
    let graph = TannerGraph::new(code);
    let prior = ChannelPrior::from_state(&BellDiagonalState::werner(p0)?);
    let priors = broadcast_priors(&graph, &prior)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}",
        serde_json::json!({ "config": echo.lines().collect::<Vec<_>>() })
    );
    for (index, line) in lines.iter().enumerate() {
        let syndrome = if lines_are_errors {
            let e = parse_error_line(line.trim(), code.n())?;
            code.syndrome(&e)?
        } else {
            let s: Vec<u8> = line
                .trim()
                .chars()
                .map(|c| {
                    c.to_digit(10).map(|d| d as u8).ok_or_else(|| {
                        Error::Parse(format!("bad syndrome digit: {c}"))
                    })
                })
                .collect::<Result<_>>()?;
            if s.len() != code.num_rows() {
                return Err(Error::DimensionMismatch { expected: code.num_rows(), got: s.len() });
            }
            s
        };
        let result = decode(code, &syndrome, &priors, m_max)?;
        let q2 = graph.q2();
        let entropies: Vec<f64> =
            (0..code.n()).map(|j| entropy4(&result.marginals[j * q2..(j + 1) * q2])).collect();
        let record = DecodeRecord {
            index,
            converged: result.converged,
            rounds: result.rounds_used,
            xtilde: format_error_line(&result.xtilde),
            mean_marginal_entropy: entropies.iter().sum::<f64>() / entropies.len() as f64,
            max_marginal_entropy: entropies.iter().cloned().fold(0.0, f64::max),
        };
        let _ = writeln!(out, "{}", serde_json::to_string(&record)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// SVG charts
// ---------------------------------------------------------------------------

const PALETTE: [&str; 12] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
];

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

const W: f64 = 880.0;
const H: f64 = 600.0;
const ML: f64 = 70.0;
const MR: f64 = 160.0;
const MT: f64 = 30.0;
const MB: f64 = 55.0;

impl Axes {
    fn sx(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }

    fn sy(&self, y: f64) -> f64 {
        H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)
    }
}

fn svg_header(echo: &str, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(s, "<!--");
    s.push_str(echo);
    let _ = writeln!(s, "-->");
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{title}</text>",
        ML + (W - ML - MR) / 2.0
    );
    s
}

fn axis_lines(s: &mut String, ax: &Axes, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - ML - MR,
        H - MT - MB
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{x_label}</text>",
        ML + (W - ML - MR) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{y_label}</text>",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    );
    let _ = ax;
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 1000.0 {
        format!("{v:.3}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn x_ticks(s: &mut String, ax: &Axes, log: bool) {
    let n = 6;
    for i in 0..=n {
        let x = ax.x0 + (ax.x1 - ax.x0) * i as f64 / n as f64;
        let px = ax.sx(x);
        let label = if log { format!("{:.4}", 10f64.powf(x)) } else { fmt_tick(x) };
        let _ = writeln!(
            s,
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>",
            H - MB,
            H - MB + 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{px}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{label}</text>",
            H - MB + 18.0
        );
    }
}

fn y_ticks(s: &mut String, ax: &Axes, log: bool) {
    let n = 6;
    for i in 0..=n {
        let y = ax.y0 + (ax.y1 - ax.y0) * i as f64 / n as f64;
        let py = ax.sy(y);
        let label = if log { format!("{:.0e}", 10f64.powf(y)) } else { fmt_tick(y) };
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ML}\" y2=\"{py}\" stroke=\"black\"/>",
            ML - 5.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{label}</text>",
            ML - 8.0,
            py + 4.0
        );
    }
}

fn polyline(s: &mut String, pts: &[(f64, f64)], color: &str) {
    if pts.len() < 2 {
        for &(x, y) in pts {
            let _ = writeln!(s, "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{color}\"/>");
        }
        return;
    }
    let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>",
        path.join(" ")
    );
}

fn legend(s: &mut String, entries: &[(String, &str)]) {
    for (i, (name, color)) in entries.iter().enumerate() {
        let y = MT + 16.0 + i as f64 * 18.0;
        let x = W - MR + 12.0;
        let _ = writeln!(
            s,
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2.5\"/>",
            x + 22.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{name}</text>",
            x + 28.0,
            y + 4.0
        );
    }
}

/// Yield-comparison chart: log-x over p0, log-y over D, one line per model.
fn yield_svg_text(echo: &str, cfg: &RunConfig, points: &[YieldPoint]) -> String {
    let mut s = svg_header(echo, "Optimized yield D per model");
    let xs: Vec<f64> = cfg.p0_grid.iter().map(|&p| p.log10()).collect();
    let feasible: Vec<f64> = points.iter().filter(|p| p.d > 0.0).map(|p| p.d.log10()).collect();
    let (ymin, ymax) = feasible
        .iter()
        .fold((0.0f64, -300.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let ax = Axes {
        x0: xs.iter().cloned().fold(f64::INFINITY, f64::min),
        x1: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        y0: ymin.max(-6.0) - 0.2,
        y1: ymax + 0.2,
    };
    axis_lines(&mut s, &ax, "p0", "yield D (log10)");
    x_ticks(&mut s, &ax, true);
    y_ticks(&mut s, &ax, true);
    let mut entries = Vec::new();
    for (mi, model) in cfg.models.iter().enumerate() {
        let color = PALETTE[mi % PALETTE.len()];
        // split segments at infeasible points
        let mut seg: Vec<(f64, f64)> = Vec::new();
        for p in points.iter().filter(|p| &p.model == model) {
            if p.d > 0.0 && p.d.log10() >= ax.y0 {
                seg.push((ax.sx(p.p0.log10()), ax.sy(p.d.log10())));
            } else {
                polyline(&mut s, &seg, color);
                seg.clear();
            }
        }
        polyline(&mut s, &seg, color);
        entries.push((model.clone(), color));
    }
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

/// Ratio chart: QLDPC yield over the best other efficiently decodable code.
fn ratio_svg_text(echo: &str, ratios: &[RatioPoint]) -> String {
    let mut s = svg_header(echo, "Yield ratio: adaptive QLDPC / best other code");
    let finite: Vec<&RatioPoint> = ratios.iter().filter(|r| r.ratio.is_finite()).collect();
    let ymax = finite.iter().map(|r| r.ratio).fold(2.0f64, f64::max).min(8.0);
    let xs: Vec<f64> = ratios.iter().map(|r| r.p0.log10()).collect();
    let ax = Axes {
        x0: xs.iter().cloned().fold(f64::INFINITY, f64::min),
        x1: xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        y0: 0.0,
        y1: ymax * 1.05,
    };
    axis_lines(&mut s, &ax, "p0", "yield ratio");
    x_ticks(&mut s, &ax, true);
    y_ticks(&mut s, &ax, false);
    for (y, color) in [(1.0, "#999999"), (1.25, "#cc9900")] {
        let py = ax.sy(y);
        let _ = writeln!(
            s,
            "<line x1=\"{ML}\" y1=\"{py}\" x2=\"{}\" y2=\"{py}\" stroke=\"{color}\" stroke-dasharray=\"5,4\"/>",
            W - MR
        );
    }
    let mut seg: Vec<(f64, f64)> = Vec::new();
    for r in ratios {
        if r.ratio.is_finite() {
            seg.push((ax.sx(r.p0.log10()), ax.sy(r.ratio.min(ax.y1))));
        } else {
            polyline(&mut s, &seg, PALETTE[0]);
            seg.clear();
        }
    }
    polyline(&mut s, &seg, PALETTE[0]);
    legend(&mut s, &[("qldpc / best other".to_string(), PALETTE[0])]);
    s.push_str("</svg>\n");
    s
}
