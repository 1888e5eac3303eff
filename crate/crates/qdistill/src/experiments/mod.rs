//! Monte-Carlo measurement of final-step performance, the hashing baseline,
//! performance fitting, and yield-curve generation over recurrence
//! schedules.

mod blockeval;
mod fit;
mod yieldopt;

pub use blockeval::BlockEvaluator;
pub use fit::{fit_d_partial, fit_log_e_out, DPartialFit, LogLinearFit};
pub use yieldopt::{
    optimize_yield, yield_curve, yield_ratio, ModelEval, PerfCurve, RatioPoint, YieldPoint,
    DEFAULT_P_TH,
};

use crate::adaptive::{AdaptiveCodePair, AdaptivePath, AdaptiveWorkspace};
use crate::bp::broadcast_priors;
use crate::codes::{family_construct, BoundedDecoder, CodeFamily, LabelTables, LogicalFrame};
use crate::codes::{logical_frame, StabilizerCode};
use crate::error::Result;
use crate::rng::sample_rng;
use crate::states::{BellDiagonalState, ChannelPrior};
use rayon::prelude::*;
use std::sync::Arc;

/// Message-passing round cap used throughout.
pub const DEFAULT_M_MAX: u32 = 5;

/// One measured operating point of a final-step model.
#[derive(Debug, Clone, Copy)]
pub struct PerformancePoint {
    pub e_in: f64,
    /// Mean probability that a kept logical pair carries a non-identity
    /// label.
    pub e_out: f64,
    /// 95% Wilson half-width on e_out.
    pub e_out_ci: f64,
    /// Kept pairs per input pair.
    pub d_partial: f64,
    pub samples: u64,
    pub kept_total: u64,
    pub bad_total: u64,
    /// h1 / h2 / discard sample counts (adaptive model only).
    pub path_counts: [u64; 3],
}

/// Asymptotic hashing-baseline yield 1 − S(state), floored at zero; the
/// output error of hashing is treated as zero.
pub fn hashing_yield(state: &BellDiagonalState) -> f64 {
    (1.0 - state.entropy()).max(0.0)
}

/// A block code packaged with everything the measurement and yield layers
/// need: bounded-distance decoder, logical frame, label tables, and the
/// exact evaluator.
pub struct BlockModel {
    pub family: CodeFamily,
    pub t: u32,
    code: Arc<StabilizerCode>,
    decoder: BoundedDecoder,
    frame: LogicalFrame,
    tables: LabelTables,
    evaluator: BlockEvaluator,
}

impl BlockModel {
    pub fn new(family: CodeFamily, t: u32) -> Result<BlockModel> {
        let code = Arc::new(family_construct(family, t)?);
        let decoder = BoundedDecoder::build(&code)?;
        let frame = logical_frame(&code)?;
        let tables = frame.label_tables();
        let evaluator = BlockEvaluator::new(&code, &decoder, &frame)?;
        Ok(BlockModel { family, t, code, decoder, frame, tables, evaluator })
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn frame(&self) -> &LogicalFrame {
        &self.frame
    }

    pub fn decoder(&self) -> &BoundedDecoder {
        &self.decoder
    }

    pub fn evaluator(&self) -> &BlockEvaluator {
        &self.evaluator
    }

    pub fn k(&self) -> usize {
        self.frame.k()
    }

    pub fn label(&self) -> String {
        format!("{}:{}", self.family.label(), self.t)
    }
}

/// A final-step model under measurement.
pub enum FinalModel {
    Hashing,
    Block(Box<BlockModel>),
    Adaptive(Arc<AdaptiveCodePair>),
}

impl FinalModel {
    pub fn label(&self) -> String {
        match self {
            FinalModel::Hashing => "hashing".to_string(),
            FinalModel::Block(b) => b.label(),
            FinalModel::Adaptive(_) => "qldpc".to_string(),
        }
    }
}

/// 95% Wilson score half-width for `bad` successes out of `kept` trials.
pub fn wilson_half_width(bad: u64, kept: u64) -> f64 {
    if kept == 0 {
        return 0.0;
    }
    let z = 1.96f64;
    let n = kept as f64;
    let p = bad as f64 / n;
    let z2 = z * z;
    z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

#[derive(Default, Clone, Copy)]
struct Accum {
    kept: u64,
    bad: u64,
    paths: [u64; 3],
}

impl Accum {
    fn merge(mut self, other: Accum) -> Accum {
        self.kept += other.kept;
        self.bad += other.bad;
        for i in 0..3 {
            self.paths[i] += other.paths[i];
        }
        self
    }
}

const CHUNK: u64 = 512;

/// Measure a final-step model against i.i.d. errors drawn from `state`
/// (generally a post-recurrence Bell-diagonal state, not a Werner state).
/// Fully deterministic for a fixed seed, independent of worker count.
pub fn measure_final_step(
    model: &FinalModel,
    state: &BellDiagonalState,
    samples: u64,
    seed: u64,
) -> Result<PerformancePoint> {
    state.validate()?;
    let e_in = state.error_rate();
    match model {
        FinalModel::Hashing => Ok(PerformancePoint {
            e_in,
            e_out: 0.0,
            e_out_ci: 0.0,
            d_partial: hashing_yield(state),
            samples: 0,
            kept_total: 0,
            bad_total: 0,
            path_counts: [0; 3],
        }),
        FinalModel::Block(block) => {
            let acc = measure_block(block, state, samples, seed);
            Ok(point_from(e_in, samples, acc, block.code.n()))
        }
        FinalModel::Adaptive(pair) => {
            let acc = measure_adaptive(pair, state, samples, seed)?;
            Ok(point_from(e_in, samples, acc, pair.h2().n()))
        }
    }
}

fn point_from(e_in: f64, samples: u64, acc: Accum, n: usize) -> PerformancePoint {
    PerformancePoint {
        e_in,
        e_out: if acc.kept > 0 { acc.bad as f64 / acc.kept as f64 } else { 0.0 },
        e_out_ci: wilson_half_width(acc.bad, acc.kept),
        d_partial: acc.kept as f64 / (samples as f64 * n as f64),
        samples,
        kept_total: acc.kept,
        bad_total: acc.bad,
        path_counts: acc.paths,
    }
}

fn sample_sparse_error(
    state: &BellDiagonalState,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    out: &mut Vec<(u32, u16)>,
) {
    out.clear();
    for q in 0..n as u32 {
        let sym = state.sample_error(rng);
        if sym != 0 {
            out.push((q, sym));
        }
    }
}

fn measure_block(block: &BlockModel, state: &BellDiagonalState, samples: u64, seed: u64) -> Accum {
    let n = block.code.n();
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let words = block.tables.words();
            let mut acc_x = vec![0u64; words];
            let mut acc_z = vec![0u64; words];
            let mut syndrome = vec![0u8; block.code.num_rows()];
            let mut err = Vec::with_capacity(16);
            let mut local = Accum::default();
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            for idx in lo..hi {
                let mut rng = sample_rng(seed, 1, idx);
                sample_sparse_error(state, n, &mut rng, &mut err);
                block.code.syndrome_sparse_into(&err, &mut syndrome);
                let correction = block.decoder.decode(&syndrome).expect("syndrome length");
                acc_x.fill(0);
                acc_z.fill(0);
                for &(q, sym) in err.iter().chain(correction.iter()) {
                    block.tables.accumulate(&mut acc_x, &mut acc_z, q, sym);
                }
                local.kept += block.frame.k() as u64;
                local.bad += block.tables.count_bad(&acc_x, &acc_z) as u64;
                local.paths[0] += 1;
            }
            local
        })
        .reduce(Accum::default, Accum::merge)
}

fn measure_adaptive(
    pair: &AdaptiveCodePair,
    state: &BellDiagonalState,
    samples: u64,
    seed: u64,
) -> Result<Accum> {
    let n = pair.h2().n();
    let priors = broadcast_priors(pair.graph1(), &ChannelPrior::from_state(state))?;
    let h_th = state.entropy();
    let chunks = samples.div_ceil(CHUNK);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut ws = AdaptiveWorkspace::new(pair);
            let mut err = Vec::with_capacity(32);
            let mut local = Accum::default();
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            for idx in lo..hi {
                let mut rng = sample_rng(seed, 1, idx);
                sample_sparse_error(state, n, &mut rng, &mut err);
                let stats = pair
                    .distill_stats(&err, &priors, h_th, DEFAULT_M_MAX, &mut ws)
                    .expect("distill on validated inputs");
                local.kept += stats.kept as u64;
                local.bad += stats.bad as u64;
                let pi = match stats.path {
                    AdaptivePath::H1Converged => 0,
                    AdaptivePath::H2Converged => 1,
                    AdaptivePath::Discard => 2,
                };
                local.paths[pi] += 1;
            }
            local
        })
        .reduce(Accum::default, Accum::merge);
    Ok(acc)
}

/// The accumulation of a sample restricted to errors of weight ≤ 1, for
/// oracle-style cross-checks of distance-3 codes.
pub fn block_e_out_weight_le1(block: &BlockModel, state: &BellDiagonalState) -> Result<f64> {
    let n = block.code.n();
    let probs = state.by_symbol();
    let mut bad_weighted = 0.0;
    let mut total_weight = (0..n).map(|_| probs[0]).product::<f64>();
    let base: f64 = probs[0].powi(n as i32 - 1);
    let mut kept_weighted = total_weight * block.frame.k() as f64;
    // weight-0 contributes no bad pairs
    for q in 0..n as u32 {
        for sym in 1..4u16 {
            let w = base * probs[sym as usize];
            let s = block.code.syndrome_sparse(&[(q, sym)]);
            let corr = block.decoder.decode(&s)?;
            let mut residual: Vec<(u32, u16)> = vec![(q, sym)];
            residual.extend_from_slice(&corr);
            let labels_bad = block
                .frame
                .residual_labels_sparse(&residual)
                .iter()
                .filter(|&&l| l != 0)
                .count();
            bad_weighted += w * labels_bad as f64;
            kept_weighted += w * block.frame.k() as f64;
            total_weight += w;
        }
    }
    let _ = total_weight;
    Ok(bad_weighted / kept_weighted)
}
