//! The two-level adaptive distillation step: decode with the high-rate code
//! H[1]; on failure escalate to its supercode H[2]; if that fails too,
//! apply the per-qubit argmax corrections, pick a logical assignment whose
//! pivots sit on low-entropy qubits, and discard the output pairs whose
//! pseudo-posterior entropy exceeds the threshold.

use crate::bp::{decode_into, BpWorkspace, TannerGraph};
use crate::codes::{
    bicycle_construct, bicycle_construct_full_rank, logical_frame, BicycleSeed, LabelTables,
    LogicalFrame, StabilizerCode,
};
use crate::error::{Error, Result};
use crate::ffield::FieldSpec;
use crate::states::entropy4;
use rand::Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

/// Geometry of an adaptive pair; the defaults are the n = 960 codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptiveParams {
    pub n: usize,
    pub n_prime: usize,
    pub u: usize,
    /// Residue class of H[2] rows dropped to form H[1].
    pub deleted_residue: usize,
}

impl AdaptiveParams {
    /// The (8,16)/(6,16) pair with codeword size 960.
    pub fn paper_960() -> AdaptiveParams {
        AdaptiveParams { n: 960, n_prime: 4, u: 2, deleted_residue: 4 }
    }

    /// A small pair for tests: (2,4)-regular H[2] over 24 qubits with a
    /// (1,4)-regular H[1].
    pub fn toy_24() -> AdaptiveParams {
        AdaptiveParams { n: 24, n_prime: 2, u: 1, deleted_residue: 2 }
    }
}

/// H[1] ⊂ H[2] plus everything precomputed for high-volume distillation:
/// Tanner graphs, default logical frames, label tables, and the logical
/// coordinates of every single-qubit operator under the H[2] frame.
pub struct AdaptiveCodePair {
    params: AdaptiveParams,
    seed: BicycleSeed,
    h1: StabilizerCode,
    h2: StabilizerCode,
    row_map: Vec<u32>,
    deleted_rows: Vec<u32>,
    graph1: TannerGraph,
    graph2: TannerGraph,
    frame1: LogicalFrame,
    frame2: LogicalFrame,
    tables1: LabelTables,
    tables2: LabelTables,
    lwords: usize,
}

/// Which branch of the protocol handled a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdaptivePath {
    H1Converged,
    H2Converged,
    Discard,
}

impl AdaptivePath {
    pub fn label(self) -> &'static str {
        match self {
            AdaptivePath::H1Converged => "h1",
            AdaptivePath::H2Converged => "h2",
            AdaptivePath::Discard => "discard",
        }
    }
}

/// Compact per-sample result used by the Monte-Carlo harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistillStats {
    pub path: AdaptivePath,
    /// Logical pairs delivered.
    pub kept: u32,
    /// Kept pairs carrying a non-identity residual label.
    pub bad: u32,
}

/// Full per-sample outcome, for inspection and tests.
#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub path: AdaptivePath,
    /// Residual physical error after the applied correction.
    pub residual: Vec<u16>,
    /// Per kept pair: (pivot qubit, residual label).
    pub kept_labels: Vec<(u32, u16)>,
    /// Pairs discarded on the discard path (0 on converged paths).
    pub discarded: u32,
    /// Pivot entropies of every extracted pair, discard path only.
    pub pair_entropies: Option<Vec<f64>>,
}

/// Reusable buffers for [`AdaptiveCodePair::distill_stats`].
pub struct AdaptiveWorkspace {
    pub bp1: BpWorkspace,
    pub bp2: BpWorkspace,
    s1: Vec<u8>,
    s2: Vec<u8>,
    residual: Vec<u16>,
    acc_x: Vec<u64>,
    acc_z: Vec<u64>,
    entropies: Vec<f64>,
    slot_order: Vec<u32>,
    pool: Vec<u64>,
    consumed: Vec<bool>,
    sel_x: Vec<u64>,
    sel_z: Vec<u64>,
    sel_pivot: Vec<u32>,
    ell_res: Vec<u64>,
}

impl AdaptiveWorkspace {
    pub fn new(pair: &AdaptiveCodePair) -> AdaptiveWorkspace {
        let n = pair.h2.n();
        let lw = pair.lwords;
        AdaptiveWorkspace {
            bp1: BpWorkspace::new(&pair.graph1),
            bp2: BpWorkspace::new(&pair.graph2),
            s1: vec![0; pair.h1.num_rows()],
            s2: vec![0; pair.h2.num_rows()],
            residual: vec![0; n],
            acc_x: vec![0; pair.tables1.words().max(pair.tables2.words())],
            acc_z: vec![0; pair.tables1.words().max(pair.tables2.words())],
            entropies: vec![0.0; n],
            slot_order: (0..2 * n as u32).collect(),
            pool: vec![0; 2 * n * 2 * lw],
            consumed: vec![false; 2 * n],
            sel_x: Vec::with_capacity(pair.frame2.k() * lw),
            sel_z: Vec::with_capacity(pair.frame2.k() * lw),
            sel_pivot: Vec::with_capacity(pair.frame2.k()),
            ell_res: vec![0; 2 * lw],
        }
    }
}

/// Build an adaptive pair from fresh random seeds, retrying until H[2] has
/// full row rank.
pub fn build_pair<R: Rng + ?Sized>(
    params: AdaptiveParams,
    rng: &mut R,
) -> Result<AdaptiveCodePair> {
    let field = Arc::new(FieldSpec::gf4());
    if params.deleted_residue == 0 || params.deleted_residue > params.n_prime {
        return Err(Error::InvalidCode("deleted residue must lie in {1..n'}".into()));
    }
    let (h2, seed) = bicycle_construct_full_rank(
        &field,
        params.n,
        params.n_prime,
        params.u,
        BTreeSet::new(),
        rng,
        64,
    )?;
    AdaptiveCodePair::from_seed(params, seed, h2)
}

/// Rebuild a pair from a stored seed (the seed's `deleted` set must be
/// empty; H[1] deletion comes from the params).
pub fn build_pair_from_seed(params: AdaptiveParams, seed: BicycleSeed) -> Result<AdaptiveCodePair> {
    let field = Arc::new(FieldSpec::gf4());
    let h2 = bicycle_construct(&field, &seed)?;
    if h2.gfp_rank() != h2.num_rows() {
        return Err(Error::RankDeficient(1));
    }
    AdaptiveCodePair::from_seed(params, seed, h2)
}

impl AdaptiveCodePair {
    fn from_seed(
        params: AdaptiveParams,
        seed: BicycleSeed,
        h2: StabilizerCode,
    ) -> Result<AdaptiveCodePair> {
        if !seed.deleted.is_empty() {
            return Err(Error::InvalidCode("H[2] seed must not delete rows".into()));
        }
        let field = h2.field().clone();
        let seed_h1 = BicycleSeed {
            deleted: BTreeSet::from([params.deleted_residue]),
            ..seed.clone()
        };
        let h1 = bicycle_construct(&field, &seed_h1)?;
        // H[1] rows are a subset of independent H[2] rows
        debug_assert_eq!(h1.gfp_rank(), h1.num_rows());

        let m = params.n / 2;
        let mut row_map = Vec::with_capacity(h1.num_rows());
        let mut deleted_rows = Vec::with_capacity(m / params.n_prime);
        for i in 0..m {
            let residue = i % params.n_prime + 1;
            if residue == params.deleted_residue {
                deleted_rows.push(i as u32);
            } else {
                row_map.push(i as u32);
            }
        }
        debug_assert_eq!(row_map.len(), h1.num_rows());

        let graph1 = TannerGraph::new(&h1);
        let graph2 = TannerGraph::new(&h2);
        let frame1 = logical_frame(&h1)?;
        let frame2 = logical_frame(&h2)?;
        let tables1 = frame1.label_tables();
        let tables2 = frame2.label_tables();
        let lwords = tables2.words();
        Ok(AdaptiveCodePair {
            params,
            seed,
            h1,
            h2,
            row_map,
            deleted_rows,
            graph1,
            graph2,
            frame1,
            frame2,
            tables1,
            tables2,
            lwords,
        })
    }

    pub fn params(&self) -> AdaptiveParams {
        self.params
    }

    pub fn seed(&self) -> &BicycleSeed {
        &self.seed
    }

    pub fn h1(&self) -> &StabilizerCode {
        &self.h1
    }

    pub fn h2(&self) -> &StabilizerCode {
        &self.h2
    }

    pub fn frame1(&self) -> &LogicalFrame {
        &self.frame1
    }

    pub fn frame2(&self) -> &LogicalFrame {
        &self.frame2
    }

    pub fn row_map(&self) -> &[u32] {
        &self.row_map
    }

    pub fn graph1(&self) -> &TannerGraph {
        &self.graph1
    }

    pub fn graph2(&self) -> &TannerGraph {
        &self.graph2
    }

    /// Logical pairs delivered by each path.
    pub fn kept_per_path(&self, path: AdaptivePath) -> usize {
        match path {
            AdaptivePath::H1Converged => self.frame1.k(),
            AdaptivePath::H2Converged => self.frame2.k(),
            AdaptivePath::Discard => 0, // sample-dependent
        }
    }

    /// Measure s[1] and the escalated s[2]; the H[1] components of s[2] are
    /// reused through the row map and only the deleted-residue rows are
    /// freshly computed.
    pub fn escalated_syndrome(&self, e: &[(u32, u16)]) -> (Vec<u8>, Vec<u8>) {
        let s1 = self.h1.syndrome_sparse(e);
        let mut s2 = vec![u8::MAX; self.h2.num_rows()];
        for (k, &i2) in self.row_map.iter().enumerate() {
            s2[i2 as usize] = s1[k];
        }
        let full = self.h2.syndrome_sparse(e);
        for (i, slot) in s2.iter_mut().enumerate() {
            if *slot == u8::MAX {
                *slot = full[i];
            } else {
                debug_assert_eq!(*slot, full[i], "escalation mismatch at row {i}");
            }
        }
        (s1, s2)
    }

    /// Hot-path distillation of one sampled error vector.
    ///
    /// `priors1`/`priors2` are the flat per-qubit channel priors for the two
    /// graphs (identical content; both kept to avoid re-broadcasting).
    pub fn distill_stats(
        &self,
        e: &[(u32, u16)],
        priors: &[f64],
        h_th: f64,
        m_max: u32,
        ws: &mut AdaptiveWorkspace,
    ) -> Result<DistillStats> {
        // (a) decode with H[1]
        self.h1.syndrome_sparse_into(e, &mut ws.s1);
        let st1 = decode_into(&self.graph1, &ws.s1, priors, m_max, &mut ws.bp1)?;
        if st1.converged {
            let bad = self.count_bad(e, true, ws);
            return Ok(DistillStats {
                path: AdaptivePath::H1Converged,
                kept: self.frame1.k() as u32,
                bad,
            });
        }
        // (b) escalate to H[2], reusing the H[1] syndrome components
        for (k, &i2) in self.row_map.iter().enumerate() {
            ws.s2[i2 as usize] = ws.s1[k];
        }
        for &r in &self.deleted_rows {
            ws.s2[r as usize] = 0;
        }
        self.fill_deleted_rows(e, &mut ws.s2);
        let st2 = decode_into(&self.graph2, &ws.s2, priors, m_max, &mut ws.bp2)?;
        if st2.converged {
            let bad = self.count_bad(e, false, ws);
            return Ok(DistillStats {
                path: AdaptivePath::H2Converged,
                kept: self.frame2.k() as u32,
                bad,
            });
        }
        // (c) apply the argmax corrections and keep low-entropy pairs
        let (kept, bad) = self.discard_path(e, h_th, false, ws);
        Ok(DistillStats { path: AdaptivePath::Discard, kept, bad })
    }

    /// Full-outcome distillation (test/CLI convenience; extracts the whole
    /// logical assignment on the discard path).
    pub fn distill(
        &self,
        e: &[(u32, u16)],
        priors: &[f64],
        h_th: f64,
        m_max: u32,
    ) -> Result<AdaptiveOutcome> {
        let mut ws = AdaptiveWorkspace::new(self);
        let stats = self.distill_stats(e, priors, h_th, m_max, &mut ws)?;
        // rebuild the residual and labels for reporting
        match stats.path {
            AdaptivePath::H1Converged | AdaptivePath::H2Converged => {
                let (xtilde, frame) = match stats.path {
                    AdaptivePath::H1Converged => (ws.bp1.xtilde(), &self.frame1),
                    _ => (ws.bp2.xtilde(), &self.frame2),
                };
                let mut residual = xtilde.to_vec();
                for &(q, sym) in e {
                    residual[q as usize] ^= sym;
                }
                let labels = frame.residual_labels(&residual)?;
                let kept_labels = frame
                    .pairs()
                    .iter()
                    .zip(&labels)
                    .map(|(p, &l)| (p.pivot, l))
                    .collect();
                Ok(AdaptiveOutcome {
                    path: stats.path,
                    residual,
                    kept_labels,
                    discarded: 0,
                    pair_entropies: None,
                })
            }
            AdaptivePath::Discard => {
                let (_, _) = self.discard_path(e, h_th, true, &mut ws);
                let mut residual = ws.bp2.xtilde().to_vec();
                for &(q, sym) in e {
                    residual[q as usize] ^= sym;
                }
                let lw = self.lwords;
                let mut kept_labels = Vec::new();
                let mut entropies = Vec::new();
                let mut discarded = 0u32;
                for (t, &pivot) in ws.sel_pivot.iter().enumerate() {
                    let h = ws.entropies[pivot as usize];
                    entropies.push(h);
                    if h <= h_th {
                        let xv = &ws.sel_x[t * 2 * lw..(t + 1) * 2 * lw];
                        let zv = &ws.sel_z[t * 2 * lw..(t + 1) * 2 * lw];
                        let lx = lform(&ws.ell_res, zv, lw) as u16;
                        let lz = lform(&ws.ell_res, xv, lw) as u16;
                        kept_labels.push((pivot, lx | lz << 1));
                    } else {
                        discarded += 1;
                    }
                }
                Ok(AdaptiveOutcome {
                    path: AdaptivePath::Discard,
                    residual,
                    kept_labels,
                    discarded,
                    pair_entropies: Some(entropies),
                })
            }
        }
    }

    fn fill_deleted_rows(&self, e: &[(u32, u16)], s2: &mut [u8]) {
        // rows of H[2] whose residue was deleted from H[1]
        let np = self.params.n_prime;
        let del = self.params.deleted_residue;
        let field = self.h2.field();
        for &(col, sym) in e {
            for &(row, val) in &self.h2.cols()[col as usize] {
                if (row as usize % np) + 1 == del {
                    s2[row as usize] ^= field.skew_raw(val, sym);
                }
            }
        }
    }

    /// Residual labels against a default frame, counting non-identity pairs.
    fn count_bad(&self, e: &[(u32, u16)], first_level: bool, ws: &mut AdaptiveWorkspace) -> u32 {
        let tables = if first_level { &self.tables1 } else { &self.tables2 };
        let words = tables.words();
        ws.acc_x[..words].fill(0);
        ws.acc_z[..words].fill(0);
        if first_level {
            ws.residual.copy_from_slice(ws.bp1.xtilde());
        } else {
            ws.residual.copy_from_slice(ws.bp2.xtilde());
        }
        for &(q, sym) in e {
            ws.residual[q as usize] ^= sym;
        }
        for (q, &sym) in ws.residual.iter().enumerate() {
            if sym != 0 {
                tables.accumulate(&mut ws.acc_x[..words], &mut ws.acc_z[..words], q as u32, sym);
            }
        }
        tables.count_bad(&ws.acc_x[..words], &ws.acc_z[..words])
    }

    /// Greedy low-entropy logical assignment in H[2]-logical coordinates,
    /// then the entropy-threshold discard.  Returns (kept, bad).
    ///
    /// Every single-qubit operator projects to logical coordinates through
    /// the default frame (a-bit t = product with Z̄_t, b-bit t = product
    /// with X̄_t); the symplectic form of two projections equals the skew
    /// product of the underlying centralizer representatives, so hyperbolic
    /// pairing in these coordinates is a genuine symplectic completion.
    /// When `full` is false the extraction stops at the entropy boundary:
    /// pairs beyond it are discarded without being materialized.
    fn discard_path(
        &self,
        e: &[(u32, u16)],
        h_th: f64,
        full: bool,
        ws: &mut AdaptiveWorkspace,
    ) -> (u32, u32) {
        let n = self.h2.n();
        let lw = self.lwords;

        // per-qubit pseudo-posterior entropies from the H[2] marginals
        let posts = ws.bp2.posteriors();
        for q in 0..n {
            ws.entropies[q] = entropy4(&posts[q * 4..(q + 1) * 4]);
        }

        // residual after the argmax corrections
        ws.residual.copy_from_slice(ws.bp2.xtilde());
        for &(q, sym) in e {
            ws.residual[q as usize] ^= sym;
        }
        // its logical coordinates
        ws.ell_res.fill(0);
        for q in 0..n {
            let sym = ws.residual[q];
            if sym != 0 {
                let (xc, zc) = self.tables2.contrib(q as u32, sym);
                for w in 0..lw {
                    ws.ell_res[w] ^= xc[w];
                    ws.ell_res[lw + w] ^= zc[w];
                }
            }
        }
        self.extract_assignment(h_th, full, true, ws)
    }

    /// Greedy hyperbolic pairing over the slot pool; ordering by ascending
    /// pivot entropy unless `sorted` is off (kept switchable for tests).
    fn extract_assignment(
        &self,
        h_th: f64,
        full: bool,
        sorted: bool,
        ws: &mut AdaptiveWorkspace,
    ) -> (u32, u32) {
        let n = self.h2.n();
        let lw = self.lwords;
        let stride = 2 * lw;

        // slot order: ascending pivot entropy, qubit index, X before Z
        ws.slot_order.clear();
        ws.slot_order.extend(0..2 * n as u32);
        if sorted {
            let ent = &ws.entropies;
            ws.slot_order.sort_by(|&a, &b| {
                let (qa, qb) = ((a / 2) as usize, (b / 2) as usize);
                ent[qa].total_cmp(&ent[qb]).then(a.cmp(&b))
            });
        }

        // pool of single-qubit operators in logical coordinates
        for q in 0..n as u32 {
            for (half, sym) in [(0u32, 1u16), (1u32, 2u16)] {
                let slot = (2 * q + half) as usize;
                let (xc, zc) = self.tables2.contrib(q, sym);
                ws.pool[slot * stride..slot * stride + lw].copy_from_slice(xc);
                ws.pool[slot * stride + lw..(slot + 1) * stride].copy_from_slice(zc);
            }
        }
        ws.consumed.fill(false);
        ws.sel_x.clear();
        ws.sel_z.clear();
        ws.sel_pivot.clear();

        let mut kept = 0u32;
        let mut bad = 0u32;
        for pos in 0..ws.slot_order.len() {
            let i = ws.slot_order[pos] as usize;
            if ws.consumed[i] {
                continue;
            }
            let pivot = (i / 2) as u32;
            let keep = ws.entropies[pivot as usize] <= h_th;
            if !keep && !full {
                break; // every later pivot has higher entropy
            }
            if pool_is_zero(&ws.pool[i * stride..(i + 1) * stride]) {
                ws.consumed[i] = true;
                continue;
            }
            // partner: first later slot with a nonzero form product
            let mut partner = None;
            for &cand in &ws.slot_order[pos + 1..] {
                let j = cand as usize;
                if ws.consumed[j] {
                    continue;
                }
                if pool_form(&ws.pool, i, j, lw) == 1 {
                    partner = Some(j);
                    break;
                }
            }
            let Some(j) = partner else {
                // fully reduced and central: stabilizer-span direction
                ws.consumed[i] = true;
                continue;
            };
            ws.consumed[i] = true;
            ws.consumed[j] = true;
            let xv: Vec<u64> = ws.pool[i * stride..(i + 1) * stride].to_vec();
            let zv: Vec<u64> = ws.pool[j * stride..(j + 1) * stride].to_vec();
            // make everything still alive commute with the new pair
            for &cand in &ws.slot_order[pos + 1..] {
                let u = cand as usize;
                if ws.consumed[u] {
                    continue;
                }
                let slice = &ws.pool[u * stride..(u + 1) * stride];
                let f_z = form_slices(slice, &zv, lw);
                let f_x = form_slices(slice, &xv, lw);
                let target = &mut ws.pool[u * stride..(u + 1) * stride];
                if f_z == 1 {
                    for w in 0..stride {
                        target[w] ^= xv[w];
                    }
                }
                if f_x == 1 {
                    for w in 0..stride {
                        target[w] ^= zv[w];
                    }
                }
            }
            if keep {
                kept += 1;
                let lx = lform(&ws.ell_res, &zv, lw) as u16;
                let lz = lform(&ws.ell_res, &xv, lw) as u16;
                if lx | lz != 0 {
                    bad += 1;
                }
            }
            ws.sel_x.extend_from_slice(&xv);
            ws.sel_z.extend_from_slice(&zv);
            ws.sel_pivot.push(pivot);
        }
        (kept, bad)
    }
}

#[inline]
fn pool_is_zero(v: &[u64]) -> bool {
    v.iter().all(|&w| w == 0)
}

/// Symplectic form of two (a|b) plane pairs.
#[inline]
fn form_slices(u: &[u64], v: &[u64], lw: usize) -> u8 {
    let mut acc = 0u64;
    for w in 0..lw {
        acc ^= (u[w] & v[lw + w]) ^ (u[lw + w] & v[w]);
    }
    (acc.count_ones() & 1) as u8
}

#[inline]
fn pool_form(pool: &[u64], i: usize, j: usize, lw: usize) -> u8 {
    let stride = 2 * lw;
    form_slices(&pool[i * stride..(i + 1) * stride], &pool[j * stride..(j + 1) * stride], lw)
}

#[inline]
fn lform(u: &[u64], v: &[u64], lw: usize) -> u8 {
    form_slices(u, v, lw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;
    use crate::states::{BellDiagonalState, ChannelPrior};
    use rand::Rng;

    fn toy_pair() -> AdaptiveCodePair {
        let mut rng = sample_rng(51, 0, 0);
        build_pair(AdaptiveParams::toy_24(), &mut rng).unwrap()
    }

    fn priors_for(pair: &AdaptiveCodePair, p0: f64) -> Vec<f64> {
        let state = BellDiagonalState::werner(p0).unwrap();
        crate::bp::broadcast_priors(pair.graph1(), &ChannelPrior::from_state(&state)).unwrap()
    }

    #[test]
    fn toy_pair_shapes() {
        let pair = toy_pair();
        assert_eq!(pair.h2().num_rows(), 12);
        assert_eq!(pair.h1().num_rows(), 6);
        assert_eq!(pair.h2().regularity(), (Some(2), Some(4)));
        assert_eq!(pair.h1().regularity(), (Some(1), Some(4)));
        assert_eq!(pair.frame1().k(), 18);
        assert_eq!(pair.frame2().k(), 12);
        // every H1 row is literally an H2 row
        for (k, &i2) in pair.row_map().iter().enumerate() {
            assert_eq!(pair.h1().rows()[k], pair.h2().rows()[i2 as usize]);
        }
    }

    #[test]
    fn paper_pair_shapes() {
        let mut rng = sample_rng(52, 0, 0);
        let pair = build_pair(AdaptiveParams::paper_960(), &mut rng).unwrap();
        assert_eq!(pair.h2().num_rows(), 480);
        assert_eq!(pair.h1().num_rows(), 360);
        assert_eq!(pair.h2().regularity(), (Some(8), Some(16)));
        assert_eq!(pair.h1().regularity(), (Some(6), Some(16)));
        assert_eq!(pair.h1().rate(), 5.0 / 8.0);
        assert_eq!(pair.h2().rate(), 0.5);
        assert_eq!(pair.frame1().k(), 600);
        assert_eq!(pair.frame2().k(), 480);
    }

    #[test]
    fn bad_deleted_residue_rejected() {
        let mut rng = sample_rng(53, 0, 0);
        let mut params = AdaptiveParams::toy_24();
        params.deleted_residue = 0;
        assert!(build_pair(params, &mut rng).is_err());
        params.deleted_residue = 3; // n' = 2
        assert!(build_pair(params, &mut rng).is_err());
    }

    #[test]
    fn escalated_syndrome_is_consistent() {
        let pair = toy_pair();
        let mut rng = sample_rng(54, 0, 0);
        // zero error: both syndromes zero
        let (s1, s2) = pair.escalated_syndrome(&[]);
        assert!(s1.iter().all(|&b| b == 0) && s2.iter().all(|&b| b == 0));
        for _ in 0..50 {
            let e: Vec<(u32, u16)> = (0..24u32)
                .filter_map(|q| {
                    let sym = rng.random_range(0..8u16);
                    (sym < 3).then_some((q, sym + 1))
                })
                .collect();
            let (s1, s2) = pair.escalated_syndrome(&e);
            // restriction through the row map reproduces s1
            for (k, &i2) in pair.row_map().iter().enumerate() {
                assert_eq!(s2[i2 as usize], s1[k]);
            }
            // and the full s2 equals a direct H2 syndrome
            assert_eq!(s2, pair.h2().syndrome_sparse(&e));
        }
    }

    #[test]
    fn clean_input_takes_h1_path() {
        let pair = toy_pair();
        let priors = priors_for(&pair, 0.05);
        let h_th = BellDiagonalState::werner(0.05).unwrap().entropy();
        let out = pair.distill(&[], &priors, h_th, 5).unwrap();
        assert_eq!(out.path, AdaptivePath::H1Converged);
        assert_eq!(out.kept_labels.len(), pair.frame1().k());
        assert!(out.kept_labels.iter().all(|&(_, l)| l == 0));
        assert!(out.residual.iter().all(|&s| s == 0));
    }

    #[test]
    fn stabilizer_row_errors_are_harmless() {
        let pair = toy_pair();
        let priors = priors_for(&pair, 0.05);
        let h_th = BellDiagonalState::werner(0.05).unwrap().entropy();
        for row in pair.h1().rows() {
            let out = pair.distill(row, &priors, h_th, 5).unwrap();
            // zero syndrome: H1 converges immediately with x̃ = 0, leaving
            // the row itself as residual — all-identity logical labels
            assert_eq!(out.path, AdaptivePath::H1Converged);
            assert!(out.kept_labels.iter().all(|&(_, l)| l == 0));
        }
    }

    #[test]
    fn stats_and_full_outcome_agree() {
        let pair = toy_pair();
        let priors = priors_for(&pair, 0.08);
        let state = BellDiagonalState::werner(0.08).unwrap();
        let h_th = state.entropy();
        let mut ws = AdaptiveWorkspace::new(&pair);
        let mut paths = std::collections::HashMap::new();
        for i in 0..300u64 {
            let mut rng = sample_rng(55, 1, i);
            let e: Vec<(u32, u16)> = (0..24u32)
                .filter_map(|q| {
                    let sym = state.sample_error(&mut rng);
                    (sym != 0).then_some((q, sym))
                })
                .collect();
            let stats = pair.distill_stats(&e, &priors, h_th, 5, &mut ws).unwrap();
            let full = pair.distill(&e, &priors, h_th, 5).unwrap();
            assert_eq!(stats.path, full.path);
            assert_eq!(stats.kept as usize, full.kept_labels.len());
            let full_bad = full.kept_labels.iter().filter(|&&(_, l)| l != 0).count();
            assert_eq!(stats.bad as usize, full_bad);
            *paths.entry(stats.path.label()).or_insert(0u32) += 1;
        }
        // at this noise level all three paths should occur
        assert!(paths.len() >= 2, "paths seen: {paths:?}");
    }

    #[test]
    fn discard_path_respects_threshold() {
        let pair = toy_pair();
        let priors = priors_for(&pair, 0.3);
        let state = BellDiagonalState::werner(0.3).unwrap();
        let mut found = false;
        for i in 0..200u64 {
            let mut rng = sample_rng(56, 2, i);
            let e: Vec<(u32, u16)> = (0..24u32)
                .filter_map(|q| {
                    let sym = state.sample_error(&mut rng);
                    (sym != 0).then_some((q, sym))
                })
                .collect();
            // h_th = 0 discards everything non-deterministic
            let out = pair.distill(&e, &priors, 0.0, 5).unwrap();
            if out.path == AdaptivePath::Discard {
                found = true;
                let ent = out.pair_entropies.as_ref().unwrap();
                assert_eq!(ent.len() as u32, out.kept_labels.len() as u32 + out.discarded);
                for &(pivot, _) in &out.kept_labels {
                    // kept pairs have pivot entropy ≤ h_th = 0
                    let state_ok = ent.iter().any(|&h| h <= 1e-12);
                    assert!(state_ok, "kept pivot {pivot} with positive entropy");
                }
                // with a generous threshold many pairs are kept
                let out2 = pair.distill(&e, &priors, 2.0, 5).unwrap();
                assert!(out2.kept_labels.len() > out.kept_labels.len());
            }
        }
        assert!(found, "no discard-path sample found at p0 = 0.3");
    }

    #[test]
    fn greedy_assignment_avoids_high_entropy_pivots() {
        let pair = toy_pair();
        let mut ws = AdaptiveWorkspace::new(&pair);
        // rig the entropies directly: qubit 7 maximally uncertain
        ws.entropies.fill(0.01);
        ws.entropies[7] = 2.0;
        ws.residual.fill(0);
        ws.ell_res.fill(0);
        let (kept, _) = pair.extract_assignment(2.5, true, true, &mut ws);
        assert_eq!(kept, pair.frame2().k() as u32);
        assert!(ws.sel_pivot.iter().all(|&p| p != 7), "pivots: {:?}", ws.sel_pivot);

        // greedy pivot-entropy sum never exceeds the unsorted completion's
        let mut rng = sample_rng(57, 0, 0);
        for _ in 0..10 {
            for h in ws.entropies.iter_mut() {
                *h = rng.random::<f64>() * 2.0;
            }
            let ent = ws.entropies.clone();
            pair.extract_assignment(f64::INFINITY, true, true, &mut ws);
            let greedy: f64 = ws.sel_pivot.iter().map(|&p| ent[p as usize]).sum();
            ws.entropies.copy_from_slice(&ent);
            pair.extract_assignment(f64::INFINITY, true, false, &mut ws);
            let unsorted: f64 = ws.sel_pivot.iter().map(|&p| ent[p as usize]).sum();
            assert!(greedy <= unsorted + 1e-12, "greedy {greedy} vs unsorted {unsorted}");
        }
    }

    #[test]
    fn distill_is_deterministic() {
        let pair = toy_pair();
        let priors = priors_for(&pair, 0.15);
        let h_th = BellDiagonalState::werner(0.15).unwrap().entropy();
        let e = vec![(3u32, 1u16), (11, 2), (17, 3), (20, 1)];
        let a = pair.distill(&e, &priors, h_th, 5).unwrap();
        let b = pair.distill(&e, &priors, h_th, 5).unwrap();
        assert_eq!(a.path, b.path);
        assert_eq!(a.kept_labels, b.kept_labels);
        assert_eq!(a.residual, b.residual);
    }
}
