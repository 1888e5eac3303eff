//! Sum-product syndrome decoding on the Tanner graph of a stabilizer code.
//!
//! Check messages R and variable messages Q are conditional probabilities
//! over the q² error symbols, attached to the nonzero entries of H.  Check
//! updates run through a binary-split convolution over GF(p) syndrome
//! contributions (the FFT-like recursion), which reproduces the direct
//! configuration sum at O(d·p²) per check instead of exponential cost.
//! Variable updates use exclusion products; the flooding schedule updates
//! all checks, then all variables, then re-derives the tentative decoding
//! x̃ by per-qubit argmax until its syndrome matches or the round cap hits.

use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::states::ChannelPrior;

const MSG_FLOOR: f64 = 1e-300;

/// Bipartite adjacency of a parity-check matrix with per-edge skew tables.
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    q2: usize,
    p: usize,
    /// CSR over checks: edges of check i are `check_start[i]..check_start[i+1]`.
    check_start: Vec<u32>,
    edge_var: Vec<u32>,
    /// `edge_skew[e*q2 + α]` = (H_ij | α) for edge e on entry H_ij.
    edge_skew: Vec<u8>,
    /// CSR over variables, listing edge ids.
    var_start: Vec<u32>,
    var_edges: Vec<u32>,
    max_check_degree: usize,
    max_var_degree: usize,
}

impl TannerGraph {
    pub fn new(code: &StabilizerCode) -> TannerGraph {
        let field = code.field();
        let q2 = field.order() as usize;
        let n_vars = code.n();
        let n_checks = code.num_rows();
        let mut check_start = Vec::with_capacity(n_checks + 1);
        let mut edge_var = Vec::new();
        let mut edge_skew = Vec::new();
        check_start.push(0u32);
        for row in code.rows() {
            for &(c, val) in row {
                edge_var.push(c);
                for alpha in 0..q2 as u16 {
                    edge_skew.push(field.skew_raw(val, alpha));
                }
            }
            check_start.push(edge_var.len() as u32);
        }
        let mut var_lists: Vec<Vec<u32>> = vec![Vec::new(); n_vars];
        for i in 0..n_checks {
            for e in check_start[i]..check_start[i + 1] {
                var_lists[edge_var[e as usize] as usize].push(e);
            }
        }
        let mut var_start = Vec::with_capacity(n_vars + 1);
        let mut var_edges = Vec::new();
        var_start.push(0u32);
        for list in &var_lists {
            var_edges.extend_from_slice(list);
            var_start.push(var_edges.len() as u32);
        }
        let max_check_degree = (0..n_checks)
            .map(|i| (check_start[i + 1] - check_start[i]) as usize)
            .max()
            .unwrap_or(0);
        let max_var_degree = var_lists.iter().map(|l| l.len()).max().unwrap_or(0);
        TannerGraph {
            n_vars,
            n_checks,
            q2,
            p: field.p() as usize,
            check_start,
            edge_var,
            edge_skew,
            var_start,
            var_edges,
            max_check_degree,
            max_var_degree,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn q2(&self) -> usize {
        self.q2
    }

    /// Syndrome of a dense symbol vector, through the edge skew tables.
    pub fn syndrome_of(&self, x: &[u16], out: &mut [u8]) {
        for i in 0..self.n_checks {
            let mut acc = 0usize;
            for e in self.check_start[i] as usize..self.check_start[i + 1] as usize {
                acc += self.edge_skew[e * self.q2 + x[self.edge_var[e] as usize] as usize] as usize;
            }
            out[i] = (acc % self.p) as u8;
        }
    }

    fn syndrome_matches(&self, x: &[u16], s: &[u8]) -> bool {
        for i in 0..self.n_checks {
            let mut acc = 0usize;
            for e in self.check_start[i] as usize..self.check_start[i + 1] as usize {
                acc += self.edge_skew[e * self.q2 + x[self.edge_var[e] as usize] as usize] as usize;
            }
            if (acc % self.p) as u8 != s[i] {
                return false;
            }
        }
        true
    }
}

/// Flat per-qubit priors, one q²-vector per variable.
pub fn broadcast_priors(graph: &TannerGraph, prior: &ChannelPrior) -> Result<Vec<f64>> {
    if prior.len() != graph.q2 {
        return Err(Error::DimensionMismatch { expected: graph.q2, got: prior.len() });
    }
    let mut out = Vec::with_capacity(graph.n_vars * graph.q2);
    for _ in 0..graph.n_vars {
        out.extend_from_slice(prior.probs());
    }
    Ok(out)
}

/// Message arrays and scratch space, reusable across decode calls.
pub struct BpWorkspace {
    q_msg: Vec<f64>,
    r_msg: Vec<f64>,
    posterior: Vec<f64>,
    xtilde: Vec<u16>,
    level_f: Vec<f64>,
    level_g: Vec<f64>,
    level_offset: Vec<usize>,
    level_count: Vec<usize>,
    chk_pre: Vec<f64>,
    var_pre: Vec<f64>,
    var_suffix: Vec<f64>,
}

impl BpWorkspace {
    pub fn new(graph: &TannerGraph) -> BpWorkspace {
        let edges = graph.edge_count();
        // segment levels for the largest check: d, ⌈d/2⌉, …, 1
        let mut cap = 0;
        let mut d = graph.max_check_degree.max(1);
        loop {
            cap += d;
            if d == 1 {
                break;
            }
            d = d.div_ceil(2);
        }
        BpWorkspace {
            q_msg: vec![0.0; edges * graph.q2],
            r_msg: vec![0.0; edges * graph.q2],
            posterior: vec![0.0; graph.n_vars * graph.q2],
            xtilde: vec![0; graph.n_vars],
            level_f: vec![0.0; cap * graph.p],
            level_g: vec![0.0; cap * graph.p],
            level_offset: Vec::new(),
            level_count: Vec::new(),
            chk_pre: vec![0.0; 2 * graph.max_check_degree.max(1)],
            var_pre: vec![0.0; (graph.max_var_degree + 1) * graph.q2],
            var_suffix: vec![1.0; graph.q2],
        }
    }

    /// Set every edge message Q_ij to the prior of its variable.
    pub fn init(&mut self, graph: &TannerGraph, priors: &[f64]) {
        let q2 = graph.q2;
        for e in 0..graph.edge_count() {
            let v = graph.edge_var[e] as usize;
            self.q_msg[e * q2..(e + 1) * q2].copy_from_slice(&priors[v * q2..(v + 1) * q2]);
        }
    }

    /// One full check-node pass: recompute every R message from the current
    /// Q messages and the syndrome.
    pub fn check_update(&mut self, graph: &TannerGraph, syndrome: &[u8]) {
        if graph.p == 2 {
            self.check_update_p2(graph, syndrome, None);
        } else {
            self.check_update_general(graph, syndrome);
        }
    }

    /// Binary specialization in the parity transform domain: each leaf
    /// distribution (F[0], F[1]) becomes (total, delta) = (F[0]+F[1],
    /// F[0]−F[1]); the split convolutions turn into plain products, taken
    /// here as exclusion prefix/suffix products.  Algebraically identical
    /// to the general recursion.
    fn check_update_p2(&mut self, graph: &TannerGraph, syndrome: &[u8], priors: Option<&[f64]>) {
        let q2 = graph.q2;
        for i in 0..graph.n_checks {
            let e0 = graph.check_start[i] as usize;
            let e1 = graph.check_start[i + 1] as usize;
            let d = e1 - e0;
            if d == 0 {
                continue;
            }
            // leaf transform
            for (slot, e) in (e0..e1).enumerate() {
                let msg = match priors {
                    Some(pri) => {
                        let v = graph.edge_var[e] as usize;
                        &pri[v * q2..(v + 1) * q2]
                    }
                    None => &self.q_msg[e * q2..(e + 1) * q2],
                };
                let mut even = 0.0;
                let mut odd = 0.0;
                for (alpha, &q) in msg.iter().enumerate() {
                    if graph.edge_skew[e * q2 + alpha] == 0 {
                        even += q;
                    } else {
                        odd += q;
                    }
                }
                self.level_f[slot] = even + odd; // total
                self.level_g[slot] = even - odd; // delta
            }
            // exclusion products of totals and deltas
            let mut tot_acc = 1.0f64;
            let mut del_acc = 1.0f64;
            for slot in 0..d {
                self.chk_pre[2 * slot] = tot_acc;
                self.chk_pre[2 * slot + 1] = del_acc;
                tot_acc *= self.level_f[slot];
                del_acc *= self.level_g[slot];
            }
            let mut tot_suf = 1.0f64;
            let mut del_suf = 1.0f64;
            let s_i = syndrome[i];
            for slot in (0..d).rev() {
                let tot_out = self.chk_pre[2 * slot] * tot_suf;
                let del_out = self.chk_pre[2 * slot + 1] * del_suf;
                let g = [0.5 * (tot_out + del_out), 0.5 * (tot_out - del_out)];
                let e = e0 + slot;
                for alpha in 0..q2 {
                    let b = s_i ^ graph.edge_skew[e * q2 + alpha];
                    self.r_msg[e * q2 + alpha] = g[b as usize];
                }
                tot_suf *= self.level_f[slot];
                del_suf *= self.level_g[slot];
            }
        }
    }

    fn check_update_general(&mut self, graph: &TannerGraph, syndrome: &[u8]) {
        let q2 = graph.q2;
        let p = graph.p;
        for i in 0..graph.n_checks {
            let e0 = graph.check_start[i] as usize;
            let e1 = graph.check_start[i + 1] as usize;
            let d = e1 - e0;
            if d == 0 {
                continue;
            }

            // level layout for this degree
            self.level_offset.clear();
            self.level_count.clear();
            let mut off = 0;
            let mut m = d;
            loop {
                self.level_offset.push(off);
                self.level_count.push(m);
                off += m;
                if m == 1 {
                    break;
                }
                m = m.div_ceil(2);
            }
            let levels = self.level_count.len();

            // leaves: distribution of each edge's syndrome contribution
            for (slot, e) in (e0..e1).enumerate() {
                let base = slot * p;
                self.level_f[base..base + p].fill(0.0);
                for alpha in 0..q2 {
                    let b = graph.edge_skew[e * q2 + alpha] as usize;
                    self.level_f[base + b] += self.q_msg[e * q2 + alpha];
                }
            }
            // upward combine: convolution over GF(p) of sibling pairs
            // (levels occupy disjoint ranges, so in-place writes are safe)
            for lv in 1..levels {
                let (src_off, src_cnt) = (self.level_offset[lv - 1], self.level_count[lv - 1]);
                let dst_off = self.level_offset[lv];
                for k in 0..self.level_count[lv] {
                    let left = (src_off + 2 * k) * p;
                    let dst = (dst_off + k) * p;
                    if 2 * k + 1 < src_cnt {
                        let right = (src_off + 2 * k + 1) * p;
                        for b in 0..p {
                            let mut acc = 0.0;
                            for c in 0..p {
                                acc += self.level_f[left + c]
                                    * self.level_f[right + (b + p - c) % p];
                            }
                            self.level_f[dst + b] = acc;
                        }
                    } else {
                        for b in 0..p {
                            self.level_f[dst + b] = self.level_f[left + b];
                        }
                    }
                }
            }

            // downward complements: G(node) = distribution outside the node
            let top = self.level_offset[levels - 1] * p;
            self.level_g[top..top + p].fill(0.0);
            self.level_g[top] = 1.0;
            for lv in (1..levels).rev() {
                let (dst_off, dst_cnt) = (self.level_offset[lv - 1], self.level_count[lv - 1]);
                let src_off = self.level_offset[lv];
                for k in 0..self.level_count[lv] {
                    let parent = (src_off + k) * p;
                    let left = (dst_off + 2 * k) * p;
                    if 2 * k + 1 < dst_cnt {
                        let right = (dst_off + 2 * k + 1) * p;
                        for b in 0..p {
                            let mut acc_l = 0.0;
                            let mut acc_r = 0.0;
                            for c in 0..p {
                                let gp = self.level_g[parent + c];
                                acc_l += gp * self.level_f[right + (b + p - c) % p];
                                acc_r += gp * self.level_f[left + (b + p - c) % p];
                            }
                            self.level_g[left + b] = acc_l;
                            self.level_g[right + b] = acc_r;
                        }
                    } else {
                        for b in 0..p {
                            self.level_g[left + b] = self.level_g[parent + b];
                        }
                    }
                }
            }

            // R extraction at the leaves
            for (slot, e) in (e0..e1).enumerate() {
                let base = slot * p;
                let s_i = syndrome[i] as usize;
                for alpha in 0..q2 {
                    let shift = graph.edge_skew[e * q2 + alpha] as usize;
                    self.r_msg[e * q2 + alpha] = self.level_g[base + (s_i + p - shift) % p];
                }
            }
        }
    }

    /// One full variable-node pass: recompute Q messages, pseudo-posteriors
    /// and the tentative decoding x̃.
    pub fn variable_update(&mut self, graph: &TannerGraph, priors: &[f64]) {
        if graph.q2 == 4 {
            self.variable_update_q4(graph, priors);
        } else {
            self.variable_update_general(graph, priors);
        }
    }

    fn variable_update_q4(&mut self, graph: &TannerGraph, priors: &[f64]) {
        for v in 0..graph.n_vars {
            let lo = graph.var_start[v] as usize;
            let hi = graph.var_start[v + 1] as usize;
            let deg = hi - lo;
            let mut acc = [
                priors[v * 4],
                priors[v * 4 + 1],
                priors[v * 4 + 2],
                priors[v * 4 + 3],
            ];
            for t in 0..deg {
                let e = graph.var_edges[lo + t] as usize;
                let base = t * 4;
                self.var_pre[base] = acc[0];
                self.var_pre[base + 1] = acc[1];
                self.var_pre[base + 2] = acc[2];
                self.var_pre[base + 3] = acc[3];
                let r = &self.r_msg[e * 4..e * 4 + 4];
                acc[0] *= r[0];
                acc[1] *= r[1];
                acc[2] *= r[2];
                acc[3] *= r[3];
            }
            let post = &mut self.posterior[v * 4..v * 4 + 4];
            post.copy_from_slice(&acc);
            normalize_with_floor(post);
            let mut suf = [1.0f64; 4];
            for t in (0..deg).rev() {
                let e = graph.var_edges[lo + t] as usize;
                let base = t * 4;
                let out = &mut self.q_msg[e * 4..e * 4 + 4];
                out[0] = self.var_pre[base] * suf[0];
                out[1] = self.var_pre[base + 1] * suf[1];
                out[2] = self.var_pre[base + 2] * suf[2];
                out[3] = self.var_pre[base + 3] * suf[3];
                normalize_with_floor(out);
                let r = &self.r_msg[e * 4..e * 4 + 4];
                suf[0] *= r[0];
                suf[1] *= r[1];
                suf[2] *= r[2];
                suf[3] *= r[3];
            }
            let post = &self.posterior[v * 4..v * 4 + 4];
            let mut best = 0usize;
            if post[1] > post[best] {
                best = 1;
            }
            if post[2] > post[best] {
                best = 2;
            }
            if post[3] > post[best] {
                best = 3;
            }
            self.xtilde[v] = best as u16;
        }
    }

    fn variable_update_general(&mut self, graph: &TannerGraph, priors: &[f64]) {
        let q2 = graph.q2;
        let mut pre = std::mem::take(&mut self.var_pre);
        let mut suffix = std::mem::take(&mut self.var_suffix);
        for v in 0..graph.n_vars {
            let lo = graph.var_start[v] as usize;
            let hi = graph.var_start[v + 1] as usize;
            let deg = hi - lo;
            // forward pass: pre[t] = f_v · Π_{u<t} R_u
            pre[..q2].copy_from_slice(&priors[v * q2..(v + 1) * q2]);
            for t in 0..deg {
                let e = graph.var_edges[lo + t] as usize;
                for alpha in 0..q2 {
                    pre[(t + 1) * q2 + alpha] =
                        pre[t * q2 + alpha] * self.r_msg[e * q2 + alpha];
                }
            }
            // posterior from the full product
            let post = &mut self.posterior[v * q2..(v + 1) * q2];
            post.copy_from_slice(&pre[deg * q2..(deg + 1) * q2]);
            normalize_with_floor(post);
            // backward pass fills exclusion products
            suffix.fill(1.0);
            for t in (0..deg).rev() {
                let e = graph.var_edges[lo + t] as usize;
                let out = &mut self.q_msg[e * q2..(e + 1) * q2];
                for alpha in 0..q2 {
                    out[alpha] = pre[t * q2 + alpha] * suffix[alpha];
                }
                normalize_with_floor(out);
                for alpha in 0..q2 {
                    suffix[alpha] *= self.r_msg[e * q2 + alpha];
                }
            }
            // argmax with lowest-index tie-break
            let mut best = 0usize;
            for alpha in 1..q2 {
                if post[alpha] > post[best] {
                    best = alpha;
                }
            }
            self.xtilde[v] = best as u16;
        }
        self.var_pre = pre;
        self.var_suffix = suffix;
    }

    pub fn posteriors(&self) -> &[f64] {
        &self.posterior
    }

    pub fn xtilde(&self) -> &[u16] {
        &self.xtilde
    }

    pub fn q_message(&self, graph: &TannerGraph, edge: usize) -> &[f64] {
        &self.q_msg[edge * graph.q2..(edge + 1) * graph.q2]
    }

    pub fn r_message(&self, graph: &TannerGraph, edge: usize) -> &[f64] {
        &self.r_msg[edge * graph.q2..(edge + 1) * graph.q2]
    }

    #[cfg(test)]
    pub(crate) fn set_q_message(&mut self, graph: &TannerGraph, edge: usize, msg: &[f64]) {
        self.q_msg[edge * graph.q2..(edge + 1) * graph.q2].copy_from_slice(msg);
    }
}

fn normalize_with_floor(v: &mut [f64]) {
    let mut max = 0.0f64;
    for &x in v.iter() {
        if x > max {
            max = x;
        }
    }
    if max < MSG_FLOOR {
        // degenerate all-zero message: uniform for this round
        let u = 1.0 / v.len() as f64;
        v.fill(u);
        return;
    }
    let mut sum = 0.0;
    for x in v.iter_mut() {
        if *x < MSG_FLOOR {
            *x = MSG_FLOOR;
        }
        sum += *x;
    }
    let inv = 1.0 / sum;
    for x in v.iter_mut() {
        *x *= inv;
    }
}

/// Status of one decode call; messages and marginals stay in the workspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BpStatus {
    pub converged: bool,
    pub rounds_used: u32,
}

/// Iterate flooding rounds until the tentative decoding reproduces the
/// syndrome or `m_max` rounds have run.  Results (x̃, marginals) are read
/// from the workspace.
pub fn decode_into(
    graph: &TannerGraph,
    syndrome: &[u8],
    priors: &[f64],
    m_max: u32,
    ws: &mut BpWorkspace,
) -> Result<BpStatus> {
    if syndrome.len() != graph.n_checks {
        return Err(Error::DimensionMismatch { expected: graph.n_checks, got: syndrome.len() });
    }
    if priors.len() != graph.n_vars * graph.q2 {
        return Err(Error::DimensionMismatch {
            expected: graph.n_vars * graph.q2,
            got: priors.len(),
        });
    }
    if m_max == 0 {
        return Err(Error::InvalidCode("m_max must be at least 1".into()));
    }
    for round in 1..=m_max {
        // round 1 reads Q straight from the priors (= init + check pass)
        if round == 1 {
            if graph.p == 2 {
                ws.check_update_p2(graph, syndrome, Some(priors));
            } else {
                ws.init(graph, priors);
                ws.check_update_general(graph, syndrome);
            }
        } else {
            ws.check_update(graph, syndrome);
        }
        ws.variable_update(graph, priors);
        if graph.syndrome_matches(&ws.xtilde, syndrome) {
            return Ok(BpStatus { converged: true, rounds_used: round });
        }
    }
    Ok(BpStatus { converged: false, rounds_used: m_max })
}

/// Owned-result decode for one-off calls.
#[derive(Debug, Clone)]
pub struct DecodeResult {
    pub converged: bool,
    pub rounds_used: u32,
    pub xtilde: Vec<u16>,
    pub marginals: Vec<f64>,
}

pub fn decode(
    code: &StabilizerCode,
    syndrome: &[u8],
    priors: &[f64],
    m_max: u32,
) -> Result<DecodeResult> {
    let graph = TannerGraph::new(code);
    let mut ws = BpWorkspace::new(&graph);
    let status = decode_into(&graph, syndrome, priors, m_max, &mut ws)?;
    Ok(DecodeResult {
        converged: status.converged,
        rounds_used: status.rounds_used,
        xtilde: ws.xtilde.clone(),
        marginals: ws.posterior.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::testutil::paper_example_code;
    use crate::codes::{CodeKind, StabilizerCode};
    use crate::ffield::{FieldSpec, GF4_X, GF4_Y, GF4_Z};
    use crate::rng::sample_rng;
    use crate::states::{BellDiagonalState, ChannelPrior};
    use rand::Rng;
    use std::sync::Arc;

    fn code_from(rows: Vec<Vec<(u32, u16)>>, n: usize) -> StabilizerCode {
        StabilizerCode::from_rows(Arc::new(FieldSpec::gf4()), n, rows, CodeKind::Qldpc).unwrap()
    }

    /// Direct Eq.-style reference: sum over every configuration of the
    /// check's other variables.
    fn brute_force_r(
        graph: &TannerGraph,
        ws: &BpWorkspace,
        check: usize,
        edge: usize,
        alpha: usize,
        s_i: u8,
    ) -> f64 {
        let q2 = graph.q2;
        let e0 = graph.check_start[check] as usize;
        let e1 = graph.check_start[check + 1] as usize;
        let others: Vec<usize> = (e0..e1).filter(|&e| e != edge).collect();
        let target = (s_i as usize + graph.p - graph.edge_skew[edge * q2 + alpha] as usize)
            % graph.p;
        let mut total = 0.0;
        let mut config = vec![0usize; others.len()];
        loop {
            let mut contrib = 0usize;
            let mut weight = 1.0;
            for (slot, &e) in others.iter().enumerate() {
                contrib += graph.edge_skew[e * q2 + config[slot]] as usize;
                weight *= ws.q_msg[e * q2 + config[slot]];
            }
            if contrib % graph.p == target {
                total += weight;
            }
            // odometer
            let mut carry = true;
            for c in config.iter_mut() {
                *c += 1;
                if *c < q2 {
                    carry = false;
                    break;
                }
                *c = 0;
            }
            if carry {
                break;
            }
        }
        total
    }

    #[test]
    fn single_variable_check_row() {
        // |N(i)| = 1: R_ij^α = [ (H_ij | α) = s_i ]
        let code = code_from(vec![vec![(0, GF4_Z)]], 1);
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let priors =
            broadcast_priors(&graph, &ChannelPrior::new(vec![0.25; 4]).unwrap()).unwrap();
        ws.init(&graph, &priors);
        for s in [0u8, 1u8] {
            ws.check_update(&graph, &[s]);
            let r = ws.r_message(&graph, 0);
            for alpha in 0..4u16 {
                let expect = f64::from(crate::ffield::gf4_skew(GF4_Z, alpha) == s);
                assert_eq!(r[alpha as usize], expect, "s={s} α={alpha}");
            }
        }
    }

    #[test]
    fn recursion_matches_direct_enumeration_on_example_code() {
        let code = paper_example_code();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        // uniform priors
        let priors =
            broadcast_priors(&graph, &ChannelPrior::new(vec![0.25; 4]).unwrap()).unwrap();
        ws.init(&graph, &priors);
        let syndrome = [0u8, 1, 0, 1];
        ws.check_update(&graph, &syndrome);
        for check in 0..graph.n_checks() {
            for e in graph.check_start[check] as usize..graph.check_start[check + 1] as usize {
                for alpha in 0..4 {
                    let direct = brute_force_r(&graph, &ws, check, e, alpha, syndrome[check]);
                    let got = ws.r_message(&graph, e)[alpha];
                    assert!(
                        (direct - got).abs() < 1e-9,
                        "check {check} edge {e} α {alpha}: {got} vs {direct}"
                    );
                }
            }
        }
    }

    #[test]
    fn recursion_matches_direct_enumeration_random_messages() {
        let mut rng = sample_rng(41, 0, 0);
        let code = paper_example_code();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        // random normalized Q messages
        for e in 0..graph.edge_count() {
            let mut msg = [0.0f64; 4];
            let mut sum = 0.0;
            for m in &mut msg {
                *m = rng.random::<f64>() + 1e-3;
                sum += *m;
            }
            for m in &mut msg {
                *m /= sum;
            }
            ws.set_q_message(&graph, e, &msg);
        }
        let syndrome = [1u8, 1, 0, 0];
        ws.check_update(&graph, &syndrome);
        for check in 0..graph.n_checks() {
            for e in graph.check_start[check] as usize..graph.check_start[check + 1] as usize {
                for alpha in 0..4 {
                    let direct = brute_force_r(&graph, &ws, check, e, alpha, syndrome[check]);
                    let got = ws.r_message(&graph, e)[alpha];
                    assert!((direct - got).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn identity_concentrated_priors_zero_syndrome() {
        // R_ij^α = [ (H_ij | α) = 0 ] when partners are surely identity
        let code = paper_example_code();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let prior = ChannelPrior::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let priors = broadcast_priors(&graph, &prior).unwrap();
        ws.init(&graph, &priors);
        ws.check_update(&graph, &[0, 0, 0, 0]);
        for e in 0..graph.edge_count() {
            let r = ws.r_message(&graph, e);
            for alpha in 0..4 {
                let expect = f64::from(graph.edge_skew[e * 4 + alpha] == 0);
                assert!((r[alpha] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degree_one_variable_keeps_prior() {
        // variable 0 participates in exactly one check: Q_ij = f_j
        let code = code_from(vec![vec![(0, GF4_Z), (1, GF4_Z)], vec![(1, GF4_X), (2, GF4_X)]], 3);
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.3).unwrap();
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        ws.init(&graph, &priors);
        ws.check_update(&graph, &[0, 0]);
        ws.variable_update(&graph, &priors);
        let q = ws.q_message(&graph, 0); // edge 0 = (check 0, var 0)
        for alpha in 0..4 {
            assert!((q[alpha] - priors[alpha]).abs() < 1e-12);
        }
    }

    #[test]
    fn two_identical_checks_square_their_message() {
        // two identical single-variable checks on one qubit: Q_j ∝ f (R)²
        let code = code_from(vec![vec![(0, GF4_Z)], vec![(0, GF4_Z)]], 1);
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.2).unwrap();
        let prior = ChannelPrior::from_state(&state);
        let priors = broadcast_priors(&graph, &prior).unwrap();
        ws.init(&graph, &priors);
        ws.check_update(&graph, &[1, 1]);
        ws.variable_update(&graph, &priors);
        let r = ws.r_message(&graph, 0).to_vec();
        let mut expect: Vec<f64> = (0..4).map(|a| priors[a] * r[a] * r[a]).collect();
        let sum: f64 = expect.iter().sum();
        for e in &mut expect {
            *e /= sum;
        }
        for alpha in 0..4 {
            assert!((ws.posteriors()[alpha] - expect[alpha]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_syndrome_converges_immediately() {
        let code = paper_example_code();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.3).unwrap();
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        let status = decode_into(&graph, &[0, 0, 0, 0], &priors, 5, &mut ws).unwrap();
        assert!(status.converged);
        assert_eq!(status.rounds_used, 1);
        assert!(ws.xtilde().iter().all(|&x| x == 0));
    }

    #[test]
    fn single_errors_decode_on_full_size_bicycle_code() {
        // the (8,16)-regular n = 960 code decodes every single-qubit error
        // within 5 rounds (spot-checked across the block), with the
        // residual e + x̃ landing back in the row space
        let field = Arc::new(FieldSpec::gf4());
        let mut rng = sample_rng(44, 0, 0);
        let (code, _) = crate::codes::bicycle_construct_full_rank(
            &field,
            960,
            4,
            2,
            std::collections::BTreeSet::new(),
            &mut rng,
            64,
        )
        .unwrap();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.01).unwrap();
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        for q in (0..960u32).step_by(31) {
            for sym in [GF4_X, GF4_Z, GF4_Y] {
                let s = code.syndrome_sparse(&[(q, sym)]);
                let status = decode_into(&graph, &s, &priors, 5, &mut ws).unwrap();
                assert!(status.converged, "q={q} sym={sym}");
                let mut residual: Vec<u16> = ws.xtilde().to_vec();
                residual[q as usize] ^= sym;
                assert!(code.syndrome(&residual).unwrap().iter().all(|&b| b == 0));
            }
        }
    }

    #[test]
    fn example_code_single_errors_are_degenerate() {
        // The 4×12 code pairs every single-error explanation with an exact
        // symmetric alternative (column weight 2 plus the bicyclic
        // automorphisms), so per-qubit argmax never reproduces the syndrome
        // and decoding reports non-convergence.
        let code = paper_example_code();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.01).unwrap();
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        let s = code.syndrome_sparse(&[(0, GF4_X)]);
        let status = decode_into(&graph, &s, &priors, 5, &mut ws).unwrap();
        assert!(!status.converged);
        assert_eq!(status.rounds_used, 5);
    }

    #[test]
    fn messages_normalized_and_nonnegative_every_round() {
        let code = paper_example_code();
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.15).unwrap();
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        let syndrome = [1u8, 0, 1, 0];
        ws.init(&graph, &priors);
        for _ in 0..4 {
            ws.check_update(&graph, &syndrome);
            ws.variable_update(&graph, &priors);
            for e in 0..graph.edge_count() {
                let q = ws.q_message(&graph, e);
                assert!(q.iter().all(|&x| x >= 0.0));
                assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            for v in 0..graph.n_vars() {
                let post = &ws.posteriors()[v * 4..(v + 1) * 4];
                assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tree_marginals_match_brute_force_posterior() {
        // tree-shaped factor graphs: converged pseudo-posteriors are exact
        let cases: Vec<(usize, Vec<Vec<(u32, u16)>>)> = vec![
            // chain of Z checks
            (5, vec![
                vec![(0, GF4_Z), (1, GF4_Z)],
                vec![(1, GF4_Z), (2, GF4_Z)],
                vec![(2, GF4_Z), (3, GF4_Z)],
                vec![(3, GF4_Z), (4, GF4_Z)],
            ]),
            // mixed-symbol star + pendant (factor-graph tree; commutation
            // is irrelevant for pure inference)
            (6, vec![
                vec![(0, GF4_X), (1, GF4_Y), (2, GF4_Z)],
                vec![(2, GF4_X), (3, GF4_Z)],
                vec![(3, GF4_Y), (4, GF4_X), (5, GF4_Z)],
            ]),
        ];
        let mut rng = sample_rng(42, 0, 0);
        for (n, rows) in cases {
            let code = code_from(rows, n);
            let graph = TannerGraph::new(&code);
            let mut ws = BpWorkspace::new(&graph);
            let state = BellDiagonalState::new(0.6, 0.15, 0.1, 0.15).unwrap();
            let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
            // achievable syndrome from a random error
            let e: Vec<u16> = (0..n).map(|_| rng.random_range(0..4u16)).collect();
            let syndrome = code.syndrome(&e).unwrap();

            // run to the message fixed point (no early exit: the syndrome
            // check can pass long before the marginals settle)
            ws.init(&graph, &priors);
            for _ in 0..2 * n {
                ws.check_update(&graph, &syndrome);
                ws.variable_update(&graph, &priors);
            }

            // brute-force conditional marginals over all 4^n error vectors
            let mut marg = vec![0.0f64; n * 4];
            let mut total = 0.0;
            let mut cfg = vec![0u16; n];
            loop {
                let mut w = 1.0;
                for (j, &c) in cfg.iter().enumerate() {
                    w *= priors[j * 4 + c as usize];
                }
                if code.syndrome(&cfg).unwrap() == syndrome {
                    total += w;
                    for (j, &c) in cfg.iter().enumerate() {
                        marg[j * 4 + c as usize] += w;
                    }
                }
                let mut carry = true;
                for c in cfg.iter_mut() {
                    *c += 1;
                    if *c < 4 {
                        carry = false;
                        break;
                    }
                    *c = 0;
                }
                if carry {
                    break;
                }
            }
            for m in &mut marg {
                *m /= total;
            }
            for j in 0..n {
                for alpha in 0..4 {
                    let got = ws.posteriors()[j * 4 + alpha];
                    let expect = marg[j * 4 + alpha];
                    assert!(
                        (got - expect).abs() < 1e-9,
                        "n={n} var {j} α {alpha}: {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn decode_is_deterministic() {
        let code = paper_example_code();
        let state = BellDiagonalState::werner(0.2).unwrap();
        let graph = TannerGraph::new(&code);
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        let syndrome = vec![1u8, 0, 0, 1];
        let a = decode(&code, &syndrome, &priors, 5).unwrap();
        let b = decode(&code, &syndrome, &priors, 5).unwrap();
        assert_eq!(a.xtilde, b.xtilde);
        assert_eq!(a.marginals, b.marginals);
        assert_eq!(a.rounds_used, b.rounds_used);
    }

    #[test]
    fn nonconvergence_is_a_status_not_an_error() {
        // an unsatisfiable syndrome pattern on a tiny code
        let code = code_from(vec![vec![(0, GF4_Z)], vec![(0, GF4_Z)]], 1);
        let graph = TannerGraph::new(&code);
        let mut ws = BpWorkspace::new(&graph);
        let state = BellDiagonalState::werner(0.4).unwrap();
        let priors = broadcast_priors(&graph, &ChannelPrior::from_state(&state)).unwrap();
        // s = (0, 1) cannot be satisfied: both checks share the variable
        let status = decode_into(&graph, &[0, 1], &priors, 5, &mut ws).unwrap();
        assert!(!status.converged);
        assert_eq!(status.rounds_used, 5);
    }
}
