//! Logical-operator completion for GF(4) stabilizer codes and the residual
//! label extraction built on it.  This is the Pauli-frame stand-in for
//! running an encoding circuit backward: symplectic Gram-Schmidt pairs each
//! stabilizer row with a destabilizer, then the leftover space is paired
//! into hyperbolic (X̄, Z̄) logical pairs in a caller-chosen qubit order.

use super::StabilizerCode;
use crate::error::{Error, Result};
use crate::ffield::gf4_skew;

/// A GF(4) row vector in two bit planes: `a` holds X parts, `b` Z parts.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SympVec {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl SympVec {
    pub fn zeros(words: usize) -> SympVec {
        SympVec { a: vec![0; words], b: vec![0; words] }
    }

    pub fn from_sparse(entries: &[(u32, u16)], words: usize) -> SympVec {
        let mut v = SympVec::zeros(words);
        for &(c, sym) in entries {
            v.set_symbol(c as usize, sym);
        }
        v
    }

    #[inline]
    pub fn set_symbol(&mut self, qubit: usize, sym: u16) {
        if sym & 1 == 1 {
            self.a[qubit / 64] ^= 1u64 << (qubit % 64);
        }
        if sym >> 1 & 1 == 1 {
            self.b[qubit / 64] ^= 1u64 << (qubit % 64);
        }
    }

    #[inline]
    pub fn symbol_at(&self, qubit: usize) -> u16 {
        let a = self.a[qubit / 64] >> (qubit % 64) & 1;
        let b = self.b[qubit / 64] >> (qubit % 64) & 1;
        (a | b << 1) as u16
    }

    /// Σ_j (a_j·b'_j − b_j·a'_j) mod 2.
    #[inline]
    pub fn skew(&self, other: &SympVec) -> u8 {
        let mut acc = 0u32;
        for i in 0..self.a.len() {
            acc ^= (self.a[i] & other.b[i]).count_ones() ^ (self.b[i] & other.a[i]).count_ones();
        }
        (acc & 1) as u8
    }

    #[inline]
    pub fn xor_in(&mut self, other: &SympVec) {
        for (x, &y) in self.a.iter_mut().zip(&other.a) {
            *x ^= y;
        }
        for (x, &y) in self.b.iter_mut().zip(&other.b) {
            *x ^= y;
        }
    }

    pub fn to_sparse(&self, n: usize) -> Vec<(u32, u16)> {
        (0..n)
            .filter_map(|q| {
                let sym = self.symbol_at(q);
                (sym != 0).then_some((q as u32, sym))
            })
            .collect()
    }
}

/// One logical qubit: an anticommuting (X̄, Z̄) operator pair and the
/// physical qubit its beliefs are read from.
#[derive(Debug, Clone)]
pub struct LogicalPair {
    pub x: Vec<(u32, u16)>,
    pub z: Vec<(u32, u16)>,
    pub pivot: u32,
}

/// A full symplectic completion of a stabilizer code.
pub struct LogicalFrame {
    n: usize,
    words: usize,
    pairs: Vec<LogicalPair>,
    xs: Vec<SympVec>,
    zs: Vec<SympVec>,
}

/// Completion in the natural qubit order 0, 1, 2, ….
pub fn logical_frame(code: &StabilizerCode) -> Result<LogicalFrame> {
    let order: Vec<u32> = (0..code.n() as u32).collect();
    logical_frame_ordered(code, &order)
}

/// Completion preferring logical pivots on the earliest qubits of `order`.
pub fn logical_frame_ordered(code: &StabilizerCode, order: &[u32]) -> Result<LogicalFrame> {
    if code.field().q() != 2 {
        return Err(Error::InvalidCode("logical frames are implemented for GF(4) codes".into()));
    }
    let n = code.n();
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    let words = n.div_ceil(64);

    // Working pool: the single-qubit X and Z operators in pivot order.
    let mut pool: Vec<SympVec> = Vec::with_capacity(2 * n);
    let mut home: Vec<u32> = Vec::with_capacity(2 * n);
    for &q in order {
        for sym in [1u16, 2u16] {
            let mut v = SympVec::zeros(words);
            v.set_symbol(q as usize, sym);
            pool.push(v);
            home.push(q);
        }
    }
    let mut consumed = vec![false; pool.len()];

    // Phase 1: pair every stabilizer row with a destabilizer drawn from the
    // pool, then make the rest of the pool commute with both.
    for (ri, row) in code.rows().iter().enumerate() {
        let r = SympVec::from_sparse(row, words);
        let d_idx = (0..pool.len())
            .find(|&i| !consumed[i] && pool[i].skew(&r) == 1)
            .ok_or_else(|| {
                Error::InvalidCode(format!("row {ri} is dependent on earlier rows (rank-deficient)"))
            })?;
        consumed[d_idx] = true;
        let d = pool[d_idx].clone();
        for i in 0..pool.len() {
            if consumed[i] {
                continue;
            }
            let s_r = pool[i].skew(&r);
            let s_d = pool[i].skew(&d);
            if s_r == 1 {
                pool[i].xor_in(&d);
            }
            if s_d == 1 {
                pool[i].xor_in(&r);
            }
        }
    }

    // Phase 2: greedily extract hyperbolic pairs; what cannot be paired lies
    // in the stabilizer span and is dropped.
    let mut pairs = Vec::with_capacity(n - code.num_rows());
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for i in 0..pool.len() {
        if consumed[i] {
            continue;
        }
        let Some(j) = ((i + 1)..pool.len()).find(|&j| !consumed[j] && pool[i].skew(&pool[j]) == 1)
        else {
            consumed[i] = true;
            continue;
        };
        consumed[i] = true;
        consumed[j] = true;
        let x = pool[i].clone();
        let z = pool[j].clone();
        for k in 0..pool.len() {
            if consumed[k] {
                continue;
            }
            let s_z = pool[k].skew(&z);
            let s_x = pool[k].skew(&x);
            if s_z == 1 {
                pool[k].xor_in(&x);
            }
            if s_x == 1 {
                pool[k].xor_in(&z);
            }
        }
        pairs.push(LogicalPair {
            x: x.to_sparse(n),
            z: z.to_sparse(n),
            pivot: home[i],
        });
        xs.push(x);
        zs.push(z);
    }

    let k = n - code.num_rows();
    if pairs.len() != k {
        return Err(Error::InvalidCode(format!(
            "completion produced {} logical pairs, expected {k}",
            pairs.len()
        )));
    }
    Ok(LogicalFrame { n, words, pairs, xs, zs })
}

impl LogicalFrame {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[LogicalPair] {
        &self.pairs
    }

    /// Per-pair GF(4) class of a residual error: X part from the product
    /// with Z̄_j, Z part from the product with X̄_j.  All-identity exactly
    /// when a zero-syndrome residual lies in the stabilizer row span.
    pub fn residual_labels(&self, e: &[u16]) -> Result<Vec<u16>> {
        if e.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: e.len() });
        }
        let sparse: Vec<(u32, u16)> = e
            .iter()
            .enumerate()
            .filter_map(|(q, &s)| (s != 0).then_some((q as u32, s)))
            .collect();
        Ok(self.residual_labels_sparse(&sparse))
    }

    pub fn residual_labels_sparse(&self, e: &[(u32, u16)]) -> Vec<u16> {
        let ev = SympVec::from_sparse(e, self.words);
        self.pairs
            .iter()
            .enumerate()
            .map(|(j, _)| {
                let x_part = ev.skew(&self.zs[j]) as u16;
                let z_part = ev.skew(&self.xs[j]) as u16;
                x_part | z_part << 1
            })
            .collect()
    }

    /// Precompute per-(qubit, symbol) label contributions as bitsets over
    /// the logical pairs, for high-volume label accumulation.
    pub fn label_tables(&self) -> LabelTables {
        let k = self.pairs.len();
        let words = k.div_ceil(64).max(1);
        let mut x_contrib = vec![0u64; self.n * 4 * words];
        let mut z_contrib = vec![0u64; self.n * 4 * words];
        for (j, pair) in self.pairs.iter().enumerate() {
            for &(q, val) in &pair.z {
                for sym in 1..4u16 {
                    if gf4_skew(sym, val) == 1 {
                        let base = (q as usize * 4 + sym as usize) * words;
                        x_contrib[base + j / 64] ^= 1u64 << (j % 64);
                    }
                }
            }
            for &(q, val) in &pair.x {
                for sym in 1..4u16 {
                    if gf4_skew(sym, val) == 1 {
                        let base = (q as usize * 4 + sym as usize) * words;
                        z_contrib[base + j / 64] ^= 1u64 << (j % 64);
                    }
                }
            }
        }
        LabelTables { k, words, x_contrib, z_contrib }
    }
}

/// Bitset label accumulator: XOR per-error contributions, then read off
/// per-pair labels or count the non-identity ones with popcounts.
pub struct LabelTables {
    k: usize,
    words: usize,
    x_contrib: Vec<u64>,
    z_contrib: Vec<u64>,
}

impl LabelTables {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn words(&self) -> usize {
        self.words
    }

    /// Fold the contribution of symbol `sym` at `qubit` into accumulators.
    #[inline]
    pub fn accumulate(&self, acc_x: &mut [u64], acc_z: &mut [u64], qubit: u32, sym: u16) {
        let base = (qubit as usize * 4 + sym as usize) * self.words;
        for w in 0..self.words {
            acc_x[w] ^= self.x_contrib[base + w];
            acc_z[w] ^= self.z_contrib[base + w];
        }
    }

    /// Raw contribution bitsets of symbol `sym` at `qubit`: bit j of the
    /// first slice is the product with Z̄_j, of the second with X̄_j.
    #[inline]
    pub fn contrib(&self, qubit: u32, sym: u16) -> (&[u64], &[u64]) {
        let base = (qubit as usize * 4 + sym as usize) * self.words;
        (&self.x_contrib[base..base + self.words], &self.z_contrib[base..base + self.words])
    }

    /// Number of pairs with a non-identity label.
    #[inline]
    pub fn count_bad(&self, acc_x: &[u64], acc_z: &[u64]) -> u32 {
        let mut bad = 0;
        for w in 0..self.words {
            bad += (acc_x[w] | acc_z[w]).count_ones();
        }
        bad
    }

    #[inline]
    pub fn label(&self, acc_x: &[u64], acc_z: &[u64], j: usize) -> u16 {
        let x = (acc_x[j / 64] >> (j % 64) & 1) as u16;
        let z = (acc_z[j / 64] >> (j % 64) & 1) as u16;
        x | z << 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::testutil::paper_example_code;
    use crate::codes::{bicycle_construct, BicycleSeed, CodeKind, StabilizerCode};
    use crate::ffield::{gf4_add, FieldSpec};
    use crate::rng::sample_rng;
    use rand::Rng;
    use std::collections::BTreeSet;
    use std::collections::HashSet;
    use std::sync::Arc;

    fn skew_sparse(a: &[(u32, u16)], b: &[(u32, u16)]) -> u8 {
        let mut acc = 0;
        for &(ca, va) in a {
            for &(cb, vb) in b {
                if ca == cb {
                    acc ^= gf4_skew(va, vb);
                }
            }
        }
        acc
    }

    #[test]
    fn frame_is_symplectically_normalized() {
        let code = paper_example_code();
        let frame = logical_frame(&code).unwrap();
        assert_eq!(frame.k(), 8);
        for (j, pj) in frame.pairs().iter().enumerate() {
            for (l, pl) in frame.pairs().iter().enumerate() {
                let expect = u8::from(j == l);
                assert_eq!(skew_sparse(&pj.x, &pl.z), expect, "x{j} vs z{l}");
                assert_eq!(skew_sparse(&pj.x, &pl.x), 0);
                assert_eq!(skew_sparse(&pj.z, &pl.z), 0);
            }
            for row in code.rows() {
                assert_eq!(skew_sparse(&pj.x, row), 0, "x{j} anticommutes with a row");
                assert_eq!(skew_sparse(&pj.z, row), 0, "z{j} anticommutes with a row");
            }
        }
    }

    #[test]
    fn stabilizer_rows_label_as_identity() {
        let code = paper_example_code();
        let frame = logical_frame(&code).unwrap();
        for row in code.rows() {
            let labels = frame.residual_labels_sparse(row);
            assert!(labels.iter().all(|&l| l == 0));
        }
        // X̄_1 labels pair 1 as X-class, everything else identity
        let labels = frame.residual_labels_sparse(&frame.pairs()[0].x.clone());
        assert_eq!(labels[0], 1);
        assert!(labels[1..].iter().all(|&l| l == 0));
        // Z̄_3 labels pair 3 as Z-class
        let labels = frame.residual_labels_sparse(&frame.pairs()[2].z.clone());
        assert_eq!(labels[2], 2);
    }

    #[test]
    fn labels_match_brute_force_coset_classification() {
        // small random bicycle codes; classify zero-syndrome residuals over
        // the full group generated by the rows
        let field = Arc::new(FieldSpec::gf4());
        let mut rng = sample_rng(31, 0, 0);
        for trial in 0..5 {
            let seed = BicycleSeed::sample(8, 2, 1, BTreeSet::new(), &field, &mut rng).unwrap();
            let code = bicycle_construct(&field, &seed).unwrap();
            if code.gfp_rank() != code.num_rows() {
                continue; // rank-deficient draw; frame would reject it
            }
            let frame = logical_frame(&code).unwrap();
            let n = code.n();
            let k = frame.k();

            // dense group span of the stabilizer rows
            let mut group: HashSet<Vec<u16>> = HashSet::new();
            let rows = code.rows();
            for mask in 0..(1u32 << rows.len()) {
                let mut e = vec![0u16; n];
                for (i, row) in rows.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        for &(c, v) in row {
                            e[c as usize] = gf4_add(e[c as usize], v);
                        }
                    }
                }
                group.insert(e);
            }

            // random logical combinations on top of random stabilizer elements
            for _ in 0..40 {
                let mut e = group.iter().nth(rng.random_range(0..group.len())).unwrap().clone();
                let mut expect = vec![0u16; k];
                for (j, pair) in frame.pairs().iter().enumerate() {
                    if rng.random::<bool>() {
                        for &(c, v) in &pair.x {
                            e[c as usize] = gf4_add(e[c as usize], v);
                        }
                        expect[j] ^= 1;
                    }
                    if rng.random::<bool>() {
                        for &(c, v) in &pair.z {
                            e[c as usize] = gf4_add(e[c as usize], v);
                        }
                        expect[j] ^= 2;
                    }
                }
                let labels = frame.residual_labels(&e).unwrap();
                assert_eq!(labels, expect, "trial {trial}");
                // all-identity labels exactly for stabilizer members
                assert_eq!(labels.iter().all(|&l| l == 0), group.contains(&e));
            }
        }
    }

    #[test]
    fn rank_deficient_code_is_rejected() {
        let code = paper_example_code();
        let mut rows = code.rows().to_vec();
        rows.push(rows[0].clone());
        let dup =
            StabilizerCode::from_rows(code.field().clone(), 12, rows, CodeKind::Qldpc).unwrap();
        assert!(logical_frame(&dup).is_err());
    }

    #[test]
    fn ordered_frame_prefers_early_pivots() {
        let code = paper_example_code();
        // natural order k = 8 pairs from 12 qubits: with qubit 7 pushed to
        // the back of the order, it should not be picked as a pivot
        let mut order: Vec<u32> = (0..12).filter(|&q| q != 7).collect();
        order.push(7);
        let frame = logical_frame_ordered(&code, &order).unwrap();
        assert_eq!(frame.k(), 8);
        assert!(frame.pairs().iter().all(|p| p.pivot != 7));
        // a qubit contributes at most its X and Z slots
        let mut mult = std::collections::HashMap::new();
        for p in frame.pairs() {
            *mult.entry(p.pivot).or_insert(0u32) += 1;
        }
        assert!(mult.values().all(|&m| m <= 2));
    }

    #[test]
    fn label_tables_agree_with_direct_labels() {
        let code = paper_example_code();
        let frame = logical_frame(&code).unwrap();
        let tables = frame.label_tables();
        let mut rng = sample_rng(32, 0, 0);
        for _ in 0..50 {
            let e: Vec<u16> = (0..12).map(|_| rng.random_range(0..4u16)).collect();
            let direct = frame.residual_labels(&e).unwrap();
            let mut acc_x = vec![0u64; tables.words()];
            let mut acc_z = vec![0u64; tables.words()];
            for (q, &sym) in e.iter().enumerate() {
                if sym != 0 {
                    tables.accumulate(&mut acc_x, &mut acc_z, q as u32, sym);
                }
            }
            let via_tables: Vec<u16> =
                (0..frame.k()).map(|j| tables.label(&acc_x, &acc_z, j)).collect();
            assert_eq!(via_tables, direct);
            let bad = direct.iter().filter(|&&l| l != 0).count() as u32;
            assert_eq!(tables.count_bad(&acc_x, &acc_z), bad);
        }
    }
}
