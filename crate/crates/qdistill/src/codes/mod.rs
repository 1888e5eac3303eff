//! Stabilizer codes over GF(q²): sparse parity-check representation,
//! validation (orthogonality, rank, regularity, rate), syndrome computation,
//! and the plain-text serialization format.

mod bicycle;
mod decode;
mod family;
mod logical;

pub use bicycle::{bicycle_construct, bicycle_construct_full_rank, BicycleSeed};
pub use decode::{bounded_distance_decode, BoundedDecoder};
pub use family::{family_construct, CodeFamily};
pub use logical::{logical_frame, logical_frame_ordered, LabelTables, LogicalFrame};

use crate::error::{Error, Result};
use crate::ffield::FieldSpec;
use std::fmt::Write as _;
use std::sync::Arc;

/// What decoding machinery a code expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    /// Generalized-bicycle QLDPC; decoded by belief propagation.
    Qldpc,
    /// GF(4) quantum Hamming [[(4^t−1)/3, (4^t−1)/3−2t, 3]].
    HammingQ4,
    /// CSS code from a classical binary Hamming code, [[2^t−1, 2^t−1−2t, 3]].
    CssHamming,
    /// Classical binary Hamming [2^t−1, 2^t−1−t, 3], Z-type rows only.
    ClassicalHamming,
    /// Two-error-correcting [2^t, 2^t−2t, 5] code, Z-type rows only.
    Bch,
    /// Classical majority vote [2t+1, 1, 2t+1], Z-type rows only.
    Majority,
}

impl CodeKind {
    pub fn label(self) -> &'static str {
        match self {
            CodeKind::Qldpc => "qldpc",
            CodeKind::HammingQ4 => "hamming_q4",
            CodeKind::CssHamming => "css_hamming",
            CodeKind::ClassicalHamming => "classical_hamming",
            CodeKind::Bch => "bch",
            CodeKind::Majority => "majority",
        }
    }
}

/// A sparse stabilizer parity-check matrix with one generator per row.
pub struct StabilizerCode {
    field: Arc<FieldSpec>,
    n: usize,
    kind: CodeKind,
    rows: Vec<Vec<(u32, u16)>>,
    cols: Vec<Vec<(u32, u16)>>,
}

impl StabilizerCode {
    pub fn from_rows(
        field: Arc<FieldSpec>,
        n: usize,
        rows: Vec<Vec<(u32, u16)>>,
        kind: CodeKind,
    ) -> Result<StabilizerCode> {
        let order = field.order() as u16;
        let mut sorted_rows = rows;
        for row in &mut sorted_rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for &(c, val) in row.iter() {
                if c as usize >= n {
                    return Err(Error::InvalidCode(format!("column {c} out of range (n = {n})")));
                }
                if val == 0 || val >= order {
                    return Err(Error::InvalidCode(format!("entry value {val} invalid")));
                }
            }
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidCode("duplicate column in row".into()));
            }
        }
        let mut cols = vec![Vec::new(); n];
        for (i, row) in sorted_rows.iter().enumerate() {
            for &(c, val) in row {
                cols[c as usize].push((i as u32, val));
            }
        }
        Ok(StabilizerCode { field, n, kind, rows: sorted_rows, cols })
    }

    #[inline]
    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    #[inline]
    pub fn rows(&self) -> &[Vec<(u32, u16)>] {
        &self.rows
    }

    #[inline]
    pub fn cols(&self) -> &[Vec<(u32, u16)>] {
        &self.cols
    }

    /// Number of encoded qudits assuming full row rank.
    pub fn k(&self) -> usize {
        self.n - self.rows.len()
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.rows.len() as f64 / self.n as f64
    }

    /// Column/row weights when the matrix is regular.
    pub fn regularity(&self) -> (Option<usize>, Option<usize>) {
        let d_v = {
            let w0 = self.cols.first().map(|c| c.len()).unwrap_or(0);
            self.cols.iter().all(|c| c.len() == w0).then_some(w0)
        };
        let d_c = {
            let w0 = self.rows.first().map(|r| r.len()).unwrap_or(0);
            self.rows.iter().all(|r| r.len() == w0).then_some(w0)
        };
        (d_v, d_c)
    }

    /// Syndrome s_i = Σ_j (H_ij | e_j) ∈ GF(p) for a dense error vector.
    pub fn syndrome(&self, e: &[u16]) -> Result<Vec<u8>> {
        if e.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: e.len() });
        }
        let p = self.field.p() as u32;
        let mut s = vec![0u8; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = 0u32;
            for &(c, val) in row {
                acc += self.field.skew_raw(val, e[c as usize]) as u32;
            }
            s[i] = (acc % p) as u8;
        }
        Ok(s)
    }

    /// Syndrome of a sparse error, via the column adjacency.
    pub fn syndrome_sparse(&self, e: &[(u32, u16)]) -> Vec<u8> {
        let mut s = vec![0u8; self.rows.len()];
        self.syndrome_sparse_into(e, &mut s);
        s
    }

    /// Allocation-free form of [`syndrome_sparse`](Self::syndrome_sparse).
    pub fn syndrome_sparse_into(&self, e: &[(u32, u16)], s: &mut [u8]) {
        let p = self.field.p() as u16;
        s.fill(0);
        for &(col, sym) in e {
            for &(row, val) in &self.cols[col as usize] {
                let t = s[row as usize] as u16 + self.field.skew_raw(val, sym) as u16;
                s[row as usize] = (t % p) as u8;
            }
        }
    }

    /// Skew row-product of rows i and i'; zero means the generators commute.
    pub fn row_skew_product(&self, i: usize, j: usize) -> u8 {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let p = self.field.p() as u32;
        let mut acc = 0u32;
        let (mut ia, mut ib) = (0, 0);
        while ia < a.len() && ib < b.len() {
            match a[ia].0.cmp(&b[ib].0) {
                std::cmp::Ordering::Less => ia += 1,
                std::cmp::Ordering::Greater => ib += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.field.skew_raw(a[ia].1, b[ib].1) as u32;
                    ia += 1;
                    ib += 1;
                }
            }
        }
        (acc % p) as u8
    }

    /// Rank of the rows over GF(p), viewing each GF(q²) entry through its
    /// GF(p) coordinate vector.  Full row rank means rank = number of rows,
    /// i.e. the generators are independent as stabilizer group generators.
    pub fn gfp_rank(&self) -> usize {
        let p = self.field.p();
        if p == 2 {
            self.gf2_rank()
        } else {
            self.gfp_rank_dense()
        }
    }

    fn gf2_rank(&self) -> usize {
        let digits = (2 * self.field.v()) as usize;
        let bits = self.n * digits;
        let words = bits.div_ceil(64);
        // basis vectors kept reduced, keyed by their leading bit
        let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
        let mut rank = 0;
        for row in &self.rows {
            let mut vec = vec![0u64; words];
            for &(c, val) in row {
                for d in 0..digits {
                    if (val >> d) & 1 == 1 {
                        let bit = c as usize * digits + d;
                        vec[bit / 64] |= 1u64 << (bit % 64);
                    }
                }
            }
            loop {
                let Some(lead) = Self::leading_bit(&vec) else { break };
                match basis.iter().find(|(l, _)| *l == lead) {
                    Some((_, b)) => {
                        for (v, &bw) in vec.iter_mut().zip(b.iter()) {
                            *v ^= bw;
                        }
                    }
                    None => {
                        basis.push((lead, vec));
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }

    fn leading_bit(v: &[u64]) -> Option<usize> {
        for (i, &w) in v.iter().enumerate().rev() {
            if w != 0 {
                return Some(i * 64 + (63 - w.leading_zeros() as usize));
            }
        }
        None
    }

    fn gfp_rank_dense(&self) -> usize {
        let p = self.field.p();
        let digits = (2 * self.field.v()) as usize;
        let width = self.n * digits;
        let mut mat: Vec<Vec<u8>> = self
            .rows
            .iter()
            .map(|row| {
                let mut v = vec![0u8; width];
                for &(c, val) in row {
                    let mut rest = val as u32;
                    for d in 0..digits {
                        v[c as usize * digits + d] = (rest % p) as u8;
                        rest /= p;
                    }
                }
                v
            })
            .collect();
        let mut rank = 0;
        for col in 0..width {
            let Some(pivot) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
                continue;
            };
            mat.swap(rank, pivot);
            let inv = mod_inverse(mat[rank][col] as u32, p);
            for x in mat[rank].iter_mut() {
                *x = ((*x as u32 * inv) % p) as u8;
            }
            for r in 0..mat.len() {
                if r != rank && mat[r][col] != 0 {
                    let factor = mat[r][col] as u32;
                    for c2 in col..width {
                        let sub = (factor * mat[rank][c2] as u32) % p;
                        mat[r][c2] = ((mat[r][c2] as u32 + p - sub) % p) as u8;
                    }
                }
            }
            rank += 1;
            if rank == mat.len() {
                break;
            }
        }
        rank
    }

    /// Run every structural check and collect failures.
    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let mut orthogonal = true;
        'outer: for i in 0..self.rows.len() {
            for j in (i + 1)..self.rows.len() {
                if self.row_skew_product(i, j) != 0 {
                    orthogonal = false;
                    failures.push(format!("rows {i} and {j} do not commute"));
                    if failures.len() >= 8 {
                        failures.push("... more orthogonality failures suppressed".into());
                        break 'outer;
                    }
                }
            }
        }
        let rank = self.gfp_rank();
        let full_rank = rank == self.rows.len();
        if !full_rank {
            failures.push(format!("rank {rank} < {} rows", self.rows.len()));
        }
        let (d_v, d_c) = self.regularity();
        let rate = self.rate();
        if let (Some(dv), Some(dcw)) = (d_v, d_c) {
            if full_rank {
                let expect = 1.0 - dv as f64 / dcw as f64;
                if (rate - expect).abs() > 1e-12 {
                    failures.push(format!("rate {rate} != 1 - d_v/d_c = {expect}"));
                }
            }
        }
        ValidationReport {
            rows: self.rows.len(),
            n: self.n,
            rank,
            orthogonal,
            full_rank,
            d_v,
            d_c,
            rate,
            failures,
        }
    }

    /// Serialize to the plain-text code format:
    /// header `qldpc v1 q n rows`, then one `row col elem` line per nonzero
    /// entry, in row-major order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "qldpc v1 {} {} {}",
            self.field.q(),
            self.n,
            self.rows.len()
        );
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, val) in row {
                let _ = writeln!(out, "{i} {c} {val}");
            }
        }
        out
    }

    /// Parse the plain-text code format.
    pub fn from_text(text: &str) -> Result<StabilizerCode> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty code file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 5 || parts[0] != "qldpc" || parts[1] != "v1" {
            return Err(Error::Parse(format!("bad header: {header}")));
        }
        let q: u32 = parts[2].parse().map_err(|_| Error::Parse("bad q".into()))?;
        let n: usize = parts[3].parse().map_err(|_| Error::Parse("bad n".into()))?;
        let rows_n: usize = parts[4].parse().map_err(|_| Error::Parse("bad row count".into()))?;
        let field = Arc::new(FieldSpec::for_q(q)?);
        let mut rows = vec![Vec::new(); rows_n];
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (r, c, e) = (it.next(), it.next(), it.next());
            let (Some(r), Some(c), Some(e), None) = (r, c, e, it.next()) else {
                return Err(Error::Parse(format!("bad entry line: {line}")));
            };
            let r: usize = r.parse().map_err(|_| Error::Parse("bad row index".into()))?;
            let c: u32 = c.parse().map_err(|_| Error::Parse("bad col index".into()))?;
            let e: u16 = e.parse().map_err(|_| Error::Parse("bad element index".into()))?;
            if r >= rows_n {
                return Err(Error::Parse(format!("row index {r} out of range")));
            }
            rows[r].push((c, e));
        }
        StabilizerCode::from_rows(field, n, rows, CodeKind::Qldpc)
    }
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    // p is prime and small; brute force is fine.
    (1..p).find(|&x| (a * x) % p == 1).expect("nonzero element has an inverse")
}

/// Outcome of [`StabilizerCode::validate`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub rows: usize,
    pub n: usize,
    pub rank: usize,
    pub orthogonal: bool,
    pub full_rank: bool,
    pub d_v: Option<usize>,
    pub d_c: Option<usize>,
    pub rate: f64,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// The 4×12 matrix printed for the worked (2,6)-regular example, with
    /// symbols 1, ω, ω² encoded as indices 1, 2, 3.
    pub fn paper_example_entries() -> Vec<Vec<(u32, u16)>> {
        vec![
            vec![(0, 1), (1, 2), (2, 3), (6, 1), (10, 3), (11, 2)],
            vec![(1, 1), (2, 2), (3, 3), (6, 2), (7, 1), (11, 3)],
            vec![(3, 1), (4, 2), (5, 3), (7, 3), (8, 2), (9, 1)],
            vec![(0, 3), (4, 1), (5, 2), (8, 3), (9, 2), (10, 1)],
        ]
    }

    pub fn paper_example_code() -> StabilizerCode {
        StabilizerCode::from_rows(
            Arc::new(FieldSpec::gf4()),
            12,
            paper_example_entries(),
            CodeKind::Qldpc,
        )
        .unwrap()
    }
}
