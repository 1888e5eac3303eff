//! Bounded-distance decoding for the non-QLDPC final codes.  Distance-3
//! kinds use single-error syndrome lookup; the two-error-correcting code a
//! weight-≤2 table; the CSS kind decodes its X and Z sides independently;
//! majority vote is decoded arithmetically.  Beyond the design distance the
//! table answer (or the identity) is returned — miscorrection is the
//! phenomenon under study, not an error.

use super::{CodeKind, StabilizerCode};
use crate::error::{Error, Result};
use crate::ffield::{GF4_X, GF4_Y, GF4_Z};

enum DecoderImpl {
    /// packed syndrome → sparse correction; missing entries mean identity.
    Table(Vec<Vec<(u32, u16)>>),
    /// Binary Hamming with columns 1..n in integer order: the packed
    /// syndrome of each side literally is the error position + 1.
    CssHamming { t: usize },
    ClassicalHamming,
    Majority,
}

/// Syndrome-driven decoder for one bounded-distance code.
pub struct BoundedDecoder {
    n: usize,
    rows: usize,
    imp: DecoderImpl,
}

fn pack(s: &[u8]) -> usize {
    let mut out = 0usize;
    for (i, &b) in s.iter().enumerate() {
        out |= (b as usize & 1) << i;
    }
    out
}

impl BoundedDecoder {
    pub fn build(code: &StabilizerCode) -> Result<BoundedDecoder> {
        let n = code.n();
        let rows = code.num_rows();
        let imp = match code.kind() {
            CodeKind::Qldpc => {
                return Err(Error::InvalidCode(
                    "qldpc codes are decoded by belief propagation".into(),
                ))
            }
            CodeKind::HammingQ4 => DecoderImpl::Table(Self::single_error_table(code, &[
                GF4_X, GF4_Z, GF4_Y,
            ])?),
            CodeKind::ClassicalHamming => DecoderImpl::ClassicalHamming,
            CodeKind::CssHamming => DecoderImpl::CssHamming { t: rows / 2 },
            CodeKind::Bch => DecoderImpl::Table(Self::weight_two_table(code)?),
            CodeKind::Majority => DecoderImpl::Majority,
        };
        Ok(BoundedDecoder { n, rows, imp })
    }

    fn single_error_table(
        code: &StabilizerCode,
        symbols: &[u16],
    ) -> Result<Vec<Vec<(u32, u16)>>> {
        let mut table = vec![Vec::new(); 1 << code.num_rows()];
        for q in 0..code.n() as u32 {
            for &sym in symbols {
                let s = pack(&code.syndrome_sparse(&[(q, sym)]));
                if s == 0 || !table[s].is_empty() {
                    return Err(Error::InvalidCode(format!(
                        "syndrome collision at qubit {q}: not a distance-3 code"
                    )));
                }
                table[s] = vec![(q, sym)];
            }
        }
        Ok(table)
    }

    fn weight_two_table(code: &StabilizerCode) -> Result<Vec<Vec<(u32, u16)>>> {
        let mut table = vec![Vec::new(); 1 << code.num_rows()];
        for q in 0..code.n() as u32 {
            let s = pack(&code.syndrome_sparse(&[(q, GF4_X)]));
            if s == 0 || !table[s].is_empty() {
                return Err(Error::InvalidCode("weight-1 syndrome collision".into()));
            }
            table[s] = vec![(q, GF4_X)];
        }
        for q1 in 0..code.n() as u32 {
            for q2 in (q1 + 1)..code.n() as u32 {
                let s = pack(&code.syndrome_sparse(&[(q1, GF4_X), (q2, GF4_X)]));
                if s == 0 || !table[s].is_empty() {
                    return Err(Error::InvalidCode("weight-2 syndrome collision".into()));
                }
                table[s] = vec![(q1, GF4_X), (q2, GF4_X)];
            }
        }
        Ok(table)
    }

    /// Decode a GF(2) syndrome into a sparse correction.
    pub fn decode(&self, s: &[u8]) -> Result<Vec<(u32, u16)>> {
        if s.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: s.len() });
        }
        Ok(match &self.imp {
            DecoderImpl::Table(table) => table[pack(s)].clone(),
            DecoderImpl::ClassicalHamming => {
                let pos = pack(s);
                if pos == 0 {
                    Vec::new()
                } else {
                    vec![(pos as u32 - 1, GF4_X)]
                }
            }
            DecoderImpl::CssHamming { t } => {
                // rows 0..t are X-type (see Z/Y parts), rows t..2t Z-type
                let z_pos = pack(&s[..*t]);
                let x_pos = pack(&s[*t..]);
                let mut corr = Vec::new();
                match (x_pos, z_pos) {
                    (0, 0) => {}
                    (x, 0) => corr.push((x as u32 - 1, GF4_X)),
                    (0, z) => corr.push((z as u32 - 1, GF4_Z)),
                    (x, z) if x == z => corr.push((x as u32 - 1, GF4_Y)),
                    (x, z) => {
                        corr.push((x as u32 - 1, GF4_X));
                        corr.push((z as u32 - 1, GF4_Z));
                        corr.sort_unstable_by_key(|&(c, _)| c);
                    }
                }
                corr
            }
            DecoderImpl::Majority => {
                // adjacent-difference syndrome; pick the lighter of the two
                // consistent X patterns (n odd, so no tie)
                let mut flips = Vec::with_capacity(self.n);
                let mut cur = 0u8;
                flips.push(cur);
                for &b in s {
                    cur ^= b & 1;
                    flips.push(cur);
                }
                let ones = flips.iter().filter(|&&f| f == 1).count();
                let majority_bit = u8::from(ones * 2 > self.n);
                flips
                    .iter()
                    .enumerate()
                    .filter(|&(_, &f)| f != majority_bit)
                    .map(|(q, _)| (q as u32, GF4_X))
                    .collect()
            }
        })
    }
}

/// One-shot convenience wrapper; build a [`BoundedDecoder`] once when
/// decoding in volume.
pub fn bounded_distance_decode(code: &StabilizerCode, s: &[u8]) -> Result<Vec<(u32, u16)>> {
    BoundedDecoder::build(code)?.decode(s)
}
