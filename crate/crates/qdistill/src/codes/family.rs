//! The comparison code families, all embedded as stabilizer codes over
//! GF(4): quantum Hamming codes over GF(4), CSS codes from classical binary
//! Hamming codes, and three classical families carried as Z-type-only rows
//! (parity checks see X/Y components; Z components pass to the logicals).

use super::{CodeKind, StabilizerCode};
use crate::error::{Error, Result};
use crate::ffield::{FieldSpec, GF4_X, GF4_Z};
use std::sync::Arc;

/// Which family to construct; `t` indexes the member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    /// [[(4^t−1)/3, (4^t−1)/3−2t, 3]], t in 2..=5.
    HammingQ4,
    /// [[2^t−1, 2^t−1−2t, 3]], t in 3..=10.
    CssHamming,
    /// [2^t−1, 2^t−1−t, 3], t in 2..=10.
    ClassicalHamming,
    /// [2^t, 2^t−2t, 5], t in 3..=7.
    Bch,
    /// [2t+1, 1, 2t+1], t ≥ 1.
    Majority,
}

impl CodeFamily {
    pub fn kind(self) -> CodeKind {
        match self {
            CodeFamily::HammingQ4 => CodeKind::HammingQ4,
            CodeFamily::CssHamming => CodeKind::CssHamming,
            CodeFamily::ClassicalHamming => CodeKind::ClassicalHamming,
            CodeFamily::Bch => CodeKind::Bch,
            CodeFamily::Majority => CodeKind::Majority,
        }
    }

    pub fn label(self) -> &'static str {
        self.kind().label()
    }

    pub fn parse(s: &str) -> Option<CodeFamily> {
        match s {
            "hamming_q4" => Some(CodeFamily::HammingQ4),
            "css_hamming" => Some(CodeFamily::CssHamming),
            "classical_hamming" => Some(CodeFamily::ClassicalHamming),
            "bch" => Some(CodeFamily::Bch),
            "majority" => Some(CodeFamily::Majority),
            _ => None,
        }
    }

    /// Claimed (n, k, d) for the family member, also the supported-range
    /// check.
    pub fn params(self, t: u32) -> Result<(usize, usize, usize)> {
        let bad = || Error::UnsupportedFamily { kind: self.label().into(), t };
        let out = match self {
            CodeFamily::HammingQ4 => {
                if !(2..=5).contains(&t) {
                    return Err(bad());
                }
                let n = (4usize.pow(t) - 1) / 3;
                (n, n - 2 * t as usize, 3)
            }
            CodeFamily::CssHamming => {
                if !(3..=10).contains(&t) {
                    return Err(bad());
                }
                let n = (1usize << t) - 1;
                (n, n - 2 * t as usize, 3)
            }
            CodeFamily::ClassicalHamming => {
                if !(2..=10).contains(&t) {
                    return Err(bad());
                }
                let n = (1usize << t) - 1;
                (n, n - t as usize, 3)
            }
            CodeFamily::Bch => {
                if !(3..=7).contains(&t) {
                    return Err(bad());
                }
                let n = 1usize << t;
                (n, n - 2 * t as usize, 5)
            }
            CodeFamily::Majority => {
                let n = 2 * t as usize + 1;
                if t == 0 || n > 1024 {
                    return Err(bad());
                }
                (n, 1, n)
            }
        };
        Ok(out)
    }
}

/// Build the stabilizer form of a family member.
pub fn family_construct(family: CodeFamily, t: u32) -> Result<StabilizerCode> {
    family.params(t)?; // range check
    let field = Arc::new(FieldSpec::gf4());
    match family {
        CodeFamily::HammingQ4 => hamming_q4(field, t),
        CodeFamily::CssHamming => css_hamming(field, t),
        CodeFamily::ClassicalHamming => classical_hamming(field, t),
        CodeFamily::Bch => bch(field, t),
        CodeFamily::Majority => majority(field, t),
    }
}

/// Columns of the GF(4) Hamming parity-check matrix: one representative of
/// each projective point of GF(4)^t, first nonzero coordinate fixed to 1.
fn gf4_projective_columns(t: u32) -> Vec<Vec<u16>> {
    let mut cols = Vec::new();
    for raw in 1..4u32.pow(t) {
        let mut digits = Vec::with_capacity(t as usize);
        let mut rest = raw;
        for _ in 0..t {
            digits.push((rest % 4) as u16);
            rest /= 4;
        }
        if digits.iter().find(|&&d| d != 0) == Some(&1) {
            cols.push(digits);
        }
    }
    cols
}

fn hamming_q4(field: Arc<FieldSpec>, t: u32) -> Result<StabilizerCode> {
    let cols = gf4_projective_columns(t);
    let n = cols.len();
    let omega = field.omega().index();
    let mut rows = Vec::with_capacity(2 * t as usize);
    for r in 0..t as usize {
        let base: Vec<(u32, u16)> = cols
            .iter()
            .enumerate()
            .filter(|(_, digs)| digs[r] != 0)
            .map(|(c, digs)| (c as u32, digs[r]))
            .collect();
        let scaled: Vec<(u32, u16)> =
            base.iter().map(|&(c, v)| (c, field.mul_raw(omega, v))).collect();
        rows.push(base);
        rows.push(scaled);
    }
    StabilizerCode::from_rows(field, n, rows, CodeKind::HammingQ4)
}

/// Binary Hamming supports: column i carries the bits of i+1.
fn hamming_supports(t: u32) -> Vec<Vec<u32>> {
    let n = (1u32 << t) - 1;
    (0..t)
        .map(|r| (0..n).filter(|&c| (c + 1) >> r & 1 == 1).collect())
        .collect()
}

fn css_hamming(field: Arc<FieldSpec>, t: u32) -> Result<StabilizerCode> {
    let n = (1usize << t) - 1;
    let supports = hamming_supports(t);
    let mut rows: Vec<Vec<(u32, u16)>> = Vec::with_capacity(2 * t as usize);
    for support in &supports {
        rows.push(support.iter().map(|&c| (c, GF4_X)).collect());
    }
    for support in &supports {
        rows.push(support.iter().map(|&c| (c, GF4_Z)).collect());
    }
    StabilizerCode::from_rows(field, n, rows, CodeKind::CssHamming)
}

fn classical_hamming(field: Arc<FieldSpec>, t: u32) -> Result<StabilizerCode> {
    let n = (1usize << t) - 1;
    let rows = hamming_supports(t)
        .iter()
        .map(|support| support.iter().map(|&c| (c, GF4_Z)).collect())
        .collect();
    StabilizerCode::from_rows(field, n, rows, CodeKind::ClassicalHamming)
}

fn majority(field: Arc<FieldSpec>, t: u32) -> Result<StabilizerCode> {
    let n = 2 * t as usize + 1;
    let rows = (0..n - 1)
        .map(|i| vec![(i as u32, GF4_Z), (i as u32 + 1, GF4_Z)])
        .collect();
    StabilizerCode::from_rows(field, n, rows, CodeKind::Majority)
}

/// GF(2^t) arithmetic on exp/log tables, for the classical constructions.
pub(super) struct Gf2m {
    pub t: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// Primitive polynomials x^t + …, bit i = coefficient of x^i.
const PRIMITIVE_POLY: [u32; 11] = [
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10001001, 0b100011101, 0b1000010001,
    0b10000001001,
];

impl Gf2m {
    pub fn new(t: u32) -> Gf2m {
        assert!((1..=10).contains(&t));
        let size = 1usize << t;
        let poly = PRIMITIVE_POLY[t as usize];
        let mut exp = vec![0u16; size - 1];
        let mut log = vec![0u16; size];
        let mut acc = 1u32;
        for k in 0..size - 1 {
            exp[k] = acc as u16;
            log[acc as usize] = k as u16;
            acc <<= 1;
            if acc >> t & 1 == 1 {
                acc ^= poly;
            }
        }
        debug_assert_eq!(acc, 1, "polynomial for t = {t} is not primitive");
        Gf2m { t, exp, log }
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        let g = (1u32 << self.t) - 1;
        self.exp[((self.log[a as usize] as u32 + self.log[b as usize] as u32) % g) as usize]
    }

    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        debug_assert_ne!(a, 0);
        let g = (1u32 << self.t) - 1;
        self.exp[((g - self.log[a as usize] as u32) % g) as usize]
    }
}

/// Two-error-correcting [2^t, 2^t−2t, 5] code: a Goppa-style design with a
/// rootless quadratic g over GF(2^t) and support all of GF(2^t); parity
/// checks are the binary expansion of Σ e_i·x_i^j / g(x_i) for j = 0, 1.
fn bch(field: Arc<FieldSpec>, t: u32) -> Result<StabilizerCode> {
    let gf = Gf2m::new(t);
    let n = 1usize << t;
    // first z² + c1·z + c0 without roots, scanning (c1, c0)
    let (c1, c0) = (1..n as u16)
        .flat_map(|c1| (1..n as u16).map(move |c0| (c1, c0)))
        .find(|&(c1, c0)| (0..n as u16).all(|x| gf.mul(x, x) ^ gf.mul(c1, x) ^ c0 != 0))
        .ok_or_else(|| Error::UnsupportedFamily { kind: "bch".into(), t })?;
    let g_at = |x: u16| gf.mul(x, x) ^ gf.mul(c1, x) ^ c0;

    let mut rows: Vec<Vec<(u32, u16)>> = vec![Vec::new(); 2 * t as usize];
    for i in 0..n as u16 {
        let ginv = gf.inv(g_at(i));
        let vals = [ginv, gf.mul(i, ginv)]; // x^0/g(x), x^1/g(x)
        for (j, &val) in vals.iter().enumerate() {
            for b in 0..t as usize {
                if val >> b & 1 == 1 {
                    rows[j * t as usize + b].push((i as u32, GF4_Z));
                }
            }
        }
    }
    StabilizerCode::from_rows(field, n, rows, CodeKind::Bch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_match_claims() {
        assert_eq!(CodeFamily::HammingQ4.params(3).unwrap(), (21, 15, 3));
        assert_eq!(CodeFamily::HammingQ4.params(4).unwrap(), (85, 77, 3));
        assert_eq!(CodeFamily::HammingQ4.params(2).unwrap(), (5, 1, 3));
        assert_eq!(CodeFamily::CssHamming.params(5).unwrap(), (31, 21, 3));
        assert_eq!(CodeFamily::CssHamming.params(7).unwrap(), (127, 113, 3));
        assert_eq!(CodeFamily::ClassicalHamming.params(3).unwrap(), (7, 4, 3));
        assert_eq!(CodeFamily::Bch.params(4).unwrap(), (16, 8, 5));
        assert_eq!(CodeFamily::Majority.params(1).unwrap(), (3, 1, 3));
        assert!(CodeFamily::HammingQ4.params(6).is_err());
        assert!(CodeFamily::Majority.params(0).is_err());
    }

    #[test]
    fn constructed_codes_validate_with_claimed_dimension() {
        let cases = [
            (CodeFamily::HammingQ4, 2),
            (CodeFamily::HammingQ4, 3),
            (CodeFamily::CssHamming, 3),
            (CodeFamily::CssHamming, 5),
            (CodeFamily::ClassicalHamming, 3),
            (CodeFamily::ClassicalHamming, 4),
            (CodeFamily::Bch, 4),
            (CodeFamily::Majority, 1),
            (CodeFamily::Majority, 3),
        ];
        for (family, t) in cases {
            let (n, k, _) = family.params(t).unwrap();
            let code = family_construct(family, t).unwrap();
            assert_eq!(code.n(), n, "{family:?} t={t}");
            let report = code.validate();
            assert!(report.is_ok(), "{family:?} t={t}: {:?}", report.failures);
            assert_eq!(code.n() - report.rank, k, "{family:?} t={t} dimension");
        }
    }

    #[test]
    fn gf2m_tables_are_consistent() {
        for t in 1..=10 {
            let gf = Gf2m::new(t);
            let n = 1u16 << t;
            for a in 1..n.min(64) {
                assert_eq!(gf.mul(a, gf.inv(a)), 1, "t={t} a={a}");
            }
        }
    }

    #[test]
    fn classical_families_are_z_type_only() {
        for (family, t) in [
            (CodeFamily::ClassicalHamming, 3),
            (CodeFamily::Bch, 4),
            (CodeFamily::Majority, 2),
        ] {
            let code = family_construct(family, t).unwrap();
            for row in code.rows() {
                assert!(row.iter().all(|&(_, v)| v == GF4_Z));
            }
        }
    }
}
