//! Generalized bicycle construction: H = [C_B, C_Bᵀ] from a sparse cyclic
//! matrix, with whole residue classes of rows deleted to tune rate and
//! regularity.  Rows commute by the transpose identities no matter which
//! sparse vector is chosen.

use super::{CodeKind, StabilizerCode};
use crate::error::{Error, Result};
use crate::ffield::FieldSpec;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

/// Everything needed to rebuild one bicycle code.
///
/// `alpha[k]` stores α_{k+1} of the defining sparse vector (α_i)_{i=1..n/2};
/// `deleted` is the set J ⊊ {1..n'} of deleted row residues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BicycleSeed {
    pub n: usize,
    pub n_prime: usize,
    pub u: usize,
    pub alpha: Vec<u16>,
    pub deleted: BTreeSet<usize>,
}

impl BicycleSeed {
    /// Check the structural constraints: divisibility, J a proper subset,
    /// and the per-residue weight condition on α.
    pub fn validate(&self, field: &FieldSpec) -> Result<()> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::InvalidCode(format!("n = {} must be even", self.n)));
        }
        let m = self.n / 2;
        if self.n_prime == 0 || m % self.n_prime != 0 {
            return Err(Error::InvalidCode(format!(
                "n' = {} must divide n/2 = {m}",
                self.n_prime
            )));
        }
        if self.alpha.len() != m {
            return Err(Error::InvalidCode(format!(
                "alpha has length {}, expected n/2 = {m}",
                self.alpha.len()
            )));
        }
        if self.alpha.iter().any(|&a| a as u32 >= field.order()) {
            return Err(Error::InvalidCode("alpha entry outside the field".into()));
        }
        if self.deleted.iter().any(|&j| j == 0 || j > self.n_prime) {
            return Err(Error::InvalidCode("deleted residues must lie in {1..n'}".into()));
        }
        if self.deleted.len() >= self.n_prime {
            return Err(Error::InvalidCode("J must be a proper subset of {1..n'}".into()));
        }
        // per-residue weight: |{i : α_{n'i+j} ≠ 0}| = u for every j
        for j in 1..=self.n_prime {
            let weight = (0..m / self.n_prime)
                .filter(|&i| {
                    let idx = self.n_prime * i + j; // 1-based index into α
                    self.alpha[(idx - 1) % m] != 0
                })
                .count();
            if weight != self.u {
                return Err(Error::InvalidCode(format!(
                    "residue {j} of alpha has weight {weight}, expected u = {}",
                    self.u
                )));
            }
        }
        Ok(())
    }

    /// Draw a random seed meeting the per-residue weight condition, with
    /// nonzero values uniform over GF(q²) \ {0}.
    ///
    /// Position sets are rejection-sampled towards distinct pairwise
    /// differences mod n/2.  Repeated differences put 4-cycles inside each
    /// circulant half, which cripples few-round message passing; when the
    /// positions are too dense for distinct differences (small n), the last
    /// draw is used as-is.
    pub fn sample<R: Rng + ?Sized>(
        n: usize,
        n_prime: usize,
        u: usize,
        deleted: BTreeSet<usize>,
        field: &FieldSpec,
        rng: &mut R,
    ) -> Result<BicycleSeed> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidCode(format!("n = {n} must be even")));
        }
        let m = n / 2;
        if n_prime == 0 || m % n_prime != 0 {
            return Err(Error::InvalidCode(format!("n' = {n_prime} must divide n/2 = {m}")));
        }
        let per_residue = m / n_prime;
        if u > per_residue {
            return Err(Error::InvalidCode(format!(
                "u = {u} exceeds the {per_residue} slots per residue"
            )));
        }
        const SCREEN_TRIES: usize = 200;
        let mut positions = Vec::with_capacity(n_prime * u);
        for attempt in 0..SCREEN_TRIES {
            positions.clear();
            for j in 1..=n_prime {
                let mut slots: Vec<usize> = (0..per_residue).collect();
                slots.shuffle(rng);
                for &i in slots.iter().take(u) {
                    positions.push((n_prime * i + j - 1) % m);
                }
            }
            if attempt + 1 == SCREEN_TRIES || distinct_differences(&positions, m) {
                break;
            }
        }
        let mut alpha = vec![0u16; m];
        let order = field.order() as u16;
        for &pos in &positions {
            alpha[pos] = rng.random_range(1..order);
        }
        let seed = BicycleSeed { n, n_prime, u, alpha, deleted };
        seed.validate(field)?;
        Ok(seed)
    }
}

fn distinct_differences(positions: &[usize], m: usize) -> bool {
    let mut seen = vec![false; m];
    for (i, &a) in positions.iter().enumerate() {
        for &b in positions.iter().skip(i + 1) {
            let d = (a + m - b) % m;
            if seen[d] || seen[m - d] {
                return false;
            }
            seen[d] = true;
            seen[m - d] = true;
        }
    }
    true
}

/// Build the bicycle code for a seed.  The result is
/// ((n'−|J|)u, 2n'u)-regular with n(n'−|J|)/(2n') rows.
pub fn bicycle_construct(field: &Arc<FieldSpec>, seed: &BicycleSeed) -> Result<StabilizerCode> {
    seed.validate(field)?;
    let m = seed.n / 2;
    let mut rows = Vec::with_capacity(m - seed.deleted.len() * (m / seed.n_prime));
    for i in 0..m {
        let residue = i % seed.n_prime + 1;
        if seed.deleted.contains(&residue) {
            continue;
        }
        let mut row = Vec::new();
        for j in 0..m {
            // (C_B)_{ij} = α_{j−i+1}
            let val = seed.alpha[(j + m - i) % m];
            if val != 0 {
                row.push((j as u32, val));
            }
            // (C_Bᵀ)_{ij} = α_{i−j+1}
            let val = seed.alpha[(i + m - j) % m];
            if val != 0 {
                row.push(((m + j) as u32, val));
            }
        }
        rows.push(row);
    }
    StabilizerCode::from_rows(field.clone(), seed.n, rows, CodeKind::Qldpc)
}

/// Construct with fresh α draws until the rows come out independent,
/// retrying at most `max_tries` times.
pub fn bicycle_construct_full_rank<R: Rng + ?Sized>(
    field: &Arc<FieldSpec>,
    n: usize,
    n_prime: usize,
    u: usize,
    deleted: BTreeSet<usize>,
    rng: &mut R,
    max_tries: usize,
) -> Result<(StabilizerCode, BicycleSeed)> {
    for _ in 0..max_tries {
        let seed = BicycleSeed::sample(n, n_prime, u, deleted.clone(), field, rng)?;
        let code = bicycle_construct(field, &seed)?;
        if code.gfp_rank() == code.num_rows() {
            return Ok((code, seed));
        }
    }
    Err(Error::RankDeficient(max_tries))
}
