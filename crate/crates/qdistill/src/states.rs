//! Bell-diagonal error model for shared EPR pairs: the Werner state, its
//! entropy, and i.i.d. error sampling over the GF(4) symbol table.

use crate::error::{Error, Result};
use crate::ffield::{GF4_I, GF4_X, GF4_Y, GF4_Z};
use rand::Rng;

const SUM_TOL: f64 = 1e-12;

/// A two-qubit mixed state diagonal in the Bell basis, described by the
/// probabilities of the four error classes on one share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl BellDiagonalState {
    pub fn new(p_i: f64, p_x: f64, p_y: f64, p_z: f64) -> Result<BellDiagonalState> {
        let s = BellDiagonalState { p_i, p_x, p_y, p_z };
        s.validate()?;
        Ok(s)
    }

    /// Werner state with quantum error rate p0: (1−p0, p0/3, p0/3, p0/3).
    pub fn werner(p0: f64) -> Result<BellDiagonalState> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidProbability(p0));
        }
        Ok(BellDiagonalState {
            p_i: 1.0 - p0,
            p_x: p0 / 3.0,
            p_y: p0 / 3.0,
            p_z: p0 / 3.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let comps = self.as_array();
        if comps.iter().any(|&p| !(p >= 0.0) || p > 1.0 + SUM_TOL) {
            return Err(Error::InvalidState(format!("components out of range: {comps:?}")));
        }
        let sum: f64 = comps.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState(format!("components sum to {sum}, not 1")));
        }
        Ok(())
    }

    /// Components in the (I, X, Y, Z) order of the struct fields.
    #[inline]
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }

    /// Components reindexed by GF(4) symbol: [I, X, Z, Y].
    #[inline]
    pub fn by_symbol(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        out[GF4_I as usize] = self.p_i;
        out[GF4_X as usize] = self.p_x;
        out[GF4_Z as usize] = self.p_z;
        out[GF4_Y as usize] = self.p_y;
        out
    }

    pub fn from_symbol_probs(probs: [f64; 4]) -> Result<BellDiagonalState> {
        BellDiagonalState::new(
            probs[GF4_I as usize],
            probs[GF4_X as usize],
            probs[GF4_Y as usize],
            probs[GF4_Z as usize],
        )
    }

    /// Quantum error rate of the state: 1 − p_I.
    #[inline]
    pub fn error_rate(&self) -> f64 {
        1.0 - self.p_i
    }

    /// Von Neumann entropy in bits, −Σ p log₂ p.
    pub fn entropy(&self) -> f64 {
        entropy4(&self.as_array())
    }

    /// Draw one error symbol (GF(4) index) from the state distribution.
    #[inline]
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> u16 {
        let u: f64 = rng.random();
        let probs = self.by_symbol();
        let mut acc = 0.0;
        for (sym, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return sym as u16;
            }
        }
        // u landed in the rounding slack at the top of the CDF.
        GF4_Y
    }
}

/// Shannon entropy (bits) of a nonnegative vector summing to ~1, with the
/// convention 0·log 0 = 0.
pub fn entropy4(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Per-qubit prior over the q² error symbols, as fed to the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPrior(Vec<f64>);

impl ChannelPrior {
    pub fn new(probs: Vec<f64>) -> Result<ChannelPrior> {
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidState("negative prior probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidState(format!("prior sums to {sum}, not 1")));
        }
        Ok(ChannelPrior(probs))
    }

    /// GF(4) prior from a Bell-diagonal state.
    pub fn from_state(state: &BellDiagonalState) -> ChannelPrior {
        ChannelPrior(state.by_symbol().to_vec())
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn werner_definition() {
        let s = BellDiagonalState::werner(0.0).unwrap();
        assert_eq!(s.as_array(), [1.0, 0.0, 0.0, 0.0]);
        let s = BellDiagonalState::werner(0.3).unwrap();
        assert_abs_diff_eq!(s.p_i, 0.7);
        assert_abs_diff_eq!(s.p_x, 0.1);
        assert_abs_diff_eq!(s.p_y, 0.1);
        assert_abs_diff_eq!(s.p_z, 0.1);
        let s = BellDiagonalState::werner(0.75).unwrap();
        assert_eq!(s.as_array(), [0.25, 0.25, 0.25, 0.25]);
        assert!(BellDiagonalState::werner(-0.1).is_err());
        assert!(BellDiagonalState::werner(1.1).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(BellDiagonalState::werner(0.0).unwrap().entropy(), 0.0);
        assert_abs_diff_eq!(BellDiagonalState::werner(0.75).unwrap().entropy(), 2.0, epsilon = 1e-12);
        // closed form for Werner states
        let p0 = 0.3;
        let s = BellDiagonalState::werner(p0).unwrap();
        let expect = -(1.0 - p0) * (1.0 - p0).log2() - p0 * (p0 / 3.0).log2();
        assert_abs_diff_eq!(s.entropy(), expect, epsilon = 1e-12);
        // threshold entropy at p0 = 2.0e-5 is about 3.7e-4
        let h = BellDiagonalState::werner(2.0e-5).unwrap().entropy();
        assert!((h - 3.7e-4).abs() / 3.7e-4 < 0.03, "h = {h}");
    }

    #[test]
    fn entropy_is_maximal_at_uniform() {
        let uniform = BellDiagonalState::werner(0.75).unwrap();
        for s in [
            BellDiagonalState::new(0.4, 0.3, 0.2, 0.1).unwrap(),
            BellDiagonalState::werner(0.2).unwrap(),
            BellDiagonalState::new(0.25, 0.35, 0.15, 0.25).unwrap(),
        ] {
            assert!(s.entropy() <= uniform.entropy() + 1e-12);
        }
    }

    #[test]
    fn sampling_respects_symbol_table() {
        // A state with only Z errors must only ever produce symbol 2.
        let s = BellDiagonalState::new(0.7, 0.0, 0.0, 0.3).unwrap();
        let mut rng = sample_rng(1, 0, 0);
        let mut counts = [0u32; 4];
        for _ in 0..20_000 {
            counts[s.sample_error(&mut rng) as usize] += 1;
        }
        assert_eq!(counts[GF4_X as usize], 0);
        assert_eq!(counts[GF4_Y as usize], 0);
        let frac_z = counts[GF4_Z as usize] as f64 / 20_000.0;
        assert!((frac_z - 0.3).abs() < 0.02, "frac_z = {frac_z}");
    }

    #[test]
    fn sampling_edge_cases() {
        let mut rng = sample_rng(2, 0, 0);
        let noiseless = BellDiagonalState::werner(0.0).unwrap();
        assert!((0..1000).all(|_| noiseless.sample_error(&mut rng) == GF4_I));
        let saturated = BellDiagonalState::werner(1.0).unwrap();
        assert!((0..1000).all(|_| saturated.sample_error(&mut rng) != GF4_I));
    }

    #[test]
    fn sampling_frequencies_within_binomial_bounds() {
        // werner(0.5) over 10^6 draws: each frequency within 4σ.
        let s = BellDiagonalState::werner(0.5).unwrap();
        let n = 1_000_000u32;
        let mut rng = sample_rng(3, 0, 0);
        let mut counts = [0u64; 4];
        for _ in 0..n {
            counts[s.sample_error(&mut rng) as usize] += 1;
        }
        let expect = s.by_symbol();
        for sym in 0..4 {
            let p = expect[sym];
            let sigma = (p * (1.0 - p) * n as f64).sqrt();
            let dev = (counts[sym] as f64 - p * n as f64).abs();
            assert!(dev < 4.0 * sigma, "symbol {sym}: dev {dev} vs 4σ {}", 4.0 * sigma);
        }
    }

    #[test]
    fn chi_square_goodness_of_fit() {
        let s = BellDiagonalState::new(0.6, 0.2, 0.15, 0.05).unwrap();
        let n = 200_000u32;
        let mut rng = sample_rng(4, 0, 0);
        let mut counts = [0u64; 4];
        for _ in 0..n {
            counts[s.sample_error(&mut rng) as usize] += 1;
        }
        let expect = s.by_symbol();
        let chi2: f64 = (0..4)
            .map(|sym| {
                let e = expect[sym] * n as f64;
                (counts[sym] as f64 - e).powi(2) / e
            })
            .sum();
        // 3 degrees of freedom; 99.9th percentile is about 16.3
        assert!(chi2 < 16.3, "chi² = {chi2}");
    }

    #[test]
    fn channel_prior_from_state() {
        let s = BellDiagonalState::new(0.7, 0.1, 0.05, 0.15).unwrap();
        let prior = ChannelPrior::from_state(&s);
        assert_eq!(prior.probs()[GF4_I as usize], 0.7);
        assert_eq!(prior.probs()[GF4_X as usize], 0.1);
        assert_eq!(prior.probs()[GF4_Z as usize], 0.15);
        assert_eq!(prior.probs()[GF4_Y as usize], 0.05);
        assert!(ChannelPrior::new(vec![0.5, 0.4]).is_err());
        assert!(ChannelPrior::new(vec![0.5, 0.5]).is_ok());
    }
}
