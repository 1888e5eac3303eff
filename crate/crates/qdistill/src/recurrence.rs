//! One round of the recurrence protocol in two forms: an exact Bell-diagonal
//! state update with its success probability, and Monte-Carlo filtering of
//! sampled error lists.  Also enumerates check schedules for the yield
//! optimizer.
//!
//! A round measures the parity check g⊗g on random disjoint pairs of pairs.
//! Writing each error as e = α·g + β·h (h any operator anticommuting with
//! g), the syndrome comparison passes exactly when β₁ = β₂, and the kept
//! pair is left carrying (α₁+α₂)·g + β₁·h.  The update below is the
//! Pauli-frame image of the bilateral-CNOT recurrence circuit; the 16-pair
//! enumeration in the tests is the reference for it.

use crate::error::Result;
use crate::ffield::{gf4_add, gf4_skew, GF4_X, GF4_Y, GF4_Z};
use crate::states::BellDiagonalState;
use rand::seq::SliceRandom;
use rand::Rng;

/// Default bound on the number of recurrence rounds explored.
pub const DEFAULT_R_MAX: usize = 8;

/// Which parity check a recurrence round measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckBasis {
    Xx,
    Yy,
    Zz,
}

impl CheckBasis {
    pub const ALL: [CheckBasis; 3] = [CheckBasis::Xx, CheckBasis::Yy, CheckBasis::Zz];

    /// The single-qubit operator g measured on both halves.
    #[inline]
    pub fn check_symbol(self) -> u16 {
        match self {
            CheckBasis::Xx => GF4_X,
            CheckBasis::Yy => GF4_Y,
            CheckBasis::Zz => GF4_Z,
        }
    }

    /// Lowest-index symbol anticommuting with the check; completes {g, h}
    /// to a GF(2) basis of GF(4).
    #[inline]
    pub fn partner_symbol(self) -> u16 {
        match self {
            CheckBasis::Xx => GF4_Z,
            CheckBasis::Yy => GF4_X,
            CheckBasis::Zz => GF4_X,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CheckBasis::Xx => "XX",
            CheckBasis::Yy => "YY",
            CheckBasis::Zz => "ZZ",
        }
    }

    pub fn parse(s: &str) -> Option<CheckBasis> {
        match s {
            "XX" => Some(CheckBasis::Xx),
            "YY" => Some(CheckBasis::Yy),
            "ZZ" => Some(CheckBasis::Zz),
            _ => None,
        }
    }
}

impl std::fmt::Display for CheckBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// An ordered list of recurrence rounds; the final code applied afterwards
/// is tracked by the experiment layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Schedule {
    pub rounds: Vec<CheckBasis>,
}

impl Schedule {
    pub fn empty() -> Schedule {
        Schedule { rounds: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Compact text form, e.g. "ZZ.XX"; "-" for the empty schedule.
    pub fn label(&self) -> String {
        if self.rounds.is_empty() {
            "-".to_string()
        } else {
            self.rounds.iter().map(|c| c.label()).collect::<Vec<_>>().join(".")
        }
    }

    pub fn parse(s: &str) -> Option<Schedule> {
        if s == "-" || s.is_empty() {
            return Some(Schedule::empty());
        }
        let rounds = s.split('.').map(CheckBasis::parse).collect::<Option<Vec<_>>>()?;
        Some(Schedule { rounds })
    }
}

/// Decompose e = α·g + β·h for the given check; returns (α, β) ∈ GF(2)².
#[inline]
fn decompose(check: CheckBasis, e: u16) -> (u8, u8) {
    // skew(g, e) = β·skew(g, h) = β and skew(h, e) = α·skew(h, g) = α.
    let g = check.check_symbol();
    let h = check.partner_symbol();
    (gf4_skew(h, e), gf4_skew(g, e))
}

/// Exact update of a Bell-diagonal state under one recurrence round.
///
/// Returns the renormalized distribution of kept pairs and the probability
/// p_s that a pair of pairs passes the syndrome comparison.
pub fn recurrence_step_exact(
    state: &BellDiagonalState,
    check: CheckBasis,
) -> Result<(BellDiagonalState, f64)> {
    state.validate()?;
    let probs = state.by_symbol();
    let g = check.check_symbol();
    let h = check.partner_symbol();

    // Regroup by the (α, β) coordinates of each symbol.
    let mut q = [[0.0f64; 2]; 2];
    for sym in 0..4u16 {
        let (alpha, beta) = decompose(check, sym);
        q[alpha as usize][beta as usize] += probs[sym as usize];
    }

    // A pair passes iff β₁ = β₂; the survivor carries ((α₁+α₂)g, β₁h).
    let mut out = [0.0f64; 4];
    let mut p_s = 0.0;
    for beta in 0..2usize {
        let same = q[0][beta] * q[0][beta] + q[1][beta] * q[1][beta];
        let cross = 2.0 * q[0][beta] * q[1][beta];
        p_s += same + cross;
        let base = if beta == 1 { h } else { 0 };
        out[gf4_add(0, base) as usize] += same;
        out[gf4_add(g, base) as usize] += cross;
    }
    assert!(
        (0.5 - 1e-12..=1.0 + 1e-12).contains(&p_s),
        "success probability {p_s} outside [1/2, 1]"
    );
    for o in &mut out {
        *o /= p_s;
    }
    Ok((BellDiagonalState::from_symbol_probs(out)?, p_s))
}

/// Monte-Carlo form of one round: randomly pair the sampled errors, keep
/// survivors under the same rule, drop an odd leftover.
pub fn recurrence_step_mc<R: Rng + ?Sized>(
    errors: &[u16],
    check: CheckBasis,
    rng: &mut R,
) -> Vec<u16> {
    let mut order: Vec<u32> = (0..errors.len() as u32).collect();
    order.shuffle(rng);
    let g = check.check_symbol();
    let h = check.partner_symbol();
    let mut kept = Vec::with_capacity(errors.len() / 2);
    for pair in order.chunks_exact(2) {
        let e1 = errors[pair[0] as usize];
        let e2 = errors[pair[1] as usize];
        let (a1, b1) = decompose(check, e1);
        let (a2, b2) = decompose(check, e2);
        if b1 == b2 {
            let mut sym = 0;
            if a1 ^ a2 == 1 {
                sym = gf4_add(sym, g);
            }
            if b1 == 1 {
                sym = gf4_add(sym, h);
            }
            kept.push(sym);
        }
    }
    kept
}

/// All check sequences of length 0..=r_max, in (length, lexicographic)
/// order.
pub fn enumerate_schedules(r_max: usize) -> Vec<Schedule> {
    let mut out = vec![Schedule::empty()];
    let mut frontier = vec![Vec::<CheckBasis>::new()];
    for _ in 0..r_max {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for prefix in &frontier {
            for check in CheckBasis::ALL {
                let mut rounds = prefix.clone();
                rounds.push(check);
                next.push(rounds);
            }
        }
        out.extend(next.iter().cloned().map(|rounds| Schedule { rounds }));
        frontier = next;
    }
    out
}

/// Schedule list with the round-1 check pinned to ZZ, valid when
/// [`round1_checks_equivalent`] holds for the input state.
pub fn enumerate_schedules_pruned(r_max: usize) -> Vec<Schedule> {
    enumerate_schedules(r_max)
        .into_iter()
        .filter(|s| s.rounds.first().is_none_or(|&c| c == CheckBasis::Zz))
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

/// Verify by exact-step computation that the three round-1 checks act
/// identically on `state` up to the induced relabeling, i.e. that pinning
/// the first check loses nothing.  True for Werner states.
pub fn round1_checks_equivalent(state: &BellDiagonalState) -> Result<bool> {
    let (sx, px) = recurrence_step_exact(state, CheckBasis::Xx)?;
    let (sy, py) = recurrence_step_exact(state, CheckBasis::Yy)?;
    let (sz, pz) = recurrence_step_exact(state, CheckBasis::Zz)?;
    // XX vs ZZ differ by the X↔Z relabeling, XX vs YY by X↔Y.
    let xz = close(px, pz)
        && close(sx.p_i, sz.p_i)
        && close(sx.p_x, sz.p_z)
        && close(sx.p_z, sz.p_x)
        && close(sx.p_y, sz.p_y);
    let xy = close(px, py)
        && close(sx.p_i, sy.p_i)
        && close(sx.p_x, sy.p_y)
        && close(sx.p_y, sy.p_x)
        && close(sx.p_z, sy.p_z);
    Ok(xz && xy)
}

/// Apply a whole schedule exactly; returns the final state and the product
/// of per-round success probabilities Π p_s,i.
pub fn apply_schedule_exact(
    state: &BellDiagonalState,
    schedule: &Schedule,
) -> Result<(BellDiagonalState, f64)> {
    let mut current = *state;
    let mut ps_product = 1.0;
    for &check in &schedule.rounds {
        let (next, ps) = recurrence_step_exact(&current, check)?;
        current = next;
        ps_product *= ps;
    }
    Ok((current, ps_product))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::GF4_I;
    use crate::rng::sample_rng;
    use crate::states::BellDiagonalState;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Reference: enumerate all 16 ordered error pairs, decompose each error
    /// by trying every (α, β), apply the keep/propagate rule literally.
    fn brute_force_step(state: &BellDiagonalState, check: CheckBasis) -> ([f64; 4], f64) {
        let probs = state.by_symbol();
        let g = check.check_symbol();
        let h = check.partner_symbol();
        let coords = |e: u16| -> (u8, u8) {
            for alpha in 0..2u16 {
                for beta in 0..2u16 {
                    let mut sym = 0;
                    if alpha == 1 {
                        sym = gf4_add(sym, g);
                    }
                    if beta == 1 {
                        sym = gf4_add(sym, h);
                    }
                    if sym == e {
                        return (alpha as u8, beta as u8);
                    }
                }
            }
            unreachable!("{{g,h}} is a basis");
        };
        let mut out = [0.0f64; 4];
        let mut p_s = 0.0;
        for e1 in 0..4u16 {
            for e2 in 0..4u16 {
                let w = probs[e1 as usize] * probs[e2 as usize];
                let (a1, b1) = coords(e1);
                let (a2, b2) = coords(e2);
                if b1 != b2 {
                    continue;
                }
                p_s += w;
                let mut sym = 0;
                if a1 ^ a2 == 1 {
                    sym = gf4_add(sym, g);
                }
                if b1 == 1 {
                    sym = gf4_add(sym, h);
                }
                out[sym as usize] += w;
            }
        }
        for o in &mut out {
            *o /= p_s;
        }
        (out, p_s)
    }

    #[test]
    fn noiseless_state_is_fixed() {
        let s = BellDiagonalState::werner(0.0).unwrap();
        for check in CheckBasis::ALL {
            let (out, ps) = recurrence_step_exact(&s, check).unwrap();
            assert_eq!(out.as_array(), [1.0, 0.0, 0.0, 0.0]);
            assert_eq!(ps, 1.0);
        }
    }

    #[test]
    fn werner_03_zz_example() {
        let s = BellDiagonalState::werner(0.3).unwrap();
        let (out, ps) = recurrence_step_exact(&s, CheckBasis::Zz).unwrap();
        assert_abs_diff_eq!(ps, 0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(out.p_i, 0.5 / 0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(out.p_x, 0.02 / 0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(out.p_y, 0.02 / 0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(out.p_z, 0.14 / 0.68, epsilon = 1e-12);
        // four-decimal figures
        assert!((out.p_i - 0.7353).abs() < 5e-5);
        assert!((out.p_z - 0.2059).abs() < 5e-5);
    }

    #[test]
    fn exact_matches_brute_force_on_random_states() {
        let mut rng = sample_rng(11, 0, 0);
        for _ in 0..1000 {
            let mut raw = [0.0f64; 4];
            let mut sum = 0.0;
            for r in &mut raw {
                *r = rng.random::<f64>();
                sum += *r;
            }
            let s = BellDiagonalState::new(raw[0] / sum, raw[1] / sum, raw[2] / sum, raw[3] / sum)
                .unwrap();
            for check in CheckBasis::ALL {
                let (out, ps) = recurrence_step_exact(&s, check).unwrap();
                let (bf_out, bf_ps) = brute_force_step(&s, check);
                assert!((ps - bf_ps).abs() < 1e-12);
                let got = out.by_symbol();
                for sym in 0..4 {
                    assert!((got[sym] - bf_out[sym]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zz_filters_x_and_y_quadratically() {
        // p_X' + p_Y' = (p_X + p_Y)² / p_s for the ZZ check.
        let s = BellDiagonalState::new(0.62, 0.2, 0.08, 0.1).unwrap();
        let (out, ps) = recurrence_step_exact(&s, CheckBasis::Zz).unwrap();
        assert_abs_diff_eq!(out.p_x + out.p_y, (s.p_x + s.p_y).powi(2) / ps, epsilon = 1e-12);
    }

    #[test]
    fn mc_step_examples() {
        let mut rng = sample_rng(12, 0, 0);
        // all-identity input halves in length
        let kept = recurrence_step_mc(&[GF4_I; 8], CheckBasis::Zz, &mut rng);
        assert_eq!(kept, vec![GF4_I; 4]);
        // [X, X] under ZZ: β₁ = β₂ = 1, α's cancel, survivor keeps X
        let kept = recurrence_step_mc(&[GF4_X, GF4_X], CheckBasis::Zz, &mut rng);
        assert_eq!(kept, vec![GF4_X]);
        // [I, X] under ZZ: β₁ ≠ β₂, rejected
        let kept = recurrence_step_mc(&[GF4_I, GF4_X], CheckBasis::Zz, &mut rng);
        assert!(kept.is_empty());
        // odd leftover is dropped
        let kept = recurrence_step_mc(&[GF4_I; 5], CheckBasis::Xx, &mut rng);
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn mc_agrees_with_exact_within_4_sigma() {
        let s = BellDiagonalState::werner(0.25).unwrap();
        let n = 200_000usize;
        let mut rng = sample_rng(13, 0, 0);
        let errors: Vec<u16> = (0..n).map(|_| s.sample_error(&mut rng)).collect();
        for check in CheckBasis::ALL {
            let (exact_out, ps) = recurrence_step_exact(&s, check).unwrap();
            let kept = recurrence_step_mc(&errors, check, &mut rng);
            // keep rate: kept pairs out of n/2 candidate pairs
            let pairs = (n / 2) as f64;
            let sigma = (ps * (1.0 - ps) * pairs).sqrt();
            assert!(
                ((kept.len() as f64) - ps * pairs).abs() < 4.0 * sigma + 1.0,
                "{check}: keep rate off"
            );
            // survivor frequencies
            let expect = exact_out.by_symbol();
            let m = kept.len() as f64;
            for sym in 0..4u16 {
                let count = kept.iter().filter(|&&e| e == sym).count() as f64;
                let sigma = (expect[sym as usize] * (1.0 - expect[sym as usize]) * m).sqrt();
                assert!(
                    (count - expect[sym as usize] * m).abs() < 4.0 * sigma + 1.0,
                    "{check}: symbol {sym} off"
                );
            }
        }
    }

    #[test]
    fn schedule_enumeration_counts() {
        assert_eq!(enumerate_schedules(0), vec![Schedule::empty()]);
        let r1 = enumerate_schedules(1);
        assert_eq!(r1.len(), 4); // empty + 3 single-check
        assert_eq!(enumerate_schedules(2).len(), 13);
        // pruned: first check pinned to one representative
        let pruned = enumerate_schedules_pruned(2);
        assert_eq!(pruned.len(), 5); // -, ZZ, ZZ.XX, ZZ.YY, ZZ.ZZ
        assert!(pruned
            .iter()
            .all(|s| s.rounds.first().is_none_or(|&c| c == CheckBasis::Zz)));
    }

    #[test]
    fn werner_round1_symmetry_verified_not_assumed() {
        assert!(round1_checks_equivalent(&BellDiagonalState::werner(0.3).unwrap()).unwrap());
        assert!(round1_checks_equivalent(&BellDiagonalState::werner(0.0).unwrap()).unwrap());
        // an asymmetric state fails the verification
        let skewed = BellDiagonalState::new(0.7, 0.2, 0.05, 0.05).unwrap();
        assert!(!round1_checks_equivalent(&skewed).unwrap());
    }

    #[test]
    fn schedule_labels_round_trip() {
        for s in enumerate_schedules(3) {
            assert_eq!(Schedule::parse(&s.label()), Some(s.clone()));
        }
    }

    proptest! {
        #[test]
        fn success_probability_at_least_half(
            a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, d in 0.0f64..1.0
        ) {
            let sum = a + b + c + d;
            prop_assume!(sum > 1e-9);
            let s = BellDiagonalState::new(a / sum, b / sum, c / sum, d / sum).unwrap();
            for check in CheckBasis::ALL {
                let (out, ps) = recurrence_step_exact(&s, check).unwrap();
                prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&ps));
                prop_assert!((out.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn mc_survivor_count_matches_bookkeeping(seed in 0u64..500) {
            // one round maps N pairs to about p_s·N/2 survivors
            let s = BellDiagonalState::werner(0.4).unwrap();
            let mut rng = sample_rng(seed, 7, 0);
            let n = 4000usize;
            let errors: Vec<u16> = (0..n).map(|_| s.sample_error(&mut rng)).collect();
            let (_, ps) = recurrence_step_exact(&s, CheckBasis::Zz).unwrap();
            let kept = recurrence_step_mc(&errors, CheckBasis::Zz, &mut rng);
            let pairs = (n / 2) as f64;
            let sigma = (ps * (1.0 - ps) * pairs).sqrt();
            prop_assert!(((kept.len() as f64) - ps * pairs).abs() < 5.0 * sigma + 1.0);
        }
    }
}
