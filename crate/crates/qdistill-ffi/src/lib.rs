//! C ABI for the qdistill library: opaque handles, status codes, and flat
//! buffers, so the simulator can be driven from other languages.
//!
//! Error symbols cross the boundary as GF(4) indices: 0 = I, 1 = X, 2 = Z,
//! 3 = Y.  Every fallible call returns a [`QdStatus`]; out-parameters are
//! written only on `QD_OK`.

use qdistill::adaptive::{build_pair, AdaptiveCodePair, AdaptiveParams};
use qdistill::bp::{broadcast_priors, decode, TannerGraph};
use qdistill::codes::{bicycle_construct, BicycleSeed, CodeFamily, StabilizerCode};
use qdistill::codes::{family_construct, bicycle_construct_full_rank};
use qdistill::error::Error;
use qdistill::experiments::{measure_final_step, FinalModel};
use qdistill::ffield::FieldSpec;
use qdistill::recurrence::{recurrence_step_exact, CheckBasis};
use qdistill::rng::sample_rng;
use qdistill::states::{BellDiagonalState, ChannelPrior};
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    QdOk = 0,
    QdErrInvalidArgument = 1,
    QdErrValidation = 2,
    QdErrRankDeficient = 3,
    QdErrIo = 4,
    QdErrParse = 5,
    QdErrUnsupported = 6,
    QdErrNullPointer = 7,
    QdErrPanic = 8,
}

fn status_of(err: &Error) -> QdStatus {
    match err {
        Error::RankDeficient(_) => QdStatus::QdErrRankDeficient,
        Error::Validation(_) => QdStatus::QdErrValidation,
        Error::Io(_) => QdStatus::QdErrIo,
        Error::Parse(_) | Error::Json(_) => QdStatus::QdErrParse,
        Error::UnsupportedFamily { .. } => QdStatus::QdErrUnsupported,
        _ => QdStatus::QdErrInvalidArgument,
    }
}

fn guarded(f: impl FnOnce() -> QdStatus) -> QdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(QdStatus::QdErrPanic)
}

/// Stabilizer code handle.
pub struct QdCode {
    code: StabilizerCode,
    graph: TannerGraph,
}

/// Adaptive H[1] ⊂ H[2] code pair handle.
pub struct QdAdaptivePair {
    pair: Arc<AdaptiveCodePair>,
}

/// Library version string; static storage, do not free.
#[no_mangle]
pub extern "C" fn qd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static description of a status code; do not free.
#[no_mangle]
pub extern "C" fn qd_status_message(status: QdStatus) -> *const c_char {
    let msg: &'static str = match status {
        QdStatus::QdOk => "ok\0",
        QdStatus::QdErrInvalidArgument => "invalid argument\0",
        QdStatus::QdErrValidation => "validation failed\0",
        QdStatus::QdErrRankDeficient => "rank-deficient construction\0",
        QdStatus::QdErrIo => "i/o error\0",
        QdStatus::QdErrParse => "parse error\0",
        QdStatus::QdErrUnsupported => "unsupported family\0",
        QdStatus::QdErrNullPointer => "null pointer\0",
        QdStatus::QdErrPanic => "internal panic\0",
    };
    msg.as_ptr() as *const c_char
}

fn install_code(code: StabilizerCode, out: *mut *mut QdCode) -> QdStatus {
    let graph = TannerGraph::new(&code);
    let handle = Box::new(QdCode { code, graph });
    unsafe { *out = Box::into_raw(handle) };
    QdStatus::QdOk
}

/// Construct a generalized bicycle code from a fresh random seed, retrying
/// until the rows are independent.
///
/// `deleted` lists the removed row residues (1-based, each in `1..=n_prime`)
/// and may be null when `deleted_len` is 0.
///
/// # Safety
/// `out` must be a valid pointer; `deleted` must point to `deleted_len`
/// readable `uint32_t`s when nonnull.
#[no_mangle]
pub unsafe extern "C" fn qd_code_bicycle(
    n: u32,
    n_prime: u32,
    u: u32,
    deleted: *const u32,
    deleted_len: usize,
    seed: u64,
    out: *mut *mut QdCode,
) -> QdStatus {
    if out.is_null() || (deleted.is_null() && deleted_len > 0) {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let del: BTreeSet<usize> = unsafe { std::slice::from_raw_parts(deleted, deleted_len) }
            .iter()
            .map(|&j| j as usize)
            .collect();
        let field = Arc::new(FieldSpec::gf4());
        let mut rng = sample_rng(seed, 2, 0);
        match bicycle_construct_full_rank(&field, n as usize, n_prime as usize, u as usize, del, &mut rng, 64)
        {
            Ok((code, _)) => install_code(code, out),
            Err(err) => status_of(&err),
        }
    })
}

/// The worked 4×12 (2,6)-regular example code.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_code_paper_example(out: *mut *mut QdCode) -> QdStatus {
    if out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let field = Arc::new(FieldSpec::gf4());
        let seed = BicycleSeed {
            n: 12,
            n_prime: 3,
            u: 1,
            alpha: vec![1, 2, 3, 0, 0, 0],
            deleted: BTreeSet::from([3]),
        };
        match bicycle_construct(&field, &seed) {
            Ok(code) => install_code(code, out),
            Err(err) => status_of(&err),
        }
    })
}

/// Construct a member of a named code family: "hamming_q4", "css_hamming",
/// "classical_hamming", "bch" or "majority".
///
/// # Safety
/// `kind` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_code_family(
    kind: *const c_char,
    t: u32,
    out: *mut *mut QdCode,
) -> QdStatus {
    if kind.is_null() || out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let Ok(kind) = unsafe { CStr::from_ptr(kind) }.to_str() else {
            return QdStatus::QdErrParse;
        };
        let Some(family) = CodeFamily::parse(kind) else {
            return QdStatus::QdErrUnsupported;
        };
        match family_construct(family, t) {
            Ok(code) => install_code(code, out),
            Err(err) => status_of(&err),
        }
    })
}

/// Parse a code from its plain-text serialization.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_code_from_text(text: *const c_char, out: *mut *mut QdCode) -> QdStatus {
    if text.is_null() || out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
            return QdStatus::QdErrParse;
        };
        match StabilizerCode::from_text(text) {
            Ok(code) => install_code(code, out),
            Err(err) => status_of(&err),
        }
    })
}

/// Serialize a code; the returned string must be released with
/// [`qd_string_free`].
///
/// # Safety
/// `code` must come from this library and be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qd_code_to_text(code: *const QdCode, out: *mut *mut c_char) -> QdStatus {
    if code.is_null() || out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let text = unsafe { &*code }.code.to_text();
        match CString::new(text) {
            Ok(cstr) => {
                unsafe { *out = cstr.into_raw() };
                QdStatus::QdOk
            }
            Err(_) => QdStatus::QdErrParse,
        }
    })
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `qd_*` call, not yet
/// freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Codeword length n.
///
/// # Safety
/// `code` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qd_code_len(code: *const QdCode) -> u32 {
    if code.is_null() {
        return 0;
    }
    unsafe { &*code }.code.n() as u32
}

/// Number of generator rows.
///
/// # Safety
/// `code` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qd_code_rows(code: *const QdCode) -> u32 {
    if code.is_null() {
        return 0;
    }
    unsafe { &*code }.code.num_rows() as u32
}

/// Run the structural checks (orthogonality, rank, regularity, rate).
///
/// # Safety
/// `code` must be a live handle; `ok` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_code_validate(code: *const QdCode, ok: *mut bool) -> QdStatus {
    if code.is_null() || ok.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let report = unsafe { &*code }.code.validate();
        unsafe { *ok = report.is_ok() };
        QdStatus::QdOk
    })
}

/// Syndrome of a dense error vector (`n` GF(4) symbol indices); writes one
/// GF(2) bit per row into `out_syndrome`.
///
/// # Safety
/// `error_symbols` must hold `n` bytes, `out_syndrome` as many bytes as the
/// code has rows; `code` must be live.
#[no_mangle]
pub unsafe extern "C" fn qd_code_syndrome(
    code: *const QdCode,
    error_symbols: *const u8,
    n: usize,
    out_syndrome: *mut u8,
) -> QdStatus {
    if code.is_null() || error_symbols.is_null() || out_syndrome.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let handle = unsafe { &*code };
        let err: Vec<u16> =
            unsafe { std::slice::from_raw_parts(error_symbols, n) }.iter().map(|&b| b as u16).collect();
        match handle.code.syndrome(&err) {
            Ok(s) => {
                unsafe { std::slice::from_raw_parts_mut(out_syndrome, s.len()) }
                    .copy_from_slice(&s);
                QdStatus::QdOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Belief-propagation decode of a measured syndrome under a Werner channel
/// prior with error rate `prior_error_rate`.  Writes the tentative decoding
/// (n symbol indices) into `out_correction`.
///
/// # Safety
/// `syndrome` must hold `syndrome_len` bytes, `out_correction` n bytes;
/// `out_converged` and `out_rounds` must be valid; `code` must be live.
#[no_mangle]
pub unsafe extern "C" fn qd_code_bp_decode(
    code: *const QdCode,
    syndrome: *const u8,
    syndrome_len: usize,
    prior_error_rate: f64,
    m_max: u32,
    out_correction: *mut u8,
    out_converged: *mut bool,
    out_rounds: *mut u32,
) -> QdStatus {
    if code.is_null()
        || syndrome.is_null()
        || out_correction.is_null()
        || out_converged.is_null()
        || out_rounds.is_null()
    {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let handle = unsafe { &*code };
        let syndrome = unsafe { std::slice::from_raw_parts(syndrome, syndrome_len) };
        let state = match BellDiagonalState::werner(prior_error_rate) {
            Ok(s) => s,
            Err(err) => return status_of(&err),
        };
        let priors = match broadcast_priors(&handle.graph, &ChannelPrior::from_state(&state)) {
            Ok(p) => p,
            Err(err) => return status_of(&err),
        };
        match decode(&handle.code, syndrome, &priors, m_max) {
            Ok(result) => {
                let out =
                    unsafe { std::slice::from_raw_parts_mut(out_correction, handle.code.n()) };
                for (slot, &sym) in out.iter_mut().zip(&result.xtilde) {
                    *slot = sym as u8;
                }
                unsafe {
                    *out_converged = result.converged;
                    *out_rounds = result.rounds_used;
                }
                QdStatus::QdOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Release a code handle.
///
/// # Safety
/// `code` must come from this library and not have been freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn qd_code_free(code: *mut QdCode) {
    if !code.is_null() {
        drop(unsafe { Box::from_raw(code) });
    }
}

/// Werner state components (I, X, Y, Z order) for error rate `p0`.
///
/// # Safety
/// `out_probs` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qd_werner(p0: f64, out_probs: *mut f64) -> QdStatus {
    if out_probs.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| match BellDiagonalState::werner(p0) {
        Ok(s) => {
            unsafe { std::slice::from_raw_parts_mut(out_probs, 4) }.copy_from_slice(&s.as_array());
            QdStatus::QdOk
        }
        Err(err) => status_of(&err),
    })
}

/// Entropy in bits of a Bell-diagonal state given as (I, X, Y, Z)
/// components.
///
/// # Safety
/// `probs` must point to 4 readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qd_state_entropy(probs: *const f64, out: *mut f64) -> QdStatus {
    if probs.is_null() || out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let p = unsafe { std::slice::from_raw_parts(probs, 4) };
        match BellDiagonalState::new(p[0], p[1], p[2], p[3]) {
            Ok(s) => {
                unsafe { *out = s.entropy() };
                QdStatus::QdOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Asymptotic hashing yield 1 − S(state), floored at zero; returns −1 on a
/// malformed state.
///
/// # Safety
/// `probs` must point to 4 readable doubles.
#[no_mangle]
pub unsafe extern "C" fn qd_hashing_yield(probs: *const f64) -> f64 {
    if probs.is_null() {
        return -1.0;
    }
    let p = unsafe { std::slice::from_raw_parts(probs, 4) };
    match BellDiagonalState::new(p[0], p[1], p[2], p[3]) {
        Ok(s) => qdistill::experiments::hashing_yield(&s),
        Err(_) => -1.0,
    }
}

/// One exact recurrence round on a Bell-diagonal state (I, X, Y, Z order).
/// `check`: 0 = XX, 1 = YY, 2 = ZZ.
///
/// # Safety
/// `in_probs` must point to 4 readable doubles, `out_probs` to 4 writable
/// doubles, `out_success_prob` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qd_recurrence_step(
    in_probs: *const f64,
    check: u8,
    out_probs: *mut f64,
    out_success_prob: *mut f64,
) -> QdStatus {
    if in_probs.is_null() || out_probs.is_null() || out_success_prob.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let p = unsafe { std::slice::from_raw_parts(in_probs, 4) };
        let basis = match check {
            0 => CheckBasis::Xx,
            1 => CheckBasis::Yy,
            2 => CheckBasis::Zz,
            _ => return QdStatus::QdErrInvalidArgument,
        };
        let state = match BellDiagonalState::new(p[0], p[1], p[2], p[3]) {
            Ok(s) => s,
            Err(err) => return status_of(&err),
        };
        match recurrence_step_exact(&state, basis) {
            Ok((next, ps)) => {
                unsafe {
                    std::slice::from_raw_parts_mut(out_probs, 4).copy_from_slice(&next.as_array());
                    *out_success_prob = ps;
                }
                QdStatus::QdOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Build an adaptive H[1] ⊂ H[2] pair (H[2] drawn fresh until full rank;
/// H[1] drops the rows of `deleted_residue`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_adaptive_pair_new(
    n: u32,
    n_prime: u32,
    u: u32,
    deleted_residue: u32,
    seed: u64,
    out: *mut *mut QdAdaptivePair,
) -> QdStatus {
    if out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let params = AdaptiveParams {
            n: n as usize,
            n_prime: n_prime as usize,
            u: u as usize,
            deleted_residue: deleted_residue as usize,
        };
        let mut rng = sample_rng(seed, 2, 0);
        match build_pair(params, &mut rng) {
            Ok(pair) => {
                unsafe { *out = Box::into_raw(Box::new(QdAdaptivePair { pair: Arc::new(pair) })) };
                QdStatus::QdOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Codeword length of the pair.
///
/// # Safety
/// `pair` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qd_adaptive_pair_len(pair: *const QdAdaptivePair) -> u32 {
    if pair.is_null() {
        return 0;
    }
    unsafe { &*pair }.pair.h2().n() as u32
}

/// Monte-Carlo measurement of the adaptive final step on Werner-shaped
/// input noise at rate `e_in`.
///
/// # Safety
/// `pair` must be live; `out_e_out` and `out_d_partial` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qd_adaptive_measure(
    pair: *const QdAdaptivePair,
    e_in: f64,
    samples: u64,
    seed: u64,
    out_e_out: *mut f64,
    out_d_partial: *mut f64,
) -> QdStatus {
    if pair.is_null() || out_e_out.is_null() || out_d_partial.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    guarded(|| {
        let handle = unsafe { &*pair };
        let state = match BellDiagonalState::werner(e_in) {
            Ok(s) => s,
            Err(err) => return status_of(&err),
        };
        match measure_final_step(&FinalModel::Adaptive(handle.pair.clone()), &state, samples, seed)
        {
            Ok(point) => {
                unsafe {
                    *out_e_out = point.e_out;
                    *out_d_partial = point.d_partial;
                }
                QdStatus::QdOk
            }
            Err(err) => status_of(&err),
        }
    })
}

/// Release an adaptive pair handle.
///
/// # Safety
/// `pair` must come from this library and not have been freed; null is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn qd_adaptive_pair_free(pair: *mut QdAdaptivePair) {
    if !pair.is_null() {
        drop(unsafe { Box::from_raw(pair) });
    }
}
