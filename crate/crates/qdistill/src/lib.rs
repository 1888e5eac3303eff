//! Entanglement distillation by the recurrence method with an efficiently
//! decodable final code, simulated at the Pauli-frame level.
//!
//! The library models shared EPR pairs as Bell-diagonal states, applies
//! rounds of the recurrence protocol (exactly or by Monte Carlo), and
//! finishes with one of several final codes: an adaptive two-level
//! generalized-bicycle QLDPC code decoded by GF(4) belief propagation, or a
//! family of small bounded-distance quantum and classical codes.  On top of
//! that it measures final-step performance, optimizes recurrence schedules
//! for yield, and emits comparison tables and charts.

pub mod adaptive;
pub mod bp;
pub mod codes;
pub mod error;
pub mod experiments;
pub mod ffield;
pub mod recurrence;
pub mod report;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
