//! Simulation toolkit for a collaborative decoding MAC on top of LoRa.
//!
//! When several time-synchronized end-devices transmit in the same slot, the
//! gateway cannot read any single frame, but it can extract, per symbol
//! position, the set of distinct symbol values that were superposed. This
//! crate models the recovery protocol built on that observation: the gateway
//! broadcasts a guess frame (one candidate symbol per position), each still
//! undecoded device answers with a one-bit-per-position agreement bitmap, and
//! the gateway combines agreements with set elimination until every frame is
//! reconstructed. A conventional LoRaWAN random-retransmission baseline is
//! included for comparison under identical radio parameters.
//!
//! Layering, bottom up:
//!
//! * [`phy`]: symbol durations, payload size models, time-on-air,
//!   superposition and bitmap construction.
//! * [`timing`]: slot geometry, guard intervals, duty-cycle spacing.
//! * [`decoder`]: the guess / bitmap / elimination engine, independent of
//!   any notion of time.
//! * [`sim`]: seeded discrete-event runs of both protocols, producing
//!   per-device outcomes and a full transmission log.
//! * [`metrics`]: delay, energy, and throughput reductions over outcomes.
//! * [`replay`]: a small fixed three-device collision used by the docs,
//!   the `replay-example` subcommand, and the test suite.
//! * [`cli`]: the `synclora` binary (`run`, `sweep`, `replay-example`).
//!
//! The `examples/` directory is the guided tour; each example is a runnable
//! program exercising one capability.

pub mod cli;
pub mod decoder;
mod error;
pub mod metrics;
pub mod phy;
pub mod replay;
pub mod sim;
pub mod timing;

pub use error::{Error, Result};
