//! Radio-layer model: symbol timing, payload size models, time-on-air, and
//! the two pieces of frame arithmetic the protocol is built on, superposed
//! set extraction and agreement bitmaps.
//!
//! Symbols are plain integers in `[0, 2^SF)`. Nothing here depends on the
//! chirp-level signal processing; the model starts from the assumption that
//! perfectly synchronized colliding frames let the gateway recover, per
//! position, the set of distinct symbol values present.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SF: u8 = 7;
pub const MAX_SF: u8 = 12;
pub const DEFAULT_BW_HZ: u32 = 125_000;
pub const DEFAULT_PREAMBLE_SYMBOLS: u32 = 10;

/// Spreading factor and bandwidth; everything time-related derives from
/// these two numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SfParams {
    pub sf: u8,
    pub bw_hz: u32,
}

impl SfParams {
    pub fn new(sf: u8, bw_hz: u32) -> Result<Self> {
        if !(MIN_SF..=MAX_SF).contains(&sf) {
            return Err(Error::invalid_arg(format!(
                "spreading factor {sf} outside {MIN_SF}..={MAX_SF}"
            )));
        }
        if bw_hz == 0 {
            return Err(Error::invalid_arg("bandwidth must be positive"));
        }
        Ok(SfParams { sf, bw_hz })
    }

    /// Standard 125 kHz channel at the given spreading factor.
    pub fn with_sf(sf: u8) -> Result<Self> {
        SfParams::new(sf, DEFAULT_BW_HZ)
    }

    /// Symbol alphabet size, `2^SF`.
    pub fn alphabet_size(&self) -> u32 {
        1u32 << self.sf
    }

    pub fn symbol_duration(&self) -> f64 {
        symbol_duration(self.sf, self.bw_hz).expect("validated at construction")
    }
}

/// How a payload byte count maps to a number of payload symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PayloadModel {
    /// One symbol per byte at SF12 growing linearly to 1.5 at SF7
    /// (`ceil(bytes * (22 - sf) / 10)`). This is the coarse model the
    /// protocol analysis uses; selected on the command line as `paper`.
    #[serde(rename = "paper")]
    Linear,
    /// The Semtech modem equation at coding rate 4/5 with explicit header
    /// and CRC, no low-data-rate optimization.
    #[serde(rename = "semtech")]
    Semtech,
}

impl fmt::Display for PayloadModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadModel::Linear => "paper",
            PayloadModel::Semtech => "semtech",
        })
    }
}

impl std::str::FromStr for PayloadModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PayloadModel::Linear),
            "semtech" => Ok(PayloadModel::Semtech),
            other => Err(Error::invalid_arg(format!(
                "unknown payload model `{other}` (expected paper or semtech)"
            ))),
        }
    }
}

/// One end-device frame: the modulated symbols plus the byte count they
/// encode. `ed_id` is the device identifier used throughout logs and
/// solicitation orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub ed_id: u32,
    pub symbols: Vec<u16>,
    pub payload_bytes: u32,
}

/// Per-position sets of distinct symbol values the gateway extracts from a
/// synchronized collision. The sets carry no information about which device
/// sent which value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuperposedObservation {
    pub sets: Vec<BTreeSet<u16>>,
}

impl SuperposedObservation {
    pub fn n_positions(&self) -> usize {
        self.sets.len()
    }

    /// Largest per-position set; bounds the number of decoding rounds.
    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }
}

/// A device's per-position agreement vector against one guess frame:
/// `bits[j]` is true iff the device's symbol at position `j` equals the
/// guessed symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bitmap {
    pub ed_id: u32,
    pub round: u32,
    pub bits: Vec<bool>,
}

/// Duration of one symbol in seconds, `2^sf / bw`.
pub fn symbol_duration(sf: u8, bw_hz: u32) -> Result<f64> {
    if !(MIN_SF..=MAX_SF).contains(&sf) {
        return Err(Error::invalid_arg(format!(
            "spreading factor {sf} outside {MIN_SF}..={MAX_SF}"
        )));
    }
    if bw_hz == 0 {
        return Err(Error::invalid_arg("bandwidth must be positive"));
    }
    Ok(f64::from(1u32 << sf) / f64::from(bw_hz))
}

/// Number of payload symbols for `payload_bytes` under the chosen model.
///
/// Both models are evaluated in integer arithmetic so ceiling results do not
/// pick up float noise.
pub fn payload_symbol_count(payload_bytes: u32, sf: u8, model: PayloadModel) -> Result<u32> {
    if payload_bytes == 0 {
        return Err(Error::invalid_arg("payload must be at least one byte"));
    }
    if !(MIN_SF..=MAX_SF).contains(&sf) {
        return Err(Error::invalid_arg(format!(
            "spreading factor {sf} outside {MIN_SF}..={MAX_SF}"
        )));
    }
    let b = u64::from(payload_bytes);
    let sf = u64::from(sf);
    Ok(match model {
        // bytes * (1 + (12 - sf)/10), rounded up.
        PayloadModel::Linear => (b * (22 - sf)).div_ceil(10) as u32,
        // 8 + max(ceil((8*PL - 4*SF + 28 + 16) / (4*SF)) * (CR + 4), 0)
        // with CR = 1, explicit header, CRC on, DE = 0.
        PayloadModel::Semtech => {
            let num = 8 * b as i64 - 4 * sf as i64 + 28 + 16;
            let denom = 4 * sf as i64;
            let blocks = if num <= 0 {
                0
            } else {
                (num + denom - 1) / denom
            };
            (8 + blocks.max(0) * 5) as u32
        }
    })
}

/// Transmission duration of a frame with `n_payload_symbols` payload symbols
/// behind an `n_preamble`-symbol preamble. The constant 4.25 covers the sync
/// word and start-of-frame delimiter.
pub fn time_on_air(n_payload_symbols: u32, n_preamble: u32, sf: &SfParams) -> f64 {
    (f64::from(n_payload_symbols) + f64::from(n_preamble) + 4.25) * sf.symbol_duration()
}

/// Airtime of a data frame carrying `payload_bytes`.
pub fn data_frame_airtime(
    payload_bytes: u32,
    model: PayloadModel,
    n_preamble: u32,
    sf: &SfParams,
) -> Result<f64> {
    let n = payload_symbol_count(payload_bytes, sf.sf, model)?;
    Ok(time_on_air(n, n_preamble, sf))
}

/// Airtime of a gateway guess frame for a data frame of `n_frame_symbols`.
/// The guess carries one candidate symbol per position plus a one-symbol
/// identifier encoding the solicitation order.
pub fn gateway_frame_airtime(n_frame_symbols: u32, n_preamble: u32, sf: &SfParams) -> f64 {
    time_on_air(n_frame_symbols + 1, n_preamble, sf)
}

/// Payload size of an agreement bitmap answering a frame of
/// `n_frame_symbols`: one bit per position, packed into bytes.
pub fn bitmap_payload_bytes(n_frame_symbols: u32) -> u32 {
    n_frame_symbols.div_ceil(8)
}

/// Airtime of an agreement bitmap answering a frame of `n_frame_symbols`.
/// The bitmap is itself a LoRa frame, so its byte count runs back through
/// the payload model.
pub fn bitmap_airtime(
    n_frame_symbols: u32,
    model: PayloadModel,
    n_preamble: u32,
    sf: &SfParams,
) -> Result<f64> {
    let n = payload_symbol_count(bitmap_payload_bytes(n_frame_symbols), sf.sf, model)?;
    Ok(time_on_air(n, n_preamble, sf))
}

/// Extract the per-position symbol sets of a synchronized collision.
///
/// Exact by construction: position `j`'s set is the union of every frame's
/// symbol at `j`. All frames must have the same length.
pub fn superpose(frames: &[Frame]) -> Result<SuperposedObservation> {
    let Some(first) = frames.first() else {
        return Err(Error::invalid_arg("superposition of zero frames"));
    };
    let len = first.symbols.len();
    if len == 0 {
        return Err(Error::invalid_arg("frames must carry at least one symbol"));
    }
    if let Some(bad) = frames.iter().find(|f| f.symbols.len() != len) {
        return Err(Error::invalid_arg(format!(
            "frame length mismatch: ED{} has {} symbols, expected {}",
            bad.ed_id,
            bad.symbols.len(),
            len
        )));
    }
    let sets = (0..len)
        .map(|j| frames.iter().map(|f| f.symbols[j]).collect())
        .collect();
    Ok(SuperposedObservation { sets })
}

/// Build the agreement bitmap a device transmits for a round-`round` guess.
pub fn make_bitmap(frame: &Frame, guess_symbols: &[u16], round: u32) -> Result<Bitmap> {
    if frame.symbols.len() != guess_symbols.len() {
        return Err(Error::invalid_arg(format!(
            "guess has {} symbols but ED{}'s frame has {}",
            guess_symbols.len(),
            frame.ed_id,
            frame.symbols.len()
        )));
    }
    Ok(Bitmap {
        ed_id: frame.ed_id,
        round,
        bits: frame
            .symbols
            .iter()
            .zip(guess_symbols)
            .map(|(s, g)| s == g)
            .collect(),
    })
}
