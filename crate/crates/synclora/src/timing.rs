//! Slot geometry and channel-access timing.
//!
//! The protocol runs on a fixed slot grid. Slot 1 carries the synchronized
//! data frames plus the first gateway guess frame; each decoding round then
//! occupies one slot carrying the solicited agreement bitmaps back to back
//! (separated by a guard interval) with the next guess frame at the tail.
//!
//! Duty-cycle regulation is modeled as start-to-start spacing of
//! `duty_factor` times the previous transmission's duration, applied between
//! consecutive transmissions of the same kind by the same node: data frame
//! after data frame, bitmap after bitmap, gateway frame after gateway frame.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_GAP_S: f64 = 30e-9;
pub const DEFAULT_DUTY_FACTOR: f64 = 100.0;
pub const DEFAULT_NMAXSLOTS: u32 = 1000;

/// Airtimes and channel-access parameters for one radio configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingConfig {
    /// Data frame airtime (s).
    pub d_ed: f64,
    /// Gateway guess frame airtime (s).
    pub d_gw: f64,
    /// Agreement bitmap airtime (s).
    pub d_bitmap: f64,
    /// Guard interval between consecutive bitmaps of a slot (s).
    pub gap: f64,
    /// Maximum relative clock drift, `0 <= delta_max < 1`.
    pub delta_max: f64,
    /// Number of slots available before the schedule horizon.
    pub nmaxslots: u32,
    /// Start-to-start duty-cycle multiplier (100 models a 1% duty cycle).
    pub duty_factor: f64,
}

impl TimingConfig {
    pub fn new(
        d_ed: f64,
        d_gw: f64,
        d_bitmap: f64,
        gap: f64,
        delta_max: f64,
        nmaxslots: u32,
        duty_factor: f64,
    ) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(d_ed) || !positive(d_gw) || !positive(d_bitmap) {
            return Err(Error::invalid_arg("airtimes must be positive"));
        }
        if !gap.is_finite() || gap < 0.0 {
            return Err(Error::invalid_arg("gap must be non-negative"));
        }
        if !(0.0..1.0).contains(&delta_max) {
            return Err(Error::invalid_arg("delta_max must lie in [0, 1)"));
        }
        if nmaxslots < 1 {
            return Err(Error::invalid_arg("need at least one slot"));
        }
        if !positive(duty_factor) {
            return Err(Error::invalid_arg("duty factor must be positive"));
        }
        Ok(TimingConfig {
            d_ed,
            d_gw,
            d_bitmap,
            gap,
            delta_max,
            nmaxslots,
            duty_factor,
        })
    }
}

/// Start of the first gateway guess frame: immediately after the
/// synchronized data frames that began at `t0`.
pub fn first_gateway_start(t0: f64, cfg: &TimingConfig) -> f64 {
    debug_assert!(t0 >= 0.0);
    t0 + cfg.d_ed
}

/// Start of the bitmap sent by the `device_index`-th solicited device
/// (1-based) in a slot beginning at `slot_start`.
pub fn bitmap_start(slot_start: f64, device_index: u32, cfg: &TimingConfig) -> f64 {
    debug_assert!(device_index >= 1);
    slot_start + f64::from(device_index - 1) * (cfg.d_bitmap + cfg.gap)
}

/// Whether a transmission at `t_next` clears one ending at
/// `t_prev + d_prev` under worst-case clock drift: the previous sender may
/// run slow by `delta_max` and the next one fast by the same factor.
pub fn guard_satisfied(t_prev: f64, d_prev: f64, t_next: f64, cfg: &TimingConfig) -> bool {
    (t_prev + d_prev) * (1.0 + cfg.delta_max) <= t_next * (1.0 - cfg.delta_max)
}

/// Slot length sized for `x` devices: long enough for the collision slot
/// (frames plus guess frame) and for a full bitmap round (`x` bitmaps,
/// guard intervals, and the tail guess frame).
pub fn slot_duration(x: u32, cfg: &TimingConfig) -> f64 {
    debug_assert!(x >= 1);
    let bitmaps = cfg.d_bitmap * f64::from(x) + cfg.gap * f64::from(x - 1) + cfg.d_gw;
    (cfg.d_ed + cfg.d_gw).max(bitmaps)
}

/// Earliest start of a device's next bitmap given its previous bitmap and
/// the first gateway frame, both spaced by the duty factor.
pub fn subsequent_bitmap_start(
    t_prev_bitmap: f64,
    d_prev_bitmap: f64,
    t_gw: f64,
    cfg: &TimingConfig,
) -> f64 {
    let own = t_prev_bitmap + cfg.duty_factor * d_prev_bitmap;
    let gw = t_gw + cfg.duty_factor * cfg.d_gw;
    own.max(gw)
}

/// Earliest start of a device's next data frame after one sent at
/// `t_prev_frame`.
pub fn frame_retransmission_start(t_prev_frame: f64, cfg: &TimingConfig) -> f64 {
    debug_assert!(t_prev_frame >= 0.0);
    t_prev_frame + cfg.duty_factor * cfg.d_ed
}

/// Whether a data frame dropped onto a slot carrying `y` bitmaps is long
/// enough to span all of them.
pub fn bitmap_frame_collision(y: u32, cfg: &TimingConfig) -> bool {
    debug_assert!(y >= 1);
    cfg.d_ed >= f64::from(y) * cfg.d_bitmap + f64::from(y - 1) * cfg.gap
}

/// Start time of the final slot for `x` devices; the schedule horizon.
pub fn last_slot_start(x: u32, cfg: &TimingConfig) -> f64 {
    slot_duration(x, cfg) * f64::from(cfg.nmaxslots - 1)
}
