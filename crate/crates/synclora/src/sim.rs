//! Seeded discrete-event simulation of both protocols.
//!
//! Each replication starts from the same premise: `n_devices` synchronized
//! end-devices transmit their frames simultaneously at t = 0 and the run
//! plays out one recovery strategy.
//!
//! * Collaborative decoding: the gateway answers the collision with a guess
//!   frame, devices reply with agreement bitmaps round by round on the slot
//!   grid, and every frame is always recovered. Bitmap rounds respect
//!   per-device duty spacing and wait out the gateway's own duty window
//!   after its first frame. An optional late interfering frame can garble a
//!   slot's bitmaps, which are then resent in the following slot while the
//!   interferer backs off a full duty period.
//! * LoRaWAN baseline: every device independently retransmits its whole
//!   frame in one of the next `lorawan_window` duty-eligible slots, up to
//!   `lorawan_max_retx` times; a retransmission survives only if no other
//!   device picked the same slot. Devices get no feedback mid-stream, so the
//!   repetition schedule is blind and a frame is counted from its first
//!   clean copy.
//!
//! Determinism: replication `k` draws from a counter-mode stream derived
//! from `(seed, k)`, so runs are bit-identical and replications are
//! order-independent. Within a replication the draw order is fixed: frame
//! symbols device by device, then per-round randomness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::Serializer;
use serde::Serialize;
use std::fmt;

use crate::decoder::{self, DecoderState, GuessStrategy};
use crate::error::{Error, Result};
use crate::metrics::{self, AggregateReport, EnergyAccounting, EnergyConfig};
use crate::phy::{self, Frame, PayloadModel, SfParams};
use crate::timing::{self, TimingConfig, DEFAULT_DUTY_FACTOR, DEFAULT_GAP_S, DEFAULT_NMAXSLOTS};

pub const DEFAULT_PAYLOAD_BYTES: u32 = 30;
pub const DEFAULT_REPLICATIONS: u32 = 1000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_LORAWAN_WINDOW: u32 = 2;
pub const DEFAULT_LORAWAN_MAX_RETX: u32 = 8;
pub const MIN_DEVICES: u32 = 2;
pub const MAX_DEVICES: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Proposed,
    Lorawan,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Proposed => "proposed",
            Protocol::Lorawan => "lorawan",
        })
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Protocol::Proposed),
            "lorawan" => Ok(Protocol::Lorawan),
            other => Err(Error::invalid_arg(format!(
                "unknown protocol `{other}` (expected proposed or lorawan)"
            ))),
        }
    }
}

/// Guess-picking rule exposed to scenarios; the scripted strategy is for
/// walkthroughs and is not meaningful against randomly drawn frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessRule {
    RandomUnsent,
    FirstUnsent,
}

impl fmt::Display for GuessRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GuessRule::RandomUnsent => "random_unsent",
            GuessRule::FirstUnsent => "first_unsent",
        })
    }
}

impl std::str::FromStr for GuessRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random_unsent" => Ok(GuessRule::RandomUnsent),
            "first_unsent" => Ok(GuessRule::FirstUnsent),
            other => Err(Error::invalid_arg(format!(
                "unknown guess rule `{other}` (expected random_unsent or first_unsent)"
            ))),
        }
    }
}

/// A late data frame dropped onto the bitmap timeline: transmitted at the
/// start of `slot` by an extra device that was not part of the synchronized
/// collision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InterfererSpec {
    pub slot: u32,
    pub device: u32,
}

/// Full description of one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub protocol: Protocol,
    /// Synchronized colliding devices, ids 1..=n_devices.
    pub n_devices: u32,
    pub sf: SfParams,
    pub payload_bytes: u32,
    pub payload_model: PayloadModel,
    pub replications: u32,
    pub seed: u64,
    pub interferer: Option<InterfererSpec>,
    pub lorawan_window: u32,
    pub lorawan_max_retx: u32,
    pub guess: GuessRule,
    pub gap: f64,
    pub delta_max: f64,
    pub nmaxslots: u32,
    pub duty_factor: f64,
    pub energy: EnergyConfig,
    pub energy_accounting: EnergyAccounting,
}

impl Scenario {
    /// A scenario at the experiment defaults: 30-byte frames, 1000
    /// replications, window-2 LoRaWAN with 8 attempts, 30 ns guard gap.
    pub fn new(protocol: Protocol, n_devices: u32, sf: u8) -> Result<Self> {
        let s = Scenario {
            protocol,
            n_devices,
            sf: SfParams::with_sf(sf)?,
            payload_bytes: DEFAULT_PAYLOAD_BYTES,
            payload_model: PayloadModel::Linear,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            interferer: None,
            lorawan_window: DEFAULT_LORAWAN_WINDOW,
            lorawan_max_retx: DEFAULT_LORAWAN_MAX_RETX,
            guess: GuessRule::RandomUnsent,
            gap: DEFAULT_GAP_S,
            delta_max: 0.0,
            nmaxslots: DEFAULT_NMAXSLOTS,
            duty_factor: DEFAULT_DUTY_FACTOR,
            energy: EnergyConfig::default(),
            energy_accounting: EnergyAccounting::WithPreamble,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_DEVICES..=MAX_DEVICES).contains(&self.n_devices) {
            return Err(Error::invalid_arg(format!(
                "device count {} outside {MIN_DEVICES}..={MAX_DEVICES}",
                self.n_devices
            )));
        }
        if self.replications < 1 {
            return Err(Error::invalid_arg("need at least one replication"));
        }
        if self.lorawan_window < 1 || self.lorawan_max_retx < 1 {
            return Err(Error::invalid_arg(
                "LoRaWAN window and retransmission budget must be at least 1",
            ));
        }
        if let Some(i) = self.interferer {
            if i.slot < 1 || i.slot >= self.nmaxslots {
                return Err(Error::invalid_arg(format!(
                    "interferer slot {} must lie in 1..{}",
                    i.slot, self.nmaxslots
                )));
            }
            if i.device >= 1 && i.device <= self.n_devices {
                return Err(Error::invalid_arg(format!(
                    "interferer id {} clashes with a synchronized device",
                    i.device
                )));
            }
            if i.device == 0 {
                return Err(Error::invalid_arg("device ids start at 1"));
            }
        }
        // delegate the radio/timing ranges
        link_geometry(self)?;
        Ok(())
    }
}

/// Who transmitted a logged record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sender {
    Device(u32),
    Gateway,
}

impl Serialize for Sender {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Sender::Device(id) => s.serialize_u32(*id),
            Sender::Gateway => s.serialize_str("gateway"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TxKind {
    DataFrame,
    Bitmap,
    GatewayFrame,
    /// Reserved for timing beacons; the current runners never emit one.
    Beacon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TxOutcome {
    Delivered,
    Collided,
}

/// One transmission on the air, as logged by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionRecord {
    pub device: Sender,
    pub kind: TxKind,
    pub start: f64,
    pub duration: f64,
    /// Slot index on the protocol's grid (slot width differs between
    /// protocols: one bitmap-round slot vs one frame airtime).
    pub slot: u32,
    pub outcome: TxOutcome,
}

impl TransmissionRecord {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Per-device result of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceOutcome {
    pub device: u32,
    pub first_send: f64,
    /// Instant the gateway fully decoded this device's frame; `None` if the
    /// frame was abandoned.
    pub decode_time: Option<f64>,
    /// Data frame transmissions up to the decode (or up to abandonment).
    pub n_frame_tx: u32,
    pub n_bitmap_tx: u32,
    /// Transmit energy spent up to the decode (or abandonment).
    pub energy_joules: f64,
}

impl DeviceOutcome {
    pub fn is_lost(&self) -> bool {
        self.decode_time.is_none()
    }
}

/// Airtimes and symbol counts derived from a scenario's radio parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkGeometry {
    pub timing: TimingConfig,
    pub n_frame_symbols: u32,
    pub n_bitmap_symbols: u32,
    pub bitmap_payload_bytes: u32,
    pub symbol_duration: f64,
}

/// Derive frame/gateway/bitmap airtimes and the slot parameters for a
/// scenario.
pub fn link_geometry(s: &Scenario) -> Result<LinkGeometry> {
    let np = s.energy.n_preamble;
    let n_frame_symbols = phy::payload_symbol_count(s.payload_bytes, s.sf.sf, s.payload_model)?;
    let bitmap_bytes = phy::bitmap_payload_bytes(n_frame_symbols);
    let n_bitmap_symbols = phy::payload_symbol_count(bitmap_bytes, s.sf.sf, s.payload_model)?;
    let timing = TimingConfig::new(
        phy::time_on_air(n_frame_symbols, np, &s.sf),
        phy::gateway_frame_airtime(n_frame_symbols, np, &s.sf),
        phy::time_on_air(n_bitmap_symbols, np, &s.sf),
        s.gap,
        s.delta_max,
        s.nmaxslots,
        s.duty_factor,
    )?;
    Ok(LinkGeometry {
        timing,
        n_frame_symbols,
        n_bitmap_symbols,
        bitmap_payload_bytes: bitmap_bytes,
        symbol_duration: s.sf.symbol_duration(),
    })
}

/// RNG stream for replication `k` of a scenario seeded with `seed`.
/// Streams are independent, so replications can run in any order.
pub fn replication_rng(seed: u64, replication: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(replication) + 1);
    rng
}

/// Run replication `k` of the scenario under its configured protocol.
pub fn run_one(
    s: &Scenario,
    replication: u32,
) -> Result<(Vec<DeviceOutcome>, Vec<TransmissionRecord>)> {
    s.validate()?;
    let mut rng = replication_rng(s.seed, replication);
    match s.protocol {
        Protocol::Proposed => proposed_replication(s, &mut rng),
        Protocol::Lorawan => lorawan_replication(s, &mut rng),
    }
}

/// Single replication of the collaborative decoding protocol (replication
/// stream 0 of the scenario seed).
pub fn run_proposed(s: &Scenario) -> Result<(Vec<DeviceOutcome>, Vec<TransmissionRecord>)> {
    s.validate()?;
    let mut rng = replication_rng(s.seed, 0);
    proposed_replication(s, &mut rng)
}

/// Single replication of the LoRaWAN baseline (replication stream 0 of the
/// scenario seed).
pub fn run_lorawan(s: &Scenario) -> Result<(Vec<DeviceOutcome>, Vec<TransmissionRecord>)> {
    s.validate()?;
    let mut rng = replication_rng(s.seed, 0);
    lorawan_replication(s, &mut rng)
}

/// Closed-form LoRaWAN contention model: with `x` devices each repeating in
/// a window of `w` slots, a given attempt collides with probability
/// `q = 1 - (1 - 1/w)^(x-1)`. Returns (expected retransmissions per device,
/// loss probability) for a budget of `max_retx` attempts.
pub fn lorawan_oracle(x: u32, w: u32, max_retx: u32) -> (f64, f64) {
    let q = 1.0 - (1.0 - 1.0 / f64::from(w)).powi(x as i32 - 1);
    let loss = q.powi(max_retx as i32);
    let mean_retx = (0..max_retx).map(|k| q.powi(k as i32)).sum();
    (mean_retx, loss)
}

fn snap_up_to_slot(t: f64, d_slot: f64) -> f64 {
    (t / d_slot).ceil() * d_slot
}

fn proposed_replication(
    s: &Scenario,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<DeviceOutcome>, Vec<TransmissionRecord>)> {
    let geo = link_geometry(s)?;
    let cfg = &geo.timing;
    let x = s.n_devices;
    let d_slot = timing::slot_duration(x, cfg);
    let horizon = timing::last_slot_start(x, cfg);
    let alphabet = s.sf.alphabet_size();

    let frames: Vec<Frame> = (1..=x)
        .map(|id| Frame {
            ed_id: id,
            symbols: (0..geo.n_frame_symbols)
                .map(|_| rng.random_range(0..alphabet) as u16)
                .collect(),
            payload_bytes: s.payload_bytes,
        })
        .collect();
    let ids: Vec<u32> = (1..=x).collect();
    let mut state = decoder::init_state(phy::superpose(&frames)?, &ids)?;
    let round_limit = state.observation.max_set_size() as u32;
    let strategy = match s.guess {
        GuessRule::RandomUnsent => GuessStrategy::RandomUnsent,
        GuessRule::FirstUnsent => GuessStrategy::FirstUnsent,
    };

    let mut records: Vec<TransmissionRecord> = Vec::new();
    for id in 1..=x {
        records.push(TransmissionRecord {
            device: Sender::Device(id),
            kind: TxKind::DataFrame,
            start: 0.0,
            duration: cfg.d_ed,
            slot: 0,
            outcome: TxOutcome::Collided,
        });
    }

    let g1_start = timing::first_gateway_start(0.0, cfg);
    let obs_ready = g1_start; // frames end; the gateway has its symbol sets

    // index helpers: device id 1..=x maps to slot d-1 in these vectors
    let mut decode_stamp: Vec<Option<f64>> = vec![None; x as usize];
    let mut bitmap_sends: Vec<u32> = vec![0; x as usize];
    let mut last_bitmap_start: Vec<Option<f64>> = vec![None; x as usize];
    for p in &state.partials {
        if p.is_complete() {
            decode_stamp[(p.ed_id - 1) as usize] = Some(obs_ready);
        }
    }

    // the interferer's next (not yet resolved) transmission start
    let mut interferer_pending: Option<f64> =
        s.interferer.map(|i| f64::from(i.slot) * d_slot);
    let interferer_id = s.interferer.map(|i| i.device).unwrap_or(0);

    let mut prev_round_last_end = 0.0f64;
    while !state.is_complete() {
        if state.round >= round_limit {
            return Err(Error::Internal(format!(
                "undecoded frames after {round_limit} rounds; the bound says this cannot happen"
            )));
        }
        let guess = decoder::next_guess(&mut state, &strategy, rng)?;
        let r = guess.round;

        // the guess frame rides at the tail of the previous round's slot
        let g_start = if r == 1 {
            g1_start
        } else {
            prev_round_last_end
        };
        records.push(TransmissionRecord {
            device: Sender::Gateway,
            kind: TxKind::GatewayFrame,
            start: g_start,
            duration: cfg.d_gw,
            slot: (g_start / d_slot) as u32,
            outcome: TxOutcome::Delivered,
        });

        // earliest slot satisfying every solicited device's bitmap duty and
        // the gateway duty window anchored at its first frame
        let block_start = if r == 1 {
            d_slot
        } else {
            let mut bound = g_start + cfg.d_gw;
            for &d in &guess.solicited {
                let per_device = match last_bitmap_start[(d - 1) as usize] {
                    Some(t) => timing::subsequent_bitmap_start(t, cfg.d_bitmap, g1_start, cfg),
                    None => g1_start + cfg.duty_factor * cfg.d_gw,
                };
                bound = bound.max(per_device);
            }
            snap_up_to_slot(bound, d_slot)
        };

        // transmit the round's bitmaps; anything overlapping the interferer
        // frame is garbled on both sides and retried (bitmaps next slot,
        // interferer after a full duty period)
        let mut delivered_end: Vec<f64> = vec![0.0; x as usize];
        let mut round_last_end = 0.0f64;
        let mut awaiting: Vec<(usize, u32)> = guess.solicited.iter().copied().enumerate().collect();
        let mut attempt_start = block_start;
        while !awaiting.is_empty() {
            if attempt_start > horizon {
                return Err(Error::HorizonExceeded {
                    t: attempt_start,
                    horizon,
                });
            }
            let slot_idx = (attempt_start / d_slot).round() as u32;
            let mut interferer_hit = false;
            let mut still_awaiting = Vec::new();
            for &(k, d) in &awaiting {
                let t = timing::bitmap_start(attempt_start, k as u32 + 1, cfg);
                let garbled = interferer_pending
                    .map(|i| t < i + cfg.d_ed && i < t + cfg.d_bitmap)
                    .unwrap_or(false);
                records.push(TransmissionRecord {
                    device: Sender::Device(d),
                    kind: TxKind::Bitmap,
                    start: t,
                    duration: cfg.d_bitmap,
                    slot: slot_idx,
                    outcome: if garbled {
                        TxOutcome::Collided
                    } else {
                        TxOutcome::Delivered
                    },
                });
                bitmap_sends[(d - 1) as usize] += 1;
                last_bitmap_start[(d - 1) as usize] = Some(t);
                if garbled {
                    interferer_hit = true;
                    still_awaiting.push((k, d));
                } else {
                    delivered_end[(d - 1) as usize] = t + cfg.d_bitmap;
                    round_last_end = round_last_end.max(t + cfg.d_bitmap);
                }
            }
            if interferer_hit {
                let i_start = interferer_pending.expect("hit implies a pending frame");
                records.push(TransmissionRecord {
                    device: Sender::Device(interferer_id),
                    kind: TxKind::DataFrame,
                    start: i_start,
                    duration: cfg.d_ed,
                    slot: (i_start / d_slot) as u32,
                    outcome: TxOutcome::Collided,
                });
                let retry =
                    snap_up_to_slot(timing::frame_retransmission_start(i_start, cfg), d_slot);
                if retry > horizon {
                    return Err(Error::HorizonExceeded { t: retry, horizon });
                }
                interferer_pending = Some(retry);
            }
            awaiting = still_awaiting;
            attempt_start += d_slot;
        }

        // gateway folds the round in: agreements as each bitmap arrives,
        // eliminations once the last one is in
        for &d in &guess.solicited {
            let bm = phy::make_bitmap(&frames[(d - 1) as usize], &guess.symbols, r)?;
            decoder::apply_bitmap(&mut state, &bm, &guess)?;
            let di = (d - 1) as usize;
            if decode_stamp[di].is_none() && partial_of(&state, d).is_complete() {
                decode_stamp[di] = Some(delivered_end[di]);
            }
        }
        decoder::eliminate(&mut state)?;
        for p in &state.partials {
            let di = (p.ed_id - 1) as usize;
            if decode_stamp[di].is_none() && p.is_complete() {
                decode_stamp[di] = Some(round_last_end);
            }
        }
        prev_round_last_end = round_last_end;
    }

    // a pending interferer frame that outlived the protocol goes out clean
    if let Some(i_start) = interferer_pending {
        records.push(TransmissionRecord {
            device: Sender::Device(interferer_id),
            kind: TxKind::DataFrame,
            start: i_start,
            duration: cfg.d_ed,
            slot: (i_start / d_slot) as u32,
            outcome: TxOutcome::Delivered,
        });
    }

    let billed_bitmap = match s.energy_accounting {
        EnergyAccounting::WithPreamble => cfg.d_bitmap,
        EnergyAccounting::PayloadOnly => f64::from(geo.n_bitmap_symbols) * geo.symbol_duration,
    };
    let outcomes = (1..=x)
        .map(|d| {
            let di = (d - 1) as usize;
            DeviceOutcome {
                device: d,
                first_send: 0.0,
                decode_time: Some(decode_stamp[di].expect("loop ends only when complete")),
                n_frame_tx: 1,
                n_bitmap_tx: bitmap_sends[di],
                energy_joules: s.energy.p_cons_watts
                    * (cfg.d_ed + f64::from(bitmap_sends[di]) * billed_bitmap),
            }
        })
        .collect();

    records.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok((outcomes, records))
}

fn partial_of(state: &DecoderState, ed_id: u32) -> &crate::decoder::PartialFrame {
    state
        .partials
        .iter()
        .find(|p| p.ed_id == ed_id)
        .expect("device ids are stable")
}

fn lorawan_replication(
    s: &Scenario,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<DeviceOutcome>, Vec<TransmissionRecord>)> {
    let geo = link_geometry(s)?;
    let cfg = &geo.timing;
    let x = s.n_devices as usize;
    let w = s.lorawan_window;
    let max_retx = s.lorawan_max_retx;

    // retransmission rounds share a window base advancing by enough slots
    // that even "last pick then first pick" respects duty spacing
    let advance = (cfg.duty_factor.ceil() as u64) + u64::from(w) - 1;
    let last_slot = u64::from(max_retx) * advance + u64::from(w) - 1;
    if last_slot > u64::from(cfg.nmaxslots) - 1 {
        return Err(Error::HorizonExceeded {
            t: last_slot as f64 * cfg.d_ed,
            horizon: (f64::from(cfg.nmaxslots) - 1.0) * cfg.d_ed,
        });
    }

    let mut records: Vec<TransmissionRecord> = Vec::new();
    for d in 1..=x as u32 {
        records.push(TransmissionRecord {
            device: Sender::Device(d),
            kind: TxKind::DataFrame,
            start: 0.0,
            duration: cfg.d_ed,
            slot: 0,
            outcome: TxOutcome::Collided,
        });
    }

    // first_success[d] = (attempt index, slot) of the first clean copy
    let mut first_success: Vec<Option<(u32, u64)>> = vec![None; x];
    let mut base = 0u64;
    for attempt in 1..=max_retx {
        base += advance;
        let picks: Vec<u64> = (0..x)
            .map(|_| base + u64::from(rng.random_range(0..w)))
            .collect();
        for (di, &pick) in picks.iter().enumerate() {
            let unique = picks.iter().filter(|&&p| p == pick).count() == 1;
            records.push(TransmissionRecord {
                device: Sender::Device(di as u32 + 1),
                kind: TxKind::DataFrame,
                start: pick as f64 * cfg.d_ed,
                duration: cfg.d_ed,
                slot: pick as u32,
                outcome: if unique {
                    TxOutcome::Delivered
                } else {
                    TxOutcome::Collided
                },
            });
            if unique && first_success[di].is_none() {
                first_success[di] = Some((attempt, pick));
            }
        }
    }

    let outcomes = (0..x)
        .map(|di| {
            let (decode_time, attempts) = match first_success[di] {
                Some((attempt, slot)) => (Some(slot as f64 * cfg.d_ed + cfg.d_ed), attempt),
                None => (None, max_retx),
            };
            DeviceOutcome {
                device: di as u32 + 1,
                first_send: 0.0,
                decode_time,
                n_frame_tx: 1 + attempts,
                n_bitmap_tx: 0,
                energy_joules: s.energy.p_cons_watts * f64::from(1 + attempts) * cfg.d_ed,
            }
        })
        .collect();

    records.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok((outcomes, records))
}

/// Aggregated result of `run_replications`: the scenario echoed for
/// provenance plus pooled statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scenario: Scenario,
    pub aggregate: AggregateReport,
}

/// Run every replication of the scenario and pool the outcomes.
pub fn run_replications(s: &Scenario) -> Result<SimReport> {
    s.validate()?;
    let geo = link_geometry(s)?;
    let mut delays = Vec::new();
    let mut energies = Vec::new();
    let mut throughputs = Vec::new();
    let mut frame_txs = Vec::new();
    let mut bitmap_txs = Vec::new();
    let mut rep_loss = Vec::with_capacity(s.replications as usize);
    let mut lost = 0u64;
    let mut total = 0u64;

    for k in 0..s.replications {
        let mut rng = replication_rng(s.seed, k);
        let (outcomes, _) = match s.protocol {
            Protocol::Proposed => proposed_replication(s, &mut rng)?,
            Protocol::Lorawan => lorawan_replication(s, &mut rng)?,
        };
        let mut rep_lost = 0u32;
        for o in &outcomes {
            total += 1;
            if let Some(d) = metrics::delay(o) {
                delays.push(d);
            } else {
                lost += 1;
                rep_lost += 1;
            }
            energies.push(o.energy_joules);
            throughputs.push(metrics::throughput(o, s.payload_bytes));
            frame_txs.push(f64::from(o.n_frame_tx));
            bitmap_txs.push(f64::from(o.n_bitmap_tx));
        }
        rep_loss.push(f64::from(rep_lost) / outcomes.len() as f64);
    }

    let e_bit = metrics::energy_per_bit(geo.n_frame_symbols, s.payload_bytes, s.sf.sf, &s.energy)?;
    let aggregate = AggregateReport {
        n_outcomes: total,
        n_delivered: total - lost,
        mean_delay_s: metrics::mean(&delays),
        std_delay_s: metrics::sample_std(&delays),
        mean_energy_j: metrics::mean(&energies),
        std_energy_j: metrics::sample_std(&energies),
        mean_energy_per_bit_j: e_bit,
        std_energy_per_bit_j: 0.0,
        mean_throughput_bps: metrics::mean(&throughputs),
        std_throughput_bps: metrics::sample_std(&throughputs),
        mean_frame_tx: metrics::mean(&frame_txs),
        std_frame_tx: metrics::sample_std(&frame_txs),
        mean_bitmap_tx: metrics::mean(&bitmap_txs),
        std_bitmap_tx: metrics::sample_std(&bitmap_txs),
        loss_rate: lost as f64 / total as f64,
        std_loss_rate: metrics::sample_std(&rep_loss),
    };
    Ok(SimReport {
        scenario: s.clone(),
        aggregate,
    })
}
