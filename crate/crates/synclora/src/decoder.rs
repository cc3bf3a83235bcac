//! The guess / bitmap / elimination decoding engine.
//!
//! Starting from a superposed observation the gateway maintains one partial
//! frame per device, a grid of known symbols and wildcards. Each round it
//! broadcasts a guess frame (one candidate per position, drawn from the
//! observed sets) and solicits bitmaps from the devices that still carry
//! wildcards. A set bit pins the device's symbol to the guess; a cleared bit
//! over a two-value set pins it to the other value; and once all but one
//! device are known at a position, the leftover observed value (if any) is
//! assigned by elimination.
//!
//! This module is timeless: scheduling, airtime, and energy live in `sim`.
//! Soundness holds for truthful bitmaps regardless of guessing strategy; the
//! strategy only changes how many rounds and bitmaps are spent.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phy::{make_bitmap, superpose, Bitmap, Frame, SuperposedObservation};

/// What the gateway knows about one device's frame: a known symbol or a
/// wildcard per position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialFrame {
    pub ed_id: u32,
    pub cells: Vec<Option<u16>>,
}

impl PartialFrame {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.is_some())
    }

    pub fn wildcard_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }
}

/// A gateway broadcast: the guessed symbol per position and the ordered list
/// of device ids asked to reply with bitmaps this round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuessFrame {
    pub symbols: Vec<u16>,
    pub solicited: Vec<u32>,
    pub round: u32,
}

/// How the gateway picks the next guess symbol at each position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuessStrategy {
    /// Uniformly random among the observed values not guessed yet at that
    /// position.
    RandomUnsent,
    /// Smallest observed value not guessed yet at that position.
    FirstUnsent,
    /// Fixed per-round symbol vectors, mainly for walkthroughs and tests.
    Scripted(Vec<Vec<u16>>),
}

/// Gateway-side decoding state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecoderState {
    pub observation: SuperposedObservation,
    pub partials: Vec<PartialFrame>,
    /// Values already guessed per position; `next_guess` avoids repeats
    /// until a position's observed set is exhausted.
    pub guessed_history: Vec<BTreeSet<u16>>,
    /// Rounds completed (0 before the first guess frame).
    pub round: u32,
}

impl DecoderState {
    pub fn is_complete(&self) -> bool {
        self.partials.iter().all(PartialFrame::is_complete)
    }

    /// Ruled-in-but-unassigned values at position `j`: observed values not
    /// yet pinned to any device there.
    fn remaining_at(&self, j: usize) -> BTreeSet<u16> {
        let mut rem = self.observation.sets[j].clone();
        for p in &self.partials {
            if let Some(v) = p.cells[j] {
                rem.remove(&v);
            }
        }
        rem
    }

    fn partial_mut(&mut self, ed_id: u32) -> Option<&mut PartialFrame> {
        self.partials.iter_mut().find(|p| p.ed_id == ed_id)
    }
}

/// Everything `decode` learned: the reconstructed frames plus the effort it
/// took.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub decoded: Vec<Frame>,
    pub rounds: u32,
    /// Bitmaps transmitted per device, in `decoded` order.
    pub bitmaps_sent: Vec<u32>,
    pub guesses: Vec<GuessFrame>,
}

/// Build the initial state for a set of colliding devices.
///
/// Positions whose observed set is a singleton are filled in immediately for
/// every device; no bitmap can add anything there.
pub fn init_state(observation: SuperposedObservation, ed_ids: &[u32]) -> Result<DecoderState> {
    if ed_ids.len() < 2 {
        return Err(Error::invalid_arg(
            "collision decoding needs at least two devices",
        ));
    }
    let mut ids = ed_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != ed_ids.len() {
        return Err(Error::invalid_arg("duplicate device ids"));
    }
    if observation.sets.is_empty() {
        return Err(Error::invalid_arg("observation has no symbol positions"));
    }
    if observation.sets.iter().any(BTreeSet::is_empty) {
        return Err(Error::invalid_arg("observation has an empty symbol set"));
    }
    let cells: Vec<Option<u16>> = observation
        .sets
        .iter()
        .map(|s| {
            if s.len() == 1 {
                s.first().copied()
            } else {
                None
            }
        })
        .collect();
    let n = observation.sets.len();
    Ok(DecoderState {
        observation,
        partials: ids
            .into_iter()
            .map(|ed_id| PartialFrame {
                ed_id,
                cells: cells.clone(),
            })
            .collect(),
        guessed_history: vec![BTreeSet::new(); n],
        round: 0,
    })
}

/// Pick the next guess frame, record it in the history, and advance the
/// round counter.
///
/// Solicitation covers every device whose partial still has wildcards,
/// in ascending id order. With exactly two devices a single bitmap settles
/// both frames, so only the lowest-id undecoded device is asked.
pub fn next_guess<R: Rng + ?Sized>(
    state: &mut DecoderState,
    strategy: &GuessStrategy,
    rng: &mut R,
) -> Result<GuessFrame> {
    if state.is_complete() {
        return Err(Error::InvalidState("every frame is already decoded".into()));
    }
    let n = state.observation.n_positions();
    let mut symbols = Vec::with_capacity(n);
    for j in 0..n {
        let set = &state.observation.sets[j];
        let unsent: Vec<u16> = set
            .iter()
            .copied()
            .filter(|v| !state.guessed_history[j].contains(v))
            .collect();
        let sym = match strategy {
            GuessStrategy::Scripted(script) => {
                let Some(row) = script.get(state.round as usize) else {
                    return Err(Error::InvalidState(format!(
                        "script exhausted after {} rounds with frames still undecoded",
                        state.round
                    )));
                };
                if row.len() != n {
                    return Err(Error::invalid_arg(format!(
                        "scripted guess {} has {} symbols, observation has {}",
                        state.round + 1,
                        row.len(),
                        n
                    )));
                }
                let v = row[j];
                if !set.contains(&v) {
                    return Err(Error::invalid_arg(format!(
                        "scripted guess symbol {v} at position {j} was never observed"
                    )));
                }
                v
            }
            _ if unsent.is_empty() => {
                // Observed set exhausted; repeat the smallest value rather
                // than leave the position unanswerable.
                *state.guessed_history[j].first().expect("history non-empty")
            }
            GuessStrategy::FirstUnsent => unsent[0],
            GuessStrategy::RandomUnsent => unsent[rng.random_range(0..unsent.len())],
        };
        symbols.push(sym);
    }
    for (j, &v) in symbols.iter().enumerate() {
        state.guessed_history[j].insert(v);
    }
    let undecoded: Vec<u32> = state
        .partials
        .iter()
        .filter(|p| !p.is_complete())
        .map(|p| p.ed_id)
        .collect();
    let solicited = if state.partials.len() == 2 {
        vec![undecoded[0]]
    } else {
        undecoded
    };
    state.round += 1;
    Ok(GuessFrame {
        symbols,
        solicited,
        round: state.round,
    })
}

/// Fold one device's agreement bitmap into its partial frame.
///
/// A set bit pins the cell to the guess. A cleared bit over a two-value
/// observed set pins it to the other value. Bits that contradict an already
/// known cell mean the bitmap cannot be truthful.
pub fn apply_bitmap(state: &mut DecoderState, bitmap: &Bitmap, guess: &GuessFrame) -> Result<()> {
    let n = state.observation.n_positions();
    if bitmap.bits.len() != n || guess.symbols.len() != n {
        return Err(Error::invalid_arg(
            "bitmap, guess, and observation lengths differ",
        ));
    }
    if bitmap.round != guess.round {
        return Err(Error::invalid_arg(format!(
            "bitmap answers round {} but guess is round {}",
            bitmap.round, guess.round
        )));
    }
    let sets = state.observation.sets.clone();
    let Some(partial) = state.partial_mut(bitmap.ed_id) else {
        return Err(Error::invalid_arg(format!(
            "bitmap from unknown device ED{}",
            bitmap.ed_id
        )));
    };
    // validate every bit before assigning anything, so a rejected bitmap
    // leaves the partial untouched
    for j in 0..n {
        let g = guess.symbols[j];
        match (bitmap.bits[j], partial.cells[j]) {
            (true, Some(v)) if v != g => {
                return Err(Error::InconsistentBitmap(format!(
                    "ED{} agrees with {} at position {j} but is known to hold {}",
                    bitmap.ed_id, g, v
                )));
            }
            (false, Some(v)) if v == g => {
                return Err(Error::InconsistentBitmap(format!(
                    "ED{} denies {} at position {j} but is known to hold it",
                    bitmap.ed_id, g
                )));
            }
            _ => {}
        }
    }
    for (j, cell) in partial.cells.iter_mut().enumerate() {
        let g = guess.symbols[j];
        match (bitmap.bits[j], *cell) {
            (true, None) => *cell = Some(g),
            (false, None) if sets[j].len() == 2 => {
                // the guess always comes from the observed set, so the
                // other member exists
                *cell = sets[j].iter().copied().find(|&v| v != g);
            }
            _ => {}
        }
    }
    Ok(())
}

/// Run set elimination over every position: if exactly one device is still
/// unknown somewhere and exactly one observed value is unassigned there, the
/// two must match.
///
/// With one unknown device the unassigned values can never number more than
/// one (every observed value was transmitted by somebody); zero happens when
/// the unknown device duplicates a neighbour's symbol, and the position has
/// to wait for a bitmap instead.
pub fn eliminate(state: &mut DecoderState) -> Result<()> {
    for j in 0..state.observation.n_positions() {
        let unknown: Vec<usize> = state
            .partials
            .iter()
            .enumerate()
            .filter(|(_, p)| p.cells[j].is_none())
            .map(|(i, _)| i)
            .collect();
        if unknown.len() != 1 {
            continue;
        }
        let rem = state.remaining_at(j);
        if rem.len() > 1 {
            return Err(Error::Internal(format!(
                "{} unassigned values at position {j} with a single unknown device",
                rem.len()
            )));
        }
        if let Some(&v) = rem.first() {
            state.partials[unknown[0]].cells[j] = Some(v);
        }
    }
    Ok(())
}

/// One full protocol round: pick a guess, collect a bitmap from every
/// solicited device via `reply`, fold them in, and eliminate.
///
/// `reply` stands in for the radio path back from a device; simulations pass
/// a closure that builds the truthful bitmap from the device's real frame.
pub fn decode_round<R, F>(
    state: &mut DecoderState,
    strategy: &GuessStrategy,
    rng: &mut R,
    mut reply: F,
) -> Result<(GuessFrame, Vec<Bitmap>)>
where
    R: Rng + ?Sized,
    F: FnMut(&GuessFrame, u32) -> Result<Bitmap>,
{
    let guess = next_guess(state, strategy, rng)?;
    let mut bitmaps = Vec::with_capacity(guess.solicited.len());
    for &ed_id in &guess.solicited {
        let bm = reply(&guess, ed_id)?;
        if bm.ed_id != ed_id {
            return Err(Error::invalid_arg(format!(
                "asked ED{ed_id} but the bitmap names ED{}",
                bm.ed_id
            )));
        }
        apply_bitmap(state, &bm, &guess)?;
        bitmaps.push(bm);
    }
    eliminate(state)?;
    Ok((guess, bitmaps))
}

/// Decode a full collision of `true_frames` with truthful bitmap replies.
///
/// The observation must match the frames; rounds are bounded by the largest
/// observed set size, which the engine verifies as it goes.
pub fn decode<R: Rng + ?Sized>(
    observation: SuperposedObservation,
    true_frames: &[Frame],
    strategy: &GuessStrategy,
    rng: &mut R,
) -> Result<DecodeResult> {
    if superpose(true_frames)? != observation {
        return Err(Error::invalid_arg(
            "observation does not match the supplied frames",
        ));
    }
    let ids: Vec<u32> = true_frames.iter().map(|f| f.ed_id).collect();
    let mut state = init_state(observation, &ids)?;
    let round_limit = state.observation.max_set_size() as u32;
    let mut guesses = Vec::new();
    let mut bitmaps_per_device = vec![0u32; state.partials.len()];

    while !state.is_complete() {
        if state.round >= round_limit {
            return Err(Error::Internal(format!(
                "undecoded frames after {round_limit} rounds; the bound says this cannot happen"
            )));
        }
        let (guess, bitmaps) = decode_round(&mut state, strategy, rng, |g, ed_id| {
            let f = true_frames
                .iter()
                .find(|f| f.ed_id == ed_id)
                .expect("solicited ids come from the frame set");
            make_bitmap(f, &g.symbols, g.round)
        })?;
        for bm in &bitmaps {
            let idx = state
                .partials
                .iter()
                .position(|p| p.ed_id == bm.ed_id)
                .expect("bitmap from a known device");
            bitmaps_per_device[idx] += 1;
        }
        guesses.push(guess);
    }

    let decoded: Vec<Frame> = state
        .partials
        .iter()
        .map(|p| {
            let src = true_frames
                .iter()
                .find(|f| f.ed_id == p.ed_id)
                .expect("partials mirror the frame set");
            Frame {
                ed_id: p.ed_id,
                symbols: p.cells.iter().map(|c| c.expect("complete")).collect(),
                payload_bytes: src.payload_bytes,
            }
        })
        .collect();
    for d in &decoded {
        let src = true_frames.iter().find(|f| f.ed_id == d.ed_id).unwrap();
        if d.symbols != src.symbols {
            return Err(Error::Internal(format!(
                "ED{} decoded to the wrong symbols",
                d.ed_id
            )));
        }
    }
    Ok(DecodeResult {
        decoded,
        rounds: state.round,
        bitmaps_sent: bitmaps_per_device,
        guesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frame(id: u32, symbols: &[u16]) -> Frame {
        Frame {
            ed_id: id,
            symbols: symbols.to_vec(),
            payload_bytes: symbols.len() as u32,
        }
    }

    /// The three-device collision used across the crate docs.
    fn demo_frames() -> Vec<Frame> {
        vec![
            frame(1, &[64, 32, 32]),
            frame(2, &[96, 0, 32]),
            frame(3, &[96, 64, 32]),
        ]
    }

    fn demo_state() -> DecoderState {
        let frames = demo_frames();
        init_state(superpose(&frames).unwrap(), &[1, 2, 3]).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn init_fills_singleton_positions() {
        let st = demo_state();
        for p in &st.partials {
            assert_eq!(p.cells, vec![None, None, Some(32)]);
        }
        assert_eq!(st.round, 0);
    }

    #[test]
    fn init_rejects_degenerate_inputs() {
        let obs = superpose(&demo_frames()).unwrap();
        assert!(init_state(obs.clone(), &[1]).is_err());
        assert!(init_state(obs.clone(), &[1, 1]).is_err());
        assert!(init_state(SuperposedObservation { sets: vec![] }, &[1, 2]).is_err());
    }

    #[test]
    fn two_devices_solicit_only_the_lowest_id() {
        let frames = vec![frame(4, &[10, 20]), frame(9, &[11, 20])];
        let mut st = init_state(superpose(&frames).unwrap(), &[4, 9]).unwrap();
        let g = next_guess(&mut st, &GuessStrategy::FirstUnsent, &mut rng()).unwrap();
        assert_eq!(g.solicited, vec![4]);
    }

    #[test]
    fn three_or_more_solicit_every_wildcard_bearer() {
        let mut st = demo_state();
        let g = next_guess(&mut st, &GuessStrategy::FirstUnsent, &mut rng()).unwrap();
        assert_eq!(g.solicited, vec![1, 2, 3]);
        assert_eq!(g.round, 1);
    }

    #[test]
    fn first_unsent_walks_the_sets_in_order_and_reuses_when_exhausted() {
        let mut st = demo_state();
        let s = GuessStrategy::FirstUnsent;
        let g1 = next_guess(&mut st, &s, &mut rng()).unwrap();
        assert_eq!(g1.symbols, vec![64, 0, 32]);
        let g2 = next_guess(&mut st, &s, &mut rng()).unwrap();
        assert_eq!(g2.symbols, vec![96, 32, 32]); // position 3 reuses its only value
        let g3 = next_guess(&mut st, &s, &mut rng()).unwrap();
        assert_eq!(g3.symbols, vec![64, 64, 32]); // position 1 exhausted, back to smallest
    }

    #[test]
    fn random_unsent_only_picks_unguessed_observed_values() {
        let mut st = demo_state();
        let mut r = rng();
        let g1 = next_guess(&mut st, &GuessStrategy::RandomUnsent, &mut r).unwrap();
        let g2 = next_guess(&mut st, &GuessStrategy::RandomUnsent, &mut r).unwrap();
        for (j, set) in st.observation.sets.iter().enumerate() {
            assert!(set.contains(&g1.symbols[j]));
            assert!(set.contains(&g2.symbols[j]));
            if set.len() >= 2 {
                assert_ne!(g1.symbols[j], g2.symbols[j], "no repeat before exhaustion");
            }
        }
    }

    #[test]
    fn scripted_guesses_are_validated() {
        let mut st = demo_state();
        let bad_len = GuessStrategy::Scripted(vec![vec![64, 0]]);
        assert!(matches!(
            next_guess(&mut st, &bad_len, &mut rng()),
            Err(Error::InvalidArgument(_))
        ));
        let unobserved = GuessStrategy::Scripted(vec![vec![7, 0, 32]]);
        assert!(matches!(
            next_guess(&mut st, &unobserved, &mut rng()),
            Err(Error::InvalidArgument(_))
        ));
        let empty = GuessStrategy::Scripted(vec![]);
        assert!(matches!(
            next_guess(&mut st, &empty, &mut rng()),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn set_bits_pin_the_guess_and_cleared_bits_use_pairs() {
        let mut st = demo_state();
        let guess = next_guess(
            &mut st,
            &GuessStrategy::Scripted(vec![vec![64, 0, 32]]),
            &mut rng(),
        )
        .unwrap();
        // ED2 denies 64 over the pair {64, 96} and agrees with 0
        let bm2 = make_bitmap(&demo_frames()[1], &guess.symbols, 1).unwrap();
        apply_bitmap(&mut st, &bm2, &guess).unwrap();
        let p2 = &st.partials[1];
        assert_eq!(p2.cells, vec![Some(96), Some(0), Some(32)]);
        assert!(p2.is_complete());
        // ED1 agrees at position 1; position 2 has three values, so a
        // cleared bit alone decides nothing
        let bm1 = make_bitmap(&demo_frames()[0], &guess.symbols, 1).unwrap();
        apply_bitmap(&mut st, &bm1, &guess).unwrap();
        assert_eq!(st.partials[0].cells, vec![Some(64), None, Some(32)]);
    }

    #[test]
    fn contradictory_bitmaps_are_rejected() {
        let mut st = demo_state();
        let guess = next_guess(
            &mut st,
            &GuessStrategy::Scripted(vec![vec![64, 0, 32]]),
            &mut rng(),
        )
        .unwrap();
        let lying_deny = Bitmap {
            ed_id: 1,
            round: 1,
            bits: vec![true, false, false], // denies the singleton it must hold
        };
        assert!(matches!(
            apply_bitmap(&mut st, &lying_deny, &guess),
            Err(Error::InconsistentBitmap(_))
        ));
        let lying_agree = Bitmap {
            ed_id: 2,
            round: 1,
            bits: vec![true, true, true],
        };
        // ED2 cannot agree with 64 after its cell was pinned to 96
        let truthful = make_bitmap(&demo_frames()[1], &guess.symbols, 1).unwrap();
        apply_bitmap(&mut st, &truthful, &guess).unwrap();
        assert!(matches!(
            apply_bitmap(&mut st, &lying_agree, &guess),
            Err(Error::InconsistentBitmap(_))
        ));
    }

    #[test]
    fn elimination_assigns_the_single_leftover_value() {
        let frames = demo_frames();
        let mut st = init_state(superpose(&frames).unwrap(), &[1, 2, 3]).unwrap();
        st.partials[0].cells[1] = Some(32);
        st.partials[1].cells[1] = Some(0);
        eliminate(&mut st).unwrap();
        assert_eq!(st.partials[2].cells[1], Some(64));
    }

    #[test]
    fn elimination_waits_when_the_leftover_is_ambiguous() {
        // three devices, two of them sharing a value the third also holds:
        // one unknown device but zero unassigned values
        let frames = vec![frame(1, &[5, 1]), frame(2, &[6, 2]), frame(3, &[5, 3])];
        let mut st = init_state(superpose(&frames).unwrap(), &[1, 2, 3]).unwrap();
        st.partials[0].cells[0] = Some(5);
        st.partials[1].cells[0] = Some(6);
        eliminate(&mut st).unwrap();
        assert_eq!(
            st.partials[2].cells[0], None,
            "5 or a duplicate 6? undecidable"
        );
    }

    #[test]
    fn walkthrough_slow_script_takes_three_rounds() {
        let frames = demo_frames();
        let script =
            GuessStrategy::Scripted(vec![vec![64, 0, 32], vec![96, 0, 32], vec![96, 32, 32]]);
        let res = decode(superpose(&frames).unwrap(), &frames, &script, &mut rng()).unwrap();
        assert_eq!(res.rounds, 3);
        assert_eq!(res.bitmaps_sent, vec![3, 1, 3]);
        assert_eq!(res.decoded, frames);
        assert_eq!(
            res.guesses[1].solicited,
            vec![1, 3],
            "ED2 done after round 1"
        );
    }

    #[test]
    fn walkthrough_fast_script_takes_two_rounds() {
        let frames = demo_frames();
        let script = GuessStrategy::Scripted(vec![vec![64, 0, 32], vec![96, 32, 32]]);
        let res = decode(superpose(&frames).unwrap(), &frames, &script, &mut rng()).unwrap();
        assert_eq!(res.rounds, 2);
        assert_eq!(res.bitmaps_sent, vec![2, 1, 2]);
        assert_eq!(res.decoded, frames);
    }

    #[test]
    fn identical_frames_decode_without_any_round() {
        let frames = vec![frame(1, &[9, 9, 9]), frame(2, &[9, 9, 9])];
        let res = decode(
            superpose(&frames).unwrap(),
            &frames,
            &GuessStrategy::FirstUnsent,
            &mut rng(),
        )
        .unwrap();
        assert_eq!(res.rounds, 0);
        assert_eq!(res.bitmaps_sent, vec![0, 0]);
    }

    #[test]
    fn decode_checks_observation_consistency() {
        let frames = demo_frames();
        let other = superpose(&[
            frame(1, &[1, 2, 3]),
            frame(2, &[4, 5, 6]),
            frame(3, &[7, 8, 9]),
        ])
        .unwrap();
        assert!(decode(other, &frames, &GuessStrategy::FirstUnsent, &mut rng()).is_err());
    }
}
