//! Step through the three-device collision by hand, printing the gateway's
//! knowledge after every round: what it observed, what it guessed, and which
//! cells each bitmap pinned down.
//!
//! ```text
//! cargo run --example replay_walkthrough
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synclora::decoder::{self, GuessStrategy};
use synclora::phy;
use synclora::replay;

fn cells(p: &decoder::PartialFrame) -> String {
    p.cells
        .iter()
        .map(|c| match c {
            Some(v) => v.to_string(),
            None => "?".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() {
    let frames = replay::demo_frames();
    println!("three devices transmit 3-symbol frames in the same slot:");
    for f in &frames {
        println!("  ED{}  {:?}", f.ed_id, f.symbols);
    }

    let observation = phy::superpose(&frames).expect("equal-length frames");
    println!("\ngateway sees only the per-position symbol sets:");
    for (j, set) in observation.sets.iter().enumerate() {
        println!("  position {j}: {set:?}");
    }

    let script: Vec<Vec<u16>> = replay::SEQUENCE_A.iter().map(|r| r.to_vec()).collect();
    let strategy = GuessStrategy::Scripted(script);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut state = decoder::init_state(observation, &[1, 2, 3]).expect("well-formed observation");

    println!("\nsingleton positions fill in before any bitmap is sent:");
    for p in &state.partials {
        println!("  ED{}  [{}]", p.ed_id, cells(p));
    }

    while !state.is_complete() {
        let (guess, bitmaps) = decoder::decode_round(&mut state, &strategy, &mut rng, |g, ed| {
            let frame = &frames[(ed - 1) as usize];
            phy::make_bitmap(frame, &g.symbols, g.round)
        })
        .expect("the scripted sequence decodes this collision");

        println!(
            "\nround {}: guess {:?} sent to devices {:?}",
            guess.round, guess.symbols, guess.solicited
        );
        for b in &bitmaps {
            let bits: String = b.bits.iter().map(|&x| if x { '1' } else { '0' }).collect();
            println!("  ED{} replies {bits}", b.ed_id);
        }
        for p in &state.partials {
            println!(
                "  ED{}  [{}]  ({} open)",
                p.ed_id,
                cells(p),
                p.wildcard_count()
            );
        }
    }

    println!("\nall frames recovered after {} rounds", state.round);
}
