//! Drop a rogue transmitter onto the bitmap slot and watch the protocol
//! absorb it: garbled bitmaps are resent in the next slot, the interferer
//! backs off per its own duty cycle, and everyone still gets through.
//!
//! ```text
//! cargo run --example interferer_rescue
//! ```

use synclora::sim::{self, InterfererSpec, Protocol, Scenario, Sender, TxKind, TxOutcome};

fn main() {
    let mut s = Scenario::new(Protocol::Proposed, 3, 12).unwrap();
    s.replications = 1;
    // an unsynchronized device fires exactly when the first bitmaps are due
    s.interferer = Some(InterfererSpec {
        slot: 1,
        device: 99,
    });
    s.validate().unwrap();

    let (outcomes, records) = sim::run_one(&s, 0).unwrap();

    println!("interferer ED99 transmits a full data frame in slot 1\n");
    for r in &records {
        let sender = match r.device {
            Sender::Device(99) => "ED99 (rogue)".to_string(),
            Sender::Device(id) => format!("ED{id}"),
            Sender::Gateway => "gateway".into(),
        };
        let kind = match r.kind {
            TxKind::DataFrame => "data frame",
            TxKind::Bitmap => "bitmap",
            TxKind::GatewayFrame => "guess frame",
            TxKind::Beacon => "beacon",
        };
        let note = match r.outcome {
            TxOutcome::Collided => "  <- garbled",
            TxOutcome::Delivered => "",
        };
        println!(
            "slot {:>3}  t={:>11.6} s  {sender:<13} {kind}{note}",
            r.slot, r.start
        );
    }

    let collided = records
        .iter()
        .filter(|r| r.outcome == TxOutcome::Collided)
        .count();
    println!("\n{collided} transmissions were garbled, yet no synchronized frame was lost:");
    for o in &outcomes {
        println!(
            "  ED{}: decoded at {:.6} s after {} bitmap transmissions",
            o.device,
            o.decode_time.unwrap(),
            o.n_bitmap_tx
        );
    }
    println!("\nretries push decoding out by whole duty-cycle periods, which is");
    println!("why collided bitmaps cost far more time than extra rounds do.");
}
