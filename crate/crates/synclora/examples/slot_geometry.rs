//! Show how the shared slot is sized: it must fit either a data frame plus
//! the gateway's guess, or every solicited bitmap plus the guess, whichever
//! is longer.
//!
//! ```text
//! cargo run --example slot_geometry
//! ```

use synclora::sim::{self, Protocol, Scenario};
use synclora::timing;

fn main() {
    for sf in [7u8, 12] {
        let s = Scenario::new(Protocol::Proposed, 2, sf).unwrap();
        let geo = sim::link_geometry(&s).unwrap();
        let t = &geo.timing;
        println!(
            "sf{sf}, {} byte frames ({} symbols):",
            s.payload_bytes, geo.n_frame_symbols
        );
        println!("  data frame   {:>12.6} s", t.d_ed);
        println!("  guess frame  {:>12.6} s", t.d_gw);
        println!(
            "  bitmap       {:>12.6} s ({} payload bytes, {} symbols)",
            t.d_bitmap, geo.bitmap_payload_bytes, geo.n_bitmap_symbols
        );

        println!(
            "  {:>8} {:>12} {:>10} {:>14}",
            "devices", "slot_s", "filled_by", "horizon_s"
        );
        for x in 2..=8 {
            let slot = timing::slot_duration(x, t);
            let bitmap_leg = f64::from(x) * t.d_bitmap + f64::from(x - 1) * t.gap + t.d_gw;
            let filled_by = if bitmap_leg > t.d_ed + t.d_gw {
                "bitmaps"
            } else {
                "frame"
            };
            println!(
                "  {x:>8} {slot:>12.6} {filled_by:>10} {:>14.3}",
                timing::last_slot_start(x, t)
            );
        }
        println!();
    }

    println!("bitmaps stay short because one bit acknowledges a whole symbol,");
    println!("so the frame leg usually sets the slot width at small payloads.");
}
