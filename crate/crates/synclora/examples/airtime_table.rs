//! Tabulate payload symbol counts and frame airtime across spreading
//! factors, under both payload models.
//!
//! ```text
//! cargo run --example airtime_table
//! ```

use synclora::phy::{self, PayloadModel, SfParams, DEFAULT_PREAMBLE_SYMBOLS};

fn main() {
    for model in [PayloadModel::Linear, PayloadModel::Semtech] {
        println!("payload model: {model}");
        println!(
            "{:>5} {:>3} {:>8} {:>12} {:>12}",
            "bytes", "sf", "symbols", "airtime_ms", "bitmap_ms"
        );
        for bytes in [1u32, 4, 10, 30, 51] {
            for sf in [7u8, 9, 12] {
                let params = SfParams::with_sf(sf).unwrap();
                let n = phy::payload_symbol_count(bytes, sf, model).unwrap();
                let toa = phy::time_on_air(n, DEFAULT_PREAMBLE_SYMBOLS, &params);
                // the ack bitmap carries one bit per frame symbol
                let bmap =
                    phy::bitmap_airtime(n, model, DEFAULT_PREAMBLE_SYMBOLS, &params).unwrap();
                println!(
                    "{bytes:>5} {sf:>3} {n:>8} {:>12.3} {:>12.3}",
                    toa * 1e3,
                    bmap * 1e3
                );
            }
        }
        println!();
    }

    println!("a symbol lasts 2^sf / bandwidth, so each SF step doubles airtime:");
    for sf in phy::MIN_SF..=phy::MAX_SF {
        let params = SfParams::with_sf(sf).unwrap();
        println!(
            "  sf{sf:<2} symbol {:>9.3} ms",
            params.symbol_duration() * 1e3
        );
    }
}
