//! Parse a METAR, print its plain-language decoding and flight category.
//!
//!     cargo run --example decode_metar -- "KHAF 142135Z AUTO 18005KT 5SM -BR FEW010 BKN020 18/16 A2999 RMK AO2"

use ctaf::metar::{decode_metar, emit_metar, flight_category, parse_metar};

fn main() -> anyhow::Result<()> {
    let raw = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "KHAF 142135Z AUTO 18005KT 5SM -BR FEW010 BKN020 18/16 A2999 RMK AO2".into());
    let m = parse_metar(&raw)?;
    println!("{}", emit_metar(&m));
    println!("{:?}", flight_category(&m));
    println!("{}", decode_metar(&m));
    Ok(())
}
