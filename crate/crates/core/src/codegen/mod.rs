//! C/A spreading codes, LNAV navigation message and symbol composition.

mod ca;
mod lnav;

pub use ca::{ca_code, SpreadingCode, G2_PHASE_TAPS};
pub use lnav::{
    assemble_ephemeris, build_nav_message, decode_subframe_words, encode_subframes, parity_check, parity_encode,
    quantize_ephemeris, quantize_klobuchar, subframe_id_at, DecodedSubframe, NavMessage, Sf1, Sf2, Sf3, SubframeData,
    PREAMBLE, SUBFRAME_BITS,
};

/// Product of the data bit, code chip and optional secondary chip (XOR in the +-1 domain).
pub fn spread_symbol(d_bit: i8, chip: i8, secondary_chip: Option<i8>) -> i8 {
    d_bit * chip * secondary_chip.unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_symbol_table() {
        assert_eq!(spread_symbol(1, 1, None), 1);
        assert_eq!(spread_symbol(-1, 1, None), -1);
        assert_eq!(spread_symbol(-1, -1, Some(-1)), -1);
        assert_eq!(spread_symbol(-1, -1, None), 1);
    }
}
