use serde::{Deserialize, Serialize};

use crate::codegen::{assemble_ephemeris, decode_subframe_words, Sf1, Sf2, Sf3, SubframeData, PREAMBLE, SUBFRAME_BITS};
use crate::constants::SECONDS_PER_WEEK;
use crate::receiver::NavBit;
use crate::scenario::{BroadcastEphemeris, KlobucharCoeffs};

const PERIODS_PER_BIT: i64 = 20;

/// Transmit time of a code period, established from a decoded subframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowAnchor {
    /// Code period at which the subframe starts.
    pub period: i64,
    /// Transmit time of that period, seconds of week.
    pub tow: f64,
    /// Data polarity inverted relative to the transmitted bits.
    pub inverted: bool,
}

/// Outcome of a subframe decode attempt, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeEvent {
    pub prn: u8,
    pub period: i64,
    pub subframe_id: u8,
    pub tow: f64,
    pub inverted: bool,
    pub ok: bool,
    pub message: String,
}

/// Streaming LNAV decoder for one satellite.
#[derive(Debug, Clone)]
pub struct NavDecoder {
    pub prn: u8,
    week_hint: u32,
    bits: Vec<u8>,
    first_period: i64,
    sf1: Option<Sf1>,
    sf2: Option<Sf2>,
    sf3: Option<Sf3>,
    pub anchor: Option<TowAnchor>,
    pub ephemeris: Option<BroadcastEphemeris>,
    pub iono: Option<KlobucharCoeffs>,
}

impl NavDecoder {
    pub fn new(prn: u8, week_hint: u32) -> Self {
        NavDecoder {
            prn,
            week_hint,
            bits: Vec::new(),
            first_period: 0,
            sf1: None,
            sf2: None,
            sf3: None,
            anchor: None,
            ephemeris: None,
            iono: None,
        }
    }

    /// Adds one bit and returns any decode events it triggered.
    pub fn push(&mut self, bit: NavBit) -> Vec<DecodeEvent> {
        let expected = self.first_period + PERIODS_PER_BIT * self.bits.len() as i64;
        if self.bits.is_empty() || bit.period != expected {
            self.bits.clear();
            self.first_period = bit.period;
        }
        self.bits.push(bit.value);
        let mut events = Vec::new();
        while self.bits.len() >= SUBFRAME_BITS + 2 {
            let head = &self.bits[2..10];
            let upright = head == PREAMBLE;
            let inverted = head.iter().zip(PREAMBLE.iter()).all(|(a, b)| a != b);
            if upright || inverted {
                let period = self.first_period + 2 * PERIODS_PER_BIT;
                match decode_subframe_words(&self.bits[2..2 + SUBFRAME_BITS], self.bits[0], self.bits[1]) {
                    Ok(sf) => {
                        let tow = (6.0 * sf.tow_count as f64 - 6.0).rem_euclid(SECONDS_PER_WEEK);
                        self.anchor = Some(TowAnchor { period, tow, inverted });
                        self.store(sf.data);
                        events.push(DecodeEvent {
                            prn: self.prn,
                            period,
                            subframe_id: sf.id,
                            tow,
                            inverted,
                            ok: true,
                            message: String::new(),
                        });
                        self.drop_bits(SUBFRAME_BITS);
                        continue;
                    }
                    Err(e) => events.push(DecodeEvent {
                        prn: self.prn,
                        period,
                        subframe_id: 0,
                        tow: f64::NAN,
                        inverted,
                        ok: false,
                        message: e.to_string(),
                    }),
                }
            }
            self.drop_bits(1);
        }
        events
    }

    fn drop_bits(&mut self, n: usize) {
        self.bits.drain(..n);
        self.first_period += PERIODS_PER_BIT * n as i64;
    }

    fn store(&mut self, data: SubframeData) {
        match data {
            SubframeData::Sf1(s) => self.sf1 = Some(s),
            SubframeData::Sf2(s) => self.sf2 = Some(s),
            SubframeData::Sf3(s) => self.sf3 = Some(s),
            SubframeData::Iono(k) => self.iono = Some(k),
            SubframeData::Other { .. } => {}
        }
        if let (Some(a), Some(b), Some(c)) = (&self.sf1, &self.sf2, &self.sf3) {
            if let Ok(eph) = assemble_ephemeris(self.prn, a, b, c, self.week_hint) {
                self.ephemeris = Some(eph);
            }
        }
    }
}

/// Decodes a complete bit stream (bit `k` starting at code period `20 k`).
pub fn decode_subframes(prn: u8, bits: &[u8], week_hint: u32) -> (NavDecoder, Vec<DecodeEvent>) {
    let mut dec = NavDecoder::new(prn, week_hint);
    let mut events = Vec::new();
    for (k, &value) in bits.iter().enumerate() {
        events.extend(dec.push(NavBit { prn, period: PERIODS_PER_BIT * k as i64, value }));
    }
    (dec, events)
}
