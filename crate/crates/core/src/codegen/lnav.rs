//! LNAV subframe encoding, parity and field decoding.
//!
//! Bits are numbered 1..=300 within a subframe. Source data bits are written
//! into the 24 data positions of each 30-bit word; parity is computed with the
//! previous word's last two transmitted bits (D29*, D30*).

use crate::constants::GPS_PI;
use crate::error::{Error, Result};
use crate::scenario::{BroadcastEphemeris, KlobucharCoeffs};

/// TLM preamble 10001011.
pub const PREAMBLE: [u8; 8] = [1, 0, 0, 0, 1, 0, 1, 1];
pub const SUBFRAME_BITS: usize = 300;
const BIT_PERIOD: f64 = 0.02;

type Parts = &'static [(usize, usize)];

fn put(src: &mut [u8; 300], parts: Parts, value: i64) {
    let total: usize = parts.iter().map(|p| p.1).sum();
    let mut bit = total;
    for &(start, len) in parts {
        for k in 0..len {
            bit -= 1;
            src[start - 1 + k] = ((value >> bit) & 1) as u8;
        }
    }
}

fn get(src: &[u8; 300], parts: Parts, signed: bool) -> i64 {
    let mut v: i64 = 0;
    let mut total = 0;
    for &(start, len) in parts {
        for k in 0..len {
            v = (v << 1) | src[start - 1 + k] as i64;
        }
        total += len;
    }
    if signed && (v >> (total - 1)) & 1 == 1 {
        v -= 1 << total;
    }
    v
}

fn q(x: f64, scale: f64) -> i64 {
    (x / scale).round() as i64
}

fn q_sc(x_rad: f64, scale: f64) -> i64 {
    (x_rad / GPS_PI / scale).round() as i64
}

fn p2(e: i32) -> f64 {
    2f64.powi(e)
}

// Subframe 1
const WEEK: Parts = &[(61, 10)];
const L2CODES: Parts = &[(71, 2)];
const URA: Parts = &[(73, 4)];
const HEALTH: Parts = &[(77, 6)];
const IODC: Parts = &[(83, 2), (211, 8)];
const TGD: Parts = &[(197, 8)];
const TOC: Parts = &[(219, 16)];
const AF2: Parts = &[(241, 8)];
const AF1: Parts = &[(249, 16)];
const AF0: Parts = &[(271, 22)];
// Subframe 2
const IODE2: Parts = &[(61, 8)];
const CRS: Parts = &[(69, 16)];
const DN: Parts = &[(91, 16)];
const M0: Parts = &[(107, 8), (121, 24)];
const CUC: Parts = &[(151, 16)];
const ECC: Parts = &[(167, 8), (181, 24)];
const CUS: Parts = &[(211, 16)];
const SQRTA: Parts = &[(227, 8), (241, 24)];
const TOE: Parts = &[(271, 16)];
// Subframe 3
const CIC: Parts = &[(61, 16)];
const OMEGA0: Parts = &[(77, 8), (91, 24)];
const CIS: Parts = &[(121, 16)];
const I0: Parts = &[(137, 8), (151, 24)];
const CRC: Parts = &[(181, 16)];
const OMEGA: Parts = &[(197, 8), (211, 24)];
const OMEGADOT: Parts = &[(241, 24)];
const IODE3: Parts = &[(271, 8)];
const IDOT: Parts = &[(279, 14)];
// Subframes 4 and 5
const DATA_ID: Parts = &[(61, 2)];
const SV_ID: Parts = &[(63, 6)];
const ALPHA: [Parts; 4] = [&[(69, 8)], &[(77, 8)], &[(91, 8)], &[(99, 8)]];
const BETA: [Parts; 4] = [&[(107, 8)], &[(121, 8)], &[(129, 8)], &[(137, 8)]];
const ALPHA_SCALE: [i32; 4] = [-30, -27, -24, -24];
const BETA_SCALE: [i32; 4] = [11, 14, 16, 16];
/// Page carrying the ionosphere and UTC parameters.
const SV_ID_IONO_PAGE: i64 = 56;
const SV_ID_FILLER_PAGE: i64 = 51;
// TLM / HOW
const TOW_COUNT: Parts = &[(31, 17)];
const SUBFRAME_ID: Parts = &[(50, 3)];

/// Computes the six parity bits of a word from its 24 source bits `d[0..24]`.
pub fn parity_encode(d: &[u8], d29s: u8, d30s: u8) -> [u8; 6] {
    let x = |idx: &[usize]| idx.iter().fold(0u8, |acc, &i| acc ^ d[i - 1]);
    [
        d29s ^ x(&[1, 2, 3, 5, 6, 10, 11, 12, 13, 14, 17, 18, 20, 23]),
        d30s ^ x(&[2, 3, 4, 6, 7, 11, 12, 13, 14, 15, 18, 19, 21, 24]),
        d29s ^ x(&[1, 3, 4, 5, 7, 8, 12, 13, 14, 15, 16, 19, 20, 22]),
        d30s ^ x(&[2, 4, 5, 6, 8, 9, 13, 14, 15, 16, 17, 20, 21, 23]),
        d30s ^ x(&[1, 3, 5, 6, 7, 9, 10, 14, 15, 16, 17, 18, 21, 22, 24]),
        d29s ^ x(&[3, 5, 6, 8, 9, 10, 11, 13, 15, 19, 22, 23, 24]),
    ]
}

/// Checks a received 30-bit word. Returns the 24 source bits when parity holds.
pub fn parity_check(word: &[u8], d29s: u8, d30s: u8) -> Option<[u8; 24]> {
    let mut d = [0u8; 24];
    for i in 0..24 {
        d[i] = word[i] ^ d30s;
    }
    let p = parity_encode(&d, d29s, d30s);
    if p[..] == word[24..30] {
        Some(d)
    } else {
        None
    }
}

/// Turns 300 source bits into transmitted bits with parity. Words 2 and 10
/// get their bits 23-24 solved so that the word ends in 00.
fn transmit(src: &mut [u8; 300], mut d29s: u8, mut d30s: u8) -> ([u8; 300], u8, u8) {
    let mut out = [0u8; 300];
    for w in 0..10 {
        let base = 30 * w;
        if w == 1 || w == 9 {
            src[base + 22] = 0;
            src[base + 23] = 0;
            let p = parity_encode(&src[base..base + 24], d29s, d30s);
            // D29 depends on d24 but not d23; D30 depends on both.
            src[base + 23] = p[4];
            let p = parity_encode(&src[base..base + 24], d29s, d30s);
            src[base + 22] = p[5];
        }
        let p = parity_encode(&src[base..base + 24], d29s, d30s);
        for i in 0..24 {
            out[base + i] = src[base + i] ^ d30s;
        }
        out[base + 24..base + 30].copy_from_slice(&p);
        d29s = p[4];
        d30s = p[5];
    }
    (out, d29s, d30s)
}

/// Subframe 1 fields in engineering units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sf1 {
    pub week10: u16,
    pub ura: u8,
    pub health: u8,
    pub iodc: u16,
    pub tgd: f64,
    pub toc: f64,
    pub af2: f64,
    pub af1: f64,
    pub af0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sf2 {
    pub iode: u16,
    pub crs: f64,
    pub delta_n: f64,
    pub m0: f64,
    pub cuc: f64,
    pub e: f64,
    pub cus: f64,
    pub sqrt_a: f64,
    pub toe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sf3 {
    pub cic: f64,
    pub omega0: f64,
    pub cis: f64,
    pub i0: f64,
    pub crc: f64,
    pub omega: f64,
    pub omega_dot: f64,
    pub iode: u16,
    pub idot: f64,
}

/// Decoded content of one subframe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubframeData {
    Sf1(Sf1),
    Sf2(Sf2),
    Sf3(Sf3),
    Iono(KlobucharCoeffs),
    Other { id: u8 },
}

/// A decoded subframe with its HOW contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedSubframe {
    pub id: u8,
    /// TOW count (units of 6 s) of the start of the next subframe.
    pub tow_count: u32,
    pub data: SubframeData,
}

fn fill_tlm_how(src: &mut [u8; 300], tow_start: f64, id: u8) {
    src[..8].copy_from_slice(&PREAMBLE);
    let next = ((tow_start / 6.0).round() as i64 + 1).rem_euclid(100_800);
    put(src, TOW_COUNT, next);
    put(src, SUBFRAME_ID, id as i64);
}

fn fill_sf1(src: &mut [u8; 300], e: &BroadcastEphemeris) {
    put(src, WEEK, (e.week % 1024) as i64);
    put(src, L2CODES, 1);
    put(src, URA, e.ura_index.min(15) as i64);
    put(src, HEALTH, (e.health & 0x3f) as i64);
    put(src, IODC, (e.iodc & 0x3ff) as i64);
    put(src, TGD, q(e.tgd, p2(-31)));
    put(src, TOC, q(e.toc, 16.0));
    put(src, AF2, q(e.af2, p2(-55)));
    put(src, AF1, q(e.af1, p2(-43)));
    put(src, AF0, q(e.af0, p2(-31)));
}

fn fill_sf2(src: &mut [u8; 300], e: &BroadcastEphemeris) {
    put(src, IODE2, (e.iode & 0xff) as i64);
    put(src, CRS, q(e.crs, p2(-5)));
    put(src, DN, q_sc(e.delta_n, p2(-43)));
    put(src, M0, q_sc(e.m0, p2(-31)));
    put(src, CUC, q(e.cuc, p2(-29)));
    put(src, ECC, q(e.e, p2(-33)));
    put(src, CUS, q(e.cus, p2(-29)));
    put(src, SQRTA, q(e.sqrt_a, p2(-19)));
    put(src, TOE, q(e.toe, 16.0));
}

fn fill_sf3(src: &mut [u8; 300], e: &BroadcastEphemeris) {
    put(src, CIC, q(e.cic, p2(-29)));
    put(src, OMEGA0, q_sc(e.omega0, p2(-31)));
    put(src, CIS, q(e.cis, p2(-29)));
    put(src, I0, q_sc(e.i0, p2(-31)));
    put(src, CRC, q(e.crc, p2(-5)));
    put(src, OMEGA, q_sc(e.omega, p2(-31)));
    put(src, OMEGADOT, q_sc(e.omega_dot, p2(-43)));
    put(src, IODE3, (e.iode & 0xff) as i64);
    put(src, IDOT, q_sc(e.idot, p2(-43)));
}

fn fill_sf4(src: &mut [u8; 300], k: &KlobucharCoeffs) {
    put(src, DATA_ID, 1);
    put(src, SV_ID, SV_ID_IONO_PAGE);
    for i in 0..4 {
        put(src, ALPHA[i], q(k.alpha[i], p2(ALPHA_SCALE[i])));
        put(src, BETA[i], q(k.beta[i], p2(BETA_SCALE[i])));
    }
}

fn fill_sf5(src: &mut [u8; 300]) {
    put(src, DATA_ID, 1);
    put(src, SV_ID, SV_ID_FILLER_PAGE);
    // Dummy page body: alternating ones and zeros.
    for w in 2..10 {
        for i in 0..24 {
            let k = 30 * w + i;
            if k >= 68 {
                src[k] = (i % 2 == 0) as u8;
            }
        }
    }
}

/// Subframe ID (1..=5) of the subframe starting at `tow_start`.
pub fn subframe_id_at(tow_start: f64) -> u8 {
    (((tow_start / 6.0).round() as i64).rem_euclid(5) + 1) as u8
}

/// Encodes `count` consecutive subframes starting at `tow0` (a multiple of 6 s).
///
/// Subframe 4 always carries the ionosphere page; subframe 5 is a dummy page.
pub fn encode_subframes(eph: &BroadcastEphemeris, iono: &KlobucharCoeffs, tow0: f64, count: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(count * SUBFRAME_BITS);
    let (mut d29s, mut d30s) = (0u8, 0u8);
    for s in 0..count {
        let tow = tow0 + 6.0 * s as f64;
        let id = subframe_id_at(tow);
        let mut src = [0u8; 300];
        fill_tlm_how(&mut src, tow, id);
        match id {
            1 => fill_sf1(&mut src, eph),
            2 => fill_sf2(&mut src, eph),
            3 => fill_sf3(&mut src, eph),
            4 => fill_sf4(&mut src, iono),
            _ => fill_sf5(&mut src),
        }
        let (out, a, b) = transmit(&mut src, d29s, d30s);
        d29s = a;
        d30s = b;
        bits.extend_from_slice(&out);
    }
    bits
}

/// Recovers source bits of a received subframe. On parity failure returns the
/// zero-based indices of the failing words.
pub fn subframe_source_bits(rx: &[u8], d29s: u8, d30s: u8) -> std::result::Result<[u8; 300], Vec<usize>> {
    let mut src = [0u8; 300];
    let mut bad = Vec::new();
    let (mut p29, mut p30) = (d29s, d30s);
    for w in 0..10 {
        let word = &rx[30 * w..30 * w + 30];
        match parity_check(word, p29, p30) {
            Some(d) => src[30 * w..30 * w + 24].copy_from_slice(&d),
            None => bad.push(w),
        }
        p29 = word[28];
        p30 = word[29];
    }
    if bad.is_empty() {
        Ok(src)
    } else {
        Err(bad)
    }
}

/// Decodes a received 300-bit subframe given the two bits that preceded it.
pub fn decode_subframe_words(rx: &[u8], d29s: u8, d30s: u8) -> Result<DecodedSubframe> {
    if rx.len() < SUBFRAME_BITS {
        return Err(Error::Decode("subframe shorter than 300 bits".into()));
    }
    let src =
        subframe_source_bits(rx, d29s, d30s).map_err(|w| Error::Decode(format!("parity failure in words {w:?}")))?;
    if src[..8] != PREAMBLE {
        return Err(Error::Decode("preamble mismatch".into()));
    }
    let tow_count = get(&src, TOW_COUNT, false) as u32;
    let id = get(&src, SUBFRAME_ID, false) as u8;
    let data = match id {
        1 => SubframeData::Sf1(Sf1 {
            week10: get(&src, WEEK, false) as u16,
            ura: get(&src, URA, false) as u8,
            health: get(&src, HEALTH, false) as u8,
            iodc: get(&src, IODC, false) as u16,
            tgd: get(&src, TGD, true) as f64 * p2(-31),
            toc: get(&src, TOC, false) as f64 * 16.0,
            af2: get(&src, AF2, true) as f64 * p2(-55),
            af1: get(&src, AF1, true) as f64 * p2(-43),
            af0: get(&src, AF0, true) as f64 * p2(-31),
        }),
        2 => SubframeData::Sf2(Sf2 {
            iode: get(&src, IODE2, false) as u16,
            crs: get(&src, CRS, true) as f64 * p2(-5),
            delta_n: get(&src, DN, true) as f64 * p2(-43) * GPS_PI,
            m0: get(&src, M0, true) as f64 * p2(-31) * GPS_PI,
            cuc: get(&src, CUC, true) as f64 * p2(-29),
            e: get(&src, ECC, false) as f64 * p2(-33),
            cus: get(&src, CUS, true) as f64 * p2(-29),
            sqrt_a: get(&src, SQRTA, false) as f64 * p2(-19),
            toe: get(&src, TOE, false) as f64 * 16.0,
        }),
        3 => SubframeData::Sf3(Sf3 {
            cic: get(&src, CIC, true) as f64 * p2(-29),
            omega0: get(&src, OMEGA0, true) as f64 * p2(-31) * GPS_PI,
            cis: get(&src, CIS, true) as f64 * p2(-29),
            i0: get(&src, I0, true) as f64 * p2(-31) * GPS_PI,
            crc: get(&src, CRC, true) as f64 * p2(-5),
            omega: get(&src, OMEGA, true) as f64 * p2(-31) * GPS_PI,
            omega_dot: get(&src, OMEGADOT, true) as f64 * p2(-43) * GPS_PI,
            iode: get(&src, IODE3, false) as u16,
            idot: get(&src, IDOT, true) as f64 * p2(-43) * GPS_PI,
        }),
        4 if get(&src, SV_ID, false) == SV_ID_IONO_PAGE => {
            let mut k = KlobucharCoeffs::default();
            for i in 0..4 {
                k.alpha[i] = get(&src, ALPHA[i], true) as f64 * p2(ALPHA_SCALE[i]);
                k.beta[i] = get(&src, BETA[i], true) as f64 * p2(BETA_SCALE[i]);
            }
            SubframeData::Iono(k)
        }
        _ => SubframeData::Other { id },
    };
    Ok(DecodedSubframe { id, tow_count, data })
}

/// Resolves a 10-bit week number against a full-week hint.
pub fn resolve_week(week10: u16, hint: u32) -> u32 {
    let base = hint - hint % 1024;
    let mut best = base + week10 as u32;
    for cand in [best.wrapping_sub(1024), best + 1024] {
        if (cand as i64 - hint as i64).abs() < (best as i64 - hint as i64).abs() {
            best = cand;
        }
    }
    best
}

/// Combines subframes 1-3 into an ephemeris. Fails if the issue-of-data values disagree.
pub fn assemble_ephemeris(prn: u8, s1: &Sf1, s2: &Sf2, s3: &Sf3, week_hint: u32) -> Result<BroadcastEphemeris> {
    if s2.iode != s3.iode || (s1.iodc & 0xff) != s2.iode {
        return Err(Error::Decode(format!(
            "PRN {prn}: issue of data mismatch (IODC {}, IODE {} / {})",
            s1.iodc, s2.iode, s3.iode
        )));
    }
    Ok(BroadcastEphemeris {
        prn,
        week: resolve_week(s1.week10, week_hint),
        toe: s2.toe,
        toc: s1.toc,
        sqrt_a: s2.sqrt_a,
        e: s2.e,
        i0: s3.i0,
        omega0: s3.omega0,
        omega: s3.omega,
        m0: s2.m0,
        delta_n: s2.delta_n,
        idot: s3.idot,
        omega_dot: s3.omega_dot,
        cuc: s2.cuc,
        cus: s2.cus,
        crc: s3.crc,
        crs: s2.crs,
        cic: s3.cic,
        cis: s3.cis,
        af0: s1.af0,
        af1: s1.af1,
        af2: s1.af2,
        tgd: s1.tgd,
        iode: s2.iode,
        iodc: s1.iodc,
        health: s1.health,
        ura_index: s1.ura,
        klobuchar: KlobucharCoeffs::default(),
    })
}

/// Rounds every broadcast field to its LNAV resolution by an encode/decode roundtrip.
pub fn quantize_ephemeris(eph: &BroadcastEphemeris) -> BroadcastEphemeris {
    let tow0 = 0.0;
    let bits = encode_subframes(eph, &KlobucharCoeffs::default(), tow0, 3);
    let mut parts = (None, None, None);
    let (mut d29, mut d30) = (0u8, 0u8);
    for s in 0..3 {
        let rx = &bits[300 * s..300 * s + 300];
        let sf = decode_subframe_words(rx, d29, d30).expect("own encoding decodes");
        match sf.data {
            SubframeData::Sf1(x) => parts.0 = Some(x),
            SubframeData::Sf2(x) => parts.1 = Some(x),
            SubframeData::Sf3(x) => parts.2 = Some(x),
            _ => {}
        }
        d29 = rx[298];
        d30 = rx[299];
    }
    let mut out = assemble_ephemeris(
        eph.prn,
        &parts.0.expect("subframe 1"),
        &parts.1.expect("subframe 2"),
        &parts.2.expect("subframe 3"),
        eph.week,
    )
    .expect("consistent issue of data");
    out.klobuchar = quantize_klobuchar(&eph.klobuchar);
    out
}

/// Rounds Klobuchar coefficients to their broadcast resolution.
pub fn quantize_klobuchar(k: &KlobucharCoeffs) -> KlobucharCoeffs {
    let mut out = KlobucharCoeffs::default();
    for i in 0..4 {
        let sa = p2(ALPHA_SCALE[i]);
        let sb = p2(BETA_SCALE[i]);
        out.alpha[i] = (k.alpha[i] / sa).round().clamp(-128.0, 127.0) * sa;
        out.beta[i] = (k.beta[i] / sb).round().clamp(-128.0, 127.0) * sb;
    }
    out
}

/// The 50 bit/s data stream of one satellite.
#[derive(Debug, Clone, PartialEq)]
pub struct NavMessage {
    pub prn: u8,
    /// Transmit time (seconds of week) of the leading edge of bit 0; a multiple of 6 s.
    pub tow0: f64,
    /// Transmitted bits, 0 or 1.
    pub bits: Vec<u8>,
}

impl NavMessage {
    /// Data symbol (+1 for bit 0, -1 for bit 1) of bit `k`; +1 outside the stream.
    #[inline]
    pub fn symbol(&self, k: i64) -> f64 {
        if k < 0 || k as usize >= self.bits.len() {
            1.0
        } else {
            1.0 - 2.0 * self.bits[k as usize] as f64
        }
    }

    /// Index of the bit being transmitted at transmit time `t` (seconds of week).
    pub fn bit_index_at(&self, t: f64) -> i64 {
        ((t - self.tow0) / BIT_PERIOD).floor() as i64
    }

    pub fn covers(&self, t_first: f64, t_last: f64) -> bool {
        t_first >= self.tow0 && t_last < self.tow0 + self.bits.len() as f64 * BIT_PERIOD
    }
}

/// Builds the navigation message of `eph` for transmit times in `[tow0, tow0 + duration]`.
pub fn build_nav_message(eph: &BroadcastEphemeris, iono: &KlobucharCoeffs, tow0: f64, duration: f64) -> NavMessage {
    let count = ((duration / 6.0).ceil() as usize).max(1) + 1;
    NavMessage { prn: eph.prn, tow0, bits: encode_subframes(eph, iono, tow0, count) }
}
