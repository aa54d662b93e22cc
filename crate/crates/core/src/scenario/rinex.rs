//! RINEX 2.x / 3.x GPS navigation file reader and a 2.11 writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::orbits::FIT_WINDOW_S;
use crate::time::GpsTime;

use super::{BroadcastEphemeris, KlobucharCoeffs};

/// Contents of a navigation file: header ionosphere terms plus every GPS record.
#[derive(Debug, Clone, PartialEq)]
pub struct RinexNav {
    pub version: f64,
    pub klobuchar: Option<KlobucharCoeffs>,
    pub records: Vec<BroadcastEphemeris>,
}

/// Ephemerides selected for a scenario, one per PRN.
#[derive(Debug, Clone, PartialEq)]
pub struct EphemerisSet {
    pub ephemerides: BTreeMap<u8, BroadcastEphemeris>,
    pub klobuchar: Option<KlobucharCoeffs>,
}

/// Reads a navigation file and keeps, for every PRN, the record whose toe is nearest to `epoch`.
pub fn load_ephemerides(path: &Path, epoch: GpsTime) -> Result<EphemerisSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let nav = parse_rinex_nav(&text)?;
    let ephemerides = select_nearest(&nav.records, epoch);
    if ephemerides.is_empty() {
        return Err(Error::NoEphemeris(format!(
            "{} has no GPS record within {} h of week {} tow {}",
            path.display(),
            FIT_WINDOW_S / 3600.0,
            epoch.week,
            epoch.tow
        )));
    }
    Ok(EphemerisSet { ephemerides, klobuchar: nav.klobuchar })
}

/// Nearest-toe selection per PRN; ties go to the earlier toe. Records outside the fit window are dropped.
pub fn select_nearest(records: &[BroadcastEphemeris], epoch: GpsTime) -> BTreeMap<u8, BroadcastEphemeris> {
    let mut best: BTreeMap<u8, (f64, f64, BroadcastEphemeris)> = BTreeMap::new();
    for r in records {
        let dt = GpsTime::new(r.week, r.toe).diff(&epoch);
        if dt.abs() > FIT_WINDOW_S {
            continue;
        }
        let replace = match best.get(&r.prn) {
            None => true,
            Some((d, t, _)) => dt.abs() < *d || (dt.abs() == *d && dt < *t),
        };
        if replace {
            best.insert(r.prn, (dt.abs(), dt, *r));
        }
    }
    best.into_iter().map(|(k, (_, _, e))| (k, e)).collect()
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    let t = field.trim();
    if t.is_empty() {
        return Ok(0.0);
    }
    t.replace(['D', 'd'], "E")
        .parse::<f64>()
        .map_err(|_| Error::Rinex { line, message: format!("malformed numeric field `{t}`") })
}

fn parse_int(field: &str, line: usize) -> Result<i64> {
    let t = field.trim();
    t.parse::<i64>().map_err(|_| Error::Rinex { line, message: format!("malformed integer field `{t}`") })
}

fn slice(s: &str, a: usize, b: usize) -> &str {
    let b = b.min(s.len());
    if a >= b {
        ""
    } else {
        s.get(a..b).unwrap_or("")
    }
}

/// Four 19-character floats starting at column `start`.
fn orbit_fields(s: &str, start: usize, line: usize) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        *o = parse_float(slice(s, start + 19 * k, start + 19 * (k + 1)), line)?;
    }
    Ok(out)
}

fn header_four(s: &str, start: usize, line: usize) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        *o = parse_float(slice(s, start + 12 * k, start + 12 * (k + 1)), line)?;
    }
    Ok(out)
}

fn full_year(y: i64) -> i32 {
    if y < 80 {
        (2000 + y) as i32
    } else if y < 100 {
        (1900 + y) as i32
    } else {
        y as i32
    }
}

/// Parses the text of a RINEX navigation file.
pub fn parse_rinex_nav(text: &str) -> Result<RinexNav> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.is_empty() {
        return Err(Error::Rinex { line: 1, message: "empty file".into() });
    }
    let version = parse_float(slice(lines[0], 0, 9), 1)?;
    if !(2.0..4.0).contains(&version) {
        return Err(Error::Rinex { line: 1, message: format!("unsupported RINEX version {version}") });
    }
    let v3 = version >= 3.0;
    let mut alpha = None;
    let mut beta = None;
    let mut i = 0;
    let mut header_done = false;
    while i < lines.len() {
        let l = lines[i];
        let label = slice(l, 60, 80).trim();
        let ln = i + 1;
        match label {
            "ION ALPHA" => alpha = Some(header_four(l, 2, ln)?),
            "ION BETA" => beta = Some(header_four(l, 2, ln)?),
            "IONOSPHERIC CORR" => match slice(l, 0, 4) {
                "GPSA" => alpha = Some(header_four(l, 5, ln)?),
                "GPSB" => beta = Some(header_four(l, 5, ln)?),
                _ => {}
            },
            "END OF HEADER" => {
                header_done = true;
                i += 1;
                break;
            }
            _ => {}
        }
        i += 1;
    }
    if !header_done {
        return Err(Error::Rinex { line: lines.len(), message: "END OF HEADER not found".into() });
    }
    let klobuchar = match (alpha, beta) {
        (Some(alpha), Some(beta)) => Some(KlobucharCoeffs { alpha, beta }),
        _ => None,
    };

    let mut records = Vec::new();
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        let first = lines[i];
        let (span, is_gps) = if v3 {
            match first.chars().next() {
                Some('G') => (8, true),
                Some('R') | Some('S') => (4, false),
                Some(_) => (8, false),
                None => (1, false),
            }
        } else {
            (8, true)
        };
        if !is_gps {
            i += span;
            continue;
        }
        if i + 8 > lines.len() {
            return Err(Error::Rinex { line: i + 1, message: "truncated ephemeris record".into() });
        }
        records.push(parse_record(&lines[i..i + 8], i + 1, v3)?);
        i += 8;
    }
    Ok(RinexNav { version, klobuchar, records })
}

fn parse_record(l: &[&str], ln: usize, v3: bool) -> Result<BroadcastEphemeris> {
    let (prn, toc, clk, col) = if v3 {
        let prn = parse_int(slice(l[0], 1, 3), ln)?;
        let y = parse_int(slice(l[0], 4, 8), ln)?;
        let mo = parse_int(slice(l[0], 9, 11), ln)?;
        let d = parse_int(slice(l[0], 12, 14), ln)?;
        let h = parse_int(slice(l[0], 15, 17), ln)?;
        let mi = parse_int(slice(l[0], 18, 20), ln)?;
        let s = parse_float(slice(l[0], 21, 23), ln)?;
        let toc = GpsTime::from_calendar(y as i32, mo as u32, d as u32, h as u32, mi as u32, s);
        let mut clk = [0.0; 3];
        for (k, c) in clk.iter_mut().enumerate() {
            *c = parse_float(slice(l[0], 23 + 19 * k, 42 + 19 * k), ln)?;
        }
        (prn, toc, clk, 4)
    } else {
        let prn = parse_int(slice(l[0], 0, 2), ln)?;
        let y = parse_int(slice(l[0], 3, 5), ln)?;
        let mo = parse_int(slice(l[0], 6, 8), ln)?;
        let d = parse_int(slice(l[0], 9, 11), ln)?;
        let h = parse_int(slice(l[0], 12, 14), ln)?;
        let mi = parse_int(slice(l[0], 15, 17), ln)?;
        let s = parse_float(slice(l[0], 17, 22), ln)?;
        let toc = GpsTime::from_calendar(full_year(y), mo as u32, d as u32, h as u32, mi as u32, s);
        let mut clk = [0.0; 3];
        for (k, c) in clk.iter_mut().enumerate() {
            *c = parse_float(slice(l[0], 22 + 19 * k, 41 + 19 * k), ln)?;
        }
        (prn, toc, clk, 3)
    };
    if !(1..=32).contains(&prn) {
        return Err(Error::Rinex { line: ln, message: format!("GPS PRN {prn} out of range") });
    }
    let mut o = [[0.0; 4]; 7];
    for k in 0..7 {
        o[k] = orbit_fields(l[k + 1], col, ln + k + 1)?;
    }
    let week = o[4][2] as u32;
    Ok(BroadcastEphemeris {
        prn: prn as u8,
        week,
        toe: o[2][0],
        toc: toc.tow + (toc.week as f64 - week as f64) * crate::constants::SECONDS_PER_WEEK,
        sqrt_a: o[1][3],
        e: o[1][1],
        i0: o[3][0],
        omega0: o[2][2],
        omega: o[3][2],
        m0: o[0][3],
        delta_n: o[0][2],
        idot: o[4][0],
        omega_dot: o[3][3],
        cuc: o[1][0],
        cus: o[1][2],
        crc: o[3][1],
        crs: o[0][1],
        cic: o[2][1],
        cis: o[2][3],
        af0: clk[0],
        af1: clk[1],
        af2: clk[2],
        tgd: o[5][2],
        iode: o[0][0] as u16,
        iodc: o[5][3] as u16,
        health: o[5][1] as u8,
        ura_index: ura_index_from_metres(o[5][0]),
        klobuchar: KlobucharCoeffs::default(),
    })
}

const URA_TABLE: [f64; 15] =
    [2.4, 3.4, 4.85, 6.85, 9.65, 13.65, 24.0, 48.0, 96.0, 192.0, 384.0, 768.0, 1536.0, 3072.0, 6144.0];

pub fn ura_index_from_metres(m: f64) -> u8 {
    URA_TABLE.iter().position(|&t| m <= t).unwrap_or(15) as u8
}

pub fn ura_metres_from_index(i: u8) -> f64 {
    URA_TABLE.get(i as usize).copied().unwrap_or(6144.0 * 2.0)
}

/// Formats a value as a Fortran `D19.12` field.
pub fn fortran_d19(x: f64) -> String {
    if x == 0.0 {
        return format!("{:>19}", "0.000000000000D+00");
    }
    let s = format!("{:.12E}", x);
    let (mant, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{:>19}", format!("{mant}D{sign}{:02}", exp.abs()))
}

fn fortran_d12(x: f64) -> String {
    if x == 0.0 {
        return format!("{:>12}", "0.0000D+00");
    }
    let s = format!("{:.4E}", x);
    let (mant, exp) = s.split_once('E').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{:>12}", format!("{mant}D{sign}{:02}", exp.abs()))
}

fn header_line(body: &str, label: &str) -> String {
    format!("{body:<60}{label:<20}\n")
}

/// Writes records as a RINEX 2.11 GPS navigation file.
pub fn write_rinex_nav_v2(records: &[BroadcastEphemeris], iono: Option<&KlobucharCoeffs>) -> String {
    let mut out = String::new();
    out += &header_line("     2.11           N: GPS NAV DATA", "RINEX VERSION / TYPE");
    out += &header_line("gnss-twin", "PGM / RUN BY / DATE");
    if let Some(k) = iono {
        let a: String = k.alpha.iter().map(|v| fortran_d12(*v)).collect();
        let b: String = k.beta.iter().map(|v| fortran_d12(*v)).collect();
        out += &header_line(&format!("  {a}"), "ION ALPHA");
        out += &header_line(&format!("  {b}"), "ION BETA");
    }
    out += &header_line("", "END OF HEADER");
    for r in records {
        let toc = GpsTime::new(r.week, r.toc);
        let (y, mo, d, h, mi, s) = calendar_from_gps(toc);
        let _ = writeln!(
            out,
            "{:2} {:02} {:2} {:2} {:2} {:2}{:5.1}{}{}{}",
            r.prn,
            y % 100,
            mo,
            d,
            h,
            mi,
            s,
            fortran_d19(r.af0),
            fortran_d19(r.af1),
            fortran_d19(r.af2)
        );
        let rows: [[f64; 4]; 7] = [
            [r.iode as f64, r.crs, r.delta_n, r.m0],
            [r.cuc, r.e, r.cus, r.sqrt_a],
            [r.toe, r.cic, r.omega0, r.cis],
            [r.i0, r.crc, r.omega, r.omega_dot],
            [r.idot, 1.0, r.week as f64, 0.0],
            [ura_metres_from_index(r.ura_index), r.health as f64, r.tgd, r.iodc as f64],
            [r.toe - 18.0, 4.0, 0.0, 0.0],
        ];
        for (k, row) in rows.iter().enumerate() {
            out += "   ";
            let n = if k == 6 { 2 } else { 4 };
            for v in &row[..n] {
                out += &fortran_d19(*v);
            }
            out += "\n";
        }
    }
    out
}

/// Calendar fields (GPS time scale) of a GPS time.
pub fn calendar_from_gps(t: GpsTime) -> (i32, u32, u32, u32, u32, f64) {
    let total = t.total_seconds();
    let days = (total / 86_400.0).floor();
    let sod = total - days * 86_400.0;
    // 1980-01-06 is day 3657 after 1970-01-01.
    let z = days as i64 + 3657 + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let y = (yoe + era * 400 + if m <= 2 { 1 } else { 0 }) as i32;
    let h = (sod / 3600.0).floor();
    let mi = ((sod - h * 3600.0) / 60.0).floor();
    let s = sod - h * 3600.0 - mi * 60.0;
    (y, m, d, h as u32, mi as u32, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d19_format() {
        assert_eq!(fortran_d19(-1.862645149231e-9), "-1.862645149231D-09");
        assert_eq!(fortran_d19(5153.6), " 5.153600000000D+03");
        assert_eq!(fortran_d19(0.0).len(), 19);
        assert_eq!(parse_float("-1.862645149231D-09", 1).unwrap(), -1.862645149231e-9);
    }

    #[test]
    fn calendar_roundtrip() {
        let t = GpsTime::new(2200, 367_200.0);
        let (y, mo, d, h, mi, s) = calendar_from_gps(t);
        let back = GpsTime::from_calendar(y, mo, d, h, mi, s);
        assert_eq!(back, t);
    }

    #[test]
    fn two_digit_years() {
        assert_eq!(full_year(19), 2019);
        assert_eq!(full_year(79), 2079);
        assert_eq!(full_year(99), 1999);
    }
}
