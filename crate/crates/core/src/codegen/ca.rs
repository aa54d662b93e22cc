use crate::constants::{CA_LEN, F_CA};
use crate::error::{Error, Result};

/// G2 output taps (1-based register stages) selecting each PRN's code phase.
pub const G2_PHASE_TAPS: [(usize, usize); 32] = [
    (2, 6),
    (3, 7),
    (4, 8),
    (5, 9),
    (1, 9),
    (2, 10),
    (1, 8),
    (2, 9),
    (3, 10),
    (2, 3),
    (3, 4),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 10),
    (1, 4),
    (2, 5),
    (3, 6),
    (4, 7),
    (5, 8),
    (6, 9),
    (1, 3),
    (4, 6),
    (5, 7),
    (6, 8),
    (7, 9),
    (8, 10),
    (1, 6),
    (2, 7),
    (3, 8),
    (4, 9),
];

/// One period of a C/A code as +-1 chips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadingCode {
    pub prn: u8,
    pub chips: Vec<i8>,
}

impl SpreadingCode {
    pub fn chip_rate(&self) -> f64 {
        F_CA
    }

    /// Chip at any integer index, wrapping modulo the code length.
    #[inline]
    pub fn chip(&self, k: i64) -> i8 {
        self.chips[k.rem_euclid(CA_LEN as i64) as usize]
    }
}

/// Generates the C/A Gold code of `prn` (1..=32).
///
/// Chip value +1 corresponds to logic 0 and -1 to logic 1.
pub fn ca_code(prn: u8) -> Result<SpreadingCode> {
    if !(1..=32).contains(&prn) {
        return Err(Error::InvalidInput(format!("C/A PRN {prn} outside 1..=32")));
    }
    let (t1, t2) = G2_PHASE_TAPS[prn as usize - 1];
    let mut g1 = [1u8; 10];
    let mut g2 = [1u8; 10];
    let mut chips = Vec::with_capacity(CA_LEN);
    for _ in 0..CA_LEN {
        let out = g1[9] ^ g2[t1 - 1] ^ g2[t2 - 1];
        chips.push(if out == 0 { 1 } else { -1 });
        let f1 = g1[2] ^ g1[9];
        let f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9];
        g1.rotate_right(1);
        g2.rotate_right(1);
        g1[0] = f1;
        g2[0] = f2;
    }
    Ok(SpreadingCode { prn, chips })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_and_balance() {
        for prn in 1..=32 {
            let c = ca_code(prn).unwrap();
            assert_eq!(c.chips.len(), 1023);
            let ones = c.chips.iter().filter(|&&x| x == -1).count();
            assert!(ones == 512 || ones == 511, "prn {prn}: {ones}");
        }
    }

    #[test]
    fn out_of_range_prn() {
        assert!(ca_code(0).is_err());
        assert!(ca_code(33).is_err());
    }

    #[test]
    fn chip_wraps() {
        let c = ca_code(7).unwrap();
        assert_eq!(c.chip(-1), c.chips[1022]);
        assert_eq!(c.chip(1023 + 5), c.chips[5]);
    }
}
