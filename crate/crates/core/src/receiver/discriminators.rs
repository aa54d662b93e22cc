use std::f64::consts::TAU;

use crate::C64;

/// Normalized non-coherent early-minus-late envelope discriminator, chips.
///
/// Positive when the incoming code leads the prompt replica.
#[inline]
pub fn dll_discriminator(early: C64, late: C64, spacing: f64) -> f64 {
    let (e, l) = (early.norm(), late.norm());
    if e + l == 0.0 {
        0.0
    } else {
        (1.0 - spacing / 2.0) * (e - l) / (e + l)
    }
}

/// Two-quadrant arctangent Costas discriminator, cycles in (-1/4, 1/4).
#[inline]
pub fn pll_discriminator(prompt: C64) -> f64 {
    if prompt.re == 0.0 {
        return 0.0;
    }
    (prompt.im / prompt.re).atan() / TAU
}

/// Cross/dot frequency discriminator between consecutive prompts, Hz.
///
/// With `data_safe` false a sign flip of the data between the two prompts is
/// tolerated at the cost of halving the pull-in range to +-1/(4T).
#[inline]
pub fn fll_discriminator(prev: C64, cur: C64, t: f64, data_safe: bool) -> f64 {
    let cross = prev.re * cur.im - cur.re * prev.im;
    let dot = prev.re * cur.re + prev.im * cur.im;
    let (cross, dot) = if !data_safe && dot < 0.0 { (-cross, -dot) } else { (cross, dot) };
    if cross == 0.0 && dot == 0.0 {
        return 0.0;
    }
    cross.atan2(dot) / (TAU * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nulls() {
        let p = C64::new(3.0, 0.0);
        assert_eq!(dll_discriminator(C64::new(0.75, 0.0), C64::new(0.75, 0.0), 0.5), 0.0);
        assert_eq!(pll_discriminator(p), 0.0);
        assert_eq!(fll_discriminator(p, p, 1e-3, false), 0.0);
    }

    #[test]
    fn fll_sign_follows_rotation() {
        let a = C64::from_polar(1.0, 0.3);
        let b = C64::from_polar(1.0, 0.3 + TAU * 50.0 * 1e-3);
        assert!((fll_discriminator(a, b, 1e-3, true) - 50.0).abs() < 1e-9);
        assert!((fll_discriminator(a, -b, 1e-3, false) - 50.0).abs() < 1e-9);
    }
}
