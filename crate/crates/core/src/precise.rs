//! High-precision reals with a certified rational enclosure.
//!
//! A [`PreciseReal`] is a decimal midpoint plus a radius of one unit in the
//! last stored digit (zero when the value is exact). Every exact comparison in
//! the number-theory module is carried out against the [`Enclosure`]; trig
//! values are evaluated with `astro-float` at [`WORKING_BITS`] and rounded to
//! `f64` exactly once.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Binary precision used for every high-precision evaluation.
pub const WORKING_BITS: usize = 320;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

/// Runs `f` with this thread's `astro-float` constant cache.
pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "enclosure bounds out of order");
        Enclosure { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Enclosure {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Multiplies by a positive integer.
    pub fn scale(&self, k: u64) -> Self {
        let k = BigRational::from_integer(BigInt::from(k));
        Enclosure {
            lo: &self.lo * &k,
            hi: &self.hi * &k,
        }
    }

    /// Largest distance from `x` to any point of the interval.
    pub fn max_distance(&self, x: &BigRational) -> BigRational {
        let a = (&self.lo - x).abs();
        let b = (&self.hi - x).abs();
        if a > b {
            a
        } else {
            b
        }
    }
}

/// A real number known to a fixed number of decimal digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreciseReal {
    mid: BigRational,
    radius: BigRational,
    digits: u32,
    text: String,
}

impl PreciseReal {
    /// An exactly known rational.
    pub fn exact(value: BigRational) -> Self {
        let text = value.to_string();
        PreciseReal {
            digits: u32::MAX,
            radius: BigRational::zero(),
            mid: value,
            text,
        }
    }

    /// Parses a decimal literal. A trailing `...` marks the digits as a
    /// truncation of a longer (irrational) expansion; without it the value is
    /// exact.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("not a decimal number: {s:?}"));
        let trimmed = s.trim();
        let (body, truncated) = match trimmed.strip_suffix("...") {
            Some(b) => (b, true),
            None => (trimmed, false),
        };
        let (negative, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all: String = format!("{int_part}{frac_part}");
        let mut mantissa: BigInt = all.parse().map_err(|_| bad())?;
        if negative {
            mantissa = -mantissa;
        }
        let scale = frac_part.len() as u32;
        let unit = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(scale));
        let mid = BigRational::from_integer(mantissa) * &unit;
        let digits = all.trim_start_matches('0').len().max(1) as u32;
        if truncated {
            Ok(PreciseReal {
                mid,
                radius: unit,
                digits,
                text: trimmed.to_string(),
            })
        } else {
            let mut r = PreciseReal::exact(mid);
            r.text = trimmed.to_string();
            Ok(r)
        }
    }

    fn constant(digits: &str) -> Self {
        let mut r = PreciseReal::parse_decimal(&format!("{digits}...")).expect("valid constant");
        r.text = digits.to_string();
        r
    }

    /// π/2 to 40 significant digits.
    pub fn half_pi() -> Self {
        PreciseReal::constant("1.570796326794896619231321691639751442099")
    }

    /// (√5 − 1)/2 to 40 significant digits.
    pub fn golden_mean() -> Self {
        PreciseReal::constant("0.6180339887498948482045868343656381177203")
    }

    /// (1 + √5)/2 to 40 significant digits.
    pub fn golden_ratio() -> Self {
        PreciseReal::constant("1.618033988749894848204586834365638117720")
    }

    /// √2 − 1 to 40 significant digits.
    pub fn sqrt2_minus_one() -> Self {
        PreciseReal::constant("0.4142135623730950488016887242096980785697")
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    /// Significant decimal digits carried; `u32::MAX` for exact values.
    pub fn significant_digits(&self) -> u32 {
        self.digits
    }

    pub fn midpoint(&self) -> &BigRational {
        &self.mid
    }

    pub fn radius(&self) -> &BigRational {
        &self.radius
    }

    pub fn enclosure(&self) -> Enclosure {
        Enclosure::new(&self.mid - &self.radius, &self.mid + &self.radius)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64().unwrap_or(f64::NAN)
    }

    /// Fractional part `x - ⌊x⌋` (taken at the midpoint).
    pub fn fract(&self) -> Self {
        let floor = self.mid.floor();
        let text = if floor.is_zero() {
            self.text.clone()
        } else {
            format!("frac({})", self.text)
        };
        PreciseReal {
            mid: &self.mid - floor,
            radius: self.radius.clone(),
            digits: self.digits,
            text,
        }
    }

    /// `x + k`, keeping the enclosure radius.
    pub fn add_integer(&self, k: i64) -> Self {
        PreciseReal {
            mid: &self.mid + BigRational::from_integer(BigInt::from(k)),
            radius: self.radius.clone(),
            digits: self.digits,
            text: format!("{}{:+}", self.text, k),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.enclosure().lo.is_positive()
    }

    /// The midpoint as a `BigFloat` at [`WORKING_BITS`].
    pub fn to_big_float(&self, cc: &mut Consts) -> BigFloat {
        rational_to_big_float(&self.mid, WORKING_BITS, cc)
    }

    /// `(cos 2πxn, sin 2πxn)` evaluated at [`WORKING_BITS`] and rounded once.
    pub fn turn_trig(&self, n: i64) -> (f64, f64) {
        with_consts(|cc| {
            let x = self.to_big_float(cc);
            let two_pi = cc.pi(WORKING_BITS, RM).mul(&BigFloat::from_u8(2, WORKING_BITS), WORKING_BITS, RM);
            let angle = two_pi
                .mul(&x, WORKING_BITS, RM)
                .mul(&BigFloat::from_i64(n, WORKING_BITS), WORKING_BITS, RM);
            let c = angle.cos(WORKING_BITS, RM, cc);
            let s = angle.sin(WORKING_BITS, RM, cc);
            (round_to_f64(&c), round_to_f64(&s))
        })
    }

    /// Worst-case absolute error of [`turn_trig`](Self::turn_trig) against the
    /// true value at the (unknown) exact point of the enclosure: the
    /// enclosure radius propagated through the angle, plus one rounding to
    /// `f64`.
    pub fn turn_trig_error_bound(&self, n: i64) -> f64 {
        let radius = self.radius.to_f64().unwrap_or(f64::INFINITY);
        std::f64::consts::TAU * (n as f64).abs() * radius + f64::EPSILON / 2.0
    }
}

impl fmt::Display for PreciseReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for PreciseReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PreciseReal::parse_decimal(s)
    }
}

pub fn rational_to_big_float(x: &BigRational, bits: usize, cc: &mut Consts) -> BigFloat {
    let num = BigFloat::parse(&x.numer().to_string(), Radix::Dec, bits, RM, cc);
    let den = BigFloat::parse(&x.denom().to_string(), Radix::Dec, bits, RM, cc);
    num.div(&den, bits, RM)
}

/// Correctly rounded (to nearest, ties to even) conversion to `f64` for
/// finite values in the normal range.
pub fn round_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (words, _, sign, exponent, _) = x.as_raw_parts().expect("finite BigFloat");
    let top = *words.last().expect("nonempty mantissa");
    let sticky = words[..words.len() - 1].iter().any(|&w| w != 0);
    // value = (top / 2^64) * 2^exponent with the top bit of `top` set
    let mut m = top >> 11;
    let rem = top & 0x7ff;
    if rem > 0x400 || (rem == 0x400 && (sticky || m & 1 == 1)) {
        m += 1;
    }
    let v = (m as f64 * 2f64.powi(-53)) * 2f64.powi(exponent);
    if sign.is_negative() {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_f64() {
        for &x in &[1.0, -0.5, 0.1, 1e-7, -123.456, std::f64::consts::PI, 0.7071067811865475] {
            let b = BigFloat::from_f64(x, WORKING_BITS);
            assert_eq!(round_to_f64(&b), x);
        }
    }

    #[test]
    fn rounds_to_nearest() {
        // 1/3 at high precision must round to the f64 nearest 1/3
        let third = with_consts(|cc| rational_to_big_float(&BigRational::new(1.into(), 3.into()), WORKING_BITS, cc));
        assert_eq!(round_to_f64(&third), 1.0 / 3.0);
        let tenth = with_consts(|cc| rational_to_big_float(&BigRational::new(1.into(), 10.into()), WORKING_BITS, cc));
        assert_eq!(round_to_f64(&tenth), 0.1);
    }

    #[test]
    fn parse_forms() {
        let x = PreciseReal::parse_decimal("1.5").unwrap();
        assert!(x.is_exact());
        assert_eq!(x.midpoint(), &BigRational::new(3.into(), 2.into()));
        let y = PreciseReal::parse_decimal("0.4142135623730950488...").unwrap();
        assert!(!y.is_exact());
        assert_eq!(y.significant_digits(), 19);
        assert!(PreciseReal::parse_decimal("abc").is_err());
        assert!(PreciseReal::parse_decimal("-").is_err());
        assert_eq!(PreciseReal::parse_decimal("-2").unwrap().to_f64(), -2.0);
    }

    #[test]
    fn constants_carry_forty_digits() {
        for c in [
            PreciseReal::half_pi(),
            PreciseReal::golden_mean(),
            PreciseReal::golden_ratio(),
            PreciseReal::sqrt2_minus_one(),
        ] {
            assert_eq!(c.significant_digits(), 40);
            assert!(!c.is_exact());
        }
    }

    #[test]
    fn half_pi_digits_match_library_pi() {
        let enc = PreciseReal::half_pi().enclosure();
        let half_pi = with_consts(|cc| {
            cc.pi(WORKING_BITS, RM)
                .div(&BigFloat::from_u8(2, WORKING_BITS), WORKING_BITS, RM)
        });
        let lo = with_consts(|cc| rational_to_big_float(&enc.lo, WORKING_BITS, cc));
        let hi = with_consts(|cc| rational_to_big_float(&enc.hi, WORKING_BITS, cc));
        assert!(lo < half_pi && half_pi < hi);
    }

    #[test]
    fn golden_digits_satisfy_quadratic() {
        // x^2 + x - 1 changes sign across the enclosure of (√5 − 1)/2
        let enc = PreciseReal::golden_mean().enclosure();
        let f = |x: &BigRational| x * x + x - BigRational::one();
        assert!(f(&enc.lo).is_negative() && f(&enc.hi).is_positive());
        let enc = PreciseReal::sqrt2_minus_one().enclosure();
        let g = |x: &BigRational| {
            let y = x + BigRational::one();
            &y * &y - BigRational::from_integer(2.into())
        };
        assert!(g(&enc.lo).is_negative() && g(&enc.hi).is_positive());
    }

    #[test]
    fn fract_of_half_pi() {
        let f = PreciseReal::half_pi().fract();
        assert!((f.to_f64() - (std::f64::consts::FRAC_PI_2 - 1.0)).abs() < 1e-15);
        assert!(!f.is_exact());
    }
}
