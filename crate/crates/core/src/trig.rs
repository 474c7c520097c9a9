//! Exact-where-possible trigonometry for rational multiples of a turn.
//!
//! Angles of the form `(π/2)·k/d` are reduced in integer arithmetic before any
//! floating-point work, so every quadrant boundary yields an exact `0`, `1` or
//! `-1`. The confinement of walks with `α = P/(4Q)` relies on the coin
//! diagonal at `±Q` being a bit-exact zero.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Returns `(cos, sin)` of `(π/2)·k/d`.
///
/// The result is exact whenever `k` is a multiple of `d`. Signed zeros are
/// normalized to `+0.0`.
pub fn quarter_turn_trig(k: i128, d: u64) -> (f64, f64) {
    assert!(d > 0, "quarter_turn_trig: zero denominator");
    let d = d as i128;
    let k = k.rem_euclid(4 * d);
    let (quadrant, j) = k.div_rem(&d);
    let (c, s) = first_quadrant(j, d);
    let (c, s) = match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    };
    (c + 0.0, s + 0.0)
}

// cos/sin of (π/2)·j/d for 0 <= j < d, evaluating the smaller of the angle and
// its complement so that symmetric sites produce bit-identical magnitudes.
fn first_quadrant(j: i128, d: i128) -> (f64, f64) {
    if j == 0 {
        return (1.0, 0.0);
    }
    if 2 * j == d {
        return (FRAC_1_SQRT_2, FRAC_1_SQRT_2);
    }
    if 2 * j < d {
        let x = FRAC_PI_2 * (j as f64 / d as f64);
        (x.cos(), x.sin())
    } else {
        let x = FRAC_PI_2 * ((d - j) as f64 / d as f64);
        (x.sin(), x.cos())
    }
}

/// `(cos 2πan/b, sin 2πan/b)` for a rational `a/b`, via integer reduction.
pub fn rational_trig(num: i64, den: u64, n: i64) -> (f64, f64) {
    let b = den as i128;
    // 2π·a·n/b = (π/2)·4·(a·n mod b)/b
    let an = (num as i128).rem_euclid(b) * (n as i128).rem_euclid(b) % b;
    quarter_turn_trig(4 * an, den)
}

/// An inverse period `α = P/(4Q)` with `P` odd and `gcd(P, Q) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuarterFraction {
    p: u64,
    q: u64,
}

impl QuarterFraction {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        let reject = |reason| Err(Error::InvalidQuarterFraction { p, q, reason });
        if q == 0 {
            return reject("Q must be positive");
        }
        if p == 0 {
            return reject("P must be positive");
        }
        if p % 2 == 0 {
            return reject("P must be odd");
        }
        if p.gcd(&q) != 1 {
            return reject("P and Q must be relatively prime");
        }
        if q > u64::MAX / 8 {
            return reject("Q too large");
        }
        Ok(QuarterFraction { p, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `4Q`, the full period of the coin sequence and the size of the
    /// finite one-step matrices.
    pub fn period(&self) -> u64 {
        4 * self.q
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / (4 * self.q) as f64
    }

    /// Same coins, with `P` reduced into `(0, 4Q)` so that `α ∈ (0, 1)`.
    pub fn canonical(&self) -> Self {
        QuarterFraction {
            p: self.p % (4 * self.q),
            q: self.q,
        }
    }

    /// `1 - α` as a quarter fraction, `(4Q - P)/(4Q)` for canonical `P`.
    pub fn mirror(&self) -> Self {
        let c = self.canonical();
        QuarterFraction {
            p: 4 * c.q - c.p,
            q: c.q,
        }
    }

    /// `(-1)^((P+1)/2)`, the reflection sign at the confining sites `±Q`.
    pub fn boundary_sign(&self) -> f64 {
        if ((self.p + 1) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `(cos 2παn, sin 2παn)`, exact at multiples of a quarter turn.
    pub fn trig(&self, n: i64) -> (f64, f64) {
        trig_pair_exact(*self, n)
    }

    /// True when the coin at `n` has a vanishing diagonal, i.e.
    /// `P·n ≡ Q (mod 2Q)`.
    pub fn is_barrier(&self, n: i64) -> bool {
        let two_q = 2 * self.q as i128;
        (self.p as i128 % two_q) * (n as i128).rem_euclid(two_q) % two_q == self.q as i128
    }
}

/// `(cos(πPn/(2Q)), sin(πPn/(2Q)))` for `α = P/(4Q)`.
pub fn trig_pair_exact(f: QuarterFraction, n: i64) -> (f64, f64) {
    let period = f.period() as i128;
    let k = (f.p as i128 % period) * (n as i128).rem_euclid(period);
    quarter_turn_trig(k, f.q)
}

impl fmt::Display for QuarterFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, 4 * self.q)
    }
}

impl FromStr for QuarterFraction {
    type Err = Error;

    /// Parses `"P/D"` where `D = 4Q`.
    fn from_str(s: &str) -> Result<Self> {
        let (num, den) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidInput(format!("expected P/4Q, got {s:?}")))?;
        let p: u64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
        let d: u64 = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
        if d == 0 || d % 4 != 0 {
            return Err(Error::InvalidInput(format!(
                "denominator of {s:?} must be a positive multiple of 4"
            )));
        }
        QuarterFraction::new(p, d / 4)
    }
}
