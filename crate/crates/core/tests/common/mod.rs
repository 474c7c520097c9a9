//! Independent reference evolution for `α = π/2` in `astro-float`.
//!
//! Shares nothing with the library beyond the definition of the walk: π comes
//! from astro-float's own constant, the angles `2παn = π²n` are evaluated
//! directly, and every amplitude is carried at 128 bits (about 38 digits).

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};

const BITS: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Reference {
    /// Final probabilities at sites `-t..=t`.
    pub probabilities: Vec<(i64, BigFloat)>,
    /// Origin probability after each of `0..=t` steps.
    pub origin: Vec<BigFloat>,
}

fn zero() -> BigFloat {
    BigFloat::from_u8(0, BITS)
}

/// WC evolution from `(|L⟩ + |R⟩)/√2` at the origin.
pub fn half_pi_walk(t: usize) -> Reference {
    let mut cc = Consts::new().expect("astro-float constants");
    let pi = cc.pi(BITS, RM);
    let pi2 = pi.mul(&pi, BITS, RM);
    let width = 2 * t + 3;
    let off = t as i64 + 1;
    let coins: Vec<(BigFloat, BigFloat)> = (0..width)
        .map(|i| {
            let n = i as i64 - off;
            let angle = pi2.mul(&BigFloat::from_i64(n, BITS), BITS, RM);
            (angle.cos(BITS, RM, &mut cc), angle.sin(BITS, RM, &mut cc))
        })
        .collect();
    let h = BigFloat::from_f64(0.5, BITS).sqrt(BITS, RM);
    let mut left = vec![zero(); width];
    let mut right = vec![zero(); width];
    left[off as usize] = h.clone();
    right[off as usize] = h;
    let prob = |l: &BigFloat, r: &BigFloat| l.mul(l, BITS, RM).add(&r.mul(r, BITS, RM), BITS, RM);
    let mut origin = vec![prob(&left[off as usize], &right[off as usize])];
    for step in 0..t {
        let mut nl = vec![zero(); width];
        let mut nr = vec![zero(); width];
        // after `step` steps only sites with n ≡ step (mod 2) are occupied
        let reach = step as i64;
        let mut n = -reach;
        while n <= reach {
            let i = (n + off) as usize;
            let (c, s) = &coins[i];
            let (l, r) = (&left[i], &right[i]);
            nl[i - 1] = c.mul(l, BITS, RM).sub(&s.mul(r, BITS, RM), BITS, RM);
            nr[i + 1] = s.mul(l, BITS, RM).add(&c.mul(r, BITS, RM), BITS, RM);
            n += 2;
        }
        left = nl;
        right = nr;
        origin.push(prob(&left[off as usize], &right[off as usize]));
    }
    let probabilities = (-(t as i64)..=t as i64)
        .map(|n| {
            let i = (n + off) as usize;
            (n, prob(&left[i], &right[i]))
        })
        .collect();
    Reference { probabilities, origin }
}

/// `|x - y|` for an `f64` against a reference value, evaluated in BigFloat.
pub fn deviation(x: f64, reference: &BigFloat) -> f64 {
    let d = BigFloat::from_f64(x, BITS).sub(reference, BITS, RM).abs();
    format!("{d}").parse().expect("decimal BigFloat")
}
