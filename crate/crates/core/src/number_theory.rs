//! Continued fractions with certified quotients, and quarter fractions
//! `P/(4Q)` close enough to an irrational inverse period that the coin at
//! `Q` is nearly reflecting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precise::{Enclosure, PreciseReal};
use crate::trig::QuarterFraction;

pub const DEFAULT_Q_MAX: u64 = 100_000;

/// `[a0; q1, q2, ...]` of a real known only up to an enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuedFraction {
    pub a0: BigInt,
    pub partial_quotients: Vec<BigInt>,
    /// Significant digits of the source, `None` for an exact rational.
    pub source_digits: Option<u32>,
    /// True when the expansion ended because the remainder was exactly zero.
    pub terminated: bool,
    enclosure: Enclosure,
}

impl ContinuedFraction {
    pub fn enclosure(&self) -> &Enclosure {
        &self.enclosure
    }

    pub fn len(&self) -> usize {
        1 + self.partial_quotients.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quotients(&self) -> impl Iterator<Item = &BigInt> {
        std::iter::once(&self.a0).chain(&self.partial_quotients)
    }
}

fn floor(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// Expands the enclosure while every point of it shares the same quotient.
pub fn continued_fraction_of(enclosure: &Enclosure, source_digits: Option<u32>, max_depth: usize) -> Result<ContinuedFraction> {
    let (mut lo, mut hi) = (enclosure.lo.clone(), enclosure.hi.clone());
    let a0 = floor(&lo);
    if floor(&hi) != a0 {
        return Err(Error::PrecisionExhausted(format!(
            "integer part of [{lo}, {hi}] is not determined"
        )));
    }
    let mut quotients = Vec::new();
    let mut a = a0.clone();
    let mut terminated = false;
    loop {
        let a_r = BigRational::from_integer(a.clone());
        let (rlo, rhi) = (&lo - &a_r, &hi - &a_r);
        if rlo.is_zero() {
            terminated = rhi.is_zero();
            break;
        }
        if quotients.len() >= max_depth {
            break;
        }
        // x -> 1/(x - a) reverses the order of the endpoints
        let (nlo, nhi) = (rhi.recip(), rlo.recip());
        let q = floor(&nlo);
        if floor(&nhi) != q {
            break;
        }
        quotients.push(q.clone());
        lo = nlo;
        hi = nhi;
        a = q;
    }
    Ok(ContinuedFraction {
        a0,
        partial_quotients: quotients,
        source_digits,
        terminated,
        enclosure: enclosure.clone(),
    })
}

/// Partial quotients of a positive real, up to `max_depth` of them after
/// `a0`, stopping as soon as the input precision no longer fixes the next one.
pub fn continued_fraction(alpha: &PreciseReal, max_depth: usize) -> Result<ContinuedFraction> {
    if !alpha.is_positive() {
        return Err(Error::InvalidInput(format!("continued fraction needs alpha > 0, got {alpha}")));
    }
    if max_depth == 0 {
        return Err(Error::InvalidInput("max_depth must be at least 1".into()));
    }
    let digits = (!alpha.is_exact()).then(|| alpha.significant_digits());
    continued_fraction_of(&alpha.enclosure(), digits, max_depth)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub a: BigInt,
    pub b: BigInt,
    /// `|α - a/b| < 1/b²` over the whole enclosure.
    pub error_bound_ok: bool,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.a.clone(), self.b.clone())
    }
}

pub fn convergents(cf: &ContinuedFraction) -> Vec<Convergent> {
    let (mut a_prev, mut a) = (BigInt::one(), cf.a0.clone());
    let (mut b_prev, mut b) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(cf.len());
    out.push(make_convergent(cf, &a, &b));
    for q in &cf.partial_quotients {
        let a_next = q * &a + &a_prev;
        let b_next = q * &b + &b_prev;
        a_prev = std::mem::replace(&mut a, a_next);
        b_prev = std::mem::replace(&mut b, b_next);
        out.push(make_convergent(cf, &a, &b));
    }
    out
}

fn make_convergent(cf: &ContinuedFraction, a: &BigInt, b: &BigInt) -> Convergent {
    let x = BigRational::new(a.clone(), b.clone());
    let bound = BigRational::new(BigInt::one(), b * b);
    Convergent {
        a: a.clone(),
        b: b.clone(),
        error_bound_ok: cf.enclosure.max_distance(&x) < bound,
    }
}

/// Whether `|α - P/(4Q)| < 1/(4Q²)` for every α in the enclosure.
///
/// Fails with [`Error::Indecisive`] when the enclosure is at least
/// `1/(8Q²)` wide.
pub fn verify_bound(alpha: &Enclosure, f: QuarterFraction) -> Result<bool> {
    let q = BigInt::from(f.q());
    let q2 = &q * &q;
    if alpha.width() >= BigRational::new(BigInt::one(), BigInt::from(8) * &q2) {
        return Err(Error::Indecisive { q: f.q() });
    }
    let x = BigRational::new(BigInt::from(f.p()), BigInt::from(4) * &q);
    Ok(alpha.max_distance(&x) < BigRational::new(BigInt::one(), BigInt::from(4) * q2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproximantSource {
    /// Numerator and denominator of a convergent of `4α`.
    Convergent,
    /// Found only by the scan over `Q`.
    Scan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarterApproximant {
    pub f: QuarterFraction,
    pub certified: bool,
    pub source: ApproximantSource,
}

/// Largest `Q` for which `verify_bound` can decide on this enclosure.
fn decidable_q(alpha: &Enclosure, q_max: u64) -> u64 {
    let w = alpha.width();
    if w.is_zero() {
        return q_max;
    }
    // width < 1/(8Q²)  <=>  Q² < 1/(8w)
    let limit = (BigRational::one() / (w * BigRational::from_integer(BigInt::from(8)))).floor().to_integer();
    let mut q = limit.sqrt();
    if &q * &q == limit {
        q -= 1;
    }
    q.to_u64().unwrap_or(u64::MAX).min(q_max)
}

/// The first `count` quarter fractions, in order of `(Q, P)`, that certifiably
/// satisfy `|α - P/(4Q)| < 1/(4Q²)` with `Q <= q_max`.
///
/// Odd-numerator convergents of `4α` are taken first; the scan over `Q` then
/// fills in every other certified fraction so the result is the same prefix of
/// one fixed ordered set whatever `count` is. Fewer than `count` results are
/// returned when the search space or the input precision runs out.
pub fn quarter_approximants(alpha: &PreciseReal, count: usize, q_max: u64) -> Result<Vec<QuarterApproximant>> {
    if alpha.is_exact() {
        return Err(Error::RationalInput);
    }
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    if !alpha.is_positive() {
        return Err(Error::InvalidInput(format!("quarter approximants need alpha > 0, got {alpha}")));
    }
    let enc = alpha.enclosure();
    let q_limit = decidable_q(&enc, q_max);

    let mut from_convergents = Vec::new();
    if let Ok(cf) = continued_fraction_of(&enc.scale(4), None, 200) {
        for c in convergents(&cf) {
            let (Some(p), Some(q)) = (c.a.to_u64(), c.b.to_u64()) else { break };
            if q > q_limit {
                break;
            }
            if let Ok(f) = QuarterFraction::new(p, q) {
                if verify_bound(&enc, f)? {
                    from_convergents.push(f);
                }
            }
        }
    }

    let x = 4.0 * alpha.to_f64();
    let mut found: Vec<QuarterFraction> = Vec::new();
    for q in 1..=q_limit {
        if found.len() >= count {
            break;
        }
        // certified P lie in (4Qα - 1/Q, 4Qα + 1/Q); one extra integer each
        // side absorbs the rounding of the f64 centre
        let centre = x * q as f64;
        let lo = (centre - 1.0 / q as f64).floor() as i64 - 1;
        let hi = (centre + 1.0 / q as f64).ceil() as i64 + 1;
        for p in lo.max(1)..=hi {
            // float prefilter; the slack covers the enclosure radius (below
            // 1/(16Q²) when decidable) and the rounding of the centre
            if p.is_even() || (centre - p as f64).abs() * (q as f64) > 1.5 {
                continue;
            }
            if let Ok(f) = QuarterFraction::new(p as u64, q) {
                if verify_bound(&enc, f)? {
                    found.push(f);
                }
            }
        }
    }
    let scanned_to = found.last().map(|f| f.q()).unwrap_or(q_limit);
    for f in &from_convergents {
        if f.q() > scanned_to && !found.contains(f) {
            found.push(*f);
        }
    }
    found.sort_by_key(|f| (f.q(), f.p()));
    found.dedup();
    found.truncate(count);
    if found.is_empty() {
        return Err(Error::NoneFound { q_max: q_limit });
    }
    Ok(found
        .into_iter()
        .map(|f| QuarterApproximant {
            f,
            certified: true,
            source: if from_convergents.contains(&f) {
                ApproximantSource::Convergent
            } else {
                ApproximantSource::Scan
            },
        })
        .collect())
}

/// `|cos(2παQ)|` evaluated at high precision, the diagonal of the coin at `Q`.
pub fn boundary_diagonal(alpha: &PreciseReal, f: QuarterFraction) -> f64 {
    alpha.turn_trig(f.q() as i64).0.abs()
}

/// The limit `π/(2Q)` that [`boundary_diagonal`] stays below for a certified
/// approximant.
pub fn boundary_diagonal_limit(f: QuarterFraction) -> f64 {
    std::f64::consts::FRAC_PI_2 / f.q() as f64
}

/// The rational `P/(4Q)` as an exact value.
pub fn quarter_value(f: QuarterFraction) -> BigRational {
    BigRational::new(BigInt::from(f.p()), BigInt::from(4 * f.q()))
}

/// `|α - P/(4Q)|` at the enclosure's worst point, as a float for reporting.
pub fn approximation_error(alpha: &Enclosure, f: QuarterFraction) -> f64 {
    let d = alpha.max_distance(&quarter_value(f));
    d.numer().to_f64().unwrap_or(f64::INFINITY) / d.denom().to_f64().unwrap_or(f64::INFINITY)
}
