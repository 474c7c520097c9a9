use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
#[cfg(test)]
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::precise::PreciseReal;
use crate::trig::{rational_trig, trig_pair_exact, QuarterFraction};

/// Tolerance on `M·M† = I` for coins supplied from outside.
pub const UNITARY_TOL: f64 = 1e-12;

/// A 2×2 matrix `[[a, b], [c, d]]` acting on the `(L, R)` column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl CoinMatrix {
    pub const IDENTITY: CoinMatrix = CoinMatrix {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        c: Complex64::new(0.0, 0.0),
        d: Complex64::new(1.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        CoinMatrix { a, b, c, d }
    }

    /// `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(cos: f64, sin: f64) -> Self {
        CoinMatrix {
            a: Complex64::new(cos, 0.0),
            b: Complex64::new(-sin + 0.0, 0.0),
            c: Complex64::new(sin, 0.0),
            d: Complex64::new(cos, 0.0),
        }
    }

    #[inline]
    pub fn apply(&self, l: Complex64, r: Complex64) -> (Complex64, Complex64) {
        (self.a * l + self.b * r, self.c * l + self.d * r)
    }

    pub fn adjoint(&self) -> Self {
        CoinMatrix {
            a: self.a.conj(),
            b: self.c.conj(),
            c: self.b.conj(),
            d: self.d.conj(),
        }
    }

    pub fn mul(&self, o: &CoinMatrix) -> Self {
        CoinMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Largest entrywise deviation of `M·M†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.mul(&self.adjoint());
        [
            p.a - Complex64::new(1.0, 0.0),
            p.b,
            p.c,
            p.d - Complex64::new(1.0, 0.0),
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }

    /// Both diagonal entries are exactly zero: the site reflects.
    pub fn is_reflecting(&self) -> bool {
        self.a.is_zero() && self.d.is_zero()
    }

    pub fn max_diagonal_magnitude(&self) -> f64 {
        self.a.norm().max(self.d.norm())
    }
}

/// The inverse period `α` of a rotational coin schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum InversePeriod {
    Quarter(QuarterFraction),
    /// Any other rational, kept reduced with a positive denominator.
    Rational(Ratio<i64>),
    Irrational(PreciseReal),
}

impl InversePeriod {
    /// Normalizes a rational, promoting `P/(4Q)` forms to [`InversePeriod::Quarter`].
    pub fn from_ratio(r: Ratio<i64>) -> Self {
        let (num, den) = (*r.numer(), *r.denom());
        if num > 0 && den % 4 == 0 && num % 2 != 0 {
            if let Ok(f) = QuarterFraction::new(num as u64, den as u64 / 4) {
                return InversePeriod::Quarter(f);
            }
        }
        InversePeriod::Rational(r)
    }

    /// Accepts `P/D` (strict quarter-fraction validation when `4 | D`),
    /// `a/b`, plain decimals (exact rationals), decimals ending in `...`
    /// (truncated irrationals), and the names `pi/2`, `golden`,
    /// `golden-ratio`, `sqrt2-1`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "pi/2" => return Ok(InversePeriod::Irrational(PreciseReal::half_pi())),
            "golden" => return Ok(InversePeriod::Irrational(PreciseReal::golden_mean())),
            "golden-ratio" => return Ok(InversePeriod::Irrational(PreciseReal::golden_ratio())),
            "sqrt2-1" => return Ok(InversePeriod::Irrational(PreciseReal::sqrt2_minus_one())),
            _ => {}
        }
        if let Some((num, den)) = s.split_once('/') {
            let d: i64 = den
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
            if d > 0 && d % 4 == 0 {
                return s.parse::<QuarterFraction>().map(InversePeriod::Quarter);
            }
            let n: i64 = num
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
            if d == 0 {
                return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
            }
            return Ok(InversePeriod::from_ratio(Ratio::new(n, d)));
        }
        let x = PreciseReal::parse_decimal(s)?;
        if !x.is_exact() {
            return Ok(InversePeriod::Irrational(x));
        }
        let r = x.midpoint();
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Ok(InversePeriod::from_ratio(Ratio::new(n, d))),
            _ => Err(Error::InvalidInput(format!("{s:?} does not fit a 64-bit fraction"))),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            InversePeriod::Quarter(f) => f.alpha(),
            InversePeriod::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            InversePeriod::Irrational(x) => x.to_f64(),
        }
    }

    pub fn as_quarter(&self) -> Option<QuarterFraction> {
        match self {
            InversePeriod::Quarter(f) => Some(*f),
            _ => None,
        }
    }

    /// The exact value, or `None` for an irrational payload.
    pub fn as_big_rational(&self) -> Option<BigRational> {
        match self {
            InversePeriod::Quarter(f) => Some(BigRational::new(
                BigInt::from(f.p()),
                BigInt::from(f.period()),
            )),
            InversePeriod::Rational(r) => Some(BigRational::new(
                BigInt::from(*r.numer()),
                BigInt::from(*r.denom()),
            )),
            InversePeriod::Irrational(_) => None,
        }
    }

    /// `(cos 2παn, sin 2παn)`.
    pub fn trig(&self, n: i64) -> (f64, f64) {
        match self {
            InversePeriod::Quarter(f) => trig_pair_exact(*f, n),
            InversePeriod::Rational(r) => rational_trig(*r.numer(), *r.denom() as u64, n),
            InversePeriod::Irrational(x) => x.turn_trig(n),
        }
    }

    /// Worst-case absolute error of [`trig`](Self::trig) at site `n`.
    pub fn trig_error_bound(&self, n: i64) -> f64 {
        match self {
            InversePeriod::Irrational(x) => x.turn_trig_error_bound(n),
            _ => 2.0 * f64::EPSILON,
        }
    }

    /// `α + k` (same coins at every site).
    pub fn shifted(&self, k: i64) -> Self {
        match self {
            InversePeriod::Quarter(f) if k >= 0 => InversePeriod::Quarter(
                QuarterFraction::new(f.p() + k as u64 * f.period(), f.q()).expect("shift keeps P odd"),
            ),
            InversePeriod::Irrational(x) => InversePeriod::Irrational(x.add_integer(k)),
            other => {
                let r = other.as_big_rational().expect("rational");
                let s = r + BigRational::from_integer(BigInt::from(k));
                InversePeriod::from_ratio(Ratio::new(
                    s.numer().to_i64().expect("fits"),
                    s.denom().to_i64().expect("fits"),
                ))
            }
        }
    }
}

impl fmt::Display for InversePeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InversePeriod::Quarter(q) => write!(f, "{q}"),
            InversePeriod::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            InversePeriod::Irrational(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for InversePeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InversePeriod::parse(s)
    }
}

/// Sitewise coins, `Id` outside the explicitly given sites.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CustomCoins {
    coins: BTreeMap<i64, CoinMatrix>,
}

impl CustomCoins {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, site: i64, coin: CoinMatrix) -> Result<()> {
        let deviation = coin.unitarity_defect();
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NonUnitaryCoin { site, deviation });
        }
        self.coins.insert(site, coin);
        Ok(())
    }

    pub fn with(mut self, site: i64, coin: CoinMatrix) -> Result<Self> {
        self.insert(site, coin)?;
        Ok(self)
    }

    pub fn get(&self, site: i64) -> CoinMatrix {
        self.coins.get(&site).copied().unwrap_or(CoinMatrix::IDENTITY)
    }
}

/// Rule assigning a coin to every lattice site.
#[derive(Clone, Debug, PartialEq)]
pub enum CoinSchedule {
    /// `Ĉ_n` = rotation by `2παn`.
    Rotational(InversePeriod),
    /// Independent Haar-random `U(2)` coin per site.
    Random { seed: u64 },
    Custom(CustomCoins),
}

impl CoinSchedule {
    pub fn rotational(alpha: InversePeriod) -> Self {
        CoinSchedule::Rotational(alpha)
    }

    pub fn quarter(p: u64, q: u64) -> Result<Self> {
        Ok(CoinSchedule::Rotational(InversePeriod::Quarter(QuarterFraction::new(p, q)?)))
    }

    pub fn identity() -> Self {
        CoinSchedule::Custom(CustomCoins::new())
    }

    pub fn coin_at(&self, n: i64) -> CoinMatrix {
        match self {
            CoinSchedule::Rotational(alpha) => {
                let (c, s) = alpha.trig(n);
                CoinMatrix::rotation(c, s)
            }
            CoinSchedule::Random { seed } => haar_coin(*seed, n),
            CoinSchedule::Custom(coins) => coins.get(n),
        }
    }

    /// Precomputes coins on `first..=last`.
    pub fn table(&self, first: i64, last: i64) -> CoinTable<'_> {
        let coins = if last >= first {
            (first..=last).map(|n| self.coin_at(n)).collect()
        } else {
            Vec::new()
        };
        CoinTable {
            schedule: self,
            first,
            coins,
        }
    }

    pub fn description(&self) -> String {
        match self {
            CoinSchedule::Rotational(alpha) => format!("rotational alpha={alpha}"),
            CoinSchedule::Random { seed } => format!("haar-random seed={seed}"),
            CoinSchedule::Custom(c) => format!("custom ({} explicit sites)", c.coins.len()),
        }
    }
}

/// Haar-distributed `U(2)` element from the 4-angle parametrization
/// `e^{iφ}[[e^{iψ}cosθ, e^{iχ}sinθ], [-e^{-iχ}sinθ, e^{-iψ}cosθ]]`,
/// with `sin²θ` uniform on `[0, 1)`. The generator is ChaCha20 keyed by
/// `seed`, on the stream selected by the site index.
pub fn haar_coin(seed: u64, n: i64) -> CoinMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    let xi: f64 = rng.gen();
    let phi = TAU * rng.gen::<f64>();
    let psi = TAU * rng.gen::<f64>();
    let chi = TAU * rng.gen::<f64>();
    let theta = xi.sqrt().asin();
    let global = Complex64::from_polar(1.0, phi);
    let (c, s) = (theta.cos(), theta.sin());
    CoinMatrix {
        a: global * Complex64::from_polar(c, psi),
        b: global * Complex64::from_polar(s, chi),
        c: -global * Complex64::from_polar(s, -chi),
        d: global * Complex64::from_polar(c, -psi),
    }
}

/// Anything that can hand out the coin for a site.
pub trait CoinSource {
    fn coin(&self, n: i64) -> CoinMatrix;
}

impl CoinSource for CoinSchedule {
    fn coin(&self, n: i64) -> CoinMatrix {
        self.coin_at(n)
    }
}

/// Cached coins on a site range, falling back to the schedule elsewhere.
pub struct CoinTable<'a> {
    schedule: &'a CoinSchedule,
    first: i64,
    coins: Vec<CoinMatrix>,
}

impl CoinSource for CoinTable<'_> {
    #[inline]
    fn coin(&self, n: i64) -> CoinMatrix {
        let i = n - self.first;
        if i >= 0 && (i as usize) < self.coins.len() {
            self.coins[i as usize]
        } else {
            self.schedule.coin_at(n)
        }
    }
}
