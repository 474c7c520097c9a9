use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coin::{CoinSchedule, CoinSource};
use crate::error::{Error, Result};

/// Deviation of the norm from one that aborts an evolution.
pub const DRIFT_LIMIT: f64 = 1e-9;

/// Tolerance on the normalization of initial states.
pub const NORM_TOL: f64 = 1e-12;

/// Probabilities below this are left out of [`WalkerState::distribution`].
pub const PROBABILITY_FLOOR: f64 = 1e-300;

/// Operator ordering of one time step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    /// `U = W·C`: coin, then shift.
    #[default]
    WC,
    /// `U = C·W`: shift, then coin.
    CW,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::WC => "wc",
            Order::CW => "cw",
        })
    }
}

/// Internal state `cL|L⟩ + cR|R⟩` of a walker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor {
    pub left: Complex64,
    pub right: Complex64,
}

impl Spinor {
    pub fn new(left: Complex64, right: Complex64) -> Result<Self> {
        let s = Spinor { left, right };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "initial spinor has squared norm {n}, expected 1"
            )));
        }
        Ok(s)
    }

    /// Rescales any nonzero pair to unit norm.
    pub fn normalized(left: Complex64, right: Complex64) -> Result<Self> {
        let n = (left.norm_sqr() + right.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidInput("initial spinor must be nonzero".into()));
        }
        Ok(Spinor {
            left: left / n,
            right: right / n,
        })
    }

    /// `(|L⟩ + |R⟩)/√2`.
    pub fn symmetric() -> Self {
        Spinor {
            left: Complex64::new(FRAC_1_SQRT_2, 0.0),
            right: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn left() -> Self {
        Spinor {
            left: Complex64::new(1.0, 0.0),
            right: Complex64::new(0.0, 0.0),
        }
    }

    pub fn right() -> Self {
        Spinor {
            left: Complex64::new(0.0, 0.0),
            right: Complex64::new(1.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.left.norm_sqr() + self.right.norm_sqr()
    }
}

impl Default for Spinor {
    fn default() -> Self {
        Spinor::symmetric()
    }
}

/// Probabilities at one site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteProbability {
    pub left: f64,
    pub right: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub mean: f64,
    pub variance: f64,
    pub std_dev: f64,
    /// `E[|X|^k]` for `k = 1..=4`.
    pub abs_moments: [f64; 4],
}

/// Amplitudes `ψ(n; L)`, `ψ(n; R)` on a contiguous window of sites.
///
/// The window grows by at most one site per side and step, and is trimmed
/// whenever its edge sites carry exactly zero amplitude, so walks confined
/// by exact reflecting coins keep a bounded window.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerState {
    offset: i64,
    amps: Vec<[Complex64; 2]>,
    step_count: u64,
}

impl WalkerState {
    /// The walker at site 0 with the given internal state.
    pub fn localized(spinor: Spinor) -> Self {
        WalkerState {
            offset: 0,
            amps: vec![[spinor.left, spinor.right]],
            step_count: 0,
        }
    }

    /// Builds a state from explicit amplitudes starting at `offset`.
    pub fn from_amplitudes(offset: i64, amps: Vec<[Complex64; 2]>, step_count: u64) -> Result<Self> {
        let mut s = WalkerState {
            offset,
            amps,
            step_count,
        };
        s.trim();
        if s.amps.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        let n = s.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("state has squared norm {n}, expected 1")));
        }
        Ok(s)
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// First stored site.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// `(first, last)` stored sites.
    pub fn window(&self) -> (i64, i64) {
        (self.offset, self.offset + self.amps.len() as i64 - 1)
    }

    /// `[ψ(n; L), ψ(n; R)]`, zero outside the window.
    pub fn amplitude(&self, n: i64) -> [Complex64; 2] {
        let i = n - self.offset;
        if i >= 0 && (i as usize) < self.amps.len() {
            self.amps[i as usize]
        } else {
            [Complex64::new(0.0, 0.0); 2]
        }
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (i64, [Complex64; 2])> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.offset + i as i64, *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .map(|[l, r]| l.norm_sqr() + r.norm_sqr())
            .sum()
    }

    fn trim(&mut self) {
        let zero = |a: &[Complex64; 2]| a[0] == Complex64::new(0.0, 0.0) && a[1] == Complex64::new(0.0, 0.0);
        let lead = self.amps.iter().take_while(|a| zero(a)).count();
        if lead == self.amps.len() {
            return;
        }
        let trail = self.amps.iter().rev().take_while(|a| zero(a)).count();
        self.amps.truncate(self.amps.len() - trail);
        self.amps.drain(..lead);
        self.offset += lead as i64;
    }

    fn check_drift(&self) -> Result<()> {
        let deviation = (self.norm_sqr() - 1.0).abs();
        if !(deviation <= DRIFT_LIMIT) {
            return Err(Error::NumericalDrift {
                step: self.step_count,
                deviation,
            });
        }
        Ok(())
    }

    /// One application of `W·C` or `C·W`.
    pub fn step(&self, coins: &impl CoinSource, order: Order) -> Result<WalkerState> {
        let next = self.advance(coins, order);
        next.check_drift()?;
        Ok(next)
    }

    fn advance(&self, coins: &impl CoinSource, order: Order) -> WalkerState {
        let (first, last) = self.window();
        let len = self.amps.len() + 2;
        let mut out = vec![[Complex64::new(0.0, 0.0); 2]; len];
        match order {
            Order::WC => {
                // ψ'(n-1; L) and ψ'(n+1; R) from Ĉ_n ψ(n)
                for (i, &[l, r]) in self.amps.iter().enumerate() {
                    let (l2, r2) = coins.coin(first + i as i64).apply(l, r);
                    out[i][0] = l2;
                    out[i + 2][1] = r2;
                }
            }
            Order::CW => {
                // ψ'(n) = Ĉ_n (ψ(n+1; L), ψ(n-1; R))
                for (j, slot) in out.iter_mut().enumerate() {
                    let n = first - 1 + j as i64;
                    let l = self.amplitude(n + 1)[0];
                    let r = self.amplitude(n - 1)[1];
                    let (l2, r2) = coins.coin(n).apply(l, r);
                    *slot = [l2, r2];
                }
            }
        }
        debug_assert_eq!(first - 1 + len as i64 - 1, last + 1);
        let mut next = WalkerState {
            offset: first - 1,
            amps: out,
            step_count: self.step_count + 1,
        };
        next.trim();
        next
    }

    /// Applies the adjoint of one step, undoing [`step`](Self::step).
    pub fn unstep(&self, coins: &impl CoinSource, order: Order) -> WalkerState {
        let (first, _) = self.window();
        let len = self.amps.len() + 2;
        let mut out = vec![[Complex64::new(0.0, 0.0); 2]; len];
        match order {
            Order::WC => {
                // ψ(n) = Ĉ_n† (ψ'(n-1; L), ψ'(n+1; R))
                for (j, slot) in out.iter_mut().enumerate() {
                    let n = first - 1 + j as i64;
                    let l = self.amplitude(n - 1)[0];
                    let r = self.amplitude(n + 1)[1];
                    let (l0, r0) = coins.coin(n).adjoint().apply(l, r);
                    *slot = [l0, r0];
                }
            }
            Order::CW => {
                // φ(n) = Ĉ_n† ψ'(n); ψ(n+1; L) = φ(n; L), ψ(n-1; R) = φ(n; R)
                for (i, &[l, r]) in self.amps.iter().enumerate() {
                    let (l0, r0) = coins.coin(first + i as i64).adjoint().apply(l, r);
                    out[i + 2][0] = l0;
                    out[i][1] = r0;
                }
            }
        }
        let mut prev = WalkerState {
            offset: first - 1,
            amps: out,
            step_count: self.step_count.saturating_sub(1),
        };
        prev.trim();
        prev
    }

    /// Per-site probabilities, omitting sites with total below
    /// [`PROBABILITY_FLOOR`].
    pub fn distribution(&self) -> BTreeMap<i64, SiteProbability> {
        self.amplitudes()
            .filter_map(|(n, [l, r])| {
                let (pl, pr) = (l.norm_sqr(), r.norm_sqr());
                let total = pl + pr;
                (total >= PROBABILITY_FLOOR).then_some((
                    n,
                    SiteProbability {
                        left: pl,
                        right: pr,
                        total,
                    },
                ))
            })
            .collect()
    }

    pub fn probability(&self, n: i64) -> f64 {
        let [l, r] = self.amplitude(n);
        l.norm_sqr() + r.norm_sqr()
    }

    pub fn origin_probability(&self) -> f64 {
        self.probability(0)
    }

    /// Smallest interval containing every site with probability above
    /// `threshold`; `0` selects the exactly nonzero sites.
    pub fn support(&self, threshold: f64) -> Result<(i64, i64)> {
        let mut sites = self
            .amplitudes()
            .filter(|(_, [l, r])| l.norm_sqr() + r.norm_sqr() > threshold)
            .map(|(n, _)| n);
        let first = sites.next().ok_or(Error::EmptySupport { threshold })?;
        let last = sites.last().unwrap_or(first);
        Ok((first, last))
    }

    /// Total probability on sites outside `[lo, hi]`.
    pub fn probability_outside(&self, lo: i64, hi: i64) -> f64 {
        self.amplitudes()
            .filter(|(n, _)| *n < lo || *n > hi)
            .map(|(_, [l, r])| l.norm_sqr() + r.norm_sqr())
            .sum()
    }

    /// Moments of the position distribution, normalized by its total mass.
    pub fn moment_stats(&self) -> MomentStats {
        let mut mass = 0.0;
        let mut first = 0.0;
        let mut abs = [0.0; 4];
        for (n, [l, r]) in self.amplitudes() {
            let p = l.norm_sqr() + r.norm_sqr();
            let x = n as f64;
            mass += p;
            first += p * x;
            let ax = x.abs();
            let mut pow = 1.0;
            for m in abs.iter_mut() {
                pow *= ax;
                *m += p * pow;
            }
        }
        let mean = first / mass;
        let variance = self
            .amplitudes()
            .map(|(n, [l, r])| (l.norm_sqr() + r.norm_sqr()) * (n as f64 - mean).powi(2))
            .sum::<f64>()
            / mass;
        MomentStats {
            mean,
            variance,
            std_dev: variance.sqrt(),
            abs_moments: abs.map(|m| m / mass),
        }
    }
}

/// Runs `t` steps from `spinor` at the origin.
pub fn evolve(spinor: Spinor, schedule: &CoinSchedule, t: u64, order: Order) -> Result<WalkerState> {
    let mut state = WalkerState::localized(spinor);
    evolve_with(&mut state, schedule, t, order, |_| {})?;
    Ok(state)
}

/// Advances `state` by `t` steps, calling `observe` after every step.
pub fn evolve_with(
    state: &mut WalkerState,
    schedule: &CoinSchedule,
    t: u64,
    order: Order,
    mut observe: impl FnMut(&WalkerState),
) -> Result<()> {
    let (first, last) = state.window();
    let reach = t as i64 + 1;
    let table = schedule.table(first - reach, last + reach);
    for _ in 0..t {
        *state = state.step(&table, order)?;
        observe(state);
    }
    Ok(())
}
