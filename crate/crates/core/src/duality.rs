//! The dual basis `|n, L̃⟩`, `|n, R̃⟩` on the ring `Z_{4Q}`, in which the shift
//! acts as a sitewise coin and the coin acts as a shift.
//!
//! The ring is a finite stand-in for the infinite lattice: with `α·4Q = P`
//! an integer every trigonometric sum wraps around exactly.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::trig::{trig_pair_exact, QuarterFraction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DualChirality {
    /// `L̃`
    L,
    /// `R̃`
    R,
}

impl fmt::Display for DualChirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DualChirality::L => "L~",
            DualChirality::R => "R~",
        })
    }
}

/// Amplitudes `[ψ(m; L), ψ(m; R)]` for `m` in `Z_M`.
#[derive(Clone, Debug, PartialEq)]
pub struct RingState {
    amps: Vec<[Complex64; 2]>,
}

impl RingState {
    pub fn zeros(size: usize) -> Self {
        RingState {
            amps: vec![[Complex64::new(0.0, 0.0); 2]; size],
        }
    }

    pub fn size(&self) -> usize {
        self.amps.len()
    }

    pub fn get(&self, m: i64) -> [Complex64; 2] {
        self.amps[m.rem_euclid(self.size() as i64) as usize]
    }

    pub fn amplitudes(&self) -> &[[Complex64; 2]] {
        &self.amps
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &RingState, b: f64) -> RingState {
        RingState {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(x, y)| [x[0] * a + y[0] * b, x[1] * a + y[1] * b])
                .collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_diff(&self, other: &RingState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .flat_map(|(x, y)| [(x[0] - y[0]).norm(), (x[1] - y[1]).norm()])
            .fold(0.0, f64::max)
    }

    /// Ring shift: `L` moves one site down, `R` one site up.
    pub fn shift(&self) -> RingState {
        let m = self.size() as i64;
        RingState {
            amps: (0..m).map(|k| [self.get(k + 1)[0], self.get(k - 1)[1]]).collect(),
        }
    }

    /// Sitewise rotation coins `Ĉ_m` with angle `2παm`.
    pub fn coin(&self, f: QuarterFraction) -> RingState {
        RingState {
            amps: self
                .amps
                .iter()
                .enumerate()
                .map(|(m, &[l, r])| {
                    let (c, s) = f.trig(m as i64);
                    [l * c - r * s, l * s + r * c]
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualVector {
    pub n: i64,
    pub chirality: DualChirality,
    /// Not normalized.
    pub data: RingState,
}

/// `|n, L̃⟩ = Σ_m sin(2παmn)|m,L⟩ + cos(2παmn)|m,R⟩` and
/// `|n, R̃⟩ = Σ_m cos(2παmn)|m,L⟩ + sin(2παmn)|m,R⟩` on `Z_{4Q}`.
pub fn dual_vector(f: QuarterFraction, n: i64, chirality: DualChirality) -> DualVector {
    let size = f.period() as i64;
    let nn = n.rem_euclid(size);
    let amps = (0..size)
        .map(|m| {
            let (c, s) = trig_pair_exact(f, m * nn);
            let (c, s) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
            match chirality {
                DualChirality::L => [s, c],
                DualChirality::R => [c, s],
            }
        })
        .collect();
    DualVector {
        n,
        chirality,
        data: RingState { amps },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub f: QuarterFraction,
    pub ring_size: u64,
    /// Worst entrywise deviation in `W|n,L̃⟩ = cos|n,L̃⟩ + sin|n,R̃⟩` and
    /// `W|n,R̃⟩ = cos|n,R̃⟩ − sin|n,L̃⟩`.
    pub max_residual_w_as_coin: f64,
    /// Worst entrywise deviation in `C|n,L̃⟩ = |n−1,L̃⟩` and `C|n,R̃⟩ = |n+1,R̃⟩`.
    pub max_residual_c_as_shift: f64,
    pub finite_ring_proxy: bool,
}

pub fn verify_duality(f: QuarterFraction) -> DualityReport {
    let size = f.period() as i64;
    let mut w_res: f64 = 0.0;
    let mut c_res: f64 = 0.0;
    for n in 0..size {
        let lt = dual_vector(f, n, DualChirality::L).data;
        let rt = dual_vector(f, n, DualChirality::R).data;
        let (c, s) = f.trig(n);
        w_res = w_res
            .max(lt.shift().max_diff(&lt.combine(c, &rt, s)))
            .max(rt.shift().max_diff(&rt.combine(c, &lt, -s)));
        let down = dual_vector(f, n - 1, DualChirality::L).data;
        let up = dual_vector(f, n + 1, DualChirality::R).data;
        c_res = c_res.max(lt.coin(f).max_diff(&down)).max(rt.coin(f).max_diff(&up));
    }
    DualityReport {
        f,
        ring_size: size as u64,
        max_residual_w_as_coin: w_res,
        max_residual_c_as_shift: c_res,
        finite_ring_proxy: true,
    }
}
