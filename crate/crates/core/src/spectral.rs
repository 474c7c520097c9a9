//! The `4Q`-dimensional one-step operators for `α = P/(4Q)` and their spectra.
//!
//! Basis order: `ψ(−Q;R), ψ(−Q+1;L), ψ(−Q+1;R), …, ψ(Q−1;L), ψ(Q−1;R), ψ(Q;L)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{eigen_decomposition, CMatrix, EigenPair};
use crate::error::{Error, Result};
use crate::trig::QuarterFraction;
use crate::walk::Order;

/// Tolerance of the spectral property checks.
pub const PROPERTY_TOL: f64 = 1e-9;

/// Smallest eigenvalue separation accepted as a simple spectrum.
pub const SIMPLE_GAP: f64 = 1e-6;

const UNITARY_TOL: f64 = 1e-12;

/// A square matrix checked to be unitary to `1e-12` entrywise.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= UNITARY_TOL) {
            return Err(Error::InvalidInput(format!(
                "matrix is not unitary (max |MM† - I| = {defect:e})"
            )));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Product of two unitaries, unitary up to rounding.
    pub fn mul(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(self.0.mul(&other.0))
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }
}

/// Basis position of `ψ(n; L)` for `−Q < n ≤ Q`.
pub fn left_index(q: u64, n: i64) -> usize {
    let q = q as i64;
    assert!(-q < n && n <= q, "site {n} has no L slot for Q = {q}");
    if n == q {
        (4 * q - 1) as usize
    } else {
        (1 + 2 * (n + q - 1)) as usize
    }
}

/// Basis position of `ψ(n; R)` for `−Q ≤ n < Q`.
pub fn right_index(q: u64, n: i64) -> usize {
    let q = q as i64;
    assert!(-q <= n && n < q, "site {n} has no R slot for Q = {q}");
    if n == -q {
        0
    } else {
        (2 + 2 * (n + q - 1)) as usize
    }
}

/// Lattice site of each basis position.
pub fn basis_sites(q: u64) -> Vec<i64> {
    let q = q as i64;
    let mut sites = Vec::with_capacity(4 * q as usize);
    sites.push(-q);
    for n in -q + 1..q {
        sites.push(n);
        sites.push(n);
    }
    sites.push(q);
    sites
}

/// Coin matrix `𝖢` and shift matrix `𝖶`.
pub fn build_matrices(f: QuarterFraction) -> (UnitaryMatrix, UnitaryMatrix) {
    let q = f.q();
    let dim = 4 * q as usize;
    let qi = q as i64;
    let one = Complex64::new(1.0, 0.0);

    let mut c = CMatrix::zeros(dim);
    let edge = Complex64::new(f.boundary_sign(), 0.0);
    c[(0, 0)] = edge;
    c[(dim - 1, dim - 1)] = edge;
    for n in -qi + 1..qi {
        let (cs, sn) = f.trig(n);
        let (l, r) = (left_index(q, n), right_index(q, n));
        c[(l, l)] = Complex64::new(cs, 0.0);
        c[(l, r)] = Complex64::new(-sn + 0.0, 0.0);
        c[(r, l)] = Complex64::new(sn, 0.0);
        c[(r, r)] = Complex64::new(cs, 0.0);
    }

    let mut w = CMatrix::zeros(dim);
    w[(0, left_index(q, -qi + 1))] = one;
    for n in -qi + 1..qi {
        w[(left_index(q, n), left_index(q, n + 1))] = one;
        w[(right_index(q, n), right_index(q, n - 1))] = one;
    }
    w[(dim - 1, right_index(q, qi - 1))] = one;

    (
        UnitaryMatrix::new(c).expect("coin matrix is unitary by construction"),
        UnitaryMatrix::new(w).expect("shift matrix is a permutation"),
    )
}

/// `𝖢𝖶` for [`Order::CW`], `𝖶𝖢` for [`Order::WC`].
pub fn one_step_matrix(f: QuarterFraction, order: Order) -> UnitaryMatrix {
    let (c, w) = build_matrices(f);
    match order {
        Order::CW => c.mul(&w),
        Order::WC => w.mul(&c),
    }
}

fn context(f: QuarterFraction, order: Order) -> String {
    format!("alpha = {f} ({order})")
}

/// Eigenpairs of a unitary, each with residual at most `1e-9`.
pub fn eigenpairs(m: &UnitaryMatrix, context: &str) -> Result<Vec<EigenPair>> {
    eigen_decomposition(&m.0, context)
}

pub fn eigenvalues(m: &UnitaryMatrix) -> Result<Vec<Complex64>> {
    Ok(eigenpairs(m, "unitary matrix")?.into_iter().map(|p| p.value).collect())
}

/// Principal argument in `(−π, π]`; values within `1e-12` of `−π` map to `π`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI + 1e-12 {
        PI
    } else {
        a
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Bottleneck distance between two ascending argument lists read as points
/// on the circle: the largest pointwise gap, minimized over cyclic shifts so
/// that clusters straddling `±π` line up.
pub fn compare_sorted_args(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    let mut best = if n == 0 { 0.0 } else { f64::INFINITY };
    for shift in 0..n {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(circular_distance(a[i], b[(i + shift) % n]));
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    best
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub f: QuarterFraction,
    pub order: Order,
    /// Sorted by argument.
    pub eigenvalues: Vec<Complex64>,
    /// Ascending principal arguments.
    pub args: Vec<f64>,
    /// Largest eigenvector residual `‖Mv − λv‖`.
    pub max_residual: f64,
    /// Largest `| |λ| − 1 |`.
    pub max_modulus_defect: f64,
}

impl Spectrum {
    fn from_pairs(f: QuarterFraction, order: Order, pairs: &[EigenPair]) -> Result<Self> {
        let mut vals: Vec<(f64, Complex64)> = pairs.iter().map(|p| (principal_arg(p.value), p.value)).collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let max_modulus_defect = vals.iter().map(|(_, z)| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        if !(max_modulus_defect <= PROPERTY_TOL) {
            return Err(Error::convergence(
                context(f, order),
                format!("eigenvalue modulus off by {max_modulus_defect:e}"),
            ));
        }
        Ok(Spectrum {
            f,
            order,
            args: vals.iter().map(|v| v.0).collect(),
            eigenvalues: vals.iter().map(|v| v.1).collect(),
            max_residual: pairs.iter().map(|p| p.residual).fold(0.0, f64::max),
            max_modulus_defect,
        })
    }

    pub fn product(&self) -> Complex64 {
        self.eigenvalues.iter().product()
    }
}

pub fn spectrum(f: QuarterFraction, order: Order) -> Result<Spectrum> {
    let m = one_step_matrix(f, order);
    let pairs = eigenpairs(&m, &context(f, order))?;
    Spectrum::from_pairs(f, order, &pairs)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub pass: bool,
    pub residual: f64,
}

impl PropertyCheck {
    fn at_most(residual: f64, tol: f64) -> Self {
        PropertyCheck {
            pass: residual <= tol,
            residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub f: QuarterFraction,
    /// Same spectrum at `1 − α`.
    pub p1: PropertyCheck,
    /// Closed under complex conjugation.
    pub p2: PropertyCheck,
    /// Closed under `λ → −λ`.
    pub p3: PropertyCheck,
    /// Simple; the residual is the smallest pairwise distance.
    pub p4: PropertyCheck,
    /// Contains `±1, ±i`.
    pub p5: PropertyCheck,
    pub det_ok: bool,
    /// `|Πλ + 1|`.
    pub det_residual: f64,
    pub simple_gap: f64,
    /// `CW` and `WC` argument lists agree.
    pub orders_agree: PropertyCheck,
    pub max_eigen_residual: f64,
    pub args: Vec<f64>,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.p1.pass && self.p2.pass && self.p3.pass && self.p4.pass && self.p5.pass && self.det_ok && self.orders_agree.pass
    }
}

fn nearest(target: Complex64, set: &[Complex64]) -> f64 {
    set.iter().map(|z| (z - target).norm()).fold(f64::INFINITY, f64::min)
}

fn min_gap(vals: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            gap = gap.min((vals[i] - vals[j]).norm());
        }
    }
    gap
}

pub fn property_report(f: QuarterFraction) -> Result<PropertyReport> {
    let cw = spectrum(f, Order::CW)?;
    let wc = spectrum(f, Order::WC)?;
    let mirror = spectrum(f.mirror(), Order::CW)?;
    let vals = &cw.eigenvalues;

    let p2 = vals.iter().map(|z| nearest(z.conj(), vals)).fold(0.0, f64::max);
    let p3 = vals.iter().map(|z| nearest(-z, vals)).fold(0.0, f64::max);
    let p5 = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        .iter()
        .map(|&(re, im)| nearest(Complex64::new(re, im), vals))
        .fold(0.0, f64::max);
    let gap = min_gap(vals);
    let det_residual = (cw.product() + 1.0).norm();
    Ok(PropertyReport {
        f,
        p1: PropertyCheck::at_most(compare_sorted_args(&cw.args, &mirror.args), PROPERTY_TOL),
        p2: PropertyCheck::at_most(p2, PROPERTY_TOL),
        p3: PropertyCheck::at_most(p3, PROPERTY_TOL),
        p4: PropertyCheck {
            pass: gap > SIMPLE_GAP,
            residual: gap,
        },
        p5: PropertyCheck::at_most(p5, PROPERTY_TOL),
        det_ok: det_residual <= PROPERTY_TOL,
        det_residual,
        simple_gap: gap,
        orders_agree: PropertyCheck::at_most(compare_sorted_args(&cw.args, &wc.args), PROPERTY_TOL),
        max_eigen_residual: cw.max_residual.max(wc.max_residual).max(mirror.max_residual),
        args: cw.args.clone(),
    })
}

/// Parity `(−1)^n` of the site of each basis vector.
pub fn gauge_signs(q: u64) -> Vec<f64> {
    basis_sites(q)
        .into_iter()
        .map(|n| if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
        .collect()
}

/// Entrywise max of `|G(𝖢𝖶)G⁻¹ + 𝖢𝖶|` with `G = diag((−1)^n)`.
pub fn gauge_check(f: QuarterFraction) -> f64 {
    let m = one_step_matrix(f, Order::CW);
    let g = gauge_signs(f.q());
    let m = m.matrix();
    let mut worst: f64 = 0.0;
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let x = m[(i, j)];
            worst = worst.max((x * (g[i] * g[j]) + x).norm());
        }
    }
    worst
}

/// For each eigenpair `(λ, v)` of `𝖢𝖶`, the residual of `𝖶v` as an
/// eigenvector of `𝖶𝖢` with the same `λ`; returns the largest.
pub fn intertwining_residual(f: QuarterFraction) -> Result<f64> {
    let (c, w) = build_matrices(f);
    let cw = c.mul(&w);
    let wc = w.mul(&c);
    let pairs = eigenpairs(&cw, &context(f, Order::CW))?;
    let mut worst: f64 = 0.0;
    for p in pairs {
        let u = w.matrix().mul_vec(&p.vector);
        let wu = wc.matrix().mul_vec(&u);
        let r = wu
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - p.value * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `(det 𝖢, det 𝖶)`, expected `(1, −1)`.
pub fn factor_determinants(f: QuarterFraction) -> (Complex64, Complex64) {
    let (c, w) = build_matrices(f);
    (c.determinant(), w.determinant())
}

/// Every quarter fraction with `Q <= q_max` and `0 < P < 4Q`, ordered by
/// `(Q, P)`.
pub fn admissible_fractions(q_max: u64) -> Vec<QuarterFraction> {
    (1..=q_max)
        .flat_map(|q| (1..4 * q).step_by(2).filter_map(move |p| QuarterFraction::new(p, q).ok()))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ButterflyRow {
    pub f: QuarterFraction,
    pub alpha: f64,
    pub args: Vec<f64>,
}

/// `𝖢𝖶` arguments for every admissible `α` with `Q <= q_max`, in `(Q, P)`
/// order; the spectra are computed in parallel.
pub fn butterfly(q_max: u64) -> Result<Vec<ButterflyRow>> {
    if q_max == 0 {
        return Err(Error::InvalidInput("q_max must be at least 1".into()));
    }
    let mut jobs = admissible_fractions(q_max);
    // largest matrices first keeps the worker pool busy to the end
    jobs.reverse();
    let mut rows = jobs
        .into_par_iter()
        .map(|f| {
            spectrum(f, Order::CW).map(|s| ButterflyRow {
                f,
                alpha: f.alpha(),
                args: s.args,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.reverse();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{evolve_with, CoinSchedule, Spinor, WalkerState};
    use std::f64::consts::FRAC_PI_2;

    fn qf(p: u64, q: u64) -> QuarterFraction {
        QuarterFraction::new(p, q).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn q1_matrices() {
        let (cm, wm) = build_matrices(qf(1, 1));
        let expected_c = CMatrix::from_diagonal(&[c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(cm.matrix(), &expected_c);
        let v = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        assert_eq!(wm.matrix().mul_vec(&v), vec![v[1], v[3], v[0], v[2]]);
    }

    #[test]
    fn q3_barrier_zeros() {
        let f = qf(1, 3);
        let (cm, _) = build_matrices(f);
        let m = cm.matrix();
        // interior sites n = ±3 are the matrix edges; inside, cos vanishes at no site
        for n in -2i64..=2 {
            let (l, r) = (left_index(3, n), right_index(3, n));
            let zero_diag = m[(l, l)] == c(0.0, 0.0) && m[(r, r)] == c(0.0, 0.0);
            assert_eq!(zero_diag, f.is_barrier(n));
        }
        // the edge scalars stand in for the zero-diagonal coins at ±3 (mod 6)
        for n in [-9i64, -3, 3, 9] {
            assert!(f.is_barrier(n));
            assert_eq!(f.trig(n).0, 0.0);
        }
    }

    #[test]
    fn unitarity_and_determinants() {
        for f in admissible_fractions(8) {
            let (cm, wm) = build_matrices(f);
            assert!(cm.matrix().unitarity_defect() <= 1e-12);
            assert!(wm.matrix().unitarity_defect() == 0.0);
            let (dc, dw) = factor_determinants(f);
            assert!((dc - 1.0).norm() < 1e-12, "{f}: det C = {dc}");
            assert!((dw + 1.0).norm() < 1e-12, "{f}: det W = {dw}");
        }
    }

    // Oracle: the walker evolved with order CW stays inside the basis, so
    // applying 𝖢𝖶 to its coordinate vector must reproduce the next step.
    #[test]
    fn cw_matrix_matches_walk() {
        for f in [qf(1, 1), qf(1, 3), qf(3, 5), qf(7, 4)] {
            let q = f.q();
            let m = one_step_matrix(f, Order::CW);
            let sched = CoinSchedule::quarter(f.p(), q).unwrap();
            let to_vec = |s: &WalkerState| {
                let mut v = vec![c(0.0, 0.0); 4 * q as usize];
                for (n, [l, r]) in s.amplitudes() {
                    if l != c(0.0, 0.0) {
                        v[left_index(q, n)] = l;
                    }
                    if r != c(0.0, 0.0) {
                        v[right_index(q, n)] = r;
                    }
                }
                v
            };
            let mut state = WalkerState::localized(Spinor::symmetric());
            let mut v = to_vec(&state);
            evolve_with(&mut state, &sched, 40, Order::CW, |s| {
                v = m.matrix().mul_vec(&v);
                let w = to_vec(s);
                for (a, b) in v.iter().zip(&w) {
                    assert!((a - b).norm() < 1e-13, "{f} at t={}", s.step_count());
                }
            })
            .unwrap();
        }
    }

    #[test]
    fn q1_spectrum() {
        let s = spectrum(qf(1, 1), Order::CW).unwrap();
        let expected = [-FRAC_PI_2, 0.0, FRAC_PI_2, PI];
        for (a, b) in s.args.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{:?}", s.args);
        }
        let wc = spectrum(qf(1, 1), Order::WC).unwrap();
        assert!(compare_sorted_args(&s.args, &wc.args) < 1e-9);
    }

    #[test]
    fn q3_has_twelve_unimodular() {
        let s = spectrum(qf(1, 3), Order::CW).unwrap();
        assert_eq!(s.eigenvalues.len(), 12);
        assert!(s.max_modulus_defect < 1e-9);
        for t in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)] {
            assert!(nearest(t, &s.eigenvalues) < 1e-9);
        }
    }

    #[test]
    fn q1_report() {
        let r = property_report(qf(1, 1)).unwrap();
        assert!(r.all_pass(), "{r:?}");
        assert!((r.simple_gap - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn reports_for_examples() {
        for f in [qf(1, 3), qf(3, 5)] {
            let r = property_report(f).unwrap();
            assert!(r.all_pass(), "{r:?}");
        }
        let s = spectrum(qf(3, 5), Order::CW).unwrap();
        assert!((s.product() + 1.0).norm() < 1e-9);
    }

    #[test]
    fn gauge_is_exact() {
        for f in [qf(1, 1), qf(1, 2), qf(7, 9)] {
            assert_eq!(gauge_check(f), 0.0);
        }
    }

    #[test]
    fn intertwining() {
        for f in admissible_fractions(6) {
            assert!(intertwining_residual(f).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn butterfly_enumeration() {
        let rows = butterfly(1).unwrap();
        let fs: Vec<_> = rows.iter().map(|r| (r.f.p(), r.f.q())).collect();
        assert_eq!(fs, vec![(1, 1), (3, 1)]);
        assert!(compare_sorted_args(&rows[0].args, &rows[1].args) < 1e-9);
        let rows = butterfly(2).unwrap();
        let fs: Vec<_> = rows.iter().map(|r| (r.f.p(), r.f.q())).collect();
        assert_eq!(fs, vec![(1, 1), (3, 1), (1, 2), (3, 2), (5, 2), (7, 2)]);
        assert!(rows.iter().all(|r| r.args.len() == 4 * r.f.q() as usize));
    }

    #[test]
    fn admissible_matches_brute_force() {
        let mut brute = Vec::new();
        for q in 1u64..=12 {
            for p in 1..4 * q {
                if p % 2 == 1 && num_integer::gcd(p, q) == 1 {
                    brute.push((p, q));
                }
            }
        }
        let got: Vec<_> = admissible_fractions(12).iter().map(|f| (f.p(), f.q())).collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn arg_comparison_wraps() {
        let a = [-PI + 1e-11, 0.0, 1.0];
        let b = [0.0, 1.0, PI];
        assert!(compare_sorted_args(&a, &b) < 1e-10);
        assert_eq!(principal_arg(c(-1.0, -0.0)), PI);
        // a cluster of three near -1 wraps by more than one position
        let a = [-PI + 1e-13, -1.0, 1.0, PI - 1e-12, PI];
        let mut b: Vec<f64> = a.iter().map(|x| -x).collect();
        b.sort_by(f64::total_cmp);
        assert!(compare_sorted_args(&a, &b) < 1e-11);
        assert!(compare_sorted_args(&a, &[0.0; 5]) > 0.9);
    }
}
