//! Dense complex eigensolver: Householder reduction to Hessenberg form,
//! single-shift QR iteration to a Schur form, and eigenvectors by
//! back-substitution.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;

/// Eigenvector residual `‖Mv − λv‖` above which a decomposition is rejected.
pub const RESIDUAL_LIMIT: f64 = 1e-9;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(d: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of `M·M†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        self.mul(&self.adjoint()).max_abs_diff(&CMatrix::identity(self.n))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.n;
        let mut a = self.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
                .unwrap();
            if a[(piv, k)] == zero() {
                return zero();
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[(k, k)];
            det *= p;
            for i in k + 1..n {
                let f = a[(i, k)] / p;
                if f == zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
        det
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit 2-norm.
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

/// Plane rotation `[[c, s], [-s̄, c]]` with real `c`.
#[derive(Clone, Copy)]
struct Givens {
    c: f64,
    s: Complex64,
}

impl Givens {
    /// Rotation mapping `(a, b)` to `(r, 0)`.
    fn zeroing(a: Complex64, b: Complex64) -> Givens {
        let (na, nb) = (a.norm(), b.norm());
        if nb == 0.0 {
            return Givens {
                c: 1.0,
                s: zero(),
            };
        }
        if na == 0.0 {
            return Givens {
                c: 0.0,
                s: b.conj() / nb,
            };
        }
        let r = na.hypot(nb);
        Givens {
            c: na / r,
            s: (a / na) * b.conj() / r,
        }
    }

    fn rotate(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (x * self.c + self.s * y, -self.s.conj() * x + y * self.c)
    }

    // [x y] · G†
    fn rotate_right(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (x * self.c + y * self.s.conj(), -x * self.s + y * self.c)
    }
}

/// Reduces `a` in place to upper Hessenberg form and returns the unitary `Q`
/// with `A = Q H Q†`.
fn hessenberg(a: &mut CMatrix) -> CMatrix {
    let n = a.n;
    let mut q = CMatrix::identity(n);
    let mut v = vec![zero(); n];
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0 == zero() {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        for i in 0..n {
            v[i] = if i > k { a[(i, k)] } else { zero() };
        }
        v[k + 1] -= alpha;
        let vn: f64 = v[k + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in &mut v[k + 1..] {
            *z /= vn;
        }
        // A <- (I - 2vv†) A
        for j in 0..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * a[(i, j)]).sum();
            if s == zero() {
                continue;
            }
            for i in k + 1..n {
                a[(i, j)] -= 2.0 * v[i] * s;
            }
        }
        // A <- A (I - 2vv†), Q <- Q (I - 2vv†)
        for m in [&mut *a, &mut q] {
            for i in 0..n {
                let s: Complex64 = (k + 1..n).map(|j| m[(i, j)] * v[j]).sum();
                if s == zero() {
                    continue;
                }
                for j in k + 1..n {
                    m[(i, j)] -= 2.0 * s * v[j].conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero();
        }
    }
    q
}

/// Eigenvalue of the trailing 2x2 block `[[a, b], [c, d]]` nearest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = d + half + disc;
    let m2 = d + half - disc;
    // the eigenvalues are (a+d)/2 ± disc = d + half ± disc
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Runs shifted QR on Hessenberg `h` until it is upper triangular, applying
/// every rotation to the whole matrix and to `z`.
fn schur(h: &mut CMatrix, z: &mut CMatrix, context: &str) -> Result<()> {
    let n = h.n;
    if n == 0 {
        return Ok(());
    }
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let budget = 60 * n.max(4);
    let mut total_iters = 0usize;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rots: Vec<Givens> = Vec::with_capacity(n);
    while hi > 0 {
        // find the start of the unreduced block ending at hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let tol = if diag == 0.0 { EPS * scale } else { EPS * diag };
            if sub <= tol {
                h[(lo, lo - 1)] = zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total_iters += 1;
        if total_iters > budget {
            return Err(Error::convergence(
                context,
                format!("QR iteration budget of {budget} sweeps exhausted with {} eigenvalues unresolved", hi + 1),
            ));
        }
        let mu = if iter % 11 == 0 {
            // exceptional shift breaks the cycles that pure Wilkinson shifts
            // fall into on permutation-like matrices
            let t = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::from_polar(0.75 * t, iter as f64)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        // QR factorization of the shifted block by rotations from the left
        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rots.clear();
        for k in lo..hi {
            let g = Givens::zeroing(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let (x, y) = g.rotate(h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = x;
                h[(k + 1, j)] = y;
            }
            h[(k + 1, k)] = zero();
            rots.push(g);
        }
        // RQ
        for (idx, g) in rots.iter().enumerate() {
            let k = lo + idx;
            let last = (k + 2).min(hi + 1);
            for i in 0..last {
                let (x, y) = g.rotate_right(h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = x;
                h[(i, k + 1)] = y;
            }
            for i in 0..n {
                let (x, y) = g.rotate_right(z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = x;
                z[(i, k + 1)] = y;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}

/// Eigenvalues and unit eigenvectors of a square matrix, each with its
/// measured residual `‖Mv − λv‖`.
///
/// Fails with [`Error::Convergence`] when the QR budget runs out or any
/// residual exceeds [`RESIDUAL_LIMIT`].
pub fn eigen_decomposition(m: &CMatrix, context: &str) -> Result<Vec<EigenPair>> {
    let n = m.n;
    if m.data.iter().any(|z| !z.is_finite()) {
        return Err(Error::convergence(context, "matrix has non-finite entries"));
    }
    let mut t = m.clone();
    let mut z = hessenberg(&mut t);
    schur(&mut t, &mut z, context)?;

    let small = EPS * t.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    let mut y = vec![zero(); n];
    for k in 0..n {
        let lambda = t[(k, k)];
        y.iter_mut().for_each(|v| *v = zero());
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let s: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * y[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[i] = -s / d;
        }
        let mut v: Vec<Complex64> = (0..n).map(|i| (0..=k).map(|j| z[(i, j)] * y[j]).sum()).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::convergence(context, format!("eigenvector {k} vanished")));
        }
        v.iter_mut().for_each(|c| *c /= norm);
        let mv = m.mul_vec(&v);
        let residual = mv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if !(residual <= RESIDUAL_LIMIT) {
            return Err(Error::convergence(
                context,
                format!("eigenpair {k} (λ = {lambda}) has residual {residual:e}"),
            ));
        }
        pairs.push(EigenPair {
            value: lambda,
            vector: v,
            residual,
        });
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_eigenvalues() {
        let pairs = eigen_decomposition(&CMatrix::identity(4), "identity").unwrap();
        assert_eq!(pairs.len(), 4);
        for p in pairs {
            assert_eq!(p.value, c(1.0, 0.0));
        }
    }

    #[test]
    fn cyclic_permutation() {
        // the 4-cycle has the fourth roots of unity as eigenvalues
        let m = CMatrix::from_fn(4, |i, j| if j == (i + 1) % 4 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let pairs = eigen_decomposition(&m, "4-cycle").unwrap();
        let mut found: Vec<_> = pairs.iter().map(|p| p.value).collect();
        for target in [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)] {
            let i = found.iter().position(|z| (z - target).norm() < 1e-12).unwrap();
            found.remove(i);
        }
    }

    #[test]
    fn long_cycle() {
        let n = 64;
        let m = CMatrix::from_fn(n, |i, j| if j == (i + 1) % n { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let pairs = eigen_decomposition(&m, "64-cycle").unwrap();
        for p in &pairs {
            assert!((p.value.powi(n as i32) - 1.0).norm() < 1e-9);
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn triangular_input() {
        let m = CMatrix::from_fn(3, |i, j| if j >= i { c((i + 2 * j + 1) as f64, j as f64) } else { c(0.0, 0.0) });
        let pairs = eigen_decomposition(&m, "triangular").unwrap();
        let mut vals: Vec<_> = pairs.iter().map(|p| p.value).collect();
        vals.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((vals[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((vals[1] - c(4.0, 1.0)).norm() < 1e-12);
        assert!((vals[2] - c(7.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn determinant_of_permutation() {
        let m = CMatrix::from_fn(4, |i, j| if j == (i + 1) % 4 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!((m.determinant() - c(-1.0, 0.0)).norm() < 1e-15);
        let d = CMatrix::from_diagonal(&[c(2.0, 0.0), c(0.0, 1.0)]);
        assert!((d.determinant() - c(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn hessenberg_is_similarity() {
        let m = CMatrix::from_fn(6, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64));
        let mut h = m.clone();
        let q = hessenberg(&mut h);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }
        assert!(q.unitarity_defect() < 1e-13);
        let back = q.mul(&h).mul(&q.adjoint());
        assert!(back.max_abs_diff(&m) < 1e-12);
    }

    fn random_unitary(seed: u64, n: usize) -> CMatrix {
        // QR of a pseudo-random complex matrix via Gram-Schmidt
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut cols: Vec<Vec<Complex64>> = Vec::new();
        for _ in 0..n {
            let mut v: Vec<Complex64> = (0..n).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            for _ in 0..2 {
                for u in &cols {
                    let d: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, a)| *x -= d * a);
                }
            }
            let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= nv);
            cols.push(v);
        }
        CMatrix::from_fn(n, |i, j| cols[j][i])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitary_spectra_are_unimodular(seed in any::<u64>(), n in 1usize..40) {
            let u = random_unitary(seed, n);
            prop_assert!(u.unitarity_defect() < 1e-12);
            let pairs = eigen_decomposition(&u, "random unitary").unwrap();
            prop_assert_eq!(pairs.len(), n);
            let mut prod = c(1.0, 0.0);
            for p in &pairs {
                prop_assert!((p.value.norm() - 1.0).abs() < 1e-9);
                prop_assert!(p.residual <= 1e-10);
                prod *= p.value;
            }
            prop_assert!((prod - u.determinant()).norm() < 1e-9);
        }

        #[test]
        fn trace_is_sum_of_eigenvalues(seed in any::<u64>(), n in 1usize..25) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = CMatrix::from_fn(n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let pairs = eigen_decomposition(&m, "random").unwrap();
            let tr: Complex64 = (0..n).map(|i| m[(i, i)]).sum();
            let sum: Complex64 = pairs.iter().map(|p| p.value).sum();
            prop_assert!((tr - sum).norm() < 1e-10 * (n as f64));
        }
    }
}
