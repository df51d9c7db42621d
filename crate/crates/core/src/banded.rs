//! Square band matrices and an LU factorization with partial pivoting.
//!
//! The global stiffness and mass matrices of a 1D mesh numbered from left to
//! right have a half-bandwidth of at most 3, so all the shifted systems the
//! operator needs are solved in `O(n)`.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real or complex field element.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn re(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
}

/// Band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    // entry (i, j) lives at (ku + i - j) + j * (kl + ku + 1)
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![T::zero(); n * (kl + ku + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        (self.ku + i - j) + j * (self.kl + self.ku + 1)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            T::zero()
        }
    }

    /// Adds `v` at `(i, j)`. Panics if the position is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(
            self.in_band(i, j),
            "({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = T::zero();
            for (j, &xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                acc += self.data[self.slot(i, j)] * xj;
            }
            *yi = acc;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<T>
    where
        T: nalgebra::Scalar,
    {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn factor(&self) -> Result<BandLu<T>> {
        BandLu::new(self)
    }
}

impl BandMatrix<f64> {
    /// Quadratic form `xᵀ A x` for a real matrix and a real or complex vector,
    /// returned as `x^H A x`.
    pub fn quad_form<T: Scalar>(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (i, &xi) in x.iter().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut row = T::zero();
            for (j, &xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                row += T::from_real(self.data[self.slot(i, j)]) * xj;
            }
            acc += xi.conj() * row;
        }
        acc
    }

    /// `y = A x` with a real matrix acting on a real or complex vector.
    pub fn apply<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = T::zero();
            for (j, &xj) in x.iter().enumerate().take(hi + 1).skip(lo) {
                acc += T::from_real(self.data[self.slot(i, j)]) * xj;
            }
            *yi = acc;
        }
    }

    /// `Σ c_m A_m` over real matrices of one common shape.
    pub fn combine<T: Scalar>(terms: &[(T, &BandMatrix<f64>)]) -> BandMatrix<T> {
        let first = terms.first().expect("at least one term").1;
        let (n, kl, ku) = (first.n, first.kl, first.ku);
        let mut out = BandMatrix::zeros(n, kl, ku);
        for &(c, m) in terms {
            assert!(m.n == n && m.kl == kl && m.ku == ku, "band shapes differ");
            for (o, &v) in out.data.iter_mut().zip(&m.data) {
                *o += c * T::from_real(v);
            }
        }
        out
    }

    /// Number of eigenvalues of the pencil `(A, B)` below `shift`, for
    /// symmetric `A` and SPD `B` (Sylvester inertia of `A - shift B` via an
    /// unpivoted band LDLᵀ).
    pub fn count_below(&self, b: &BandMatrix<f64>, shift: f64) -> usize {
        let n = self.n;
        let w = self.kl.max(b.kl);
        // dense band rows of the lower triangle: low[i][k] = S(i, i-k)
        let mut low = vec![vec![0.0; w + 1]; n];
        for (i, row) in low.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                if k <= i {
                    *v = self.get(i, i - k) - shift * b.get(i, i - k);
                }
            }
        }
        let tiny = f64::EPSILON * self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        // low[i][i-k] holds A(i,k) on entry and L(i,k) once column k is done
        let mut d = vec![0.0; n];
        let mut negatives = 0;
        for j in 0..n {
            let first = j.saturating_sub(w);
            let mut dj = low[j][0];
            for k in first..j {
                let l = low[j][j - k];
                dj -= l * l * d[k];
            }
            if dj.abs() < tiny {
                dj = -tiny;
            }
            d[j] = dj;
            if dj < 0.0 {
                negatives += 1;
            }
            for i in j + 1..=(j + w).min(n - 1) {
                let mut v = low[i][i - j];
                for k in i.saturating_sub(w)..j {
                    v -= low[i][i - k] * low[j][j - k] * d[k];
                }
                low[i][i - j] = v / dj;
            }
        }
        negatives
    }
}

/// `P A = L U` for a band matrix; `U` gains `kl` extra super-diagonals.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    fn new(a: &BandMatrix<T>) -> Result<Self> {
        let (n, kl) = (a.n, a.kl);
        let ku = a.kl + a.ku;
        let ld = kl + ku + 1;
        let mut ab = vec![T::zero(); n * ld];
        let at = |i: usize, j: usize| (ku + i - j) + j * ld;
        for j in 0..n {
            for i in j.saturating_sub(a.ku)..=(j + kl).min(n.saturating_sub(1)) {
                ab[at(i, j)] = a.get(i, j);
            }
        }
        let scale = ab.iter().fold(0.0f64, |m, v| m.max(v.modulus()));
        let mut pivots = vec![0; n];
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = ab[at(j, j)].modulus();
            for i in j + 1..=last_row {
                let m = ab[at(i, j)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if !(best > scale * f64::EPSILON * 1e-3) || !best.is_finite() {
                return Err(Error::numerical(format!("band matrix is singular at column {j}")));
            }
            pivots[j] = p;
            let last_col = (j + ku).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    ab.swap(at(j, c), at(p, c));
                }
            }
            let piv = ab[at(j, j)];
            for i in j + 1..=last_row {
                let l = ab[at(i, j)] / piv;
                ab[at(i, j)] = l;
                if l == T::zero() {
                    continue;
                }
                for c in j + 1..=last_col {
                    let u = ab[at(j, c)];
                    ab[at(i, c)] -= l * u;
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            ld,
            ab,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn at(&self, i: usize, j: usize) -> usize {
        (self.ku + i - j) + j * self.ld
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            for i in j + 1..=(j + self.kl).min(n - 1) {
                b[i] -= self.ab[self.at(i, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] = b[j] / self.ab[self.at(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(self.ku)..j {
                b[i] -= self.ab[self.at(i, j)] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn random_band(n: usize, kl: usize, ku: usize, vals: &[f64]) -> BandMatrix<f64> {
        let mut m = BandMatrix::zeros(n, kl, ku);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                m.add(i, j, *it.next().unwrap());
            }
        }
        m
    }

    proptest! {
        #[test]
        fn lu_solves_match_dense(vals in proptest::collection::vec(-1.0f64..1.0, 40), n in 3usize..25, kl in 0usize..4, ku in 0usize..4) {
            let a = random_band(n, kl, ku, &vals);
            let dense = a.to_dense();
            let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.3).collect();
            if let Ok(lu) = a.factor() {
                let mut x = b.clone();
                lu.solve_in_place(&mut x);
                let r = &dense * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b);
                let cond = dense.clone().svd(false, false).singular_values;
                let ratio = cond.max() / cond.min();
                prop_assume!(ratio < 1e8);
                prop_assert!(r.amax() < 1e-9 * ratio.max(1.0));
            }
        }
    }

    #[test]
    fn complex_solve() {
        let n = 12;
        let a = random_band(n, 2, 2, &[0.4, -1.0, 3.0, 0.2, 0.7]);
        let m = random_band(n, 2, 2, &[1.0, 0.1, 0.05]);
        let z = BandMatrix::combine(&[(Complex64::new(1.0, 0.0), &a), (Complex64::new(0.0, 2.5), &m)]);
        let lu = z.factor().unwrap();
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        z.mul_vec(&x, &mut r);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-10);
        }
    }

    #[test]
    fn inertia_count_matches_dense_eigenvalues() {
        // symmetric tridiagonal A and identity-like B
        let n = 20;
        let mut a = BandMatrix::zeros(n, 1, 1);
        let mut b = BandMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            b.add(i, i, 4.0 / 6.0);
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
                a.add(i + 1, i, -1.0);
                b.add(i, i + 1, 1.0 / 6.0);
                b.add(i + 1, i, 1.0 / 6.0);
            }
        }
        let ad: DMatrix<f64> = a.to_dense();
        let bd: DMatrix<f64> = b.to_dense();
        let l = bd.clone().cholesky().unwrap();
        let linv = l.l().try_inverse().unwrap();
        let h = &linv * ad * linv.transpose();
        let eig = h.symmetric_eigenvalues();
        for shift in [0.05, 0.5, 1.7, 3.3, 10.0] {
            let expected = eig.iter().filter(|&&e| e < shift).count();
            assert_eq!(a.count_below(&b, shift), expected, "shift {shift}");
        }
    }
}
