//! Rank machinery and the real coordinatization of Hermitian space.
//!
//! Exact ranks use fraction-free (Bareiss) elimination over the integers or
//! the Gaussian integers after clearing denominators row by row. Numeric
//! ranks count singular values above a threshold relative to the largest.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{common_denominator, GaussRat, Scalar};
use crate::tensor::{HermitianOp, SystemShape};

/// Dense matrix of Gaussian rationals.
pub type ExactMatrix = Matrix<GaussRat>;

/// Default relative threshold for [`rank_numeric`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Exact rank.
pub fn rank_exact(m: &ExactMatrix) -> usize {
    rank_profile_exact(m).last().copied().unwrap_or(0)
}

/// `profile[c]` is the exact rank of the first `c + 1` columns.
///
/// Elimination runs column by column, so a single pass yields the rank of
/// every column prefix.
pub fn rank_profile_exact(m: &ExactMatrix) -> Vec<usize> {
    let cols = m.cols();
    let mut real = true;
    let mut rows: Vec<Vec<GaussRat>> = Vec::with_capacity(m.rows());
    for r in 0..m.rows() {
        let row = m.row(r);
        if row.iter().all(Scalar::is_zero) {
            continue;
        }
        real &= row.iter().all(GaussRat::is_real);
        let l = common_denominator(row);
        let scaled = if One::is_one(&l) {
            row.to_vec()
        } else {
            let f = GaussRat::from_bigints(l, BigInt::zero());
            row.iter().map(|x| x * &f).collect()
        };
        rows.push(scaled);
    }
    if real {
        let ints = rows
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.re.to_integer()).collect())
            .collect();
        bareiss_profile(ints, cols)
    } else {
        let ints = rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| GaussInt {
                        re: x.re.to_integer(),
                        im: x.im.to_integer(),
                    })
                    .collect()
            })
            .collect();
        bareiss_profile(ints, cols)
    }
}

/// Rank profile of an integer matrix given as rows.
pub fn rank_profile_int(rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<usize> {
    let rows = rows
        .into_iter()
        .filter(|r| r.iter().any(|x| !Zero::is_zero(x)))
        .collect();
    bareiss_profile(rows, cols)
}

/// The Mersenne prime `2^61 - 1`.
pub const MODULUS: u64 = (1 << 61) - 1;

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MODULUS as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    acc
}

/// Rank profile modulo [`MODULUS`]. Every nonzero minor mod p is nonzero
/// over the integers, so each entry is a lower bound on the rational rank.
pub fn rank_profile_mod_p(rows: &[Vec<i128>], cols: usize) -> Vec<usize> {
    let p = MODULUS as i128;
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x.rem_euclid(p) as u64).collect::<Vec<u64>>())
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    let m = a.len();
    let mut rank = 0;
    let mut profile = Vec::with_capacity(cols);
    for col in 0..cols {
        if rank < m {
            if let Some(piv) = (rank..m).find(|&i| a[i][col] != 0) {
                a.swap(rank, piv);
                let inv = powmod(a[rank][col], MODULUS - 2);
                let (top, rest) = a.split_at_mut(rank + 1);
                let prow = &top[rank];
                for row in rest.iter_mut() {
                    if row[col] == 0 {
                        continue;
                    }
                    let f = mulmod(row[col], inv);
                    row[col] = 0;
                    for j in col + 1..cols {
                        if prow[j] != 0 {
                            row[j] = (row[j] + MODULUS - mulmod(f, prow[j])) % MODULUS;
                        }
                    }
                }
                rank += 1;
            }
        }
        profile.push(rank);
    }
    profile
}

/// Integral domain with exact division, enough for Bareiss.
pub(crate) trait ExactRing: Clone + Default {
    fn ring_is_zero(&self) -> bool;
    fn ring_is_one(&self) -> bool;
    fn ring_one() -> Self;
    /// `(p * x - f * y) / d`, the division being exact.
    fn bareiss_step(p: &Self, x: &Self, f: &Self, y: &Self, d: &Self) -> Self;
    /// `p * x / d`, exact.
    fn scale_step(p: &Self, x: &Self, d: &Self) -> Self;
}

impl ExactRing for BigInt {
    fn ring_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn ring_is_one(&self) -> bool {
        One::is_one(self)
    }
    fn ring_one() -> Self {
        One::one()
    }
    fn bareiss_step(p: &Self, x: &Self, f: &Self, y: &Self, d: &Self) -> Self {
        let t = p * x - f * y;
        if d.ring_is_one() {
            t
        } else {
            t / d
        }
    }
    fn scale_step(p: &Self, x: &Self, d: &Self) -> Self {
        if Zero::is_zero(x) {
            return BigInt::zero();
        }
        let t = p * x;
        if d.ring_is_one() {
            t
        } else {
            t / d
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div_exact(&self, d: &Self) -> Self {
        if Zero::is_zero(&d.im) {
            return Self {
                re: &self.re / &d.re,
                im: &self.im / &d.re,
            };
        }
        let n = &d.re * &d.re + &d.im * &d.im;
        let conj = Self {
            re: d.re.clone(),
            im: -d.im.clone(),
        };
        let t = self.mul(&conj);
        Self {
            re: t.re / &n,
            im: t.im / &n,
        }
    }
}

impl ExactRing for GaussInt {
    fn ring_is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn ring_is_one(&self) -> bool {
        One::is_one(&self.re) && Zero::is_zero(&self.im)
    }
    fn ring_one() -> Self {
        Self {
            re: One::one(),
            im: BigInt::zero(),
        }
    }
    fn bareiss_step(p: &Self, x: &Self, f: &Self, y: &Self, d: &Self) -> Self {
        let a = p.mul(x);
        let b = f.mul(y);
        let t = Self {
            re: a.re - b.re,
            im: a.im - b.im,
        };
        if d.ring_is_one() {
            t
        } else {
            t.div_exact(d)
        }
    }
    fn scale_step(p: &Self, x: &Self, d: &Self) -> Self {
        if x.ring_is_zero() {
            return Self::default();
        }
        let t = p.mul(x);
        if d.ring_is_one() {
            t
        } else {
            t.div_exact(d)
        }
    }
}

/// Fraction-free elimination; pivot is the first nonzero entry of the
/// current column among the unreduced rows.
pub(crate) fn bareiss_profile<R: ExactRing>(mut a: Vec<Vec<R>>, cols: usize) -> Vec<usize> {
    let m = a.len();
    let mut rank = 0;
    let mut prev = R::ring_one();
    let mut profile = Vec::with_capacity(cols);
    for col in 0..cols {
        if rank < m {
            if let Some(p) = (rank..m).find(|&i| !a[i][col].ring_is_zero()) {
                a.swap(rank, p);
                let (top, rest) = a.split_at_mut(rank + 1);
                let pivot_row = &top[rank];
                let piv = &pivot_row[col];
                for row in rest.iter_mut() {
                    let f = std::mem::take(&mut row[col]);
                    if f.ring_is_zero() {
                        for j in col + 1..cols {
                            row[j] = R::scale_step(piv, &row[j], &prev);
                        }
                    } else {
                        for j in col + 1..cols {
                            row[j] = R::bareiss_step(piv, &row[j], &f, &pivot_row[j], &prev);
                        }
                    }
                }
                prev = piv.clone();
                rank += 1;
            }
        }
        profile.push(rank);
    }
    profile
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn rank_numeric(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    count_above(m.clone().singular_values().as_slice(), rel_tol)
}

pub fn rank_numeric_complex(m: &Matrix<Complex64>, rel_tol: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let dm = DMatrix::from_row_slice(m.rows(), m.cols(), m.data());
    count_above(dm.singular_values().as_slice(), rel_tol)
}

fn count_above(sv: &[f64], rel_tol: f64) -> usize {
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Float image of an exact matrix with real entries. Imaginary parts are
/// dropped.
pub fn to_f64_real(m: &ExactMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)].to_c64().re)
}

/// One element of the ordered real basis of Hermitian `d x d` matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    /// `E_kk`
    Diagonal(usize),
    /// `(E_kl + E_lk)`, scaled by `1/sqrt(2)` in the orthonormal variant.
    Symmetric(usize, usize),
    /// `i(E_kl - E_lk)`, scaled by `1/sqrt(2)` in the orthonormal variant.
    Antisymmetric(usize, usize),
}

/// Frozen ordering: all diagonal units first, then for each `k < l` in
/// lexicographic order the symmetric element followed by the antisymmetric
/// one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianBasis {
    d: usize,
    labels: Vec<BasisLabel>,
}

impl HermitianBasis {
    pub fn new(d: usize) -> Self {
        let mut labels = Vec::with_capacity(d * d);
        labels.extend((0..d).map(BasisLabel::Diagonal));
        for k in 0..d {
            for l in k + 1..d {
                labels.push(BasisLabel::Symmetric(k, l));
                labels.push(BasisLabel::Antisymmetric(k, l));
            }
        }
        Self { d, labels }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    /// Position of the coordinate for pair `(k, l)`, `k < l`.
    pub fn pair_offset(d: usize, k: usize, l: usize) -> usize {
        debug_assert!(k < l && l < d);
        // pairs before row k: sum_{j<k} (d-1-j)
        let before = k * (2 * d - k - 1) / 2;
        d + 2 * (before + (l - k - 1))
    }

    /// Element of the unnormalized basis as a matrix.
    pub fn element<S: Scalar>(&self, idx: usize) -> Matrix<S> {
        let mut m = Matrix::zeros(self.d, self.d);
        match self.labels[idx] {
            BasisLabel::Diagonal(k) => m[(k, k)] = S::one(),
            BasisLabel::Symmetric(k, l) => {
                m[(k, l)] = S::one();
                m[(l, k)] = S::one();
            }
            BasisLabel::Antisymmetric(k, l) => {
                m[(k, l)] = S::i();
                m[(l, k)] = -S::i();
            }
        }
        m
    }
}

/// Real coordinates in the unnormalized basis: `rho_kk`, `Re rho_kl`,
/// `Im rho_kl`. Entries of the result have zero imaginary part.
pub fn vectorize_unnormalized<S: Scalar>(m: &Matrix<S>) -> Vec<S> {
    let d = m.rows();
    let mut v = Vec::with_capacity(d * d);
    v.extend((0..d).map(|k| m[(k, k)].real_part()));
    for k in 0..d {
        for l in k + 1..d {
            v.push(m[(k, l)].real_part());
            v.push(m[(k, l)].imag_part());
        }
    }
    v
}

pub fn devectorize_unnormalized<S: Scalar>(v: &[S], shape: &SystemShape) -> Result<HermitianOp<S>> {
    let d = shape.d();
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: v.len(),
        });
    }
    let mut m = Matrix::zeros(d, d);
    for k in 0..d {
        m[(k, k)] = v[k].real_part();
    }
    for k in 0..d {
        for l in k + 1..d {
            let o = HermitianBasis::pair_offset(d, k, l);
            let z = v[o].real_part() + S::i() * v[o + 1].real_part();
            m[(l, k)] = z.conj();
            m[(k, l)] = z;
        }
    }
    HermitianOp::new(shape.clone(), m)
}

/// Coordinates with respect to the orthonormal basis (inner product
/// `tr(XY)`); off-diagonal coordinates carry a factor `sqrt(2)`.
pub fn vectorize(rho: &HermitianOp<Complex64>) -> Vec<f64> {
    let s2 = std::f64::consts::SQRT_2;
    let d = rho.dim();
    let m = rho.matrix();
    let mut v = Vec::with_capacity(d * d);
    v.extend((0..d).map(|k| m[(k, k)].re));
    for k in 0..d {
        for l in k + 1..d {
            v.push(s2 * m[(k, l)].re);
            v.push(s2 * m[(k, l)].im);
        }
    }
    v
}

pub fn devectorize(v: &[f64], shape: &SystemShape) -> Result<HermitianOp<Complex64>> {
    let d = shape.d();
    if v.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            got: v.len(),
        });
    }
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Matrix::<Complex64>::zeros(d, d);
    for k in 0..d {
        m[(k, k)] = Complex64::new(v[k], 0.0);
    }
    for k in 0..d {
        for l in k + 1..d {
            let o = HermitianBasis::pair_offset(d, k, l);
            let z = Complex64::new(v[o] * s2, v[o + 1] * s2);
            m[(k, l)] = z;
            m[(l, k)] = z.conj();
        }
    }
    HermitianOp::new(shape.clone(), m)
}
