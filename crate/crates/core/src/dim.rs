//! Dimension formulas, the product-state map `Phi_r` and its Jacobian,
//! explicit witness points, randomized certified probing, and the
//! `C^dagger C` parametrization of low-rank states.
//!
//! All Jacobian ranks are cone dimensions. Affine dimensions of the
//! normalized sets are obtained by subtracting one, and only the table
//! emitters do that.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, ExactMatrix};
use crate::matrix::Matrix;
use crate::scalar::{common_denominator, GaussRat, Scalar};
use crate::tensor::{self, HermitianOp, ProductVector, SystemShape};

/// Default box bound for random Gaussian-integer coordinates.
pub const DEFAULT_BOX: i64 = 7;
/// Default number of probing trials.
pub const DEFAULT_TRIALS: usize = 5;

/// `dim D_r = r(2d - r) - 1` for `1 <= r <= d`.
pub fn dim_d_r(d: usize, r: usize) -> Result<usize> {
    if r == 0 || r > d {
        return Err(Error::OutOfRange(format!("r = {r} not in 1..={d}")));
    }
    Ok(r * (2 * d - r) - 1)
}

/// Cone dimension contributed by one pure product term:
/// `1 + 2 sum(d_i - 1)` over the complex numbers, `sum(d_i) - n + 1` when
/// restricted to real vectors.
pub fn per_term_dim(shape: &SystemShape, real_restricted: bool) -> usize {
    if real_restricted {
        shape.dim_sum() - shape.n() + 1
    } else {
        1 + 2 * (shape.dim_sum() - shape.n())
    }
}

/// Parameter-count bound `r(1 + 2 sum(d_i - 1)) - 1` on the dimension of
/// the normalized states of length at most `r`.
pub fn upper_bound_dim_sprime(shape: &SystemShape, r: usize) -> usize {
    (r * per_term_dim(shape, false)).saturating_sub(1)
}

/// Upper bound on the cone dimension: the parameter count, capped by
/// `d^2`, with the two `2 x N` refinements (`4N^2 - 2` at `r = 2N - 1`
/// because both `det rho` and `det rho^Gamma` vanish there, and `4N^2` at
/// `r = 2N`).
pub fn cone_upper_bound(shape: &SystemShape, r: usize) -> usize {
    let d = shape.d();
    let generic = (r * per_term_dim(shape, false)).min(d * d);
    if let Some(n) = qubit_partner(shape) {
        if n > 1 && r == 2 * n - 1 {
            return generic.min(4 * n * n - 2);
        }
    }
    generic
}

/// Bound for the real-restricted map: `r(sum d_i - n + 1)` capped by
/// `dim H^G`.
pub fn real_cone_upper_bound(shape: &SystemShape, r: usize) -> usize {
    (r * per_term_dim(shape, true)).min(dim_h_g(shape))
}

/// The applicable cone bound for either mode.
pub fn applicable_bound(shape: &SystemShape, r: usize, real_restricted: bool) -> usize {
    if real_restricted {
        real_cone_upper_bound(shape, r)
    } else {
        cone_upper_bound(shape, r)
    }
}

/// `N` when the shape is bipartite with one qubit party.
fn qubit_partner(shape: &SystemShape) -> Option<usize> {
    match shape.dims() {
        [2, n] | [n, 2] => Some(*n),
        _ => None,
    }
}

/// `l = ceil(d^2 / (1 + 2 sum(d_i - 1)))`: separable states of length at
/// least `l` exist.
pub fn length_lower_bound(shape: &SystemShape) -> usize {
    let d = shape.d();
    (d * d).div_ceil(per_term_dim(shape, false))
}

/// Whether the dimension count forces separable states of length
/// exceeding `d`. Requires `n >= 2` and every `d_i >= 2`; dimensions are
/// sorted internally.
///
/// False exactly for `3 x 3` and `N x 2`.
pub fn length_exceeds_d(shape: &SystemShape) -> Result<bool> {
    let mut dims = shape.dims().to_vec();
    if dims.len() < 2 || dims.iter().any(|&x| x < 2) {
        return Err(Error::OutOfRange(
            "need at least two parties, each of dimension >= 2".into(),
        ));
    }
    dims.sort_unstable_by(|a, b| b.cmp(a));
    Ok(!(dims.len() == 2 && ((dims[0] == 3 && dims[1] == 3) || dims[1] == 2)))
}

fn binom2(k: usize) -> usize {
    k * (k + 1) / 2
}

/// `dim H^G = prod C(d_i + 1, 2)`.
pub fn dim_h_g(shape: &SystemShape) -> usize {
    shape.dims().iter().map(|&k| binom2(k)).product()
}

/// `C(d + 1, 2) - 1`.
pub fn dim_s_re(shape: &SystemShape) -> usize {
    binom2(shape.d()) - 1
}

/// `prod C(d_i + 1, 2) - 1`.
pub fn dim_s_g(shape: &SystemShape) -> usize {
    dim_h_g(shape) - 1
}

/// `r` tuples of local vectors, the argument of `Phi_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint<S> {
    shape: SystemShape,
    terms: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> ProductPoint<S> {
    pub fn new(shape: SystemShape, terms: Vec<Vec<Vec<S>>>) -> Result<Self> {
        for t in &terms {
            if t.len() != shape.n() {
                return Err(Error::DimensionMismatch {
                    expected: shape.n(),
                    got: t.len(),
                });
            }
            for (v, &dk) in t.iter().zip(shape.dims()) {
                if v.len() != dk {
                    return Err(Error::DimensionMismatch {
                        expected: dk,
                        got: v.len(),
                    });
                }
            }
        }
        Ok(Self { shape, terms })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn r(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Vec<Vec<S>>] {
        &self.terms
    }

    /// The first `r` terms.
    pub fn prefix(&self, r: usize) -> Self {
        Self {
            shape: self.shape.clone(),
            terms: self.terms[..r.min(self.terms.len())].to_vec(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.terms
            .iter()
            .flatten()
            .flatten()
            .all(|x| x.imag_part().is_zero())
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ProductPoint<T> {
        ProductPoint {
            shape: self.shape.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| t.iter().map(|v| v.iter().map(&f).collect()).collect())
                .collect(),
        }
    }
}

/// `Phi_r(p) = sum_k |a_k1><a_k1| (x) ... (x) |a_kn><a_kn|`.
pub fn phi_r<S: Scalar>(p: &ProductPoint<S>) -> HermitianOp<S> {
    let mut acc = HermitianOp::zeros(p.shape.clone());
    for t in &p.terms {
        let v = ProductVector::new_degenerate(p.shape.clone(), t.clone())
            .expect("lengths validated by ProductPoint");
        acc = acc.add(&tensor::product_state_unchecked(&v));
    }
    acc
}

/// Number of real parameters of a point with `r` terms.
pub fn jacobian_cols(shape: &SystemShape, r: usize, real_restricted: bool) -> usize {
    let per = if real_restricted { 1 } else { 2 };
    per * r * shape.dim_sum()
}

/// Jacobian of `Phi_r` at an exact point, `d^2` rows in the unnormalized
/// Hermitian basis. Columns run over terms, then parties, then local
/// coordinates; for each coordinate the real direction precedes the
/// imaginary one (omitted when `real_restricted`).
pub fn phi_jacobian(p: &ProductPoint<GaussRat>, real_restricted: bool) -> Result<ExactMatrix> {
    let (scaled, scales) = integer_point(p);
    let cols = jacobian_int_columns(&scaled, real_restricted)?;
    let d2 = p.shape.d() * p.shape.d();
    let n = p.shape.n();
    let per_term = jacobian_cols(&p.shape, 1, real_restricted);
    let mut m = ExactMatrix::zeros(d2, cols.len());
    for (c, col) in cols.iter().enumerate() {
        let term = c / per_term;
        let within = c % per_term;
        let party = party_of_column(&p.shape, within, real_restricted);
        // column at p = column at scaled point / (t_j * prod_{j' != j} t_j'^2)
        let t = &scales[term];
        let mut denom = BigInt::one();
        for (j, tj) in t.iter().enumerate().take(n) {
            denom *= if j == party { tj.clone() } else { tj * tj };
        }
        let inv = GaussRat::from_real(num_rational::BigRational::new(BigInt::one(), denom));
        for (r, &x) in col.iter().enumerate() {
            if x != 0 {
                m[(r, c)] = &GaussRat::from_bigints(BigInt::from(x), BigInt::zero()) * &inv;
            }
        }
    }
    Ok(m)
}

fn party_of_column(shape: &SystemShape, within_term: usize, real_restricted: bool) -> usize {
    let per = if real_restricted { 1 } else { 2 };
    let mut idx = within_term / per;
    for (j, &dk) in shape.dims().iter().enumerate() {
        if idx < dk {
            return j;
        }
        idx -= dk;
    }
    unreachable!("column index beyond term block")
}

/// Exact Jacobian ranks of `Phi_s` at the prefixes `p_1, ..., p_r`;
/// entry `s - 1` is the rank for the first `s` terms.
///
/// Rescaling a factor vector by a nonzero rational rescales a block of
/// columns, so ranks are computed at the Gaussian-integer multiple of the
/// point. A rank modulo a large prime is a lower bound on the rational
/// rank; when it meets the cone upper bound at every prefix it is the
/// exact rank. Otherwise the profile comes from Bareiss elimination.
pub fn jacobian_rank_profile(p: &ProductPoint<GaussRat>, real_restricted: bool) -> Result<Vec<usize>> {
    let (scaled, _) = integer_point(p);
    let cols = jacobian_int_columns(&scaled, real_restricted)?;
    let rows = transpose_columns(&cols, p.shape.d() * p.shape.d());
    let per_term = jacobian_cols(&p.shape, 1, real_restricted);
    if !real_restricted || p.is_real() {
        let modular = linalg::rank_profile_mod_p(&rows, cols.len());
        let ranks: Vec<usize> = (1..=p.r()).map(|s| modular[s * per_term - 1]).collect();
        let certified = ranks
            .iter()
            .enumerate()
            .all(|(k, &rk)| rk == applicable_bound(&p.shape, k + 1, real_restricted));
        if certified {
            return Ok(ranks);
        }
    }
    let profile = bareiss_from_rows(rows, cols.len());
    Ok((1..=p.r()).map(|s| profile[s * per_term - 1]).collect())
}

/// Same as [`jacobian_rank_profile`] but always by Bareiss elimination.
pub fn jacobian_rank_profile_bareiss(
    p: &ProductPoint<GaussRat>,
    real_restricted: bool,
) -> Result<Vec<usize>> {
    let (scaled, _) = integer_point(p);
    let cols = jacobian_int_columns(&scaled, real_restricted)?;
    let rows = transpose_columns(&cols, p.shape.d() * p.shape.d());
    let per_term = jacobian_cols(&p.shape, 1, real_restricted);
    let profile = bareiss_from_rows(rows, cols.len());
    Ok((1..=p.r()).map(|s| profile[s * per_term - 1]).collect())
}

fn transpose_columns(cols: &[Vec<i128>], nrows: usize) -> Vec<Vec<i128>> {
    (0..nrows)
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect()
}

fn bareiss_from_rows(rows: Vec<Vec<i128>>, ncols: usize) -> Vec<usize> {
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    linalg::rank_profile_int(rows, ncols)
}

/// Exact Jacobian rank of `Phi_r` at `p`.
pub fn jacobian_rank(p: &ProductPoint<GaussRat>, real_restricted: bool) -> Result<usize> {
    if p.r() == 0 {
        return Ok(0);
    }
    Ok(*jacobian_rank_profile(p, real_restricted)?.last().unwrap())
}

/// Gaussian integer in `i128`, with checked arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct CInt {
    re: i128,
    im: i128,
}

impl CInt {
    const ZERO: CInt = CInt { re: 0, im: 0 };

    fn mul(self, o: Self) -> Option<Self> {
        Some(CInt {
            re: self.re.checked_mul(o.re)?.checked_sub(self.im.checked_mul(o.im)?)?,
            im: self.re.checked_mul(o.im)?.checked_add(self.im.checked_mul(o.re)?)?,
        })
    }

    fn add(self, o: Self) -> Option<Self> {
        Some(CInt {
            re: self.re.checked_add(o.re)?,
            im: self.im.checked_add(o.im)?,
        })
    }

    fn conj(self) -> Self {
        CInt {
            re: self.re,
            im: -self.im,
        }
    }
}

/// Multiplies each factor vector by the lcm of its denominators. Returns
/// the integer point (as `i128` pairs when they fit) and the scale factors.
fn integer_point(p: &ProductPoint<GaussRat>) -> (Vec<Vec<Vec<Option<CInt>>>>, Vec<Vec<BigInt>>) {
    let mut scales = Vec::with_capacity(p.r());
    let terms = p
        .terms
        .iter()
        .map(|t| {
            let mut ts = Vec::with_capacity(t.len());
            let vs = t
                .iter()
                .map(|v| {
                    let l = common_denominator(v);
                    let out = v
                        .iter()
                        .map(|x| {
                            let re = (&x.re * num_rational::BigRational::from_integer(l.clone())).to_integer();
                            let im = (&x.im * num_rational::BigRational::from_integer(l.clone())).to_integer();
                            Some(CInt {
                                re: i128::try_from(re).ok()?,
                                im: i128::try_from(im).ok()?,
                            })
                        })
                        .collect();
                    ts.push(l);
                    out
                })
                .collect();
            scales.push(ts);
            vs
        })
        .collect();
    (terms, scales)
}

/// Real integer Jacobian columns (each of length `d^2`) at an integer
/// point.
fn jacobian_int_columns(
    point: &[Vec<Vec<Option<CInt>>>],
    real_restricted: bool,
) -> Result<Vec<Vec<i128>>> {
    let mut cols = Vec::new();
    for term in point {
        let vecs: Vec<Vec<CInt>> = term
            .iter()
            .map(|v| v.iter().map(|x| x.ok_or(Error::Overflow)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let projectors: Vec<Vec<Vec<CInt>>> = vecs
            .iter()
            .map(|a| outer_int(a, a))
            .collect::<Option<_>>()
            .ok_or(Error::Overflow)?;
        for (j, a) in vecs.iter().enumerate() {
            let dj = a.len();
            for m in 0..dj {
                let dirs: &[CInt] = if real_restricted {
                    &[CInt { re: 1, im: 0 }]
                } else {
                    &[CInt { re: 1, im: 0 }, CInt { re: 0, im: 1 }]
                };
                for &unit in dirs {
                    // |e><a| + |a><e| with e = unit * |m>
                    let mut dmat = vec![vec![CInt::ZERO; dj]; dj];
                    for c in 0..dj {
                        let v = unit.mul(a[c].conj()).ok_or(Error::Overflow)?;
                        dmat[m][c] = dmat[m][c].add(v).ok_or(Error::Overflow)?;
                    }
                    for r in 0..dj {
                        let v = a[r].mul(unit.conj()).ok_or(Error::Overflow)?;
                        dmat[r][m] = dmat[r][m].add(v).ok_or(Error::Overflow)?;
                    }
                    let mut full: Vec<Vec<CInt>> = vec![vec![CInt { re: 1, im: 0 }]];
                    for (jj, pj) in projectors.iter().enumerate() {
                        let f = if jj == j { &dmat } else { pj };
                        full = kron_int(&full, f).ok_or(Error::Overflow)?;
                    }
                    cols.push(vectorize_int(&full));
                }
            }
        }
    }
    Ok(cols)
}

fn outer_int(a: &[CInt], b: &[CInt]) -> Option<Vec<Vec<CInt>>> {
    a.iter()
        .map(|x| b.iter().map(|y| x.mul(y.conj())).collect())
        .collect()
}

fn kron_int(a: &[Vec<CInt>], b: &[Vec<CInt>]) -> Option<Vec<Vec<CInt>>> {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![CInt::ZERO; ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            let x = a[i][j];
            if x == CInt::ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = x.mul(b[k][l])?;
                }
            }
        }
    }
    Some(out)
}

fn vectorize_int(m: &[Vec<CInt>]) -> Vec<i128> {
    let d = m.len();
    let mut v = Vec::with_capacity(d * d);
    v.extend((0..d).map(|k| m[k][k].re));
    for k in 0..d {
        for l in k + 1..d {
            v.push(m[k][l].re);
            v.push(m[k][l].im);
        }
    }
    v
}

/// Float Jacobian of `Phi_r` in the orthonormal Hermitian basis, for
/// cross-checking exact ranks.
pub fn phi_jacobian_float(p: &ProductPoint<Complex64>, real_restricted: bool) -> DMatrix<f64> {
    let shape = &p.shape;
    let d = shape.d();
    let ncols = jacobian_cols(shape, p.r(), real_restricted);
    let mut out = DMatrix::<f64>::zeros(d * d, ncols);
    let mut c = 0;
    let units: &[Complex64] = if real_restricted {
        &[Complex64::new(1.0, 0.0)]
    } else {
        &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]
    };
    for term in &p.terms {
        let projectors: Vec<Matrix<Complex64>> = term.iter().map(|a| Matrix::outer(a, a)).collect();
        for (j, a) in term.iter().enumerate() {
            for m in 0..a.len() {
                for &unit in units {
                    let mut e = vec![Complex64::new(0.0, 0.0); a.len()];
                    e[m] = unit;
                    let dmat = Matrix::outer(&e, a).add(&Matrix::outer(a, &e));
                    let mut full = Matrix::<Complex64>::identity(1);
                    for (jj, pj) in projectors.iter().enumerate() {
                        full = full.kron(if jj == j { &dmat } else { pj });
                    }
                    let op = HermitianOp::new_unchecked(shape.clone(), full);
                    for (r, x) in linalg::vectorize(&op).into_iter().enumerate() {
                        out[(r, c)] = x;
                    }
                    c += 1;
                }
            }
        }
    }
    out
}

fn gi(re: i64, im: i64) -> GaussRat {
    GaussRat::from_gauss(re, im)
}

/// Basis vector combination `sum coeff_k |k>` of length `d`.
fn ket(d: usize, entries: &[(usize, GaussRat)]) -> Vec<GaussRat> {
    let mut v = vec![GaussRat::zero(); d];
    for (k, c) in entries {
        v[*k] = &v[*k] + c;
    }
    v
}

/// The explicit `2N`-term witness point on `2 x N`, `2 <= N <= 8`.
pub fn witness_2xn(n: usize) -> Result<ProductPoint<GaussRat>> {
    if !(2..=8).contains(&n) {
        return Err(Error::OutOfRange(format!("N = {n} not in 2..=8")));
    }
    let one = gi(1, 0);
    let i = gi(0, 1);
    let ni = n as i64;
    let mut terms = Vec::with_capacity(2 * n);
    for k in 1..=n {
        let a = ket(2, &[(0, one.clone()), (1, gi(k as i64 - 1, 0))]);
        let b = ket(n, &[(0, one.clone()), (k - 1, one.clone())]);
        terms.push(vec![a, b]);
    }
    for k in n + 1..=2 * n - 2 {
        let a = ket(2, &[(0, one.clone()), (1, gi(0, k as i64 - ni))]);
        let b = ket(
            n,
            &[(0, one.clone()), (2 * n - k - 1, one.clone()), (2 * n - k, one.clone())],
        );
        terms.push(vec![a, b]);
    }
    terms.push(vec![
        ket(2, &[(0, one.clone()), (1, gi(0, ni - 1))]),
        ket(n, &[(1, i), (n - 1, one.clone())]),
    ]);
    let b_last = if n == 2 {
        ket(n, &[(0, one.clone()), (1, one.clone())])
    } else {
        ket(n, &[(n - 1, one.clone())])
    };
    terms.push(vec![ket(2, &[(0, one)]), b_last]);
    ProductPoint::new(SystemShape::new(vec![2, n])?, terms)
}

/// Cone dimension reached by the `2 x N` witness prefix of length `r`:
/// `(2N+1) r` below `2N - 1`, then `4N^2 - 2`, then `4N^2`.
pub fn witness_2xn_expected_rank(n: usize, r: usize) -> usize {
    if r < 2 * n - 1 {
        (2 * n + 1) * r
    } else if r == 2 * n - 1 {
        4 * n * n - 2
    } else {
        4 * n * n
    }
}

/// The fourteen explicit vector pairs on `3 x 4`.
pub fn witness_3x4() -> ProductPoint<GaussRat> {
    let o = || gi(1, 0);
    let m = || gi(-1, 0);
    let i = || gi(0, 1);
    let mi = || gi(0, -1);
    let a = |e: &[(usize, GaussRat)]| ket(3, e);
    let b = |e: &[(usize, GaussRat)]| ket(4, e);
    let pairs = vec![
        (a(&[(0, o())]), b(&[(0, o())])),
        (a(&[(0, o()), (1, o())]), b(&[(0, o()), (1, o())])),
        (a(&[(0, o()), (1, m())]), b(&[(0, o()), (2, o())])),
        (a(&[(0, o()), (1, i())]), b(&[(0, o()), (3, m())])),
        (a(&[(0, o()), (2, o())]), b(&[(0, o()), (3, o())])),
        (a(&[(0, o()), (2, m())]), b(&[(0, o()), (1, o()), (3, o())])),
        (a(&[(0, o()), (1, o()), (2, o())]), b(&[(0, o()), (2, m())])),
        (a(&[(0, o()), (1, m()), (2, o())]), b(&[(0, o()), (1, mi())])),
        (a(&[(0, o()), (2, gi(1, 1))]), b(&[(0, o()), (1, i())])),
        (a(&[(0, o()), (1, i()), (2, m())]), b(&[(0, o()), (1, o()), (2, o())])),
        (a(&[(0, o()), (1, o()), (2, i())]), b(&[(0, o()), (1, o()), (2, i())])),
        (a(&[(0, o()), (1, i()), (2, o())]), b(&[(0, o()), (2, i()), (3, o())])),
        (a(&[(0, o()), (1, i()), (2, i())]), b(&[(0, o()), (2, o()), (3, o())])),
        (a(&[(0, o()), (1, mi())]), b(&[(0, o()), (1, m())])),
    ];
    let shape = SystemShape::new(vec![3, 4]).expect("valid shape");
    ProductPoint::new(shape, pairs.into_iter().map(|(a, b)| vec![a, b]).collect())
        .expect("valid witness")
}

/// A certified lower bound on a cone dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimCertificate {
    pub shape: SystemShape,
    pub r: usize,
    pub real_restricted: bool,
    pub jacobian_rank: usize,
    pub point: ProductPoint<GaussRat>,
    pub upper_bound: usize,
    pub saturated: bool,
    pub seed: u64,
    pub box_bound: i64,
    pub trials: usize,
    /// Trials actually evaluated; probing stops once every rank is
    /// saturated.
    pub trials_run: usize,
}

impl DimCertificate {
    /// Affine dimension of the normalized set: rank minus one.
    pub fn dim(&self) -> usize {
        self.jacobian_rank.saturating_sub(1)
    }

    /// Recomputes the rank from the stored point.
    pub fn verify(&self) -> Result<bool> {
        let rank = jacobian_rank(&self.point, self.real_restricted)?;
        Ok(rank == self.jacobian_rank
            && self.point.r() == self.r
            && self.jacobian_rank <= self.upper_bound
            && self.saturated == (self.jacobian_rank == self.upper_bound))
    }
}

/// Probing configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeConfig {
    pub trials: usize,
    pub box_bound: i64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            box_bound: DEFAULT_BOX,
            seed: 0,
        }
    }
}

/// Random point with independent uniform Gaussian-integer coordinates in
/// `[-B, B]` (imaginary parts zero when `real_only`); zero factor vectors
/// are redrawn.
pub fn random_point(
    shape: &SystemShape,
    r: usize,
    real_only: bool,
    box_bound: i64,
    rng: &mut impl Rng,
) -> ProductPoint<GaussRat> {
    let b = box_bound.max(1);
    let terms = (0..r)
        .map(|_| {
            shape
                .dims()
                .iter()
                .map(|&dk| loop {
                    let v: Vec<GaussRat> = (0..dk)
                        .map(|_| {
                            let re = rng.gen_range(-b..=b);
                            let im = if real_only { 0 } else { rng.gen_range(-b..=b) };
                            gi(re, im)
                        })
                        .collect();
                    if v.iter().any(|x| !x.is_zero()) {
                        break v;
                    }
                })
                .collect()
        })
        .collect();
    ProductPoint::new(shape.clone(), terms).expect("lengths match shape")
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Certified lower bounds on the cone dimension for every `r` in
/// `1..=r_max`, from random points of length `r_max` and their prefixes.
///
/// Each trial costs one elimination. Trial 0 runs first; the rest run in
/// parallel only if some `r` is still below its bound. Per `r` the best
/// trial wins, ties going to the lowest trial index.
pub fn probe_profile(
    shape: &SystemShape,
    r_max: usize,
    real_restricted: bool,
    cfg: ProbeConfig,
) -> Result<Vec<DimCertificate>> {
    if cfg.trials == 0 || cfg.box_bound < 1 {
        return Err(Error::OutOfRange("trials and box bound must be >= 1".into()));
    }
    if r_max == 0 {
        return Ok(Vec::new());
    }
    let bounds: Vec<usize> = (1..=r_max)
        .map(|r| applicable_bound(shape, r, real_restricted))
        .collect();
    let run = |trial: usize| -> Result<(ProductPoint<GaussRat>, Vec<usize>)> {
        let mut rng = trial_rng(cfg.seed, trial);
        let p = random_point(shape, r_max, real_restricted, cfg.box_bound, &mut rng);
        let prof = jacobian_rank_profile(&p, real_restricted)?;
        Ok((p, prof))
    };
    let mut results = vec![run(0)?];
    let saturated = |prof: &[usize]| prof.iter().zip(&bounds).all(|(a, b)| a >= b);
    if !saturated(&results[0].1) && cfg.trials > 1 {
        let rest: Vec<_> = (1..cfg.trials)
            .into_par_iter()
            .map(run)
            .collect::<Result<Vec<_>>>()?;
        results.extend(rest);
    }
    let trials_run = results.len();
    let certs = (0..r_max)
        .map(|k| {
            let (best, _) = results
                .iter()
                .enumerate()
                .fold((0, 0), |(bi, br), (i, (_, prof))| {
                    if prof[k] > br {
                        (i, prof[k])
                    } else {
                        (bi, br)
                    }
                });
            let rank = results[best].1[k];
            DimCertificate {
                shape: shape.clone(),
                r: k + 1,
                real_restricted,
                jacobian_rank: rank,
                point: results[best].0.prefix(k + 1),
                upper_bound: bounds[k],
                saturated: rank == bounds[k],
                seed: cfg.seed,
                box_bound: cfg.box_bound,
                trials: cfg.trials,
                trials_run,
            }
        })
        .collect();
    Ok(certs)
}

/// Certified lower bound on the cone dimension at a single `r`.
pub fn probe_cone_dim(
    shape: &SystemShape,
    r: usize,
    real_restricted: bool,
    cfg: ProbeConfig,
) -> Result<DimCertificate> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be >= 1".into()));
    }
    let bound = applicable_bound(shape, r, real_restricted);
    let run = |trial: usize| -> Result<(ProductPoint<GaussRat>, usize)> {
        let mut rng = trial_rng(cfg.seed, trial);
        let p = random_point(shape, r, real_restricted, cfg.box_bound, &mut rng);
        let rank = jacobian_rank(&p, real_restricted)?;
        Ok((p, rank))
    };
    if cfg.trials == 0 || cfg.box_bound < 1 {
        return Err(Error::OutOfRange("trials and box bound must be >= 1".into()));
    }
    let mut results = vec![run(0)?];
    if results[0].1 < bound && cfg.trials > 1 {
        let rest: Vec<_> = (1..cfg.trials)
            .into_par_iter()
            .map(run)
            .collect::<Result<Vec<_>>>()?;
        results.extend(rest);
    }
    let trials_run = results.len();
    let best = results
        .iter()
        .enumerate()
        .fold(0, |bi, (i, (_, rank))| if *rank > results[bi].1 { i } else { bi });
    let (point, rank) = results.swap_remove(best);
    Ok(DimCertificate {
        shape: shape.clone(),
        r,
        real_restricted,
        jacobian_rank: rank,
        point,
        upper_bound: bound,
        saturated: rank == bound,
        seed: cfg.seed,
        box_bound: cfg.box_bound,
        trials: cfg.trials,
        trials_run,
    })
}

/// The built-in points `C_0` (`r x 2N`, upper triangular, real diagonal)
/// for `(N, r)` in `{(2,3), (3,3), (3,4), (3,5)}`.
pub fn cholesky_point(n: usize, r: usize) -> Result<ExactMatrix> {
    let rows: Vec<Vec<i64>> = match (n, r) {
        (2, 3) => vec![vec![2, 0, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 1]],
        (3, 3) => (0..3)
            .map(|i| (0..6).map(|j| i64::from(j % 3 == i)).collect())
            .collect(),
        (3, 4) => vec![
            vec![1, 0, 0, 0, 0, 0],
            vec![0, 1, 0, 1, 0, 0],
            vec![0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, 1, 1, 0],
        ],
        (3, 5) => vec![
            vec![1, 0, 0, 0, 0, 0],
            vec![0, 1, 0, 1, 0, 0],
            vec![0, 0, 1, 0, 0, 0],
            vec![0, 0, 0, 1, 2, 0],
            vec![0, 0, 0, 0, 1, 1],
        ],
        _ => {
            return Err(Error::OutOfRange(format!(
                "no built-in point for (N, r) = ({n}, {r})"
            )))
        }
    };
    Ok(Matrix::from_rows(
        rows.into_iter()
            .map(|row| row.into_iter().map(GaussRat::from_i64).collect())
            .collect(),
    )
    .expect("rectangular"))
}

fn check_cholesky_shape(n: usize, r: usize, c: &ExactMatrix) -> Result<()> {
    if c.rows() != r || c.cols() != 2 * n {
        return Err(Error::Malformed(format!(
            "expected {r} x {} matrix, got {} x {}",
            2 * n,
            c.rows(),
            c.cols()
        )));
    }
    for i in 0..r {
        for j in 0..i.min(2 * n) {
            if !c[(i, j)].is_zero() {
                return Err(Error::Malformed(format!("nonzero entry below diagonal at ({i}, {j})")));
            }
        }
        if i < 2 * n && !c[(i, i)].is_real() {
            return Err(Error::Malformed(format!("complex diagonal entry at ({i}, {i})")));
        }
    }
    Ok(())
}

/// `g(C) = C^dagger C` on `2 x N`.
pub fn cholesky_state(n: usize, c: &ExactMatrix) -> Result<HermitianOp<GaussRat>> {
    if c.cols() != 2 * n {
        return Err(Error::Malformed(format!("expected {} columns", 2 * n)));
    }
    let shape = SystemShape::new(vec![2, n])?;
    Ok(HermitianOp::new_unchecked(shape, c.adjoint().matmul(c)))
}

/// Rank of the Jacobian of `C -> C^dagger C` over the real space of
/// `r x 2N` upper-triangular matrices with real diagonal
/// (dimension `r(4N - r)`).
pub fn cholesky_jacobian_rank(n: usize, r: usize, c: &ExactMatrix) -> Result<usize> {
    check_cholesky_shape(n, r, c)?;
    let cols = 2 * n;
    let ch = c.adjoint();
    let mut columns: Vec<Vec<GaussRat>> = Vec::new();
    for i in 0..r {
        for j in i..cols {
            let units: &[GaussRat] = if i == j {
                &[GaussRat::one()][..]
            } else {
                &[GaussRat::one(), gi(0, 1)][..]
            };
            for u in units {
                let mut dc = ExactMatrix::zeros(r, cols);
                dc[(i, j)] = u.clone();
                let dg = dc.adjoint().matmul(c).add(&ch.matmul(&dc));
                columns.push(linalg::vectorize_unnormalized(&dg));
            }
        }
    }
    let d2 = cols * cols;
    let m = Matrix::from_fn(d2, columns.len(), |row, col| columns[col][row].clone());
    Ok(linalg::rank_exact(&m))
}

/// Outcome for one built-in `C_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CholeskyCertificate {
    pub n: usize,
    pub r: usize,
    pub jacobian_rank: usize,
    /// `r(4N - r)`, the cone dimension of states of rank at most `r`.
    pub full_rank: usize,
    pub ppt: bool,
}

impl CholeskyCertificate {
    /// Affine dimension of the normalized rank-`r` separable states, when
    /// the Jacobian is of full rank at a PPT point.
    pub fn certified_dim(&self) -> Option<usize> {
        (self.ppt && self.jacobian_rank == self.full_rank).then(|| self.jacobian_rank - 1)
    }
}

pub fn cholesky_certificate(n: usize, r: usize) -> Result<CholeskyCertificate> {
    let c = cholesky_point(n, r)?;
    let rank = cholesky_jacobian_rank(n, r, &c)?;
    let ppt = tensor::is_ppt(&cholesky_state(n, &c)?);
    Ok(CholeskyCertificate {
        n,
        r,
        jacobian_rank: rank,
        full_rank: r * (4 * n - r),
        ppt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> SystemShape {
        SystemShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert_eq!(dim_d_r(4, 4).unwrap(), 15);
        assert_eq!(dim_d_r(4, 3).unwrap(), 14);
        assert_eq!(dim_d_r(6, 1).unwrap(), 10);
        assert!(dim_d_r(4, 5).is_err());
        assert!(dim_d_r(4, 0).is_err());
        assert_eq!(upper_bound_dim_sprime(&shape(&[3, 4]), 13), 142);
        assert_eq!(upper_bound_dim_sprime(&shape(&[2, 2, 2]), 5), 34);
        assert_eq!(cone_upper_bound(&shape(&[2, 3]), 5), 34);
        assert_eq!(cone_upper_bound(&shape(&[2, 3]), 6), 36);
        assert_eq!(length_lower_bound(&shape(&[3, 3])), 9);
        assert_eq!(length_lower_bound(&shape(&[3, 4])), 14);
        assert_eq!(dim_s_g(&shape(&[2, 2])), 8);
        assert_eq!(dim_s_g(&shape(&[3, 3])), 35);
        assert_eq!(dim_s_re(&shape(&[4, 4])), 135);
    }

    #[test]
    fn length_exceeds_d_cases() {
        assert!(!length_exceeds_d(&shape(&[3, 3])).unwrap());
        assert!(!length_exceeds_d(&shape(&[2, 7])).unwrap());
        assert!(!length_exceeds_d(&shape(&[7, 2])).unwrap());
        assert!(length_exceeds_d(&shape(&[3, 4])).unwrap());
        assert!(length_exceeds_d(&shape(&[2, 2, 2])).unwrap());
        assert!(length_exceeds_d(&shape(&[2, 1])).is_err());
        assert!(length_exceeds_d(&shape(&[5])).is_err());
    }

    #[test]
    fn single_term_jacobian_rank() {
        // a = b = |0> on 2 x 2: rank 2M + 2N - 3 = 5
        let zero = || vec![gi(1, 0), gi(0, 0)];
        let p = ProductPoint::new(shape(&[2, 2]), vec![vec![zero(), zero()]]).unwrap();
        assert_eq!(jacobian_rank(&p, false).unwrap(), 5);
        let j = phi_jacobian(&p, false).unwrap();
        assert_eq!((j.rows(), j.cols()), (16, 8));
        assert_eq!(linalg::rank_exact(&j), 5);
    }

    #[test]
    fn rational_point_jacobian_matches_direct_derivative() {
        // a = (1/2)|0> + (1/3)i|1>, b = |1> on 2 x 2; column for Re a_0:
        // d/dt |a + t e0><a + t e0| (x) |b><b| = (|e0><a| + |a><e0|) (x) |1><1|
        let a = vec![GaussRat::from_ratio(1, 2), GaussRat::new(num_rational::BigRational::zero(), num_rational::BigRational::new(1.into(), 3.into()))];
        let b = vec![gi(0, 0), gi(1, 0)];
        let p = ProductPoint::new(shape(&[2, 2]), vec![vec![a.clone(), b.clone()]]).unwrap();
        let j = phi_jacobian(&p, false).unwrap();
        let e0 = vec![gi(1, 0), gi(0, 0)];
        let dmat = Matrix::outer(&e0, &a).add(&Matrix::outer(&a, &e0));
        let expected = linalg::vectorize_unnormalized(&dmat.kron(&Matrix::outer(&b, &b)));
        for (r, x) in expected.iter().enumerate() {
            assert_eq!(&j[(r, 0)], x, "row {r}");
        }
    }

    #[test]
    fn witness_2xn_entries() {
        let p = witness_2xn(3).unwrap();
        assert_eq!(p.r(), 6);
        let t5 = &p.terms()[4];
        assert_eq!(t5[0], vec![gi(1, 0), gi(0, 2)]);
        assert_eq!(t5[1], vec![gi(0, 0), gi(0, 1), gi(1, 0)]);
        let p2 = witness_2xn(2).unwrap();
        assert_eq!(p2.terms()[3][1], vec![gi(1, 0), gi(1, 0)]);
        assert!(witness_2xn(1).is_err());
        assert!(witness_2xn(9).is_err());
    }

    #[test]
    fn witness_3x4_entries() {
        let p = witness_3x4();
        assert_eq!(p.r(), 14);
        assert_eq!(p.terms()[10][0], vec![gi(1, 0), gi(1, 0), gi(0, 1)]);
        assert_eq!(p.terms()[10][1], vec![gi(1, 0), gi(1, 0), gi(0, 1), gi(0, 0)]);
        assert_eq!(p.terms()[8][0], vec![gi(1, 0), gi(0, 0), gi(1, 1)]);
        assert_eq!(p.terms()[8][1], vec![gi(1, 0), gi(0, 1), gi(0, 0), gi(0, 0)]);
    }

    #[test]
    fn cholesky_zero_and_malformed() {
        let zero = ExactMatrix::zeros(3, 4);
        assert_eq!(cholesky_jacobian_rank(2, 3, &zero).unwrap(), 0);
        let mut bad = zero.clone();
        bad[(2, 0)] = gi(1, 0);
        assert!(matches!(cholesky_jacobian_rank(2, 3, &bad), Err(Error::Malformed(_))));
        let mut bad = zero;
        bad[(1, 1)] = gi(0, 1);
        assert!(matches!(cholesky_jacobian_rank(2, 3, &bad), Err(Error::Malformed(_))));
        assert!(cholesky_point(4, 2).is_err());
    }

    #[test]
    fn cholesky_two_qubits() {
        let cert = cholesky_certificate(2, 3).unwrap();
        assert_eq!(cert.jacobian_rank, 15);
        assert!(cert.ppt);
        assert_eq!(cert.certified_dim(), Some(14));
    }
}
