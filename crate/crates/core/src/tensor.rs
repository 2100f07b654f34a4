//! Multipartite Hermitian operators, partial transposes, the group of
//! partial transposes, and positivity/locality predicates.
//!
//! Basis index of `|i_1, ..., i_n>` is `sum_k i_k * stride_k` with party 1
//! the most significant digit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Kind, Scalar};

/// Relative tolerance on characteristic-polynomial coefficients used by
/// [`is_psd`] for the float kind.
pub const PSD_TOL: f64 = 1e-10;
/// Entrywise tolerance for float equality checks such as G-invariance.
pub const ENTRY_TOL: f64 = 1e-10;
/// Hermiticity tolerance for float operators, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Party dimensions `(d_1, ..., d_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one party required".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape("party dimensions must be positive".into()));
        }
        if dims.len() > 16 {
            return Err(Error::InvalidShape("at most 16 parties supported".into()));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&d| d <= 1 << 16)
            .ok_or_else(|| Error::InvalidShape("total dimension too large".into()))?;
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn d(&self) -> usize {
        self.dims.iter().product()
    }

    /// `sum_i d_i`
    pub fn dim_sum(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.n()];
        for k in (0..self.n().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    /// Digits `(i_1, ..., i_n)` of a basis index.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n()];
        for k in (0..self.n()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Every party dimension doubled.
    pub fn doubled(&self) -> Self {
        Self {
            dims: self.dims.iter().map(|d| 2 * d).collect(),
        }
    }
}

impl TryFrom<Vec<usize>> for SystemShape {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<SystemShape> for Vec<usize> {
    fn from(s: SystemShape) -> Self {
        s.dims
    }
}

impl fmt::Display for SystemShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Subset `S` of parties; bit `i` set means party `i` (0-based) is
/// transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(pub u32);

impl SubsetMask {
    pub const IDENTITY: SubsetMask = SubsetMask(0);

    pub fn single(party: usize) -> Self {
        SubsetMask(1 << party)
    }

    pub fn contains(self, party: usize) -> bool {
        self.0 >> party & 1 == 1
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        SubsetMask(self.0 ^ other.0)
    }

    /// All `2^n` masks, i.e. the group `G`.
    pub fn all(n: usize) -> impl Iterator<Item = SubsetMask> {
        (0..1u32 << n).map(SubsetMask)
    }
}

/// Hermitian operator on a multipartite system.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp<S> {
    shape: SystemShape,
    mat: Matrix<S>,
}

impl<S: Scalar> HermitianOp<S> {
    pub fn new(shape: SystemShape, mat: Matrix<S>) -> Result<Self> {
        let d = shape.d();
        if mat.rows() != d || mat.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mat.rows().max(mat.cols()),
            });
        }
        let tol = HERMITIAN_TOL * mat.max_abs().max(1.0);
        if !mat.is_hermitian(tol) {
            return Err(Error::NotHermitian);
        }
        Ok(Self { shape, mat })
    }

    /// Skips the Hermiticity check; callers guarantee it by construction.
    pub(crate) fn new_unchecked(shape: SystemShape, mat: Matrix<S>) -> Self {
        debug_assert_eq!(mat.rows(), shape.d());
        Self { shape, mat }
    }

    pub fn zeros(shape: SystemShape) -> Self {
        let d = shape.d();
        Self::new_unchecked(shape, Matrix::zeros(d, d))
    }

    pub fn identity(shape: SystemShape) -> Self {
        let d = shape.d();
        Self::new_unchecked(shape, Matrix::identity(d))
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn kind(&self) -> Kind {
        S::KIND
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix<S> {
        self.mat
    }

    pub fn trace(&self) -> S {
        self.mat.trace()
    }

    pub fn rank(&self) -> usize {
        S::rank(&self.mat)
    }

    /// Scaled to unit trace; `None` for traceless operators.
    pub fn normalized(&self) -> Option<Self> {
        let t = self.trace().recip()?;
        Some(Self::new_unchecked(self.shape.clone(), self.mat.scale(&t)))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape);
        Self::new_unchecked(self.shape.clone(), self.mat.add(&other.mat))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape, other.shape);
        Self::new_unchecked(self.shape.clone(), self.mat.sub(&other.mat))
    }

    /// Multiplies by a real scalar. Panics in debug builds on a nonreal
    /// factor.
    pub fn scale(&self, s: &S) -> Self {
        debug_assert!(s.imag_part().is_zero());
        Self::new_unchecked(self.shape.clone(), self.mat.scale(s))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape == other.shape && self.mat.approx_eq(&other.mat, tol)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> HermitianOp<T> {
        HermitianOp::new_unchecked(self.shape.clone(), self.mat.map(f))
    }
}

/// Tuple of local vectors `(a_1, ..., a_n)` representing `|a_1, ..., a_n>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector<S> {
    shape: SystemShape,
    factors: Vec<Vec<S>>,
    degenerate: bool,
}

impl<S: Scalar> ProductVector<S> {
    /// Rejects zero factors.
    pub fn new(shape: SystemShape, factors: Vec<Vec<S>>) -> Result<Self> {
        Self::check_lengths(&shape, &factors)?;
        if let Some(party) = factors.iter().position(|f| f.iter().all(S::is_zero)) {
            return Err(Error::DegenerateVector { party });
        }
        Ok(Self {
            shape,
            factors,
            degenerate: false,
        })
    }

    /// Allows zero factors; flagged so consumers can drop them.
    pub fn new_degenerate(shape: SystemShape, factors: Vec<Vec<S>>) -> Result<Self> {
        Self::check_lengths(&shape, &factors)?;
        let degenerate = factors.iter().any(|f| f.iter().all(S::is_zero));
        Ok(Self {
            shape,
            factors,
            degenerate,
        })
    }

    fn check_lengths(shape: &SystemShape, factors: &[Vec<S>]) -> Result<()> {
        if factors.len() != shape.n() {
            return Err(Error::DimensionMismatch {
                expected: shape.n(),
                got: factors.len(),
            });
        }
        for (f, &d) in factors.iter().zip(shape.dims()) {
            if f.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: f.len(),
                });
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn factors(&self) -> &[Vec<S>] {
        &self.factors
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn is_real(&self) -> bool {
        self.factors
            .iter()
            .flatten()
            .all(|x| x.imag_part().is_zero())
    }

    /// Full tensor product vector of length `d`.
    pub fn full_vector(&self) -> Vec<S> {
        let mut v = vec![S::one()];
        for f in &self.factors {
            v = v
                .iter()
                .flat_map(|a| f.iter().map(move |b| a.clone() * b.clone()))
                .collect();
        }
        v
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ProductVector<T> {
        ProductVector {
            shape: self.shape.clone(),
            factors: self
                .factors
                .iter()
                .map(|v| v.iter().map(&f).collect())
                .collect(),
            degenerate: self.degenerate,
        }
    }
}

/// `|a_1><a_1| (x) ... (x) |a_n><a_n|`.
pub fn product_state<S: Scalar>(v: &ProductVector<S>) -> Result<HermitianOp<S>> {
    if let Some(party) = v.factors.iter().position(|f| f.iter().all(S::is_zero)) {
        return Err(Error::DegenerateVector { party });
    }
    Ok(product_state_unchecked(v))
}

pub(crate) fn product_state_unchecked<S: Scalar>(v: &ProductVector<S>) -> HermitianOp<S> {
    let full = v.full_vector();
    HermitianOp::new_unchecked(v.shape.clone(), Matrix::outer(&full, &full))
}

/// Transposes the tensor factors indexed by `mask`.
pub fn partial_transpose<S: Scalar>(rho: &HermitianOp<S>, mask: SubsetMask) -> HermitianOp<S> {
    if mask == SubsetMask::IDENTITY {
        return rho.clone();
    }
    let shape = rho.shape();
    let d = shape.d();
    // For each basis index, the part of the index carried by transposed
    // parties, and the remainder.
    let strides = shape.strides();
    let split: Vec<(usize, usize)> = (0..d)
        .map(|idx| {
            let digits = shape.digits(idx);
            let moved = (0..shape.n())
                .filter(|&k| mask.contains(k))
                .map(|k| digits[k] * strides[k])
                .sum::<usize>();
            (moved, idx - moved)
        })
        .collect();
    let m = rho.matrix();
    let out = Matrix::from_fn(d, d, |r, c| {
        let (rm, rk) = split[r];
        let (cm, ck) = split[c];
        m[(rk + cm, ck + rm)].clone()
    });
    HermitianOp::new_unchecked(shape.clone(), out)
}

/// Coefficients `c_0..c_d` of `det(tI - A) = sum_i (-1)^i c_i t^(d-i)`.
///
/// Berkowitz's division-free recurrence; no division occurs, so exact
/// entries stay exact.
pub fn char_poly_coeffs<S: Scalar>(a: &Matrix<S>) -> Vec<S> {
    assert!(a.is_square(), "characteristic polynomial needs a square matrix");
    let n = a.rows();
    // p holds det(tI - A_r) for the leading r x r block, highest degree first.
    let mut p = vec![S::one()];
    for r in 0..n {
        // column C = A[0..r, r], row R = A[r, 0..r], leading block M = A[0..r, 0..r]
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(S::one());
        toeplitz.push(-a[(r, r)].clone());
        let mut v: Vec<S> = (0..r).map(|i| a[(i, r)].clone()).collect();
        for k in 0..r {
            let rv = (0..r).fold(S::zero(), |acc, j| acc + a[(r, j)].clone() * v[j].clone());
            toeplitz.push(-rv);
            if k + 1 < r {
                v = (0..r)
                    .map(|i| {
                        (0..r).fold(S::zero(), |acc, j| acc + a[(i, j)].clone() * v[j].clone())
                    })
                    .collect();
            }
        }
        let next: Vec<S> = (0..r + 2)
            .map(|i| {
                (0..=i.min(r))
                    .filter(|&j| i - j < toeplitz.len())
                    .fold(S::zero(), |acc, j| acc + toeplitz[i - j].clone() * p[j].clone())
            })
            .collect();
        p = next;
    }
    p.into_iter()
        .enumerate()
        .map(|(i, x)| if i % 2 == 1 { -x } else { x })
        .collect()
}

/// Positive semidefiniteness via the signs of the characteristic
/// polynomial coefficients, using [`PSD_TOL`].
pub fn is_psd<S: Scalar>(rho: &HermitianOp<S>) -> bool {
    is_psd_with_tol(rho, PSD_TOL)
}

/// Float kind: `c_i >= -tol * max(1, max_i |c_i|)`. Exact kind: exact signs.
pub fn is_psd_with_tol<S: Scalar>(rho: &HermitianOp<S>, tol: f64) -> bool {
    let c = char_poly_coeffs(rho.matrix());
    let scale = c.iter().map(Scalar::magnitude_f64).fold(1.0, f64::max);
    let abs_tol = tol * scale;
    c.iter().all(|ci| ci.is_nonneg_real(abs_tol))
}

/// Every partial transpose is positive semidefinite. All `2^n` masks are
/// checked.
pub fn is_ppt<S: Scalar>(rho: &HermitianOp<S>) -> bool {
    SubsetMask::all(rho.shape().n()).all(|mask| is_psd(&partial_transpose(rho, mask)))
}

/// Reduced operator on party `keep` (0-based).
pub fn partial_trace<S: Scalar>(rho: &HermitianOp<S>, keep: usize) -> Result<HermitianOp<S>> {
    let shape = rho.shape();
    if keep >= shape.n() {
        return Err(Error::OutOfRange(format!(
            "party {keep} of {}",
            shape.n()
        )));
    }
    let dk = shape.dims()[keep];
    let d = shape.d();
    let m = rho.matrix();
    let mut out = Matrix::<S>::zeros(dk, dk);
    // indices with party `keep` at digit 0
    let stride = shape.strides()[keep];
    for idx in (0..d).filter(|&idx| shape.digits(idx)[keep] == 0) {
        for i in 0..dk {
            for j in 0..dk {
                out[(i, j)] = out[(i, j)].clone() + m[(idx + i * stride, idx + j * stride)].clone();
            }
        }
    }
    let local = SystemShape::new(vec![dk])?;
    Ok(HermitianOp::new_unchecked(local, out))
}

/// Rank of each single-party reduction.
pub fn local_ranks<S: Scalar>(rho: &HermitianOp<S>) -> Vec<usize> {
    (0..rho.shape().n())
        .map(|k| partial_trace(rho, k).map_or(0, |r| r.rank()))
        .collect()
}

/// Fixed by every single-party transpose (hence by all of `G`).
pub fn is_g_invariant<S: Scalar>(rho: &HermitianOp<S>) -> bool {
    (0..rho.shape().n()).all(|k| {
        partial_transpose(rho, SubsetMask::single(k)).approx_eq(rho, ENTRY_TOL)
    })
}

/// `(V_1 (x) ... (x) V_n) rho (V_1 (x) ... (x) V_n)^dagger`.
pub fn apply_local<S: Scalar>(rho: &HermitianOp<S>, locals: &[Matrix<S>]) -> Result<HermitianOp<S>> {
    let shape = rho.shape();
    if locals.len() != shape.n() {
        return Err(Error::DimensionMismatch {
            expected: shape.n(),
            got: locals.len(),
        });
    }
    let mut v = Matrix::<S>::identity(1);
    for (party, (m, &dk)) in locals.iter().zip(shape.dims()).enumerate() {
        if m.rows() != dk || m.cols() != dk {
            return Err(Error::DimensionMismatch {
                expected: dk,
                got: m.rows(),
            });
        }
        if S::rank(m) < dk {
            return Err(Error::SingularLocalOp { party });
        }
        v = v.kron(m);
    }
    let out = v.matmul(rho.matrix()).matmul(&v.adjoint());
    Ok(HermitianOp::new_unchecked(shape.clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;
    use num_complex::Complex64;

    fn g(re: i64, im: i64) -> GaussRat {
        GaussRat::from_gauss(re, im)
    }

    fn shape(d: &[usize]) -> SystemShape {
        SystemShape::new(d.to_vec()).unwrap()
    }

    fn bell() -> HermitianOp<GaussRat> {
        // |psi+> = (|01> + |10>)/sqrt2, entries 1/2
        let h = GaussRat::from_ratio(1, 2);
        let mut m = Matrix::zeros(4, 4);
        for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            m[(r, c)] = h.clone();
        }
        HermitianOp::new(shape(&[2, 2]), m).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(SystemShape::new(vec![]).is_err());
        assert!(SystemShape::new(vec![2, 0]).is_err());
        let s = shape(&[2, 3, 4]);
        assert_eq!(s.d(), 24);
        assert_eq!(s.strides(), vec![12, 4, 1]);
        assert_eq!(s.index(&s.digits(17)), 17);
    }

    #[test]
    fn product_state_of_basis_vectors() {
        let v = ProductVector::new(shape(&[2, 2]), vec![vec![g(1, 0), g(0, 0)], vec![g(1, 0), g(0, 0)]])
            .unwrap();
        let rho = product_state(&v).unwrap();
        assert_eq!(
            rho.matrix(),
            &Matrix::diag(&[g(1, 0), g(0, 0), g(0, 0), g(0, 0)])
        );
    }

    #[test]
    fn product_state_block_structure() {
        // (|0> + i|1>) (x) |0>: block [[1, -i], [i, 1]] (x) diag(1, 0)
        let v = ProductVector::new(shape(&[2, 2]), vec![vec![g(1, 0), g(0, 1)], vec![g(1, 0), g(0, 0)]])
            .unwrap();
        let rho = product_state(&v).unwrap();
        let block = Matrix::from_rows(vec![vec![g(1, 0), g(0, -1)], vec![g(0, 1), g(1, 0)]]).unwrap();
        let expected = block.kron(&Matrix::diag(&[g(1, 0), g(0, 0)]));
        assert_eq!(rho.matrix(), &expected);
        assert_eq!(rho.rank(), 1);
        assert!(is_psd(&rho));
    }

    #[test]
    fn zero_factor_is_rejected() {
        let err = ProductVector::new(shape(&[2, 2]), vec![vec![g(1, 0), g(0, 0)], vec![g(0, 0), g(0, 0)]]);
        assert_eq!(err.unwrap_err(), Error::DegenerateVector { party: 1 });
        let deg = ProductVector::new_degenerate(shape(&[2, 2]), vec![vec![g(1, 0), g(0, 0)], vec![g(0, 0), g(0, 0)]])
            .unwrap();
        assert!(deg.is_degenerate());
        assert!(product_state(&deg).is_err());
    }

    #[test]
    fn char_poly_small_cases() {
        let c = char_poly_coeffs(&Matrix::diag(&[g(2, 0), g(3, 0)]));
        assert_eq!(c, vec![g(1, 0), g(5, 0), g(6, 0)]);
        let c = char_poly_coeffs(&Matrix::<GaussRat>::identity(5));
        let binom = [1, 5, 10, 10, 5, 1];
        assert_eq!(c, binom.iter().map(|&b| g(b, 0)).collect::<Vec<_>>());
        // non-diagonal: [[1,2],[3,4]] -> t^2 - 5t - 2, so c = (1, 5, -2)
        let m = Matrix::from_rows(vec![vec![g(1, 0), g(2, 0)], vec![g(3, 0), g(4, 0)]]).unwrap();
        assert_eq!(char_poly_coeffs(&m), vec![g(1, 0), g(5, 0), g(-2, 0)]);
        assert_eq!(char_poly_coeffs(&Matrix::<GaussRat>::zeros(0, 0)), vec![g(1, 0)]);
    }

    #[test]
    fn psd_basic_cases() {
        let s = shape(&[2]);
        assert!(is_psd(&HermitianOp::<GaussRat>::identity(s.clone())));
        let neg = HermitianOp::new(s, Matrix::diag(&[g(1, 0), g(-1, 0)])).unwrap();
        assert!(!is_psd(&neg));
    }

    #[test]
    fn bell_state_is_npt_with_maximally_mixed_marginals() {
        let b = bell();
        assert!(is_psd(&b));
        assert!(!is_ppt(&b));
        assert_eq!(local_ranks(&b), vec![2, 2]);
        let red = partial_trace(&b, 0).unwrap().normalized().unwrap();
        assert_eq!(red.matrix(), &Matrix::diag(&[GaussRat::from_ratio(1, 2), GaussRat::from_ratio(1, 2)]));
    }

    #[test]
    fn two_qubit_real_separable_state_is_not_g_invariant() {
        // |00><00| + |11><11| + |psi+><psi+|
        let mut rho = bell().into_matrix();
        rho[(0, 0)] = g(1, 0);
        rho[(3, 3)] = g(1, 0);
        let rho = HermitianOp::new(shape(&[2, 2]), rho).unwrap();
        let pt = partial_transpose(&rho, SubsetMask::single(0));
        assert_ne!(pt, rho);
        assert!(!is_g_invariant(&rho));
        assert!(is_ppt(&rho));
    }

    #[test]
    fn identity_tensor_projector_is_g_invariant() {
        let m = Matrix::<GaussRat>::identity(2).kron(&Matrix::diag(&[g(1, 0), g(0, 0)]));
        let rho = HermitianOp::new(shape(&[2, 2]), m).unwrap();
        assert!(is_g_invariant(&rho));
    }

    #[test]
    fn partial_transpose_moves_expected_entries() {
        // |0><1| (x) |0><1| + h.c.; transposing party 0 gives |1><0| (x) |0><1| + h.c.
        let mut m = Matrix::<GaussRat>::zeros(4, 4);
        m[(0, 3)] = g(1, 0);
        m[(3, 0)] = g(1, 0);
        let rho = HermitianOp::new(shape(&[2, 2]), m).unwrap();
        let pt = partial_transpose(&rho, SubsetMask::single(0));
        assert_eq!(pt.matrix()[(2, 1)], g(1, 0));
        assert_eq!(pt.matrix()[(1, 2)], g(1, 0));
        assert_eq!(pt.matrix()[(0, 3)], g(0, 0));
    }

    #[test]
    fn apply_local_rejects_singular_maps() {
        let rho = HermitianOp::<Complex64>::identity(shape(&[2, 2]));
        let sing = Matrix::<Complex64>::zeros(2, 2);
        let id = Matrix::<Complex64>::identity(2);
        assert_eq!(
            apply_local(&rho, &[id.clone(), sing]).unwrap_err(),
            Error::SingularLocalOp { party: 1 }
        );
        let same = apply_local(&rho, &[id.clone(), id]).unwrap();
        assert!(same.approx_eq(&rho, 0.0));
    }
}
