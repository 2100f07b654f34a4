//! Separable decompositions: random sampling, realification of
//! G-invariant decompositions, the rank-length algorithm on `2 x N`, the
//! length-`MN` example, and the embedding of arbitrary states into
//! G-invariant states on doubled local dimensions.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{GaussRat, Kind, Scalar};
use crate::tensor::{self, HermitianOp, ProductVector, SubsetMask, SystemShape};

/// Tolerance for the symmetric eigensolver steps of the `2 x N` algorithm.
pub const EIGEN_TOL: f64 = 1e-10;
/// Relative tolerance accepting slightly negative eigenvalues of `A'`.
pub const SCHUR_TOL: f64 = 1e-8;
/// Maximum entrywise reconstruction error accepted for float output.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Draws of a random qubit-side map when the `C` block is ill-conditioned.
pub const MAX_MIX_RETRIES: usize = 16;
/// Smallest-to-largest eigenvalue ratio of `C` accepted without mixing.
pub const WELL_CONDITIONED: f64 = 1e-3;

/// One weighted pure product term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<S> {
    pub weight: S,
    pub vector: ProductVector<S>,
}

/// `sum_i weight_i |v_i><v_i|` with nonnegative weights. Vectors need not
/// be normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S> {
    shape: SystemShape,
    terms: Vec<Term<S>>,
}

impl<S: Scalar> Decomposition<S> {
    /// Weights must be nonnegative reals; degenerate vectors are rejected.
    pub fn new(shape: SystemShape, terms: Vec<Term<S>>) -> Result<Self> {
        for t in &terms {
            if t.vector.shape() != &shape {
                return Err(Error::InvalidShape(format!(
                    "term shape {} differs from {shape}",
                    t.vector.shape()
                )));
            }
            if t.vector.is_degenerate() {
                let party = t
                    .vector
                    .factors()
                    .iter()
                    .position(|f| f.iter().all(S::is_zero))
                    .unwrap_or(0);
                return Err(Error::DegenerateVector { party });
            }
            if !t.weight.is_nonneg_real(0.0) {
                return Err(Error::OutOfRange(format!(
                    "weight {:?} is not a nonnegative real",
                    t.weight
                )));
            }
        }
        Ok(Self { shape, terms })
    }

    pub fn empty(shape: SystemShape) -> Self {
        Self {
            shape,
            terms: Vec::new(),
        }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn terms(&self) -> &[Term<S>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn kind(&self) -> Kind {
        S::KIND
    }

    /// All coordinates real.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.vector.is_real())
    }

    /// `sum_i weight_i |v_i><v_i|`.
    pub fn reconstruct(&self) -> HermitianOp<S> {
        let mut acc = Matrix::<S>::zeros(self.shape.d(), self.shape.d());
        for t in &self.terms {
            let v = t.vector.full_vector();
            acc.add_assign(&Matrix::outer(&v, &v).scale(&t.weight));
        }
        HermitianOp::new_unchecked(self.shape.clone(), acc)
    }

    /// Whether the decomposition sums to `rho` (exactly, or within `tol`
    /// entrywise for floats).
    pub fn reproduces(&self, rho: &HermitianOp<S>, tol: f64) -> bool {
        self.reconstruct().approx_eq(rho, tol)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Decomposition<T> {
        Decomposition {
            shape: self.shape.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    weight: f(&t.weight),
                    vector: t.vector.map(&f),
                })
                .collect(),
        }
    }
}

fn real_scalar<S: Scalar>(x: f64) -> S {
    S::from_c64(Complex64::new(x, 0.0)).expect("float kinds accept any value")
}

/// A random state of length at most `r` together with its decomposition.
///
/// Float kind: weights uniform on the simplex, factors uniform on the unit
/// spheres. Exact kind: positive rational weights `k / 16`, factors with
/// Gaussian-integer coordinates in `[-3, 3]`. With `real`, all coordinates
/// are real and the state is G-invariant.
pub fn sample_separable<S: Scalar>(
    shape: &SystemShape,
    r: usize,
    seed: u64,
    real: bool,
) -> Result<(HermitianOp<S>, Decomposition<S>)> {
    if r == 0 {
        return Err(Error::OutOfRange("r must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(r);
    let exact = S::KIND == Kind::Exact;
    let raw_weights: Vec<f64> = (0..r)
        .map(|_| Exp1.sample(&mut rng))
        .collect();
    let total: f64 = raw_weights.iter().sum();
    for w in raw_weights {
        let factors: Vec<Vec<S>> = shape
            .dims()
            .iter()
            .map(|&dk| {
                if exact {
                    loop {
                        let v: Vec<S> = (0..dk)
                            .map(|_| {
                                let re = rng.gen_range(-3..=3);
                                let im = if real { 0 } else { rng.gen_range(-3..=3) };
                                S::from_gauss(re, im)
                            })
                            .collect();
                        if v.iter().any(|x| !x.is_zero()) {
                            break v;
                        }
                    }
                } else {
                    let mut v: Vec<Complex64> = (0..dk)
                        .map(|_| {
                            let re: f64 = StandardNormal.sample(&mut rng);
                            let im = if real { 0.0 } else { StandardNormal.sample(&mut rng) };
                            Complex64::new(re, im)
                        })
                        .collect();
                    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|z| *z /= norm);
                    v.into_iter()
                        .map(|z| S::from_c64(z).expect("float kind"))
                        .collect()
                }
            })
            .collect();
        let weight = if exact {
            S::from_ratio(rng.gen_range(1..=16), 16)
        } else {
            real_scalar(w / total)
        };
        terms.push(Term {
            weight,
            vector: ProductVector::new(shape.clone(), factors)?,
        });
    }
    let dec = Decomposition::new(shape.clone(), terms)?;
    Ok((dec.reconstruct(), dec))
}

/// Replaces each term of a decomposition of a G-invariant state by the
/// real product terms `x_1 or y_1 (x) ... (x) x_n or y_n`, where
/// `a_j = x_j + i y_j`. Averaging `|a><a|` with `|a*><a*|` gives
/// `|x><x| + |y><y|`, so the result reproduces the state exactly, with at
/// most `2^n` terms per input term. Terms with a zero factor are dropped.
///
/// Each factor is then scaled so that its first nonzero coordinate is 1,
/// and in the exact kind identical terms are merged.
pub fn realify<S: Scalar>(dec: &Decomposition<S>) -> Result<Decomposition<S>> {
    let target = dec.reconstruct();
    if !tensor::is_g_invariant(&target) {
        return Err(Error::NotGInvariant);
    }
    let shape = dec.shape.clone();
    let n = shape.n();
    let mut out: Vec<Term<S>> = Vec::new();
    for t in &dec.terms {
        let parts: Vec<[Vec<S>; 2]> = t
            .vector
            .factors()
            .iter()
            .map(|a| {
                [
                    a.iter().map(Scalar::real_part).collect(),
                    a.iter().map(Scalar::imag_part).collect(),
                ]
            })
            .collect();
        for choice in 0..1usize << n {
            let factors: Vec<Vec<S>> = (0..n)
                .map(|j| parts[j][(choice >> j) & 1].clone())
                .collect();
            if factors.iter().any(|f| f.iter().all(S::is_zero)) {
                continue;
            }
            let (weight, factors) = canonical_factors(t.weight.clone(), factors);
            let vector = ProductVector::new(shape.clone(), factors)?;
            if S::KIND == Kind::Exact {
                if let Some(prev) = out.iter_mut().find(|p| p.vector == vector) {
                    prev.weight = prev.weight.clone() + weight;
                    continue;
                }
            }
            out.push(Term { weight, vector });
        }
    }
    Decomposition::new(shape, out)
}

/// Scales each factor to have leading nonzero coordinate 1, folding
/// `|pivot|^2` into the weight.
fn canonical_factors<S: Scalar>(mut weight: S, factors: Vec<Vec<S>>) -> (S, Vec<Vec<S>>) {
    let factors = factors
        .into_iter()
        .map(|f| match f.iter().find(|x| !x.is_zero()).cloned() {
            Some(p) => {
                let inv = p.recip().expect("nonzero pivot");
                weight = weight.clone() * p.norm_sqr();
                f.into_iter().map(|x| x * inv.clone()).collect()
            }
            None => f,
        })
        .collect();
    (weight, factors)
}

/// Real symmetric block form `[[A, B], [B, C]]` of a G-invariant operator
/// on `2 x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitBlockForm {
    pub n: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl QubitBlockForm {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows() / 2;
        Self {
            n,
            a: m.view((0, 0), (n, n)).into_owned(),
            b: m.view((0, n), (n, n)).into_owned(),
            c: m.view((n, n), (n, n)).into_owned(),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.b.transpose());
        m.view_mut((n, n), (n, n)).copy_from(&self.c);
        m
    }

    /// `A' = A - B^2`, meaningful once `C = I`.
    pub fn schur(&self) -> DMatrix<f64> {
        &self.a - &self.b * &self.b
    }
}

fn to_real_dmatrix<S: Scalar>(m: &Matrix<S>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)].to_c64().re)
}

/// `(W (x) M) rho (W (x) M)^T` for a block operator on `2 x k`.
fn congruence(rho: &DMatrix<f64>, w: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let t = w.kronecker(m);
    &t * rho * t.transpose()
}

/// `L^G(rho) = rank rho` on `2 x N`: returns exactly `rank rho` real
/// product terms summing to `rho`.
///
/// The local reductions (support restriction, a random qubit-side mix
/// when `C` is singular, `C -> I`, diagonal `B`) are applied and then
/// inverted on the output vectors. `seed` drives the random mixes.
pub fn decompose_2xn_g_invariant<S: Scalar>(
    rho: &HermitianOp<S>,
    seed: u64,
) -> Result<Decomposition<Complex64>> {
    let shape = rho.shape().clone();
    let n = match shape.dims() {
        [2, n] => *n,
        _ => {
            return Err(Error::InvalidShape(format!(
                "expected a 2 x N shape, got {shape}"
            )))
        }
    };
    if !tensor::is_g_invariant(rho) {
        return Err(Error::NotGInvariant);
    }
    if !tensor::is_psd(rho) {
        return Err(Error::NotPsd);
    }
    let full = to_real_dmatrix(rho.matrix());
    let scale = full.amax().max(1.0);

    // Support of the N-side reduction.
    let block = QubitBlockForm::from_matrix(&full);
    let rho_b = SymmetricEigen::new(&block.a + &block.c);
    let keep: Vec<usize> = (0..n)
        .filter(|&i| rho_b.eigenvalues[i] > EIGEN_TOL * scale)
        .collect();
    let k = keep.len();
    if k == 0 {
        return Ok(Decomposition::empty(shape));
    }
    let q = DMatrix::from_fn(n, k, |r, c| rho_b.eigenvectors[(r, keep[c])]);
    let restricted = congruence(&full, &DMatrix::identity(2, 2), &q.transpose());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw: Vec<(f64, DVec, DVec)> = Vec::new();
    let rho_a = {
        let f = QubitBlockForm::from_matrix(&restricted);
        DMatrix::from_row_slice(2, 2, &[f.a.trace(), f.b.trace(), f.b.trace(), f.c.trace()])
    };
    let qubit = SymmetricEigen::new(rho_a);
    let qubit_rank = qubit
        .eigenvalues
        .iter()
        .filter(|&&e| e > EIGEN_TOL * scale)
        .count();
    if qubit_rank == 1 {
        let top = if qubit.eigenvalues[0] > qubit.eigenvalues[1] { 0 } else { 1 };
        let u = qubit.eigenvectors.column(top).into_owned();
        let ut = DMatrix::from_row_slice(1, 2, &[u[0], u[1]]);
        let x = congruence(&restricted, &ut, &DMatrix::identity(k, k));
        let eig = SymmetricEigen::new(x);
        for i in 0..k {
            let lam = eig.eigenvalues[i];
            if lam > EIGEN_TOL * scale {
                raw.push((lam, u.clone(), eig.eigenvectors.column(i).into_owned()));
            }
        }
    } else {
        let total_rank = rho.rank();
        // Qubit-side mix with the best conditioned C block.
        let conditioning = |w: &DMatrix<f64>| {
            let mixed = congruence(&restricted, w, &DMatrix::identity(k, k));
            let e = SymmetricEigen::new(QubitBlockForm::from_matrix(&mixed).c);
            let ratio = e.eigenvalues.min() / e.eigenvalues.max().max(f64::MIN_POSITIVE);
            (ratio, mixed, e)
        };
        let mut w = DMatrix::identity(2, 2);
        let (mut best, mut mixed, mut c_eig) = conditioning(&w);
        if best < WELL_CONDITIONED {
            for _ in 0..MAX_MIX_RETRIES {
                let cand = loop {
                    let cand = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-3..=3) as f64);
                    if cand.determinant().abs() > 0.5 {
                        break cand;
                    }
                };
                let (ratio, m, e) = conditioning(&cand);
                if ratio > best {
                    (best, mixed, c_eig, w) = (ratio, m, e, cand);
                }
            }
        }
        if c_eig.eigenvalues.min() <= EIGEN_TOL * scale {
            return Err(Error::SingularBlock { index: 1 });
        }
        // K = C^{-1/2}
        let sqrt_c = &c_eig.eigenvectors
            * DMatrix::from_diagonal(&c_eig.eigenvalues.map(f64::sqrt))
            * c_eig.eigenvectors.transpose();
        let k_mat = &c_eig.eigenvectors
            * DMatrix::from_diagonal(&c_eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
            * c_eig.eigenvectors.transpose();
        let normal = congruence(&mixed, &DMatrix::identity(2, 2), &k_mat);
        let form = QubitBlockForm::from_matrix(&normal);
        let b_sym = (&form.b + form.b.transpose()) * 0.5;
        let b_eig = SymmetricEigen::new(b_sym);
        let o = b_eig.eigenvectors.clone();
        let diag_form = QubitBlockForm::from_matrix(&congruence(
            &normal,
            &DMatrix::identity(2, 2),
            &o.transpose(),
        ));
        let schur = {
            let s = diag_form.a.clone()
                - DMatrix::from_diagonal(&b_eig.eigenvalues.map(|x| x * x));
            (&s + s.transpose()) * 0.5
        };
        let s_eig = SymmetricEigen::new(schur.clone());
        let s_norm = schur.amax().max(1.0);
        let min = s_eig.eigenvalues.min();
        if min < -SCHUR_TOL * s_norm {
            return Err(Error::NumericalFailure {
                reason: "A - B^2 is not positive semidefinite".into(),
                residual: -min,
            });
        }
        let w_inv = w.clone().try_inverse().ok_or(Error::SingularLocalOp { party: 0 })?;
        let back = &sqrt_c * &o;
        for i in 0..k {
            let mut qv = DVec::zeros(2);
            qv[0] = b_eig.eigenvalues[i];
            qv[1] = 1.0;
            let mut ov = DVec::zeros(k);
            ov[i] = 1.0;
            raw.push((1.0, &w_inv * qv, &back * ov));
        }
        // A' has rank rank(rho) - k; the remaining eigenvalues are noise.
        let zero = DVec::from_row_slice(&[1.0, 0.0]);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| s_eig.eigenvalues[y].total_cmp(&s_eig.eigenvalues[x]));
        for &i in order.iter().take(total_rank.saturating_sub(k)) {
            let lam = s_eig.eigenvalues[i];
            if lam > 0.0 {
                raw.push((lam, &w_inv * &zero, &back * s_eig.eigenvectors.column(i)));
            }
        }
    }

    let mut terms = Vec::with_capacity(raw.len());
    for (lam, u, v) in raw {
        let v = &q * v;
        let (nu, nv) = (u.norm(), v.norm());
        let weight = lam * nu * nu * nv * nv;
        let factors = vec![
            u.iter().map(|x| Complex64::new(x / nu, 0.0)).collect(),
            v.iter().map(|x| Complex64::new(x / nv, 0.0)).collect(),
        ];
        terms.push(Term {
            weight: Complex64::new(weight, 0.0),
            vector: ProductVector::new(shape.clone(), factors)?,
        });
    }
    let dec = Decomposition::new(shape, terms)?;
    let target = rho.map(Scalar::to_c64);
    let residual = dec.reconstruct().matrix().max_abs_diff(target.matrix());
    if residual > RECONSTRUCTION_TOL * scale {
        return Err(Error::NumericalFailure {
            reason: "reconstruction does not reproduce the input".into(),
            residual,
        });
    }
    Ok(dec)
}

type DVec = nalgebra::DVector<f64>;

/// `m = sum_k w_k |l_k><l_k|` for a positive semidefinite Hermitian `m`,
/// by symmetric elimination: pick a nonzero diagonal pivot `p` with
/// column `c`, emit `c c^dagger / p`, subtract, repeat. The number of
/// terms is the rank.
pub fn rank_one_split(m: &Matrix<GaussRat>) -> Result<Vec<(GaussRat, Vec<GaussRat>)>> {
    let d = m.rows();
    let mut rest = m.clone();
    let mut out = Vec::new();
    while !rest.is_zero() {
        let Some(k) = (0..d).find(|&k| !rest[(k, k)].is_zero()) else {
            return Err(Error::NotPsd);
        };
        let p = rest[(k, k)].clone();
        if !p.is_nonneg_real(0.0) {
            return Err(Error::NotPsd);
        }
        let col: Vec<GaussRat> = (0..d).map(|r| rest[(r, k)].clone()).collect();
        let inv = p.recip().expect("nonzero pivot");
        rest = rest.sub(&Matrix::outer(&col, &col).scale(&inv));
        // normalize the column to 1 at the pivot: c c^dagger / p = p l l^dagger
        let l: Vec<GaussRat> = col.iter().map(|x| x.clone() * inv.clone()).collect();
        out.push((p, l));
        if out.len() > d {
            return Err(Error::NotPsd);
        }
    }
    Ok(out)
}

/// Solves `m x = rhs` exactly by Gauss-Jordan elimination.
fn solve_exact(m: &Matrix<GaussRat>, rhs: &[GaussRat]) -> Option<Vec<GaussRat>> {
    let n = m.rows();
    let mut a: Vec<Vec<GaussRat>> = (0..n)
        .map(|r| {
            let mut row = m.row(r).to_vec();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip()?;
        for x in a[col].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let v = a[col][c].clone();
                    a[r][c] = a[r][c].clone() - f.clone() * v;
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// The state `rho = sum_i |i><i| (x) rho_i + |a,b><a,b|` of length and rank
/// `MN`, with a decomposition of exactly `MN` terms:
/// `sum_i |i><i| (x) sigma_i + (|a><a| + sum_i p_i |i><i|) (x) |b><b|`,
/// where `p_i = 1 / <b| rho_i^{-1} |b>` and `sigma_i = rho_i - p_i |b><b|`
/// has rank `N - 1`.
pub fn build_length_mn_example(
    rhos: &[Matrix<GaussRat>],
    a: &[GaussRat],
    b: &[GaussRat],
) -> Result<(HermitianOp<GaussRat>, Decomposition<GaussRat>)> {
    let m = rhos.len();
    let n = b.len();
    if m == 0 || n == 0 || a.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: a.len(),
        });
    }
    if a.iter().all(Scalar::is_zero) {
        return Err(Error::DegenerateVector { party: 0 });
    }
    if b.iter().all(Scalar::is_zero) {
        return Err(Error::DegenerateVector { party: 1 });
    }
    let shape = SystemShape::new(vec![m, n])?;
    let local = SystemShape::new(vec![n])?;
    let mut terms = Vec::with_capacity(m * n);
    let mut p = Vec::with_capacity(m);
    let mut big = Matrix::<GaussRat>::zeros(m * n, m * n);
    for (i, r) in rhos.iter().enumerate() {
        if r.rows() != n || r.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.rows(),
            });
        }
        let op = HermitianOp::new(local.clone(), r.clone())?;
        if !tensor::is_psd(&op) || op.rank() < n {
            return Err(Error::SingularBlock { index: i });
        }
        let x = solve_exact(r, b).ok_or(Error::SingularBlock { index: i })?;
        let q = b
            .iter()
            .zip(&x)
            .fold(GaussRat::zero(), |acc, (bi, xi)| acc + bi.conj() * xi.clone());
        let pi = q.recip().ok_or(Error::SingularBlock { index: i })?;
        let sigma = r.sub(&Matrix::outer(b, b).scale(&pi));
        for (w, l) in rank_one_split(&sigma)? {
            let mut e = vec![GaussRat::zero(); m];
            e[i] = GaussRat::one();
            terms.push(Term {
                weight: w,
                vector: ProductVector::new(shape.clone(), vec![e, l])?,
            });
        }
        for rr in 0..n {
            for cc in 0..n {
                big[(i * n + rr, i * n + cc)] = r[(rr, cc)].clone();
            }
        }
        p.push(pi);
    }
    let head = Matrix::outer(a, a).add(&Matrix::diag(&p));
    for (w, l) in rank_one_split(&head)? {
        terms.push(Term {
            weight: w,
            vector: ProductVector::new(shape.clone(), vec![l, b.to_vec()])?,
        });
    }
    let ab: Vec<GaussRat> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| x.clone() * y.clone()))
        .collect();
    big.add_assign(&Matrix::outer(&ab, &ab));
    let rho = HermitianOp::new(shape.clone(), big)?;
    let dec = Decomposition::new(shape, terms)?;
    if dec.len() != m * n || rho.rank() != m * n || dec.reconstruct() != rho {
        return Err(Error::NumericalFailure {
            reason: "length-MN construction did not close".into(),
            residual: 0.0,
        });
    }
    Ok((rho, dec))
}

/// `|a><a|` entries for `a = (|0> + i|1>)/sqrt 2`, or of `|a*><a*|`.
fn tau_entry<S: Scalar>(conjugated: bool, q: usize, qp: usize) -> S {
    // |a><a| = (1/2) [[1, -i], [i, 1]]
    let half = S::from_ratio(1, 2);
    let v = match (q, qp) {
        (0, 0) | (1, 1) => half,
        (0, 1) => half * -S::i(),
        _ => half * S::i(),
    };
    if conjugated {
        v.conj()
    } else {
        v
    }
}

fn doubled_digits(shape: &SystemShape, idx: usize) -> (Vec<usize>, Vec<usize>) {
    let big = shape.doubled();
    let digits = big.digits(idx);
    let q = digits
        .iter()
        .zip(shape.dims())
        .map(|(&x, &dk)| x / dk)
        .collect();
    let o = digits
        .iter()
        .zip(shape.dims())
        .map(|(&x, &dk)| x % dk)
        .collect();
    (q, o)
}

/// `sigma = sum_S tau^{Gamma_S} (x) rho^{Gamma_S}` with
/// `tau = |a,...,a><a,...,a|`, arranged so that party `i` of `sigma` is the
/// pair (qubit `i`, party `i` of `rho`) with index `q d_i + o`.
///
/// `sigma` is G-invariant, positive semidefinite when `rho` is PPT, and
/// [`recover`] inverts the map.
pub fn reduce_to_g_invariant<S: Scalar>(
    rho: &HermitianOp<S>,
    require_ppt: bool,
) -> Result<HermitianOp<S>> {
    if require_ppt && !tensor::is_ppt(rho) {
        return Err(Error::NotPpt);
    }
    let shape = rho.shape();
    let n = shape.n();
    let big = shape.doubled();
    let dim = big.d();
    let transposes: Vec<(SubsetMask, Matrix<S>)> = SubsetMask::all(n)
        .map(|mask| (mask, tensor::partial_transpose(rho, mask).into_matrix()))
        .collect();
    let split: Vec<(Vec<usize>, usize)> = (0..dim)
        .map(|idx| {
            let (q, o) = doubled_digits(shape, idx);
            (q, shape.index(&o))
        })
        .collect();
    let out = Matrix::from_fn(dim, dim, |r, c| {
        let (qr, or) = &split[r];
        let (qc, oc) = &split[c];
        transposes.iter().fold(S::zero(), |acc, (mask, m)| {
            let coeff = (0..n).fold(S::one(), |x, j| {
                x * tau_entry::<S>(mask.contains(j), qr[j], qc[j])
            });
            acc + coeff * m[(*or, *oc)].clone()
        })
    });
    Ok(HermitianOp::new_unchecked(big, out))
}

fn halved(shape: &SystemShape) -> Result<SystemShape> {
    let dims = shape
        .dims()
        .iter()
        .enumerate()
        .map(|(party, &dim)| {
            if dim % 2 == 1 {
                Err(Error::NotDoubled { party, dim })
            } else {
                Ok(dim / 2)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    SystemShape::new(dims)
}

/// `rho = <a,...,a| sigma |a,...,a>`, contracting each qubit register.
pub fn recover<S: Scalar>(sigma: &HermitianOp<S>) -> Result<HermitianOp<S>> {
    let small = halved(sigma.shape())?;
    let n = small.n();
    let d = small.d();
    let m = sigma.matrix();
    let big = small.doubled();
    // a = (1, i)/sqrt 2: conj(a_q) a_q' = (-i)^q i^q' / 2
    let amp = |q: usize| if q == 0 { S::one() } else { S::i() };
    let out = Matrix::from_fn(d, d, |r, c| {
        let or = small.digits(r);
        let oc = small.digits(c);
        let mut acc = S::zero();
        for qmask in 0..1usize << n {
            for qpmask in 0..1usize << n {
                let mut coeff = S::one();
                let mut dr = Vec::with_capacity(n);
                let mut dc = Vec::with_capacity(n);
                for j in 0..n {
                    let q = (qmask >> j) & 1;
                    let qp = (qpmask >> j) & 1;
                    coeff = coeff * amp(q).conj() * amp(qp) * S::from_ratio(1, 2);
                    let dk = small.dims()[j];
                    dr.push(q * dk + or[j]);
                    dc.push(qp * dk + oc[j]);
                }
                acc = acc + coeff * m[(big.index(&dr), big.index(&dc))].clone();
            }
        }
        acc
    });
    Ok(HermitianOp::new_unchecked(small, out))
}

/// Lifts a decomposition of `rho` to one of `reduce_to_g_invariant(rho)`:
/// each term becomes the `2^n` products of `a (x) x_j` or `a* (x) x_j*`.
/// `a` is carried unnormalized as `(1, i)` with the factor `2^{-n}` in the
/// weight.
pub fn lift_decomposition<S: Scalar>(dec: &Decomposition<S>) -> Result<Decomposition<S>> {
    let shape = dec.shape();
    let n = shape.n();
    let big = shape.doubled();
    let scale = S::from_ratio(1, 1 << n);
    let mut terms = Vec::with_capacity(dec.len() << n);
    for t in dec.terms() {
        for mask in SubsetMask::all(n) {
            let factors = t
                .vector
                .factors()
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let conj = mask.contains(j);
                    let a1 = if conj { -S::i() } else { S::i() };
                    let xs: Vec<S> = if conj {
                        x.iter().map(Scalar::conj).collect()
                    } else {
                        x.clone()
                    };
                    xs.iter()
                        .cloned()
                        .chain(xs.iter().map(|v| a1.clone() * v.clone()))
                        .collect()
                })
                .collect();
            terms.push(Term {
                weight: t.weight.clone() * scale.clone(),
                vector: ProductVector::new(big.clone(), factors)?,
            });
        }
    }
    Decomposition::new(big, terms)
}

/// Maps a product decomposition of `sigma` to one of `recover(sigma)`:
/// each factor `y_j` becomes `(<a| (x) I) y_j`. Terms that vanish are
/// dropped.
pub fn recover_decomposition<S: Scalar>(dec: &Decomposition<S>) -> Result<Decomposition<S>> {
    let small = halved(dec.shape())?;
    let n = small.n();
    let scale = S::from_ratio(1, 1 << n);
    let mut terms = Vec::new();
    for t in dec.terms() {
        let factors: Vec<Vec<S>> = t
            .vector
            .factors()
            .iter()
            .zip(small.dims())
            .map(|(y, &dk)| {
                (0..dk)
                    .map(|o| y[o].clone() - S::i() * y[dk + o].clone())
                    .collect()
            })
            .collect();
        if factors.iter().any(|f| f.iter().all(S::is_zero)) {
            continue;
        }
        terms.push(Term {
            weight: t.weight.clone() * scale.clone(),
            vector: ProductVector::new(small.clone(), factors)?,
        });
    }
    Decomposition::new(small, terms)
}
