//! Dense complex linear algebra shared by every other module.
//!
//! Operators are `nalgebra` dynamic matrices over `Complex64`. The
//! Hilbert–Schmidt inner product `⟨x, y⟩ = Tr(x* y)` is the entrywise
//! conjugated dot product, so operator subspaces are handled as subspaces of
//! `C^{n²}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Environment variable consulted by [`Tolerances::from_env`] for the
/// default equality tolerance.
pub const EQ_TOL_ENV: &str = "UHLMANN_EQ_TOL";

pub const DEFAULT_EQ_TOL: f64 = 1e-9;
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Numerical thresholds. `eq_tol` gates equality/membership verdicts,
/// `rank_tol` gates rank decisions (singular values, Gram–Schmidt residuals).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub eq_tol: f64,
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eq_tol: DEFAULT_EQ_TOL,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl Tolerances {
    pub fn new(eq_tol: f64, rank_tol: f64) -> Result<Self> {
        let tol = Self { eq_tol, rank_tol };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { eq_tol, rank_tol } = *self;
        if !(rank_tol > 0.0 && rank_tol <= eq_tol && eq_tol < 1.0) {
            return Err(Error::Tolerance(format!(
                "need 0 < rank_tol <= eq_tol < 1, got rank_tol={rank_tol:e}, eq_tol={eq_tol:e}"
            )));
        }
        Ok(())
    }

    /// Defaults, with `eq_tol` taken from [`EQ_TOL_ENV`] when set. The rank
    /// tolerance is lowered to match if the override is tighter than it.
    pub fn from_env() -> Result<Self> {
        let mut tol = Self::default();
        if let Ok(raw) = std::env::var(EQ_TOL_ENV) {
            let eq_tol: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::Tolerance(format!("{EQ_TOL_ENV}={raw:?} is not a decimal real")))?;
            tol.eq_tol = eq_tol;
            tol.rank_tol = tol.rank_tol.min(eq_tol);
        }
        tol.validate()?;
        Ok(tol)
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn ensure_square(x: &CMatrix) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    Ok(x.nrows())
}

pub fn ensure_dim(x: &CMatrix, n: usize, context: &'static str) -> Result<()> {
    ensure_square(x)?;
    if x.nrows() != n {
        return Err(Error::Dimension {
            context,
            expected: n,
            found: x.nrows(),
        });
    }
    Ok(())
}

pub fn ensure_finite(x: &CMatrix) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Validation("matrix has non-finite entries".into()))
    }
}

/// `Tr(x* y)`.
pub fn hs_inner(x: &CMatrix, y: &CMatrix) -> C64 {
    x.dotc(y)
}

pub fn hs_norm(x: &CMatrix) -> f64 {
    x.norm()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Full SVD `x = U Σ V*` with singular values in descending order; `u` and
/// `v` are square.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

/// Computed with `faer`: the `nalgebra` complex SVD returns inconsistent
/// singular vectors for some rank-deficient inputs.
pub fn svd(x: &CMatrix) -> Result<Svd> {
    let (rows, cols) = x.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: identity(rows),
            singular_values: Vec::new(),
            v: identity(cols),
        });
    }
    let m = faer::Mat::<faer::c64>::from_fn(rows, cols, |i, j| x[(i, j)]);
    let svd = m
        .svd()
        .map_err(|e| Error::InternalConsistency(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    Ok(Svd {
        u: CMatrix::from_fn(rows, rows, |i, j| u[(i, j)]),
        singular_values: (0..s.dim()).map(|i| s[i].re).collect(),
        v: CMatrix::from_fn(cols, cols, |i, j| v[(i, j)]),
    })
}

pub fn singular_values(x: &CMatrix) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    x.clone().singular_values().iter().copied().collect()
}

/// Largest singular value.
pub fn op_norm(x: &CMatrix) -> f64 {
    singular_values(x).into_iter().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    ensure_square(x)?;
    Ok(singular_values(x).into_iter().sum())
}

#[derive(Clone, Debug)]
pub struct Polar {
    pub unitary: CMatrix,
    pub positive: CMatrix,
}

/// `x = unitary · positive` with `positive = (x* x)^{1/2}`.
///
/// Computed from the SVD `x = U Σ V*` as `unitary = U V*`,
/// `positive = V Σ V*`, so `Tr(unitary* x) = Σ σ_i` exactly.
pub fn polar_decompose(x: &CMatrix) -> Result<Polar> {
    let n = ensure_square(x)?;
    if n == 0 {
        return Ok(Polar {
            unitary: x.clone(),
            positive: x.clone(),
        });
    }
    let Svd { u, singular_values, v } = svd(x)?;
    let v_t = v.adjoint();
    let sigma = CMatrix::from_diagonal(&CVector::from_iterator(n, singular_values.iter().map(|&s| c(s, 0.0))));
    Ok(Polar {
        unitary: &u * &v_t,
        positive: &v * sigma * &v_t,
    })
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order; `vectors` holds the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> HermitianEigen {
    let n = h.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Rebuild `Σ f(λ_i) |v_i⟩⟨v_i|`.
pub fn spectral_map(eig: &HermitianEigen, f: impl Fn(f64) -> C64) -> CMatrix {
    let n = eig.vectors.nrows();
    let mut scaled = eig.vectors.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        let fj = f(lam);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// `(-rank_tol·scale, 0)` are clamped to zero; anything more negative is
/// rejected.
pub fn psd_sqrt(p: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    ensure_square(p)?;
    let eig = hermitian_eigen(p);
    let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if let Some(&min) = eig.values.last() {
        if min < -rank_tol * scale {
            return Err(Error::Validation(format!(
                "matrix is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
    }
    Ok(spectral_map(&eig, |lam| c(lam.max(0.0).sqrt(), 0.0)))
}

/// `exp(i t h)` for Hermitian `h`.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let eig = hermitian_eigen(h);
    spectral_map(&eig, |lam| C64::from_polar(1.0, t * lam))
}

/// Polar unitary of a Hermitian matrix: `Σ sign(λ) P_λ` with `sign(0) = +1`.
/// Unlike the SVD route, the kernel is mapped by the identity, so the result
/// stays inside any *-algebra containing `h`.
pub fn hermitian_sign(h: &CMatrix, rank_tol: f64) -> CMatrix {
    let eig = hermitian_eigen(h);
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    spectral_map(&eig, |lam| {
        if lam < -rank_tol * scale {
            c(-1.0, 0.0)
        } else {
            c(1.0, 0.0)
        }
    })
}

/// Incremental Hilbert–Schmidt Gram–Schmidt (classical, two passes).
#[derive(Clone, Debug, Default)]
pub struct HsOrthonormalizer {
    basis: Vec<CMatrix>,
    rank_tol: f64,
}

impl HsOrthonormalizer {
    pub fn new(rank_tol: f64) -> Self {
        Self {
            basis: Vec::new(),
            rank_tol,
        }
    }

    pub fn from_orthonormal(basis: Vec<CMatrix>, rank_tol: f64) -> Self {
        Self { basis, rank_tol }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<CMatrix> {
        self.basis
    }

    /// Residual of `x` after projecting out the current span.
    pub fn residual(&self, x: &CMatrix) -> CMatrix {
        let mut r = x.clone();
        for _ in 0..2 {
            for e in &self.basis {
                let coeff = hs_inner(e, &r);
                add_scaled(&mut r, -coeff, e);
            }
        }
        r
    }

    /// Append the normalized residual of `x` if its norm is at least
    /// `rank_tol · scale`. Returns whether the span grew.
    pub fn push_scaled(&mut self, x: &CMatrix, scale: f64) -> bool {
        if scale <= 0.0 {
            return false;
        }
        let r = self.residual(x);
        let norm = r.norm();
        if norm < self.rank_tol * scale {
            return false;
        }
        self.basis.push(r.unscale(norm));
        true
    }

    /// Push with the candidate's own norm as scale.
    pub fn push(&mut self, x: &CMatrix) -> bool {
        let scale = x.norm();
        self.push_scaled(x, scale)
    }
}

/// Hilbert–Schmidt orthonormal basis of `span(ops)`, built in input order.
/// Each input is measured against its own norm, so exact zeros and exact
/// duplicates are dropped.
pub fn hs_orthonormalize(ops: &[CMatrix], rank_tol: f64) -> Result<Vec<CMatrix>> {
    let Some(first) = ops.first() else {
        return Ok(Vec::new());
    };
    let n = ensure_square(first)?;
    let mut gs = HsOrthonormalizer::new(rank_tol);
    for x in ops {
        ensure_dim(x, n, "hs_orthonormalize")?;
        gs.push(x);
    }
    Ok(gs.into_basis())
}

/// `dst += alpha · x`.
pub fn add_scaled(dst: &mut CMatrix, alpha: C64, x: &CMatrix) {
    dst.zip_apply(x, |d, s| *d += alpha * s);
}

/// Column-major vectorization.
pub fn vec_of(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

pub fn unvec(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Basis of `{x : x e_i = e_i x ∀i}`, as the kernel of `S = Σ B_i* B_i`
/// where `B_i vec(x) = vec(x e_i − e_i x)` and each `e_i` is normalized.
/// `S` is assembled from Kronecker identities without forming the `B_i`.
/// Eigenvalues of `S` below `rank_tol · max(λ_max, 1)` count as zero.
pub fn commutation_nullspace(basis: &[CMatrix], n: usize, rank_tol: f64) -> Result<Vec<CMatrix>> {
    let n2 = n * n;
    for e in basis {
        ensure_dim(e, n, "commutation_nullspace")?;
    }
    let id = identity(n);
    // With B = eᵀ⊗1 − 1⊗e: B*B = (ē eᵀ)⊗1 + 1⊗(e* e) − ē⊗e − (ē⊗e)*.
    let mut left = CMatrix::zeros(n, n);
    let mut right = CMatrix::zeros(n, n);
    let mut cross = CMatrix::zeros(n2, n2);
    for e in basis {
        let norm = e.norm();
        if norm == 0.0 {
            continue;
        }
        let e = e.unscale(norm);
        let conj = e.map(|z| z.conj());
        left += &conj * e.transpose();
        right += e.adjoint() * &e;
        cross += kron(&conj, &e);
    }
    let s = kron(&left, &id) + kron(&id, &right) - &cross - cross.adjoint();
    let eig = hermitian_eigen(&s);
    // The generators are HS-normalized, so a commuting family leaves only
    // round-off in `S`; the unit floor keeps that from reading as rank.
    let scale = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    let mut out = Vec::new();
    for (k, &l) in eig.values.iter().enumerate() {
        if l / scale < rank_tol {
            out.push(unvec(&eig.vectors.column(k).into_owned(), n));
        }
    }
    Ok(out)
}

/// Orthonormal columns spanning `range(k)`, dropping singular values below
/// `rank_tol` relative to the largest.
pub fn range_basis(k: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let Svd { u, singular_values, .. } = svd(k)?;
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values
        .iter()
        .take_while(|&&s| smax > 0.0 && s / smax >= rank_tol)
        .count();
    Ok(u.columns(0, rank).into_owned())
}

/// Moore–Penrose pseudo-inverse with a relative singular-value cutoff.
pub fn pseudo_inverse(k: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    let Svd { u, singular_values, v } = svd(k)?;
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(k.ncols(), k.nrows());
    for (i, &s) in singular_values.iter().enumerate() {
        if smax > 0.0 && s / smax >= rank_tol {
            out += (v.column(i) * u.column(i).adjoint()).unscale(s);
        }
    }
    Ok(out)
}

/// `max |(a* a − 1)_{ij}|`-style defect measured in HS norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - identity(n)).norm()
}

/// HS distance of `p` from being an orthogonal projection.
pub fn projection_defect(p: &CMatrix) -> f64 {
    (p * p - p).norm() + (p - p.adjoint()).norm()
}

/// Basis vector `|i⟩` in `C^n`.
pub fn ket(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// The standard Pauli matrices.
pub mod pauli {
    use super::{c, CMatrix};

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }
}
