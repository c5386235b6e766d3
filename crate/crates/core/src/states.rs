//! Vector states, functionals on algebras, fidelity, purification and the
//! GNS construction.

use crate::algebra::OperatorAlgebra;
use crate::error::{Error, Result};
use crate::numerics::{
    c, ensure_dim, ensure_finite, hermitian_eigen, hs_inner, psd_sqrt, range_basis, trace_norm, CMatrix, CVector,
    Tolerances, C64,
};

/// Unit vector in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorState {
    amplitudes: CVector,
}

impl VectorState {
    /// Accepts `amplitudes` only if its norm is one within `eq_tol`.
    pub fn new(amplitudes: CVector, tol: &Tolerances) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tol.eq_tol {
            return Err(Error::Validation(format!("state vector has norm {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; fails only on the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// `|i⟩` in `C^n`.
    pub fn basis(n: usize, i: usize) -> Self {
        Self {
            amplitudes: crate::numerics::ket(n, i),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &VectorState) -> Self {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &VectorState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `⟨self, x self⟩`.
    pub fn expectation(&self, x: &CMatrix) -> C64 {
        self.amplitudes.dotc(&(x * &self.amplitudes))
    }

    /// `u |self⟩`, for `u` unitary.
    pub fn evolve(&self, u: &CMatrix) -> Result<Self> {
        ensure_dim(u, self.dim(), "evolve")?;
        Self::normalized(u * &self.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Positive semidefinite matrix of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let n = crate::numerics::ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let herm = (&matrix - matrix.adjoint()).norm();
        if herm > tol.eq_tol {
            return Err(Error::Validation(format!(
                "density matrix is not Hermitian (defect {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > tol.eq_tol {
            return Err(Error::Validation(format!("density matrix has trace {tr}, expected 1")));
        }
        let eig = hermitian_eigen(&matrix);
        if let Some(&min) = eig.values.last() {
            if min < -tol.eq_tol {
                return Err(Error::Validation(format!(
                    "density matrix is not positive semidefinite (eigenvalue {min:e})"
                )));
            }
        }
        debug_assert_eq!(n, matrix.nrows());
        Ok(Self { matrix })
    }

    pub fn pure(state: &VectorState) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// A linear functional on an algebra, recorded by its values on the
/// algebra's stored basis.
#[derive(Clone, Debug)]
pub struct AlgebraFunctional<'a> {
    algebra: &'a OperatorAlgebra,
    values: Vec<C64>,
}

impl<'a> AlgebraFunctional<'a> {
    pub fn new(algebra: &'a OperatorAlgebra, values: Vec<C64>) -> Result<Self> {
        if values.len() != algebra.dim() {
            return Err(Error::Dimension {
                context: "algebra functional",
                expected: algebra.dim(),
                found: values.len(),
            });
        }
        Ok(Self { algebra, values })
    }

    /// `a ↦ Tr(ρ a)` restricted to the algebra.
    pub fn from_density(algebra: &'a OperatorAlgebra, rho: &CMatrix) -> Result<Self> {
        ensure_dim(rho, algebra.hilbert_dim(), "functional from density")?;
        let values = algebra.basis().iter().map(|e| (rho * e).trace()).collect();
        Ok(Self { algebra, values })
    }

    pub fn algebra(&self) -> &OperatorAlgebra {
        self.algebra
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// The unique `ρ_M` in the algebra with `ω(a) = Tr(ρ_M a)` for all `a`
    /// in the algebra; Hermitian whenever `ω` is.
    pub fn density(&self) -> CMatrix {
        let n = self.algebra.hilbert_dim();
        let mut rho = CMatrix::zeros(n, n);
        for (e, v) in self.algebra.basis().iter().zip(&self.values) {
            crate::numerics::add_scaled(&mut rho, v.conj(), e);
        }
        // The sum is ρ_M*, since Tr(ρ e_i) = ⟨ρ*, e_i⟩.
        rho.adjoint()
    }

    /// `ω(x)` for `x` in the algebra (other `x` are first projected).
    pub fn evaluate(&self, x: &CMatrix) -> C64 {
        self.algebra
            .basis()
            .iter()
            .zip(&self.values)
            .map(|(e, v)| hs_inner(e, x) * v)
            .sum()
    }

    /// Most negative eigenvalue of the density (zero if none). `ω` is
    /// positive on the algebra iff this is zero, because the spectral
    /// projections of `ρ_M` lie in the algebra.
    pub fn positivity_defect(&self) -> f64 {
        let rho = self.density();
        let herm = (&rho + rho.adjoint()).scale(0.5);
        let eig = hermitian_eigen(&herm);
        eig.values.last().map_or(0.0, |&m| (-m).max(0.0))
    }

    /// Checks positivity and `ω(1) = 1`.
    pub fn validate_state(&self, tol: &Tolerances) -> Result<()> {
        let defect = self.positivity_defect();
        if defect > tol.eq_tol {
            return Err(Error::Validation(format!(
                "functional is not positive (defect {defect:e})"
            )));
        }
        let one = self.evaluate(&crate::numerics::identity(self.algebra.hilbert_dim()));
        if (one - c(1.0, 0.0)).norm() > tol.eq_tol {
            return Err(Error::Validation(format!("functional has ω(1) = {one}")));
        }
        Ok(())
    }
}

fn ensure_state_dim(state: &VectorState, alg: &OperatorAlgebra, context: &'static str) -> Result<()> {
    if state.dim() != alg.hilbert_dim() {
        return Err(Error::Dimension {
            context,
            expected: alg.hilbert_dim(),
            found: state.dim(),
        });
    }
    Ok(())
}

/// `ω(e_i) = ⟨Ψ, e_i Ψ⟩`.
pub fn marginal<'a>(psi: &VectorState, alg: &'a OperatorAlgebra) -> Result<AlgebraFunctional<'a>> {
    ensure_state_dim(psi, alg, "marginal")?;
    let values = alg.basis().iter().map(|e| psi.expectation(e)).collect();
    AlgebraFunctional::new(alg, values)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct MarginalComparison {
    pub equal: bool,
    pub max_deviation: f64,
}

/// Compares `⟨Ψ, e_i Ψ⟩` and `⟨Φ, e_i Φ⟩` over the basis.
pub fn marginals_equal(
    psi: &VectorState,
    phi: &VectorState,
    alg: &OperatorAlgebra,
    tol: f64,
) -> Result<MarginalComparison> {
    let a = marginal(psi, alg)?;
    let b = marginal(phi, alg)?;
    let max_deviation = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(MarginalComparison {
        equal: max_deviation <= tol,
        max_deviation,
    })
}

/// `F(ρ, σ) = ‖ρ^{1/2} σ^{1/2}‖₁`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension {
            context: "fidelity",
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let a = psd_sqrt(rho.matrix(), tol.rank_tol)?;
    let b = psd_sqrt(sigma.matrix(), tol.rank_tol)?;
    Ok(trace_norm(&(a * b))?.clamp(0.0, 1.0))
}

/// `Σ_i √λ_i |v_i⟩ ⊗ |i⟩` on `C^n ⊗ C^n` (system first).
///
/// Eigenvectors are taken in descending eigenvalue order, each rotated so its
/// first non-negligible amplitude is real and positive.
pub fn purify(rho: &DensityMatrix) -> VectorState {
    let n = rho.dim();
    let eig = hermitian_eigen(rho.matrix());
    let mut out = CVector::zeros(n * n);
    // Eigenvalues at round-off level are treated as exact zeros.
    let floor = 64.0 * f64::EPSILON * eig.values.first().copied().unwrap_or(0.0).max(0.0);
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam <= floor {
            continue;
        }
        let weight = lam.sqrt();
        let mut v = eig.vectors.column(i).into_owned();
        let vmax = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if let Some(first) = v.iter().find(|z| z.norm() > 1e-12 * vmax).copied() {
            let phase = first.conj() / first.norm();
            v *= phase;
        }
        for a in 0..n {
            out[a * n + i] += v[a] * weight;
        }
    }
    VectorState::normalized(out).expect("a density matrix has positive trace")
}

/// `Tr_2 |ψ⟩⟨ψ|` for `ψ ∈ C^{d1} ⊗ C^{d2}` (index `a·d2 + b`).
pub fn partial_trace_second(psi: &CVector, d1: usize, d2: usize) -> Result<CMatrix> {
    if psi.len() != d1 * d2 {
        return Err(Error::Dimension {
            context: "partial trace",
            expected: d1 * d2,
            found: psi.len(),
        });
    }
    let m = CMatrix::from_fn(d1, d2, |a, b| psi[a * d2 + b]);
    Ok(&m * m.adjoint())
}

/// `Tr_1 |ψ⟩⟨ψ|`.
pub fn partial_trace_first(psi: &CVector, d1: usize, d2: usize) -> Result<CMatrix> {
    if psi.len() != d1 * d2 {
        return Err(Error::Dimension {
            context: "partial trace",
            expected: d1 * d2,
            found: psi.len(),
        });
    }
    let m = CMatrix::from_fn(d1, d2, |a, b| psi[a * d2 + b]);
    Ok((m.adjoint() * &m).transpose())
}

/// Columns `e_i Ψ` for the algebra's basis.
pub fn orbit_matrix(alg: &OperatorAlgebra, psi: &CVector) -> CMatrix {
    let n = alg.hilbert_dim();
    let mut k = CMatrix::zeros(n, alg.dim());
    for (i, e) in alg.basis().iter().enumerate() {
        k.set_column(i, &(e * psi));
    }
    k
}

/// Orthogonal projection `[MΨ]` onto `span{e_i Ψ}`.
pub fn cyclic_projection(alg: &OperatorAlgebra, psi: &VectorState, tol: &Tolerances) -> Result<CMatrix> {
    ensure_state_dim(psi, alg, "cyclic_projection")?;
    let q = range_basis(&orbit_matrix(alg, psi.amplitudes()), tol.rank_tol)?;
    Ok(&q * q.adjoint())
}

/// Cyclic representation of `(M, ω)`.
#[derive(Clone, Debug)]
pub struct GnsData {
    pub gns_dim: usize,
    /// `π(e_i)` for each basis element `e_i` of the algebra.
    pub rep_matrices: Vec<CMatrix>,
    /// `Ω = [1]`.
    pub cyclic_vector: VectorState,
}

impl GnsData {
    /// `π(x)` for `x` in the algebra, by linearity over the basis.
    pub fn represent(&self, alg: &OperatorAlgebra, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.gns_dim, self.gns_dim);
        for (e, r) in alg.basis().iter().zip(&self.rep_matrices) {
            crate::numerics::add_scaled(&mut out, hs_inner(e, x), r);
        }
        out
    }
}

/// Left-multiplication matrices `L_i[m, j] = ⟨e_m, e_i e_j⟩`.
fn structure_matrices(alg: &OperatorAlgebra) -> Vec<CMatrix> {
    let basis = alg.basis();
    let d = basis.len();
    basis
        .iter()
        .map(|ei| {
            let mut l = CMatrix::zeros(d, d);
            for (j, ej) in basis.iter().enumerate() {
                let prod = ei * ej;
                for (m, em) in basis.iter().enumerate() {
                    l[(m, j)] = hs_inner(em, &prod);
                }
            }
            l
        })
        .collect()
}

/// GNS construction for a state on a finite-dimensional algebra.
///
/// With Gram matrix `G_ij = ω(e_i* e_j) = V D V*` (kept eigenvalues above
/// `rank_tol` relative to the largest), the representation on the quotient is
/// `π(e_i) = D^{1/2} V* L_i V D^{-1/2}` and `Ω = D^{1/2} V* t` with `t` the
/// coordinates of `1`.
pub fn gns_construct(alg: &OperatorAlgebra, omega: &AlgebraFunctional<'_>, tol: &Tolerances) -> Result<GnsData> {
    omega.validate_state(tol)?;
    let basis = alg.basis();
    let d = basis.len();
    let rho = omega.density();
    let gram = CMatrix::from_fn(d, d, |i, j| (&rho * basis[i].adjoint() * &basis[j]).trace());
    let eig = hermitian_eigen(&gram);
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    if let Some(&min) = eig.values.last() {
        if min < -tol.eq_tol * top.max(1.0) {
            return Err(Error::Validation(format!(
                "GNS Gram matrix is not positive semidefinite (eigenvalue {min:e})"
            )));
        }
    }
    let keep: Vec<usize> = (0..d)
        .filter(|&k| top > 0.0 && eig.values[k] / top >= tol.rank_tol)
        .collect();
    let g = keep.len();
    let mut v = CMatrix::zeros(d, g);
    for (dst, &src) in keep.iter().enumerate() {
        v.set_column(dst, &eig.vectors.column(src));
    }
    let sqrt_d = CMatrix::from_diagonal(&CVector::from_iterator(
        g,
        keep.iter().map(|&k| c(eig.values[k].sqrt(), 0.0)),
    ));
    let inv_sqrt_d = CMatrix::from_diagonal(&CVector::from_iterator(
        g,
        keep.iter().map(|&k| c(1.0 / eig.values[k].sqrt(), 0.0)),
    ));

    let left = structure_matrices(alg);
    let v_adj = v.adjoint();
    let rep_matrices: Vec<CMatrix> = left.iter().map(|l| &sqrt_d * &v_adj * l * &v * &inv_sqrt_d).collect();

    let id = crate::numerics::identity(alg.hilbert_dim());
    let t = CVector::from_iterator(d, basis.iter().map(|e| hs_inner(e, &id)));
    let omega_vec = &sqrt_d * &v_adj * t;
    let cyclic_vector = VectorState::new(
        omega_vec,
        &Tolerances {
            eq_tol: tol.eq_tol.max(1e-8),
            ..*tol
        },
    )?;

    let data = GnsData {
        gns_dim: g,
        rep_matrices,
        cyclic_vector,
    };
    verify_gns(alg, omega, &left, &data, tol)?;
    Ok(data)
}

fn verify_gns(
    alg: &OperatorAlgebra,
    omega: &AlgebraFunctional<'_>,
    left: &[CMatrix],
    data: &GnsData,
    tol: &Tolerances,
) -> Result<()> {
    let omega_vec = data.cyclic_vector.amplitudes();
    for (i, r) in data.rep_matrices.iter().enumerate() {
        let value = omega_vec.dotc(&(r * omega_vec));
        if (value - omega.values()[i]).norm() > tol.eq_tol {
            return Err(Error::InternalConsistency(format!(
                "GNS vector state disagrees with ω on basis element {i}"
            )));
        }
    }
    // Multiplicativity on a deterministic subset of pairs.
    let d = alg.dim();
    let stride = (d * d / 256).max(1);
    for pair in (0..d * d).step_by(stride) {
        let (i, j) = (pair / d, pair % d);
        let lhs = &data.rep_matrices[i] * &data.rep_matrices[j];
        let mut rhs = CMatrix::zeros(data.gns_dim, data.gns_dim);
        for m in 0..d {
            crate::numerics::add_scaled(&mut rhs, left[i][(m, j)], &data.rep_matrices[m]);
        }
        let defect = (lhs - rhs).norm();
        if defect > tol.eq_tol * 10.0 {
            return Err(Error::InternalConsistency(format!(
                "GNS representation not multiplicative on ({i}, {j}): defect {defect:e}"
            )));
        }
    }
    Ok(())
}
