//! Finite-dimensional von Neumann algebras on `C^n`.
//!
//! An [`OperatorAlgebra`] is a unital *-closed subspace of `B(C^n)` that is
//! closed under products, stored as a Hilbert–Schmidt orthonormal basis.
//! Membership, equality and conditional expectations all reduce to HS
//! projections onto that basis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{
    add_scaled, c, commutation_nullspace, ensure_dim, hermitian_eigen, hs_inner, identity, polar_decompose, svd,
    CMatrix, HsOrthonormalizer, Tolerances, C64,
};

/// Seed of the random central element used by [`OperatorAlgebra::block_decompose`].
pub const BLOCK_SEED: u64 = 0x5eed_b10c;

/// Eigenvalues of the (operator-norm one) random central element closer than
/// this are treated as one block.
const CENTRAL_MERGE_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct OperatorAlgebra {
    hilbert_dim: usize,
    basis: Vec<CMatrix>,
}

impl OperatorAlgebra {
    /// Smallest unital *-algebra containing `generators`.
    ///
    /// Starting from `span{1} ∪ generators`, the span is repeatedly closed
    /// under left multiplication by the generators and their adjoints until
    /// every basis element has been processed. In finite dimensions the result
    /// is the double commutant of the generators.
    pub fn generate(generators: &[CMatrix], hilbert_dim: usize, tol: &Tolerances) -> Result<Self> {
        let n = hilbert_dim;
        let mut letters = Vec::with_capacity(2 * generators.len());
        for g in generators {
            ensure_dim(g, n, "generate_algebra")?;
            let norm = g.norm();
            if norm == 0.0 {
                continue;
            }
            let g = g.unscale(norm);
            letters.push(g.adjoint());
            letters.push(g);
        }

        let limit = n * n;
        let mut gs = HsOrthonormalizer::new(tol.rank_tol);
        gs.push(&identity(n));
        for g in &letters {
            gs.push_scaled(g, 1.0);
        }
        let mut next = 0;
        while next < gs.len() {
            let current = gs.basis()[next].clone();
            for g in &letters {
                if gs.len() == limit {
                    break;
                }
                gs.push_scaled(&(g * &current), 1.0);
            }
            if gs.len() == limit {
                break;
            }
            if gs.len() > limit {
                return Err(Error::NonConvergence { limit });
            }
            next += 1;
        }
        Ok(Self {
            hilbert_dim: n,
            basis: gs.into_basis(),
        })
    }

    /// `B(C^n)`, with the matrix units as basis.
    pub fn full(n: usize) -> Self {
        let basis = (0..n * n)
            .map(|k| {
                let mut e = CMatrix::zeros(n, n);
                e[(k / n, k % n)] = c(1.0, 0.0);
                e
            })
            .collect();
        Self { hilbert_dim: n, basis }
    }

    /// `C·1`.
    pub fn scalars(n: usize) -> Self {
        Self {
            hilbert_dim: n,
            basis: vec![identity(n).unscale((n as f64).sqrt())],
        }
    }

    /// Wrap an operator subspace, checking that it is a unital *-algebra.
    pub fn from_span(ops: &[CMatrix], hilbert_dim: usize, tol: &Tolerances) -> Result<Self> {
        let mut gs = HsOrthonormalizer::new(tol.rank_tol);
        for x in ops {
            ensure_dim(x, hilbert_dim, "from_span")?;
            gs.push(x);
        }
        let alg = Self {
            hilbert_dim,
            basis: gs.into_basis(),
        };
        let defect = alg.closure_defect();
        if defect > tol.eq_tol {
            return Err(Error::Validation(format!(
                "span is not a unital *-algebra (closure defect {defect:e})"
            )));
        }
        Ok(alg)
    }

    pub(crate) fn from_orthonormal(hilbert_dim: usize, basis: Vec<CMatrix>) -> Self {
        Self { hilbert_dim, basis }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Dimension of the algebra as a vector space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Largest HS residual among: the identity, adjoints of basis elements,
    /// and pairwise products of basis elements, after projecting onto the span.
    pub fn closure_defect(&self) -> f64 {
        let mut worst = self.membership_residual(&identity(self.hilbert_dim));
        for (i, a) in self.basis.iter().enumerate() {
            worst = worst.max(self.membership_residual(&a.adjoint()));
            for b in &self.basis[i..] {
                worst = worst.max(self.membership_residual(&(a * b)));
                worst = worst.max(self.membership_residual(&(b * a)));
            }
        }
        worst
    }

    fn check_dim(&self, other: &OperatorAlgebra, context: &'static str) -> Result<()> {
        if self.hilbert_dim != other.hilbert_dim {
            return Err(Error::Dimension {
                context,
                expected: self.hilbert_dim,
                found: other.hilbert_dim,
            });
        }
        Ok(())
    }

    /// HS-orthogonal projection onto the span. This is the trace-preserving
    /// conditional expectation onto the algebra.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for e in &self.basis {
            add_scaled(&mut out, hs_inner(e, x), e);
        }
        out
    }

    /// `E(x)`: positive, unital, `E(a x b) = a E(x) b` for `a, b` in the algebra.
    pub fn conditional_expectation(&self, x: &CMatrix) -> Result<CMatrix> {
        ensure_dim(x, self.hilbert_dim, "conditional_expectation")?;
        Ok(self.project(x))
    }

    /// `‖x − P(x)‖_HS / ‖x‖_HS` (zero for `x = 0`).
    pub fn membership_residual(&self, x: &CMatrix) -> f64 {
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (x - self.project(x)).norm() / norm
    }

    pub fn contains_operator(&self, x: &CMatrix, tol: &Tolerances) -> Result<bool> {
        ensure_dim(x, self.hilbert_dim, "contains_operator")?;
        Ok(self.membership_residual(x) <= tol.eq_tol)
    }

    /// Largest membership residual of `other`'s basis in `self`; zero iff
    /// `other ⊆ self`.
    pub fn containment_defect(&self, other: &OperatorAlgebra) -> Result<f64> {
        self.check_dim(other, "containment_defect")?;
        Ok(other
            .basis
            .iter()
            .map(|e| self.membership_residual(e))
            .fold(0.0, f64::max))
    }

    /// Mutual span containment. Returns the verdict and the larger of the two
    /// one-sided defects.
    pub fn equals(&self, other: &OperatorAlgebra, tol: &Tolerances) -> Result<(bool, f64)> {
        let residual = self.containment_defect(other)?.max(other.containment_defect(self)?);
        Ok((residual <= tol.eq_tol, residual))
    }

    pub fn equals_algebra(&self, other: &OperatorAlgebra, tol: &Tolerances) -> Result<bool> {
        Ok(self.equals(other, tol)?.0)
    }

    /// `M' = {x : [x, a] = 0 ∀a ∈ M}`.
    pub fn commutant(&self, tol: &Tolerances) -> Result<Self> {
        let null = commutation_nullspace(&self.basis, self.hilbert_dim, tol.rank_tol)?;
        let mut gs = HsOrthonormalizer::new(tol.rank_tol);
        for x in &null {
            gs.push(x);
        }
        Ok(Self::from_orthonormal(self.hilbert_dim, gs.into_basis()))
    }

    /// `M ∨ N`, the algebra generated by both.
    pub fn join(&self, other: &OperatorAlgebra, tol: &Tolerances) -> Result<Self> {
        self.check_dim(other, "join")?;
        let gens: Vec<CMatrix> = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::generate(&gens, self.hilbert_dim, tol)
    }

    /// `span(M) ∩ span(N)`, from the principal angles between the two
    /// subspaces: directions with cosine at least `1 − rank_tol` are shared.
    pub fn intersection(&self, other: &OperatorAlgebra, tol: &Tolerances) -> Result<Self> {
        self.check_dim(other, "intersection")?;
        let (du, dv) = (self.dim(), other.dim());
        let mut overlap = CMatrix::zeros(du, dv);
        for (i, u) in self.basis.iter().enumerate() {
            for (j, v) in other.basis.iter().enumerate() {
                overlap[(i, j)] = hs_inner(u, v);
            }
        }
        let svd = svd(&overlap)?;
        let left = svd.u;
        let mut gs = HsOrthonormalizer::new(tol.rank_tol);
        for (k, &cosine) in svd.singular_values.iter().enumerate() {
            if cosine >= 1.0 - tol.rank_tol {
                let mut x = CMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
                for (i, u) in self.basis.iter().enumerate() {
                    add_scaled(&mut x, left[(i, k)], u);
                }
                gs.push(&x);
            }
        }
        Ok(Self::from_orthonormal(self.hilbert_dim, gs.into_basis()))
    }

    /// `Z(M) = M ∩ M'`.
    pub fn center(&self, tol: &Tolerances) -> Result<Self> {
        let comm = self.commutant(tol)?;
        self.intersection(&comm, tol)
    }

    pub fn is_factor(&self, tol: &Tolerances) -> Result<bool> {
        Ok(self.center(tol)?.dim() == 1)
    }

    /// Artin–Wedderburn form `W* M W = ⊕_k M_{n_k} ⊗ 1_{m_k}`.
    pub fn block_decompose(&self, tol: &Tolerances) -> Result<BlockDecomposition> {
        let comm = self.commutant(tol)?;
        let center = self.intersection(&comm, tol)?;
        let mut last_err = None;
        for attempt in 0..3 {
            match self.try_block_decompose(&comm, &center, BLOCK_SEED + attempt, tol) {
                Ok(d) => return Ok(d),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("at least one attempt"))
    }

    fn try_block_decompose(
        &self,
        comm: &OperatorAlgebra,
        center: &OperatorAlgebra,
        seed: u64,
        tol: &Tolerances,
    ) -> Result<BlockDecomposition> {
        let n = self.hilbert_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let central = random_self_adjoint(center.basis(), n, &mut rng);
        let eig = hermitian_eigen(&central);
        let merge = tol.rank_tol.max(CENTRAL_MERGE_FLOOR);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &lam) in eig.values.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if (eig.values[*g.last().unwrap()] - lam).abs() <= merge => g.push(i),
                _ => groups.push(vec![i]),
            }
        }

        let mut w = CMatrix::zeros(n, n);
        let mut blocks = Vec::with_capacity(groups.len());
        let mut projections = Vec::with_capacity(groups.len());
        let mut offset = 0;
        for group in &groups {
            let rank = group.len();
            let mut range = CMatrix::zeros(n, rank);
            for (dst, &src) in group.iter().enumerate() {
                range.set_column(dst, &eig.vectors.column(src));
            }
            let range_adj = range.adjoint();
            projections.push(&range * &range_adj);

            let compress = |x: &CMatrix| &range_adj * x * &range;
            let mut local = HsOrthonormalizer::new(tol.rank_tol);
            for e in self.basis() {
                local.push_scaled(&compress(e), 1.0);
            }
            let alg_dim = local.len();
            let size = (alg_dim as f64).sqrt().round() as usize;
            if size == 0 || size * size != alg_dim || rank % size != 0 {
                return Err(Error::InternalConsistency(format!(
                    "central block of rank {rank} carries a {alg_dim}-dimensional algebra"
                )));
            }
            let multiplicity = rank / size;

            let local_comm: Vec<CMatrix> = comm.basis().iter().map(compress).collect();
            let columns = block_columns(&local_comm, size, multiplicity, &mut rng)?;
            let global = &range * columns;
            w.view_mut((0, offset), (n, rank)).copy_from(&global);
            blocks.push(Block {
                size,
                multiplicity,
                offset,
            });
            offset += rank;
        }

        let decomp = BlockDecomposition {
            basis_change: w,
            blocks,
            central_projections: projections,
        };
        let defect = self
            .basis()
            .iter()
            .map(|e| decomp.structure_defect(e))
            .fold(0.0, f64::max);
        if defect > tol.eq_tol {
            return Err(Error::InternalConsistency(format!(
                "block structure verification failed (defect {defect:e})"
            )));
        }
        Ok(decomp)
    }
}

fn random_self_adjoint(basis: &[CMatrix], n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let mut h = CMatrix::zeros(n, n);
    for e in basis {
        let coeff = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        add_scaled(&mut h, coeff, e);
    }
    let h = (&h + h.adjoint()).scale(0.5);
    let norm = crate::numerics::op_norm(&h);
    if norm > 0.0 {
        h.unscale(norm)
    } else {
        h
    }
}

/// Columns `ξ_{a,j}` (index `a·m + j`) of one central block, in the block's
/// local coordinates. `local_comm` spans the commutant compressed to the
/// block, which is `1_size ⊗ M_multiplicity` up to a unitary.
fn block_columns(local_comm: &[CMatrix], size: usize, multiplicity: usize, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    let rank = size * multiplicity;
    if multiplicity == 1 {
        return Ok(identity(rank));
    }
    // Eigenspaces of a generic element of the commutant are the irreducible
    // copies, each of dimension `size`.
    let h = random_self_adjoint(local_comm, rank, rng);
    let eig = hermitian_eigen(&h);
    let copy = |j: usize| eig.vectors.columns(j * size, size).into_owned();
    let first = copy(0);

    let mut out = CMatrix::zeros(rank, rank);
    for j in 0..multiplicity {
        let target = copy(j);
        let transport = if j == 0 {
            identity(size)
        } else {
            // Some element of the commutant links copy 0 to copy j; its
            // compression is a multiple of a unitary.
            let link = local_comm
                .iter()
                .map(|y| target.adjoint() * y * &first)
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .ok_or_else(|| Error::InternalConsistency("empty commutant".into()))?;
            if link.norm() == 0.0 {
                return Err(Error::InternalConsistency(
                    "no commutant element links two irreducible copies".into(),
                ));
            }
            polar_decompose(&link)?.unitary
        };
        let vectors = &target * transport;
        for a in 0..size {
            out.set_column(a * multiplicity + j, &vectors.column(a));
        }
    }
    Ok(out)
}

/// One summand `M_size ⊗ 1_multiplicity` occupying columns
/// `offset .. offset + size·multiplicity` of the basis change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Block {
    pub size: usize,
    pub multiplicity: usize,
    pub offset: usize,
}

impl Block {
    pub fn rank(&self) -> usize {
        self.size * self.multiplicity
    }
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    /// Unitary `W` with `W* x W = ⊕ x_k ⊗ 1_{m_k}` for every `x` in the algebra.
    pub basis_change: CMatrix,
    pub blocks: Vec<Block>,
    pub central_projections: Vec<CMatrix>,
}

impl BlockDecomposition {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `(n_k, m_k)` pairs.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.size, b.multiplicity)).collect()
    }

    /// The `n_k × n_k` factor `x_k` of `x` on block `k`, i.e. the block of
    /// `W* x W` with the multiplicity index traced out and renormalized.
    pub fn reduce(&self, x: &CMatrix, k: usize) -> CMatrix {
        let b = self.blocks[k];
        let local = self.local(x, k);
        let m = b.multiplicity;
        CMatrix::from_fn(b.size, b.size, |a, bb| {
            (0..m).map(|j| local[(a * m + j, bb * m + j)]).sum::<C64>() / c(m as f64, 0.0)
        })
    }

    fn local(&self, x: &CMatrix, k: usize) -> CMatrix {
        let b = self.blocks[k];
        let cols = self.basis_change.columns(b.offset, b.rank());
        cols.adjoint() * x * cols
    }

    /// `⊕ x_k ⊗ 1_{m_k}` mapped back through `W`.
    pub fn assemble(&self, factors: &[CMatrix]) -> CMatrix {
        let n = self.basis_change.nrows();
        let mut inner = CMatrix::zeros(n, n);
        for (b, x) in self.blocks.iter().zip(factors) {
            let tensor = x.kronecker(&identity(b.multiplicity));
            inner
                .view_mut((b.offset, b.offset), (b.rank(), b.rank()))
                .copy_from(&tensor);
        }
        &self.basis_change * inner * self.basis_change.adjoint()
    }

    /// HS distance of `W* x W` from the block form, relative to `‖x‖_HS`.
    pub fn structure_defect(&self, x: &CMatrix) -> f64 {
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let factors: Vec<CMatrix> = (0..self.blocks.len()).map(|k| self.reduce(x, k)).collect();
        (self.assemble(&factors) - x).norm() / norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{kron, pauli};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag_alg_2() -> OperatorAlgebra {
        OperatorAlgebra::generate(&[pauli::z()], 2, &tol()).unwrap()
    }

    fn m2_left() -> OperatorAlgebra {
        let gens = [kron(&pauli::x(), &identity(2)), kron(&pauli::z(), &identity(2))];
        OperatorAlgebra::generate(&gens, 4, &tol()).unwrap()
    }

    fn m2_right() -> OperatorAlgebra {
        let gens = [kron(&identity(2), &pauli::x()), kron(&identity(2), &pauli::z())];
        OperatorAlgebra::generate(&gens, 4, &tol()).unwrap()
    }

    fn diag_left() -> OperatorAlgebra {
        OperatorAlgebra::generate(&[kron(&pauli::z(), &identity(2))], 4, &tol()).unwrap()
    }

    #[test]
    fn generate_examples() {
        assert_eq!(OperatorAlgebra::generate(&[], 3, &tol()).unwrap().dim(), 1);
        let full = OperatorAlgebra::generate(&[pauli::x(), pauli::z()], 2, &tol()).unwrap();
        assert_eq!(full.dim(), 4);
        assert_eq!(diag_left().dim(), 2);
        assert!(matches!(
            OperatorAlgebra::generate(&[pauli::x()], 3, &tol()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn generated_algebra_is_closed() {
        for alg in [diag_alg_2(), m2_left(), m2_right(), OperatorAlgebra::full(3)] {
            assert!(alg.closure_defect() < 1e-12);
        }
    }

    #[test]
    fn commutant_examples() {
        let t = tol();
        let c = OperatorAlgebra::full(3).commutant(&t).unwrap();
        assert!(c.equals_algebra(&OperatorAlgebra::scalars(3), &t).unwrap());
        let c = m2_left().commutant(&t).unwrap();
        assert!(c.equals_algebra(&m2_right(), &t).unwrap());
        let c = diag_alg_2().commutant(&t).unwrap();
        assert!(c.equals_algebra(&diag_alg_2(), &t).unwrap());
    }

    #[test]
    fn center_and_factor() {
        let t = tol();
        let full = OperatorAlgebra::full(3);
        assert_eq!(full.center(&t).unwrap().dim(), 1);
        assert!(full.is_factor(&t).unwrap());
        let d = diag_alg_2();
        assert!(d.center(&t).unwrap().equals_algebra(&d, &t).unwrap());
        assert!(!d.is_factor(&t).unwrap());
        assert!(m2_left().is_factor(&t).unwrap());
    }

    #[test]
    fn join_examples() {
        let t = tol();
        let m = m2_left();
        let j = m.join(&OperatorAlgebra::scalars(4), &t).unwrap();
        assert!(j.equals_algebra(&m, &t).unwrap());
        assert_eq!(m2_left().join(&m2_right(), &t).unwrap().dim(), 16);
        assert_eq!(diag_left().join(&m2_right(), &t).unwrap().dim(), 8);
    }

    #[test]
    fn membership_examples() {
        let t = tol();
        assert!(m2_right().contains_operator(&identity(4), &t).unwrap());
        let sx1 = kron(&pauli::x(), &identity(2));
        assert!(!m2_right().contains_operator(&sx1, &t).unwrap());
        assert!((m2_right().membership_residual(&sx1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_decompose_examples() {
        let t = tol();
        let full = OperatorAlgebra::full(3).block_decompose(&t).unwrap();
        assert_eq!(full.shape(), vec![(3, 1)]);
        let scalars = OperatorAlgebra::scalars(3).block_decompose(&t).unwrap();
        assert_eq!(scalars.shape(), vec![(1, 3)]);
        let d = diag_left().block_decompose(&t).unwrap();
        assert_eq!(d.shape(), vec![(1, 2), (1, 2)]);
        let p0 = kron(
            &CMatrix::from_diagonal(&crate::numerics::CVector::from_vec(vec![c(1., 0.), c(0., 0.)])),
            &identity(2),
        );
        let p1 = identity(4) - &p0;
        for p in &d.central_projections {
            assert!((p - &p0).norm() < 1e-10 || (p - &p1).norm() < 1e-10);
        }
        let right = m2_right().block_decompose(&t).unwrap();
        assert_eq!(right.shape(), vec![(2, 2)]);
    }

    #[test]
    fn conditional_expectation_examples() {
        let t = tol();
        let m = m2_left();
        let x = kron(&pauli::y(), &identity(2));
        assert!((m.conditional_expectation(&x).unwrap() - &x).norm() < 1e-12);

        let mut arbitrary = CMatrix::zeros(3, 3);
        arbitrary[(0, 0)] = c(2.0, 1.0);
        arbitrary[(1, 2)] = c(5.0, 0.0);
        arbitrary[(2, 2)] = c(1.0, 0.0);
        let e = OperatorAlgebra::scalars(3).conditional_expectation(&arbitrary).unwrap();
        let expected = identity(3) * (arbitrary.trace() / c(3.0, 0.0));
        assert!((e - expected).norm() < 1e-12);

        let e = diag_alg_2().conditional_expectation(&pauli::x()).unwrap();
        assert!(e.norm() < 1e-12);
        let _ = t;
    }

    #[test]
    fn from_span_rejects_non_algebra() {
        let t = tol();
        assert!(OperatorAlgebra::from_span(&[identity(2), pauli::x()], 2, &t).is_ok());
        assert!(OperatorAlgebra::from_span(&[pauli::x()], 2, &t).is_err());
        assert!(OperatorAlgebra::from_span(&[identity(2), pauli::x(), pauli::z()], 2, &t).is_err());
    }
}
