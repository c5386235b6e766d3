//! Seeded random matrices, states and algebras.
//!
//! Every sampler takes an explicit `ChaCha8Rng`; [`sample_rng`] derives an
//! independent stream per `(seed, index)` so randomized loops are
//! reproducible regardless of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::OperatorAlgebra;
use crate::error::Result;
use crate::numerics::{
    add_scaled, c, hermitian_eigen, identity, kron, op_norm, unitary_exp, CMatrix, CVector, Tolerances, C64,
};

pub type SampleRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_rng(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian(rng: &mut SampleRng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / c(2f64.sqrt(), 0.0)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut SampleRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian(n: usize, rng: &mut SampleRng) -> CMatrix {
    let g = ginibre(n, n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn random_unitary(n: usize, rng: &mut SampleRng) -> CMatrix {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniformly random unit vector in `C^n`.
pub fn random_vector(n: usize, rng: &mut SampleRng) -> CVector {
    let v = CVector::from_fn(n, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Full-rank density matrix `G G* / Tr(G G*)`.
pub fn random_density(n: usize, rng: &mut SampleRng) -> CMatrix {
    random_density_with_rank(n, n, rng)
}

pub fn random_density_with_rank(n: usize, rank: usize, rng: &mut SampleRng) -> CMatrix {
    let g = ginibre(n, rank, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random self-adjoint element of the span, normalized to operator norm one.
pub fn random_self_adjoint_in(alg: &OperatorAlgebra, rng: &mut SampleRng) -> CMatrix {
    let n = alg.hilbert_dim();
    let mut h = CMatrix::zeros(n, n);
    for e in alg.basis() {
        add_scaled(&mut h, gaussian(rng), e);
    }
    let h = (&h + h.adjoint()).scale(0.5);
    let norm = op_norm(&h);
    if norm > 0.0 {
        h.unscale(norm)
    } else {
        h
    }
}

/// `exp(iπ h)` for a random self-adjoint `h` in the algebra; lies in the
/// algebra because it is a spectral function of `h`.
pub fn random_unitary_in(alg: &OperatorAlgebra, rng: &mut SampleRng) -> CMatrix {
    let h = random_self_adjoint_in(alg, rng);
    unitary_exp(&h, std::f64::consts::PI * rng.random_range(0.25..1.0))
}

/// Random Wedderburn shape `[(n_k, m_k)]` with `Σ n_k m_k = n`.
pub fn random_block_shape(n: usize, rng: &mut SampleRng) -> Vec<(usize, usize)> {
    let mut shape = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let multiplicity = rng.random_range(1..=remaining);
        let size = rng.random_range(1..=remaining / multiplicity);
        shape.push((size, multiplicity));
        remaining -= size * multiplicity;
    }
    shape
}

/// Generators of `W (⊕ M_{n_k} ⊗ 1_{m_k}) W*` for a Haar-random `W`: two
/// random elements per summand, so the generated algebra has exactly the
/// requested shape with probability one.
pub fn block_algebra_generators(shape: &[(usize, usize)], rng: &mut SampleRng) -> (Vec<CMatrix>, CMatrix) {
    let n: usize = shape.iter().map(|(s, m)| s * m).sum();
    let w = random_unitary(n, rng);
    let gens = (0..2)
        .map(|_| {
            let mut inner = CMatrix::zeros(n, n);
            let mut offset = 0;
            for &(size, mult) in shape {
                let block = kron(&ginibre(size, size, rng), &identity(mult));
                let rank = size * mult;
                inner.view_mut((offset, offset), (rank, rank)).copy_from(&block);
                offset += rank;
            }
            &w * inner * w.adjoint()
        })
        .collect();
    (gens, w)
}

pub fn random_algebra_with_shape(
    shape: &[(usize, usize)],
    rng: &mut SampleRng,
    tol: &Tolerances,
) -> Result<OperatorAlgebra> {
    let n = shape.iter().map(|(s, m)| s * m).sum();
    let (gens, _) = block_algebra_generators(shape, rng);
    OperatorAlgebra::generate(&gens, n, tol)
}

pub fn random_algebra(n: usize, rng: &mut SampleRng, tol: &Tolerances) -> Result<OperatorAlgebra> {
    let shape = random_block_shape(n, rng);
    random_algebra_with_shape(&shape, rng, tol)
}

/// Algebra generated by one generic self-adjoint element of `alg`: an abelian
/// subalgebra, spanned by the spectral projections of that element.
pub fn random_abelian_subalgebra(
    alg: &OperatorAlgebra,
    rng: &mut SampleRng,
    tol: &Tolerances,
) -> Result<OperatorAlgebra> {
    let h = random_self_adjoint_in(alg, rng);
    // Sanity: a self-adjoint element has a real spectrum.
    debug_assert!(hermitian_eigen(&h).values.iter().all(|v| v.is_finite()));
    OperatorAlgebra::generate(&[h], alg.hilbert_dim(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::unitarity_defect;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(1);
        for n in 1..6 {
            assert!(unitarity_defect(&random_unitary(n, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn shapes_partition_dimension() {
        let mut rng = seeded(2);
        for n in 1..10 {
            let shape = random_block_shape(n, &mut rng);
            assert_eq!(shape.iter().map(|(s, m)| s * m).sum::<usize>(), n);
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = gaussian(&mut sample_rng(7, 3));
        let b = gaussian(&mut sample_rng(7, 3));
        let other = gaussian(&mut sample_rng(7, 4));
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn shaped_algebra_has_expected_dimension() {
        let tol = Tolerances::default();
        let mut rng = seeded(3);
        let alg = random_algebra_with_shape(&[(2, 1), (1, 3)], &mut rng, &tol).unwrap();
        assert_eq!(alg.hilbert_dim(), 5);
        assert_eq!(alg.dim(), 4 + 1);
    }
}
