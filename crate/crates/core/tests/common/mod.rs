#![allow(dead_code)]

use uhlmann::algebra::OperatorAlgebra;
use uhlmann::numerics::{identity, kron, unitary_exp};
use uhlmann::random::{ginibre, random_self_adjoint_in, random_unitary, SampleRng};
use uhlmann::{CMatrix, CVector, Tolerances, C64};

pub fn tol() -> Tolerances {
    Tolerances::default()
}

fn overlap_re(psi: &CVector, u: &CMatrix, phi: &CVector) -> f64 {
    psi.dotc(&(u * phi)).re
}

/// Maximizes `Re⟨Ψ, uΦ⟩` over unitaries `u` of `b` by gradient ascent on the
/// group, moving along `u exp(i t g)` with `g` the projection onto `b` of the
/// Hermitian part of `i Φ Ψ* u`. Since `b` contains the phases, the supremum
/// of the real part equals that of the modulus.
pub fn ascent_max_overlap(
    b: &OperatorAlgebra,
    psi: &CVector,
    phi: &CVector,
    starts: usize,
    rng: &mut SampleRng,
) -> f64 {
    let n = b.hilbert_dim();
    let mut best = f64::NEG_INFINITY;
    for s in 0..starts {
        let mut u = if s == 0 {
            identity(n)
        } else {
            unitary_exp(&random_self_adjoint_in(b, rng), std::f64::consts::PI)
        };
        let mut value = overlap_re(psi, &u, phi);
        let mut step = 0.5;
        for _ in 0..20_000 {
            let x = phi * psi.adjoint() * &u;
            let ix = x * C64::new(0.0, 1.0);
            let g = b.project(&((&ix + ix.adjoint()).scale(0.5)));
            if g.norm() < 1e-11 {
                break;
            }
            let mut moved = false;
            while step > 1e-14 {
                let candidate = &u * unitary_exp(&g, step);
                let v = overlap_re(psi, &candidate, phi);
                if v > value {
                    u = candidate;
                    value = v;
                    step *= 1.5;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        best = best.max(value);
    }
    best
}

/// A random `W(⊕ M_{n_k} ⊗ 1_{m_k})W*` together with generators of its
/// commutant `W(⊕ 1_{n_k} ⊗ M_{m_k})W*`, built directly from the shape.
pub fn algebra_and_commutant_generators(
    shape: &[(usize, usize)],
    rng: &mut SampleRng,
) -> (Vec<CMatrix>, Vec<CMatrix>, usize) {
    let n: usize = shape.iter().map(|(s, m)| s * m).sum();
    let w = random_unitary(n, rng);
    let mut build = |left: bool| -> CMatrix {
        let mut inner = CMatrix::zeros(n, n);
        let mut offset = 0;
        for &(size, mult) in shape {
            let block = if left {
                kron(&ginibre(size, size, rng), &identity(mult))
            } else {
                kron(&identity(size), &ginibre(mult, mult, rng))
            };
            let rank = size * mult;
            inner.view_mut((offset, offset), (rank, rank)).copy_from(&block);
            offset += rank;
        }
        &w * inner * w.adjoint()
    };
    let a = vec![build(true), build(true)];
    let b = vec![build(false), build(false)];
    (a, b, n)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    )
}

/// `M_2 ⊗ 1` when `left`, else `1 ⊗ M_2`, on `C^4`.
pub fn qubit_factor(left: bool) -> OperatorAlgebra {
    let id = identity(2);
    let gens: Vec<CMatrix> = [pauli_x(), pauli_z()]
        .iter()
        .map(|p| if left { kron(p, &id) } else { kron(&id, p) })
        .collect();
    OperatorAlgebra::generate(&gens, 4, &tol()).unwrap()
}

/// `diag ⊗ 1` on `C^4`.
pub fn diag_left() -> OperatorAlgebra {
    OperatorAlgebra::generate(&[kron(&pauli_z(), &identity(2))], 4, &tol()).unwrap()
}

pub fn ket(amps: &[f64]) -> CVector {
    CVector::from_iterator(amps.len(), amps.iter().map(|&a| C64::new(a, 0.0)))
}
