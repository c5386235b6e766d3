//! State-vector engine for small lattices and the cross-check that feeds
//! toric states into the duality checks.

use serde::Serialize;

use crate::algebra::OperatorAlgebra;
use crate::duality::{build_intertwiner, check_haag_duality, check_local_tomography, Verdict};
use crate::error::{Error, Result};
use crate::numerics::{c, identity, kron, range_basis, singular_values, CMatrix, CVector, Tolerances, C64};
use crate::states::VectorState;
use crate::toric::anyons::{anyon_pair_state, ground_state, LogicalSector, Sector};
use crate::toric::lattice::Lattice;
use crate::toric::pauli::PauliOperator;
use crate::toric::regions::{two_patch_regions, Region};
use crate::toric::stabilizer::{pauli_connectivity, StabilizerState};

/// `2^16` amplitudes.
pub const DENSE_QUBIT_CAP: usize = 16;

fn ensure_cap(n: usize) -> Result<()> {
    if n > DENSE_QUBIT_CAP {
        return Err(Error::Precondition(format!(
            "dense engine is limited to {DENSE_QUBIT_CAP} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Normalized `Π_g (1 + g)/2 |b⟩` for the first basis vector `|b⟩` with a
/// nonzero projection. The global phase is that of the projection.
pub fn dense_state(state: &StabilizerState) -> Result<VectorState> {
    let n = state.num_qubits();
    ensure_cap(n)?;
    let dim = 1usize << n;
    for b in 0..dim {
        let mut v = crate::numerics::ket(dim, b);
        for g in state.generators() {
            v = (g.apply_dense(&v) + &v).scale(0.5);
        }
        if v.norm() > 1e-6 {
            return VectorState::normalized(v);
        }
    }
    Err(Error::InternalConsistency(
        "stabilizer projector annihilated every basis vector".into(),
    ))
}

pub fn dense_ground_state(lattice: &Lattice, sector: LogicalSector) -> Result<VectorState> {
    ensure_cap(lattice.num_qubits())?;
    dense_state(&ground_state(lattice, sector)?)
}

/// `⟨v, P v⟩` without materializing `P v`.
pub fn dense_expectation(p: &PauliOperator, v: &CVector) -> C64 {
    let n = p.num_qubits();
    let (mut xmask, mut zmask) = (0usize, 0usize);
    for q in 0..n {
        xmask |= usize::from(p.x_bit(q)) << q;
        zmask |= usize::from(p.z_bit(q)) << q;
    }
    let mut acc = c(0.0, 0.0);
    for (b, amp) in v.iter().enumerate() {
        let term = v[b ^ xmask].conj() * amp;
        if (zmask & b).count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    acc * p.phase_factor()
}

/// The amplitudes as a `2^|keep| × 2^{n−|keep|}` matrix; row bit `i` is
/// qubit `keep[i]`, column bits run over the remaining qubits in order.
pub fn split_amplitudes(v: &CVector, n: usize, keep: &[usize]) -> CMatrix {
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let mut m = CMatrix::zeros(1 << keep.len(), 1 << rest.len());
    for (b, amp) in v.iter().enumerate() {
        let pick = |qs: &[usize]| {
            qs.iter()
                .enumerate()
                .fold(0usize, |acc, (i, &q)| acc | ((b >> q) & 1) << i)
        };
        m[(pick(keep), pick(&rest))] = *amp;
    }
    m
}

/// Reduced density matrix on `keep`, indexed as in [`split_amplitudes`].
pub fn reduced_density(v: &CVector, n: usize, keep: &[usize]) -> CMatrix {
    let m = split_amplitudes(v, n, keep);
    &m * m.adjoint()
}

/// `(op ⊗ 1) v` with `op` acting on the qubits `keep` (local bit `i` is
/// qubit `keep[i]`).
pub fn apply_on_qubits(op: &CMatrix, keep: &[usize], v: &CVector) -> CVector {
    let mut out = CVector::zeros(v.len());
    let mask: usize = keep.iter().map(|&q| 1 << q).sum();
    for (b, _) in v.iter().enumerate() {
        let local = keep
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &q)| acc | ((b >> q) & 1) << i);
        let base = b & !mask;
        for src_local in 0..op.ncols() {
            let coeff = op[(local, src_local)];
            if coeff == c(0.0, 0.0) {
                continue;
            }
            let src = keep
                .iter()
                .enumerate()
                .fold(base, |acc, (i, &q)| acc | ((src_local >> i) & 1) << q);
            out[b] += coeff * v[src];
        }
    }
    out
}

/// Dense matrix of a Pauli on few qubits.
pub fn pauli_matrix(p: &PauliOperator) -> CMatrix {
    let dim = 1usize << p.num_qubits();
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        m.set_column(b, &p.apply_dense(&crate::numerics::ket(dim, b)));
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalFact {
    pub first: String,
    pub second: String,
    pub region: String,
    pub stabilizer_equal: bool,
    /// Frobenius distance of the two dense reduced density matrices.
    pub dense_deviation: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntertwinerSummary {
    pub first: String,
    pub second: String,
    /// Dimension of the Schmidt-compressed space `H_A ⊗ K`.
    pub compressed_dim: usize,
    pub haag_duality: Verdict,
    pub local_tomography: bool,
    pub intertwiner_residual: f64,
    pub commutant_residual: f64,
    /// Membership residual of `v` in the compressed `M_A`.
    pub in_ma: Option<Verdict>,
    /// `‖vΨ − Φ‖` after lifting `v` back to the full lattice.
    pub state_residual: f64,
    /// Operator-Schmidt coefficients of `v_A` across `A1 | A2`.
    pub operator_schmidt_values: Vec<f64>,
    pub operator_schmidt_rank: usize,
    /// A Pauli supported in `A` connecting the pair, if any.
    pub a_pauli: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossPairSummary {
    pub first: String,
    pub second: String,
    pub b_marginals_equal: bool,
    pub b_marginal_deviation: f64,
    /// A `B`-supported stabilizer with opposite signs in the two states.
    pub obstruction: Option<String>,
    pub a_pauli_feasible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DenseCrossCheck {
    pub lattice_size: usize,
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
    pub states: Vec<String>,
    /// Largest `| |⟨Ψ_i, Ψ_j⟩|_dense − |⟨Ψ_i, Ψ_j⟩|_stabilizer |`.
    pub max_overlap_discrepancy: f64,
    /// Largest discrepancy of `⟨P⟩` over every Pauli string and state.
    pub max_expectation_discrepancy: f64,
    pub paulis_checked: usize,
    pub marginal_facts: Vec<MarginalFact>,
    pub engines_agree: bool,
    pub cross_pairs: Vec<CrossPairSummary>,
    pub intertwiner: IntertwinerSummary,
}

/// Engine agreement tolerance for the dense cross-check.
pub const ENGINE_TOL: f64 = 1e-12;

/// Runs the `L = 2` scenario: single-edge patches `A1`, `A2`, the four
/// sector states plus a pair excited locally inside `A1`.
///
/// The sector states and the ground state have different `B` marginals (the
/// star loop around `A1` lies in `B`), so the equal-marginal pair fed to the
/// intertwiner construction is the ground state against the local `A1`
/// excitation. `M_A` and `M_B` are compressed exactly to `H_A ⊗ K`, with `K`
/// the joint support of the two states' `B` marginals.
pub fn dense_cross_check(lattice: &Lattice, tol: &Tolerances) -> Result<DenseCrossCheck> {
    if lattice.size() != 2 {
        return Err(Error::Precondition(format!(
            "dense cross-check runs at L = 2 only, got L = {}",
            lattice.size()
        )));
    }
    let n = lattice.num_qubits();
    ensure_cap(n)?;
    let regions = two_patch_regions(lattice, 0, 1)?;
    let a = regions.a();
    let ground = ground_state(lattice, LogicalSector::default())?;

    let mut labels: Vec<String> = Vec::new();
    let mut stab: Vec<StabilizerState> = Vec::new();
    for s in Sector::ALL {
        labels.push(s.label().to_string());
        stab.push(anyon_pair_state(lattice, &ground, s, &regions)?);
    }
    let local_op = PauliOperator::z_on(n, [regions.a1.edges[0]]);
    labels.push("local".into());
    stab.push(ground.apply(&local_op));

    let dense: Vec<VectorState> = stab.iter().map(dense_state).collect::<Result<_>>()?;

    let mut max_overlap_discrepancy = 0.0f64;
    for i in 0..stab.len() {
        for j in 0..stab.len() {
            let d = dense[i].inner(&dense[j]).norm();
            let s = stab[i].overlap_modulus(&stab[j])?;
            max_overlap_discrepancy = max_overlap_discrepancy.max((d - s).abs());
        }
    }

    let mut max_expectation_discrepancy = 0.0f64;
    let total = 1usize << (2 * n);
    for code in 0..total {
        let x: Vec<bool> = (0..n).map(|q| code >> q & 1 == 1).collect();
        let z: Vec<bool> = (0..n).map(|q| code >> (n + q) & 1 == 1).collect();
        let p = PauliOperator::hermitian_from_bits(n, &x, &z);
        for (s, d) in stab.iter().zip(&dense) {
            let diff = (s.expectation(&p) - dense_expectation(&p, d.amplitudes())).norm();
            max_expectation_discrepancy = max_expectation_discrepancy.max(diff);
        }
    }

    let mut marginal_facts = Vec::new();
    for region in [&regions.b, &a] {
        for i in 0..stab.len() {
            for j in i + 1..stab.len() {
                let stabilizer_equal = stab[i].signature(region.mask()) == stab[j].signature(region.mask());
                let dense_deviation = (reduced_density(dense[i].amplitudes(), n, &region.edges)
                    - reduced_density(dense[j].amplitudes(), n, &region.edges))
                .norm();
                let agree = if stabilizer_equal {
                    dense_deviation <= ENGINE_TOL
                } else {
                    dense_deviation > 0.1
                };
                marginal_facts.push(MarginalFact {
                    first: labels[i].clone(),
                    second: labels[j].clone(),
                    region: region.name.clone(),
                    stabilizer_equal,
                    dense_deviation,
                    agree,
                });
            }
        }
    }
    let engines_agree = max_overlap_discrepancy <= ENGINE_TOL
        && max_expectation_discrepancy <= ENGINE_TOL
        && marginal_facts.iter().all(|f| f.agree);

    let cross_pairs = (1..4)
        .map(|i| {
            let sig0 = stab[0].signature(regions.b.mask());
            let sig = stab[i].signature(regions.b.mask());
            let deviation = (reduced_density(dense[0].amplitudes(), n, &regions.b.edges)
                - reduced_density(dense[i].amplitudes(), n, &regions.b.edges))
            .norm();
            Ok(CrossPairSummary {
                first: labels[0].clone(),
                second: labels[i].clone(),
                b_marginals_equal: sig0 == sig,
                b_marginal_deviation: deviation,
                obstruction: sig0.sign_conflict(&sig).map(|p| p.to_string()),
                a_pauli_feasible: pauli_connectivity(&stab[0], &stab[i], a.mask())?.feasible,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Intertwiner for the equal-B-marginal pair, with phases tied together.
    let psi = dense[0].clone();
    let phi = VectorState::normalized(local_op.apply_dense(psi.amplitudes()))?;
    let keep: Vec<usize> = regions.a1.edges.iter().chain(&regions.a2.edges).copied().collect();
    let intertwiner = intertwiner_summary(&psi, &phi, n, &keep, regions.a1.len(), tol)?;
    let a_pauli = pauli_connectivity(&stab[0], &stab[4], a.mask())?
        .operator
        .map(|p| p.to_string());

    Ok(DenseCrossCheck {
        lattice_size: lattice.size(),
        a1: regions.a1.edges.clone(),
        a2: regions.a2.edges.clone(),
        states: labels.clone(),
        max_overlap_discrepancy,
        max_expectation_discrepancy,
        paulis_checked: total,
        marginal_facts,
        engines_agree,
        cross_pairs,
        intertwiner: IntertwinerSummary {
            first: labels[0].clone(),
            second: labels[4].clone(),
            a_pauli,
            ..intertwiner
        },
    })
}

/// Region-`A` algebra, region-`B` algebra and the compressed pair on
/// `H_A ⊗ K`.
struct Compressed {
    alg_a: OperatorAlgebra,
    alg_b: OperatorAlgebra,
    psi: VectorState,
    phi: VectorState,
    k: usize,
}

fn compress(psi: &VectorState, phi: &VectorState, n: usize, keep: &[usize], tol: &Tolerances) -> Result<Compressed> {
    let mp = split_amplitudes(psi.amplitudes(), n, keep);
    let mf = split_amplitudes(phi.amplitudes(), n, keep);
    let da = mp.nrows();
    let rows = CMatrix::from_fn(
        mp.ncols(),
        2 * da,
        |r, i| if i < da { mp[(i, r)] } else { mf[(i - da, r)] },
    );
    let q = range_basis(&rows, tol.rank_tol)?;
    let k = q.ncols();
    let flatten = |m: &CMatrix| -> Result<VectorState> {
        let coeffs = m * q.map(|z| z.conj());
        let v = CVector::from_fn(da * k, |idx, _| coeffs[(idx / k, idx % k)]);
        VectorState::new(v, &Tolerances { eq_tol: 1e-10, ..*tol })
    };
    let local_a = keep.len();
    let mut gens = Vec::new();
    for i in 0..local_a {
        for p in [PauliOperator::x_on(local_a, [i]), PauliOperator::z_on(local_a, [i])] {
            gens.push(kron(&pauli_matrix(&p), &identity(k)));
        }
    }
    let alg_a = OperatorAlgebra::generate(&gens, da * k, tol)?;
    let b_span: Vec<CMatrix> = OperatorAlgebra::full(k)
        .basis()
        .iter()
        .map(|e| kron(&identity(da), e))
        .collect();
    let alg_b = OperatorAlgebra::from_span(&b_span, da * k, tol)?;
    Ok(Compressed {
        alg_a,
        alg_b,
        psi: flatten(&mp)?,
        phi: flatten(&mf)?,
        k,
    })
}

fn intertwiner_summary(
    psi: &VectorState,
    phi: &VectorState,
    n: usize,
    keep: &[usize],
    a1_qubits: usize,
    tol: &Tolerances,
) -> Result<IntertwinerSummary> {
    let comp = compress(psi, phi, n, keep, tol)?;
    let haag_duality = check_haag_duality(&comp.alg_a, &comp.alg_b, tol)?;
    let local_tomography = check_local_tomography(&comp.alg_a, &comp.alg_b, tol)?.verdict.pass;
    // Equal B marginals: the intertwiner for M_B lies in M_B' = M_A.
    let iso = build_intertwiner(&comp.alg_b, &comp.psi, &comp.phi, Some(&comp.alg_a), tol)?;

    let da = 1usize << keep.len();
    let k = comp.k;
    let v_a = CMatrix::from_fn(da, da, |a, b| {
        (0..k).map(|j| iso.v[(a * k + j, b * k + j)]).sum::<C64>() / c(k as f64, 0.0)
    });
    let lifted = apply_on_qubits(&v_a, keep, psi.amplitudes());
    let state_residual = (lifted - phi.amplitudes()).norm();

    // Realign across A1 (low local bits) | A2 (high local bits).
    let d1 = 1usize << a1_qubits;
    let d2 = da / d1;
    let realigned = CMatrix::from_fn(d1 * d1, d2 * d2, |r, s| {
        let (a1, b1) = (r / d1, r % d1);
        let (a2, b2) = (s / d2, s % d2);
        v_a[(a1 + d1 * a2, b1 + d1 * b2)]
    });
    let mut operator_schmidt_values = singular_values(&realigned);
    operator_schmidt_values.sort_by(|a, b| b.total_cmp(a));
    let top = operator_schmidt_values.first().copied().unwrap_or(0.0);
    let operator_schmidt_rank = operator_schmidt_values
        .iter()
        .filter(|&&s| top > 0.0 && s / top > tol.rank_tol.max(1e-10))
        .count();

    Ok(IntertwinerSummary {
        first: String::new(),
        second: String::new(),
        compressed_dim: da * k,
        haag_duality,
        local_tomography,
        intertwiner_residual: iso.intertwiner_residual,
        commutant_residual: iso.commutant_residual,
        in_ma: iso.in_mb,
        state_residual,
        operator_schmidt_values,
        operator_schmidt_rank,
        a_pauli: None,
    })
}

/// Region mask helper for callers holding edge lists.
pub fn region_from_edges(lattice: &Lattice, name: &str, edges: &[usize]) -> Result<Region> {
    Region::new(name, lattice.num_qubits(), edges.iter().copied())
}
