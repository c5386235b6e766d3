//! Local tomography, Haag duality and the Uhlmann property for a pair of
//! commuting algebras, plus a randomized harness checking that the last two
//! coincide.

use serde::Serialize;

use crate::algebra::{BlockDecomposition, OperatorAlgebra};
use crate::error::{Error, Result};
use crate::numerics::{
    commutator, hermitian_sign, polar_decompose, projection_defect, pseudo_inverse, trace_norm, CMatrix, CVector,
    HsOrthonormalizer, Tolerances,
};
use crate::random::{gaussian, random_unitary_in, random_vector, sample_rng, SampleRng};
use crate::states::{marginals_equal, orbit_matrix, MarginalComparison, VectorState};

/// Threshold for the intertwiner lying in `M_B` and for the theorem harness's
/// partial-isometry checks; looser than `eq_tol` because the construction goes
/// through a pseudo-inverse.
pub const INTERTWINER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub residual: f64,
}

impl Verdict {
    fn at_most(residual: f64, tol: f64) -> Self {
        Self {
            pass: residual <= tol,
            residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalTomographyReport {
    /// `M_A ∨ M_B = B(H)`.
    pub verdict: Verdict,
    pub join_dim: usize,
    /// `M_A' ∩ M_B' = C·1`, the equivalent commutant form.
    pub commutants_intersect_trivially: bool,
    pub commutant_intersection_dim: usize,
    pub a_is_factor: bool,
    pub b_is_factor: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FactorVerdicts {
    pub a: bool,
    pub b: bool,
}

/// Two states with equal `M_A` marginals that no contraction in `M_B`
/// connects.
#[derive(Clone, Debug)]
pub struct Witness {
    pub psi: VectorState,
    pub phi: VectorState,
    pub max_overlap: f64,
    /// `Φ = w Ψ`; `w` is a unitary in `M_A'`.
    pub connecting_unitary: CMatrix,
    /// Membership residual of `w` in `M_B`.
    pub membership_defect: f64,
    pub location: String,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub local_tomography: LocalTomographyReport,
    pub haag_duality: Verdict,
    pub factors: FactorVerdicts,
    pub witnesses: Vec<Witness>,
    pub tolerances: Tolerances,
}

/// `v` with `v a Ψ = a Φ` for all `a ∈ M_A`, zero on `[M_A Ψ]^⊥`.
#[derive(Clone, Debug)]
pub struct PartialIsometryResult {
    pub v: CMatrix,
    /// `max_i ‖v e_i Ψ − e_i Φ‖`.
    pub intertwiner_residual: f64,
    /// `max_i ‖[v, e_i]‖ / ‖v‖` over the basis of `M_A`.
    pub commutant_residual: f64,
    /// `‖vΨ − Φ‖`.
    pub state_residual: f64,
    /// Projection defects of `v*v` and `vv*`.
    pub initial_projection_defect: f64,
    pub final_projection_defect: f64,
    /// Membership of `v` in `M_B`, when `M_B` was supplied.
    pub in_mb: Option<Verdict>,
}

#[derive(Clone, Debug)]
pub struct MaxOverlap {
    pub value: f64,
    /// Unitary `u ∈ M_B` with `⟨Ψ, uΦ⟩ = value`.
    pub optimizer: CMatrix,
}

#[derive(Clone, Debug)]
pub struct UhlmannPairRecord {
    pub marginals: MarginalComparison,
    /// Unequal marginals make the Uhlmann condition hold trivially.
    pub vacuous: bool,
    pub max_overlap: Option<f64>,
    pub intertwiner: Option<PartialIsometryResult>,
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub haag_duality: Verdict,
    pub samples: usize,
    /// Overlaps of the sampled equal-marginal pairs. For dual pairs these are
    /// all one; otherwise they are recorded without assertion.
    pub overlaps: Vec<f64>,
    pub max_intertwiner_residual: f64,
    pub max_mb_residual: f64,
    pub witness: Option<Witness>,
}

impl EquivalenceReport {
    pub fn min_overlap(&self) -> Option<f64> {
        self.overlaps.iter().copied().reduce(f64::min)
    }
}

fn same_space(a: &OperatorAlgebra, b: &OperatorAlgebra, context: &'static str) -> Result<()> {
    if a.hilbert_dim() != b.hilbert_dim() {
        return Err(Error::Dimension {
            context,
            expected: a.hilbert_dim(),
            found: b.hilbert_dim(),
        });
    }
    Ok(())
}

/// Fails with the first basis pair whose commutator exceeds `eq_tol`.
pub fn ensure_commuting(a: &OperatorAlgebra, b: &OperatorAlgebra, tol: &Tolerances) -> Result<()> {
    same_space(a, b, "commuting algebras")?;
    for (i, x) in a.basis().iter().enumerate() {
        for (j, y) in b.basis().iter().enumerate() {
            let defect = commutator(x, y).norm();
            if defect > tol.eq_tol {
                return Err(Error::Precondition(format!(
                    "algebras do not commute: ‖[a_{i}, b_{j}]‖ = {defect:e}"
                )));
            }
        }
    }
    Ok(())
}

pub fn check_local_tomography(
    a: &OperatorAlgebra,
    b: &OperatorAlgebra,
    tol: &Tolerances,
) -> Result<LocalTomographyReport> {
    ensure_commuting(a, b, tol)?;
    let n = a.hilbert_dim();
    let join = a.join(b, tol)?;
    let full = OperatorAlgebra::full(n);
    let (_, residual) = full.equals(&join, tol)?;
    let meet = a.commutant(tol)?.intersection(&b.commutant(tol)?, tol)?;
    Ok(LocalTomographyReport {
        verdict: Verdict {
            pass: join.dim() == n * n && residual <= tol.eq_tol,
            residual,
        },
        join_dim: join.dim(),
        commutants_intersect_trivially: meet.dim() == 1,
        commutant_intersection_dim: meet.dim(),
        a_is_factor: a.is_factor(tol)?,
        b_is_factor: b.is_factor(tol)?,
    })
}

/// `M_B = M_A'`, with the larger one-sided span-containment defect.
pub fn check_haag_duality(a: &OperatorAlgebra, b: &OperatorAlgebra, tol: &Tolerances) -> Result<Verdict> {
    ensure_commuting(a, b, tol)?;
    let comm = a.commutant(tol)?;
    haag_against(&comm, b, tol)
}

fn haag_against(comm_a: &OperatorAlgebra, b: &OperatorAlgebra, tol: &Tolerances) -> Result<Verdict> {
    let (_, residual) = b.equals(comm_a, tol)?;
    Ok(Verdict {
        pass: comm_a.dim() == b.dim() && residual <= tol.eq_tol,
        residual,
    })
}

/// Precomputed block structure of `M_B` for repeated overlap evaluations.
#[derive(Clone, Debug)]
pub struct OverlapSolver<'a> {
    algebra: &'a OperatorAlgebra,
    decomposition: BlockDecomposition,
    tol: Tolerances,
}

impl<'a> OverlapSolver<'a> {
    pub fn new(algebra: &'a OperatorAlgebra, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            algebra,
            decomposition: algebra.block_decompose(tol)?,
            tol: *tol,
        })
    }

    pub fn decomposition(&self) -> &BlockDecomposition {
        &self.decomposition
    }

    /// `sup_{‖b‖ ≤ 1, b ∈ M_B} |⟨Ψ, bΦ⟩|`.
    ///
    /// In block coordinates a vector restricted to block `k` is an
    /// `n_k × m_k` matrix, and `⟨Ψ, bΦ⟩ = Σ_k Tr(b_k Φ_k Ψ_k*)`; the supremum
    /// is `Σ_k ‖Φ_k Ψ_k*‖₁`, attained at `b_k = U_k*` for the polar unitary
    /// `U_k` of `Φ_k Ψ_k*`.
    pub fn solve(&self, psi: &VectorState, phi: &VectorState) -> Result<MaxOverlap> {
        let n = self.algebra.hilbert_dim();
        for s in [psi, phi] {
            if s.dim() != n {
                return Err(Error::Dimension {
                    context: "max_overlap",
                    expected: n,
                    found: s.dim(),
                });
            }
        }
        let w = &self.decomposition.basis_change;
        let psi_b = w.adjoint() * psi.amplitudes();
        let phi_b = w.adjoint() * phi.amplitudes();
        let mut value = 0.0;
        let mut factors = Vec::with_capacity(self.decomposition.num_blocks());
        for block in &self.decomposition.blocks {
            let (size, mult) = (block.size, block.multiplicity);
            let reshape = |v: &CVector| CMatrix::from_fn(size, mult, |a, j| v[block.offset + a * mult + j]);
            let x = reshape(&phi_b) * reshape(&psi_b).adjoint();
            value += trace_norm(&x)?;
            factors.push(polar_decompose(&x)?.unitary.adjoint());
        }
        let optimizer = self.decomposition.assemble(&factors);

        let achieved = psi.amplitudes().dotc(&(&optimizer * phi.amplitudes())).norm();
        if (achieved - value).abs() > self.tol.eq_tol {
            return Err(Error::InternalConsistency(format!(
                "max-overlap optimizer reaches {achieved} instead of {value}"
            )));
        }
        let membership = self.algebra.membership_residual(&optimizer);
        if membership > self.tol.eq_tol.max(INTERTWINER_TOL) {
            return Err(Error::InternalConsistency(format!(
                "max-overlap optimizer leaves the algebra (residual {membership:e})"
            )));
        }
        Ok(MaxOverlap { value, optimizer })
    }
}

pub fn max_overlap(b: &OperatorAlgebra, psi: &VectorState, phi: &VectorState, tol: &Tolerances) -> Result<MaxOverlap> {
    OverlapSolver::new(b, tol)?.solve(psi, phi)
}

/// Constructs `v = K_Φ K_Ψ⁺` where `K_Ψ = [e_1 Ψ, …, e_d Ψ]`. Equal marginals
/// make `aΨ ↦ aΦ` isometric, so `v` is a partial isometry in `M_A'`.
pub fn build_intertwiner(
    a: &OperatorAlgebra,
    psi: &VectorState,
    phi: &VectorState,
    b: Option<&OperatorAlgebra>,
    tol: &Tolerances,
) -> Result<PartialIsometryResult> {
    let cmp = marginals_equal(psi, phi, a, tol.eq_tol)?;
    if !cmp.equal {
        return Err(Error::Precondition(format!(
            "marginals differ by {:e}; no intertwiner exists",
            cmp.max_deviation
        )));
    }
    if let Some(b) = b {
        same_space(a, b, "build_intertwiner")?;
    }
    let k_psi = orbit_matrix(a, psi.amplitudes());
    let k_phi = orbit_matrix(a, phi.amplitudes());
    let v = &k_phi * pseudo_inverse(&k_psi, tol.rank_tol)?;

    let intertwiner_residual = (&v * &k_psi - &k_phi)
        .column_iter()
        .map(|col| col.norm())
        .fold(0.0, f64::max);
    if intertwiner_residual > tol.eq_tol.sqrt() {
        return Err(Error::InternalConsistency(format!(
            "intertwiner least squares left residual {intertwiner_residual:e}"
        )));
    }
    let v_norm = v.norm().max(f64::MIN_POSITIVE);
    let commutant_residual = a
        .basis()
        .iter()
        .map(|e| commutator(&v, e).norm() / v_norm)
        .fold(0.0, f64::max);
    let state_residual = (&v * psi.amplitudes() - phi.amplitudes()).norm();
    let initial_projection_defect = projection_defect(&(v.adjoint() * &v));
    let final_projection_defect = projection_defect(&(&v * v.adjoint()));
    let in_mb = b.map(|b| Verdict::at_most(b.membership_residual(&v), tol.eq_tol.max(INTERTWINER_TOL)));
    Ok(PartialIsometryResult {
        v,
        intertwiner_residual,
        commutant_residual,
        state_residual,
        initial_projection_defect,
        final_projection_defect,
        in_mb,
    })
}

pub fn check_uhlmann_pair(
    a: &OperatorAlgebra,
    b: &OperatorAlgebra,
    psi: &VectorState,
    phi: &VectorState,
    tol: &Tolerances,
) -> Result<UhlmannPairRecord> {
    ensure_commuting(a, b, tol)?;
    let marginals = marginals_equal(psi, phi, a, tol.eq_tol)?;
    if !marginals.equal {
        return Ok(UhlmannPairRecord {
            marginals,
            vacuous: true,
            max_overlap: None,
            intertwiner: None,
        });
    }
    let overlap = max_overlap(b, psi, phi, tol)?;
    let intertwiner = build_intertwiner(a, psi, phi, Some(b), tol)?;
    Ok(UhlmannPairRecord {
        marginals,
        vacuous: false,
        max_overlap: Some(overlap.value),
        intertwiner: Some(intertwiner),
    })
}

/// HS-orthonormal basis of `span(M_A') ⊖ span(M_B)`; closed under adjoints
/// because both spans are.
fn duality_defect_space(comm_a: &OperatorAlgebra, b: &OperatorAlgebra, tol: &Tolerances) -> Vec<CMatrix> {
    let mut gs = HsOrthonormalizer::from_orthonormal(b.basis().to_vec(), tol.rank_tol);
    let start = gs.len();
    for e in comm_a.basis() {
        gs.push(e);
    }
    gs.into_basis().split_off(start)
}

/// Unitary in `M_A'` far from `M_B`: the sign of a random Hermitian element
/// of the defect space, which is a spectral function of an element of `M_A'`
/// and therefore stays there.
fn defect_unitary(defect: &[CMatrix], b: &OperatorAlgebra, rng: &mut SampleRng, tol: &Tolerances) -> (CMatrix, f64) {
    let n = b.hilbert_dim();
    let mut best = (crate::numerics::identity(n), 0.0);
    for _ in 0..4 {
        let mut h = CMatrix::zeros(n, n);
        for d in defect {
            crate::numerics::add_scaled(&mut h, gaussian(rng), d);
        }
        let h = (&h + h.adjoint()).scale(0.5);
        let w = hermitian_sign(&h, tol.rank_tol);
        let defect = b.membership_residual(&w);
        if defect > best.1 {
            best = (w, defect);
        }
        if defect > tol.eq_tol.sqrt() {
            break;
        }
    }
    best
}

pub fn find_counterexample(
    a: &OperatorAlgebra,
    b: &OperatorAlgebra,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<Option<Witness>> {
    ensure_commuting(a, b, tol)?;
    let comm = a.commutant(tol)?;
    if haag_against(&comm, b, tol)?.pass {
        return Ok(None);
    }
    let solver = OverlapSolver::new(b, tol)?;
    search_witness(&comm, b, &solver, seed, samples, tol)
}

fn search_witness(
    comm: &OperatorAlgebra,
    b: &OperatorAlgebra,
    solver: &OverlapSolver<'_>,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<Option<Witness>> {
    let defect = duality_defect_space(comm, b, tol);
    if defect.is_empty() {
        return Ok(None);
    }
    let n = b.hilbert_dim();
    let (w, membership_defect) = defect_unitary(&defect, b, &mut sample_rng(seed, u64::MAX), tol);
    for s in 0..samples {
        let mut rng = sample_rng(seed, s as u64);
        let psi = VectorState::normalized(random_vector(n, &mut rng))?;
        let phi = psi.evolve(&w)?;
        let overlap = solver.solve(&psi, &phi)?.value;
        if overlap < 1.0 - tol.eq_tol {
            return Ok(Some(Witness {
                psi,
                phi,
                max_overlap: overlap,
                connecting_unitary: w,
                membership_defect,
                location: "in commutant(M_A), not in M_B".into(),
            }));
        }
    }
    Ok(None)
}

/// Checks both sides of the Haag-duality / Uhlmann-property equivalence on
/// one pair of algebras.
pub fn verify_theorem_equivalence(
    a: &OperatorAlgebra,
    b: &OperatorAlgebra,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<EquivalenceReport> {
    ensure_commuting(a, b, tol)?;
    let n = a.hilbert_dim();
    let comm = a.commutant(tol)?;
    let haag = haag_against(&comm, b, tol)?;
    let solver = OverlapSolver::new(b, tol)?;
    let limit = tol.eq_tol.max(INTERTWINER_TOL);

    let mut report = EquivalenceReport {
        haag_duality: haag,
        samples,
        overlaps: Vec::with_capacity(samples),
        max_intertwiner_residual: 0.0,
        max_mb_residual: 0.0,
        witness: None,
    };
    for s in 0..samples {
        let mut rng = sample_rng(seed, s as u64);
        let psi = VectorState::normalized(random_vector(n, &mut rng))?;
        let u = random_unitary_in(&comm, &mut rng);
        let phi = psi.evolve(&u)?;
        let overlap = solver.solve(&psi, &phi)?.value;
        report.overlaps.push(overlap);
        if !haag.pass {
            continue;
        }
        if overlap < 1.0 - tol.eq_tol {
            return Err(Error::TheoremViolation(format!(
                "Haag duality holds but sample {s} has max overlap {overlap}"
            )));
        }
        let iso = build_intertwiner(a, &psi, &phi, Some(b), tol)?;
        let mb = iso.in_mb.expect("M_B supplied");
        report.max_intertwiner_residual = report.max_intertwiner_residual.max(iso.state_residual);
        report.max_mb_residual = report.max_mb_residual.max(mb.residual);
        if !mb.pass || iso.state_residual > limit {
            return Err(Error::TheoremViolation(format!(
                "Haag duality holds but the sample {s} intertwiner is not in M_B \
                 (membership {:e}, state residual {:e})",
                mb.residual, iso.state_residual
            )));
        }
    }
    if !haag.pass {
        let witness = search_witness(&comm, b, &solver, seed, samples.max(1), tol)?;
        if witness.is_none() {
            return Err(Error::TheoremViolation(
                "Haag duality fails but no pair with equal marginals and overlap below one was found".into(),
            ));
        }
        report.witness = witness;
    }
    Ok(report)
}

/// All three criteria for one bipartition, with a witness when Haag duality
/// fails.
pub fn check_bipartition(
    a: &OperatorAlgebra,
    b: &OperatorAlgebra,
    seed: u64,
    samples: usize,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let local_tomography = check_local_tomography(a, b, tol)?;
    let comm = a.commutant(tol)?;
    let haag_duality = haag_against(&comm, b, tol)?;
    let mut witnesses = Vec::new();
    if !haag_duality.pass {
        let solver = OverlapSolver::new(b, tol)?;
        witnesses.extend(search_witness(&comm, b, &solver, seed, samples.max(1), tol)?);
    }
    Ok(CheckReport {
        factors: FactorVerdicts {
            a: local_tomography.a_is_factor,
            b: local_tomography.b_is_factor,
        },
        local_tomography,
        haag_duality,
        witnesses,
        tolerances: *tol,
    })
}
