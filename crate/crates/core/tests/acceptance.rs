//! Acceptance suite: one line per criterion, tolerances pinned below. Exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use uhlmann::algebra::OperatorAlgebra;
use uhlmann::cli::ancilla_algebra;
use uhlmann::duality::{check_uhlmann_pair, max_overlap, verify_theorem_equivalence};
use uhlmann::random::{
    random_abelian_subalgebra, random_algebra, random_algebra_with_shape, random_block_shape, random_density,
    random_vector, sample_rng,
};
use uhlmann::states::{cyclic_projection, fidelity, purify, DensityMatrix, VectorState};
use uhlmann::toric::{dense_cross_check, largest_fitting_radius, purification_classes, two_patch_regions, Lattice};

use common::{algebra_and_commutant_generators, ascent_max_overlap, diag_left, ket, qubit_factor, tol};

const SEED: u64 = 0x5eed;

const DOUBLE_COMMUTANT_TOL: f64 = 1e-9;
const DUAL_OVERLAP_TOL: f64 = 1e-9;
const INTERTWINER_IN_MB_TOL: f64 = 1e-8;
const WITNESS_GAP: f64 = 1e-6;
const SEVERE_WITNESS_TOL: f64 = 1e-12;
const FIDELITY_TOL: f64 = 1e-8;
const ASCENT_ORACLE_TOL: f64 = 1e-6;
const CYCLIC_PROJECTION_TOL: f64 = 1e-9;
const ENGINE_AGREEMENT_TOL: f64 = 1e-12;
const DENSE_STATE_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn budget(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{s:.2} s < {limit_s} s"))
}

/// 100 random algebras on dimensions 2 to 8 satisfy `M'' = M`.
fn double_commutant() -> Outcome {
    let t = tol();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let n = 2 + (i % 7) as usize;
        let mut rng = sample_rng(SEED, i);
        let m = random_algebra(n, &mut rng, &t).unwrap();
        let mpp = m.commutant(&t).unwrap().commutant(&t).unwrap();
        worst = worst.max(mpp.equals(&m, &t).unwrap().1);
    }
    let (fast, time) = budget(start.elapsed(), 10.0);
    Outcome {
        pass: worst <= DOUBLE_COMMUTANT_TOL && fast,
        detail: format!("max residual {worst:.2e} <= {DOUBLE_COMMUTANT_TOL:e}; {time}"),
    }
}

/// 200 pairs across three families: dual pairs `(M, M')`, strict inclusions
/// `B ⊊ M'`, and pairs built on non-factors.
fn theorem_equivalence() -> Outcome {
    let t = tol();
    let start = Instant::now();
    let (mut dual, mut failing, mut violations) = (0, 0, 0);
    let mut worst_dual_overlap = 0.0f64;
    let mut worst_mb = 0.0f64;
    let mut worst_witness = 0.0f64;
    let mut problems = Vec::new();
    for i in 0..200u64 {
        let mut rng = sample_rng(SEED ^ 0x2, i);
        let n = 2 + (i % 7) as usize;
        let (a, b) = match i % 3 {
            0 => {
                let a = random_algebra(n, &mut rng, &t).unwrap();
                let b = a.commutant(&t).unwrap();
                (a, b)
            }
            1 => {
                if i % 2 == 0 {
                    // The fixed inclusion diag ⊗ 1 ⊊ (1 ⊗ M_2)'.
                    (qubit_factor(false), diag_left())
                } else {
                    let a = random_algebra(n, &mut rng, &t).unwrap();
                    let comm = a.commutant(&t).unwrap();
                    let b = random_abelian_subalgebra(&comm, &mut rng, &t).unwrap();
                    (a, b)
                }
            }
            _ => {
                let mut shape = random_block_shape(n, &mut rng);
                if shape.len() < 2 {
                    shape = vec![(1, 1), (1, n - 1)];
                }
                let a = random_algebra_with_shape(&shape, &mut rng, &t).unwrap();
                let b = if i % 2 == 0 {
                    a.commutant(&t).unwrap()
                } else {
                    a.center(&t).unwrap()
                };
                (a, b)
            }
        };
        match verify_theorem_equivalence(&a, &b, SEED + i, 20, &t) {
            Err(e) => {
                violations += 1;
                problems.push(format!("pair {i}: {e}"));
            }
            Ok(r) if r.haag_duality.pass => {
                dual += 1;
                let min = r.min_overlap().unwrap_or(0.0);
                worst_dual_overlap = worst_dual_overlap.max(1.0 - min);
                worst_mb = worst_mb.max(r.max_mb_residual);
                if r.samples != 20 {
                    problems.push(format!("pair {i}: {} samples", r.samples));
                }
            }
            Ok(r) => {
                failing += 1;
                match &r.witness {
                    Some(w) => worst_witness = worst_witness.max(w.max_overlap),
                    None => problems.push(format!("pair {i}: no witness")),
                }
            }
        }
    }
    let (fast, time) = budget(start.elapsed(), 60.0);
    let pass = violations == 0
        && problems.is_empty()
        && worst_dual_overlap <= DUAL_OVERLAP_TOL
        && worst_mb <= INTERTWINER_IN_MB_TOL
        && worst_witness < 1.0 - WITNESS_GAP
        && fast;
    let mut detail = format!(
        "{dual} dual / {failing} non-dual pairs, {violations} violations; dual 1 - overlap {worst_dual_overlap:.1e} <= {DUAL_OVERLAP_TOL:e}, \
         M_B residual {worst_mb:.1e} <= {INTERTWINER_IN_MB_TOL:e}; largest witness overlap {worst_witness:.4} < 1 - {WITNESS_GAP:e}; {time}"
    );
    if let Some(p) = problems.first() {
        detail.push_str(&format!("; first problem: {p}"));
    }
    Outcome { pass, detail }
}

/// Marginals compared on `diag ⊗ 1`, unitaries taken from `1 ⊗ M_2`.
fn severe_witness() -> Outcome {
    let t = tol();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let psi = VectorState::new(ket(&[r, 0.0, r, 0.0]), &t).unwrap();
    let phi = VectorState::new(ket(&[r, 0.0, -r, 0.0]), &t).unwrap();
    let rec = check_uhlmann_pair(&diag_left(), &qubit_factor(false), &psi, &phi, &t).unwrap();
    let overlap = rec.max_overlap.unwrap_or(f64::NAN);
    Outcome {
        pass: rec.marginals.equal && overlap.abs() <= SEVERE_WITNESS_TOL,
        detail: format!(
            "marginals_equal = {}, max_overlap = {overlap:.1e} (within {SEVERE_WITNESS_TOL:e} of 0)",
            rec.marginals.equal
        ),
    }
}

/// Fidelity against purification overlaps on `C^3`, and the closed-form
/// overlap against gradient ascent on dimensions up to 4.
fn uhlmann_theorem() -> Outcome {
    let t = tol();
    let anc = ancilla_algebra(3, &t).unwrap();
    let mut worst_fid = 0.0f64;
    for i in 0..50u64 {
        let mut rng = sample_rng(SEED ^ 0x4, i);
        let rho = DensityMatrix::new(random_density(3, &mut rng), &t).unwrap();
        let sigma = DensityMatrix::new(random_density(3, &mut rng), &t).unwrap();
        let f = fidelity(&rho, &sigma, &t).unwrap();
        let m = max_overlap(&anc, &purify(&rho), &purify(&sigma), &t).unwrap().value;
        worst_fid = worst_fid.max((f - m).abs());
    }
    let mut worst_oracle = 0.0f64;
    for i in 0..30u64 {
        let mut rng = sample_rng(SEED ^ 0x44, i);
        let n = 2 + (i % 3) as usize;
        let b = random_algebra(n, &mut rng, &t).unwrap();
        let psi = VectorState::normalized(random_vector(n, &mut rng)).unwrap();
        let phi = VectorState::normalized(random_vector(n, &mut rng)).unwrap();
        let closed = max_overlap(&b, &psi, &phi, &t).unwrap().value;
        let ascent = ascent_max_overlap(&b, psi.amplitudes(), phi.amplitudes(), 4, &mut rng);
        worst_oracle = worst_oracle.max((closed - ascent).abs());
    }
    Outcome {
        pass: worst_fid <= FIDELITY_TOL && worst_oracle <= ASCENT_ORACLE_TOL,
        detail: format!(
            "|F - maxOverlap| {worst_fid:.1e} <= {FIDELITY_TOL:e}; closed form vs ascent {worst_oracle:.1e} <= {ASCENT_ORACLE_TOL:e}"
        ),
    }
}

/// The cyclic projection of a random state lies in the commutant; with the
/// commutant generated independently from the block shape it lies in `M_B`.
fn cyclic_projections() -> Outcome {
    let t = tol();
    let (mut worst_comm, mut worst_mb) = (0.0f64, 0.0f64);
    for i in 0..50u64 {
        let mut rng = sample_rng(SEED ^ 0x5, i);
        let n = 2 + (i % 5) as usize;
        let shape = random_block_shape(n, &mut rng);
        let (ga, gb, n) = algebra_and_commutant_generators(&shape, &mut rng);
        let a = OperatorAlgebra::generate(&ga, n, &t).unwrap();
        let b = OperatorAlgebra::generate(&gb, n, &t).unwrap();
        let psi = VectorState::normalized(random_vector(n, &mut rng)).unwrap();
        let p = cyclic_projection(&a, &psi, &t).unwrap();
        worst_comm = worst_comm.max(a.commutant(&t).unwrap().membership_residual(&p));
        worst_mb = worst_mb.max(b.membership_residual(&p));
    }
    Outcome {
        pass: worst_comm <= CYCLIC_PROJECTION_TOL && worst_mb <= CYCLIC_PROJECTION_TOL,
        detail: format!("residual in M' {worst_comm:.1e}, in M_B {worst_mb:.1e}, both <= {CYCLIC_PROJECTION_TOL:e}"),
    }
}

/// Four sector states at `L = 4`: equal `B` signatures, identity Gram
/// matrix, and no `A`-supported Pauli between any two of them.
fn toric_classes() -> Outcome {
    let start = Instant::now();
    let lat = Lattice::new(4).unwrap();
    let radius = largest_fitting_radius(&lat, 1).unwrap();
    let regions = two_patch_regions(&lat, radius, 1).unwrap();
    let report = purification_classes(&lat, &regions).unwrap().report;
    let infeasible = report
        .a_connectivity
        .iter()
        .filter(|p| !p.connectivity.feasible)
        .count();
    let (fast, time) = budget(start.elapsed(), 5.0);
    let obstruction = report
        .signatures
        .iter()
        .find_map(|s| s.obstruction.as_ref().map(|o| format!("{} via {o}", s.sector)))
        .unwrap_or_default();
    Outcome {
        pass: report.b_signatures_equal && report.gram_is_identity && infeasible == 6 && fast,
        detail: format!(
            "radius {radius}: B signatures equal = {}{}; Gram identity (exact) = {}; infeasible pairs {infeasible}/6; {time}",
            report.b_signatures_equal,
            if obstruction.is_empty() {
                String::new()
            } else {
                format!(" (sector {obstruction})")
            },
            report.gram_is_identity
        ),
    }
}

/// Dense and stabilizer engines at `L = 2`, Haag duality for the edge split,
/// and the intertwiner for the equal-`B`-marginal pair.
fn dense_crosscheck() -> Outcome {
    let start = Instant::now();
    let r = dense_cross_check(&Lattice::new(2).unwrap(), &tol()).unwrap();
    let disc = r.max_overlap_discrepancy.max(r.max_expectation_discrepancy);
    let marginals_agree = r.marginal_facts.iter().all(|f| f.agree);
    let iso = &r.intertwiner;
    let (fast, time) = budget(start.elapsed(), 30.0);
    Outcome {
        pass: disc <= ENGINE_AGREEMENT_TOL
            && marginals_agree
            && iso.haag_duality.pass
            && iso.state_residual <= DENSE_STATE_TOL
            && fast,
        detail: format!(
            "engine discrepancy {disc:.1e} <= {ENGINE_AGREEMENT_TOL:e}, marginal facts agree = {marginals_agree}; \
             Haag duality = {}; |vPsi - Phi| {:.1e} <= {DENSE_STATE_TOL:e} ({} vs {}); {time}",
            iso.haag_duality.pass, iso.state_residual, iso.first, iso.second
        ),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("double commutant", double_commutant),
        ("theorem equivalence", theorem_equivalence),
        ("severe-failure witness", severe_witness),
        ("Uhlmann's theorem", uhlmann_theorem),
        ("cyclic projections", cyclic_projections),
        ("toric classes", toric_classes),
        ("dual-engine cross-check", dense_crosscheck),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} | {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
