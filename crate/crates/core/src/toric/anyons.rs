//! Ground states, string operators, anyon-pair states and the four
//! superselection classes relative to a pair of patches.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::toric::lattice::Lattice;
use crate::toric::pauli::PauliOperator;
use crate::toric::regions::{validate_sites, PatchRegions};
use crate::toric::stabilizer::{pauli_connectivity, Connectivity, StabilizerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sector {
    #[serde(rename = "1")]
    Vacuum,
    #[serde(rename = "e")]
    Electric,
    #[serde(rename = "m")]
    Magnetic,
    #[serde(rename = "em")]
    Dyonic,
}

impl Sector {
    pub const ALL: [Sector; 4] = [Sector::Vacuum, Sector::Electric, Sector::Magnetic, Sector::Dyonic];

    pub fn label(self) -> &'static str {
        match self {
            Sector::Vacuum => "1",
            Sector::Electric => "e",
            Sector::Magnetic => "m",
            Sector::Dyonic => "em",
        }
    }

    fn has_e(self) -> bool {
        matches!(self, Sector::Electric | Sector::Dyonic)
    }

    fn has_m(self) -> bool {
        matches!(self, Sector::Magnetic | Sector::Dyonic)
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Sector::ALL
            .into_iter()
            .find(|x| x.label() == s)
            .ok_or_else(|| Error::Validation(format!("unknown sector label {s:?}; expected 1, e, m or em")))
    }
}

/// Eigenvalues of the two logical `Z` loops selecting one ground state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LogicalSector {
    pub row_negative: bool,
    pub column_negative: bool,
}

/// `log2` of the ground-space dimension of the stars and plaquettes alone.
pub fn code_dimension_log2(lattice: &Lattice) -> usize {
    let checks = [lattice.stars(), lattice.plaquettes()].concat();
    lattice.num_qubits() - crate::toric::pauli::symplectic_rank(&checks)
}

/// All stars and plaquettes but one of each (the products of all are the
/// identity), plus the two logical `Z` loops with the requested signs.
pub fn ground_state(lattice: &Lattice, sector: LogicalSector) -> Result<StabilizerState> {
    let mut gens = lattice.stars();
    gens.pop();
    let mut plaquettes = lattice.plaquettes();
    plaquettes.pop();
    gens.extend(plaquettes);
    let [z1, z2] = lattice.logical_z();
    gens.push(if sector.row_negative { z1.negated() } else { z1 });
    gens.push(if sector.column_negative { z2.negated() } else { z2 });
    StabilizerState::new(gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StringKind {
    /// `Z` on the edges of a vertex path; flips the stars at its ends.
    Electric,
    /// `X` on the edges crossed by a face path; flips the end plaquettes.
    Magnetic,
}

pub fn string_operator(lattice: &Lattice, path: &[usize], kind: StringKind) -> Result<PauliOperator> {
    let n = lattice.num_qubits();
    Ok(match kind {
        StringKind::Electric => {
            lattice.vertex_path_ends(path)?;
            PauliOperator::z_on(n, path.iter().copied())
        }
        StringKind::Magnetic => {
            lattice.face_path_ends(path)?;
            PauliOperator::x_on(n, path.iter().copied())
        }
    })
}

/// Ground state with the strings for `sector` applied along the paths in
/// `regions.sites`.
pub fn anyon_pair_state(
    lattice: &Lattice,
    ground: &StabilizerState,
    sector: Sector,
    regions: &PatchRegions,
) -> Result<StabilizerState> {
    validate_sites(lattice, regions)?;
    let mut state = ground.clone();
    if sector.has_e() {
        state = state.apply(&string_operator(lattice, &regions.sites.e_path, StringKind::Electric)?);
    }
    if sector.has_m() {
        state = state.apply(&string_operator(lattice, &regions.sites.m_path, StringKind::Magnetic)?);
    }
    Ok(state)
}

/// Stars with expectation −1, and plaquettes with expectation −1.
pub fn syndrome(lattice: &Lattice, state: &StabilizerState) -> (Vec<usize>, Vec<usize>) {
    let stars = (0..lattice.num_vertices())
        .filter(|&v| state.sign_of(&lattice.star_operator(v)) == Some(-1))
        .collect();
    let faces = (0..lattice.num_faces())
        .filter(|&f| state.sign_of(&lattice.plaquette_operator(f)) == Some(-1))
        .collect();
    (stars, faces)
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureComparison {
    pub sector: Sector,
    pub equal_to_vacuum: bool,
    /// A stabilizer supported in `B` whose sign differs from the vacuum's.
    pub obstruction: Option<String>,
    /// Its support as edge indices.
    pub obstruction_support: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairConnectivity {
    pub first: Sector,
    pub second: Sector,
    pub connectivity: Connectivity,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassesReport {
    pub sectors: [Sector; 4],
    /// `|⟨Ψ_i, Ψ_j⟩|` from the stabilizer engine.
    pub gram: [[f64; 4]; 4],
    pub gram_is_identity: bool,
    pub b_signature_rank: usize,
    pub b_signatures_equal: bool,
    pub signatures: Vec<SignatureComparison>,
    /// Over `A1 ∪ A2`, for every unordered pair of distinct sectors.
    pub a_connectivity: Vec<PairConnectivity>,
    pub syndromes: Vec<(Sector, Vec<usize>, Vec<usize>)>,
}

pub struct PurificationClasses {
    pub states: Vec<StabilizerState>,
    pub report: ClassesReport,
}

/// Builds the `1, e, m, em` states and compares them on `B` (signatures),
/// globally (Gram matrix) and on `A1 ∪ A2` (Pauli connectivity).
///
/// Signature equality on `B` is reported rather than enforced: on a closed
/// torus the product of the stars over the vertices of `A1` is an `X` loop
/// supported in `B` that detects an `e` charge inside `A1`, and likewise for
/// plaquettes and `m`. The report names that loop when it appears.
pub fn purification_classes(lattice: &Lattice, regions: &PatchRegions) -> Result<PurificationClasses> {
    let ground = ground_state(lattice, LogicalSector::default())?;
    let states = Sector::ALL
        .iter()
        .map(|&s| anyon_pair_state(lattice, &ground, s, regions))
        .collect::<Result<Vec<_>>>()?;

    let mut gram = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            gram[i][j] = states[i].overlap_modulus(&states[j])?;
        }
    }
    let gram_is_identity = (0..4).all(|i| (0..4).all(|j| gram[i][j] == if i == j { 1.0 } else { 0.0 }));

    let b_mask = regions.b.mask();
    let vacuum_sig = states[0].signature(b_mask);
    let signatures: Vec<SignatureComparison> = Sector::ALL
        .iter()
        .zip(&states)
        .map(|(&sector, st)| {
            let sig = st.signature(b_mask);
            let conflict = vacuum_sig.sign_conflict(&sig);
            SignatureComparison {
                sector,
                equal_to_vacuum: sig == vacuum_sig,
                obstruction_support: conflict.as_ref().map(|p| p.support()).unwrap_or_default(),
                obstruction: conflict.map(|p| p.to_string()),
            }
        })
        .collect();
    let b_signatures_equal = signatures.iter().all(|s| s.equal_to_vacuum);

    let a = regions.a();
    let mut a_connectivity = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            a_connectivity.push(PairConnectivity {
                first: Sector::ALL[i],
                second: Sector::ALL[j],
                connectivity: pauli_connectivity(&states[i], &states[j], a.mask())?,
            });
        }
    }
    let syndromes = Sector::ALL
        .iter()
        .zip(&states)
        .map(|(&s, st)| {
            let (v, f) = syndrome(lattice, st);
            (s, v, f)
        })
        .collect();
    Ok(PurificationClasses {
        report: ClassesReport {
            sectors: Sector::ALL,
            gram,
            gram_is_identity,
            b_signature_rank: vacuum_sig.rank(),
            b_signatures_equal,
            signatures,
            a_connectivity,
            syndromes,
        },
        states,
    })
}
