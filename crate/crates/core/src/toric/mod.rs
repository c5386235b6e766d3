//! Toric code on an `L × L` torus: a stabilizer engine for the anyon-sector
//! states, region-restricted Pauli analysis, and a small state-vector engine
//! for cross-checks against the dense duality machinery.

pub mod anyons;
pub mod dense;
pub mod lattice;
pub mod pauli;
pub mod regions;
pub mod stabilizer;

pub use anyons::{
    anyon_pair_state, code_dimension_log2, ground_state, purification_classes, string_operator, syndrome,
    ClassesReport, LogicalSector, PurificationClasses, Sector, StringKind,
};
pub use dense::{dense_cross_check, dense_ground_state, dense_state, DenseCrossCheck};
pub use lattice::Lattice;
pub use pauli::PauliOperator;
pub use regions::{largest_fitting_radius, two_patch_regions, AnyonSites, PatchRegions, Region};
pub use stabilizer::{pauli_connectivity, Connectivity, Signature, StabilizerState};
