//! Pure stabilizer states: canonical forms, expectation values, overlaps,
//! region-restricted subgroups and Pauli connectivity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::toric::pauli::{row_reduce, symplectic_rank, Gf2Matrix, PauliOperator};

/// Pure state fixed by `n` independent commuting Hermitian Paulis.
#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    generators: Vec<PauliOperator>,
    /// Fully reduced generators in the standard column order.
    canonical: Vec<PauliOperator>,
    pivots: Vec<usize>,
}

impl PartialEq for StabilizerState {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

fn standard_order(n: usize) -> Vec<usize> {
    (0..2 * n).collect()
}

impl StabilizerState {
    pub fn new(generators: Vec<PauliOperator>) -> Result<Self> {
        let n = generators
            .first()
            .map(PauliOperator::num_qubits)
            .ok_or_else(|| Error::Validation("stabilizer state needs generators".into()))?;
        if generators.len() != n || generators.iter().any(|g| g.num_qubits() != n) {
            return Err(Error::Validation(format!(
                "expected {n} generators on {n} qubits, got {}",
                generators.len()
            )));
        }
        if let Some(g) = generators.iter().find(|g| !g.is_hermitian()) {
            return Err(Error::Validation(format!("generator {g} is not Hermitian")));
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(Error::Validation(format!("generators {i} and {j} anticommute")));
                }
            }
        }
        if symplectic_rank(&generators) != n {
            return Err(Error::Validation("generators are not independent".into()));
        }
        let mut canonical = generators.clone();
        let pivots = row_reduce(&mut canonical, &standard_order(n));
        Ok(Self {
            n,
            generators,
            canonical,
            pivots,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Reduced row echelon generators; equal for equal states.
    pub fn canonical_generators(&self) -> &[PauliOperator] {
        &self.canonical
    }

    /// `P Ψ`: generators anticommuting with `P` change sign.
    pub fn apply(&self, p: &PauliOperator) -> Self {
        let flip = |g: &PauliOperator| if g.commutes_with(p) { g.clone() } else { g.negated() };
        Self {
            n: self.n,
            generators: self.generators.iter().map(flip).collect(),
            canonical: self.canonical.iter().map(flip).collect(),
            pivots: self.pivots.clone(),
        }
    }

    /// The element of the group with the same bits as `p`, if any.
    pub fn group_element(&self, p: &PauliOperator) -> Option<PauliOperator> {
        let mut acc = PauliOperator::identity(self.n);
        for (row, &col) in self.canonical.iter().zip(&self.pivots) {
            if p.bit(col) != acc.bit(col) {
                acc = acc.mul(row);
            }
        }
        acc.same_bits(p).then_some(acc)
    }

    /// `⟨Ψ, P Ψ⟩`: zero unless `±P` (times a power of `i`) is in the group.
    pub fn expectation(&self, p: &PauliOperator) -> num_complex::Complex64 {
        if self.generators.iter().any(|g| !g.commutes_with(p)) {
            return num_complex::Complex64::new(0.0, 0.0);
        }
        match self.group_element(p) {
            Some(g) => p.clone().with_phase(p.phase() + 4 - g.phase()).phase_factor(),
            None => num_complex::Complex64::new(0.0, 0.0),
        }
    }

    /// Sign of a Hermitian `p` in the group: `Some(±1)`, or `None` when `±p`
    /// is not a stabilizer.
    pub fn sign_of(&self, p: &PauliOperator) -> Option<i8> {
        let e = self.expectation(p);
        if e.norm() < 0.5 {
            None
        } else if e.re > 0.5 {
            Some(1)
        } else {
            Some(-1)
        }
    }

    /// `|⟨Ψ, Φ⟩|`: zero when some Pauli stabilizes one state and its negative
    /// the other, otherwise `2^{−s/2}` with `s = n − dim(S_Ψ ∩ S_Φ)`.
    pub fn overlap_modulus(&self, other: &Self) -> Result<f64> {
        if other.n != self.n {
            return Err(Error::Dimension {
                context: "stabilizer overlap",
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let mut m = Gf2Matrix::new(2 * n);
        for g in self.generators.iter().chain(&other.generators) {
            m.push_row((0..2 * n).map(|col| g.bit(col)));
        }
        for dep in m.left_nullspace() {
            let mut element = PauliOperator::identity(n);
            for (i, g) in self.generators.iter().enumerate() {
                if dep[i] {
                    element = element.mul(g);
                }
            }
            if other.sign_of(&element) == Some(-1) {
                return Ok(0.0);
            }
        }
        let s = m.rank() - n;
        Ok(0.5f64.powf(s as f64 / 2.0))
    }

    /// Canonical generators of the subgroup supported inside `region`
    /// (`region[q]` marks included qubits). Two states have the same reduced
    /// state on the region exactly when their signatures coincide.
    pub fn signature(&self, region: &[bool]) -> Signature {
        let n = self.n;
        assert_eq!(region.len(), n, "region mask length");
        let outside: Vec<usize> = (0..n).filter(|&q| !region[q]).collect();
        let inside: Vec<usize> = (0..n).filter(|&q| region[q]).collect();
        // Eliminate the outside columns first: rows whose pivot lands on an
        // inside column vanish on every outside column.
        let order: Vec<usize> = outside
            .iter()
            .flat_map(|&q| [q, q + n])
            .chain(inside.iter().flat_map(|&q| [q, q + n]))
            .collect();
        let first_inside = 2 * outside.len();
        let mut rows = self.generators.clone();
        let pivots = row_reduce(&mut rows, &order);
        let inside_cols: Vec<usize> = order[first_inside..].to_vec();
        let mut subgroup: Vec<PauliOperator> = rows
            .into_iter()
            .zip(pivots)
            .filter(|(_, p)| inside_cols.contains(p))
            .map(|(r, _)| r)
            .collect();
        row_reduce(&mut subgroup, &standard_order(n));
        Signature { generators: subgroup }
    }
}

/// Canonical generating set of a stabilizer subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub generators: Vec<PauliOperator>,
}

impl Signature {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Unsigned subgroups agree.
    pub fn same_group(&self, other: &Self) -> bool {
        self.generators.len() == other.generators.len()
            && self
                .generators
                .iter()
                .zip(&other.generators)
                .all(|(a, b)| a.same_bits(b))
    }

    /// First generator whose sign differs in `other`'s group, if the unsigned
    /// groups agree.
    pub fn sign_conflict(&self, other: &Self) -> Option<PauliOperator> {
        if !self.same_group(other) {
            return None;
        }
        self.generators
            .iter()
            .zip(&other.generators)
            .find(|(a, b)| a.phase() != b.phase())
            .map(|(a, _)| a.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Connectivity {
    pub feasible: bool,
    /// A connecting Pauli supported in the region, when one exists.
    #[serde(serialize_with = "serialize_optional_pauli")]
    pub operator: Option<PauliOperator>,
    pub reason: String,
}

fn serialize_optional_pauli<S: serde::Serializer>(
    p: &Option<PauliOperator>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_some(&p.to_string()),
        None => s.serialize_none(),
    }
}

/// Is there a Pauli `P` supported in `region` with `P Ψ₁ ∝ Ψ₂`?
///
/// Such `P` must map `S₁` onto `S₂`, so the unsigned groups must agree; then
/// `P` is any solution of the linear system "anticommute with generator `g`
/// iff `g` has sign −1 in `S₂`" restricted to the region's bits.
pub fn pauli_connectivity(a: &StabilizerState, b: &StabilizerState, region: &[bool]) -> Result<Connectivity> {
    let n = a.num_qubits();
    if b.num_qubits() != n || region.len() != n {
        return Err(Error::Dimension {
            context: "pauli_connectivity",
            expected: n,
            found: if b.num_qubits() != n {
                b.num_qubits()
            } else {
                region.len()
            },
        });
    }
    if symplectic_rank(&[a.generators(), b.generators()].concat()) != n {
        return Ok(Connectivity {
            feasible: false,
            operator: None,
            reason: "stabilizer groups differ as unsigned groups".into(),
        });
    }
    let qubits: Vec<usize> = (0..n).filter(|&q| region[q]).collect();
    // Unknowns: x bits then z bits of P on the region's qubits.
    let mut system = Gf2Matrix::new(2 * qubits.len());
    let mut rhs = Vec::with_capacity(n);
    for g in a.generators() {
        system.push_row(
            qubits
                .iter()
                .map(|&q| g.z_bit(q))
                .chain(qubits.iter().map(|&q| g.x_bit(q))),
        );
        rhs.push(b.sign_of(g) == Some(-1));
    }
    let Some(sol) = system.solve(&rhs) else {
        return Ok(Connectivity {
            feasible: false,
            operator: None,
            reason: "sign pattern not realizable by a Pauli supported in the region".into(),
        });
    };
    let k = qubits.len();
    let mut x = vec![false; n];
    let mut z = vec![false; n];
    for (i, &q) in qubits.iter().enumerate() {
        x[q] = sol[i];
        z[q] = sol[k + i];
    }
    let p = PauliOperator::hermitian_from_bits(n, &x, &z);
    if a.apply(&p) != *b {
        return Err(Error::InternalConsistency(
            "connecting Pauli does not map the first state onto the second".into(),
        ));
    }
    Ok(Connectivity {
        feasible: true,
        operator: Some(p),
        reason: "connecting Pauli found".into(),
    })
}
