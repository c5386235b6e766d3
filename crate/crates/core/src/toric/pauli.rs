//! Pauli strings in symplectic form and the GF(2) elimination routines the
//! stabilizer engine is built on.

use std::fmt;

use crate::numerics::{c, CVector, C64};

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

fn get(bits: &[u64], i: usize) -> bool {
    bits[i / 64] >> (i % 64) & 1 == 1
}

fn flip(bits: &mut [u64], i: usize) {
    bits[i / 64] ^= 1 << (i % 64);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn dot(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// `i^phase · X^x Z^z` on `n` qubits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            phase: 0,
        }
    }

    /// `X` on each listed qubit (repeats cancel).
    pub fn x_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            flip(&mut p.x, q);
        }
        p
    }

    pub fn z_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for q in qubits {
            flip(&mut p.z, q);
        }
        p
    }

    /// The Hermitian Pauli with the given bit patterns (`Y` where both set).
    pub fn hermitian_from_bits(n: usize, x: &[bool], z: &[bool]) -> Self {
        let mut p = Self::identity(n);
        for q in 0..n {
            if x[q] {
                flip(&mut p.x, q);
            }
            if z[q] {
                flip(&mut p.z, q);
            }
        }
        p.phase = (dot(&p.x, &p.z) % 4) as u8;
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the `i^k` prefactor.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase % 4;
        self
    }

    pub fn negated(&self) -> Self {
        self.clone().with_phase(self.phase + 2)
    }

    pub fn x_bit(&self, q: usize) -> bool {
        get(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        get(&self.z, q)
    }

    /// Bit `col` of the concatenated `[x | z]` row.
    pub fn bit(&self, col: usize) -> bool {
        if col < self.n {
            self.x_bit(col)
        } else {
            self.z_bit(col - self.n)
        }
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn same_bits(&self, other: &Self) -> bool {
        self.x == other.x && self.z == other.z
    }

    pub fn is_hermitian(&self) -> bool {
        u32::from(self.phase) % 2 == dot(&self.x, &self.z) % 2
    }

    /// Qubits acted on nontrivially.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn supported_in(&self, region: &[bool]) -> bool {
        self.support().into_iter().all(|q| region[q])
    }

    /// Symplectic form `x₁·z₂ + z₁·x₂ mod 2` is zero.
    pub fn commutes_with(&self, other: &Self) -> bool {
        (dot(&self.x, &other.z) + dot(&self.z, &other.x)).is_multiple_of(2)
    }

    /// `self · other`, using `Z^z X^x = (−1)^{z·x} X^x Z^z`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "Pauli operators on different qubit counts");
        let mut x = self.x.clone();
        let mut z = self.z.clone();
        xor_into(&mut x, &other.x);
        xor_into(&mut z, &other.z);
        let phase = (u32::from(self.phase) + u32::from(other.phase) + 2 * dot(&self.z, &other.x)) % 4;
        Self {
            n: self.n,
            x,
            z,
            phase: phase as u8,
        }
    }

    pub fn phase_factor(&self) -> C64 {
        match self.phase {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        }
    }

    /// Action on a dense vector whose index bit `q` is the `Z` eigenvalue
    /// label of qubit `q`: `X^x Z^z |b⟩ = (−1)^{z·b} |b ⊕ x⟩`.
    pub fn apply_dense(&self, v: &CVector) -> CVector {
        assert!(
            self.n <= 63 && v.len() == 1 << self.n,
            "dense vector length must be 2^n"
        );
        let xmask = self.x.first().copied().unwrap_or(0) as usize;
        let zmask = self.z.first().copied().unwrap_or(0) as usize;
        let pre = self.phase_factor();
        let mut out = CVector::zeros(v.len());
        for (b, amp) in v.iter().enumerate() {
            let sign = if (zmask & b).count_ones() % 2 == 1 { -pre } else { pre };
            out[b ^ xmask] = amp * sign;
        }
        out
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliOperator {
    /// Sign prefix plus one letter per qubit, e.g. `-IXZY`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Strip the i^{x·z} carried by each Y so Hermitian strings print ±.
        let ys = dot(&self.x, &self.z);
        let k = (u32::from(self.phase) + 4 - ys % 4) % 4;
        f.write_str(["+", "+i", "-", "-i"][k as usize])?;
        for q in 0..self.n {
            let ch = match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

/// Full row reduction on the listed columns (`x` bits are `0..n`, `z` bits
/// `n..2n`), multiplying Pauli rows so phases stay exact. Rows that reduce to
/// the identity are dropped; the survivors come back in pivot order, each
/// with its pivot column.
pub fn row_reduce(rows: &mut Vec<PauliOperator>, order: &[usize]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for &col in order {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| rows[i].bit(col)) else {
            continue;
        };
        rows.swap(r, found);
        let pivot = rows[r].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j != r && row.bit(col) {
                *row = row.mul(&pivot);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Dense GF(2) matrix with packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn push_row(&mut self, bits: impl IntoIterator<Item = bool>) {
        let mut row = vec![0; words(self.cols)];
        for (i, b) in bits.into_iter().enumerate() {
            assert!(i < self.cols, "row longer than column count");
            if b {
                flip(&mut row, i);
            }
        }
        self.rows.push(row);
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        echelon(&mut rows, self.cols).len()
    }

    /// Some `x` with `A x = b`, or `None` when inconsistent.
    pub fn solve(&self, rhs: &[bool]) -> Option<Vec<bool>> {
        assert_eq!(rhs.len(), self.rows.len());
        let cols = self.cols + 1;
        let mut aug: Vec<Vec<u64>> = self
            .rows
            .iter()
            .zip(rhs)
            .map(|(row, &b)| {
                let mut r = vec![0; words(cols)];
                for i in 0..self.cols {
                    if get(row, i) {
                        flip(&mut r, i);
                    }
                }
                if b {
                    flip(&mut r, self.cols);
                }
                r
            })
            .collect();
        let pivots = echelon(&mut aug, cols);
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![false; self.cols];
        for (row, &p) in aug.iter().zip(&pivots) {
            x[p] = get(row, self.cols);
        }
        Some(x)
    }

    /// Basis of `{c : Σ c_i row_i = 0}`, as row-index selections.
    pub fn left_nullspace(&self) -> Vec<Vec<bool>> {
        let m = self.rows.len();
        let cols = self.cols + m;
        let mut tagged: Vec<Vec<u64>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = vec![0; words(cols)];
                for k in 0..self.cols {
                    if get(row, k) {
                        flip(&mut r, k);
                    }
                }
                flip(&mut r, self.cols + i);
                r
            })
            .collect();
        let pivots = echelon(&mut tagged, cols);
        tagged
            .iter()
            .zip(&pivots)
            .filter(|(_, &p)| p >= self.cols)
            .map(|(row, _)| (0..m).map(|i| get(row, self.cols + i)).collect())
            .collect()
    }
}

/// Reduced row echelon form in place; returns pivot columns, rows truncated
/// to the rank.
fn echelon(rows: &mut Vec<Vec<u64>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| get(&rows[i], col)) else {
            continue;
        };
        rows.swap(r, found);
        let pivot = rows[r].clone();
        for (j, row) in rows.iter_mut().enumerate() {
            if j != r && get(row, col) {
                xor_into(row, &pivot);
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// GF(2) rank of the `[x | z]` rows.
pub fn symplectic_rank(ops: &[PauliOperator]) -> usize {
    let Some(first) = ops.first() else { return 0 };
    let n = first.num_qubits();
    let mut m = Gf2Matrix::new(2 * n);
    for p in ops {
        m.push_row((0..2 * n).map(|col| p.bit(col)));
    }
    m.rank()
}
