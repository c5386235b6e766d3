//! The `L × L` periodic square lattice with qubits on edges.
//!
//! Vertices and faces are labelled by `(x, y)` with index `y·L + x`. The
//! horizontal edge `h(x, y)` joins `(x, y)–(x+1, y)` and has qubit index
//! `2(y·L + x)`; the vertical edge `v(x, y)` joins `(x, y)–(x, y+1)` and has
//! index `2(y·L + x) + 1`. Face `f(x, y)` is the unit square with lower-left
//! corner `(x, y)`.

use crate::error::{Error, Result};
use crate::toric::pauli::PauliOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    l: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

impl Lattice {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::Geometry(format!("lattice size must be at least 2, got {l}")));
        }
        Ok(Self { l })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn num_qubits(&self) -> usize {
        2 * self.l * self.l
    }

    pub fn num_vertices(&self) -> usize {
        self.l * self.l
    }

    pub fn num_faces(&self) -> usize {
        self.l * self.l
    }

    fn wrap(&self, v: isize) -> usize {
        v.rem_euclid(self.l as isize) as usize
    }

    pub fn site(&self, x: isize, y: isize) -> usize {
        self.wrap(y) * self.l + self.wrap(x)
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.l, site / self.l)
    }

    pub fn h(&self, x: isize, y: isize) -> usize {
        2 * self.site(x, y)
    }

    pub fn v(&self, x: isize, y: isize) -> usize {
        2 * self.site(x, y) + 1
    }

    pub fn edge_kind(&self, e: usize) -> EdgeKind {
        if e.is_multiple_of(2) {
            EdgeKind::Horizontal
        } else {
            EdgeKind::Vertical
        }
    }

    /// The two endpoint vertices.
    pub fn edge_vertices(&self, e: usize) -> [usize; 2] {
        let (x, y) = self.coords(e / 2);
        let (x, y) = (x as isize, y as isize);
        match self.edge_kind(e) {
            EdgeKind::Horizontal => [self.site(x, y), self.site(x + 1, y)],
            EdgeKind::Vertical => [self.site(x, y), self.site(x, y + 1)],
        }
    }

    /// The two faces the edge borders.
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        let (x, y) = self.coords(e / 2);
        let (x, y) = (x as isize, y as isize);
        match self.edge_kind(e) {
            EdgeKind::Horizontal => [self.site(x, y), self.site(x, y - 1)],
            EdgeKind::Vertical => [self.site(x, y), self.site(x - 1, y)],
        }
    }

    /// Edges incident to vertex `s`: `h(x,y), h(x−1,y), v(x,y), v(x,y−1)`.
    pub fn star_edges(&self, s: usize) -> [usize; 4] {
        let (x, y) = self.coords(s);
        let (x, y) = (x as isize, y as isize);
        [self.h(x, y), self.h(x - 1, y), self.v(x, y), self.v(x, y - 1)]
    }

    /// Boundary of face `f`: `h(x,y), h(x,y+1), v(x,y), v(x+1,y)`.
    pub fn face_edges(&self, f: usize) -> [usize; 4] {
        let (x, y) = self.coords(f);
        let (x, y) = (x as isize, y as isize);
        [self.h(x, y), self.h(x, y + 1), self.v(x, y), self.v(x + 1, y)]
    }

    pub fn star_operator(&self, s: usize) -> PauliOperator {
        PauliOperator::x_on(self.num_qubits(), self.star_edges(s))
    }

    pub fn plaquette_operator(&self, f: usize) -> PauliOperator {
        PauliOperator::z_on(self.num_qubits(), self.face_edges(f))
    }

    pub fn stars(&self) -> Vec<PauliOperator> {
        (0..self.num_vertices()).map(|s| self.star_operator(s)).collect()
    }

    pub fn plaquettes(&self) -> Vec<PauliOperator> {
        (0..self.num_faces()).map(|f| self.plaquette_operator(f)).collect()
    }

    /// `Z` along the row `h(·, 0)` and along the column `v(0, ·)`.
    pub fn logical_z(&self) -> [PauliOperator; 2] {
        let n = self.num_qubits();
        let l = self.l as isize;
        [
            PauliOperator::z_on(n, (0..l).map(|x| self.h(x, 0))),
            PauliOperator::z_on(n, (0..l).map(|y| self.v(0, y))),
        ]
    }

    /// `X` on `h(0, ·)` and on `v(·, 0)`; the first anticommutes with the
    /// first logical `Z`, the second with the second.
    pub fn logical_x(&self) -> [PauliOperator; 2] {
        let n = self.num_qubits();
        let l = self.l as isize;
        [
            PauliOperator::x_on(n, (0..l).map(|y| self.h(0, y))),
            PauliOperator::x_on(n, (0..l).map(|x| self.v(x, 0))),
        ]
    }

    /// Torus Manhattan distance between vertices.
    pub fn vertex_distance(&self, a: usize, b: usize) -> usize {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        let d = |p: usize, q: usize| {
            let d = p.abs_diff(q);
            d.min(self.l - d)
        };
        d(ax, bx) + d(ay, by)
    }

    /// Vertices adjacent to `s`, with the connecting edge.
    pub fn vertex_neighbors(&self, s: usize) -> [(usize, usize); 4] {
        self.star_edges(s).map(|e| {
            let [a, b] = self.edge_vertices(e);
            (if a == s { b } else { a }, e)
        })
    }

    /// Faces adjacent to `f`, with the shared edge.
    pub fn face_neighbors(&self, f: usize) -> [(usize, usize); 4] {
        self.face_edges(f).map(|e| {
            let [a, b] = self.edge_faces(e);
            (if a == f { b } else { a }, e)
        })
    }

    /// Checks that consecutive edges of an `e` path share a vertex and
    /// returns the vertices where the path starts and ends (the two vertices
    /// touched an odd number of times); `None` for a closed path.
    pub fn vertex_path_ends(&self, path: &[usize]) -> Result<Option<[usize; 2]>> {
        self.check_path(path, |e| self.edge_vertices(e), "vertex")?;
        Ok(odd_pair(
            path.iter().flat_map(|&e| self.edge_vertices(e)),
            self.num_vertices(),
        ))
    }

    /// As [`Self::vertex_path_ends`] for dual paths through faces.
    pub fn face_path_ends(&self, path: &[usize]) -> Result<Option<[usize; 2]>> {
        self.check_path(path, |e| self.edge_faces(e), "face")?;
        Ok(odd_pair(
            path.iter().flat_map(|&e| self.edge_faces(e)),
            self.num_faces(),
        ))
    }

    fn check_path(&self, path: &[usize], ends: impl Fn(usize) -> [usize; 2], what: &str) -> Result<()> {
        if let Some(&bad) = path.iter().find(|&&e| e >= self.num_qubits()) {
            return Err(Error::Geometry(format!("edge {bad} is not on the lattice")));
        }
        for w in path.windows(2) {
            let (a, b) = (ends(w[0]), ends(w[1]));
            if !a.iter().any(|p| b.contains(p)) {
                return Err(Error::Geometry(format!(
                    "path is disconnected: edges {} and {} share no {what}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

fn odd_pair(touches: impl Iterator<Item = usize>, count: usize) -> Option<[usize; 2]> {
    let mut parity = vec![false; count];
    for t in touches {
        parity[t] ^= true;
    }
    let odd: Vec<usize> = (0..count).filter(|&i| parity[i]).collect();
    match odd.as_slice() {
        [a, b] => Some([*a, *b]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::pauli::symplectic_rank;

    #[test]
    fn sizes() {
        assert!(Lattice::new(1).is_err());
        let lat = Lattice::new(2).unwrap();
        assert_eq!(lat.num_qubits(), 8);
        assert_eq!(symplectic_rank(&lat.stars()), 3);
        assert_eq!(symplectic_rank(&lat.plaquettes()), 3);
        assert_eq!(Lattice::new(3).unwrap().num_qubits(), 18);
    }

    #[test]
    fn incidence_is_consistent() {
        for l in 2..5 {
            let lat = Lattice::new(l).unwrap();
            let mut vertex_count = vec![0; lat.num_qubits()];
            let mut face_count = vec![0; lat.num_qubits()];
            for s in 0..lat.num_vertices() {
                for e in lat.star_edges(s) {
                    vertex_count[e] += 1;
                    assert!(lat.edge_vertices(e).contains(&s));
                }
                for e in lat.face_edges(s) {
                    face_count[e] += 1;
                    assert!(lat.edge_faces(e).contains(&s));
                }
            }
            assert!(vertex_count.iter().chain(&face_count).all(|&c| c == 2));
            let all_stars = lat
                .stars()
                .iter()
                .fold(PauliOperator::identity(lat.num_qubits()), |a, s| a.mul(s));
            let all_plaquettes = lat
                .plaquettes()
                .iter()
                .fold(PauliOperator::identity(lat.num_qubits()), |a, s| a.mul(s));
            assert!(all_stars.is_identity_up_to_phase() && all_stars.phase() == 0);
            assert!(all_plaquettes.is_identity_up_to_phase() && all_plaquettes.phase() == 0);
            for s in lat.stars() {
                for p in lat.plaquettes() {
                    assert!(s.commutes_with(&p));
                }
            }
        }
    }

    #[test]
    fn logicals() {
        let lat = Lattice::new(3).unwrap();
        let [z1, z2] = lat.logical_z();
        let [x1, x2] = lat.logical_x();
        for s in lat.stars().iter().chain(&lat.plaquettes()) {
            for op in [&z1, &z2, &x1, &x2] {
                assert!(s.commutes_with(op));
            }
        }
        assert!(!z1.commutes_with(&x1) && z1.commutes_with(&x2));
        assert!(!z2.commutes_with(&x2) && z2.commutes_with(&x1));
    }

    #[test]
    fn path_ends() {
        let lat = Lattice::new(4).unwrap();
        let path = [lat.h(0, 0), lat.h(1, 0), lat.v(2, 0)];
        assert_eq!(
            lat.vertex_path_ends(&path).unwrap(),
            Some([lat.site(0, 0), lat.site(2, 1)])
        );
        assert!(lat.vertex_path_ends(&[lat.h(0, 0), lat.h(2, 2)]).is_err());
        let loop_ = [lat.h(0, 0), lat.v(1, 0), lat.h(0, 1), lat.v(0, 0)];
        assert_eq!(lat.vertex_path_ends(&loop_).unwrap(), None);
    }
}
