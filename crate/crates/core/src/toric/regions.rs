//! Two separated patches `A1`, `A2` and their complement `B`, with anyon
//! sites and connecting strings through `B`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::toric::lattice::Lattice;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Region {
    pub name: String,
    /// Sorted edge (qubit) indices.
    pub edges: Vec<usize>,
    #[serde(skip)]
    mask: Vec<bool>,
}

impl Region {
    pub fn new(name: impl Into<String>, num_qubits: usize, edges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; num_qubits];
        for e in edges {
            if e >= num_qubits {
                return Err(Error::Geometry(format!("edge {e} is not on the lattice")));
            }
            mask[e] = true;
        }
        let edges = (0..num_qubits).filter(|&e| mask[e]).collect();
        Ok(Self {
            name: name.into(),
            edges,
            mask,
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, e: usize) -> bool {
        self.mask.get(e).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn union(&self, other: &Region, name: impl Into<String>) -> Region {
        let mask: Vec<bool> = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Region::new(name, mask.len(), (0..mask.len()).filter(|&e| mask[e])).expect("same lattice")
    }

    pub fn complement(&self, name: impl Into<String>) -> Region {
        Region::new(name, self.mask.len(), (0..self.mask.len()).filter(|&e| !self.mask[e])).expect("same lattice")
    }

    /// Vertices touched by the region's edges.
    pub fn vertices(&self, lattice: &Lattice) -> Vec<usize> {
        let mut touched = vec![false; lattice.num_vertices()];
        for &e in &self.edges {
            for v in lattice.edge_vertices(e) {
                touched[v] = true;
            }
        }
        (0..touched.len()).filter(|&v| touched[v]).collect()
    }

    /// Faces with at least one edge in the region.
    pub fn faces(&self, lattice: &Lattice) -> Vec<usize> {
        let mut touched = vec![false; lattice.num_faces()];
        for &e in &self.edges {
            for f in lattice.edge_faces(e) {
                touched[f] = true;
            }
        }
        (0..touched.len()).filter(|&f| touched[f]).collect()
    }
}

/// Endpoints and path of an `e` string (vertices, `Z` on path edges) and an
/// `m` string (faces, `X` on the crossed edges).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnyonSites {
    pub e_sites: [usize; 2],
    pub e_path: Vec<usize>,
    pub m_sites: [usize; 2],
    pub m_path: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchRegions {
    pub a1: Region,
    pub a2: Region,
    pub b: Region,
    pub radius: usize,
    /// Torus graph distance between the vertex sets of `A1` and `A2`.
    pub separation: usize,
    pub sites: AnyonSites,
}

impl PatchRegions {
    pub fn a(&self) -> Region {
        self.a1.union(&self.a2, "A")
    }
}

/// Extent in vertices of the patch box for a given radius: radius 0 is a
/// single horizontal edge, radius `r ≥ 1` the `(r+1) × (r+1)` vertex box.
fn box_extent(radius: usize) -> (usize, usize) {
    if radius == 0 {
        (2, 1)
    } else {
        (radius + 1, radius + 1)
    }
}

/// Distance between the intervals `[0, w)` and `[o, o+w)` on `Z_L`; zero when
/// their projections meet.
fn interval_gap(l: usize, w: usize, o: usize) -> usize {
    let forward = o as isize - (w as isize - 1);
    let backward = l as isize - (o as isize + w as isize - 1);
    forward.min(backward).max(0) as usize
}

/// Separation that the regions for `radius` would have on `lattice`.
pub fn patch_separation(lattice: &Lattice, radius: usize) -> usize {
    let l = lattice.size();
    let (wx, wy) = box_extent(radius);
    let o = l / 2;
    interval_gap(l, wx, o) + interval_gap(l, wy, o)
}

/// Largest radius whose patches keep at least `separation` apart.
pub fn largest_fitting_radius(lattice: &Lattice, separation: usize) -> Option<usize> {
    (0..lattice.size()).rev().find(|&r| {
        let s = patch_separation(lattice, r);
        s >= separation.max(1)
    })
}

/// Two box-shaped patches, the first at the origin and the second offset by
/// `(⌊L/2⌋, ⌊L/2⌋)`, separated by at least `separation` lattice steps.
///
/// Also picks anyon sites on vertices/faces that straddle each patch
/// boundary and shortest strings joining them inside `B`, and verifies that
/// `B` is connected.
pub fn two_patch_regions(lattice: &Lattice, radius: usize, separation: usize) -> Result<PatchRegions> {
    if separation == 0 {
        return Err(Error::Geometry(
            "separation must be positive; the patches may not touch".into(),
        ));
    }
    let l = lattice.size();
    let (wx, wy) = box_extent(radius);
    if wx > l || wy > l {
        return Err(Error::Geometry(format!(
            "radius {radius} patch does not fit on L = {l}"
        )));
    }
    let actual = patch_separation(lattice, radius);
    if actual < separation {
        return Err(Error::Geometry(format!(
            "patches of radius {radius} on L = {l} are only {actual} apart, {separation} requested"
        )));
    }
    let o = (l / 2) as isize;
    let n = lattice.num_qubits();
    let a1 = Region::new("A1", n, box_edges(lattice, 0, 0, wx, wy))?;
    let a2 = Region::new("A2", n, box_edges(lattice, o, o, wx, wy))?;
    let b = a1.union(&a2, "A").complement("B");
    if !edges_connected(lattice, &b) {
        return Err(Error::Geometry("region B is not connected".into()));
    }
    let sites = choose_sites(lattice, &a1, &a2, &b)?;
    Ok(PatchRegions {
        a1,
        a2,
        b,
        radius,
        separation: actual,
        sites,
    })
}

fn box_edges(lattice: &Lattice, x0: isize, y0: isize, wx: usize, wy: usize) -> Vec<usize> {
    let mut edges = Vec::new();
    for dy in 0..wy as isize {
        for dx in 0..wx as isize {
            if dx + 1 < wx as isize {
                edges.push(lattice.h(x0 + dx, y0 + dy));
            }
            if dy + 1 < wy as isize {
                edges.push(lattice.v(x0 + dx, y0 + dy));
            }
        }
    }
    edges
}

fn edges_connected(lattice: &Lattice, region: &Region) -> bool {
    let Some(&start) = region.edges.first() else {
        return true;
    };
    let mut seen = vec![false; lattice.num_qubits()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(e) = queue.pop_front() {
        for v in lattice.edge_vertices(e) {
            for f in lattice.star_edges(v) {
                if region.contains(f) && !seen[f] {
                    seen[f] = true;
                    count += 1;
                    queue.push_back(f);
                }
            }
        }
    }
    count == region.len()
}

/// Shortest path from `from` to `to` through `neighbors`, using only edges
/// in `allowed`; returns the edge sequence.
fn shortest_path(
    from: usize,
    to: usize,
    count: usize,
    neighbors: impl Fn(usize) -> [(usize, usize); 4],
    allowed: &Region,
) -> Option<Vec<usize>> {
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; count];
    let mut seen = vec![false; count];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        if s == to {
            let mut path = Vec::new();
            let mut cur = to;
            while let Some((p, e)) = prev[cur] {
                path.push(e);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for (t, e) in neighbors(s) {
            if allowed.contains(e) && !seen[t] {
                seen[t] = true;
                prev[t] = Some((s, e));
                queue.push_back(t);
            }
        }
    }
    None
}

fn straddles(edges: [usize; 4], inner: &Region, outer: &Region) -> bool {
    edges.iter().any(|&e| inner.contains(e)) && edges.iter().any(|&e| outer.contains(e))
}

fn choose_sites(lattice: &Lattice, a1: &Region, a2: &Region, b: &Region) -> Result<AnyonSites> {
    let straddling_vertices = |a: &Region| -> Vec<usize> {
        a.vertices(lattice)
            .into_iter()
            .filter(|&v| straddles(lattice.star_edges(v), a, b))
            .collect()
    };
    let straddling_faces = |a: &Region| -> Vec<usize> {
        a.faces(lattice)
            .into_iter()
            .filter(|&f| straddles(lattice.face_edges(f), a, b))
            .collect()
    };
    let closest = |xs: &[usize], ys: &[usize], dist: &dyn Fn(usize, usize) -> usize| -> Option<(usize, usize)> {
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .min_by_key(|&(x, y)| (dist(x, y), x, y))
    };
    let vdist = |a: usize, b: usize| lattice.vertex_distance(a, b);
    // Faces are indexed like their lower-left vertex.
    let fdist = |a: usize, b: usize| lattice.vertex_distance(a, b);

    let (v1, v2) = closest(&straddling_vertices(a1), &straddling_vertices(a2), &vdist)
        .ok_or_else(|| Error::Geometry("no star straddles the patch boundary".into()))?;
    let (f1, f2) = closest(&straddling_faces(a1), &straddling_faces(a2), &fdist)
        .ok_or_else(|| Error::Geometry("no plaquette straddles the patch boundary".into()))?;
    let e_path = shortest_path(v1, v2, lattice.num_vertices(), |s| lattice.vertex_neighbors(s), b)
        .ok_or_else(|| Error::Geometry("no vertex path between the patches inside B".into()))?;
    let m_path = shortest_path(f1, f2, lattice.num_faces(), |f| lattice.face_neighbors(f), b)
        .ok_or_else(|| Error::Geometry("no dual path between the patches inside B".into()))?;
    Ok(AnyonSites {
        e_sites: [v1, v2],
        e_path,
        m_sites: [f1, f2],
        m_path,
    })
}

/// Checks that anyon sites touch the designated patches through straddling
/// stabilizers and that both strings lie in `B` with the right endpoints.
pub fn validate_sites(lattice: &Lattice, regions: &PatchRegions) -> Result<()> {
    let s = &regions.sites;
    let (a1, a2, b) = (&regions.a1, &regions.a2, &regions.b);
    for (v, a) in s.e_sites.iter().zip([a1, a2]) {
        if !straddles(lattice.star_edges(*v), a, b) {
            return Err(Error::Geometry(format!(
                "star at vertex {v} does not straddle the {} boundary",
                a.name
            )));
        }
    }
    for (f, a) in s.m_sites.iter().zip([a1, a2]) {
        if !straddles(lattice.face_edges(*f), a, b) {
            return Err(Error::Geometry(format!(
                "plaquette {f} does not straddle the {} boundary",
                a.name
            )));
        }
    }
    if let Some(&e) = s.e_path.iter().chain(&s.m_path).find(|&&e| !b.contains(e)) {
        return Err(Error::Geometry(format!("string edge {e} leaves region B")));
    }
    let sorted = |mut p: [usize; 2]| {
        p.sort_unstable();
        p
    };
    if lattice.vertex_path_ends(&s.e_path)?.map(sorted) != Some(sorted(s.e_sites)) {
        return Err(Error::Geometry("e string does not end at the e sites".into()));
    }
    if lattice.face_path_ends(&s.m_path)?.map(sorted) != Some(sorted(s.m_sites)) {
        return Err(Error::Geometry("m string does not end at the m sites".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l6_radius1() {
        let lat = Lattice::new(6).unwrap();
        let r = two_patch_regions(&lat, 1, 2).unwrap();
        assert_eq!(r.a1.len(), 4);
        assert_eq!(r.a1.len(), r.a2.len());
        assert_eq!(r.a1.len() + r.a2.len() + r.b.len(), lat.num_qubits());
        assert!(r.a1.edges.iter().all(|&e| !r.a2.contains(e) && !r.b.contains(e)));
        assert!(edges_connected(&lat, &r.b));
        assert!(r.separation >= 2);
        validate_sites(&lat, &r).unwrap();
    }

    #[test]
    fn rejects_bad_geometry() {
        let lat = Lattice::new(6).unwrap();
        assert!(two_patch_regions(&lat, 1, 0).is_err());
        assert!(two_patch_regions(&lat, 3, 1).is_err());
        let lat = Lattice::new(3).unwrap();
        assert!(two_patch_regions(&lat, 1, 1).is_err());
        assert_eq!(largest_fitting_radius(&lat, 1), Some(0));
        validate_sites(&lat, &two_patch_regions(&lat, 0, 1).unwrap()).unwrap();
    }

    #[test]
    fn patches_are_vertex_disjoint() {
        for l in 2..8 {
            let lat = Lattice::new(l).unwrap();
            for r in 0..l {
                if let Ok(reg) = two_patch_regions(&lat, r, 1) {
                    let v1 = reg.a1.vertices(&lat);
                    assert!(reg.a2.vertices(&lat).iter().all(|v| !v1.contains(v)), "L={l} r={r}");
                }
            }
        }
    }
}
