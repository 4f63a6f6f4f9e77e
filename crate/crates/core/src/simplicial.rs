//! Finite ordered simplicial complexes and order-preserving simplicial maps.
//!
//! Vertices are `0..n` in their global order; a simplex is the sorted list of
//! its vertices, and face `i` omits the `i`-th vertex.

use std::collections::{BTreeSet, HashMap};

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{q, QMatrix, Rational};

pub type Simplex = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplexK {
    nvertices: usize,
    simplices: Vec<Vec<Simplex>>,
    index: HashMap<Simplex, usize>,
}

/// `simplex` with its `i`-th vertex removed.
pub fn face(simplex: &[usize], i: usize) -> Simplex {
    let mut f = simplex.to_vec();
    f.remove(i);
    f
}

impl SimplicialComplexK {
    /// Downward closure of the given simplices. Each listed simplex must have
    /// distinct vertices below `nvertices`; order within a list is ignored.
    pub fn from_simplices(nvertices: usize, generators: &[Vec<usize>]) -> Result<Self> {
        Self::closure(nvertices, generators, true)
    }

    fn closure(nvertices: usize, generators: &[Vec<usize>], all_vertices: bool) -> Result<Self> {
        let mut all: BTreeSet<(usize, Simplex)> =
            if all_vertices { (0..nvertices).map(|v| (0, vec![v])).collect() } else { BTreeSet::new() };
        for g in generators {
            let mut s = g.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != g.len() || s.is_empty() {
                return Err(Error::Input(format!("simplex {g:?} has repeated vertices or is empty")));
            }
            if s.iter().any(|&v| v >= nvertices) {
                return Err(Error::Input(format!("simplex {g:?} uses a vertex outside 0..{nvertices}")));
            }
            let n = s.len();
            for mask in 1u64..(1u64 << n) {
                let sub: Simplex = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| s[b]).collect();
                all.insert((sub.len() - 1, sub));
            }
        }
        let dim = all.iter().map(|(d, _)| *d).max().unwrap_or(0);
        let mut simplices = vec![Vec::new(); dim + 1];
        for (d, s) in all {
            simplices[d].push(s);
        }
        if nvertices == 0 {
            simplices = vec![Vec::new()];
        }
        let index = simplices
            .iter()
            .flat_map(|layer| layer.iter().enumerate().map(|(i, s)| (s.clone(), i)))
            .collect();
        Ok(SimplicialComplexK { nvertices, simplices, index })
    }

    /// `Δ[n]`.
    pub fn full_simplex(n: usize) -> Self {
        Self::from_simplices(n + 1, &[(0..=n).collect()]).expect("valid simplex")
    }

    /// `∂Δ[n]` for `n >= 1`.
    pub fn boundary_of_simplex(n: usize) -> Self {
        let top: Simplex = (0..=n).collect();
        let faces: Vec<Simplex> = (0..=n).map(|i| face(&top, i)).collect();
        Self::from_simplices(n + 1, &faces).expect("valid boundary")
    }

    /// The `m`-vertex cycle (`m >= 3`) with edges `{i, i+1}` and `{0, m-1}`.
    pub fn cycle(m: usize) -> Self {
        let edges: Vec<Simplex> = (0..m).map(|i| vec![i, (i + 1) % m]).collect();
        Self::from_simplices(m, &edges).expect("valid cycle")
    }

    /// Staircase triangulation of `A × B`: vertex `(i, j)` has index
    /// `i * |B| + j`, and simplices are chains increasing weakly in both
    /// coordinates whose projections are simplices.
    pub fn product(a: &Self, b: &Self) -> Self {
        let nb = b.nvertices();
        let mut gens = Vec::new();
        for sa in a.simplices.iter().flatten() {
            for sb in b.simplices.iter().flatten() {
                staircase_chains(sa, sb, &mut gens);
            }
        }
        let flat: Vec<Simplex> = gens.into_iter().map(|c| c.into_iter().map(|(i, j)| i * nb + j).collect()).collect();
        Self::from_simplices(a.nvertices() * nb, &flat).expect("valid product")
    }

    pub fn nvertices(&self) -> usize {
        self.nvertices
    }

    pub fn dim(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn all_simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().flatten()
    }

    /// Position of a sorted simplex within its dimension.
    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index.contains_key(s)
    }

    /// Whether every simplex of `self` is a simplex of `other` (same vertex
    /// numbering).
    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        self.nvertices <= other.nvertices && self.all_simplices().all(|s| other.contains(s))
    }

    /// Subcomplex of simplices whose vertices all satisfy `keep`, with the
    /// vertex numbering preserved (vertices outside it are absent, not
    /// isolated).
    pub fn full_subcomplex(&self, keep: impl Fn(usize) -> bool) -> Self {
        let gens: Vec<Simplex> = self.all_simplices().filter(|s| s.iter().all(|&v| keep(v))).cloned().collect();
        Self::closure(self.nvertices, &gens, false).expect("subcomplex of a valid complex")
    }

    /// Simplicial coboundary `C^k → C^{k+1}`, `(δf)(σ) = Σ (-1)^i f(∂_i σ)`.
    pub fn coboundary(&self, k: usize) -> QMatrix {
        let mut m = QMatrix::zeros(self.count(k + 1), self.count(k));
        for (r, s) in self.simplices(k + 1).iter().enumerate() {
            for i in 0..s.len() {
                let c = self.index_of(&face(s, i)).expect("faces are present");
                let v = if i % 2 == 0 { Rational::one() } else { q(-1) };
                m.set(r, c, m.get(r, c) + v);
            }
        }
        m
    }

    /// Betti numbers over the rationals in degrees `0..=dim`.
    pub fn betti_numbers(&self) -> Vec<usize> {
        (0..=self.dim())
            .map(|k| {
                let z = self.count(k) - if k < self.dim() { self.coboundary(k).rank() } else { 0 };
                let b = if k > 0 { self.coboundary(k - 1).rank() } else { 0 };
                z - b
            })
            .collect()
    }
}

fn staircase_chains(sa: &[usize], sb: &[usize], out: &mut Vec<Vec<(usize, usize)>>) {
    // maximal chains through the grid sa × sb that start at the corner and
    // visit every row and column
    fn walk(sa: &[usize], sb: &[usize], i: usize, j: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        cur.push((sa[i], sb[j]));
        if i + 1 == sa.len() && j + 1 == sb.len() {
            out.push(cur.clone());
        }
        if i + 1 < sa.len() {
            walk(sa, sb, i + 1, j, cur, out);
        }
        if j + 1 < sb.len() {
            walk(sa, sb, i, j + 1, cur, out);
        }
        cur.pop();
    }
    walk(sa, sb, 0, 0, &mut Vec::new(), out);
}

/// A vertex map that is weakly increasing on every simplex of the source and
/// sends simplices to simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMap {
    vertex_map: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(source: &SimplicialComplexK, target: &SimplicialComplexK, vertex_map: Vec<usize>) -> Result<Self> {
        if vertex_map.len() != source.nvertices() {
            return Err(Error::Input(format!(
                "vertex map has {} entries for {} vertices",
                vertex_map.len(),
                source.nvertices()
            )));
        }
        for s in source.all_simplices() {
            let img: Vec<usize> = s.iter().map(|&v| vertex_map[v]).collect();
            if img.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Input(format!("vertex map reverses the order on simplex {s:?}")));
            }
            let mut set = img.clone();
            set.dedup();
            if !target.contains(&set) {
                return Err(Error::Input(format!("image of {s:?} is not a simplex")));
            }
        }
        Ok(SimplicialMap { vertex_map })
    }

    pub fn identity(k: &SimplicialComplexK) -> Self {
        SimplicialMap { vertex_map: (0..k.nvertices()).collect() }
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    /// The image simplex of `s` (duplicates removed) together with the
    /// monotone map `[dim s] → [dim image]` as positions.
    pub fn image(&self, s: &[usize]) -> (Simplex, Vec<usize>) {
        let img: Vec<usize> = s.iter().map(|&v| self.vertex_map[v]).collect();
        let mut set = img.clone();
        set.dedup();
        let pos = img.iter().map(|v| set.binary_search(v).expect("image vertex")).collect();
        (set, pos)
    }
}

/// Sum of a cochain's values, handy for Stokes-type checks.
pub fn total(values: &[Rational]) -> Rational {
    values.iter().fold(Rational::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_complexes() {
        let d2 = SimplicialComplexK::full_simplex(2);
        assert_eq!((d2.count(0), d2.count(1), d2.count(2)), (3, 3, 1));
        assert_eq!(d2.betti_numbers(), vec![1, 0, 0]);
        assert_eq!(SimplicialComplexK::cycle(3).betti_numbers(), vec![1, 1]);
        assert_eq!(SimplicialComplexK::boundary_of_simplex(3).betti_numbers(), vec![1, 0, 1]);
    }

    #[test]
    fn product_of_simplex_and_circle() {
        let x = SimplicialComplexK::product(&SimplicialComplexK::full_simplex(1), &SimplicialComplexK::cycle(3));
        assert_eq!(x.dim(), 2);
        assert_eq!(x.betti_numbers(), vec![1, 1, 0]);
        let t = SimplicialComplexK::product(&SimplicialComplexK::cycle(3), &SimplicialComplexK::cycle(3));
        assert_eq!(t.betti_numbers(), vec![1, 2, 1]);
    }

    #[test]
    fn simplicial_map_checks() {
        let c6 = SimplicialComplexK::cycle(6);
        let c3 = SimplicialComplexK::cycle(3);
        assert!(SimplicialMap::new(&c6, &c3, vec![0, 1, 2, 0, 1, 2]).is_err());
        let pt = SimplicialComplexK::full_simplex(0);
        assert!(SimplicialMap::new(&c3, &pt, vec![0, 0, 0]).is_ok());
    }
}
