//! Local systems of truncated DGAs over finite ordered simplicial complexes:
//! a fiber per simplex and restriction morphisms to codimension-one faces,
//! with global sections, pullbacks, fiber products and cohomology with local
//! coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::One;

use crate::cdga::{cohomology, same_algebra, tensor, tensor_morphism, DGMorphism, GradedCohomology, TruncatedDGA};
use crate::error::{Error, Result};
use crate::exactlin::{inverse, q, zero_vec, QMatrix, QVector, Rational, Subspace};
use crate::gluing::{fiber_product, FiberProductDGA};
use crate::par;
use crate::polyforms::{forms_dga, ComplexForms, FormSpace, SimplicialForm};
use crate::simplicial::{face, Simplex, SimplicialComplexK, SimplicialMap};

/// Position of `s` in the order of [`SimplicialComplexK::all_simplices`].
pub fn flat_index(base: &SimplicialComplexK, s: &[usize]) -> usize {
    let d = s.len() - 1;
    (0..d).map(|j| base.count(j)).sum::<usize>() + base.index_of(s).expect("simplex of the base")
}

#[derive(Clone, Debug)]
pub struct FiniteLocalSystem {
    base: SimplicialComplexK,
    fibers: Vec<Vec<Arc<TruncatedDGA>>>,
    /// `faces[d][j][i]`: restriction from simplex `j` of dimension `d` to its
    /// `i`-th face.
    faces: Vec<Vec<Vec<DGMorphism>>>,
}

/// A failed functoriality or morphism check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub simplex: Simplex,
    /// The face index, and for composition checks the second face index.
    pub faces: (usize, Option<usize>),
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FiniteLocalSystem {
    /// Checks shapes: one fiber per simplex, all of one cutoff, and face maps
    /// running between the right fibers.
    pub fn new(base: SimplicialComplexK, fibers: Vec<Vec<Arc<TruncatedDGA>>>, faces: Vec<Vec<Vec<DGMorphism>>>) -> Result<Self> {
        let dims = base.dim() + 1;
        if fibers.len() != dims || faces.len() != dims {
            return Err(Error::Dimension(format!("expected fibers and faces for {dims} dimensions")));
        }
        let cutoff = fibers[0].first().map(|f| f.cutoff()).unwrap_or(0);
        for d in 0..dims {
            if fibers[d].len() != base.count(d) || faces[d].len() != base.count(d) {
                return Err(Error::Dimension(format!("dimension {d} has {} simplices", base.count(d))));
            }
            for (j, s) in base.simplices(d).iter().enumerate() {
                if fibers[d][j].cutoff() != cutoff {
                    return Err(Error::Input(format!("fiber over {s:?} has cutoff {}, expected {cutoff}", fibers[d][j].cutoff())));
                }
                let expected = if d == 0 { 0 } else { d + 1 };
                if faces[d][j].len() != expected {
                    return Err(Error::Dimension(format!("simplex {s:?} needs {expected} face maps")));
                }
                for (i, m) in faces[d][j].iter().enumerate() {
                    let t = face(s, i);
                    let ft = &fibers[d - 1][base.index_of(&t).expect("faces are present")];
                    if !same_algebra(m.source(), &fibers[d][j]) || !same_algebra(m.target(), ft) || m.top_degree() != cutoff {
                        return Err(Error::Input(format!("face map {i} of {s:?} does not run between the fibers")));
                    }
                }
            }
        }
        Ok(FiniteLocalSystem { base, fibers, faces })
    }

    pub fn base(&self) -> &SimplicialComplexK {
        &self.base
    }

    pub fn cutoff(&self) -> usize {
        self.fibers[0].first().map(|f| f.cutoff()).unwrap_or(0)
    }

    pub fn fiber(&self, s: &[usize]) -> &Arc<TruncatedDGA> {
        &self.fibers[s.len() - 1][self.base.index_of(s).expect("simplex of the base")]
    }

    pub fn face_map(&self, s: &[usize], i: usize) -> &DGMorphism {
        &self.faces[s.len() - 1][self.base.index_of(s).expect("simplex of the base")][i]
    }

    /// Restriction from `s` to its face `t`, composed through codimension-one
    /// faces dropping the highest positions first.
    pub fn restriction(&self, s: &[usize], t: &[usize]) -> Result<DGMorphism> {
        if !t.iter().all(|v| s.contains(v)) || t.is_empty() {
            return Err(Error::Input(format!("{t:?} is not a face of {s:?}")));
        }
        let mut cur: Simplex = s.to_vec();
        let mut m = DGMorphism::identity(self.fiber(s).clone());
        for pos in (0..s.len()).rev() {
            if !t.contains(&s[pos]) {
                m = m.then(self.face_map(&cur, pos))?;
                cur = face(&cur, pos);
            }
        }
        Ok(m)
    }

    /// Face maps are DGA morphisms and `∂_i ∂_j = ∂_{j-1} ∂_i` holds for
    /// `i < j`.
    pub fn validate(&self) -> ValidationReport {
        let simplices: Vec<&Simplex> = self.base.all_simplices().filter(|s| s.len() > 1).collect();
        let found = par::map_slice(&simplices, |s| {
            let mut out = Vec::new();
            let d = s.len() - 1;
            for i in 0..=d {
                if let Err(e) = self.face_map(s, i).validate() {
                    out.push(Violation { simplex: s.to_vec(), faces: (i, None), reason: e.to_string() });
                }
            }
            for j in 0..=d {
                for i in 0..j {
                    if d < 2 {
                        continue;
                    }
                    let left = self.face_map(s, j).then(self.face_map(&face(s, j), i));
                    let right = self.face_map(s, i).then(self.face_map(&face(s, i), j - 1));
                    let agree = matches!((&left, &right), (Ok(l), Ok(r)) if l.matrices() == r.matrices());
                    if !agree {
                        out.push(Violation {
                            simplex: s.to_vec(),
                            faces: (i, Some(j)),
                            reason: "restrictions through the two faces disagree".into(),
                        });
                    }
                }
            }
            out
        });
        ValidationReport { violations: found.into_iter().flatten().collect() }
    }

    /// Every face map is a quasi-isomorphism through `upto`.
    pub fn is_locally_constant(&self, upto: usize) -> Result<bool> {
        let maps: Vec<&DGMorphism> = self.faces.iter().flatten().flatten().collect();
        let ok = par::try_map_range(maps.len(), |i| Ok::<_, Error>(maps[i].is_quasi_iso(upto)?.is_quasi_iso))?;
        Ok(ok.into_iter().all(|b| b))
    }
}

/// The degreewise limit of a system: compatible families `(x_σ)`.
#[derive(Clone, Debug)]
pub struct GlobalSections {
    system: FiniteLocalSystem,
    offsets: Vec<Vec<usize>>,
    spaces: Vec<Subspace>,
    diff: Vec<QMatrix>,
}

fn section_spaces(e: &FiniteLocalSystem, top: usize) -> (Vec<Vec<usize>>, Vec<Subspace>) {
    let simplices: Vec<&Simplex> = e.base.all_simplices().collect();
    let offsets: Vec<Vec<usize>> = (0..=top)
        .map(|k| {
            let mut acc = 0;
            let mut off: Vec<usize> = simplices
                .iter()
                .map(|s| {
                    let o = acc;
                    acc += e.fiber(s).dim(k);
                    o
                })
                .collect();
            off.push(acc);
            off
        })
        .collect();
    let spaces = par::map_range(top + 1, |k| {
        let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
        for (si, s) in simplices.iter().enumerate() {
            for i in 0..(if s.len() > 1 { s.len() } else { 0 }) {
                let fi = flat_index(&e.base, &face(s, i));
                let m = e.face_map(s, i).matrix(k);
                for r in 0..m.rows() {
                    let mut row: Vec<(usize, Rational)> =
                        m.sparse_row(r).iter().map(|(c, x)| (offsets[k][si] + c, x.clone())).collect();
                    row.push((offsets[k][fi] + r, q(-1)));
                    rows.push(row);
                }
            }
        }
        let mut a = QMatrix::zeros(rows.len(), offsets[k][simplices.len()]);
        for (r, row) in rows.into_iter().enumerate() {
            for (c, x) in row {
                a.set(r, c, a.get(r, c) + x);
            }
        }
        Subspace::kernel(&a)
    });
    (offsets, spaces)
}

/// Global sections in degrees `0..=upto + 1`, so their cohomology is
/// available through `upto`.
pub fn global_sections(e: &FiniteLocalSystem, upto: usize) -> Result<GlobalSections> {
    let top = upto + 1;
    if e.cutoff() < top {
        return Err(Error::CutoffTooSmall { needed: top, context: format!("global sections through degree {upto}") });
    }
    let (offsets, spaces) = section_spaces(e, top);
    let mut gs = GlobalSections { system: e.clone(), offsets, spaces, diff: Vec::new() };
    gs.diff = par::try_map_range(top, |k| {
        let cols = gs.spaces[k]
            .basis()
            .iter()
            .map(|v| {
                let dv = gs.ambient_d(k, v)?;
                gs.spaces[k + 1].coords(&dv).ok_or_else(|| Error::Input(format!("sections not closed under d in degree {k}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QMatrix::from_columns(gs.spaces[k + 1].dim(), &cols))
    })?;
    Ok(gs)
}

impl GlobalSections {
    pub fn system(&self) -> &FiniteLocalSystem {
        &self.system
    }

    /// Highest degree present; cohomology is available below it.
    pub fn top(&self) -> usize {
        self.spaces.len() - 1
    }

    pub fn dim(&self, k: usize) -> usize {
        self.spaces[k].dim()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(Subspace::dim).collect()
    }

    pub fn space(&self, k: usize) -> &Subspace {
        &self.spaces[k]
    }

    /// Differential from degree `k` in section coordinates.
    pub fn d_matrix(&self, k: usize) -> &QMatrix {
        &self.diff[k]
    }

    pub fn d_matrices(&self) -> &[QMatrix] {
        &self.diff
    }

    fn blocks<'a>(&self, k: usize, v: &'a [Rational]) -> Vec<&'a [Rational]> {
        let off = &self.offsets[k];
        (0..off.len() - 1).map(|si| &v[off[si]..off[si + 1]]).collect()
    }

    fn ambient_d(&self, k: usize, v: &[Rational]) -> Result<QVector> {
        let mut out = Vec::with_capacity(self.offsets[k + 1].last().copied().unwrap_or(0));
        for (s, b) in self.system.base.all_simplices().zip(self.blocks(k, v)) {
            out.extend(self.system.fiber(s).apply_d(k, b)?);
        }
        Ok(out)
    }

    fn ambient_mul(&self, i: usize, a: &[Rational], j: usize, b: &[Rational]) -> Result<QVector> {
        let mut out = Vec::new();
        for ((s, x), y) in self.system.base.all_simplices().zip(self.blocks(i, a)).zip(self.blocks(j, b)) {
            out.extend(self.system.fiber(s).multiply(i, x, j, y)?);
        }
        Ok(out)
    }

    /// The family `(x_σ)` of a section as one ambient vector, simplices in
    /// the base order.
    pub fn vector(&self, k: usize, coords: &[Rational]) -> QVector {
        self.spaces[k].vector(coords)
    }

    /// Component over `s` of the section with coordinates `coords`.
    pub fn component(&self, k: usize, coords: &[Rational], s: &[usize]) -> QVector {
        let si = flat_index(&self.system.base, s);
        self.vector(k, coords)[self.offsets[k][si]..self.offsets[k][si + 1]].to_vec()
    }

    /// Section coordinates of a family, or `None` if it is not compatible.
    pub fn coords(&self, k: usize, family: &[Rational]) -> Option<QVector> {
        self.spaces[k].coords(family)
    }

    pub fn offsets(&self, k: usize) -> &[usize] {
        &self.offsets[k]
    }

    /// Product of sections (coordinates in, coordinates out).
    pub fn multiply(&self, i: usize, a: &[Rational], j: usize, b: &[Rational]) -> Result<QVector> {
        if i + j > self.top() {
            return Err(Error::CutoffTooSmall { needed: i + j, context: "product of sections".into() });
        }
        let p = self.ambient_mul(i, &self.vector(i, a), j, &self.vector(j, b))?;
        self.coords(i + j, &p).ok_or_else(|| Error::Input("product of sections is not a section".into()))
    }

    /// Dimensions of the cohomology of the sections in degrees `0..top`.
    pub fn cohomology_dims(&self) -> Vec<usize> {
        (0..self.top())
            .map(|k| {
                let z = self.dim(k) - self.diff[k].rank();
                let b = if k > 0 { self.diff[k - 1].rank() } else { 0 };
                z - b
            })
            .collect()
    }

    /// The sections as a truncated DGA with cutoff [`top`](Self::top).
    pub fn to_dga(&self) -> Result<TruncatedDGA> {
        let mut unit = Vec::new();
        for s in self.system.base.all_simplices() {
            unit.extend(self.system.fiber(s).unit().iter().cloned());
        }
        TruncatedDGA::from_subspaces(
            self.spaces.clone(),
            &unit,
            None,
            |k, v| self.ambient_d(k, v),
            |i, a, j, b| self.ambient_mul(i, a, j, b),
        )
    }
}

/// `(E^u)_σ = E_{u(σ)}`; degenerate faces restrict by the identity.
pub fn pullback(e: &FiniteLocalSystem, source: &SimplicialComplexK, u: &SimplicialMap) -> Result<FiniteLocalSystem> {
    let u = SimplicialMap::new(source, &e.base, u.vertex_map().to_vec())?;
    let dims = source.dim() + 1;
    let mut fibers = vec![Vec::new(); dims];
    let mut faces = vec![Vec::new(); dims];
    for d in 0..dims {
        for s in source.simplices(d) {
            let (img, pos) = u.image(s);
            fibers[d].push(e.fiber(&img).clone());
            let maps = if d == 0 {
                Vec::new()
            } else {
                (0..=d)
                    .map(|i| {
                        let (fimg, _) = u.image(&face(s, i));
                        if fimg.len() == img.len() {
                            DGMorphism::identity(e.fiber(&img).clone())
                        } else {
                            e.face_map(&img, pos[i]).clone()
                        }
                    })
                    .collect()
            };
            faces[d].push(maps);
        }
    }
    FiniteLocalSystem::new(source.clone(), fibers, faces)
}

/// A morphism of local systems over a common base: a DGA morphism per
/// simplex commuting with the face maps.
#[derive(Clone, Debug)]
pub struct SystemMorphism {
    source: FiniteLocalSystem,
    target: FiniteLocalSystem,
    maps: Vec<Vec<DGMorphism>>,
}

impl SystemMorphism {
    pub fn new(source: FiniteLocalSystem, target: FiniteLocalSystem, maps: Vec<Vec<DGMorphism>>) -> Result<Self> {
        if source.base != target.base {
            return Err(Error::Input("system morphisms need a common base".into()));
        }
        for (d, layer) in maps.iter().enumerate() {
            if layer.len() != source.base.count(d) {
                return Err(Error::Dimension(format!("morphism needs one map per {d}-simplex")));
            }
            for (m, s) in layer.iter().zip(source.base.simplices(d)) {
                if !same_algebra(m.source(), source.fiber(s)) || !same_algebra(m.target(), target.fiber(s)) {
                    return Err(Error::Input(format!("map over {s:?} does not run between the fibers")));
                }
            }
        }
        if maps.len() != source.base.dim() + 1 {
            return Err(Error::Dimension("morphism needs maps in every dimension".into()));
        }
        Ok(SystemMorphism { source, target, maps })
    }

    pub fn source(&self) -> &FiniteLocalSystem {
        &self.source
    }

    pub fn target(&self) -> &FiniteLocalSystem {
        &self.target
    }

    pub fn map(&self, s: &[usize]) -> &DGMorphism {
        &self.maps[s.len() - 1][self.source.base.index_of(s).expect("simplex of the base")]
    }

    /// Each map is a DGA morphism and every naturality square commutes.
    pub fn validate(&self) -> ValidationReport {
        let simplices: Vec<&Simplex> = self.source.base.all_simplices().collect();
        let found = par::map_slice(&simplices, |s| {
            let mut out = Vec::new();
            if let Err(e) = self.map(s).validate() {
                out.push(Violation { simplex: s.to_vec(), faces: (0, None), reason: e.to_string() });
            }
            for i in 0..(if s.len() > 1 { s.len() } else { 0 }) {
                let a = self.map(s).then(self.target.face_map(s, i));
                let b = self.source.face_map(s, i).then(self.map(&face(s, i)));
                if !matches!((&a, &b), (Ok(x), Ok(y)) if x.matrices() == y.matrices()) {
                    out.push(Violation { simplex: s.to_vec(), faces: (i, None), reason: "naturality square fails".into() });
                }
            }
            out
        });
        ValidationReport { violations: found.into_iter().flatten().collect() }
    }

    /// Induced map on global sections, in section coordinates.
    pub fn on_sections(&self, src: &GlobalSections, dst: &GlobalSections) -> Result<Vec<QMatrix>> {
        let top = src.top().min(dst.top());
        (0..=top)
            .map(|k| {
                let cols = (0..src.dim(k))
                    .map(|c| {
                        let v = src.spaces[k].basis()[c].clone();
                        let mut img = Vec::new();
                        for (s, b) in self.source.base.all_simplices().zip(src.blocks(k, &v)) {
                            img.extend(self.map(s).apply(k, b));
                        }
                        dst.coords(k, &img).ok_or_else(|| Error::Input("image family is not a section".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(QMatrix::from_columns(dst.dim(k), &cols))
            })
            .collect()
    }
}

pub fn pullback_morphism(m: &SystemMorphism, source: &SimplicialComplexK, u: &SimplicialMap) -> Result<SystemMorphism> {
    let s = pullback(&m.source, source, u)?;
    let t = pullback(&m.target, source, u)?;
    let maps = (0..=source.dim())
        .map(|d| source.simplices(d).iter().map(|x| m.map(&u.image(x).0).clone()).collect())
        .collect();
    SystemMorphism::new(s, t, maps)
}

/// Objectwise fiber product of `f: E₁ → E₀` and `g: E₂ → E₀`, with cutoff
/// `upto + 1`.
#[derive(Clone, Debug)]
pub struct FiberProductSystem {
    system: FiniteLocalSystem,
    pieces: Vec<Vec<FiberProductDGA>>,
}

impl FiberProductSystem {
    pub fn system(&self) -> &FiniteLocalSystem {
        &self.system
    }

    pub fn piece(&self, s: &[usize]) -> &FiberProductDGA {
        &self.pieces[s.len() - 1][self.system.base.index_of(s).expect("simplex of the base")]
    }
}

pub fn fiber_product_system(f: &SystemMorphism, g: &SystemMorphism, upto: usize) -> Result<FiberProductSystem> {
    let base = f.source.base.clone();
    if g.source.base != base {
        return Err(Error::Input("fiber product legs need a common base".into()));
    }
    for s in base.all_simplices() {
        if !same_algebra(f.target.fiber(s), g.target.fiber(s)) {
            return Err(Error::Input(format!("legs have different targets over {s:?}")));
        }
        let m = f.map(s);
        if let Some(k) = (0..=(upto + 1).min(m.top_degree())).find(|&k| m.matrix(k).rank() != m.target().dim(k)) {
            return Err(Error::Precondition(format!("first leg is not surjective over {s:?} in degree {k}")));
        }
    }
    let simplices: Vec<&Simplex> = base.all_simplices().collect();
    let flat = par::try_map_range(simplices.len(), |i| fiber_product(f.map(simplices[i]), g.map(simplices[i]), upto))?;
    let mut pieces: Vec<Vec<FiberProductDGA>> = vec![Vec::new(); base.dim() + 1];
    for (s, p) in simplices.iter().zip(flat) {
        pieces[s.len() - 1].push(p);
    }
    let piece = |s: &[usize]| &pieces[s.len() - 1][base.index_of(s).expect("simplex")];
    let n = upto + 1;
    let faces = (0..=base.dim())
        .map(|d| {
            base.simplices(d)
                .iter()
                .map(|s| {
                    if d == 0 {
                        return Ok(Vec::new());
                    }
                    (0..=d)
                        .map(|i| {
                            let t = face(s, i);
                            let (ps, pt) = (piece(s), piece(&t));
                            let (r1, r2) = (f.source.face_map(s, i), g.source.face_map(s, i));
                            let maps = (0..=n)
                                .map(|k| {
                                    let cols = (0..ps.carrier().dim(k))
                                        .map(|c| {
                                            let mut e = zero_vec(ps.carrier().dim(k));
                                            e[c] = Rational::one();
                                            let (a, b) = ps.components(k, &e);
                                            pt.element(k, &r1.apply(k, &a), &r2.apply(k, &b))
                                                .ok_or_else(|| Error::Input(format!("restriction of {s:?} leaves the fiber product")))
                                        })
                                        .collect::<Result<Vec<_>>>()?;
                                    Ok(QMatrix::from_columns(pt.carrier().dim(k), &cols))
                                })
                                .collect::<Result<Vec<_>>>()?;
                            DGMorphism::new(ps.carrier().clone(), pt.carrier().clone(), maps)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let fibers = (0..=base.dim()).map(|d| pieces[d].iter().map(|p| p.carrier().clone()).collect()).collect();
    let system = FiniteLocalSystem::new(base, fibers, faces)?;
    Ok(FiberProductSystem { system, pieces })
}

/// Morphism of fiber-product systems induced by maps on the outer legs of a
/// morphism of triples; `(a, b) ↦ (m₁ a, m₂ b)`.
pub fn fiber_product_morphism(
    src: &FiberProductSystem,
    dst: &FiberProductSystem,
    m1: &SystemMorphism,
    m2: &SystemMorphism,
) -> Result<SystemMorphism> {
    let base = src.system.base.clone();
    let maps = (0..=base.dim())
        .map(|d| {
            base.simplices(d)
                .iter()
                .map(|s| {
                    let (ps, pd) = (src.piece(s), dst.piece(s));
                    let n = ps.carrier().cutoff().min(pd.carrier().cutoff());
                    let mats = (0..=n)
                        .map(|k| {
                            let cols = (0..ps.carrier().dim(k))
                                .map(|c| {
                                    let mut e = zero_vec(ps.carrier().dim(k));
                                    e[c] = Rational::one();
                                    let (a, b) = ps.components(k, &e);
                                    pd.element(k, &m1.map(s).apply(k, &a), &m2.map(s).apply(k, &b))
                                        .ok_or_else(|| Error::Input(format!("triple maps do not commute with the legs over {s:?}")))
                                })
                                .collect::<Result<Vec<_>>>()?;
                            Ok(QMatrix::from_columns(pd.carrier().dim(k), &cols))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    DGMorphism::new(ps.carrier().clone(), pd.carrier().clone(), mats)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SystemMorphism::new(src.system.clone(), dst.system.clone(), maps)
}

/// Graded vector spaces on vertices with isomorphisms along edges. The map
/// stored for the edge `a < b` in degree `q` runs from the space at `b` to
/// the space at `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCoefficients {
    base: SimplicialComplexK,
    dims: Vec<Vec<usize>>,
    transport: BTreeMap<(usize, usize), Vec<QMatrix>>,
}

impl LocalCoefficients {
    /// `dims[v][q]` for every vertex, and an invertible matrix per edge and
    /// degree.
    pub fn new(base: SimplicialComplexK, dims: Vec<Vec<usize>>, transport: BTreeMap<(usize, usize), Vec<QMatrix>>) -> Result<Self> {
        let qn = dims.first().map_or(0, Vec::len);
        if dims.len() != base.nvertices() || dims.iter().any(|d| d.len() != qn) {
            return Err(Error::Dimension("coefficient dimensions must be given for every vertex and degree".into()));
        }
        for e in base.simplices(1) {
            let key = (e[0], e[1]);
            let mats = transport.get(&key).ok_or_else(|| Error::Input(format!("missing transport on edge {e:?}")))?;
            if mats.len() != qn {
                return Err(Error::Dimension(format!("edge {e:?} needs {qn} degree maps")));
            }
            for (qd, m) in mats.iter().enumerate() {
                if m.rows() != dims[e[0]][qd] || m.cols() != dims[e[1]][qd] || inverse(m)?.is_none() {
                    return Err(Error::Input(format!("transport on edge {e:?} in degree {qd} is not an isomorphism")));
                }
            }
        }
        Ok(LocalCoefficients { base, dims, transport })
    }

    /// Trivial coefficients with the given dimensions in each degree.
    pub fn constant(base: SimplicialComplexK, dims_q: Vec<usize>) -> Self {
        let dims = vec![dims_q.clone(); base.nvertices()];
        let transport =
            base.simplices(1).iter().map(|e| ((e[0], e[1]), dims_q.iter().map(|&n| QMatrix::identity(n)).collect())).collect();
        LocalCoefficients { base, dims, transport }
    }

    pub fn base(&self) -> &SimplicialComplexK {
        &self.base
    }

    /// Highest coefficient degree present.
    pub fn degrees(&self) -> usize {
        self.dims.first().map_or(0, Vec::len)
    }

    pub fn dim(&self, v: usize, qd: usize) -> usize {
        self.dims[v].get(qd).copied().unwrap_or(0)
    }

    pub fn transport(&self, a: usize, b: usize, qd: usize) -> &QMatrix {
        &self.transport[&(a, b)][qd]
    }

    /// `T_{ab} T_{bc} = T_{ac}` on every 2-simplex.
    pub fn check_cocycle(&self) -> Result<()> {
        for s in self.base.simplices(2) {
            for qd in 0..self.degrees() {
                let lhs = self.transport(s[0], s[1], qd).mul(self.transport(s[1], s[2], qd));
                if lhs != *self.transport(s[0], s[2], qd) {
                    return Err(Error::Input(format!("cocycle condition fails on {s:?} in degree {qd}")));
                }
            }
        }
        Ok(())
    }

    /// Offsets of the per-simplex blocks of `C^p(K; H^q)`.
    fn cochain_offsets(&self, p: usize, qd: usize) -> Vec<usize> {
        let mut acc = 0;
        let mut off: Vec<usize> = self
            .base
            .simplices(p)
            .iter()
            .map(|s| {
                let o = acc;
                acc += self.dim(s[0], qd);
                o
            })
            .collect();
        off.push(acc);
        off
    }

    /// Twisted coboundary `C^p(K; H^q) → C^{p+1}(K; H^q)`:
    /// `(δc)(σ) = T_{σ₀σ₁} c(∂₀σ) + Σ_{i≥1} (-1)^i c(∂_iσ)`.
    pub fn twisted_coboundary(&self, p: usize, qd: usize) -> QMatrix {
        let src = self.cochain_offsets(p, qd);
        let tgt = self.cochain_offsets(p + 1, qd);
        let mut m = QMatrix::zeros(*tgt.last().unwrap(), *src.last().unwrap());
        for (r, s) in self.base.simplices(p + 1).iter().enumerate() {
            for i in 0..s.len() {
                let c = self.base.index_of(&face(s, i)).expect("faces are present");
                let block = if i == 0 {
                    self.transport(s[0], s[1], qd).clone()
                } else {
                    QMatrix::identity(self.dim(s[0], qd)).scale(&if i % 2 == 0 { Rational::one() } else { q(-1) })
                };
                for row in 0..block.rows() {
                    for (col, x) in block.sparse_row(row) {
                        let (rr, cc) = (tgt[r] + row, src[c] + col);
                        m.set(rr, cc, m.get(rr, cc) + x);
                    }
                }
            }
        }
        m
    }

    pub fn cochain_dim(&self, p: usize, qd: usize) -> usize {
        *self.cochain_offsets(p, qd).last().unwrap()
    }
}

/// `dims[p][q] = dim H^p(K; H^q)` for `p <= p_max`, `q <= q_max`.
pub fn h_local_coefficients(c: &LocalCoefficients, p_max: usize, q_max: usize) -> Result<Vec<Vec<usize>>> {
    c.check_cocycle()?;
    if q_max >= c.degrees() {
        return Err(Error::Input(format!("coefficients are only given through degree {}", c.degrees().saturating_sub(1))));
    }
    Ok((0..=p_max)
        .map(|p| {
            (0..=q_max)
                .map(|qd| {
                    let n = c.cochain_dim(p, qd);
                    let z = n - if n > 0 { c.twisted_coboundary(p, qd).rank() } else { 0 };
                    let b = if p > 0 { c.twisted_coboundary(p - 1, qd).rank() } else { 0 };
                    z - b
                })
                .collect()
        })
        .collect())
}

/// Fiber cohomology at the vertices, transported along edges by
/// `H(r_{e→a}) ∘ H(r_{e→b})^{-1}` for the edge `e = {a < b}`.
pub fn cohomology_local_system(e: &FiniteLocalSystem, upto: usize) -> Result<LocalCoefficients> {
    if !e.is_locally_constant(upto)? {
        return Err(Error::Precondition("cohomology with local coefficients needs a locally constant system".into()));
    }
    let base = e.base.clone();
    let hv: Vec<GradedCohomology> =
        par::try_map_range(base.count(0), |i| cohomology(e.fiber(&base.simplices(0)[i]), upto))?;
    let vertex_pos = |v: usize| base.index_of(&[v]).expect("vertex of the base");
    let mut dims = vec![vec![0; upto + 1]; base.nvertices()];
    for s in base.simplices(0) {
        dims[s[0]] = hv[vertex_pos(s[0])].dims();
    }
    let mut transport = BTreeMap::new();
    for s in base.simplices(1) {
        let he = cohomology(e.fiber(s), upto)?;
        let to_a = e.face_map(s, 1).induced_map_with(&he, &hv[vertex_pos(s[0])])?;
        let to_b = e.face_map(s, 0).induced_map_with(&he, &hv[vertex_pos(s[1])])?;
        let mats = (0..=upto)
            .map(|k| {
                let inv = inverse(&to_b[k])?.ok_or_else(|| Error::Precondition(format!("edge {s:?} is not a quasi-isomorphism")))?;
                Ok(to_a[k].mul(&inv))
            })
            .collect::<Result<Vec<_>>>()?;
        transport.insert((s[0], s[1]), mats);
    }
    LocalCoefficients::new(base, dims, transport)
}

/// Outcome of [`is_extendable`]: the first simplex and degree where
/// restriction to the boundary is not onto.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendabilityReport {
    pub extendable: bool,
    pub witness: Option<(Simplex, usize)>,
    pub simplices_checked: usize,
}

/// For each simplex `σ` of positive dimension, pulls the system back to
/// `∂Δ[dim σ]` and checks by rank that `E_σ → Γ(∂σ)` is onto in every
/// degree.
pub fn is_extendable(e: &FiniteLocalSystem) -> Result<ExtendabilityReport> {
    let simplices: Vec<&Simplex> = e.base.all_simplices().filter(|s| s.len() > 1).collect();
    let n = e.cutoff();
    let results = par::try_map_range(simplices.len(), |idx| {
        let s = simplices[idx];
        let d = s.len() - 1;
        let bd = SimplicialComplexK::boundary_of_simplex(d);
        let u = SimplicialMap::new(&bd, &e.base, s.clone())?;
        let pulled = pullback(e, &bd, &u)?;
        let (_, spaces) = section_spaces(&pulled, n);
        for k in 0..=n {
            let mut cols = Vec::new();
            for c in 0..e.fiber(s).dim(k) {
                let mut x = zero_vec(e.fiber(s).dim(k));
                x[c] = Rational::one();
                let mut fam = Vec::new();
                for t in bd.all_simplices() {
                    let img: Simplex = t.iter().map(|&v| s[v]).collect();
                    fam.extend(e.restriction(s, &img)?.apply(k, &x));
                }
                cols.push(fam);
            }
            let r = QMatrix::from_columns(spaces[k].ambient(), &cols).rank();
            if r != spaces[k].dim() {
                return Ok(Some(k));
            }
        }
        Ok::<_, Error>(None)
    })?;
    let witness = simplices.iter().zip(results).find_map(|(s, r)| r.map(|k| (s.to_vec(), k)));
    Ok(ExtendabilityReport { extendable: witness.is_none(), witness, simplices_checked: simplices.len() })
}

/// Every fiber `F` and every face map the identity.
pub fn constant_system(base: &SimplicialComplexK, fiber: Arc<TruncatedDGA>) -> Result<FiniteLocalSystem> {
    let id = DGMorphism::identity(fiber.clone());
    let fibers = (0..=base.dim()).map(|d| vec![fiber.clone(); base.count(d)]).collect();
    let faces = (0..=base.dim()).map(|d| vec![if d == 0 { Vec::new() } else { vec![id.clone(); d + 1] }; base.count(d)]).collect();
    FiniteLocalSystem::new(base.clone(), fibers, faces)
}

fn face_morphism(src: &Arc<TruncatedDGA>, tgt: &Arc<TruncatedDGA>, n: usize, weight: usize, i: usize) -> Result<DGMorphism> {
    let cutoff = src.cutoff();
    let (fs, ft) = (FormSpace::new(n, weight, cutoff), FormSpace::new(n - 1, weight, cutoff));
    let v: Vec<usize> = (0..=n).filter(|&j| j != i).collect();
    let maps = (0..=cutoff).map(|k| fs.pullback_matrix(&ft, &v, k)).collect::<Result<Vec<_>>>()?;
    DGMorphism::new(src.clone(), tgt.clone(), maps)
}

/// `σ ↦ A(Δ[dim σ]) ⊗ F` with forms of weight at most `weight`. The face map
/// dropping the least vertex of an edge-twisted simplex applies the fiber
/// automorphism given for that edge: the restriction `σ → τ` acts on `F` by
/// the transport from the least vertex of `σ` to that of `τ`.
pub fn forms_system(
    base: &SimplicialComplexK,
    weight: usize,
    fiber: &Arc<TruncatedDGA>,
    twists: &BTreeMap<(usize, usize), DGMorphism>,
) -> Result<FiniteLocalSystem> {
    let cutoff = fiber.cutoff();
    for ((a, b), g) in twists {
        if !base.contains(&[*a, *b]) || !same_algebra(g.source(), fiber) || !same_algebra(g.target(), fiber) {
            return Err(Error::Input(format!("twist on ({a}, {b}) is not a fiber automorphism over an edge")));
        }
    }
    let forms: Vec<Arc<TruncatedDGA>> = (0..=base.dim()).map(|n| Arc::new(forms_dga(n, weight, cutoff))).collect();
    let alg: Vec<Arc<TruncatedDGA>> = forms.iter().map(|f| Arc::new(tensor(f, fiber))).collect();
    let id_f = DGMorphism::identity(fiber.clone());
    let mut faces = vec![Vec::new(); base.dim() + 1];
    faces[0] = vec![Vec::new(); base.count(0)];
    for n in 1..=base.dim() {
        let face_forms: Vec<DGMorphism> =
            (0..=n).map(|i| face_morphism(&forms[n], &forms[n - 1], n, weight, i)).collect::<Result<_>>()?;
        let plain: Vec<DGMorphism> = face_forms
            .iter()
            .map(|fm| tensor_morphism(fm, &id_f, alg[n].clone(), alg[n - 1].clone()))
            .collect::<Result<_>>()?;
        for s in base.simplices(n) {
            let mut maps = plain.clone();
            if let Some(g) = twists.get(&(s[0], s[1])) {
                maps[0] = tensor_morphism(&face_forms[0], g, alg[n].clone(), alg[n - 1].clone())?;
            }
            faces[n].push(maps);
        }
    }
    let fibers = (0..=base.dim()).map(|d| vec![alg[d].clone(); base.count(d)]).collect();
    FiniteLocalSystem::new(base.clone(), fibers, faces)
}

/// `id ⊗ φ` between two systems built by [`forms_system`] with the same
/// base and weight.
pub fn forms_system_morphism(
    src: &FiniteLocalSystem,
    dst: &FiniteLocalSystem,
    weight: usize,
    phi: &DGMorphism,
) -> Result<SystemMorphism> {
    let base = src.base.clone();
    let cutoff = src.cutoff().min(dst.cutoff());
    let maps = (0..=base.dim())
        .map(|n| {
            let id = DGMorphism::identity(Arc::new(forms_dga(n, weight, cutoff)));
            base.simplices(n)
                .iter()
                .map(|s| tensor_morphism(&id, phi, src.fiber(s).clone(), dst.fiber(s).clone()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    SystemMorphism::new(src.clone(), dst.clone(), maps)
}

/// The system `σ ↦ A(p⁻¹(σ))` of truncated forms on the preimages of the
/// simplices of `base` under `p: total → base`.
pub fn projection_forms_system(
    total: &SimplicialComplexK,
    base: &SimplicialComplexK,
    p: &SimplicialMap,
    weight: usize,
    cutoff: usize,
) -> Result<FiniteLocalSystem> {
    let p = SimplicialMap::new(total, base, p.vertex_map().to_vec())?;
    let simplices: Vec<&Simplex> = base.all_simplices().collect();
    let pre = par::try_map_range(simplices.len(), |i| {
        let s = simplices[i];
        let sub = total.full_subcomplex(|v| s.contains(&p.vertex_map()[v]));
        ComplexForms::new(&sub, weight, cutoff)
    })?;
    let arcs: Vec<Arc<TruncatedDGA>> = pre.iter().map(|c| Arc::new(c.dga().clone())).collect();
    let at = |s: &[usize]| flat_index(base, s);
    let mut fibers = vec![Vec::new(); base.dim() + 1];
    let mut faces = vec![Vec::new(); base.dim() + 1];
    for s in &simplices {
        let d = s.len() - 1;
        fibers[d].push(arcs[at(s)].clone());
        let maps = if d == 0 {
            Vec::new()
        } else {
            (0..=d)
                .map(|i| {
                    let t = face(s, i);
                    let mats = (0..=cutoff).map(|k| pre[at(s)].restriction_matrix(&pre[at(&t)], k)).collect::<Result<Vec<_>>>()?;
                    DGMorphism::new(arcs[at(s)].clone(), arcs[at(&t)].clone(), mats)
                })
                .collect::<Result<Vec<_>>>()?
        };
        faces[d].push(maps);
    }
    FiniteLocalSystem::new(base.clone(), fibers, faces)
}

/// `σ ↦ A(Δ[dim σ]) ⊗ ∧z` with `D z = ω|σ` for a closed form `ω` of even
/// degree `2m` on the base, so `|z| = 2m - 1`. Forms multiplying `1` have
/// weight at most `weight + w(ω)` and forms multiplying `z` at most
/// `weight`, which keeps `D` inside the truncation.
pub fn odd_sphere_bundle(omega: &SimplicialForm, weight: usize, cutoff: usize) -> Result<FiniteLocalSystem> {
    let base = omega.complex().clone();
    let mut odeg = None;
    let mut wo = 0;
    for s in base.all_simplices() {
        let f = omega.form(s).expect("form on every simplex");
        if !f.d().is_zero() {
            return Err(Error::Input(format!("form is not closed on {s:?}")));
        }
        if let Some(k) = f.form_degree() {
            if odeg.is_some_and(|o| o != k) {
                return Err(Error::Input("form is not homogeneous".into()));
            }
            odeg = Some(k);
            wo = wo.max(f.weight());
        }
    }
    let od = odeg.ok_or_else(|| Error::Input("twisting form is zero".into()))?;
    if od == 0 || od % 2 == 1 {
        return Err(Error::Input(format!("twisting form must have positive even degree, got {od}")));
    }
    let zd = od - 1;
    let spaces: Vec<(FormSpace, FormSpace)> =
        (0..=base.dim()).map(|n| (FormSpace::new(n, weight + wo, cutoff), FormSpace::new(n, weight, cutoff))).collect();
    let split = |n: usize, k: usize| spaces[n].0.dim(k);
    let fiber_of = |s: &Simplex| -> Result<Arc<TruncatedDGA>> {
        let n = s.len() - 1;
        let (lo, hi) = (&spaces[n].0, &spaces[n].1);
        let w = omega.form(s).expect("form on every simplex");
        let zdim = |k: usize| if k >= zd { hi.dim(k - zd) } else { 0 };
        let labels: Vec<Vec<String>> = (0..=cutoff)
            .map(|k| {
                let mut l: Vec<String> = (0..lo.dim(k)).map(|i| format!("a{k}_{i}")).collect();
                l.extend((0..zdim(k)).map(|i| format!("a{}_{i}*z", k - zd)));
                l
            })
            .collect();
        let diff = (0..cutoff)
            .map(|k| {
                let mut cols = Vec::new();
                for i in 0..lo.dim(k) {
                    let mut v = lo.to_vector(k + 1, &lo.basis_form(k, i).d())?;
                    v.extend(zero_vec(zdim(k + 1)));
                    cols.push(v);
                }
                for i in 0..zdim(k) {
                    let a = hi.basis_form(k - zd, i);
                    let sg = if (k - zd) % 2 == 0 { Rational::one() } else { q(-1) };
                    let mut v = lo.to_vector(k + 1, &a.wedge(w).scale(&sg))?;
                    let dz = if k + 1 - zd <= cutoff { hi.to_vector(k + 1 - zd, &a.d())? } else { Vec::new() };
                    v.extend(dz);
                    cols.push(v);
                }
                Ok(QMatrix::from_columns(lo.dim(k + 1) + zdim(k + 1), &cols))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut unit = zero_vec(lo.dim(0) + zdim(0));
        unit[0] = Rational::one();
        let alg = TruncatedDGA::from_fn(labels, unit, diff, |i, a, j, b| {
            let (za, zb) = (a >= split(n, i), b >= split(n, j));
            let form = |deg: usize, idx: usize, is_z: bool| {
                if is_z {
                    hi.basis_form(deg - zd, idx - split(n, deg))
                } else {
                    lo.basis_form(deg, idx)
                }
            };
            let k = i + j;
            let (fa, fb) = (form(i, a, za), form(j, b, zb));
            let conv = |r: Result<QVector>| match r {
                Ok(v) => Ok(Some(v)),
                Err(Error::OutsideTruncation(_)) => Ok(None),
                Err(e) => Err(e),
            };
            match (za, zb) {
                (true, true) => Ok(Some(zero_vec(split(n, k) + zdim(k)))),
                (false, false) => conv(lo.to_vector(k, &fa.wedge(&fb)).map(|mut v| {
                    v.extend(zero_vec(zdim(k)));
                    v
                })),
                (false, true) => conv(hi.to_vector(k - zd, &fa.wedge(&fb)).map(|v| {
                    let mut out = zero_vec(split(n, k));
                    out.extend(v);
                    out
                })),
                (true, false) => {
                    let sg = if zd * j % 2 == 1 { q(-1) } else { Rational::one() };
                    conv(hi.to_vector(k - zd, &fa.wedge(&fb).scale(&sg)).map(|v| {
                        let mut out = zero_vec(split(n, k));
                        out.extend(v);
                        out
                    }))
                }
            }
        })?;
        Ok(Arc::new(alg))
    };
    let simplices: Vec<&Simplex> = base.all_simplices().collect();
    let arcs = par::try_map_range(simplices.len(), |i| fiber_of(simplices[i]))?;
    let at = |s: &[usize]| flat_index(&base, s);
    let mut fibers = vec![Vec::new(); base.dim() + 1];
    let mut faces = vec![Vec::new(); base.dim() + 1];
    for s in &simplices {
        let n = s.len() - 1;
        fibers[n].push(arcs[at(s)].clone());
        let maps = if n == 0 {
            Vec::new()
        } else {
            (0..=n)
                .map(|i| {
                    let v: Vec<usize> = (0..=n).filter(|&j| j != i).collect();
                    let t = face(s, i);
                    let mats = (0..=cutoff)
                        .map(|k| {
                            let top = spaces[n].0.pullback_matrix(&spaces[n - 1].0, &v, k)?;
                            if k < zd {
                                return Ok(top);
                            }
                            let bottom = spaces[n].1.pullback_matrix(&spaces[n - 1].1, &v, k - zd)?;
                            Ok(block_diag(&top, &bottom))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    DGMorphism::new(arcs[at(s)].clone(), arcs[at(&t)].clone(), mats)
                })
                .collect::<Result<Vec<_>>>()?
        };
        faces[n].push(maps);
    }
    FiniteLocalSystem::new(base, fibers, faces)
}

fn block_diag(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let top = a.hstack(&QMatrix::zeros(a.rows(), b.cols()));
    let bottom = QMatrix::zeros(b.rows(), a.cols()).hstack(b);
    top.vstack(&bottom)
}

/// Product of edge transports along a closed walk of vertices, as a map on
/// the coefficients at the first vertex in degree `qd`.
pub fn holonomy(c: &LocalCoefficients, walk: &[usize], qd: usize) -> Result<QMatrix> {
    let start = walk.first().copied().ok_or_else(|| Error::Input("empty walk".into()))?;
    let mut acc = QMatrix::identity(c.dim(start, qd));
    for w in walk.windows(2) {
        let (u, v) = (w[0], w[1]);
        let step = if u < v {
            inverse(c.transport(u, v, qd))?.expect("transports are invertible")
        } else {
            c.transport(v, u, qd).clone()
        };
        acc = step.mul(&acc);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::{point, quotient_by_monomials, FreeCDGA};
    use crate::graded::Monomial;
    use crate::polyforms::PolyForm;

    fn dual_numbers(deg: u32, cutoff: usize) -> Arc<TruncatedDGA> {
        Arc::new(
            quotient_by_monomials(&FreeCDGA::parse(&[("x", deg)], &[]).unwrap(), &[Monomial::from_exponents(vec![2])], cutoff)
                .unwrap(),
        )
    }

    fn negate_x(f: &Arc<TruncatedDGA>) -> DGMorphism {
        let maps = (0..=f.cutoff())
            .map(|k| {
                let mut m = QMatrix::identity(f.dim(k));
                if k > 0 && f.dim(k) == 1 {
                    m.set(0, 0, q(-1));
                }
                m
            })
            .collect();
        DGMorphism::new(f.clone(), f.clone(), maps).unwrap()
    }

    fn twisted_circle(weight: usize) -> FiniteLocalSystem {
        let f = dual_numbers(2, 4);
        let twists = BTreeMap::from([((0, 2), negate_x(&f))]);
        forms_system(&SimplicialComplexK::cycle(3), weight, &f, &twists).unwrap()
    }

    #[test]
    fn constant_and_broken_systems() {
        let c3 = SimplicialComplexK::cycle(3);
        let e = constant_system(&c3, dual_numbers(2, 4)).unwrap();
        assert!(e.validate().ok());
        assert!(e.is_locally_constant(3).unwrap());
        // a restriction that is linear and a cochain map but not multiplicative
        let f = dual_numbers(2, 4);
        let mut faces = e.faces.clone();
        let mut maps: Vec<QMatrix> = (0..=4).map(|k| QMatrix::identity(f.dim(k))).collect();
        maps[0] = QMatrix::from_i64(&[&[2]]);
        faces[1][0][1] = DGMorphism::new(f.clone(), f.clone(), maps).unwrap();
        let bad = FiniteLocalSystem::new(c3.clone(), e.fibers.clone(), faces).unwrap();
        let rep = bad.validate();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].simplex, vec![0, 1]);
    }

    #[test]
    fn twisted_circle_coefficients() {
        let e = twisted_circle(1);
        assert!(e.validate().ok());
        let lc = cohomology_local_system(&e, 3).unwrap();
        assert_eq!(*lc.transport(0, 2, 2), QMatrix::from_i64(&[&[-1]]));
        assert_eq!(*lc.transport(0, 1, 2), QMatrix::identity(1));
        let h = h_local_coefficients(&lc, 1, 2).unwrap();
        assert_eq!(h, vec![vec![1, 0, 0], vec![1, 0, 0]]);
        let gs = global_sections(&e, 3).unwrap();
        assert_eq!(gs.cohomology_dims(), vec![1, 1, 0, 0]);
    }

    #[test]
    fn trivial_coefficients_by_brute_force() {
        let c3 = SimplicialComplexK::cycle(3);
        assert_eq!(h_local_coefficients(&LocalCoefficients::constant(c3, vec![1]), 1, 0).unwrap(), vec![vec![1], vec![1]]);
        let s2 = SimplicialComplexK::boundary_of_simplex(3);
        assert_eq!(h_local_coefficients(&LocalCoefficients::constant(s2, vec![1]), 2, 0).unwrap(), vec![vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn pullbacks() {
        let e = twisted_circle(1);
        let c3 = SimplicialComplexK::cycle(3);
        let same = pullback(&e, &c3, &SimplicialMap::identity(&c3)).unwrap();
        assert_eq!(same.fibers, e.fibers);
        let edges = [vec![0, 2], vec![2, 4], vec![1, 4], vec![1, 3], vec![3, 5], vec![0, 5]];
        let c6 = SimplicialComplexK::from_simplices(6, &edges).unwrap();
        let u = SimplicialMap::new(&c6, &c3, vec![0, 0, 1, 1, 2, 2]).unwrap();
        let up = pullback(&e, &c6, &u).unwrap();
        assert!(up.validate().ok());
        let base_h = holonomy(&cohomology_local_system(&e, 3).unwrap(), &[0, 1, 2, 0], 2).unwrap();
        assert_eq!(base_h, QMatrix::from_i64(&[&[-1]]));
        let lifted = holonomy(&cohomology_local_system(&up, 3).unwrap(), &[0, 2, 4, 1, 3, 5, 0], 2).unwrap();
        assert_eq!(lifted, QMatrix::identity(1));
        let pt = SimplicialComplexK::full_simplex(0);
        let c = pullback(&e, &c3, &SimplicialMap::new(&c3, &c3, vec![1, 1, 1]).unwrap()).unwrap();
        assert!(c.fibers.iter().flatten().all(|f| Arc::ptr_eq(f, e.fiber(&[1]))));
        assert!(pullback(&e, &pt, &SimplicialMap::identity(&pt)).is_ok());
        assert!(pullback(&e, &c3, &SimplicialMap::identity(&SimplicialComplexK::cycle(4))).is_err());
    }

    #[test]
    fn extendability() {
        let e = twisted_circle(1);
        assert!(is_extendable(&e).unwrap().extendable);
        let rigid = constant_system(&SimplicialComplexK::full_simplex(1), Arc::new(point(2))).unwrap();
        let rep = is_extendable(&rigid).unwrap();
        assert!(!rep.extendable);
        assert_eq!(rep.witness, Some((vec![0, 1], 0)));
    }

    #[test]
    fn constant_sections_over_a_simplex() {
        let f = dual_numbers(2, 4);
        let e = constant_system(&SimplicialComplexK::full_simplex(2), f.clone()).unwrap();
        assert_eq!(global_sections(&e, 3).unwrap().dims(), f.dims());
    }

    #[test]
    fn sphere_bundle_is_locally_constant() {
        let s2 = SimplicialComplexK::boundary_of_simplex(3);
        let omega = SimplicialForm::from_fn(s2, |s| {
            if s == &vec![0, 1, 2] {
                PolyForm::dt(2, 1).wedge(&PolyForm::dt(2, 2))
            } else {
                PolyForm::zero(s.len() - 1)
            }
        })
        .unwrap();
        let e = odd_sphere_bundle(&omega, 2, 5).unwrap();
        assert!(e.validate().ok());
        assert!(e.is_locally_constant(4).unwrap());
        let gs = global_sections(&e, 4).unwrap();
        assert_eq!(gs.cohomology_dims(), vec![1, 0, 0, 1, 0]);
    }

    #[test]
    fn identity_fiber_product_system() {
        let e = twisted_circle(1);
        let id: Vec<Vec<DGMorphism>> = (0..=1)
            .map(|d| e.base().simplices(d).iter().map(|s| DGMorphism::identity(e.fiber(s).clone())).collect())
            .collect();
        let m = SystemMorphism::new(e.clone(), e.clone(), id).unwrap();
        assert!(m.validate().ok());
        let p = fiber_product_system(&m, &m, 2).unwrap();
        assert!(p.system().validate().ok());
        assert!(p.system().is_locally_constant(2).unwrap());
        assert_eq!(p.system().fiber(&[0, 1]).dims(), e.fiber(&[0, 1]).with_cutoff(3).unwrap().dims());
    }
}
