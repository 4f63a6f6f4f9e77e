//! Spectral sequences of finite filtered cochain complexes, computed from the
//! `Z/B` tower by exact linear algebra, and the skeletal filtration on global
//! sections of a local system.
//!
//! Entries are indexed by filtration degree `p` and total degree `k`; the
//! complementary degree is `q = k - p`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactlin::{QMatrix, QVector, Quotient, Rational, Subspace};
use crate::localsys::{
    cohomology_local_system, global_sections, h_local_coefficients, FiniteLocalSystem, GlobalSections, SystemMorphism,
};
use crate::par;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    dims: Vec<usize>,
    d: Vec<QMatrix>,
}

impl CochainComplex {
    /// `d[k]` maps degree `k` to `k + 1`; there is one fewer map than
    /// degrees, so the top degree has no outgoing differential.
    pub fn new(dims: Vec<usize>, d: Vec<QMatrix>) -> Result<Self> {
        if dims.is_empty() || d.len() + 1 != dims.len() {
            return Err(Error::Dimension(format!("{} degrees need {} differentials", dims.len(), dims.len().saturating_sub(1))));
        }
        for (k, m) in d.iter().enumerate() {
            if m.rows() != dims[k + 1] || m.cols() != dims[k] {
                return Err(Error::Dimension(format!("differential out of degree {k} has the wrong shape")));
            }
        }
        for k in 0..d.len().saturating_sub(1) {
            if !d[k + 1].mul(&d[k]).is_zero() {
                return Err(Error::Input(format!("d^2 != 0 out of degree {k}")));
            }
        }
        Ok(CochainComplex { dims, d })
    }

    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, k: usize) -> usize {
        self.dims[k]
    }

    pub fn d(&self, k: usize) -> &QMatrix {
        &self.d[k]
    }

    /// Cohomology dimensions in degrees `0..top`.
    pub fn cohomology_dims(&self) -> Vec<usize> {
        (0..self.top())
            .map(|k| self.dims[k] - self.d[k].rank() - if k > 0 { self.d[k - 1].rank() } else { 0 })
            .collect()
    }
}

pub type ProductFn = Arc<dyn Fn(usize, &[Rational], usize, &[Rational]) -> Result<QVector> + Send + Sync>;

/// A cochain complex with a finite decreasing filtration `F^0 ⊇ F^1 ⊇ …`;
/// `filtration[p][k]` is `F^p` in degree `k`, and `F^p = 0` beyond the
/// listed steps.
#[derive(Clone)]
pub struct FilteredComplex {
    complex: CochainComplex,
    filtration: Vec<Vec<Subspace>>,
    zero: Vec<Subspace>,
    product: Option<ProductFn>,
}

impl std::fmt::Debug for FilteredComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FilteredComplex")
            .field("complex", &self.complex)
            .field("filtration", &self.filtration)
            .field("product", &self.product.is_some())
            .finish()
    }
}

impl FilteredComplex {
    pub fn new(complex: CochainComplex, filtration: Vec<Vec<Subspace>>) -> Result<Self> {
        let top = complex.top();
        if filtration.is_empty() {
            return Err(Error::Input("filtration needs at least F^0".into()));
        }
        for (p, layer) in filtration.iter().enumerate() {
            if layer.len() != top + 1 || layer.iter().enumerate().any(|(k, s)| s.ambient() != complex.dim(k)) {
                return Err(Error::Dimension(format!("F^{p} has the wrong shape")));
            }
        }
        for k in 0..=top {
            if filtration[0][k].dim() != complex.dim(k) {
                return Err(Error::Input(format!("F^0 is not everything in degree {k}")));
            }
        }
        for p in 0..filtration.len() {
            for k in 0..=top {
                if p + 1 < filtration.len() && !filtration[p + 1][k].is_subspace_of(&filtration[p][k]) {
                    return Err(Error::Input(format!("F^{} is not inside F^{p} in degree {k}", p + 1)));
                }
                if k < top && !filtration[p][k].map(complex.d(k)).is_subspace_of(&filtration[p][k + 1]) {
                    return Err(Error::Input(format!("d does not preserve F^{p} out of degree {k}")));
                }
            }
        }
        let zero = (0..=top).map(|k| Subspace::zero(complex.dim(k))).collect();
        Ok(FilteredComplex { complex, filtration, zero, product: None })
    }

    /// One-step filtration: `F^0` everything, `F^1 = 0`.
    pub fn trivial(complex: CochainComplex) -> Self {
        let f0 = (0..=complex.top()).map(|k| Subspace::full(complex.dim(k))).collect();
        Self::new(complex, vec![f0]).expect("trivial filtration is valid")
    }

    pub fn with_product(mut self, product: ProductFn) -> Self {
        self.product = Some(product);
        self
    }

    pub fn complex(&self) -> &CochainComplex {
        &self.complex
    }

    /// Number of filtration steps; `F^p = 0` for `p >= length`.
    pub fn length(&self) -> usize {
        self.filtration.len()
    }

    pub fn f(&self, p: i64, k: usize) -> &Subspace {
        if p <= 0 {
            &self.filtration[0][k]
        } else if p as usize >= self.filtration.len() {
            &self.zero[k]
        } else {
            &self.filtration[p as usize][k]
        }
    }

    /// Largest `p` with `x` in `F^p`; `None` for `x = 0`.
    pub fn filtration_degree(&self, k: usize, x: &[Rational]) -> Option<usize> {
        (0..self.length()).rev().find(|&p| self.filtration[p][k].contains(x)).filter(|_| !crate::exactlin::is_zero_vec(x))
    }

    pub fn multiply(&self, i: usize, a: &[Rational], j: usize, b: &[Rational]) -> Option<Result<QVector>> {
        self.product.as_ref().map(|f| f(i, a, j, b))
    }
}

/// One page: `E_r^{p,k} = Z_r^{p,k} / (Z_{r-1}^{p+1,k} + d Z_{r-1}^{p-r+1,k-1})`
/// with `Z_r^{p,k} = F^p ∩ d^{-1} F^{p+r}`, for `k` below the top degree.
#[derive(Clone, Debug)]
pub struct Page {
    pub r: usize,
    entries: Vec<Vec<Quotient>>,
    /// `d[p][k]: E^{p,k} → E^{p+r,k+1}`, present when `k + 1` has an entry.
    d: Vec<Vec<Option<QMatrix>>>,
}

impl Page {
    pub fn length(&self) -> usize {
        self.entries.len()
    }

    /// Number of total degrees with entries.
    pub fn degrees(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn entry(&self, p: usize, k: usize) -> Option<&Quotient> {
        self.entries.get(p).and_then(|l| l.get(k))
    }

    pub fn dim_pk(&self, p: usize, k: usize) -> usize {
        self.entry(p, k).map_or(0, Quotient::dim)
    }

    /// `dim E^{p,q}`.
    pub fn dim(&self, p: usize, q: i64) -> usize {
        let k = p as i64 + q;
        if k < 0 {
            0
        } else {
            self.dim_pk(p, k as usize)
        }
    }

    pub fn d(&self, p: usize, k: usize) -> Option<&QMatrix> {
        self.d.get(p).and_then(|l| l.get(k)).and_then(Option::as_ref)
    }

    /// `table[p][q]` for `p <= p_max`, `q <= q_max`.
    pub fn table(&self, p_max: usize, q_max: usize) -> Vec<Vec<usize>> {
        (0..=p_max).map(|p| (0..=q_max).map(|q| self.dim(p, q as i64)).collect()).collect()
    }

    /// `Σ_p dim E^{p,k-p}`.
    pub fn total(&self, k: usize) -> usize {
        (0..self.length()).map(|p| self.dim_pk(p, k)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SpectralSequence {
    pub pages: Vec<Page>,
    /// `Z_∞^p / (Z_∞^{p+1} + B_∞^p)` with `Z_∞ = ker d`, `B_∞ = im d`.
    pub infinity: Page,
}

impl SpectralSequence {
    pub fn page(&self, r: usize) -> &Page {
        &self.pages[r]
    }

    /// Checks `d_r² = 0` and `E_{r+1} = ker d_r / im d_r` dimensionwise
    /// wherever both differentials at an entry are known.
    pub fn check_tower(&self) -> Result<()> {
        for (r, page) in self.pages.iter().enumerate() {
            let len = page.length() as i64;
            for p in 0..page.length() {
                for k in 0..page.degrees() {
                    if let (Some(a), Some(b)) = (page.d(p, k), page.d(p + r, k + 1)) {
                        if !b.mul(a).is_zero() {
                            return Err(Error::Input(format!("d_{r}^2 != 0 at ({p}, {k})")));
                        }
                    }
                    let Some(next) = self.pages.get(r + 1) else { continue };
                    let out_rank = match page.d(p, k) {
                        Some(m) => m.rank(),
                        None if p + r >= page.length() => 0,
                        None => continue,
                    };
                    let pin = p as i64 - r as i64;
                    let in_rank = if pin < 0 || k == 0 || pin >= len {
                        0
                    } else {
                        page.d(pin as usize, k - 1).map_or(0, QMatrix::rank)
                    };
                    if next.dim_pk(p, k) + out_rank + in_rank != page.dim_pk(p, k) {
                        return Err(Error::Input(format!("E_{} at ({p}, {k}) is not the cohomology of E_{r}", r + 1)));
                    }
                }
            }
        }
        Ok(())
    }
}

struct Tower<'a> {
    fc: &'a FilteredComplex,
    /// `pre[p][k] = d^{-1} F^p` in degree `k`.
    pre: Vec<Vec<Subspace>>,
}

impl<'a> Tower<'a> {
    fn new(fc: &'a FilteredComplex) -> Self {
        let top = fc.complex.top();
        let pre = (0..=fc.length())
            .map(|p| par::map_range(top, |k| Subspace::full(fc.complex.dim(k)).preimage_within(fc.complex.d(k), fc.f(p as i64, k + 1))))
            .collect();
        Tower { fc, pre }
    }

    /// `Z_r^{p,k}` for any integer `p`, given the level `r` table for
    /// `0 <= p < length` (`r >= 1`).
    fn z<'b>(&'b self, level: Option<&'b [Vec<Subspace>]>, r: i64, p: i64, k: usize) -> &'b Subspace {
        let len = self.fc.length() as i64;
        if p >= len {
            return &self.fc.zero[k];
        }
        if r <= 0 {
            return self.fc.f(p, k);
        }
        if p < 0 {
            let t = (p + r).max(0);
            return if t >= len { &self.pre[len as usize][k] } else { &self.pre[t as usize][k] };
        }
        &level.expect("level table")[p as usize][k]
    }

    fn level(&self, r: i64) -> Vec<Vec<Subspace>> {
        let top = self.fc.complex.top();
        let len = self.fc.length();
        let cells: Vec<(usize, usize)> = (0..len).flat_map(|p| (0..top).map(move |k| (p, k))).collect();
        let flat = par::map_range(cells.len(), |i| {
            let (p, k) = cells[i];
            self.fc.f(p as i64, k).preimage_within(self.fc.complex.d(k), self.fc.f(p as i64 + r, k + 1))
        });
        let mut out: Vec<Vec<Subspace>> = vec![Vec::with_capacity(top); len];
        for ((p, _), s) in cells.into_iter().zip(flat) {
            out[p].push(s);
        }
        out
    }

    fn page(&self, r: usize, cur: Option<&[Vec<Subspace>]>, prev: Option<&[Vec<Subspace>]>) -> Result<Page> {
        let top = self.fc.complex.top();
        let len = self.fc.length();
        let ri = r as i64;
        let cells: Vec<(usize, usize)> = (0..len).flat_map(|p| (0..top).map(move |k| (p, k))).collect();
        let quotients = par::try_map_range(cells.len(), |i| {
            let (p, k) = cells[i];
            let pi = p as i64;
            let zr = if r == 0 { self.fc.f(pi, k).clone() } else { self.z(cur, ri, pi, k).clone() };
            let mut d_part = if r == 0 { self.fc.f(pi + 1, k).clone() } else { self.z(prev, ri - 1, pi + 1, k).clone() };
            if k > 0 && r > 0 {
                let src = self.z(prev, ri - 1, pi - ri + 1, k - 1);
                d_part = d_part.sum(&src.map(self.fc.complex.d(k - 1)));
            }
            Quotient::new(zr, &d_part)
        })?;
        let mut entries: Vec<Vec<Quotient>> = vec![Vec::with_capacity(top); len];
        for ((p, _), qt) in cells.iter().zip(quotients) {
            entries[*p].push(qt);
        }
        let d = self.differentials(&entries, r)?;
        Ok(Page { r, entries, d })
    }

    fn differentials(&self, entries: &[Vec<Quotient>], r: usize) -> Result<Vec<Vec<Option<QMatrix>>>> {
        let top = self.fc.complex.top();
        let len = entries.len();
        let cells: Vec<(usize, usize)> = (0..len).flat_map(|p| (0..top).map(move |k| (p, k))).collect();
        let flat = par::try_map_range(cells.len(), |i| {
            let (p, k) = cells[i];
            if k + 1 >= top {
                return Ok(None);
            }
            let src = &entries[p][k];
            let Some(tgt) = entries.get(p + r).map(|l| &l[k + 1]) else {
                return Ok(Some(QMatrix::zeros(0, src.dim())));
            };
            let cols = src
                .reps()
                .iter()
                .map(|x| {
                    tgt.class_of(&self.fc.complex.d(k).mul_vec(x))
                        .ok_or_else(|| Error::Input(format!("d_{r} leaves Z at ({}, {})", p + r, k + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(QMatrix::from_columns(tgt.dim(), &cols)))
        })?;
        let mut out: Vec<Vec<Option<QMatrix>>> = vec![Vec::with_capacity(top); len];
        for ((p, _), m) in cells.into_iter().zip(flat) {
            out[p].push(m);
        }
        Ok(out)
    }

    fn infinity(&self) -> Result<Page> {
        let top = self.fc.complex.top();
        let len = self.fc.length();
        let cells: Vec<(usize, usize)> = (0..len).flat_map(|p| (0..top).map(move |k| (p, k))).collect();
        let kernels: Vec<Subspace> = par::map_range(top, |k| Subspace::kernel(self.fc.complex.d(k)));
        let images: Vec<Subspace> = par::map_range(top, |k| {
            if k == 0 {
                Subspace::zero(self.fc.complex.dim(0))
            } else {
                Subspace::image(self.fc.complex.d(k - 1))
            }
        });
        let flat = par::try_map_range(cells.len(), |i| {
            let (p, k) = cells[i];
            let z = self.fc.f(p as i64, k).intersection(&kernels[k]);
            let z1 = self.fc.f(p as i64 + 1, k).intersection(&kernels[k]);
            let b = self.fc.f(p as i64, k).intersection(&images[k]);
            Quotient::new(z, &z1.sum(&b))
        })?;
        let mut entries: Vec<Vec<Quotient>> = vec![Vec::with_capacity(top); len];
        for ((p, _), qt) in cells.into_iter().zip(flat) {
            entries[p].push(qt);
        }
        let d = entries.iter().map(|l| l.iter().map(|e| Some(QMatrix::zeros(0, e.dim()))).collect()).collect();
        Ok(Page { r: usize::MAX, entries, d })
    }
}

/// Pages `E_0, …, E_{r_max}` and `E_∞`.
pub fn pages(fc: &FilteredComplex, r_max: usize) -> Result<SpectralSequence> {
    let tower = Tower::new(fc);
    let mut out = Vec::with_capacity(r_max + 1);
    let mut prev: Option<Vec<Vec<Subspace>>> = None;
    for r in 0..=r_max {
        let cur = if r >= 1 { Some(tower.level(r as i64)) } else { None };
        out.push(tower.page(r, cur.as_deref(), prev.as_deref())?);
        prev = cur;
    }
    Ok(SpectralSequence { pages: out, infinity: tower.infinity()? })
}

/// Sections of `e` filtered by vanishing on skeleta: `F^p` is the sections
/// whose components vanish on every simplex of dimension below `p`.
pub fn skeletal_filtration(e: &FiniteLocalSystem, upto: usize) -> Result<FilteredComplex> {
    Ok(skeletal(e, upto)?.0)
}

fn skeletal(e: &FiniteLocalSystem, upto: usize) -> Result<(FilteredComplex, Arc<GlobalSections>)> {
    let gs = Arc::new(global_sections(e, upto)?);
    let complex = CochainComplex::new(gs.dims(), gs.d_matrices().to_vec())?;
    let base = e.base();
    let len = base.dim() + 1;
    let filtration = (0..len)
        .map(|p| {
            par::map_range(gs.top() + 1, |k| {
                // ambient coordinates belonging to simplices of dimension < p
                let cut = gs.offsets(k)[(0..p).map(|j| base.count(j)).sum::<usize>()];
                let rows: Vec<QVector> =
                    gs.space(k).basis().iter().map(|b| b[..cut].to_vec()).collect::<Vec<_>>();
                let m = QMatrix::from_columns(cut, &rows);
                Subspace::kernel(&m)
            })
        })
        .collect();
    let g2 = gs.clone();
    let fc = FilteredComplex::new(complex, filtration)?.with_product(Arc::new(move |i, a, j, b| g2.multiply(i, a, j, b)));
    Ok((fc, gs))
}

/// Both sides of `E_2^{p,q} ≅ H^p(K; H^q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E2Report {
    pub spectral: Vec<Vec<usize>>,
    pub local: Vec<Vec<usize>>,
    /// Bidegrees `(p, q)` where the two sides differ.
    pub mismatches: Vec<(usize, usize)>,
}

impl E2Report {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// `E_2` of the skeletal filtration against cohomology of the base with
/// coefficients in the fiber cohomology. Needs fibers with cutoff at least
/// `p_max + q_max + 1`.
pub fn e2_check(e: &FiniteLocalSystem, p_max: usize, q_max: usize) -> Result<E2Report> {
    if !e.is_locally_constant(q_max)? {
        return Err(Error::Precondition("system is not locally constant".into()));
    }
    let coeffs = cohomology_local_system(e, q_max)?;
    let local = h_local_coefficients(&coeffs, p_max, q_max)?;
    let fc = skeletal_filtration(e, p_max + q_max)?;
    let ss = pages(&fc, 2)?;
    let spectral = ss.page(2).table(p_max, q_max);
    let mismatches = (0..=p_max)
        .flat_map(|p| (0..=q_max).map(move |q| (p, q)))
        .filter(|&(p, q)| spectral[p][q] != local[p][q])
        .collect();
    Ok(E2Report { spectral, local, mismatches })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EInftyReport {
    /// `Σ_p dim E_∞^{p,k-p}` for `k <= upto`.
    pub spectral_totals: Vec<usize>,
    pub target: Vec<usize>,
    /// Products of permanent-cycle representatives that were checked.
    pub product_checks: usize,
    /// `(p, k, p', k')` pairs whose product fell below filtration `p + p'`.
    pub product_failures: Vec<(usize, usize, usize, usize)>,
}

impl EInftyReport {
    pub fn passed(&self) -> bool {
        self.spectral_totals == self.target && self.product_failures.is_empty()
    }
}

/// `E_∞` totals against `H(Γ(e))`, and the filtration degree of products of
/// permanent cycles.
pub fn einfty_vs_target(e: &FiniteLocalSystem, upto: usize) -> Result<EInftyReport> {
    let (fc, gs) = skeletal(e, upto)?;
    let ss = pages(&fc, 0)?;
    let einf = &ss.infinity;
    let spectral_totals = (0..=upto).map(|k| einf.total(k)).collect();
    let target = gs.cohomology_dims()[..=upto].to_vec();
    let mut reps: Vec<(usize, usize, QVector)> = Vec::new();
    for p in 0..einf.length() {
        for k in 0..=upto {
            if let Some(qt) = einf.entry(p, k) {
                reps.extend(qt.reps().iter().map(|r| (p, k, r.clone())));
            }
        }
    }
    let pairs: Vec<(usize, usize)> =
        (0..reps.len()).flat_map(|a| (a..reps.len()).map(move |b| (a, b))).filter(|&(a, b)| reps[a].1 + reps[b].1 <= upto).collect();
    let outcomes = par::try_map_range(pairs.len(), |i| {
        let (a, b) = pairs[i];
        let ((p1, k1, x), (p2, k2, y)) = (&reps[a], &reps[b]);
        match fc.multiply(*k1, x, *k2, y) {
            None | Some(Err(Error::OutsideTruncation(_))) => Ok(None),
            Some(Err(e)) => Err(e),
            Some(Ok(z)) => Ok(Some(fc.f((p1 + p2) as i64, k1 + k2).contains(&z).then_some(()).ok_or((*p1, *k1, *p2, *k2)))),
        }
    })?;
    let product_checks = outcomes.iter().filter(|o| o.is_some()).count();
    let product_failures = outcomes.into_iter().flatten().filter_map(|o| o.err()).collect();
    Ok(EInftyReport { spectral_totals, target, product_checks, product_failures })
}

/// Maps induced on every page by a filtered cochain map.
#[derive(Clone, Debug)]
pub struct PagesMorphism {
    pub source: SpectralSequence,
    pub target: SpectralSequence,
    /// `psi[r][(p, k)]`
    pub psi: Vec<BTreeMap<(usize, usize), QMatrix>>,
    /// `Ψ_r d_r = d_r Ψ_r` wherever both differentials are known.
    pub commutes: bool,
    /// `Ψ_{r+1}` agrees with the map `Ψ_r` induces on `d_r`-cohomology.
    pub natural: bool,
}

impl PagesMorphism {
    pub fn map(&self, r: usize, p: usize, k: usize) -> Option<&QMatrix> {
        self.psi.get(r).and_then(|m| m.get(&(p, k)))
    }
}

/// Pages of a filtered cochain map `maps[k]: src^k → dst^k`.
pub fn filtered_map_pages(src: &FilteredComplex, dst: &FilteredComplex, maps: &[QMatrix], r_max: usize) -> Result<PagesMorphism> {
    let top = src.complex.top().min(dst.complex.top());
    if maps.len() < top + 1 {
        return Err(Error::Dimension("filtered map needs a matrix in every degree".into()));
    }
    for k in 0..top {
        if maps[k + 1].mul(src.complex.d(k)) != dst.complex.d(k).mul(&maps[k]) {
            return Err(Error::Input(format!("map does not commute with d out of degree {k}")));
        }
    }
    let len = src.length().max(dst.length());
    for p in 0..len {
        for k in 0..=top {
            if !src.f(p as i64, k).map(&maps[k]).is_subspace_of(dst.f(p as i64, k)) {
                return Err(Error::Input(format!("map does not preserve F^{p} in degree {k}")));
            }
        }
    }
    let (ss, st) = (pages(src, r_max)?, pages(dst, r_max)?);
    let mut psi = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let (ps, pt) = (ss.page(r), st.page(r));
        let mut m = BTreeMap::new();
        for p in 0..ps.length() {
            for k in 0..ps.degrees().min(pt.degrees()) {
                let e = ps.entry(p, k).expect("entry");
                let cols = match pt.entry(p, k) {
                    None => vec![Vec::new(); e.dim()],
                    Some(t) => e
                        .reps()
                        .iter()
                        .map(|x| t.class_of(&maps[k].mul_vec(x)).ok_or_else(|| Error::Input(format!("image leaves Z_{r} at ({p}, {k})"))))
                        .collect::<Result<Vec<_>>>()?,
                };
                m.insert((p, k), QMatrix::from_columns(pt.dim_pk(p, k), &cols));
            }
        }
        psi.push(m);
    }
    let mut commutes = true;
    for (r, m) in psi.iter().enumerate() {
        for (&(p, k), a) in m {
            let (Some(ds), Some(dt)) = (ss.page(r).d(p, k), st.page(r).d(p, k)) else { continue };
            let Some(b) = m.get(&(p + r, k + 1)) else { continue };
            if b.mul(ds) != dt.mul(a) {
                commutes = false;
            }
        }
    }
    let mut natural = true;
    for r in 0..r_max {
        let (ps, pt, ps1, pt1) = (ss.page(r), st.page(r), ss.page(r + 1), st.page(r + 1));
        for (&(p, k), next) in &psi[r + 1] {
            let (Some(es1), Some(et1), Some(es), Some(et)) = (ps1.entry(p, k), pt1.entry(p, k), ps.entry(p, k), pt.entry(p, k)) else {
                continue;
            };
            let pin = p as i64 - r as i64;
            let boundaries = if pin >= 0 && k > 0 {
                pt.d(pin as usize, k - 1).map(Subspace::image)
            } else {
                None
            }
            .unwrap_or_else(|| Subspace::zero(et.dim()));
            for (c, y) in es1.reps().iter().enumerate() {
                let via_r = psi[r][&(p, k)].mul_vec(&es.class_of(y).expect("Z_{r+1} lies in Z_r"));
                let lifted = et1.rep_combination(&next.column(c));
                let via_next = et.class_of(&lifted).expect("Z_{r+1} lies in Z_r");
                if !boundaries.contains(&crate::exactlin::sub_vec(&via_r, &via_next)) {
                    natural = false;
                }
            }
        }
    }
    Ok(PagesMorphism { source: ss, target: st, psi, commutes, natural })
}

/// Pages of the map on skeletal filtrations induced by a morphism of
/// systems over a common base.
pub fn triple_morphism_pages(
    src: &FiniteLocalSystem,
    dst: &FiniteLocalSystem,
    m: &SystemMorphism,
    upto: usize,
    r_max: usize,
) -> Result<PagesMorphism> {
    if src.base() != m.source().base() || dst.base() != m.target().base() {
        return Err(Error::Input("morphism does not run between the given systems".into()));
    }
    let (fs, gs) = skeletal(src, upto)?;
    let (ft, gt) = skeletal(dst, upto)?;
    let maps = m.on_sections(&gs, &gt)?;
    filtered_map_pages(&fs, &ft, &maps, r_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::unit_vec;

    fn circle_cochains() -> CochainComplex {
        // simplicial cochains of the 3-cycle
        let k = crate::simplicial::SimplicialComplexK::cycle(3);
        CochainComplex::new(vec![3, 3], vec![k.coboundary(0)]).unwrap()
    }

    #[test]
    fn trivial_filtration_collapses() {
        let c = circle_cochains();
        let fc = FilteredComplex::trivial(CochainComplex::new(vec![3, 3, 0], vec![c.d(0).clone(), QMatrix::zeros(0, 3)]).unwrap());
        let ss = pages(&fc, 3).unwrap();
        ss.check_tower().unwrap();
        assert_eq!(ss.page(1).table(0, 1), vec![vec![1, 1]]);
        assert_eq!(ss.infinity.table(0, 1), vec![vec![1, 1]]);
    }

    #[test]
    fn rejects_bad_filtration() {
        let c = CochainComplex::new(vec![1, 1], vec![QMatrix::from_i64(&[&[1]])]).unwrap();
        // F^1 containing the source but not the target of d
        let f1 = vec![Subspace::full(1), Subspace::zero(1)];
        assert!(FilteredComplex::new(c, vec![vec![Subspace::full(1), Subspace::full(1)], f1]).is_err());
    }

    #[test]
    fn two_step_filtration_sees_connecting_map() {
        // cone of the identity on Q: degrees 0 and 1, d = 1, with F^1 the
        // degree-1 copy
        let c = CochainComplex::new(vec![1, 1, 0], vec![QMatrix::from_i64(&[&[1]]), QMatrix::zeros(0, 1)]).unwrap();
        let f0 = vec![Subspace::full(1), Subspace::full(1), Subspace::zero(0)];
        let f1 = vec![Subspace::zero(1), Subspace::full(1), Subspace::zero(0)];
        let fc = FilteredComplex::new(c, vec![f0, f1]).unwrap();
        let ss = pages(&fc, 3).unwrap();
        ss.check_tower().unwrap();
        assert_eq!(ss.page(1).dim_pk(0, 0), 1);
        assert_eq!(ss.page(1).dim_pk(1, 1), 1);
        assert_eq!(ss.page(1).d(0, 0).unwrap().rank(), 1);
        assert_eq!(ss.page(2).dim_pk(0, 0), 0);
        let _ = unit_vec(1, 0);
    }

    #[test]
    fn circle_systems_e2() {
        use crate::fixtures::circle_system;
        let plain = circle_system(false, 1, 7).unwrap();
        let rep = e2_check(&plain, 2, 4).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.spectral, vec![vec![1, 0, 1, 0, 0], vec![1, 0, 1, 0, 0], vec![0; 5]]);
        let twisted = circle_system(true, 1, 7).unwrap();
        let rep = e2_check(&twisted, 2, 4).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.spectral, vec![vec![1, 0, 0, 0, 0], vec![1, 0, 0, 0, 0], vec![0; 5]]);
        let inf = einfty_vs_target(&twisted, 4).unwrap();
        assert!(inf.passed(), "{inf:?}");
    }

    #[test]
    fn sphere_bundle_has_nonzero_d2() {
        let e = crate::fixtures::sphere_bundle(2, 5).unwrap();
        let fc = skeletal_filtration(&e, 4).unwrap();
        let ss = pages(&fc, 3).unwrap();
        ss.check_tower().unwrap();
        // z over the base point transgresses to the Euler class
        assert_eq!(ss.page(2).d(0, 1).unwrap().rank(), 1);
        assert_eq!(ss.page(3).table(2, 1), vec![vec![1, 0], vec![0, 0], vec![0, 1]]);
        let inf = einfty_vs_target(&e, 4).unwrap();
        assert!(inf.passed(), "{inf:?}");
        assert_eq!(inf.target, vec![1, 0, 0, 1, 0]);
    }
}
