//! Differential graded algebras: free Sullivan-style presentations, explicit
//! truncated presentations with structure tables, morphisms, cohomology and
//! quasi-isomorphism tests.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{
    is_zero_vec, q, unit_vec, zero_vec, QMatrix, QVector, Quotient, Rational, Subspace,
};
use crate::graded::{Element, FreeGCA, GeneratorSpec, Monomial};
use crate::par;

pub type SparseVec = Vec<(usize, Rational)>;

pub fn to_sparse(v: &[Rational]) -> SparseVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

pub fn from_sparse(n: usize, s: &[(usize, Rational)]) -> QVector {
    let mut v = zero_vec(n);
    for (i, x) in s {
        v[*i] = x.clone();
    }
    v
}

fn sign(odd: bool) -> Rational {
    if odd {
        q(-1)
    } else {
        Rational::one()
    }
}

/// A free graded-commutative algebra with a degree +1 derivation given on
/// generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeCDGA {
    algebra: FreeGCA,
    differential: Vec<Element>,
}

/// A generator whose differential does not square to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DSquaredFailure {
    pub generator: String,
    pub residue: Element,
}

impl FreeCDGA {
    pub fn new(algebra: FreeGCA, differential: Vec<Element>) -> Result<Self> {
        if differential.len() != algebra.ngens() {
            return Err(Error::Input(format!(
                "{} differentials for {} generators",
                differential.len(),
                algebra.ngens()
            )));
        }
        for (g, d) in algebra.generators().iter().zip(&differential) {
            Self::check_generator_differential(&algebra, g, d)?;
        }
        Ok(FreeCDGA { algebra, differential })
    }

    /// Zero differential on the given generators.
    pub fn with_zero_differential(algebra: FreeGCA) -> Self {
        let n = algebra.ngens();
        FreeCDGA { algebra, differential: vec![Element::zero(); n] }
    }

    /// Builds from `(name, degree)` pairs and `(name, expression)` pairs;
    /// generators without an entry get `d = 0`.
    pub fn parse(gens: &[(&str, u32)], diffs: &[(&str, &str)]) -> Result<Self> {
        let alg = FreeGCA::new(gens.iter().map(|(n, d)| GeneratorSpec::new(*n, *d)).collect())?;
        let mut ds = vec![Element::zero(); alg.ngens()];
        for (name, expr) in diffs {
            let i = alg
                .index_of(name)
                .ok_or_else(|| Error::Input(format!("differential given for unknown generator {name}")))?;
            ds[i] = alg.parse_element(expr)?;
        }
        Self::new(alg, ds)
    }

    /// Appends a generator; `d` may only involve earlier generators.
    pub fn push_generator(&mut self, g: GeneratorSpec, d: Element) -> Result<usize> {
        let mut alg = self.algebra.clone();
        let i = alg.push_generator(g)?;
        Self::check_generator_differential(&alg, &alg.generators()[i], &d)?;
        self.algebra = alg;
        self.differential.push(d);
        Ok(i)
    }

    fn check_generator_differential(alg: &FreeGCA, g: &GeneratorSpec, d: &Element) -> Result<()> {
        alg.check_element(d)?;
        if !d.is_zero() && alg.homogeneous_degree(d) != Some(g.degree + 1) {
            return Err(Error::Input(format!("d({}) must be homogeneous of degree {}", g.name, g.degree + 1)));
        }
        Ok(())
    }

    pub fn algebra(&self) -> &FreeGCA {
        &self.algebra
    }

    pub fn generator_differential(&self, i: usize) -> &Element {
        &self.differential[i]
    }

    pub fn differentials(&self) -> &[Element] {
        &self.differential
    }

    /// Extends the generator values by the graded Leibniz rule.
    pub fn d(&self, e: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in e.terms() {
            out = out.add(&self.d_monomial(m).scale(c));
        }
        out
    }

    fn d_monomial(&self, m: &Monomial) -> Element {
        let alg = &self.algebra;
        let exps = m.exponents();
        let mut out = Element::zero();
        let mut prefix_deg = 0u32;
        for (i, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut pre = exps[..i].to_vec();
            pre.push(0);
            let mut post = vec![0; exps.len()];
            post[i + 1..].copy_from_slice(&exps[i + 1..]);
            let mut middle = vec![0; i + 1];
            middle[i] = e - 1;
            let lowered = Element::monomial(Monomial::from_exponents(middle), Rational::from_integer(e.into()));
            let dg = alg.multiply_unchecked(&lowered, &self.differential[i]);
            let left = Element::monomial(Monomial::from_exponents(pre), sign(prefix_deg % 2 == 1));
            let right = Element::monomial(Monomial::from_exponents(post), Rational::one());
            let term = alg.multiply_unchecked(&alg.multiply_unchecked(&left, &dg), &right);
            out = out.add(&term);
            prefix_deg += e * alg.gen_degree(i);
        }
        out
    }

    pub fn check_d_squared(&self) -> std::result::Result<(), DSquaredFailure> {
        for (i, d) in self.differential.iter().enumerate() {
            let dd = self.d(d);
            if !dd.is_zero() {
                return Err(DSquaredFailure { generator: self.algebra.generators()[i].name.clone(), residue: dd });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct MultTable {
    cols: usize,
    entries: Vec<Option<SparseVec>>,
}

/// A DG algebra given by explicit bases in degrees `0..=cutoff`, structure
/// constants for products of total degree at most the cutoff, and
/// differential matrices.
///
/// A product of basis elements may be marked undefined when the true product
/// leaves the truncated space (for instance, polynomial forms above a weight
/// bound); [`multiply`](Self::multiply) reports such products as
/// [`Error::OutsideTruncation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedDGA {
    cutoff: usize,
    labels: Vec<Vec<String>>,
    unit: QVector,
    diff: Vec<QMatrix>,
    mult: Vec<Vec<MultTable>>,
}

impl TruncatedDGA {
    /// `product(i, a, j, b)` returns the product of basis element `a` in
    /// degree `i` with basis element `b` in degree `j`, or `None` if it is
    /// undefined in this truncation. Only pairs with `i + j <= cutoff` are
    /// queried.
    pub fn from_fn<F>(labels: Vec<Vec<String>>, unit: QVector, diff: Vec<QMatrix>, product: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize, usize) -> Result<Option<QVector>> + Sync + Send,
    {
        if labels.is_empty() {
            return Err(Error::Input("an algebra needs at least degree 0".into()));
        }
        let cutoff = labels.len() - 1;
        let dims: Vec<usize> = labels.iter().map(Vec::len).collect();
        if unit.len() != dims[0] || is_zero_vec(&unit) {
            return Err(Error::Input("unit must be a nonzero degree-0 vector".into()));
        }
        if diff.len() != cutoff {
            return Err(Error::Input(format!("expected {cutoff} differential matrices, got {}", diff.len())));
        }
        for (k, m) in diff.iter().enumerate() {
            if m.rows() != dims[k + 1] || m.cols() != dims[k] {
                return Err(Error::Dimension(format!(
                    "differential out of degree {k} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    dims[k + 1],
                    dims[k]
                )));
            }
        }
        let pairs: Vec<(usize, usize)> =
            (0..=cutoff).flat_map(|i| (0..=cutoff - i).map(move |j| (i, j))).collect();
        let tables = par::try_map_range(pairs.len(), |t| {
            let (i, j) = pairs[t];
            let mut entries = Vec::with_capacity(dims[i] * dims[j]);
            for a in 0..dims[i] {
                for b in 0..dims[j] {
                    let p = product(i, a, j, b)?;
                    if let Some(v) = &p {
                        if v.len() != dims[i + j] {
                            return Err(Error::Dimension(format!(
                                "product of degrees {i},{j} has length {}, expected {}",
                                v.len(),
                                dims[i + j]
                            )));
                        }
                    }
                    entries.push(p.map(|v| to_sparse(&v)));
                }
            }
            Ok(MultTable { cols: dims[j], entries })
        })?;
        let mut mult: Vec<Vec<MultTable>> = (0..=cutoff).map(|_| Vec::new()).collect();
        for ((i, _), t) in pairs.into_iter().zip(tables) {
            mult[i].push(t);
        }
        Ok(TruncatedDGA { cutoff, labels, unit, diff, mult })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self, k: usize) -> usize {
        self.labels.get(k).map_or(0, Vec::len)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(Vec::len).collect()
    }

    pub fn labels(&self, k: usize) -> &[String] {
        &self.labels[k]
    }

    pub fn unit(&self) -> &QVector {
        &self.unit
    }

    /// Differential from degree `k` to `k + 1`.
    pub fn d_matrix(&self, k: usize) -> Result<&QMatrix> {
        self.diff.get(k).ok_or_else(|| Error::CutoffTooSmall {
            needed: k + 1,
            context: format!("differential out of degree {k}"),
        })
    }

    pub fn apply_d(&self, k: usize, v: &[Rational]) -> Result<QVector> {
        Ok(self.d_matrix(k)?.mul_vec(v))
    }

    /// Structure constants of a basis product: `Ok(None)` when undefined in
    /// this truncation.
    pub fn basis_product(&self, i: usize, a: usize, j: usize, b: usize) -> Result<Option<QVector>> {
        let t = self.table(i, j)?;
        Ok(t.entries[a * t.cols + b].as_ref().map(|s| from_sparse(self.dim(i + j), s)))
    }

    fn table(&self, i: usize, j: usize) -> Result<&MultTable> {
        if i + j > self.cutoff {
            return Err(Error::CutoffTooSmall {
                needed: i + j,
                context: format!("product of degrees {i} and {j}"),
            });
        }
        Ok(&self.mult[i][j])
    }

    pub fn multiply(&self, i: usize, a: &[Rational], j: usize, b: &[Rational]) -> Result<QVector> {
        let t = self.table(i, j)?;
        let mut out = zero_vec(self.dim(i + j));
        for (p, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (r, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                let entry = t.entries[p * t.cols + r].as_ref().ok_or_else(|| {
                    Error::OutsideTruncation(format!(
                        "{} * {} in degrees {i},{j}",
                        self.labels[i][p], self.labels[j][r]
                    ))
                })?;
                let c = x * y;
                for (s, z) in entry {
                    out[*s] += &c * z;
                }
            }
        }
        Ok(out)
    }

    /// Checks unit laws, `d^2 = 0`, `d(1) = 0`, graded commutativity, and the
    /// Leibniz rule on every pair of basis elements where all terms are
    /// defined.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Input(msg));
        for k in 0..=self.cutoff {
            for p in 0..self.dim(k) {
                let e = unit_vec(self.dim(k), p);
                if self.multiply(0, &self.unit, k, &e)? != e || self.multiply(k, &e, 0, &self.unit)? != e {
                    return bad(format!("unit law fails on {}", self.labels[k][p]));
                }
            }
        }
        if self.cutoff > 0 && !is_zero_vec(&self.apply_d(0, &self.unit)?) {
            return bad("d(1) is nonzero".into());
        }
        for k in 0..self.cutoff.saturating_sub(1) {
            if !self.diff[k + 1].mul(&self.diff[k]).is_zero() {
                return bad(format!("d^2 is nonzero on degree {k}"));
            }
        }
        let triples: Vec<(usize, usize)> =
            (0..=self.cutoff).flat_map(|i| (0..=self.cutoff - i).map(move |j| (i, j))).collect();
        par::try_map_range(triples.len(), |t| {
            let (i, j) = triples[t];
            self.validate_pair(i, j)
        })?;
        Ok(())
    }

    fn validate_pair(&self, i: usize, j: usize) -> Result<()> {
        let koszul = sign(i * j % 2 == 1);
        for a in 0..self.dim(i) {
            for b in 0..self.dim(j) {
                let ab = self.basis_product(i, a, j, b)?;
                let ba = self.basis_product(j, b, i, a)?;
                match (&ab, &ba) {
                    (Some(x), Some(y)) if *x != y.iter().map(|v| v * &koszul).collect::<QVector>() => {
                        return Err(Error::Input(format!(
                            "graded commutativity fails on {} * {}",
                            self.labels[i][a], self.labels[j][b]
                        )));
                    }
                    (Some(_), None) | (None, Some(_)) => {
                        return Err(Error::Input(format!(
                            "product {} * {} defined in only one order",
                            self.labels[i][a], self.labels[j][b]
                        )));
                    }
                    _ => {}
                }
                if i + j + 1 > self.cutoff {
                    continue;
                }
                let Some(ab) = ab else { continue };
                let ea = unit_vec(self.dim(i), a);
                let eb = unit_vec(self.dim(j), b);
                let da = self.apply_d(i, &ea)?;
                let db = self.apply_d(j, &eb)?;
                let left = match self.multiply(i + 1, &da, j, &eb) {
                    Ok(v) => v,
                    Err(Error::OutsideTruncation(_)) => continue,
                    Err(e) => return Err(e),
                };
                let right = match self.multiply(i, &ea, j + 1, &db) {
                    Ok(v) => v,
                    Err(Error::OutsideTruncation(_)) => continue,
                    Err(e) => return Err(e),
                };
                let s = sign(i % 2 == 1);
                let expect: QVector = left.iter().zip(&right).map(|(l, r)| l + &s * r).collect();
                if self.apply_d(i + j, &ab)? != expect {
                    return Err(Error::Input(format!(
                        "Leibniz rule fails on {} * {}",
                        self.labels[i][a], self.labels[j][b]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Associativity on all defined basis triples of total degree at most
    /// `max_degree`.
    pub fn check_associativity(&self, max_degree: usize) -> Result<()> {
        let top = max_degree.min(self.cutoff);
        for i in 0..=top {
            for j in 0..=top - i {
                for k in 0..=top - i - j {
                    for a in 0..self.dim(i) {
                        for b in 0..self.dim(j) {
                            for c in 0..self.dim(k) {
                                let (ea, eb, ec) =
                                    (unit_vec(self.dim(i), a), unit_vec(self.dim(j), b), unit_vec(self.dim(k), c));
                                let l = self.multiply(i, &ea, j, &eb).and_then(|ab| self.multiply(i + j, &ab, k, &ec));
                                let r = self.multiply(j, &eb, k, &ec).and_then(|bc| self.multiply(i, &ea, j + k, &bc));
                                if let (Ok(l), Ok(r)) = (l, r) {
                                    if l != r {
                                        return Err(Error::Input(format!(
                                            "associativity fails on {} {} {}",
                                            self.labels[i][a], self.labels[j][b], self.labels[k][c]
                                        )));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Same algebra with a lower cutoff.
    pub fn with_cutoff(&self, n: usize) -> Result<TruncatedDGA> {
        if n > self.cutoff {
            return Err(Error::CutoffTooSmall { needed: n, context: "raising the cutoff".into() });
        }
        let labels = self.labels[..=n].to_vec();
        let diff = self.diff[..n].to_vec();
        let mult = (0..=n).map(|i| self.mult[i][..=n - i].to_vec()).collect();
        Ok(TruncatedDGA { cutoff: n, labels, unit: self.unit.clone(), diff, mult })
    }

    /// Subalgebra (or isomorphic image) spanned by per-degree subspaces of an
    /// ambient graded space, with the ambient differential and product given
    /// as functions on ambient vectors.
    pub fn from_subspaces<D, M>(
        spaces: Vec<Subspace>,
        unit: &[Rational],
        labels: Option<Vec<Vec<String>>>,
        d: D,
        mul: M,
    ) -> Result<TruncatedDGA>
    where
        D: Fn(usize, &QVector) -> Result<QVector> + Sync + Send,
        M: Fn(usize, &QVector, usize, &QVector) -> Result<QVector> + Sync + Send,
    {
        let cutoff = spaces.len() - 1;
        let not_closed = |what: &str, k: usize| Error::Input(format!("subspace not closed under {what} in degree {k}"));
        let unit_c = spaces[0].coords(unit).ok_or_else(|| not_closed("the unit", 0))?;
        let diff = par::try_map_range(cutoff, |k| {
            let cols = spaces[k]
                .basis()
                .iter()
                .map(|b| {
                    let img = d(k, b)?;
                    spaces[k + 1].coords(&img).ok_or_else(|| not_closed("d", k))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(QMatrix::from_columns(spaces[k + 1].dim(), &cols))
        })?;
        let labels = labels.unwrap_or_else(|| {
            spaces.iter().enumerate().map(|(k, s)| (0..s.dim()).map(|i| format!("e{k}_{i}")).collect()).collect()
        });
        TruncatedDGA::from_fn(labels, unit_c, diff, |i, a, j, b| {
            match mul(i, &spaces[i].basis()[a], j, &spaces[j].basis()[b]) {
                Ok(v) => spaces[i + j].coords(&v).map(Some).ok_or_else(|| not_closed("products", i + j)),
                Err(Error::OutsideTruncation(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
    }
}

/// Truncation of a free CDGA at degree `n`.
pub fn truncate(f: &FreeCDGA, n: usize) -> TruncatedDGA {
    let alg = f.algebra();
    let bases: Vec<Vec<Monomial>> = (0..=n).map(|k| alg.basis_in_degree(k as u32)).collect();
    let index: Vec<HashMap<Monomial, usize>> =
        bases.iter().map(|b| b.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect()).collect();
    let to_vec = |k: usize, e: &Element| -> QVector {
        let mut v = zero_vec(bases[k].len());
        for (m, c) in e.terms() {
            v[index[k][m]] = c.clone();
        }
        v
    };
    let labels = bases.iter().map(|b| b.iter().map(|m| alg.format_monomial(m)).collect()).collect();
    let diff = (0..n)
        .map(|k| {
            let cols: Vec<QVector> = bases[k]
                .iter()
                .map(|m| to_vec(k + 1, &f.d(&Element::monomial(m.clone(), Rational::one()))))
                .collect();
            QMatrix::from_columns(bases[k + 1].len(), &cols)
        })
        .collect();
    TruncatedDGA::from_fn(labels, unit_vec(1, 0), diff, |i, a, j, b| {
        let mut v = zero_vec(bases[i + j].len());
        if let Some((neg, m)) = alg.mul_monomials(&bases[i][a], &bases[j][b]) {
            v[index[i + j][&m]] = sign(neg);
        }
        Ok(Some(v))
    })
    .expect("truncation of a free algebra is well formed")
}

/// `∧V / (monomials)` truncated at `n`; the differential must preserve the
/// monomial ideal.
pub fn quotient_by_monomials(f: &FreeCDGA, killed: &[Monomial], n: usize) -> Result<TruncatedDGA> {
    let alg = f.algebra();
    for m in killed {
        alg.check_monomial(m)?;
    }
    let divides = |k: &Monomial, m: &Monomial| (0..k.support_len()).all(|i| k.exponent(i) <= m.exponent(i));
    let in_ideal = |m: &Monomial| killed.iter().any(|k| divides(k, m));
    for k in killed {
        let dk = f.d(&Element::monomial(k.clone(), Rational::one()));
        if dk.terms().any(|(m, _)| !in_ideal(m)) {
            return Err(Error::Input(format!(
                "differential does not preserve the ideal: d({}) = {}",
                alg.format_monomial(k),
                alg.format_element(&dk)
            )));
        }
    }
    let bases: Vec<Vec<Monomial>> =
        (0..=n).map(|k| alg.basis_in_degree(k as u32).into_iter().filter(|m| !in_ideal(m)).collect()).collect();
    if bases[0].is_empty() {
        return Err(Error::Input("the ideal contains the unit".into()));
    }
    let index: Vec<HashMap<Monomial, usize>> =
        bases.iter().map(|b| b.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect()).collect();
    let project = |k: usize, e: &Element| -> QVector {
        let mut v = zero_vec(bases[k].len());
        for (m, c) in e.terms() {
            if let Some(&i) = index[k].get(m) {
                v[i] = c.clone();
            }
        }
        v
    };
    let labels = bases.iter().map(|b| b.iter().map(|m| alg.format_monomial(m)).collect()).collect();
    let diff = (0..n)
        .map(|k| {
            let cols: Vec<QVector> = bases[k]
                .iter()
                .map(|m| project(k + 1, &f.d(&Element::monomial(m.clone(), Rational::one()))))
                .collect();
            QMatrix::from_columns(bases[k + 1].len(), &cols)
        })
        .collect();
    TruncatedDGA::from_fn(labels, unit_vec(1, 0), diff, |i, a, j, b| {
        let p = alg.multiply_unchecked(
            &Element::monomial(bases[i][a].clone(), Rational::one()),
            &Element::monomial(bases[j][b].clone(), Rational::one()),
        );
        Ok(Some(project(i + j, &p)))
    })
}

/// The ground field as a DGA, zero in positive degrees up to `cutoff`.
pub fn point(cutoff: usize) -> TruncatedDGA {
    let mut labels = vec![vec!["1".to_string()]];
    labels.extend((0..cutoff).map(|_| Vec::new()));
    let diff = (0..cutoff).map(|k| QMatrix::zeros(0, usize::from(k == 0))).collect();
    // only degree 0 is nonzero, so only 1 * 1 is ever queried
    TruncatedDGA::from_fn(labels, unit_vec(1, 0), diff, |_, _, _, _| Ok(Some(vec![Rational::one()])))
    .expect("point algebra is well formed")
}

/// Direct product `A × B` with componentwise operations; bases are `A`'s
/// followed by `B`'s in each degree.
pub fn direct_product(a: &TruncatedDGA, b: &TruncatedDGA) -> TruncatedDGA {
    let n = a.cutoff().min(b.cutoff());
    let labels = (0..=n)
        .map(|k| {
            a.labels(k)
                .iter()
                .map(|l| format!("({l},0)"))
                .chain(b.labels(k).iter().map(|l| format!("(0,{l})")))
                .collect()
        })
        .collect();
    let mut unit = a.unit().clone();
    unit.extend(b.unit().iter().cloned());
    let diff = (0..n)
        .map(|k| {
            let (da, db) = (&a.diff[k], &b.diff[k]);
            let top = da.hstack(&QMatrix::zeros(da.rows(), db.cols()));
            let bottom = QMatrix::zeros(db.rows(), da.cols()).hstack(db);
            top.vstack(&bottom)
        })
        .collect();
    TruncatedDGA::from_fn(labels, unit, diff, |i, x, j, y| {
        let (ai, aj, ak) = (a.dim(i), a.dim(j), a.dim(i + j));
        let mut v = zero_vec(ak + b.dim(i + j));
        match (x < ai, y < aj) {
            (true, true) => match a.basis_product(i, x, j, y)? {
                Some(p) => v[..ak].clone_from_slice(&p),
                None => return Ok(None),
            },
            (false, false) => match b.basis_product(i, x - ai, j, y - aj)? {
                Some(p) => v[ak..].clone_from_slice(&p),
                None => return Ok(None),
            },
            _ => {}
        }
        Ok(Some(v))
    })
    .expect("direct product of valid algebras is well formed")
}

fn tensor_label(a: &str, b: &str) -> String {
    match (a, b) {
        ("1", _) => b.to_string(),
        (_, "1") => a.to_string(),
        _ => format!("{a}*{b}"),
    }
}

/// Index bookkeeping for `A ⊗ B`: degree `k` is `⊕_{i+j=k} A^i ⊗ B^j`
/// ordered by `i`, then `A`-index, then `B`-index.
#[derive(Clone, Debug)]
pub struct TensorLayout {
    offsets: Vec<Vec<usize>>,
    dims_a: Vec<usize>,
    dims_b: Vec<usize>,
}

impl TensorLayout {
    pub fn new(dims_a: Vec<usize>, dims_b: Vec<usize>, cutoff: usize) -> Self {
        let offsets = (0..=cutoff)
            .map(|k| {
                let mut acc = 0;
                let mut off = Vec::new();
                for i in 0..=k {
                    off.push(acc);
                    acc += dims_a.get(i).copied().unwrap_or(0) * dims_b.get(k - i).copied().unwrap_or(0);
                }
                off.push(acc);
                off
            })
            .collect();
        TensorLayout { offsets, dims_a, dims_b }
    }

    pub fn dim(&self, k: usize) -> usize {
        *self.offsets[k].last().unwrap_or(&0)
    }

    /// Position of `e_p ⊗ f_r` with `p` in degree `i` of `A` and `r` in
    /// degree `k - i` of `B`.
    pub fn index(&self, k: usize, i: usize, p: usize, r: usize) -> usize {
        self.offsets[k][i] + p * self.dims_b[k - i] + r
    }

    /// Inverse of [`index`](Self::index): `(i, p, r)`.
    pub fn split(&self, k: usize, idx: usize) -> (usize, usize, usize) {
        let i = self.offsets[k].partition_point(|&o| o <= idx) - 1;
        let local = idx - self.offsets[k][i];
        let db = self.dims_b[k - i];
        (i, local / db, local % db)
    }

    pub fn dims_a(&self) -> &[usize] {
        &self.dims_a
    }
}

/// Graded tensor product `A ⊗ B` with the Koszul sign
/// `(a⊗b)(a'⊗b') = (-1)^{|b||a'|} aa'⊗bb'`.
pub fn tensor(a: &TruncatedDGA, b: &TruncatedDGA) -> TruncatedDGA {
    let n = a.cutoff().min(b.cutoff());
    let layout = TensorLayout::new(a.dims(), b.dims(), n);
    let labels = (0..=n)
        .map(|k| {
            let mut ls = Vec::with_capacity(layout.dim(k));
            for i in 0..=k {
                for la in a.labels(i) {
                    for lb in b.labels(k - i) {
                        ls.push(tensor_label(la, lb));
                    }
                }
            }
            ls
        })
        .collect();
    let mut unit = zero_vec(layout.dim(0));
    for (p, x) in a.unit().iter().enumerate() {
        for (r, y) in b.unit().iter().enumerate() {
            unit[layout.index(0, 0, p, r)] = x * y;
        }
    }
    let diff = (0..n)
        .map(|k| {
            let mut m = QMatrix::zeros(layout.dim(k + 1), layout.dim(k));
            for idx in 0..layout.dim(k) {
                let (i, p, r) = layout.split(k, idx);
                let j = k - i;
                let da = a.diff[i].column(p);
                for (s, x) in da.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    let row = layout.index(k + 1, i + 1, s, r);
                    m.set(row, idx, m.get(row, idx) + x);
                }
                let db = b.diff[j].column(r);
                let sg = sign(i % 2 == 1);
                for (s, x) in db.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    let row = layout.index(k + 1, i, p, s);
                    m.set(row, idx, m.get(row, idx) + &sg * x);
                }
            }
            m
        })
        .collect();
    TruncatedDGA::from_fn(labels, unit, diff, |k1, x, k2, y| {
        let (i1, p1, r1) = layout.split(k1, x);
        let (i2, p2, r2) = layout.split(k2, y);
        let (j1, j2) = (k1 - i1, k2 - i2);
        let (Some(pa), Some(pb)) = (a.basis_product(i1, p1, i2, p2)?, b.basis_product(j1, r1, j2, r2)?) else {
            return Ok(None);
        };
        let sg = sign(j1 * i2 % 2 == 1);
        let k = k1 + k2;
        let mut v = zero_vec(layout.dim(k));
        for (s, xa) in pa.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (t, xb) in pb.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                v[layout.index(k, i1 + i2, s, t)] = &sg * xa * xb;
            }
        }
        Ok(Some(v))
    })
    .expect("tensor product of valid algebras is well formed")
}

/// Pointer or structural equality of shared algebras.
pub fn same_algebra(a: &Arc<TruncatedDGA>, b: &Arc<TruncatedDGA>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `f ⊗ g` between the tensor products `source = A ⊗ B` and
/// `target = A' ⊗ B'`, passed in so callers can share them.
pub fn tensor_morphism(f: &DGMorphism, g: &DGMorphism, source: Arc<TruncatedDGA>, target: Arc<TruncatedDGA>) -> Result<DGMorphism> {
    let n = source.cutoff().min(target.cutoff()).min(f.top_degree()).min(g.top_degree());
    if source.cutoff() != n || target.cutoff() != n {
        return Err(Error::Dimension("tensor morphism needs source and target of the same cutoff as the factors".into()));
    }
    let ls = TensorLayout::new(f.source().dims(), g.source().dims(), n);
    let lt = TensorLayout::new(f.target().dims(), g.target().dims(), n);
    let maps = (0..=n)
        .map(|k| {
            let mut m = QMatrix::zeros(lt.dim(k), ls.dim(k));
            for idx in 0..ls.dim(k) {
                let (i, p, r) = ls.split(k, idx);
                let fa = f.matrix(i).column(p);
                let gb = g.matrix(k - i).column(r);
                for (s, x) in fa.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                    for (t, y) in gb.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                        m.set(lt.index(k, i, s, t), idx, x * y);
                    }
                }
            }
            m
        })
        .collect();
    DGMorphism::new(source, target, maps)
}

/// Cohomology of a truncated DGA in degrees `0..=upto`, with canonical
/// cocycle representatives and the induced product on them.
#[derive(Clone, Debug)]
pub struct GradedCohomology {
    upto: usize,
    quotients: Vec<Quotient>,
    products: BTreeMap<(usize, usize), Vec<Option<QVector>>>,
}

impl GradedCohomology {
    pub fn upto(&self) -> usize {
        self.upto
    }

    pub fn dims(&self) -> Vec<usize> {
        self.quotients.iter().map(Quotient::dim).collect()
    }

    pub fn dim(&self, k: usize) -> usize {
        self.quotients[k].dim()
    }

    pub fn reps(&self, k: usize) -> &[QVector] {
        self.quotients[k].reps()
    }

    pub fn cocycles(&self, k: usize) -> &Subspace {
        self.quotients[k].top()
    }

    pub fn quotient(&self, k: usize) -> &Quotient {
        &self.quotients[k]
    }

    /// Class coordinates of a cocycle; `None` if `v` is not closed.
    pub fn class_of(&self, k: usize, v: &[Rational]) -> Option<QVector> {
        self.quotients[k].class_of(v)
    }

    /// Class of `[a]·[b]` for representative indices, `None` when the
    /// representative product leaves the truncation.
    pub fn product(&self, i: usize, a: usize, j: usize, b: usize) -> Option<&QVector> {
        let t = self.products.get(&(i, j))?;
        t[a * self.dim(j) + b].as_ref()
    }
}

pub fn cohomology(a: &TruncatedDGA, upto: usize) -> Result<GradedCohomology> {
    if upto >= a.cutoff() {
        return Err(Error::Input(format!(
            "cohomology through degree {upto} needs a cutoff above {upto}, algebra has {}",
            a.cutoff()
        )));
    }
    let quotients = par::try_map_range(upto + 1, |k| {
        let z = Subspace::kernel(&a.diff[k]);
        let b = if k == 0 { Subspace::zero(a.dim(0)) } else { Subspace::image(&a.diff[k - 1]) };
        Quotient::new(z, &b)
    })?;
    let mut h = GradedCohomology { upto, quotients, products: BTreeMap::new() };
    let pairs: Vec<(usize, usize)> = (0..=upto).flat_map(|i| (0..=upto - i).map(move |j| (i, j))).collect();
    let tables = par::try_map_range(pairs.len(), |t| {
        let (i, j) = pairs[t];
        let mut out = Vec::with_capacity(h.dim(i) * h.dim(j));
        for ra in h.reps(i) {
            for rb in h.reps(j) {
                match a.multiply(i, ra, j, rb) {
                    Ok(p) => out.push(Some(h.class_of(i + j, &p).ok_or_else(|| {
                        Error::Input(format!("product of cocycles is not closed in degree {}", i + j))
                    })?)),
                    Err(Error::OutsideTruncation(_)) => out.push(None),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(out)
    })?;
    h.products = pairs.into_iter().zip(tables).collect();
    Ok(h)
}

/// A degreewise linear map between truncated DGAs, defined through the
/// smaller of the two cutoffs.
#[derive(Clone, Debug)]
pub struct DGMorphism {
    source: Arc<TruncatedDGA>,
    target: Arc<TruncatedDGA>,
    maps: Vec<QMatrix>,
}

/// Outcome of [`DGMorphism::is_quasi_iso`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiIsoReport {
    pub is_quasi_iso: bool,
    pub failing_degree: Option<usize>,
}

impl DGMorphism {
    pub fn new(source: Arc<TruncatedDGA>, target: Arc<TruncatedDGA>, maps: Vec<QMatrix>) -> Result<Self> {
        let n = source.cutoff().min(target.cutoff());
        if maps.len() != n + 1 {
            return Err(Error::Dimension(format!("expected {} degree maps, got {}", n + 1, maps.len())));
        }
        for (k, m) in maps.iter().enumerate() {
            if m.rows() != target.dim(k) || m.cols() != source.dim(k) {
                return Err(Error::Dimension(format!(
                    "map in degree {k} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    target.dim(k),
                    source.dim(k)
                )));
            }
        }
        Ok(DGMorphism { source, target, maps })
    }

    pub fn identity(a: Arc<TruncatedDGA>) -> Self {
        let maps = (0..=a.cutoff()).map(|k| QMatrix::identity(a.dim(k))).collect();
        DGMorphism { source: a.clone(), target: a, maps }
    }

    /// The map from a free CDGA determined by generator images (vectors in
    /// the target's degree of each generator). Returns the truncated source
    /// too.
    pub fn from_free(src: &FreeCDGA, target: Arc<TruncatedDGA>, images: &[QVector]) -> Result<(Arc<TruncatedDGA>, Self)> {
        let alg = src.algebra();
        if images.len() != alg.ngens() {
            return Err(Error::Input(format!("{} images for {} generators", images.len(), alg.ngens())));
        }
        let n = target.cutoff();
        for (i, v) in images.iter().enumerate() {
            let deg = alg.gen_degree(i) as usize;
            if deg <= n && v.len() != target.dim(deg) {
                return Err(Error::Dimension(format!("image of {} has wrong length", alg.generators()[i].name)));
            }
        }
        let source = Arc::new(truncate(src, n));
        let maps = (0..=n)
            .map(|k| {
                let cols = alg
                    .basis_in_degree(k as u32)
                    .iter()
                    .map(|m| {
                        let mut acc = target.unit().clone();
                        let mut deg = 0;
                        for (g, &e) in m.exponents().iter().enumerate() {
                            let gd = alg.gen_degree(g) as usize;
                            for _ in 0..e {
                                acc = target.multiply(deg, &acc, gd, &images[g])?;
                                deg += gd;
                            }
                        }
                        Ok(acc)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(QMatrix::from_columns(target.dim(k), &cols))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = DGMorphism::new(source.clone(), target, maps)?;
        Ok((source, f))
    }

    pub fn source(&self) -> &Arc<TruncatedDGA> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TruncatedDGA> {
        &self.target
    }

    /// Highest degree on which the map is defined.
    pub fn top_degree(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn matrix(&self, k: usize) -> &QMatrix {
        &self.maps[k]
    }

    pub fn matrices(&self) -> &[QMatrix] {
        &self.maps
    }

    pub fn apply(&self, k: usize, v: &[Rational]) -> QVector {
        self.maps[k].mul_vec(v)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &DGMorphism) -> Result<DGMorphism> {
        if !Arc::ptr_eq(&self.target, &other.source) && *self.target != *other.source {
            return Err(Error::Input("composable morphisms must share the middle algebra".into()));
        }
        let n = self.top_degree().min(other.top_degree());
        let maps = (0..=n).map(|k| other.maps[k].mul(&self.maps[k])).collect();
        DGMorphism::new(self.source.clone(), other.target.clone(), maps)
    }

    pub fn check_cochain_map(&self) -> Result<()> {
        for k in 0..self.top_degree() {
            let l = self.maps[k + 1].mul(self.source.d_matrix(k)?);
            let r = self.target.d_matrix(k)?.mul(&self.maps[k]);
            if l != r {
                return Err(Error::Input(format!("map does not commute with d out of degree {k}")));
            }
        }
        Ok(())
    }

    /// Cochain map, unit to unit, and multiplicative on every basis pair
    /// whose products are defined on both sides.
    pub fn validate(&self) -> Result<()> {
        self.check_cochain_map()?;
        if self.apply(0, self.source.unit()) != *self.target.unit() {
            return Err(Error::Input("map does not send the unit to the unit".into()));
        }
        let n = self.top_degree();
        let pairs: Vec<(usize, usize)> = (0..=n).flat_map(|i| (0..=n - i).map(move |j| (i, j))).collect();
        par::try_map_range(pairs.len(), |t| {
            let (i, j) = pairs[t];
            let (s, tg) = (&self.source, &self.target);
            for a in 0..s.dim(i) {
                for b in 0..s.dim(j) {
                    let Some(ab) = s.basis_product(i, a, j, b)? else { continue };
                    let fa = self.maps[i].column(a);
                    let fb = self.maps[j].column(b);
                    let prod = match tg.multiply(i, &fa, j, &fb) {
                        Ok(p) => p,
                        Err(Error::OutsideTruncation(_)) => continue,
                        Err(e) => return Err(e),
                    };
                    if self.apply(i + j, &ab) != prod {
                        return Err(Error::Input(format!(
                            "map is not multiplicative on {} * {}",
                            s.labels(i)[a],
                            s.labels(j)[b]
                        )));
                    }
                }
            }
            Ok(())
        })?;
        Ok(())
    }

    /// Matrices of the induced map on cohomology in degrees `0..=upto`, in
    /// the canonical class bases.
    pub fn induced_map(&self, upto: usize) -> Result<Vec<QMatrix>> {
        let hs = cohomology(&self.source, upto)?;
        let ht = cohomology(&self.target, upto)?;
        self.induced_map_with(&hs, &ht)
    }

    pub fn induced_map_with(&self, hs: &GradedCohomology, ht: &GradedCohomology) -> Result<Vec<QMatrix>> {
        self.check_cochain_map()?;
        let upto = hs.upto().min(ht.upto()).min(self.top_degree());
        (0..=upto)
            .map(|k| {
                let cols = hs
                    .reps(k)
                    .iter()
                    .map(|r| {
                        ht.class_of(k, &self.apply(k, r))
                            .ok_or_else(|| Error::Input(format!("image of a cocycle is not closed in degree {k}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if k > 0 {
                    let b = Subspace::image(self.source.d_matrix(k - 1)?);
                    if b.basis().iter().any(|v| !ht.quotient(k).is_trivial_class(&self.apply(k, v))) {
                        return Err(Error::Input(format!("coboundary maps to a nontrivial class in degree {k}")));
                    }
                }
                Ok(QMatrix::from_columns(ht.dim(k), &cols))
            })
            .collect()
    }

    pub fn is_quasi_iso(&self, upto: usize) -> Result<QuasiIsoReport> {
        let maps = self.induced_map(upto)?;
        Ok(quasi_iso_report(&maps))
    }
}

pub fn quasi_iso_report(maps: &[QMatrix]) -> QuasiIsoReport {
    let failing = maps.iter().position(|m| m.rows() != m.cols() || m.rank() != m.rows());
    QuasiIsoReport { is_quasi_iso: failing.is_none(), failing_degree: failing }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_squared_examples() {
        let f = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[]).unwrap();
        assert!(f.check_d_squared().is_ok());
        let f = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[("y", "x^2")]).unwrap();
        assert!(f.check_d_squared().is_ok());
        let f = FreeCDGA::parse(&[("x", 1), ("y", 2)], &[("x", "y"), ("y", "x*y")]).unwrap();
        let err = f.check_d_squared().unwrap_err();
        assert_eq!(err.generator, "x");
        assert!(!err.residue.is_zero());
    }

    #[test]
    fn rejects_wrong_degree_differential() {
        assert!(FreeCDGA::parse(&[("x", 1), ("y", 2)], &[("y", "x")]).is_err());
    }

    #[test]
    fn truncation_dims() {
        let t = FreeCDGA::parse(&[("t1", 1), ("t2", 1)], &[]).unwrap();
        let a = truncate(&t, 2);
        assert_eq!(a.dims(), vec![1, 2, 1]);
        assert_eq!(a.labels(1), ["t1", "t2"]);
        assert_eq!(truncate(&t, 0).dims(), vec![1]);
        let cp1 = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[("y", "x^2")]).unwrap();
        assert_eq!(truncate(&cp1, 6).dims(), vec![1, 0, 1, 1, 1, 1, 1]);
        a.validate().unwrap();
        truncate(&cp1, 6).validate().unwrap();
    }

    #[test]
    fn cohomology_of_cp1_model() {
        let cp1 = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[("y", "x^2")]).unwrap();
        let h = cohomology(&truncate(&cp1, 7), 6).unwrap();
        assert_eq!(h.dims(), vec![1, 0, 1, 0, 0, 0, 0]);
        assert!(cohomology(&truncate(&cp1, 3), 3).is_err());
    }

    #[test]
    fn tensor_and_product_are_valid() {
        let s2 = quotient_by_monomials(
            &FreeCDGA::parse(&[("x", 2)], &[]).unwrap(),
            &[Monomial::from_exponents(vec![2])],
            5,
        )
        .unwrap();
        let t = truncate(&FreeCDGA::parse(&[("t", 1)], &[]).unwrap(), 5);
        let st = tensor(&s2, &t);
        st.validate().unwrap();
        st.check_associativity(5).unwrap();
        assert_eq!(cohomology(&st, 4).unwrap().dims(), vec![1, 1, 1, 1, 0]);
        let p = direct_product(&s2, &t);
        p.validate().unwrap();
        assert_eq!(cohomology(&p, 4).unwrap().dims(), vec![2, 1, 1, 0, 0]);
        point(3).validate().unwrap();
    }
}
