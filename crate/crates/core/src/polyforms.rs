//! Polynomial differential forms on standard simplices.
//!
//! On `Δ[n]` we use coordinates `t_1..t_n` with `t_0 = 1 - Σ t_i`, so vertex
//! `0` is the origin and vertex `i` is the `i`-th unit point. A form is a sum
//! of terms `c · t^a · dt_S` with `S ⊆ {1..n}` written in increasing order.
//!
//! Finite-dimensional pieces are cut out by *weight* = polynomial degree plus
//! form degree. Weight is preserved by `d`, by the cone contraction and by
//! face restrictions, so each weight bound gives an honest subcomplex; only
//! products can leave it.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num::{BigInt, One, Zero};
use rand::Rng;

use crate::cdga::{cohomology, TruncatedDGA};
use crate::error::{Error, Result};
use crate::exactlin::{q, solve, unit_vec, zero_vec, QMatrix, QVector, Rational, Subspace};
use crate::par;
use crate::simplicial::{face, Simplex, SimplicialComplexK};

type Key = (Vec<u32>, u32);

fn popcount(mask: u32) -> usize {
    mask.count_ones() as usize
}

/// Sign of `dt_S ∧ dt_T` relative to `dt_{S∪T}`; `None` if they overlap.
fn wedge_sign(s: u32, t: u32) -> Option<bool> {
    if s & t != 0 {
        return None;
    }
    let mut inversions = 0;
    let mut rest = t;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (s >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(inversions % 2 == 1)
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// A polynomial form on `Δ[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyForm {
    n: usize,
    terms: BTreeMap<Key, Rational>,
}

impl PolyForm {
    pub fn zero(n: usize) -> Self {
        PolyForm { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self::term(n, vec![0; n], 0, c)
    }

    /// `c · t^exps · dt_S` with `S` given as a bitmask (bit `i-1` for `dt_i`).
    pub fn term(n: usize, exps: Vec<u32>, mask: u32, c: Rational) -> Self {
        assert_eq!(exps.len(), n, "exponent vector length");
        assert!(mask >> n == 0, "dt index out of range");
        let mut f = Self::zero(n);
        f.add_term((exps, mask), c);
        f
    }

    /// Barycentric coordinate `t_i`, `0 <= i <= n`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        assert!(i <= n);
        if i == 0 {
            let mut f = Self::constant(n, Rational::one());
            for j in 1..=n {
                f = f.sub(&Self::coordinate(n, j));
            }
            return f;
        }
        let mut e = vec![0; n];
        e[i - 1] = 1;
        Self::term(n, e, 0, Rational::one())
    }

    /// `dt_i`, `0 <= i <= n`.
    pub fn dt(n: usize, i: usize) -> Self {
        Self::coordinate(n, i).d()
    }

    fn add_term(&mut self, k: Key, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(k) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn simplex_dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, u32, &Rational)> {
        self.terms.iter().map(|((e, m), c)| (e, *m, c))
    }

    pub fn add(&self, other: &PolyForm) -> PolyForm {
        assert_eq!(self.n, other.n, "forms on different simplices");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolyForm) -> PolyForm {
        self.add(&other.scale(&q(-1)))
    }

    pub fn scale(&self, c: &Rational) -> PolyForm {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        PolyForm { n: self.n, terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn wedge(&self, other: &PolyForm) -> PolyForm {
        assert_eq!(self.n, other.n, "forms on different simplices");
        let mut out = Self::zero(self.n);
        for ((ea, ma), ca) in &self.terms {
            for ((eb, mb), cb) in &other.terms {
                let Some(neg) = wedge_sign(*ma, *mb) else { continue };
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let c = ca * cb;
                out.add_term((e, ma | mb), if neg { -c } else { c });
            }
        }
        out
    }

    pub fn d(&self) -> PolyForm {
        let mut out = Self::zero(self.n);
        for ((e, m), c) in &self.terms {
            for i in 0..self.n {
                if e[i] == 0 || m >> i & 1 == 1 {
                    continue;
                }
                let before = (m & ((1 << i) - 1)).count_ones();
                let mut e2 = e.clone();
                e2[i] -= 1;
                let v = c * Rational::from_integer(e[i].into());
                out.add_term((e2, m | 1 << i), if before % 2 == 1 { -v } else { v });
            }
        }
        out
    }

    /// Part of form degree `k`.
    pub fn part(&self, k: usize) -> PolyForm {
        PolyForm {
            n: self.n,
            terms: self.terms.iter().filter(|((_, m), _)| popcount(*m) == k).map(|(a, b)| (a.clone(), b.clone())).collect(),
        }
    }

    /// Form degree if homogeneous and nonzero.
    pub fn form_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|(_, m)| popcount(*m));
        let first = it.next()?;
        it.all(|k| k == first).then_some(first)
    }

    /// Largest polynomial degree plus form degree among the terms.
    pub fn weight(&self) -> usize {
        self.terms.keys().map(|(e, m)| e.iter().sum::<u32>() as usize + popcount(*m)).max().unwrap_or(0)
    }

    /// Pullback along the affine map `Δ[m] → Δ[n]` sending vertex `k` to
    /// vertex `v[k]`; `v` must be weakly increasing. Covers faces and
    /// degeneracies.
    pub fn pullback(&self, v: &[usize]) -> Result<PolyForm> {
        if v.is_empty() || v.windows(2).any(|w| w[0] > w[1]) || v.iter().any(|&j| j > self.n) {
            return Err(Error::Input(format!("{v:?} is not a monotone vertex map into [{}]", self.n)));
        }
        let m = v.len() - 1;
        let lin: Vec<PolyForm> = (1..=self.n)
            .map(|j| {
                (0..=m).filter(|&k| v[k] == j).fold(Self::zero(m), |acc, k| acc.add(&Self::coordinate(m, k)))
            })
            .collect();
        let dlin: Vec<PolyForm> = lin.iter().map(PolyForm::d).collect();
        let mut powers: Vec<Vec<PolyForm>> = lin.iter().map(|l| vec![Self::constant(m, Rational::one()), l.clone()]).collect();
        let mut out = Self::zero(m);
        for ((e, mask), c) in &self.terms {
            let mut acc = Self::constant(m, c.clone());
            for (j, &ej) in e.iter().enumerate() {
                while powers[j].len() <= ej as usize {
                    let next = powers[j].last().expect("nonempty").wedge(&lin[j]);
                    powers[j].push(next);
                }
                acc = acc.wedge(&powers[j][ej as usize]);
                if acc.is_zero() {
                    break;
                }
            }
            for j in (0..self.n).filter(|j| mask >> j & 1 == 1) {
                acc = acc.wedge(&dlin[j]);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    /// Restriction to the face opposite vertex `i`.
    pub fn face(&self, i: usize) -> PolyForm {
        assert!(self.n > 0 && i <= self.n, "face index out of range");
        let v: Vec<usize> = (0..=self.n).filter(|&j| j != i).collect();
        self.pullback(&v).expect("face maps are monotone")
    }

    /// `∫_{Δ[n]} ω` for a form of top degree `n`.
    pub fn integrate(&self) -> Result<Rational> {
        let full = (1u32 << self.n) - 1;
        let mut total = Rational::zero();
        for ((e, m), c) in &self.terms {
            if *m != full {
                return Err(Error::Input(format!("integrand on Δ[{}] has a term of degree {}", self.n, popcount(*m))));
            }
            let num: BigInt = e.iter().map(|&a| factorial(a)).product();
            let den = factorial(e.iter().sum::<u32>() + self.n as u32);
            total += c * Rational::new(num, den);
        }
        Ok(total)
    }

    /// Value of the degree-0 part at vertex 0.
    pub fn evaluate_at_origin(&self) -> Rational {
        self.terms.get(&(vec![0; self.n], 0)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Cone contraction towards vertex 0: `d h + h d = id - ε` with `ε` the
    /// evaluation at vertex 0 on functions and zero on positive degrees.
    pub fn contraction(&self) -> PolyForm {
        let mut out = Self::zero(self.n);
        for ((e, m), c) in &self.terms {
            let k = popcount(*m);
            if k == 0 {
                continue;
            }
            let denom = e.iter().sum::<u32>() as i64 + k as i64;
            let base = c / q(denom);
            let mut pos = 0;
            for i in 0..self.n {
                if m >> i & 1 == 0 {
                    continue;
                }
                let mut e2 = e.clone();
                e2[i] += 1;
                let v = if pos % 2 == 1 { -base.clone() } else { base.clone() };
                out.add_term((e2, m & !(1 << i)), v);
                pos += 1;
            }
        }
        out
    }

    /// `ω - ε(ω)`, the right-hand side of the contraction identity.
    pub fn minus_augmentation(&self) -> PolyForm {
        self.sub(&Self::constant(self.n, self.evaluate_at_origin()))
    }

    /// Random form of degree `k` and weight at most `weight` with small
    /// integer coefficients.
    pub fn random<R: Rng>(rng: &mut R, n: usize, k: usize, weight: usize) -> PolyForm {
        let keys = basis_keys(n, weight, k);
        let mut f = Self::zero(n);
        for key in keys {
            if rng.gen_bool(0.5) {
                let c = rng.gen_range(-4i64..=4);
                f.add_term(key, q(c));
            }
        }
        f
    }
}

/// Exponent vectors in `n` variables of total degree `e`, larger exponents on
/// earlier variables first.
fn monomials(n: usize, e: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == n {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in (0..=left).rev() {
            cur.push(x);
            rec(i + 1, n, left - x, cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        return if e == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(0, n, e, &mut Vec::new(), &mut out);
    out
}

/// Basis of degree-`k` forms of weight at most `weight` on `Δ[n]`, ordered by
/// polynomial degree, then monomial, then `dt` set.
pub fn basis_keys(n: usize, weight: usize, k: usize) -> Vec<(Vec<u32>, u32)> {
    if k > n || k > weight {
        return Vec::new();
    }
    let masks: Vec<u32> = (0u32..1 << n).filter(|&m| popcount(m) == k).collect();
    let mut out = Vec::new();
    for e in 0..=(weight - k) as u32 {
        for mono in monomials(n, e) {
            for &m in &masks {
                out.push((mono.clone(), m));
            }
        }
    }
    out
}

fn key_label(e: &[u32], m: u32) -> String {
    let mut parts = Vec::new();
    for (i, &x) in e.iter().enumerate() {
        match x {
            0 => {}
            1 => parts.push(format!("t{}", i + 1)),
            _ => parts.push(format!("t{}^{x}", i + 1)),
        }
    }
    for i in 0..e.len() {
        if m >> i & 1 == 1 {
            parts.push(format!("dt{}", i + 1));
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Forms of weight at most `weight` on `Δ[n]`, degrees `0..=cutoff`, with
/// coordinate conversions.
#[derive(Clone, Debug)]
pub struct FormSpace {
    n: usize,
    weight: usize,
    cutoff: usize,
    bases: Vec<Vec<Key>>,
    index: Vec<HashMap<Key, usize>>,
}

impl FormSpace {
    pub fn new(n: usize, weight: usize, cutoff: usize) -> Self {
        let bases: Vec<Vec<Key>> = (0..=cutoff).map(|k| basis_keys(n, weight, k)).collect();
        let index = bases.iter().map(|b| b.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect()).collect();
        FormSpace { n, weight, cutoff, bases, index }
    }

    pub fn simplex_dim(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self, k: usize) -> usize {
        self.bases.get(k).map_or(0, Vec::len)
    }

    pub fn basis_form(&self, k: usize, i: usize) -> PolyForm {
        let (e, m) = &self.bases[k][i];
        PolyForm::term(self.n, e.clone(), *m, Rational::one())
    }

    pub fn to_vector(&self, k: usize, f: &PolyForm) -> Result<QVector> {
        let mut v = zero_vec(self.dim(k));
        for (key, c) in &f.terms {
            let i = self.index[k].get(key).ok_or_else(|| {
                Error::OutsideTruncation(format!("term {} is not a degree-{k} form of weight <= {}", key_label(&key.0, key.1), self.weight))
            })?;
            v[*i] = c.clone();
        }
        Ok(v)
    }

    pub fn to_form(&self, k: usize, v: &[Rational]) -> PolyForm {
        let mut f = PolyForm::zero(self.n);
        for (i, c) in v.iter().enumerate() {
            f.add_term(self.bases[k][i].clone(), c.clone());
        }
        f
    }

    /// Matrix of pullback along the monotone vertex map `v` from this space
    /// into `target`, in degree `k`.
    pub fn pullback_matrix(&self, target: &FormSpace, v: &[usize], k: usize) -> Result<QMatrix> {
        let cols = (0..self.dim(k))
            .map(|i| target.to_vector(k, &self.basis_form(k, i).pullback(v)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(QMatrix::from_columns(target.dim(k), &cols))
    }

    /// The forms as a truncated DGA; products above the weight bound are
    /// undefined.
    pub fn dga(&self) -> TruncatedDGA {
        let labels = self.bases.iter().map(|b| b.iter().map(|(e, m)| key_label(e, *m)).collect()).collect();
        let diff = (0..self.cutoff)
            .map(|k| {
                let cols: Vec<QVector> = (0..self.dim(k))
                    .map(|i| self.to_vector(k + 1, &self.basis_form(k, i).d()).expect("d preserves weight"))
                    .collect();
                QMatrix::from_columns(self.dim(k + 1), &cols)
            })
            .collect();
        TruncatedDGA::from_fn(labels, unit_vec(self.dim(0), 0), diff, |i, a, j, b| {
            let (ea, ma) = &self.bases[i][a];
            let (eb, mb) = &self.bases[j][b];
            if ma & mb != 0 {
                return Ok(Some(zero_vec(self.dim(i + j))));
            }
            let w = ea.iter().chain(eb).sum::<u32>() as usize + i + j;
            if w > self.weight {
                return Ok(None);
            }
            Ok(Some(self.to_vector(i + j, &self.basis_form(i, a).wedge(&self.basis_form(j, b)))?))
        })
        .expect("forms on a simplex form a valid truncated algebra")
    }
}

/// Forms of weight at most `weight` on `Δ[n]` as a truncated DGA.
pub fn forms_dga(n: usize, weight: usize, cutoff: usize) -> TruncatedDGA {
    FormSpace::new(n, weight, cutoff).dga()
}

/// A compatible family of forms, one per simplex of an ordered complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialForm {
    complex: SimplicialComplexK,
    forms: Vec<Vec<PolyForm>>,
}

impl SimplicialForm {
    pub fn new(complex: SimplicialComplexK, forms: Vec<Vec<PolyForm>>) -> Result<Self> {
        let f = SimplicialForm { complex, forms };
        f.check_shape()?;
        f.check_compatible()?;
        Ok(f)
    }

    pub fn from_fn(complex: SimplicialComplexK, f: impl Fn(&Simplex) -> PolyForm) -> Result<Self> {
        let forms = (0..=complex.dim()).map(|k| complex.simplices(k).iter().map(&f).collect()).collect();
        Self::new(complex, forms)
    }

    fn check_shape(&self) -> Result<()> {
        if self.forms.len() != self.complex.dim() + 1 {
            return Err(Error::Input("one list of forms per dimension expected".into()));
        }
        for (k, layer) in self.forms.iter().enumerate() {
            if layer.len() != self.complex.count(k) || layer.iter().any(|f| f.simplex_dim() != k) {
                return Err(Error::Input(format!("forms in dimension {k} do not match the simplices")));
            }
        }
        Ok(())
    }

    /// Face restrictions agree with the assigned forms.
    pub fn check_compatible(&self) -> Result<()> {
        for k in 1..self.forms.len() {
            for (s, f) in self.complex.simplices(k).iter().zip(&self.forms[k]) {
                for i in 0..=k {
                    let fc = face(s, i);
                    let j = self.complex.index_of(&fc).expect("faces are present");
                    if f.face(i) != self.forms[k - 1][j] {
                        return Err(Error::Input(format!("forms on {s:?} and its face {fc:?} disagree")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn complex(&self) -> &SimplicialComplexK {
        &self.complex
    }

    pub fn form(&self, s: &[usize]) -> Option<&PolyForm> {
        let i = self.complex.index_of(s)?;
        Some(&self.forms[s.len() - 1][i])
    }

    pub fn d(&self) -> SimplicialForm {
        let forms = self.forms.iter().map(|l| l.iter().map(PolyForm::d).collect()).collect();
        SimplicialForm { complex: self.complex.clone(), forms }
    }

    pub fn part(&self, k: usize) -> SimplicialForm {
        let forms = self.forms.iter().map(|l| l.iter().map(|f| f.part(k)).collect()).collect();
        SimplicialForm { complex: self.complex.clone(), forms }
    }

    pub fn add(&self, other: &SimplicialForm) -> SimplicialForm {
        assert_eq!(self.complex, other.complex);
        let forms = self.forms.iter().zip(&other.forms).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect()).collect();
        SimplicialForm { complex: self.complex.clone(), forms }
    }

    /// Restriction to a subcomplex with the same vertex numbering.
    pub fn restrict(&self, sub: &SimplicialComplexK) -> Result<SimplicialForm> {
        if !sub.is_subcomplex_of(&self.complex) {
            return Err(Error::Input("restriction target is not a subcomplex".into()));
        }
        SimplicialForm::from_fn(sub.clone(), |s| self.form(s).expect("simplex present").clone())
    }

    /// Integrals of the degree-`k` part over the `k`-simplices.
    pub fn integration_cochain(&self, k: usize) -> Vec<Rational> {
        self.forms
            .get(k)
            .map(|l| l.iter().map(|f| f.part(k).integrate().expect("top-degree part")).collect())
            .unwrap_or_default()
    }
}

/// Largest weight the extension search will try above the data's weight.
const EXTENSION_SLACK: usize = 6;

/// A form on `Δ[n]` of degree `p` whose faces are the given forms.
fn extend_over_simplex(n: usize, p: usize, faces: &[PolyForm]) -> Result<PolyForm> {
    if p > n {
        return Ok(PolyForm::zero(n));
    }
    let w0 = faces.iter().map(PolyForm::weight).max().unwrap_or(0).max(p);
    for w in w0..=w0 + EXTENSION_SLACK {
        let keys = basis_keys(n, w, p);
        let mut rows: HashMap<(usize, Key), usize> = HashMap::new();
        let mut entries: Vec<(usize, usize, Rational)> = Vec::new();
        for (col, (e, m)) in keys.iter().enumerate() {
            let f = PolyForm::term(n, e.clone(), *m, Rational::one());
            for i in 0..=n {
                for (k, c) in &f.face(i).terms {
                    let len = rows.len();
                    let r = *rows.entry((i, k.clone())).or_insert(len);
                    entries.push((r, col, c.clone()));
                }
            }
        }
        for (i, g) in faces.iter().enumerate() {
            for k in g.terms.keys() {
                let len = rows.len();
                rows.entry((i, k.clone())).or_insert(len);
            }
        }
        let mut a = QMatrix::zeros(rows.len(), keys.len());
        for (r, c, v) in entries {
            a.set(r, c, a.get(r, c) + v);
        }
        let mut b = zero_vec(rows.len());
        for (i, g) in faces.iter().enumerate() {
            for (k, c) in &g.terms {
                b[rows[&(i, k.clone())]] = c.clone();
            }
        }
        if let Some(x) = solve(&a, &b)? {
            let mut f = PolyForm::zero(n);
            for (key, c) in keys.into_iter().zip(x) {
                f.add_term(key, c);
            }
            return Ok(f);
        }
    }
    Err(Error::Input(format!("boundary data on Δ[{n}] admits no extension; the faces are incompatible")))
}

/// Extends a compatible family on a subcomplex `L` (same vertex numbering) to
/// all of `k`, simplex by simplex in increasing dimension.
pub fn extend(omega: &SimplicialForm, k: &SimplicialComplexK) -> Result<SimplicialForm> {
    if !omega.complex().is_subcomplex_of(k) {
        return Err(Error::Input("the form's complex is not a subcomplex of the target".into()));
    }
    omega.check_compatible()?;
    let top = omega.forms.iter().flatten().filter_map(PolyForm::form_degree).max().unwrap_or(0);
    let mut total: Option<SimplicialForm> = None;
    for p in 0..=top {
        let part = omega.part(p);
        let mut forms: Vec<Vec<PolyForm>> = Vec::with_capacity(k.dim() + 1);
        for d in 0..=k.dim() {
            let layer = k
                .simplices(d)
                .iter()
                .map(|s| {
                    if let Some(f) = part.form(s) {
                        return Ok(f.clone());
                    }
                    if d == 0 {
                        return Ok(PolyForm::zero(0));
                    }
                    let faces: Vec<PolyForm> = (0..=d)
                        .map(|i| forms[d - 1][k.index_of(&face(s, i)).expect("faces are present")].clone())
                        .collect();
                    extend_over_simplex(d, p, &faces)
                })
                .collect::<Result<Vec<_>>>()?;
            forms.push(layer);
        }
        let piece = SimplicialForm { complex: k.clone(), forms };
        total = Some(match total {
            None => piece,
            Some(t) => t.add(&piece),
        });
    }
    let out = total.expect("at least degree 0");
    out.check_compatible()?;
    Ok(out)
}

/// Truncated polynomial forms on a whole complex: compatible families of
/// weight-bounded forms, as a subalgebra of the product over all simplices.
/// The sections are computed eagerly; the multiplication table of the
/// algebra is built on first use.
#[derive(Clone, Debug)]
pub struct ComplexForms {
    complex: SimplicialComplexK,
    spaces: Vec<FormSpace>,
    offsets: Vec<Vec<usize>>,
    sections: Vec<Subspace>,
    dga: OnceLock<TruncatedDGA>,
}

impl ComplexForms {
    pub fn new(complex: &SimplicialComplexK, weight: usize, cutoff: usize) -> Result<Self> {
        let spaces: Vec<FormSpace> = (0..=complex.dim()).map(|d| FormSpace::new(d, weight, cutoff)).collect();
        let simplices: Vec<&Simplex> = complex.all_simplices().collect();
        let offsets: Vec<Vec<usize>> = (0..=cutoff)
            .map(|k| {
                let mut acc = 0;
                let mut off: Vec<usize> = simplices
                    .iter()
                    .map(|s| {
                        let o = acc;
                        acc += spaces[s.len() - 1].dim(k);
                        o
                    })
                    .collect();
                off.push(acc);
                off
            })
            .collect();
        let flat_index = |s: &[usize]| -> usize {
            let d = s.len() - 1;
            (0..d).map(|j| complex.count(j)).sum::<usize>() + complex.index_of(s).expect("simplex present")
        };
        // face restriction matrices per (dimension, face, degree)
        let face_mats: Vec<Vec<Vec<QMatrix>>> = (0..=complex.dim())
            .map(|d| {
                if d == 0 {
                    return Ok(Vec::new());
                }
                (0..=d)
                    .map(|i| {
                        let v: Vec<usize> = (0..=d).filter(|&j| j != i).collect();
                        (0..=cutoff).map(|k| spaces[d].pullback_matrix(&spaces[d - 1], &v, k)).collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let sections = par::map_range(cutoff + 1, |k| {
            let ambient = offsets[k][simplices.len()];
            let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
            for (si, s) in simplices.iter().enumerate() {
                let d = s.len() - 1;
                if d == 0 {
                    continue;
                }
                for i in 0..=d {
                    let fi = flat_index(&face(s, i));
                    let m = &face_mats[d][i][k];
                    for r in 0..m.rows() {
                        let mut row: Vec<(usize, Rational)> =
                            m.sparse_row(r).iter().map(|(c, x)| (offsets[k][si] + c, x.clone())).collect();
                        row.push((offsets[k][fi] + r, q(-1)));
                        rows.push(row);
                    }
                }
            }
            let mut a = QMatrix::zeros(rows.len(), ambient);
            for (r, row) in rows.into_iter().enumerate() {
                for (c, x) in row {
                    a.set(r, c, a.get(r, c) + x);
                }
            }
            Subspace::kernel(&a)
        });
        Ok(ComplexForms { complex: complex.clone(), spaces, offsets, sections, dga: OnceLock::new() })
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sections.iter().map(Subspace::dim).collect()
    }

    pub fn dga(&self) -> &TruncatedDGA {
        self.dga.get_or_init(|| self.build_dga().expect("compatible families are closed under d and products"))
    }

    fn build_dga(&self) -> Result<TruncatedDGA> {
        let dgas: Vec<TruncatedDGA> = self.spaces.iter().map(FormSpace::dga).collect();
        let simplices: Vec<&Simplex> = self.complex.all_simplices().collect();
        let offsets = &self.offsets;
        let mut unit = zero_vec(offsets[0][simplices.len()]);
        for (si, s) in simplices.iter().enumerate() {
            let u = dgas[s.len() - 1].unit();
            unit[offsets[0][si]..offsets[0][si] + u.len()].clone_from_slice(u);
        }
        let blocks = |k: usize, v: &QVector| -> Vec<QVector> {
            (0..simplices.len()).map(|si| v[offsets[k][si]..offsets[k][si + 1]].to_vec()).collect()
        };
        TruncatedDGA::from_subspaces(
            self.sections.clone(),
            &unit,
            None,
            |k, v| {
                let mut out = Vec::with_capacity(offsets[k + 1][simplices.len()]);
                for (si, b) in blocks(k, v).iter().enumerate() {
                    out.extend(dgas[simplices[si].len() - 1].apply_d(k, b)?);
                }
                Ok(out)
            },
            |i, a, j, b| {
                let (ba, bb) = (blocks(i, a), blocks(j, b));
                let mut out = Vec::with_capacity(offsets[i + j][simplices.len()]);
                for si in 0..simplices.len() {
                    out.extend(dgas[simplices[si].len() - 1].multiply(i, &ba[si], j, &bb[si])?);
                }
                Ok(out)
            },
        )
    }

    pub fn complex(&self) -> &SimplicialComplexK {
        &self.complex
    }

    pub fn sections(&self, k: usize) -> &Subspace {
        &self.sections[k]
    }

    /// The section with carrier coordinates `coords` in degree `k` as a
    /// family of forms.
    pub fn to_simplicial_form(&self, k: usize, coords: &[Rational]) -> SimplicialForm {
        let v = self.sections[k].vector(coords);
        let mut forms = vec![Vec::new(); self.complex.dim() + 1];
        for (si, s) in self.complex.all_simplices().enumerate() {
            let d = s.len() - 1;
            forms[d].push(self.spaces[d].to_form(k, &v[self.offsets[k][si]..self.offsets[k][si + 1]]));
        }
        SimplicialForm { complex: self.complex.clone(), forms }
    }

    /// Matrix of restriction to `sub`, whose complex must be a subcomplex
    /// with the same vertex numbering and the same weight bound.
    pub fn restriction_matrix(&self, sub: &ComplexForms, k: usize) -> Result<QMatrix> {
        if !sub.complex.is_subcomplex_of(&self.complex) {
            return Err(Error::Input("restriction target is not a subcomplex".into()));
        }
        let own: Vec<&Simplex> = self.complex.all_simplices().collect();
        let pos: HashMap<&Simplex, usize> = own.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let cols = self.sections[k]
            .basis()
            .iter()
            .map(|v| {
                let mut w = Vec::with_capacity(sub.offsets[k].last().copied().unwrap_or(0));
                for s in sub.complex.all_simplices() {
                    let si = pos[s];
                    w.extend_from_slice(&v[self.offsets[k][si]..self.offsets[k][si + 1]]);
                }
                sub.sections[k].coords(&w).ok_or_else(|| Error::Input("restriction leaves the sections".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QMatrix::from_columns(sub.sections[k].dim(), &cols))
    }
}

/// Outcome of one axiom check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub checks: Vec<AxiomCheck>,
}

impl AdmissibilityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Random compatible family of degree-`p` forms on `l`: interpolate the
/// boundary, then add a random multiple of the bubble `t_0 t_1 ... t_d`,
/// which vanishes on every face.
fn random_family<R: Rng>(rng: &mut R, l: &SimplicialComplexK, p: usize, weight: usize) -> Result<SimplicialForm> {
    let mut forms: Vec<Vec<PolyForm>> = Vec::new();
    for d in 0..=l.dim() {
        let mut layer = Vec::new();
        for s in l.simplices(d) {
            let f = if d == 0 {
                if p == 0 {
                    PolyForm::constant(0, q(rng.gen_range(-5i64..=5)))
                } else {
                    PolyForm::zero(0)
                }
            } else {
                let faces: Vec<PolyForm> =
                    (0..=d).map(|i| forms[d - 1][l.index_of(&face(s, i)).expect("face")].clone()).collect();
                let base = extend_over_simplex(d, p, &faces)?;
                let bubble = (0..=d).fold(PolyForm::constant(d, Rational::one()), |acc, i| acc.wedge(&PolyForm::coordinate(d, i)));
                base.add(&bubble.wedge(&PolyForm::random(rng, d, p, weight)))
            };
            layer.push(f);
        }
        forms.push(layer);
    }
    SimplicialForm::new(l.clone(), forms)
}

/// Subcomplexes of `Δ[n]` used for the extendability check: the boundary,
/// every horn, a single vertex and a single facet.
fn sample_subcomplexes(n: usize) -> Vec<SimplicialComplexK> {
    let top: Simplex = (0..=n).collect();
    let mut out = vec![SimplicialComplexK::from_simplices(n + 1, &[vec![0]]).expect("vertex")];
    if n >= 1 {
        let facets: Vec<Simplex> = (0..=n).map(|i| face(&top, i)).collect();
        out.push(SimplicialComplexK::from_simplices(n + 1, &facets).expect("boundary"));
        for j in 0..=n {
            let horn: Vec<Simplex> = facets.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, f)| f.clone()).collect();
            out.push(SimplicialComplexK::from_simplices(n + 1, &horn).expect("horn"));
        }
        out.push(SimplicialComplexK::from_simplices(n + 1, &facets[..1]).expect("facet"));
    }
    out
}

/// `df = f·w` has a solution `w` among 1-forms of weight at most `bound`.
pub fn log_derivative_solvable(f: &PolyForm, bound: usize) -> Result<bool> {
    let n = f.simplex_dim();
    let keys = basis_keys(n, bound, 1);
    let target = f.d();
    let mut rows: HashMap<Key, usize> = HashMap::new();
    let mut entries = Vec::new();
    for (col, (e, m)) in keys.iter().enumerate() {
        let prod = f.wedge(&PolyForm::term(n, e.clone(), *m, Rational::one()));
        for (k, c) in &prod.terms {
            let len = rows.len();
            let r = *rows.entry(k.clone()).or_insert(len);
            entries.push((r, col, c.clone()));
        }
    }
    for k in target.terms.keys() {
        let len = rows.len();
        rows.entry(k.clone()).or_insert(len);
    }
    let mut a = QMatrix::zeros(rows.len(), keys.len());
    for (r, c, v) in entries {
        a.set(r, c, a.get(r, c) + v);
    }
    let mut b = zero_vec(rows.len());
    for (k, c) in &target.terms {
        b[rows[k]] = c.clone();
    }
    Ok(solve(&a, &b)?.is_some())
}

/// Verifies the five admissibility axioms for polynomial forms on simplices
/// of dimension at most `n_max`: structurally for (i) and (ii), exhaustively
/// on basis forms for (iii), and on `sample_budget` random instances for (iv)
/// and (v).
pub fn check_admissible_axioms<R: Rng>(n_max: usize, sample_budget: usize, rng: &mut R) -> AdmissibilityReport {
    let weight = n_max + 2;
    let mut checks = Vec::new();

    let a0 = FormSpace::new(0, weight, n_max + 1);
    let ok = a0.dim(0) == 1 && (1..=n_max + 1).all(|k| a0.dim(k) == 0) && a0.dga().unit() == &vec![Rational::one()];
    checks.push(AxiomCheck { axiom: "i", passed: ok, cases: 1, detail: format!("dims of A_0: {:?}", (0..=n_max + 1).map(|k| a0.dim(k)).collect::<Vec<_>>()) });

    let mut fails = Vec::new();
    let mut cases = 0;
    for n in 0..=n_max {
        let s = FormSpace::new(n, weight, n);
        for k in 0..=n {
            cases += 1;
            let expect = binomial(n, k) * binomial(weight - k + n, n);
            // each basis element is p(t)·dt_S with p a monomial and S a k-set
            let split = (0..s.dim(k)).all(|i| {
                let f = s.basis_form(k, i);
                let (e, m) = f.terms.keys().next().expect("basis term").clone();
                let poly = PolyForm::term(n, e, 0, Rational::one());
                let ext = (0..n).filter(|j| m >> j & 1 == 1).fold(PolyForm::constant(n, Rational::one()), |acc, j| acc.wedge(&PolyForm::dt(n, j + 1)));
                poly.wedge(&ext) == f
            });
            if s.dim(k) != expect || !split {
                fails.push(format!("Δ[{n}] degree {k}: dim {} expected {expect}", s.dim(k)));
            }
        }
    }
    checks.push(AxiomCheck { axiom: "ii", passed: fails.is_empty(), cases, detail: fails.join("; ") });

    let mut fails = Vec::new();
    let mut cases = 0;
    for n in 0..=n_max {
        let s = FormSpace::new(n, weight, n + 1);
        for k in 0..=n {
            for i in 0..s.dim(k) {
                cases += 1;
                let f = s.basis_form(k, i);
                let lhs = f.contraction().d().add(&f.d().contraction());
                if lhs != f.minus_augmentation() {
                    fails.push(format!("contraction identity on Δ[{n}] fails for a degree-{k} basis form"));
                }
            }
        }
        match cohomology(&s.dga(), n) {
            Ok(h) => {
                let dims = h.dims();
                if dims[0] != 1 || dims[1..].iter().any(|&x| x != 0) {
                    fails.push(format!("Δ[{n}] cohomology {dims:?}"));
                }
            }
            Err(e) => fails.push(e.to_string()),
        }
    }
    checks.push(AxiomCheck { axiom: "iii", passed: fails.is_empty(), cases, detail: fails.join("; ") });

    let mut fails = Vec::new();
    let mut cases = 0;
    'outer: while cases < sample_budget {
        for n in 1..=n_max {
            let full = SimplicialComplexK::full_simplex(n);
            for l in sample_subcomplexes(n) {
                let p = rng.gen_range(0..=n.min(l.dim()));
                cases += 1;
                let outcome = random_family(rng, &l, p, 2).and_then(|omega| {
                    let ext = extend(&omega, &full)?;
                    Ok(ext.restrict(&l)? == omega)
                });
                match outcome {
                    Ok(true) => {}
                    Ok(false) => fails.push(format!("extension from a subcomplex of Δ[{n}] does not restrict back")),
                    Err(e) => fails.push(e.to_string()),
                }
                if cases >= sample_budget {
                    break 'outer;
                }
            }
        }
        if n_max == 0 {
            break;
        }
    }
    checks.push(AxiomCheck { axiom: "iv", passed: fails.is_empty(), cases, detail: fails.join("; ") });

    let mut fails = Vec::new();
    let mut cases = 0;
    while cases < sample_budget && n_max >= 1 {
        let n = 1 + cases % n_max;
        let f = PolyForm::random(rng, n, 0, 3);
        if f.weight() == 0 {
            continue;
        }
        cases += 1;
        match log_derivative_solvable(&f, f.weight() + 2) {
            Ok(false) => {}
            Ok(true) => fails.push(format!("df = f w solvable on Δ[{n}] for a nonconstant f")),
            Err(e) => fails.push(e.to_string()),
        }
    }
    checks.push(AxiomCheck { axiom: "v", passed: fails.is_empty(), cases, detail: fails.join("; ") });

    AdmissibilityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::qf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(n: usize, e: &[u32], dts: &[usize]) -> PolyForm {
        let m = dts.iter().fold(0u32, |acc, i| acc | 1 << (i - 1));
        PolyForm::term(n, e.to_vec(), m, Rational::one())
    }

    #[test]
    fn exterior_derivative_examples() {
        assert_eq!(PolyForm::coordinate(1, 1).d(), t(1, &[0], &[1]));
        assert_eq!(t(2, &[1, 1], &[]).d(), t(2, &[0, 1], &[1]).add(&t(2, &[1, 0], &[2])));
        assert_eq!(t(2, &[2, 0], &[2]).d(), t(2, &[1, 0], &[1, 2]).scale(&q(2)));
    }

    #[test]
    fn face_examples() {
        assert!(t(1, &[0], &[1]).face(1).is_zero());
        assert_eq!(PolyForm::coordinate(1, 1).face(0), PolyForm::constant(0, Rational::one()));
        assert!(PolyForm::coordinate(1, 1).face(1).is_zero());
    }

    #[test]
    fn integral_examples() {
        assert_eq!(t(1, &[0], &[1]).integrate().unwrap(), q(1));
        assert_eq!(t(1, &[1], &[1]).integrate().unwrap(), qf(1, 2));
        assert_eq!(t(2, &[1, 1], &[1, 2]).integrate().unwrap(), qf(1, 24));
        assert!(t(2, &[0, 0], &[1]).integrate().is_err());
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(t(1, &[0], &[1]).contraction(), PolyForm::coordinate(1, 1));
        assert!(PolyForm::constant(2, q(1)).contraction().is_zero());
    }

    #[test]
    fn forms_on_interval_are_acyclic() {
        let a = forms_dga(1, 4, 2);
        a.validate().unwrap();
        assert_eq!(cohomology(&a, 1).unwrap().dims(), vec![1, 0]);
    }

    #[test]
    fn extend_from_endpoints() {
        let l = SimplicialComplexK::from_simplices(2, &[]).unwrap();
        let omega = SimplicialForm::new(l, vec![vec![PolyForm::constant(0, q(0)), PolyForm::constant(0, q(1))]]).unwrap();
        let ext = extend(&omega, &SimplicialComplexK::full_simplex(1)).unwrap();
        assert_eq!(ext.form(&[0, 1]).unwrap(), &PolyForm::coordinate(1, 1));
    }

    #[test]
    fn extend_rejects_incompatible_family() {
        let l = SimplicialComplexK::full_simplex(1);
        let bad = SimplicialForm { complex: l.clone(), forms: vec![vec![PolyForm::constant(0, q(0)), PolyForm::constant(0, q(0))], vec![PolyForm::coordinate(1, 1)]] };
        assert!(matches!(extend(&bad, &l), Err(Error::Input(_))));
    }

    #[test]
    fn log_derivative_of_coordinate() {
        assert!(!log_derivative_solvable(&PolyForm::coordinate(1, 1), 6).unwrap());
        assert!(log_derivative_solvable(&PolyForm::constant(1, q(3)), 2).unwrap());
    }

    #[test]
    fn small_admissibility_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = check_admissible_axioms(2, 10, &mut rng);
        assert!(r.all_passed(), "{r:?}");
    }
}
