//! Free graded-commutative algebras on finitely many positive-degree
//! generators.
//!
//! Monomials store exponents in generator declaration order. Odd generators
//! square to zero, and reordering odd generators past each other picks up
//! the Koszul sign.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{format_rational, parse_rational, q, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSpec {
    pub name: String,
    pub degree: u32,
}

impl GeneratorSpec {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        GeneratorSpec { name: name.into(), degree }
    }
}

/// Exponent vector with trailing zeros trimmed, so monomials stay valid when
/// generators are appended to an algebra.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_exponents(mut e: Vec<u32>) -> Self {
        while e.last() == Some(&0) {
            e.pop();
        }
        Monomial(e)
    }

    pub fn generator(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of generator factors counted with multiplicity.
    pub fn word_length(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn support_len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial{:?}", self.0)
    }
}

impl Ord for Monomial {
    /// Larger exponents on earlier generators sort first.
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.0.len().max(other.0.len());
        for i in 0..n {
            match other.exponent(i).cmp(&self.exponent(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite linear combination of monomials.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct Element {
    terms: BTreeMap<Monomial, Rational>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn one() -> Self {
        Element::monomial(Monomial::unit(), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut e = Element::zero();
        e.add_term(m, c);
        e
    }

    pub fn generator(i: usize) -> Self {
        Element::monomial(Monomial::generator(i), Rational::one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(&q(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Largest generator index referenced, plus one.
    pub fn support_len(&self) -> usize {
        self.terms.keys().map(Monomial::support_len).max().unwrap_or(0)
    }

    pub fn min_word_length(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::word_length).min()
    }
}

/// Free graded-commutative algebra `∧V` on an ordered list of generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeGCA {
    generators: Vec<GeneratorSpec>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl FreeGCA {
    pub fn new(generators: Vec<GeneratorSpec>) -> Result<Self> {
        let mut alg = FreeGCA { generators: Vec::new() };
        for g in generators {
            alg.push_generator(g)?;
        }
        Ok(alg)
    }

    pub fn push_generator(&mut self, g: GeneratorSpec) -> Result<usize> {
        if g.degree == 0 {
            return Err(Error::Input(format!("generator {} has degree 0", g.name)));
        }
        if !is_identifier(&g.name) {
            return Err(Error::Input(format!("generator name {:?} is not an identifier", g.name)));
        }
        if self.index_of(&g.name).is_some() {
            return Err(Error::Input(format!("duplicate generator name {}", g.name)));
        }
        self.generators.push(g);
        Ok(self.generators.len() - 1)
    }

    pub fn generators(&self) -> &[GeneratorSpec] {
        &self.generators
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.name == name)
    }

    pub fn gen_degree(&self, i: usize) -> u32 {
        self.generators[i].degree
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.generators[i].degree % 2 == 1
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.support_len() > self.ngens() {
            return Err(Error::Input(format!(
                "monomial uses generator {} but the algebra has {}",
                m.support_len() - 1,
                self.ngens()
            )));
        }
        for (i, &e) in m.exponents().iter().enumerate() {
            if e > 1 && self.is_odd(i) {
                return Err(Error::Input(format!("odd generator {} with exponent {e}", self.generators[i].name)));
            }
        }
        Ok(())
    }

    pub fn check_element(&self, e: &Element) -> Result<()> {
        e.terms().try_for_each(|(m, _)| self.check_monomial(m))
    }

    pub fn degree(&self, m: &Monomial) -> u32 {
        m.exponents().iter().enumerate().map(|(i, &e)| e * self.gen_degree(i)).sum()
    }

    /// Degree of a homogeneous nonzero element; `None` for zero or mixed.
    pub fn homogeneous_degree(&self, e: &Element) -> Option<u32> {
        let mut degs = e.terms().map(|(m, _)| self.degree(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Product of monomials with its Koszul sign, or `None` when an odd
    /// generator would appear twice.
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let n = a.support_len().max(b.support_len());
        let mut exps = vec![0; n];
        let mut negative = false;
        // odd generators of `a` with index greater than the current one
        let mut odd_a_after = 0u32;
        for i in (0..n).rev() {
            let (ea, eb) = (a.exponent(i), b.exponent(i));
            if self.is_odd(i) {
                if ea > 0 && eb > 0 {
                    return None;
                }
                if eb > 0 && odd_a_after % 2 == 1 {
                    negative = !negative;
                }
                if ea > 0 {
                    odd_a_after += 1;
                }
            }
            exps[i] = ea + eb;
        }
        Some((negative, Monomial::from_exponents(exps)))
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(self.multiply_unchecked(a, b))
    }

    pub(crate) fn multiply_unchecked(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if let Some((neg, m)) = self.mul_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// Monomials of total degree `n`, larger exponents on earlier generators
    /// first.
    pub fn basis_in_degree(&self, n: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; self.ngens()];
        self.enumerate(0, n, &mut exps, &mut out);
        out
    }

    fn enumerate(&self, i: usize, remaining: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if remaining == 0 {
            out.push(Monomial::from_exponents(exps.clone()));
            return;
        }
        if i == self.ngens() {
            return;
        }
        let d = self.gen_degree(i);
        let max = if self.is_odd(i) { (remaining / d).min(1) } else { remaining / d };
        for e in (0..=max).rev() {
            exps[i] = e;
            self.enumerate(i + 1, remaining - e * d, exps, out);
        }
        exps[i] = 0;
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".into();
        }
        let parts: Vec<String> = m
            .exponents()
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                let name = &self.generators[i].name;
                if e == 1 {
                    name.clone()
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect();
        parts.join("*")
    }

    pub fn format_element(&self, e: &Element) -> String {
        if e.is_zero() {
            return "0".into();
        }
        let mut terms: Vec<(&Monomial, &Rational)> = e.terms().collect();
        terms.sort_by(|a, b| self.degree(a.0).cmp(&self.degree(b.0)).then(a.0.cmp(b.0)));
        let mut s = String::new();
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_unit() {
                s.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                s.push_str(&self.format_monomial(m));
            } else {
                s.push_str(&format!("{}*{}", format_rational(&abs), self.format_monomial(m)));
            }
        }
        s
    }

    /// Parses sums of products such as `x^2*y - 3/2*x*z + 1`. Factors are
    /// multiplied left to right, so written order determines signs.
    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let src = s.trim();
        if src.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        let mut prev_significant: Option<char> = None;
        for ch in src.chars() {
            let binary = matches!(prev_significant, Some(p) if p != '*' && p != '^' && p != '/');
            if (ch == '+' || ch == '-') && binary {
                terms.push((neg, std::mem::take(&mut cur)));
                neg = ch == '-';
                prev_significant = None;
                continue;
            }
            if (ch == '+' || ch == '-') && prev_significant.is_none() && cur.trim().is_empty() {
                if ch == '-' {
                    neg = !neg;
                }
                continue;
            }
            if !ch.is_whitespace() {
                prev_significant = Some(ch);
            }
            cur.push(ch);
        }
        terms.push((neg, cur));
        let mut total = Element::zero();
        for (neg, t) in terms {
            let mut term = self.parse_term(&t)?;
            if neg {
                term = term.scale(&q(-1));
            }
            total = total.add(&term);
        }
        Ok(total)
    }

    fn parse_term(&self, t: &str) -> Result<Element> {
        let t = t.trim();
        if t.is_empty() {
            return Err(Error::Parse("empty term".into()));
        }
        let mut acc = Element::one();
        for factor in t.split('*').map(str::trim) {
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in {t:?}")));
            }
            let first = factor.chars().next().unwrap_or(' ');
            let f = if first.is_ascii_digit() {
                Element::monomial(Monomial::unit(), parse_rational(factor)?)
            } else {
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => {
                        let e: u32 = e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?;
                        (n.trim(), e)
                    }
                    None => (factor, 1),
                };
                let i = self
                    .index_of(name)
                    .ok_or_else(|| Error::Parse(format!("unknown generator {name:?}")))?;
                let mut p = Element::one();
                for _ in 0..exp {
                    p = self.multiply_unchecked(&p, &Element::generator(i));
                }
                p
            };
            acc = self.multiply_unchecked(&acc, &f);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(gens: &[(&str, u32)]) -> FreeGCA {
        FreeGCA::new(gens.iter().map(|(n, d)| GeneratorSpec::new(*n, *d)).collect()).unwrap()
    }

    #[test]
    fn odd_square_vanishes() {
        let a = alg(&[("x", 3)]);
        let x = Element::generator(0);
        assert!(a.multiply(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn koszul_sign_on_degree_one() {
        let a = alg(&[("t1", 1), ("t2", 1)]);
        let p = a.multiply(&Element::generator(1), &Element::generator(0)).unwrap();
        assert_eq!(p, a.parse_element("-t1*t2").unwrap());
        assert_eq!(a.format_element(&p), "-t1*t2");
    }

    #[test]
    fn associativity_instance() {
        let a = alg(&[("xb", 1), ("x", 2), ("y", 3)]);
        let (xb, x, y) = (Element::generator(0), Element::generator(1), Element::generator(2));
        let l = a.multiply(&a.multiply(&xb, &x).unwrap(), &y).unwrap();
        let r = a.multiply(&xb, &a.multiply(&x, &y).unwrap()).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn basis_examples() {
        let a = alg(&[("x", 2)]);
        assert_eq!(a.basis_in_degree(4), vec![Monomial::from_exponents(vec![2])]);
        let t = alg(&[("t1", 1), ("t2", 1)]);
        assert_eq!(t.basis_in_degree(2), vec![Monomial::from_exponents(vec![1, 1])]);
        assert_eq!(t.basis_in_degree(1).len(), 2);
        assert_eq!(t.format_monomial(&t.basis_in_degree(1)[0]), "t1");
        let xy = alg(&[("x", 2), ("y", 3)]);
        assert_eq!(xy.basis_in_degree(5), vec![Monomial::from_exponents(vec![1, 1])]);
        assert_eq!(xy.basis_in_degree(6), vec![Monomial::from_exponents(vec![3])]);
        assert_eq!(xy.basis_in_degree(0), vec![Monomial::unit()]);
    }

    #[test]
    fn rejects_bad_generators_and_foreign_elements() {
        assert!(FreeGCA::new(vec![GeneratorSpec::new("u", 0)]).is_err());
        assert!(FreeGCA::new(vec![GeneratorSpec::new("u", 1), GeneratorSpec::new("u", 2)]).is_err());
        let a = alg(&[("x", 2)]);
        let foreign = Element::generator(3);
        assert!(matches!(a.multiply(&foreign, &Element::one()), Err(Error::Input(_))));
    }

    #[test]
    fn parse_and_format_round_trip() {
        let a = alg(&[("x", 2), ("y", 3), ("z", 1)]);
        let e = a.parse_element("x^2*y - 3/2*x*z + 1").unwrap();
        let back = a.parse_element(&a.format_element(&e)).unwrap();
        assert_eq!(e, back);
        assert!(a.parse_element("w").is_err());
        assert!(a.parse_element("0.5*x").is_err());
    }
}
