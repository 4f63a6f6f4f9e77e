//! Minimal Sullivan models of simply connected DGAs, built one degree at a
//! time, and the standard model of the free loop space.

use std::sync::Arc;

use num::One;

use crate::cdga::{cohomology, DGMorphism, FreeCDGA, TruncatedDGA};
use crate::error::{Error, Result};
use crate::exactlin::{complement_basis, kernel_basis, solve, QVector, Rational};
use crate::graded::{Element, FreeGCA, GeneratorSpec, Monomial};

#[derive(Clone, Debug)]
pub struct MinimalModelResult {
    pub model: FreeCDGA,
    /// Map from the truncated model into the target.
    pub comparison: DGMorphism,
    pub built_upto: usize,
}

fn vector_to_element(alg: &FreeGCA, k: u32, v: &[Rational]) -> Element {
    let mut e = Element::zero();
    for (m, c) in alg.basis_in_degree(k).into_iter().zip(v) {
        e.add_term(m, c.clone());
    }
    e
}

fn comparison(model: &FreeCDGA, target: &Arc<TruncatedDGA>, images: &[QVector]) -> Result<DGMorphism> {
    Ok(DGMorphism::from_free(model, target.clone(), images)?.1)
}

/// Minimal model of a simply connected target. Generators of degree `n` are
/// added for `2 <= n < upto`: first closed ones hitting the cokernel of
/// `H^n(model) → H^n(target)`, then ones whose differentials kill the kernel
/// in degree `n + 1`. The comparison is a quasi-isomorphism through degree
/// `upto - 1` and injective in degree `upto`.
///
/// Generators are named `v{degree}_{index}`.
pub fn minimal_model(target: &TruncatedDGA, upto: usize) -> Result<MinimalModelResult> {
    if upto >= target.cutoff() {
        return Err(Error::CutoffTooSmall { needed: upto + 1, context: format!("minimal model through degree {upto}") });
    }
    let h = cohomology(target, upto)?;
    if h.dim(0) != 1 || (upto >= 1 && h.dim(1) != 0) {
        return Err(Error::Precondition(format!(
            "target is not simply connected: H^0 has dimension {}, H^1 has dimension {}",
            h.dim(0),
            if upto >= 1 { h.dim(1) } else { 0 }
        )));
    }
    let mut model = FreeCDGA::new(FreeGCA::new(Vec::new())?, Vec::new())?;
    let mut images: Vec<QVector> = Vec::new();
    for n in 2..upto {
        let tgt = Arc::new(target.with_cutoff(n + 2)?);
        let ht = cohomology(&tgt, n + 1)?;

        // closed generators for the cokernel in degree n
        let phi = comparison(&model, &tgt, &images)?;
        let hm = cohomology(phi.source(), n + 1)?;
        let ind = phi.induced_map_with(&hm, &ht)?;
        let cols: Vec<QVector> = (0..ind[n].cols()).map(|j| ind[n].column(j)).collect();
        for (k, c) in complement_basis(&cols, ht.dim(n)).into_iter().enumerate() {
            model.push_generator(GeneratorSpec::new(format!("v{n}_{k}"), n as u32), Element::zero())?;
            images.push(ht.quotient(n).rep_combination(&c));
        }
        let offset = complement_basis(&cols, ht.dim(n)).len();

        // generators killing the kernel in degree n + 1
        let phi = comparison(&model, &tgt, &images)?;
        let hm = cohomology(phi.source(), n + 1)?;
        let ind = phi.induced_map_with(&hm, &ht)?;
        for (k, kappa) in kernel_basis(&ind[n + 1]).into_iter().enumerate() {
            let z = hm.quotient(n + 1).rep_combination(&kappa);
            let fz = phi.apply(n + 1, &z);
            let a = solve(tgt.d_matrix(n)?, &fz)?.ok_or_else(|| {
                Error::Input(format!("image of a model cocycle in degree {} is not exact", n + 1))
            })?;
            let dz = vector_to_element(model.algebra(), n as u32 + 1, &z);
            model.push_generator(GeneratorSpec::new(format!("v{n}_{}", offset + k), n as u32), dz)?;
            images.push(a);
        }
    }
    let comparison = comparison(&model, &Arc::new(target.clone()), &images)?;
    Ok(MinimalModelResult { model, comparison, built_upto: upto })
}

/// Outcome of [`minimality_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityReport {
    pub minimal: bool,
    pub offending: Option<String>,
}

/// Minimal iff no generator's differential has a linear (or constant) term.
pub fn minimality_check(f: &FreeCDGA) -> MinimalityReport {
    let alg = f.algebra();
    for (i, d) in f.differentials().iter().enumerate() {
        if d.min_word_length().is_some_and(|w| w < 2) {
            return MinimalityReport { minimal: false, offending: Some(alg.generators()[i].name.clone()) };
        }
    }
    MinimalityReport { minimal: true, offending: None }
}

/// The degree `-1` derivation `s` of the loop model: `s(v) = (-1)^{|v|} v̄`
/// and `s(v̄) = 0`. Generators `0..nbase` are `V`, the next `nbase` are `V̄`.
pub fn loop_shift(alg: &FreeGCA, nbase: usize, e: &Element) -> Element {
    let mut out = Element::zero();
    for (m, c) in e.terms() {
        let exps = m.exponents();
        let mut prefix_deg = 0u32;
        for i in 0..exps.len().min(nbase) {
            let ex = exps[i];
            if ex == 0 {
                continue;
            }
            let mut pre = exps[..i].to_vec();
            pre.push(0);
            let mut post = vec![0; exps.len()];
            post[i + 1..].copy_from_slice(&exps[i + 1..]);
            let mut lowered = vec![0; i + 1];
            lowered[i] = ex - 1;
            let deg = alg.gen_degree(i);
            let sv = if deg % 2 == 0 { Rational::one() } else { -Rational::one() };
            let middle = alg.multiply_unchecked(
                &Element::monomial(Monomial::from_exponents(lowered), Rational::from_integer(ex.into())),
                &Element::monomial(Monomial::generator(nbase + i), sv),
            );
            let sign = if prefix_deg % 2 == 1 { -Rational::one() } else { Rational::one() };
            let left = Element::monomial(Monomial::from_exponents(pre), sign * c);
            let right = Element::monomial(Monomial::from_exponents(post), Rational::one());
            out = out.add(&alg.multiply_unchecked(&alg.multiply_unchecked(&left, &middle), &right));
            prefix_deg += ex * deg;
        }
    }
    out
}

/// Model `∧(V ⊕ V̄)` of the free loop space of a simply connected minimal
/// model `∧V`: `|v̄| = |v| - 1`, `d` unchanged on `V`, and
/// `d(v̄) = (-1)^{|v|+1} s(dv)`, which is what `ds + sd = 0` forces given
/// `s(v) = (-1)^{|v|} v̄`. For `d(y) = x^{n+1}` this gives
/// `d(ȳ) = (n+1) x̄ x^n`. Bar generators are named `{name}_bar`.
pub fn loop_model(base: &FreeCDGA) -> Result<FreeCDGA> {
    let report = minimality_check(base);
    if !report.minimal {
        return Err(Error::Precondition(format!(
            "loop model needs a minimal model; d({}) has a linear term",
            report.offending.unwrap_or_default()
        )));
    }
    let alg = base.algebra();
    let nbase = alg.ngens();
    let mut specs: Vec<GeneratorSpec> = alg.generators().to_vec();
    for g in alg.generators() {
        if g.degree < 2 {
            return Err(Error::Precondition(format!("generator {} has degree {}, need >= 2", g.name, g.degree)));
        }
        specs.push(GeneratorSpec::new(format!("{}_bar", g.name), g.degree - 1));
    }
    let loop_alg = FreeGCA::new(specs)?;
    let mut diffs: Vec<Element> = base.differentials().to_vec();
    for (g, d) in alg.generators().iter().zip(base.differentials()) {
        let sign = if g.degree % 2 == 0 { -Rational::one() } else { Rational::one() };
        diffs.push(loop_shift(&loop_alg, nbase, d).scale(&sign));
    }
    let out = FreeCDGA::new(loop_alg, diffs)?;
    if let Err(f) = out.check_d_squared() {
        return Err(Error::Input(format!("loop model has d^2 != 0 on {}", f.generator)));
    }
    Ok(out)
}

/// Number of generators of each degree `0..=max_degree`.
pub fn generator_counts(f: &FreeCDGA, max_degree: usize) -> Vec<usize> {
    let mut out = vec![0; max_degree + 1];
    for g in f.algebra().generators() {
        if (g.degree as usize) <= max_degree {
            out[g.degree as usize] += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::{quotient_by_monomials, truncate};

    fn cp(n: u32) -> TruncatedDGA {
        let f = FreeCDGA::parse(&[("x", 2)], &[]).unwrap();
        quotient_by_monomials(&f, &[Monomial::from_exponents(vec![n + 1])], 2 * n as usize + 3).unwrap()
    }

    #[test]
    fn model_of_cp1() {
        let r = minimal_model(&cp(1), 4).unwrap();
        let alg = r.model.algebra();
        assert_eq!(alg.ngens(), 2);
        assert_eq!(alg.gen_degree(0), 2);
        assert_eq!(alg.gen_degree(1), 3);
        assert_eq!(alg.format_element(r.model.generator_differential(1)), "v2_0^2");
        assert!(minimality_check(&r.model).minimal);
    }

    #[test]
    fn odd_sphere_is_its_own_model() {
        let s3 = truncate(&FreeCDGA::parse(&[("z", 3)], &[]).unwrap(), 7);
        let r = minimal_model(&s3, 6).unwrap();
        assert_eq!(generator_counts(&r.model, 6), vec![0, 0, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn non_simply_connected_rejected() {
        let s1 = truncate(&FreeCDGA::parse(&[("t", 1)], &[]).unwrap(), 4);
        assert!(matches!(minimal_model(&s1, 3), Err(Error::Precondition(_))));
        assert!(matches!(minimal_model(&cp(1), 5), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn minimality_examples() {
        let good = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[("y", "x^2")]).unwrap();
        assert!(minimality_check(&good).minimal);
        let bad = FreeCDGA::parse(&[("w", 3), ("z", 2), ("c", 2)], &[("c", "w")]).unwrap();
        assert_eq!(minimality_check(&bad).offending.as_deref(), Some("c"));
        let contractible = FreeCDGA::parse(&[("u", 2), ("v", 3)], &[("u", "v")]).unwrap();
        assert!(!minimality_check(&contractible).minimal);
    }

    #[test]
    fn loop_model_of_cp1() {
        let base = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[("y", "x^2")]).unwrap();
        let l = loop_model(&base).unwrap();
        let alg = l.algebra();
        assert_eq!(alg.format_element(l.generator_differential(3)), "2*x*x_bar");
        assert!(l.generator_differential(2).is_zero());
        let z = FreeCDGA::parse(&[("z", 3)], &[]).unwrap();
        let lz = loop_model(&z).unwrap();
        assert_eq!(lz.algebra().gen_degree(1), 2);
        assert!(lz.generator_differential(1).is_zero());
    }
}
