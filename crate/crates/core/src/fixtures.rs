//! Small named instances shared by tests, benches and the command line.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cdga::{direct_product, point, quotient_by_monomials, truncate, DGMorphism, FreeCDGA, TruncatedDGA};
use crate::error::Result;
use crate::exactlin::{q, QMatrix};
use crate::gluing::{fiber_product, suspension_triple, FiberProductDGA, SuspensionTriple};
use crate::graded::Monomial;
use crate::localsys::{
    fiber_product_morphism, fiber_product_system, forms_system, forms_system_morphism, odd_sphere_bundle,
    projection_forms_system, FiberProductSystem, FiniteLocalSystem, SystemMorphism,
};
use crate::polyforms::{forms_dga, PolyForm, SimplicialForm};
use crate::simplicial::{SimplicialComplexK, SimplicialMap};

/// `∧(t₁, t₂)` with `|tᵢ| = 1` and zero differential.
pub fn torus() -> FreeCDGA {
    FreeCDGA::parse(&[("t1", 1), ("t2", 1)], &[]).expect("valid generators")
}

/// `ℚ[x]/(x^{n+1})` with `|x| = 2`.
pub fn cpn(n: u32, cutoff: usize) -> TruncatedDGA {
    let f = FreeCDGA::parse(&[("x", 2)], &[]).expect("valid generator");
    quotient_by_monomials(&f, &[Monomial::from_exponents(vec![n + 1])], cutoff).expect("monomial ideal")
}

/// `ℚ[x]/(x²)` with `x` in degree `deg`.
pub fn dual_numbers(deg: u32, cutoff: usize) -> TruncatedDGA {
    let f = FreeCDGA::parse(&[("x", deg)], &[]).expect("valid generator");
    quotient_by_monomials(&f, &[Monomial::from_exponents(vec![2])], cutoff).expect("monomial ideal")
}

/// `∧t` with `|t| = 1`.
pub fn circle(cutoff: usize) -> TruncatedDGA {
    truncate(&FreeCDGA::parse(&[("t", 1)], &[]).expect("valid generator"), cutoff)
}

/// The automorphism negating every basis element of positive degree; on
/// `ℚ[x]/(x²)` this is `x ↦ -x`.
pub fn negate_positive(f: &Arc<TruncatedDGA>) -> DGMorphism {
    let maps = (0..=f.cutoff())
        .map(|k| {
            let mut m = QMatrix::identity(f.dim(k));
            if k > 0 {
                m = m.scale(&q(-1));
            }
            m
        })
        .collect();
    DGMorphism::new(f.clone(), f.clone(), maps).expect("square matrices")
}

/// Forms on the 3-vertex circle tensored with `ℚ[x]/(x²)`, `|x| = 2`, with
/// `x ↦ -x` across the edge `{0, 2}` when `twisted`.
pub fn circle_system(twisted: bool, weight: usize, cutoff: usize) -> Result<FiniteLocalSystem> {
    let f = Arc::new(dual_numbers(2, cutoff));
    let mut twists = BTreeMap::new();
    if twisted {
        twists.insert((0, 2), negate_positive(&f));
    }
    forms_system(&SimplicialComplexK::cycle(3), weight, &f, &twists)
}

/// The connected double cover of the 3-vertex circle: the 6-cycle
/// `0-2-4-1-3-5-0` over `0, 0, 1, 1, 2, 2`.
pub fn double_cover() -> (SimplicialComplexK, SimplicialMap) {
    let edges = [vec![0, 2], vec![2, 4], vec![1, 4], vec![1, 3], vec![3, 5], vec![0, 5]];
    let c6 = SimplicialComplexK::from_simplices(6, &edges).expect("valid cycle");
    let u = SimplicialMap::new(&c6, &SimplicialComplexK::cycle(3), vec![0, 0, 1, 1, 2, 2]).expect("simplicial");
    (c6, u)
}

/// `A(Δ[1]) → ℚ × ℚ ← ℚ`: endpoint evaluation against the diagonal. The
/// fiber product models the circle.
pub fn circle_from_interval(weight: usize, upto: usize) -> Result<FiberProductDGA> {
    let n = upto + 1;
    let interval = Arc::new(forms_dga(1, weight, n));
    let ends = Arc::new(direct_product(&point(n), &point(n)));
    let pt = Arc::new(point(n));
    let tri = suspension_triple(&point(n), weight)?;
    let f = DGMorphism::new(interval, ends.clone(), tri.f.matrices().to_vec())?;
    let g_maps = (0..=n).map(|k| if k == 0 { QMatrix::from_i64(&[&[1], &[1]]) } else { QMatrix::zeros(0, 0) }).collect();
    let g = DGMorphism::new(pt, ends, g_maps)?;
    fiber_product(&f, &g, upto)
}

/// The suspension triple of `m` promoted to constant forms systems over
/// `base` with forms of weight `weight`, glued into a fiber-product system
/// with cohomology through `upto`.
pub fn suspension_system(base: &SimplicialComplexK, m: &TruncatedDGA, weight: usize, interval_weight: usize, upto: usize) -> Result<(SuspensionTriple, FiberProductSystem)> {
    let tri = suspension_triple(m, interval_weight)?;
    let none = BTreeMap::new();
    let e1 = forms_system(base, weight, &tri.cylinder, &none)?;
    let e0 = forms_system(base, weight, &tri.ends, &none)?;
    let e2 = forms_system(base, weight, &tri.points, &none)?;
    let f = forms_system_morphism(&e1, &e0, weight, &tri.f)?;
    let g = forms_system_morphism(&e2, &e0, weight, &tri.g)?;
    let fp = fiber_product_system(&f, &g, upto)?;
    Ok((tri, fp))
}

/// Odd sphere bundle over `∂Δ[3]` twisted by `dt₁ ∧ dt₂` on the face
/// `[0, 1, 2]`, so the Euler class generates `H²` of the base.
pub fn sphere_bundle(weight: usize, cutoff: usize) -> Result<FiniteLocalSystem> {
    let s2 = SimplicialComplexK::boundary_of_simplex(3);
    let omega = SimplicialForm::from_fn(s2, |s| {
        if s == &vec![0, 1, 2] {
            PolyForm::dt(2, 1).wedge(&PolyForm::dt(2, 2))
        } else {
            PolyForm::zero(s.len() - 1)
        }
    })?;
    odd_sphere_bundle(&omega, weight, cutoff)
}

/// Two triples over `base` and a morphism between them. The source is the
/// constant suspension triple of the circle `∧t`; the target replaces the
/// two cone points by two copies of `∧z`, `|z| = 3`, mapped into the ends
/// through the augmentation. The morphism is the identity on the cylinder
/// and the ends and the unit inclusion on the third term.
pub struct CompareInstance {
    pub source: FiberProductSystem,
    pub target: FiberProductSystem,
    pub morphism: SystemMorphism,
    /// Degree of the designated fiber class `[t ⊗ dt]`.
    pub xi_degree: usize,
}

pub fn compare_instance(base: &SimplicialComplexK, weight: usize, upto: usize) -> Result<CompareInstance> {
    let n = upto + 1;
    let m = circle(n);
    let tri = suspension_triple(&m, 1)?;
    let z = truncate(&FreeCDGA::parse(&[("z", 3)], &[])?, n);
    let spheres = Arc::new(direct_product(&z, &z));
    // augmentation of each factor, then into the ends by the unit
    let g_maps = (0..=n)
        .map(|k| {
            let mut mat = QMatrix::zeros(tri.ends.dim(k), spheres.dim(k));
            if k == 0 {
                for e in 0..2 {
                    for (p, x) in m.unit().iter().enumerate() {
                        mat.set(e * m.dim(0) + p, e, x.clone());
                    }
                }
            }
            mat
        })
        .collect();
    let g2 = DGMorphism::new(spheres.clone(), tri.ends.clone(), g_maps)?;
    let incl_maps = (0..=n)
        .map(|k| {
            let mut mat = QMatrix::zeros(spheres.dim(k), tri.points.dim(k));
            if k == 0 {
                mat = QMatrix::identity(2);
            }
            mat
        })
        .collect();
    let incl = DGMorphism::new(tri.points.clone(), spheres.clone(), incl_maps)?;
    let none = BTreeMap::new();
    let e1 = forms_system(base, weight, &tri.cylinder, &none)?;
    let e0 = forms_system(base, weight, &tri.ends, &none)?;
    let e2 = forms_system(base, weight, &tri.points, &none)?;
    let e2t = forms_system(base, weight, &spheres, &none)?;
    let f = forms_system_morphism(&e1, &e0, weight, &tri.f)?;
    let g = forms_system_morphism(&e2, &e0, weight, &tri.g)?;
    let gt = forms_system_morphism(&e2t, &e0, weight, &g2)?;
    let source = fiber_product_system(&f, &g, upto)?;
    let target = fiber_product_system(&f, &gt, upto)?;
    let id1 = forms_system_morphism(&e1, &e1, weight, &DGMorphism::identity(tri.cylinder.clone()))?;
    let third = forms_system_morphism(&e2, &e2t, weight, &incl)?;
    let morphism = fiber_product_morphism(&source, &target, &id1, &third)?;
    Ok(CompareInstance { source, target, morphism, xi_degree: 2 })
}

/// `Δ[2] × ∂Δ[2]` (staircase) projected onto `Δ[2]`, with its system of
/// truncated forms on preimages.
pub fn product_projection(weight: usize, cutoff: usize) -> Result<(SimplicialComplexK, FiniteLocalSystem)> {
    let base = SimplicialComplexK::full_simplex(2);
    let total = SimplicialComplexK::product(&base, &SimplicialComplexK::boundary_of_simplex(2));
    let p = SimplicialMap::new(&total, &base, (0..9).map(|v| v / 3).collect())?;
    let e = projection_forms_system(&total, &base, &p, weight, cutoff)?;
    Ok((total, e))
}
