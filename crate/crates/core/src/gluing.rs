//! Fiber products of DGA morphisms as models of glued spaces, their
//! Mayer–Vietoris sequences, and the small model of an unreduced suspension.

use std::sync::Arc;

use num::One;

use crate::cdga::{cohomology, direct_product, point, same_algebra, tensor, DGMorphism, GradedCohomology, TensorLayout, TruncatedDGA};
use crate::error::{Error, Result};
use crate::exactlin::{complement_basis, solve, unit_vec, zero_vec, QMatrix, QVector, Rational, Subspace};
use crate::par;
use crate::polyforms::FormSpace;

/// `A ×_C B` for `f: A → C` and `g: B → C`, as pairs `(a, b)` with
/// `f(a) = g(b)`.
#[derive(Clone, Debug)]
pub struct FiberProductDGA {
    f: DGMorphism,
    g: DGMorphism,
    carrier: Arc<TruncatedDGA>,
    spaces: Vec<Subspace>,
    pr_a: DGMorphism,
    pr_b: DGMorphism,
}

/// Fiber product with carrier cutoff `upto + 1`, so cohomology is available
/// through degree `upto`.
pub fn fiber_product(f: &DGMorphism, g: &DGMorphism, upto: usize) -> Result<FiberProductDGA> {
    if !same_algebra(f.target(), g.target()) {
        return Err(Error::Input("fiber product legs must have a common target".into()));
    }
    let n = upto + 1;
    if f.top_degree() < n || g.top_degree() < n {
        return Err(Error::CutoffTooSmall {
            needed: n,
            context: format!("fiber product through degree {upto}"),
        });
    }
    let (a, b) = (f.source().clone(), g.source().clone());
    let spaces = par::map_range(n + 1, |k| Subspace::kernel(&f.matrix(k).hstack(&g.matrix(k).scale(&-Rational::one()))));
    let split = |k: usize, v: &QVector| -> (QVector, QVector) { (v[..a.dim(k)].to_vec(), v[a.dim(k)..].to_vec()) };
    let mut unit = a.unit().clone();
    unit.extend(b.unit().iter().cloned());
    let carrier = TruncatedDGA::from_subspaces(
        spaces.clone(),
        &unit,
        None,
        |k, v| {
            let (x, y) = split(k, v);
            let mut out = a.apply_d(k, &x)?;
            out.extend(b.apply_d(k, &y)?);
            Ok(out)
        },
        |i, u, j, v| {
            let ((x1, y1), (x2, y2)) = (split(i, u), split(j, v));
            let mut out = a.multiply(i, &x1, j, &x2)?;
            out.extend(b.multiply(i, &y1, j, &y2)?);
            Ok(out)
        },
    )?;
    let carrier = Arc::new(carrier);
    let proj = |take_a: bool| -> Result<DGMorphism> {
        let maps = (0..=n)
            .map(|k| {
                let cols: Vec<QVector> = spaces[k]
                    .basis()
                    .iter()
                    .map(|v| {
                        let (x, y) = split(k, v);
                        if take_a {
                            x
                        } else {
                            y
                        }
                    })
                    .collect();
                QMatrix::from_columns(if take_a { a.dim(k) } else { b.dim(k) }, &cols)
            })
            .collect();
        let target = if take_a { &a } else { &b };
        DGMorphism::new(carrier.clone(), Arc::new(target.with_cutoff(n)?), maps)
    };
    let (pr_a, pr_b) = (proj(true)?, proj(false)?);
    Ok(FiberProductDGA { f: f.clone(), g: g.clone(), carrier, spaces, pr_a, pr_b })
}

impl FiberProductDGA {
    pub fn carrier(&self) -> &Arc<TruncatedDGA> {
        &self.carrier
    }

    pub fn legs(&self) -> (&DGMorphism, &DGMorphism) {
        (&self.f, &self.g)
    }

    pub fn projections(&self) -> (&DGMorphism, &DGMorphism) {
        (&self.pr_a, &self.pr_b)
    }

    /// Carrier cohomology is available through this degree.
    pub fn upto(&self) -> usize {
        self.carrier.cutoff() - 1
    }

    /// Carrier coordinates of the pair `(a, b)`, or `None` if `f(a) != g(b)`.
    pub fn element(&self, k: usize, a: &[Rational], b: &[Rational]) -> Option<QVector> {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        self.spaces[k].coords(&v)
    }

    /// The pair `(a, b)` of a carrier vector.
    pub fn components(&self, k: usize, coords: &[Rational]) -> (QVector, QVector) {
        let v = self.spaces[k].vector(coords);
        let na = self.f.source().dim(k);
        (v[..na].to_vec(), v[na..].to_vec())
    }
}

/// One node of a long exact sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessNode {
    pub label: String,
    pub degree: usize,
    pub exact: bool,
}

/// `H^k(P) → H^k(A) ⊕ H^k(B) → H^k(C) → H^{k+1}(P)` for `k <= upto`.
#[derive(Clone, Debug)]
pub struct MayerVietorisReport {
    pub upto: usize,
    pub dims_fiber_product: Vec<usize>,
    pub dims_sum: Vec<usize>,
    pub dims_base: Vec<usize>,
    pub alpha: Vec<QMatrix>,
    pub beta: Vec<QMatrix>,
    /// `delta[k]: H^k(C) → H^{k+1}(P)` for `k < upto`.
    pub delta: Vec<QMatrix>,
    pub nodes: Vec<ExactnessNode>,
}

impl MayerVietorisReport {
    pub fn all_exact(&self) -> bool {
        self.nodes.iter().all(|n| n.exact)
    }

    pub fn connecting_ranks(&self) -> Vec<usize> {
        self.delta.iter().map(QMatrix::rank).collect()
    }
}

fn surjective_through(m: &DGMorphism, upto: usize) -> std::result::Result<(), usize> {
    (0..=upto).find(|&k| m.matrix(k).rank() != m.target().dim(k)).map_or(Ok(()), Err)
}

/// Kernel of `next` equals image of `prev` (with zero compositions).
fn exact_at(prev: Option<&QMatrix>, next: Option<&QMatrix>, dim: usize) -> bool {
    let r_prev = prev.map_or(0, QMatrix::rank);
    let r_next = next.map_or(0, QMatrix::rank);
    let composes = match (prev, next) {
        (Some(p), Some(n)) => n.mul(p).is_zero(),
        _ => true,
    };
    composes && r_prev + r_next == dim
}

pub fn mayer_vietoris(fp: &FiberProductDGA, upto: usize) -> Result<MayerVietorisReport> {
    if upto > fp.upto() {
        return Err(Error::CutoffTooSmall { needed: upto + 1, context: "Mayer-Vietoris sequence".into() });
    }
    let (f, g) = fp.legs();
    if let (Err(kf), Err(kg)) = (surjective_through(f, upto), surjective_through(g, upto)) {
        return Err(Error::Precondition(format!(
            "neither leg is surjective through degree {upto}: first leg fails in degree {kf}, second in degree {kg}"
        )));
    }
    let (pr_a, pr_b) = fp.projections();
    let hp = cohomology(fp.carrier(), upto)?;
    let ha = cohomology(pr_a.target(), upto)?;
    let hb = cohomology(pr_b.target(), upto)?;
    let hc: GradedCohomology = cohomology(f.target(), upto)?;
    let ia = pr_a.induced_map_with(&hp, &ha)?;
    let ib = pr_b.induced_map_with(&hp, &hb)?;
    let alpha: Vec<QMatrix> = ia.iter().zip(&ib).map(|(x, y)| x.vstack(y)).collect();
    let beta: Vec<QMatrix> = (0..=upto)
        .map(|k| {
            let cols: Vec<QVector> = ha
                .reps(k)
                .iter()
                .map(|r| f.apply(k, r))
                .chain(hb.reps(k).iter().map(|r| g.apply(k, r).into_iter().map(|x| -x).collect()))
                .map(|c| hc.class_of(k, &c).expect("images of cocycles are cocycles"))
                .collect();
            QMatrix::from_columns(hc.dim(k), &cols)
        })
        .collect();
    let delta = (0..upto)
        .map(|k| {
            let sum = f.matrix(k).hstack(&g.matrix(k).scale(&-Rational::one()));
            let na = f.source().dim(k);
            let cols = hc
                .reps(k)
                .iter()
                .map(|c| {
                    let lift = solve(&sum, c)?.ok_or_else(|| Error::Precondition(format!("cannot lift a class in degree {k}")))?;
                    let da = f.source().apply_d(k, &lift[..na])?;
                    let db = g.source().apply_d(k, &lift[na..])?;
                    let p = fp.element(k + 1, &da, &db).ok_or_else(|| Error::Input("coboundary of a lift left the fiber product".into()))?;
                    hp.class_of(k + 1, &p).ok_or_else(|| Error::Input("connecting image is not closed".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(QMatrix::from_columns(hp.dim(k + 1), &cols))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut nodes = Vec::new();
    for k in 0..=upto {
        let dsum = ha.dim(k) + hb.dim(k);
        nodes.push(ExactnessNode {
            label: "H(P)".into(),
            degree: k,
            exact: exact_at(if k > 0 { Some(&delta[k - 1]) } else { None }, Some(&alpha[k]), hp.dim(k)),
        });
        nodes.push(ExactnessNode { label: "H(A)+H(B)".into(), degree: k, exact: exact_at(Some(&alpha[k]), Some(&beta[k]), dsum) });
        if k < upto {
            nodes.push(ExactnessNode { label: "H(C)".into(), degree: k, exact: exact_at(Some(&beta[k]), Some(&delta[k]), hc.dim(k)) });
        }
    }
    Ok(MayerVietorisReport {
        upto,
        dims_fiber_product: hp.dims(),
        dims_sum: (0..=upto).map(|k| ha.dim(k) + hb.dim(k)).collect(),
        dims_base: hc.dims(),
        alpha,
        beta,
        delta,
        nodes,
    })
}

/// `ℚ ⊕ (Ω′ ⊗ dt)`: `Ω′^1` is a complement of `d(m^0)` in `m^1`, `Ω′^k = m^k`
/// for `k >= 2`, and `Ω′^k ⊗ dt` sits in degree `k + 1`.
#[derive(Clone, Debug)]
pub struct SuspensionModel {
    carrier: Arc<TruncatedDGA>,
    complement: Vec<QVector>,
    source_dims: Vec<usize>,
}

impl SuspensionModel {
    pub fn carrier(&self) -> &Arc<TruncatedDGA> {
        &self.carrier
    }

    /// Basis of `Ω′^1` inside `m^1`.
    pub fn complement_choice(&self) -> &[QVector] {
        &self.complement
    }

    /// The form `w` in `m^{j-1}` behind carrier basis element `i` of degree
    /// `j >= 2`.
    pub fn form_of(&self, j: usize, i: usize) -> QVector {
        if j == 2 {
            self.complement[i].clone()
        } else {
            unit_vec(self.source_dims[j - 1], i)
        }
    }
}

pub fn suspension_model(m: &TruncatedDGA) -> Result<SuspensionModel> {
    if m.cutoff() == 0 {
        return Err(Error::CutoffTooSmall { needed: 1, context: "suspension model".into() });
    }
    let h0 = cohomology(m, 0)?;
    if h0.dim(0) != 1 {
        return Err(Error::Precondition(format!("suspension model needs H^0 = Q, got dimension {}", h0.dim(0))));
    }
    let n = m.cutoff();
    let d0 = m.d_matrix(0)?;
    let image: Vec<QVector> = Subspace::image(d0).basis().to_vec();
    let complement = complement_basis(&image, m.dim(1));
    let dims: Vec<usize> =
        (0..=n).map(|j| match j { 0 => 1, 1 => 0, 2 => complement.len(), _ => m.dim(j - 1) }).collect();
    let form = |j: usize, i: usize| -> QVector { if j == 2 { complement[i].clone() } else { unit_vec(m.dim(j - 1), i) } };
    let labels: Vec<Vec<String>> = (0..=n)
        .map(|j| match j {
            0 => vec!["1".to_string()],
            1 => Vec::new(),
            _ => (0..dims[j])
                .map(|i| {
                    if j == 2 {
                        let nz: Vec<String> = complement[i]
                            .iter()
                            .enumerate()
                            .filter(|(_, x)| !num::Zero::is_zero(*x))
                            .map(|(p, _)| m.labels(1)[p].clone())
                            .collect();
                        format!("{}*dt", nz.join("+"))
                    } else {
                        format!("{}*dt", m.labels(j - 1)[i])
                    }
                })
                .collect(),
        })
        .collect();
    let diff = (0..n)
        .map(|j| {
            if j < 2 {
                return Ok(QMatrix::zeros(dims[j + 1], dims[j]));
            }
            let cols = (0..dims[j])
                .map(|i| {
                    let dw = m.apply_d(j - 1, &form(j, i))?;
                    Ok(dw)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(QMatrix::from_columns(dims[j + 1], &cols))
        })
        .collect::<Result<Vec<_>>>()?;
    let carrier = TruncatedDGA::from_fn(labels, vec![Rational::one()], diff, |i, a, j, b| {
        let mut v = zero_vec(dims[i + j]);
        match (i, j) {
            (0, _) => v[b] = Rational::one(),
            (_, 0) => v[a] = Rational::one(),
            _ => {}
        }
        Ok(Some(v))
    })?;
    Ok(SuspensionModel { carrier: Arc::new(carrier), complement, source_dims: m.dims() })
}

/// Evaluation of weight-bounded forms on `Δ[1]` at vertex `vertex`.
fn endpoint_evaluation(forms: &FormSpace, vertex: usize) -> Result<QMatrix> {
    forms.pullback_matrix(&FormSpace::new(0, forms.weight(), 0), &[vertex], 0)
}

/// The data `m ⊗ A(Δ[1]) → m × m ← ℚ × ℚ` whose fiber product models the
/// unreduced suspension; the left leg evaluates the interval factor at both
/// endpoints.
#[derive(Clone, Debug)]
pub struct SuspensionTriple {
    pub cylinder: Arc<TruncatedDGA>,
    pub ends: Arc<TruncatedDGA>,
    pub points: Arc<TruncatedDGA>,
    pub f: DGMorphism,
    pub g: DGMorphism,
    layout: TensorLayout,
    dt_index: usize,
}

pub fn suspension_triple(m: &TruncatedDGA, weight: usize) -> Result<SuspensionTriple> {
    let n = m.cutoff();
    let forms = FormSpace::new(1, weight.max(1), n);
    let cylinder = Arc::new(tensor(m, &forms.dga()));
    let ends = Arc::new(direct_product(m, m));
    let points = Arc::new(direct_product(&point(n), &point(n)));
    let layout = TensorLayout::new(m.dims(), (0..=n).map(|k| forms.dim(k)).collect(), n);
    let ev: Vec<QMatrix> = (0..2).map(|v| endpoint_evaluation(&forms, v)).collect::<Result<_>>()?;
    let f_maps = (0..=n)
        .map(|k| {
            let mut mat = QMatrix::zeros(2 * m.dim(k), layout.dim(k));
            for idx in 0..layout.dim(k) {
                let (i, p, r) = layout.split(k, idx);
                if i != k {
                    continue;
                }
                for (e, block) in ev.iter().enumerate() {
                    let c = block.get(0, r);
                    mat.set(e * m.dim(k) + p, idx, c);
                }
            }
            mat
        })
        .collect();
    let f = DGMorphism::new(cylinder.clone(), ends.clone(), f_maps)?;
    let g_maps = (0..=n)
        .map(|k| {
            let mut mat = QMatrix::zeros(2 * m.dim(k), points.dim(k));
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
    let g = DGMorphism::new(points.clone(), ends.clone(), g_maps)?;
    let dt_index = (0..forms.dim(1))
        .find(|&i| forms.basis_form(1, i) == crate::polyforms::PolyForm::dt(1, 1))
        .expect("dt1 is a basis form");
    Ok(SuspensionTriple { cylinder, ends, points, f, g, layout, dt_index })
}

impl SuspensionTriple {
    /// `w ⊗ dt` in the cylinder, for `w` in `m^{k-1}`.
    pub fn times_dt(&self, k: usize, w: &[Rational]) -> QVector {
        let mut v = zero_vec(self.layout.dim(k));
        for (p, x) in w.iter().enumerate() {
            v[self.layout.index(k, k - 1, p, self.dt_index)] = x.clone();
        }
        v
    }

    /// The inclusion `ξ: ℚ ⊕ (Ω′ ⊗ dt) → cylinder ×_{ends} points`,
    /// `ξ(1) = 1` and `ξ(w ⊗ dt) = (w ⊗ dt, 0)`.
    pub fn suspension_inclusion(&self, sm: &SuspensionModel, fp: &FiberProductDGA) -> Result<DGMorphism> {
        let top = fp.carrier().cutoff().min(sm.carrier().cutoff());
        let maps = (0..=top)
            .map(|k| {
                let cols = (0..sm.carrier().dim(k))
                    .map(|i| {
                        let (a, b) = if k == 0 {
                            (self.cylinder.unit().clone(), self.points.unit().clone())
                        } else {
                            (self.times_dt(k, &sm.form_of(k, i)), zero_vec(self.points.dim(k)))
                        };
                        fp.element(k, &a, &b).ok_or_else(|| Error::Input(format!("image in degree {k} is not in the fiber product")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(QMatrix::from_columns(fp.carrier().dim(k), &cols))
            })
            .collect::<Result<Vec<_>>>()?;
        let src = Arc::new(sm.carrier().with_cutoff(top)?);
        let tgt = Arc::new(fp.carrier().with_cutoff(top)?);
        DGMorphism::new(src, tgt, maps)
    }
}

/// Whether `theta: glued → fp` is a quasi-isomorphism through `upto`.
pub fn theta_equivalence_check(fp: &FiberProductDGA, glued: &TruncatedDGA, theta: &DGMorphism, upto: usize) -> Result<bool> {
    let n = theta.top_degree();
    if **theta.source() != glued.with_cutoff(n.min(glued.cutoff()))? || **theta.target() != fp.carrier().with_cutoff(n.min(fp.carrier().cutoff()))? {
        return Err(Error::Input("comparison map must run from the glued algebra to the fiber product".into()));
    }
    Ok(theta.is_quasi_iso(upto)?.is_quasi_iso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdga::{quotient_by_monomials, FreeCDGA};
    use crate::graded::Monomial;

    fn s2(cutoff: usize) -> TruncatedDGA {
        quotient_by_monomials(&FreeCDGA::parse(&[("x", 2)], &[]).unwrap(), &[Monomial::from_exponents(vec![2])], cutoff).unwrap()
    }

    #[test]
    fn identity_legs_give_the_diagonal() {
        let a = Arc::new(s2(5));
        let id = DGMorphism::identity(a.clone());
        let fp = fiber_product(&id, &id, 4).unwrap();
        assert_eq!(fp.carrier().dims(), a.with_cutoff(5).unwrap().dims());
        let mv = mayer_vietoris(&fp, 4).unwrap();
        assert!(mv.all_exact());
        assert!(mv.connecting_ranks().iter().all(|&r| r == 0));
    }

    #[test]
    fn suspension_of_two_sphere() {
        let sm = suspension_model(&s2(7)).unwrap();
        let h = cohomology(sm.carrier(), 6).unwrap();
        assert_eq!(h.dims(), vec![1, 0, 0, 1, 0, 0, 0]);
        let tri = suspension_triple(&s2(7), 2).unwrap();
        let fp = fiber_product(&tri.f, &tri.g, 6).unwrap();
        let xi = tri.suspension_inclusion(&sm, &fp).unwrap();
        xi.validate().unwrap();
        assert!(theta_equivalence_check(&fp, sm.carrier(), &xi, 6).unwrap());
        let mv = mayer_vietoris(&fp, 5).unwrap();
        assert!(mv.all_exact());
    }

    #[test]
    fn suspension_of_point() {
        let sm = suspension_model(&point(3)).unwrap();
        assert_eq!(cohomology(sm.carrier(), 2).unwrap().dims(), vec![1, 0, 0]);
    }
}
