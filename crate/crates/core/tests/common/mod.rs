//! Strategies and checks shared by the property suites and the acceptance
//! run. Each check returns `Err` with a description on the first failure.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use ratmodel::cdga::{cohomology, point, truncate, FreeCDGA, TruncatedDGA};
use ratmodel::exactlin::{kernel_basis, qf, rref, QMatrix, Rational};
use ratmodel::fixtures::{circle_system, cpn};
use ratmodel::graded::{Element, FreeGCA, GeneratorSpec};
use ratmodel::localsys::{
    fiber_product_system, forms_system, forms_system_morphism, pullback, pullback_morphism, FiniteLocalSystem, SystemMorphism,
};
use ratmodel::gluing::suspension_triple;
use ratmodel::polyforms::forms_dga;
use ratmodel::simplicial::{SimplicialComplexK, SimplicialMap};
use ratmodel::sullivan::loop_model;

pub const CASES: u32 = 100;

pub fn config() -> Config {
    Config { cases: CASES, failure_persistence: None, ..Config::default() }
}

fn fail(msg: impl Into<String>) -> TestCaseError {
    TestCaseError::fail(msg.into())
}

/// Homogeneous element of degree `deg` with coefficients taken cyclically
/// from `coeffs`.
fn element(alg: &FreeGCA, deg: u32, coeffs: &[i64]) -> Element {
    let mut e = Element::zero();
    for (i, m) in alg.basis_in_degree(deg).into_iter().enumerate() {
        let c = coeffs[i % coeffs.len()];
        if c != 0 {
            e.add_term(m, Rational::from_integer(c.into()));
        }
    }
    e
}

#[derive(Clone, Debug)]
pub struct GradedCase {
    pub degrees: Vec<u32>,
    pub elem_degrees: [u32; 3],
    pub coeffs: [Vec<i64>; 3],
}

pub fn graded_case() -> impl Strategy<Value = GradedCase> {
    (
        prop::collection::vec(1u32..=4, 1..=4),
        [0u32..=5, 0u32..=5, 0u32..=5],
        [
            prop::collection::vec(-3i64..=3, 1..=6),
            prop::collection::vec(-3i64..=3, 1..=6),
            prop::collection::vec(-3i64..=3, 1..=6),
        ],
    )
        .prop_map(|(degrees, elem_degrees, coeffs)| GradedCase { degrees, elem_degrees, coeffs })
}

/// `ab = (-1)^{|a||b|} ba` and `(ab)c = a(bc)`.
pub fn check_graded(c: &GradedCase) -> Result<(), TestCaseError> {
    let specs = c.degrees.iter().enumerate().map(|(i, &d)| GeneratorSpec::new(format!("g{i}"), d)).collect();
    let alg = FreeGCA::new(specs).map_err(|e| fail(e.to_string()))?;
    let [da, db, dc] = c.elem_degrees;
    let a = element(&alg, da, &c.coeffs[0]);
    let b = element(&alg, db, &c.coeffs[1]);
    let cc = element(&alg, dc, &c.coeffs[2]);
    let mul = |x: &Element, y: &Element| alg.multiply(x, y).map_err(|e| fail(e.to_string()));
    let ab = mul(&a, &b)?;
    let ba = mul(&b, &a)?;
    let sign = if da * db % 2 == 1 { -Rational::one() } else { Rational::one() };
    if ab != ba.scale(&sign) {
        return Err(fail(format!("Koszul sign fails for degrees {da}, {db}")));
    }
    if mul(&ab, &cc)? != mul(&a, &mul(&b, &cc)?)? {
        return Err(fail("associativity fails"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct MatrixCase {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(i64, i64)>,
}

pub fn matrix_case() -> impl Strategy<Value = MatrixCase> {
    (0usize..=6, 0usize..=8).prop_flat_map(|(rows, cols)| {
        prop::collection::vec((-3i64..=3, 1i64..=3), rows * cols).prop_map(move |entries| MatrixCase { rows, cols, entries })
    })
}

impl MatrixCase {
    pub fn matrix(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (n, d) = self.entries[i * self.cols + j];
                // sparsify: roughly a third of the entries vanish
                if n.rem_euclid(3) != 0 {
                    m.set(i, j, qf(n, d));
                }
            }
        }
        m
    }
}

/// Rank-nullity, kernel vectors annihilated, row rank equals column rank,
/// and RREF is idempotent.
pub fn check_matrix(c: &MatrixCase) -> Result<(), TestCaseError> {
    let m = c.matrix();
    let r = rref(&m);
    let ker = kernel_basis(&m);
    if r.rank + ker.len() != m.cols() {
        return Err(fail(format!("rank {} + nullity {} != {}", r.rank, ker.len(), m.cols())));
    }
    if ker.iter().any(|v| m.mul_vec(v).iter().any(|x| !x.is_zero())) {
        return Err(fail("kernel vector not annihilated"));
    }
    if m.transpose().rank() != r.rank {
        return Err(fail("row rank differs from column rank"));
    }
    let again = rref(&r.reduced);
    if again.reduced != r.reduced || again.pivots != r.pivots {
        return Err(fail("RREF is not idempotent"));
    }
    Ok(())
}

fn cdga_pool() -> &'static Vec<FreeCDGA> {
    static POOL: OnceLock<Vec<FreeCDGA>> = OnceLock::new();
    POOL.get_or_init(|| {
        let cp1 = FreeCDGA::parse(&[("x", 2), ("y", 3)], &[("y", "x^2")]).unwrap();
        let cp2 = FreeCDGA::parse(&[("x", 2), ("y", 5)], &[("y", "x^3")]).unwrap();
        let heis = FreeCDGA::parse(&[("a", 1), ("b", 1), ("c", 1)], &[("c", "a*b")]).unwrap();
        let mixed = FreeCDGA::parse(&[("x", 2), ("u", 3), ("w", 3)], &[("u", "x^2")]).unwrap();
        vec![loop_model(&cp1).unwrap(), loop_model(&cp2).unwrap(), heis, mixed, cp2]
    })
}

#[derive(Clone, Debug)]
pub struct CdgaCase {
    pub which: usize,
    pub da: u32,
    pub db: u32,
    pub ca: Vec<i64>,
    pub cb: Vec<i64>,
}

pub fn cdga_case() -> impl Strategy<Value = CdgaCase> {
    (0usize..5, 0u32..=5, 0u32..=5, prop::collection::vec(-3i64..=3, 1..=5), prop::collection::vec(-3i64..=3, 1..=5))
        .prop_map(|(which, da, db, ca, cb)| CdgaCase { which, da, db, ca, cb })
}

/// `d² = 0` and `d(ab) = (da)b + (-1)^{|a|} a(db)`.
pub fn check_cdga(c: &CdgaCase) -> Result<(), TestCaseError> {
    let f = &cdga_pool()[c.which];
    let alg = f.algebra();
    let a = element(alg, c.da, &c.ca);
    let b = element(alg, c.db, &c.cb);
    if !f.d(&f.d(&a)).is_zero() {
        return Err(fail("d^2 != 0"));
    }
    let mul = |x: &Element, y: &Element| alg.multiply(x, y).map_err(|e| fail(e.to_string()));
    let lhs = f.d(&mul(&a, &b)?);
    let sign = if c.da % 2 == 1 { -Rational::one() } else { Rational::one() };
    let rhs = mul(&f.d(&a), &b)?.add(&mul(&a, &f.d(&b))?.scale(&sign));
    if lhs != rhs {
        return Err(fail("Leibniz rule fails"));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct EulerCase {
    pub which: usize,
    pub cutoff: usize,
    pub simplex: usize,
    pub weight: usize,
}

pub fn euler_case() -> impl Strategy<Value = EulerCase> {
    (0usize..7, 2usize..=6, 0usize..=2, 1usize..=3).prop_map(|(which, cutoff, simplex, weight)| EulerCase { which, cutoff, simplex, weight })
}

impl EulerCase {
    pub fn algebra(&self) -> TruncatedDGA {
        match self.which {
            5 => forms_dga(self.simplex, self.weight, self.cutoff),
            6 => cpn(self.weight as u32, self.cutoff),
            i => truncate(&cdga_pool()[i], self.cutoff),
        }
    }
}

/// `Σ (-1)^k dim A^k = Σ (-1)^k dim H^k` through the cutoff, counting the
/// top degree as closed.
pub fn check_euler(c: &EulerCase) -> Result<(), TestCaseError> {
    let a = c.algebra();
    let n = a.cutoff();
    let h = cohomology(&a, n - 1).map_err(|e| fail(e.to_string()))?;
    let top = a.dim(n) - a.d_matrix(n - 1).map_err(|e| fail(e.to_string()))?.rank();
    let sgn = |k: usize, x: usize| if k % 2 == 0 { x as i64 } else { -(x as i64) };
    let chi_a: i64 = (0..=n).map(|k| sgn(k, a.dim(k))).sum();
    let chi_h: i64 = (0..n).map(|k| sgn(k, h.dim(k))).sum::<i64>() + sgn(n, top);
    if chi_a != chi_h {
        return Err(fail(format!("Euler characteristics differ: {chi_a} vs {chi_h}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct PullbackCase {
    pub twisted: bool,
    /// Order-preserving vertex map from the double cover to the 3-cycle.
    pub u: Vec<usize>,
    /// A nondecreasing walk in the double cover, read as a map from a path:
    /// each step stays or moves to a larger neighbor, chosen by index.
    pub start: usize,
    pub steps: Vec<usize>,
}

const COVER_EDGES: [(usize, usize); 6] = [(0, 2), (2, 4), (1, 4), (1, 3), (3, 5), (0, 5)];

pub fn pullback_case() -> impl Strategy<Value = PullbackCase> {
    let u = prop::collection::vec(0usize..3, 6)
        .prop_filter("order-preserving on every edge", |u| COVER_EDGES.iter().all(|&(a, b)| u[a] <= u[b]));
    (any::<bool>(), u, 0usize..6, prop::collection::vec(0usize..3, 1..=4))
        .prop_map(|(twisted, u, start, steps)| PullbackCase { twisted, u, start, steps })
}

impl PullbackCase {
    fn walk(&self) -> Vec<usize> {
        let mut walk = vec![self.start];
        for &s in &self.steps {
            let cur = *walk.last().expect("nonempty");
            let mut options = vec![cur];
            options.extend(COVER_EDGES.iter().filter(|&&(a, _)| a == cur).map(|&(_, b)| b));
            walk.push(options[s % options.len()]);
        }
        walk
    }
}

fn path(len: usize) -> SimplicialComplexK {
    let edges: Vec<Vec<usize>> = (0..len).map(|i| vec![i, i + 1]).collect();
    SimplicialComplexK::from_simplices(len + 1, &edges).unwrap()
}

fn same_system(a: &FiniteLocalSystem, b: &FiniteLocalSystem) -> bool {
    a.base() == b.base()
        && a.base().all_simplices().all(|s| {
            **a.fiber(s) == **b.fiber(s) && (s.len() < 2 || (0..s.len()).all(|i| a.face_map(s, i).matrices() == b.face_map(s, i).matrices()))
        })
}

struct Legs {
    f: SystemMorphism,
    g: SystemMorphism,
}

fn legs() -> &'static Legs {
    static LEGS: OnceLock<Legs> = OnceLock::new();
    LEGS.get_or_init(|| {
        let c3 = SimplicialComplexK::cycle(3);
        let tri = suspension_triple(&point(2), 1).unwrap();
        let none = BTreeMap::new();
        let e1 = forms_system(&c3, 1, &tri.cylinder, &none).unwrap();
        let e0 = forms_system(&c3, 1, &tri.ends, &none).unwrap();
        let e2 = forms_system(&c3, 1, &tri.points, &none).unwrap();
        Legs { f: forms_system_morphism(&e1, &e0, 1, &tri.f).unwrap(), g: forms_system_morphism(&e2, &e0, 1, &tri.g).unwrap() }
    })
}

fn systems() -> &'static [FiniteLocalSystem; 2] {
    static SYS: OnceLock<[FiniteLocalSystem; 2]> = OnceLock::new();
    SYS.get_or_init(|| [circle_system(false, 1, 3).unwrap(), circle_system(true, 1, 3).unwrap()])
}

/// `v*(u*E) = (uv)*E`, and pulling back a fiber-product system agrees with
/// the fiber product of the pulled-back legs.
pub fn check_pullback(c: &PullbackCase) -> Result<(), TestCaseError> {
    let err = |e: ratmodel::Error| fail(e.to_string());
    let c3 = SimplicialComplexK::cycle(3);
    let (c6, _) = ratmodel::fixtures::double_cover();
    let u = SimplicialMap::new(&c6, &c3, c.u.clone()).map_err(err)?;
    let walk = c.walk();
    let p = path(c.steps.len());
    let v = SimplicialMap::new(&p, &c6, walk.clone()).map_err(err)?;
    let uv = SimplicialMap::new(&p, &c3, walk.iter().map(|&w| c.u[w]).collect()).map_err(err)?;
    let e = &systems()[c.twisted as usize];
    let once = pullback(&pullback(e, &c6, &u).map_err(err)?, &p, &v).map_err(err)?;
    let direct = pullback(e, &p, &uv).map_err(err)?;
    if !same_system(&once, &direct) {
        return Err(fail("pullback is not functorial"));
    }
    if !once.validate().ok() {
        return Err(fail("pullback fails validation"));
    }
    let l = legs();
    let fp = fiber_product_system(&l.f, &l.g, 1).map_err(err)?;
    let pulled = pullback(fp.system(), &c6, &u).map_err(err)?;
    let fu = pullback_morphism(&l.f, &c6, &u).map_err(err)?;
    let gu = pullback_morphism(&l.g, &c6, &u).map_err(err)?;
    let glued = fiber_product_system(&fu, &gu, 1).map_err(err)?;
    if !same_system(&pulled, glued.system()) {
        return Err(fail("pullback does not commute with the fiber product"));
    }
    Ok(())
}

/// Runs every suite with [`CASES`] cases; returns `(name, outcome)`.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    fn run<S: Strategy>(s: S, f: impl Fn(&S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
    where
        S::Value: std::fmt::Debug,
    {
        TestRunner::new(config()).run(&s, |v| f(&v)).map_err(|e| e.to_string())
    }
    vec![
        ("graded Koszul sign and associativity", run(graded_case(), check_graded)),
        ("exactlin rank-nullity and RREF idempotence", run(matrix_case(), check_matrix)),
        ("cdga d^2 and Leibniz", run(cdga_case(), check_cdga)),
        ("cdga Euler characteristic", run(euler_case(), check_euler)),
        ("localsys pullback and fiber product", run(pullback_case(), check_pullback)),
    ]
}
